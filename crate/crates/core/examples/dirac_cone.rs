//! A local kick to a Dirac spinor spreads at most one site per step of the
//! finite-difference scheme; the spectral propagator keeps the norm.

use conelab::lattice::{dilate_sites, Field, GridSpec};
use conelab::dirac::SpinorState;
use num_complex::Complex64;

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(128, 0.125)?;
    let base = Field::from_fn(grid, 2, |k, s| Complex64::new((s as f64 * 0.1 + k as f64).sin(), 0.0));
    let mut kicked = base.clone();
    kicked.component_mut(0)[64] += Complex64::new(0.0, 1.0);
    let mut support = vec![false; 128];
    support[64] = true;
    let (mut a, mut b) = (SpinorState::new(base, 1.0)?, SpinorState::new(kicked, 1.0)?);
    let dt = 0.5 * grid.spacing();
    for n in 1..=40 {
        a = a.step_fd(dt)?;
        b = b.step_fd(dt)?;
        let reach = dilate_sites(&grid, &support, n);
        let diff = a.difference(&b)?.psi().site_norm_sqr();
        let width = diff.iter().filter(|&&d| d > 0.0).count();
        let leaked = diff.iter().zip(&reach).any(|(&d, &r)| d > 0.0 && !r);
        if n % 10 == 0 {
            println!("step {n:3}: {width} sites differ, outside numerical cone: {leaked}");
        }
    }
    let spectral = a.evolve_spectral(50.0)?;
    println!("norm drift after spectral evolution: {:e}", spectral.total_probability() / a.total_probability() - 1.0);
    Ok(())
}
