//! Potentials of a moving charge in Lorenz gauge. Prints the gauge and
//! charge-conservation residuals as the lattice is refined.

use conelab::lattice::GridSpec;
use conelab::wave::{continuity_residual, lorenz_residual, maxwell_rest_start, MovingCharge};

fn main() -> conelab::Result<()> {
    let src = MovingCharge::dipole(16.0, 0.3, 1.0, 1.0);
    for n in [256usize, 512, 1024] {
        let grid = GridSpec::periodic_1d(n, 32.0 / n as f64)?;
        let mut state = maxwell_rest_start(grid, &src, 0.5)?;
        let (mut lorenz, mut cont) = (0.0f64, 0.0f64);
        while state.time() < 4.0 {
            state = state.step_leapfrog(&src)?;
            lorenz = lorenz.max(lorenz_residual(&state)?.max_abs());
            cont = cont.max(continuity_residual(&src, &grid, state.time(), state.dt()).max_abs());
        }
        let h2 = grid.spacing().powi(2);
        println!("N = {n:5}  Lorenz {lorenz:.3e} ({:.3} h^2)  continuity {cont:.3e} ({:.3} h^2)", lorenz / h2, cont / h2);
    }
    Ok(())
}
