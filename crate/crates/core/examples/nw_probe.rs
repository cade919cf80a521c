//! A Newton-Wigner wave function that vanishes on a ball leaks into the
//! ball's contracting slice, with weight falling off with distance.

use conelab::lattice::{poly_bump, Field, GridSpec, Region};
use conelab::localization::nw_locality_probe;
use num_complex::Complex64;

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(4096, 1.0 / 64.0)?;
    let region = Region::ball(vec![24.0], 8.0);
    for d in [2.0, 4.0, 8.0, 12.0] {
        let c = 24.0 + 8.0 + d + 0.5;
        let psi = Field::scalar_from_fn(grid, |x| Complex64::new(poly_bump(x[0] - c, 0.5, 6), 0.0));
        let probe = nw_locality_probe(&psi, &region, 1.0, 1.0)?;
        println!("distance {d:5.1}: probability {:.3e}  penetration {:.3e}", probe.probability, probe.penetration);
    }
    Ok(())
}
