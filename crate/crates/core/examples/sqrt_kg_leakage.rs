//! Positive-frequency evolution with the nonlocal operator √(m² − ∇²)
//! moves probability outside the light cone of its support; a local
//! second-order equation does not, up to discretisation error.

use conelab::lattice::{poly_bump, Field, GridSpec};
use conelab::spectral::{leakage_fraction, second_order_leakage};
use num_complex::Complex64;

fn main() -> conelab::Result<()> {
    let (length, t, hw, m) = (64.0, 0.25, 1.0 / 16.0, 1.0);
    for n in [4096usize, 8192, 16384] {
        let grid = GridSpec::periodic_1d(n, length / n as f64)?;
        let c = 0.5 * length;
        let psi = Field::scalar_from_fn(grid, |x| Complex64::new(poly_bump(x[0] - c, hw, 6), 0.0));
        let real = Field::scalar_from_fn(grid, |x| poly_bump(x[0] - c, hw, 6));
        println!(
            "N = {n:6}  sqrt-KG leakage {:.4e}  local control {:.4e}",
            leakage_fraction(&psi, m, t)?,
            second_order_leakage(&real, m, t, 0.5)?
        );
    }
    Ok(())
}
