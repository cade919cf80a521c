//! Interval entropy of a nearly massless chain grows like (1/3) log ℓ.

use conelab::fit::linear_fit;
use conelab::gaussian::{interval_sites, mutual_information, vacuum_state, CouplingMatrix};
use conelab::lattice::GridSpec;

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(128, 1.0)?;
    let vac = vacuum_state(&CouplingMatrix::chain(grid, 1e-3)?)?;
    let mut logs = Vec::new();
    let mut ent = Vec::new();
    for l in [4usize, 8, 16, 32] {
        let s = vac.reduce(&interval_sites(128, 0, l)?)?.entropy()?.entropy;
        println!("l = {l:3}  S = {s:.4}");
        logs.push((l as f64).ln());
        ent.push(s);
    }
    println!("slope in log l: {:.3}", linear_fit(&logs, &ent).0);
    let mi = mutual_information(&vac, &interval_sites(128, 0, 8)?, &interval_sites(128, 8, 8)?)?;
    println!("mutual information of adjacent intervals: {mi:.4}");
    Ok(())
}
