//! Klein-Gordon twins that differ only outside an interval: the difference
//! stays exactly zero inside the shrinking cone.

use conelab::audit::{scalar_twins, twin_run_divergence, LeapfrogSolver, Norm, DEFAULT_GUARD};
use conelab::lattice::{GridSpec, Region};
use conelab::wave::NoSource;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(1024, 1.0 / 32.0)?;
    let base = Region::interval(16.0, 8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, b) = scalar_twins(&grid, &base, 2.0, 1.0, 1.0, &mut rng)?;
    let report = twin_run_divergence(&LeapfrogSolver { source: NoSource }, &a, &b, &base, usize::MAX, DEFAULT_GUARD, Norm::Sup)?;
    for (i, t) in report.times.iter().enumerate().step_by(32) {
        println!(
            "t = {t:6.3}  inside {:.3e}  outside {:.3e}",
            report.max_inside_contracting[i], report.max_outside_expanding[i]
        );
    }
    println!("peak inside difference: {:e}", report.peak_inside());
    Ok(())
}
