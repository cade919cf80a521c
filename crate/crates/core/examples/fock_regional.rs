//! Regional density matrix of a random few-boson state on a ring.

use conelab::gaussian::interval_sites;
use conelab::lattice::GridSpec;
use conelab::localization::{fock_regional_state, random_fock_state};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(10, 1.0)?;
    let state = random_fock_state(grid, 2, &mut ChaCha8Rng::seed_from_u64(4))?;
    let rho = fock_regional_state(&state, &interval_sites(10, 2, 4)?)?;
    println!("dimension {}", rho.dimension());
    println!("trace {:.12}", rho.trace());
    println!("smallest eigenvalue {:e}", rho.min_eigenvalue());
    println!("purity {:.4}, number-block entropy {:.4}", rho.purity(), rho.entropy());
    for (k, p) in rho.number_distribution().iter().enumerate() {
        println!("P({k} inside) = {p:.4}");
    }
    Ok(())
}
