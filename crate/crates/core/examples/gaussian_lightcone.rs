//! Harmonic chain vacuum: a displacement outside an interval cannot reach
//! the shrinking interval under nearest-neighbour Verlet steps, while the
//! exact propagator leaves an exponentially small tail.

use conelab::gaussian::{reduced_state_distance, vacuum_state, CouplingMatrix, Evolution};
use conelab::lattice::{GridSpec, Region};

fn main() -> conelab::Result<()> {
    let grid = GridSpec::periodic_1d(128, 1.0)?;
    let k = CouplingMatrix::chain(grid, 0.5)?;
    let vac = vacuum_state(&k)?;
    let (c, r, dt) = (64.0, 24.0, 0.5);
    let kicked = vac.displace(64 + 24 + 12, 1.0, 0.0)?;
    let (mut a, mut b) = (vac.clone(), kicked.clone());
    for n in 1..=12 {
        a = a.evolve(&k, dt, Evolution::SymplecticSteps { dt })?;
        b = b.evolve(&k, dt, Evolution::SymplecticSteps { dt })?;
        let slice = Region::interval(c, r - n as f64 * dt);
        println!("Verlet step {n:2}: distance {:e}", reduced_state_distance(&a.reduce(&slice)?, &b.reduce(&slice)?)?);
    }
    let t = 6.0;
    let slice = Region::interval(c, r - t);
    let ea = vac.evolve(&k, t, Evolution::ExactSpectral)?.reduce(&slice)?;
    let eb = kicked.evolve(&k, t, Evolution::ExactSpectral)?.reduce(&slice)?;
    println!("exact propagator at t = {t}: distance {:e}", reduced_state_distance(&ea, &eb)?);
    Ok(())
}
