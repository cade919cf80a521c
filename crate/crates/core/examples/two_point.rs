//! Vacuum two-point functions of a free scalar: the Wightman function is
//! nonzero at spacelike separation, the commutator vanishes there, and the
//! Newton-Wigner overlap does not.

use conelab::localization::{nw_overlap, pauli_jordan, wightman_equal_time, QuadratureSpec};

fn main() -> conelab::Result<()> {
    let m = 1.0;
    let q = QuadratureSpec::for_mass(m);
    println!("{:>5} {:>5} {:>12} {:>12} {:>12}", "r", "t", "W(r, 0)", "[phi,phi]", "|NW|");
    for (r, t) in [(1.0, 0.0), (2.0, 0.5), (3.0, 1.0), (5.0, 1.0), (1.0, 2.0)] {
        println!(
            "{r:5.2} {t:5.2} {:12.4e} {:12.4e} {:12.4e}",
            wightman_equal_time(r, m, &q)?,
            pauli_jordan(t, r, m, &q)?,
            nw_overlap(t, r, m, &q)?.norm()
        );
    }
    Ok(())
}
