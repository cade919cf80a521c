use conelab::audit::{scalar_twins, twin_run_divergence, LeapfrogSolver, Norm, DEFAULT_GUARD};
use conelab::dirac::SpinorState;
use conelab::gaussian::{interval_sites, vacuum_state, CouplingMatrix};
use conelab::lattice::{Field, GridSpec, Region};
use conelab::localization::{
    fock_regional_state, pauli_jordan, random_fock_state, single_particle_regional_state, wightman_equal_time,
    QuadratureSpec,
};
use conelab::scenario::parse_config;
use conelab::wave::NoSource;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn parser_errors_carry_valid_lines(lines in prop::collection::vec("[a-z_\\[\\]=0-9., -]{0,20}", 0..12)) {
        let text = lines.join("\n");
        if let Err(issues) = parse_config(&text) {
            prop_assert!(!issues.is_empty());
            for i in issues {
                if let Some(l) = i.line {
                    prop_assert!(l >= 1 && l <= lines.len().max(1));
                }
            }
        }
    }

    #[test]
    fn scalar_twins_agree_inside_the_cone(seed in any::<u64>(), mass in 0.0..2.0f64) {
        let grid = GridSpec::periodic_1d(256, 0.125).unwrap();
        let base = Region::interval(16.0, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = scalar_twins(&grid, &base, 2.0, mass, 1.0, &mut rng).unwrap();
        let r = twin_run_divergence(&LeapfrogSolver { source: NoSource }, &a, &b, &base, usize::MAX, DEFAULT_GUARD, Norm::Sup).unwrap();
        prop_assert!(r.peak_inside() <= 1e-13, "{}", r.peak_inside());
    }

    #[test]
    fn spectral_dirac_keeps_the_norm(seed in any::<u64>(), mass in 0.0..3.0f64, t in 0.0..20.0f64) {
        use rand::Rng;
        let grid = GridSpec::periodic_1d(64, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = Field::from_fn(grid, 2, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let s = SpinorState::new(psi, mass).unwrap();
        let n0 = s.total_probability();
        let n1 = s.evolve_spectral(t).unwrap().total_probability();
        prop_assert!(((n1 - n0) / n0).abs() < 1e-12);
    }

    #[test]
    fn fock_regional_state_is_a_density_matrix(seed in any::<u64>(), start in 0usize..8, len in 1usize..7, n_max in 1usize..3) {
        let grid = GridSpec::periodic_1d(8, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_fock_state(grid, n_max, &mut rng).unwrap();
        let rho = fock_regional_state(&state, &interval_sites(8, start, len).unwrap()).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-10);
        let dist = rho.number_distribution();
        prop_assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_vacuum_entropy_is_symmetric(start in 0usize..32, len in 1usize..32, mass in 0.05..2.0f64) {
        let grid = GridSpec::periodic_1d(32, 1.0).unwrap();
        let vac = vacuum_state(&CouplingMatrix::chain(grid, mass).unwrap()).unwrap();
        let s = |a, l| vac.reduce(&interval_sites(32, a, l).unwrap()).unwrap().entropy().unwrap().entropy;
        let (a, b) = (s(start, len), s((start + len) % 32, 32 - len));
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn single_particle_purity_is_determined_by_p(seed in any::<u64>(), start in 0usize..16, len in 1usize..16) {
        use rand::Rng;
        let grid = GridSpec::periodic_1d(16, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> = (0..16).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= n);
        let r = single_particle_regional_state(&Field::from_values(grid, 1, v).unwrap(), &interval_sites(16, start, len).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p));
        prop_assert!((r.purity - (r.p * r.p + (1.0 - r.p).powi(2))).abs() < 1e-14);
        prop_assert!(r.purity >= 0.5 - 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn commutator_is_odd_in_time(r in 0.5..4.0f64, t in 0.1..6.0f64) {
        let q = QuadratureSpec::for_mass(1.0);
        let a = pauli_jordan(t, r, 1.0, &q).unwrap();
        let b = pauli_jordan(-t, r, 1.0, &q).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-12), "{a} {b}");
    }

    #[test]
    fn wightman_is_positive_and_decreasing(r in 0.2..6.0f64, dr in 0.1..1.0f64) {
        let q = QuadratureSpec::for_mass(1.0);
        let a = wightman_equal_time(r, 1.0, &q).unwrap();
        let b = wightman_equal_time(r + dr, 1.0, &q).unwrap();
        prop_assert!(a > b && b > 0.0);
    }

    #[test]
    fn more_quadrature_nodes_agree(r in 0.3..5.0f64) {
        let coarse = QuadratureSpec::for_mass(1.0);
        let fine = QuadratureSpec { nodes: 2 * coarse.nodes, ..coarse };
        let a = wightman_equal_time(r, 1.0, &coarse).unwrap();
        let b = wightman_equal_time(r, 1.0, &fine).unwrap();
        prop_assert!(((a - b) / b).abs() < 1e-8);
    }
}
