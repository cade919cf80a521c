//! Independent reference values shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use conelab::localization::FockState;
use num_complex::Complex64;

/// `K₁(x) = ∫₀^∞ exp(−x cosh u) cosh u du`, trapezoid rule.
pub fn bessel_k1(x: f64) -> f64 {
    let n = 200_000;
    let top = 30.0;
    let h = top / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let u = i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * (-x * u.cosh()).exp() * u.cosh();
    }
    s * h
}

/// `J₁(x) = (1/π) ∫₀^π cos(θ − x sin θ) dθ`, trapezoid rule (spectrally
/// accurate for this periodic integrand).
pub fn bessel_j1(x: f64) -> f64 {
    let n = 2000;
    let h = PI / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let th = i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * (th - x * th.sin()).cos();
    }
    s * h / PI
}

/// `m K₁(m r) / (4π² r)`.
pub fn wightman_closed_form(r: f64, m: f64) -> f64 {
    m * bessel_k1(m * r) / (4.0 * PI * PI * r)
}

/// Commutator function inside the cone, `−m J₁(mτ) / (4π τ)`, `τ² = t² − r²`.
pub fn pauli_jordan_timelike(t: f64, r: f64, m: f64) -> f64 {
    let tau = (t * t - r * r).sqrt();
    -m * bessel_j1(m * tau) / (4.0 * PI * tau)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn occupations_factorial(ms: &[usize]) -> f64 {
    let mut counts = BTreeMap::new();
    for &s in ms {
        *counts.entry(s).or_insert(0usize) += 1;
    }
    counts.values().map(|&o| (1..=o).map(|k| k as f64).product::<f64>()).product()
}

fn multisets_of(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in multisets_of(&items[i..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Global state in the occupation basis, `α_M = √(n!/Π o!) c(x_M)`, then an
/// explicit partial trace over outside occupations. Returns entries keyed by
/// (inside multiset, inside multiset).
pub fn brute_force_regional(state: &FockState, inside: &[usize]) -> BTreeMap<(Vec<usize>, Vec<usize>), Complex64> {
    let l = state.grid().extent();
    let h = state.grid().spacing();
    let n_max = state.n_max();
    let outside: Vec<usize> = (0..l).filter(|s| !inside.contains(s)).collect();
    let alpha = |m: &[usize]| -> Complex64 {
        let n = m.len();
        if n > n_max {
            return Complex64::default();
        }
        let idx = m.iter().fold(0, |acc, &s| acc * l + s);
        let c = state.amplitudes()[n][idx] * h.powf(0.5 * n as f64);
        let nf: f64 = (1..=n).map(|k| k as f64).product();
        c * (nf / occupations_factorial(m)).sqrt()
    };
    let mut rho = BTreeMap::new();
    for a_n in 0..=n_max {
        for b_n in 0..=n_max {
            for a in multisets_of(inside, a_n) {
                for b in multisets_of(inside, b_n) {
                    let mut acc = Complex64::default();
                    for k in 0..=n_max {
                        for out in multisets_of(&outside, k) {
                            let ma = sorted(a.iter().chain(&out).copied().collect());
                            let mb = sorted(b.iter().chain(&out).copied().collect());
                            acc += alpha(&ma) * alpha(&mb).conj();
                        }
                    }
                    rho.insert((a.clone(), b), acc);
                }
            }
        }
    }
    rho
}

/// Scenario texts that must be rejected, with the line of every problem
/// (`0` for problems without a line).
pub const MALFORMED: &[(&str, &[usize])] = &[
    ("experiment = kg_locality\n[solver]\ncfl = 1.5\n", &[3]),
    ("experiment = warp_drive\n", &[1]),
    ("[grid]\nextent = 64\n", &[0]),
    ("experiment = kg_locality\n[grid]\nextent = lots\n[solver]\ncfl = 0\n", &[3, 5]),
    ("experiment = kg_locality\n[solver]\nseeds = \nmass = -1\n", &[3, 4]),
    ("experiment = kg_locality\n[solvr]\nmass = 1\n", &[2]),
    ("experiment = kg_locality\n[grid]\nextent = 64\nextent = 128\n", &[4]),
    ("experiment = kg_locality\n[grid]\nthis line has no equals sign\n[region\n", &[3, 4]),
    ("experiment = nonseparability\n[solver]\nmass = 1\n[checks]\nreduced_tol = 0\n", &[3, 5]),
    ("experiment = fock_regional\n[solver]\nn_max = 5\n[checks]\ninside_max = 1e-3\n", &[3, 5]),
    ("experiment = two_point_scan\n[solver]\nsigma = -0.1\nnodes = 2\nr = \n", &[3, 4, 5]),
    ("experiment = gaussian_locality\n[solver]\nmass = 0\nmargins = 4, 2\n[output]\ncsv = maybe\n", &[3, 4, 6]),
    ("experiment = kg_locality\nColor = blue\n[grid]\ndim = 2\n", &[2, 4]),
    ("experiment = em_locality\n[solver]\nvelocity = 1.2\n[region]\ncenter = 1, 2\n", &[3, 5]),
];
