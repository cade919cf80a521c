//! Standard versus Newton-Wigner localization.
//!
//! Radial two-point functions of the free scalar field in 3+1 dimensions by
//! quadrature, Newton-Wigner regional density matrices for few-particle
//! states on a 1-d lattice, and the Newton-Wigner locality probe.

use std::f64::consts::PI;
use std::io::Write;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ball_mask, region_mask, Field, GridSpec, Region};
use crate::spectral::{SpectralState, SUPPORT_FLOOR};

/// Relative agreement required between the two node counts of a quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-9;

/// Absolute floor for the same comparison, for values that vanish.
pub const QUADRATURE_ATOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPointKind {
    Wightman,
    PauliJordan,
    NwOverlap,
}

impl TwoPointKind {
    pub fn name(self) -> &'static str {
        match self {
            TwoPointKind::Wightman => "wightman",
            TwoPointKind::PauliJordan => "pauli_jordan",
            TwoPointKind::NwOverlap => "nw_overlap",
        }
    }
}

/// Momentum cutoff, Gauss-Legendre nodes per panel and Gaussian smearing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub cutoff: f64,
    pub nodes: usize,
    pub sigma: f64,
}

impl QuadratureSpec {
    /// Cutoff `400 m`, 16 nodes, `σ = 0.1/m`.
    pub fn for_mass(mass: f64) -> Self {
        Self { cutoff: 400.0 * mass, nodes: 16, sigma: 0.1 / mass }
    }

    /// Smearing `sigma` with the cutoff at `12/σ` (at least `20 m`).
    pub fn smeared(mass: f64, sigma: f64) -> Self {
        Self { cutoff: (12.0 / sigma).max(20.0 * mass), nodes: 16, sigma }
    }

    pub fn validate(&self, mass: f64) -> Result<()> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("two-point functions need mass > 0, got {mass}")));
        }
        if !(self.cutoff >= 20.0 * mass) {
            return Err(Error::config(format!(
                "cutoff {} is below 20 m = {}",
                self.cutoff,
                20.0 * mass
            )));
        }
        if self.nodes < 4 {
            return Err(Error::config("quadrature needs at least 4 nodes per panel"));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::config("smearing must be >= 0"));
        }
        if self.sigma > 0.0 && self.sigma * self.cutoff < 8.0 {
            return Err(Error::config(format!(
                "sigma * cutoff = {} < 8 leaves the Gaussian tail uncontrolled",
                self.sigma * self.cutoff
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointQuery {
    pub r: f64,
    pub t: f64,
    pub mass: f64,
    pub kind: TwoPointKind,
    pub quadrature: QuadratureSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointValue {
    pub re: f64,
    pub im: f64,
    /// Difference between the two node counts.
    pub est_error: f64,
}

impl TwoPointQuery {
    pub fn evaluate(&self) -> Result<TwoPointValue> {
        match self.kind {
            TwoPointKind::Wightman => {
                if self.t != 0.0 {
                    return Err(Error::config("the Wightman function is evaluated at equal times only"));
                }
                let (v, e) = wightman_with_error(self.r, self.mass, &self.quadrature)?;
                Ok(TwoPointValue { re: v, im: 0.0, est_error: e })
            }
            TwoPointKind::PauliJordan => {
                let (v, e) = pauli_jordan_with_error(self.t, self.r, self.mass, &self.quadrature)?;
                Ok(TwoPointValue { re: v, im: 0.0, est_error: e })
            }
            TwoPointKind::NwOverlap => {
                let (v, e) = nw_overlap_with_error(self.t, self.r, self.mass, &self.quadrature)?;
                Ok(TwoPointValue { re: v.re, im: v.im, est_error: e })
            }
        }
    }
}

/// Panelled Gauss-Legendre integral of `f` over `[0, cutoff]`, panel width
/// at most `width`, run with `nodes` and `nodes + 8` points per panel.
fn panel_integral(f: impl Fn(f64) -> f64, cutoff: f64, width: f64, nodes: usize) -> Result<(f64, f64)> {
    let panels = (cutoff / width).ceil().max(1.0) as usize;
    let h = cutoff / panels as f64;
    let run = |deg: usize| -> Result<f64> {
        let gl = GaussLegendre::new(deg).map_err(|_| Error::Quadrature(format!("bad node count {deg}")))?;
        let mut acc = 0.0;
        for i in 0..panels {
            let a = i as f64 * h;
            acc += gl.integrate(a, a + h, &f);
        }
        Ok(acc)
    };
    let coarse = run(nodes)?;
    let fine = run(nodes + 8)?;
    let err = (fine - coarse).abs();
    if err > QUADRATURE_RTOL * fine.abs() + QUADRATURE_ATOL {
        return Err(Error::Quadrature(format!(
            "node counts {nodes} and {} disagree by {err:e}",
            nodes + 8
        )));
    }
    Ok((fine, err))
}

/// Panel width: a quarter of the fastest oscillation period and at most `1/m`.
fn panel_width(freq: f64, mass: f64) -> f64 {
    let osc = if freq > 0.0 { 0.5 * PI / freq } else { f64::INFINITY };
    osc.min(1.0 / mass)
}

/// `∫_Λ^∞ p^{−n} sin(pr) dp` (when `sine`) or the cosine version, by
/// repeated integration by parts; each level gains a factor `n/(Λr)`.
fn power_tail(n: u32, lam: f64, r: f64, sine: bool, depth: u32) -> f64 {
    let (s, c) = (lam * r).sin_cos();
    let lead = lam.powi(-(n as i32)) / r;
    if depth == 0 {
        return if sine { lead * c } else { -lead * s };
    }
    let rest = n as f64 / r * power_tail(n + 1, lam, r, !sine, depth - 1);
    if sine {
        lead * c - rest
    } else {
        -lead * s + rest
    }
}

/// `½(1 − p/E)` written without cancellation.
fn half_defect(p: f64, m: f64) -> f64 {
    let e = (p * p + m * m).sqrt();
    m * m / (2.0 * e * (e + p))
}

fn wightman_with_error(r: f64, m: f64, q: &QuadratureSpec) -> Result<(f64, f64)> {
    q.validate(m)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::precondition(format!("Wightman function needs r > 0, got {r}")));
    }
    let lam = q.cutoff;
    // p/(2E) = ½ − f(p); the constant part gives ∫ ½ sin(pr) dp = 1/(2r)
    let (body, err) = panel_integral(|p| half_defect(p, m) * (p * r).sin(), lam, panel_width(r, m), q.nodes)?;
    // f = ½(1 − (1 + x)^{−1/2}) with x = m²/p², expanded in powers of x
    let mut tail = 0.0;
    let mut coeff = 1.0;
    for k in 1..=6u32 {
        coeff *= (-0.5 - (k as f64 - 1.0)) / k as f64;
        let c_k = -0.5 * coeff * m.powi(2 * k as i32);
        tail += c_k * power_tail(2 * k, lam, r, true, 6);
    }
    let bracket = 0.5 / r - body - tail;
    let scale = 1.0 / (2.0 * PI * PI * r);
    Ok((scale * bracket, scale * err))
}

/// `⟨Ω|φ(x)φ(x′)|Ω⟩` at equal times for `|x − x′| = r`.
pub fn wightman_equal_time(r: f64, m: f64, q: &QuadratureSpec) -> Result<f64> {
    Ok(wightman_with_error(r, m, q)?.0)
}

fn pauli_jordan_with_error(t: f64, r: f64, m: f64, q: &QuadratureSpec) -> Result<(f64, f64)> {
    q.validate(m)?;
    if !(r > 0.0 && r.is_finite() && t.is_finite()) {
        return Err(Error::precondition(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    if q.sigma <= 0.0 {
        return Err(Error::precondition(
            "the commutator integral oscillates without decay; give sigma > 0",
        ));
    }
    let s2 = q.sigma * q.sigma;
    let f = |p: f64| {
        let e = (p * p + m * m).sqrt();
        p * (p * r).sin() * (e * t).sin() / e * (-s2 * p * p).exp()
    };
    let (v, err) = panel_integral(f, q.cutoff, panel_width(r + t.abs(), m), q.nodes)?;
    let scale = 1.0 / (2.0 * PI * PI * r);
    Ok((scale * v, scale * err))
}

/// Smeared commutator function `i⟨Ω|[φ(x, t), φ(x′, 0)]|Ω⟩`.
pub fn pauli_jordan(t: f64, r: f64, m: f64, q: &QuadratureSpec) -> Result<f64> {
    Ok(pauli_jordan_with_error(t, r, m, q)?.0)
}

fn nw_overlap_with_error(t: f64, r: f64, m: f64, q: &QuadratureSpec) -> Result<(Complex64, f64)> {
    q.validate(m)?;
    if q.sigma <= 0.0 {
        return Err(Error::precondition(
            "point-localized Newton-Wigner overlaps are distributions; give sigma > 0",
        ));
    }
    if !(r > 0.0 && r.is_finite() && t.is_finite()) {
        return Err(Error::precondition(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
    }
    let s2 = q.sigma * q.sigma;
    let part = |phase: fn(f64) -> f64| {
        move |p: f64| {
            let e = (p * p + m * m).sqrt();
            p * (p * r).sin() * phase(-e * t) * (-s2 * p * p).exp()
        }
    };
    let width = panel_width(r + t.abs(), m);
    let (re, e1) = panel_integral(part(f64::cos), q.cutoff, width, q.nodes)?;
    let (im, e2) = panel_integral(part(f64::sin), q.cutoff, width, q.nodes)?;
    let scale = 1.0 / (2.0 * PI * PI * r);
    Ok((Complex64::new(re, im) * scale, scale * e1.hypot(e2)))
}

/// `⟨Ω|a_NW(x, t) a_NW†(x′, 0)|Ω⟩` for Gaussian-smeared packets.
pub fn nw_overlap(t: f64, r: f64, m: f64, q: &QuadratureSpec) -> Result<Complex64> {
    Ok(nw_overlap_with_error(t, r, m, q)?.0)
}

/// Evaluates every query (in parallel) and writes
/// `r,t,m,kind,re,im,est_error`. Failed points are reported as errors.
pub fn write_two_point_scan(queries: &[TwoPointQuery], mut w: impl Write) -> Result<Vec<TwoPointValue>> {
    let values: Vec<TwoPointValue> = queries.par_iter().map(|q| q.evaluate()).collect::<Result<_>>()?;
    let io = |e: std::io::Error| Error::config(format!("writing scan: {e}"));
    writeln!(w, "r,t,m,kind,re,im,est_error").map_err(io)?;
    for (q, v) in queries.iter().zip(&values) {
        writeln!(w, "{},{},{},{},{:e},{:e},{:e}", q.r, q.t, q.mass, q.kind.name(), v.re, v.im, v.est_error)
            .map_err(io)?;
    }
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionalSummary {
    /// Probability of finding the particle in the region.
    pub p: f64,
    pub purity: f64,
    pub entropy: f64,
}

fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Reduced state of a one-particle Newton-Wigner state on `region`:
/// `(1 − p)|0⟩⟨0| + |ψ_R⟩⟨ψ_R|`.
pub fn single_particle_regional_state(psi: &Field<Complex64>, region: &Region) -> Result<RegionalSummary> {
    let grid = psi.grid();
    let dens = psi.site_norm_sqr();
    let total: f64 = dens.iter().sum::<f64>() * grid.cell_volume();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::precondition(format!("wave function norm is {total}, expected 1")));
    }
    let mask = region_mask(grid, region)?;
    let p = dens.iter().zip(&mask).filter(|(_, &m)| m).map(|(d, _)| d).sum::<f64>() * grid.cell_volume();
    let p = p.clamp(0.0, 1.0);
    Ok(RegionalSummary { p, purity: p * p + (1.0 - p) * (1.0 - p), entropy: binary_entropy(p) })
}

/// Few-particle state on a 1-d lattice. `amplitudes[n]` holds the
/// `n`-particle wave function ψ⁽ⁿ⁾ flattened over `sites^n` (first index
/// slowest); `amplitudes[0]` is the vacuum amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    grid: GridSpec,
    amplitudes: Vec<Vec<Complex64>>,
}

pub const FOCK_MAX_PARTICLES: usize = 3;

impl FockState {
    /// Symmetrizes each sector (rejecting inputs further than 1e−10 from
    /// symmetric) and requires `Σ_n Σ |ψ⁽ⁿ⁾|² hⁿ = 1` within 1e−10.
    pub fn new(grid: GridSpec, amplitudes: Vec<Vec<Complex64>>) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::config("Fock states live on 1-d lattices"));
        }
        if amplitudes.is_empty() || amplitudes.len() > FOCK_MAX_PARTICLES + 1 {
            return Err(Error::config(format!(
                "particle number must run over 0..=n_max with n_max <= {FOCK_MAX_PARTICLES}"
            )));
        }
        let l = grid.extent();
        let h = grid.spacing();
        let mut sym = Vec::with_capacity(amplitudes.len());
        let mut norm = 0.0;
        for (n, amp) in amplitudes.into_iter().enumerate() {
            if amp.len() != l.pow(n as u32) {
                return Err(Error::shape(format!(
                    "{n}-particle sector needs {} amplitudes, got {}",
                    l.pow(n as u32),
                    amp.len()
                )));
            }
            let s = symmetrize(&amp, l, n);
            let asym = amp.iter().zip(&s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if asym > 1e-10 {
                return Err(Error::precondition(format!(
                    "{n}-particle wave function is not permutation symmetric (defect {asym:e})"
                )));
            }
            norm += s.iter().map(|c| c.norm_sqr()).sum::<f64>() * h.powi(n as i32);
            sym.push(s);
        }
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::precondition(format!("Fock state norm is {norm}, expected 1")));
        }
        Ok(Self { grid, amplitudes: sym })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Vec<Complex64>] {
        &self.amplitudes
    }

    /// Lattice amplitude `c⁽ⁿ⁾ = ψ⁽ⁿ⁾ h^{n/2}` at a position tuple.
    pub fn lattice_amplitude(&self, sites: &[usize]) -> Complex64 {
        let n = sites.len();
        let l = self.grid.extent();
        let idx = sites.iter().fold(0, |acc, &s| acc * l + s);
        self.amplitudes[n][idx] * self.grid.spacing().powf(0.5 * n as f64)
    }
}

/// Random state with every sector `0..=n_max` populated, symmetrized and
/// normalised.
pub fn random_fock_state(grid: GridSpec, n_max: usize, rng: &mut impl rand::Rng) -> Result<FockState> {
    if n_max > FOCK_MAX_PARTICLES {
        return Err(Error::config(format!("n_max must be <= {FOCK_MAX_PARTICLES}, got {n_max}")));
    }
    let l = grid.extent();
    let h = grid.spacing();
    let mut sectors: Vec<Vec<Complex64>> = (0..=n_max)
        .map(|n| {
            let raw: Vec<Complex64> = (0..l.pow(n as u32))
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            symmetrize(&raw, l, n)
        })
        .collect();
    let norm: f64 = sectors
        .iter()
        .enumerate()
        .map(|(n, s)| s.iter().map(|c| c.norm_sqr()).sum::<f64>() * h.powi(n as i32))
        .sum();
    for s in sectors.iter_mut() {
        for c in s.iter_mut() {
            *c /= norm.sqrt();
        }
    }
    FockState::new(grid, sectors)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn unflatten(mut idx: usize, l: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % l;
        idx /= l;
    }
    out
}

fn symmetrize(amp: &[Complex64], l: usize, n: usize) -> Vec<Complex64> {
    if n < 2 {
        return amp.to_vec();
    }
    let perms = permutations(n);
    let inv = 1.0 / perms.len() as f64;
    (0..amp.len())
        .map(|i| {
            let x = unflatten(i, l, n);
            perms
                .iter()
                .map(|p| amp[p.iter().fold(0, |acc, &k| acc * l + x[k])])
                .sum::<Complex64>()
                * inv
        })
        .collect()
}

/// Sorted tuples (multisets) of `k` elements drawn from `items`.
pub fn multisets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// All ordered `k`-tuples from `items`.
fn tuples(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |&x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect();
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `Π_i o_i!` over the occupation numbers of a sorted tuple.
pub fn occupation_factorial(sorted: &[usize]) -> f64 {
    let mut prod = 1.0;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            prod *= run as f64;
        } else {
            run = 1;
        }
    }
    prod
}

/// One block `tr_{R̄} ρ_{nm}` restricted to `outside` particles outside the
/// region. Rows are indexed by inside multisets of size `n − outside`,
/// columns by those of size `m − outside`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockBlock {
    pub n: usize,
    pub m: usize,
    pub outside: usize,
    pub matrix: DMatrix<Complex64>,
}

impl FockBlock {
    pub fn is_cross_sector(&self) -> bool {
        self.n != self.m
    }
}

/// Reduced density matrix of a Fock state on a region, in the occupation
/// basis of the region's sites (multisets of up to `n_max` particles).
#[derive(Clone, Debug, PartialEq)]
pub struct RegionalFockState {
    pub n_max: usize,
    pub region_sites: Vec<usize>,
    /// `basis[k]` lists the inside multisets with `k` particles.
    pub basis: Vec<Vec<Vec<usize>>>,
    pub blocks: Vec<FockBlock>,
}

impl RegionalFockState {
    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for b in &self.basis {
            off.push(off.last().unwrap() + b.len());
        }
        off
    }

    pub fn dimension(&self) -> usize {
        self.basis.iter().map(Vec::len).sum()
    }

    fn assemble(&self, keep: impl Fn(&FockBlock) -> bool) -> DMatrix<Complex64> {
        let off = self.offsets();
        let d = self.dimension();
        let mut rho = DMatrix::zeros(d, d);
        for b in self.blocks.iter().filter(|b| keep(b)) {
            let (r0, c0) = (off[b.n - b.outside], off[b.m - b.outside]);
            let mut view = rho.view_mut((r0, c0), b.matrix.shape());
            view += &b.matrix;
        }
        rho
    }

    /// Full reduced density matrix including cross-sector blocks.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        self.assemble(|_| true)
    }

    /// Part diagonal in total particle number (`n = m` blocks only).
    pub fn number_diagonal(&self) -> DMatrix<Complex64> {
        self.assemble(|b| !b.is_cross_sector())
    }

    pub fn trace(&self) -> f64 {
        self.matrix().trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.matrix();
        (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        (&m * &m).trace().re
    }

    /// Probability of `k` particles inside the region, `k = 0..=n_max`.
    pub fn number_distribution(&self) -> Vec<f64> {
        let m = self.matrix();
        let off = self.offsets();
        (0..self.basis.len())
            .map(|k| (off[k]..off[k + 1]).map(|i| m[(i, i)].re).sum())
            .collect()
    }

    /// Von Neumann entropy of the number-diagonal part; cross-sector blocks
    /// are left out.
    pub fn entropy(&self) -> f64 {
        SymmetricEigen::new(self.number_diagonal())
            .eigenvalues
            .iter()
            .filter(|&&v| v > 1e-15)
            .map(|&v| -v * v.ln())
            .sum()
    }
}

/// Partial trace over the complement of `region`, block by block:
///
/// `tr_{R̄} ρ_{nm} = (n! m!)^{−1/2} Σ_l C(n,l) C(m,l) l! Σ_{z ∈ R̄^l}
///   c⁽ⁿ⁾(y, z) c⁽ᵐ⁾*(y′, z) a†(y)|0⟩⟨0|a(y′)`
///
/// with `y ∈ R^{n−l}` and `y′ ∈ R^{m−l}`. The binomials count which of the
/// particles sit outside the region.
pub fn fock_regional_state(state: &FockState, region: &Region) -> Result<RegionalFockState> {
    let grid = state.grid();
    let mask = region_mask(grid, region)?;
    let inside: Vec<usize> = (0..grid.site_count()).filter(|&s| mask[s]).collect();
    let outside: Vec<usize> = (0..grid.site_count()).filter(|&s| !mask[s]).collect();
    let n_max = state.n_max();
    let basis: Vec<Vec<Vec<usize>>> = (0..=n_max).map(|k| multisets(&inside, k)).collect();

    let mut blocks = Vec::new();
    for n in 0..=n_max {
        for m in 0..=n_max {
            for l in 0..=n.min(m) {
                let zs = tuples(&outside, l);
                let (rows, cols) = (&basis[n - l], &basis[m - l]);
                let pref = binomial(n, l) * binomial(m, l) * factorial(l) / (factorial(n) * factorial(m)).sqrt();
                let mut mat = DMatrix::zeros(rows.len(), cols.len());
                for (i, ya) in rows.iter().enumerate() {
                    // tuples y with multiset ya, each a†(y)|0⟩ = √(Πo!) |ya⟩
                    let wa = factorial(n - l) / occupation_factorial(ya).sqrt();
                    for (j, yb) in cols.iter().enumerate() {
                        let wb = factorial(m - l) / occupation_factorial(yb).sqrt();
                        let mut acc = Complex64::default();
                        for z in &zs {
                            let xa: Vec<usize> = ya.iter().chain(z).copied().collect();
                            let xb: Vec<usize> = yb.iter().chain(z).copied().collect();
                            acc += state.lattice_amplitude(&xa) * state.lattice_amplitude(&xb).conj();
                        }
                        mat[(i, j)] = acc * (pref * wa * wb);
                    }
                }
                blocks.push(FockBlock { n, m, outside: l, matrix: mat });
            }
        }
    }
    Ok(RegionalFockState { n_max, region_sites: inside, basis, blocks })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NwProbe {
    /// `p + ‖ψ(T)‖_{R⁻}`: the probability inside the contracting slice plus
    /// the norm of the wave function there. Both vanish for zero data.
    pub penetration: f64,
    /// Probability inside the contracting slice; also the trace distance
    /// between the regional state and the vacuum's.
    pub probability: f64,
    pub contracting_radius: f64,
    pub summary: RegionalSummary,
}

/// Evolves a one-particle Newton-Wigner wave function that vanishes on the
/// ball `region` and measures how much of it reaches `R⁻(T)`. Zero initial
/// data give zero; nonzero data are normalised first.
pub fn nw_locality_probe(psi0: &Field<Complex64>, region: &Region, t: f64, mass: f64) -> Result<NwProbe> {
    let grid = *psi0.grid();
    let Region::Ball { center, radius } = region else {
        return Err(Error::config("the locality probe needs a ball region"));
    };
    let mask = region_mask(&grid, region)?;
    let dens = psi0.site_norm_sqr();
    if let Some(s) = (0..dens.len()).find(|&s| mask[s] && dens[s].sqrt() > SUPPORT_FLOOR) {
        return Err(Error::precondition(format!("initial wave function is nonzero inside the region at site {s}")));
    }
    let r_minus = radius - t;
    if r_minus <= 0.0 {
        return Err(Error::ConeVanished { radius: r_minus, t });
    }
    let norm = dens.iter().sum::<f64>() * grid.cell_volume();
    let zero = RegionalSummary { p: 0.0, purity: 1.0, entropy: 0.0 };
    if norm == 0.0 {
        return Ok(NwProbe { penetration: 0.0, probability: 0.0, contracting_radius: r_minus, summary: zero });
    }
    let scale = 1.0 / norm.sqrt();
    let unit = Field::from_fn(grid, 1, |_, s| psi0.get(0, s) * scale);
    let evolved = SpectralState::from_position(&unit, mass)?.evolve_sqrt_kg(t).to_position();
    let slice = ball_mask(&grid, center, r_minus);
    let p = evolved
        .site_norm_sqr()
        .iter()
        .zip(&slice)
        .filter(|(_, &m)| m)
        .map(|(d, _)| d)
        .sum::<f64>()
        * grid.cell_volume();
    let p = p.clamp(0.0, 1.0);
    Ok(NwProbe {
        penetration: p + p.sqrt(),
        probability: p,
        contracting_radius: r_minus,
        summary: RegionalSummary { p, purity: p * p + (1.0 - p) * (1.0 - p), entropy: binary_entropy(p) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_validation() {
        let q = QuadratureSpec::for_mass(1.0);
        assert!(q.validate(1.0).is_ok());
        assert!(QuadratureSpec { cutoff: 10.0, ..q }.validate(1.0).is_err());
        assert!(QuadratureSpec { sigma: 0.01, ..q }.validate(1.0).is_err());
        assert!(nw_overlap(1.0, 2.0, 1.0, &QuadratureSpec { sigma: 0.0, ..q }).is_err());
    }

    #[test]
    fn commutator_vanishes_at_equal_times() {
        let q = QuadratureSpec::for_mass(1.0);
        assert_eq!(pauli_jordan(0.0, 1.3, 1.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(&[0, 1, 2], 2).len(), 6);
        assert_eq!(multisets(&[4, 7], 0), vec![Vec::<usize>::new()]);
        assert_eq!(occupation_factorial(&[1, 1, 1]), 6.0);
        assert_eq!(occupation_factorial(&[1, 1, 2]), 2.0);
    }

    #[test]
    fn fock_input_checks() {
        let g = GridSpec::periodic_1d(4, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        assert!(FockState::new(g, vec![vec![one]]).is_ok());
        assert!(FockState::new(g, vec![vec![one * 0.5]]).is_err());
        let mut two = vec![zero; 16];
        two[1] = one;
        assert!(FockState::new(g, vec![vec![zero], vec![zero; 4], two]).is_err());
        assert!(FockState::new(g, vec![vec![one], vec![], vec![], vec![], vec![]]).is_err());
    }

    #[test]
    fn single_particle_limits() {
        let g = GridSpec::periodic_1d(16, 0.5).unwrap();
        let psi = Field::from_fn(g, 1, |_, s| if s == 3 { Complex64::new(2f64.sqrt(), 0.0) } else { Complex64::default() });
        let inside = single_particle_regional_state(&psi, &Region::site_set(vec![2, 3, 4]).unwrap()).unwrap();
        assert_eq!((inside.p, inside.purity, inside.entropy), (1.0, 1.0, 0.0));
        let outside = single_particle_regional_state(&psi, &Region::site_set(vec![9]).unwrap()).unwrap();
        assert_eq!((outside.p, outside.purity, outside.entropy), (0.0, 1.0, 0.0));
    }
}
