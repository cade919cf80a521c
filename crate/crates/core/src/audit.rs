//! Twin-run locality audits.
//!
//! Two solutions that agree on a ball `R` at `t = 0` must agree on every
//! slice `R⁻(t)` of the contracting light cone. The audit evolves both,
//! differences them, and reports how much difference reached places it
//! should not: inside the contracting cone of `R`, and outside the
//! expanding cone of the initial disagreement.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dirac::SpinorState;
use crate::error::{Error, Result};
use crate::lattice::{poly_bump, region_mask, Field, GridSpec, Region};
use crate::wave::{Source, WaveState};

/// Default number of sites by which cone masks are moved toward safety.
pub const DEFAULT_GUARD: usize = 2;

/// Minimum gap, in sites, between an exterior perturbation and the base ball.
pub const EXTERIOR_GAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Sup,
    L2,
}

/// An evolution rule the audit can drive twice.
pub trait TwinSolver: Sync {
    type State: Clone + Send + Sync;

    fn grid<'a>(&self, state: &'a Self::State) -> &'a GridSpec;
    fn time(&self, state: &Self::State) -> f64;
    fn step(&self, state: &Self::State) -> Result<Self::State>;
    fn difference(&self, a: &Self::State, b: &Self::State) -> Result<Self::State>;
    /// Per-site magnitude of the field values of `state` (not of time
    /// derivatives).
    fn site_magnitude(&self, state: &Self::State) -> Vec<f64>;
    /// Sites where the data the locality standard compares are not
    /// bit-identical.
    fn disagreement(&self, a: &Self::State, b: &Self::State) -> Result<Vec<bool>>;
}

/// Leapfrog for wave equations. Cauchy data are `(u, ∂_t u)`, so both must
/// agree.
pub struct LeapfrogSolver<S> {
    pub source: S,
}

impl<S: Source> TwinSolver for LeapfrogSolver<S> {
    type State = WaveState;

    fn grid<'a>(&self, state: &'a WaveState) -> &'a GridSpec {
        state.grid()
    }
    fn time(&self, state: &WaveState) -> f64 {
        state.time()
    }
    fn step(&self, state: &WaveState) -> Result<WaveState> {
        state.step_leapfrog(&self.source)
    }
    fn difference(&self, a: &WaveState, b: &WaveState) -> Result<WaveState> {
        a.difference(b)
    }
    fn site_magnitude(&self, state: &WaveState) -> Vec<f64> {
        state.u().site_norm_sqr().into_iter().map(f64::sqrt).collect()
    }
    fn disagreement(&self, a: &WaveState, b: &WaveState) -> Result<Vec<bool>> {
        if !a.u().same_shape(b.u()) {
            return Err(Error::shape("twin states have different shapes"));
        }
        Ok(differing_sites(a.u(), b.u())
            .into_iter()
            .zip(differing_sites(a.v(), b.v()))
            .map(|(x, y)| x || y)
            .collect())
    }
}

/// Split-step Dirac evolution with fixed `dt`. First order in time, so only
/// the spinor values must agree.
pub struct DiracSolver {
    pub dt: f64,
}

impl TwinSolver for DiracSolver {
    type State = SpinorState;

    fn grid<'a>(&self, state: &'a SpinorState) -> &'a GridSpec {
        state.grid()
    }
    fn time(&self, state: &SpinorState) -> f64 {
        state.time()
    }
    fn step(&self, state: &SpinorState) -> Result<SpinorState> {
        state.step_fd(self.dt)
    }
    fn difference(&self, a: &SpinorState, b: &SpinorState) -> Result<SpinorState> {
        a.difference(b)
    }
    fn site_magnitude(&self, state: &SpinorState) -> Vec<f64> {
        state.psi().site_norm_sqr().into_iter().map(f64::sqrt).collect()
    }
    fn disagreement(&self, a: &SpinorState, b: &SpinorState) -> Result<Vec<bool>> {
        if !a.psi().same_shape(b.psi()) {
            return Err(Error::shape("twin states have different shapes"));
        }
        Ok(differing_sites(a.psi(), b.psi()))
    }
}

fn differing_sites<T: PartialEq + Copy>(a: &Field<T>, b: &Field<T>) -> Vec<bool>
where
    T: crate::lattice::Sample,
{
    let n = a.grid().site_count();
    (0..n)
        .map(|s| (0..a.components()).any(|c| a.get(c, s) != b.get(c, s)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub times: Vec<f64>,
    pub max_inside_contracting: Vec<f64>,
    pub max_outside_expanding: Vec<f64>,
    /// Same statistics with no guard band.
    pub raw_inside_contracting: Vec<f64>,
    pub raw_outside_expanding: Vec<f64>,
    pub guard_band: usize,
    pub norm: Norm,
}

impl DivergenceReport {
    pub fn peak_inside(&self) -> f64 {
        self.max_inside_contracting.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn peak_outside(&self) -> f64 {
        self.max_outside_expanding.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Long-format CSV: `t,stat,value`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,stat,value")?;
        let cols: [(&str, &[f64]); 4] = [
            ("max_inside_contracting", &self.max_inside_contracting),
            ("max_outside_expanding", &self.max_outside_expanding),
            ("raw_inside_contracting", &self.raw_inside_contracting),
            ("raw_outside_expanding", &self.raw_outside_expanding),
        ];
        for (i, t) in self.times.iter().enumerate() {
            for (name, vals) in cols {
                writeln!(w, "{t:e},{name},{:e}", vals[i])?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub e_base: f64,
    pub e_top: Vec<f64>,
    pub slack: Vec<f64>,
}

impl EnergyReport {
    pub fn max_slack(&self) -> f64 {
        self.slack.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,stat,value")?;
        for (i, t) in self.times.iter().enumerate() {
            writeln!(w, "{t:e},e_base,{:e}", self.e_base)?;
            writeln!(w, "{t:e},e_top,{:e}", self.e_top[i])?;
            writeln!(w, "{t:e},slack,{:e}", self.slack[i])?;
        }
        Ok(())
    }
}

/// Distance from every site to the nearest flagged site (infinite if none).
fn distance_to(grid: &GridSpec, support: &[bool]) -> Vec<f64> {
    let pts: Vec<[f64; 3]> = support
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then(|| grid.coords(i)))
        .collect();
    (0..grid.site_count())
        .map(|s| {
            let x = grid.coords(s);
            pts.iter().map(|&p| grid.distance(x, p)).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn ball_of(base: &Region, grid: &GridSpec) -> Result<([f64; 3], f64)> {
    base.validate(grid)?;
    match base {
        Region::Ball { center, radius } => {
            let mut c = [0.0; 3];
            c[..center.len()].copy_from_slice(center);
            Ok((c, *radius))
        }
        Region::SiteSet(_) => Err(Error::config("twin runs need a ball as base region")),
    }
}

/// Cone geometry shared by the streaming and the history-based audits.
struct ConeGeometry {
    h: f64,
    volume: f64,
    radius: f64,
    to_center: Vec<f64>,
    to_support: Vec<f64>,
}

impl ConeGeometry {
    fn new(grid: &GridSpec, base: &Region, support: &[bool]) -> Result<Self> {
        let (c, radius) = ball_of(base, grid)?;
        let to_center = (0..grid.site_count()).map(|s| grid.distance(grid.coords(s), c)).collect();
        Ok(Self {
            h: grid.spacing(),
            volume: grid.cell_volume(),
            radius,
            to_center,
            to_support: distance_to(grid, support),
        })
    }

    /// `None` once the contracting slice has vanished.
    fn contracting(&self, t: f64, guard: usize) -> Option<Vec<bool>> {
        let r = self.radius - t;
        (r > 0.0).then(|| self.to_center.iter().map(|&d| d <= r - guard as f64 * self.h).collect())
    }

    fn outside_expanding(&self, t: f64, guard: usize) -> Vec<bool> {
        let r = t + guard as f64 * self.h;
        self.to_support.iter().map(|&d| d > r).collect()
    }

    fn stat(&self, mag: &[f64], mask: &[bool], norm: Norm) -> f64 {
        let sel = mag.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| *v);
        match norm {
            Norm::Sup => sel.fold(0.0, f64::max),
            Norm::L2 => (sel.map(|v| v * v).sum::<f64>() * self.volume).sqrt(),
        }
    }
}

fn check_agreement<S: TwinSolver>(solver: &S, a: &S::State, b: &S::State, base: &Region) -> Result<Vec<bool>> {
    let grid = solver.grid(a);
    let disagree = solver.disagreement(a, b)?;
    let inside = region_mask(grid, base)?;
    let bad: Vec<usize> = disagree
        .iter()
        .zip(&inside)
        .enumerate()
        .filter_map(|(s, (&d, &i))| (d && i).then_some(s))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Disagreement { sites: bad });
    }
    Ok(disagree)
}

/// Evolves both states for up to `horizon` steps (stopping once the
/// contracting cone of `base` has vanished) and reports the difference
/// statistics at every recorded time, including `t = 0`.
pub fn twin_run_divergence<S: TwinSolver>(
    solver: &S,
    a: &S::State,
    b: &S::State,
    base: &Region,
    horizon: usize,
    guard_band: usize,
    norm: Norm,
) -> Result<DivergenceReport> {
    let support = check_agreement(solver, a, b, base)?;
    let geo = ConeGeometry::new(solver.grid(a), base, &support)?;
    let t0 = solver.time(a);
    let mut report = DivergenceReport {
        times: Vec::new(),
        max_inside_contracting: Vec::new(),
        max_outside_expanding: Vec::new(),
        raw_inside_contracting: Vec::new(),
        raw_outside_expanding: Vec::new(),
        guard_band,
        norm,
    };
    let (mut sa, mut sb) = (a.clone(), b.clone());
    for n in 0..=horizon {
        if n > 0 {
            sa = solver.step(&sa)?;
            sb = solver.step(&sb)?;
        }
        let t = solver.time(&sa) - t0;
        let Some(inside) = geo.contracting(t, guard_band) else { break };
        let raw_inside = geo.contracting(t, 0).unwrap_or_default();
        let mag = solver.site_magnitude(&solver.difference(&sa, &sb)?);
        report.times.push(t);
        report.max_inside_contracting.push(geo.stat(&mag, &inside, norm));
        report.raw_inside_contracting.push(geo.stat(&mag, &raw_inside, norm));
        report
            .max_outside_expanding
            .push(geo.stat(&mag, &geo.outside_expanding(t, guard_band), norm));
        report
            .raw_outside_expanding
            .push(geo.stat(&mag, &geo.outside_expanding(t, 0), norm));
    }
    Ok(report)
}

/// Differences `a − b` at every step while the contracting cone of `base`
/// survives (at most `horizon` steps).
#[derive(Clone, Debug)]
pub struct TwinHistory<T> {
    pub times: Vec<f64>,
    pub diffs: Vec<T>,
}

pub fn twin_history<S: TwinSolver>(
    solver: &S,
    a: &S::State,
    b: &S::State,
    base: &Region,
    horizon: usize,
) -> Result<TwinHistory<S::State>> {
    check_agreement(solver, a, b, base)?;
    let (_, radius) = ball_of(base, solver.grid(a))?;
    let t0 = solver.time(a);
    let mut hist = TwinHistory { times: Vec::new(), diffs: Vec::new() };
    let (mut sa, mut sb) = (a.clone(), b.clone());
    for n in 0..=horizon {
        if n > 0 {
            sa = solver.step(&sa)?;
            sb = solver.step(&sb)?;
        }
        let t = solver.time(&sa) - t0;
        if radius - t <= 0.0 {
            break;
        }
        hist.times.push(t);
        hist.diffs.push(solver.difference(&sa, &sb)?);
    }
    Ok(hist)
}

fn energy_report(times: &[f64], base: &Region, grid: &GridSpec, density: &[Vec<f64>]) -> Result<EnergyReport> {
    let (c, radius) = ball_of(base, grid)?;
    let to_center: Vec<f64> = (0..grid.site_count()).map(|s| grid.distance(grid.coords(s), c)).collect();
    let vol = grid.cell_volume();
    let over = |dens: &[f64], r: f64| -> f64 {
        dens.iter().zip(&to_center).filter(|(_, &d)| d <= r).map(|(e, _)| e).sum::<f64>() * vol
    };
    let Some(first) = density.first() else {
        return Ok(EnergyReport { times: vec![], e_base: 0.0, e_top: vec![], slack: vec![] });
    };
    let e_base = over(first, radius);
    let e_top: Vec<f64> = times.iter().zip(density).map(|(t, d)| over(d, radius - t)).collect();
    let slack = e_top.iter().map(|e| e - e_base).collect();
    Ok(EnergyReport { times: times.to_vec(), e_base, e_top, slack })
}

/// `½[(∂_t u_d)² + |∇u_d|² + m² u_d²]` integrated over `R` at the first
/// recorded time and over `R⁻(t)` afterwards.
pub fn frustum_energy_check(history: &TwinHistory<WaveState>, base: &Region) -> Result<EnergyReport> {
    let Some(first) = history.diffs.first() else {
        return Ok(EnergyReport { times: vec![], e_base: 0.0, e_top: vec![], slack: vec![] });
    };
    let dens: Vec<Vec<f64>> = history.diffs.iter().map(|d| d.energy_density().into_values()).collect();
    energy_report(&history.times, base, first.grid(), &dens)
}

/// The same bookkeeping with the probability density `|ψ_d|²`.
pub fn dirac_frustum_check(history: &TwinHistory<SpinorState>, base: &Region) -> Result<EnergyReport> {
    let Some(first) = history.diffs.first() else {
        return Ok(EnergyReport { times: vec![], e_base: 0.0, e_top: vec![], slack: vec![] });
    };
    let dens: Vec<Vec<f64>> = history.diffs.iter().map(|d| d.psi().site_norm_sqr()).collect();
    energy_report(&history.times, base, first.grid(), &dens)
}

/// Random bump centre whose support (half width `half_width`) stays at least
/// `EXTERIOR_GAP` sites outside `base` and inside the grid.
pub fn exterior_bump_center(grid: &GridSpec, base: &Region, half_width: f64, rng: &mut impl Rng) -> Result<[f64; 3]> {
    let (c, radius) = ball_of(base, grid)?;
    let hi = (grid.extent() - 1) as f64 * grid.spacing();
    let min_dist = radius + half_width + EXTERIOR_GAP as f64 * grid.spacing();
    for _ in 0..10_000 {
        let mut x = [0.0; 3];
        for xk in x.iter_mut().take(grid.dim()) {
            *xk = rng.random_range(half_width..=hi - half_width);
        }
        if grid.distance(x, c) >= min_dist {
            return Ok(x);
        }
    }
    Err(Error::config(format!(
        "no room for a bump of half width {half_width} outside the base ball"
    )))
}

/// Polynomial bump (power 6) of height `amp` around `center`, one component.
pub fn bump_field(grid: &GridSpec, center: [f64; 3], half_width: f64, amp: f64) -> Field<f64> {
    Field::scalar_from_fn(*grid, |x| amp * poly_bump(grid.distance(x, center), half_width, 6))
}

/// Scalar twin pair: state A carries a random bump anywhere, state B adds a
/// bump in `u` and `∂_t u` placed outside `base`.
pub fn scalar_twins(
    grid: &GridSpec,
    base: &Region,
    half_width: f64,
    mass: f64,
    cfl: f64,
    rng: &mut impl Rng,
) -> Result<(WaveState, WaveState)> {
    let (c, radius) = ball_of(base, grid)?;
    let inner = {
        let mut x = c;
        x[0] += rng.random_range(-0.5..0.5) * radius;
        x
    };
    let ua = bump_field(grid, inner, half_width, rng.random_range(0.5..1.5));
    let va = bump_field(grid, inner, half_width, rng.random_range(-1.0..1.0));
    let out = exterior_bump_center(grid, base, half_width, rng)?;
    let du = bump_field(grid, out, half_width, rng.random_range(0.5..1.5));
    let dv = bump_field(grid, out, half_width, rng.random_range(-1.0..1.0));
    let add = |a: &Field<f64>, d: &Field<f64>| {
        Field::from_values(*grid, 1, a.values().iter().zip(d.values()).map(|(x, y)| x + y).collect())
    };
    let a = WaveState::klein_gordon(ua.clone(), va.clone(), mass, cfl)?;
    let b = WaveState::klein_gordon(add(&ua, &du)?, add(&va, &dv)?, mass, cfl)?;
    Ok((a, b))
}

/// Spinor twin pair: B differs from A by a bump in every component, placed
/// outside `base`.
pub fn spinor_twins(
    grid: &GridSpec,
    base: &Region,
    half_width: f64,
    mass: f64,
    rng: &mut impl Rng,
) -> Result<(SpinorState, SpinorState)> {
    let comps = if grid.dim() == 1 { 2 } else { 4 };
    let (c, _) = ball_of(base, grid)?;
    let amps_a: Vec<Complex64> = (0..comps)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let amps_d: Vec<Complex64> = (0..comps)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let out = exterior_bump_center(grid, base, half_width, rng)?;
    let pa = bump_field(grid, c, half_width, 1.0);
    let pd = bump_field(grid, out, half_width, 1.0);
    let a = Field::from_fn(*grid, comps, |k, s| amps_a[k] * pa.get(0, s));
    let b = Field::from_fn(*grid, comps, |k, s| amps_a[k] * pa.get(0, s) + amps_d[k] * pd.get(0, s));
    Ok((SpinorState::new(a, mass)?, SpinorState::new(b, mass)?))
}

/// Two-qubit check that local unitaries change global but not local states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonseparabilityReport {
    /// Largest entry of |ρ_A(singlet) − ρ_A(triplet)| and the same for B.
    pub singlet_triplet_reduced_gap: f64,
    /// Largest entry of |ρ_A(singlet) − ½·1|.
    pub singlet_reduced_vs_mixed: f64,
    pub singlet_triplet_fidelity: f64,
    /// Largest reduced-state change (A or B) under the flip on A.
    pub flip_reduced_change: f64,
    pub flip_fidelity: f64,
}

type Qubits = [Complex64; 4];

/// ρ_A and ρ_B of a two-qubit pure state in the basis |ab⟩, index 2a + b.
fn reduced_pair(psi: &Qubits) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let mut ra = [[Complex64::default(); 2]; 2];
    let mut rb = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                ra[i][j] += psi[2 * i + k] * psi[2 * j + k].conj();
                rb[i][j] += psi[2 * k + i] * psi[2 * k + j].conj();
            }
        }
    }
    (ra, rb)
}

fn max_gap(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

fn fidelity(a: &Qubits, b: &Qubits) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

pub fn nonseparability_demo() -> NonseparabilityReport {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::default();
    let p = Complex64::new(r, 0.0);
    // basis order |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
    let singlet: Qubits = [z, p, -p, z];
    let triplet: Qubits = [z, p, p, z];
    // σ_x on A swaps the A index
    let flipped: Qubits = [singlet[2], singlet[3], singlet[0], singlet[1]];

    let (sa, sb) = reduced_pair(&singlet);
    let (ta, tb) = reduced_pair(&triplet);
    let (fa, fb) = reduced_pair(&flipped);
    let half = Complex64::new(0.5, 0.0);
    let mixed = [[half, z], [z, half]];
    NonseparabilityReport {
        singlet_triplet_reduced_gap: max_gap(&sa, &ta).max(max_gap(&sb, &tb)),
        singlet_reduced_vs_mixed: max_gap(&sa, &mixed).max(max_gap(&sb, &mixed)),
        singlet_triplet_fidelity: fidelity(&singlet, &triplet),
        flip_reduced_change: max_gap(&sa, &fa).max(max_gap(&sb, &fb)),
        flip_fidelity: fidelity(&singlet, &flipped),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::NoSource;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_twins_give_zero_reports() {
        let g = GridSpec::periodic_1d(128, 0.1).unwrap();
        let base = Region::interval(6.4, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, _) = scalar_twins(&g, &base, 0.5, 1.0, 0.5, &mut rng).unwrap();
        let solver = LeapfrogSolver { source: NoSource };
        let rep = twin_run_divergence(&solver, &a, &a, &base, 200, 2, Norm::Sup).unwrap();
        assert!(rep.times.len() > 10);
        assert!(rep.max_inside_contracting.iter().chain(&rep.max_outside_expanding).all(|&v| v == 0.0));
        let hist = twin_history(&solver, &a, &a, &base, 200).unwrap();
        let e = frustum_energy_check(&hist, &base).unwrap();
        assert_eq!(e.e_base, 0.0);
        assert!(e.e_top.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn disagreement_inside_base_lists_sites() {
        let g = GridSpec::periodic_1d(64, 0.1).unwrap();
        let base = Region::interval(3.2, 1.0);
        let a = WaveState::zeros(g, 1, 0.0, 1.0).unwrap();
        let mut b = a.clone();
        b.v_mut().component_mut(0)[30] = 1e-300;
        let err = twin_run_divergence(&LeapfrogSolver { source: NoSource }, &a, &b, &base, 5, 2, Norm::Sup);
        assert_eq!(err.unwrap_err(), Error::Disagreement { sites: vec![30] });
    }

    #[test]
    fn nonseparability_values() {
        let r = nonseparability_demo();
        assert!(r.singlet_triplet_reduced_gap <= 1e-15);
        assert!(r.singlet_reduced_vs_mixed <= 1e-15);
        assert!(r.flip_reduced_change <= 1e-15);
        assert!(r.flip_fidelity <= 1e-15);
        assert!(r.singlet_triplet_fidelity < 1.0);
    }

    #[test]
    fn csv_has_one_row_per_time_and_stat() {
        let rep = DivergenceReport {
            times: vec![0.0, 0.5],
            max_inside_contracting: vec![0.0, 1.0],
            max_outside_expanding: vec![0.0, 2.0],
            raw_inside_contracting: vec![0.0, 3.0],
            raw_outside_expanding: vec![0.0, 4.0],
            guard_band: 2,
            norm: Norm::Sup,
        };
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.contains("5e-1,raw_outside_expanding,4e0"));
    }
}
