//! Second-order hyperbolic evolution: Lorenz-gauge Maxwell potentials
//! (components φ, A_x, A_y, A_z) and the Klein-Gordon field.
//!
//! The update is synchronized leapfrog (kick-drift-kick) for
//! `(∂²_t − ∇² + m²) u = s`, so `(u, v)` are Cauchy data at every integer
//! step. One step moves `u` by at most one site per axis; `v` reads one site
//! further because its final kick takes the Laplacian of the new `u`.
//!
//! Gradients and curls use forward differences and the divergence uses
//! backward differences, so `div ∘ grad` is exactly the Laplacian of the
//! scheme and `curl ∘ grad` vanishes identically.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::{Field, GridSpec, Neighbors};

/// Charge density and current as functions of (site, time).
///
/// Current component `k` belongs to the edge midpoint `x + ½h ê_k`, where the
/// staggered potential `A_k` lives; the backward divergence of such a current
/// is then centred on the site.
pub trait Source: Send + Sync {
    fn charge(&self, grid: &GridSpec, site: usize, t: f64) -> f64;
    fn current(&self, grid: &GridSpec, site: usize, t: f64) -> [f64; 3];
}

/// ρ = 0, J = 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoSource;

impl Source for NoSource {
    fn charge(&self, _: &GridSpec, _: usize, _: f64) -> f64 {
        0.0
    }
    fn current(&self, _: &GridSpec, _: usize, _: f64) -> [f64; 3] {
        [0.0; 3]
    }
}

/// Source given by a closure of position and time.
pub struct FnSource<F>(pub F);

impl<F> Source for FnSource<F>
where
    F: Fn([f64; 3], f64) -> (f64, [f64; 3]) + Send + Sync,
{
    fn charge(&self, grid: &GridSpec, site: usize, t: f64) -> f64 {
        (self.0)(grid.coords(site), t).0
    }
    fn current(&self, grid: &GridSpec, site: usize, t: f64) -> [f64; 3] {
        let mut j = [0.0; 3];
        for (k, jk) in j.iter_mut().enumerate().take(grid.dim()) {
            let mut x = grid.coords(site);
            x[k] += 0.5 * grid.spacing();
            *jk = (self.0)(x, t).1[k];
        }
        j
    }
}

/// Charge profile translating along x with velocity `velocity`.
///
/// With `carries_current` the current is `velocity * ρ x̂` and charge is
/// conserved; without it `J = 0` and continuity fails by `∂ρ/∂t`.
pub struct MovingCharge {
    profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    x0: f64,
    velocity: f64,
    carries_current: bool,
}

impl MovingCharge {
    pub fn new(profile: impl Fn(f64) -> f64 + Send + Sync + 'static, x0: f64, velocity: f64) -> Self {
        Self {
            profile: Box::new(profile),
            x0,
            velocity,
            carries_current: true,
        }
    }

    /// Neutral pair of opposite bumps separated by `2 * half_width`.
    pub fn dipole(x0: f64, velocity: f64, half_width: f64, q: f64) -> Self {
        Self::new(
            move |xi| {
                q * (crate::lattice::poly_bump(xi + half_width, half_width, 6)
                    - crate::lattice::poly_bump(xi - half_width, half_width, 6))
            },
            x0,
            velocity,
        )
    }

    pub fn without_current(mut self) -> Self {
        self.carries_current = false;
        self
    }

    fn density(&self, grid: &GridSpec, x: f64, t: f64) -> f64 {
        let xi = grid.axis_delta(self.x0 + self.velocity * t, x);
        (self.profile)(xi)
    }
}

impl Source for MovingCharge {
    fn charge(&self, grid: &GridSpec, site: usize, t: f64) -> f64 {
        self.density(grid, grid.coords(site)[0], t)
    }
    fn current(&self, grid: &GridSpec, site: usize, t: f64) -> [f64; 3] {
        if self.carries_current {
            let x = grid.coords(site)[0] + 0.5 * grid.spacing();
            [self.velocity * self.density(grid, x, t), 0.0, 0.0]
        } else {
            [0.0; 3]
        }
    }
}

/// Cached source frames at uniform times, linearly interpolated. Lets
/// file-driven sources plug into the solver.
#[derive(Clone, Debug)]
pub struct SampledSource {
    t0: f64,
    dt: f64,
    charge: Vec<Vec<f64>>,
    current: Vec<Vec<[f64; 3]>>,
}

impl SampledSource {
    pub fn new(t0: f64, dt: f64, charge: Vec<Vec<f64>>, current: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        if charge.is_empty() || charge.len() != current.len() {
            return Err(Error::shape("sampled source needs matching, non-empty frame lists"));
        }
        if !(dt > 0.0) {
            return Err(Error::config("sampled source frame spacing must be positive"));
        }
        Ok(Self { t0, dt, charge, current })
    }

    /// Samples `src` on `grid` at `frames` times spaced by `dt`.
    pub fn capture(src: &dyn Source, grid: &GridSpec, t0: f64, dt: f64, frames: usize) -> Result<Self> {
        let n = grid.site_count();
        let times = (0..frames).map(|f| t0 + f as f64 * dt);
        let (charge, current) = times
            .map(|t| {
                (
                    (0..n).map(|s| src.charge(grid, s, t)).collect(),
                    (0..n).map(|s| src.current(grid, s, t)).collect(),
                )
            })
            .unzip();
        Self::new(t0, dt, charge, current)
    }

    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let last = self.charge.len() - 1;
        let pos = ((t - self.t0) / self.dt).clamp(0.0, last as f64);
        let lo = (pos.floor() as usize).min(last);
        let hi = (lo + 1).min(last);
        (lo, hi, pos - lo as f64)
    }
}

impl Source for SampledSource {
    fn charge(&self, _: &GridSpec, site: usize, t: f64) -> f64 {
        let (lo, hi, w) = self.bracket(t);
        (1.0 - w) * self.charge[lo][site] + w * self.charge[hi][site]
    }
    fn current(&self, _: &GridSpec, site: usize, t: f64) -> [f64; 3] {
        let (lo, hi, w) = self.bracket(t);
        let (a, b) = (self.current[lo][site], self.current[hi][site]);
        [0, 1, 2].map(|k| (1.0 - w) * a[k] + w * b[k])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    u: Field<f64>,
    v: Field<f64>,
    t: f64,
    step: usize,
    mass: f64,
    cfl: f64,
}

impl WaveState {
    pub fn new(u: Field<f64>, v: Field<f64>, mass: f64, cfl: f64) -> Result<Self> {
        if !u.same_shape(&v) {
            return Err(Error::shape("u and v must have the same grid and component count"));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::config(format!("cfl must be in (0,1], got {cfl}")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("mass must be >= 0, got {mass}")));
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidState("initial data contains NaN or Inf".into()));
        }
        Ok(Self { u, v, t: 0.0, step: 0, mass, cfl })
    }

    /// One-component Klein-Gordon state (massless gives the scalar wave equation).
    pub fn klein_gordon(u: Field<f64>, v: Field<f64>, mass: f64, cfl: f64) -> Result<Self> {
        if u.components() != 1 {
            return Err(Error::shape("Klein-Gordon state needs one component"));
        }
        Self::new(u, v, mass, cfl)
    }

    /// Four-component (φ, A) state.
    pub fn maxwell(u: Field<f64>, v: Field<f64>, cfl: f64) -> Result<Self> {
        if u.components() != 4 {
            return Err(Error::shape("Maxwell state needs components (phi, Ax, Ay, Az)"));
        }
        Self::new(u, v, 0.0, cfl)
    }

    pub fn zeros(grid: GridSpec, components: usize, mass: f64, cfl: f64) -> Result<Self> {
        Self::new(Field::zeros(grid, components), Field::zeros(grid, components), mass, cfl)
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn u(&self) -> &Field<f64> {
        &self.u
    }

    pub fn v(&self) -> &Field<f64> {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut Field<f64> {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut Field<f64> {
        &mut self.v
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn components(&self) -> usize {
        self.u.components()
    }

    /// `cfl * spacing / sqrt(dim)`.
    pub fn dt(&self) -> f64 {
        let g = self.grid();
        self.cfl * g.spacing() / (g.dim() as f64).sqrt()
    }

    /// Componentwise difference `self - other` (time and step from `self`).
    pub fn difference(&self, other: &WaveState) -> Result<WaveState> {
        if !self.u.same_shape(&other.u) {
            return Err(Error::shape("cannot difference states of different shape"));
        }
        let sub = |a: &Field<f64>, b: &Field<f64>| {
            let vals = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
            Field::from_values(*a.grid(), a.components(), vals)
        };
        Ok(WaveState {
            u: sub(&self.u, &other.u)?,
            v: sub(&self.v, &other.v)?,
            ..self.clone()
        })
    }

    /// Advances one time step.
    pub fn step_leapfrog(&self, src: &dyn Source) -> Result<WaveState> {
        let grid = *self.grid();
        let nb = Neighbors::new(&grid);
        let dt = self.dt();
        let t_next = self.t + dt;
        let n = grid.site_count();
        let comps = self.components();

        let mut v = self.v.clone();
        let acc0 = acceleration(&self.u, self.mass, &nb, src, self.t);
        for (vi, a) in v.values_mut().iter_mut().zip(&acc0) {
            *vi += 0.5 * dt * a;
        }
        let mut u = self.u.clone();
        for (ui, vi) in u.values_mut().iter_mut().zip(v.values()) {
            *ui += dt * vi;
        }
        let acc1 = acceleration(&u, self.mass, &nb, src, t_next);
        for (vi, a) in v.values_mut().iter_mut().zip(&acc1) {
            *vi += 0.5 * dt * a;
        }
        if !grid.is_periodic() {
            for c in 0..comps {
                let vc = v.component_mut(c);
                for (s, vs) in vc.iter_mut().enumerate().take(n) {
                    *vs *= (-grid.pad_damping(s) * dt).exp();
                }
            }
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::Instability {
                step: self.step + 1,
                detail: "non-finite value in leapfrog update".into(),
            });
        }
        Ok(WaveState {
            u,
            v,
            t: t_next,
            step: self.step + 1,
            mass: self.mass,
            cfl: self.cfl,
        })
    }

    /// Applies `step_leapfrog` `steps` times.
    pub fn evolve(&self, src: &dyn Source, steps: usize) -> Result<WaveState> {
        let mut s = self.clone();
        for _ in 0..steps {
            s = s.step_leapfrog(src)?;
        }
        Ok(s)
    }

    /// Per-site energy density `½ Σ_c [v² + |∇u|² + m² u²]` (forward-difference gradient).
    pub fn energy_density(&self) -> Field<f64> {
        let grid = *self.grid();
        let nb = Neighbors::new(&grid);
        let m2 = self.mass * self.mass;
        let mut out = vec![0.0; grid.site_count()];
        for c in 0..self.components() {
            let u = self.u.component(c);
            let v = self.v.component(c);
            let mut grad2 = vec![0.0; u.len()];
            for axis in 0..grid.dim() {
                for (g, d) in grad2.iter_mut().zip(forward_diff(u, &nb, axis, grid.spacing())) {
                    *g += d * d;
                }
            }
            for s in 0..out.len() {
                out[s] += 0.5 * (v[s] * v[s] + grad2[s] + m2 * u[s] * u[s]);
            }
        }
        Field::from_fn(grid, 1, |_, s| out[s])
    }

    /// `Σ energy_density · h^dim` over the whole grid.
    pub fn total_energy(&self) -> f64 {
        self.energy_density().values().iter().sum::<f64>() * self.grid().cell_volume()
    }
}

/// `∇²u − m²u + s` per component, with `s = 4πρ` for φ and `4πJ` for A on
/// four-component states.
fn acceleration(u: &Field<f64>, mass: f64, nb: &Neighbors, src: &dyn Source, t: f64) -> Vec<f64> {
    let grid = *u.grid();
    let n = grid.site_count();
    let m2 = mass * mass;
    let mut out = vec![0.0; u.values().len()];
    for c in 0..u.components() {
        let uc = u.component(c);
        let lap = laplacian(uc, nb, grid.spacing());
        let oc = &mut out[c * n..(c + 1) * n];
        for s in 0..n {
            oc[s] = lap[s] - m2 * uc[s];
        }
    }
    if u.components() == 4 {
        for s in 0..n {
            out[s] += 4.0 * PI * src.charge(&grid, s, t);
            let j = src.current(&grid, s, t);
            for k in 0..3 {
                out[(k + 1) * n + s] += 4.0 * PI * j[k];
            }
        }
    }
    out
}

pub(crate) fn laplacian(u: &[f64], nb: &Neighbors, h: f64) -> Vec<f64> {
    let inv = 1.0 / (h * h);
    let mut out = vec![0.0; u.len()];
    for axis in 0..nb.plus.len() {
        let (p, m) = (&nb.plus[axis], &nb.minus[axis]);
        for s in 0..u.len() {
            let up = p[s].map_or(0.0, |j| u[j]);
            let um = m[s].map_or(0.0, |j| u[j]);
            out[s] += (up - 2.0 * u[s] + um) * inv;
        }
    }
    out
}

fn forward_diff(u: &[f64], nb: &Neighbors, axis: usize, h: f64) -> Vec<f64> {
    let p = &nb.plus[axis];
    (0..u.len())
        .map(|s| (p[s].map_or(0.0, |j| u[j]) - u[s]) / h)
        .collect()
}

fn backward_diff(u: &[f64], nb: &Neighbors, axis: usize, h: f64) -> Vec<f64> {
    let m = &nb.minus[axis];
    (0..u.len())
        .map(|s| (u[s] - m[s].map_or(0.0, |j| u[j])) / h)
        .collect()
}

fn require_maxwell(state: &WaveState) -> Result<()> {
    if state.components() != 4 {
        return Err(Error::shape(format!(
            "expected a 4-component (phi, A) state, got {} components",
            state.components()
        )));
    }
    Ok(())
}

/// Electric and magnetic fields `E = −∇φ − ∂A/∂t`, `B = ∇×A`.
pub fn em_fields(state: &WaveState) -> Result<(Field<f64>, Field<f64>)> {
    require_maxwell(state)?;
    let grid = *state.grid();
    let nb = Neighbors::new(&grid);
    let h = grid.spacing();
    let n = grid.site_count();
    let zero = vec![0.0; n];
    // d[k][axis] = forward derivative of A_k along axis (zero for absent axes)
    let deriv = |vals: &[f64], axis: usize| {
        if axis < grid.dim() {
            forward_diff(vals, &nb, axis, h)
        } else {
            zero.clone()
        }
    };
    let phi = state.u.component(0);
    let mut e = Field::zeros(grid, 3);
    for k in 0..3 {
        let dphi = deriv(phi, k);
        let at = state.v.component(k + 1);
        for (s, ev) in e.component_mut(k).iter_mut().enumerate() {
            *ev = -dphi[s] - at[s];
        }
    }
    let d: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|k| (0..3).map(|axis| deriv(state.u.component(k + 1), axis)).collect())
        .collect();
    let mut b = Field::zeros(grid, 3);
    for (k, (i, j)) in [(1, 2), (2, 0), (0, 1)].into_iter().enumerate() {
        // B_k = ∂_i A_j − ∂_j A_i
        for (s, bv) in b.component_mut(k).iter_mut().enumerate() {
            *bv = d[j][i][s] - d[i][j][s];
        }
    }
    Ok((e, b))
}

/// `φ → φ − ∂Λ/∂t`, `A → A + ∇Λ`, with time derivatives moved consistently
/// (`∂²Λ/∂t²` is the scheme's own acceleration of Λ).
pub fn gauge_transform(state: &WaveState, lambda: &WaveState) -> Result<WaveState> {
    require_maxwell(state)?;
    if lambda.components() != 1 {
        return Err(Error::shape("gauge function must be a one-component state"));
    }
    if state.grid() != lambda.grid() {
        return Err(Error::shape("gauge function lives on a different grid"));
    }
    let grid = *state.grid();
    let nb = Neighbors::new(&grid);
    let h = grid.spacing();
    let lu = lambda.u.component(0);
    let lv = lambda.v.component(0);
    let lacc = acceleration(&lambda.u, lambda.mass, &nb, &NoSource, lambda.t);

    let mut out = state.clone();
    for (p, dl) in out.u.component_mut(0).iter_mut().zip(lv) {
        *p -= dl;
    }
    for (p, a) in out.v.component_mut(0).iter_mut().zip(&lacc) {
        *p -= a;
    }
    for axis in 0..grid.dim() {
        let gu = forward_diff(lu, &nb, axis, h);
        let gv = forward_diff(lv, &nb, axis, h);
        for (a, g) in out.u.component_mut(axis + 1).iter_mut().zip(&gu) {
            *a += g;
        }
        for (a, g) in out.v.component_mut(axis + 1).iter_mut().zip(&gv) {
            *a += g;
        }
    }
    Ok(out)
}

/// `∇·A + ∂φ/∂t` per site.
pub fn lorenz_residual(state: &WaveState) -> Result<Field<f64>> {
    require_maxwell(state)?;
    let grid = *state.grid();
    let nb = Neighbors::new(&grid);
    let mut out = state.v.component(0).to_vec();
    for axis in 0..grid.dim() {
        let div = backward_diff(state.u.component(axis + 1), &nb, axis, grid.spacing());
        for (o, d) in out.iter_mut().zip(&div) {
            *o += d;
        }
    }
    Field::from_values(grid, 1, out)
}

/// `∂ρ/∂t + ∇·J`: centred difference in time (step `dt`), backward
/// divergence of the edge-centred current in space.
pub fn continuity_residual(src: &dyn Source, grid: &GridSpec, t: f64, dt: f64) -> Field<f64> {
    let nb = Neighbors::new(grid);
    let h = grid.spacing();
    let n = grid.site_count();
    let current: Vec<[f64; 3]> = (0..n).map(|s| src.current(grid, s, t)).collect();
    Field::from_fn(*grid, 1, |_, s| {
        let drho = (src.charge(grid, s, t + dt) - src.charge(grid, s, t - dt)) / (2.0 * dt);
        let mut div = 0.0;
        for axis in 0..grid.dim() {
            let jm = nb.minus[axis][s].map_or(0.0, |j| current[j][axis]);
            div += (current[s][axis] - jm) / h;
        }
        drho + div
    })
}

/// Lorenz-gauge Cauchy data for a source at `t = 0`: φ solves the scheme's
/// Poisson equation `−∇²φ = 4πρ`, A and both time derivatives vanish. This
/// satisfies the Lorenz condition and its first time derivative exactly on
/// the lattice. Needs a periodic grid with zero net charge.
pub fn maxwell_rest_start(grid: GridSpec, src: &dyn Source, cfl: f64) -> Result<WaveState> {
    if !grid.is_periodic() {
        return Err(Error::config("Poisson start needs a periodic grid"));
    }
    let n = grid.site_count();
    let mut rho: Vec<Complex64> = (0..n).map(|s| Complex64::new(src.charge(&grid, s, 0.0), 0.0)).collect();
    let net: f64 = rho.iter().map(|c| c.re).sum::<f64>() / n as f64;
    let scale = rho.iter().fold(0.0f64, |m, c| m.max(c.re.abs())).max(1e-300);
    if net.abs() > 1e-10 * scale {
        return Err(Error::config("periodic Poisson start needs zero net charge"));
    }
    fft::forward(&grid, &mut rho);
    let h = grid.spacing();
    for (s, r) in rho.iter_mut().enumerate() {
        let a = grid.axes_of(s);
        let symbol: f64 = (0..grid.dim())
            .map(|axis| (2.0 - 2.0 * (fft::axis_wavenumber(&grid, a[axis]) * h).cos()) / (h * h))
            .sum();
        *r = if symbol > 0.0 { *r * (4.0 * PI / symbol) } else { Complex64::default() };
    }
    fft::inverse(&grid, &mut rho);
    let mut u = Field::zeros(grid, 4);
    for (p, r) in u.component_mut(0).iter_mut().zip(&rho) {
        *p = r.re;
    }
    WaveState::maxwell(u, Field::zeros(grid, 4), cfl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{poly_bump, Boundary};

    fn grid(n: usize, h: f64) -> GridSpec {
        GridSpec::periodic_1d(n, h).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = WaveState::zeros(grid(32, 0.1), 1, 1.0, 0.5).unwrap();
        let e = s.evolve(&NoSource, 20).unwrap();
        assert!(e.u().values().iter().chain(e.v().values()).all(|&x| x == 0.0));
        let m = WaveState::zeros(grid(32, 0.1), 4, 0.0, 0.5).unwrap();
        assert!(m.evolve(&NoSource, 5).unwrap().u().max_abs() == 0.0);
    }

    #[test]
    fn unit_cfl_reproduces_dalembert() {
        let g = grid(256, 0.05);
        let f = |x: f64| poly_bump(x - 6.4, 1.0, 4);
        let u = Field::scalar_from_fn(g, |x| f(x[0]));
        let s0 = WaveState::klein_gordon(u, Field::zeros(g, 1), 0.0, 1.0).unwrap();
        let mut s = s0.clone();
        for n in 1..=60 {
            s = s.step_leapfrog(&NoSource).unwrap();
            let shift = n as f64 * 0.05;
            for site in 0..256 {
                let x = g.coords(site)[0];
                let exact = 0.5 * (f(x - shift) + f(x + shift));
                assert!((s.u().get(0, site) - exact).abs() < 1e-14, "n={n} site={site}");
            }
        }
    }

    #[test]
    fn validation_errors() {
        let g = grid(16, 0.1);
        assert!(WaveState::zeros(g, 1, 0.0, 1.5).is_err());
        assert!(WaveState::zeros(g, 1, -1.0, 0.5).is_err());
        let kg = WaveState::zeros(g, 1, 0.0, 0.5).unwrap();
        assert!(matches!(em_fields(&kg), Err(Error::Shape(_))));
        assert!(lorenz_residual(&kg).is_err());
    }

    #[test]
    fn instability_reports_step() {
        let g = grid(16, 1.0);
        // m dt = 10 is far outside the leapfrog stability interval
        let u = Field::from_fn(g, 1, |_, s| if s == 3 { 1.0 } else { 0.0 });
        let s = WaveState::klein_gordon(u, Field::zeros(g, 1), 10.0, 1.0).unwrap();
        let mut cur = s;
        let err = loop {
            assert!(cur.step < 100_000, "never blew up");
            match cur.step_leapfrog(&NoSource) {
                Ok(next) => cur = next,
                Err(e) => break e,
            }
        };
        assert!(matches!(err, Error::Instability { step, .. } if step >= 1));
    }

    #[test]
    fn em_fields_of_linear_potential() {
        let g = grid(32, 0.25);
        let slope = 0.7;
        let u = Field::from_fn(g, 4, |c, s| if c == 0 { slope * g.coords(s)[0] } else { 0.0 });
        let st = WaveState::maxwell(u, Field::zeros(g, 4), 0.5).unwrap();
        let (e, b) = em_fields(&st).unwrap();
        // interior sites: the periodic seam breaks linearity at the last site
        for s in 0..31 {
            assert!((e.get(0, s) + slope).abs() < 1e-12);
            assert_eq!(e.get(1, s), 0.0);
        }
        assert_eq!(b.max_abs(), 0.0);
        let z = WaveState::zeros(g, 4, 0.0, 0.5).unwrap();
        let (e, b) = em_fields(&z).unwrap();
        assert_eq!(e.max_abs() + b.max_abs(), 0.0);
    }

    #[test]
    fn lorenz_residual_of_violating_data_is_the_divergence() {
        let g = grid(64, 0.1);
        let u = Field::from_fn(g, 4, |c, s| if c == 1 { (g.coords(s)[0]).sin() } else { 0.0 });
        let st = WaveState::maxwell(u.clone(), Field::zeros(g, 4), 0.5).unwrap();
        let r = lorenz_residual(&st).unwrap();
        let a = u.component(1);
        for s in 0..64 {
            let div = (a[s] - a[(s + 63) % 64]) / 0.1;
            assert_eq!(r.get(0, s), div);
        }
        assert_eq!(lorenz_residual(&WaveState::zeros(g, 4, 0.0, 0.5).unwrap()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn gauge_by_zero_is_identity() {
        let g = grid(32, 0.1);
        let u = Field::from_fn(g, 4, |c, s| (c + s) as f64 * 0.01);
        let st = WaveState::maxwell(u, Field::zeros(g, 4), 0.5).unwrap();
        let lam = WaveState::zeros(g, 1, 0.0, 0.5).unwrap();
        assert_eq!(gauge_transform(&st, &lam).unwrap(), st);
        let other = WaveState::zeros(grid(16, 0.1), 1, 0.0, 0.5).unwrap();
        assert!(gauge_transform(&st, &other).is_err());
    }

    #[test]
    fn continuity_of_static_and_broken_sources() {
        let g = grid(128, 0.05);
        let stat = FnSource(|x: [f64; 3], _t: f64| (poly_bump(x[0] - 3.2, 0.5, 4), [0.0; 3]));
        assert_eq!(continuity_residual(&stat, &g, 0.3, 0.01).max_abs(), 0.0);
        let broken = MovingCharge::dipole(3.2, 0.5, 0.4, 1.0).without_current();
        assert!(continuity_residual(&broken, &g, 0.3, 0.01).max_abs() > 0.1);
    }

    #[test]
    fn sampled_source_interpolates() {
        let g = grid(16, 0.1);
        let mc = MovingCharge::dipole(0.8, 0.3, 0.2, 1.0);
        let cached = SampledSource::capture(&mc, &g, 0.0, 0.01, 11).unwrap();
        for s in 0..16 {
            assert!((cached.charge(&g, s, 0.05) - mc.charge(&g, s, 0.05)).abs() < 1e-12);
            assert!((cached.current(&g, s, 0.1)[0] - mc.current(&g, s, 0.1)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn absorbing_pad_damps_outgoing_waves() {
        let g = GridSpec::new(1, 256, 0.05, Boundary::AbsorbingPad).unwrap();
        let u = Field::scalar_from_fn(g, |x| poly_bump(x[0] - 6.4, 0.5, 4));
        let s = WaveState::klein_gordon(u, Field::zeros(g, 1), 0.0, 0.5).unwrap();
        let e0 = s.total_energy();
        let late = s.evolve(&NoSource, 1200).unwrap();
        assert!(late.total_energy() < 1e-3 * e0);
    }
}
