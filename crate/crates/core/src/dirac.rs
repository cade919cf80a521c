//! Free Dirac evolution: 2-component spinors on 1-d grids and 4-component
//! spinors (Dirac representation) on 3-d grids.
//!
//! `i ∂_t ψ = −i α·∇ψ + β m ψ` with `α_k = γ⁰γ^k`, `β = γ⁰`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::{Field, GridSpec, Neighbors};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    gamma0: DMatrix<Complex64>,
    spatial: Vec<DMatrix<Complex64>>,
}

impl GammaSet {
    /// γ⁰ = diag(1, −1), γ¹ = [[0, 1], [−1, 0]].
    pub fn one_plus_one() -> Self {
        let g0 = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let g1 = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]);
        Self { gamma0: g0, spatial: vec![g1] }
    }

    /// Dirac representation.
    pub fn three_plus_one() -> Self {
        let pauli = pauli_matrices();
        let mut g0 = DMatrix::zeros(4, 4);
        for i in 0..4 {
            g0[(i, i)] = c(if i < 2 { 1.0 } else { -1.0 }, 0.0);
        }
        let spatial = pauli
            .iter()
            .map(|s| {
                let mut g = DMatrix::zeros(4, 4);
                for r in 0..2 {
                    for col in 0..2 {
                        g[(r, col + 2)] = s[(r, col)];
                        g[(r + 2, col)] = -s[(r, col)];
                    }
                }
                g
            })
            .collect();
        Self { gamma0: g0, spatial }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        if grid.dim() == 1 {
            Self::one_plus_one()
        } else {
            Self::three_plus_one()
        }
    }

    pub fn spinor_dim(&self) -> usize {
        self.gamma0.nrows()
    }

    pub fn gamma0(&self) -> &DMatrix<Complex64> {
        &self.gamma0
    }

    pub fn spatial(&self) -> &[DMatrix<Complex64>] {
        &self.spatial
    }

    /// `γ^μ` for μ = 0..=d.
    pub fn gamma(&self, mu: usize) -> &DMatrix<Complex64> {
        if mu == 0 {
            &self.gamma0
        } else {
            &self.spatial[mu - 1]
        }
    }

    /// `α_k = γ⁰ γ^k`.
    pub fn alpha(&self, k: usize) -> DMatrix<Complex64> {
        &self.gamma0 * &self.spatial[k]
    }

    /// Largest entrywise deviation from `{γ^μ, γ^ν} = 2 η^{μν}` with signature (+,−,−,−).
    pub fn anticommutator_defect(&self) -> f64 {
        let n = self.spatial.len() + 1;
        let d = self.spinor_dim();
        let mut worst: f64 = 0.0;
        for mu in 0..n {
            for nu in 0..n {
                let (a, b) = (self.gamma(mu), self.gamma(nu));
                let ac = a * b + b * a;
                let eta = if mu != nu {
                    0.0
                } else if mu == 0 {
                    2.0
                } else {
                    -2.0
                };
                let target = DMatrix::<Complex64>::identity(d, d) * c(eta, 0.0);
                worst = worst.max((ac - target).iter().fold(0.0, |m, z| m.max(z.norm())));
            }
        }
        worst
    }

    /// Largest deviation from γ⁰ Hermitian and γ^k anti-Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = (&self.gamma0 - self.gamma0.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        self.spatial.iter().fold(h, |acc, g| {
            acc.max((g + g.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm())))
        })
    }

    fn beta_diag(&self) -> Vec<f64> {
        (0..self.spinor_dim()).map(|i| self.gamma0[(i, i)].re).collect()
    }

    /// Eigen-decomposition of each `α_k` as (eigenvalue ±1, unit eigenvector).
    fn alpha_eigensystems(&self) -> Vec<Vec<(f64, Vec<Complex64>)>> {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let plus_x = vec![c(s2, 0.), c(s2, 0.)];
        let minus_x = vec![c(s2, 0.), c(-s2, 0.)];
        if self.spinor_dim() == 2 {
            return vec![vec![(1.0, plus_x), (-1.0, minus_x)]];
        }
        // α_k = σ_x ⊗ σ_k, so eigenvectors are tensor products
        let sigma_eig: [[(f64, Vec<Complex64>); 2]; 3] = [
            [(1.0, plus_x.clone()), (-1.0, minus_x.clone())],
            [(1.0, vec![c(s2, 0.), c(0., s2)]), (-1.0, vec![c(s2, 0.), c(0., -s2)])],
            [(1.0, vec![c(1., 0.), c(0., 0.)]), (-1.0, vec![c(0., 0.), c(1., 0.)])],
        ];
        let outer = [(1.0, plus_x), (-1.0, minus_x)];
        sigma_eig
            .iter()
            .map(|pairs| {
                let mut sys = Vec::with_capacity(4);
                for (la, va) in &outer {
                    for (lb, vb) in pairs {
                        let v = va.iter().flat_map(|a| vb.iter().map(move |b| a * b)).collect();
                        sys.push((la * lb, v));
                    }
                }
                sys
            })
            .collect()
    }
}

fn pauli_matrices() -> [DMatrix<Complex64>; 3] {
    let z = c(0., 0.);
    [
        DMatrix::from_row_slice(2, 2, &[z, c(1., 0.), c(1., 0.), z]),
        DMatrix::from_row_slice(2, 2, &[z, c(0., -1.), c(0., 1.), z]),
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), z, z, c(-1., 0.)]),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinorState {
    psi: Field<Complex64>,
    t: f64,
    mass: f64,
    steps_taken: usize,
}

impl SpinorState {
    pub fn new(psi: Field<Complex64>, mass: f64) -> Result<Self> {
        let want = if psi.grid().dim() == 1 { 2 } else { 4 };
        if psi.components() != want {
            return Err(Error::shape(format!(
                "{}-d spinors need {want} components, got {}",
                psi.grid().dim(),
                psi.components()
            )));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("mass must be >= 0, got {mass}")));
        }
        if !psi.is_finite() {
            return Err(Error::InvalidState("spinor contains NaN or Inf".into()));
        }
        Ok(Self { psi, t: 0.0, mass, steps_taken: 0 })
    }

    pub fn zeros(grid: GridSpec, mass: f64) -> Result<Self> {
        let comps = if grid.dim() == 1 { 2 } else { 4 };
        Self::new(Field::zeros(grid, comps), mass)
    }

    pub fn psi(&self) -> &Field<Complex64> {
        &self.psi
    }

    pub fn psi_mut(&mut self) -> &mut Field<Complex64> {
        &mut self.psi
    }

    pub fn grid(&self) -> &GridSpec {
        self.psi.grid()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `Σ ψ†ψ h^dim`.
    pub fn total_probability(&self) -> f64 {
        self.psi.site_norm_sqr().iter().sum::<f64>() * self.grid().cell_volume()
    }

    pub fn difference(&self, other: &SpinorState) -> Result<SpinorState> {
        if !self.psi.same_shape(&other.psi) {
            return Err(Error::shape("cannot difference spinors of different shape"));
        }
        let vals = self.psi.values().iter().zip(other.psi.values()).map(|(a, b)| a - b).collect();
        Ok(SpinorState {
            psi: Field::from_values(*self.grid(), self.psi.components(), vals)?,
            ..self.clone()
        })
    }

    /// One split step: half mass rotation, Lax-Wendroff transport per axis
    /// in the eigenbasis of `α_k`, half mass rotation. Each transport sweep
    /// reads one neighbour per side, so influence spreads one site per step
    /// along each axis. At `dt = spacing` in 1-d the transport is an exact shift.
    pub fn step_fd(&self, dt: f64) -> Result<SpinorState> {
        let grid = *self.grid();
        if !(dt > 0.0 && dt <= grid.spacing() * (1.0 + 1e-12)) {
            return Err(Error::precondition(format!(
                "dt = {dt} must lie in (0, spacing = {}]",
                grid.spacing()
            )));
        }
        let gammas = GammaSet::for_grid(&grid);
        let beta = gammas.beta_diag();
        let eig = gammas.alpha_eigensystems();
        let nb = Neighbors::new(&grid);
        let n = grid.site_count();
        let comps = gammas.spinor_dim();
        let norm0 = self.total_probability();

        let mut psi = self.psi.clone();
        mass_rotation(&mut psi, &beta, self.mass * 0.5 * dt);
        let axes: Vec<usize> = if self.steps_taken % 2 == 0 {
            (0..grid.dim()).collect()
        } else {
            (0..grid.dim()).rev().collect()
        };
        for axis in axes {
            let courant = dt / grid.spacing();
            let mut out = vec![Complex64::default(); n * comps];
            for (lambda, vec) in &eig[axis] {
                // χ = v†ψ, advected with velocity λ
                let chi: Vec<Complex64> = (0..n)
                    .map(|s| (0..comps).map(|k| vec[k].conj() * psi.get(k, s)).sum())
                    .collect();
                let cfl = lambda * courant;
                let (p, m) = (&nb.plus[axis], &nb.minus[axis]);
                for s in 0..n {
                    let cp = p[s].map_or(Complex64::default(), |j| chi[j]);
                    let cm = m[s].map_or(Complex64::default(), |j| chi[j]);
                    let x = chi[s];
                    let next = x - (cp - cm) * (0.5 * cfl) + (cp - x * 2.0 + cm) * (0.5 * cfl * cfl);
                    for k in 0..comps {
                        out[k * n + s] += vec[k] * next;
                    }
                }
            }
            psi = Field::from_values(grid, comps, out)?;
        }
        mass_rotation(&mut psi, &beta, self.mass * 0.5 * dt);
        if !grid.is_periodic() {
            for k in 0..comps {
                for (s, z) in psi.component_mut(k).iter_mut().enumerate() {
                    *z *= (-grid.pad_damping(s) * dt).exp();
                }
            }
        }
        let next = SpinorState {
            psi,
            t: self.t + dt,
            mass: self.mass,
            steps_taken: self.steps_taken + 1,
        };
        let norm1 = next.total_probability();
        if !norm1.is_finite() || norm1 > 1.1 * norm0 {
            return Err(Error::Instability {
                step: next.steps_taken,
                detail: format!("probability grew from {norm0:e} to {norm1:e}"),
            });
        }
        Ok(next)
    }

    pub fn evolve_fd(&self, dt: f64, steps: usize) -> Result<SpinorState> {
        let mut s = self.clone();
        for _ in 0..steps {
            s = s.step_fd(dt)?;
        }
        Ok(s)
    }

    /// Exact free evolution by `T` through per-mode rotation
    /// `exp(−iH(k)T) = cos(ET) − i sin(ET) H(k)/E`.
    pub fn evolve_spectral(&self, t: f64) -> Result<SpinorState> {
        let grid = *self.grid();
        if !grid.is_periodic() {
            return Err(Error::config("spectral evolution needs a periodic grid"));
        }
        let gammas = GammaSet::for_grid(&grid);
        let alphas: Vec<DMatrix<Complex64>> = (0..grid.dim()).map(|k| gammas.alpha(k)).collect();
        let comps = gammas.spinor_dim();
        let n = grid.site_count();
        let mut modes: Vec<Vec<Complex64>> = (0..comps)
            .map(|k| {
                let mut d = self.psi.component(k).to_vec();
                fft::forward(&grid, &mut d);
                d
            })
            .collect();
        let ks = fft::wavevectors(&grid);
        for (s, kv) in ks.iter().enumerate() {
            let mut h = gammas.gamma0() * c(self.mass, 0.0);
            for (axis, a) in alphas.iter().enumerate() {
                h += a * c(kv[axis], 0.0);
            }
            let e = (kv.iter().map(|x| x * x).sum::<f64>() + self.mass * self.mass).sqrt();
            if e == 0.0 {
                continue;
            }
            let (cs, sn) = ((e * t).cos(), (e * t).sin() / e);
            let v: Vec<Complex64> = (0..comps).map(|k| modes[k][s]).collect();
            for r in 0..comps {
                let hv: Complex64 = (0..comps).map(|col| h[(r, col)] * v[col]).sum();
                modes[r][s] = v[r] * cs - I * hv * sn;
            }
        }
        let mut vals = Vec::with_capacity(n * comps);
        for mut d in modes {
            fft::inverse(&grid, &mut d);
            vals.extend(d);
        }
        Ok(SpinorState {
            psi: Field::from_values(grid, comps, vals)?,
            t: self.t + t,
            mass: self.mass,
            steps_taken: self.steps_taken,
        })
    }
}

fn mass_rotation(psi: &mut Field<Complex64>, beta: &[f64], angle: f64) {
    if angle == 0.0 {
        return;
    }
    for (k, b) in beta.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -b * angle);
        for z in psi.component_mut(k) {
            *z *= phase;
        }
    }
}

/// Density `ψ†ψ` and current `ψ†α_kψ` (one component per spatial axis).
pub fn probability_current(state: &SpinorState) -> Result<(Field<f64>, Field<f64>)> {
    let grid = *state.grid();
    let gammas = GammaSet::for_grid(&grid);
    let comps = gammas.spinor_dim();
    let n = grid.site_count();
    let density = state.psi.site_norm_sqr();
    let alphas: Vec<DMatrix<Complex64>> = (0..grid.dim()).map(|k| gammas.alpha(k)).collect();
    let mut current = Field::zeros(grid, grid.dim());
    for (axis, a) in alphas.iter().enumerate() {
        let out = current.component_mut(axis);
        for s in 0..n {
            let mut acc = Complex64::default();
            for r in 0..comps {
                let pr = state.psi.get(r, s).conj();
                for col in 0..comps {
                    acc += pr * a[(r, col)] * state.psi.get(col, s);
                }
            }
            if acc.im.abs() > 1e-14 * density[s].max(1.0) {
                return Err(Error::GammaAlgebra(acc.im));
            }
            out[s] = acc.re;
        }
    }
    Ok((Field::from_values(grid, 1, density)?, current))
}

/// `∂_t(ψ†ψ) + ∇·(ψ†αψ)` at the middle state, from three consecutive states.
pub fn continuity_residual(prev: &SpinorState, cur: &SpinorState, next: &SpinorState) -> Result<Field<f64>> {
    let grid = *cur.grid();
    if prev.grid() != &grid || next.grid() != &grid {
        return Err(Error::shape("continuity residual needs states on one grid"));
    }
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::precondition("states must be in increasing time order"));
    }
    let (rho_p, _) = probability_current(prev)?;
    let (rho_n, _) = probability_current(next)?;
    let (_, j) = probability_current(cur)?;
    let nb = Neighbors::new(&grid);
    let h = grid.spacing();
    Ok(Field::from_fn(grid, 1, |_, s| {
        let mut r = (rho_n.get(0, s) - rho_p.get(0, s)) / dt;
        for axis in 0..grid.dim() {
            let jp = nb.plus[axis][s].map_or(0.0, |q| j.get(axis, q));
            let jm = nb.minus[axis][s].map_or(0.0, |q| j.get(axis, q));
            r += (jp - jm) / (2.0 * h);
        }
        r
    }))
}

/// Positive-energy spinor `u(p)` (unit norm) for a 1-d momentum `p`.
pub fn plane_wave_spinor_1d(p: f64, mass: f64) -> [Complex64; 2] {
    let e = (p * p + mass * mass).sqrt();
    let (a, b) = (e + mass, p);
    let norm = (a * a + b * b).sqrt();
    if norm == 0.0 {
        // massless, p = 0: any right-mover
        let s = std::f64::consts::FRAC_1_SQRT_2;
        return [c(s, 0.), c(s, 0.)];
    }
    [c(a / norm, 0.), c(b / norm, 0.)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{poly_bump, Boundary};

    #[test]
    fn gamma_algebra() {
        for g in [GammaSet::one_plus_one(), GammaSet::three_plus_one()] {
            assert!(g.anticommutator_defect() <= 1e-14);
            assert!(g.hermiticity_defect() <= 1e-14);
        }
    }

    #[test]
    fn alpha_eigensystems_are_correct() {
        for g in [GammaSet::one_plus_one(), GammaSet::three_plus_one()] {
            for (k, sys) in g.alpha_eigensystems().iter().enumerate() {
                let a = g.alpha(k);
                for (lam, v) in sys {
                    let v = nalgebra::DVector::from_vec(v.clone());
                    let r = &a * &v - &v * c(*lam, 0.0);
                    assert!(r.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_spinor_stays_zero() {
        let g = GridSpec::periodic_1d(32, 0.1).unwrap();
        let s = SpinorState::zeros(g, 1.0).unwrap();
        let a = s.evolve_fd(0.05, 10).unwrap();
        assert!(a.psi().values().iter().all(|z| z.norm() == 0.0));
        let (rho, j) = probability_current(&a).unwrap();
        assert_eq!(rho.max_abs() + j.max_abs(), 0.0);
    }

    #[test]
    fn massless_right_mover_shifts_one_site() {
        let g = GridSpec::periodic_1d(64, 0.1).unwrap();
        let f = |x: f64| poly_bump(x - 2.0, 0.6, 4);
        let psi = Field::from_fn(g, 2, |_, s| c(f(g.coords(s)[0]), 0.0));
        let mut st = SpinorState::new(psi, 0.0).unwrap();
        for n in 1..=20 {
            st = st.step_fd(0.1).unwrap();
            for s in 0..64 {
                let want = f(g.coords(s)[0] - n as f64 * 0.1);
                assert!((st.psi().get(0, s).re - want).abs() < 1e-14);
                assert!((st.psi().get(1, s).re - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectral_identity_and_unitarity() {
        let g = GridSpec::periodic_1d(64, 0.2).unwrap();
        let psi = Field::from_fn(g, 2, |k, s| c((s as f64 * 0.3 + k as f64).sin(), (s as f64 * 0.1).cos()));
        let st = SpinorState::new(psi, 0.7).unwrap();
        let same = st.evolve_spectral(0.0).unwrap();
        for (a, b) in same.psi().values().iter().zip(st.psi().values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let later = st.evolve_spectral(3.3).unwrap();
        assert!((later.total_probability() - st.total_probability()).abs() < 1e-12 * st.total_probability());
    }

    #[test]
    fn plane_wave_bilinears() {
        let g = GridSpec::periodic_1d(32, 0.25).unwrap();
        let p = 2.0 * std::f64::consts::PI * 3.0 / g.length();
        let u = plane_wave_spinor_1d(p, 1.0);
        let psi = Field::from_fn(g, 2, |k, s| u[k] * Complex64::from_polar(1.0, p * g.coords(s)[0]));
        let st = SpinorState::new(psi, 1.0).unwrap();
        let (rho, j) = probability_current(&st).unwrap();
        let e = (p * p + 1.0).sqrt();
        for s in 0..32 {
            assert!((rho.get(0, s) - 1.0).abs() < 1e-14);
            // group velocity p/E
            assert!((j.get(0, s) - p / e).abs() < 1e-14);
        }
    }

    #[test]
    fn dt_precondition_and_shape() {
        let g = GridSpec::periodic_1d(16, 0.1).unwrap();
        let s = SpinorState::zeros(g, 0.0).unwrap();
        assert!(s.step_fd(0.2).is_err());
        assert!(SpinorState::new(Field::zeros(g, 4), 0.0).is_err());
        let pad = GridSpec::new(1, 16, 0.1, Boundary::AbsorbingPad).unwrap();
        assert!(SpinorState::zeros(pad, 0.0).unwrap().evolve_spectral(1.0).is_err());
    }

    #[test]
    fn three_dimensional_step_runs() {
        let g = GridSpec::new(3, 8, 0.5, Boundary::Periodic).unwrap();
        let psi = Field::from_fn(g, 4, |k, s| {
            let x = g.coords(s);
            c(poly_bump(g.distance(x, [2.0, 2.0, 2.0]), 1.2, 4) * (k + 1) as f64, 0.0)
        });
        let st = SpinorState::new(psi, 1.0).unwrap();
        let a = st.evolve_fd(0.25, 4).unwrap();
        // Lax-Wendroff damps the shortest waves but never amplifies
        let ratio = a.total_probability() / st.total_probability();
        assert!(ratio > 0.5 && ratio <= 1.0 + 1e-12, "{ratio}");
        probability_current(&a).unwrap();
    }
}
