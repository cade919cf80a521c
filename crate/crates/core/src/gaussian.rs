//! Free lattice scalar field in the Gaussian sector.
//!
//! The chain Hamiltonian is `H = ½ πᵀπ + ½ φᵀ K φ` with
//! `K = m² + (2 − shift − shift⁻¹)/a²`. Gaussian states are fixed by the
//! means of `(φ, π)` and their symmetrised covariance, ordered as
//! `(φ_1 … φ_n, π_1 … π_n)`. Partial traces restrict rows and columns.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, GridSpec, Region};

/// Eigenvalues of `K` below this are treated as singular.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    k: DMatrix<f64>,
    grid: Option<GridSpec>,
    mass: f64,
}

impl CouplingMatrix {
    /// Nearest-neighbour chain on a one-dimensional grid. Periodic grids wrap;
    /// absorbing-pad grids are treated as open chains with Dirichlet ends.
    pub fn chain(grid: GridSpec, mass: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::config("coupling matrices are built for 1-d chains"));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("mass must be >= 0, got {mass}")));
        }
        if grid.boundary() == Boundary::Periodic && mass <= 0.0 {
            return Err(Error::config("a periodic chain needs m > 0 to remove the zero mode"));
        }
        let n = grid.extent();
        let inv = 1.0 / (grid.spacing() * grid.spacing());
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = mass * mass + 2.0 * inv;
            for off in [-1isize, 1] {
                if let Some(j) = grid.neighbor(i, 0, off) {
                    k[(i, j)] -= inv;
                }
            }
        }
        Ok(Self { k, grid: Some(grid), mass })
    }

    /// Arbitrary symmetric positive-definite coupling, not tied to a grid.
    /// `mass` is recorded for reports only.
    pub fn from_matrix(k: DMatrix<f64>, mass: f64) -> Result<Self> {
        if !k.is_square() || k.nrows() == 0 {
            return Err(Error::shape("coupling matrix must be square and non-empty"));
        }
        let asym = (&k - k.transpose()).abs().max();
        if asym > 1e-14 * k.abs().max().max(1.0) {
            return Err(Error::config(format!("coupling matrix asymmetric by {asym:e}")));
        }
        let out = Self { k, grid: None, mass };
        out.modes()?;
        Ok(out)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sites(&self) -> usize {
        self.k.nrows()
    }

    /// Normal-mode frequencies and modes: `K = V diag(ω²) Vᵀ`.
    fn modes(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let eig = SymmetricEigen::new(self.k.clone());
        if let Some(&lo) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if lo <= EIGEN_FLOOR {
                return Err(Error::config(format!(
                    "coupling matrix is singular (smallest eigenvalue {lo:e}); use m > 0"
                )));
            }
        }
        Ok((eig.eigenvalues.map(f64::sqrt), eig.eigenvectors))
    }

    /// `K^p` through the eigendecomposition.
    fn power(&self, p: f64) -> Result<DMatrix<f64>> {
        let (w, v) = self.modes()?;
        let d = DMatrix::from_diagonal(&w.map(|x| x.powf(2.0 * p)));
        Ok(&v * d * v.transpose())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    grid: Option<GridSpec>,
    total_sites: usize,
    site_map: Vec<usize>,
    mean_phi: DVector<f64>,
    mean_pi: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Evolution {
    ExactSpectral,
    /// Kick-drift-kick steps of size `dt`; `T` must be a multiple of `dt`.
    SymplecticSteps { dt: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub sites: Vec<usize>,
    pub symplectic_eigenvalues: Vec<f64>,
    pub entropy: f64,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty principle. `total_sites` is the
    /// size of the system the state is (part of); `grid`, when present, lets
    /// regions be given as balls.
    pub fn new(
        grid: Option<GridSpec>,
        total_sites: usize,
        site_map: Vec<usize>,
        mean_phi: DVector<f64>,
        mean_pi: DVector<f64>,
        cov: DMatrix<f64>,
    ) -> Result<Self> {
        let n = site_map.len();
        if mean_phi.len() != n || mean_pi.len() != n || cov.shape() != (2 * n, 2 * n) {
            return Err(Error::shape(format!(
                "Gaussian state over {n} sites needs n-vectors and a {0}x{0} covariance",
                2 * n
            )));
        }
        if grid.is_some_and(|g| g.site_count() != total_sites) {
            return Err(Error::shape("grid size and total site count differ"));
        }
        if site_map.iter().any(|&s| s >= total_sites) {
            return Err(Error::config("site map refers to sites outside the system"));
        }
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidState(format!("covariance asymmetric by {asym:e}")));
        }
        let state = Self { grid, total_sites, site_map, mean_phi, mean_pi, cov };
        state.symplectic_eigenvalues()?;
        Ok(state)
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn site_map(&self) -> &[usize] {
        &self.site_map
    }

    pub fn mean_phi(&self) -> &DVector<f64> {
        &self.mean_phi
    }

    pub fn mean_pi(&self) -> &DVector<f64> {
        &self.mean_pi
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn is_full(&self) -> bool {
        self.site_map.len() == self.total_sites && self.site_map.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// Symplectic eigenvalues in ascending order, unclamped. Anything more
    /// than 1e−8 below ½ is an invalid state.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.site_map.len();
        if n == 0 {
            return Ok(vec![]);
        }
        let eig = SymmetricEigen::new(self.cov.clone());
        if let Some(&lo) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if lo <= 0.0 {
                return Err(Error::InvalidState(format!(
                    "covariance is not positive definite (eigenvalue {lo:e})"
                )));
            }
        }
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
        let omega = symplectic_form(n);
        let a = &root * omega * &root;
        let mut sq: Vec<f64> = SymmetricEigen::new(a.transpose() * &a)
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        sq.sort_by(|x, y| x.total_cmp(y));
        let nus: Vec<f64> = sq.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        if let Some(&lo) = nus.first() {
            if lo < 0.5 - 1e-8 {
                return Err(Error::InvalidState(format!(
                    "symplectic eigenvalue {lo} violates the uncertainty bound 1/2"
                )));
            }
        }
        Ok(nus)
    }

    pub fn entropy(&self) -> Result<EntropyReport> {
        let nus = self.symplectic_eigenvalues()?;
        let entropy = nus.iter().map(|&v| entropy_term(v)).sum();
        Ok(EntropyReport {
            sites: self.site_map.clone(),
            symplectic_eigenvalues: nus,
            entropy,
        })
    }

    /// Restriction to the sites of `region` (exact partial trace). Balls
    /// need a state that knows its grid.
    pub fn reduce(&self, region: &Region) -> Result<GaussianState> {
        let wanted = match (region, &self.grid) {
            (Region::SiteSet(s), None) => {
                Region::site_set(s.clone())?;
                s.clone()
            }
            (_, Some(g)) => region.sites(g)?,
            (Region::Ball { .. }, None) => {
                return Err(Error::config("ball regions need a state defined on a grid"));
            }
        };
        let mut idx = Vec::with_capacity(wanted.len());
        for s in &wanted {
            match self.site_map.iter().position(|x| x == s) {
                Some(i) => idx.push(i),
                None => {
                    return Err(Error::config(format!("region site {s} is not described by this state")));
                }
            }
        }
        Ok(self.restrict(&idx))
    }

    fn restrict(&self, idx: &[usize]) -> GaussianState {
        let n = self.site_map.len();
        let both: Vec<usize> = idx.iter().copied().chain(idx.iter().map(|i| i + n)).collect();
        let cov = DMatrix::from_fn(both.len(), both.len(), |i, j| self.cov[(both[i], both[j])]);
        GaussianState {
            grid: self.grid,
            total_sites: self.total_sites,
            site_map: idx.iter().map(|&i| self.site_map[i]).collect(),
            mean_phi: DVector::from_fn(idx.len(), |i, _| self.mean_phi[idx[i]]),
            mean_pi: DVector::from_fn(idx.len(), |i, _| self.mean_pi[idx[i]]),
            cov,
        }
    }

    /// Weyl displacement of the means at one grid site.
    pub fn displace(&self, site: usize, d_phi: f64, d_pi: f64) -> Result<GaussianState> {
        if !self.is_full() {
            return Err(Error::config("displacements act on full-grid states"));
        }
        if site >= self.site_map.len() {
            return Err(Error::config(format!("site {site} outside chain of {}", self.site_map.len())));
        }
        let mut out = self.clone();
        out.mean_phi[site] += d_phi;
        out.mean_pi[site] += d_pi;
        Ok(out)
    }

    /// Moves the state forward by `t`.
    pub fn evolve(&self, k: &CouplingMatrix, t: f64, method: Evolution) -> Result<GaussianState> {
        if !self.is_full() {
            return Err(Error::config("evolution is defined for full-grid states only"));
        }
        if k.sites() != self.site_map.len() {
            return Err(Error::shape("coupling matrix and state have different sizes"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::config(format!("evolution time must be >= 0, got {t}")));
        }
        match method {
            Evolution::ExactSpectral => {
                let s = spectral_propagator(k, t)?;
                Ok(self.conjugate(&s))
            }
            Evolution::SymplecticSteps { dt } => {
                let steps = step_count(t, dt)?;
                let m = verlet_matrix(k, dt);
                let mut out = self.clone();
                for _ in 0..steps {
                    out = out.conjugate(&m);
                }
                Ok(out)
            }
        }
    }

    fn conjugate(&self, s: &DMatrix<f64>) -> GaussianState {
        let n = self.site_map.len();
        let mut mean = DVector::zeros(2 * n);
        mean.rows_mut(0, n).copy_from(&self.mean_phi);
        mean.rows_mut(n, n).copy_from(&self.mean_pi);
        let mean = s * mean;
        let cov = s * &self.cov * s.transpose();
        // re-symmetrise against rounding
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianState {
            grid: self.grid,
            total_sites: self.total_sites,
            site_map: self.site_map.clone(),
            mean_phi: mean.rows(0, n).into_owned(),
            mean_pi: mean.rows(n, n).into_owned(),
            cov,
        }
    }

    /// `⟨H⟩ = ½[tr⟨ππ⟩ + tr(K⟨φφ⟩)] + ½[π̄ᵀπ̄ + φ̄ᵀKφ̄]`.
    pub fn energy(&self, k: &CouplingMatrix) -> Result<f64> {
        if !self.is_full() || k.sites() != self.site_map.len() {
            return Err(Error::shape("energy needs a full-grid state matching the coupling matrix"));
        }
        let n = self.site_map.len();
        let x = self.cov.view((0, 0), (n, n));
        let p = self.cov.view((n, n), (n, n));
        let fluct = 0.5 * (p.trace() + (k.matrix() * x).trace());
        let mean = 0.5 * (self.mean_pi.dot(&self.mean_pi) + self.mean_phi.dot(&(k.matrix() * &self.mean_phi)));
        Ok(fluct + mean)
    }

    /// `x,y,value` rows for every covariance entry.
    pub fn write_covariance_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "row,col,value")?;
        for i in 0..self.cov.nrows() {
            for j in 0..self.cov.ncols() {
                writeln!(w, "{i},{j},{:e}", self.cov[(i, j)])?;
            }
        }
        Ok(())
    }
}

fn entropy_term(nu: f64) -> f64 {
    // rounding can leave ν a hair below ½
    let nu = nu.max(0.5);
    let lo = nu - 0.5;
    let hi = nu + 0.5;
    let neg = if lo > 0.0 { lo * lo.ln() } else { 0.0 };
    hi * hi.ln() - neg
}

fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = 1.0;
        o[(n + i, i)] = -1.0;
    }
    o
}

fn step_count(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("step size must be positive, got {dt}")));
    }
    let steps = (t / dt).round();
    if (steps * dt - t).abs() > 1e-9 * dt.max(t) {
        return Err(Error::config(format!("time {t} is not a multiple of the step {dt}")));
    }
    Ok(steps as usize)
}

/// Ground state of `K`: zero means, `⟨φφ⟩ = ½K^{−1/2}`, `⟨ππ⟩ = ½K^{1/2}`.
pub fn vacuum_state(k: &CouplingMatrix) -> Result<GaussianState> {
    let n = k.sites();
    let x = k.power(-0.5)? * 0.5;
    let p = k.power(0.5)? * 0.5;
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    cov.view_mut((0, 0), (n, n)).copy_from(&x);
    cov.view_mut((n, n), (n, n)).copy_from(&p);
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::new(k.grid, n, (0..n).collect(), DVector::zeros(n), DVector::zeros(n), cov)
}

/// Exact phase-space propagator
/// `[[cos Ωt, Ω⁻¹ sin Ωt], [−Ω sin Ωt, cos Ωt]]` in site coordinates.
pub fn spectral_propagator(k: &CouplingMatrix, t: f64) -> Result<DMatrix<f64>> {
    let (w, v) = k.modes()?;
    let n = k.sites();
    let vt = v.transpose();
    let conj = |d: DVector<f64>| &v * DMatrix::from_diagonal(&d) * &vt;
    let c = conj(w.map(|x| (x * t).cos()));
    let s_over = conj(w.map(|x| (x * t).sin() / x));
    let s_times = conj(w.map(|x| -(x * t).sin() * x));
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&c);
    s.view_mut((0, n), (n, n)).copy_from(&s_over);
    s.view_mut((n, 0), (n, n)).copy_from(&s_times);
    s.view_mut((n, n), (n, n)).copy_from(&c);
    Ok(s)
}

/// One kick-drift-kick step as a phase-space matrix. `φ` reaches one
/// neighbour per step and `π` two, since the final kick reads the updated `φ`.
pub fn verlet_matrix(k: &CouplingMatrix, dt: f64) -> DMatrix<f64> {
    let n = k.sites();
    let km = k.matrix();
    let id = DMatrix::<f64>::identity(n, n);
    let a = &id - km * (0.5 * dt * dt);
    let c = km * (-dt) + km * km * (0.25 * dt * dt * dt);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&(id * dt));
    m.view_mut((n, 0), (n, n)).copy_from(&c);
    m.view_mut((n, n), (n, n)).copy_from(&a);
    m
}

/// Largest absolute difference of means and covariances.
pub fn reduced_state_distance(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.site_map != b.site_map || a.total_sites != b.total_sites {
        return Err(Error::shape("states describe different sites"));
    }
    let dm = (&a.mean_phi - &b.mean_phi)
        .abs()
        .max()
        .max((&a.mean_pi - &b.mean_pi).abs().max());
    let dc = if a.cov.is_empty() { 0.0 } else { (&a.cov - &b.cov).abs().max() };
    Ok(if a.site_map.is_empty() { 0.0 } else { dm.max(dc) })
}

/// `I(A:B) = S(A) + S(B) − S(A ∪ B)` for disjoint regions.
pub fn mutual_information(state: &GaussianState, a: &Region, b: &Region) -> Result<f64> {
    let sites = |r: &Region| -> Result<Vec<usize>> { Ok(state.reduce(r)?.site_map) };
    let sa = sites(a)?;
    let sb = sites(b)?;
    if sa.iter().any(|s| sb.contains(s)) {
        return Err(Error::config("mutual information needs disjoint regions"));
    }
    let union = Region::site_set(sa.iter().chain(&sb).copied().collect())?;
    let s = |r: &Region| -> Result<f64> { Ok(state.reduce(r)?.entropy()?.entropy) };
    Ok(s(a)? + s(b)? - s(&union)?)
}

/// Contiguous run of `len` sites starting at `start`, wrapping around.
pub fn interval_sites(n: usize, start: usize, len: usize) -> Result<Region> {
    if len > n {
        return Err(Error::config(format!("interval of {len} sites on a chain of {n}")));
    }
    Region::site_set((0..len).map(|i| (start + i) % n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, m: f64) -> CouplingMatrix {
        CouplingMatrix::chain(GridSpec::periodic_1d(n, 1.0).unwrap(), m).unwrap()
    }

    #[test]
    fn single_oscillator_vacuum() {
        let m = 0.8;
        let k = CouplingMatrix::from_matrix(DMatrix::from_element(1, 1, m * m), m).unwrap();
        let vac = vacuum_state(&k).unwrap();
        let c = vac.covariance();
        assert!((c[(0, 0)] - 1.0 / (2.0 * m)).abs() < 1e-15);
        assert!((c[(1, 1)] - m / 2.0).abs() < 1e-15);
        let nus = vac.symplectic_eigenvalues().unwrap();
        assert!(nus.iter().all(|v| (v - 0.5).abs() < 1e-10));
    }

    #[test]
    fn singular_chain_is_rejected() {
        let g = GridSpec::periodic_1d(8, 1.0).unwrap();
        assert!(CouplingMatrix::chain(g, 0.0).is_err());
    }

    #[test]
    fn displacement_outside_region_is_invisible() {
        let k = chain(16, 0.5);
        let vac = vacuum_state(&k).unwrap();
        let moved = vac.displace(12, 0.3, -0.2).unwrap();
        let r = interval_sites(16, 0, 6).unwrap();
        assert_eq!(reduced_state_distance(&vac.reduce(&r).unwrap(), &moved.reduce(&r).unwrap()).unwrap(), 0.0);
        let r2 = interval_sites(16, 10, 4).unwrap();
        let d = reduced_state_distance(&vac.reduce(&r2).unwrap(), &moved.reduce(&r2).unwrap()).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
    }

    #[test]
    fn evolution_rejects_reduced_states_and_bad_steps() {
        let k = chain(8, 1.0);
        let vac = vacuum_state(&k).unwrap();
        let part = vac.reduce(&interval_sites(8, 0, 3).unwrap()).unwrap();
        assert!(part.evolve(&k, 1.0, Evolution::ExactSpectral).is_err());
        assert!(vac.evolve(&k, 1.0, Evolution::SymplecticSteps { dt: 0.3 }).is_err());
    }

    #[test]
    fn entropy_term_limits() {
        assert_eq!(entropy_term(0.5), 0.0);
        assert!(entropy_term(1.0) > 0.0);
    }
}
