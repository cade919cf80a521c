//! First-order square-root Klein-Gordon evolution `i ∂_t ψ = √(m² − ∇²) ψ`.
//!
//! The operator is diagonal in Fourier space, so evolution multiplies every
//! mode by `exp(−i √(k² + m²) T)`. The same propagator drives single-particle
//! Newton-Wigner wave functions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::{dilate_physical, masked_sum, Field, GridSpec};
use crate::wave::{NoSource, WaveState};

/// Amplitudes below this count as outside a wave function's support.
pub const SUPPORT_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    mass: f64,
    t: f64,
}

impl SpectralState {
    /// Transforms position samples; coefficients are scaled so that
    /// `Σ|c|² = Σ|ψ|² h^dim`.
    pub fn from_position(psi: &Field<Complex64>, mass: f64) -> Result<Self> {
        let grid = *psi.grid();
        if !grid.is_periodic() {
            return Err(Error::config("spectral states need a periodic grid"));
        }
        if psi.components() != 1 {
            return Err(Error::shape("spectral states hold one component"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config(format!("square-root evolution needs mass > 0, got {mass}")));
        }
        let mut coeffs = psi.component(0).to_vec();
        fft::forward(&grid, &mut coeffs);
        let scale = (grid.cell_volume() / grid.site_count() as f64).sqrt();
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Ok(Self { grid, coeffs, mass, t: 0.0 })
    }

    pub fn to_position(&self) -> Field<Complex64> {
        let mut d = self.coeffs.clone();
        let scale = (self.grid.site_count() as f64 / self.grid.cell_volume()).sqrt();
        for c in d.iter_mut() {
            *c *= scale;
        }
        fft::inverse(&self.grid, &mut d);
        Field::from_fn(self.grid, 1, |_, s| d[s])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    fn frequencies(&self) -> Vec<f64> {
        let m2 = self.mass * self.mass;
        fft::wavevectors(&self.grid)
            .iter()
            .map(|k| (k.iter().map(|x| x * x).sum::<f64>() + m2).sqrt())
            .collect()
    }

    /// Multiplies every mode by `exp(−i ω(k) T)`.
    pub fn evolve_sqrt_kg(&self, t: f64) -> SpectralState {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.frequencies())
            .map(|(c, w)| c * Complex64::from_polar(1.0, -w * t))
            .collect();
        SpectralState { coeffs, t: self.t + t, ..self.clone() }
    }

    /// `√(m² − ∇²) ψ`.
    pub fn apply_energy(&self) -> SpectralState {
        let coeffs = self.coeffs.iter().zip(self.frequencies()).map(|(c, w)| c * w).collect();
        SpectralState { coeffs, ..self.clone() }
    }

    /// `∇² ψ` evaluated spectrally (`−k²` per mode).
    pub fn apply_laplacian(&self) -> SpectralState {
        let coeffs = self
            .coeffs
            .iter()
            .zip(fft::wavevectors(&self.grid))
            .map(|(c, k)| c * -k.iter().map(|x| x * x).sum::<f64>())
            .collect();
        SpectralState { coeffs, ..self.clone() }
    }
}

/// Support mask `|ψ| > SUPPORT_FLOOR`.
pub fn support_of(psi: &Field<Complex64>) -> Vec<bool> {
    psi.site_norm_sqr().iter().map(|&v| v.sqrt() > SUPPORT_FLOOR).collect()
}

/// Errors unless the support's bounding box grown by `reach` stays inside the grid.
pub fn check_no_wrap(grid: &GridSpec, support: &[bool], reach: f64) -> Result<()> {
    let hi = (grid.extent() - 1) as f64 * grid.spacing();
    for axis in 0..grid.dim() {
        let coords = support
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(s, _)| grid.coords(s)[axis]);
        let (lo_c, hi_c) = coords.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if lo_c.is_finite() && (lo_c - reach < 0.0 || hi_c + reach > hi) {
            return Err(Error::config(format!(
                "support [{lo_c}, {hi_c}] grown by {reach} wraps around the periodic grid"
            )));
        }
    }
    Ok(())
}

/// Fraction of `Σ|ψ(T)|²` outside the light-cone dilation of the initial
/// support after square-root evolution for time `t`.
pub fn leakage_fraction(psi0: &Field<Complex64>, mass: f64, t: f64) -> Result<f64> {
    let grid = *psi0.grid();
    let support = support_of(psi0);
    check_no_wrap(&grid, &support, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let state = SpectralState::from_position(psi0, mass)?;
    let evolved = state.evolve_sqrt_kg(t).to_position();
    let dens = evolved.site_norm_sqr();
    Ok(outside_fraction(&grid, &support, &dens, t))
}

fn outside_fraction(grid: &GridSpec, support: &[bool], dens: &[f64], reach: f64) -> f64 {
    let total: f64 = dens.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let cone: Vec<bool> = dilate_physical(grid, support, reach).iter().map(|&m| !m).collect();
    masked_sum(dens, &cone) / total
}

/// The same functional for the second-order Klein-Gordon equation with
/// Cauchy data `(u, v) = (ψ0, 0)`, both compactly supported. The run uses
/// leapfrog at the given `cfl` for `round(t / dt)` steps.
pub fn second_order_leakage(psi0: &Field<f64>, mass: f64, t: f64, cfl: f64) -> Result<f64> {
    let grid = *psi0.grid();
    let support: Vec<bool> = psi0.component(0).iter().map(|v| v.abs() > SUPPORT_FLOOR).collect();
    check_no_wrap(&grid, &support, t)?;
    let state = WaveState::klein_gordon(psi0.clone(), Field::zeros(grid, 1), mass, cfl)?;
    let steps = (t / state.dt()).round() as usize;
    let end = state.evolve(&NoSource, steps)?;
    let dens: Vec<f64> = end.u().component(0).iter().map(|v| v * v).collect();
    Ok(outside_fraction(&grid, &support, &dens, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::poly_bump;

    fn bump_field(grid: GridSpec, center: f64, w: f64) -> Field<Complex64> {
        Field::scalar_from_fn(grid, |x| Complex64::new(poly_bump(x[0] - center, w, 6), 0.0))
    }

    #[test]
    fn zero_time_is_identity() {
        let g = GridSpec::periodic_1d(64, 0.5).unwrap();
        let s = SpectralState::from_position(&bump_field(g, 16.0, 2.0), 1.0).unwrap();
        assert_eq!(s.evolve_sqrt_kg(0.0).coeffs(), s.coeffs());
    }

    #[test]
    fn single_mode_picks_up_phase() {
        let g = GridSpec::periodic_1d(32, 0.25).unwrap();
        let k = fft::axis_wavenumber(&g, 5);
        let psi = Field::scalar_from_fn(g, |x| Complex64::from_polar(1.0, k * x[0]));
        let s = SpectralState::from_position(&psi, 1.3).unwrap();
        let t = 0.77;
        let out = s.evolve_sqrt_kg(t).to_position();
        let w = (k * k + 1.3 * 1.3).sqrt();
        for site in 0..32 {
            let want = psi.get(0, site) * Complex64::from_polar(1.0, -w * t);
            assert!((out.get(0, site) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn parseval_and_norm_conservation() {
        let g = GridSpec::periodic_1d(128, 0.1).unwrap();
        let psi = bump_field(g, 6.4, 1.0);
        let s = SpectralState::from_position(&psi, 1.0).unwrap();
        let direct: f64 = psi.site_norm_sqr().iter().sum::<f64>() * 0.1;
        assert!((s.norm_sqr() - direct).abs() < 1e-12 * direct);
        assert!((s.evolve_sqrt_kg(12.0).norm_sqr() - direct).abs() < 1e-13 * direct.max(1.0));
    }

    #[test]
    fn leakage_preconditions() {
        let g = GridSpec::periodic_1d(64, 0.5).unwrap();
        let psi = bump_field(g, 16.0, 2.0);
        assert_eq!(leakage_fraction(&psi, 1.0, 0.0).unwrap(), 0.0);
        assert!(leakage_fraction(&psi, 1.0, 30.0).is_err());
        assert!(leakage_fraction(&psi, 0.0, 1.0).is_err());
    }
}
