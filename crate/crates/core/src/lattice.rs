//! Grids, regions, light-cone slices and sampled fields.
//!
//! Site `i` along an axis sits at coordinate `i * spacing`; in three
//! dimensions sites are stored x-major (`(ix * n + iy) * n + iz`). Every
//! solver in the crate shares this layout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed of every relativistic solver (units with c = 1).
pub const WAVE_SPEED: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Zero data beyond the edges plus a damping layer in the outer eighth
    /// of each axis.
    AbsorbingPad,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    extent: usize,
    spacing: f64,
    boundary: Boundary,
}

impl GridSpec {
    pub fn new(dim: usize, extent: usize, spacing: f64, boundary: Boundary) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::config(format!("grid dim must be 1 or 3, got {dim}")));
        }
        if extent < 4 {
            return Err(Error::config(format!("grid extent must be >= 4, got {extent}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::config(format!("grid spacing must be positive, got {spacing}")));
        }
        Ok(Self { dim, extent, spacing, boundary })
    }

    /// Periodic one-dimensional grid.
    pub fn periodic_1d(extent: usize, spacing: f64) -> Result<Self> {
        Self::new(1, extent, spacing, Boundary::Periodic)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn site_count(&self) -> usize {
        self.extent.pow(self.dim as u32)
    }

    /// Physical side length `extent * spacing`.
    pub fn length(&self) -> f64 {
        self.extent as f64 * self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Per-axis integer indices of a site (unused axes are zero).
    pub fn axes_of(&self, site: usize) -> [usize; 3] {
        let n = self.extent;
        match self.dim {
            1 => [site, 0, 0],
            _ => [site / (n * n), (site / n) % n, site % n],
        }
    }

    pub fn site_of(&self, axes: [usize; 3]) -> usize {
        let n = self.extent;
        match self.dim {
            1 => axes[0],
            _ => (axes[0] * n + axes[1]) * n + axes[2],
        }
    }

    pub fn coords(&self, site: usize) -> [f64; 3] {
        let a = self.axes_of(site);
        let h = self.spacing;
        match self.dim {
            1 => [a[0] as f64 * h, 0.0, 0.0],
            _ => [a[0] as f64 * h, a[1] as f64 * h, a[2] as f64 * h],
        }
    }

    /// Neighbour `offset` sites away along `axis`; `None` past a non-periodic edge.
    pub fn neighbor(&self, site: usize, axis: usize, offset: isize) -> Option<usize> {
        let mut a = self.axes_of(site);
        let n = self.extent as isize;
        let moved = a[axis] as isize + offset;
        let wrapped = if self.is_periodic() {
            moved.rem_euclid(n)
        } else if (0..n).contains(&moved) {
            moved
        } else {
            return None;
        };
        a[axis] = wrapped as usize;
        Some(self.site_of(a))
    }

    /// Coordinate difference `x_b - x_a` along one axis, minimum image on periodic grids.
    pub fn axis_delta(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        if self.is_periodic() {
            let l = self.length();
            d - l * (d / l).round()
        } else {
            d
        }
    }

    pub fn distance(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        (0..self.dim)
            .map(|k| self.axis_delta(a[k], b[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Damping rate used in absorbing pads (zero on periodic grids and in the interior).
    pub fn pad_damping(&self, site: usize) -> f64 {
        if self.is_periodic() {
            return 0.0;
        }
        let pad = (self.extent / 8).max(1) as f64;
        let a = self.axes_of(site);
        let mut rate: f64 = 0.0;
        for &i in a.iter().take(self.dim) {
            let from_edge = (i as f64).min((self.extent - 1 - i) as f64);
            if from_edge < pad {
                let depth = (pad - from_edge) / pad;
                rate = rate.max(depth * depth);
            }
        }
        rate / self.spacing
    }
}

/// Precomputed `+1`/`-1` neighbours along each axis; `None` past an absorbing edge.
#[derive(Clone, Debug)]
pub(crate) struct Neighbors {
    pub plus: Vec<Vec<Option<usize>>>,
    pub minus: Vec<Vec<Option<usize>>>,
}

impl Neighbors {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.site_count();
        let table = |off| {
            (0..grid.dim())
                .map(|axis| (0..n).map(|s| grid.neighbor(s, axis, off)).collect())
                .collect()
        };
        Self { plus: table(1), minus: table(-1) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    SiteSet(Vec<usize>),
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    /// Single-axis ball, for one-dimensional grids.
    pub fn interval(center: f64, radius: f64) -> Self {
        Region::Ball { center: vec![center], radius }
    }

    pub fn site_set(mut sites: Vec<usize>) -> Result<Self> {
        let n = sites.len();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() != n {
            return Err(Error::config("site set contains duplicate sites"));
        }
        Ok(Region::SiteSet(sites))
    }

    pub fn all(grid: &GridSpec) -> Self {
        Region::SiteSet((0..grid.site_count()).collect())
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        match self {
            Region::Ball { center, radius } => {
                if center.len() != grid.dim() {
                    return Err(Error::config(format!(
                        "ball center has {} coordinates on a {}-d grid",
                        center.len(),
                        grid.dim()
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::config(format!("ball radius must be positive, got {radius}")));
                }
                let hi = (grid.extent() - 1) as f64 * grid.spacing();
                for &c in center {
                    if c - radius < 0.0 || c + radius > hi {
                        return Err(Error::config(format!(
                            "ball (center {c}, radius {radius}) exceeds the grid [0, {hi}]"
                        )));
                    }
                }
                Ok(())
            }
            Region::SiteSet(sites) => {
                let n = grid.site_count();
                if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
                    return Err(Error::config(format!("site {bad} outside grid of {n} sites")));
                }
                let mut sorted = sites.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != sites.len() {
                    return Err(Error::config("site set contains duplicate sites"));
                }
                Ok(())
            }
        }
    }

    /// Sites of the region in ascending order.
    pub fn sites(&self, grid: &GridSpec) -> Result<Vec<usize>> {
        Ok(region_mask(grid, self)?
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect())
    }
}

/// Membership indicator per site. Balls use the closed inequality `|x - c| <= r`.
pub fn region_mask(grid: &GridSpec, region: &Region) -> Result<Vec<bool>> {
    region.validate(grid)?;
    Ok(match region {
        Region::Ball { center, radius } => ball_mask(grid, center, *radius),
        Region::SiteSet(sites) => {
            let mut mask = vec![false; grid.site_count()];
            for &s in sites {
                mask[s] = true;
            }
            mask
        }
    })
}

/// Ball membership without the fits-in-grid check. Non-positive radii give an
/// empty mask. Distances are minimum-image on periodic grids.
pub fn ball_mask(grid: &GridSpec, center: &[f64], radius: f64) -> Vec<bool> {
    let mut c = [0.0; 3];
    c[..center.len().min(3)].copy_from_slice(&center[..center.len().min(3)]);
    (0..grid.site_count())
        .map(|s| radius >= 0.0 && grid.distance(grid.coords(s), c) <= radius)
        .collect()
}

/// Sites within physical distance `radius` of any site flagged in `support`.
pub fn dilate_physical(grid: &GridSpec, support: &[bool], radius: f64) -> Vec<bool> {
    let pts: Vec<[f64; 3]> = support
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then(|| grid.coords(i)))
        .collect();
    (0..grid.site_count())
        .map(|s| {
            let x = grid.coords(s);
            pts.iter().any(|&p| grid.distance(x, p) <= radius)
        })
        .collect()
}

/// Box dilation by `steps` sites along every axis: the reach of a stencil of
/// radius one applied `steps` times.
pub fn dilate_sites(grid: &GridSpec, mask: &[bool], steps: usize) -> Vec<bool> {
    let mut cur = mask.to_vec();
    for axis in 0..grid.dim() {
        let mut next = cur.clone();
        for s in 0..grid.site_count() {
            if !cur[s] {
                continue;
            }
            for off in 1..=steps as isize {
                for o in [off, -off] {
                    if let Some(n) = grid.neighbor(s, axis, o) {
                        next[n] = true;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeDirection {
    Contracting,
    Expanding,
}

/// Spatial slice at time `elapsed` of the light cone over a ball.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeSlice {
    center: Vec<f64>,
    base_radius: f64,
    elapsed: f64,
    direction: ConeDirection,
    speed: f64,
}

impl ConeSlice {
    pub fn radius(&self) -> f64 {
        match self.direction {
            ConeDirection::Contracting => self.base_radius - self.speed * self.elapsed,
            ConeDirection::Expanding => self.base_radius + self.speed * self.elapsed,
        }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn direction(&self) -> ConeDirection {
        self.direction
    }

    pub fn region(&self) -> Region {
        Region::ball(self.center.clone(), self.radius())
    }

    /// Mask of the slice with its radius moved `guard` sites toward safety:
    /// inward for contracting slices, outward for expanding ones.
    pub fn guarded_mask(&self, grid: &GridSpec, guard: usize) -> Vec<bool> {
        let g = guard as f64 * grid.spacing();
        let r = match self.direction {
            ConeDirection::Contracting => self.radius() - g,
            ConeDirection::Expanding => self.radius() + g,
        };
        ball_mask(grid, &self.center, r)
    }
}

pub fn cone_slice(base: &Region, t: f64, speed: f64, direction: ConeDirection) -> Result<ConeSlice> {
    let Region::Ball { center, radius } = base else {
        return Err(Error::config("light-cone slices need a ball as their base"));
    };
    if !(t >= 0.0) {
        return Err(Error::config(format!("elapsed time must be >= 0, got {t}")));
    }
    if !(speed > 0.0) {
        return Err(Error::config(format!("cone speed must be positive, got {speed}")));
    }
    let slice = ConeSlice {
        center: center.clone(),
        base_radius: *radius,
        elapsed: t,
        direction,
        speed,
    };
    if direction == ConeDirection::Contracting && slice.radius() <= 0.0 {
        return Err(Error::ConeVanished { radius: slice.radius(), t });
    }
    Ok(slice)
}

/// Scalars a [`Field`] can hold.
pub trait Sample: Copy + Default + Send + Sync + std::fmt::Debug {
    fn is_finite_sample(&self) -> bool;
    fn norm_sqr_sample(&self) -> f64;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
    fn norm_sqr_sample(&self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn norm_sqr_sample(&self) -> f64 {
        self.norm_sqr()
    }
}

/// Component-major samples: component `c` of site `s` lives at `c * sites + s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: GridSpec,
    components: usize,
    values: Vec<T>,
}

impl<T: Sample> Field<T> {
    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Self {
            grid,
            components,
            values: vec![T::default(); grid.site_count() * components],
        }
    }

    pub fn from_values(grid: GridSpec, components: usize, values: Vec<T>) -> Result<Self> {
        if components == 0 {
            return Err(Error::shape("a field needs at least one component"));
        }
        if values.len() != grid.site_count() * components {
            return Err(Error::shape(format!(
                "expected {} values, got {}",
                grid.site_count() * components,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite_sample()) {
            return Err(Error::InvalidState("field contains NaN or Inf".into()));
        }
        Ok(Self { grid, components, values })
    }

    /// Builds a field from `f(component, site)`.
    pub fn from_fn(grid: GridSpec, components: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = grid.site_count();
        let values = (0..components * n).map(|i| f(i / n, i % n)).collect();
        Self { grid, components, values }
    }

    pub fn scalar_from_fn(grid: GridSpec, mut f: impl FnMut([f64; 3]) -> T) -> Self {
        Self::from_fn(grid, 1, |_, s| f(grid.coords(s)))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn component(&self, c: usize) -> &[T] {
        let n = self.grid.site_count();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.grid.site_count();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, site: usize) -> T {
        self.values[c * self.grid.site_count() + site]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite_sample())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.grid == other.grid && self.components == other.components
    }

    /// Per-site `sum_c |value|^2`.
    pub fn site_norm_sqr(&self) -> Vec<f64> {
        let n = self.grid.site_count();
        let mut out = vec![0.0; n];
        for c in 0..self.components {
            for (o, v) in out.iter_mut().zip(self.component(c)) {
                *o += v.norm_sqr_sample();
            }
        }
        out
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl Field<f64> {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Compactly supported polynomial bump `(1 - (r/w)^2)^power` on `|r| < w`.
/// `power` = 3 gives a C² profile; larger powers are smoother.
pub fn poly_bump(r: f64, half_width: f64, power: i32) -> f64 {
    let q = r / half_width;
    if q.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - q * q).powi(power)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Each site carries the weight of the cell it centres.
    #[default]
    Midpoint,
}

/// `sum over masked sites of f * spacing^dim` for a one-component real field.
pub fn discrete_integral(f: &Field<f64>, region: &Region, _weight: Quadrature) -> Result<f64> {
    if f.components() != 1 {
        return Err(Error::shape(format!(
            "discrete_integral needs a one-component field, got {}",
            f.components()
        )));
    }
    let mask = region_mask(f.grid(), region)?;
    Ok(masked_sum(f.component(0), &mask) * f.grid().cell_volume())
}

/// `sum over masked entries` without any volume weight.
pub fn masked_sum(values: &[f64], mask: &[bool]) -> f64 {
    values.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v).sum()
}

pub fn masked_max(values: &[f64], mask: &[bool]) -> f64 {
    values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold(0.0, |acc, (v, _)| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid8() -> GridSpec {
        GridSpec::periodic_1d(8, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::periodic_1d(3, 1.0).is_err());
        assert!(GridSpec::periodic_1d(8, 0.0).is_err());
        assert!(GridSpec::new(2, 8, 1.0, Boundary::Periodic).is_err());
        let g = GridSpec::new(3, 5, 0.5, Boundary::Periodic).unwrap();
        assert_eq!(g.site_count(), 125);
        assert_eq!(g.site_of(g.axes_of(77)), 77);
    }

    #[test]
    fn ball_mask_by_hand() {
        let mask = region_mask(&grid8(), &Region::interval(3.5, 1.6)).unwrap();
        let sites: Vec<usize> = (0..8).filter(|&i| mask[i]).collect();
        assert_eq!(sites, vec![2, 3, 4, 5]);
    }

    #[test]
    fn half_domain_ball_flags_half_the_sites() {
        let g = GridSpec::periodic_1d(64, 0.5).unwrap();
        let l = g.length();
        let mask = region_mask(&g, &Region::interval(l / 2.0, 0.25 * l)).unwrap();
        let k = mask.iter().filter(|&&m| m).count();
        assert!((k as i64 - 32).abs() <= 1, "{k}");
    }

    #[test]
    fn empty_site_set_is_all_false() {
        let mask = region_mask(&grid8(), &Region::site_set(vec![]).unwrap()).unwrap();
        assert!(mask.iter().all(|&m| !m));
    }

    #[test]
    fn region_errors() {
        let g = grid8();
        assert!(region_mask(&g, &Region::interval(1.0, 2.0)).is_err());
        assert!(region_mask(&g, &Region::interval(4.0, 0.0)).is_err());
        assert!(Region::site_set(vec![1, 1]).is_err());
        assert!(region_mask(&g, &Region::SiteSet(vec![9])).is_err());
        assert!(region_mask(&g, &Region::ball(vec![1.0, 1.0], 0.5)).is_err());
    }

    #[test]
    fn cone_slices() {
        let base = Region::interval(4.0, 2.0);
        for dir in [ConeDirection::Contracting, ConeDirection::Expanding] {
            assert_eq!(cone_slice(&base, 0.0, 1.0, dir).unwrap().radius(), 2.0);
        }
        assert_eq!(cone_slice(&base, 1.0, 1.0, ConeDirection::Contracting).unwrap().radius(), 1.0);
        assert!(matches!(
            cone_slice(&base, 2.5, 1.0, ConeDirection::Contracting),
            Err(Error::ConeVanished { .. })
        ));
        let set = Region::site_set(vec![1]).unwrap();
        assert!(cone_slice(&set, 0.0, 1.0, ConeDirection::Expanding).is_err());
    }

    #[test]
    fn integrals() {
        let g = GridSpec::periodic_1d(1000, 1e-3).unwrap();
        let zero = Field::<f64>::zeros(g, 1);
        assert_eq!(discrete_integral(&zero, &Region::all(&g), Quadrature::Midpoint).unwrap(), 0.0);

        // x^2 sampled at cell midpoints on [0, 1)
        let f = Field::from_fn(g, 1, |_, s| ((s as f64 + 0.5) * 1e-3).powi(2));
        let v = discrete_integral(&f, &Region::all(&g), Quadrature::Midpoint).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-4, "{v}");

        let g = grid8();
        let ones = Field::from_fn(g, 1, |_, _| 1.0);
        let v = discrete_integral(&ones, &Region::interval(3.5, 1.6), Quadrature::Midpoint).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn dilation() {
        let g = GridSpec::periodic_1d(10, 1.0).unwrap();
        let mut m = vec![false; 10];
        m[0] = true;
        let d = dilate_sites(&g, &m, 2);
        let on: Vec<usize> = (0..10).filter(|&i| d[i]).collect();
        assert_eq!(on, vec![0, 1, 2, 8, 9]);
        let p = dilate_physical(&g, &m, 2.0);
        assert_eq!(p, d);
    }

    #[test]
    fn field_shape_checks() {
        let g = grid8();
        assert!(Field::from_values(g, 1, vec![0.0; 7]).is_err());
        assert!(Field::from_values(g, 1, vec![f64::NAN; 8]).is_err());
        assert!(Field::<f64>::from_values(g, 0, vec![]).is_err());
    }
}
