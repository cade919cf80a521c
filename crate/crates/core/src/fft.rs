//! Separable FFTs over [`GridSpec`] layouts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::lattice::GridSpec;

fn transform_axes(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.extent();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    if grid.dim() == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![Complex64::default(); n];
    for axis in 0..3 {
        let stride = n.pow(2 - axis as u32);
        for start in 0..grid.site_count() {
            if grid.axes_of(start)[axis] != 0 {
                continue;
            }
            for (i, l) in line.iter_mut().enumerate() {
                *l = data[start + i * stride];
            }
            fft.process(&mut line);
            for (i, l) in line.iter().enumerate() {
                data[start + i * stride] = *l;
            }
        }
    }
}

/// Unnormalised forward transform in place.
pub fn forward(grid: &GridSpec, data: &mut [Complex64]) {
    transform_axes(grid, data, false);
}

/// Inverse transform in place, normalised so that `inverse(forward(x)) == x`.
pub fn inverse(grid: &GridSpec, data: &mut [Complex64]) {
    transform_axes(grid, data, true);
    let scale = 1.0 / grid.site_count() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Angular wavenumber of FFT bin `j` along one axis.
pub fn axis_wavenumber(grid: &GridSpec, j: usize) -> f64 {
    let n = grid.extent();
    let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * PI * signed / grid.length()
}

/// Wave vector of every mode, in the same layout as the site data.
pub fn wavevectors(grid: &GridSpec) -> Vec<[f64; 3]> {
    (0..grid.site_count())
        .map(|s| {
            let a = grid.axes_of(s);
            let mut k = [0.0; 3];
            for (axis, kk) in k.iter_mut().enumerate().take(grid.dim()) {
                *kk = axis_wavenumber(grid, a[axis]);
            }
            k
        })
        .collect()
}
