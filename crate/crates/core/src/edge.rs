//! Smoothed image, edge detector `f = h(|∇I_σ|²)` and boundary indicator `g̃ = 1 − f`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::stencil::gradient;

/// `1/√(2π)`. Below this width the detector `h` goes negative at `b = 0`.
pub const SIGMA_MIN: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParams {
    /// Gaussian width, also the detector scale in `h`.
    pub sigma: f64,
    /// Kernel half-width in pixels.
    pub truncation_radius: usize,
}

impl EdgeParams {
    /// `sigma` with the default radius `ceil(3σ / spacing)`.
    pub fn with_sigma(sigma: f64, spacing: f64) -> Result<Self> {
        check_sigma(sigma)?;
        let params = EdgeParams { sigma, truncation_radius: default_radius(sigma, spacing) };
        params.validate(spacing)?;
        Ok(params)
    }

    pub fn validate(&self, spacing: f64) -> Result<()> {
        check_sigma(self.sigma)?;
        let min_radius = default_radius(self.sigma, spacing);
        if self.truncation_radius < min_radius.max(1) {
            return Err(invalid(
                "edge.truncation_radius",
                format!("must be >= ceil(3*sigma/spacing) = {}, got {}", min_radius.max(1), self.truncation_radius),
            ));
        }
        Ok(())
    }
}

pub fn default_radius(sigma: f64, spacing: f64) -> usize {
    libm::ceil(3.0 * sigma / spacing).max(1.0) as usize
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || sigma < SIGMA_MIN {
        return Err(invalid(
            "edge.sigma",
            format!("sigma = {sigma} is below 1/sqrt(2*pi) = {SIGMA_MIN:.5}; hypothesis H1 (f >= 0) would fail"),
        ));
    }
    Ok(())
}

/// Detector output and the quantities the GVF and level-set equations read from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMaps {
    /// `f = h(|∇I_σ|²)`, in `[1 − 1/(√(2π)σ), 1]`.
    pub f: ScalarField,
    /// `g̃ = 1 − f`, the multiplier of the level-set speed.
    pub g_tilde: ScalarField,
    /// `∇f`, central differences.
    pub grad_f: VectorField,
    /// `f |∇f|²`, the reaction coefficient of the GVF equations.
    pub coeff: ScalarField,
}

/// Normalized 1D kernel `k(n) ∝ exp(−n² h² / (2σ²))` for `|n| <= radius`.
pub fn gaussian_kernel(sigma: f64, spacing: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|n| {
            let x = n as f64 * spacing;
            libm::exp(-x * x / (2.0 * sigma * sigma))
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Half-sample symmetric reflection: `−1 → 0`, `−2 → 1`, `n → n − 1`, repeated as needed.
#[inline]
fn reflect(mut idx: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if idx < 0 {
            idx = -idx - 1;
        } else if idx >= n {
            idx = 2 * n - idx - 1;
        } else {
            return idx as usize;
        }
    }
}

/// Separable convolution with the truncated, renormalized Gaussian and mirror extension.
pub fn gaussian_smooth(image: &ScalarField, params: &EdgeParams) -> Result<ScalarField> {
    let grid = *image.grid();
    params.validate(grid.spacing())?;
    let kernel = gaussian_kernel(params.sigma, grid.spacing(), params.truncation_radius);
    let r = params.truncation_radius as isize;
    let (w, h) = (grid.width(), grid.height());
    let src = image.values();

    let mut tmp = vec![0.0; grid.len()];
    for j in 0..h {
        let row = &src[j * w..(j + 1) * w];
        for i in 0..w {
            let mut acc = 0.0;
            for (t, &k) in kernel.iter().enumerate() {
                acc += k * row[reflect(i as isize + t as isize - r, w)];
            }
            tmp[j * w + i] = acc;
        }
    }
    let mut out = vec![0.0; grid.len()];
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (t, &k) in kernel.iter().enumerate() {
                acc += k * tmp[reflect(j as isize + t as isize - r, h) * w + i];
            }
            out[j * w + i] = acc;
        }
    }
    Ok(ScalarField::from_raw(grid, out))
}

fn check_b(b: f64) -> Result<()> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(invalid("b", format!("detector argument must be finite and >= 0, got {b}")));
    }
    Ok(())
}

#[inline]
fn g_unchecked(b: f64, sigma: f64) -> f64 {
    libm::exp(-b / (2.0 * sigma * sigma)) * (SIGMA_MIN / sigma)
}

/// `h(b) = 1 − exp(−b / (2σ²)) / (√(2π) σ)`.
pub fn detector_h(b: f64, sigma: f64) -> Result<f64> {
    check_b(b)?;
    check_sigma(sigma)?;
    Ok(1.0 - g_unchecked(b, sigma))
}

/// `g(b) = exp(−b / (2σ²)) / (√(2π) σ) = 1 − h(b)`.
pub fn boundary_indicator(b: f64, sigma: f64) -> Result<f64> {
    check_b(b)?;
    check_sigma(sigma)?;
    Ok(g_unchecked(b, sigma))
}

/// Smooth, differentiate, apply `h`, then derive `g̃`, `∇f` and `f|∇f|²`.
pub fn build_edge_maps(image: &ScalarField, params: &EdgeParams) -> Result<EdgeMaps> {
    let grid = *image.grid();
    let smoothed = gaussian_smooth(image, params)?;
    let grad = gradient(&smoothed);
    let f_values: Vec<f64> = grad
        .u
        .values()
        .iter()
        .zip(grad.v.values())
        .map(|(&gx, &gy)| 1.0 - g_unchecked(gx * gx + gy * gy, params.sigma))
        .collect();
    let f = ScalarField::from_raw(grid, f_values);
    let g_tilde = f.map(|v| 1.0 - v);
    let grad_f = gradient(&f);
    let coeff_values = f
        .values()
        .iter()
        .zip(grad_f.u.values().iter().zip(grad_f.v.values()))
        .map(|(&fv, (&fx, &fy))| fv * (fx * fx + fy * fy))
        .collect();
    let coeff = ScalarField::from_raw(grid, coeff_values);
    if !coeff.all_finite() {
        return Err(Error::NonFinite { what: "edge maps" });
    }
    Ok(EdgeMaps { f, g_tilde, grad_f, coeff })
}

/// Largest difference quotient `|√g̃(x) − √g̃(y)| / |x − y|` over 4-neighbour pixel pairs.
///
/// This is an empirical sample of the Lipschitz constant of `√g̃`; it is finite for any
/// finite field and is reported, not compared against a bound.
pub fn sqrt_g_lipschitz(maps: &EdgeMaps) -> f64 {
    let g = &maps.g_tilde;
    let grid = g.grid();
    let h = grid.spacing();
    let sq = |i, j| libm::sqrt(g.get(i, j).max(0.0));
    let mut best: f64 = 0.0;
    for j in 0..grid.height() {
        for i in 0..grid.width() {
            let c = sq(i, j);
            if i + 1 < grid.width() {
                best = best.max((sq(i + 1, j) - c).abs() / h);
            }
            if j + 1 < grid.height() {
                best = best.max((sq(i, j + 1) - c).abs() / h);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn disk(n: usize, radius: f64) -> ScalarField {
        let c = (n as f64 - 1.0) / 2.0;
        ScalarField::from_fn(GridSpec::new(n, n, 1.0).unwrap(), |i, j| {
            let (x, y) = (i as f64 - c, j as f64 - c);
            if x * x + y * y < radius * radius {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn sigma_lower_bound_is_enforced() {
        assert!(EdgeParams::with_sigma(0.39, 1.0).is_err());
        assert!(EdgeParams::with_sigma(SIGMA_MIN, 1.0).is_ok());
        let err = EdgeParams::with_sigma(0.1, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { key: "edge.sigma", .. }));
    }

    #[test]
    fn radius_must_cover_three_sigma() {
        let p = EdgeParams { sigma: 1.0, truncation_radius: 2 };
        assert!(p.validate(1.0).is_err());
        let p = EdgeParams { sigma: 1.0, truncation_radius: 3 };
        assert!(p.validate(1.0).is_ok());
        assert_eq!(EdgeParams::with_sigma(1.0, 0.5).unwrap().truncation_radius, 6);
    }

    #[test]
    fn detector_values() {
        let h0 = detector_h(0.0, 1.0).unwrap();
        assert!((h0 - 0.601_058).abs() < 1e-6);
        assert!((h0 - (1.0 - SIGMA_MIN)).abs() < 1e-15);
        assert!((detector_h(1e6, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(detector_h(-1e-9, 1.0).is_err());
        for k in 0..200 {
            let b = k as f64 * 0.05;
            let s = 0.4 + k as f64 * 0.01;
            let sum = detector_h(b, s).unwrap() + boundary_indicator(b, s).unwrap();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn detector_is_monotone() {
        let mut prev = detector_h(0.0, 0.7).unwrap();
        for k in 1..500 {
            let cur = detector_h(k as f64 * 0.01, 0.7).unwrap();
            assert!(cur >= prev);
            prev = cur;
        }
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(1.3, 1.0, 4);
        assert_eq!(k.len(), 9);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for t in 0..4 {
            assert_eq!(k[t], k[8 - t]);
        }
    }

    #[test]
    fn smoothing_preserves_constants() {
        let g = GridSpec::new(9, 7, 1.0).unwrap();
        let img = ScalarField::filled(g, 0.37);
        let s = gaussian_smooth(&img, &EdgeParams::with_sigma(2.0, 1.0).unwrap()).unwrap();
        assert!(s.values().iter().all(|&v| (v - 0.37).abs() < 1e-15));
    }

    #[test]
    fn smoothing_impulse_matches_direct_2d_convolution() {
        // Oracle: direct 2D convolution with the outer product of the raw Gaussian,
        // normalized by its total mass.
        let n = 21;
        let g = GridSpec::new(n, n, 1.0).unwrap();
        let mut img = ScalarField::zeros(g);
        img.set(10, 10, 1.0);
        let params = EdgeParams { sigma: 1.0, truncation_radius: 4 };
        let s = gaussian_smooth(&img, &params).unwrap();
        let mut mass = 0.0;
        for a in -4i32..=4 {
            for b in -4i32..=4 {
                mass += (-((a * a + b * b) as f64) / 2.0).exp();
            }
        }
        for j in 0..n {
            for i in 0..n {
                let (a, b) = (i as i32 - 10, j as i32 - 10);
                let expected =
                    if a.abs() <= 4 && b.abs() <= 4 { (-((a * a + b * b) as f64) / 2.0).exp() / mass } else { 0.0 };
                assert!((s.get(i, j) - expected).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn smoothing_commutes_with_horizontal_mirror() {
        let g = GridSpec::new(11, 6, 1.0).unwrap();
        let img = ScalarField::from_fn(g, |i, j| ((i * 7 + j * 3) % 5) as f64 / 4.0);
        let mirrored = ScalarField::from_fn(g, |i, j| img.get(10 - i, j));
        let p = EdgeParams::with_sigma(1.5, 1.0).unwrap();
        let a = gaussian_smooth(&mirrored, &p).unwrap();
        let b = gaussian_smooth(&img, &p).unwrap();
        for j in 0..6 {
            for i in 0..11 {
                assert!((a.get(i, j) - b.get(10 - i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smoothing_handles_kernels_wider_than_the_grid() {
        let g = GridSpec::new(3, 3, 1.0).unwrap();
        let img = ScalarField::from_fn(g, |i, j| (i + j) as f64);
        let s = gaussian_smooth(&img, &EdgeParams::with_sigma(3.0, 1.0).unwrap()).unwrap();
        assert!(s.all_finite());
    }

    #[test]
    fn constant_image_maps() {
        let g = GridSpec::new(12, 10, 1.0).unwrap();
        let maps = build_edge_maps(&ScalarField::filled(g, 0.8), &EdgeParams::with_sigma(1.0, 1.0).unwrap()).unwrap();
        let f0 = 1.0 - SIGMA_MIN;
        assert!(maps.f.values().iter().all(|&v| (v - f0).abs() < 1e-15));
        assert!(maps.coeff.values().iter().all(|&v| v == 0.0));
        assert_eq!(maps.grad_f.max_abs_component(), 0.0);
    }

    #[test]
    fn disk_edge_maps_peak_on_rim() {
        let n = 64;
        let r = 20.0;
        let sigma = 1.0;
        let maps = build_edge_maps(&disk(n, r), &EdgeParams::with_sigma(sigma, 1.0).unwrap()).unwrap();
        let f_min = 1.0 - SIGMA_MIN / sigma;
        // Range and complement identities.
        for (&f, &g) in maps.f.values().iter().zip(maps.g_tilde.values()) {
            assert!(f >= f_min - 1e-15 && f <= 1.0);
            assert!(g >= 0.0 && g <= SIGMA_MIN / sigma + 1e-15);
            assert!((f + g - 1.0).abs() < 1e-15);
        }
        assert!(maps.coeff.values().iter().all(|&c| c >= 0.0));

        // Radial profile along the centre row: the maximum sits within a pixel of the rim,
        // and far from it f is at its floor.
        let c = (n as f64 - 1.0) / 2.0;
        let row = n / 2;
        let (imax, _) =
            (0..n).map(|i| (i, maps.f.get(i, row))).fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        let dist = ((imax as f64 - c).abs() - r).abs();
        assert!(dist <= 1.0, "f peaks {dist} pixels from the rim");
        assert!((maps.f.get(n / 2, row) - f_min).abs() < 1e-12);
        assert!((maps.f.get(1, 1) - f_min).abs() < 1e-12);

        // argmax f = argmin g̃.
        let argmax_f =
            maps.f.values().iter().enumerate().fold((0, f64::MIN), |a, (k, &v)| if v > a.1 { (k, v) } else { a }).0;
        let argmin_g = maps
            .g_tilde
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |a, (k, &v)| if v < a.1 { (k, v) } else { a })
            .0;
        assert_eq!(argmax_f, argmin_g);

        let k = sqrt_g_lipschitz(&maps);
        assert!(k.is_finite() && k > 0.0);
    }
}
