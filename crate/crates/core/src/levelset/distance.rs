use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::stencil::central_second_order;

/// `Φ(x) = |x − center| − radius` in physical coordinates.
pub fn signed_distance_circle(grid: GridSpec, center: (f64, f64), radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", "must be > 0"));
    }
    if !center.0.is_finite() || !center.1.is_finite() {
        return Err(Error::NonFinite { what: "circle center" });
    }
    Ok(ScalarField::from_fn(grid, |i, j| {
        let (x, y) = grid.position(i, j);
        libm::hypot(x - center.0, y - center.1) - radius
    }))
}

/// Lower envelope of parabolas `(q − p)² + f(p)` over the sites with finite `f`.
/// Writes squared distances and the feature carried by the winning site.
fn envelope_1d(
    f: &[f64],
    feat_in: &[usize],
    d: &mut [f64],
    feat_out: &mut [usize],
    v: &mut Vec<usize>,
    z: &mut Vec<f64>,
) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            let Some(&p) = v.last() else {
                v.push(q);
                z.push(f64::NEG_INFINITY);
                break;
            };
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    if v.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        feat_out.iter_mut().for_each(|x| *x = usize::MAX);
        return;
    }
    let mut k = 0;
    for q in 0..n {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
        feat_out[q] = feat_in[p];
    }
}

/// Exact squared Euclidean distance (in pixels) from every pixel to the nearest seed, and the
/// flat index of that seed. Pixels have `INFINITY` and `usize::MAX` when there is no seed.
pub(crate) fn edt_with_features(width: usize, height: usize, seeds: &[bool]) -> (Vec<f64>, Vec<usize>) {
    let mut d = vec![f64::INFINITY; width * height];
    let mut feat = vec![usize::MAX; width * height];
    for (k, &s) in seeds.iter().enumerate() {
        if s {
            d[k] = 0.0;
            feat[k] = k;
        }
    }
    let (mut v, mut z) = (Vec::new(), Vec::new());

    let mut col_f = vec![0.0; height];
    let mut col_feat = vec![0; height];
    let mut col_d = vec![0.0; height];
    let mut col_out = vec![0; height];
    for i in 0..width {
        for j in 0..height {
            col_f[j] = d[j * width + i];
            col_feat[j] = feat[j * width + i];
        }
        envelope_1d(&col_f, &col_feat, &mut col_d, &mut col_out, &mut v, &mut z);
        for j in 0..height {
            d[j * width + i] = col_d[j];
            feat[j * width + i] = col_out[j];
        }
    }

    let mut row_d = vec![0.0; width];
    let mut row_out = vec![0; width];
    for j in 0..height {
        let r = j * width..(j + 1) * width;
        envelope_1d(&d[r.clone()], &feat[r.clone()], &mut row_d, &mut row_out, &mut v, &mut z);
        d[r.clone()].copy_from_slice(&row_d);
        feat[r].copy_from_slice(&row_out);
    }
    (d, feat)
}

/// Signed distance of a binary mask (`1` inside, `0` outside).
///
/// The interface is placed on pixel boundaries: an outside pixel at center distance `d` from
/// the nearest inside pixel gets `d − h/2`, and an inside pixel gets `−(d − h/2)` with `d`
/// measured to the nearest outside pixel. Negating the mask negates the result exactly.
pub fn signed_distance_from_mask(mask: &ScalarField) -> Result<ScalarField> {
    let grid = *mask.grid();
    if mask.values().iter().any(|&m| m != 0.0 && m != 1.0) {
        return Err(invalid("mask", "values must be 0 (outside) or 1 (inside)"));
    }
    let inside: Vec<bool> = mask.values().iter().map(|&m| m == 1.0).collect();
    if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
        return Err(Error::NoInterface);
    }
    let outside: Vec<bool> = inside.iter().map(|&b| !b).collect();
    let (to_inside, _) = edt_with_features(grid.width(), grid.height(), &inside);
    let (to_outside, _) = edt_with_features(grid.width(), grid.height(), &outside);
    let h = grid.spacing();
    let values = inside
        .iter()
        .zip(to_inside.iter().zip(&to_outside))
        .map(|(&ins, (&di, &dout))| if ins { -(libm::sqrt(dout) - 0.5) * h } else { (libm::sqrt(di) - 0.5) * h })
        .collect();
    Ok(ScalarField::from_raw(grid, values))
}

/// Pixels with a 4-neighbour of the opposite sign (`Φ < 0` versus `Φ >= 0`).
pub(crate) fn interface_pixels(phi: &ScalarField) -> Vec<bool> {
    let grid = phi.grid();
    let (w, h) = (grid.width(), grid.height());
    let f = phi.values();
    let mut near = vec![false; w * h];
    for j in 0..h {
        for i in 0..w {
            let s = f[j * w + i] < 0.0;
            let differs = |k: usize| (f[k] < 0.0) != s;
            near[j * w + i] = (i > 0 && differs(j * w + i - 1))
                || (i + 1 < w && differs(j * w + i + 1))
                || (j > 0 && differs((j - 1) * w + i))
                || (j + 1 < h && differs((j + 1) * w + i));
        }
    }
    near
}

/// First-order local model of the interface seen from one pixel next to it: the projected
/// foot point, the unit normal and the curvature there.
#[derive(Clone, Copy)]
struct LocalInterface {
    foot: (f64, f64),
    normal: (f64, f64),
    kappa: f64,
}

impl LocalInterface {
    /// Distance from `q` to the osculating circle (or line when `κ = 0`) through the foot.
    fn distance(&self, q: (f64, f64)) -> f64 {
        let r = (q.0 - self.foot.0, q.1 - self.foot.1);
        let a = r.0 * self.normal.0 + r.1 * self.normal.1;
        let b = -r.0 * self.normal.1 + r.1 * self.normal.0;
        let k = self.kappa;
        if k * a + 1.0 > 0.25 {
            // |x − c| − 1/|κ| for the circle of radius 1/κ centred on the concave side,
            // rearranged to stay accurate as κ → 0.
            let den = libm::hypot(k * a + 1.0, k * b) + 1.0;
            ((k * (a * a + b * b) + 2.0 * a) / den).abs()
        } else {
            libm::hypot(r.0, r.1)
        }
    }
}

/// Rebuild `Φ` as a signed distance to its own zero level set.
///
/// Every pixel adjacent to the interface contributes a local model of the curve: its foot
/// point `x − Φ∇Φ/|∇Φ|²` and the osculating circle there. Each pixel takes the smallest
/// distance to the models of the interface pixels in the 3×3 block around its nearest
/// interface pixel. The sign is kept from `Φ`.
pub fn reinitialize(phi: &ScalarField) -> Result<ScalarField> {
    if !phi.has_sign_change() {
        return Err(Error::NoInterface);
    }
    let grid = *phi.grid();
    let (w, h) = (grid.width(), grid.height());
    let near = interface_pixels(phi);
    let eps = 1e-6 * grid.spacing();

    let mut models: Vec<Option<LocalInterface>> = vec![None; w * h];
    for j in 0..h {
        for i in 0..w {
            if !near[j * w + i] {
                continue;
            }
            let d = central_second_order(phi, i, j);
            let g2 = d.fx * d.fx + d.fy * d.fy;
            let pos = grid.position(i, j);
            let value = phi.get(i, j);
            let model = if g2 > 1e-24 {
                let g = libm::sqrt(g2);
                let den = g2 + eps * eps;
                let kappa =
                    (d.fxx * d.fy * d.fy - 2.0 * d.fx * d.fy * d.fxy + d.fyy * d.fx * d.fx) / (den * libm::sqrt(den));
                LocalInterface {
                    foot: (pos.0 - value * d.fx / g2, pos.1 - value * d.fy / g2),
                    normal: (d.fx / g, d.fy / g),
                    kappa,
                }
            } else {
                LocalInterface { foot: pos, normal: (1.0, 0.0), kappa: 0.0 }
            };
            models[j * w + i] = Some(model);
        }
    }

    let (_, nearest) = edt_with_features(w, h, &near);
    let mut out = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            let q = grid.position(i, j);
            let k = nearest[j * w + i];
            let (ci, cj) = ((k % w) as isize, (k / w) as isize);
            let mut best = f64::INFINITY;
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (ni, nj) = (ci + di, cj + dj);
                    if ni < 0 || nj < 0 || ni >= w as isize || nj >= h as isize {
                        continue;
                    }
                    if let Some(m) = models[nj as usize * w + ni as usize] {
                        best = best.min(m.distance(q));
                    }
                }
            }
            out.push(if phi.get(i, j) < 0.0 { -best } else { best });
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "reinitialized level set" });
    }
    Ok(ScalarField::from_raw(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::contour::{extract_zero_level, hausdorff_distance};
    use crate::stencil::gradient;
    use proptest::prelude::*;

    #[allow(clippy::needless_range_loop)]
    fn brute_force(w: usize, h: usize, seeds: &[bool]) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; w * h];
        for a in 0..w * h {
            for b in 0..w * h {
                if seeds[b] {
                    let dx = (a % w) as f64 - (b % w) as f64;
                    let dy = (a / w) as f64 - (b / w) as f64;
                    out[a] = out[a].min(dx * dx + dy * dy);
                }
            }
        }
        out
    }

    #[test]
    fn circle_examples() {
        let g = GridSpec::new(41, 41, 0.5).unwrap();
        let phi = signed_distance_circle(g, (10.0, 10.0), 4.0).unwrap();
        assert_eq!(phi.get(20, 20), -4.0);
        assert_eq!(phi.get(36, 20), 4.0);
        assert!(signed_distance_circle(g, (0.0, 0.0), 0.0).is_err());

        let g = GridSpec::new(101, 101, 1.0).unwrap();
        let r = 30.0;
        let phi = signed_distance_circle(g, (50.0, 50.0), r).unwrap();
        let grad = gradient(&phi).magnitude();
        for j in 1..100 {
            for i in 1..100 {
                let d = libm::hypot(i as f64 - 50.0, j as f64 - 50.0);
                if d >= 5.0 {
                    assert!((grad.get(i, j) - 1.0).abs() <= 1.0 / (d * d), "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn single_inside_pixel() {
        let g = GridSpec::new(9, 7, 2.0).unwrap();
        let mut mask = ScalarField::zeros(g);
        mask.set(3, 4, 1.0);
        let phi = signed_distance_from_mask(&mask).unwrap();
        for j in 0..7 {
            for i in 0..9 {
                let d = libm::hypot(i as f64 - 3.0, j as f64 - 4.0) * 2.0;
                let expected = if (i, j) == (3, 4) { -1.0 } else { d - 1.0 };
                assert!((phi.get(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disk_mask_profile_is_linear() {
        let g = GridSpec::new(41, 41, 1.0).unwrap();
        let mask = ScalarField::from_fn(g, |i, j| {
            let (x, y) = (i as f64 - 20.0, j as f64 - 20.0);
            if x * x + y * y < 100.0 {
                1.0
            } else {
                0.0
            }
        });
        let phi = signed_distance_from_mask(&mask).unwrap();
        // Along the central row, inside and outside the rim, consecutive values differ by h.
        for i in 11..20 {
            assert!((phi.get(i, 20) - phi.get(i + 1, 20) - 1.0).abs() < 1e-12);
        }
        for i in 30..40 {
            assert!((phi.get(i + 1, 20) - phi.get(i, 20) - 1.0).abs() < 1e-12);
        }
        assert_eq!(phi.get(10, 20), 0.5);
        assert_eq!(phi.get(11, 20), -0.5);
    }

    #[test]
    fn mask_errors() {
        let g = GridSpec::new(4, 4, 1.0).unwrap();
        assert_eq!(signed_distance_from_mask(&ScalarField::zeros(g)), Err(Error::NoInterface));
        assert_eq!(signed_distance_from_mask(&ScalarField::filled(g, 1.0)), Err(Error::NoInterface));
        assert!(matches!(
            signed_distance_from_mask(&ScalarField::filled(g, 0.5)),
            Err(Error::InvalidParameter { key: "mask", .. })
        ));
    }

    proptest! {
        #[test]
        fn edt_matches_brute_force(
            w in 3usize..14, h in 3usize..14,
            bits in proptest::collection::vec(0u8..6, 196),
        ) {
            let seeds: Vec<bool> = bits[..w * h].iter().map(|&b| b == 0).collect();
            let (d, feat) = edt_with_features(w, h, &seeds);
            let oracle = brute_force(w, h, &seeds);
            for k in 0..w * h {
                prop_assert_eq!(d[k], oracle[k]);
                if d[k].is_finite() {
                    let f = feat[k];
                    prop_assert!(seeds[f]);
                    let dx = (k % w) as f64 - (f % w) as f64;
                    let dy = (k / w) as f64 - (f / w) as f64;
                    prop_assert_eq!(dx * dx + dy * dy, d[k]);
                }
            }
        }

        #[test]
        fn negated_mask_negates_phi(
            bits in proptest::collection::vec(0u8..2, 64),
        ) {
            let g = GridSpec::new(8, 8, 1.0).unwrap();
            let mask = ScalarField::new(g, bits.iter().map(|&b| b as f64).collect()).unwrap();
            prop_assume!(mask.values().contains(&1.0) && mask.values().contains(&0.0));
            let neg = mask.map(|v| 1.0 - v);
            let a = signed_distance_from_mask(&mask).unwrap();
            let b = signed_distance_from_mask(&neg).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn reinit_preserves_exact_circle() {
        let g = GridSpec::new(64, 64, 1.0).unwrap();
        let phi = signed_distance_circle(g, (31.3, 32.1), 17.37).unwrap();
        let re = reinitialize(&phi).unwrap();
        let h = hausdorff_distance(&extract_zero_level(&phi), &extract_zero_level(&re), 0.01);
        assert!(h <= 0.5, "hausdorff {h}");
        assert!(h <= 0.01, "hausdorff {h}");
        // Close to the interface the values are reproduced; far away the osculating circles
        // of neighbouring pixels extrapolate less accurately.
        for (a, b) in phi.values().iter().zip(re.values()) {
            if a.abs() < 3.0 {
                assert!((a - b).abs() < 0.02);
            } else {
                assert!((a - b).abs() < 0.5);
            }
        }
    }

    #[test]
    fn reinit_restores_unit_gradient() {
        let g = GridSpec::new(64, 64, 1.0).unwrap();
        let phi = signed_distance_circle(g, (32.0, 31.5), 15.2).unwrap().map(|v| 3.0 * v);
        let re = reinitialize(&phi).unwrap();
        let grad = gradient(&re).magnitude();
        let base = signed_distance_circle(g, (32.0, 31.5), 15.2).unwrap();
        for j in 1..63 {
            for i in 1..63 {
                if base.get(i, j).abs() > 2.0 && libm::hypot(i as f64 - 32.0, j as f64 - 31.5) > 3.0 {
                    let m = grad.get(i, j);
                    assert!((0.8..=1.2).contains(&m), "({i},{j}) {m}");
                }
            }
        }
    }

    #[test]
    fn reinit_requires_interface() {
        let g = GridSpec::new(5, 5, 1.0).unwrap();
        assert_eq!(reinitialize(&ScalarField::filled(g, 2.0)), Err(Error::NoInterface));
    }

    #[test]
    fn reinit_of_mask_distance_is_sane() {
        let g = GridSpec::new(40, 30, 1.0).unwrap();
        let mask =
            ScalarField::from_fn(g, |i, j| if (10..25).contains(&i) && (8..20).contains(&j) { 1.0 } else { 0.0 });
        let phi = signed_distance_from_mask(&mask).unwrap();
        let re = reinitialize(&phi).unwrap();
        for (a, b) in phi.values().iter().zip(re.values()) {
            assert_eq!(*a < 0.0, *b < 0.0);
        }
        // Far from corners the rectangle distance is reproduced.
        assert!((re.get(17, 2) - 5.5).abs() < 1e-9);
        assert!((re.get(17, 12) + 4.5).abs() < 1e-9);
    }
}
