use alloc::vec;
use alloc::vec::Vec;

use crate::grid::ScalarField;

/// An ordered list of vertices in physical coordinates. A closed polyline does not repeat its
/// first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    /// Consecutive vertex pairs, including the closing pair for closed polylines.
    pub fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| libm::hypot(b.0 - a.0, b.1 - a.1)).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourSet {
    pub polylines: Vec<Polyline>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.polylines.iter().flat_map(|p| p.points.iter().copied())
    }

    /// Euclidean distance from `q` to the nearest point of any polyline.
    pub fn distance_to(&self, q: (f64, f64)) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.polylines {
            if p.points.len() == 1 {
                best = best.min(libm::hypot(q.0 - p.points[0].0, q.1 - p.points[0].1));
            }
            for (a, b) in p.segments() {
                best = best.min(point_segment_distance(q, a, b));
            }
        }
        best
    }

    /// Points along every polyline with gaps no larger than `resolution`.
    pub fn sample(&self, resolution: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for p in &self.polylines {
            if p.points.len() == 1 {
                out.push(p.points[0]);
            }
            for (a, b) in p.segments() {
                let len = libm::hypot(b.0 - a.0, b.1 - a.1);
                let n = libm::ceil(len / resolution).max(1.0) as usize;
                for k in 0..n {
                    let t = k as f64 / n as f64;
                    out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
                }
                if !p.closed {
                    out.push(b);
                }
            }
        }
        out
    }

    /// Largest distance from a point of `self` to `other`, sampling `self` every `resolution`.
    pub fn directed_distance(&self, other: &ContourSet, resolution: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        self.sample(resolution).into_iter().fold(0.0, |m, q| m.max(other.distance_to(q)))
    }
}

fn point_segment_distance(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    libm::hypot(q.0 - a.0 - t * dx, q.1 - a.1 - t * dy)
}

/// Symmetric Hausdorff distance between two contour sets; both are sampled every
/// `resolution`, so the result is exact up to `resolution / 2`.
/// Infinite if exactly one of them is empty.
pub fn hausdorff_distance(a: &ContourSet, b: &ContourSet, resolution: f64) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    a.directed_distance(b, resolution).max(b.directed_distance(a, resolution))
}

const NONE: usize = usize::MAX;

/// Zero level set of `Φ` by marching squares.
///
/// Crossings are linearly interpolated on pixel edges (a corner is inside when `Φ < 0`).
/// Ambiguous cells are resolved by the sign of the average of the four corners. Segments are
/// chained through shared pixel edges; chains that return to their start are closed.
pub fn extract_zero_level(phi: &ScalarField) -> ContourSet {
    let grid = *phi.grid();
    let (w, h) = (grid.width(), grid.height());
    let f = phi.values();
    // Edge ids: 2k is the edge from pixel k to its right neighbour, 2k + 1 to the one below.
    let horizontal = |i: usize, j: usize| 2 * (j * w + i);
    let vertical = |i: usize, j: usize| 2 * (j * w + i) + 1;

    let mut segments: Vec<[usize; 2]> = Vec::new();
    for j in 0..h - 1 {
        for i in 0..w - 1 {
            let v = [f[j * w + i], f[j * w + i + 1], f[(j + 1) * w + i + 1], f[(j + 1) * w + i]];
            let ins = v.map(|x| x < 0.0);
            let count = ins.iter().filter(|&&b| b).count();
            if count == 0 || count == 4 {
                continue;
            }
            // Cell edges: top, right, bottom, left; edge e joins corners e and e + 1.
            let edges = [horizontal(i, j), vertical(i + 1, j), horizontal(i, j + 1), vertical(i, j)];
            let crossed: Vec<usize> = (0..4).filter(|&e| ins[e] != ins[(e + 1) % 4]).collect();
            if crossed.len() == 2 {
                segments.push([edges[crossed[0]], edges[crossed[1]]]);
            } else {
                let avg = (v[0] + v[1] + v[2] + v[3]) / 4.0;
                if (avg < 0.0) == ins[0] {
                    // Corners 0 and 2 connect through the centre; cut off corners 1 and 3.
                    segments.push([edges[0], edges[1]]);
                    segments.push([edges[2], edges[3]]);
                } else {
                    segments.push([edges[3], edges[0]]);
                    segments.push([edges[1], edges[2]]);
                }
            }
        }
    }

    let point = |edge: usize| -> (f64, f64) {
        let k = edge / 2;
        let (i, j) = (k % w, k / w);
        let (ni, nj) = if edge.is_multiple_of(2) { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (f[k], f[nj * w + ni]);
        let t = a / (a - b);
        let s = grid.spacing();
        let (x0, y0) = (i as f64, j as f64);
        ((x0 + t * (ni as f64 - x0)) * s, (y0 + t * (nj as f64 - y0)) * s)
    };

    let mut owners = vec![[NONE; 2]; 2 * w * h];
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            let slot = &mut owners[e];
            if slot[0] == NONE {
                slot[0] = s;
            } else {
                slot[1] = s;
            }
        }
    }
    let degree = |e: usize| owners[e].iter().filter(|&&s| s != NONE).count();

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let walk = |start_seg: usize, start_edge: usize, used: &mut Vec<bool>| -> Polyline {
        let mut edges = vec![start_edge];
        let (mut seg, mut edge) = (start_seg, start_edge);
        let mut closed = false;
        loop {
            used[seg] = true;
            let [a, b] = segments[seg];
            let next = if a == edge { b } else { a };
            if next == start_edge {
                closed = true;
                break;
            }
            edges.push(next);
            match owners[next].iter().find(|&&s| s != NONE && !used[s]) {
                Some(&s) => {
                    seg = s;
                    edge = next;
                }
                None => break,
            }
        }
        Polyline { points: edges.into_iter().map(point).collect(), closed }
    };

    // Open chains start at edges owned by a single segment (on the frame).
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        for &e in &segments[s] {
            if degree(e) == 1 && !used[s] {
                polylines.push(walk(s, e, &mut used));
            }
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            polylines.push(walk(s, segments[s][0], &mut used));
        }
    }
    ContourSet { polylines }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::levelset::signed_distance_circle;
    use proptest::prelude::*;

    #[test]
    fn circle_gives_one_closed_polyline() {
        for (r, s) in [(5.0, 1.0), (12.3, 1.0), (30.7, 1.0), (6.1, 0.5)] {
            let g = GridSpec::new(80, 80, s).unwrap();
            let c = (39.2 * s, 40.1 * s);
            let cs = extract_zero_level(&signed_distance_circle(g, c, r * s).unwrap());
            assert_eq!(cs.polylines.len(), 1);
            assert!(cs.polylines[0].closed);
            for (x, y) in cs.vertices() {
                assert!((libm::hypot(x - c.0, y - c.1) - r * s).abs() <= 0.25 * s);
            }
        }
    }

    #[test]
    fn no_sign_change_gives_empty_set() {
        let g = GridSpec::new(6, 6, 1.0).unwrap();
        assert!(extract_zero_level(&ScalarField::filled(g, 1.0)).is_empty());
        assert!(extract_zero_level(&ScalarField::filled(g, -1.0)).is_empty());
    }

    #[test]
    fn single_pixel_and_open_line() {
        let g = GridSpec::new(5, 5, 1.0).unwrap();
        let mut phi = ScalarField::filled(g, 1.0);
        phi.set(2, 2, -1.0);
        let cs = extract_zero_level(&phi);
        assert_eq!(cs.polylines.len(), 1);
        assert!(cs.polylines[0].closed);
        assert_eq!(cs.polylines[0].points.len(), 4);

        let line = ScalarField::from_fn(g, |i, _| i as f64 - 1.5);
        let cs = extract_zero_level(&line);
        assert_eq!(cs.polylines.len(), 1);
        let p = &cs.polylines[0];
        assert!(!p.closed);
        assert_eq!(p.points.len(), 5);
        assert!(p.points.iter().all(|&(x, _)| (x - 1.5).abs() < 1e-12));
        assert!((p.length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn saddle_resolution_follows_centre_average() {
        let g = GridSpec::new(3, 3, 1.0).unwrap();
        // Checkerboard-like cell at the top-left: (0,0) and (1,1) inside.
        let mut phi = ScalarField::filled(g, 1.0);
        phi.set(0, 0, -1.0);
        phi.set(1, 1, -3.0);
        let cs = extract_zero_level(&phi);
        // Average is negative: the inside corners connect, giving one component.
        assert_eq!(cs.polylines.len(), 1);
        phi.set(1, 1, -0.5);
        phi.set(0, 0, -0.5);
        let cs = extract_zero_level(&phi);
        assert_eq!(cs.polylines.len(), 2);
    }

    proptest! {
        #[test]
        fn negation_preserves_vertices(
            cx in 10.0f64..20.0, cy in 10.0f64..20.0, r in 3.1f64..8.9,
        ) {
            let g = GridSpec::new(30, 30, 1.0).unwrap();
            let phi = signed_distance_circle(g, (cx, cy), r).unwrap();
            prop_assume!(phi.values().iter().all(|&v| v != 0.0));
            let a = extract_zero_level(&phi);
            let b = extract_zero_level(&phi.map(|v| -v));
            let mut va: Vec<(f64, f64)> = a.vertices().collect();
            let mut vb: Vec<(f64, f64)> = b.vertices().collect();
            va.sort_by(|p, q| p.partial_cmp(q).unwrap());
            vb.sort_by(|p, q| p.partial_cmp(q).unwrap());
            prop_assert_eq!(va.len(), vb.len());
            for (p, q) in va.iter().zip(&vb) {
                prop_assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
            }
        }

        #[test]
        fn vertices_stay_in_bounding_box(vals in proptest::collection::vec(-1.0f64..1.0, 49)) {
            let g = GridSpec::new(7, 7, 0.5).unwrap();
            let cs = extract_zero_level(&ScalarField::new(g, vals).unwrap());
            for (x, y) in cs.vertices() {
                prop_assert!((0.0..=3.0).contains(&x) && (0.0..=3.0).contains(&y));
            }
            for p in &cs.polylines {
                prop_assert!(!p.closed || p.points.len() >= 3);
            }
        }
    }

    #[test]
    fn hausdorff_examples() {
        let square = |s: f64, o: f64| ContourSet {
            polylines: vec![Polyline { points: vec![(o, o), (o + s, o), (o + s, o + s), (o, o + s)], closed: true }],
        };
        assert_eq!(hausdorff_distance(&square(2.0, 0.0), &square(2.0, 0.0), 0.1), 0.0);
        let d = hausdorff_distance(&square(2.0, 0.0), &square(4.0, -1.0), 0.01);
        assert!((d - core::f64::consts::SQRT_2).abs() < 1e-9);
        assert_eq!(hausdorff_distance(&square(1.0, 0.0), &ContourSet::default(), 0.1), f64::INFINITY);
        // A long edge with a bump: sampling catches interior points, not only vertices.
        let line = ContourSet { polylines: vec![Polyline { points: vec![(0.0, 0.0), (10.0, 0.0)], closed: false }] };
        let bump = ContourSet {
            polylines: vec![Polyline { points: vec![(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)], closed: false }],
        };
        let far = ContourSet { polylines: vec![Polyline { points: vec![(0.0, 1.0), (0.0, 0.0)], closed: false }] };
        assert!(hausdorff_distance(&line, &bump, 0.1) < 1e-12);
        assert!((line.directed_distance(&far, 0.1) - 10.0).abs() < 1e-12);
    }
}
