//! Randomized checks of the Hamiltonian's algebraic properties.

use std::fmt::Write as _;

use gvf_core::viscosity::{
    check_direction_lemma, check_properness, direction_lemma_sides, hamiltonian, projection_matrix, HamiltonianSample,
    SymMatrix2, TOLERANCE,
};
use rand::Rng;

/// Outcome of one randomized suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub draws: usize,
    pub failures: usize,
    /// Largest amount by which a checked inequality or identity was missed (negative when all
    /// inequalities held with room to spare).
    pub max_slack: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..=hi_exp))
}

fn random_vector<R: Rng>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> (f64, f64) {
    let r = log_uniform(rng, lo_exp, hi_exp);
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    (r * t.cos(), r * t.sin())
}

fn random_sample<R: Rng>(rng: &mut R) -> HamiltonianSample {
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    let m = rng.random_range(0.0..=1.0);
    HamiltonianSample {
        g_val: rng.random_range(0.0..=1.0),
        h_val: rng.random_range(-1.0..=1.0),
        vhat: (m * t.cos(), m * t.sin()),
        beta: rng.random_range(0.0..=5.0),
    }
}

/// A positive semidefinite matrix: zero, rank one or full rank, with eigenvalues up to 10.
fn random_psd<R: Rng>(rng: &mut R) -> SymMatrix2 {
    let t = rng.random_range(0.0..std::f64::consts::PI);
    let (c, s) = (t.cos(), t.sin());
    let (d1, d2) = match rng.random_range(0..10) {
        0 => (0.0, 0.0),
        1 => (rng.random_range(0.0..=10.0), 0.0),
        _ => (rng.random_range(0.0..=10.0), rng.random_range(0.0..=10.0)),
    };
    SymMatrix2::new(d1 * c * c + d2 * s * s, (d1 - d2) * c * s, d1 * s * s + d2 * c * c)
}

/// `F(p, X) ≤ F(p, Y)` for `X = Y + D`, `D ⪰ 0`.
///
/// `|p|` stays below 100 so the first-order terms, which cancel between both sides, do not
/// carry rounding errors above the absolute tolerance.
pub fn properness_suite<R: Rng>(rng: &mut R, draws: usize) -> SuiteReport {
    let mut report = SuiteReport { name: "properness", draws, failures: 0, max_slack: f64::NEG_INFINITY };
    for _ in 0..draws {
        let sample = random_sample(rng);
        let p = random_vector(rng, -3.0, 2.0);
        let y = SymMatrix2::new(
            rng.random_range(-10.0..=10.0),
            rng.random_range(-10.0..=10.0),
            rng.random_range(-10.0..=10.0),
        );
        let x = y.add(&random_psd(rng));
        let ok = check_properness(&sample, p, &x, &y).unwrap_or(false);
        let fx = hamiltonian(&sample, p, &x).unwrap_or(f64::INFINITY);
        let fy = hamiltonian(&sample, p, &y).unwrap_or(f64::NEG_INFINITY);
        report.max_slack = report.max_slack.max(fx - fy);
        report.failures += usize::from(!ok);
    }
    report
}

/// `|p/|p| − q/|q|| ≤ |p − q| / min(|p|, |q|)` with magnitudes from 1e-300 to 1e300.
pub fn direction_suite<R: Rng>(rng: &mut R, draws: usize) -> SuiteReport {
    let mut report = SuiteReport { name: "direction_lemma", draws, failures: 0, max_slack: f64::NEG_INFINITY };
    for _ in 0..draws {
        let p = random_vector(rng, -300.0, 300.0);
        let q = match rng.random_range(0..4) {
            // near p, relative perturbation down to 1e-15
            0 => {
                let d = random_vector(rng, -15.0, 0.0);
                (p.0 * (1.0 + d.0), p.1 * (1.0 + d.1))
            }
            // same scale as p
            1 => {
                let m = p.0.hypot(p.1);
                let u = random_vector(rng, -1.0, 1.0);
                (m * u.0, m * u.1)
            }
            _ => random_vector(rng, -300.0, 300.0),
        };
        if p == (0.0, 0.0) || q == (0.0, 0.0) {
            continue;
        }
        let ok = check_direction_lemma(p, q).unwrap_or(false);
        if let Ok((lhs, rhs)) = direction_lemma_sides(p, q) {
            if rhs.is_finite() {
                report.max_slack = report.max_slack.max(lhs - rhs);
            }
        }
        report.failures += usize::from(!ok);
    }
    report
}

/// Symmetry, idempotence, unit trace, `A(p)p = 0` and `A(λp) = A(p)`, all within 1e-12.
pub fn projection_suite<R: Rng>(rng: &mut R, draws: usize) -> SuiteReport {
    let mut report = SuiteReport { name: "projection", draws, failures: 0, max_slack: 0.0 };
    for _ in 0..draws {
        let p = random_vector(rng, -3.0, 3.0);
        let lambda = log_uniform(rng, -3.0, 3.0);
        let (Ok(a), Ok(b)) = (projection_matrix(p), projection_matrix((lambda * p.0, lambda * p.1))) else {
            report.failures += 1;
            continue;
        };
        let sq = a.product(&a);
        let ap = a.apply(p);
        let errors = [
            // symmetry: the off-diagonal entries of the explicit product agree
            (sq[1] - sq[2]).abs(),
            (sq[0] - a.a11).abs(),
            (sq[1] - a.a12).abs(),
            (sq[3] - a.a22).abs(),
            (a.trace() - 1.0).abs(),
            ap.0.abs(),
            ap.1.abs(),
            (a.a11 - b.a11).abs(),
            (a.a12 - b.a12).abs(),
            (a.a22 - b.a22).abs(),
        ];
        let worst = errors.iter().fold(0.0f64, |m, &e| m.max(e));
        report.max_slack = report.max_slack.max(worst);
        report.failures += usize::from(!(worst <= TOLERANCE));
    }
    report
}

/// One CSV row per entry: `check,draws,failures,max_slack,passed`. `lipschitz` rows carry the
/// sampled constant in the `max_slack` column.
pub fn diagnostics_csv(reports: &[SuiteReport], lipschitz: &[(String, f64)]) -> String {
    let mut out = String::from("check,draws,failures,max_slack,passed\n");
    for r in reports {
        writeln!(out, "{},{},{},{:e},{}", r.name, r.draws, r.failures, r.max_slack, r.passed()).unwrap();
    }
    for (name, value) in lipschitz {
        writeln!(out, "lipschitz_sqrt_g[{name}],1,0,{value:e},{}", value.is_finite()).unwrap();
    }
    out
}
