//! Pointwise checks of the structure of the level-set Hamiltonian
//!
//! ```text
//! F(x, p, X) = −β g̃ Tr(A(p) X) + g̃ H |p| + g̃ (1 − |H|) ⟨V̂, p⟩,   A(p) = I − p⊗p / |p|²
//! ```
//!
//! All inequality checks use an absolute tolerance of [`TOLERANCE`].

use alloc::format;

use crate::error::{invalid, Error, Result};

pub const TOLERANCE: f64 = 1e-12;

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 { a11: 1.0, a12: 0.0, a22: 1.0 };
    pub const ZERO: SymMatrix2 = SymMatrix2 { a11: 0.0, a12: 0.0, a22: 0.0 };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        SymMatrix2 { a11, a12, a22 }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &SymMatrix2) -> f64 {
        self.a11 * other.a11 + 2.0 * self.a12 * other.a12 + self.a22 * other.a22
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (self.a11 * p.0 + self.a12 * p.1, self.a12 * p.0 + self.a22 * p.1)
    }

    /// Entries of `self · other` in row-major order (not symmetric in general).
    pub fn product(&self, other: &SymMatrix2) -> [f64; 4] {
        [
            self.a11 * other.a11 + self.a12 * other.a12,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a12 * other.a11 + self.a22 * other.a12,
            self.a12 * other.a12 + self.a22 * other.a22,
        ]
    }

    pub fn add(&self, other: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)
    }

    pub fn sub(&self, other: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(self.a11 - other.a11, self.a12 - other.a12, self.a22 - other.a22)
    }

    pub fn scale(&self, s: f64) -> SymMatrix2 {
        SymMatrix2::new(s * self.a11, s * self.a12, s * self.a22)
    }

    /// Eigenvalues `(λ_min, λ_max)` in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let r = libm::hypot(0.5 * (self.a11 - self.a22), self.a12);
        (m - r, m + r)
    }
}

/// Pointwise values of the fields entering `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSample {
    /// `g̃(x) ∈ [0, 1]`.
    pub g_val: f64,
    /// `H(x) ∈ [−1, 1]`.
    pub h_val: f64,
    /// `V̂(x)` with norm at most 1.
    pub vhat: (f64, f64),
    pub beta: f64,
}

impl HamiltonianSample {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.g_val) {
            return Err(invalid("g_val", format!("must lie in [0, 1], got {}", self.g_val)));
        }
        if !(-1.0..=1.0).contains(&self.h_val) {
            return Err(invalid("h_val", format!("must lie in [-1, 1], got {}", self.h_val)));
        }
        if !(libm::hypot(self.vhat.0, self.vhat.1) <= 1.0 + TOLERANCE) {
            return Err(invalid("vhat", "norm must be at most 1"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

fn nonzero(p: (f64, f64)) -> Result<f64> {
    let n = libm::hypot(p.0, p.1);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(n)
}

/// `A(p) = I − p⊗p / |p|²`, the projector onto the line orthogonal to `p`.
pub fn projection_matrix(p: (f64, f64)) -> Result<SymMatrix2> {
    nonzero(p)?;
    // Rescale first so tiny or huge |p| do not under/overflow the squares.
    let s = p.0.abs().max(p.1.abs());
    let (x, y) = (p.0 / s, p.1 / s);
    let n2 = x * x + y * y;
    Ok(SymMatrix2::new(y * y / n2, -x * y / n2, x * x / n2))
}

/// `F(x, p, X)` for the sample at `x`.
pub fn hamiltonian(sample: &HamiltonianSample, p: (f64, f64), x: &SymMatrix2) -> Result<f64> {
    let norm = nonzero(p)?;
    let a = projection_matrix(p)?;
    let g = sample.g_val;
    let first_order =
        g * sample.h_val * norm + g * (1.0 - sample.h_val.abs()) * (sample.vhat.0 * p.0 + sample.vhat.1 * p.1);
    Ok(-sample.beta * g * a.trace_product(x) + first_order)
}

/// Whether `F(x, p, X) <= F(x, p, Y) + TOLERANCE`, given `Y ⪯ X`.
///
/// The order is checked through the smallest eigenvalue of `X − Y`; a value below
/// `−TOLERANCE` is an error.
pub fn check_properness(sample: &HamiltonianSample, p: (f64, f64), x: &SymMatrix2, y: &SymMatrix2) -> Result<bool> {
    let (min_eigenvalue, _) = x.sub(y).eigenvalues();
    if min_eigenvalue < -TOLERANCE {
        return Err(Error::NotOrdered { min_eigenvalue });
    }
    Ok(hamiltonian(sample, p, x)? <= hamiltonian(sample, p, y)? + TOLERANCE)
}

/// `ρ(p, q) = min(|p − q| / min(|p|, |q|), 1)`.
pub fn rho(p: (f64, f64), q: (f64, f64)) -> Result<f64> {
    let (np, nq) = (nonzero(p)?, nonzero(q)?);
    Ok((libm::hypot(p.0 - q.0, p.1 - q.1) / np.min(nq)).min(1.0))
}

/// Both sides of the direction inequality `|p/|p| − q/|q|| <= |p − q| / min(|p|, |q|)`.
pub fn direction_lemma_sides(p: (f64, f64), q: (f64, f64)) -> Result<(f64, f64)> {
    let (np, nq) = (nonzero(p)?, nonzero(q)?);
    let lhs = libm::hypot(p.0 / np - q.0 / nq, p.1 / np - q.1 / nq);
    let rhs = libm::hypot(p.0 - q.0, p.1 - q.1) / np.min(nq);
    Ok((lhs, rhs))
}

/// Whether the unclamped direction inequality holds within [`TOLERANCE`].
pub fn check_direction_lemma(p: (f64, f64), q: (f64, f64)) -> Result<bool> {
    let (lhs, rhs) = direction_lemma_sides(p, q)?;
    Ok(lhs <= rhs + TOLERANCE)
}
