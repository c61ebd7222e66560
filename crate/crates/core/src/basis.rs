//! Cubic B-spline bases on equidistant knots and difference penalty matrices.
//!
//! The basis is clamped: boundary knots are repeated `degree + 1` times so
//! that exactly one basis function is active at each domain end. Evaluation
//! offers three modes (value, derivative, antiderivative); the antiderivative
//! of each basis function is anchored at the lower domain end and extended
//! constantly above the upper end.

use nalgebra::DMatrix;
use thiserror::Error;

/// Spline degree is fixed to cubic throughout.
pub const DEGREE: usize = 3;

#[derive(Debug, Clone, Error)]
pub enum BasisError {
    #[error("invalid domain: hi ({hi}) must exceed lo ({lo})")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("need at least 4 basis functions, got {0}")]
    TooFewFunctions(usize),
    #[error("evaluation point is not finite")]
    NonFiniteInput,
    #[error("penalty order {order} must satisfy 1 <= order < {len}")]
    InvalidPenaltyOrder { order: usize, len: usize },
}

/// What to evaluate for each basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Value,
    Derivative,
    Antiderivative,
}

/// A clamped cubic B-spline basis with `len` functions on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    lo: f64,
    hi: f64,
    len: usize,
    /// Interior knot spacing.
    h: f64,
    /// Full knot vector, length `len + DEGREE + 1`.
    knots: Vec<f64>,
    /// `cum[i * len + k]` = integral of basis `k` from `lo` to the start of
    /// interval `i`; rows run over `0..=interval_count`.
    cum: Vec<f64>,
    /// Integral of each basis function over the whole domain.
    full: Vec<f64>,
}

impl BSplineBasis {
    /// Build a clamped cubic basis with `len` functions and equidistant
    /// interior knots on `(lo, hi)`.
    pub fn new(lo: f64, hi: f64, len: usize) -> Result<Self, BasisError> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(BasisError::InvalidDomain { lo, hi });
        }
        if len < DEGREE + 1 {
            return Err(BasisError::TooFewFunctions(len));
        }
        let intervals = len - DEGREE;
        let h = (hi - lo) / intervals as f64;
        let mut knots = Vec::with_capacity(len + DEGREE + 1);
        knots.extend(std::iter::repeat_n(lo, DEGREE));
        for i in 0..=intervals {
            // Deterministic interior layout; the last knot is exactly `hi`.
            let t = if i == intervals {
                hi
            } else {
                lo + h * i as f64
            };
            knots.push(t);
        }
        knots.extend(std::iter::repeat_n(hi, DEGREE));
        let mut basis = Self {
            lo,
            hi,
            len,
            h,
            knots,
            cum: Vec::new(),
            full: Vec::new(),
        };
        basis.build_integral_table();
        Ok(basis)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn interval_count(&self) -> usize {
        self.len - DEGREE
    }

    /// Integral of each basis function over `[lo, hi]`.
    pub fn full_integrals(&self) -> &[f64] {
        &self.full
    }

    /// Evaluate all basis functions at `s` in the requested mode.
    ///
    /// Value and derivative modes clamp `s` into `[lo, hi]`; antiderivative
    /// entries are `int_lo^min(s, hi) b_k` (zero below `lo`).
    pub fn eval(&self, s: f64, mode: EvalMode) -> Result<Vec<f64>, BasisError> {
        if !s.is_finite() {
            return Err(BasisError::NonFiniteInput);
        }
        let mut out = vec![0.0; self.len];
        match mode {
            EvalMode::Value => {
                let (start, vals) = self.value_window(s);
                out[start..start + 4].copy_from_slice(&vals);
            }
            EvalMode::Derivative => {
                let (start, vals) = self.derivative_window(s);
                out[start..start + 4].copy_from_slice(&vals);
            }
            EvalMode::Antiderivative => {
                if s <= self.lo {
                    return Ok(out);
                }
                let span = self.span_of(s);
                out.copy_from_slice(&self.cum[span * self.len..(span + 1) * self.len]);
                let (start, vals) = self.antiderivative_window(s);
                for (slot, v) in out[start..start + 4].iter_mut().zip(vals) {
                    *slot = v;
                }
            }
        }
        Ok(out)
    }

    /// Index of the interval containing `s`, clamped to the domain.
    #[inline]
    pub fn span_of(&self, s: f64) -> usize {
        let raw = (s - self.lo) / self.h;
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.interval_count() - 1)
        }
    }

    /// Values of the four active basis functions at `s` (clamped into the
    /// domain). Returns the index of the first active function.
    #[inline]
    pub fn value_window(&self, s: f64) -> (usize, [f64; 4]) {
        let s = s.clamp(self.lo, self.hi);
        let span = self.span_of(s);
        (span, self.de_boor_values(span + DEGREE, s))
    }

    /// Derivatives of the four active basis functions at `s` (clamped).
    pub fn derivative_window(&self, s: f64) -> (usize, [f64; 4]) {
        let s = s.clamp(self.lo, self.hi);
        let span = self.span_of(s);
        let sp = span + DEGREE;
        // Degree-2 basis values for functions sp-2..=sp at s.
        let quad = self.de_boor_lower(sp, s);
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let k = span + i;
            let left = if i > 0 {
                let denom = self.knots[k + DEGREE] - self.knots[k];
                if denom > 0.0 {
                    quad[i - 1] / denom
                } else {
                    0.0
                }
            } else {
                0.0
            };
            let right = if i < 3 {
                let denom = self.knots[k + DEGREE + 1] - self.knots[k + 1];
                if denom > 0.0 {
                    quad[i] / denom
                } else {
                    0.0
                }
            } else {
                0.0
            };
            *slot = DEGREE as f64 * (left - right);
        }
        (span, out)
    }

    /// Anchored integrals `int_lo^s b_k` of the four functions active at `s`
    /// (with `s` clamped into the domain).
    pub fn antiderivative_window(&self, s: f64) -> (usize, [f64; 4]) {
        let s = s.clamp(self.lo, self.hi);
        let span = self.span_of(s);
        let t0 = self.knots[span + DEGREE];
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.cum[span * self.len + span + i];
        }
        if s > t0 {
            // Two-point Gauss-Legendre on [t0, s] is exact for cubics.
            let half = 0.5 * (s - t0);
            let mid = 0.5 * (s + t0);
            let offset = half / 3f64.sqrt();
            for x in [mid - offset, mid + offset] {
                let vals = self.de_boor_values(span + DEGREE, x);
                for (slot, v) in out.iter_mut().zip(vals) {
                    *slot += half * v;
                }
            }
        }
        (span, out)
    }

    /// Cumulative integral row at the start of `span` (all `len` functions).
    pub(crate) fn cum_row(&self, span: usize) -> &[f64] {
        &self.cum[span * self.len..(span + 1) * self.len]
    }

    /// Cox-de Boor values of the four cubic functions active on knot span
    /// `sp` (so functions `sp-3..=sp`), for `s` inside that span.
    #[inline]
    fn de_boor_values(&self, sp: usize, s: f64) -> [f64; 4] {
        let t = &self.knots;
        let mut n = [1.0, 0.0, 0.0, 0.0];
        let mut left = [0.0; 4];
        let mut right = [0.0; 4];
        for r in 1..=DEGREE {
            left[r] = s - t[sp + 1 - r];
            right[r] = t[sp + r] - s;
            let mut saved = 0.0;
            for i in 0..r {
                let temp = n[i] / (right[i + 1] + left[r - i]);
                n[i] = saved + right[i + 1] * temp;
                saved = left[r - i] * temp;
            }
            n[r] = saved;
        }
        n
    }

    /// Degree-2 basis values for functions `sp-2..=sp` at `s`.
    fn de_boor_lower(&self, sp: usize, s: f64) -> [f64; 3] {
        let t = &self.knots;
        let mut n = [1.0, 0.0, 0.0];
        let mut left = [0.0; 3];
        let mut right = [0.0; 3];
        for r in 1..=2 {
            left[r] = s - t[sp + 1 - r];
            right[r] = t[sp + r] - s;
            let mut saved = 0.0;
            for i in 0..r {
                let temp = n[i] / (right[i + 1] + left[r - i]);
                n[i] = saved + right[i + 1] * temp;
                saved = left[r - i] * temp;
            }
            n[r] = saved;
        }
        n
    }

    fn build_integral_table(&mut self) {
        let len = self.len;
        let intervals = self.interval_count();
        let mut cum = vec![0.0; (intervals + 1) * len];
        for span in 0..intervals {
            let a = self.knots[span + DEGREE];
            let b = self.knots[span + DEGREE + 1];
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let offset = half / 3f64.sqrt();
            let mut contrib = [0.0; 4];
            for x in [mid - offset, mid + offset] {
                let vals = self.de_boor_values(span + DEGREE, x);
                for (c, v) in contrib.iter_mut().zip(vals) {
                    *c += half * v;
                }
            }
            let (prev, next) = cum.split_at_mut((span + 1) * len);
            let prev_row = &prev[span * len..];
            next[..len].copy_from_slice(&prev_row[..len]);
            for (i, c) in contrib.iter().enumerate() {
                next[span + i] += c;
            }
        }
        self.full = cum[intervals * len..].to_vec();
        self.cum = cum;
    }
}

/// Symmetric nonnegative-definite penalty `D_r' D_r + ridge * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    matrix: DMatrix<f64>,
    order: usize,
    ridge: f64,
    rank: usize,
}

impl PenaltyMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Rank set per construction: `len - order` without ridge, full otherwise.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The quadratic form `coef' P coef`.
    pub fn quadratic_form(&self, coef: &[f64]) -> f64 {
        debug_assert_eq!(coef.len(), self.matrix.nrows());
        let mut acc = 0.0;
        for (i, ci) in coef.iter().enumerate() {
            let mut row = 0.0;
            for (j, cj) in coef.iter().enumerate() {
                row += self.matrix[(i, j)] * cj;
            }
            acc += ci * row;
        }
        acc
    }

    /// Gradient `2 P coef` of the quadratic form.
    pub fn quadratic_form_gradient(&self, coef: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let mut row = 0.0;
            for (j, cj) in coef.iter().enumerate() {
                row += self.matrix[(i, j)] * cj;
            }
            *slot = 2.0 * row;
        }
    }
}

/// The `(len - order) x len` matrix of `order`-th differences.
pub fn difference_matrix(len: usize, order: usize) -> Result<DMatrix<f64>, BasisError> {
    if order == 0 || order >= len {
        return Err(BasisError::InvalidPenaltyOrder { order, len });
    }
    let rows = len - order;
    let mut d = DMatrix::zeros(rows, len);
    for i in 0..rows {
        let mut coef = 1.0f64;
        for j in 0..=order {
            let sign = if (order - j) % 2 == 0 { 1.0 } else { -1.0 };
            d[(i, i + j)] = sign * coef;
            coef = coef * (order - j) as f64 / (j + 1) as f64;
        }
    }
    Ok(d)
}

/// Build `P = D_r' D_r + ridge * I` with its structural rank.
pub fn difference_penalty(len: usize, order: usize, ridge: f64) -> Result<PenaltyMatrix, BasisError> {
    let d = difference_matrix(len, order)?;
    let mut p = d.transpose() * &d;
    if ridge > 0.0 {
        for i in 0..len {
            p[(i, i)] += ridge;
        }
    }
    let rank = if ridge > 0.0 { len } else { len - order };
    Ok(PenaltyMatrix {
        matrix: p,
        order,
        ridge,
        rank,
    })
}
