//! Observation containers: pseudo-observation pairs with optional covariates.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum DataError {
    #[error("dataset is empty")]
    Empty,
    #[error("row {row}: {column} = {value} outside the open unit interval")]
    MarginOutOfRange {
        row: usize,
        column: &'static str,
        value: f64,
    },
    #[error("row {row}: covariate {index} = {value} outside [0, 1]")]
    CovariateOutOfRange { row: usize, index: usize, value: f64 },
    #[error("row {row}: non-finite value")]
    NonFinite { row: usize },
    #[error("row {row}: expected {expected} covariates, got {got}")]
    CovariateDimensionMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("u, v and covariate lengths disagree")]
    LengthMismatch,
}

/// `n` records `(u, v [, x_1..x_p])` with margins strictly inside `(0, 1)`
/// and covariates rescaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    u: Vec<f64>,
    v: Vec<f64>,
    /// Row-major covariates, `n * p` entries.
    x: Vec<f64>,
    p: usize,
}

impl ObservationSet {
    pub fn new(u: Vec<f64>, v: Vec<f64>, covariates: Option<Vec<Vec<f64>>>) -> Result<Self, DataError> {
        if u.is_empty() {
            return Err(DataError::Empty);
        }
        if u.len() != v.len() {
            return Err(DataError::LengthMismatch);
        }
        let p = covariates
            .as_ref()
            .map(|c| c.first().map_or(0, |row| row.len()))
            .unwrap_or(0);
        let n = u.len();
        let mut x = Vec::with_capacity(n * p);
        for row in 0..n {
            for (value, column) in [(u[row], "u"), (v[row], "v")] {
                if !value.is_finite() {
                    return Err(DataError::NonFinite { row });
                }
                if !(value > 0.0 && value < 1.0) {
                    return Err(DataError::MarginOutOfRange { row, column, value });
                }
            }
            if let Some(cov) = &covariates {
                if cov.len() != n {
                    return Err(DataError::LengthMismatch);
                }
                let cr = &cov[row];
                if cr.len() != p {
                    return Err(DataError::CovariateDimensionMismatch {
                        row,
                        expected: p,
                        got: cr.len(),
                    });
                }
                for (index, &value) in cr.iter().enumerate() {
                    if !value.is_finite() {
                        return Err(DataError::NonFinite { row });
                    }
                    if !(0.0..=1.0).contains(&value) {
                        return Err(DataError::CovariateOutOfRange { row, index, value });
                    }
                    x.push(value);
                }
            }
        }
        Ok(Self { u, v, x, p })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Number of covariates per record.
    pub fn covariate_dim(&self) -> usize {
        self.p
    }

    /// Covariate row `i` (empty slice when the set carries no covariates).
    pub fn covariates(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// Concatenate two sets with identical covariate dimension.
    pub fn concat(&self, other: &Self) -> Result<Self, DataError> {
        if self.p != other.p {
            return Err(DataError::LengthMismatch);
        }
        let mut out = self.clone();
        out.u.extend_from_slice(&other.u);
        out.v.extend_from_slice(&other.v);
        out.x.extend_from_slice(&other.x);
        Ok(out)
    }
}

/// Rank-based Kendall's tau of the pairs (concordant minus discordant over
/// all pairs). Quadratic in `n`; fine at study sizes.
pub fn empirical_kendall_tau(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut concordant_minus_discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let du = u[i] - u[j];
            let dv = v[i] - v[j];
            let prod = du * dv;
            if prod > 0.0 {
                concordant_minus_discordant += 1;
            } else if prod < 0.0 {
                concordant_minus_discordant -= 1;
            }
        }
    }
    concordant_minus_discordant as f64 / (n as f64 * (n as f64 - 1.0) / 2.0)
}
