//! Probabilistic comparison of two Lagrange elements `P_k` and `P_m`, `k < m`.
//!
//! The H1 errors of `P_k` and `P_m` at mesh size `h` are treated as random
//! variables supported on `[0, C_i h^i]`. The bound coefficients `C_i` are
//! estimated by the maximum-likelihood estimator of a uniform support
//! endpoint, i.e. the largest observed `error / h^i`. Their ratio gives the
//! critical mesh size
//!
//! ```text
//! h* = (C_k / C_m)^(1 / (m - k))
//! ```
//!
//! around which `P_m` stops being the more accurate element. Two laws for
//! `P(err_m <= err_k)` are provided: a step from 1 to 0 at `h*`, and the
//! sigmoid obtained when both errors are independent and uniform.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LawError {
    #[error("no samples to estimate from")]
    Empty,
    #[error("sample of degree {found} passed where degree {expected} was expected")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("sample error must be finite and non-negative, got {0}")]
    InvalidError(f64),
    #[error("degrees must satisfy 1 <= k < m, got k={k}, m={m}")]
    InvalidDegrees { k: usize, m: usize },
}

/// One realized H1 error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    /// Nominal mesh size the mesh was generated for.
    pub h: f64,
    /// Seed of the mesh the error was measured on.
    pub seed: u64,
    pub degree: usize,
    pub error: f64,
}

/// Estimate of `C_k |u|_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoefficient {
    pub degree: usize,
    pub value: f64,
    pub sample_count: usize,
}

/// Largest `error / h^k` over all samples, pooled over every mesh size.
pub fn estimate_coefficient(
    samples: &[ErrorSample],
    k: usize,
) -> Result<BoundCoefficient, LawError> {
    if samples.is_empty() {
        return Err(LawError::Empty);
    }
    let mut value = 0.0f64;
    for s in samples {
        if s.degree != k {
            return Err(LawError::DegreeMismatch {
                expected: k,
                found: s.degree,
            });
        }
        positive("h", s.h)?;
        if !(s.error.is_finite() && s.error >= 0.0) {
            return Err(LawError::InvalidError(s.error));
        }
        value = value.max(s.error / powi(s.h, k));
    }
    Ok(BoundCoefficient {
        degree: k,
        value,
        sample_count: samples.len(),
    })
}

/// `(C_k / C_m)^(1 / (m - k))`.
pub fn estimate_h_star(
    coef_k: &BoundCoefficient,
    coef_m: &BoundCoefficient,
) -> Result<f64, LawError> {
    check_degrees(coef_k.degree, coef_m.degree)?;
    positive("bound coefficient", coef_k.value)?;
    positive("bound coefficient", coef_m.value)?;
    let ratio = coef_k.value / coef_m.value;
    let gap = coef_m.degree - coef_k.degree;
    Ok(if gap == 1 {
        ratio
    } else {
        libm::pow(ratio, 1.0 / gap as f64)
    })
}

/// Step law: 1 below `h*`, 0 above, 1/2 at `h*` itself.
pub fn two_steps_law(h: f64, h_star: f64) -> Result<f64, LawError> {
    positive("h", h)?;
    positive("h*", h_star)?;
    Ok(if h < h_star {
        1.0
    } else if h > h_star {
        0.0
    } else {
        0.5
    })
}

/// Probability that `P_m` is at least as accurate as `P_k` when both errors
/// are independent and uniform on their supports.
pub fn sigmoid_law(h: f64, h_star: f64, k: usize, m: usize) -> Result<f64, LawError> {
    positive("h", h)?;
    positive("h*", h_star)?;
    check_degrees(k, m)?;
    let gap = m - k;
    Ok(if h <= h_star {
        1.0 - 0.5 * powi(h / h_star, gap)
    } else {
        0.5 * powi(h_star / h, gap)
    })
}

/// Fraction of pairs `(err_m, err_k)` with `err_m <= err_k`. Ties count for `P_m`.
pub fn empirical_frequency(paired: &[(f64, f64)]) -> Result<f64, LawError> {
    if paired.is_empty() {
        return Err(LawError::Empty);
    }
    let hits = paired.iter().filter(|(em, ek)| em <= ek).count();
    Ok(hits as f64 / paired.len() as f64)
}

/// `(k, m, h*)` with the law evaluators bound to them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyModel {
    pub k: usize,
    pub m: usize,
    pub h_star: f64,
    pub coefficients: Option<(BoundCoefficient, BoundCoefficient)>,
}

impl AccuracyModel {
    pub fn new(k: usize, m: usize, h_star: f64) -> Result<Self, LawError> {
        check_degrees(k, m)?;
        positive("h*", h_star)?;
        Ok(Self {
            k,
            m,
            h_star,
            coefficients: None,
        })
    }

    pub fn from_estimates(
        coef_k: BoundCoefficient,
        coef_m: BoundCoefficient,
    ) -> Result<Self, LawError> {
        let h_star = estimate_h_star(&coef_k, &coef_m)?;
        Ok(Self {
            k: coef_k.degree,
            m: coef_m.degree,
            h_star,
            coefficients: Some((coef_k, coef_m)),
        })
    }

    pub fn two_steps(&self, h: f64) -> Result<f64, LawError> {
        two_steps_law(h, self.h_star)
    }

    pub fn sigmoid(&self, h: f64) -> Result<f64, LawError> {
        sigmoid_law(h, self.h_star, self.k, self.m)
    }
}

fn check_degrees(k: usize, m: usize) -> Result<(), LawError> {
    if k == 0 || k >= m {
        return Err(LawError::InvalidDegrees { k, m });
    }
    Ok(())
}

fn positive(what: &'static str, value: f64) -> Result<(), LawError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(LawError::NonPositive { what, value });
    }
    Ok(())
}

fn powi(base: f64, exp: usize) -> f64 {
    (0..exp).fold(1.0, |acc, _| acc * base)
}
