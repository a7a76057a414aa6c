//! Manufactured solutions for `-Δu = q` on the unit square with Dirichlet
//! data `g = u|∂Ω`.

use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("Runge parameter alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("patch polynomial degree must be in 1..=4, got {0}")]
    InvalidPatchDegree(usize),
}

/// An exact solution with its gradient, right-hand side and boundary trace.
///
/// All evaluators are pure functions of the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemCase {
    /// `u = φ(x) φ(y)` with the Runge function `φ(t) = 1 / (1 + α t²)`.
    Runge { alpha: f64 },
    /// `u = sin(πx) cos(πy)`.
    Smooth,
    /// Polynomial of total degree `degree` (harmonic for every degree).
    Patch { degree: usize },
    /// `u = x²` with `q = −2`, the smallest non-harmonic polynomial fixture.
    Parabola,
}

impl ProblemCase {
    pub fn runge(alpha: f64) -> Result<Self, ProblemError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ProblemError::InvalidAlpha(alpha));
        }
        Ok(Self::Runge { alpha })
    }

    pub fn smooth() -> Self {
        Self::Smooth
    }

    /// `x + y`, `x² − y²`, `x³ − 3xy²` or `x⁴ − 6x²y² + y⁴`.
    pub fn polynomial_patch(degree: usize) -> Result<Self, ProblemError> {
        if !(1..=4).contains(&degree) {
            return Err(ProblemError::InvalidPatchDegree(degree));
        }
        Ok(Self::Patch { degree })
    }

    pub fn parabola() -> Self {
        Self::Parabola
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Parabola => "parabola",
            Self::Runge { .. } => "runge",
            Self::Smooth => "smooth",
            Self::Patch { .. } => "patch",
        }
    }

    /// Runge parameter, 0 for the other cases.
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::Runge { alpha } => alpha,
            _ => 0.0,
        }
    }

    pub fn u(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Runge { alpha } => runge(alpha, x) * runge(alpha, y),
            Self::Smooth => libm::sin(PI * x) * libm::cos(PI * y),
            Self::Patch { degree } => match degree {
                1 => x + y,
                2 => x * x - y * y,
                3 => x * x * x - 3.0 * x * y * y,
                _ => {
                    let (x2, y2) = (x * x, y * y);
                    x2 * x2 - 6.0 * x2 * y2 + y2 * y2
                }
            },
            Self::Parabola => x * x,
        }
    }

    pub fn grad_u(&self, x: f64, y: f64) -> [f64; 2] {
        match *self {
            Self::Runge { alpha } => [
                runge_d1(alpha, x) * runge(alpha, y),
                runge(alpha, x) * runge_d1(alpha, y),
            ],
            Self::Smooth => [
                PI * libm::cos(PI * x) * libm::cos(PI * y),
                -PI * libm::sin(PI * x) * libm::sin(PI * y),
            ],
            Self::Patch { degree } => match degree {
                1 => [1.0, 1.0],
                2 => [2.0 * x, -2.0 * y],
                3 => [3.0 * x * x - 3.0 * y * y, -6.0 * x * y],
                _ => [
                    4.0 * x * x * x - 12.0 * x * y * y,
                    -12.0 * x * x * y + 4.0 * y * y * y,
                ],
            },
            Self::Parabola => [2.0 * x, 0.0],
        }
    }

    /// Right-hand side `q = −Δu`.
    pub fn q(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Runge { alpha } => {
                -(runge_d2(alpha, x) * runge(alpha, y) + runge(alpha, x) * runge_d2(alpha, y))
            }
            Self::Smooth => 2.0 * PI * PI * self.u(x, y),
            Self::Patch { .. } => 0.0,
            Self::Parabola => -2.0,
        }
    }

    /// Dirichlet datum. Written per side of the square so that it is the
    /// boundary trace by construction; off the boundary it falls back to `u`.
    pub fn g(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Runge { alpha } => {
                let edge = 1.0 / (1.0 + alpha);
                if y == 0.0 {
                    runge(alpha, x)
                } else if x == 0.0 {
                    runge(alpha, y)
                } else if y == 1.0 {
                    runge(alpha, x) * edge
                } else if x == 1.0 {
                    edge * runge(alpha, y)
                } else {
                    self.u(x, y)
                }
            }
            Self::Smooth => {
                if x == 0.0 || x == 1.0 {
                    0.0
                } else if y == 0.0 {
                    libm::sin(PI * x)
                } else if y == 1.0 {
                    -libm::sin(PI * x)
                } else {
                    self.u(x, y)
                }
            }
            Self::Patch { .. } | Self::Parabola => self.u(x, y),
        }
    }
}

fn runge(alpha: f64, t: f64) -> f64 {
    1.0 / (1.0 + alpha * t * t)
}

fn runge_d1(alpha: f64, t: f64) -> f64 {
    let d = 1.0 + alpha * t * t;
    -2.0 * alpha * t / (d * d)
}

fn runge_d2(alpha: f64, t: f64) -> f64 {
    let d = 1.0 + alpha * t * t;
    2.0 * alpha * (3.0 * alpha * t * t - 1.0) / (d * d * d)
}
