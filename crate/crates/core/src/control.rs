//! Admissible set `U_ad = {alpha <= u <= beta}` and the nonsmooth part `mu * j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsity::SparsityKind;

/// Constant control bounds with `alpha < 0 < beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub alpha: f64,
    pub beta: f64,
}

impl Bounds {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha < 0.0 && 0.0 < beta) {
            return Err(Error::InvalidArgument(format!(
                "control bounds must satisfy α < 0 < β, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(Bounds { alpha, beta })
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.alpha, self.beta)
    }

    /// Bound in the direction of `sign`: `beta` for positive values, `|alpha|` otherwise.
    #[inline]
    pub(crate) fn magnitude_for(&self, positive: bool) -> f64 {
        if positive {
            self.beta
        } else {
            -self.alpha
        }
    }

    /// Tolerance for "u sits at a bound".
    pub fn active_tol(&self) -> f64 {
        1e-10 * (self.beta - self.alpha)
    }

    pub fn at_lower(&self, x: f64) -> bool {
        x <= self.alpha + self.active_tol()
    }

    pub fn at_upper(&self, x: f64) -> bool {
        x >= self.beta - self.active_tol()
    }

    /// Amount by which `x` leaves `[alpha, beta]`.
    pub fn violation(&self, x: f64) -> f64 {
        (self.alpha - x).max(x - self.beta).max(0.0)
    }
}

/// `G = delta_{U_ad} + mu * j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSpec {
    pub kind: SparsityKind,
    pub mu: f64,
    pub bounds: Bounds,
}

impl ControlSpec {
    pub fn new(kind: SparsityKind, mu: f64, bounds: Bounds) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidArgument(format!("mu must be finite and nonnegative, got {mu}")));
        }
        Ok(ControlSpec { kind, mu, bounds })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_must_straddle_zero() {
        assert!(Bounds::new(-1.0, 1.0).is_ok());
        for (a, b) in [(0.0, 1.0), (-1.0, 0.0), (1.0, 2.0), (f64::NEG_INFINITY, 1.0)] {
            let msg = Bounds::new(a, b).unwrap_err().to_string();
            assert!(msg.contains("α < 0 < β"), "{msg}");
        }
    }

    #[test]
    fn active_detection() {
        let b = Bounds::new(-2.0, 3.0).unwrap();
        assert!(b.at_lower(-2.0) && !b.at_lower(-1.999));
        assert!(b.at_upper(3.0) && !b.at_upper(2.9));
        assert_eq!(b.violation(3.5), 0.5);
        assert_eq!(b.violation(0.0), 0.0);
    }
}
