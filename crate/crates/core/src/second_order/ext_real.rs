use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A value in `[-inf, +inf]`.
///
/// Addition is partial: `+inf + -inf` has no value under [`ExtReal::checked_add`];
/// [`ExtReal::add_upper`] applies the convention `inf - inf = +inf` used for
/// upper sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64` infinities to the matching variant; NaN is rejected.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn checked_add(self, other: ExtReal) -> Option<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (Finite(a), Finite(b)) => ExtReal::from_f64(a + b),
        }
    }

    /// `self + other` with `inf + (-inf) := +inf`.
    pub fn add_upper(self, other: ExtReal) -> ExtReal {
        self.checked_add(other).unwrap_or(ExtReal::PosInf)
    }

    fn rank(self) -> (i8, f64) {
        match self {
            ExtReal::NegInf => (-1, 0.0),
            ExtReal::Finite(x) => (0, x),
            ExtReal::PosInf => (1, 0.0),
        }
    }

    /// Total order; `Finite(-0.0) < Finite(0.0)` as for [`f64::total_cmp`].
    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        let (a, x) = self.rank();
        let (b, y) = other.rank();
        a.cmp(&b).then(x.total_cmp(&y))
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN.
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x).expect("NaN is not an extended real")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(x) => fmt::Display::fmt(x, f),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

/// Finite values as JSON numbers, infinities as the strings `"+inf"` / `"-inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtReal::*;

    #[test]
    fn ordering_is_total() {
        let mut xs = vec![PosInf, Finite(1.0), NegInf, Finite(-3.0), Finite(0.0)];
        xs.sort_by(ExtReal::total_cmp);
        assert_eq!(xs, vec![NegInf, Finite(-3.0), Finite(0.0), Finite(1.0), PosInf]);
        assert!(Finite(1e308) < PosInf);
    }

    #[test]
    fn addition_rules() {
        assert_eq!(PosInf.checked_add(NegInf), None);
        assert_eq!(PosInf.add_upper(NegInf), PosInf);
        assert_eq!(Finite(1.0).checked_add(Finite(2.0)), Some(Finite(3.0)));
        assert_eq!(Finite(f64::MAX).checked_add(Finite(f64::MAX)), Some(PosInf));
        assert_eq!(NegInf.checked_add(Finite(5.0)), Some(NegInf));
    }

    #[test]
    fn json_representation() {
        assert_eq!(serde_json::to_string(&vec![Finite(0.5), PosInf]).unwrap(), r#"[0.5,"+inf"]"#);
        assert_eq!(ExtReal::from_f64(f64::NAN), None);
    }
}
