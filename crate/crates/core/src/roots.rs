//! Bracketed scalar root finding (Brent's method from the `roots` crate).

use roots::{find_root_brent, Convergency};

struct Bracket {
    xtol: f64,
    max_iter: usize,
}

impl Convergency<f64> for Bracket {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        let mid = 0.5 * (x1 + x2);
        (x1 - x2).abs() <= self.xtol || mid == x1 || mid == x2
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

/// Root of a continuous `f` that changes sign on `[lo, hi]`, to bracket
/// width `xtol` (or until no floating-point number lies strictly inside).
pub fn brent(f: impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    find_root_brent(lo, hi, &f, &mut Bracket { xtol, max_iter }).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_roots_of_smooth_and_kinked_functions() {
        let x = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
        let x = brent(|x| (x - 0.3).max(0.0) * 10.0 + (x - 0.3).min(0.0) * 0.01, -5.0, 5.0, 1e-14, 200).unwrap();
        assert!((x - 0.3).abs() < 1e-13);
        let x = brent(|x| 1.0 - x, 0.0, 3.0, 0.0, 200).unwrap();
        assert!((x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_or_capped_searches_fail() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
        assert!(brent(|x| x.powi(9) - 1e-30, 0.0, 1e6, 0.0, 3).is_none());
    }
}
