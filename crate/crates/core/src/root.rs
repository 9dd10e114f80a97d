//! Bracketing bisection for monotone scalar problems.

/// Why a bracket could not be used.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum BracketError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("function returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

/// Stopping rule for [`bisect`]. Iteration ends once either tolerance is
/// met or `max_iter` halvings have been made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub residual: f64,
    pub width: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            residual: 1e-10,
            width: 1e-15,
            max_iter: 200,
        }
    }
}

/// Result of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Find a zero of `f` on `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign (an exact zero at an endpoint is accepted).
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: Tolerance) -> Result<Root, BracketError>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(BracketError::NonFinite { at: lo });
    }
    if !f_hi.is_finite() {
        return Err(BracketError::NonFinite { at: hi });
    }
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(BracketError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut best = if libm::fabs(f_lo) < libm::fabs(f_hi) {
        Root { x: lo, residual: f_lo, iterations: 0 }
    } else {
        Root { x: hi, residual: f_hi, iterations: 0 }
    };
    for it in 1..=tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(BracketError::NonFinite { at: mid });
        }
        if libm::fabs(f_mid) < libm::fabs(best.residual) {
            best = Root { x: mid, residual: f_mid, iterations: it };
        }
        best.iterations = it;
        if f_mid == 0.0 || libm::fabs(f_mid) < tol.residual {
            return Ok(best);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol.width {
            break;
        }
    }
    Ok(best)
}

/// Bisection on a predicate that is `false` below some switch point and
/// `true` above it. Returns the bracket `(lo, hi)` with `pred(lo) == false`,
/// `pred(hi) == true` and `hi − lo <= width`.
pub fn bisect_predicate<F>(mut pred: F, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.x - core::f64::consts::SQRT_2).abs() < 1e-10);
        assert!(r.residual.abs() < 1e-10);
    }

    #[test]
    fn rejects_missing_bracket() {
        let e = bisect(|x| x * x + 1.0, -1.0, 1.0, Tolerance::default()).unwrap_err();
        assert!(matches!(e, BracketError::NoSignChange { .. }));
    }

    #[test]
    fn predicate_bracket() {
        let (lo, hi) = bisect_predicate(|x| x > 0.3, 0.0, 1.0, 1e-6);
        assert!(lo <= 0.3 && hi > 0.3 && hi - lo <= 1e-6);
    }
}
