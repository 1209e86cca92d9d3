//! Branch-cut-aware complex powers of the three recurring factors
//! `1 + it`, `1 - it` and `q - 1 - it`.
//!
//! The branches are fixed once and for all: each logarithm is analytic off
//! a single vertical ray (`{is : s >= 1}` for `1 + it`, `{-is : s >= 1}`
//! for the other two) and takes the value `0` at `t = 0`, except
//! `log(q - 1 - it)` which takes `log(q - 1)`. On the real line every base
//! has positive real part, so these branches coincide with the principal
//! logarithm; the cuts never meet the real axis.
//!
//! The only non-real evaluation point used anywhere is the shifted ray
//! `t = i + iy`, `y >= 0`, where the bases of the two non-singular factors
//! become the positive reals `2 + y` and `q + y`. The factor `1 + it`
//! degenerates there to `-y`, which lies on its cut; the contour identity
//! absorbs it into an explicit `y^gamma sin(gamma pi)` structure instead,
//! so asking for its shifted base is rejected as misuse.

use num_complex::Complex;
use serde::Serialize;

use crate::error::Error;
use crate::{Complex64, Result};

/// One of the three analytic factors with a fixed branch of log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BranchFactor {
    /// `1 + it`, cut along `{is : s >= 1}`.
    OnePlusIt,
    /// `1 - it`, cut along `{-is : s >= 1}`.
    OneMinusIt,
    /// `q - 1 - it`, cut along `{-is : s >= 1}`; requires `q > 2`.
    QMinus1MinusIt { q: f64 },
}

impl BranchFactor {
    /// The base value at real `t`.
    fn base(self, t: f64) -> Complex64 {
        match self {
            BranchFactor::OnePlusIt => Complex::new(1.0, t),
            BranchFactor::OneMinusIt => Complex::new(1.0, -t),
            BranchFactor::QMinus1MinusIt { q } => Complex::new(q - 1.0, -t),
        }
    }
}

/// The fixed-branch logarithm of a factor at real `t`.
///
/// On the real line the real part of every base is positive, so the fixed
/// branch equals the principal logarithm; a debug assertion guards the
/// invariant.
pub fn branch_log(factor: BranchFactor, t: f64) -> Complex64 {
    let base = factor.base(t);
    debug_assert!(base.re > 0.0, "branch base left the right half-plane");
    base.ln()
}

/// `exp(gamma * L(t))` where `L` is the fixed branch of log for `factor`.
///
/// Continuous in `t` on the whole real line; `L(0) = 0` for the unit-base
/// factors and `log(q - 1)` for `q - 1 - it`.
pub fn branch_power(factor: BranchFactor, t: f64, gamma: f64) -> Complex64 {
    (branch_log(factor, t) * gamma).exp()
}

/// The (real, positive) base of a factor on the shifted ray `t = i + iy`.
///
/// `1 - it` becomes `2 + y` and `q - 1 - it` becomes `q + y`. The base of
/// `1 + it` there is `-y`, i.e. the cut itself, so that factor is rejected:
/// contour-form callers must handle it through the explicit
/// `y^gamma sin(gamma pi)` structure.
pub fn shifted_base(factor: BranchFactor, y: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::domain(format!("shifted ray offset y = {y} < 0")));
    }
    match factor {
        BranchFactor::OnePlusIt => Err(Error::domain(
            "1 + it lies on its own cut along the shifted ray".to_string(),
        )),
        BranchFactor::OneMinusIt => Ok(2.0 + y),
        BranchFactor::QMinus1MinusIt { q } => Ok(q + y),
    }
}
