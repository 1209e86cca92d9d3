//! Exponent algebra for the extension inequalities.
//!
//! The target Lebesgue exponent `q` is a function of the density exponent
//! `p` and the dimension `d` through `1/q = ((d-1)/(d+1))(1 - 1/p)`, and
//! the whole analysis downstream is parametrised by the derived quantity
//! `beta = (d-1)(q-2)/4`. Mixed-norm pairs `(r, q)` are admissible when
//! they satisfy the scaling relation `2/r + (d-1)/q = (d-1)/2`.
//!
//! Everything here is validated before any numerics run: the profile
//! integrals only converge absolutely when `(d-1)(q-2) > 2`, which is the
//! enforced criterion.

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// Relative slack used when snapping `beta` to a nearby integer and when
/// testing the admissibility relation.
const SNAP_TOL: f64 = 1e-12;

/// Position of `p` relative to the self-dual point `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalityCase {
    Subcritical,
    Critical,
    Supercritical,
}

/// A validated `(d, p, q)` triple together with the derived series
/// parameters.
///
/// Constructed only through [`ExponentConfig::new`]; a successfully built
/// config satisfies
///
/// * `1/q = ((d-1)/(d+1))(1 - 1/p)` to machine precision,
/// * `q > 2d/(d-1)` and `(d-1)(q-2) > 2`,
/// * `k0 = ceil(beta)` with `k0 >= 1`,
/// * `beta` is snapped to the nearest integer when within `1e-12`, so the
///   integer/non-integer dichotomy downstream is decided reliably.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentConfig {
    d: u32,
    p: f64,
    q: f64,
    beta: f64,
    k0: u32,
    case: CriticalityCase,
}

impl ExponentConfig {
    /// Validates `(p, d)` and derives `q`, `beta`, `k0` and the case tag.
    pub fn new(p: f64, d: u32) -> Result<Self> {
        let q = dual_exponent(p, d)?;
        let dm1 = f64::from(d - 1);
        // Integrability of the profile integrals requires (d-1)(q-2) > 2.
        // The bound is approached only as p -> 2d/(d-1), which the strict
        // range check above already excludes, but a guard with explicit
        // slack keeps borderline floating-point inputs out.
        if dm1 * (q - 2.0) <= 2.0 + 1e-9 {
            return Err(Error::domain(format!(
                "(d-1)(q-2) = {} must exceed 2 for absolute convergence",
                dm1 * (q - 2.0)
            )));
        }
        let raw_beta = dm1 * (q - 2.0) / 4.0;
        let beta = snap_to_integer(raw_beta);
        let k0 = beta.ceil() as u32;
        debug_assert!(k0 >= 1);
        let case = if (p - 2.0).abs() <= SNAP_TOL {
            CriticalityCase::Critical
        } else if p < 2.0 {
            CriticalityCase::Subcritical
        } else {
            CriticalityCase::Supercritical
        };
        if case == CriticalityCase::Critical {
            debug_assert!((beta - 1.0).abs() < 1e-9);
        }
        if case == CriticalityCase::Supercritical {
            debug_assert!((0.5..1.0).contains(&beta));
        }
        Ok(ExponentConfig {
            d,
            p,
            q,
            beta,
            k0,
            case,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `(d-1)(q-2)/4`, snapped to the nearest integer when within `1e-12`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Smallest integer `>= beta`.
    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn case(&self) -> CriticalityCase {
        self.case
    }

    /// Whether `beta` landed exactly on an integer after snapping.
    pub fn beta_is_integer(&self) -> bool {
        self.beta.fract() == 0.0
    }
}

/// Solves `1/q = ((d-1)/(d+1))(1 - 1/p)` for `q`.
///
/// Valid for `d >= 2` and `p` strictly inside `(1, 2d/(d-1))`.
pub fn dual_exponent(p: f64, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("dimension d = {d} must be >= 2")));
    }
    if !p.is_finite() {
        return Err(Error::domain("p must be finite".to_string()));
    }
    let upper = 2.0 * f64::from(d) / f64::from(d - 1);
    if p <= 1.0 || p >= upper {
        return Err(Error::domain(format!(
            "p = {p} outside the open range (1, {upper}) for d = {d}"
        )));
    }
    Ok(f64::from(d + 1) * p / (f64::from(d - 1) * (p - 1.0)))
}

/// Outcome of an admissibility check: rejection is a value, not a fault.
#[derive(Debug, Clone, Serialize)]
pub enum AdmissibleCheck {
    Accepted(AdmissiblePair),
    /// The scaling relation failed; carries `2/r + (d-1)/q - (d-1)/2`.
    Rejected { residual: f64 },
}

impl AdmissibleCheck {
    pub fn accepted(self) -> Option<AdmissiblePair> {
        match self {
            AdmissibleCheck::Accepted(pair) => Some(pair),
            AdmissibleCheck::Rejected { .. } => None,
        }
    }
}

/// An exponent pair `(r, q)` in dimension `d` satisfying the scaling
/// relation `2/r + (d-1)/q = (d-1)/2` with `q, r` finite and `>= 2`.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissiblePair {
    d: u32,
    q: f64,
    r: f64,
}

impl AdmissiblePair {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Tests the scaling relation `2/r + (d-1)/q = (d-1)/2` within `1e-12`
/// relative. Finite exponents below 2 and bad dimensions are domain errors;
/// a failed relation is an [`AdmissibleCheck::Rejected`] value.
pub fn check_admissible(r: f64, q: f64, d: u32) -> Result<AdmissibleCheck> {
    if d < 2 {
        return Err(Error::domain(format!("dimension d = {d} must be >= 2")));
    }
    for (name, v) in [("r", r), ("q", q)] {
        if !v.is_finite() || v < 2.0 {
            return Err(Error::domain(format!(
                "{name} = {v} must be finite and >= 2"
            )));
        }
    }
    let dm1 = f64::from(d - 1);
    let target = dm1 / 2.0;
    let residual = 2.0 / r + dm1 / q - target;
    if residual.abs() <= SNAP_TOL * target {
        Ok(AdmissibleCheck::Accepted(AdmissiblePair { d, q, r }))
    } else {
        Ok(AdmissibleCheck::Rejected { residual })
    }
}

fn snap_to_integer(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= SNAP_TOL * nearest.abs().max(1.0) {
        nearest
    } else {
        x
    }
}
