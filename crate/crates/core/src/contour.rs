//! The profile integrals behind the criticality verdicts.
//!
//! Everything here evaluates integrals of the shape
//!
//! ```text
//! ∫_R (1 + it)^gamma H(t) dt,
//! H(t) = (1-it)^e1 (q-1-it)^e2 (c0 + c1 it)^k exp(a (it - (1+t^2)/(q-1-it)))
//! ```
//!
//! by two independent routes. The primary route is the contour identity:
//! for `gamma > -1` the integral equals
//! `-2 sin(gamma pi) ∫_0^∞ y^gamma H(i + iy) dy`, and for `gamma = -1` it
//! equals `2 pi H(i)`. On the shifted ray every surviving factor is real
//! and positive (`1 - it -> 2 + y`, `q - 1 - it -> q + y`), so the
//! half-line integrand is real, non-oscillatory and free of branch
//! ambiguity. The real-line route integrates the original oscillatory
//! integrand directly and serves as the independent oracle.
//!
//! On top of these sit the named quantities: the radial profile of the
//! Euler-Lagrange kernel (as a function of `a = |y|^2 / 2`), its
//! mixed-norm analogue for admissible pairs, the two series-coefficient
//! families, and the closed form the profile collapses to at `p = 2`.
//!
//! Factors are always assembled in log space before exponentiating: the
//! individual powers overflow long before their product does, and the
//! half-line engine probes `y` beyond `1e80`.

use num_complex::Complex;
use serde::Serialize;

use crate::branch::{branch_log, BranchFactor};
use crate::error::Error;
use crate::exponents::{AdmissiblePair, CriticalityCase, ExponentConfig};
use crate::quadrature::{integrate_half_line, integrate_real_line, IntegralResult, QuadSpec};
use crate::{Complex64, Result};

/// Hard cap on series truncation; beyond this the series route reports
/// non-convergence rather than extrapolating.
const SERIES_CAP: u32 = 60;

/// Symbolic description of the analytic factor `H(t)`.
///
/// `H(t) = (1-it)^exp_minus (q-1-it)^exp_q
///         (poly_const + poly_it_coeff * it)^poly_k
///         exp(gauss_a (it - (1+t^2)/(q-1-it)))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnalyticFactor {
    pub exp_minus: f64,
    pub exp_q: f64,
    pub q: f64,
    pub gauss_a: f64,
    pub poly_k: u32,
    pub poly_const: f64,
    pub poly_it_coeff: f64,
}

impl AnalyticFactor {
    /// A pure two-power factor without polynomial or exponential parts.
    pub fn powers(exp_minus: f64, exp_q: f64, q: f64) -> Self {
        AnalyticFactor {
            exp_minus,
            exp_q,
            q,
            gauss_a: 0.0,
            poly_k: 0,
            poly_const: 0.0,
            poly_it_coeff: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q <= 1.0 || self.q.is_nan() {
            return Err(Error::domain(format!(
                "factor base q - 1 = {} must be positive",
                self.q - 1.0
            )));
        }
        if self.gauss_a < 0.0 {
            return Err(Error::domain("exponential coefficient a must be >= 0"));
        }
        Ok(())
    }

    /// Algebraic decay exponent of `(1+it)^gamma H(t)` for large `|t|`.
    /// The exponential factor tends to a nonzero constant at infinity, so
    /// only the powers count.
    pub fn decay_exponent(&self, gamma: f64) -> f64 {
        -(gamma + self.exp_minus + self.exp_q + f64::from(self.poly_k))
    }

    /// The argument of the exponential factor at real `t`, in the form
    /// `it - (1+t^2)/(q-1-it) = (-1 + i(q-1)t) / (q-1 - it)`.
    ///
    /// The single-quotient form matters: the difference form cancels
    /// catastrophically for large `|t|`, where the true imaginary part
    /// decays like `1/t` but the subtraction leaves noise of size
    /// `t * eps`.
    fn exp_arg(&self, t: f64) -> Complex64 {
        Complex::new(-1.0, (self.q - 1.0) * t) / Complex::new(self.q - 1.0, -t)
    }

    /// Full integrand `(1+it)^gamma H(t)` at real `t`, assembled in log
    /// space so that large opposing powers cannot overflow individually.
    pub fn integrand(&self, gamma: f64, t: f64) -> Complex64 {
        let mut log_sum = branch_log(BranchFactor::OnePlusIt, t) * gamma
            + branch_log(BranchFactor::OneMinusIt, t) * self.exp_minus
            + branch_log(BranchFactor::QMinus1MinusIt { q: self.q }, t) * self.exp_q;
        if self.poly_k > 0 {
            let affine = Complex::new(self.poly_const, self.poly_it_coeff * t);
            log_sum += affine.ln() * f64::from(self.poly_k);
        }
        if self.gauss_a != 0.0 {
            log_sum += self.exp_arg(t) * self.gauss_a;
        }
        log_sum.exp()
    }

    /// `H(i + iy)` on the shifted ray, where every factor is real:
    /// `(2+y)^e1 (q+y)^e2 (c0 - c1 (1+y))^k e^(-a (q + (q-1) y)/(q + y))`.
    pub fn shifted(&self, y: f64) -> f64 {
        let mut ln_mag = self.exp_minus * (2.0 + y).ln() + self.exp_q * (self.q + y).ln();
        let mut sign = 1.0;
        if self.poly_k > 0 {
            let affine = self.poly_const - self.poly_it_coeff * (1.0 + y);
            if affine == 0.0 {
                return 0.0;
            }
            if affine < 0.0 && self.poly_k % 2 == 1 {
                sign = -1.0;
            }
            ln_mag += f64::from(self.poly_k) * affine.abs().ln();
        }
        if self.gauss_a != 0.0 {
            ln_mag -= self.gauss_a * (self.q + (self.q - 1.0) * y) / (self.q + y);
        }
        sign * ln_mag.exp()
    }

    /// `H(i)`.
    pub fn at_i(&self) -> f64 {
        self.shifted(0.0)
    }
}

/// `sin(pi x)` with exact zeros at integers (after a 1e-13 snap), so that
/// integer-exponent cases vanish identically instead of leaving `~1e-16`
/// residue noise.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    if r.abs() < 1e-13 {
        return 0.0;
    }
    let s = (std::f64::consts::PI * r).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Evaluates `∫_R (1+it)^gamma H(t) dt` through the contour identity.
///
/// `gamma > -1` uses `-2 sin(gamma pi) ∫_0^∞ y^gamma H(i+iy) dy`;
/// `gamma = -1` (within 1e-12) collapses to `2 pi H(i)`. Nonnegative
/// integer `gamma` makes the full integrand entire and decaying in the
/// upper half plane, so the value is exactly zero and no quadrature runs.
pub fn contour_integral(gamma: f64, h: &AnalyticFactor, spec: &QuadSpec) -> Result<IntegralResult> {
    contour_integral_inner(gamma, h, spec, false)
}

fn contour_integral_inner(
    gamma: f64,
    h: &AnalyticFactor,
    spec: &QuadSpec,
    require_positive: bool,
) -> Result<IntegralResult> {
    h.validate()?;
    if gamma < -1.0 - 1e-12 {
        return Err(Error::domain(format!(
            "contour identity requires gamma >= -1, got {gamma}"
        )));
    }
    if (gamma + 1.0).abs() <= 1e-12 {
        let value = 2.0 * std::f64::consts::PI * h.at_i();
        return Ok(IntegralResult {
            value: Complex::new(value, 0.0),
            err_estimate: value.abs() * 1e-14,
            evaluations: 1,
            converged: true,
        });
    }
    let s = sin_pi(gamma);
    if s == 0.0 {
        return Ok(IntegralResult {
            value: Complex::new(0.0, 0.0),
            err_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let sigma = h.decay_exponent(gamma);
    if sigma <= 1.0 {
        return Err(Error::domain(format!(
            "decay hypothesis fails: |(1+it)^gamma H| ~ |t|^-{sigma}"
        )));
    }
    let qspec = QuadSpec {
        decay_exponent: sigma,
        ..spec.clone()
    };
    let positive_ok = std::cell::Cell::new(true);
    let half = integrate_half_line(
        |y| {
            let v = h.shifted(y);
            // Underflow to +0 far out on the ray is benign; only a genuine
            // sign flip (or NaN) falsifies positivity.
            if require_positive && (v < 0.0 || v.is_nan()) {
                positive_ok.set(false);
            }
            Complex::new(v, 0.0)
        },
        gamma,
        &qspec,
    )?;
    if !positive_ok.get() {
        return Err(Error::Inconsistent(
            "series factor lost positivity on the shifted ray".to_string(),
        ));
    }
    Ok(IntegralResult {
        value: half.value * (-2.0 * s),
        err_estimate: 2.0 * s.abs() * half.err_estimate,
        evaluations: half.evaluations,
        converged: half.converged,
    })
}

/// Direct real-line quadrature of `∫_R (1+it)^gamma H(t) dt` — the
/// independent oracle for [`contour_integral`].
pub fn real_line_integral(
    gamma: f64,
    h: &AnalyticFactor,
    spec: &QuadSpec,
) -> Result<IntegralResult> {
    h.validate()?;
    let qspec = QuadSpec {
        decay_exponent: h.decay_exponent(gamma),
        ..spec.clone()
    };
    integrate_real_line(|t| h.integrand(gamma, t), &qspec)
}

fn cross_check(
    label: &str,
    primary: IntegralResult,
    oracle: IntegralResult,
) -> Result<IntegralResult> {
    let diff = (primary.value - oracle.value).norm();
    let tol = 1e-9f64
        .max(1e-8 * primary.value.norm().max(oracle.value.norm()))
        .max(10.0 * (primary.err_estimate + oracle.err_estimate));
    if diff > tol {
        return Err(Error::Inconsistent(format!(
            "{label}: contour {} vs real line {} differ by {diff} (tol {tol})",
            primary.value, oracle.value
        )));
    }
    Ok(IntegralResult {
        value: primary.value,
        err_estimate: primary.err_estimate.max(diff),
        evaluations: primary.evaluations + oracle.evaluations,
        converged: primary.converged && oracle.converged,
    })
}

/// Evaluation route for the kernel profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileMethod {
    RealLine,
    Series,
}

fn profile_factor(cfg: &ExponentConfig, a: f64) -> (f64, AnalyticFactor) {
    let dm1 = f64::from(cfg.d() - 1);
    let beta = cfg.beta();
    let mut h = AnalyticFactor::powers(dm1 / 2.0 - beta, -dm1 / 2.0, cfg.q());
    h.gauss_a = a;
    (-beta, h)
}

/// The radial profile `I(a)` of the inverse-transformed Euler-Lagrange
/// kernel, evaluated at `a = |y|^2/2`, by real-line quadrature or by the
/// series expansion in the chosen case.
pub fn kernel_profile(
    a: f64,
    cfg: &ExponentConfig,
    method: ProfileMethod,
    spec: &QuadSpec,
) -> Result<IntegralResult> {
    if a < 0.0 {
        return Err(Error::domain(format!("profile argument a = {a} must be >= 0")));
    }
    match method {
        ProfileMethod::RealLine => {
            let (gamma, h) = profile_factor(cfg, a);
            real_line_integral(gamma, &h, spec)
        }
        ProfileMethod::Series => series_profile(a, cfg, spec),
    }
}

/// The coefficient `I_k` of the subcritical expansion
/// `e^a I(a) = sum_k a^k (q-2)^k I_k / k!`.
///
/// Both evaluation routes run whenever the contour identity applies
/// (`k - beta >= -1`); they are cross-asserted and the contour value is
/// returned. Below that threshold only the real-line route exists.
pub fn subcritical_coefficient(
    k: u32,
    cfg: &ExponentConfig,
    spec: &QuadSpec,
) -> Result<IntegralResult> {
    if cfg.case() != CriticalityCase::Subcritical {
        return Err(Error::domain(
            "subcritical series coefficients require p < 2".to_string(),
        ));
    }
    let dm1 = f64::from(cfg.d() - 1);
    let beta = cfg.beta();
    let alpha = f64::from(k) - beta;
    let h = AnalyticFactor::powers(dm1 / 2.0 - beta, -f64::from(k) - dm1 / 2.0, cfg.q());
    let oracle = real_line_integral(alpha, &h, spec)?;
    if alpha >= -1.0 - 1e-12 {
        let primary = contour_integral_inner(alpha, &h, spec, true)?;
        cross_check("subcritical coefficient", primary, oracle)
    } else {
        Ok(oracle)
    }
}

/// The coefficient `I'_k` of the supercritical expansion
/// `e^((p-1)a) I(a) = sum_k a^k I'_k / k!`, carrying the affine factor
/// `(pq - p - q + (q - p) it)^k`.
pub fn supercritical_coefficient(
    k: u32,
    cfg: &ExponentConfig,
    spec: &QuadSpec,
) -> Result<IntegralResult> {
    if cfg.case() != CriticalityCase::Supercritical {
        return Err(Error::domain(
            "supercritical series coefficients require p > 2".to_string(),
        ));
    }
    let dm1 = f64::from(cfg.d() - 1);
    let (p, q) = (cfg.p(), cfg.q());
    let beta = cfg.beta();
    let h = AnalyticFactor {
        exp_minus: dm1 / 2.0 - beta,
        exp_q: -f64::from(k) - dm1 / 2.0,
        q,
        gauss_a: 0.0,
        poly_k: k,
        poly_const: p * q - p - q,
        poly_it_coeff: q - p,
    };
    let primary = contour_integral(-beta, &h, spec)?;
    let oracle = real_line_integral(-beta, &h, spec)?;
    cross_check("supercritical coefficient", primary, oracle)
}

fn series_profile(a: f64, cfg: &ExponentConfig, spec: &QuadSpec) -> Result<IntegralResult> {
    let (x, weight): (f64, f64) = match cfg.case() {
        CriticalityCase::Critical => {
            return Err(Error::domain(
                "series evaluation needs a subcritical or supercritical config".to_string(),
            ))
        }
        CriticalityCase::Subcritical => ((cfg.q() - 2.0) * a, (-a).exp()),
        CriticalityCase::Supercritical => (a, (-(cfg.p() - 1.0) * a).exp()),
    };
    // The terms cancel against each other, so each coefficient is computed
    // a good margin tighter than the requested tolerance.
    let coeff_spec = QuadSpec {
        rel_tol: spec.rel_tol / 16.0,
        abs_tol: spec.abs_tol / 16.0,
        ..spec.clone()
    };
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut evaluations = 0u64;
    let mut coeffs_converged = true;
    let mut term_weight = 1.0; // x^k / k!
    let mut last_term: f64 = f64::INFINITY;
    let mut truncated = false;
    for k in 0..=SERIES_CAP {
        let coeff = match cfg.case() {
            CriticalityCase::Subcritical => subcritical_coefficient(k, cfg, &coeff_spec)?,
            _ => supercritical_coefficient(k, cfg, &coeff_spec)?,
        };
        let term = term_weight * coeff.value.re;
        sum += term;
        err += term_weight.abs() * coeff.err_estimate;
        evaluations += coeff.evaluations;
        coeffs_converged &= coeff.converged;
        let scale = sum.abs().max(1e-300);
        if f64::from(k) >= x && term.abs() <= 0.1 * spec.rel_tol * scale && last_term.abs() <= 0.1 * spec.rel_tol * scale
        {
            err += term.abs() + last_term.abs();
            truncated = true;
            break;
        }
        last_term = term;
        term_weight *= x / f64::from(k + 1);
    }
    let value = Complex::new(weight * sum, 0.0);
    let err_estimate = weight * err;
    let tol = spec.abs_tol.max(spec.rel_tol * value.norm());
    Ok(IntegralResult {
        value,
        err_estimate,
        evaluations,
        converged: truncated && coeffs_converged && err_estimate <= tol,
    })
}

/// The mixed-norm profile `J(a)` for an admissible pair, which the scaling
/// relation collapses to the `gamma = -1` shape. Both the fully general
/// exponent form and the collapsed form are integrated; disagreement
/// signals an exponent-algebra bug and is reported as an error.
pub fn mixed_kernel_profile(
    a: f64,
    pair: &AdmissiblePair,
    spec: &QuadSpec,
) -> Result<IntegralResult> {
    if a < 0.0 {
        return Err(Error::domain(format!("profile argument a = {a} must be >= 0")));
    }
    let dm1 = f64::from(pair.d() - 1);
    let q = pair.q();
    let gamma_full = -(pair.r() / (4.0 * q)) * dm1 * (q - 2.0);
    let mut h_full = AnalyticFactor::powers(gamma_full + dm1 / 2.0, -dm1 / 2.0, q);
    h_full.gauss_a = a;
    let full = real_line_integral(gamma_full, &h_full, spec)?;

    let mut h_reduced = AnalyticFactor::powers((dm1 - 2.0) / 2.0, -dm1 / 2.0, q);
    h_reduced.gauss_a = a;
    let reduced = real_line_integral(-1.0, &h_reduced, spec)?;

    let diff = (full.value - reduced.value).norm();
    let tol = 1e-9f64
        .max(1e-8 * reduced.value.norm())
        .max(10.0 * (full.err_estimate + reduced.err_estimate));
    if diff > tol {
        return Err(Error::Inconsistent(format!(
            "mixed profile exponent algebra: full {} vs reduced {} differ by {diff}",
            full.value, reduced.value
        )));
    }
    Ok(IntegralResult {
        value: reduced.value,
        err_estimate: reduced.err_estimate.max(diff),
        evaluations: full.evaluations + reduced.evaluations,
        converged: full.converged && reduced.converged,
    })
}

/// The closed form the profile collapses to at `p = 2`:
/// `2 pi 2^((d-3)/2) q^(-(d-1)/2) e^(-a)` with `q = 2(d+1)/(d-1)`.
pub fn critical_closed_form(a: f64, d: u32) -> f64 {
    let q = 2.0 * f64::from(d + 1) / f64::from(d - 1);
    pole_closed_form(a, d, q)
}

/// Same collapse for a mixed-norm pair, whose `q` need not equal `q(2,d)`.
pub fn mixed_closed_form(a: f64, pair: &AdmissiblePair) -> f64 {
    pole_closed_form(a, pair.d(), pair.q())
}

fn pole_closed_form(a: f64, d: u32, q: f64) -> f64 {
    let dm1 = f64::from(d - 1);
    2.0 * std::f64::consts::PI
        * 2.0f64.powf((dm1 - 2.0) / 2.0)
        * q.powf(-dm1 / 2.0)
        * (-a).exp()
}

/// The 25-case battery used to exercise the contour identity against the
/// real-line oracle: five exponents `gamma` crossed with five factor
/// shapes of increasing complexity (extra powers, exponential factors,
/// polynomial factors). Two cases are pinned to closed values:
/// `(gamma, k) = (-1, 0)` integrates to `2 pi / 3` and `(-1/2, 0)` to `pi`.
pub fn equivalence_suite_cases() -> Vec<(f64, u32, AnalyticFactor)> {
    let mut cases = Vec::with_capacity(25);
    for &gamma in &[-1.0f64, -0.75, -0.5, 0.25, 1.6] {
        for k in 0u32..5 {
            let h = if gamma == -1.0 && k == 0 {
                AnalyticFactor::powers(0.0, -1.0, 3.0)
            } else if gamma == -0.5 && k == 0 {
                AnalyticFactor::powers(0.0, -1.0, 4.0)
            } else {
                let poly_k = k.saturating_sub(2);
                AnalyticFactor {
                    exp_minus: -0.75 - 0.25 * f64::from(k),
                    exp_q: -1.0 - 0.25 * f64::from(k) - gamma.max(0.0) - f64::from(poly_k),
                    q: 3.0 + f64::from(k),
                    gauss_a: 0.3 * f64::from(k),
                    poly_k,
                    poly_const: 1.3,
                    poly_it_coeff: -0.7,
                }
            };
            cases.push((gamma, k, h));
        }
    }
    cases
}
