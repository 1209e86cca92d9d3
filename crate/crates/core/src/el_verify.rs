//! Criticality verdicts from constancy profiles.
//!
//! A radial Gaussian satisfies the Euler-Lagrange equation exactly when
//! the profile `R(a) = I(a) e^((p-1)a)` is constant in `a` (and, in the
//! mixed-norm case, when `J(a) e^a` is). The profile is sampled on an
//! `a`-grid, the candidate proportionality constant is the mean, and the
//! verdict is decided by the maximal relative deviation with a two-sided
//! threshold: below `tol_critical` is `Critical`, above
//! `tol_not_critical` is `NotCritical`, and the band in between — or any
//! quadrature trouble — is `Inconclusive` rather than a misclassified
//! noise artifact.

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{
    kernel_profile, mixed_kernel_profile, subcritical_coefficient, ProfileMethod,
};
use crate::error::Error;
use crate::exponents::{AdmissiblePair, CriticalityCase, ExponentConfig};
use crate::quadrature::QuadSpec;
use crate::{Complex64, Result};

/// Default geometric-fit tolerance for [`series_consistency`], relative to
/// the fitted leading coefficient.
pub const SERIES_FIT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Critical,
    NotCritical,
    Inconclusive,
}

/// Verdict thresholds. The two-threshold band keeps quadrature noise from
/// ever being read as a mathematical deviation.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileOptions {
    pub tol_critical: f64,
    pub tol_not_critical: f64,
    /// The proportionality constant of a genuine critical point is
    /// positive; enforce that before calling a profile Critical.
    pub require_positive_constant: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            tol_critical: 1e-6,
            tol_not_critical: 1e-4,
            require_positive_constant: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum ProfileSubject {
    Exponents(ExponentConfig),
    Pair(AdmissiblePair),
}

/// Constancy profile of `R(a)` over an `a`-grid with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub subject: ProfileSubject,
    pub a_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Mean of the profile — the candidate Euler-Lagrange constant.
    pub fitted_constant: f64,
    pub max_rel_deviation: f64,
    pub verdict: Verdict,
    /// False when any grid point's quadrature failed to self-certify.
    pub all_converged: bool,
    pub notes: Vec<String>,
}

/// Sign-and-ratio diagnostics of a series-coefficient family.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub cfg: ExponentConfig,
    pub ks: Vec<u32>,
    pub values: Vec<f64>,
    pub signs: Vec<i8>,
    /// The ratio a critical profile would force: `(2-p)/(q-2)`.
    pub ratio_target: f64,
    /// The ratio the best geometric fit actually uses, pinned by the
    /// first two coefficients.
    pub ratio_fit: f64,
    pub c_fit: Complex64,
    pub consistent: bool,
    pub first_violation_k: Option<u32>,
}

/// The default sweep `a = 0, 0.4, ..., 8` (21 points).
pub fn default_a_grid() -> Vec<f64> {
    (0..21).map(|i| 0.4 * f64::from(i)).collect()
}

fn validate_grid(a_grid: &[f64]) -> Result<()> {
    if a_grid.is_empty() {
        return Err(Error::domain("profile grid must be nonempty"));
    }
    for &a in a_grid {
        if !a.is_finite() || !(0.0..=10.0).contains(&a) {
            return Err(Error::domain(format!(
                "profile grid point a = {a} outside [0, 10]"
            )));
        }
    }
    Ok(())
}

fn assemble_report(
    subject: ProfileSubject,
    a_grid: &[f64],
    points: Vec<Result<(f64, ProfilePoint)>>,
    opts: &ProfileOptions,
) -> Result<ProfileReport> {
    let mut values = Vec::with_capacity(points.len());
    let mut notes = Vec::new();
    let mut sound = true;
    let mut all_converged = true;
    for res in points {
        let (a, point) = res?;
        if !point.converged {
            notes.push(format!("quadrature did not converge at a = {a}"));
            sound = false;
            all_converged = false;
        }
        if point.imag.abs() > 1e-10 * point.real.abs().max(1.0) {
            notes.push(format!(
                "profile at a = {a} has non-negligible imaginary part {}",
                point.imag
            ));
            sound = false;
        }
        values.push(point.real);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max_rel_deviation = values
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0f64, f64::max)
        / mean.abs().max(f64::MIN_POSITIVE);
    if opts.require_positive_constant && (mean <= 0.0 || mean.is_nan()) {
        notes.push(format!("fitted constant {mean} is not positive"));
        sound = false;
    }
    let verdict = if !sound {
        Verdict::Inconclusive
    } else if max_rel_deviation < opts.tol_critical {
        Verdict::Critical
    } else if max_rel_deviation > opts.tol_not_critical {
        Verdict::NotCritical
    } else {
        Verdict::Inconclusive
    };
    Ok(ProfileReport {
        subject,
        a_grid: a_grid.to_vec(),
        values,
        fitted_constant: mean,
        max_rel_deviation,
        verdict,
        all_converged,
        notes,
    })
}

struct ProfilePoint {
    real: f64,
    imag: f64,
    converged: bool,
}

/// Profile `R(a) = I(a) e^((p-1)a)` with verdict, default thresholds.
pub fn el_profile(cfg: &ExponentConfig, a_grid: &[f64], spec: &QuadSpec) -> Result<ProfileReport> {
    el_profile_with(cfg, a_grid, spec, &ProfileOptions::default())
}

pub fn el_profile_with(
    cfg: &ExponentConfig,
    a_grid: &[f64],
    spec: &QuadSpec,
    opts: &ProfileOptions,
) -> Result<ProfileReport> {
    validate_grid(a_grid)?;
    let p = cfg.p();
    let points: Vec<Result<(f64, ProfilePoint)>> = a_grid
        .par_iter()
        .map(|&a| {
            let r = kernel_profile(a, cfg, ProfileMethod::RealLine, spec)?;
            let weight = ((p - 1.0) * a).exp();
            Ok((
                a,
                ProfilePoint {
                    real: r.value.re * weight,
                    imag: r.value.im * weight,
                    converged: r.converged,
                },
            ))
        })
        .collect();
    assemble_report(ProfileSubject::Exponents(cfg.clone()), a_grid, points, opts)
}

/// Profile `R(a) = J(a) e^a` for an admissible pair, with verdict.
pub fn mixed_el_profile(
    pair: &AdmissiblePair,
    a_grid: &[f64],
    spec: &QuadSpec,
) -> Result<ProfileReport> {
    mixed_el_profile_with(pair, a_grid, spec, &ProfileOptions::default())
}

pub fn mixed_el_profile_with(
    pair: &AdmissiblePair,
    a_grid: &[f64],
    spec: &QuadSpec,
    opts: &ProfileOptions,
) -> Result<ProfileReport> {
    validate_grid(a_grid)?;
    let points: Vec<Result<(f64, ProfilePoint)>> = a_grid
        .par_iter()
        .map(|&a| {
            let r = mixed_kernel_profile(a, pair, spec)?;
            let weight = a.exp();
            Ok((
                a,
                ProfilePoint {
                    real: r.value.re * weight,
                    imag: r.value.im * weight,
                    converged: r.converged,
                },
            ))
        })
        .collect();
    assemble_report(ProfileSubject::Pair(pair.clone()), a_grid, points, opts)
}

/// Tests whether the subcritical coefficients form a geometric sequence.
///
/// A critical profile would force `I_k = c ((2-p)/(q-2))^k`. The check
/// gives the geometric model its best shot: `c` is fitted from `k = 0`
/// and the ratio from the first two coefficients, and the report records
/// where even that fit first breaks (for every subcritical configuration
/// it does — either the magnitudes leave the geometric envelope or the
/// signs start alternating).
pub fn series_consistency(
    cfg: &ExponentConfig,
    kmax: u32,
    spec: &QuadSpec,
) -> Result<SeriesReport> {
    if cfg.case() != CriticalityCase::Subcritical {
        return Err(Error::domain(
            "series consistency is defined for subcritical configurations".to_string(),
        ));
    }
    if kmax < cfg.k0() + 2 {
        return Err(Error::domain(format!(
            "kmax = {kmax} must be at least k0 + 2 = {}",
            cfg.k0() + 2
        )));
    }
    let mut values = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let r = subcritical_coefficient(k, cfg, spec)?;
        if !r.converged {
            return Err(Error::NonConvergence(format!(
                "series coefficient k = {k} did not converge"
            )));
        }
        values.push(r.value.re);
    }
    let scale = values.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let signs: Vec<i8> = values
        .iter()
        .map(|&v| {
            if v.abs() <= 1e-13 * scale {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let ratio_target = (2.0 - cfg.p()) / (cfg.q() - 2.0);
    let c = values[0];
    let ratio_fit = if c.abs() > 1e-300 {
        values[1] / c
    } else {
        ratio_target
    };
    let mut first_violation_k = None;
    let mut predicted = c;
    for (k, &v) in values.iter().enumerate() {
        if (v - predicted).abs() > SERIES_FIT_TOL * c.abs() {
            first_violation_k = Some(k as u32);
            break;
        }
        predicted *= ratio_fit;
    }
    Ok(SeriesReport {
        cfg: cfg.clone(),
        ks: (0..=kmax).collect(),
        values,
        signs,
        ratio_target,
        ratio_fit,
        c_fit: Complex64::new(c, 0.0),
        consistent: first_violation_k.is_none(),
        first_violation_k,
    })
}
