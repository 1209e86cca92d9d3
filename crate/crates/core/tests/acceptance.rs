//! Acceptance suite: every numbered criterion as one test with one
//! pass/fail line, pinned tolerances throughout.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use parext::contour::{
    contour_integral, kernel_profile, real_line_integral, subcritical_coefficient, ProfileMethod,
};
use parext::el_verify::{
    default_a_grid, el_profile, mixed_el_profile, series_consistency, Verdict, SERIES_FIT_TOL,
};
use parext::exponents::{check_admissible, dual_exponent, ExponentConfig};
use parext::extension::{
    apply_symmetry, extension_closed, extension_direct, random_symmetry, GaussianParams,
};
use parext::mixed_norm::{
    default_eps_list, direction_dictionary, remainder_slope, restriction_derivative_on,
    restriction_functional_on, SampledField, SpaceTimeGrid,
};
use parext::quadrature::QuadSpec;
use parext::Complex64;

struct Checker {
    name: &'static str,
    failures: Vec<String>,
}

impl Checker {
    fn new(name: &'static str) -> Self {
        Checker {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.failures.push(msg.into());
        }
    }

    fn check_rel(&mut self, got: f64, want: f64, tol: f64, label: &str) {
        let ok = (got - want).abs() <= tol * want.abs().max(f64::MIN_POSITIVE);
        self.check(ok, format!("{label}: got {got}, want {want} (rel tol {tol})"));
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("criterion {}: PASS", self.name);
        } else {
            println!("criterion {}: FAIL", self.name);
            for f in &self.failures {
                println!("    - {f}");
            }
            panic!("criterion {} failed with {} problem(s)", self.name, self.failures.len());
        }
    }
}

fn admissible(r: f64, q: f64, d: u32) -> Option<parext::exponents::AdmissiblePair> {
    check_admissible(r, q, d).unwrap().accepted()
}

#[test]
fn criterion_01_critical_profile_constant() {
    let mut c = Checker::new("1 (p = 2 criticality constant)");
    let spec = QuadSpec::default();
    let grid = default_a_grid();
    for d in [2u32, 3, 4, 5] {
        let cfg = ExponentConfig::new(2.0, d).unwrap();
        let report = el_profile(&cfg, &grid, &spec).unwrap();
        c.check(
            report.max_rel_deviation < 1e-8,
            format!("d = {d}: deviation {} >= 1e-8", report.max_rel_deviation),
        );
        let q = dual_exponent(2.0, d).unwrap();
        let want = 2.0 * PI * 2.0f64.powf((f64::from(d) - 3.0) / 2.0) * q.powf(-(f64::from(d) - 1.0) / 2.0);
        c.check_rel(report.fitted_constant, want, 1e-8, &format!("d = {d} constant"));
        if d == 3 {
            c.check_rel(report.fitted_constant, PI / 2.0, 1e-8, "d = 3 constant is pi/2");
        }
        c.check(
            report.verdict == Verdict::Critical,
            format!("d = {d}: verdict {:?}", report.verdict),
        );
    }
    c.finish();
}

#[test]
fn criterion_02_noncritical_profiles_deviate() {
    let mut c = Checker::new("2 (p != 2 non-criticality)");
    let spec = QuadSpec::default();
    let grid = default_a_grid();
    for (d, p) in [
        (2u32, 1.25),
        (2, 1.5),
        (2, 1.75),
        (2, 2.25),
        (2, 2.5),
        (3, 1.5),
        (3, 2.2),
    ] {
        let cfg = ExponentConfig::new(p, d).unwrap();
        let report = el_profile(&cfg, &grid, &spec).unwrap();
        c.check(
            report.max_rel_deviation > 1e-3,
            format!("(d, p) = ({d}, {p}): deviation {} <= 1e-3", report.max_rel_deviation),
        );
        c.check(
            report.verdict == Verdict::NotCritical,
            format!("(d, p) = ({d}, {p}): verdict {:?}", report.verdict),
        );
    }
    c.finish();
}

#[test]
fn criterion_03_mixed_norm_criticality() {
    let mut c = Checker::new("3 (mixed-norm criticality)");
    let spec = QuadSpec::default();
    let grid = default_a_grid();
    // The non-admissible candidate must be filtered out by the gate.
    c.check(
        admissible(6.0, 3.0, 4).is_none(),
        "(d, q, r) = (4, 3, 6) slipped through admissibility".to_string(),
    );
    for (d, q, r) in [(3u32, 4.0, 4.0), (2, 6.0, 6.0), (2, 4.0, 8.0)] {
        let Some(pair) = admissible(r, q, d) else {
            c.check(false, format!("pair ({d}, {q}, {r}) unexpectedly rejected"));
            continue;
        };
        let report = mixed_el_profile(&pair, &grid, &spec).unwrap();
        c.check(
            report.verdict == Verdict::Critical && report.max_rel_deviation < 1e-8,
            format!(
                "(d, q, r) = ({d}, {q}, {r}): verdict {:?}, deviation {}",
                report.verdict, report.max_rel_deviation
            ),
        );
        if d == 3 {
            c.check_rel(report.fitted_constant, PI / 2.0, 1e-8, "(3, 4, 4) constant");
        }
    }
    c.finish();
}

#[test]
fn criterion_04_contour_identity_suite() {
    let mut c = Checker::new("4 (contour identity equivalence suite)");
    let spec = QuadSpec::default();
    let mut cases = 0;
    {
        for (gamma, k, h) in parext::contour::equivalence_suite_cases() {
            cases += 1;
            let ct = contour_integral(gamma, &h, &spec).unwrap();
            let rl = real_line_integral(gamma, &h, &spec).unwrap();
            c.check(rl.converged && ct.converged, format!("(gamma={gamma}, k={k}) non-convergence"));
            let diff = (ct.value - rl.value).norm();
            let scale = ct.value.norm().max(rl.value.norm()).max(1.0);
            c.check(
                diff <= 1e-8 * scale,
                format!(
                    "(gamma={gamma}, k={k}): contour {} vs real line {} differ by {diff}",
                    ct.value, rl.value
                ),
            );
            if gamma == -1.0 && k == 0 {
                c.check_rel(ct.value.re, 2.0 * PI / 3.0, 1e-10, "closed case 2 pi / 3");
            }
            if gamma == -0.5 && k == 0 {
                c.check_rel(ct.value.re, PI, 1e-9, "closed case pi");
            }
        }
    }
    c.check(cases == 25, format!("expected 25 cases, ran {cases}"));
    c.finish();
}

#[test]
fn criterion_05_series_coefficients() {
    let mut c = Checker::new("5 (series coefficients)");
    let spec = QuadSpec::default();

    // Integer-beta family: d = 3, p = 3/2 has beta = 2.
    let cfg = ExponentConfig::new(1.5, 3).unwrap();
    let i1 = subcritical_coefficient(1, &cfg, &spec).unwrap();
    c.check_rel(i1.value.re, PI / 36.0, 1e-9, "I_1 = pi/36");
    for k in [2u32, 3, 4] {
        let ik = subcritical_coefficient(k, &cfg, &spec).unwrap();
        c.check(
            ik.value.norm() < 1e-10 * i1.value.norm(),
            format!("I_{k} = {} not below 1e-10 |I_1|", ik.value),
        );
    }

    // Alternating family: d = 2, p = 3/2.
    let cfg2 = ExponentConfig::new(1.5, 2).unwrap();
    let report = series_consistency(&cfg2, 12, &spec).unwrap();
    for k in 2..12usize {
        c.check(
            report.signs[k] * report.signs[k + 1] == -1,
            format!("signs at k = {k}, {} do not alternate", k + 1),
        );
    }
    c.check(
        report.first_violation_k == Some(2),
        format!("geometric fit first breaks at {:?}, want k = 2", report.first_violation_k),
    );
    let c_fit = report.c_fit.re;
    let predicted = c_fit * report.ratio_fit * report.ratio_fit;
    let residual = (report.values[2] - predicted).abs();
    c.check(
        residual > 10.0 * SERIES_FIT_TOL * c_fit.abs(),
        format!("k = 2 residual {residual} not above 10x tolerance"),
    );
    c.check(!report.consistent, "report claims consistency".to_string());
    c.finish();
}

#[test]
fn criterion_06_series_reconstruction() {
    let mut c = Checker::new("6 (series vs quadrature reconstruction)");
    let spec = QuadSpec::default();
    let cfg = ExponentConfig::new(1.5, 2).unwrap();
    for a in [0.25, 0.5, 1.0] {
        let series = kernel_profile(a, &cfg, ProfileMethod::Series, &spec).unwrap();
        let line = kernel_profile(a, &cfg, ProfileMethod::RealLine, &spec).unwrap();
        c.check(series.converged && line.converged, format!("a = {a} non-convergence"));
        let diff = (series.value - line.value).norm();
        c.check(
            diff <= 1e-7 * line.value.norm(),
            format!("a = {a}: series {} vs line {}", series.value, line.value),
        );
    }
    c.finish();
}

#[test]
fn criterion_07_extension_oracle() {
    let mut c = Checker::new("7 (extension closed form vs direct oracle)");
    let spec = QuadSpec::default();
    for d in [2u32, 3] {
        for s in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let mut x = vec![0.0; (d - 1) as usize];
            x[0] = s;
            for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
                let closed = extension_closed(&x, t, d);
                let direct = extension_direct(&x, t, d, &spec).unwrap();
                c.check(direct.converged, format!("d={d}, |x|={s}, t={t}: non-convergence"));
                let diff = (closed - direct.value).norm();
                c.check(
                    diff < 1e-8,
                    format!("d={d}, |x|={s}, t={t}: |closed - direct| = {diff}"),
                );
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_08_first_variation_slopes() {
    let mut c = Checker::new("8 (first-variation remainder slopes)");
    let grid = Arc::new(SpaceTimeGrid::default_for(2));
    let f = SampledField::gaussian_extension(grid.clone(), &GaussianParams::standard(2)).unwrap();
    let wide = GaussianParams {
        c: Complex::new(1.0, 0.0),
        z: Complex::new(1.0, 0.0),
        y0: vec![0.0],
        v: vec![Complex64::new(0.0, 0.0)],
    };
    let g = SampledField::gaussian_extension(grid, &wide).unwrap();
    let mags = [1e-2, 3e-3, 1e-3, 3e-4];
    let report = remainder_slope(&f, &g, 4.0, 8.0, &mags).unwrap();
    c.check(
        report.fitted_slope > 1.15,
        format!("slope {} not above 1.15", report.fitted_slope),
    );
    let self_report = remainder_slope(&f, &f, 4.0, 8.0, &mags).unwrap();
    c.check(
        (1.9..=2.1).contains(&self_report.fitted_slope),
        format!("self slope {} outside [1.9, 2.1]", self_report.fitted_slope),
    );
    c.finish();
}

#[test]
fn criterion_09_functional_value_and_invariance() {
    let mut c = Checker::new("9 (functional value and symmetry invariance)");
    let cfg = ExponentConfig::new(2.0, 2).unwrap();
    let grid = Arc::new(SpaceTimeGrid::default_for(2));
    let standard = GaussianParams::standard(2);
    let phi = restriction_functional_on(grid.clone(), &standard, &cfg).unwrap();
    let exact = (2.0 * PI).powi(3) / 3.0f64.sqrt();
    c.check_rel(phi, exact, 1e-6, "Phi(standard)");

    let mut rng = ChaCha8Rng::seed_from_u64(20260811);
    for i in 0..10 {
        let s = random_symmetry(&mut rng, 2);
        let transported = apply_symmetry(&standard, &s);
        let phi_s = restriction_functional_on(grid.clone(), &transported, &cfg).unwrap();
        c.check(
            (phi_s - phi).abs() <= 1e-6 * phi,
            format!("element {i}: Phi moved from {phi} to {phi_s}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_10_directional_derivatives() {
    let mut c = Checker::new("10 (directional derivatives both ways)");
    let grid = Arc::new(SpaceTimeGrid::default_for(2));
    let g = GaussianParams::standard(2);
    let eps = default_eps_list();

    let critical = ExponentConfig::new(2.0, 2).unwrap();
    for (i, dir) in direction_dictionary().iter().enumerate() {
        let est = restriction_derivative_on(grid.clone(), &g, dir, &critical, &eps).unwrap();
        c.check(
            est.real_dir.abs() < 3e-6 * est.phi && est.imag_dir.abs() < 3e-6 * est.phi,
            format!(
                "p = 2 direction {i}: dPhi = ({}, {}) vs 3e-6 Phi = {}",
                est.real_dir,
                est.imag_dir,
                3e-6 * est.phi
            ),
        );
    }

    let subcritical = ExponentConfig::new(1.5, 2).unwrap();
    let best = direction_dictionary()
        .iter()
        .map(|dir| {
            let est = restriction_derivative_on(grid.clone(), &g, dir, &subcritical, &eps).unwrap();
            est.real_dir.abs().max(est.imag_dir.abs()) / est.phi
        })
        .fold(0.0f64, f64::max);
    c.check(
        best > 1e-3,
        format!("p = 1.5: largest relative derivative {best} not above 1e-3"),
    );
    c.finish();
}

#[test]
fn criterion_11_exponent_algebra() {
    let mut c = Checker::new("11 (exponent algebra properties)");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 1000 {
        let d = 2 + (rand::Rng::gen_range(&mut rng, 0..5u32));
        let upper = 2.0 * f64::from(d) / f64::from(d - 1);
        let p = 1.0 + rand::Rng::gen_range(&mut rng, 1e-6..1.0 - 1e-6) * (upper - 1.0);
        let Ok(cfg) = ExponentConfig::new(p, d) else {
            continue; // convergence guard near the upper endpoint
        };
        tested += 1;
        let dm1 = f64::from(d - 1);
        let recovered = dm1 * cfg.q() / (dm1 * cfg.q() - f64::from(d + 1));
        c.check(
            (recovered - p).abs() <= 1e-12 * p,
            format!("round trip (d={d}, p={p}) gave {recovered}"),
        );
    }
    for d in 2u32..=6 {
        let upper = 2.0 * f64::from(d) / f64::from(d - 1);
        let mut prev = f64::INFINITY;
        for i in 1..=300 {
            let p = 1.0 + (upper - 1.0) * f64::from(i) / 302.0;
            if let Ok(q) = dual_exponent(p, d) {
                c.check(q < prev, format!("monotonicity fails at d={d}, p={p}"));
                prev = q;
            }
        }
        // Diagonal Strichartz case coincides with p = 2.
        let q = dual_exponent(2.0, d).unwrap();
        c.check(
            admissible(q, q, d).is_some(),
            format!("diagonal pair rejected for d = {d}"),
        );
    }
    c.finish();
}
