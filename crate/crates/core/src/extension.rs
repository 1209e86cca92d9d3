//! Radial Gaussians on the paraboloid and their Fourier extension.
//!
//! A density `f(y) = c exp(-z|y - y0|^2 + y.v)` with `Re z > 0` lives on
//! the paraboloid through the graph parametrisation; its extension is the
//! associated free Schroedinger evolution. For the standard Gaussian
//! (`c = 1`, `z = 1/2`, `y0 = 0`, `v = 0`) the extension has the closed
//! form
//!
//! ```text
//! u(x, t) = (2 pi)^((d-1)/2) (1 + it)^(-(d-1)/2) exp(-|x|^2 / (2 (1 + it)))
//! ```
//!
//! General parameters are never given an independent formula: they are
//! reached by transporting the standard Gaussian through the symmetry
//! group `f -> rho f(rAy + v) e^(i y.w)`, which keeps exactly one formula
//! under test. A direct tensor-product quadrature of the defining integral
//! serves as the oracle for that formula.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::branch::{branch_power, BranchFactor};
use crate::error::Error;
use crate::exponents::ExponentConfig;
use crate::quadrature::{integrate_finite, IntegralResult, QuadSpec};
use crate::{Complex64, Result};

/// Parameters `(c, z, y0, v)` of a radial Gaussian on the paraboloid:
/// `f(y) = c exp(-z |y - y0|^2 + y . v)` with `Re z > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianParams {
    pub c: Complex64,
    pub z: Complex64,
    pub y0: Vec<f64>,
    pub v: Vec<Complex64>,
}

impl GaussianParams {
    pub fn new(c: Complex64, z: Complex64, y0: Vec<f64>, v: Vec<Complex64>) -> Result<Self> {
        if c.norm() == 0.0 {
            return Err(Error::domain("gaussian amplitude c must be nonzero"));
        }
        if z.re <= 0.0 || z.re.is_nan() {
            return Err(Error::domain(format!(
                "gaussian width must have positive real part, got {z}"
            )));
        }
        if y0.len() != v.len() {
            return Err(Error::domain("center and modulation dimensions differ"));
        }
        Ok(GaussianParams { c, z, y0, v })
    }

    /// `f(y) = exp(-|y|^2 / 2)` in ambient dimension `d`.
    pub fn standard(d: u32) -> Self {
        let n = (d - 1) as usize;
        GaussianParams {
            c: Complex::new(1.0, 0.0),
            z: Complex::new(0.5, 0.0),
            y0: vec![0.0; n],
            v: vec![Complex::new(0.0, 0.0); n],
        }
    }

    /// Pointwise value of the density at `y`.
    pub fn eval(&self, y: &[f64]) -> Complex64 {
        let mut quad = 0.0;
        let mut lin = Complex64::new(0.0, 0.0);
        for ((yi, y0i), vi) in y.iter().zip(&self.y0).zip(&self.v) {
            let dy = yi - y0i;
            quad += dy * dy;
            lin += vi * *yi;
        }
        self.c * (-self.z * quad + lin).exp()
    }
}

/// An element `(rho, r, A, v, w)` of the symmetry group acting by
/// `f(y) -> rho f(rAy + v) e^(i y.w)` with `A` orthogonal.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryElement {
    pub rho: Complex64,
    pub r: f64,
    /// Row-major orthogonal `(d-1) x (d-1)` matrix.
    pub a: Vec<Vec<f64>>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl SymmetryElement {
    pub fn new(
        rho: Complex64,
        r: f64,
        a: Vec<Vec<f64>>,
        v: Vec<f64>,
        w: Vec<f64>,
    ) -> Result<Self> {
        if rho.norm() == 0.0 {
            return Err(Error::domain("scaling rho must be nonzero"));
        }
        if r <= 0.0 || r.is_nan() {
            return Err(Error::domain(format!("dilation r = {r} must be positive")));
        }
        let n = a.len();
        if a.iter().any(|row| row.len() != n) || v.len() != n || w.len() != n {
            return Err(Error::domain("symmetry element dimensions disagree"));
        }
        // A^T A = I within 1e-12.
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for row in &a {
                    dot += row[i] * row[j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > 1e-12 {
                    return Err(Error::domain("matrix A is not orthogonal within 1e-12"));
                }
            }
        }
        Ok(SymmetryElement { rho, r, a, v, w })
    }

    pub fn identity(d: u32) -> Self {
        let n = (d - 1) as usize;
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        SymmetryElement {
            rho: Complex::new(1.0, 0.0),
            r: 1.0,
            a,
            v: vec![0.0; n],
            w: vec![0.0; n],
        }
    }
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

fn mat_t_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j] * x[i]).sum()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Composition `second âˆ˜ first` (apply `first`, then `second`).
pub fn compose(second: &SymmetryElement, first: &SymmetryElement) -> SymmetryElement {
    let v2_dot_w1 = dot(&second.v, &first.w);
    let rho = first.rho * second.rho * Complex::new(0.0, v2_dot_w1).exp();
    let r = first.r * second.r;
    let a = mat_mul(&first.a, &second.a);
    let mut v = mat_vec(&first.a, &second.v);
    for (vi, f_vi) in v.iter_mut().zip(&first.v) {
        *vi = *vi * first.r + f_vi;
    }
    let mut w = mat_t_vec(&second.a, &first.w);
    for (wi, s_wi) in w.iter_mut().zip(&second.w) {
        *wi = *wi * second.r + s_wi;
    }
    SymmetryElement { rho, r, a, v, w }
}

/// Transports Gaussian parameters through a symmetry element: returns the
/// parameters of `y -> rho g(rAy + v) e^(i y.w)`, which is again a radial
/// Gaussian.
pub fn apply_symmetry(g: &GaussianParams, s: &SymmetryElement) -> GaussianParams {
    let z = g.z * (s.r * s.r);
    // y0' = A^T (y0 - v) / r
    let diff: Vec<f64> = g.y0.iter().zip(&s.v).map(|(y, v)| y - v).collect();
    let y0: Vec<f64> = mat_t_vec(&s.a, &diff).iter().map(|x| x / s.r).collect();
    // v' = r A^T v_g + i w, handled componentwise on real/imaginary parts.
    let re: Vec<f64> = g.v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = g.v.iter().map(|c| c.im).collect();
    let re_t = mat_t_vec(&s.a, &re);
    let im_t = mat_t_vec(&s.a, &im);
    let v: Vec<Complex64> = (0..re_t.len())
        .map(|i| Complex::new(s.r * re_t[i], s.r * im_t[i] + s.w[i]))
        .collect();
    // c' = rho c exp(v . v_g)
    let v_dot_vg: Complex64 = s
        .v
        .iter()
        .zip(&g.v)
        .map(|(x, c)| c * *x)
        .sum();
    let c = s.rho * g.c * v_dot_vg.exp();
    GaussianParams { c, z, y0, v }
}

/// Closed-form extension of the standard Gaussian at `(x, t)`:
/// `(2 pi)^((d-1)/2) (1 + it)^(-(d-1)/2) e^(-|x|^2 / 2(1+it))`.
pub fn extension_closed(x: &[f64], t: f64, d: u32) -> Complex64 {
    debug_assert_eq!(x.len(), (d - 1) as usize);
    let dm1 = f64::from(d - 1);
    let amp = (2.0 * std::f64::consts::PI).powf(dm1 / 2.0);
    let pow = branch_power(BranchFactor::OnePlusIt, t, -dm1 / 2.0);
    // -|x|^2 / (2 (1+it)) = -|x|^2 (1 - it) / (2 (1 + t^2))
    let scale = -norm_sq(x) / (2.0 * (1.0 + t * t));
    let exponent = Complex::new(scale, -scale * t);
    pow * exponent.exp() * amp
}

/// Direct tensor-product quadrature of the defining integral
/// `∫ e^(-i x.y) e^(-i t |y|^2 / 2) e^(-|y|^2 / 2) dy` over `R^(d-1)`.
///
/// This is the oracle for [`extension_closed`]; supported for `d <= 4`.
pub fn extension_direct(x: &[f64], t: f64, d: u32, spec: &QuadSpec) -> Result<IntegralResult> {
    if !(2..=4).contains(&d) {
        return Err(Error::domain(format!(
            "direct extension oracle supports d in 2..=4, got {d}"
        )));
    }
    if x.len() != (d - 1) as usize {
        return Err(Error::domain("x has wrong dimension"));
    }
    let half_width = 9.0;
    let evals = std::cell::Cell::new(0u64);
    let all_converged = std::cell::Cell::new(true);

    fn point(x: &[f64], t: f64, y: &[f64]) -> Complex64 {
        let ysq = norm_sq(y);
        let phase = -(dot(x, y) + 0.5 * t * ysq);
        Complex::new(-0.5 * ysq, phase).exp()
    }

    #[allow(clippy::too_many_arguments)]
    fn level(
        x: &[f64],
        t: f64,
        prefix: &[f64],
        half_width: f64,
        spec: &QuadSpec,
        evals: &std::cell::Cell<u64>,
        all_converged: &std::cell::Cell<bool>,
    ) -> (Complex64, f64) {
        let dims = x.len();
        let is_leaf = prefix.len() + 1 == dims;
        let inner_spec = QuadSpec {
            abs_tol: spec.abs_tol * 1e-3,
            rel_tol: spec.rel_tol * 0.1,
            ..spec.clone()
        };
        let use_spec = if prefix.is_empty() { spec } else { &inner_spec };
        if is_leaf {
            let r = integrate_finite(
                |y| {
                    evals.set(evals.get() + 1);
                    let mut p = prefix.to_vec();
                    p.push(y);
                    point(x, t, &p)
                },
                -half_width,
                half_width,
                use_spec,
            );
            if !r.converged {
                all_converged.set(false);
            }
            (r.value, r.err_estimate)
        } else {
            let child_err = std::cell::Cell::new(0.0f64);
            let r = integrate_finite(
                |y| {
                    let mut p = prefix.to_vec();
                    p.push(y);
                    let (v, e) = level(x, t, &p, half_width, spec, evals, all_converged);
                    child_err.set(child_err.get().max(e));
                    v
                },
                -half_width,
                half_width,
                use_spec,
            );
            if !r.converged {
                all_converged.set(false);
            }
            (r.value, r.err_estimate + 2.0 * half_width * child_err.get())
        }
    }

    let (value, err) = level(x, t, &[], half_width, spec, &evals, &all_converged);
    Ok(IntegralResult {
        value,
        err_estimate: err,
        evaluations: evals.get(),
        converged: all_converged.get(),
    })
}

/// The Euler-Lagrange nonlinearity `|u|^(q-2) u` applied to the standard
/// extension, in closed form:
/// `(2pi)^((q-1)(d-1)/2) (1+t^2)^(-(d-1)(q-2)/4) (1+it)^(-(d-1)/2)
///  e^(-|x|^2 (q-1-it) / 2(1+t^2))`.
pub fn el_kernel(x: &[f64], t: f64, cfg: &ExponentConfig) -> Complex64 {
    let d = cfg.d();
    let q = cfg.q();
    debug_assert_eq!(x.len(), (d - 1) as usize);
    let dm1 = f64::from(d - 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let amp = two_pi.powf((q - 1.0) * dm1 / 2.0);
    let alg = (1.0 + t * t).powf(-dm1 * (q - 2.0) / 4.0);
    let pow = branch_power(BranchFactor::OnePlusIt, t, -dm1 / 2.0);
    let scale = -norm_sq(x) / (2.0 * (1.0 + t * t));
    let exponent = Complex::new(scale * (q - 1.0), -scale * t);
    pow * exponent.exp() * (amp * alg)
}

/// Per-time-slice norm factor `||u(., t)||_{L^q_x}^{r-q}` of the standard
/// extension, in closed form.
pub fn slice_norm_power(t: f64, q: f64, r: f64, d: u32) -> f64 {
    let dm1 = f64::from(d - 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let prefactor = two_pi.powf((r - q) * dm1 * (1.0 + 1.0 / q) / 2.0)
        * q.powf(-dm1 * (r - q) / (2.0 * q));
    prefactor * (1.0 + t * t).powf(-dm1 * (r - q) * (q - 2.0) / (4.0 * q))
}

/// L^p norm of a radial Gaussian on the paraboloid, in closed form:
/// only the real parts of `z` and `v` contribute to `|f|`.
pub fn lp_norm(g: &GaussianParams, p: f64, d: u32) -> Result<f64> {
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::domain(format!("p = {p} must be positive and finite")));
    }
    let n = (d - 1) as usize;
    if g.y0.len() != n {
        return Err(Error::domain("gaussian dimension does not match d"));
    }
    let re_v: Vec<f64> = g.v.iter().map(|c| c.re).collect();
    let alpha = g.z.re;
    let exponent = dot(&g.y0, &re_v) + norm_sq(&re_v) / (4.0 * alpha);
    let gauss = (std::f64::consts::PI / (p * alpha)).powf(f64::from(d - 1) / (2.0 * p));
    Ok(g.c.norm() * exponent.exp() * gauss)
}

/// Solves for the symmetry element carrying the standard Gaussian onto
/// `g`, when one exists (real width, modulation-only imaginary drift).
/// Real drift is first absorbed into the center by completing the square.
pub fn symmetry_from_standard(g: &GaussianParams) -> Result<SymmetryElement> {
    if g.z.im.abs() > 1e-12 * g.z.norm() {
        return Err(Error::domain(
            "gaussian with complex width is not reachable from the standard one".to_string(),
        ));
    }
    let zr = g.z.re;
    let r = (2.0 * zr).sqrt();
    let n = g.y0.len();
    let re_v: Vec<f64> = g.v.iter().map(|c| c.re).collect();
    let w: Vec<f64> = g.v.iter().map(|c| c.im).collect();
    // Complete the square: y0' = y0 + Re v / (2 z), c' = c e^(z(|y0'|^2 - |y0|^2)).
    let y0p: Vec<f64> = (0..n).map(|i| g.y0[i] + re_v[i] / (2.0 * zr)).collect();
    let c = g.c * Complex::new(zr * (norm_sq(&y0p) - norm_sq(&g.y0)), 0.0).exp();
    let v: Vec<f64> = y0p.iter().map(|y| -r * y).collect();
    let mut ident = SymmetryElement::identity((n + 1) as u32);
    ident.rho = c;
    ident.r = r;
    ident.v = v;
    ident.w = w;
    Ok(ident)
}

/// Extension of the transported standard Gaussian, obtained by symmetry
/// transport of the closed form:
///
/// `E[s f](x, t) = rho r^(1-d) e^(i v.A(x-w)/r - i t |v|^2 / (2 r^2))
///                 E[f](A(x-w)/r - t v / r^2, t / r^2)`.
pub fn transported_extension(s: &SymmetryElement, x: &[f64], t: f64, d: u32) -> Complex64 {
    let r = s.r;
    let diff: Vec<f64> = x.iter().zip(&s.w).map(|(xi, wi)| xi - wi).collect();
    let a_diff = mat_vec(&s.a, &diff);
    let arg: Vec<f64> = a_diff
        .iter()
        .zip(&s.v)
        .map(|(ad, vi)| ad / r - t * vi / (r * r))
        .collect();
    let phase = dot(&s.v, &a_diff) / r - t * norm_sq(&s.v) / (2.0 * r * r);
    let base = extension_closed(&arg, t / (r * r), d);
    s.rho * Complex::new(0.0, phase).exp() * base * r.powi(1 - d as i32)
}

/// Extension of an arbitrary reachable Gaussian at `(x, t)`.
pub fn extension_of(g: &GaussianParams, x: &[f64], t: f64, d: u32) -> Result<Complex64> {
    let s = symmetry_from_standard(g)?;
    Ok(transported_extension(&s, x, t, d))
}

/// A random symmetry element with moderate parameters, for invariance
/// sweeps. The orthogonal part comes from Gram-Schmidt on a random matrix.
pub fn random_symmetry<R: Rng>(rng: &mut R, d: u32) -> SymmetryElement {
    let n = (d - 1) as usize;
    let a = loop {
        let raw: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        if let Some(q) = gram_schmidt(&raw) {
            break q;
        }
    };
    let modulus = rng.gen_range(0.5..2.0);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    SymmetryElement {
        rho: Complex::from_polar(modulus, angle),
        r: rng.gen_range(0.7..1.5),
        a,
        v: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        w: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    }
}

fn gram_schmidt(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for row in rows {
        let mut u = row.clone();
        for prev in &q {
            let proj = dot(&u, prev);
            for (ui, pi) in u.iter_mut().zip(prev) {
                *ui -= proj * pi;
            }
        }
        let norm = norm_sq(&u).sqrt();
        if norm < 1e-6 {
            return None;
        }
        for ui in u.iter_mut() {
            *ui /= norm;
        }
        q.push(u);
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_at_origin() {
        let v = extension_closed(&[0.0, 0.0], 0.0, 3);
        assert_relative_eq!(v.re, 2.0 * PI, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn closed_form_modulus_at_t1() {
        let v = extension_closed(&[0.0], 1.0, 2);
        let expected = (2.0 * PI).sqrt() * 2.0f64.powf(-0.25);
        assert_relative_eq!(v.norm(), expected, max_relative = 1e-13);
    }

    #[test]
    fn closed_form_is_radial() {
        let a = extension_closed(&[1.3, -0.4], 0.7, 3);
        let b = extension_closed(&[-1.3, 0.4], 0.7, 3);
        assert_relative_eq!(a.re, b.re, max_relative = 1e-15);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-15);
    }

    #[test]
    fn direct_oracle_matches_at_origin_d2() {
        let spec = QuadSpec::default();
        let r = extension_direct(&[0.0], 0.0, 2, &spec).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value.re, (2.0 * PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn direct_oracle_matches_closed_d2() {
        let spec = QuadSpec::default();
        let closed = extension_closed(&[1.0], 0.5, 2);
        let direct = extension_direct(&[1.0], 0.5, 2, &spec).unwrap();
        assert!(direct.converged);
        assert!((closed - direct.value).norm() < 1e-8);
    }

    #[test]
    fn direct_oracle_matches_closed_d3() {
        let spec = QuadSpec::default();
        let closed = extension_closed(&[1.0, 1.0], 2.0, 3);
        let direct = extension_direct(&[1.0, 1.0], 2.0, 3, &spec).unwrap();
        assert!(direct.converged);
        assert!((closed - direct.value).norm() < 1e-8);
    }

    #[test]
    fn direct_oracle_rejects_high_dimension() {
        assert!(extension_direct(&[0.0; 4], 0.0, 5, &QuadSpec::default()).is_err());
    }

    #[test]
    fn kernel_at_origin() {
        let cfg = ExponentConfig::new(2.0, 3).unwrap();
        let v = el_kernel(&[0.0, 0.0], 0.0, &cfg);
        let expected = (2.0 * PI).powf((cfg.q() - 1.0) * 1.0);
        assert_relative_eq!(v.re, expected, max_relative = 1e-13);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_at_t0() {
        let cfg = ExponentConfig::new(2.0, 2).unwrap();
        let x = [0.8];
        let v = el_kernel(&x, 0.0, &cfg);
        let expected =
            (2.0 * PI).powf((cfg.q() - 1.0) / 2.0) * (-0.32 * (cfg.q() - 1.0)).exp();
        assert_relative_eq!(v.re, expected, max_relative = 1e-13);
    }

    #[test]
    fn slice_norm_trivial_and_t0() {
        assert_eq!(slice_norm_power(1.7, 4.0, 4.0, 2), 1.0);
        let v = slice_norm_power(0.0, 4.0, 8.0, 2);
        let expected = (2.0 * PI).powf(4.0 * 1.25 / 2.0) * 4.0f64.powf(-0.5);
        assert_relative_eq!(v, expected, max_relative = 1e-13);
    }

    #[test]
    fn slice_norm_matches_quadrature() {
        // || u(., 1) ||_{L^4}^4 for d = 2 computed directly.
        let (q, r, d, t) = (4.0, 8.0, 2u32, 1.0);
        let spec = QuadSpec::with_decay(4.0);
        let integral = crate::quadrature::integrate_real_line(
            |x| {
                let u = extension_closed(&[x], t, d);
                Complex::new(u.norm().powf(q), 0.0)
            },
            &spec,
        )
        .unwrap();
        assert!(integral.converged);
        let closed = slice_norm_power(t, q, r, d);
        assert_relative_eq!(integral.value.re, closed, max_relative = 1e-8);
    }

    #[test]
    fn symmetry_identity_fixes_params() {
        let g = GaussianParams::standard(3);
        let s = SymmetryElement::identity(3);
        let h = apply_symmetry(&g, &s);
        assert_eq!(h.c, g.c);
        assert_eq!(h.z, g.z);
        assert_eq!(h.y0, g.y0);
        assert_eq!(h.v, g.v);
    }

    #[test]
    fn pure_modulation_shifts_v() {
        let g = GaussianParams::new(
            Complex::new(0.7, 0.1),
            Complex::new(0.8, 0.0),
            vec![0.3],
            vec![Complex::new(0.0, 0.2)],
        )
        .unwrap();
        let mut s = SymmetryElement::identity(2);
        s.w = vec![1.1];
        let h = apply_symmetry(&g, &s);
        assert_eq!(h.z, g.z);
        assert_eq!(h.y0, g.y0);
        assert_relative_eq!(h.v[0].im, 0.2 + 1.1, max_relative = 1e-15);
        assert_eq!(h.c, g.c);
    }

    #[test]
    fn pure_dilation_on_standard() {
        let g = GaussianParams::standard(2);
        let mut s = SymmetryElement::identity(2);
        s.r = 3.0;
        let h = apply_symmetry(&g, &s);
        assert_relative_eq!(h.z.re, 4.5, max_relative = 1e-15);
        assert_eq!(h.y0, vec![0.0]);
        assert_eq!(h.v[0], Complex::new(0.0, 0.0));
    }

    #[test]
    fn group_law_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2u32, 3, 4] {
            for _ in 0..20 {
                let s1 = random_symmetry(&mut rng, d);
                let s2 = random_symmetry(&mut rng, d);
                let g = GaussianParams::standard(d);
                let two_step = apply_symmetry(&apply_symmetry(&g, &s1), &s2);
                let composed = apply_symmetry(&g, &compose(&s2, &s1));
                assert!((two_step.c - composed.c).norm() <= 1e-12 * composed.c.norm());
                assert!((two_step.z - composed.z).norm() <= 1e-12 * composed.z.norm());
                for i in 0..two_step.y0.len() {
                    assert!((two_step.y0[i] - composed.y0[i]).abs() < 1e-12);
                    assert!((two_step.v[i] - composed.v[i]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lp_norm_standard() {
        let g = GaussianParams::standard(2);
        assert_relative_eq!(lp_norm(&g, 2.0, 2).unwrap(), PI.powf(0.25), max_relative = 1e-14);
        // d = 3: ||f||_2^2 = pi, so ||f||_2 = sqrt(pi).
        let g3 = GaussianParams::standard(3);
        assert_relative_eq!(lp_norm(&g3, 2.0, 3).unwrap(), PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn reachability_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let s = random_symmetry(&mut rng, 2);
            let g = apply_symmetry(&GaussianParams::standard(2), &s);
            let elem = symmetry_from_standard(&g).unwrap();
            let back = apply_symmetry(&GaussianParams::standard(2), &elem);
            assert!((back.c - g.c).norm() <= 1e-11 * g.c.norm().max(1.0));
            assert!((back.z - g.z).norm() <= 1e-12 * g.z.norm());
            assert!((back.y0[0] - g.y0[0]).abs() < 1e-11);
            assert!((back.v[0] - g.v[0]).norm() < 1e-11);
        }
    }

    #[test]
    fn unreachable_widths_are_rejected() {
        let g = GaussianParams::new(
            Complex::new(1.0, 0.0),
            Complex::new(0.5, 0.3),
            vec![0.0],
            vec![Complex::new(0.0, 0.0)],
        )
        .unwrap();
        assert!(symmetry_from_standard(&g).is_err());
    }

    #[test]
    fn transported_extension_matches_direct_quadrature() {
        // The transport formula must agree with brute-force integration of
        // the transported density itself.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = QuadSpec::default();
        for _ in 0..5 {
            let s = random_symmetry(&mut rng, 2);
            let g = apply_symmetry(&GaussianParams::standard(2), &s);
            for (x, t) in [(0.0, 0.0), (0.7, 0.4), (-1.1, 1.3)] {
                let transported = transported_extension(&s, &[x], t, 2);
                let brute = integrate_finite(
                    |y| {
                        let density = g.eval(&[y]);
                        let phase = -(x * y + 0.5 * t * y * y);
                        density * Complex::new(0.0, phase).exp()
                    },
                    -14.0,
                    14.0,
                    &spec,
                );
                assert!(brute.converged);
                assert!(
                    (transported - brute.value).norm() < 1e-8 * transported.norm().max(1.0),
                    "transport {transported} vs brute {}",
                    brute.value
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn modulus_law(xa in -3.0f64..3.0, t in -6.0f64..6.0, d in 2u32..5) {
            let n = (d - 1) as usize;
            let x = vec![xa; n];
            let v = extension_closed(&x, t, d);
            let dm1 = f64::from(d - 1);
            let expected = (2.0 * PI).powf(dm1 / 2.0)
                * (1.0 + t * t).powf(-dm1 / 4.0)
                * (-norm_sq(&x) / (2.0 * (1.0 + t * t))).exp();
            prop_assert!((v.norm() - expected).abs() <= 1e-13 * expected);
        }

        #[test]
        fn kernel_is_el_nonlinearity(xa in -2.0f64..2.0, t in -5.0f64..5.0) {
            let cfg = ExponentConfig::new(2.0, 2).unwrap();
            let x = [xa];
            let u = extension_closed(&x, t, 2);
            let expected = u * u.norm().powf(cfg.q() - 2.0);
            let kernel = el_kernel(&x, t, &cfg);
            prop_assert!(
                (kernel - expected).norm() <= 1e-12 * expected.norm(),
                "kernel {kernel} vs |u|^(q-2) u {expected}"
            );
        }
    }
}
