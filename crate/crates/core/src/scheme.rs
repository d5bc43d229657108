//! ImEx linear multistep coefficient sets.
//!
//! A scheme advances `u' = A u + B u + f` by
//!
//! ```text
//! (1/k) sum_j a_j u_{n+j} = sum_j ( c_j A u_{n+j} + b_j B u_{n+j} + b_j f_{n+j} )
//! ```
//!
//! with `b_s = 0` (explicit in `B`) and `a_s, c_s != 0` (implicit in `A`).
//! All schemes here have as many steps as their order and a monic `c(z)`.
//!
//! The delta family is fixed by `c(z) = (z - 1 + delta)^r`; the remaining
//! polynomials follow from the order conditions: `b(z) = c(z) - (z - 1)^r` and
//! `a(z)` is the degree-`r` Taylor polynomial of `ln(z) c(z)` about `z = 1`.
//! `delta = 1` is the classical SBDF family.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{binomial, eval_real, factorial, mul_real, shift_argument, ComplexPolynomial};

pub const MAX_ORDER: usize = 5;

/// Unit-circle tolerance for the zero-stability root condition.
pub const ZERO_STABILITY_TOL: f64 = 1e-9;
/// Distance below which two roots of `a(z)` count as one repeated root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImExScheme {
    order: usize,
    delta: Option<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ImExScheme {
    /// Generic scheme from raw coefficient vectors of length `r + 1`.
    /// All three are rescaled so that `c` is monic.
    pub fn from_coefficients(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if n < 2 || a.len() != n || b.len() != n {
            return Err(Error::InvalidCoefficients(format!(
                "coefficient vectors must share a length >= 2 (got a={}, b={}, c={})",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|x| !x.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        let s = n - 1;
        if b[s] != 0.0 {
            return Err(Error::InvalidCoefficients("b_s must be zero".into()));
        }
        if a[s] == 0.0 || c[s] == 0.0 {
            return Err(Error::InvalidCoefficients("a_s and c_s must be nonzero".into()));
        }
        let lead = c[s];
        let norm = |v: Vec<f64>| v.into_iter().map(|x| x / lead).collect::<Vec<_>>();
        Ok(Self {
            order: s,
            delta: None,
            a: norm(a),
            b: norm(b),
            c: norm(c),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Step count; equals the order for every scheme built here.
    pub fn steps(&self) -> usize {
        self.order
    }

    /// The family parameter, present only for delta-family schemes.
    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn is_delta_family(&self) -> bool {
        self.delta.is_some() && self.order <= MAX_ORDER
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn eval_a(&self, z: Complex64) -> Complex64 {
        eval_real(&self.a, z)
    }

    pub fn eval_b(&self, z: Complex64) -> Complex64 {
        eval_real(&self.b, z)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        eval_real(&self.c, z)
    }

    pub fn a_poly(&self) -> ComplexPolynomial {
        ComplexPolynomial::from_real(&self.a)
    }

    pub fn b_poly(&self) -> ComplexPolynomial {
        ComplexPolynomial::from_real(&self.b)
    }

    pub fn c_poly(&self) -> ComplexPolynomial {
        ComplexPolynomial::from_real(&self.c)
    }

    /// Coefficients `(q_a, q_b, q_c)` of `p(z) / z^s` in powers of
    /// `v = 1 - 1/z`, the backward-difference form of each polynomial.
    ///
    /// For the delta family these come straight from
    /// `c(z) / z^r = (delta + (1 - delta) v)^r`, so sums such as `q_c[0] = c(1)`
    /// keep full relative accuracy even when `delta^r` is tiny.
    pub fn backward_coefficients(&self) -> [Vec<f64>; 3] {
        let s = self.steps();
        match self.delta {
            Some(d) => {
                let r = self.order;
                let qc: Vec<f64> = (0..=r)
                    .map(|m| binomial(r, m) * d.powi((r - m) as i32) * (1.0 - d).powi(m as i32))
                    .collect();
                let mut qb = qc.clone();
                qb[r] = ((r as f64) * (-d).ln_1p()).exp_m1();
                let log_series: Vec<f64> =
                    (0..=r).map(|m| if m == 0 { 0.0 } else { 1.0 / m as f64 }).collect();
                let mut qa = mul_real(&log_series, &qc);
                qa.truncate(r + 1);
                [qa, qb, qc]
            }
            None => [&self.a, &self.b, &self.c].map(|p| {
                (0..=s)
                    .map(|m| {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        sign * p.iter().enumerate().map(|(j, pj)| pj * binomial(s - j, m)).sum::<f64>()
                    })
                    .collect()
            }),
        }
    }
}

fn check_order(r: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&r) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange(r))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

/// Builds `(a, b, c)` from the coefficients of `c` expressed in powers of
/// `w = z - 1`. `c_shifted` must be monic of degree `r`.
fn from_shifted_c(c_shifted: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let r = c_shifted.len() - 1;
    // ln(1 + w) = sum_{m >= 1} (-1)^{m+1} w^m / m, truncated at degree r.
    let log_series: Vec<f64> = (0..=r)
        .map(|m| match m {
            0 => 0.0,
            m if m % 2 == 1 => 1.0 / m as f64,
            m => -1.0 / m as f64,
        })
        .collect();
    let mut a_shifted = mul_real(&log_series, c_shifted);
    a_shifted.truncate(r + 1);

    let mut b_shifted = c_shifted.to_vec();
    // subtract w^r; leading term cancels exactly since c is monic
    b_shifted[r] = 0.0;

    let a = shift_argument(&a_shifted, -1.0);
    let mut b = shift_argument(&b_shifted, -1.0);
    let c = shift_argument(c_shifted, -1.0);
    b[r] = 0.0;
    (a, b, c)
}

/// Delta-family scheme of order `r` built from the Taylor-series construction.
pub fn build_scheme(r: usize, delta: f64) -> Result<ImExScheme> {
    check_order(r)?;
    check_delta(delta)?;
    // (w + delta)^r in powers of w
    let c_shifted: Vec<f64> = (0..=r)
        .map(|j| binomial(r, j) * delta.powi((r - j) as i32))
        .collect();
    let (a, b, c) = from_shifted_c(&c_shifted);
    Ok(ImExScheme {
        order: r,
        delta: Some(delta),
        a,
        b,
        c,
    })
}

/// Delta-family scheme from the closed-form coefficient tables (polynomials in delta).
pub fn tabulated_scheme(r: usize, delta: f64) -> Result<ImExScheme> {
    check_order(r)?;
    check_delta(delta)?;
    let d = delta;
    let d2 = d * d;
    let d3 = d2 * d;
    let d4 = d3 * d;
    let d5 = d4 * d;
    let m = d - 1.0;
    let (a, b, c) = match r {
        1 => (vec![-d, d], vec![d, 0.0], vec![m, 1.0]),
        2 => (
            vec![2.0 * d - 1.5 * d2, -4.0 * d + 2.0 * d2, 2.0 * d - 0.5 * d2],
            vec![m * m - 1.0, 2.0 * d, 0.0],
            vec![m * m, 2.0 * m, 1.0],
        ),
        3 => (
            vec![
                -3.0 * d + 4.5 * d2 - 11.0 / 6.0 * d3,
                9.0 * d - 10.5 * d2 + 3.0 * d3,
                -9.0 * d + 7.5 * d2 - 1.5 * d3,
                3.0 * d - 1.5 * d2 + d3 / 3.0,
            ],
            vec![m.powi(3) + 1.0, -6.0 * d + 3.0 * d2, 3.0 * d, 0.0],
            vec![m.powi(3), 3.0 * m * m, 3.0 * m, 1.0],
        ),
        4 => (
            vec![
                4.0 * d - 9.0 * d2 + 22.0 / 3.0 * d3 - 25.0 / 12.0 * d4,
                -16.0 * d + 30.0 * d2 - 58.0 / 3.0 * d3 + 4.0 * d4,
                24.0 * d - 36.0 * d2 + 18.0 * d3 - 3.0 * d4,
                -16.0 * d + 18.0 * d2 - 22.0 / 3.0 * d3 + 4.0 / 3.0 * d4,
                4.0 * d - 3.0 * d2 + 4.0 / 3.0 * d3 - 0.25 * d4,
            ],
            vec![
                m.powi(4) - 1.0,
                12.0 * d - 12.0 * d2 + 4.0 * d3,
                -12.0 * d + 6.0 * d2,
                4.0 * d,
                0.0,
            ],
            vec![m.powi(4), 4.0 * m.powi(3), 6.0 * m * m, 4.0 * m, 1.0],
        ),
        5 => (
            vec![
                -5.0 * d + 15.0 * d2 - 55.0 / 3.0 * d3 + 125.0 / 12.0 * d4 - 137.0 / 60.0 * d5,
                25.0 * d - 65.0 * d2 + 200.0 / 3.0 * d3 - 365.0 / 12.0 * d4 + 5.0 * d5,
                -50.0 * d + 110.0 * d2 - 280.0 / 3.0 * d3 + 35.0 * d4 - 5.0 * d5,
                50.0 * d - 90.0 * d2 + 190.0 / 3.0 * d3 - 65.0 / 3.0 * d4 + 10.0 / 3.0 * d5,
                -25.0 * d + 35.0 * d2 - 65.0 / 3.0 * d3 + 95.0 / 12.0 * d4 - 1.25 * d5,
                5.0 * d - 5.0 * d2 + 10.0 / 3.0 * d3 - 1.25 * d4 + 0.2 * d5,
            ],
            vec![
                m.powi(5) + 1.0,
                -20.0 * d + 30.0 * d2 - 20.0 * d3 + 5.0 * d4,
                30.0 * d - 30.0 * d2 + 10.0 * d3,
                -20.0 * d + 10.0 * d2,
                5.0 * d,
                0.0,
            ],
            vec![
                m.powi(5),
                5.0 * m.powi(4),
                10.0 * m.powi(3),
                10.0 * m * m,
                5.0 * m,
                1.0,
            ],
        ),
        _ => unreachable!(),
    };
    Ok(ImExScheme {
        order: r,
        delta: Some(delta),
        a,
        b,
        c,
    })
}

/// Generic order-`r` scheme whose monic `c(z)` has the given roots.
/// The root set must be closed under conjugation and lie in the closed unit disk.
pub fn scheme_from_c_roots(roots: &[Complex64]) -> Result<ImExScheme> {
    let r = roots.len();
    check_order(r)?;
    for z in roots {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + 1e-12 {
            return Err(Error::RootOutsideUnitDisk { re: z.re, im: z.im });
        }
    }
    if !conjugate_closed(roots, 1e-10) {
        return Err(Error::RootsNotConjugateClosed);
    }
    let shifted: Vec<Complex64> = roots.iter().map(|z| z - 1.0).collect();
    let c_shifted: Vec<f64> = ComplexPolynomial::from_roots(&shifted)
        .coeffs()
        .iter()
        .map(|z| z.re)
        .collect();
    let (a, b, c) = from_shifted_c(&c_shifted);
    Ok(ImExScheme {
        order: r,
        delta: None,
        a,
        b,
        c,
    })
}

fn conjugate_closed(roots: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let z = roots[i];
        if z.im.abs() <= tol {
            used[i] = true;
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| j != i && !used[j])
            .find(|&j| (roots[j] - z.conj()).norm() <= tol * z.norm().max(1.0));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Maximum violation over the `2r + 1` linear order conditions
/// `sum a_j = 0` and `sum j^q/q! a_j = sum j^(q-1)/(q-1)! c_j = sum j^(q-1)/(q-1)! b_j`
/// for `q = 1..=r`.
pub fn order_condition_residual(scheme: &ImExScheme) -> f64 {
    let r = scheme.order();
    let moment = |v: &[f64], q: usize| -> f64 {
        v.iter()
            .enumerate()
            .map(|(j, x)| x * (j as f64).powi(q as i32))
            .sum::<f64>()
            / factorial(q)
    };
    let mut worst = moment(scheme.a(), 0).abs();
    for q in 1..=r {
        let lhs = moment(scheme.a(), q);
        worst = worst.max((lhs - moment(scheme.c(), q - 1)).abs());
        worst = worst.max((lhs - moment(scheme.b(), q - 1)).abs());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStability {
    pub stable: bool,
    pub roots: Vec<Complex64>,
}

/// Root condition on `a(z)`: simple roots in the closed unit disk, repeated
/// roots strictly inside.
pub fn zero_stability(scheme: &ImExScheme) -> Result<ZeroStability> {
    let roots = a_roots(scheme.a())?;
    let stable = roots.iter().enumerate().all(|(i, z)| {
        let repeated = roots
            .iter()
            .enumerate()
            .any(|(j, w)| j != i && (z - w).norm() < ROOT_CLUSTER_TOL);
        if repeated {
            z.norm() < 1.0 - ZERO_STABILITY_TOL
        } else {
            z.norm() <= 1.0 + ZERO_STABILITY_TOL
        }
    });
    Ok(ZeroStability { stable, roots })
}

/// Roots of `a(z)`. Consistent schemes have `a(1) = 0`; that root is split off
/// exactly because its conditioning degrades like `1/c(1) = delta^-r`.
fn a_roots(a: &[f64]) -> Result<Vec<Complex64>> {
    let scale: f64 = a.iter().map(|x| x.abs()).sum();
    let at_one: f64 = a.iter().sum();
    if a.len() < 2 || at_one.abs() > 1e-12 * scale {
        return ComplexPolynomial::from_real(a).roots();
    }
    let n = a.len() - 1;
    let mut q = vec![0.0; n];
    q[n - 1] = a[n];
    for j in (1..n).rev() {
        q[j - 1] = a[j] + q[j];
    }
    let mut roots = ComplexPolynomial::from_real(&q).roots()?;
    roots.push(Complex64::new(1.0, 0.0));
    Ok(roots)
}

/// Leading-order error constants of the implicit (`B = 0`) and explicit
/// (`A = 0`) halves of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorConstants {
    pub implicit: f64,
    pub explicit: f64,
    /// Defect of the implicit pair `(a, c)` in the `(r+1)`-th order condition.
    pub implicit_defect: f64,
    /// Defect of the explicit pair `(a, b)` in the `(r+1)`-th order condition.
    pub explicit_defect: f64,
}

pub fn error_constants(scheme: &ImExScheme) -> Result<ErrorConstants> {
    let r = scheme.order();
    let defect = |other: &[f64]| -> f64 {
        let s: f64 = (0..=r)
            .map(|j| {
                let jf = j as f64;
                scheme.a()[j] * jf.powi(r as i32 + 1) - (r as f64 + 1.0) * other[j] * jf.powi(r as i32)
            })
            .sum();
        s / factorial(r + 1)
    };
    let implicit_defect = defect(scheme.c());
    let explicit_defect = defect(scheme.b());
    // c(1) = b(1) = delta^r exactly for the delta family; summing the
    // coefficients loses digits to cancellation when delta is small.
    let (c1, b1) = match scheme.delta() {
        Some(d) => (d.powi(r as i32), d.powi(r as i32)),
        None => (scheme.c().iter().sum(), scheme.b().iter().sum()),
    };
    let scale = scheme.c().iter().map(|x| x.abs()).fold(0.0, f64::max);
    if c1.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateErrorConstant("c"));
    }
    if b1.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateErrorConstant("b"));
    }
    Ok(ErrorConstants {
        implicit: implicit_defect / c1,
        explicit: explicit_defect / b1,
        implicit_defect,
        explicit_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn backward_coefficients_match_generic_path() {
        for r in 1..=MAX_ORDER {
            for d in [0.05, 0.3, 1.0] {
                let s = build_scheme(r, d).unwrap();
                let exact = s.backward_coefficients();
                let generic = ImExScheme::from_coefficients(s.a().to_vec(), s.b().to_vec(), s.c().to_vec())
                    .unwrap()
                    .backward_coefficients();
                for (e, g) in exact.iter().zip(&generic) {
                    assert_vec_close(e, g, 1e-11);
                }
                // c(1) = b(1) = a'(1) = delta^r
                let dr = d.powi(r as i32);
                assert!((exact[2][0] / dr - 1.0).abs() < 1e-14);
                assert!((exact[1][0] / dr - 1.0).abs() < 1e-14);
                assert!((exact[0][1] / dr - 1.0).abs() < 1e-14);
                assert_eq!(exact[0][0], 0.0);
            }
        }
    }

    #[test]
    fn second_order_implicit_constant_for_double_root() {
        // c = (z - 1 + d)^2 built from its roots; the implicit error constant
        // reduces to (-1 + d - d^2 / 3) / d^2.
        for d in [0.1, 0.5, 1.0, 1.5, 1.9] {
            let sigma = Complex64::new(1.0 - d, 0.0);
            let s = scheme_from_c_roots(&[sigma, sigma]).unwrap();
            let got = error_constants(&s).unwrap().implicit;
            let want = (-1.0 + d - d * d / 3.0) / (d * d);
            assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "d={d}: {got} vs {want}");
        }
        let sbdf2 = error_constants(&build_scheme(2, 1.0).unwrap()).unwrap();
        assert!((sbdf2.implicit + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn euler_pair() {
        let s = build_scheme(1, 1.0).unwrap();
        assert_vec_close(s.a(), &[-1.0, 1.0], 1e-15);
        assert_vec_close(s.c(), &[0.0, 1.0], 1e-15);
        assert_vec_close(s.b(), &[1.0, 0.0], 1e-15);
    }

    #[test]
    fn sbdf2() {
        let s = build_scheme(2, 1.0).unwrap();
        assert_vec_close(s.a(), &[0.5, -2.0, 1.5], 1e-14);
        assert_vec_close(s.c(), &[0.0, 0.0, 1.0], 1e-15);
        assert_vec_close(s.b(), &[-1.0, 2.0, 0.0], 1e-15);
    }

    #[test]
    fn order_three_leading_a() {
        let s = build_scheme(3, 0.5).unwrap();
        let d: f64 = 0.5;
        assert!((s.a()[3] - (3.0 * d - 1.5 * d * d + d.powi(3) / 3.0)).abs() < 1e-14);
        assert!((s.a()[3] - 1.166_666_666_666_666_7).abs() < 1e-14);
    }

    #[test]
    fn tabulated_low_orders() {
        let d = 0.37;
        let s = tabulated_scheme(1, d).unwrap();
        assert_vec_close(s.a(), &[-d, d], 0.0);
        assert_vec_close(s.c(), &[d - 1.0, 1.0], 0.0);
        assert_vec_close(s.b(), &[d, 0.0], 0.0);
        let s = tabulated_scheme(2, d).unwrap();
        assert_vec_close(
            s.a(),
            &[2.0 * d - 1.5 * d * d, -4.0 * d + 2.0 * d * d, 2.0 * d - 0.5 * d * d],
            1e-15,
        );
    }

    #[test]
    fn constructors_agree_at_sbdf5() {
        let a = build_scheme(5, 1.0).unwrap();
        let b = tabulated_scheme(5, 1.0).unwrap();
        assert_vec_close(a.a(), b.a(), 1e-12);
        assert_vec_close(a.b(), b.b(), 1e-12);
        assert_vec_close(a.c(), b.c(), 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(build_scheme(0, 0.5), Err(Error::OrderOutOfRange(0)));
        assert_eq!(build_scheme(6, 0.5), Err(Error::OrderOutOfRange(6)));
        assert_eq!(build_scheme(2, 0.0), Err(Error::DeltaOutOfRange(0.0)));
        assert_eq!(tabulated_scheme(2, 1.5), Err(Error::DeltaOutOfRange(1.5)));
        assert!(build_scheme(2, f64::NAN).is_err());
    }

    #[test]
    fn repeated_root_matches_family() {
        let d = 0.3;
        for r in 1..=5 {
            let roots = vec![Complex64::new(1.0 - d, 0.0); r];
            let g = scheme_from_c_roots(&roots).unwrap();
            let f = build_scheme(r, d).unwrap();
            assert_vec_close(g.a(), f.a(), 1e-12);
            assert_vec_close(g.b(), f.b(), 1e-12);
            assert_vec_close(g.c(), f.c(), 1e-12);
            assert_eq!(g.delta(), None);
        }
    }

    #[test]
    fn complex_pair_b_coefficients() {
        // (z - s)(z - conj s) - (z - 1)^2 = (2 - 2 Re s) z - (1 - |s|^2)
        let s = Complex64::new(0.9, 0.1);
        let scheme = scheme_from_c_roots(&[s, s.conj()]).unwrap();
        assert_vec_close(scheme.b(), &[-0.18, 0.2, 0.0], 1e-14);
        assert_eq!(scheme.b()[2], 0.0);
    }

    #[test]
    fn root_set_validation() {
        let s = Complex64::new(0.5, 0.2);
        assert_eq!(
            scheme_from_c_roots(&[s, s]),
            Err(Error::RootsNotConjugateClosed)
        );
        assert!(matches!(
            scheme_from_c_roots(&[Complex64::new(1.2, 0.0), Complex64::new(0.5, 0.0)]),
            Err(Error::RootOutsideUnitDisk { .. })
        ));
    }

    #[test]
    fn residual_small_and_linear_in_perturbation() {
        assert!(order_condition_residual(&build_scheme(3, 0.3).unwrap()) <= 1e-12);
        assert!(order_condition_residual(&build_scheme(5, 0.04).unwrap()) <= 1e-10);
        let s = ImExScheme::from_coefficients(
            vec![0.5 + 1e-3, -2.0, 1.5],
            vec![-1.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!((order_condition_residual(&s) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn from_coefficients_normalizes_and_validates() {
        let s = ImExScheme::from_coefficients(vec![-2.0, 2.0], vec![2.0, 0.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(s.c(), &[0.0, 1.0]);
        assert_eq!(s.a(), &[-1.0, 1.0]);
        assert!(ImExScheme::from_coefficients(vec![-1.0, 1.0], vec![1.0, 0.5], vec![0.0, 1.0]).is_err());
        assert!(ImExScheme::from_coefficients(vec![-1.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_stability_examples() {
        let z = zero_stability(&build_scheme(2, 1.0).unwrap()).unwrap();
        assert!(z.stable);
        let mut moduli: Vec<f64> = z.roots.iter().map(|r| r.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        assert!((moduli[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((moduli[1] - 1.0).abs() < 1e-12);

        for d in [0.01, 0.5, 1.0] {
            let z = zero_stability(&build_scheme(1, d).unwrap()).unwrap();
            assert!(z.stable);
            assert_eq!(z.roots.len(), 1);
            assert!((z.roots[0] - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn double_root_on_circle_is_not_zero_stable() {
        // a(z) = (z - 1)^2 with compatible b, c
        let s = ImExScheme::from_coefficients(
            vec![1.0, -2.0, 1.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!(!zero_stability(&s).unwrap().stable);
    }

    #[test]
    fn backward_euler_error_constant() {
        let e = error_constants(&build_scheme(1, 1.0).unwrap()).unwrap();
        assert!((e.implicit_defect + 0.5).abs() < 1e-15);
        assert!((e.implicit + 0.5).abs() < 1e-15);
    }

    #[test]
    fn error_constants_scale_like_delta_power() {
        for r in 1..=5 {
            for d in [0.05, 0.3, 1.0] {
                let e = error_constants(&build_scheme(r, d).unwrap()).unwrap();
                let dr = d.powi(r as i32);
                assert!((e.implicit * dr - e.implicit_defect).abs() < 1e-9 * e.implicit_defect.abs().max(1.0));
                assert!((e.explicit * dr - e.explicit_defect).abs() < 1e-9 * e.explicit_defect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn error_constant_requires_nonzero_c1() {
        let s = scheme_from_c_roots(&[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)]).unwrap();
        assert_eq!(error_constants(&s), Err(Error::DegenerateErrorConstant("c")));
    }
}
