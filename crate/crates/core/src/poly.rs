//! Dense univariate polynomials with complex coefficients, stored in
//! ascending degree, plus the few real-coefficient helpers the scheme
//! constructors need.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial `sum_j coeffs[j] z^j`. Trailing zero coefficients are trimmed,
/// so the stored leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &root in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (j, &c) in coeffs.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= root * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == ZERO
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, j: usize| p.coeffs.get(j).copied().unwrap_or(ZERO);
        Self::new((0..n).map(|j| get(self, j) + get(other, j)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// All roots, from the eigenvalues of the balanced companion matrix.
    /// Constant polynomials have no roots.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        // exact zero roots are split off: a nilpotent companion block stalls the QR sweep
        let zeros = self.coeffs.iter().take_while(|&&c| c == ZERO).count();
        if zeros > 0 {
            let mut roots = Self::new(self.coeffs[zeros..].to_vec()).roots()?;
            roots.extend(std::iter::repeat_n(ZERO, zeros));
            return Ok(roots);
        }
        let lead = self.leading();
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }
        // Companion matrix of the monic polynomial: ones on the subdiagonal,
        // negated coefficients in the last column.
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        balance(&mut m);
        match Schur::try_new(m, f64::EPSILON, 10_000) {
            Some(schur) => {
                let (_, t) = schur.unpack();
                Ok((0..n).map(|i| t[(i, i)]).collect())
            }
            None => self.aberth_roots(),
        }
    }

    /// Simultaneous Aberth-Ehrlich iteration, used when the QR sweep fails.
    fn aberth_roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        let lead = self.leading();
        let monic: Vec<Complex64> = self.coeffs.iter().map(|&c| c / lead).collect();
        // Cauchy bound for the starting circle
        let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let radius = bound.min(
            monic[..n]
                .iter()
                .enumerate()
                .map(|(j, c)| c.norm().powf(1.0 / (n - j) as f64))
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE),
        );
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
            .collect();
        let deriv: Vec<Complex64> = (1..=n).map(|j| monic[j] * j as f64).collect();
        let horner = |c: &[Complex64], x: Complex64| c.iter().rev().fold(ZERO, |acc, &a| acc * x + a);
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let p = horner(&monic, z[i]);
                if p == ZERO {
                    continue;
                }
                let ratio = p / horner(&deriv, z[i]);
                let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                if !step.is_finite() {
                    continue;
                }
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
            if moved < 4.0 * f64::EPSILON {
                return Ok(z);
            }
        }
        if z.iter().all(|r| r.is_finite()) {
            Ok(z)
        } else {
            Err(Error::EigenSolverFailed)
        }
    }
}

/// Parlett-Reinsch diagonal balancing with powers of two, in place.
fn balance(m: &mut DMatrix<Complex64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].norm();
                    row += m[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut c = col;
            let mut r = row;
            while c < r / RADIX {
                c *= RADIX;
                r /= RADIX;
                f *= RADIX;
            }
            while c >= r * RADIX {
                c /= RADIX;
                r *= RADIX;
                f /= RADIX;
            }
            if (c + r) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Evaluate a real polynomial (ascending coefficients) at a complex point.
pub fn eval_real(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(ZERO, |acc, &c| acc * z + Complex64::new(c, 0.0))
}

/// Coefficients of `q(z) = p(z + s)` via repeated synthetic division (Horner shifts).
pub fn shift_argument(coeffs: &[f64], s: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += s * out[j + 1];
        }
    }
    out
}

/// Product of two real polynomials.
pub fn mul_real(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
