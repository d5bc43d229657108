//! Splittings `L = A + B` with `A` symmetric negative definite, their
//! generalized numerical ranges `W_p = W((-A)^(p/2-1) B (-A)^(-p/2))`, and
//! stability certification against the region of a scheme.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{
    boundary_locus, locus_point, member_unconditional, ComplexCurve, CurveMeta, CurveSource, ScaledStep,
    YSampling,
};
use crate::scheme::{build_scheme, ImExScheme};

/// Relative tolerance for symmetry and definiteness of `A`.
pub const SPLIT_TOL: f64 = 1e-12;
/// Default number of support angles for numerical ranges.
pub const DEFAULT_ANGLES: usize = 256;
/// Eigenvalues closer than this (relative) to the locus are not called violations.
pub const NECESSARY_DISTANCE_TOL: f64 = 1e-6;
const LOCUS_SAMPLES: usize = 8192;

/// A validated splitting. Keeps the eigendecomposition of `-A` for fractional powers.
#[derive(Debug, Clone)]
pub struct Splitting {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    neg_a_values: DVector<f64>,
    neg_a_vectors: DMatrix<f64>,
}

pub fn validate_splitting(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Splitting> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrices".into()));
    }
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    let scale = a.norm();
    let max_deviation = (&a - a.transpose()).amax();
    if max_deviation > SPLIT_TOL * scale {
        return Err(Error::Asymmetric { max_deviation });
    }
    let neg_sym = (&a + a.transpose()) * -0.5;
    let eig = SymmetricEigen::try_new(neg_sym, f64::EPSILON, 0).ok_or(Error::EigenSolverFailed)?;
    let smallest = eig.eigenvalues.min();
    let spectral = eig.eigenvalues.amax();
    if !(smallest > SPLIT_TOL * spectral) {
        return Err(Error::NotNegativeDefinite {
            largest_eigenvalue: -smallest,
        });
    }
    Ok(Splitting {
        a,
        b,
        neg_a_values: eig.eigenvalues,
        neg_a_vectors: eig.eigenvectors,
    })
}

impl Splitting {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The full operator `L = A + B`.
    pub fn l(&self) -> DMatrix<f64> {
        &self.a + &self.b
    }

    /// Eigenvalues of `-A`, all positive.
    pub fn neg_a_eigenvalues(&self) -> &DVector<f64> {
        &self.neg_a_values
    }

    /// `(-A)^q` through the stored eigendecomposition.
    pub fn neg_a_power(&self, q: f64) -> DMatrix<f64> {
        let v = &self.neg_a_vectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.neg_a_values[j].powf(q);
        }
        scaled * v.transpose()
    }

    /// `(-A)^(p/2-1) B (-A)^(-p/2)`, whose numerical range is `W_p`.
    pub fn weighted_operator(&self, p: f64) -> DMatrix<f64> {
        self.neg_a_power(0.5 * p - 1.0) * &self.b * self.neg_a_power(-0.5 * p)
    }
}

/// Sampled boundary of a numerical range by Johnson's support-point method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeBoundary {
    /// The exponent when this is `W_p`; `None` for a plain `W(X)`.
    pub p: Option<f64>,
    /// Support points in angle order. Consecutive duplicates are dropped, so a
    /// degenerate range (a point) has a single sample.
    pub curve: ComplexCurve,
    pub support_angles: Vec<f64>,
    /// `lambda_max` of the Hermitian part of `e^{i theta} X` per angle.
    pub support_values: Vec<f64>,
}

impl RangeBoundary {
    pub fn points(&self) -> &[Complex64] {
        &self.curve.points
    }

    /// Vertices plus the midpoints of the inscribed polygon's edges.
    pub fn test_points(&self) -> Vec<Complex64> {
        let pts = &self.curve.points;
        let n = pts.len();
        let mut out = pts.clone();
        if n > 1 {
            out.extend((0..n).map(|i| 0.5 * (pts[i] + pts[(i + 1) % n])));
        }
        out
    }

    /// Membership in the circumscribed polygon cut out by the support lines
    /// `Re(e^{i theta} z) <= lambda_max(theta)`, with absolute slack `tol`.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.support_angles
            .iter()
            .zip(&self.support_values)
            .all(|(&t, &h)| (Complex64::from_polar(1.0, t) * z).re <= h + tol)
    }

    /// Largest real part over the support points.
    pub fn rightmost(&self) -> f64 {
        self.curve.points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every turn of the sampled polygon is counterclockwise up to `tol`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let pts = &self.curve.points;
        let n = pts.len();
        if n < 3 {
            return true;
        }
        let scale = pts.iter().map(|z| z.norm()).fold(1.0, f64::max);
        (0..n).all(|i| {
            let e1 = pts[(i + 1) % n] - pts[i];
            let e2 = pts[(i + 2) % n] - pts[(i + 1) % n];
            (e1.conj() * e2).im >= -tol * scale * scale
        })
    }
}

fn support_point(x: &DMatrix<Complex64>, theta: f64) -> Result<(Complex64, f64)> {
    let rot = x * Complex64::from_polar(1.0, theta);
    let herm = (&rot + rot.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 0).ok_or(Error::EigenSolverFailed)?;
    let (imax, &lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EigenSolverFailed)?;
    let v = eig.eigenvectors.column(imax);
    let point = v.dotc(&(x * v));
    Ok((point, lmax))
}

/// Boundary of `W(X)` from support points at `n_angles` uniform angles.
///
/// With `e^{i theta} W` rotated so its rightmost extent is `lambda_max`, the top
/// eigenvector `v` of the Hermitian part gives the boundary point `v* X v`.
pub fn numerical_range_boundary(x: &DMatrix<Complex64>, n_angles: usize) -> Result<RangeBoundary> {
    if n_angles < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 angles, got {n_angles}")));
    }
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", x.nrows(), x.ncols())));
    }
    let angles: Vec<f64> = (0..n_angles)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64)
        .collect();
    #[cfg(feature = "parallel")]
    let support: Vec<(Complex64, f64)> = {
        use rayon::prelude::*;
        angles.par_iter().map(|&t| support_point(x, t)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let support: Vec<(Complex64, f64)> = angles.iter().map(|&t| support_point(x, t)).collect::<Result<_>>()?;

    // Support points at angle theta maximize Re(e^{i theta} z), which walks the
    // boundary clockwise; reverse for a counterclockwise polygon.
    let mut samples: Vec<(f64, Complex64)> = angles.iter().copied().zip(support.iter().map(|s| s.0)).collect();
    samples.reverse();
    let mut curve = ComplexCurve::new(
        samples,
        true,
        CurveMeta {
            source: CurveSource::NumericalRange,
            param_range: (0.0, 2.0 * std::f64::consts::PI),
            y: None,
            skipped: Vec::new(),
        },
    );
    // the first and last samples coincide when the range is a point
    while curve.points.len() > 1 && curve.points.first() == curve.points.last() {
        curve.points.pop();
        curve.params.pop();
    }
    Ok(RangeBoundary {
        p: None,
        curve,
        support_angles: angles,
        support_values: support.into_iter().map(|s| s.1).collect(),
    })
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// The generalized numerical range `W_p` of a splitting.
pub fn wp_set(split: &Splitting, p: f64, n_angles: usize) -> Result<RangeBoundary> {
    if !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be finite, got {p}")));
    }
    let mut range = numerical_range_boundary(&to_complex(&split.weighted_operator(p)), n_angles)?;
    range.p = Some(p);
    Ok(range)
}

/// Eigenvalues `mu` of `mu (-A) u = B u`, via the similar matrix
/// `(-A)^(-1/2) B (-A)^(-1/2)`.
pub fn generalized_spectrum(split: &Splitting) -> Result<Vec<Complex64>> {
    let m = split.weighted_operator(1.0);
    let schur = Schur::try_new(m, f64::EPSILON, 0).ok_or(Error::EigenSolverFailed)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    CertifiedSufficient,
    ViolatesNecessary,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub status: VerdictStatus,
    /// A `W_p` test point outside the region, or a generalized eigenvalue
    /// outside the region and its boundary.
    pub witness: Option<Complex64>,
    pub p_used: f64,
    pub delta: Option<f64>,
    pub r: usize,
    pub n_angles: usize,
    /// Number of `W_p` vertices and edge midpoints tested.
    pub points_tested: usize,
}

/// Certify a delta-family scheme of order `r`.
pub fn certify(split: &Splitting, r: usize, delta: f64, p: f64, n_angles: usize) -> Result<StabilityVerdict> {
    certify_scheme(split, &build_scheme(r, delta)?, p, n_angles)
}

/// Sufficient test: every `W_p` test point lies in the region. Necessary test:
/// no generalized eigenvalue lies strictly outside the region and away from
/// `Gamma_-inf`. Neither conclusive gives `Inconclusive`.
pub fn certify_scheme(split: &Splitting, scheme: &ImExScheme, p: f64, n_angles: usize) -> Result<StabilityVerdict> {
    let range = wp_set(split, p, n_angles)?;
    let points = range.test_points();
    let sampling = YSampling::default();
    let mut verdict = StabilityVerdict {
        status: VerdictStatus::CertifiedSufficient,
        witness: None,
        p_used: p,
        delta: scheme.delta(),
        r: scheme.order(),
        n_angles,
        points_tested: points.len(),
    };
    let outside: Vec<Complex64> = points
        .iter()
        .copied()
        .filter(|&z| !member_unconditional(z, scheme, &sampling).member)
        .collect();
    if outside.is_empty() {
        return Ok(verdict);
    }

    let locus = boundary_locus(ScaledStep::NegInfinity, scheme, LOCUS_SAMPLES)?;
    let scale = locus_point(Complex64::new(-1.0, 0.0), ScaledStep::NegInfinity, scheme)
        .map_or(1.0, |m| m.norm().max(1.0));
    let violation = generalized_spectrum(split)?.into_iter().find(|&mu| {
        !crate::region::member_infinite(mu, scheme) && locus.distance_to(mu) > NECESSARY_DISTANCE_TOL * scale
    });
    if let Some(mu) = violation {
        verdict.status = VerdictStatus::ViolatesNecessary;
        verdict.witness = Some(mu);
        return Ok(verdict);
    }

    // the worst excursion is the one farthest from the boundary curve
    let worst = outside
        .into_iter()
        .map(|z| (z, locus.distance_to(z)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(z, _)| z);
    verdict.status = VerdictStatus::Inconclusive;
    verdict.witness = worst;
    Ok(verdict)
}

/// Descending grid `{m * step : m = floor(1/step), ..., 1}` in `(0, 1]`.
pub fn delta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step must lie in (0, 1], got {step}")));
    }
    let top = (1.0 / step + 1e-9).floor() as usize;
    Ok((1..=top).rev().map(|m| m as f64 * step).collect())
}

/// Largest grid value of delta whose `W_p` passes the sufficient test.
/// `W_p` does not depend on delta, so it is computed once.
pub fn largest_stable_delta(
    split: &Splitting,
    r: usize,
    p: f64,
    delta_grid: &[f64],
    n_angles: usize,
) -> Result<Option<f64>> {
    let points = wp_set(split, p, n_angles)?.test_points();
    for &delta in delta_grid {
        let scheme = build_scheme(r, delta)?;
        if points.iter().all(|&z| crate::region::member_infinite(z, &scheme)) {
            return Ok(Some(delta));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar() -> Splitting {
        validate_splitting(dmatrix![-1.0], dmatrix![-9.0]).unwrap()
    }

    #[test]
    fn validation_cases() {
        assert!(validate_splitting(dmatrix![-1.0], dmatrix![-9.0]).is_ok());
        assert!(matches!(
            validate_splitting(dmatrix![1.0], dmatrix![-9.0]),
            Err(Error::NotNegativeDefinite { .. })
        ));
        let s = validate_splitting(dmatrix![-2.0, 1.0; 1.0, -2.0], dmatrix![0.3, 5.0; -1.0, 2.0]).unwrap();
        let mut ev: Vec<f64> = s.neg_a_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!(matches!(
            validate_splitting(dmatrix![-2.0, 1.0; 0.0, -2.0], dmatrix![0.0, 0.0; 0.0, 0.0]),
            Err(Error::Asymmetric { .. })
        ));
        assert!(matches!(
            validate_splitting(dmatrix![-1.0], dmatrix![1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn fractional_powers_compose() {
        let s = validate_splitting(dmatrix![-2.0, 1.0; 1.0, -3.0], dmatrix![0.0, 0.0; 0.0, 0.0]).unwrap();
        let half = s.neg_a_power(0.5);
        assert!((&half * &half + s.a()).amax() < 1e-14);
        let inv = s.neg_a_power(-1.0);
        assert!((inv * -s.a() - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn scalar_range_is_a_point() {
        for p in [0.5, 1.0, 2.0] {
            let w = wp_set(&scalar(), p, 64).unwrap();
            assert_eq!(w.points().len(), 1);
            assert!((w.points()[0] + 9.0).norm() < 1e-14);
        }
        let spec = generalized_spectrum(&scalar()).unwrap();
        assert!((spec[0] + 9.0).norm() < 1e-14);
    }

    #[test]
    fn hermitian_range_is_a_segment() {
        let x = to_complex(&dmatrix![-3.0, 0.0; 0.0, -1.0]);
        let w = numerical_range_boundary(&x, 64).unwrap();
        for z in w.points() {
            assert!(z.im.abs() < 1e-12 && z.re >= -3.0 - 1e-12 && z.re <= -1.0 + 1e-12);
        }
    }

    #[test]
    fn nilpotent_range_is_a_disk() {
        let x = to_complex(&dmatrix![0.0, 2.0; 0.0, 0.0]);
        let w = numerical_range_boundary(&x, 128).unwrap();
        let max = w.points().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-6);
        assert!(w.is_convex(1e-10));
    }

    #[test]
    fn scalar_certification() {
        let s = scalar();
        assert_eq!(certify(&s, 5, 0.04, 1.0, 64).unwrap().status, VerdictStatus::CertifiedSufficient);
        let v = certify(&s, 5, 1.0, 1.0, 64).unwrap();
        assert_eq!(v.status, VerdictStatus::ViolatesNecessary);
        assert!((v.witness.unwrap() + 9.0).norm() < 1e-12);
    }

    #[test]
    fn largest_delta_scalar() {
        let s = scalar();
        let d = largest_stable_delta(&s, 5, 1.0, &delta_grid(0.002).unwrap(), 64).unwrap().unwrap();
        assert!((0.040..0.0417).contains(&d), "{d}");
        let d = largest_stable_delta(&s, 1, 1.0, &delta_grid(0.005).unwrap(), 64).unwrap().unwrap();
        assert!(d < 0.2 && d > 0.19, "{d}");
        let trivial = validate_splitting(dmatrix![-1.0], dmatrix![0.0]).unwrap();
        assert_eq!(largest_stable_delta(&trivial, 3, 1.0, &delta_grid(0.01).unwrap(), 64).unwrap(), Some(1.0));
    }

    #[test]
    fn grid_is_descending_multiples() {
        let g = delta_grid(0.002).unwrap();
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 1.0);
        assert!((g[480] - 0.04).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }
}
