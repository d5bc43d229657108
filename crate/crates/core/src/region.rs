//! Unconditional-stability regions.
//!
//! For a scheme `(a, b, c)` and a mode with generalized-range value `mu` and
//! scaled step `y < 0`, the normal-mode ansatz gives the model equation
//!
//! ```text
//! a(zeta) = y c(zeta) - y mu b(zeta)
//! ```
//!
//! `D_y` is the set of `mu` for which every root satisfies `|zeta| < 1`;
//! `D_-inf` is the same for `c(zeta) - mu b(zeta)`. The unconditional region
//! `D` is the intersection over all `y`, and equals `D_-inf` for the delta
//! family (orders 1..=5).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;
use crate::scheme::{build_scheme, ImExScheme, MAX_ORDER};

/// Roots with modulus in `[1 - tol, 1 + tol]` are reported as boundary cases.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Locus points whose denominator `|b(z)|` falls below this are skipped.
pub const LOCUS_SKIP_TOL: f64 = 1e-13;
const DEGREE_DROP_TOL: f64 = 1e-13;
const EXTRA_ENDPOINT_SAMPLES: usize = 16;

/// The scaled time-step variable `y = -k <v,(-A)^p v> / <v,(-A)^(p-1) v>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScaledStep {
    Finite(f64),
    NegInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionQueryPoint {
    pub mu: Complex64,
    pub y: ScaledStep,
}

impl RegionQueryPoint {
    pub fn new(mu: Complex64, y: ScaledStep) -> Result<Self> {
        if let ScaledStep::Finite(y) = y {
            if !(y < 0.0) || !y.is_finite() {
                return Err(Error::InvalidArgument(format!("y must be negative, got {y}")));
            }
        }
        Ok(Self { mu, y })
    }

    pub fn classify(&self, scheme: &ImExScheme) -> Result<RootReport> {
        match self.y {
            ScaledStep::NegInfinity => classify_infinite(self.mu, scheme),
            ScaledStep::Finite(y) => classify_finite(self.mu, y, scheme),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootLocation {
    /// Every root strictly inside the unit circle (with margin).
    Inside,
    /// Largest root modulus within the tolerance band around 1.
    Boundary,
    /// Some root outside, or a root at infinity from degree drop.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub location: RootLocation,
    /// Largest root modulus; infinite when the leading coefficient cancels.
    pub max_modulus: f64,
}

fn classify_roots(poly: &ComplexPolynomial, expected_degree: usize) -> Result<RootReport> {
    let scale = poly.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = poly.leading().norm();
    if poly.degree() < expected_degree || lead <= DEGREE_DROP_TOL * scale {
        return Ok(RootReport {
            location: RootLocation::Outside,
            max_modulus: f64::INFINITY,
        });
    }
    let max_modulus = poly
        .roots()?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let location = if max_modulus < 1.0 - MEMBERSHIP_TOL {
        RootLocation::Inside
    } else if max_modulus <= 1.0 + MEMBERSHIP_TOL {
        RootLocation::Boundary
    } else {
        RootLocation::Outside
    };
    Ok(RootReport {
        location,
        max_modulus,
    })
}

fn complex_coeffs(v: &[f64]) -> impl Iterator<Item = Complex64> + '_ {
    v.iter().map(|&x| Complex64::new(x, 0.0))
}

/// Roots of `c(zeta) - mu b(zeta)`.
pub fn classify_infinite(mu: Complex64, scheme: &ImExScheme) -> Result<RootReport> {
    let coeffs = complex_coeffs(scheme.c())
        .zip(complex_coeffs(scheme.b()))
        .map(|(c, b)| c - mu * b)
        .collect();
    classify_roots(&ComplexPolynomial::new(coeffs), scheme.order())
}

/// Roots of `a(zeta) - y c(zeta) + y mu b(zeta)`, for finite `y < 0`.
pub fn classify_finite(mu: Complex64, y: f64, scheme: &ImExScheme) -> Result<RootReport> {
    let terms = complex_coeffs(scheme.a())
        .zip(complex_coeffs(scheme.b()))
        .zip(complex_coeffs(scheme.c()));
    // For large |y| divide through by -y to keep coefficients O(1).
    let coeffs = if y.abs() > 1.0 {
        terms.map(|((a, b), c)| c - mu * b - a / y).collect()
    } else {
        terms.map(|((a, b), c)| a - y * c + y * mu * b).collect()
    };
    classify_roots(&ComplexPolynomial::new(coeffs), scheme.order())
}

/// `mu` in `D_-inf`. A failed root computation counts as non-membership.
pub fn member_infinite(mu: Complex64, scheme: &ImExScheme) -> bool {
    matches!(
        classify_infinite(mu, scheme),
        Ok(RootReport {
            location: RootLocation::Inside,
            ..
        })
    )
}

/// `mu` in `D_y` for a finite `y < 0`.
pub fn member_finite(mu: Complex64, y: f64, scheme: &ImExScheme) -> bool {
    matches!(
        classify_finite(mu, y, scheme),
        Ok(RootReport {
            location: RootLocation::Inside,
            ..
        })
    )
}

/// Logarithmic grid of negative `y` values used when `D = D_-inf` is not known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YSampling {
    pub count: usize,
    /// Smallest magnitude, e.g. `1e-8` for `y = -1e-8`.
    pub min_magnitude: f64,
    pub max_magnitude: f64,
}

impl Default for YSampling {
    fn default() -> Self {
        Self {
            count: 64,
            min_magnitude: 1e-8,
            max_magnitude: 1e8,
        }
    }
}

impl YSampling {
    pub fn values(&self) -> Vec<f64> {
        let lo = self.min_magnitude.log10();
        let hi = self.max_magnitude.log10();
        match self.count {
            0 => Vec::new(),
            1 => vec![-self.min_magnitude],
            n => (0..n)
                .map(|i| -(10f64).powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnconditionalMembership {
    pub member: bool,
    /// True when the answer rests on `D = D_-inf` (delta family); false when
    /// it comes from sampling finite `y`.
    pub certified: bool,
}

/// Membership in the unconditional region `D`.
pub fn member_unconditional(
    mu: Complex64,
    scheme: &ImExScheme,
    sampling: &YSampling,
) -> UnconditionalMembership {
    let inf = member_infinite(mu, scheme);
    if scheme.is_delta_family() {
        return UnconditionalMembership {
            member: inf,
            certified: true,
        };
    }
    let member = inf && sampling.values().into_iter().all(|y| member_finite(mu, y, scheme));
    UnconditionalMembership {
        member,
        certified: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSource {
    /// Closed-form boundary of `D_-inf` for the delta family.
    Exact,
    /// Boundary locus `Gamma_y` over the full unit circle.
    Locus,
    /// The asymptotic circle.
    Circle,
    /// Support points of a numerical range.
    NumericalRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub source: CurveSource,
    /// Parameter interval swept (an angle for every curve here).
    pub param_range: (f64, f64),
    /// The `y` value for locus curves.
    pub y: Option<ScaledStep>,
    /// Parameters dropped because the curve is singular there.
    pub skipped: Vec<f64>,
}

/// Ordered samples of a curve in the complex plane, each with its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexCurve {
    pub points: Vec<Complex64>,
    pub params: Vec<f64>,
    pub closed: bool,
    pub meta: CurveMeta,
}

impl ComplexCurve {
    /// Drops samples identical to their predecessor.
    pub fn new(samples: Vec<(f64, Complex64)>, closed: bool, meta: CurveMeta) -> Self {
        let mut points: Vec<Complex64> = Vec::with_capacity(samples.len());
        let mut params = Vec::with_capacity(samples.len());
        for (t, z) in samples {
            if points.last() == Some(&z) {
                continue;
            }
            points.push(z);
            params.push(t);
        }
        Self {
            points,
            params,
            closed,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Euclidean distance from `p` to the polyline through the samples.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        let n = self.points.len();
        match n {
            0 => f64::INFINITY,
            1 => (p - self.points[0]).norm(),
            _ => {
                let segments = if self.closed { n } else { n - 1 };
                (0..segments)
                    .map(|i| segment_distance(p, self.points[i], self.points[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Point of `Gamma_y` at `z`: `(c(z) - a(z)/y) / b(z)`, or `c(z)/b(z)` for
/// `y = -inf`. `None` where `|b(z)|` is below [`LOCUS_SKIP_TOL`].
pub fn locus_point(z: Complex64, y: ScaledStep, scheme: &ImExScheme) -> Option<Complex64> {
    let b = scheme.eval_b(z);
    if b.norm() < LOCUS_SKIP_TOL {
        return None;
    }
    let num = match y {
        ScaledStep::NegInfinity => scheme.eval_c(z),
        ScaledStep::Finite(y) => scheme.eval_c(z) - scheme.eval_a(z) / y,
    };
    Some(num / b)
}

/// The boundary locus `Gamma_y`, sampled at `n` uniform angles on the unit circle.
pub fn boundary_locus(y: ScaledStep, scheme: &ImExScheme, n: usize) -> Result<ComplexCurve> {
    if n < 64 {
        return Err(Error::InvalidArgument(format!("need at least 64 samples, got {n}")));
    }
    if let ScaledStep::Finite(v) = y {
        if !(v < 0.0) {
            return Err(Error::InvalidArgument(format!("y must be negative, got {v}")));
        }
    }
    let mut skipped = Vec::new();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let theta = 2.0 * PI * k as f64 / n as f64;
        match locus_point(Complex64::from_polar(1.0, theta), y, scheme) {
            Some(w) => samples.push((theta, w)),
            None => skipped.push(theta),
        }
    }
    Ok(ComplexCurve::new(
        samples,
        true,
        CurveMeta {
            source: CurveSource::Locus,
            param_range: (0.0, 2.0 * PI),
            y: Some(y),
            skipped,
        },
    ))
}

fn check_order_delta(r: usize, delta: f64) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&r) {
        return Err(Error::OrderOutOfRange(r));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    Ok(())
}

/// Unit-circle parameter at which the exact boundary starts (the right-most point).
pub fn boundary_start(r: usize, delta: f64) -> Result<Complex64> {
    check_order_delta(r, delta)?;
    if r <= 2 {
        // for r = 2 the general expression reduces to 1 since cos(pi/2) = 0
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rf = r as f64;
    let rot = Complex64::from_polar((PI / rf).cos(), PI / rf);
    let num = (2.0 - delta) - 2.0 * (1.0 - delta) * rot;
    let den = (2.0 - delta) - 2.0 * rot;
    Ok(num / den)
}

fn delta_family_boundary_point(r: usize, delta: f64, z: Complex64) -> Complex64 {
    let c = (z - 1.0 + delta).powi(r as i32);
    let w = (z - 1.0).powi(r as i32);
    c / (c - w)
}

/// Closed-form boundary of `D_-inf` for the delta family, from `arg z0` to
/// `2 pi - arg z0`: `n` uniform samples (endpoints included) plus 16
/// geometrically clustered samples next to each endpoint.
pub fn exact_boundary(r: usize, delta: f64, n: usize) -> Result<ComplexCurve> {
    check_order_delta(r, delta)?;
    if n < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 samples, got {n}")));
    }
    let start = boundary_start(r, delta)?.arg().max(0.0);
    let end = 2.0 * PI - start;
    let step = (end - start) / (n - 1) as f64;
    let mut thetas: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
    thetas[n - 1] = end;
    for m in 1..=EXTRA_ENDPOINT_SAMPLES {
        let h = step * 0.5f64.powi(m as i32);
        thetas.push(start + h);
        thetas.push(end - h);
    }
    thetas.sort_by(f64::total_cmp);
    let samples = thetas
        .into_iter()
        .map(|t| (t, delta_family_boundary_point(r, delta, Complex64::from_polar(1.0, t))))
        .collect();
    Ok(ComplexCurve::new(
        samples,
        true,
        CurveMeta {
            source: CurveSource::Exact,
            param_range: (start, end),
            y: Some(ScaledStep::NegInfinity),
            skipped: Vec::new(),
        },
    ))
}

/// Left-most and right-most real points `(m_l, m_r)` of the delta-family region.
pub fn extreme_points(r: usize, delta: f64) -> Result<(f64, f64)> {
    check_order_delta(r, delta)?;
    if r == 1 {
        return Ok((-(2.0 - delta) / delta, 1.0));
    }
    let ri = r as i32;
    let p = (2.0 - delta).powi(ri);
    let two_r = 2f64.powi(ri);
    let m_l = -p / (two_r - p);
    let m_r = p / (p + two_r * (PI / r as f64).cos().powi(ri));
    Ok((m_l, m_r))
}

/// Center and radius of the circle the region approaches as `delta -> 0`.
pub fn asymptotic_circle(r: usize, delta: f64) -> Result<(f64, f64)> {
    check_order_delta(r, delta)?;
    let rf = r as f64;
    let radius = 1.0 / (rf * delta);
    Ok(((rf + 1.0) / (2.0 * rf) - radius, radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub r: usize,
    pub delta: f64,
    pub m_l: f64,
    pub m_r: f64,
    pub circle_center: f64,
    pub circle_radius: f64,
    pub z0: Complex64,
}

pub fn region_summary(r: usize, delta: f64) -> Result<RegionSummary> {
    let (m_l, m_r) = extreme_points(r, delta)?;
    let (circle_center, circle_radius) = asymptotic_circle(r, delta)?;
    Ok(RegionSummary {
        r,
        delta,
        m_l,
        m_r,
        circle_center,
        circle_radius,
        z0: boundary_start(r, delta)?,
    })
}

/// `(mu / (mu - 1))^(1/r)` on the principal branch, argument in `(-pi, pi]`.
pub(crate) fn wedge_map(mu: Complex64, r: usize) -> Complex64 {
    let q = mu / (mu - 1.0);
    let mut theta = q.im.atan2(q.re);
    if theta <= -PI {
        theta = PI;
    }
    let rf = r as f64;
    Complex64::from_polar(q.norm().powf(1.0 / rf), theta / rf)
}

/// Minimum over `y < 0` and `w` on `Gamma_y` of
/// `(Re phi(w) - (1 - delta/2)) (1 - y) / delta^2`, where `phi` is the wedge
/// map. Evaluated on `n_y` interior points of `ytilde = 1/(1 - y)` in `(0, 1)`
/// times `n_theta` angles.
pub fn g_function(delta: f64, r: usize, n_y: usize, n_theta: usize) -> Result<f64> {
    if !(2..=MAX_ORDER).contains(&r) {
        return Err(Error::OrderOutOfRange(r));
    }
    if n_y == 0 || n_theta == 0 {
        return Err(Error::InvalidArgument("empty G-function grid".into()));
    }
    let scheme = build_scheme(r, delta)?;
    let half_plane = 1.0 - 0.5 * delta;
    let inv_d2 = 1.0 / (delta * delta);
    let row_min = |i: usize| -> f64 {
        let yt = i as f64 / (n_y + 1) as f64;
        let y = 1.0 - 1.0 / yt;
        let weight = inv_d2 / yt;
        // j = 0 is z = 1, where a(1) = 0 puts every locus at the pole w = 1 of the wedge map
        (1..n_theta)
            .filter_map(|j| {
                let theta = 2.0 * PI * j as f64 / n_theta as f64;
                let w = locus_point(Complex64::from_polar(1.0, theta), ScaledStep::Finite(y), &scheme)?;
                let phi = wedge_map(w, r);
                let v = (phi.re - half_plane) * weight;
                v.is_finite().then_some(v)
            })
            .fold(f64::INFINITY, f64::min)
    };
    #[cfg(feature = "parallel")]
    let g = {
        use rayon::prelude::*;
        (1..=n_y)
            .into_par_iter()
            .map(row_min)
            .reduce(|| f64::INFINITY, f64::min)
    };
    #[cfg(not(feature = "parallel"))]
    let g = (1..=n_y).map(row_min).fold(f64::INFINITY, f64::min);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn origin_is_always_inside() {
        for r in 1..=5 {
            for d in [0.05, 0.5, 1.0] {
                let s = build_scheme(r, d).unwrap();
                assert!(member_infinite(re(0.0), &s), "r={r} d={d}");
                for y in [-1e-6, -0.3, -1.0, -50.0, -1e7] {
                    assert!(member_finite(re(0.0), y, &s));
                }
            }
        }
    }

    #[test]
    fn scalar_example_membership() {
        assert!(member_infinite(re(-9.0), &build_scheme(5, 0.04).unwrap()));
        assert!(!member_infinite(re(-9.0), &build_scheme(5, 1.0).unwrap()));
    }

    #[test]
    fn first_order_disk() {
        // D_y for r = 1, delta = 1, y = -1: disk centered -1 with radius 2
        let s = build_scheme(1, 1.0).unwrap();
        assert!(member_finite(re(-2.9), -1.0, &s));
        assert!(!member_finite(re(-3.5), -1.0, &s));
    }

    #[test]
    fn boundary_band_is_reported() {
        let s = build_scheme(1, 1.0).unwrap();
        let (m_l, _) = extreme_points(1, 1.0).unwrap();
        let rep = classify_infinite(re(m_l), &s).unwrap();
        assert_eq!(rep.location, RootLocation::Boundary);
        assert!(!member_infinite(re(m_l), &s));
    }

    #[test]
    fn degree_drop_is_outside() {
        let p = ComplexPolynomial::new(vec![re(0.1), re(1.0), re(1e-15)]);
        let rep = classify_roots(&p, 2).unwrap();
        assert_eq!(rep.location, RootLocation::Outside);
        assert!(rep.max_modulus.is_infinite());
        let q = ComplexPolynomial::new(vec![re(0.1), re(1.0)]);
        assert_eq!(classify_roots(&q, 2).unwrap().location, RootLocation::Outside);
    }

    #[test]
    fn extreme_point_values() {
        assert_eq!(extreme_points(1, 1.0).unwrap(), (-1.0, 1.0));
        let (l, r) = extreme_points(2, 1.0).unwrap();
        assert!((l + 1.0 / 3.0).abs() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);
        let (l, _) = extreme_points(5, 1.0).unwrap();
        assert!((l + 1.0 / 31.0).abs() < 1e-15);
        let (l, r) = extreme_points(1, 0.5).unwrap();
        assert!((l + 3.0).abs() < 1e-15 && r == 1.0);
    }

    #[test]
    fn locus_special_points() {
        let s = build_scheme(2, 1.0).unwrap();
        let w = locus_point(re(-1.0), ScaledStep::NegInfinity, &s).unwrap();
        assert!((w - re(-1.0 / 3.0)).norm() < 1e-15);
        let s = build_scheme(1, 1.0).unwrap();
        let w = locus_point(re(1.0), ScaledStep::NegInfinity, &s).unwrap();
        assert!((w - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn circle_values() {
        let (c, rad) = asymptotic_circle(3, 0.2).unwrap();
        assert!((c + 1.0).abs() < 1e-14);
        assert!((rad - 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn first_order_boundary_is_the_circle() {
        for d in [0.1, 0.5, 1.0] {
            let (c, rad) = asymptotic_circle(1, d).unwrap();
            let curve = exact_boundary(1, d, 256).unwrap();
            for p in &curve.points {
                assert!(((p - re(c)).norm() - rad).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_boundary_endpoints() {
        for r in 1..=5 {
            for d in [0.1, 0.7, 1.0] {
                let curve = exact_boundary(r, d, 129).unwrap();
                let (m_l, m_r) = extreme_points(r, d).unwrap();
                let first = curve.points[0];
                let last = *curve.points.last().unwrap();
                assert!((first - re(m_r)).norm() < 1e-10 * m_r.abs().max(1.0), "r={r} d={d} {first}");
                assert!((last - re(m_r)).norm() < 1e-10 * m_r.abs().max(1.0));
                let mid = delta_family_boundary_point(r, d, re(-1.0));
                assert!((mid - re(m_l)).norm() < 1e-10 * m_l.abs());
            }
        }
    }

    #[test]
    fn wedge_map_branch() {
        // mu / (mu - 1) = -1 for mu = 1/2, so phi = e^{i pi / r}
        let p = wedge_map(re(0.5), 3);
        assert!((p - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn y_grid() {
        let ys = YSampling::default().values();
        assert_eq!(ys.len(), 64);
        assert!((ys[0] + 1e-8).abs() < 1e-20);
        assert!((ys[63] + 1e8).abs() < 1e-4);
        assert!(ys.iter().all(|&y| y < 0.0));
    }

    #[test]
    fn generic_schemes_are_sampled() {
        let s = crate::scheme::scheme_from_c_roots(&[Complex64::new(0.8, 0.1), Complex64::new(0.8, -0.1)]).unwrap();
        let m = member_unconditional(re(0.0), &s, &YSampling::default());
        assert!(!m.certified);
        let f = build_scheme(2, 0.2).unwrap();
        assert!(member_unconditional(re(0.0), &f, &YSampling::default()).certified);
    }

    #[test]
    fn curve_distance() {
        let curve = ComplexCurve::new(
            vec![(0.0, re(0.0)), (1.0, re(1.0)), (2.0, Complex64::new(1.0, 1.0))],
            false,
            CurveMeta {
                source: CurveSource::Locus,
                param_range: (0.0, 2.0),
                y: None,
                skipped: vec![],
            },
        );
        assert!((curve.distance_to(Complex64::new(0.5, -0.5)) - 0.5).abs() < 1e-15);
        assert!((curve.distance_to(Complex64::new(2.0, 0.5)) - 1.0).abs() < 1e-15);
    }
}
