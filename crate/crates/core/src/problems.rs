//! Test problems: the scalar splitting `u' = -u - 9u`, the test equation
//! `u' = -u`, and a Chebyshev collocation of `u_t = (d(x) u_x)_x` on `[-1, 1]`
//! with homogeneous Dirichlet data and a manufactured solution.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::build_scheme;
use crate::splitting::{validate_splitting, Splitting};
use crate::stepping::{global_error, SteppingPlan};

/// Chebyshev points `x_j = cos(j pi / (N+1))`, `j = 0..=N+1`, and the
/// collocation derivative matrix on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    /// Number of interior nodes.
    pub n: usize,
    pub nodes: DVector<f64>,
    pub d: DMatrix<f64>,
}

impl ChebyshevGrid {
    pub fn interior(&self) -> DVector<f64> {
        self.nodes.rows(1, self.n).into_owned()
    }
}

pub fn chebyshev_grid(n: usize) -> Result<ChebyshevGrid> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one interior node".into()));
    }
    let m = n + 1;
    let mf = m as f64;
    // sine form keeps the nodes exactly antisymmetric
    let nodes = DVector::from_fn(m + 1, |j, _| (PI * (mf - 2.0 * j as f64) / (2.0 * mf)).sin());
    let weight = |j: usize| {
        let c = if j == 0 || j == m { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            c
        } else {
            -c
        }
    };
    let mut d = DMatrix::zeros(m + 1, m + 1);
    for i in 0..=m {
        for j in 0..=m {
            if i != j {
                // x_i - x_j without cancellation
                let diff = 2.0 * (PI * (i + j) as f64 / (2.0 * mf)).sin() * (PI * (j as f64 - i as f64) / (2.0 * mf)).sin();
                d[(i, j)] = weight(i) / weight(j) / diff;
            }
        }
        let off: f64 = d.row(i).sum();
        d[(i, i)] = -off;
    }
    Ok(ChebyshevGrid { n, nodes, d })
}

/// Method-of-lines splitting for variable-coefficient diffusion.
#[derive(Debug, Clone)]
pub struct DiffusionProblem {
    pub grid: ChebyshevGrid,
    /// `d(x_j)` on all nodes.
    pub d_values: DVector<f64>,
    pub alpha: f64,
    pub split: Splitting,
    /// Interior block of `D diag(d) D`.
    pub l_interior: DMatrix<f64>,
}

/// `A = (alpha/2)(D2 + D2^T)` on the interior nodes, with `D2` the interior
/// block of `D^2`, and `B = L - A`.
pub fn diffusion_splitting(n: usize, d: &dyn Fn(f64) -> f64, alpha: f64) -> Result<DiffusionProblem> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let grid = chebyshev_grid(n)?;
    let d_values = grid.nodes.map(d);
    if let Some(bad) = d_values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("diffusion coefficient must be positive, got {bad}")));
    }
    let mut scaled = grid.d.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= d_values[i];
    }
    let l_full = &grid.d * scaled;
    let d2_full = &grid.d * &grid.d;
    let l_interior = l_full.view((1, 1), (n, n)).into_owned();
    let d2 = d2_full.view((1, 1), (n, n));
    let a = (d2 + d2.transpose()) * (0.5 * alpha);
    let b = &l_interior - &a;
    let split = validate_splitting(a, b)?;
    Ok(DiffusionProblem {
        grid,
        d_values,
        alpha,
        split,
        l_interior,
    })
}

/// The diffusion coefficient `4 + 3 cos(2 pi x)`.
pub fn paper_diffusion(x: f64) -> f64 {
    4.0 + 3.0 * (2.0 * PI * x).cos()
}

pub type SpaceTime = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Prescribed `u*(x, t)` with its time derivative.
pub struct ManufacturedSolution {
    pub u: SpaceTime,
    pub u_t: SpaceTime,
}

impl ManufacturedSolution {
    /// `u* = sin(20 t) sin(2 pi x) e^{sin(2 pi x)}`.
    pub fn paper() -> Self {
        let profile = |x: f64| {
            let s = (2.0 * PI * x).sin();
            s * s.exp()
        };
        Self {
            u: Box::new(move |x, t| (20.0 * t).sin() * profile(x)),
            u_t: Box::new(move |x, t| 20.0 * (20.0 * t).cos() * profile(x)),
        }
    }

    pub fn sample(&self, points: &DVector<f64>, t: f64) -> DVector<f64> {
        points.map(|x| (self.u)(x, t))
    }

    pub fn sample_t(&self, points: &DVector<f64>, t: f64) -> DVector<f64> {
        points.map(|x| (self.u_t)(x, t))
    }
}

/// `f_h(t) = u*_t - L u*` on the interior nodes, so that the grid samples of
/// `u*` solve the semi-discrete system exactly.
pub struct DiscreteForcing<'a> {
    interior: DVector<f64>,
    l: &'a DMatrix<f64>,
    solution: &'a ManufacturedSolution,
}

impl DiscreteForcing<'_> {
    pub fn eval(&self, t: f64) -> DVector<f64> {
        self.solution.sample_t(&self.interior, t) - self.l * self.solution.sample(&self.interior, t)
    }
}

pub fn manufactured_forcing<'a>(problem: &'a DiffusionProblem, solution: &'a ManufacturedSolution) -> DiscreteForcing<'a> {
    DiscreteForcing {
        interior: problem.grid.interior(),
        l: &problem.l_interior,
        solution,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// The parameter varied between rows (`k` or `delta`).
    pub param: f64,
    pub k: f64,
    pub error: f64,
    /// `log(e_i / e_{i-1}) / log(param_i / param_{i-1})`.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub r: usize,
    /// Fixed `delta` for time-step studies; `None` when delta varies by row.
    pub delta: Option<f64>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub t_final: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }
}

fn rows_with_rates(samples: Vec<(f64, f64, f64)>) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(samples.len());
    for (i, &(param, k, error)) in samples.iter().enumerate() {
        let rate = (i > 0).then(|| {
            let (p0, _, e0) = samples[i - 1];
            (error / e0).ln() / (param / p0).ln()
        });
        rows.push(ConvergenceRow { param, k, error, rate });
    }
    rows
}

fn steps_to(t_final: f64, k: f64) -> Result<usize> {
    let n = (t_final / k).round();
    if !(k > 0.0) || n < 1.0 || (n * k - t_final).abs() > 1e-9 * t_final.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!("t_final {t_final} is not a multiple of k = {k}")));
    }
    Ok(n as usize)
}

fn map_maybe_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Final-time errors for each `k`, starting from exact data at
/// `t = -(r-1)k, ..., 0` and stepping to `t_final`.
pub fn convergence_study(
    r: usize,
    delta: f64,
    problem: &DiffusionProblem,
    solution: &ManufacturedSolution,
    k_list: &[f64],
    t_final: f64,
) -> Result<ConvergenceReport> {
    let scheme = build_scheme(r, delta)?;
    let interior = problem.grid.interior();
    let forcing = manufactured_forcing(problem, solution);
    let f = |t: f64| forcing.eval(t);
    let exact = |t: f64| solution.sample(&interior, t);
    let errors = map_maybe_parallel(k_list, |&k| -> Result<f64> {
        let n_steps = steps_to(t_final, k)?;
        let t0 = -((r - 1) as f64) * k;
        let plan = SteppingPlan::from_exact(&scheme, &problem.split, k, n_steps, t0, &exact, Some(&f));
        global_error(&plan, &exact)
    });
    let samples = k_list
        .iter()
        .zip(errors)
        .map(|(&k, e)| Ok((k, k, e?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        r,
        delta: Some(delta),
        n: Some(problem.grid.n),
        alpha: Some(problem.alpha),
        t_final,
        rows: rows_with_rates(samples),
    })
}

/// A 1x1 splitting `u' = lambda_a u + lambda_b u`.
#[derive(Debug, Clone)]
pub struct ScalarProblem {
    pub split: Splitting,
    pub lambda: f64,
}

impl ScalarProblem {
    pub fn exact(&self, t: f64, u0: f64) -> f64 {
        (self.lambda * t).exp() * u0
    }
}

pub fn scalar_problem(lambda_a: f64, lambda_b: f64) -> Result<ScalarProblem> {
    if !(lambda_a < 0.0) {
        return Err(Error::NotNegativeDefinite {
            largest_eigenvalue: lambda_a,
        });
    }
    let split = validate_splitting(DMatrix::from_element(1, 1, lambda_a), DMatrix::from_element(1, 1, lambda_b))?;
    Ok(ScalarProblem {
        split,
        lambda: lambda_a + lambda_b,
    })
}

/// How `k` is chosen in a delta sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum StepRule {
    Fixed(f64),
    /// `k = delta / divisor`.
    DeltaFraction(f64),
}

impl StepRule {
    pub fn step(&self, delta: f64) -> f64 {
        match *self {
            StepRule::Fixed(k) => k,
            StepRule::DeltaFraction(q) => delta / q,
        }
    }
}

/// Final-time error of `u' = -u`, `u(0) = 1`, against `delta`, integrating to
/// `t_final` from exact data at `t = -(r-1)k, ..., 0`.
pub fn gte_study(r: usize, deltas: &[f64], rule: StepRule, t_final: f64) -> Result<ConvergenceReport> {
    let problem = scalar_problem(-1.0, 0.0)?;
    let exact = |t: f64| DVector::from_element(1, problem.exact(t, 1.0));
    let errors = map_maybe_parallel(deltas, |&delta| -> Result<(f64, f64, f64)> {
        let scheme = build_scheme(r, delta)?;
        let k = rule.step(delta);
        let n_steps = steps_to(t_final, k)?;
        let t0 = -((r - 1) as f64) * k;
        let plan = SteppingPlan::from_exact(&scheme, &problem.split, k, n_steps, t0, &exact, None);
        Ok((delta, k, global_error(&plan, &exact)?))
    });
    Ok(ConvergenceReport {
        r,
        delta: None,
        n: None,
        alpha: None,
        t_final,
        rows: rows_with_rates(errors.into_iter().collect::<Result<Vec<_>>>()?),
    })
}

/// Problems selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogEntry {
    /// Variable-coefficient diffusion with `d = 4 + 3 cos(2 pi x)`.
    PaperVardiff,
    /// `u' = -u - 9u`.
    PaperScalar,
    /// `u' = -u`, all implicit.
    PaperGte,
}

impl CatalogEntry {
    pub const ALL: [CatalogEntry; 3] = [CatalogEntry::PaperVardiff, CatalogEntry::PaperScalar, CatalogEntry::PaperGte];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogEntry::PaperVardiff => "paper-vardiff",
            CatalogEntry::PaperScalar => "paper-scalar",
            CatalogEntry::PaperGte => "paper-gte",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem {name:?}")))
    }

    /// The splitting; `n` and `alpha` only matter for the diffusion problem.
    pub fn splitting(&self, n: usize, alpha: f64) -> Result<Splitting> {
        match self {
            CatalogEntry::PaperVardiff => Ok(diffusion_splitting(n, &paper_diffusion, alpha)?.split),
            CatalogEntry::PaperScalar => Ok(scalar_problem(-1.0, -9.0)?.split),
            CatalogEntry::PaperGte => Ok(scalar_problem(-1.0, 0.0)?.split),
        }
    }
}
