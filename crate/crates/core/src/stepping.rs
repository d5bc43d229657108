//! The ImEx multistep recursion
//!
//! ```text
//! (1/k) sum_j a_j u_{n+j} = sum_j ( c_j A u_{n+j} + b_j B u_{n+j} + b_j f_{n+j} )
//! ```
//!
//! with one factorization of `a_s I - k c_s A` per plan, the equivalent
//! one-step companion matrix, and global-error measurement.

use std::collections::VecDeque;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::ImExScheme;
use crate::splitting::Splitting;

/// A run stops once the state norm exceeds this multiple of `max(initial norm, 1)`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Companion eigenvalues above `1 + this` in modulus are unstable.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Eigenvalues within this distance below the unit circle get a power-iteration check.
pub const NEAR_UNIT_BAND: f64 = 1e-7;
const POWER_SHORT: usize = 1_000;
const POWER_LONG: usize = 10_000;
/// Growth between the short and long power runs above this is taken as defective.
const DEFECTIVE_GROWTH: f64 = 2.0;

pub type Forcing<'a> = &'a (dyn Fn(f64) -> DVector<f64> + Sync);

pub struct SteppingPlan<'a> {
    pub scheme: &'a ImExScheme,
    pub split: &'a Splitting,
    pub k: f64,
    /// Recursion steps after the `s` starting values.
    pub n_steps: usize,
    /// Time of `initial[0]`; `initial[j]` sits at `t0 + j k`.
    pub t0: f64,
    pub initial: Vec<DVector<f64>>,
    pub forcing: Option<Forcing<'a>>,
}

impl<'a> SteppingPlan<'a> {
    /// Plan whose starting values are samples of `exact` at `t0 + j k`.
    pub fn from_exact(
        scheme: &'a ImExScheme,
        split: &'a Splitting,
        k: f64,
        n_steps: usize,
        t0: f64,
        exact: &dyn Fn(f64) -> DVector<f64>,
        forcing: Option<Forcing<'a>>,
    ) -> Self {
        let initial = (0..scheme.steps()).map(|j| exact(t0 + j as f64 * k)).collect();
        Self {
            scheme,
            split,
            k,
            n_steps,
            t0,
            initial,
            forcing,
        }
    }

    /// Time of state index `i` (starting values included).
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.k
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.scheme.steps() - 1 + self.n_steps)
    }

    fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {}", self.k)));
        }
        let s = self.scheme.steps();
        if self.initial.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "{} starting vectors for a {s}-step scheme",
                self.initial.len()
            )));
        }
        let n = self.split.dim();
        if let Some(v) = self.initial.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("starting vector of length {}, expected {n}", v.len())));
        }
        Ok(())
    }
}

enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Result<Self> {
        if let Some(ch) = Cholesky::new(m.clone()) {
            return Ok(Factor::Cholesky(ch));
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularImplicitOperator);
        }
        Ok(Factor::Lu(lu))
    }

    fn solve_in_place(&self, rhs: &mut DVector<f64>) -> Result<()> {
        match self {
            Factor::Cholesky(ch) => {
                ch.solve_mut(rhs);
                Ok(())
            }
            Factor::Lu(lu) => {
                if lu.solve_mut(rhs) {
                    Ok(())
                } else {
                    Err(Error::SingularImplicitOperator)
                }
            }
        }
    }
}

fn implicit_operator(scheme: &ImExScheme, split: &Splitting, k: f64) -> DMatrix<f64> {
    let s = scheme.steps();
    let n = split.dim();
    DMatrix::identity(n, n) * scheme.a()[s] - split.a() * (k * scheme.c()[s])
}

/// Weights of `sum_j p_j u_{n+j}` in terms of backward differences of the
/// newest known state `v = u_{n+s-1}` and the increment `x = u_{n+s} - v`:
///
/// ```text
/// sum_j p_j u_{n+j} = w0 v + p_s x - sum_{i=1}^{s-1} w_i (nabla^i v)
/// ```
///
/// Takes the backward-difference coefficients `q` and returns `(w0, [w_1 .. w_{s-1}])`.
fn backward_weights(q: &[f64]) -> (f64, Vec<f64>) {
    let s = q.len() - 1;
    let tails = (1..s).map(|i| q[i + 1..].iter().sum()).collect();
    (q[0], tails)
}

struct Weights {
    a: (f64, Vec<f64>),
    b: (f64, Vec<f64>),
    c: (f64, Vec<f64>),
}

/// Advances a plan one state at a time.
///
/// The state is carried as the newest vector plus its backward differences,
/// and each step solves for the increment. For schemes whose characteristic
/// roots crowd `z = 1` the plain weighted sums lose accuracy in proportion
/// to `1 / a'(1)`; the difference form keeps rounding proportional to the
/// differences themselves.
pub struct Stepper<'p, 'a> {
    plan: &'p SteppingPlan<'a>,
    factor: Factor,
    weights: Weights,
    u: DVector<f64>,
    /// `nabla^i u` for `i = 1 .. s-1`.
    diffs: Vec<DVector<f64>>,
    /// Forcing at the last `s` state times, oldest first.
    forcing: VecDeque<DVector<f64>>,
    /// Index of the newest state.
    index: usize,
}

impl<'p, 'a> Stepper<'p, 'a> {
    pub fn new(plan: &'p SteppingPlan<'a>) -> Result<Self> {
        plan.validate()?;
        let factor = Factor::new(implicit_operator(plan.scheme, plan.split, plan.k))?;
        let s = plan.scheme.steps();
        let [qa, qb, qc] = plan.scheme.backward_coefficients();
        let weights = Weights {
            a: backward_weights(&qa),
            b: backward_weights(&qb),
            c: backward_weights(&qc),
        };
        // Difference table of the starting values, newest entry of each order.
        let mut level: Vec<DVector<f64>> = plan.initial.clone();
        let mut diffs = Vec::with_capacity(s.saturating_sub(1));
        for _ in 1..s {
            level = level.windows(2).map(|w| &w[1] - &w[0]).collect();
            diffs.push(level.last().expect("nonempty difference row").clone());
        }
        let forcing = match plan.forcing {
            Some(f) => (0..s).map(|j| f(plan.time(j))).collect(),
            None => VecDeque::new(),
        };
        Ok(Self {
            plan,
            factor,
            weights,
            u: plan.initial[s - 1].clone(),
            diffs,
            forcing,
            index: s - 1,
        })
    }

    /// Index of the newest state.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn current(&self) -> &DVector<f64> {
        &self.u
    }

    /// Compute the next state and return it.
    pub fn advance(&mut self) -> Result<&DVector<f64>> {
        let scheme = self.plan.scheme;
        let split = self.plan.split;
        let k = self.plan.k;
        let w = &self.weights;

        let combine = |(w0, tails): &(f64, Vec<f64>)| {
            let mut v = &self.u * *w0;
            for (wi, d) in tails.iter().zip(&self.diffs) {
                v.axpy(-wi, d, 1.0);
            }
            v
        };
        // (a_s - k c_s A) x = -[a]_known + k A [c]_known + k B [b]_known + k sum b_j f_j
        let mut rhs = -combine(&w.a);
        rhs.gemv(k, split.a(), &combine(&w.c), 1.0);
        rhs.gemv(k, split.b(), &combine(&w.b), 1.0);
        for (bj, f) in scheme.b().iter().zip(&self.forcing) {
            rhs.axpy(k * bj, f, 1.0);
        }
        self.factor.solve_in_place(&mut rhs)?;
        let x = rhs;
        self.index += 1;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { index: self.index });
        }

        let mut prev = x.clone();
        for d in self.diffs.iter_mut() {
            let next = &prev - &*d;
            *d = std::mem::replace(&mut prev, next);
        }
        self.u += &x;
        if let Some(f) = self.plan.forcing {
            self.forcing.pop_front();
            self.forcing.push_back(f(self.plan.time(self.index)));
        }
        Ok(&self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RunOutcome {
    Completed,
    /// Stopped at this state index by the divergence guard.
    Diverged { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub times: Vec<f64>,
    /// Sup norms of the states.
    pub norms: Vec<f64>,
    pub outcome: RunOutcome,
}

impl Trajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds the starting values")
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

fn divergence_limit(plan: &SteppingPlan) -> f64 {
    let initial = plan.initial.iter().map(|v| v.amax()).fold(0.0, f64::max);
    DIVERGENCE_FACTOR * initial.max(1.0)
}

/// Execute the plan, storing every state.
pub fn run(plan: &SteppingPlan) -> Result<Trajectory> {
    let mut stepper = Stepper::new(plan)?;
    let limit = divergence_limit(plan);
    let total = plan.scheme.steps() + plan.n_steps;
    let mut states = plan.initial.clone();
    states.reserve(plan.n_steps);
    let mut outcome = RunOutcome::Completed;
    for _ in 0..plan.n_steps {
        let u = stepper.advance()?;
        states.push(u.clone());
        if u.amax() > limit {
            outcome = RunOutcome::Diverged {
                index: stepper.index(),
            };
            break;
        }
    }
    debug_assert!(states.len() <= total);
    let times = (0..states.len()).map(|i| plan.time(i)).collect();
    let norms = states.iter().map(|v| v.amax()).collect();
    Ok(Trajectory {
        states,
        times,
        norms,
        outcome,
    })
}

/// Execute the plan keeping only the final state.
pub fn run_final(plan: &SteppingPlan) -> Result<(DVector<f64>, RunOutcome)> {
    let mut stepper = Stepper::new(plan)?;
    let limit = divergence_limit(plan);
    for _ in 0..plan.n_steps {
        if stepper.advance()?.amax() > limit {
            let index = stepper.index();
            return Ok((stepper.current().clone(), RunOutcome::Diverged { index }));
        }
    }
    Ok((stepper.current().clone(), RunOutcome::Completed))
}

/// Sup-norm error at the final time against `exact`. A diverged run reports
/// an infinite error.
pub fn global_error(plan: &SteppingPlan, exact: &dyn Fn(f64) -> DVector<f64>) -> Result<f64> {
    let (u, outcome) = run_final(plan)?;
    if let RunOutcome::Diverged { .. } = outcome {
        return Ok(f64::INFINITY);
    }
    Ok((u - exact(plan.final_time())).amax())
}

/// The `sN x sN` one-step matrix acting on `[u_{n+s-1}; ...; u_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    pub w: DMatrix<f64>,
    pub k: f64,
    pub steps: usize,
    pub dim: usize,
}

impl CompanionMatrix {
    /// Stack starting values `u_0..u_{s-1}` newest first.
    pub fn stack(&self, initial: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.steps * self.dim);
        for (block, u) in initial.iter().rev().enumerate() {
            out.rows_mut(block * self.dim, self.dim).copy_from(u);
        }
        out
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = Schur::try_new(self.w.clone(), f64::EPSILON, 0).ok_or(Error::EigenSolverFailed)?;
        Ok(schur.complex_eigenvalues().iter().copied().collect())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

pub fn companion_matrix(scheme: &ImExScheme, split: &Splitting, k: f64) -> Result<CompanionMatrix> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {k}")));
    }
    let s = scheme.steps();
    let n = split.dim();
    let factor = Factor::new(implicit_operator(scheme, split, k))?;
    let mut w = DMatrix::zeros(s * n, s * n);
    let eye = DMatrix::<f64>::identity(n, n);
    for block in 0..s {
        // column block `block` multiplies u_{n+s-1-block}
        let j = s - 1 - block;
        let cj = split.a() * (k * scheme.c()[j]) + split.b() * (k * scheme.b()[j]) - &eye * scheme.a()[j];
        for col in 0..n {
            let mut v = cj.column(col).into_owned();
            factor.solve_in_place(&mut v)?;
            w.view_mut((0, block * n + col), (n, 1)).copy_from(&v);
        }
    }
    for block in 1..s {
        w.view_mut((block * n, (block - 1) * n), (n, n)).copy_from(&eye);
    }
    Ok(CompanionMatrix { w, k, steps: s, dim: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub k: f64,
    pub stable: bool,
    pub spectral_radius: f64,
    /// Norm growth from 1e3 to 1e4 power iterations, when some eigenvalue sits
    /// on or just inside the unit circle.
    pub power_growth: Option<f64>,
}

fn power_growth(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    // deterministic start with energy in every component
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7).sin());
    x /= x.norm();
    let mut log_norm = 0.0;
    let mut at_short = 0.0;
    for it in 1..=POWER_LONG {
        x = w * x;
        let nx = x.norm();
        if nx == 0.0 || !nx.is_finite() {
            return if nx == 0.0 { 0.0 } else { f64::INFINITY };
        }
        log_norm += nx.ln();
        x /= nx;
        if it == POWER_SHORT {
            at_short = log_norm;
        }
    }
    (log_norm - at_short).exp()
}

/// Per-`k` stability of the recursion from the companion spectrum.
pub fn empirical_stability(scheme: &ImExScheme, split: &Splitting, k_grid: &[f64]) -> Result<Vec<StabilityCheck>> {
    k_grid
        .iter()
        .map(|&k| {
            let cm = companion_matrix(scheme, split, k)?;
            let moduli: Vec<f64> = cm.eigenvalues()?.iter().map(|z| z.norm()).collect();
            let spectral_radius = moduli.iter().copied().fold(0.0, f64::max);
            if spectral_radius > 1.0 + SPECTRAL_TOL {
                return Ok(StabilityCheck {
                    k,
                    stable: false,
                    spectral_radius,
                    power_growth: None,
                });
            }
            let near_unit = moduli.iter().any(|&m| m >= 1.0 - NEAR_UNIT_BAND);
            let power_growth = near_unit.then(|| power_growth(&cm.w));
            Ok(StabilityCheck {
                k,
                stable: power_growth.is_none_or(|g| g <= DEFECTIVE_GROWTH),
                spectral_radius,
                power_growth,
            })
        })
        .collect()
}

/// `count` values logarithmically spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}
