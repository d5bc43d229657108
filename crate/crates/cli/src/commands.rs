use std::path::{Path, PathBuf};

use imexstab::problems::{
    convergence_study, diffusion_splitting, gte_study, manufactured_forcing, paper_diffusion, CatalogEntry,
    ManufacturedSolution, StepRule,
};
use imexstab::region::{boundary_locus, exact_boundary, g_function, region_summary, ComplexCurve, ScaledStep};
use imexstab::scheme::{build_scheme, error_constants, order_condition_residual, zero_stability};
use imexstab::splitting::{
    certify as certify_split, delta_grid, generalized_spectrum, largest_stable_delta, validate_splitting, wp_set,
    Splitting,
};
use imexstab::stepping::{run, SteppingPlan, Trajectory};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use crate::grid::{parse_int_grid, parse_real_grid};
use crate::matrix_io::read_matrix;
use crate::output::{emit, num, opt_num, render_csv, render_json, Meta, Table};
use crate::{
    CertifyArgs, CliError, CoeffsArgs, ConvergenceArgs, Format, GteArgs, RegionArgs, SimulateArgs, SplitArgs,
    WrangeArgs,
};

fn meta(command: &'static str, args: &impl Serialize) -> Result<Meta, CliError> {
    Ok(Meta {
        command,
        config: serde_json::to_value(args)?,
    })
}

fn load_split(args: &SplitArgs) -> Result<Splitting, CliError> {
    match (&args.problem, &args.a, &args.b) {
        (Some(name), _, _) => Ok(CatalogEntry::from_name(name)?.splitting(args.n, args.alpha)?),
        (None, Some(a), Some(b)) => Ok(validate_splitting(read_matrix(a)?, read_matrix(b)?)?),
        _ => Err(CliError::Validation("give either --problem or both --a and --b".into())),
    }
}

pub fn coeffs(args: &CoeffsArgs) -> Result<(), CliError> {
    let scheme = build_scheme(args.scheme.r, args.scheme.delta)?;
    let residual = order_condition_residual(&scheme);
    let zs = zero_stability(&scheme)?;
    let ec = error_constants(&scheme)?;
    let m = meta("coeffs", args)?;
    let bytes = match args.format {
        Format::Json => render_json(
            &m,
            json!({
                "r": scheme.order(),
                "delta": scheme.delta(),
                "a": scheme.a(),
                "b": scheme.b(),
                "c": scheme.c(),
                "order_condition_residual": residual,
                "zero_stable": zs.stable,
                "a_roots": zs.roots,
                "error_constants": ec,
            }),
        )?,
        Format::Csv => {
            let mut t = Table::new(&["j", "a", "b", "c"]);
            t.note("order_condition_residual", num(residual));
            t.note("zero_stable", zs.stable);
            t.note("implicit_error_constant", num(ec.implicit));
            t.note("explicit_error_constant", num(ec.explicit));
            for j in 0..=scheme.steps() {
                t.push(vec![j.to_string(), num(scheme.a()[j]), num(scheme.b()[j]), num(scheme.c()[j])]);
            }
            render_csv(&m, &t)?
        }
    };
    emit(args.out.as_deref(), &bytes)
}

fn push_curve(t: &mut Table, curve: &ComplexCurve, source: &str) {
    for (z, theta) in curve.points.iter().zip(&curve.params) {
        t.push(vec![num(z.re), num(z.im), source.to_string(), num(*theta)]);
    }
}

fn summary_path(args: &RegionArgs) -> Option<PathBuf> {
    args.summary.clone().or_else(|| {
        args.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    })
}

pub fn region(args: &RegionArgs) -> Result<(), CliError> {
    let (r, delta) = (args.scheme.r, args.scheme.delta);
    let scheme = build_scheme(r, delta)?;
    let y = match args.y {
        None => ScaledStep::NegInfinity,
        Some(y) if y < 0.0 && y.is_finite() => ScaledStep::Finite(y),
        Some(y) => return Err(CliError::Validation(format!("y must be finite and negative, got {y}"))),
    };
    let m = meta("region", args)?;
    let mut t = Table::new(&["re", "im", "source", "theta"]);
    let exact = match y {
        ScaledStep::NegInfinity => Some(exact_boundary(r, delta, args.samples)?),
        ScaledStep::Finite(_) => None,
    };
    if let Some(curve) = &exact {
        push_curve(&mut t, curve, "exact");
    }
    let locus = boundary_locus(y, &scheme, args.samples)?;
    push_curve(&mut t, &locus, "locus");
    emit(args.out.as_deref(), &render_csv(&m, &t)?)?;

    if let Some(path) = summary_path(args) {
        let g = if args.g {
            Some(g_function(delta, r, args.g_ny, args.g_ntheta)?)
        } else {
            None
        };
        let summary = json!({
            "region": region_summary(r, delta)?,
            "y": args.y,
            "g": g,
            "exact_points": exact.as_ref().map(|c| c.len()),
            "locus_points": locus.len(),
            "locus_skipped": locus.meta.skipped,
        });
        emit(Some(&path), &render_json(&m, summary)?)?;
    }
    Ok(())
}

pub fn wrange(args: &WrangeArgs) -> Result<(), CliError> {
    let split = load_split(&args.split)?;
    let range = wp_set(&split, args.p, args.angles)?;
    let mut spectrum = generalized_spectrum(&split)?;
    spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut t = Table::new(&["kind", "re", "im", "theta"]);
    t.note("dim", split.dim());
    t.note("rightmost", num(range.rightmost()));
    for (z, theta) in range.curve.points.iter().zip(&range.curve.params) {
        t.push(vec!["boundary".into(), num(z.re), num(z.im), num(*theta)]);
    }
    for z in &spectrum {
        t.push(vec!["eigenvalue".into(), num(z.re), num(z.im), String::new()]);
    }
    emit(args.out.as_deref(), &render_csv(&meta("wrange", args)?, &t)?)
}

pub fn certify(args: &CertifyArgs) -> Result<(), CliError> {
    let split = load_split(&args.split)?;
    let (r, delta) = (args.scheme.r, args.scheme.delta);
    let verdict = certify_split(&split, r, delta, args.p, args.angles)?;
    let largest = match args.scan_step {
        Some(step) => Some(largest_stable_delta(&split, r, args.p, &delta_grid(step)?, args.angles)?),
        None => None,
    };
    let result = json!({
        "verdict": verdict,
        "dim": split.dim(),
        "largest_certified_delta": largest.flatten(),
        "scan_step": args.scan_step,
    });
    emit(args.out.as_deref(), &render_json(&meta("certify", args)?, result)?)
}

fn initial_vector(path: Option<&Path>, n: usize) -> Result<DVector<f64>, CliError> {
    let Some(path) = path else {
        return Ok(DVector::from_element(n, 1.0));
    };
    let m = read_matrix(path)?;
    if m.len() != n || (m.nrows() != 1 && m.ncols() != 1) {
        return Err(CliError::Validation(format!(
            "{}: expected a vector of length {n}, got a {}x{} matrix",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(DVector::from_iterator(n, m.iter().copied()))
}

fn trajectory_table(traj: &Trajectory, every: usize, exact: Option<&dyn Fn(f64) -> DVector<f64>>) -> Table {
    let mut t = Table::new(&["step", "t", "norm", "error"]);
    t.note("outcome", serde_json::to_string(&traj.outcome).unwrap_or_default());
    let last = traj.states.len().saturating_sub(1);
    for (i, (u, (&time, &norm))) in traj.states.iter().zip(traj.times.iter().zip(&traj.norms)).enumerate() {
        if i % every != 0 && i != last {
            continue;
        }
        let err = exact.map(|f| (u - f(time)).amax());
        t.push(vec![i.to_string(), num(time), num(norm), opt_num(err)]);
    }
    t
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.every == 0 {
        return Err(CliError::Validation("--every must be positive".into()));
    }
    let (r, delta) = (args.scheme.r, args.scheme.delta);
    let scheme = build_scheme(r, delta)?;
    let m = meta("simulate", args)?;
    let vardiff = match &args.split.problem {
        Some(name) => CatalogEntry::from_name(name)? == CatalogEntry::PaperVardiff,
        None => false,
    };
    let table = if vardiff {
        let problem = diffusion_splitting(args.split.n, &paper_diffusion, args.split.alpha)?;
        let solution = ManufacturedSolution::paper();
        let forcing = manufactured_forcing(&problem, &solution);
        let f = |t: f64| forcing.eval(t);
        let interior = problem.grid.interior();
        let exact = |t: f64| solution.sample(&interior, t);
        let t0 = -((r - 1) as f64) * args.k;
        let plan = SteppingPlan::from_exact(&scheme, &problem.split, args.k, args.steps, t0, &exact, Some(&f));
        trajectory_table(&run(&plan)?, args.every, Some(&exact))
    } else {
        let split = load_split(&args.split)?;
        let u0 = initial_vector(args.u0.as_deref(), split.dim())?;
        let plan = SteppingPlan {
            scheme: &scheme,
            split: &split,
            k: args.k,
            n_steps: args.steps,
            t0: 0.0,
            initial: vec![u0; scheme.steps()],
            forcing: None,
        };
        trajectory_table(&run(&plan)?, args.every, None)
    };
    emit(args.out.as_deref(), &render_csv(&m, &table)?)
}

/// Rows indexed by the shared parameter; one error and rate column per order.
fn order_table(param: &str, orders: &[usize], reports: &[imexstab::problems::ConvergenceReport]) -> Table {
    // the k column is redundant when k is the row parameter
    let with_k = param != "k";
    let mut header = vec![param.to_string()];
    if with_k {
        header.push("k".to_string());
    }
    for r in orders {
        header.push(format!("error_r{r}"));
        header.push(format!("rate_r{r}"));
    }
    let mut t = Table {
        header,
        rows: Vec::new(),
        notes: Vec::new(),
    };
    let n_rows = reports.first().map_or(0, |rep| rep.rows.len());
    for i in 0..n_rows {
        let first = &reports[0].rows[i];
        let mut row = vec![num(first.param)];
        if with_k {
            row.push(num(first.k));
        }
        for rep in reports {
            row.push(num(rep.rows[i].error));
            row.push(opt_num(rep.rows[i].rate));
        }
        t.push(row);
    }
    t
}

fn check_orders(orders: &[usize]) -> Result<(), CliError> {
    if orders.is_empty() || orders.iter().any(|&r| !(1..=imexstab::scheme::MAX_ORDER).contains(&r)) {
        return Err(CliError::Validation(format!("orders must lie in 1..{}", imexstab::scheme::MAX_ORDER)));
    }
    Ok(())
}

pub fn convergence(args: &ConvergenceArgs) -> Result<(), CliError> {
    if CatalogEntry::from_name(&args.problem)? != CatalogEntry::PaperVardiff {
        return Err(CliError::Validation(format!(
            "convergence studies need a problem with a manufactured solution; {:?} has none",
            args.problem
        )));
    }
    let orders = parse_int_grid(&args.orders)?;
    check_orders(&orders)?;
    let ks = parse_real_grid(&args.k)?;
    let problem = diffusion_splitting(args.n, &paper_diffusion, args.alpha)?;
    let solution = ManufacturedSolution::paper();
    let reports = orders
        .iter()
        .map(|&r| convergence_study(r, args.delta, &problem, &solution, &ks, args.t_final))
        .collect::<Result<Vec<_>, _>>()?;
    let t = order_table("k", &orders, &reports);
    emit(args.out.as_deref(), &render_csv(&meta("convergence", args)?, &t)?)
}

pub fn gte(args: &GteArgs) -> Result<(), CliError> {
    let orders = parse_int_grid(&args.orders)?;
    check_orders(&orders)?;
    let deltas = parse_real_grid(&args.deltas)?;
    let rule = match (args.k, args.k_divisor) {
        (_, Some(q)) if q > 0.0 && q.is_finite() => StepRule::DeltaFraction(q),
        (_, Some(q)) => return Err(CliError::Validation(format!("--k-divisor must be positive, got {q}"))),
        (Some(k), None) => StepRule::Fixed(k),
        (None, None) => StepRule::Fixed(1e-3),
    };
    let reports = orders
        .iter()
        .map(|&r| gte_study(r, &deltas, rule, args.t_final))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = order_table("delta", &orders, &reports);
    t.note("step_rule", serde_json::to_string(&rule)?);
    emit(args.out.as_deref(), &render_csv(&meta("gte", args)?, &t)?)
}
