use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Map, Value};

use fgps::error::FgpsError;
use fgps::error_bounds::{bound_estimate, gamma_factor, ln_gamma_factor, ErrorBoundInputs};
use fgps::fourier::PeriodicGrid;
use fgps::fracdiff::FgpsOperator;
use fgps::gegenbauer::GegenbauerRule;
use fgps::ocp::{
    reconstruct, solve_pfocp as solve, NlpResult, PfocpProblem, PolynomialProblem, SolverOptions,
};
use fgps::reference::{quadrature_fd, ExactSinFd, DEFAULT_QUADRATURE_TOL};

use crate::exit;
use crate::output::{emit, json_bytes, sibling, Cell, Table};
use crate::{OperatorArgs, OutputArgs, SCHEMA_VERSION};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub type Outcome = Result<u8, Failure>;

fn usage<T>(message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code: exit::USAGE,
        message: message.into(),
    })
}

impl From<FgpsError> for Failure {
    fn from(e: FgpsError) -> Self {
        let code = match e {
            FgpsError::Domain(_) | FgpsError::LengthMismatch { .. } => exit::USAGE,
            FgpsError::RootNotConverged { .. } | FgpsError::AccuracyNotReached { .. } => exit::NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: exit::IO,
            message: format!("{e:#}"),
        }
    }
}

fn parse_grid<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, Failure> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return usage(format!("{flag} is empty"));
    }
    items
        .iter()
        .map(|s| s.parse().or_else(|_| usage(format!("{flag}: cannot parse '{s}'"))))
        .collect()
}

fn check_n(n: usize) -> Result<(), Failure> {
    if n == 0 || n % 2 != 0 {
        return usage(format!("--n must be a positive even integer, got {n}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return usage(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn check_positive(flag: &str, v: f64) -> Result<(), Failure> {
    if !(v > 0.0 && v.is_finite()) {
        return usage(format!("{flag} must be positive, got {v}"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<(), Failure> {
    if !(lambda > -0.5 && lambda.is_finite()) {
        return usage(format!("--lambda must exceed -1/2, got {lambda}"));
    }
    Ok(())
}

/// The sin test function is only available on its natural period.
fn check_sin_period(period: Option<f64>) -> Result<(), Failure> {
    match period {
        Some(p) if (p - 2.0 * PI).abs() > 1e-12 => {
            usage(format!("the sin test uses period 2*pi, got --period {p}"))
        }
        _ => Ok(()),
    }
}

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn finish(table: &Table, out: &OutputArgs) -> Outcome {
    let bytes = table.render(out.format)?;
    emit(out.out.as_deref(), &bytes)?;
    Ok(exit::OK)
}

struct Resolved {
    n: usize,
    n_g: usize,
    alpha: f64,
    memory_length: f64,
    lambda: f64,
    period: f64,
}

fn resolve(op: &OperatorArgs, n: usize, n_g: usize, alpha: f64) -> Result<Resolved, Failure> {
    let r = Resolved {
        n: op.n.unwrap_or(n),
        n_g: op.ng.unwrap_or(n_g),
        alpha: op.alpha.unwrap_or(alpha),
        memory_length: op.memory_length.unwrap_or(30.0),
        lambda: op.lambda.unwrap_or(0.0),
        period: op.period.unwrap_or(2.0 * PI),
    };
    check_n(r.n)?;
    check_alpha(r.alpha)?;
    check_positive("--memory-length", r.memory_length)?;
    check_positive("--period", r.period)?;
    check_lambda(r.lambda)?;
    Ok(r)
}

fn sin_errors(op: &FgpsOperator, exact: &ExactSinFd) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let approx = op.apply(&op.grid().sample(f64::sin))?;
    let values = op.grid().nodes().iter().map(|&t| exact.value(t)).collect();
    Ok((approx, values))
}

pub fn fd(op: &OperatorArgs, alpha_grid: Option<&str>, out: &OutputArgs) -> Outcome {
    let r = resolve(op, 20, 1000, 0.5)?;
    check_sin_period(op.period)?;
    let alphas = match alpha_grid {
        Some(g) => parse_grid("--alpha-grid", g)?,
        None => vec![r.alpha],
    };
    alphas.iter().try_for_each(|&a| check_alpha(a))?;

    let grid = PeriodicGrid::new(r.n, 2.0 * PI)?;
    let rule = GegenbauerRule::new(r.lambda, r.n_g)?;
    let mut table = Table::new(
        "fd",
        params(json!({
            "n": r.n, "n_g": r.n_g, "memory_length": r.memory_length,
            "lambda": r.lambda, "period": 2.0 * PI, "alphas": alphas,
        })),
        ["alpha", "t", "approx", "exact", "abs_error"],
    );
    for &alpha in &alphas {
        let operator = FgpsOperator::new(alpha, r.memory_length, grid.clone(), rule.clone())?;
        let exact = ExactSinFd::new(alpha, r.memory_length)?;
        let (approx, values) = sin_errors(&operator, &exact)?;
        let mut worst = 0.0_f64;
        for (l, (&a, &e)) in approx.iter().zip(&values).enumerate() {
            let err = (a - e).abs();
            worst = worst.max(err);
            table.push(vec![alpha.into(), grid.node(l).into(), a.into(), e.into(), err.into()]);
        }
        table.push(vec![alpha.into(), "max".into(), Cell::Empty, Cell::Empty, worst.into()]);
    }
    finish(&table, out)
}

pub fn matrix(op: &OperatorArgs, toeplitz: bool, scaled: bool, out: &OutputArgs) -> Outcome {
    let r = resolve(op, 20, 1000, 0.5)?;
    let operator = FgpsOperator::build(r.alpha, r.memory_length, r.n, r.period, r.lambda, r.n_g)?;
    let factor = if scaled { operator.scale() } else { 1.0 };
    let parameters = params(json!({
        "n": r.n, "n_g": r.n_g, "alpha": r.alpha, "memory_length": r.memory_length,
        "lambda": r.lambda, "period": r.period, "scaled": scaled, "scale": operator.scale(),
    }));
    let table = if toeplitz {
        let mut t = Table::new("matrix", parameters, ["k", "first_row", "first_col"]);
        for k in 0..r.n {
            t.push(vec![
                k.into(),
                (factor * operator.first_row()[k]).into(),
                (factor * operator.first_col()[k]).into(),
            ]);
        }
        t
    } else {
        let columns = std::iter::once("t".to_string()).chain((0..r.n).map(|j| format!("q{j}")));
        let mut t = Table::new("matrix", parameters, columns);
        for (l, row) in operator.dense_matrix().into_iter().enumerate() {
            let mut cells = vec![Cell::Num(operator.grid().node(l))];
            cells.extend(row.into_iter().map(|q| Cell::Num(factor * q)));
            t.push(cells);
        }
        t
    };
    finish(&table, out)
}

fn linspace(end: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![0.0];
    }
    (0..samples)
        .map(|k| end * k as f64 / (samples - 1) as f64)
        .collect()
}

pub fn exact_sin(
    alpha: f64,
    alpha_grid: Option<&str>,
    memory_length: f64,
    samples: usize,
    quadrature: bool,
    out: &OutputArgs,
) -> Outcome {
    let alphas = match alpha_grid {
        Some(g) => parse_grid("--alpha-grid", g)?,
        None => vec![alpha],
    };
    alphas.iter().try_for_each(|&a| check_alpha(a))?;
    check_positive("--memory-length", memory_length)?;
    if samples == 0 {
        return usage("--samples must be at least 1");
    }

    let mut columns = vec!["alpha", "t", "exact"];
    if quadrature {
        columns.extend(["quadrature", "abs_difference"]);
    }
    let mut table = Table::new(
        "exact-sin",
        params(json!({ "alphas": alphas, "memory_length": memory_length, "samples": samples })),
        columns,
    );
    for &a in &alphas {
        let exact = ExactSinFd::new(a, memory_length)?;
        for t in linspace(2.0 * PI, samples) {
            let e = exact.value(t);
            let mut row = vec![a.into(), t.into(), e.into()];
            if quadrature {
                let q = quadrature_fd(f64::cos, a, memory_length, t, DEFAULT_QUADRATURE_TOL)?;
                row.extend([q.into(), (e - q).abs().into()]);
            }
            table.push(row);
        }
    }
    finish(&table, out)
}

pub fn error_sweep(
    op: &OperatorArgs,
    memory_grid: Option<&str>,
    ng_grid: Option<&str>,
    observed: bool,
    out: &OutputArgs,
) -> Outcome {
    let r = resolve(op, 20, 10, 0.5)?;
    if observed {
        check_sin_period(op.period)?;
    }
    let lengths: Vec<f64> = match memory_grid {
        Some(g) => parse_grid("--memory-grid", g)?,
        None => (1..=10).map(|k| 10.0 * k as f64).collect(),
    };
    lengths
        .iter()
        .try_for_each(|&l| check_positive("--memory-grid", l))?;
    let orders: Vec<usize> = match (ng_grid, op.ng) {
        (Some(g), _) => parse_grid("--ng-grid", g)?,
        (None, Some(ng)) => vec![ng],
        (None, None) => vec![10, 20, 40, 80],
    };
    if orders.contains(&0) {
        return usage("N_G values must be at least 1");
    }

    let mut columns = vec![
        "n", "n_g", "memory_length", "alpha", "ln_bound", "bound", "valid", "condition_lmk",
    ];
    if observed {
        columns.push("observed_error");
    }
    let mut table = Table::new(
        "error-sweep",
        params(json!({
            "n": r.n, "alpha": r.alpha, "lambda": r.lambda,
            "memory_lengths": lengths, "n_g": orders, "observed": observed,
        })),
        columns,
    );
    let grid = PeriodicGrid::new(r.n, 2.0 * PI)?;
    for &n_g in &orders {
        let rule = observed.then(|| GegenbauerRule::new(r.lambda, n_g)).transpose()?;
        for &l in &lengths {
            let inputs = ErrorBoundInputs::new(r.n, n_g, l, r.alpha, r.lambda)?;
            let b = bound_estimate(&inputs)?;
            let mut row = vec![
                r.n.into(),
                n_g.into(),
                l.into(),
                r.alpha.into(),
                b.ln_value.into(),
                b.value.into(),
                b.valid.into(),
                b.condition_lmk.into(),
            ];
            if let Some(rule) = &rule {
                let operator = FgpsOperator::new(r.alpha, l, grid.clone(), rule.clone())?;
                let (approx, exact) = sin_errors(&operator, &ExactSinFd::new(r.alpha, l)?)?;
                let worst = approx
                    .iter()
                    .zip(&exact)
                    .map(|(a, e)| (a - e).abs())
                    .fold(0.0, f64::max);
                row.push(worst.into());
            }
            table.push(row);
        }
    }
    finish(&table, out)
}

pub fn gamma(alpha_grid: Option<&str>, ng_grid: &str, out: &OutputArgs) -> Outcome {
    let alphas: Vec<f64> = match alpha_grid {
        Some(g) => parse_grid("--alpha-grid", g)?,
        None => (1..100).map(|k| k as f64 / 100.0).collect(),
    };
    alphas.iter().try_for_each(|&a| check_alpha(a))?;
    let orders: Vec<usize> = parse_grid("--ng-grid", ng_grid)?;

    let mut table = Table::new(
        "gamma",
        params(json!({ "alphas": alphas, "n_g": orders })),
        ["n_g", "alpha", "gamma", "ln_gamma"],
    );
    for &n_g in &orders {
        for &a in &alphas {
            table.push(vec![
                n_g.into(),
                a.into(),
                gamma_factor(a, n_g)?.into(),
                ln_gamma_factor(a, n_g)?.into(),
            ]);
        }
    }
    finish(&table, out)
}

pub struct SolveArgs {
    pub op: OperatorArgs,
    pub problem: Option<PathBuf>,
    pub alpha_grid: Option<String>,
    pub samples: usize,
    pub max_iter: usize,
    pub feas_tol: f64,
    pub initial_value: f64,
    pub out: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    schema_version: u32,
    parameters: Value,
    max_adfe: f64,
    #[serde(flatten)]
    result: &'a NlpResult,
}

fn load_problem(path: Option<&PathBuf>) -> Result<PolynomialProblem, Failure> {
    let Some(path) = path else {
        return Ok(PolynomialProblem::benchmark());
    };
    let text = std::fs::read_to_string(path).or_else(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let problem: PolynomialProblem =
        serde_json::from_str(&text).or_else(|e| usage(format!("malformed problem {}: {e}", path.display())))?;
    problem.validate()?;
    Ok(problem)
}

fn trajectory_table(result: &NlpResult, grid: &PeriodicGrid, samples: usize, parameters: &Value) -> Result<Table, Failure> {
    let n_x = result.states.first().map_or(0, Vec::len);
    let n_u = result.controls.first().map_or(0, Vec::len);
    let columns = std::iter::once("t".to_string())
        .chain((1..=n_x).map(|i| format!("x{i}")))
        .chain((1..=n_u).map(|j| format!("u{j}")));
    let mut table = Table::new("solve-pfocp", params(parameters.clone()), columns);
    for t in linspace(grid.period(), samples) {
        let (x, u) = reconstruct(result, grid, t)?;
        let mut row = vec![Cell::Num(t)];
        row.extend(x.into_iter().chain(u).map(Cell::Num));
        table.push(row);
    }
    Ok(table)
}

pub fn solve_pfocp(args: &SolveArgs) -> Outcome {
    let r = resolve(&args.op, 12, 40, 0.99)?;
    let alphas = match &args.alpha_grid {
        Some(g) => parse_grid("--alpha-grid", g)?,
        None => vec![r.alpha],
    };
    alphas.iter().try_for_each(|&a| check_alpha(a))?;
    if alphas.len() > 1 && args.out.is_none() {
        return usage("an --alpha-grid sweep needs --out");
    }
    if args.samples == 0 {
        return usage("--samples must be at least 1");
    }
    if args.max_iter == 0 {
        return usage("--max-iter must be at least 1");
    }
    check_positive("--feas-tol", args.feas_tol)?;
    if !args.initial_value.is_finite() {
        return usage("--initial-value must be finite");
    }
    let definition = load_problem(args.problem.as_ref())?;
    let Some(period) = args.op.period.or(definition.period) else {
        return usage("the problem has no period; pass --period");
    };

    let functions = Arc::new(definition);
    let opts = SolverOptions {
        max_iter: args.max_iter,
        feasibility_tol: args.feas_tol,
        ..SolverOptions::default()
    };
    let problem_name = args
        .problem
        .as_ref()
        .map_or("benchmark".to_string(), |p| p.display().to_string());
    let sweep = args.alpha_grid.is_some();
    let mut code = exit::OK;
    for &alpha in &alphas {
        let problem = PfocpProblem::new(functions.clone(), period, alpha, r.memory_length)?;
        let guess = vec![args.initial_value; r.n * (problem.n_x() + problem.n_u())];
        let result = solve(&problem, r.n, r.lambda, r.n_g, Some(&guess), &opts)?;
        let parameters = json!({
            "problem": problem_name, "n": r.n, "n_g": r.n_g, "alpha": alpha,
            "memory_length": r.memory_length, "lambda": r.lambda, "period": period,
            "max_iter": args.max_iter, "feas_tol": args.feas_tol, "initial_value": args.initial_value,
        });
        let grid = PeriodicGrid::new(r.n, period)?;
        let trajectory = trajectory_table(&result, &grid, args.samples, &parameters)?;
        let document = SolveDocument {
            schema_version: SCHEMA_VERSION,
            parameters,
            max_adfe: result.max_adfe(),
            result: &result,
        };

        let (json_path, csv_path) = match &args.out {
            Some(out) if sweep => (
                Some(sibling(out, &format!("_alpha{alpha}"), "json")),
                Some(sibling(out, &format!("_alpha{alpha}.trajectory"), "csv")),
            ),
            Some(out) => (
                Some(out.clone()),
                Some(args.trajectory.clone().unwrap_or_else(|| sibling(out, ".trajectory", "csv"))),
            ),
            None => (None, args.trajectory.clone()),
        };
        emit(json_path.as_deref(), &json_bytes(&document)?)?;
        if let Some(p) = csv_path {
            emit(Some(&p), &trajectory.render(crate::output::Format::Csv)?)?;
        }

        eprintln!(
            "alpha = {alpha}: J = {:.10e}, max ADFE = {:.2e}, {} iterations, {}",
            result.objective,
            result.max_adfe(),
            result.iterations,
            if result.converged { "converged" } else { "not converged" }
        );
        if result.collapsed_to_static {
            eprintln!("alpha = {alpha}: collapsed to the static solution X = 0");
        }
        if !result.converged {
            code = exit::NOT_CONVERGED;
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse_and_reject_empty() {
        assert_eq!(parse_grid::<f64>("--g", "0.1, 0.5,0.9").unwrap(), vec![0.1, 0.5, 0.9]);
        assert_eq!(parse_grid::<f64>("--g", "").unwrap_err().code, exit::USAGE);
        assert_eq!(parse_grid::<usize>("--g", "4,x").unwrap_err().code, exit::USAGE);
    }

    #[test]
    fn validation_codes() {
        assert!(check_n(3).is_err());
        assert!(check_alpha(1.0).is_err());
        assert!(check_lambda(-0.5).is_err());
        assert!(check_sin_period(Some(1.0)).is_err());
        assert!(check_sin_period(Some(2.0 * PI)).is_ok());
        let e: Failure = FgpsError::AccuracyNotReached { estimate: 0.0, error: 1.0 }.into();
        assert_eq!(e.code, exit::NUMERIC);
    }

    #[test]
    fn linspace_includes_end() {
        let t = linspace(2.0, 5);
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(linspace(2.0, 1), vec![0.0]);
    }
}
