//! `szasz2d` — evaluate the bivariate operators, emit moments, reproduce
//! the error tables and figure data, and run convergence studies.

mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use output::{json_to_string, num, Format, OutputSpec, Records};
use szasz2d::analysis::{
    self, comparison_grid, error_table, order_fit, voronovskaya_check, PointSource, TablePreset,
};
use szasz2d::deriv::{dx_yhat, dy_yhat, DerivMethod};
use szasz2d::moments::{delta_prime, moments};
use szasz2d::operator::{apply_szasz, apply_yhat, EvalConfig};
use szasz2d::{builtin, BivariateFn, Error, OperatorParams};

#[derive(Parser)]
#[command(
    name = "szasz2d",
    about = "Bivariate Szász–Mirakjan type operators: evaluation, moments, tables, convergence studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one operator at one point and report the error against f.
    Eval(EvalArgs),
    /// Reproduce an error-table preset.
    Table(TableArgs),
    /// Closed-form raw and central moments at a point.
    Moments(MomentsArgs),
    /// Scaled-sequence study of the Voronovskaya limit.
    Voronovskaya(VoronArgs),
    /// Partial derivative of the operator at a point.
    Deriv(DerivArgs),
    /// Comparison sweep of f, Ŷf and Sf over a rectangle.
    Grid(GridArgs),
    /// Convergence-order fit of a reference table column.
    Order(OrderArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Significant digits for numeric fields.
    #[arg(long, default_value_t = 9)]
    precision: usize,
}

impl OutputArgs {
    fn spec(&self) -> OutputSpec {
        OutputSpec { format: self.format, path: self.out.clone() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichOperator {
    Yhat,
    Szasz,
}

#[derive(Args)]
struct EvalArgs {
    /// Function: an expression in x, y or `builtin:NAME`.
    #[arg(long)]
    f: String,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    /// Base a > 1 (ignored by --operator szasz).
    #[arg(long, default_value_t = 1.32)]
    a: f64,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long, value_enum, default_value = "yhat")]
    operator: WhichOperator,
    /// Tail tolerance of the truncated series.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Window cap per axis before truncation fails.
    #[arg(long, default_value_t = 1_000_000)]
    max_terms: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    /// `table1` or `table2`.
    #[arg(long)]
    preset: String,
    /// Base; defaults to 1.32 for table1 and 1.30 for table2.
    #[arg(long)]
    a: Option<f64>,
    /// Evaluation point `X,Y` (table2 only; recovered when omitted).
    #[arg(long)]
    point: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VoronArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long)]
    a: f64,
    /// Comma-separated index values, e.g. `100,200,400`.
    #[arg(long = "m-list")]
    m_list: String,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DerivArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    /// Differentiation axis.
    #[arg(long, default_value = "x")]
    axis: String,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    xmax: f64,
    #[arg(long, default_value_t = 1.0)]
    ymax: f64,
    #[arg(long, default_value_t = 21)]
    steps: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OrderArgs {
    /// `table1` (requires --point) or `table2`.
    #[arg(long)]
    preset: String,
    /// One of table1's points, e.g. `0.9,0.9`.
    #[arg(long)]
    point: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Exit policy: 2 for flag/expression parse problems, 3 for truncation or
/// recovery failures, 1 for any other evaluation failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::UnknownIdentifier { .. }
        | Error::UnknownBuiltin(_)
        | Error::InvalidParameter(_) => 2,
        Error::Truncation { .. } | Error::Recovery(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Table(args) => cmd_table(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Voronovskaya(args) => cmd_voronovskaya(args),
        Command::Deriv(args) => cmd_deriv(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Order(args) => cmd_order(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn parse_function(spec: &str) -> Result<BivariateFn, Error> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        builtin(name)
    } else {
        BivariateFn::from_expr(spec)
    }
}

fn parse_point(s: &str) -> Result<(f64, f64), Error> {
    let mut it = s.split(',');
    let bad = || Error::InvalidParameter(format!("expected a point `X,Y`, got `{s}`"));
    let x: f64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let y: f64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    if it.next().is_some() {
        return Err(bad());
    }
    Ok((x, y))
}

fn parse_m_list(s: &str) -> Result<Vec<u32>, Error> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<u32>().map_err(|_| {
                Error::InvalidParameter(format!("bad --m-list entry `{}`", tok.trim()))
            })
        })
        .collect()
}

fn cfg_with(tol: f64, max_terms: usize) -> EvalConfig {
    EvalConfig { tail_tol: tol, max_terms_per_axis: max_terms, ..EvalConfig::default() }
}

fn emit(spec: &OutputSpec, records: Records, metadata: Option<Map<String, Value>>) -> Result<(), Error> {
    let content = match spec.format {
        Format::Csv => records.to_csv(),
        Format::Json => {
            let rows = records.to_json_rows();
            let value = match metadata {
                Some(mut meta) => {
                    meta.insert("rows".into(), rows);
                    Value::Object(meta)
                }
                None => rows,
            };
            json_to_string(&value)
        }
    };
    spec.write(&content)
        .map_err(|e| Error::InvalidParameter(format!("cannot write output: {e}")))
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let f = parse_function(&args.f)?;
    let cfg = cfg_with(args.tol, args.max_terms);
    let (op_name, result) = match args.operator {
        WhichOperator::Yhat => {
            let params = OperatorParams::new(args.m, args.n, args.a)?;
            ("yhat", apply_yhat(&params, &f, args.x, args.y, &cfg)?)
        }
        WhichOperator::Szasz => {
            ("szasz", apply_szasz(args.m, args.n, &f, args.x, args.y, &cfg)?)
        }
    };
    let exact = f.eval(args.x, args.y)?;
    let p = args.output.precision;
    let records = Records {
        columns: vec![
            "operator", "m", "n", "a", "x", "y", "value", "error", "terms_k1", "terms_k2",
            "tail_bound",
        ],
        rows: vec![vec![
            Value::from(op_name),
            Value::from(args.m),
            Value::from(args.n),
            num(args.a, p),
            num(args.x, p),
            num(args.y, p),
            num(result.value, p),
            num((result.value - exact).abs(), p),
            Value::from(result.terms_used.0),
            Value::from(result.terms_used.1),
            num(result.tail_bound, p),
        ]],
    };
    emit(&args.output.spec(), records, None)
}

fn cmd_table(args: TableArgs) -> Result<(), Error> {
    let preset: TablePreset = args.preset.parse()?;
    let a = args.a.unwrap_or(match preset {
        TablePreset::Table1 => analysis::TABLE1_DEFAULT_A,
        TablePreset::Table2 => analysis::TABLE2_DEFAULT_A,
    });
    let point = args.point.as_deref().map(parse_point).transpose()?;
    let cfg = cfg_with(args.tol, 1_000_000);
    let table = error_table(preset, a, point, &cfg)?;
    let p = args.output.precision;

    let mut columns = vec!["x", "y", "m", "error_yhat"];
    let two_ops = matches!(preset, TablePreset::Table2);
    if two_ops {
        columns.push("error_szasz");
        columns.push("point_source");
    }
    let source_label = table.point.map(|(_, s)| match s {
        PointSource::Provided => "provided",
        PointSource::Recovered => "recovered",
    });
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                num(r.x, p),
                num(r.y, p),
                Value::from(r.m),
                num(r.error_yhat, p),
            ];
            if two_ops {
                row.push(r.error_szasz.map(|e| num(e, p)).unwrap_or(Value::Null));
                row.push(Value::from(source_label.unwrap_or("provided")));
            }
            row
        })
        .collect();

    let mut meta = Map::new();
    meta.insert("preset".into(), Value::from(args.preset.clone()));
    meta.insert("a".into(), num(a, p));
    meta.insert("f".into(), Value::from(table.f_label.clone()));
    if let Some(((x, y), _)) = table.point {
        let mut pt = Map::new();
        pt.insert("x".into(), num(x, p));
        pt.insert("y".into(), num(y, p));
        pt.insert("source".into(), Value::from(source_label.unwrap()));
        meta.insert("point".into(), Value::Object(pt));
    }
    emit(&args.output.spec(), Records { columns, rows }, Some(meta))
}

fn cmd_moments(args: MomentsArgs) -> Result<(), Error> {
    let params = OperatorParams::new(args.m, args.n, args.a)?;
    let ms = moments(&params, args.x, args.y)?;
    let dp = delta_prime(&params, args.x, args.y);
    let p = args.output.precision;
    let records = Records {
        columns: vec![
            "m", "n", "a", "x", "y", "e10", "e01", "e20", "e02", "c1x", "c1y", "c2x", "c2y",
            "c4x", "c4y", "delta_m", "delta_n",
        ],
        rows: vec![vec![
            Value::from(args.m),
            Value::from(args.n),
            num(args.a, p),
            num(args.x, p),
            num(args.y, p),
            num(ms.e10, p),
            num(ms.e01, p),
            num(ms.e20, p),
            num(ms.e02, p),
            num(ms.c1x, p),
            num(ms.c1y, p),
            num(ms.c2x, p),
            num(ms.c2y, p),
            num(ms.c4x, p),
            num(ms.c4y, p),
            num(dp.dm, p),
            num(dp.dn, p),
        ]],
    };
    emit(&args.output.spec(), records, None)
}

fn cmd_voronovskaya(args: VoronArgs) -> Result<(), Error> {
    let f = parse_function(&args.f)?;
    let m_list = parse_m_list(&args.m_list)?;
    let cfg = cfg_with(args.tol, 4_000_000);
    let study = voronovskaya_check(&f, args.x, args.y, args.a, &m_list, &cfg)?;
    let p = args.output.precision;
    let order_value = study.order.map(|o| num(o, p)).unwrap_or(Value::Null);
    let rows = study
        .records
        .iter()
        .map(|r| {
            vec![
                Value::from(r.m),
                num(args.a, p),
                num(args.x, p),
                num(args.y, p),
                num(r.scaled, p),
                num(study.limit, p),
                num(r.residual, p),
                order_value.clone(),
            ]
        })
        .collect();
    let records = Records {
        columns: vec!["m", "a", "x", "y", "value", "limit", "residual", "order"],
        rows,
    };
    let mut meta = Map::new();
    meta.insert("f".into(), Value::from(f.label()));
    meta.insert("limit".into(), num(study.limit, p));
    meta.insert("order".into(), order_value);
    emit(&args.output.spec(), records, Some(meta))
}

fn cmd_deriv(args: DerivArgs) -> Result<(), Error> {
    let f = parse_function(&args.f)?;
    let params = OperatorParams::new(args.m, args.n, args.a)?;
    let cfg = cfg_with(args.tol, 1_000_000);
    let result = match args.axis.as_str() {
        "x" => dx_yhat(&params, &f, args.x, args.y, &cfg)?,
        "y" => dy_yhat(&params, &f, args.x, args.y, &cfg)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "axis must be `x` or `y`, got `{other}`"
            )))
        }
    };
    let p = args.output.precision;
    let records = Records {
        columns: vec!["axis", "m", "n", "a", "x", "y", "value", "method", "step"],
        rows: vec![vec![
            Value::from(args.axis.clone()),
            Value::from(args.m),
            Value::from(args.n),
            num(args.a, p),
            num(args.x, p),
            num(args.y, p),
            num(result.value, p),
            Value::from(match result.method {
                DerivMethod::Identity => "identity",
                DerivMethod::FiniteDifference => "finite-difference",
            }),
            result.step.map(|h| num(h, p)).unwrap_or(Value::Null),
        ]],
    };
    emit(&args.output.spec(), records, None)
}

fn cmd_grid(args: GridArgs) -> Result<(), Error> {
    let f = parse_function(&args.f)?;
    let params = OperatorParams::new(args.m, args.n, args.a)?;
    let cfg = cfg_with(args.tol, 1_000_000);
    let grid = comparison_grid(&f, &params, args.xmax, args.ymax, args.steps, &cfg)?;
    let p = args.output.precision;
    let rows = grid
        .iter()
        .map(|r| {
            vec![
                num(r.x, p),
                num(r.y, p),
                num(r.f, p),
                num(r.yhat, p),
                num(r.szasz, p),
                num(r.err_yhat, p),
                num(r.err_szasz, p),
            ]
        })
        .collect();
    let records = Records {
        columns: vec!["x", "y", "f", "yhat", "szasz", "error_yhat", "error_szasz"],
        rows,
    };
    let mut meta = Map::new();
    meta.insert("f".into(), Value::from(f.label()));
    meta.insert("m".into(), Value::from(args.m));
    meta.insert("n".into(), Value::from(args.n));
    meta.insert("a".into(), num(args.a, p));
    emit(&args.output.spec(), records, Some(meta))
}

fn cmd_order(args: OrderArgs) -> Result<(), Error> {
    use szasz2d::analysis::tables::reference;
    let preset: TablePreset = args.preset.parse()?;
    let (samples, point): (Vec<(f64, f64)>, Option<(f64, f64)>) = match preset {
        TablePreset::Table1 => {
            let point = args
                .point
                .as_deref()
                .map(parse_point)
                .transpose()?
                .ok_or_else(|| {
                    Error::InvalidParameter("--preset table1 requires --point".into())
                })?;
            let idx = reference::TABLE1_POINTS
                .iter()
                .position(|&(x, y)| (x - point.0).abs() < 1e-9 && (y - point.1).abs() < 1e-9)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "({}, {}) is not one of the table1 points",
                        point.0, point.1
                    ))
                })?;
            let samples = reference::TABLE1_MS
                .iter()
                .zip(reference::TABLE1_ERRORS[idx].iter())
                .map(|(&m, &e)| (m as f64, e))
                .collect();
            (samples, Some(point))
        }
        TablePreset::Table2 => {
            let samples = reference::TABLE2_MS
                .iter()
                .zip(reference::TABLE2_YHAT.iter())
                .map(|(&m, &e)| (m as f64, e))
                .collect();
            (samples, None)
        }
    };
    let (order, constant) = order_fit(&samples)?;
    let p = args.output.precision;
    let records = Records {
        columns: vec!["preset", "x", "y", "order", "constant"],
        rows: vec![vec![
            Value::from(args.preset.clone()),
            point.map(|(x, _)| num(x, p)).unwrap_or(Value::Null),
            point.map(|(_, y)| num(y, p)).unwrap_or(Value::Null),
            num(order, p),
            num(constant, p),
        ]],
    };
    emit(&args.output.spec(), records, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parsing() {
        assert_eq!(parse_point("0.9,0.9").unwrap(), (0.9, 0.9));
        assert_eq!(parse_point(" 1 , 2 ").unwrap(), (1.0, 2.0));
        assert!(parse_point("1").is_err());
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("a,b").is_err());
    }

    #[test]
    fn m_list_parsing() {
        assert_eq!(parse_m_list("100,200,400").unwrap(), vec![100, 200, 400]);
        assert!(parse_m_list("100,x").is_err());
    }

    #[test]
    fn sig_digit_formatting() {
        assert_eq!(fmt_sig(0.000542559123, 6), "0.000542559");
        assert_eq!(fmt_sig(0.0, 9), "0");
        assert_eq!(fmt_sig(1.0, 9), "1");
        assert_eq!(fmt_sig(-2.5e-13, 3), "-2.5e-13");
    }
}
