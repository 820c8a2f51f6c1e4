//! Error-table presets and the comparison grid.
//!
//! The first preset sweeps `f(x, y) = xy` over eleven points and nine
//! index values; the second compares `Ŷ` against the classical operator on
//! `f(x, y) = x³y + 6y² + x²`. The published tables omit two inputs, which
//! are therefore recovered numerically rather than assumed:
//!
//! * the base of the first table — inverting `error = xy(1 − λ_m²)` on its
//!   first row pins `a ≈ 1.32`, which is this module's default;
//! * the evaluation point of the second table — found by a two-dimensional
//!   root solve matching its first two rows through closed-form moments,
//!   then validated against every remaining row.

use crate::error::{Error, Result};
use crate::fnexpr::{builtin, BivariateFn};
use crate::kernel::{lambda, lambda_parts, OperatorParams};
use crate::operator::{apply_szasz, apply_yhat, EvalConfig};

/// Published reference errors the presets reproduce and validate against.
pub mod reference {
    /// Evaluation points of the first table.
    pub const TABLE1_POINTS: [(f64, f64); 11] = [
        (0.1, 0.1),
        (0.1, 0.3),
        (0.1, 0.6),
        (0.2, 0.1),
        (0.2, 0.4),
        (0.3, 0.4),
        (0.6, 0.2),
        (0.7, 0.8),
        (0.8, 0.7),
        (0.9, 0.3),
        (0.9, 0.9),
    ];

    /// Index values `m = n` of the first table.
    pub const TABLE1_MS: [u32; 9] = [5, 15, 35, 50, 80, 120, 275, 350, 500];

    /// Reference errors `|Ŷ(xy) − xy|`, row per point, column per index.
    pub const TABLE1_ERRORS: [[f64; 9]; 11] = [
        [0.000542559, 0.000183666, 0.0000790616, 0.000055398, 0.0000346538, 0.0000231137, 0.0000100915, 7.92971e-6, 5.55135e-6],
        [0.00162768, 0.000550997, 0.000237185, 0.000166194, 0.000103961, 0.0000693411, 0.0000302744, 0.0000237891, 0.0000166541],
        [0.00325536, 0.00110199, 0.00047437, 0.000332388, 0.000207923, 0.000138682, 0.0000605487, 0.0000475783, 0.0000333081],
        [0.00108512, 0.000367331, 0.000158123, 0.000110796, 0.0000693076, 0.0000462274, 0.0000201829, 0.0000158594, 0.0000111027],
        [0.00434047, 0.00146933, 0.000632493, 0.000443184, 0.000277231, 0.000184909, 0.0000807316, 0.0000634377, 0.0000444108],
        [0.00651071, 0.00220399, 0.000948739, 0.000664776, 0.000415846, 0.000277364, 0.000121097, 0.0000951566, 0.0000666162],
        [0.00651071, 0.00220399, 0.000948739, 0.000664776, 0.000415846, 0.000277364, 0.000121097, 0.0000951566, 0.0000666162],
        [0.0303833, 0.0102853, 0.00442745, 0.00310229, 0.00194061, 0.00129437, 0.000565121, 0.000444064, 0.000310876],
        [0.0303833, 0.0102853, 0.00442745, 0.00310229, 0.00194061, 0.00129437, 0.000565121, 0.000444064, 0.000310876],
        [0.0146491, 0.00495897, 0.00213466, 0.00149575, 0.000935653, 0.00062407, 0.000272469, 0.000214102, 0.000149886],
        [0.0439473, 0.0148769, 0.00640399, 0.00448724, 0.00280696, 0.00187221, 0.000817408, 0.000642307, 0.000449659],
    ];

    /// Index values `m = n` of the second table.
    pub const TABLE2_MS: [u32; 9] = [3, 13, 23, 33, 53, 103, 163, 333, 543];

    /// Reference errors `|Ŷf − f|` of the second table.
    pub const TABLE2_YHAT: [f64; 9] = [
        0.219254, 0.0521816, 0.0296115, 0.0206706, 0.0128878, 0.00663879, 0.00419684,
        0.00205507, 0.00126047,
    ];

    /// Reference errors `|Sf − f|` of the second table.
    pub const TABLE2_SZASZ: [f64; 9] = [
        0.235444, 0.0541361, 0.0305841, 0.0213122, 0.0132677, 0.00682619, 0.00431326,
        0.0021112, 0.00129469,
    ];
}

/// Default base recovered for the first table.
pub const TABLE1_DEFAULT_A: f64 = 1.32;
/// Base the second table states explicitly.
pub const TABLE2_DEFAULT_A: f64 = 1.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TablePreset {
    Table1,
    Table2,
}

impl std::str::FromStr for TablePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(TablePreset::Table1),
            "table2" => Ok(TablePreset::Table2),
            other => Err(Error::invalid(format!(
                "unknown preset `{other}` (expected `table1` or `table2`)"
            ))),
        }
    }
}

/// One `(point, m)` cell of an error table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub x: f64,
    pub y: f64,
    pub m: u32,
    pub error_yhat: f64,
    pub error_szasz: Option<f64>,
}

/// Where the second table's evaluation point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    Provided,
    Recovered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub preset: TablePreset,
    pub a: f64,
    pub f_label: String,
    pub rows: Vec<TableRow>,
    /// The single evaluation point and its provenance (second preset only).
    pub point: Option<((f64, f64), PointSource)>,
}

/// Analytic shortcut for the first table: `|Ŷ(xy) − xy| = xy(1 − λ_m²)`.
pub fn table1_shortcut(m: u32, a: f64, x: f64, y: f64) -> Result<f64> {
    let l = lambda(m, a)?;
    Ok(x * y * (1.0 - l * l))
}

/// `Ŷ_{m,m,a}(x³y + 6y² + x²)` in closed form via Poisson raw moments
/// (`E[K] = μ`, `E[K²] = μ² + μ`, `E[K³] = μ³ + 3μ² + μ`).
pub fn yhat_t2_closed(m: u32, a: f64, x: f64, y: f64) -> f64 {
    let (lam, _) = lambda_parts(m, a);
    let mf = m as f64;
    let mu_x = mf * x * lam;
    let mu_y = mf * y * lam;
    let et3 = (mu_x.powi(3) + 3.0 * mu_x * mu_x + mu_x) / mf.powi(3);
    let et2 = (mu_x * mu_x + mu_x) / (mf * mf);
    let es1 = mu_y / mf;
    let es2 = (mu_y * mu_y + mu_y) / (mf * mf);
    et3 * es1 + 6.0 * es2 + et2
}

/// `S_{m,m}(x³y + 6y² + x²)` in closed form (Poisson means `mx`, `my`).
pub fn szasz_t2_closed(m: u32, x: f64, y: f64) -> f64 {
    let mf = m as f64;
    (x.powi(3) + 3.0 * x * x / mf + x / (mf * mf)) * y + 6.0 * (y * y + y / mf) + x * x
}

fn t2(x: f64, y: f64) -> f64 {
    x.powi(3) * y + 6.0 * y * y + x * x
}

/// Recover the second table's unstated evaluation point: solve the first
/// two rows for `(x, y)` by a damped Newton iteration on the closed
/// forms, then validate the solution on every remaining row of both
/// columns (relative error ≤ 1e−3).
pub fn recover_table2_point(a: f64) -> Result<(f64, f64)> {
    let targets = (reference::TABLE2_YHAT[0], reference::TABLE2_YHAT[1]);
    let ms = (reference::TABLE2_MS[0], reference::TABLE2_MS[1]);
    let residual = |x: f64, y: f64| -> (f64, f64) {
        (
            (yhat_t2_closed(ms.0, a, x, y) - t2(x, y)) - targets.0,
            (yhat_t2_closed(ms.1, a, x, y) - t2(x, y)) - targets.1,
        )
    };

    let starts: Vec<(f64, f64)> = std::iter::once((0.5, 0.5))
        .chain((1..=9).flat_map(|i| (1..=9).map(move |j| (0.1 * i as f64, 0.1 * j as f64))))
        .collect();
    let mut solution = None;
    'starts: for &(mut x, mut y) in &starts {
        for _ in 0..60 {
            let (f1, f2) = residual(x, y);
            if f1.abs().max(f2.abs()) < 1e-12 {
                solution = Some((x, y));
                break 'starts;
            }
            // Finite-difference Jacobian.
            let h = 1e-7;
            let (f1x, f2x) = residual(x + h, y);
            let (f1y, f2y) = residual(x, y + h);
            let (a11, a12) = ((f1x - f1) / h, (f1y - f1) / h);
            let (a21, a22) = ((f2x - f2) / h, (f2y - f2) / h);
            let det = a11 * a22 - a12 * a21;
            if det.abs() < 1e-300 {
                break;
            }
            let dx = (f1 * a22 - f2 * a12) / det;
            let dy = (a11 * f2 - a21 * f1) / det;
            // Damped, clamped to the nonnegative quadrant.
            let mut step = 1.0;
            while step > 1e-6 && (x - step * dx < 0.0 || y - step * dy < 0.0) {
                step *= 0.5;
            }
            x -= step * dx;
            y -= step * dy;
            if !(x.is_finite() && y.is_finite()) {
                break;
            }
        }
    }
    let (x, y) = solution
        .ok_or_else(|| Error::Recovery("Newton iteration did not converge".into()))?;

    for (i, &m) in reference::TABLE2_MS.iter().enumerate() {
        let err_y = yhat_t2_closed(m, a, x, y) - t2(x, y);
        let rel_y = (err_y - reference::TABLE2_YHAT[i]).abs() / reference::TABLE2_YHAT[i];
        let err_s = szasz_t2_closed(m, x, y) - t2(x, y);
        let rel_s = (err_s - reference::TABLE2_SZASZ[i]).abs() / reference::TABLE2_SZASZ[i];
        if rel_y > 1e-3 || rel_s > 1e-3 {
            return Err(Error::Recovery(format!(
                "recovered point ({x:.6}, {y:.6}) fails validation at m = {m} \
                 (relative errors {rel_y:.2e}, {rel_s:.2e})"
            )));
        }
    }
    Ok((x, y))
}

/// Produce a full preset table by truncated-series evaluation.
pub fn error_table(
    preset: TablePreset,
    a: f64,
    point_override: Option<(f64, f64)>,
    cfg: &EvalConfig,
) -> Result<ErrorTable> {
    match preset {
        TablePreset::Table1 => {
            let f = builtin("xy")?;
            let mut rows = Vec::with_capacity(99);
            for &(x, y) in &reference::TABLE1_POINTS {
                for &m in &reference::TABLE1_MS {
                    let p = OperatorParams::diagonal(m, a)?;
                    let v = apply_yhat(&p, &f, x, y, cfg)?;
                    rows.push(TableRow {
                        x,
                        y,
                        m,
                        error_yhat: (v.value - x * y).abs(),
                        error_szasz: None,
                    });
                }
            }
            Ok(ErrorTable { preset, a, f_label: f.label().to_owned(), rows, point: None })
        }
        TablePreset::Table2 => {
            let (point, source) = match point_override {
                Some(p) => (p, PointSource::Provided),
                None => (recover_table2_point(a)?, PointSource::Recovered),
            };
            let f = builtin("t2-poly")?;
            let (x, y) = point;
            let exact = f.eval(x, y)?;
            let mut rows = Vec::with_capacity(9);
            for &m in &reference::TABLE2_MS {
                let p = OperatorParams::diagonal(m, a)?;
                let vy = apply_yhat(&p, &f, x, y, cfg)?;
                let vs = apply_szasz(m, m, &f, x, y, cfg)?;
                rows.push(TableRow {
                    x,
                    y,
                    m,
                    error_yhat: (vy.value - exact).abs(),
                    error_szasz: Some((vs.value - exact).abs()),
                });
            }
            Ok(ErrorTable {
                preset,
                a,
                f_label: f.label().to_owned(),
                rows,
                point: Some((point, source)),
            })
        }
    }
}

/// One point of a comparison sweep (the data behind the surface plots).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRecord {
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub yhat: f64,
    pub szasz: f64,
    pub err_yhat: f64,
    pub err_szasz: f64,
}

/// Evaluate `f`, `Ŷf` and `Sf` over a `steps × steps` grid on
/// `[0, xmax] × [0, ymax]`, row-major in the `x` index.
pub fn comparison_grid(
    f: &BivariateFn,
    params: &OperatorParams,
    xmax: f64,
    ymax: f64,
    steps: usize,
    cfg: &EvalConfig,
) -> Result<Vec<GridRecord>> {
    if steps < 2 {
        return Err(Error::invalid("steps must be ≥ 2"));
    }
    if !(xmax > 0.0 && ymax > 0.0) {
        return Err(Error::invalid("grid domain must be positive"));
    }
    let mut out = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        let x = xmax * i as f64 / (steps - 1) as f64;
        for j in 0..steps {
            let y = ymax * j as f64 / (steps - 1) as f64;
            let exact = f.eval(x, y)?;
            let vy = apply_yhat(params, f, x, y, cfg)?.value;
            let vs = apply_szasz(params.m(), params.n(), f, x, y, cfg)?.value;
            out.push(GridRecord {
                x,
                y,
                f: exact,
                yhat: vy,
                szasz: vs,
                err_yhat: (vy - exact).abs(),
                err_szasz: (vs - exact).abs(),
            });
        }
    }
    Ok(out)
}
