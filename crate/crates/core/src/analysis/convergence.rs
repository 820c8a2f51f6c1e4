//! Voronovskaya asymptotics and convergence-order estimation.

use crate::error::{Error, Result};
use crate::fnexpr::BivariateFn;
use crate::kernel::OperatorParams;
use crate::operator::{apply_yhat, EvalConfig};

/// One step of the scaled sequence `m·(Ŷ_{m,m,a} f − f)(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronovskayaRecord {
    pub m: u32,
    /// `m·(Ŷf − f)` at the study point.
    pub scaled: f64,
    /// `|scaled − limit|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronovskayaStudy {
    /// The limit `−(x·log a/2)·f_x − (y·log a/2)·f_y + (x/2)·f_xx + (y/2)·f_yy`.
    pub limit: f64,
    pub records: Vec<VoronovskayaRecord>,
    /// Empirical order of `residual` in `1/m` (log–log fit), when the
    /// sequence allows one.
    pub order: Option<f64>,
}

/// Step for the central-difference partials when `f` does not carry exact
/// ones.
const PARTIAL_STEP: f64 = 1e-4;

fn partials_at(f: &BivariateFn, x: f64, y: f64) -> Result<(f64, f64, f64, f64)> {
    if let Some(p) = f.partials() {
        return Ok(((p.fx)(x, y), (p.fy)(x, y), (p.fxx)(x, y), (p.fyy)(x, y)));
    }
    let h = PARTIAL_STEP;
    let fv = f.eval(x, y)?;
    // One-sided second differences when the centered stencil would leave
    // the quadrant.
    let (fx, fxx) = if x >= h {
        let (hi, lo) = (f.eval(x + h, y)?, f.eval(x - h, y)?);
        ((hi - lo) / (2.0 * h), (hi - 2.0 * fv + lo) / (h * h))
    } else {
        let (f1, f2) = (f.eval(x + h, y)?, f.eval(x + 2.0 * h, y)?);
        ((f1 - fv) / h, (f2 - 2.0 * f1 + fv) / (h * h))
    };
    let (fy, fyy) = if y >= h {
        let (hi, lo) = (f.eval(x, y + h)?, f.eval(x, y - h)?);
        ((hi - lo) / (2.0 * h), (hi - 2.0 * fv + lo) / (h * h))
    } else {
        let (f1, f2) = (f.eval(x, y + h)?, f.eval(x, y + 2.0 * h)?);
        ((f1 - fv) / h, (f2 - 2.0 * f1 + fv) / (h * h))
    };
    Ok((fx, fy, fxx, fyy))
}

/// The Voronovskaya limit for `f` at `(x, y)` with base `a`.
pub fn voronovskaya_limit(f: &BivariateFn, x: f64, y: f64, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::invalid(format!("base must satisfy a > 1 (got a = {a})")));
    }
    let (fx, fy, fxx, fyy) = partials_at(f, x, y)?;
    let log_a = a.ln();
    Ok(-x * log_a / 2.0 * fx - y * log_a / 2.0 * fy + x / 2.0 * fxx + y / 2.0 * fyy)
}

/// Emit `m·(Ŷ_{m,m,a} f − f)(x, y)` along `m_list`, the limit, and the
/// empirical convergence order of the residual.
pub fn voronovskaya_check(
    f: &BivariateFn,
    x: f64,
    y: f64,
    a: f64,
    m_list: &[u32],
    cfg: &EvalConfig,
) -> Result<VoronovskayaStudy> {
    if m_list.is_empty() {
        return Err(Error::invalid("m_list must be nonempty"));
    }
    let limit = voronovskaya_limit(f, x, y, a)?;
    let exact = f.eval(x, y)?;
    let mut records = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let p = OperatorParams::diagonal(m, a)?;
        let v = apply_yhat(&p, f, x, y, cfg)?;
        let scaled = m as f64 * (v.value - exact);
        records.push(VoronovskayaRecord { m, scaled, residual: (scaled - limit).abs() });
    }
    let samples: Vec<(f64, f64)> =
        records.iter().map(|r| (r.m as f64, r.residual)).collect();
    let order = if samples.len() >= 3 && samples.iter().all(|&(_, e)| e > 0.0) {
        order_fit(&samples).ok().map(|(p, _)| p)
    } else {
        None
    };
    Ok(VoronovskayaStudy { limit, records, order })
}

/// Least-squares fit of `log err` against `log m`: returns
/// `(order, constant)` for the model `err ≈ constant · m^{−order}`.
pub fn order_fit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::invalid("order fit needs at least 3 samples"));
    }
    for &(m, err) in samples {
        if !(m > 0.0 && err > 0.0) {
            return Err(Error::invalid(format!(
                "order fit needs positive samples (got ({m}, {err}))"
            )));
        }
    }
    let n = samples.len() as f64;
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(m, e)| (m.ln(), e.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("order fit needs at least two distinct m values"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    Ok((-slope, intercept.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::tables::reference;
    use crate::fnexpr::{builtin, BivariateFn};

    #[test]
    fn order_fit_recovers_exact_power_laws() {
        let inv_m: Vec<(f64, f64)> =
            (1..=6).map(|i| (10.0 * i as f64, 3.0 / (10.0 * i as f64))).collect();
        let (order, c) = order_fit(&inv_m).unwrap();
        assert!((order - 1.0).abs() < 1e-6);
        assert!((c - 3.0).abs() < 1e-6);

        let inv_sqrt: Vec<(f64, f64)> =
            (1..=6).map(|i| (10.0 * i as f64, 2.0 / (10.0 * i as f64).sqrt())).collect();
        let (order, _) = order_fit(&inv_sqrt).unwrap();
        assert!((order - 0.5).abs() < 1e-6);
    }

    #[test]
    fn order_fit_rejects_bad_input() {
        assert!(order_fit(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(order_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.5)]).is_err());
        assert!(order_fit(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn reference_column_has_order_one() {
        // The (.9,.9) column decays like 1/m.
        let samples: Vec<(f64, f64)> = reference::TABLE1_MS
            .iter()
            .zip(reference::TABLE1_ERRORS[10].iter())
            .map(|(&m, &e)| (m as f64, e))
            .collect();
        let (order, _) = order_fit(&samples).unwrap();
        assert!((order - 1.0).abs() < 0.05, "order = {order}");
    }

    #[test]
    fn limit_vanishes_for_squares_at_base_e() {
        // f = x² + y² at (1, 1), a = e: L = −log a·(x²+y²)·... = x + y − 2 = 0.
        let f = BivariateFn::from_expr("x^2+y^2").unwrap();
        let l = voronovskaya_limit(&f, 1.0, 1.0, std::f64::consts::E).unwrap();
        assert!(l.abs() < 1e-6, "L = {l}");
    }

    #[test]
    fn limit_of_linear_functions_keeps_first_order_terms() {
        let f = BivariateFn::from_expr("2*x + 3*y").unwrap();
        let (x, y, a) = (0.7, 0.4, 1.5f64);
        let l = voronovskaya_limit(&f, x, y, a).unwrap();
        let expect = -x * a.ln() / 2.0 * 2.0 - y * a.ln() / 2.0 * 3.0;
        assert!((l - expect).abs() < 1e-7);
    }

    #[test]
    fn scaled_sequence_converges_for_xy() {
        let f = builtin("xy").unwrap();
        let study = voronovskaya_check(
            &f,
            0.5,
            0.5,
            1.32,
            &[50, 100, 200, 400],
            &EvalConfig::default(),
        )
        .unwrap();
        assert_eq!(study.records.len(), 4);
        let first = study.records.first().unwrap().residual;
        let last = study.records.last().unwrap().residual;
        assert!(last < first);
        if let Some(order) = study.order {
            assert!(order > 0.5, "order = {order}");
        }
    }
}
