//! Simultaneous approximation: partial derivatives of `Ŷ_{m,n,a}(f; ·, ·)`.
//!
//! Away from the axis the derivative is exact in the series sense:
//!
//! ```text
//! ∂/∂x Ŷ(f; x, y) = −(log a / (a^{1/m} − 1))·Ŷ(f; x, y) + (m/x)·Ŷ(t·f; x, y)
//! ```
//!
//! (and `log a / (a^{1/m} − 1) = m·λ_m`). The identity differences two
//! large terms and carries an `m/x` factor, so it is evaluated with the
//! tail tolerance tightened by `1e−2` and abandoned for a finite
//! difference below `x_switch = 1e−4`, where the `m/x` amplification
//! exceeds what the tightened tolerance buys back.

use crate::error::Result;
use crate::fnexpr::BivariateFn;
use crate::kernel::{check_nonneg, lambda_parts, OperatorParams};
use crate::operator::{apply_yhat, EvalConfig, EvalResult};

/// Below this the identity's `m/x` factor amplifies truncation noise past
/// the finite-difference error.
pub const X_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivMethod {
    Identity,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivResult {
    pub value: f64,
    pub method: DerivMethod,
    /// Step used when `method == FiniteDifference`.
    pub step: Option<f64>,
}

fn tightened(cfg: &EvalConfig) -> EvalConfig {
    EvalConfig { tail_tol: cfg.tail_tol * 1e-2, ..*cfg }
}

/// `f` multiplied by the first lattice coordinate, with growth bumped by
/// one degree on that axis.
fn times_coord(f: &BivariateFn, first: bool) -> BivariateFn {
    let inner = f.clone();
    let growth = f.growth().map(|(n1, n2)| if first { (n1 + 1, n2) } else { (n1, n2 + 1) });
    let label = if first {
        format!("t*({})", f.label())
    } else {
        format!("s*({})", f.label())
    };
    BivariateFn::from_fallible(label, growth, move |t, s| {
        Ok(if first { t } else { s } * inner.eval(t, s)?)
    })
}

fn derivative(
    params: &OperatorParams,
    f: &BivariateFn,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
    first_axis: bool,
) -> Result<DerivResult> {
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    let cfg = tightened(cfg);
    let v = if first_axis { x } else { y };
    if v >= X_SWITCH {
        let idx = if first_axis { params.m() } else { params.n() };
        let (lam, _) = lambda_parts(idx, params.a());
        let coeff = idx as f64 * lam; // log a / (a^{1/idx} − 1)
        let base = apply_yhat(params, f, x, y, &cfg)?;
        let shifted = apply_yhat(params, &times_coord(f, first_axis), x, y, &cfg)?;
        let value = -coeff * base.value + (idx as f64 / v) * shifted.value;
        return Ok(DerivResult { value, method: DerivMethod::Identity, step: None });
    }
    // Finite-difference fallback near the axis; one-sided when a centered
    // stencil would leave the domain.
    let h = (1e-6f64).max(v / 2.0);
    let eval = |x: f64, y: f64| -> Result<EvalResult> { apply_yhat(params, f, x, y, &cfg) };
    let value = if v - h >= 0.0 {
        let (lo, hi) = if first_axis {
            (eval(x - h, y)?, eval(x + h, y)?)
        } else {
            (eval(x, y - h)?, eval(x, y + h)?)
        };
        (hi.value - lo.value) / (2.0 * h)
    } else {
        let (at, fwd) = if first_axis {
            (eval(x, y)?, eval(x + h, y)?)
        } else {
            (eval(x, y)?, eval(x, y + h)?)
        };
        (fwd.value - at.value) / h
    };
    Ok(DerivResult { value, method: DerivMethod::FiniteDifference, step: Some(h) })
}

/// `∂/∂x Ŷ_{m,n,a}(f; x, y)`.
pub fn dx_yhat(
    params: &OperatorParams,
    f: &BivariateFn,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
) -> Result<DerivResult> {
    derivative(params, f, x, y, cfg, true)
}

/// `∂/∂y Ŷ_{m,n,a}(f; x, y)`.
pub fn dy_yhat(
    params: &OperatorParams,
    f: &BivariateFn,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
) -> Result<DerivResult> {
    derivative(params, f, x, y, cfg, false)
}
