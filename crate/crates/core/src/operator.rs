//! Truncated double-series evaluation of `Ŷ_{m,n,a}(f; x, y)` and of the
//! classical bivariate operator `S_{m,n}(f; x, y)`.
//!
//! Both are expectations of `f(K1/m, K2/n)` under a product of Poisson-type
//! laws; they differ only in the means (`μ_x = m·x·λ_m` versus `m·x`). The
//! series is summed over a window `[0, K]` per axis, enlarged by doubling
//! until a certified bound on the omitted mass times a growth envelope of
//! `f` drops below `tail_tol`. The omitted-mass bound is geometric:
//! `Σ_{k>K} w_k ≤ w_{K+1} / (1 − μ/(K+2))`, which stays meaningful far
//! below the `1 − Σ w_k` rounding floor of about `1e−16`.
//!
//! Within the window, lattice points whose weight cannot contribute more
//! than a hundredth of the tolerance are skipped (their mass is folded
//! into the reported tail bound), and the rest is accumulated in ascending
//! `k` with Neumaier compensation, so results are deterministic.

use crate::error::{Error, Result};
use crate::fnexpr::BivariateFn;
use crate::kernel::{check_nonneg, weight_1d, KernelFactors, OperatorParams};

/// Truncation policy for the double series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Absolute bound the certified tail estimate must reach (default `1e−12`).
    pub tail_tol: f64,
    /// Hard cap on the window size per axis (default `10^6`).
    pub max_terms_per_axis: usize,
    /// Summation order; fixed, kept explicit for the output contract.
    pub summation: SummationOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummationOrder {
    /// Ascending `k` per axis, inner loop on `k2`, two-term compensation.
    CompensatedAscending,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            max_terms_per_axis: 1_000_000,
            summation: SummationOrder::CompensatedAscending,
        }
    }
}

impl EvalConfig {
    pub fn with_tail_tol(tail_tol: f64) -> Self {
        Self { tail_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tail_tol.is_finite() && self.tail_tol > 0.0) {
            return Err(Error::invalid(format!("tail_tol must be > 0 (got {})", self.tail_tol)));
        }
        if self.max_terms_per_axis == 0 {
            return Err(Error::invalid("max_terms_per_axis must be ≥ 1"));
        }
        Ok(())
    }
}

/// Value of a truncated series together with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Largest summation index per axis that entered the sum.
    pub terms_used: (usize, usize),
    /// Certified bound on (omitted + skipped mass) × growth envelope.
    pub tail_bound: f64,
}

/// Neumaier variant of compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        self.comp += if self.sum.abs() >= v.abs() {
            (self.sum - t) + v
        } else {
            (v - t) + self.sum
        };
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One summation axis: weights on `[0, k_hi]`, the significant band, and
/// certified mass bookkeeping.
struct Axis {
    w: Vec<f64>,
    scale: f64, // lattice scale: t = k / scale
    /// Certified bound on the Poisson mass beyond the window.
    tail: f64,
    lo: usize,
    hi: usize,
    /// Window mass outside the band (exact compensated sums).
    skipped: f64,
}

impl Axis {
    /// Point mass at `k = 0` (the `x = 0` collapse; no series is summed).
    fn point_mass(scale: f64) -> Self {
        Axis { w: vec![1.0], scale, tail: 0.0, lo: 0, hi: 0, skipped: 0.0 }
    }

    fn initial_window(mu: f64) -> usize {
        (mu + 10.0 * (mu + 1.0).sqrt() + 20.0).ceil() as usize
    }

    fn with_window(mu: f64, scale: f64, k_hi: usize) -> Self {
        let w: Vec<f64> = (0..=k_hi).map(|k| weight_1d(k as u64, mu)).collect();
        // Σ_{k > k_hi} w_k ≤ w_{k_hi+1} / (1 − μ/(k_hi+2)); valid because the
        // window always ends past the mode.
        let w_next = weight_1d(k_hi as u64 + 1, mu);
        let rho = mu / (k_hi as f64 + 2.0);
        let tail = if rho < 1.0 { w_next / (1.0 - rho) } else { f64::INFINITY };
        Axis { w, scale, tail, lo: 0, hi: k_hi, skipped: 0.0 }
    }

    fn boundary(&self) -> f64 {
        (self.w.len() - 1) as f64 / self.scale
    }

    /// Restrict to the contiguous band of weights ≥ `cut`, recording the
    /// discarded window mass.
    fn apply_band(&mut self, cut: f64) {
        let lo = self.w.iter().position(|&w| w >= cut);
        let hi = self.w.iter().rposition(|&w| w >= cut);
        let (lo, hi) = match (lo, hi) {
            (Some(l), Some(h)) => (l, h),
            _ => (0, self.w.len() - 1),
        };
        let mut out = CompensatedSum::default();
        for &w in &self.w[..lo] {
            out.add(w);
        }
        for &w in &self.w[hi + 1..] {
            out.add(w);
        }
        self.lo = lo;
        self.hi = hi;
        self.skipped = out.total();
    }
}

fn polynomial_envelope(n: u32, v: f64) -> f64 {
    1.0 + v.powi(n as i32)
}

/// Growth envelope for the omitted region.
///
/// With declared growth `(N1, N2)` the envelope is
/// `C·(1+t_b^{N1})(1+s_b^{N2})` at the window boundary, `C` estimated by
/// sampling `|f|·w` over the window rectangle. Otherwise it is the largest
/// `|f|` on the last computed lattice row and column.
fn envelope_bivariate(f: &BivariateFn, ax1: &Axis, ax2: &Axis) -> Result<f64> {
    let (t_b, s_b) = (ax1.boundary(), ax2.boundary());
    if let Some((n1, n2)) = f.growth() {
        let mut c = 0.0f64;
        const SAMPLES: usize = 17;
        for i in 0..SAMPLES {
            let t = t_b * i as f64 / (SAMPLES - 1) as f64;
            for j in 0..SAMPLES {
                let s = s_b * j as f64 / (SAMPLES - 1) as f64;
                let v = f.eval(t, s).map_err(|e| Error::at_lattice(t, s, e))?;
                c = c.max(v.abs() / (polynomial_envelope(n1, t) * polynomial_envelope(n2, s)));
            }
        }
        return Ok(c * polynomial_envelope(n1, t_b) * polynomial_envelope(n2, s_b));
    }
    let mut env = 0.0f64;
    let k1_last = ax1.w.len() - 1;
    for k2 in 0..ax2.w.len() {
        let (t, s) = (k1_last as f64 / ax1.scale, k2 as f64 / ax2.scale);
        let v = f.eval(t, s).map_err(|e| Error::at_lattice(t, s, e))?;
        env = env.max(v.abs());
    }
    let k2_last = ax2.w.len() - 1;
    for k1 in 0..ax1.w.len() {
        let (t, s) = (k1 as f64 / ax1.scale, k2_last as f64 / ax2.scale);
        let v = f.eval(t, s).map_err(|e| Error::at_lattice(t, s, e))?;
        env = env.max(v.abs());
    }
    Ok(env)
}

/// Expectation of `f(K1/m, K2/n)` under independent Poisson-type laws with
/// the given means. Shared by both operator families.
fn expectation_product(
    mu_x: f64,
    mu_y: f64,
    m: u32,
    n: u32,
    f: &BivariateFn,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    cfg.validate()?;
    let mut k1_hi = if mu_x == 0.0 { 0 } else { Axis::initial_window(mu_x) };
    let mut k2_hi = if mu_y == 0.0 { 0 } else { Axis::initial_window(mu_y) };

    // Grow the windows until (omitted mass bound) × envelope ≤ 0.98·tol;
    // the remaining 2% is reserved for the skipped in-window mass.
    let (mut ax1, mut ax2, env) = loop {
        if k1_hi > cfg.max_terms_per_axis || k2_hi > cfg.max_terms_per_axis {
            return Err(Error::Truncation {
                terms: k1_hi.max(k2_hi),
                tail_bound: f64::NAN,
                tail_tol: cfg.tail_tol,
            });
        }
        let ax1 = if mu_x == 0.0 {
            Axis::point_mass(m as f64)
        } else {
            Axis::with_window(mu_x, m as f64, k1_hi)
        };
        let ax2 = if mu_y == 0.0 {
            Axis::point_mass(n as f64)
        } else {
            Axis::with_window(mu_y, n as f64, k2_hi)
        };
        let env = envelope_bivariate(f, &ax1, &ax2)?;
        let omitted = (ax1.tail + ax2.tail) * env;
        if omitted <= 0.98 * cfg.tail_tol {
            break (ax1, ax2, env);
        }
        if mu_x > 0.0 {
            k1_hi *= 2;
        }
        if mu_y > 0.0 {
            k2_hi *= 2;
        }
        if mu_x == 0.0 && mu_y == 0.0 {
            // Point mass on both axes cannot fail the tail test.
            unreachable!("zero-mean axes have zero tail");
        }
    };

    // Skip lattice points whose weight cannot matter. The cut guarantees
    // the discarded window mass × envelope stays below 0.02·tol.
    let budget = 0.01 * cfg.tail_tol / env.max(1.0);
    ax1.apply_band(budget / ax1.w.len() as f64);
    ax2.apply_band(budget / ax2.w.len() as f64);

    let mut acc = CompensatedSum::default();
    for k1 in ax1.lo..=ax1.hi {
        let w1 = ax1.w[k1];
        let t = k1 as f64 / ax1.scale;
        for k2 in ax2.lo..=ax2.hi {
            let s = k2 as f64 / ax2.scale;
            let v = f.eval(t, s).map_err(|e| Error::at_lattice(t, s, e))?;
            acc.add(w1 * ax2.w[k2] * v);
        }
    }

    let tail_bound = (ax1.tail + ax2.tail + ax1.skipped + ax2.skipped) * env;
    Ok(EvalResult { value: acc.total(), terms_used: (ax1.hi, ax2.hi), tail_bound })
}

/// `Ŷ_{m,n,a}(f; x, y)` by truncated summation.
pub fn apply_yhat(
    params: &OperatorParams,
    f: &BivariateFn,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    let factors = KernelFactors::new(params, x, y)?;
    expectation_product(factors.mu_x, factors.mu_y, params.m(), params.n(), f, cfg)
}

/// Classical `S_{m,n}(f; x, y)`: Poisson means `m·x` and `n·y`.
pub fn apply_szasz(
    m: u32,
    n: u32,
    f: &BivariateFn,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("series indices must satisfy m ≥ 1, n ≥ 1"));
    }
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    expectation_product(m as f64 * x, n as f64 * y, m, n, f, cfg)
}

/// Univariate `R̂_{m,a}(f1; x)`: one-axis truncated sum.
pub fn apply_univariate<F>(m: u32, a: f64, f1: F, x: f64, cfg: &EvalConfig) -> Result<EvalResult>
where
    F: Fn(f64) -> Result<f64>,
{
    cfg.validate()?;
    let params = OperatorParams::new(m, m, a)?;
    let factors = KernelFactors::new(&params, x, 0.0)?;
    expectation_axis(factors.mu_x, m, &f1, cfg)
}

fn expectation_axis<F>(mu: f64, m: u32, f1: &F, cfg: &EvalConfig) -> Result<EvalResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if mu == 0.0 {
        let v = f1(0.0).map_err(|e| Error::at_lattice(0.0, f64::NAN, e))?;
        return Ok(EvalResult { value: v, terms_used: (0, 0), tail_bound: 0.0 });
    }
    let mut k_hi = Axis::initial_window(mu);
    let (mut ax, env) = loop {
        if k_hi > cfg.max_terms_per_axis {
            return Err(Error::Truncation {
                terms: k_hi,
                tail_bound: f64::NAN,
                tail_tol: cfg.tail_tol,
            });
        }
        let ax = Axis::with_window(mu, m as f64, k_hi);
        let t_b = ax.boundary();
        let env = f1(t_b).map_err(|e| Error::at_lattice(t_b, f64::NAN, e))?.abs();
        if ax.tail * env <= 0.98 * cfg.tail_tol {
            break (ax, env);
        }
        k_hi *= 2;
    };
    ax.apply_band(0.01 * cfg.tail_tol / env.max(1.0) / ax.w.len() as f64);
    let mut acc = CompensatedSum::default();
    for k in ax.lo..=ax.hi {
        let t = k as f64 / ax.scale;
        let v = f1(t).map_err(|e| Error::at_lattice(t, f64::NAN, e))?;
        acc.add(ax.w[k] * v);
    }
    Ok(EvalResult {
        value: acc.total(),
        terms_used: (ax.hi, 0),
        tail_bound: (ax.tail + ax.skipped) * env,
    })
}

/// Tensor fast path for separable `f(t, s) = f1(t)·f2(s)`:
/// the product of two univariate sums.
pub fn apply_yhat_tensor<F1, F2>(
    params: &OperatorParams,
    f1: F1,
    f2: F2,
    x: f64,
    y: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult>
where
    F1: Fn(f64) -> Result<f64>,
    F2: Fn(f64) -> Result<f64>,
{
    let factors = KernelFactors::new(params, x, y)?;
    let half = EvalConfig { tail_tol: cfg.tail_tol / 2.0, ..*cfg };
    let r1 = expectation_axis(factors.mu_x, params.m(), &f1, &half)?;
    let r2 = expectation_axis(factors.mu_y, params.n(), &f2, &half)?;
    Ok(EvalResult {
        value: r1.value * r2.value,
        terms_used: (r1.terms_used.0, r2.terms_used.0),
        tail_bound: r1.value.abs() * r2.tail_bound
            + r2.value.abs() * r1.tail_bound
            + r1.tail_bound * r2.tail_bound,
    })
}
