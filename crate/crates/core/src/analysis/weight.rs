//! Polynomial weight spaces, weighted sup norms, the modulus of
//! continuity and the Steklov mean.
//!
//! Norms over `[0, ∞)²` are estimated on a capped uniform grid; the cap
//! defaults to `[0, 10]²` with 201 points per axis. Estimates are lower
//! bounds of the true sup and increase with the cap.

use crate::error::{Error, Result};
use crate::fnexpr::BivariateFn;

/// Default points per axis for norm grids.
pub const DEFAULT_GRID: usize = 201;
/// Default shift samples per axis (endpoints included) for the modulus.
pub const DEFAULT_SHIFT_SAMPLES: usize = 17;

/// The weight `w_{N1,N2}(x, y) = (1 + x^{N1})⁻¹ (1 + y^{N2})⁻¹` together
/// with the rectangle the numerical sup is taken over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpace {
    n1: u32,
    n2: u32,
    domain_cap: (f64, f64),
}

fn w_axis(n: u32, v: f64) -> f64 {
    // w₀ ≡ 1 by definition, not (1 + v⁰)⁻¹.
    if n == 0 {
        1.0
    } else {
        1.0 / (1.0 + v.powi(n as i32))
    }
}

impl WeightSpace {
    pub fn new(n1: u32, n2: u32) -> Self {
        Self { n1, n2, domain_cap: (10.0, 10.0) }
    }

    pub fn with_cap(mut self, xmax: f64, ymax: f64) -> Result<Self> {
        if !(xmax > 0.0 && ymax > 0.0 && xmax.is_finite() && ymax.is_finite()) {
            return Err(Error::invalid("domain cap must be positive and finite"));
        }
        self.domain_cap = (xmax, ymax);
        Ok(self)
    }

    pub fn orders(&self) -> (u32, u32) {
        (self.n1, self.n2)
    }

    pub fn domain_cap(&self) -> (f64, f64) {
        self.domain_cap
    }

    /// `w_{N1,N2}(x, y) ∈ (0, 1]`.
    pub fn weight(&self, x: f64, y: f64) -> f64 {
        w_axis(self.n1, x) * w_axis(self.n2, y)
    }
}

/// Grid estimate of `sup w_{N1,N2}·|f|` over `[0, Xmax]×[0, Ymax]`.
///
/// A lower estimate of the true sup; refines as `grid_n` and the cap grow.
pub fn weighted_sup_norm(f: &BivariateFn, ws: &WeightSpace, grid_n: usize) -> Result<f64> {
    if grid_n < 2 {
        return Err(Error::invalid("grid_n must be ≥ 2"));
    }
    let (xmax, ymax) = ws.domain_cap;
    let mut best = 0.0f64;
    for i in 0..grid_n {
        let x = xmax * i as f64 / (grid_n - 1) as f64;
        for j in 0..grid_n {
            let y = ymax * j as f64 / (grid_n - 1) as f64;
            let v = f.eval(x, y)?;
            best = best.max(ws.weight(x, y) * v.abs());
        }
    }
    Ok(best)
}

/// Numerical estimate of the modulus of continuity
/// `ω(f; δ1, δ2) = sup_{0≤h1≤δ1, 0≤h2≤δ2} ‖f(·+h1, ·+h2) − f‖_{N1,N2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusEstimate {
    pub delta1: f64,
    pub delta2: f64,
    pub value: f64,
    /// `(points per axis, shift samples per axis)` used for the estimate.
    pub grid: (usize, usize),
}

/// Estimate the modulus on a uniform shift grid including the endpoints.
pub fn modulus(
    f: &BivariateFn,
    ws: &WeightSpace,
    delta1: f64,
    delta2: f64,
    grid_n: usize,
    shift_samples: usize,
) -> Result<ModulusEstimate> {
    if !(delta1 > 0.0 && delta2 > 0.0) {
        return Err(Error::invalid("modulus deltas must be > 0"));
    }
    if grid_n < 2 || shift_samples < 2 {
        return Err(Error::invalid("grid_n and shift_samples must be ≥ 2"));
    }
    let (xmax, ymax) = ws.domain_cap;
    let xs: Vec<f64> = (0..grid_n).map(|i| xmax * i as f64 / (grid_n - 1) as f64).collect();
    let ys: Vec<f64> = (0..grid_n).map(|j| ymax * j as f64 / (grid_n - 1) as f64).collect();
    // Base values and weights are shift-independent.
    let mut base = vec![0.0f64; grid_n * grid_n];
    let mut wgt = vec![0.0f64; grid_n * grid_n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            base[i * grid_n + j] = f.eval(x, y)?;
            wgt[i * grid_n + j] = ws.weight(x, y);
        }
    }
    let mut value = 0.0f64;
    for p in 0..shift_samples {
        let h1 = delta1 * p as f64 / (shift_samples - 1) as f64;
        for q in 0..shift_samples {
            let h2 = delta2 * q as f64 / (shift_samples - 1) as f64;
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    let shifted = f.eval(x + h1, y + h2)?;
                    let idx = i * grid_n + j;
                    value = value.max(wgt[idx] * (shifted - base[idx]).abs());
                }
            }
        }
    }
    Ok(ModulusEstimate { delta1, delta2, value, grid: (grid_n, shift_samples) })
}

/// 16-point Gauss–Legendre rule on `[0, 1]` with weights normalized to
/// sum to 1 (so it computes means directly). Nodes are found by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre_unit() -> [(f64, f64); 16] {
    const N: usize = 16;
    let mut rule = [(0.0f64, 0.0f64); N];
    for i in 0..N / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        loop {
            // Legendre P_N(x) and its derivative by the three-term recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=N {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map node ±x from [−1, 1] to [0, 1]; halve weights so they sum to 1.
        rule[i] = ((1.0 - x) / 2.0, w / 2.0);
        rule[N - 1 - i] = ((1.0 + x) / 2.0, w / 2.0);
    }
    rule
}

/// The Steklov mean `f_{h1,h2}(x, y) = (h1 h2)⁻¹ ∫₀^{h1}∫₀^{h2}
/// f(x+ζ, y+η) dζ dη`, realized by a tensor 16-node Gauss–Legendre rule.
///
/// Satisfies `‖f_{h1,h2} − f‖ ≤ ω(f; h1, h2)` up to quadrature slack.
pub fn steklov(f: &BivariateFn, h1: f64, h2: f64) -> Result<BivariateFn> {
    if !(h1 > 0.0 && h2 > 0.0 && h1.is_finite() && h2.is_finite()) {
        return Err(Error::invalid("Steklov steps must be > 0"));
    }
    let rule = gauss_legendre_unit();
    let inner = f.clone();
    let label = format!("steklov[{h1},{h2}]({})", f.label());
    Ok(BivariateFn::from_fallible(label, f.growth(), move |x, y| {
        let mut acc = 0.0f64;
        for &(u, wu) in &rule {
            for &(v, wv) in &rule {
                acc += wu * wv * inner.eval(x + h1 * u, y + h2 * v)?;
            }
        }
        Ok(acc)
    }))
}
