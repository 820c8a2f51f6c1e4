//! Closed-form moments of `Ŷ_{m,n,a}` and their asymptotic limits.
//!
//! With `T = K1/m`, `K1 ~ Poisson(μ_x)`, `μ_x = m·x·λ_m`, every moment here
//! reduces to Poisson moment algebra around the shifted center:
//! writing `d_x = E[T] − x = x(λ_m − 1)`,
//!
//! ```text
//! e10 = x λ_m                      e20 = (μ_x² + μ_x)/m²
//! c1x = d_x                        c2x = μ_x/m² + d_x²
//! c4x = (μ_x + 3μ_x²)/m⁴ + 4 μ_x d_x/m³ + 6 μ_x d_x²/m² + d_x⁴
//! ```
//!
//! These groupings are algebraically identical to the printed
//! rational-polynomial closed forms (the integration tests in
//! `tests/oracle.rs` verify both against each other and against brute-force
//! series summation) but stay fully accurate for `m` up to `10⁵`, where the
//! printed groupings lose ten digits to cancellation. `λ_m − 1` is carried
//! as its own quantity for the same reason.

use crate::error::{Error, Result};
use crate::kernel::{check_nonneg, lambda_parts, OperatorParams};

/// Raw and central moments of one operator at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub e10: f64,
    pub e01: f64,
    pub e20: f64,
    pub e02: f64,
    pub c1x: f64,
    pub c1y: f64,
    pub c2x: f64,
    pub c2y: f64,
    pub c4x: f64,
    pub c4y: f64,
    pub at: (f64, f64),
    pub params: OperatorParams,
}

/// `δ′_m(x) = √(x(1+x)/m)` and the `y`-axis analogue `δ′_n(y)`.
///
/// The second bound is stated with the same `m`-subscript in its source;
/// the `y`-axis clearly scales with `n`, which is what is implemented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPrime {
    pub dm: f64,
    pub dn: f64,
}

/// Limits of the five scaled central-moment sequences as `m → ∞`:
/// `m·c1 → −x·log(a)/2`, `m·c2 → x`, `c4 → 0`, `m·c4 → 0`, `m²·c4 → 3x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticLimits {
    pub m_c1: f64,
    pub m_c2: f64,
    pub c4: f64,
    pub m_c4: f64,
    pub m2_c4: f64,
}

fn axis_moments(idx: u32, a: f64, v: f64) -> (f64, f64, f64, f64, f64) {
    let (lam, lam_m1) = lambda_parts(idx, a);
    let mf = idx as f64;
    let mu = mf * v * lam;
    let d = v * lam_m1;
    let e1 = v * lam;
    let e2 = (mu * mu + mu) / (mf * mf);
    let c2 = mu / (mf * mf) + d * d;
    let c4 = (mu + 3.0 * mu * mu) / mf.powi(4)
        + 4.0 * mu * d / mf.powi(3)
        + 6.0 * mu * d * d / (mf * mf)
        + d.powi(4);
    (e1, e2, d, c2, c4)
}

/// All raw and central moments at `(x, y)`.
pub fn moments(params: &OperatorParams, x: f64, y: f64) -> Result<MomentSet> {
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    let (e10, e20, c1x, c2x, c4x) = axis_moments(params.m(), params.a(), x);
    let (e01, e02, c1y, c2y, c4y) = axis_moments(params.n(), params.a(), y);
    Ok(MomentSet { e10, e01, e20, e02, c1x, c1y, c2x, c2y, c4x, c4y, at: (x, y), params: *params })
}

/// Raw moments `Ŷ(e10), Ŷ(e01), Ŷ(e20), Ŷ(e02)` (the full set is cheap, so
/// this is the same record as [`central_moments`]).
pub fn raw_moments(params: &OperatorParams, x: f64, y: f64) -> Result<MomentSet> {
    moments(params, x, y)
}

/// First, second and fourth central moments per axis.
pub fn central_moments(params: &OperatorParams, x: f64, y: f64) -> Result<MomentSet> {
    moments(params, x, y)
}

/// The `δ′` envelopes bounding the second central moments:
/// `c2x ≤ δ′_m(x)²` and `c2y ≤ δ′_n(y)²`.
pub fn delta_prime(params: &OperatorParams, x: f64, y: f64) -> DeltaPrime {
    let dm = (x * (1.0 + x) / params.m() as f64).sqrt();
    let dn = (y * (1.0 + y) / params.n() as f64).sqrt();
    DeltaPrime { dm, dn }
}

/// Asymptotic targets of the scaled central-moment sequences.
pub fn asymptotic_limits(x: f64, a: f64) -> Result<AsymptoticLimits> {
    check_nonneg("x", x)?;
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::invalid(format!("base must satisfy a > 1 (got a = {a})")));
    }
    Ok(AsymptoticLimits {
        m_c1: -x * a.ln() / 2.0,
        m_c2: x,
        c4: 0.0,
        m_c4: 0.0,
        m2_c4: 3.0 * x * x,
    })
}

/// The two mixed fourth-order functionals of the derivative analysis:
///
/// * `Ŷ((t − xλ_m)²(t − x)²; x, y)` — one-axis, centered at the kernel mean;
/// * `Ŷ((t − xλ_m)²(s − y)²; x, y)` — the cross term, a product by
///   independence.
///
/// Scaled by `m²` they converge to `3x²` and `x·y`.
pub fn mixed_weighted_moments(params: &OperatorParams, x: f64, y: f64) -> Result<(f64, f64)> {
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    let (lam_m, lam_m1) = lambda_parts(params.m(), params.a());
    let mf = params.m() as f64;
    let mu_x = mf * x * lam_m;
    let d = x * lam_m1;
    // E[(T−c)²(T−x)²] with c = E[T]: central Poisson moments plus shift d.
    let first = (mu_x + 3.0 * mu_x * mu_x) / mf.powi(4)
        + 2.0 * d * mu_x / mf.powi(3)
        + d * d * mu_x / (mf * mf);
    let ms = moments(params, x, y)?;
    let second = (mu_x / (mf * mf)) * ms.c2y;
    Ok((first, second))
}

const MAX_WEIGHT_ORDER: u32 = 8;

/// Stirling numbers of the second kind up to row `rmax`.
fn stirling2(rmax: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; rmax + 1]; rmax + 1];
    s[0][0] = 1.0;
    for r in 1..=rmax {
        for j in 1..=r {
            s[r][j] = j as f64 * s[r - 1][j] + s[r - 1][j - 1];
        }
    }
    s
}

/// Poisson raw moment `E[K^r]` via the factorial-moment recursion
/// `E[K^r] = Σ_j S(r, j) μ^j`. Exact — no truncation.
fn poisson_raw_moment(table: &[Vec<f64>], mu: f64, r: u32) -> f64 {
    let r = r as usize;
    let mut acc = 0.0;
    let mut mu_pow = 1.0;
    for j in 0..=r {
        if j > 0 {
            mu_pow *= mu;
        }
        acc += table[r][j] * mu_pow;
    }
    acc
}

/// The two weighted-boundedness functionals on the first axis:
/// `(w_{N1}(x)·Ŷ(1/w_{N1}; x), w_{N1}(x)·Ŷ((t−x)²/w_{N1}; x))`.
///
/// Both are finite combinations of Poisson raw moments up to order
/// `N1 + 2`, so they are computed exactly; `N1 > 8` is rejected.
pub fn weighted_boundedness(params: &OperatorParams, x: f64, n1: u32) -> Result<(f64, f64)> {
    check_nonneg("x", x)?;
    if n1 > MAX_WEIGHT_ORDER {
        return Err(Error::UnsupportedWeightOrder(n1));
    }
    let ms = moments(params, x, x)?;
    if n1 == 0 {
        // w₀ ≡ 1.
        return Ok((1.0, ms.c2x));
    }
    let (lam_m, _) = lambda_parts(params.m(), params.a());
    let mf = params.m() as f64;
    let mu = mf * x * lam_m;
    let table = stirling2((n1 + 2) as usize);
    let et = |r: u32| poisson_raw_moment(&table, mu, r) / mf.powi(r as i32);
    let w = 1.0 / (1.0 + x.powi(n1 as i32));
    let first = w * (1.0 + et(n1));
    // E[(T−x)²(1 + T^{N1})] = c2x + E[T^{N1+2}] − 2x·E[T^{N1+1}] + x²·E[T^{N1}].
    let second = w * (ms.c2x + et(n1 + 2) - 2.0 * x * et(n1 + 1) + x * x * et(n1));
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::lambda;

    fn params(m: u32, n: u32, a: f64) -> OperatorParams {
        OperatorParams::new(m, n, a).unwrap()
    }

    #[test]
    fn moments_vanish_at_origin() {
        let ms = moments(&params(4, 9, 1.7), 0.0, 0.0).unwrap();
        for v in [ms.e10, ms.e01, ms.e20, ms.e02, ms.c1x, ms.c1y, ms.c2x, ms.c2y, ms.c4x, ms.c4y] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn first_raw_moment_at_e() {
        let e = std::f64::consts::E;
        let ms = moments(&params(1, 1, e), 1.0, 0.0).unwrap();
        assert!((ms.e10 - 1.0 / (e - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn variance_nonnegative() {
        for (m, n, a, x) in [(1u32, 1u32, 1.1, 0.5), (7, 3, 2.0, 4.0), (50, 50, 9.0, 17.0)] {
            let ms = moments(&params(m, n, a), x, x).unwrap();
            assert!(ms.e20 >= ms.e10 * ms.e10);
            assert!(ms.c2x >= 0.0 && ms.c2y >= 0.0);
            assert!(ms.c4x >= 0.0 && ms.c4y >= 0.0);
            assert!(ms.c1x <= 0.0, "first central moment is ≤ 0 since λ < 1");
            // Jensen: fourth ≥ second squared.
            assert!(ms.c4x >= ms.c2x * ms.c2x * (1.0 - 1e-12));
        }
    }

    #[test]
    fn first_central_equals_lambda_shift() {
        for (m, a, x) in [(3u32, 1.32, 0.4), (11, 2.5, 2.0), (100, 1.01, 9.0)] {
            let ms = moments(&params(m, m, a), x, 0.0).unwrap();
            let expect = x * (lambda(m, a).unwrap() - 1.0);
            assert!((ms.c1x - expect).abs() <= 1e-14 * expect.abs().max(1e-30));
        }
    }

    #[test]
    fn delta_prime_bounds_second_central() {
        let p = params(3, 3, 1.32);
        let dp = delta_prime(&p, 2.0, 2.0);
        let ms = moments(&p, 2.0, 2.0).unwrap();
        assert!(ms.c2x <= dp.dm * dp.dm);
        assert!(dp.dm * dp.dm == 2.0 * 3.0 / 3.0);
        assert_eq!(delta_prime(&p, 0.0, 0.0).dm, 0.0);
        let dp4 = delta_prime(&params(4, 4, 2.0), 1.0, 1.0);
        assert!((dp4.dm - (2.0f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!((dp4.dm - 0.7071068).abs() < 1e-7);
    }

    #[test]
    fn l23_bound_holds_on_sweep() {
        for &a in &[1.1, 1.32, 2.0] {
            for m in 1..=100u32 {
                let p = params(m, m, a);
                for i in 0..=20 {
                    let x = i as f64 * 0.5;
                    let ms = moments(&p, x, x).unwrap();
                    let bound = x * (1.0 + x) / m as f64;
                    assert!(
                        ms.c2x <= bound * (1.0 + 1e-14),
                        "a={a} m={m} x={x}: {} > {bound}",
                        ms.c2x
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_gap_squared_below_inverse_m() {
        // (λ_m − 1)² ≤ 1/m, needed by the δ′ bound chain; verified over
        // a ∈ (1, 40]. Outside that range (e.g. a = 100, m = 2) it fails,
        // which is why no claim is made beyond the sweep.
        for i in 1..=80 {
            let a = 1.0 + 0.4875 * i as f64; // up to 40.0
            for m in 1..=1000u32 {
                let (_, lam_m1) = lambda_parts(m, a);
                assert!(
                    lam_m1 * lam_m1 <= 1.0 / m as f64 + 1e-15,
                    "first failing base a = {a} at m = {m}"
                );
            }
        }
    }

    #[test]
    fn asymptotic_limits_values() {
        let l = asymptotic_limits(0.0, 2.0).unwrap();
        assert_eq!((l.m_c1, l.m_c2, l.c4, l.m_c4, l.m2_c4), (0.0, 0.0, 0.0, 0.0, 0.0));
        let l = asymptotic_limits(1.0, std::f64::consts::E).unwrap();
        assert!((l.m_c1 + 0.5).abs() < 1e-15);
        assert_eq!(l.m_c2, 1.0);
        assert_eq!(l.m2_c4, 3.0);
        assert!(asymptotic_limits(1.0, 0.5).is_err());
    }

    #[test]
    fn scaled_first_moment_converges_at_rate_one() {
        let (x, a) = (1.0, 1.32);
        let target = asymptotic_limits(x, a).unwrap().m_c1;
        let mut residuals = Vec::new();
        for &m in &[100u32, 1_000, 10_000, 100_000] {
            let ms = moments(&params(m, m, a), x, 0.0).unwrap();
            residuals.push(((m as f64).ln(), (m as f64 * ms.c1x - target).abs().ln()));
        }
        let n = residuals.len() as f64;
        let sx: f64 = residuals.iter().map(|p| p.0).sum::<f64>() / n;
        let sy: f64 = residuals.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = residuals.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum::<f64>()
            / residuals.iter().map(|p| (p.0 - sx).powi(2)).sum::<f64>();
        assert!(-slope >= 0.9, "empirical order {}", -slope);
    }

    #[test]
    fn mixed_moments_basics() {
        let p = params(5, 5, 1.5);
        assert_eq!(mixed_weighted_moments(&p, 0.0, 3.0).unwrap(), (0.0, 0.0));
        // m²·second → x·y.
        let p_big = params(10_000, 10_000, 1.32);
        let (_, second) = mixed_weighted_moments(&p_big, 1.0, 1.0).unwrap();
        let scaled = 1e8 * second;
        assert!((scaled - 1.0).abs() <= 0.01, "m² · second = {scaled}");
        let (first, _) = mixed_weighted_moments(&p_big, 1.0, 1.0).unwrap();
        assert!((1e8 * first - 3.0).abs() <= 0.03, "m² · first = {}", 1e8 * first);
    }

    #[test]
    fn weighted_boundedness_cases() {
        let p = params(7, 7, 1.32);
        let ms = moments(&p, 2.0, 2.0).unwrap();
        let (f1, f2) = weighted_boundedness(&p, 2.0, 0).unwrap();
        assert_eq!(f1, 1.0);
        assert_eq!(f2, ms.c2x);
        assert!(matches!(
            weighted_boundedness(&p, 1.0, 9),
            Err(Error::UnsupportedWeightOrder(9))
        ));
        // N1 = 2 stays below 2.5 over the documented sweep.
        let mut worst = 0.0f64;
        for m in 1..=100u32 {
            let p = params(m, m, 1.32);
            for i in 0..=100 {
                let x = i as f64;
                let (f1, _) = weighted_boundedness(&p, x, 2).unwrap();
                worst = worst.max(f1);
            }
        }
        assert!(worst <= 2.5, "N1 = 2 sweep max = {worst}");
    }

    #[test]
    fn weighted_second_functional_tracks_delta_prime() {
        let mut worst_ratio = 0.0f64;
        for m in 1..=100u32 {
            let p = params(m, m, 1.32);
            for i in 1..=100 {
                let x = i as f64;
                let (_, f2) = weighted_boundedness(&p, x, 2).unwrap();
                let dp2 = x * (1.0 + x) / m as f64;
                worst_ratio = worst_ratio.max(f2 / dp2);
            }
        }
        assert!(worst_ratio.is_finite() && worst_ratio <= 4.0, "ratio = {worst_ratio}");
    }

    #[test]
    fn stirling_row_sums_are_bell_numbers() {
        let t = stirling2(8);
        let bell: Vec<f64> = t.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(&bell[..7], &[1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0]);
    }
}
