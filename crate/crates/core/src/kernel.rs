//! Poisson-type kernel weights of the operators.
//!
//! Both operator families are expectations against a product of Poisson-type
//! laws. The `Ŷ` kernel on the first axis is a Poisson law with mean
//! `μ_x = x·log a / (a^{1/m} − 1) = m·x·λ_m`, where
//! `λ_m = log a / (m (a^{1/m} − 1))` is the factor that multiplies linear
//! functions. Everything downstream (series evaluation, closed-form moments,
//! derivative identities) is built on these two quantities, so they are
//! computed here once, carefully.
//!
//! Weights are evaluated in log space. For large means the textbook form
//! `k·log μ − μ − log k!` loses ~5 digits to cancellation between large
//! terms, which is fatal for the `|Σ weights − 1| ≤ 1e−12` normalization
//! guarantee. We instead use the saddle-point form
//! `log w = −stirlerr(k) − bd0(k, μ) − ½·log(2πk)`, which is accurate to a
//! few ulp uniformly in `(k, μ)` and is algebraically the same number.

use crate::error::{Error, Result};

/// Series indices and the fixed base of the operator family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    m: u32,
    n: u32,
    a: f64,
}

impl OperatorParams {
    /// Validates `m ≥ 1`, `n ≥ 1` and `a > 1` (strict).
    pub fn new(m: u32, n: u32, a: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid(format!(
                "series indices must satisfy m ≥ 1, n ≥ 1 (got m = {m}, n = {n})"
            )));
        }
        if !(a.is_finite() && a > 1.0) {
            return Err(Error::invalid(format!("base must satisfy a > 1 (got a = {a})")));
        }
        Ok(Self { m, n, a })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Same base, both indices set to `m` (the diagonal family `Ŷ_{m,m,a}`).
    pub fn diagonal(m: u32, a: f64) -> Result<Self> {
        Self::new(m, m, a)
    }
}

/// The scalar factors of the kernel at a fixed point `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelFactors {
    /// `λ_m = log a / (m (a^{1/m} − 1))`, in `(0, 1)`.
    pub lambda_m: f64,
    /// `λ_n`, second axis.
    pub lambda_n: f64,
    /// Poisson-type mean `μ_x = m·x·λ_m`.
    pub mu_x: f64,
    /// Poisson-type mean `μ_y = n·y·λ_n`.
    pub mu_y: f64,
}

impl KernelFactors {
    pub fn new(params: &OperatorParams, x: f64, y: f64) -> Result<Self> {
        check_nonneg("x", x)?;
        check_nonneg("y", y)?;
        let lambda_m = lambda(params.m, params.a)?;
        let lambda_n = lambda(params.n, params.a)?;
        Ok(Self {
            lambda_m,
            lambda_n,
            mu_x: params.m as f64 * x * lambda_m,
            mu_y: params.n as f64 * y * lambda_n,
        })
    }
}

pub(crate) fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::invalid(format!("{name} must be finite and ≥ 0 (got {v})")));
    }
    Ok(())
}

/// `λ_m = log a / (m (a^{1/m} − 1))`.
///
/// Strictly inside `(0, 1)`, increasing in `m`, with
/// `1 − λ_m ≈ log(a) / (2m)` for large `m`. Once `u = log(a)/m` underflows
/// relative precision of `a^{1/m} − 1`, the Bernoulli series
/// `1 − u/2 + u²/12` takes over.
pub fn lambda(m: u32, a: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m must be ≥ 1"));
    }
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::invalid(format!("base must satisfy a > 1 (got a = {a})")));
    }
    let u = a.ln() / m as f64;
    Ok(lambda_from_u(u).0)
}

/// `(λ, λ − 1)` from `u = log(a)/m`.
///
/// `λ − 1` is returned separately because it is the first central moment
/// factor; computing it as `λ − 1` after rounding λ to 1 would lose all
/// relative accuracy for large `m`.
pub(crate) fn lambda_from_u(u: f64) -> (f64, f64) {
    if u < 1e-6 {
        let d = -u / 2.0 + u * u / 12.0;
        (1.0 + d, d)
    } else {
        // λ = u / (e^u − 1); expm1 keeps the denominator exact for small u.
        let em = u.exp_m1();
        (u / em, (u - em) / em)
    }
}

pub(crate) fn lambda_parts(m: u32, a: f64) -> (f64, f64) {
    lambda_from_u(a.ln() / m as f64)
}

/// Log of the one-axis kernel weight `μ^k e^{−μ} / k!`.
///
/// Total on `k ≥ 0`, `μ ≥ 0`: the point mass at the origin gives `0` for
/// `k = 0` and `−∞` otherwise.
pub fn log_weight_1d(k: u64, mu: f64) -> f64 {
    assert!(mu >= 0.0 && !mu.is_nan(), "mean must be ≥ 0, got {mu}");
    if mu == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -mu;
    }
    let kf = k as f64;
    -stirlerr(k) - bd0(kf, mu) - 0.5 * (2.0 * std::f64::consts::PI * kf).ln()
}

/// One-axis kernel weight in linear space.
pub fn weight_1d(k: u64, mu: f64) -> f64 {
    log_weight_1d(k, mu).exp()
}

/// Bivariate kernel weight `s^a_{m,n}(x, y)` at indices `(k1, k2)`.
pub fn kernel_weight(params: &OperatorParams, k1: u64, k2: u64, x: f64, y: f64) -> Result<f64> {
    let factors = KernelFactors::new(params, x, y)?;
    Ok((log_weight_1d(k1, factors.mu_x) + log_weight_1d(k2, factors.mu_y)).exp())
}

/// `log Γ(n+1) − log(√(2πn) (n/e)^n)`: the Stirling series remainder.
fn stirlerr(n: u64) -> f64 {
    // Exact values for small n; the asymptotic series below is only good
    // past n = 15.
    const TABLE: [f64; 15] = [
        0.08106146679532726,    // n = 1
        0.04134069595540929,    // n = 2
        0.02767792568499834,    // n = 3
        0.020790672103765093,   // n = 4
        0.016644691189821193,   // n = 5
        0.013876128823070748,   // n = 6
        0.01189670994589177,    // n = 7
        0.010411265261972096,   // n = 8
        0.009255462182712733,   // n = 9
        0.008330563433362871,   // n = 10
        0.007573675487951841,   // n = 11
        0.00694284010720953,    // n = 12
        0.006408994188004207,   // n = 13
        0.005951370112758848,   // n = 14
        0.005554733551962801,   // n = 15
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return TABLE[(n - 1) as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
}

/// `bd0(x, np) = x·log(x/np) + np − x`, the deviance term of the
/// saddle-point expansion, evaluated without cancellation near `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    debug_assert!(x > 0.0 && np > 0.0);
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    }
    x * (x / np).ln() + np - x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn params_reject_out_of_domain() {
        assert!(OperatorParams::new(0, 1, 2.0).is_err());
        assert!(OperatorParams::new(1, 0, 2.0).is_err());
        assert!(OperatorParams::new(1, 1, 1.0).is_err());
        assert!(OperatorParams::new(1, 1, 0.5).is_err());
        assert!(OperatorParams::new(1, 1, f64::NAN).is_err());
        assert!(OperatorParams::new(3, 7, 1.32).is_ok());
    }

    #[test]
    fn lambda_at_e_is_inverse_e_minus_one() {
        let l = lambda(1, std::f64::consts::E).unwrap();
        assert_close(l, 1.0 / (std::f64::consts::E - 1.0), 1e-15);
        assert_close(l, 0.5819767, 1e-7);
    }

    #[test]
    fn lambda_large_m_expansion() {
        // 1 − λ ≈ log(a)/(2m) up to O(1/m²).
        let a = 1.32;
        for &m in &[1_000u32, 10_000] {
            let l = lambda(m, a).unwrap();
            let lead = a.ln() / (2.0 * m as f64);
            assert!((1.0 - l - lead).abs() < lead * 2e-3, "m = {m}");
        }
    }

    #[test]
    fn lambda_matches_table1_pin() {
        let l = lambda(5, 1.32).unwrap();
        assert_close(l, 0.9724926, 1e-6);
        assert_close(0.01 * (1.0 - l * l), 5.42559e-4, 1e-9);
    }

    #[test]
    fn lambda_monotone_below_one() {
        for &a in &[1.1, 1.32, 2.0, 10.0] {
            let mut prev = 0.0;
            for m in (1..=10_000u32).step_by(37) {
                let l = lambda(m, a).unwrap();
                assert!(l > prev && l < 1.0, "a = {a}, m = {m}");
                prev = l;
            }
        }
    }

    #[test]
    fn lambda_rejects_bad_input() {
        assert!(lambda(0, 2.0).is_err());
        assert!(lambda(3, 1.0).is_err());
        assert!(lambda(3, 0.9).is_err());
    }

    #[test]
    fn mu_identity_machine_precision() {
        let cases = [(1u32, 2u32, 1.1, 3.0, 7.0), (17, 5, 1.32, 0.25, 50.0), (999, 999, 10.0, 12.5, 0.0)];
        for (m, n, a, x, y) in cases {
            let p = OperatorParams::new(m, n, a).unwrap();
            let f = KernelFactors::new(&p, x, y).unwrap();
            let rhs = m as f64 * x * lambda(m, a).unwrap();
            let denom = rhs.abs().max(f64::MIN_POSITIVE);
            assert!((f.mu_x - rhs).abs() / denom <= 1e-14);
            let rhs_y = n as f64 * y * lambda(n, a).unwrap();
            assert!((f.mu_y - rhs_y).abs() / rhs_y.abs().max(f64::MIN_POSITIVE) <= 1e-14);
        }
    }

    #[test]
    fn log_weight_edge_cases() {
        assert_eq!(log_weight_1d(0, 0.0), 0.0);
        assert_eq!(log_weight_1d(3, 0.0), f64::NEG_INFINITY);
        assert_eq!(log_weight_1d(0, 2.5), -2.5);
        // k = 3, μ = 2: log(2³ e⁻² / 3!)
        let expected = 3.0 * 2f64.ln() - 2.0 - 6f64.ln();
        assert_close(log_weight_1d(3, 2.0), expected, 1e-14);
    }

    #[test]
    fn log_weight_matches_naive_small_mu() {
        // Against k·log μ − μ − log k! with exact factorials.
        let mut fact = 1.0f64;
        for k in 1..=18u64 {
            fact *= k as f64;
            for &mu in &[0.3, 1.0, 7.5, 20.0] {
                let naive = k as f64 * f64::ln(mu) - mu - fact.ln();
                assert_close(log_weight_1d(k, mu), naive, 1e-12);
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for &mu in &[0.5, 5.0, 50.0, 1000.0, 10_000.0] {
            let hi = (mu + 20.0 * (mu + 1.0).sqrt() + 40.0) as u64;
            let mut sum = 0.0f64;
            let mut c = 0.0f64;
            for k in 0..=hi {
                let w = weight_1d(k, mu);
                let t = sum + w;
                c += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
                sum = t;
            }
            assert!(((sum + c) - 1.0).abs() <= 1e-12, "mu = {mu}: {:e}", (sum + c) - 1.0);
        }
    }

    #[test]
    fn kernel_weight_examples() {
        let p = OperatorParams::new(1, 1, std::f64::consts::E).unwrap();
        // Only surviving term at the origin.
        assert_eq!(kernel_weight(&p, 0, 0, 0.0, 0.0).unwrap(), 1.0);
        // Direct substitution at (1, 1): exp(−2/(e−1)).
        let expected = (-2.0 / (std::f64::consts::E - 1.0)).exp();
        assert_close(kernel_weight(&p, 0, 0, 1.0, 1.0).unwrap(), expected, 1e-15);
        // Nonnegativity on a few indices.
        for k1 in 0..20 {
            for k2 in 0..20 {
                assert!(kernel_weight(&p, k1, k2, 0.7, 2.3).unwrap() >= 0.0);
            }
        }
        assert!(kernel_weight(&p, 0, 0, -1.0, 0.0).is_err());
    }
}
