//! Closed-form distribution, moments, mode, and vanishing-drift asymptotics
//! of the range minimum X for the single-frog and general initial
//! configurations.
//!
//! The single-frog law is `P(X <= x) = (rho^{x+1}; rho)_inf`; a general
//! configuration eta multiplies site factors `(1 - rho^{x+k+1})^{eta_k}`.
//! Everything is evaluated in log space with certified truncation.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::bellpoly::{moments_from_cumulants, CumulantVector};
use crate::error::{config, domain, Result};
use crate::qseries::{log_q_pochhammer_inf, q_digamma, q_digamma_derivative, zeta_int, QParam};

/// Drift parameter rho = (1-p)/p of the rightward-biased walk, with the
/// derived step probability p and the depth scale Z_rho = ln(1-rho)/ln(rho).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParam {
    rho: f64,
    p: f64,
    z_rho: f64,
}

impl DriftParam {
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(domain(format!("rho must lie strictly in (0,1), got {rho}")));
        }
        Ok(DriftParam {
            rho,
            p: 1.0 / (1.0 + rho),
            z_rho: (1.0 - rho).ln() / rho.ln(),
        })
    }

    pub fn from_p(p: f64) -> Result<Self> {
        if !(p > 0.5 && p < 1.0) {
            return Err(domain(format!("p must lie strictly in (1/2,1), got {p}")));
        }
        Self::from_rho((1.0 - p) / p)
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Depth scale Z_rho = ln(1-rho)/ln(rho).
    #[inline]
    pub fn z_rho(&self) -> f64 {
        self.z_rho
    }

    #[inline]
    pub fn ln_rho(&self) -> f64 {
        self.rho.ln()
    }

    pub(crate) fn qparam(&self) -> QParam {
        QParam::new(self.rho).expect("rho validated at construction")
    }
}

/// Per-site counts beyond the explicit prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    /// No frogs beyond the prefix.
    Zero,
    /// n frogs on every site beyond the prefix (n >= 1).
    Constant(u64),
    /// a + b*k frogs on site k beyond the prefix (a >= 1).
    Arithmetic { a: u64, b: u64 },
}

/// Which sites of the lattice carry the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    NonnegativeOnly,
    AllOfZ,
}

/// Initial frog configuration: an explicit finite prefix of per-site counts
/// followed by a tail rule. Constant and Arithmetic tails keep
/// `sum eta_k rho^k` finite for every rho in (0,1) by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrogConfig {
    prefix: Vec<u64>,
    tail: TailRule,
    support: Support,
}

impl FrogConfig {
    pub fn new(prefix: Vec<u64>, tail: TailRule, support: Support) -> Result<Self> {
        match tail {
            TailRule::Constant(n) if n == 0 => {
                return Err(config("constant tail requires n >= 1; use a zero tail instead"))
            }
            TailRule::Arithmetic { a, .. } if a == 0 => {
                return Err(config("arithmetic tail requires a >= 1"))
            }
            _ => {}
        }
        match support {
            Support::NonnegativeOnly => {
                if matches!(tail, TailRule::Zero) && prefix.iter().all(|&n| n == 0) {
                    return Err(config("configuration places no frogs anywhere"));
                }
            }
            Support::AllOfZ => {
                let n = match tail {
                    TailRule::Constant(n) => n,
                    _ => {
                        return Err(config(
                            "support on all of Z requires a uniform constant count per site",
                        ))
                    }
                };
                if prefix.iter().any(|&v| v != n) {
                    return Err(config(
                        "support on all of Z requires every site to carry the same count",
                    ));
                }
            }
        }
        Ok(FrogConfig { prefix, tail, support })
    }

    /// eta == 1 on all nonnegative sites.
    pub fn single_frog() -> Self {
        FrogConfig {
            prefix: Vec::new(),
            tail: TailRule::Constant(1),
            support: Support::NonnegativeOnly,
        }
    }

    pub fn constant(n: u64) -> Result<Self> {
        Self::new(Vec::new(), TailRule::Constant(n), Support::NonnegativeOnly)
    }

    pub fn arithmetic(a: u64, b: u64) -> Result<Self> {
        Self::new(Vec::new(), TailRule::Arithmetic { a, b }, Support::NonnegativeOnly)
    }

    pub fn all_z(n: u64) -> Result<Self> {
        Self::new(Vec::new(), TailRule::Constant(n), Support::AllOfZ)
    }

    /// eta_k for nonnegative site index k.
    pub fn count_at(&self, k: u64) -> u64 {
        let idx = k as usize;
        if idx < self.prefix.len() {
            self.prefix[idx]
        } else {
            match self.tail {
                TailRule::Zero => 0,
                TailRule::Constant(n) => n,
                TailRule::Arithmetic { a, b } => a + b * k,
            }
        }
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// True when eta is identically 1 on the nonnegative sites.
    pub fn is_single_frog(&self) -> bool {
        self.support == Support::NonnegativeOnly
            && self.tail == TailRule::Constant(1)
            && self.prefix.iter().all(|&n| n == 1)
    }

    /// Closed-form `sum_k eta_k rho^k`.
    pub(crate) fn weighted_sum(&self, rho: f64) -> f64 {
        let len = self.prefix.len() as u64;
        let mut sum = 0.0;
        let mut pw = 1.0;
        for &n in &self.prefix {
            sum += n as f64 * pw;
            pw *= rho;
        }
        sum + tail_weighted_sum(self.tail, len, rho)
    }

    /// Closed-form `sum_{k > x} eta_k rho^{k+1}`, the total-variation cost of
    /// ignoring every site beyond x.
    pub(crate) fn ignored_site_bound(&self, rho: f64, x: i64) -> f64 {
        let len = self.prefix.len() as u64;
        let start = (x + 1).max(0) as u64;
        let mut sum = 0.0;
        let mut pw = rho.powi(start as i32 + 1);
        for k in start..len {
            sum += self.count_at(k) as f64 * pw;
            pw *= rho;
        }
        let from = start.max(len);
        sum + rho * tail_weighted_sum(self.tail, from, rho)
    }
}

/// `sum_{k >= from} tail(k) rho^k` in closed form.
fn tail_weighted_sum(tail: TailRule, from: u64, rho: f64) -> f64 {
    let pw = rho.powi(from as i32);
    match tail {
        TailRule::Zero => 0.0,
        TailRule::Constant(n) => n as f64 * pw / (1.0 - rho),
        TailRule::Arithmetic { a, b } => {
            // sum (a + b k) rho^k from k = from
            let geo = pw / (1.0 - rho);
            let arith = pw * (from as f64 * (1.0 - rho) + rho) / ((1.0 - rho) * (1.0 - rho));
            a as f64 * geo + b as f64 * arith
        }
    }
}

/// Report for one moment order: the direct tail-sum value, the
/// Bell-polynomial value when available, and the vanishing-drift
/// prediction Z_rho^m with the ratio against it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub m: u32,
    pub exact: f64,
    pub via_bell: Option<f64>,
    pub asymptotic: f64,
    pub ratio_exact_over_asymptotic: f64,
}

/// Single-frog CDF `P(X <= x) = (rho^{x+1}; rho)_inf`; 0 for x < 0.
pub fn single_cdf(drift: &DriftParam, x: i64, tol: f64) -> Result<f64> {
    if x < 0 {
        return Ok(0.0);
    }
    let a = power_int(drift.rho(), x + 1);
    Ok(log_q_pochhammer_inf(a, drift.qparam(), tol)?.exp())
}

/// Single-frog PMF `P(X = x) = rho^x (rho^{x+1}; rho)_inf`; 0 for x < 0.
pub fn single_pmf(drift: &DriftParam, x: i64, tol: f64) -> Result<f64> {
    if x < 0 {
        return Ok(0.0);
    }
    let a = power_int(drift.rho(), x + 1);
    let tail = log_q_pochhammer_inf(a, drift.qparam(), tol)?;
    Ok((x as f64 * drift.ln_rho() + tail.log_value).exp())
}

/// Closed-form window that contains the mode:
/// `lo = floor((ln(1-rho) - ln rho)/ln rho)`,
/// `hi = floor((ln(1-rho) - ln(2-rho))/ln rho)`.
pub fn mode_bounds(drift: &DriftParam) -> (i64, i64) {
    let rho = drift.rho();
    let lr = rho.ln();
    let lo = (((1.0 - rho).ln() - lr) / lr).floor() as i64;
    let hi = (((1.0 - rho).ln() - (2.0 - rho).ln()) / lr).floor() as i64;
    (lo, hi)
}

/// Smallest argmax of the single-frog PMF, found by scanning past the
/// upper mode bound. Beyond the unique continuous critical point the PMF
/// is strictly decreasing, so a fixed slack of 64 sites suffices.
pub fn mode_exact(drift: &DriftParam, tol: f64) -> Result<u64> {
    let (_, hi) = mode_bounds(drift);
    let limit = hi.max(0) as u64 + 64;
    let rho = drift.rho();
    let mut pmf = single_pmf(drift, 0, tol)?;
    let mut best = pmf;
    let mut arg = 0u64;
    let mut pow_next = rho; // rho^{x+1}
    for x in 1..=limit {
        pmf *= rho / (1.0 - pow_next);
        pow_next *= rho;
        if pmf > best {
            best = pmf;
            arg = x;
        }
    }
    Ok(arg)
}

/// m-th cumulant of the single-frog law:
/// `kappa^(m) = sum_{k>=1} k^{m-1} rho^k / (1 - rho^k)`.
pub fn cumulant(drift: &DriftParam, m: u32, tol: f64) -> Result<f64> {
    if m < 1 {
        return Err(domain("cumulant order must be >= 1"));
    }
    let rho = drift.rho();
    let e = (m - 1) as i32;
    let mut sum = 0.0;
    let mut pw = 1.0;
    let mut k = 0u64;
    loop {
        k += 1;
        pw *= rho;
        sum += (k as f64).powi(e) * pw / (1.0 - pw);
        // terms are bounded by k^{m-1} rho^k / (1-rho); the remaining sum is
        // geometric after extracting exp((m-1)/k) growth of the power factor
        let growth = rho * ((e as f64) / (k as f64 + 1.0)).exp();
        if growth < 1.0 {
            let tail = ((k + 1) as f64).powi(e) * pw * rho / ((1.0 - rho) * (1.0 - growth));
            if tail <= tol {
                return Ok(sum);
            }
        }
    }
}

/// Cumulant generating function
/// `g(t) = sum_{k>=1} ln((1 - rho^k)/(1 - e^t rho^k))` for `e^t rho < 1`.
pub fn cgf(drift: &DriftParam, t: f64, tol: f64) -> Result<f64> {
    let rho = drift.rho();
    let s = t.exp();
    if s * rho >= 1.0 {
        return Err(domain(format!(
            "cgf requires e^t * rho < 1, got t={t} with rho={rho}"
        )));
    }
    let c = s.max(1.0);
    let mut sum = 0.0;
    let mut pw = 1.0;
    loop {
        pw *= rho;
        sum += (-pw).ln_1p() - (-s * pw).ln_1p();
        let next = pw * rho;
        let tail = (s - 1.0).abs() * next / ((1.0 - rho) * (1.0 - c * next));
        if tail <= tol {
            return Ok(sum);
        }
    }
}

/// Full moment report for the single-frog law: direct tail sum, the
/// Bell-polynomial route through the first m cumulants, and Z_rho^m.
pub fn moment(drift: &DriftParam, m: u32, tol: f64) -> Result<MomentReport> {
    if m < 1 {
        return Err(domain("moment order must be >= 1"));
    }
    let exact = single_moment_direct(drift, m, tol)?;
    let kappa: Result<Vec<f64>> = (1..=m).map(|j| cumulant(drift, j, tol)).collect();
    let via_bell = moments_from_cumulants(&CumulantVector::new(kappa?)?, m as usize)?;
    let asymptotic = drift.z_rho().powi(m as i32);
    Ok(MomentReport {
        m,
        exact,
        via_bell: Some(via_bell),
        asymptotic,
        ratio_exact_over_asymptotic: exact / asymptotic,
    })
}

/// `sum_x x^m P(X = x)` with certified truncation, using the one-factor
/// recurrence of the q-Pochhammer tail to make each step O(1).
fn single_moment_direct(drift: &DriftParam, m: u32, tol: f64) -> Result<f64> {
    let rho = drift.rho();
    let mut log_tail = log_q_pochhammer_inf(rho, drift.qparam(), tol * 0.5)?.log_value;
    let mut log_rho_x = 0.0;
    let mut pow_next = rho; // rho^{x+1}
    let mut sum = 0.0;
    let mut x = 0u64;
    loop {
        if x > 0 {
            sum += (x as f64).powi(m as i32) * (log_rho_x + log_tail).exp();
        }
        // advance to x+1: (rho^{x+2};rho)_inf = (rho^{x+1};rho)_inf / (1 - rho^{x+1})
        log_tail -= (-pow_next).ln_1p();
        log_rho_x += drift.ln_rho();
        pow_next *= rho;
        x += 1;
        let growth = rho * (m as f64 / (x as f64 + 1.0)).exp();
        if growth < 1.0 {
            let tail = ((x + 1) as f64).powi(m as i32) * pow_next / (rho * (1.0 - growth));
            if tail <= tol * 0.5 {
                return Ok(sum);
            }
        }
    }
}

/// Mean and variance via the q-digamma closed forms:
/// `E(X) = (psi_rho(1) + ln(1-rho)) / ln rho`, `Var(X) = psi'_rho(1) / ln^2 rho`.
pub fn mean_variance_closed_form(drift: &DriftParam, tol: f64) -> Result<(f64, f64)> {
    let q = drift.qparam();
    let lr = drift.ln_rho();
    let mean = (q_digamma(1.0, q, tol)? + (1.0 - drift.rho()).ln()) / lr;
    let var = q_digamma_derivative(1.0, q, tol)? / (lr * lr);
    Ok((mean, var))
}

/// Vanishing-drift prediction for the cumulant series: j = 0 gives
/// `ln(1-rho)/ln rho` (the kappa^(1) scale) and j >= 1 gives
/// `j! zeta(j+1) / (-ln rho)^{j+1}` (the kappa^(j+1) scale).
pub fn cumulant_asymptotic(drift: &DriftParam, j: u32) -> Result<f64> {
    if j == 0 {
        return Ok(drift.z_rho());
    }
    let mut fact = 1.0;
    for i in 2..=j {
        fact *= f64::from(i);
    }
    Ok(fact * zeta_int(j + 1)? / (-drift.ln_rho()).powi(j as i32 + 1))
}

/// General-configuration CDF
/// `P(X <= x) = prod_k (1 - rho^{x+k+1})^{eta_k}`; 0 for x < 0.
pub fn general_cdf(drift: &DriftParam, cfg: &FrogConfig, x: i64, tol: f64) -> Result<f64> {
    if x < 0 {
        return Ok(0.0);
    }
    Ok(log_general_cdf(drift, cfg, x, tol)?.exp())
}

/// General-configuration PMF, computed as the CDF difference.
pub fn general_pmf(drift: &DriftParam, cfg: &FrogConfig, x: i64, tol: f64) -> Result<f64> {
    if x < 0 {
        return Ok(0.0);
    }
    if x == 0 {
        return general_cdf(drift, cfg, 0, tol);
    }
    Ok(general_cdf(drift, cfg, x, tol)? - general_cdf(drift, cfg, x - 1, tol)?)
}

/// `ln P(X <= x)` for x >= 0, as a certified truncated sum
/// `sum_k eta_k ln(1 - rho^{x+k+1})`.
pub fn log_general_cdf(drift: &DriftParam, cfg: &FrogConfig, x: i64, tol: f64) -> Result<f64> {
    if cfg.support() != Support::NonnegativeOnly {
        return Err(domain(
            "closed-form CDF applies to nonnegative-support configurations only",
        ));
    }
    if x < 0 {
        return Err(domain("log CDF undefined below the support"));
    }
    let rho = drift.rho();
    let len = cfg.prefix.len() as u64;
    let mut sum = 0.0;
    let mut pw = power_int(rho, x + 1); // rho^{x+k+1}
    for &n in &cfg.prefix {
        if n > 0 {
            sum += n as f64 * (-pw).ln_1p();
        }
        pw *= rho;
    }
    let y = x as u64 + len + 1; // exponent entering the tail factors
    match cfg.tail {
        TailRule::Zero => {}
        TailRule::Constant(n) => {
            sum += n as f64 * log_pochhammer_from(rho, y, tol)?;
        }
        TailRule::Arithmetic { a, b } => {
            let a0 = (a + b * len) as f64;
            sum += a0 * log_pochhammer_from(rho, y, tol)?;
            sum += b as f64 * weighted_log_series(rho, y, tol)?;
        }
    }
    Ok(sum)
}

/// `log (rho^y; rho)_inf` for an integer exponent y >= 1.
fn log_pochhammer_from(rho: f64, y: u64, tol: f64) -> Result<f64> {
    let q = QParam::new(rho)?;
    let a = power_int(rho, y as i64);
    Ok(log_q_pochhammer_inf(a, q, tol)?.log_value)
}

/// `S1(y) = sum_{j>=0} j ln(1 - rho^{y+j})`, the arithmetic-weighted
/// companion of the log q-Pochhammer series.
fn weighted_log_series(rho: f64, y: u64, tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut pw = power_int(rho, y as i64);
    let mut j = 0u64;
    loop {
        if j > 0 {
            sum += j as f64 * (-pw).ln_1p();
        }
        pw *= rho;
        j += 1;
        // |sum_{i>=j} i ln(1-rho^{y+i})| <= sum i rho^{y+i} / (1 - rho^{y+j})
        let arith = pw * (j as f64 * (1.0 - rho) + rho) / ((1.0 - rho) * (1.0 - rho));
        let tail = arith / (1.0 - pw);
        if tail <= tol {
            return Ok(sum);
        }
    }
}

/// Moment report for a general configuration, via the survival-function sum
/// `E(X^m) = sum_x ((x+1)^m - x^m) P(X > x)`; the Bell route is single-frog
/// only, so `via_bell` is absent.
pub fn general_moment(drift: &DriftParam, cfg: &FrogConfig, m: u32, tol: f64) -> Result<MomentReport> {
    if m < 1 {
        return Err(domain("moment order must be >= 1"));
    }
    if cfg.support() != Support::NonnegativeOnly {
        return Err(domain(
            "closed-form moments apply to nonnegative-support configurations only",
        ));
    }
    let rho = drift.rho();
    let weight = cfg.weighted_sum(rho);
    let mut cursor = LogCdfCursor::new(drift, cfg, tol)?;
    let mut sum = 0.0;
    let mut x = 0u64;
    loop {
        let survival = -cursor.log_cdf().exp_m1();
        let xf = x as f64;
        sum += ((xf + 1.0).powi(m as i32) - xf.powi(m as i32)) * survival;
        cursor.advance();
        x += 1;
        // survival(x) <= weight * rho^{x+1}; the remaining increments sum to
        // a geometric-arithmetic tail once the power growth factor is < 1
        let growth = rho * ((m as f64 - 1.0) / (x as f64 + 2.0)).exp();
        if growth < 1.0 {
            let tail = weight
                * m as f64
                * ((x + 2) as f64).powi(m as i32 - 1)
                * power_int(rho, x as i64 + 2)
                / (1.0 - growth);
            if tail <= tol {
                break;
            }
        }
    }
    let asymptotic = drift.z_rho().powi(m as i32);
    Ok(MomentReport {
        m,
        exact: sum,
        via_bell: None,
        asymptotic,
        ratio_exact_over_asymptotic: sum / asymptotic,
    })
}

/// Ratio of `sum_{x>=0} (Z_rho(1+delta) + x)^m rho^x` against the closed
/// form `Z_rho^m (1+delta)^m / (1-rho)`. Test-support quantity for the
/// shifted-sum equivalence; the ratio tends to 1 as rho rises to 1 and is
/// exactly 1 at m = 0.
pub fn zrho_ratio_lemma_check(drift: &DriftParam, delta: f64, m: u32) -> Result<f64> {
    if delta <= 0.0 {
        return Err(domain("delta must be positive"));
    }
    let rho = drift.rho();
    let shift = drift.z_rho() * (1.0 + delta);
    let mut sum = 0.0;
    let mut pw = 1.0;
    let mut x = 0u64;
    loop {
        sum += (shift + x as f64).powi(m as i32) * pw;
        pw *= rho;
        x += 1;
        let growth = rho * (m as f64 / (shift + x as f64)).exp();
        if growth < 1.0 {
            let tail = (shift + x as f64).powi(m as i32) * pw / (1.0 - growth);
            if tail <= 1e-12 * sum.max(1.0) {
                break;
            }
        }
    }
    let closed = shift.powi(m as i32) / (1.0 - rho);
    Ok(sum / closed)
}

/// Expected number of frogs (single-frog configuration) that ever reach a
/// site `target_depth` below the origin: `rho^Z / (1-rho)`.
pub fn expected_hitters(drift: &DriftParam, target_depth: f64) -> Result<f64> {
    if target_depth < 0.0 {
        return Err(domain("target depth must be nonnegative"));
    }
    Ok((target_depth * drift.ln_rho()).exp() / (1.0 - drift.rho()))
}

/// Mean and variance of the rescaled variable Y = X * ln(rho)/ln(1-rho),
/// which concentrates at 1 as the drift vanishes.
pub fn scaled_convergence_report(drift: &DriftParam, tol: f64) -> Result<(f64, f64)> {
    let (mean, var) = mean_variance_closed_form(drift, tol)?;
    let scale = 1.0 / drift.z_rho();
    Ok((mean * scale, var * scale * scale))
}

/// Lazily evaluated, internally cached CDF/PMF of the range minimum for one
/// (drift, configuration) pair. Concurrent reads of a shared value are safe;
/// every cached entry carries the constructor's truncation tolerance.
pub struct RangeDistribution {
    drift: DriftParam,
    config: FrogConfig,
    tol: f64,
    log_cdf_cache: Mutex<HashMap<i64, f64>>,
}

impl RangeDistribution {
    pub fn new(drift: DriftParam, config: FrogConfig, tol: f64) -> Result<Self> {
        if config.support() != Support::NonnegativeOnly {
            return Err(domain(
                "closed-form range distribution requires nonnegative support",
            ));
        }
        if tol <= 0.0 {
            return Err(domain("tolerance must be positive"));
        }
        Ok(RangeDistribution {
            drift,
            config,
            tol,
            log_cdf_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn drift(&self) -> &DriftParam {
        &self.drift
    }

    pub fn config(&self) -> &FrogConfig {
        &self.config
    }

    pub fn log_cdf(&self, x: i64) -> Result<f64> {
        if x < 0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mut cache = self.log_cdf_cache.lock().expect("cache poisoned");
        if let Some(&v) = cache.get(&x) {
            return Ok(v);
        }
        let v = log_general_cdf(&self.drift, &self.config, x, self.tol)?;
        cache.insert(x, v);
        Ok(v)
    }

    pub fn cdf(&self, x: i64) -> Result<f64> {
        if x < 0 {
            return Ok(0.0);
        }
        Ok(self.log_cdf(x)?.exp())
    }

    pub fn pmf(&self, x: i64) -> Result<f64> {
        if x < 0 {
            return Ok(0.0);
        }
        Ok(self.cdf(x)? - self.cdf(x - 1)?)
    }
}

/// Walks the log-CDF over consecutive x with O(1) updates, using
/// `(rho^{y+1};rho)_inf = (rho^y;rho)_inf / (1 - rho^y)` and the matching
/// recurrence for the arithmetic-weighted series.
struct LogCdfCursor<'a> {
    rho: f64,
    cfg: &'a FrogConfig,
    x: u64,
    pow_y: f64,      // rho^y with y = x + prefix_len + 1
    lq: f64,         // log (rho^y; rho)_inf
    s1: f64,         // sum_{j>=0} j ln(1 - rho^{y+j})
    needs_s1: bool,
}

impl<'a> LogCdfCursor<'a> {
    fn new(drift: &DriftParam, cfg: &'a FrogConfig, tol: f64) -> Result<Self> {
        let rho = drift.rho();
        let len = cfg.prefix.len() as u64;
        let y = len + 1;
        let needs_s1 = matches!(cfg.tail, TailRule::Arithmetic { .. });
        let lq = match cfg.tail {
            TailRule::Zero => 0.0,
            _ => log_pochhammer_from(rho, y, tol * 0.25)?,
        };
        let s1 = if needs_s1 {
            weighted_log_series(rho, y, tol * 0.25)?
        } else {
            0.0
        };
        Ok(LogCdfCursor {
            rho,
            cfg,
            x: 0,
            pow_y: power_int(rho, y as i64),
            lq,
            s1,
            needs_s1,
        })
    }

    fn log_cdf(&self) -> f64 {
        let rho = self.rho;
        let len = self.cfg.prefix.len() as u64;
        let mut sum = 0.0;
        let mut pw = power_int(rho, self.x as i64 + 1);
        for &n in &self.cfg.prefix {
            if n > 0 {
                sum += n as f64 * (-pw).ln_1p();
            }
            pw *= rho;
        }
        match self.cfg.tail {
            TailRule::Zero => {}
            TailRule::Constant(n) => sum += n as f64 * self.lq,
            TailRule::Arithmetic { a, b } => {
                sum += (a + b * len) as f64 * self.lq + b as f64 * self.s1;
            }
        }
        sum
    }

    fn advance(&mut self) {
        let drop = (-self.pow_y).ln_1p();
        self.lq -= drop;
        if self.needs_s1 {
            self.s1 -= self.lq;
        }
        self.pow_y *= self.rho;
        self.x += 1;
    }
}

/// rho^e for integer exponents without powf drift.
pub(crate) fn power_int(rho: f64, e: i64) -> f64 {
    if e <= 0 {
        return 1.0;
    }
    if e <= i32::MAX as i64 {
        rho.powi(e as i32)
    } else {
        (e as f64 * rho.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::DEFAULT_TOL;

    fn drift(rho: f64) -> DriftParam {
        DriftParam::from_rho(rho).unwrap()
    }

    fn product_oracle(a: f64, q: f64) -> f64 {
        let mut prod = 1.0;
        let mut aq = a;
        for _ in 0..4000 {
            prod *= 1.0 - aq;
            aq *= q;
            if aq < 1e-300 {
                break;
            }
        }
        prod
    }

    #[test]
    fn drift_param_validation_and_roundtrip() {
        assert!(DriftParam::from_rho(0.0).is_err());
        assert!(DriftParam::from_rho(1.0).is_err());
        assert!(DriftParam::from_p(0.5).is_err());
        let d = drift(0.6);
        assert!((d.p() - 0.625).abs() < 1e-15);
        assert!(d.z_rho() > 0.0);
        let back = DriftParam::from_p(d.p()).unwrap();
        assert!((back.rho() - 0.6).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn single_cdf_examples() {
        let d = drift(0.5);
        let v = single_cdf(&d, 0, 1e-15).unwrap();
        assert!((v - product_oracle(0.5, 0.5)).abs() < 1e-13);
        assert!((v - 0.288788).abs() < 1e-6);
        assert_eq!(single_cdf(&d, -1, DEFAULT_TOL).unwrap(), 0.0);

        // vanishing drift: nothing ever steps left
        let tiny = drift(1e-9);
        assert!((single_cdf(&tiny, 0, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-8);

        // deep tail: 1 - CDF(x) <= rho^{x+1}/(1-rho)
        let d9 = drift(0.9);
        let gap = 1.0 - single_cdf(&d9, 100, DEFAULT_TOL).unwrap();
        assert!(gap >= 0.0 && gap <= 0.9f64.powi(101) / 0.1);
        assert!((single_cdf(&d9, 300, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_pmf_matches_cdf_difference_and_normalizes() {
        let d = drift(0.5);
        assert!((single_pmf(&d, 0, DEFAULT_TOL).unwrap() - 0.288788).abs() < 1e-6);
        let p1 = single_pmf(&d, 1, 1e-15).unwrap();
        let oracle = 0.5 * product_oracle(0.25, 0.5);
        assert!((p1 - oracle).abs() < 1e-13);
        for x in 0..20 {
            let diff = single_cdf(&d, x, DEFAULT_TOL).unwrap() - single_cdf(&d, x - 1, DEFAULT_TOL).unwrap();
            let pmf = single_pmf(&d, x, DEFAULT_TOL).unwrap();
            assert!((pmf - diff).abs() < 1e-12, "x={x}");
        }
        let total: f64 = (0..=200)
            .map(|x| single_pmf(&d, x, DEFAULT_TOL).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_bounds_examples() {
        assert_eq!(mode_bounds(&drift(0.9)), (20, 22));
        assert_eq!(mode_bounds(&drift(0.5)), (0, 1));
        // unfloored difference stays in (0,2) across the drift range
        for i in 1..100 {
            let rho = i as f64 / 100.0;
            let lr = rho.ln();
            let lo = ((1.0 - rho).ln() - lr) / lr;
            let hi = ((1.0 - rho).ln() - (2.0 - rho).ln()) / lr;
            let diff = hi - lo;
            assert!(diff > 0.0 && diff < 2.0, "rho={rho}: {diff}");
        }
    }

    #[test]
    fn mode_exact_lies_in_bounds() {
        for &rho in &[0.5, 0.9, 0.99] {
            let d = drift(rho);
            let (lo, hi) = mode_bounds(&d);
            let m = mode_exact(&d, DEFAULT_TOL).unwrap() as i64;
            assert!(m >= lo && m <= hi, "rho={rho}: mode {m} outside [{lo},{hi}]");
        }
        let m5 = mode_exact(&drift(0.5), DEFAULT_TOL).unwrap();
        assert!(m5 == 0 || m5 == 1);
        let m9 = mode_exact(&drift(0.9), DEFAULT_TOL).unwrap();
        assert!((20..=22).contains(&m9));
    }

    #[test]
    fn cumulant_series_examples() {
        // Erdos-Borwein-type sum at rho = 0.5
        let k1 = cumulant(&drift(0.5), 1, 1e-13).unwrap();
        assert!((k1 - 1.6066951524152918).abs() < 1e-12);

        // first term dominates at vanishing drift
        let k_small = cumulant(&drift(1e-8), 1, 1e-20).unwrap();
        assert!((k_small - 1e-8).abs() < 1e-15);

        // direct-sum oracle for the second cumulant
        let mut oracle = 0.0;
        for k in 1..300 {
            let p = 0.5f64.powi(k);
            oracle += k as f64 * p / (1.0 - p);
        }
        let k2 = cumulant(&drift(0.5), 2, 1e-13).unwrap();
        assert!((k2 - oracle).abs() < 1e-12);
    }

    #[test]
    fn cgf_examples() {
        let d = drift(0.5);
        assert_eq!(cgf(&d, 0.0, 1e-13).unwrap(), 0.0);
        // central difference of g at 0 recovers the first cumulant
        let h = 1e-6;
        let fd = (cgf(&d, h, 1e-14).unwrap() - cgf(&d, -h, 1e-14).unwrap()) / (2.0 * h);
        let k1 = cumulant(&d, 1, 1e-13).unwrap();
        assert!((fd - k1).abs() < 1e-6);
        // g(t)/t approaches E(X) for small t
        let d7 = drift(0.7);
        let t = 1e-7;
        let ratio = cgf(&d7, t, 1e-15).unwrap() / t;
        assert!((ratio - cumulant(&d7, 1, 1e-13).unwrap()).abs() < 1e-5);
        // radius of convergence
        assert!(cgf(&d, 0.7, 1e-12).is_err());
    }

    #[test]
    fn moment_report_consistency() {
        let d = drift(0.5);
        let m1 = moment(&d, 1, 1e-12).unwrap();
        assert!((m1.exact - 1.6066951524152918).abs() < 1e-9);
        assert!((m1.exact - m1.via_bell.unwrap()).abs() / m1.exact < 1e-10);

        let m2 = moment(&d, 2, 1e-12).unwrap();
        let k1 = cumulant(&d, 1, 1e-13).unwrap();
        let k2 = cumulant(&d, 2, 1e-13).unwrap();
        assert!((m2.via_bell.unwrap() - (k1 * k1 + k2)).abs() < 1e-10);
    }

    #[test]
    fn moment_ratio_trends_to_one() {
        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999, 0.9999] {
            let r = moment(&drift(rho), 1, 1e-10).unwrap().ratio_exact_over_asymptotic;
            let dist = (r - 1.0).abs();
            assert!(dist < last, "rho={rho}");
            last = dist;
        }
        assert!(last < 0.15);
    }

    #[test]
    fn mean_variance_closed_form_matches_series() {
        for &rho in &[0.3, 0.5, 0.7, 0.9] {
            let d = drift(rho);
            let (mean, var) = mean_variance_closed_form(&d, 1e-13).unwrap();
            let k1 = cumulant(&d, 1, 1e-13).unwrap();
            let k2 = cumulant(&d, 2, 1e-13).unwrap();
            assert!((mean - k1).abs() / k1 < 1e-9, "rho={rho}");
            assert!((var - k2).abs() / k2 < 1e-9, "rho={rho}");
        }
    }

    #[test]
    fn variance_normalization_trends_to_pi_squared_over_six() {
        let target = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999] {
            let d = drift(rho);
            let (_, var) = mean_variance_closed_form(&d, 1e-11).unwrap();
            let normalized = var * d.ln_rho() * d.ln_rho();
            let dist = (normalized - target).abs();
            assert!(dist < last, "rho={rho}");
            last = dist;
        }
    }

    #[test]
    fn cumulant_asymptotic_examples() {
        let d = drift(0.999);
        let ratio0 = cumulant(&d, 1, 1e-10).unwrap() / cumulant_asymptotic(&d, 0).unwrap();
        assert!(ratio0 > 0.9 && ratio0 < 1.1);
        // j = 1 constant is zeta(2) = pi^2/6
        let z2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let expect = z2 / d.ln_rho().powi(2);
        assert!((cumulant_asymptotic(&d, 1).unwrap() - expect).abs() / expect < 1e-12);
        // ratio trend toward 1 for the second cumulant
        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999] {
            let dd = drift(rho);
            let r = cumulant(&dd, 2, 1e-10).unwrap() / cumulant_asymptotic(&dd, 1).unwrap();
            let dist = (r - 1.0).abs();
            assert!(dist < last, "rho={rho}");
            last = dist;
        }
    }

    #[test]
    fn general_cdf_reduces_and_powers() {
        let d = drift(0.6);
        let single = FrogConfig::single_frog();
        let a = general_cdf(&d, &single, 3, 1e-13).unwrap();
        let b = single_cdf(&d, 3, 1e-13).unwrap();
        assert!((a - b).abs() < 1e-12);

        let three = FrogConfig::constant(3).unwrap();
        let c = general_cdf(&d, &three, 2, 1e-13).unwrap();
        let s = single_cdf(&d, 2, 1e-13).unwrap();
        assert!((c - s.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn general_cdf_arithmetic_against_product_oracle() {
        // eta = {1,2,3,...} at rho = 0.5, x = 0: prod (1 - 0.5^{k+1})^{k+1}
        let d = drift(0.5);
        let cfg = FrogConfig::arithmetic(1, 1).unwrap();
        let got = general_cdf(&d, &cfg, 0, 1e-13).unwrap();
        let mut oracle = 0.0f64;
        for k in 0..200u32 {
            let f = 1.0 - 0.5f64.powi(k as i32 + 1);
            oracle += (k as f64 + 1.0) * f.ln();
        }
        assert!((got - oracle.exp()).abs() < 1e-12);
    }

    #[test]
    fn general_pmf_closed_form_and_normalization() {
        let d = drift(0.5);
        let two = FrogConfig::constant(2).unwrap();
        // P(X=x) = (1-(1-rho^x)^n) (rho^{x+1};rho)_inf^n at x=1
        let got = general_pmf(&d, &two, 1, 1e-13).unwrap();
        let tail = product_oracle(0.25, 0.5);
        let expect = (1.0 - (1.0 - 0.5f64).powi(2)) * tail * tail;
        assert!((got - expect).abs() < 1e-12);

        assert!((general_pmf(&d, &two, 0, 1e-13).unwrap() - general_cdf(&d, &two, 0, 1e-13).unwrap()).abs() < 1e-15);

        let arith = FrogConfig::arithmetic(1, 1).unwrap();
        let total: f64 = (0..=200)
            .map(|x| general_pmf(&d, &arith, x, 1e-13).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    /// Delta-sequence product form of the PMF, as an independent oracle:
    /// `P(X=x) = prod (1-rho^{x+k+1})^{eta_k} * (1 - prod (1-rho^{x+k})^{Delta_k})`.
    fn pmf_delta_oracle(d: &DriftParam, cfg: &FrogConfig, x: i64) -> f64 {
        let rho = d.rho();
        let terms = 4000i64;
        let mut log_first = 0.0;
        for k in 0..terms {
            let n = cfg.count_at(k as u64);
            if n > 0 {
                log_first += n as f64 * (-power_int(rho, x + k + 1)).ln_1p();
            }
        }
        let mut second: f64 = 1.0;
        let mut prev = 0i64;
        for k in 0..terms {
            let eta = cfg.count_at(k as u64) as i64;
            let delta = if k == 0 { eta } else { eta - prev };
            prev = eta;
            if delta != 0 {
                let base = 1.0 - power_int(rho, x + k);
                if base == 0.0 {
                    second = 0.0;
                    break;
                }
                second *= base.powi(delta as i32);
            }
        }
        log_first.exp() * (1.0 - second)
    }

    #[test]
    fn general_pmf_agrees_with_delta_form() {
        let d = drift(0.5);
        let configs = vec![
            FrogConfig::constant(2).unwrap(),
            FrogConfig::arithmetic(1, 1).unwrap(),
            FrogConfig::new(vec![3, 1, 2], TailRule::Constant(1), Support::NonnegativeOnly).unwrap(),
            FrogConfig::new(vec![0, 2], TailRule::Zero, Support::NonnegativeOnly).unwrap(),
        ];
        for cfg in &configs {
            // the delta product form assumes an occupied origin at x = 0
            let x_lo = if cfg.count_at(0) >= 1 { 0 } else { 1 };
            for x in x_lo..8 {
                let fast = general_pmf(&d, cfg, x, 1e-13).unwrap();
                let oracle = pmf_delta_oracle(&d, cfg, x);
                assert!(
                    (fast - oracle).abs() < 1e-10,
                    "cfg={cfg:?} x={x}: {fast} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn general_moment_reduction_and_domination() {
        let d = drift(0.5);
        let single = FrogConfig::single_frog();
        let gm = general_moment(&d, &single, 1, 1e-11).unwrap();
        let sm = moment(&d, 1, 1e-11).unwrap();
        assert!((gm.exact - sm.exact).abs() < 1e-9);
        assert!(gm.via_bell.is_none());

        // more frogs dig deeper: the n=2 CDF is the square of the n=1 CDF,
        // so it is pointwise smaller and the mean strictly larger
        let d7 = drift(0.7);
        let e1 = general_moment(&d7, &FrogConfig::constant(1).unwrap(), 1, 1e-11).unwrap().exact;
        let e2 = general_moment(&d7, &FrogConfig::constant(2).unwrap(), 1, 1e-11).unwrap().exact;
        assert!(e2 > e1, "n=2 mean {e2} should exceed n=1 mean {e1}");
    }

    #[test]
    fn general_moment_unbounded_config_tracks_z() {
        let cfg = FrogConfig::arithmetic(1, 1).unwrap();
        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999] {
            let d = drift(rho);
            let r = general_moment(&d, &cfg, 1, 1e-10).unwrap().ratio_exact_over_asymptotic;
            let dist = (r - 1.0).abs();
            assert!(dist < last, "rho={rho}: {dist} >= {last}");
            last = dist;
        }
    }

    #[test]
    fn zrho_ratio_examples() {
        let d = drift(0.99);
        let r = zrho_ratio_lemma_check(&d, 0.5, 1).unwrap();
        assert!(r > 1.0 && r < 1.5, "{r}");

        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999] {
            let rr = zrho_ratio_lemma_check(&drift(rho), 0.5, 2).unwrap();
            assert!(rr - 1.0 < last, "rho={rho}");
            assert!(rr > 1.0);
            last = rr - 1.0;
        }

        // m = 0 degenerate: plain geometric series, exactly 1
        let exact = zrho_ratio_lemma_check(&drift(0.77), 0.5, 0).unwrap();
        assert!((exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_hitters_examples() {
        for &rho in &[0.3, 0.6180339887498949, 0.9, 0.99] {
            let d = drift(rho);
            let v = expected_hitters(&d, d.z_rho()).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "rho={rho}: {v}");
        }
        // golden-ratio conjugate: Z = 2 exactly and rho^2/(1-rho) = 1
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let d = drift(golden);
        assert!((d.z_rho() - 2.0).abs() < 1e-14);
        assert!((expected_hitters(&d, 2.0).unwrap() - 1.0).abs() < 1e-12);

        let d5 = drift(0.5);
        assert!((expected_hitters(&d5, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(expected_hitters(&d5, -1.0).is_err());
    }

    #[test]
    fn scaled_convergence_examples() {
        let d = drift(0.999);
        let (mean_y, _) = scaled_convergence_report(&d, 1e-11).unwrap();
        assert!(mean_y > 0.8 && mean_y < 1.2);

        let mut last = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999, 0.9999] {
            let (_, var_y) = scaled_convergence_report(&drift(rho), 1e-10).unwrap();
            assert!(var_y < last, "rho={rho}");
            last = var_y;
        }

        // var_Y * ln^2(1-rho) -> pi^2/6
        let target = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let mut last_dist = f64::INFINITY;
        for &rho in &[0.9, 0.99, 0.999] {
            let (_, var_y) = scaled_convergence_report(&drift(rho), 1e-10).unwrap();
            let v = var_y * (1.0 - rho).ln().powi(2);
            let dist = (v - target).abs();
            assert!(dist < last_dist, "rho={rho}");
            last_dist = dist;
        }
    }

    #[test]
    fn frog_config_validation() {
        assert!(FrogConfig::new(vec![], TailRule::Zero, Support::NonnegativeOnly).is_err());
        assert!(FrogConfig::new(vec![0, 0], TailRule::Zero, Support::NonnegativeOnly).is_err());
        assert!(FrogConfig::new(vec![], TailRule::Constant(0), Support::NonnegativeOnly).is_err());
        assert!(FrogConfig::new(vec![], TailRule::Arithmetic { a: 0, b: 1 }, Support::NonnegativeOnly).is_err());
        assert!(FrogConfig::new(vec![], TailRule::Zero, Support::AllOfZ).is_err());
        assert!(FrogConfig::new(vec![2, 1], TailRule::Constant(2), Support::AllOfZ).is_err());
        assert!(FrogConfig::new(vec![2, 2], TailRule::Constant(2), Support::AllOfZ).is_ok());
        assert!(FrogConfig::new(vec![0, 3], TailRule::Zero, Support::NonnegativeOnly).is_ok());
        assert!(FrogConfig::single_frog().is_single_frog());
        assert!(!FrogConfig::constant(2).unwrap().is_single_frog());
    }

    #[test]
    fn frog_config_weighted_sum_closed_forms() {
        let rho: f64 = 0.6;
        let cfg = FrogConfig::arithmetic(1, 1).unwrap();
        let mut direct = 0.0;
        for k in 0..400u32 {
            direct += (1.0 + k as f64) * rho.powi(k as i32);
        }
        assert!((cfg.weighted_sum(rho) - direct).abs() < 1e-10);

        let with_prefix =
            FrogConfig::new(vec![5, 0, 2], TailRule::Constant(3), Support::NonnegativeOnly).unwrap();
        let mut direct2 = 0.0;
        for k in 0..400u64 {
            direct2 += with_prefix.count_at(k) as f64 * rho.powi(k as i32);
        }
        assert!((with_prefix.weighted_sum(rho) - direct2).abs() < 1e-10);

        let mut direct3 = 0.0;
        for k in 3..400u64 {
            direct3 += with_prefix.count_at(k) as f64 * rho.powi(k as i32 + 1);
        }
        assert!((with_prefix.ignored_site_bound(rho, 2) - direct3).abs() < 1e-10);
    }

    #[test]
    fn range_distribution_caches_and_matches() {
        let d = drift(0.5);
        let cfg = FrogConfig::constant(2).unwrap();
        let dist = RangeDistribution::new(d, cfg.clone(), 1e-12).unwrap();
        for x in -1..12 {
            let a = dist.cdf(x).unwrap();
            let b = general_cdf(&d, &cfg, x, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-14);
            assert!(dist.pmf(x).unwrap() >= 0.0);
        }
        // second pass hits the cache
        assert!((dist.cdf(5).unwrap() - general_cdf(&d, &cfg, 5, 1e-12).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn mgf_limit_numerical_form() {
        // exp(g(ln z / Z)) approaches z as the drift vanishes
        for &z in &[0.5f64, 2.0] {
            let mut last = f64::INFINITY;
            for &rho in &[0.9, 0.99, 0.999] {
                let d = drift(rho);
                let t = z.ln() / d.z_rho();
                let v = cgf(&d, t, 1e-13).unwrap().exp();
                let dist = (v - z).abs();
                assert!(dist < last, "z={z} rho={rho}: {dist} >= {last}");
                last = dist;
            }
        }
    }

    #[test]
    fn mean_identity_on_grid() {
        for i in 1..=19 {
            let rho = 0.05 * i as f64;
            let d = drift(rho);
            let k1 = cumulant(&d, 1, 1e-13).unwrap();
            let (mean, _) = mean_variance_closed_form(&d, 1e-13).unwrap();
            assert!((mean - k1).abs() / k1 < 1e-9, "rho={rho}");
        }
    }
}
