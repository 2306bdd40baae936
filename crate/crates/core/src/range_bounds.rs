//! Closed-form quantities controlling the range of the configuration
//! supported on all of Z: the zero-range probability epsilon, the
//! block-survival probability theta, geometric moments, the upper/lower
//! moment bounds phi and psi, and the far/near site probabilities.
//!
//! The bounds are asymptotic equivalence classes; both the assembled
//! pre-asymptotic expressions and the closed forms near rho = 1 are exposed,
//! since only the former are comparable against simulation at fixed rho.

use crate::distribution::{power_int, DriftParam};
use crate::error::{domain, Result};
use crate::qseries::{log_q_pochhammer_inf, QParam};

/// Default family delta(rho) = |ln(1-rho)|^{-alpha}, defined for
/// rho > 1 - 1/e where the value lands in (0,1). Below that threshold the
/// asymptotics do not care, so an extension hook assigns a constant 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaFn {
    alpha: f64,
}

/// Smallest drift for which the delta family is defined.
pub const DELTA_DOMAIN_MIN: f64 = 1.0 - std::f64::consts::E.recip();

impl DeltaFn {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(DeltaFn { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// delta(rho) on its native domain rho > 1 - 1/e.
    pub fn eval(&self, drift: &DriftParam) -> Result<f64> {
        let rho = drift.rho();
        if rho <= DELTA_DOMAIN_MIN {
            return Err(domain(format!(
                "delta(rho) is defined for rho > 1 - 1/e ~= {DELTA_DOMAIN_MIN:.6}, got {rho}; \
                 opt into the arbitrary extension for smaller drifts"
            )));
        }
        Ok((-(1.0 - rho).ln()).powf(-self.alpha))
    }

    /// delta(rho) extended arbitrarily below the native domain (the
    /// asymptotics only constrain rho near 1); the extension uses 1/2.
    pub fn eval_extended(&self, drift: &DriftParam) -> f64 {
        self.eval(drift).unwrap_or(0.5)
    }
}

/// `ln epsilon_{rho,n} = n ln (rho;rho)_inf`, the log-probability that the
/// nonnegative frogs never leave the origin's half-line.
pub fn epsilon_log(drift: &DriftParam, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    let rho = drift.rho();
    let q = QParam::new(rho)?;
    Ok(n as f64 * log_q_pochhammer_inf(rho, q, 1e-13)?.log_value)
}

/// Block length used by theta and the near-site probability:
/// `Z_rho (1 - delta)` rounded to the nearest integer, ties up.
pub fn block_length(drift: &DriftParam, delta: f64) -> i64 {
    (drift.z_rho() * (1.0 - delta) + 0.5).floor() as i64
}

/// `ln theta_{rho,delta} = n sum_{j=0}^{K-1} ln(1 - rho^K rho^j)` with
/// `K = round(Z_rho (1-delta))`: the log-probability that a block of
/// frogs on K sites never reaches K below itself.
pub fn theta_log(drift: &DriftParam, delta: f64, n: u64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0,1), got {delta}")));
    }
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    let k = block_length(drift, delta);
    if k < 1 {
        return Err(domain(format!(
            "block length round(Z_rho (1-delta)) = {k} is below 1; theta is undefined"
        )));
    }
    let rho = drift.rho();
    let mut sum = 0.0;
    let mut pw = power_int(rho, k); // rho^K * rho^j
    for _ in 0..k {
        sum += (-pw).ln_1p();
        pw *= rho;
    }
    Ok(n as f64 * sum)
}

/// Exact and asymptotic m-th moment of a geometric variable on {0,1,...}
/// with success parameter epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricMoment {
    /// `sum_{k>=0} k^m (1-eps)^k eps` with certified truncation.
    pub exact: f64,
    /// `m! / eps^m`, the small-epsilon closed form.
    pub asymptotic: f64,
}

pub fn geometric_moment(epsilon: f64, m: u32) -> Result<GeometricMoment> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    if m < 1 {
        return Err(domain("moment order must be >= 1"));
    }
    let q = 1.0 - epsilon;
    let mut sum = 0.0;
    let mut pw = 1.0;
    let mut k = 0u64;
    loop {
        sum += (k as f64).powi(m as i32) * pw * epsilon;
        k += 1;
        pw *= q;
        let growth = q * (m as f64 / (k as f64 + 1.0)).exp();
        if growth < 1.0 {
            let tail = ((k + 1) as f64).powi(m as i32) * pw * epsilon / (1.0 - growth);
            if tail <= 1e-12 * sum.max(1.0) {
                break;
            }
        }
    }
    let mut fact = 1.0;
    for i in 2..=m {
        fact *= f64::from(i);
    }
    Ok(GeometricMoment {
        exact: sum,
        asymptotic: fact / epsilon.powi(m as i32),
    })
}

/// Upper moment bound, in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiUpper {
    /// `m ln Z + (n/2) ln((1-rho)/(2 pi)) + (pi^2/6) m n / (1-rho)`.
    pub log_asymptotic: f64,
    /// Assembled pre-asymptotic bound `ln(epsilon^{-m} Z^m)`.
    pub log_pre_asymptotic: f64,
}

pub fn phi_upper(drift: &DriftParam, n: u64, m: u32) -> Result<PhiUpper> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    let rho = drift.rho();
    let mf = f64::from(m);
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    let log_asymptotic = mf * drift.z_rho().ln()
        + 0.5 * nf * ((1.0 - rho) / (2.0 * pi)).ln()
        + pi * pi / 6.0 * mf * nf / (1.0 - rho);
    let log_pre_asymptotic = mf * (drift.z_rho().ln() - epsilon_log(drift, n)?);
    Ok(PhiUpper {
        log_asymptotic,
        log_pre_asymptotic,
    })
}

/// Lower moment bound, in log form. The pre-asymptotic expression needs the
/// block probability theta, which is undefined when the rounded block length
/// falls below 1; it is then absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiLower {
    /// `ln(m!) + m ln Z + m n / (1-rho)^{delta(rho)}`.
    pub log_asymptotic: f64,
    /// Assembled `ln(m! theta^{-m} Z^m (1-delta)^m)` when the block exists.
    pub log_pre_asymptotic: Option<f64>,
    /// The delta(rho) value used.
    pub delta: f64,
}

pub fn psi_lower(
    drift: &DriftParam,
    n: u64,
    m: u32,
    delta_fn: &DeltaFn,
    extend_delta: bool,
) -> Result<PsiLower> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    if m < 1 {
        return Err(domain("moment order must be >= 1"));
    }
    let delta = if extend_delta {
        delta_fn.eval_extended(drift)
    } else {
        delta_fn.eval(drift)?
    };
    let rho = drift.rho();
    let mf = f64::from(m);
    let mut log_fact = 0.0;
    for i in 2..=m {
        log_fact += f64::from(i).ln();
    }
    let log_asymptotic =
        log_fact + mf * drift.z_rho().ln() + mf * n as f64 / (1.0 - rho).powf(delta);
    let log_pre_asymptotic = theta_log(drift, delta, n)
        .ok()
        .map(|lt| log_fact + mf * (drift.z_rho().ln() - lt + (1.0 - delta).ln()));
    Ok(PsiLower {
        log_asymptotic,
        log_pre_asymptotic,
        delta,
    })
}

/// Probabilities from the concentration heuristic: `p_far` that no frog
/// beyond Z(1+delta) ever reaches the origin, `q_near` that none of the
/// first Z(1-delta) frogs reaches depth Z(1-delta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemarkProbabilities {
    pub p_far: f64,
    pub q_near: f64,
    pub log_p_far: f64,
    pub log_q_near: f64,
}

pub fn remark_probabilities(drift: &DriftParam, delta: f64) -> Result<RemarkProbabilities> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0,1), got {delta}")));
    }
    let rho = drift.rho();
    let q = QParam::new(rho)?;
    // p_far = prod_{j>=1} (1 - (1-rho)^{1+delta} rho^j)
    let far_base = (1.0 - rho).powf(1.0 + delta) * rho;
    let log_p_far = log_q_pochhammer_inf(far_base, q, 1e-13)?.log_value;
    // q_near = prod_{j=0}^{K-1} (1 - (1-rho)^{1-delta} rho^j), K = round(Z(1-delta)), at least 1
    let k = block_length(drift, delta).max(1);
    let near_base = (1.0 - rho).powf(1.0 - delta);
    let mut log_q_near = 0.0;
    let mut pw = near_base;
    for _ in 0..k {
        log_q_near += (-pw).ln_1p();
        pw *= rho;
    }
    Ok(RemarkProbabilities {
        p_far: log_p_far.exp(),
        q_near: log_q_near.exp(),
        log_p_far,
        log_q_near,
    })
}
