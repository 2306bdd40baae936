//! q-series primitives: q-Pochhammer symbols, q-gamma/q-digamma functions,
//! Euler series, Riemann zeta at integer arguments, and the Euler-function
//! asymptotic near q = 1.
//!
//! All infinite series are evaluated in log space with a certified geometric
//! tail bound; quantities such as `(q;q)_inf^n` for q close to 1 underflow
//! 64-bit floats and are representable only as logs.

use crate::error::{domain, Result};

/// Default truncation tolerance for infinite series.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Base of a q-series, restricted to the open interval (0,1).
///
/// The general definition allows |q| < 1, but the model only ever uses
/// q in (0,1), which keeps every product factor positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("q must lie strictly in (0,1), got {q}")));
        }
        Ok(QParam(q))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// A positive quantity held as its natural log, together with a certified
/// truncation bound. `log_value = -inf` encodes the value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    /// Natural log of the value.
    pub log_value: f64,
    /// Certified bound on the absolute error of `log_value`.
    pub tail_bound: f64,
    /// Number of series terms summed before the tail bound fell below tol.
    pub terms_used: usize,
}

impl SeriesValue {
    pub fn exp(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Finite q-Pochhammer symbol `(a;q)_c = prod_{j=0}^{c-1} (1 - a q^j)`.
///
/// The empty product (c = 0) is 1.
pub fn q_pochhammer_finite(a: f64, q: QParam, c: u64) -> Result<f64> {
    check_a(a)?;
    let q = q.value();
    let mut prod = 1.0;
    let mut aq = a;
    for _ in 0..c {
        prod *= 1.0 - aq;
        aq *= q;
    }
    Ok(prod)
}

/// Log of the infinite q-Pochhammer symbol `(a;q)_inf`, i.e.
/// `sum_{j>=0} ln(1 - a q^j)`, truncated once the geometric tail bound
/// `a q^J / ((1-q)(1 - a q^J))` drops to `tol`.
pub fn log_q_pochhammer_inf(a: f64, q: QParam, tol: f64) -> Result<SeriesValue> {
    check_a(a)?;
    if tol <= 0.0 {
        return Err(domain(format!("tol must be positive, got {tol}")));
    }
    if a == 0.0 {
        return Ok(SeriesValue {
            log_value: 0.0,
            tail_bound: 0.0,
            terms_used: 0,
        });
    }
    let q = q.value();
    let mut sum = 0.0;
    let mut aq = a;
    let mut terms = 0usize;
    loop {
        sum += (-aq).ln_1p();
        aq *= q;
        terms += 1;
        // |sum_{j>=J} ln(1 - a q^j)| <= a q^J / ((1-q)(1 - a q^J))
        let tail = aq / ((1.0 - q) * (1.0 - aq));
        if tail <= tol {
            return Ok(SeriesValue {
                log_value: sum,
                tail_bound: tail,
                terms_used: terms,
            });
        }
    }
}

/// Partial sum of the Euler series for `1/(z;q)_inf`:
/// `sum_{n=0}^{n_terms-1} z^n / (q;q)_n`.
///
/// Serves as an independent oracle against [`log_q_pochhammer_inf`].
pub fn euler_series_inverse(z: f64, q: QParam, n_terms: u64) -> Result<f64> {
    check_a(z)?;
    if n_terms == 0 {
        return Err(domain("n_terms must be at least 1"));
    }
    let q = q.value();
    let mut sum = 1.0; // n = 0 term
    let mut zn = 1.0;
    let mut qn = 1.0;
    let mut denom = 1.0; // (q;q)_n
    for _ in 1..n_terms {
        zn *= z;
        qn *= q;
        denom *= 1.0 - qn;
        sum += zn / denom;
    }
    Ok(sum)
}

/// q-gamma function `Gamma_q(z) = (q;q)_inf / (q^z;q)_inf * (1-q)^{1-z}`,
/// evaluated in log space.
pub fn q_gamma(zz: f64, q: QParam) -> Result<f64> {
    if zz <= 0.0 {
        return Err(domain(format!("q_gamma requires z > 0, got {zz}")));
    }
    let qv = q.value();
    let num = log_q_pochhammer_inf(qv, q, DEFAULT_TOL)?;
    let den = log_q_pochhammer_inf(qv.powf(zz), q, DEFAULT_TOL)?;
    Ok((num.log_value - den.log_value + (1.0 - zz) * (1.0 - qv).ln()).exp())
}

/// q-digamma function
/// `psi_q(z) = -ln(1-q) + ln q * sum_{n>=0} q^{n+z} / (1 - q^{n+z})`,
/// truncated with a certified geometric tail below `tol`.
pub fn q_digamma(zz: f64, q: QParam, tol: f64) -> Result<f64> {
    if zz <= 0.0 {
        return Err(domain(format!("q_digamma requires z > 0, got {zz}")));
    }
    let qv = q.value();
    let ln_q = qv.ln();
    let mut sum = 0.0;
    let mut pw = qv.powf(zz); // q^{n+z}
    loop {
        sum += pw / (1.0 - pw);
        pw *= qv;
        let tail = -ln_q * pw / ((1.0 - qv) * (1.0 - pw));
        if tail <= tol {
            return Ok(-(1.0 - qv).ln() + ln_q * sum);
        }
    }
}

/// Derivative of the q-digamma function in z, via the term-wise
/// differentiated series `ln^2 q * sum_{n>=0} q^{n+z} / (1 - q^{n+z})^2`.
pub fn q_digamma_derivative(zz: f64, q: QParam, tol: f64) -> Result<f64> {
    if zz <= 0.0 {
        return Err(domain(format!(
            "q_digamma_derivative requires z > 0, got {zz}"
        )));
    }
    let qv = q.value();
    let ln_q2 = qv.ln() * qv.ln();
    let mut sum = 0.0;
    let mut pw = qv.powf(zz);
    loop {
        let om = 1.0 - pw;
        sum += pw / (om * om);
        pw *= qv;
        let om_next = 1.0 - pw;
        let tail = ln_q2 * pw / ((1.0 - qv) * om_next * om_next);
        if tail <= tol {
            return Ok(ln_q2 * sum);
        }
    }
}

/// Log of the Euler-function asymptotic near q = 1: with t = -ln q,
/// `(q;q)_inf ~ sqrt(2 pi / t) * exp(-pi^2 / (6 t))`.
pub fn euler_function_log_asymptotic(q: QParam) -> f64 {
    let t = -q.value().ln();
    0.5 * (2.0 * std::f64::consts::PI / t).ln()
        - std::f64::consts::PI * std::f64::consts::PI / (6.0 * t)
}

/// Riemann zeta at an integer argument j >= 2, by direct summation plus an
/// integral-comparison tail correction. The midpoint of the two integral
/// bounds leaves an error below N^{-j}/2, which the term count keeps under
/// 1e-14.
pub fn zeta_int(j: u32) -> Result<f64> {
    if j < 2 {
        return Err(domain(format!("zeta_int requires j >= 2, got {j}")));
    }
    let jf = f64::from(j);
    // N^{-j}/2 <= 1e-15  =>  N >= (5e14)^{1/j}
    let n = (5e14f64).powf(1.0 / jf).ceil() as u64;
    // Sum ascending terms (small k last would lose low bits); descending k
    // adds the small terms first.
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        sum += (k as f64).powi(-(j as i32));
    }
    let nf = n as f64;
    // Midpoint of int_N^inf and int_{N+1}^inf of x^{-j} dx.
    let tail = (nf.powf(1.0 - jf) + (nf + 1.0).powf(1.0 - jf)) / (2.0 * (jf - 1.0));
    Ok(sum + tail)
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) {
        return Err(domain(format!("series argument must lie in [0,1), got {a}")));
    }
    Ok(())
}
