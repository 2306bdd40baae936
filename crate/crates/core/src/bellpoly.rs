//! Partial and complete Bell polynomials evaluated numerically, and the
//! cumulant-to-moment transform they induce for exp-composed generating
//! functions.
//!
//! Everything here evaluates by recurrence; moments are only ever needed for
//! small orders, where 64-bit floats are adequate.

use crate::error::{domain, Result};

/// Ordered cumulants kappa^(1), ..., kappa^(M) of a random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector(Vec<f64>);

impl CumulantVector {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(domain("cumulant vector must contain at least one entry"));
        }
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(domain("cumulant vector entries must be finite"));
        }
        Ok(CumulantVector(kappa))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty vectors
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Pascal-triangle binomial coefficients up to row `n`, kept as exact
/// integers so combinatorial weights carry no rounding error.
fn binomial_rows(n: usize) -> Vec<Vec<u128>> {
    let mut rows: Vec<Vec<u128>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1u128; i + 1];
        for j in 1..i {
            row[j] = rows[i - 1][j - 1] + rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Partial Bell polynomial `B_{m,k}(x_1, ..., x_{m-k+1})`, computed by the
/// recurrence `B_{m,k} = sum_{j=1}^{m-k+1} C(m-1, j-1) x_j B_{m-j, k-1}`
/// with `B_{0,0} = 1` and `B_{m,0} = 0` for m > 0.
pub fn partial_bell(m: usize, k: usize, x: &[f64]) -> Result<f64> {
    if m < 1 || k < 1 || k > m {
        return Err(domain(format!("partial_bell requires 1 <= k <= m, got m={m}, k={k}")));
    }
    if x.len() < m - k + 1 {
        return Err(domain(format!(
            "partial_bell needs at least {} arguments, got {}",
            m - k + 1,
            x.len()
        )));
    }
    let binom = binomial_rows(m);
    // table[i][j] = B_{i,j}; only cells with i - j <= m - k feed B_{m,k},
    // which keeps every x index within the m - k + 1 supplied arguments
    let mut table = vec![vec![0.0f64; k + 1]; m + 1];
    table[0][0] = 1.0;
    for i in 1..=m {
        let j_lo = (i + k).saturating_sub(m).max(1);
        for j in j_lo..=k.min(i) {
            let mut acc = 0.0;
            for l in 1..=(i - j + 1) {
                let b = table[i - l][j - 1];
                if b != 0.0 {
                    acc += binom[i - 1][l - 1] as f64 * x[l - 1] * b;
                }
            }
            table[i][j] = acc;
        }
    }
    Ok(table[m][k])
}

/// Complete Bell polynomial `B_m(x_1, ..., x_m) = sum_{k=1}^m B_{m,k}`,
/// computed by the recurrence `B_{i+1} = sum_{j=0}^{i} C(i,j) B_{i-j} x_{j+1}`
/// with `B_0 = 1`. The definitional sum over partial polynomials serves as
/// the test oracle.
pub fn complete_bell(m: usize, x: &[f64]) -> Result<f64> {
    if m < 1 {
        return Err(domain("complete_bell requires m >= 1"));
    }
    if x.len() < m {
        return Err(domain(format!(
            "complete_bell needs at least {m} arguments, got {}",
            x.len()
        )));
    }
    let binom = binomial_rows(m);
    let mut b = vec![0.0f64; m + 1];
    b[0] = 1.0;
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += binom[i][j] as f64 * b[i - j] * x[j];
        }
        b[i + 1] = acc;
    }
    Ok(b[m])
}

/// m-th raw moment from the first m cumulants:
/// `E(X^m) = B_m(kappa^(1), ..., kappa^(m))`.
pub fn moments_from_cumulants(kappa: &CumulantVector, m: usize) -> Result<f64> {
    if m < 1 || m > kappa.len() {
        return Err(domain(format!(
            "moment order must satisfy 1 <= m <= {}, got {m}",
            kappa.len()
        )));
    }
    complete_bell(m, kappa.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Definitional-sum oracle for B_{m,k}: enumerate all nonnegative integer
    /// sequences (k_1,...,k_{m-k+1}) with sum k and weighted sum m, and add
    /// m!/(k_1!...k_r!) * prod (x_i/i!)^{k_i}.
    fn partial_bell_oracle(m: usize, k: usize, x: &[f64]) -> f64 {
        fn factorial(n: usize) -> f64 {
            (1..=n).map(|v| v as f64).product()
        }
        let r = m - k + 1;
        let mut total = 0.0;
        let mut counts = vec![0usize; r];
        fn recurse(
            idx: usize,
            rem_k: usize,
            rem_m: usize,
            counts: &mut Vec<usize>,
            x: &[f64],
            m: usize,
            total: &mut f64,
        ) {
            let r = counts.len();
            if idx == r {
                if rem_k == 0 && rem_m == 0 {
                    let mut term = factorial(m);
                    for (i, &c) in counts.iter().enumerate() {
                        term /= factorial(c);
                        term *= (x[i] / factorial(i + 1)).powi(c as i32);
                    }
                    *total += term;
                }
                return;
            }
            let weight = idx + 1;
            let max_c = rem_k.min(rem_m / weight);
            for c in 0..=max_c {
                counts[idx] = c;
                recurse(idx + 1, rem_k - c, rem_m - c * weight, counts, x, m, total);
            }
            counts[idx] = 0;
        }
        recurse(0, k, m, &mut counts, x, m, &mut total);
        total
    }

    /// Independent Bell-number oracle: count set partitions of {1..m} by
    /// enumerating restricted-growth strings.
    fn bell_number(m: usize) -> u64 {
        fn recurse(pos: usize, max_block: usize, m: usize) -> u64 {
            if pos == m {
                return 1;
            }
            let mut total = 0;
            for block in 0..=max_block {
                let next_max = if block == max_block { max_block + 1 } else { max_block };
                total += recurse(pos + 1, next_max, m);
            }
            total
        }
        recurse(0, 0, m)
    }

    #[test]
    fn partial_bell_small_cases() {
        // B_{m,m} = x_1^m
        assert!((partial_bell(3, 3, &[2.0]).unwrap() - 8.0).abs() < 1e-12);
        // B_{m,1} = x_m
        assert!((partial_bell(3, 1, &[1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        // B_{4,2} at all ones: 3 x_2^2 + 4 x_1 x_3 = 7
        assert!((partial_bell(4, 2, &[1.0, 1.0, 1.0]).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn partial_bell_index_errors() {
        assert!(partial_bell(3, 0, &[1.0; 4]).is_err());
        assert!(partial_bell(3, 4, &[1.0; 4]).is_err());
        assert!(partial_bell(4, 2, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn complete_bell_small_cases() {
        assert!((complete_bell(1, &[5.0]).unwrap() - 5.0).abs() < 1e-12);
        assert!((complete_bell(2, &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((complete_bell(3, &[1.0, 1.0, 1.0]).unwrap() - 5.0).abs() < 1e-12);
        assert!(complete_bell(0, &[]).is_err());
    }

    #[test]
    fn complete_bell_matches_definitional_sum_and_bell_numbers() {
        for m in 1..=10usize {
            let ones = vec![1.0; m];
            let by_recurrence = complete_bell(m, &ones).unwrap();
            let mut by_sum = 0.0;
            for k in 1..=m {
                by_sum += partial_bell_oracle(m, k, &ones);
            }
            let bell = bell_number(m) as f64;
            assert!((by_recurrence - by_sum).abs() / by_sum < 1e-12, "m={m}");
            assert!((by_recurrence - bell).abs() / bell < 1e-12, "m={m}");
        }
    }

    #[test]
    fn recurrence_matches_oracle_on_arbitrary_inputs() {
        let x = [1.7, -0.3, 2.2, 0.9, -1.1, 0.4, 1.05, -2.6];
        for m in 1..=8usize {
            for k in 1..=m {
                let rec = partial_bell(m, k, &x[..(m - k + 1)]).unwrap();
                let ora = partial_bell_oracle(m, k, &x);
                let scale = rec.abs().max(ora.abs()).max(1.0);
                assert!((rec - ora).abs() / scale < 1e-9, "m={m} k={k}: {rec} vs {ora}");
            }
        }
    }

    #[test]
    fn moments_from_cumulants_small_cases() {
        let k1 = CumulantVector::new(vec![3.25]).unwrap();
        assert!((moments_from_cumulants(&k1, 1).unwrap() - 3.25).abs() < 1e-12);

        let k2 = CumulantVector::new(vec![1.5, 0.75]).unwrap();
        // second moment = mean^2 + variance
        assert!((moments_from_cumulants(&k2, 2).unwrap() - (1.5 * 1.5 + 0.75)).abs() < 1e-12);
        assert!(moments_from_cumulants(&k2, 3).is_err());
    }

    #[test]
    fn poisson_style_third_moment() {
        // all cumulants 1 (Poisson with rate 1): third moment is 5;
        // oracle: direct PMF summation of sum k^3 e^{-1} / k!.
        let kappa = CumulantVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let via_bell = moments_from_cumulants(&kappa, 3).unwrap();
        let mut oracle = 0.0;
        let mut pmf = (-1.0f64).exp();
        oracle += 0.0;
        for k in 1..40u32 {
            pmf /= k as f64; // e^{-1} / k!
            oracle += (k as f64).powi(3) * pmf;
        }
        assert!((via_bell - 5.0).abs() < 1e-12);
        assert!((oracle - 5.0).abs() < 1e-9);
    }

    #[test]
    fn cumulant_vector_validation() {
        assert!(CumulantVector::new(vec![]).is_err());
        assert!(CumulantVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(CumulantVector::new(vec![1.0, f64::INFINITY]).is_err());
    }
}
