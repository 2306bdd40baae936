//! Parsers for the eta-spec grammar and drift sweeps.
//!
//! Grammar: `const:<n>` | `arith:<a>,<b>` | `prefix:[n0,n1,...];tail:<spec>`
//! where the tail spec is `zero`, `const:<n>` or `arith:<a>,<b>`.

use frogrange_core::distribution::{FrogConfig, Support, TailRule};

use crate::CliError;

pub fn parse_eta(spec: &str, support: Support) -> Result<FrogConfig, CliError> {
    let (prefix, tail_text) = if let Some(rest) = spec.strip_prefix("prefix:") {
        let open = rest
            .strip_prefix('[')
            .ok_or_else(|| usage(spec, "expected '[' after 'prefix:'"))?;
        let close = open
            .find(']')
            .ok_or_else(|| usage(spec, "missing ']' closing the prefix list"))?;
        let list = &open[..close];
        let mut prefix = Vec::new();
        if !list.trim().is_empty() {
            for tok in list.split(',') {
                let n: u64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| usage(spec, &format!("'{}' is not a site count", tok.trim())))?;
                prefix.push(n);
            }
        }
        let after = &open[close + 1..];
        let tail = after
            .strip_prefix(";tail:")
            .ok_or_else(|| usage(spec, "expected ';tail:<spec>' after the prefix list"))?;
        (prefix, tail)
    } else {
        (Vec::new(), spec)
    };
    let tail = parse_tail(spec, tail_text)?;
    FrogConfig::new(prefix, tail, support).map_err(CliError::from)
}

fn parse_tail(whole: &str, text: &str) -> Result<TailRule, CliError> {
    if text == "zero" {
        return Ok(TailRule::Zero);
    }
    if let Some(n) = text.strip_prefix("const:") {
        let n: u64 = n
            .parse()
            .map_err(|_| usage(whole, &format!("'{n}' is not a frog count")))?;
        return Ok(TailRule::Constant(n));
    }
    if let Some(ab) = text.strip_prefix("arith:") {
        let mut parts = ab.splitn(2, ',');
        let a_tok = parts.next().unwrap_or("");
        let b_tok = parts
            .next()
            .ok_or_else(|| usage(whole, "arith needs two comma-separated values"))?;
        let a: u64 = a_tok
            .parse()
            .map_err(|_| usage(whole, &format!("'{a_tok}' is not a valid arith offset")))?;
        let b: u64 = b_tok
            .parse()
            .map_err(|_| usage(whole, &format!("'{b_tok}' is not a valid arith slope")))?;
        return Ok(TailRule::Arithmetic { a, b });
    }
    Err(usage(whole, &format!("'{text}' is not a tail spec")))
}

fn usage(spec: &str, detail: &str) -> CliError {
    CliError::Usage(format!("cannot parse eta spec '{spec}': {detail}"))
}

/// Comma-separated drift list, each value validated into (0,1).
pub fn parse_rho_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| CliError::Usage(format!("'{tok}' is not a drift value")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Usage("the drift list is empty".into()));
    }
    Ok(out)
}

/// Geometric drift sweep `start,factor,count`: the gap to 1 shrinks by
/// `factor` at each step, e.g. `0.9,0.1,3` gives 0.9, 0.99, 0.999.
pub fn parse_rho_geom(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(
            "geometric drift spec must be 'start,factor,count'".into(),
        ));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("'{}' is not a drift value", parts[0])))?;
    let factor: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("'{}' is not a factor", parts[1])))?;
    let count: u32 = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("'{}' is not a count", parts[2])))?;
    if count == 0 {
        return Err(CliError::Usage("the drift list is empty".into()));
    }
    if !(factor > 0.0 && factor < 1.0) {
        return Err(CliError::Usage("the factor must lie in (0,1)".into()));
    }
    let mut out = Vec::new();
    let mut gap = 1.0 - start;
    for _ in 0..count {
        out.push(1.0 - gap);
        gap *= factor;
    }
    Ok(out)
}
