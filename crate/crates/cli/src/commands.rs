//! Payload builders for the subcommands.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use frogrange_core::distribution::{
    general_moment, log_general_cdf, mode_bounds, mode_exact, moment, scaled_convergence_report,
    DriftParam, FrogConfig, Support,
};
use frogrange_core::range_bounds::{
    epsilon_log, phi_upper, psi_lower, remark_probabilities, theta_log, DeltaFn,
};
use frogrange_core::simulator::{run_monte_carlo, SimConfig, SimReport};

use crate::cgf_value;
use crate::output::{Cell, Payload, Table};
use crate::CliError;

pub fn dist(drift: &DriftParam, cfg: &FrogConfig, x_max: u64, tol: f64) -> Result<Payload, CliError> {
    let mut rows = Vec::new();
    let mut prev_log_cdf = f64::NEG_INFINITY;
    for x in 0..=x_max {
        let lc = log_general_cdf(drift, cfg, x as i64, tol)?;
        let log_pmf = if x == 0 {
            lc
        } else {
            // ln(e^{lc} - e^{prev}) without cancellation
            lc + (-(prev_log_cdf - lc).exp_m1()).ln()
        };
        rows.push(vec![
            Cell::U(x),
            Cell::F(log_pmf.exp()),
            Cell::F(lc.exp()),
            Cell::F(log_pmf),
            Cell::F(lc),
        ]);
        prev_log_cdf = lc;
    }
    Ok(Payload::Table(Table {
        columns: vec!["x", "pmf", "cdf", "log_pmf", "log_cdf"],
        rows,
    }))
}

pub fn moments(
    drift: &DriftParam,
    cfg: &FrogConfig,
    m_max: u32,
    tol: f64,
) -> Result<Payload, CliError> {
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let report = if cfg.is_single_frog() {
            moment(drift, m, tol)?
        } else {
            general_moment(drift, cfg, m, tol)?
        };
        rows.push(vec![
            Cell::U(m as u64),
            Cell::F(report.exact),
            report.via_bell.map_or(Cell::Empty, Cell::F),
            Cell::F(report.asymptotic),
            Cell::F(report.ratio_exact_over_asymptotic),
        ]);
    }
    Ok(Payload::Table(Table {
        columns: vec!["m", "exact", "via_bell", "asymptotic", "ratio"],
        rows,
    }))
}

pub fn mode(drift: &DriftParam, tol: f64) -> Result<Payload, CliError> {
    let (lo, hi) = mode_bounds(drift);
    let exact = mode_exact(drift, tol)?;
    Ok(Payload::Table(Table {
        columns: vec!["lo", "hi", "exact"],
        rows: vec![vec![Cell::I(lo), Cell::I(hi), Cell::U(exact)]],
    }))
}

#[allow(clippy::too_many_arguments)]
pub struct SweepArgs {
    pub rhos: Vec<f64>,
    pub quantity: String,
    pub eta: FrogConfig,
    pub m: u32,
    pub z: f64,
    pub delta: f64,
    pub n: u64,
    pub alpha: f64,
    pub tol: f64,
}

pub fn sweep(args: &SweepArgs) -> Result<Payload, CliError> {
    let mut rows = Vec::new();
    for &rho in &args.rhos {
        let drift = DriftParam::from_rho(rho).map_err(CliError::from)?;
        let value = sweep_value(&drift, args)?;
        rows.push(vec![
            Cell::F(rho),
            Cell::S(args.quantity.clone()),
            Cell::F(value),
        ]);
    }
    Ok(Payload::Table(Table {
        columns: vec!["rho", "quantity", "value"],
        rows,
    }))
}

fn sweep_value(drift: &DriftParam, args: &SweepArgs) -> Result<f64, CliError> {
    let tol = args.tol;
    match args.quantity.as_str() {
        "mean-ratio" => Ok(moment_ratio(drift, &args.eta, 1, tol)?),
        "moment-ratio" => Ok(moment_ratio(drift, &args.eta, args.m, tol)?),
        "var-y" => Ok(scaled_convergence_report(drift, tol)?.1),
        "mean-y" => Ok(scaled_convergence_report(drift, tol)?.0),
        "mgf-limit" => Ok(cgf_value(drift, args.z, tol)?),
        "p-far" => Ok(remark_probabilities(drift, args.delta)?.p_far),
        "q-near" => Ok(remark_probabilities(drift, args.delta)?.q_near),
        "bound-gap" => {
            let delta_fn = DeltaFn::new(args.alpha).map_err(CliError::from)?;
            let phi = phi_upper(drift, args.n, args.m)?;
            let psi = psi_lower(drift, args.n, args.m, &delta_fn, false)?;
            let pre = psi.log_pre_asymptotic.ok_or_else(|| {
                CliError::Domain("the assembled lower bound is undefined at this drift".into())
            })?;
            Ok(phi.log_pre_asymptotic - pre)
        }
        other => Err(CliError::Usage(format!(
            "unknown sweep quantity '{other}'; expected one of mean-ratio, moment-ratio, \
             var-y, mean-y, mgf-limit, p-far, q-near, bound-gap"
        ))),
    }
}

fn moment_ratio(drift: &DriftParam, cfg: &FrogConfig, m: u32, tol: f64) -> Result<f64, CliError> {
    let report = if cfg.is_single_frog() {
        moment(drift, m, tol)?
    } else {
        general_moment(drift, cfg, m, tol)?
    };
    Ok(report.ratio_exact_over_asymptotic)
}

pub fn simulate(sim: &SimConfig) -> Result<Payload, CliError> {
    let report = run_monte_carlo(sim)?;
    let csv = simulate_table(&report);
    let json = serde_json::to_value(&report).expect("report serialization");
    Ok(Payload::Object { json, csv })
}

fn simulate_table(report: &SimReport) -> Table {
    let mut rows = vec![
        vec![Cell::S("meta".into()), Cell::S("replicas".into()), Cell::U(report.replicas)],
        vec![Cell::S("meta".into()), Cell::S("seed".into()), Cell::U(report.seed)],
    ];
    for (x, count) in &report.empirical_pmf {
        rows.push(vec![Cell::S("pmf".into()), Cell::S(x.to_string()), Cell::U(*count)]);
    }
    for m in &report.moments {
        rows.push(vec![
            Cell::S("moment".into()),
            Cell::S(m.m.to_string()),
            Cell::F(m.estimate),
        ]);
        rows.push(vec![
            Cell::S("moment_se".into()),
            Cell::S(m.m.to_string()),
            Cell::F(m.std_error),
        ]);
    }
    if let Some(waves) = &report.wave_counts {
        for (w, count) in waves {
            rows.push(vec![Cell::S("waves".into()), Cell::S(w.to_string()), Cell::U(*count)]);
        }
    }
    Table {
        columns: vec!["section", "key", "value"],
        rows,
    }
}

pub fn bounds(
    drift: &DriftParam,
    n: u64,
    m: u32,
    alpha: f64,
    extend_delta: bool,
) -> Result<Payload, CliError> {
    let delta_fn = DeltaFn::new(alpha).map_err(CliError::from)?;
    let delta = if extend_delta {
        delta_fn.eval_extended(drift)
    } else {
        delta_fn.eval(drift)?
    };
    let phi = phi_upper(drift, n, m)?;
    let psi = psi_lower(drift, n, m, &delta_fn, extend_delta)?;
    let log_eps = epsilon_log(drift, n)?;
    let log_theta = theta_log(drift, delta, n).ok();

    let mut obj = Map::new();
    obj.insert("delta".into(), json!(delta));
    obj.insert("log_epsilon".into(), json!(log_eps));
    obj.insert("log_theta".into(), opt_json(log_theta));
    obj.insert("log_phi_asym".into(), json!(phi.log_asymptotic));
    obj.insert("log_phi_pre".into(), json!(phi.log_pre_asymptotic));
    obj.insert("log_psi_asym".into(), json!(psi.log_asymptotic));
    obj.insert("log_psi_pre".into(), opt_json(psi.log_pre_asymptotic));

    let csv = Table {
        columns: vec![
            "delta",
            "log_epsilon",
            "log_theta",
            "log_phi_asym",
            "log_phi_pre",
            "log_psi_asym",
            "log_psi_pre",
        ],
        rows: vec![vec![
            Cell::F(delta),
            Cell::F(log_eps),
            log_theta.map_or(Cell::Empty, Cell::F),
            Cell::F(phi.log_asymptotic),
            Cell::F(phi.log_pre_asymptotic),
            Cell::F(psi.log_asymptotic),
            psi.log_pre_asymptotic.map_or(Cell::Empty, Cell::F),
        ]],
    };
    Ok(Payload::Object {
        json: Value::Object(obj),
        csv,
    })
}

fn opt_json(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

/// Shared parameter-map builder.
pub fn params(entries: &[(&str, Value)]) -> BTreeMap<String, Value> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Guard for configurations the closed-form commands accept.
pub fn require_nonneg(cfg: &FrogConfig) -> Result<(), CliError> {
    if cfg.support() != Support::NonnegativeOnly {
        return Err(CliError::Domain(
            "this command needs a nonnegative-support configuration".into(),
        ));
    }
    Ok(())
}
