//! Exact Monte Carlo samplers for the range minimum, the wave construction
//! for configurations supported on all of Z, and a literal discrete-time
//! stepper used only for validation.
//!
//! The core sampler bypasses time dynamics: every frog on the nonnegative
//! half-line is woken with probability one, and a single active frog's
//! lifetime reach k sites below its start has probability rho^k. One draw
//! per frog therefore samples the exact law, up to a declared
//! total-variation budget for ignoring far-right frogs.
//!
//! Replica i draws from its own counter-derived substream of the seed, so
//! serial and parallel execution produce bit-identical reports.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{DriftParam, FrogConfig, Support, TailRule};
use crate::error::{config as config_err, domain, Error, Result};

/// Replica-level cap on the number of waves; exceeding it raises a
/// diagnostic error rather than silently truncating the avalanche.
pub const WAVE_CAP: u64 = 1_000_000;

/// Everything one Monte Carlo run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    drift: DriftParam,
    config: FrogConfig,
    replicas: u64,
    seed: u64,
    site_truncation_tol: f64,
    horizon: Option<u64>,
}

impl SimConfig {
    pub fn new(
        drift: DriftParam,
        config: FrogConfig,
        replicas: u64,
        seed: u64,
        site_truncation_tol: f64,
        horizon: Option<u64>,
    ) -> Result<Self> {
        if replicas < 1 {
            return Err(config_err("replica count must be at least 1"));
        }
        if !(site_truncation_tol > 0.0 && site_truncation_tol <= 0.01) {
            return Err(config_err(format!(
                "site truncation tolerance must lie in (0, 0.01], got {site_truncation_tol}"
            )));
        }
        if horizon.is_some() && config.support() == Support::AllOfZ {
            return Err(config_err("the horizon stepper only supports nonnegative configurations"));
        }
        Ok(SimConfig {
            drift,
            config,
            replicas,
            seed,
            site_truncation_tol,
            horizon,
        })
    }

    pub fn drift(&self) -> &DriftParam {
        &self.drift
    }

    pub fn frog_config(&self) -> &FrogConfig {
        &self.config
    }

    pub fn replicas(&self) -> u64 {
        self.replicas
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn site_truncation_tol(&self) -> f64 {
        self.site_truncation_tol
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }
}

/// One moment estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub m: u32,
    pub estimate: f64,
    pub std_error: f64,
}

/// Aggregated result of a Monte Carlo run. Identical (seed, SimConfig)
/// pairs produce identical reports, regardless of thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub replicas: u64,
    pub seed: u64,
    pub empirical_pmf: BTreeMap<u64, u64>,
    pub moments: Vec<MomentEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave_counts: Option<BTreeMap<u64, u64>>,
}

impl SimReport {
    /// Empirical frequency of the value x.
    pub fn frequency(&self, x: u64) -> f64 {
        *self.empirical_pmf.get(&x).unwrap_or(&0) as f64 / self.replicas as f64
    }

    pub fn mean(&self) -> f64 {
        self.moments[0].estimate
    }
}

/// Deterministic per-replica substream: the same base seed with the
/// replica index as the stream counter.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Lifetime leftward reach of one active frog below its start:
/// P(D >= k) = rho^k, sampled as floor(ln U / ln rho) for U uniform on (0,1].
pub fn sample_min_displacement<R: Rng + ?Sized>(drift: &DriftParam, rng: &mut R) -> u64 {
    let u = 1.0 - rng.gen::<f64>();
    (u.ln() / drift.ln_rho()).floor() as u64
}

/// Rightmost site whose frogs are still drawn: ignoring everything beyond
/// changes the sampled law by total variation at most the configured budget
/// (bound: sum_{x > X} eta_x rho^{x+1}).
fn site_cutoff(drift: &DriftParam, cfg: &FrogConfig, tol: f64) -> i64 {
    let rho = drift.rho();
    let mut x = 0i64;
    while cfg.ignored_site_bound(rho, x) > tol {
        x += 1;
    }
    x
}

/// Range minimum for a nonnegative-support configuration: one displacement
/// draw per frog, sites ascending, frogs within a site in order.
pub fn sample_range_nonneg<R: Rng + ?Sized>(sim: &SimConfig, rng: &mut R) -> Result<u64> {
    if sim.config.support() != Support::NonnegativeOnly {
        return Err(domain("sampler requires a nonnegative-support configuration"));
    }
    let x_max = site_cutoff(&sim.drift, &sim.config, sim.site_truncation_tol);
    Ok(draw_first_wave(&sim.drift, &sim.config, x_max, rng))
}

fn draw_first_wave<R: Rng + ?Sized>(
    drift: &DriftParam,
    cfg: &FrogConfig,
    x_max: i64,
    rng: &mut R,
) -> u64 {
    let mut best = 0i64;
    for x in 0..=x_max {
        for _ in 0..cfg.count_at(x as u64) {
            let d = sample_min_displacement(drift, rng) as i64;
            if d - x > best {
                best = d - x;
            }
        }
    }
    best as u64
}

/// Avalanche sampler for a configuration with n frogs on every site of Z.
/// Wave 1 is the nonnegative half-line; whenever the running minimum drops
/// below the activated region, the freshly exposed sites wake and draw.
/// Returns the final depth and the number of waves.
pub fn sample_range_allz<R: Rng + ?Sized>(sim: &SimConfig, rng: &mut R) -> Result<(u64, u64)> {
    let n = match (sim.config.support(), sim.config.tail()) {
        (Support::AllOfZ, TailRule::Constant(n)) => n,
        _ => return Err(domain("avalanche sampler requires constant support on all of Z")),
    };
    let x_max = site_cutoff(&sim.drift, &sim.config, sim.site_truncation_tol);
    let mut depth = draw_first_wave(&sim.drift, &sim.config, x_max, rng) as i64;
    let mut waves = 1u64;
    let mut activated = 0i64; // negative sites -1..=-activated already woken
    while depth > activated {
        if waves >= WAVE_CAP {
            return Err(Error::Diagnostic(format!(
                "replica exceeded the {WAVE_CAP}-wave cap at rho={}, n={n}; \
                 the avalanche did not terminate within the cap",
                sim.drift.rho()
            )));
        }
        waves += 1;
        let newly_exposed = (activated + 1)..=depth;
        activated = depth;
        for s in newly_exposed {
            for _ in 0..n {
                let d = sample_min_displacement(&sim.drift, rng) as i64;
                if s + d > depth {
                    depth = s + d;
                }
            }
        }
    }
    Ok((depth as u64, waves))
}

/// Literal discrete-time dynamics over a finite window, for validation
/// only: activation on visit, simultaneous independent steps, `horizon`
/// steps. Underestimates the true range; the bias vanishes as the horizon
/// grows.
pub fn bounded_horizon_stepper<R: Rng + ?Sized>(sim: &SimConfig, rng: &mut R) -> Result<u64> {
    let horizon = sim
        .horizon
        .ok_or_else(|| config_err("the stepper requires a horizon"))?;
    if sim.config.support() != Support::NonnegativeOnly {
        return Err(domain("the stepper requires a nonnegative-support configuration"));
    }
    if sim.config.count_at(0) == 0 {
        return Err(config_err(
            "the stepper needs at least one active frog at the origin to start the dynamics",
        ));
    }
    let x_max = site_cutoff(&sim.drift, &sim.config, sim.site_truncation_tol);
    let window_left = -(64 + 16 * sim.drift.z_rho().ceil() as i64);
    let p = sim.drift.p();

    let mut sleeping: Vec<u64> = (0..=x_max as u64).map(|x| sim.config.count_at(x)).collect();
    let mut active: Vec<i64> = Vec::new();
    for _ in 0..sleeping[0] {
        active.push(0);
    }
    sleeping[0] = 0;
    let mut min_visited = 0i64;

    for _ in 0..horizon {
        let mut woken: Vec<i64> = Vec::new();
        for pos in active.iter_mut() {
            *pos += if rng.gen::<f64>() < p { 1 } else { -1 };
            if *pos < min_visited {
                min_visited = *pos;
                if *pos < window_left {
                    return Err(Error::Diagnostic(format!(
                        "frog left the simulation window at site {pos} (window floor {window_left})"
                    )));
                }
            }
            if *pos >= 0 && *pos <= x_max {
                let idx = *pos as usize;
                if sleeping[idx] > 0 {
                    woken.push(*pos);
                }
            }
        }
        // frogs woken this step start walking next step
        for site in woken {
            let idx = site as usize;
            for _ in 0..sleeping[idx] {
                active.push(site);
            }
            sleeping[idx] = 0;
        }
    }
    Ok((-min_visited) as u64)
}

#[derive(Debug, Clone, Copy)]
struct ReplicaOutcome {
    x: u64,
    waves: Option<u64>,
}

fn run_replica(sim: &SimConfig, index: u64) -> Result<ReplicaOutcome> {
    let mut rng = replica_rng(sim.seed, index);
    if sim.horizon.is_some() {
        let x = bounded_horizon_stepper(sim, &mut rng)?;
        return Ok(ReplicaOutcome { x, waves: None });
    }
    match sim.config.support() {
        Support::NonnegativeOnly => Ok(ReplicaOutcome {
            x: sample_range_nonneg(sim, &mut rng)?,
            waves: None,
        }),
        Support::AllOfZ => {
            let (x, waves) = sample_range_allz(sim, &mut rng)?;
            Ok(ReplicaOutcome {
                x,
                waves: Some(waves),
            })
        }
    }
}

#[cfg(feature = "parallel")]
fn execute_replicas(sim: &SimConfig) -> Result<Vec<ReplicaOutcome>> {
    use rayon::prelude::*;
    (0..sim.replicas)
        .into_par_iter()
        .map(|i| run_replica(sim, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn execute_replicas(sim: &SimConfig) -> Result<Vec<ReplicaOutcome>> {
    (0..sim.replicas).map(|i| run_replica(sim, i)).collect()
}

/// Runs all replicas (in parallel when the `parallel` feature is on) and
/// aggregates. Aggregation folds the replica-indexed outcomes in a fixed
/// order, so the report does not depend on the thread count.
pub fn run_monte_carlo(sim: &SimConfig) -> Result<SimReport> {
    aggregate(sim, execute_replicas(sim)?)
}

/// Sequential twin of [`run_monte_carlo`]; produces the identical report.
pub fn run_monte_carlo_serial(sim: &SimConfig) -> Result<SimReport> {
    let outcomes: Result<Vec<ReplicaOutcome>> =
        (0..sim.replicas).map(|i| run_replica(sim, i)).collect();
    aggregate(sim, outcomes?)
}

fn aggregate(sim: &SimConfig, outcomes: Vec<ReplicaOutcome>) -> Result<SimReport> {
    let n = outcomes.len() as f64;
    let mut pmf: BTreeMap<u64, u64> = BTreeMap::new();
    let mut waves: BTreeMap<u64, u64> = BTreeMap::new();
    let mut has_waves = false;
    let mut sums = [0.0f64; 8]; // x^1..x^4 and x^2..x^8 for the errors
    for o in &outcomes {
        *pmf.entry(o.x).or_insert(0) += 1;
        if let Some(w) = o.waves {
            has_waves = true;
            *waves.entry(w).or_insert(0) += 1;
        }
        let xf = o.x as f64;
        for m in 1..=4usize {
            let v = xf.powi(m as i32);
            sums[m - 1] += v;
            sums[m + 3] += v * v;
        }
    }
    let moments = (1..=4u32)
        .map(|m| {
            let mean = sums[m as usize - 1] / n;
            let mean_sq = sums[m as usize + 3] / n;
            let var = if outcomes.len() > 1 {
                ((mean_sq - mean * mean) * n / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            MomentEstimate {
                m,
                estimate: mean,
                std_error: (var / n).sqrt(),
            }
        })
        .collect();
    Ok(SimReport {
        replicas: sim.replicas,
        seed: sim.seed,
        empirical_pmf: pmf,
        moments,
        wave_counts: if has_waves { Some(waves) } else { None },
    })
}
