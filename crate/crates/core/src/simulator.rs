//! Monte-Carlo check of the error exponent.
//!
//! Each trial draws `(x, s)`, lets `L` sensors observe and quantize
//! independently, and has the fusion center pick the MAP estimate of `x`
//! given `s` and every sensor's output. Sensors are split into groups by
//! largest-remainder apportionment of `L · w_j`.
//!
//! Randomness for trial `t` at sensor count `L` comes from a ChaCha8 stream
//! selected by `L` and positioned at `t · 2^32` words, so the draws do not
//! depend on scheduling or on which other `L` values are simulated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::GroupPlan;
use crate::prob::{induced_codeword_channel, JointSourcePmf, ObservationChannel};

/// `L` points with fewer error events are left out of the slope fit.
pub const MIN_ERRORS_FOR_FIT: u64 = 10;

const WORDS_PER_TRIAL_SHIFT: u32 = 32;

/// Inverse-CDF sampler over a fixed pmf.
#[derive(Debug, Clone)]
struct Categorical {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Categorical {
    fn new(pmf: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = pmf.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        Self { cumulative, last_positive }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|c| r < *c)
            .map_or(self.last_positive, |k| k.min(self.last_positive))
    }
}

/// Simulation inputs plus the sampling and likelihood tables derived from them.
#[derive(Debug, Clone)]
pub struct SimConfig {
    src: JointSourcePmf,
    obs: ObservationChannel,
    plan: GroupPlan,
    l_values: Vec<usize>,
    trials: u64,
    seed: u64,
    source_sampler: Categorical,
    observation_samplers: Vec<Categorical>,
    quantizer_samplers: Vec<Vec<Categorical>>,
    log_prior: Vec<f64>,
    // [group][(x * s_size + s) * u_size + u]
    log_likelihood: Vec<Vec<f64>>,
    u_sizes: Vec<usize>,
}

impl SimConfig {
    /// `l_values` may be given in any order; they are simulated in increasing order.
    pub fn new(
        src: JointSourcePmf,
        obs: ObservationChannel,
        plan: GroupPlan,
        mut l_values: Vec<usize>,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if src.x_size() != obs.x_size() || src.s_size() != obs.s_size() {
            return Err(Error::DimensionMismatch(
                "source and observation channel disagree on |X| or |S|".into(),
            ));
        }
        if plan.channels().iter().any(|c| c.y_size() != obs.y_size()) {
            return Err(Error::DimensionMismatch(
                "plan channels do not match the observation alphabet".into(),
            ));
        }
        if trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if l_values.is_empty() || l_values.contains(&0) {
            return Err(Error::Domain("sensor counts must be nonempty and each at least 1".into()));
        }
        l_values.sort_unstable();
        if l_values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate sensor count in {l_values:?}")));
        }

        let (xn, sn) = (src.x_size(), src.s_size());
        let joint: Vec<f64> = src.iter().map(|(_, _, p)| p).collect();
        let source_sampler = Categorical::new(&joint);
        let log_prior = joint.iter().map(|p| p.ln()).collect();
        let mut observation_samplers = Vec::with_capacity(xn * sn);
        for x in 0..xn {
            for s in 0..sn {
                observation_samplers.push(Categorical::new(obs.row(x, s)));
            }
        }
        let quantizer_samplers = plan
            .channels()
            .iter()
            .map(|q| q.rows().iter().map(|r| Categorical::new(r)).collect())
            .collect();
        let mut log_likelihood = Vec::new();
        let mut u_sizes = Vec::new();
        for q in plan.channels() {
            let cw = induced_codeword_channel(&obs, q)?;
            let mut table = Vec::with_capacity(xn * sn * cw.u_size());
            for x in 0..xn {
                for s in 0..sn {
                    table.extend(cw.row(x, s).iter().map(|p| p.ln()));
                }
            }
            log_likelihood.push(table);
            u_sizes.push(cw.u_size());
        }
        Ok(Self {
            src,
            obs,
            plan,
            l_values,
            trials,
            seed,
            source_sampler,
            observation_samplers,
            quantizer_samplers,
            log_prior,
            log_likelihood,
            u_sizes,
        })
    }

    pub fn src(&self) -> &JointSourcePmf {
        &self.src
    }

    pub fn obs(&self) -> &ObservationChannel {
        &self.obs
    }

    pub fn plan(&self) -> &GroupPlan {
        &self.plan
    }

    pub fn l_values(&self) -> &[usize] {
        &self.l_values
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The generator for trial `trial` at sensor count `l`.
    pub fn trial_rng(&self, l: usize, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(l as u64);
        rng.set_word_pos(u128::from(trial) << WORDS_PER_TRIAL_SHIFT);
        rng
    }
}

/// Splits `l` sensors over groups by largest remainder. Ties in the
/// remainder go to the lower group index.
pub fn apportion(l: usize, weights: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * l as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(l.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// Runs one trial with `l` sensors and reports whether the MAP estimate was wrong.
pub fn run_trial<R: Rng>(config: &SimConfig, l: usize, rng: &mut R) -> Result<bool> {
    let sn = config.src.s_size();
    let xn = config.src.x_size();
    let xs = config.source_sampler.sample(rng);
    let (x, s) = (xs / sn, xs % sn);
    let obs_sampler = &config.observation_samplers[xs];

    let group_sizes = apportion(l, config.plan.weights());
    let mut counts: Vec<Vec<u64>> = config.u_sizes.iter().map(|&n| vec![0; n]).collect();
    for (j, &n) in group_sizes.iter().enumerate() {
        let quantizer = &config.quantizer_samplers[j];
        for _ in 0..n {
            let y = obs_sampler.sample(rng);
            let u = quantizer[y].sample(rng);
            counts[j][u] += 1;
        }
    }

    let mut best: Option<(usize, f64)> = None;
    for cand in 0..xn {
        let mut score = config.log_prior[cand * sn + s];
        for (j, c) in counts.iter().enumerate() {
            let u_size = config.u_sizes[j];
            let base = (cand * sn + s) * u_size;
            let table = &config.log_likelihood[j][base..base + u_size];
            for (n, lp) in c.iter().zip(table) {
                if *n > 0 {
                    score += *n as f64 * lp;
                }
            }
        }
        if score > f64::NEG_INFINITY && best.is_none_or(|(_, b)| score > b) {
            best = Some((cand, score));
        }
    }
    let (x_hat, _) = best.ok_or_else(|| {
        Error::Internal(format!(
            "received symbols have zero likelihood under every source value (s = {s})"
        ))
    })?;
    Ok(x_hat != x)
}

/// Error count at one sensor count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LPoint {
    pub l: usize,
    pub errors: u64,
    pub trials: u64,
    pub p_e_hat: f64,
}

/// Per-`L` error counts and the least-squares exponent fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub per_l: Vec<LPoint>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Simulates every configured `L`, without fitting.
pub fn simulate_error_counts(config: &SimConfig) -> Result<Vec<LPoint>> {
    config
        .l_values
        .iter()
        .map(|&l| {
            let errors = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = config.trial_rng(l, t);
                    run_trial(config, l, &mut rng).map(u64::from)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?;
            Ok(LPoint {
                l,
                errors,
                trials: config.trials,
                p_e_hat: errors as f64 / config.trials as f64,
            })
        })
        .collect()
}

/// Fits `-ln p_e_hat ≈ slope · L + intercept` over points with at least
/// [`MIN_ERRORS_FOR_FIT`] errors. The standard error propagates the binomial
/// variance of each point, `Var(-ln p̂) ≈ (1 - p) / errors`.
///
/// Returns `(slope, intercept, slope_stderr)`.
pub fn fit_slope(points: &[LPoint]) -> Result<(f64, f64, f64)> {
    let usable: Vec<&LPoint> = points.iter().filter(|p| p.errors >= MIN_ERRORS_FOR_FIT).collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientErrorEvents(format!(
            "only {} sensor count(s) recorded at least {MIN_ERRORS_FOR_FIT} errors; \
             raise trials or use smaller sensor counts",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mean_l = usable.iter().map(|p| p.l as f64).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| -p.p_e_hat.ln()).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.l as f64 - mean_l).powi(2)).sum();
    let sxy: f64 = usable
        .iter()
        .map(|p| (p.l as f64 - mean_l) * (-p.p_e_hat.ln() - mean_y))
        .sum();
    let slope = sxy / sxx;
    let var: f64 = usable
        .iter()
        .map(|p| (p.l as f64 - mean_l).powi(2) * (1.0 - p.p_e_hat) / p.errors as f64)
        .sum();
    Ok((slope, mean_y - slope * mean_l, var.sqrt() / sxx))
}

/// Simulates every `L` and fits the empirical exponent.
pub fn estimate_exponent(config: &SimConfig) -> Result<SimResult> {
    let per_l = simulate_error_counts(config)?;
    let (fitted_slope, intercept, slope_stderr) = fit_slope(&per_l)?;
    Ok(SimResult { per_l, fitted_slope, intercept, slope_stderr })
}
