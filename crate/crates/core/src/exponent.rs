//! Exponent per rate of a group plan, and optimization of the group weights.
//!
//! For a plan with weights `w_j` and test channels `q_j`, the numerator is
//! the smallest (over context `s` and source pairs `x1 < x2`) group-averaged
//! Chernoff information, and the denominator is the average per-sensor rate
//! `Σ_j w_j I(U; Y | X, S, J = j)`.
//!
//! Weight optimization alternates two exact half-steps until the ratio stops
//! improving: fix every triple's `λ` at the maximizer for the current
//! weights, then solve the resulting max-min fractional program in the
//! weights. Each half-step can only raise the ratio.

use rayon::prelude::*;

use crate::divergence::{
    averaged_pairwise_exponent, chernoff_divergence, ChernoffResult, Divergence,
};
use crate::error::{Error, Result};
use crate::lfp::{solve_lfp, LfpInstance, ZERO_WEIGHT};
use crate::prob::{
    conditional_mutual_information, induced_codeword_channel, CodewordChannel, JointSourcePmf,
    ObservationChannel, TestChannel,
};

/// Rates at or below this are treated as zero.
pub const RATE_FLOOR: f64 = 1e-15;

/// Constant added to every denominator of the weight program so that it is
/// well posed; shifts the ratio by less than `1e-9` relative for rates above `1e-3`.
pub const DENOMINATOR_REGULARIZER: f64 = 1e-12;

/// Stand-in for an infinite pairwise divergence inside the weight program.
pub const INFINITE_DIVERGENCE_SURROGATE: f64 = 1e6;

const MAX_ALTERNATIONS: usize = 50;
const MIN_IMPROVEMENT: f64 = 1e-8;
const LFP_RELATIVE_TOLERANCE: f64 = 1e-11;

/// A hypothesis pair `x1 < x2` under context `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub s: usize,
    pub x1: usize,
    pub x2: usize,
}

/// All triples in lexicographic `(s, x1, x2)` order.
pub fn triples(x_size: usize, s_size: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for s in 0..s_size {
        for x1 in 0..x_size {
            for x2 in x1 + 1..x_size {
                out.push(Triple { s, x1, x2 });
            }
        }
    }
    out
}

/// Number of groups that always suffices: `C(|X|, 2) · |S|`.
pub fn group_bound(x_size: usize, s_size: usize) -> usize {
    x_size * x_size.saturating_sub(1) / 2 * s_size
}

/// Group weights `p_J` with one test channel per group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlan {
    weights: Vec<f64>,
    channels: Vec<TestChannel>,
}

impl GroupPlan {
    pub fn new(weights: Vec<f64>, channels: Vec<TestChannel>) -> Result<Self> {
        if weights.is_empty() || weights.len() != channels.len() {
            return Err(Error::DimensionMismatch(format!(
                "plan has {} weights for {} channels",
                weights.len(),
                channels.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidDistribution(format!(
                "group weights {weights:?} do not form a pmf"
            )));
        }
        let y_size = channels[0].y_size();
        if channels.iter().any(|c| c.y_size() != y_size) {
            return Err(Error::DimensionMismatch(
                "group channels disagree on the observation alphabet".into(),
            ));
        }
        Ok(Self { weights, channels })
    }

    /// One group using `channel`.
    pub fn single(channel: TestChannel) -> Self {
        Self { weights: vec![1.0], channels: vec![channel] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn channels(&self) -> &[TestChannel] {
        &self.channels
    }

    pub fn group_count(&self) -> usize {
        self.weights.len()
    }
}

/// Numerator, denominator and ratio of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentReport {
    /// Worst-triple averaged Chernoff information, nats (`+inf` if every pair is perfectly separated).
    pub numerator: f64,
    /// Average per-sensor rate, nats.
    pub denominator: f64,
    /// `numerator / denominator`.
    pub ratio: f64,
    pub worst_triple: Triple,
    pub lambda_star: f64,
}

#[derive(Debug, Clone)]
struct GroupStats {
    codeword: CodewordChannel,
    rate: f64,
}

fn group_stats(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
    channels: &[TestChannel],
) -> Result<Vec<GroupStats>> {
    channels
        .par_iter()
        .map(|c| {
            Ok(GroupStats {
                codeword: induced_codeword_channel(obs, c)?,
                rate: conditional_mutual_information(src, obs, c)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Assessment {
    report: ExponentReport,
    lambdas: Vec<f64>,
}

fn assess(triples: &[Triple], groups: &[(f64, &GroupStats)]) -> Result<Assessment> {
    let denominator: f64 = groups.iter().map(|(w, g)| w * g.rate).sum();
    if denominator <= RATE_FLOOR {
        return Err(Error::DegeneratePlan(format!(
            "average rate {denominator} is zero, so the exponent per rate is undefined"
        )));
    }
    let per_triple = triples
        .par_iter()
        .map(|t| {
            let pairs: Vec<(f64, &[f64], &[f64])> = groups
                .iter()
                .map(|(w, g)| (*w, g.codeword.row(t.x1, t.s), g.codeword.row(t.x2, t.s)))
                .collect();
            averaged_pairwise_exponent(&pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let (k, worst) = per_triple
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, ChernoffResult)>, (k, r)| match best {
            Some((_, b)) if r.value.to_f64() >= b.value.to_f64() => best,
            _ => Some((k, *r)),
        })
        .ok_or_else(|| Error::DimensionMismatch("no hypothesis pairs to compare".into()))?;
    let numerator = worst.value.to_f64();
    Ok(Assessment {
        report: ExponentReport {
            numerator,
            denominator,
            ratio: numerator / denominator,
            worst_triple: triples[k],
            lambda_star: worst.lambda_star,
        },
        lambdas: per_triple.iter().map(|r| r.lambda_star).collect(),
    })
}

fn check_dims(src: &JointSourcePmf, obs: &ObservationChannel) -> Result<()> {
    if src.x_size() != obs.x_size() || src.s_size() != obs.s_size() {
        return Err(Error::DimensionMismatch(format!(
            "source is {}x{} but observation channel expects {}x{}",
            src.x_size(),
            src.s_size(),
            obs.x_size(),
            obs.s_size()
        )));
    }
    Ok(())
}

/// Evaluates the exponent per rate of a fixed plan.
pub fn evaluate_plan(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
    plan: &GroupPlan,
) -> Result<ExponentReport> {
    check_dims(src, obs)?;
    let stats = group_stats(src, obs, &plan.channels)?;
    let groups: Vec<(f64, &GroupStats)> = plan.weights.iter().copied().zip(&stats).collect();
    Ok(assess(&triples(src.x_size(), src.s_size()), &groups)?.report)
}

/// Optimizes group weights over a dictionary of test channels.
///
/// Channels with zero rate are dropped. The returned plan keeps only
/// dictionary entries with weight above [`ZERO_WEIGHT`].
pub fn optimize_weights(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
    dictionary: &[TestChannel],
) -> Result<(GroupPlan, ExponentReport)> {
    check_dims(src, obs)?;
    if dictionary.is_empty() {
        return Err(Error::UninformativeDictionary("the dictionary is empty".into()));
    }
    let all_stats = group_stats(src, obs, dictionary)?;
    let eligible: Vec<usize> = (0..dictionary.len())
        .filter(|&j| all_stats[j].rate > RATE_FLOOR)
        .collect();
    if eligible.is_empty() {
        return Err(Error::UninformativeDictionary(
            "every dictionary channel has zero rate".into(),
        ));
    }
    let stats: Vec<&GroupStats> = eligible.iter().map(|&j| &all_stats[j]).collect();
    let triples = triples(src.x_size(), src.s_size());

    for t in &triples {
        let separated = stats.iter().any(|g| {
            let p0 = g.codeword.row(t.x1, t.s);
            let p1 = g.codeword.row(t.x2, t.s);
            p0.iter().zip(p1).any(|(a, b)| (a - b).abs() > 0.0)
        });
        if !separated {
            return Err(Error::UninformativeDictionary(format!(
                "no dictionary channel separates x={} from x={} under s={}",
                t.x1, t.x2, t.s
            )));
        }
    }

    let uniform = vec![1.0 / stats.len() as f64; stats.len()];
    let mut starts = vec![uniform];
    let mut best_single: Option<(usize, f64)> = None;
    for (k, g) in stats.iter().enumerate() {
        let r = assess(&triples, &[(1.0, *g)])?.report.ratio;
        if best_single.is_none_or(|(_, b)| r > b) {
            best_single = Some((k, r));
        }
    }
    if let Some((k, _)) = best_single {
        let mut w = vec![0.0; stats.len()];
        w[k] = 1.0;
        starts.push(w);
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (w, ratio) = alternate(&triples, &stats, start)?;
        if best.as_ref().is_none_or(|(_, r)| ratio > *r) {
            best = Some((w, ratio));
        }
    }
    let (weights, _) = best.expect("at least one start");

    let kept: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > ZERO_WEIGHT).collect();
    let total: f64 = kept.iter().map(|&k| weights[k]).sum();
    let plan = GroupPlan::new(
        kept.iter().map(|&k| weights[k] / total).collect(),
        kept.iter().map(|&k| dictionary[eligible[k]].clone()).collect(),
    )?;
    let report = evaluate_plan(src, obs, &plan)?;
    Ok((plan, report))
}

fn alternate<'a>(
    triples: &[Triple],
    stats: &[&'a GroupStats],
    start: Vec<f64>,
) -> Result<(Vec<f64>, f64)> {
    let weighted = |w: &[f64]| -> Vec<(f64, &'a GroupStats)> {
        w.iter().copied().zip(stats.iter().copied()).collect()
    };
    let mut weights = start;
    let mut current = assess(triples, &weighted(&weights))?;
    for _ in 0..MAX_ALTERNATIONS {
        if current.report.ratio.is_infinite() {
            break;
        }
        let a = triples
            .iter()
            .zip(&current.lambdas)
            .map(|(t, &lambda)| {
                stats
                    .iter()
                    .map(|g| {
                        let d = chernoff_divergence(
                            g.codeword.row(t.x1, t.s),
                            g.codeword.row(t.x2, t.s),
                            lambda,
                        )?;
                        Ok(match d {
                            Divergence::Finite(v) => v,
                            Divergence::Infinite => INFINITE_DIVERGENCE_SURROGATE,
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let rates: Vec<f64> = stats.iter().map(|g| g.rate).collect();
        let b = vec![rates; triples.len()];
        let inst = LfpInstance::new(a, b, 0.0, DENOMINATOR_REGULARIZER)?;
        let tol = LFP_RELATIVE_TOLERANCE * current.report.ratio.max(1.0);
        let solution = solve_lfp(&inst, tol)?;
        let next = assess(triples, &weighted(&solution.weights))?;
        let gain = next.report.ratio - current.report.ratio;
        if gain > 0.0 {
            weights = solution.weights;
            current = next;
        }
        if gain < MIN_IMPROVEMENT {
            break;
        }
    }
    Ok((weights, current.report.ratio))
}

/// Mixes a test channel toward its column-averaged output law:
/// `q_τ(u|y) = (1 - τ) κ(u) + τ q(u|y)` with `κ(u) = mean_y q(u|y)`.
pub fn soften(channel: &TestChannel, tau: f64) -> Result<TestChannel> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("tau = {tau} is outside (0, 1]")));
    }
    let y_size = channel.y_size() as f64;
    let kappa: Vec<f64> = (0..channel.u_size())
        .map(|u| channel.rows().iter().map(|r| r[u]).sum::<f64>() / y_size)
        .collect();
    TestChannel::new(
        channel
            .rows()
            .iter()
            .map(|r| r.iter().zip(&kappa).map(|(q, k)| (1.0 - tau) * k + tau * q).collect())
            .collect(),
    )
}

/// The optimized plan for one softening level.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftenedOptimum {
    pub tau: f64,
    pub plan: GroupPlan,
    pub report: ExponentReport,
}

/// Re-optimizes the weights of a softened dictionary for each `τ` of a
/// strictly decreasing sequence in `(0, 1]`, tracing the ratio toward the
/// vanishing-rate regime.
pub fn vanishing_rate_limit(
    src: &JointSourcePmf,
    obs: &ObservationChannel,
    base_dictionary: &[TestChannel],
    tau_sequence: &[f64],
) -> Result<Vec<SoftenedOptimum>> {
    if let Some(t) = tau_sequence.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::Domain(format!("tau = {t} is outside (0, 1]")));
    }
    if tau_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(format!(
            "tau sequence {tau_sequence:?} must be strictly decreasing"
        )));
    }
    tau_sequence
        .iter()
        .map(|&tau| {
            let softened = base_dictionary
                .iter()
                .map(|q| soften(q, tau))
                .collect::<Result<Vec<_>>>()?;
            let (plan, report) = optimize_weights(src, obs, &softened)?;
            Ok(SoftenedOptimum { tau, plan, report })
        })
        .collect()
}
