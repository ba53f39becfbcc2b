//! Chernoff divergence and Chernoff information.
//!
//! `d_λ(p0, p1) = -ln Σ_z p0(z)^(1-λ) p1(z)^λ`, summed over the common
//! support of `p0` and `p1`. Pairs without common support are infinitely far
//! apart, which is carried explicitly as [`Divergence::Infinite`].
//!
//! `λ ↦ d_λ` is concave (the inner sum is log-convex in `λ`), so its maximum
//! over `[0, 1]` is found with a golden-section search. Near the optimum the
//! two probe values eventually agree to machine precision; from then on the
//! search keeps shrinking by the sign of the analytic derivative at the
//! midpoint of the probes, which is a valid reduction rule for any concave
//! function and keeps `λ*` accurate well below `1e-8`.

use std::fmt;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const LAMBDA_TOLERANCE: f64 = 1e-12;
const PLATEAU: f64 = 1e-12;

/// A nonnegative divergence value that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    /// The value as an `f64`, mapping [`Divergence::Infinite`] to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => f.write_str("infinity"),
        }
    }
}

/// Chernoff information together with its maximizing parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffResult {
    pub value: Divergence,
    pub lambda_star: f64,
}

/// Common-support terms of a pair, stored as `ln p0` and `ln p1 - ln p0`.
#[derive(Debug, Clone)]
struct PairTerms {
    log_p0: Vec<f64>,
    log_ratio: Vec<f64>,
}

impl PairTerms {
    /// `None` when the supports are disjoint.
    fn new(p0: &[f64], p1: &[f64]) -> Result<Option<Self>> {
        if p0.len() != p1.len() {
            return Err(Error::DimensionMismatch(format!(
                "pmfs have lengths {} and {}",
                p0.len(),
                p1.len()
            )));
        }
        let mut log_p0 = Vec::new();
        let mut log_ratio = Vec::new();
        for (k, (&a, &b)) in p0.iter().zip(p1).enumerate() {
            if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "entry {k} is ({a}, {b}); probabilities must be nonnegative and finite"
                )));
            }
            if a > 0.0 && b > 0.0 {
                let la = a.ln();
                log_p0.push(la);
                log_ratio.push(b.ln() - la);
            }
        }
        if log_p0.is_empty() {
            Ok(None)
        } else {
            Ok(Some(Self { log_p0, log_ratio }))
        }
    }

    /// `(G(λ), G'(λ))` with `G(λ) = Σ p0^(1-λ) p1^λ`.
    fn sum_and_slope(&self, lambda: f64) -> (f64, f64) {
        self.log_p0
            .iter()
            .zip(&self.log_ratio)
            .fold((0.0, 0.0), |(g, dg), (&l0, &r)| {
                let t = (l0 + lambda * r).exp();
                (g + t, dg + t * r)
            })
    }

    fn divergence(&self, lambda: f64) -> f64 {
        -self.sum_and_slope(lambda).0.ln()
    }

    fn slope(&self, lambda: f64) -> f64 {
        let (g, dg) = self.sum_and_slope(lambda);
        -dg / g
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} is outside [0, 1]")));
    }
    Ok(())
}

/// Chernoff divergence `d_λ(p0, p1)` in nats.
pub fn chernoff_divergence(p0: &[f64], p1: &[f64], lambda: f64) -> Result<Divergence> {
    check_lambda(lambda)?;
    Ok(match PairTerms::new(p0, p1)? {
        Some(terms) => Divergence::Finite(terms.divergence(lambda).max(0.0)),
        None => Divergence::Infinite,
    })
}

/// Chernoff information `max_λ d_λ(p0, p1)` and its maximizer.
pub fn chernoff_information(p0: &[f64], p1: &[f64]) -> Result<ChernoffResult> {
    averaged_pairwise_exponent(&[(1.0, p0, p1)])
}

/// Maximizes `Σ_j w_j d_λ(p0_j, p1_j)` over a single shared `λ ∈ [0, 1]`.
///
/// Each group is `(weight, p0, p1)`. Weights must form a pmf; groups of zero
/// weight take no part. One positive-weight group with disjoint supports
/// makes the whole exponent infinite.
pub fn averaged_pairwise_exponent(groups: &[(f64, &[f64], &[f64])]) -> Result<ChernoffResult> {
    if groups.is_empty() {
        return Err(Error::DimensionMismatch("no groups to average over".into()));
    }
    let weights: Vec<f64> = groups.iter().map(|g| g.0).collect();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidDistribution(format!(
            "group weights {weights:?} do not form a pmf"
        )));
    }
    let mut terms = Vec::with_capacity(groups.len());
    let mut infinite = false;
    for &(w, p0, p1) in groups {
        match PairTerms::new(p0, p1)? {
            Some(t) if w > 0.0 => terms.push((w, t)),
            Some(_) => {}
            None => infinite |= w > 0.0,
        }
    }
    if infinite {
        return Ok(ChernoffResult { value: Divergence::Infinite, lambda_star: 0.5 });
    }
    let value = |l: f64| terms.iter().map(|(w, t)| w * t.divergence(l)).sum::<f64>();
    let slope = |l: f64| terms.iter().map(|(w, t)| w * t.slope(l)).sum::<f64>();
    let (lambda_star, best) = maximize_concave(value, slope);
    if best < PLATEAU {
        return Ok(ChernoffResult {
            value: Divergence::Finite(best.max(0.0)),
            lambda_star: 0.5,
        });
    }
    Ok(ChernoffResult { value: Divergence::Finite(best), lambda_star })
}

/// Golden-section maximization of a concave function on `[0, 1]`.
fn maximize_concave(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_ITERATIONS {
        if b - a < LAMBDA_TOLERANCE {
            break;
        }
        let resolved = (f1 - f2).abs() > 8.0 * f64::EPSILON * f1.abs().max(f2.abs());
        let go_right = if resolved {
            f2 > f1
        } else {
            let s = df(0.5 * (x1 + x2));
            if s == 0.0 {
                a = x1;
                b = x2;
                x1 = b - INV_PHI * (b - a);
                x2 = a + INV_PHI * (b - a);
                f1 = f(x1);
                f2 = f(x2);
                continue;
            }
            s > 0.0
        };
        if go_right {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for edge in [0.0, 1.0] {
        let v = f(edge);
        if v > best.1 {
            best = (edge, v);
        }
    }
    best
}
