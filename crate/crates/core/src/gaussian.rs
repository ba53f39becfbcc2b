//! Binary source seen through additive Gaussian noise plus an additive
//! Gaussian context, `Y = X + N + S`, quantized by a Gaussian test channel
//! `U = Y + V`.
//!
//! Closed forms cover the rate, the Chernoff exponent and the two
//! vanishing-rate limits (context known or unknown at the fusion center).
//! The discretization helpers turn the same model into finite pmfs so that
//! the generic modules can be checked against the closed forms.

use crate::error::{Error, Result};
use crate::prob::{JointSourcePmf, ObservationChannel, TestChannel};

/// Half-width of the discretization window, in standard deviations.
pub const WINDOW_SIGMAS: f64 = 12.0;

fn check_variance(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is not a valid variance")))
    }
}

/// Noise, context and test-channel variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianScenario {
    sigma_n2: f64,
    sigma_s2: f64,
    sigma_v2: f64,
}

impl GaussianScenario {
    pub fn new(sigma_n2: f64, sigma_s2: f64, sigma_v2: f64) -> Result<Self> {
        check_variance("sigma_n2", sigma_n2, false)?;
        check_variance("sigma_s2", sigma_s2, true)?;
        check_variance("sigma_v2", sigma_v2, false)?;
        Ok(Self { sigma_n2, sigma_s2, sigma_v2 })
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    pub fn sigma_s2(&self) -> f64 {
        self.sigma_s2
    }

    pub fn sigma_v2(&self) -> f64 {
        self.sigma_v2
    }
}

/// `I(U; Y | X, S) = ½ ln(1 + σ_N² / σ_V²)`, nats.
pub fn gaussian_rate(s: &GaussianScenario) -> f64 {
    0.5 * (s.sigma_n2 / s.sigma_v2).ln_1p()
}

/// Chernoff information between `N(0, σ_N² + σ_V²)` and `N(1, σ_N² + σ_V²)`,
/// with its maximizer `λ* = ½`.
pub fn gaussian_exponent(s: &GaussianScenario) -> (f64, f64) {
    (1.0 / (8.0 * (s.sigma_n2 + s.sigma_v2)), 0.5)
}

/// Vanishing-rate exponent per rate when the context is known: `1 / (4 σ_N²)`.
pub fn alpha_with_context(sigma_n2: f64) -> Result<f64> {
    check_variance("sigma_n2", sigma_n2, false)?;
    Ok(0.25 / sigma_n2)
}

/// Vanishing-rate exponent per rate when the context acts as extra noise:
/// `1 / (4 (σ_N² + σ_S²))`.
pub fn alpha_without_context(sigma_n2: f64, sigma_s2: f64) -> Result<f64> {
    check_variance("sigma_n2", sigma_n2, false)?;
    check_variance("sigma_s2", sigma_s2, true)?;
    Ok(0.25 / (sigma_n2 + sigma_s2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure2Row {
    pub sigma_n2: f64,
    pub alpha_with: f64,
    pub alpha_without: f64,
}

/// Both limit curves over a grid of noise variances.
pub fn figure2_table(sigma_s2: f64, sigma_n2_grid: &[f64]) -> Result<Vec<Figure2Row>> {
    sigma_n2_grid
        .iter()
        .map(|&sigma_n2| {
            Ok(Figure2Row {
                sigma_n2,
                alpha_with: alpha_with_context(sigma_n2)?,
                alpha_without: alpha_without_context(sigma_n2, sigma_s2)?,
            })
        })
        .collect()
}

// Upper tail Q(z) = P(Z > z), accurate far into both tails.
fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

fn standard_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else {
        upper_tail(-b) - upper_tail(-a)
    }
}

/// Bins `N(mean, variance)` on `[lo, hi)` with width `step` and renormalizes
/// over the window; mass outside the window is dropped.
pub fn discretized_normal(mean: f64, variance: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    check_variance("variance", variance, false)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!(
            "bad discretization window [{lo}, {hi}) with step {step}"
        )));
    }
    let bins = ((hi - lo) / step).round().max(1.0) as usize;
    let sd = variance.sqrt();
    let mut pmf: Vec<f64> = (0..bins)
        .map(|k| {
            let a = (lo + k as f64 * step - mean) / sd;
            let b = (lo + (k + 1) as f64 * step - mean) / sd;
            standard_mass(a, b).max(0.0)
        })
        .collect();
    let total: f64 = pmf.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}) holds no mass of N({mean}, {variance})"
        )));
    }
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(pmf)
}

/// Window covering every mean in `means` by [`WINDOW_SIGMAS`] standard deviations.
pub fn covering_window(means: &[f64], variance: f64) -> (f64, f64) {
    let sd = variance.sqrt();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo - WINDOW_SIGMAS * sd, hi + WINDOW_SIGMAS * sd)
}

/// Uniform binary `X`, a context uniform over `context_levels`, and
/// `Y = X + S + N` binned with width `step` on the covering window.
pub fn discretized_scenario(
    sigma_n2: f64,
    context_levels: &[f64],
    step: f64,
) -> Result<(JointSourcePmf, ObservationChannel)> {
    if context_levels.is_empty() {
        return Err(Error::Domain("at least one context level is needed".into()));
    }
    let s_size = context_levels.len();
    let src = JointSourcePmf::independent(&[0.5, 0.5], &vec![1.0 / s_size as f64; s_size])?;
    let means: Vec<f64> = [0.0, 1.0]
        .iter()
        .flat_map(|x| context_levels.iter().map(move |s| x + s))
        .collect();
    let (lo, hi) = covering_window(&means, sigma_n2);
    let rows = means
        .iter()
        .map(|&m| discretized_normal(m, sigma_n2, lo, hi, step))
        .collect::<Result<Vec<_>>>()?;
    let obs = ObservationChannel::from_rows(2, s_size, rows)?;
    Ok((src, obs))
}

/// Binary quantizer whose probability of `u = 1` rises linearly from 0 at
/// the first observation letter to 1 at the last.
pub fn linear_soft_quantizer(y_size: usize) -> Result<TestChannel> {
    if y_size < 2 {
        return Err(Error::Domain("a linear quantizer needs at least two letters".into()));
    }
    let last = (y_size - 1) as f64;
    TestChannel::new(
        (0..y_size)
            .map(|k| {
                let t = k as f64 / last;
                vec![1.0 - t, t]
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::chernoff_information;

    #[test]
    fn closed_forms() {
        let s = GaussianScenario::new(1.0, 0.0, 1.0).unwrap();
        assert!((gaussian_rate(&s) - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(gaussian_exponent(&s), (0.0625, 0.5));
        let s = GaussianScenario::new(2.0, 0.0, 4.0).unwrap();
        assert!((gaussian_rate(&s) - 0.202733).abs() < 1e-6);
        let s = GaussianScenario::new(1.0, 0.0, 1e-12).unwrap();
        assert!((gaussian_exponent(&s).0 - 0.125).abs() < 1e-12);
    }

    #[test]
    fn rate_vanishes_as_test_noise_grows() {
        let rates: Vec<f64> = [1e3, 1e6, 1e9]
            .iter()
            .map(|&v| gaussian_rate(&GaussianScenario::new(1.0, 0.0, v).unwrap()))
            .collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
        assert!(rates[2] < 1e-9);
    }

    #[test]
    fn scenario_validation() {
        assert!(GaussianScenario::new(0.0, 1.0, 1.0).is_err());
        assert!(GaussianScenario::new(1.0, -1.0, 1.0).is_err());
        assert!(GaussianScenario::new(1.0, 0.0, f64::INFINITY).is_err());
        assert!(alpha_with_context(-1.0).is_err());
        assert!(alpha_without_context(1.0, f64::NAN).is_err());
    }

    #[test]
    fn figure_rows() {
        let rows = figure2_table(1.0, &[0.5, 1.0, 2.0]).unwrap();
        let expected = [(0.5, 0.5, 1.0 / 6.0), (1.0, 0.25, 0.125), (2.0, 0.125, 1.0 / 12.0)];
        for (r, e) in rows.iter().zip(expected) {
            assert_eq!(r.sigma_n2, e.0);
            assert!((r.alpha_with - e.1).abs() < 1e-15);
            assert!((r.alpha_without - e.2).abs() < 1e-15);
        }
        let far = figure2_table(1.0, &[1e6]).unwrap()[0];
        assert!(far.alpha_with - far.alpha_without < 1e-12);
        let same = figure2_table(0.0, &[0.3]).unwrap()[0];
        assert_eq!(same.alpha_with, same.alpha_without);
    }

    #[test]
    fn discretized_chernoff_matches_closed_form() {
        let p0 = discretized_normal(0.0, 2.0, -14.0, 15.0, 0.002).unwrap();
        let p1 = discretized_normal(1.0, 2.0, -14.0, 15.0, 0.002).unwrap();
        let r = chernoff_information(&p0, &p1).unwrap();
        assert!((r.value.to_f64() - 0.0625).abs() < 1e-4);
        assert!((r.lambda_star - 0.5).abs() < 1e-3);
    }

    #[test]
    fn discretized_normal_is_a_pmf() {
        let p = discretized_normal(0.3, 0.5, -10.0, 10.0, 0.01).unwrap();
        assert_eq!(p.len(), 2000);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(discretized_normal(0.0, 1.0, 1.0, 0.0, 0.1).is_err());
        assert!(discretized_normal(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scenario_rows_are_distinct() {
        let (src, obs) = discretized_scenario(1.0, &[0.0, 0.5], 0.05).unwrap();
        assert_eq!((src.x_size(), src.s_size()), (2, 2));
        assert_eq!(obs.y_size(), linear_soft_quantizer(obs.y_size()).unwrap().y_size());
    }
}
