//! Error exponents per rate for the CEO problem when the fusion center also
//! observes context information.
//!
//! A hidden source `X` and a context `S` are drawn from a joint law
//! `p(x, s)`. Many sensors observe `X` through a common channel `p(y | x, s)`,
//! quantize their observation with a test channel `p(u | y, j)` chosen by
//! group `j`, and forward the result to a fusion center that knows `S`. The
//! crate evaluates and optimizes the exponent-per-rate
//!
//! ```text
//!   min_{(s, x1, x2)} max_λ E_J[ d_λ(p_{x1,s,J}, p_{x2,s,J}) ]  /  I(U; Y | X, S, J)
//! ```
//!
//! and checks it against Monte-Carlo simulation and a closed-form Gaussian
//! scenario.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`prob`] | pmfs, channels, induced codeword channels, conditional entropy and mutual information |
//! | [`divergence`] | Chernoff divergence, Chernoff information, group-averaged pairwise exponent |
//! | [`lfp`] | dense two-phase simplex, max-min linear fractional programs, brute-force oracle |
//! | [`exponent`] | plan evaluation, group-weight optimization, vanishing-rate sweep |
//! | [`simulator`] | symbolwise quantization with MAP fusion, empirical exponent fit |
//! | [`gaussian`] | closed forms for the additive Gaussian example and its discretization |

pub mod divergence;
pub mod error;
pub mod exponent;
pub mod gaussian;
pub mod lfp;
pub mod prob;
pub mod simulator;

pub use divergence::{
    averaged_pairwise_exponent, chernoff_divergence, chernoff_information, ChernoffResult,
    Divergence,
};
pub use error::{Error, Result};
pub use exponent::{
    evaluate_plan, group_bound, optimize_weights, soften, triples, vanishing_rate_limit,
    ExponentReport, GroupPlan, SoftenedOptimum, Triple,
};
pub use lfp::{brute_force_lfp, feasibility_lp, solve_lfp, LfpInstance, LfpSolution};
pub use prob::{
    conditional_entropy_y_given_xs, conditional_mutual_information, induced_codeword_channel,
    CodewordChannel, JointSourcePmf, ObservationChannel, TestChannel,
};
pub use simulator::{estimate_exponent, run_trial, SimConfig, SimResult};
