//! Per-channel statistics: exact binomial error rates, threshold search,
//! information measures and the likelihood-ratio test.

pub mod binomial;
pub mod entropy;
pub mod neyman_pearson;
pub mod threshold;

pub use binomial::{p_false_accept, p_miss, threshold_cut, BinomialTails};
pub use entropy::{binary_entropy, cross_entropy_bernoulli, kl_bernoulli, pll_score};
pub use neyman_pearson::{np_log_ratio, np_statistic, rho_for_gamma};
pub use threshold::{
    channel_profiles, gamma_crit, mean_support, optimal_threshold, ChannelErrorProfile, Direction,
    OptimalThreshold,
};
