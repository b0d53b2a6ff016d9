//! Closed-form predictions for Haar-random codes under depolarizing noise.

pub mod bands;
pub mod entropy;
pub mod enumerators;
pub mod leading;
pub mod mp;

pub use bands::{
    band_model_cdf, band_model_density, band_model_support, critical_weight, mean_shift_bands,
    zeroth_order_bands, BandModel, BandRecord, Reservoir,
};
pub use entropy::{p_alpha, shannon_entropy, threshold_solve, w_star, w_star_fraction, ThresholdKind};
pub use enumerators::{
    macwilliams_check, postselect_failure, renyi2_from_enumerators, u_from_p, EnumeratorPair, Enumerators,
    Renyi2,
};
pub use leading::{coherent_info_leading, renyi_entropy_leading, reweighted_vn_leading};
pub use mp::{ks_statistic, mp_cdf, mp_density, mp_edges};
