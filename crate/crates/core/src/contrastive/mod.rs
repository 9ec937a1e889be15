//! Contrastive objectives on finite spaces and the closed-form tables their
//! minimizers reach.

mod conductance;
mod corpus;
mod infonce;
mod margin;
mod nce;
mod probe;
mod process;
mod sgns;
mod spectral;

pub use conductance::{dirichlet_conductance, sparsest_partition, SparsestPartition, MAX_BRUTE_FORCE};
pub use corpus::CorpusStats;
pub use infonce::{
    expected_simclr_loss, expected_simclr_loss_and_gradient, infonce_from_scores, infonce_loss, infonce_objective,
    max_conditional_tv, normalized_score_error, score_table, train_infonce, tied_representable, tuple_count, Estimate,
    InfoNceConfig, InfoNceFit, MonteCarlo, ScoreMode, ENUMERATION_BUDGET,
};
pub use margin::{margin_pair_loss, triplet_loss};
pub use nce::{nce_loss, train_nce, NceCounts, NceFit};
pub use probe::{linear_probe_error, ProbeResult, ProbeTask};
pub use process::{PairProcess, STOCHASTIC_TOL};
pub use sgns::{
    expected_negative_counts, sgns_expected_loss, sgns_loss_and_gradient, sgns_target, shifted_pmi_matrix, train_sgns,
    SgnsConfig, SgnsFit,
};
pub use spectral::{
    factorization_error, spectral_constant, spectral_factor, spectral_loss, spectral_loss_and_gradient,
    spectral_target, train_spectral, SpectralFit,
};

pub(crate) use spectral::row_major;
