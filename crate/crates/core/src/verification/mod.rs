//! Exact oracles and numeric checks of the analysis.

mod appendix;
mod lemmas;
mod oracle;

pub use appendix::{appendix_grid_search, appendix_lhs, appendix_lhs_direct, l_values, GridPoint, GridSearchReport};
pub use lemmas::{check_lemmas, LemmaOutcome, LemmaReport, LemmaStatus};
pub use oracle::{branch_and_bound_opt, brute_force_opt, certify_bifactor, subset_table, BifactorCertificate, OracleResult, SubsetCost};
