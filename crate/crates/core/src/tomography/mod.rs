//! Two-qubit state tomography on the 3×3 product-basis grid, CHSH
//! evaluation and bootstrap error bars.

mod bootstrap;
mod chsh;
mod measurement;
mod mle;

pub use bootstrap::{bootstrap_uncertainty, Statistic};
pub use chsh::{
    chsh, chsh_optimal, correlation, simulate_chsh, ChshResult, ChshSettings, SettingCorrelation,
};
pub use measurement::{
    even_split, multinomial, read_records_csv, simulate_counts, simulate_tomography,
    write_records_csv, Axis, CountRecord, FrequencyRecord, MeasurementSetting,
};
pub use mle::{
    log_likelihood, mle_reconstruct, mle_reconstruct_frequencies, MleOptions, MAX_ITERATIONS,
    REL_TOL,
};
