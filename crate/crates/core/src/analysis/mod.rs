//! Weighted-space analysis: norms, modulus of continuity, Steklov
//! smoothing, error-table presets, the Voronovskaya checker and
//! convergence-order estimation.

mod convergence;
pub mod tables;
mod weight;

pub use convergence::{
    order_fit, voronovskaya_check, voronovskaya_limit, VoronovskayaRecord, VoronovskayaStudy,
};
pub use tables::{
    comparison_grid, error_table, recover_table2_point, table1_shortcut, ErrorTable, GridRecord,
    PointSource, TablePreset, TableRow, TABLE1_DEFAULT_A, TABLE2_DEFAULT_A,
};
pub use weight::{
    modulus, steklov, weighted_sup_norm, ModulusEstimate, WeightSpace, DEFAULT_GRID,
    DEFAULT_SHIFT_SAMPLES,
};
