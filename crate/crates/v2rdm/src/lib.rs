//! Command-line front end for the `v2rdm-core` bounds: FCIDUMP input, ring
//! sweeps, CSV records and gnuplot scripts.

pub mod fcidump;
pub mod records;
pub mod sweep;
