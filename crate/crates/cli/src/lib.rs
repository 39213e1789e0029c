//! Config-driven front end: parse a flat JSON config, dispatch to the core
//! library, write `report.json` and `data.csv`.
//!
//! Exit codes: 0 on success, 2 when a run's payload carries a disagreement
//! between the printed wall limit and the exact oracle, 1 on errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod run;

pub use config::{parse_config, parse_str, Command, Overrides, RunConfig};
pub use run::{out_dir, run, sweep, Results, RunReport, SweepRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] lamsep_core::Error),

    #[error(transparent)]
    Write(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const EXIT_ERROR: i32 = 1;
