//! Dataset ingestion: HMD 1x1 table parsing, multi-population grid assembly
//! and the canonical CSV interchange format.

mod dataset;
mod hmd;

pub use dataset::{assemble_dataset, CellKey, MortalityDataset};
pub use hmd::{parse_hmd_table, HmdRecord, PopulationSource};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assembly error: {count} cell(s) absent from source tables ({preview})")]
    Assembly { count: usize, preview: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
