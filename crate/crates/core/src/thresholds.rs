//! Frozen regression thresholds.
//!
//! `thresholds.json` is produced by `examples/freeze_thresholds.rs` and checked
//! in; tests and the CLI read it through [`Thresholds::embedded`] and never
//! recompute it. The version hash is the SHA-256 of the file contents.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counterexample::FcnRow;
use crate::error::Result;

pub const THRESHOLDS_JSON: &str = include_str!("../thresholds.json");

pub const HAAR_SEED: u64 = 7;
pub const SCAN_SEED: u64 = 2024;
pub const PB_SEED: u64 = 17;
pub const FCN_SEED: u64 = 5;
pub const SCAN_D_GRID: [usize; 4] = [17, 65, 257, 513];
pub const SEPARATION_NS: [usize; 3] = [2, 3, 4];
pub const FCN_NS: [usize; 3] = [2, 4, 8];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowBoundOracle {
    pub oracle: f64,
    pub oracle_restarts: usize,
    /// Value at the default restart budget, the regression baseline.
    pub regression: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tensor_conj_norm_car2: f64,
    pub haar8_row_bound: RowBoundOracle,
    pub lacunary_plateau: Band,
    pub lacunary_oracle: Vec<(usize, f64)>,
    /// Smallest admissible ratio of consecutive `m ≡ 1` maxima on the D grid.
    pub flat_growth_min_factor: f64,
    pub flat_oracle: Vec<(usize, f64)>,
    pub separation_pb_band: Band,
    pub separation_pb_oracle: Vec<f64>,
    pub separation_ratio_oracle: Vec<f64>,
    pub fcn_scaled_log_band: Band,
    pub fcn_oracle: Vec<FcnRow>,
    pub eta_sup_n20: f64,
    pub block_eta_sup_n10: f64,
}

impl Thresholds {
    pub fn embedded() -> Result<Self> {
        Ok(serde_json::from_str(THRESHOLDS_JSON)?)
    }
}

/// Hex SHA-256 of the embedded thresholds file.
pub fn version_hash() -> String {
    Sha256::digest(THRESHOLDS_JSON.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
