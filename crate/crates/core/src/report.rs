//! Machine-readable construction reports.
//!
//! One JSON document per constructed annulus; field order is the struct
//! order, numbers serialize as shortest round-trip decimals, so regeneration
//! at fixed inputs and version is byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::family::AnnulusModel;
use crate::verify::Verdict;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSize {
    pub u_samples: usize,
    pub v_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnulusReport {
    pub tool_version: String,
    pub n: u32,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub per: f64,
    pub u_star: f64,
    pub tau: f64,
    pub boundary_radius: f64,
    pub h_rescaled: f64,
    /// Rotational (μ = 0) models only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub necksize_unscaled: Option<f64>,
    pub grid: GridSize,
    pub verdicts: Vec<Verdict>,
}

impl AnnulusReport {
    pub fn from_model(model: &AnnulusModel, verdicts: Vec<Verdict>) -> AnnulusReport {
        let fp = &model.fp;
        AnnulusReport {
            tool_version: TOOL_VERSION.into(),
            n: fp.n,
            mu: fp.mu,
            alpha: fp.param.alpha,
            beta: fp.param.beta,
            gamma: fp.param.gamma,
            sigma: fp.sigma,
            per: fp.per,
            u_star: fp.u_star,
            tau: fp.tau,
            boundary_radius: model.boundary_radius,
            h_rescaled: model.h_rescaled,
            necksize_unscaled: model.necksize_unscaled,
            grid: GridSize {
                u_samples: model.patch.nu,
                v_samples: model.patch.nv,
            },
            verdicts,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::error::Error::Parse(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<AnnulusReport> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| crate::error::Error::Parse(e.to_string()))
    }
}
