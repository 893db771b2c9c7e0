//! Machine-readable run reports: configuration echo, front, statistics, and
//! completion flag, with a versioned JSON schema.

use crate::instance::MoilpInstance;
use crate::search::{NodeRule, SolveConfig, SolveOutcome, SolveStats, VarRule};
use crate::{ObMode, ProbingMode};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub ob: String,
    pub probing: String,
    pub node: String,
    pub var: String,
    pub cuts: bool,
    pub enum_threshold: u32,
    pub time_limit: Option<f64>,
}

impl ConfigEcho {
    pub fn from_config(cfg: &SolveConfig) -> Self {
        ConfigEcho {
            ob: match cfg.ob_mode {
                ObMode::Nob => "nob",
                ObMode::Cb => "cb",
                ObMode::Fob => "fob",
            }
            .into(),
            probing: match cfg.probing {
                ProbingMode::None => "none",
                ProbingMode::Vf => "vf",
                ProbingMode::Vfd => "vfd",
            }
            .into(),
            node: match cfg.node_rule {
                NodeRule::Df => "df",
                NodeRule::Bf => "bf",
                NodeRule::Bbws => "bbws",
                NodeRule::Bbwsn => "bbwsn",
                NodeRule::Bbgap => "bbgap",
            }
            .into(),
            var: match cfg.var_rule {
                VarRule::Mof => "mof",
                VarRule::Ps => "ps",
            }
            .into(),
            cuts: cfg.cuts_enabled,
            enum_threshold: cfg.enum_threshold,
            time_limit: cfg.time_limit,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontRow {
    pub objectives: Vec<i64>,
    pub variables: Vec<u8>,
}

/// Full report of one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub completed: bool,
    pub wall_clock_seconds: f64,
    pub front: Vec<FrontRow>,
    pub stats: SolveStats,
}

impl RunReport {
    pub fn new(inst: &MoilpInstance, cfg: &SolveConfig, outcome: &SolveOutcome) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            config: ConfigEcho::from_config(cfg),
            completed: outcome.completed,
            wall_clock_seconds: outcome.stats.time_total,
            front: outcome
                .front
                .report_rows(inst)
                .into_iter()
                .map(|(objectives, variables)| FrontRow { objectives, variables })
                .collect(),
            stats: outcome.stats.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Copy with every wall-clock measurement zeroed; all remaining bytes are
    /// deterministic for a fixed (instance, config).
    pub fn normalized(&self) -> RunReport {
        let mut out = self.clone();
        out.wall_clock_seconds = 0.0;
        out.stats.time_total = 0.0;
        out.stats.time_lbs = 0.0;
        out.stats.time_probing = 0.0;
        out.stats.time_gap_update = 0.0;
        out
    }
}
