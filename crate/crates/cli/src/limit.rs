//! `isomono limit`: lattice flow against the Schlesinger equations as `ε → 0`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use isomono::continuum::{limit_compare, unit_shift_check, LimitLevel};
use isomono::random::continuous_system;
use isomono::{ContinuousSystem, EmbeddingConfig, Tolerances};

use crate::error::{CliError, CliResult};
use crate::output::{num, to_json, Format};

/// Residues and poles, with optional anchors `y` (the poles by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousConfig {
    #[serde(flatten)]
    pub system: ContinuousSystem,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "anchors")]
    pub y: Option<Vec<isomono::Complex64>>,
}

mod anchors {
    use isomono::io::Entry;
    use isomono::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(y: &Option<Vec<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
        y.as_ref().map(|v| v.iter().map(|&z| Entry::from(z)).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Complex64>>, D::Error> {
        Ok(Option::<Vec<Entry>>::deserialize(d)?.map(|v| v.into_iter().map(Into::into).collect()))
    }
}

impl ContinuousConfig {
    pub fn load(path: &Path, tol: &Tolerances) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: ContinuousConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad continuous system: {e}")))?;
        cfg.system.validate(tol).map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(cfg)
    }

    /// The random 2×2 system with two poles drawn from `seed`.
    pub fn random(seed: u64) -> Self {
        ContinuousConfig { system: continuous_system(seed, 2, 2), y: None }
    }
}

#[derive(Debug, Serialize)]
pub struct UnitShift {
    pub group: usize,
    pub raise: bool,
    /// `max ‖𝓑̃ − (𝓑 ± I)‖_F` over the residues; absent when the transformation
    /// does not exist for these data (for instance a vanishing eigenvector coordinate).
    pub deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LimitReport {
    pub epsilon: f64,
    pub halvings: u32,
    pub target: Vec<f64>,
    pub levels: Vec<LimitLevel>,
    /// `error(ε) / error(ε/2)` for consecutive levels.
    pub ratios: Vec<f64>,
    pub unit_shift: Vec<UnitShift>,
}

/// Bound on the unit-shift deviation, where the rule is exact.
const UNIT_SHIFT_BOUND: f64 = 1e-9;

pub fn limit(cfg: &ContinuousConfig, epsilon: f64, halvings: u32, target: &[f64], tol: &Tolerances) -> CliResult<LimitReport> {
    let sys = &cfg.system;
    let embedding = EmbeddingConfig { epsilon, y: cfg.y.clone().unwrap_or_else(|| sys.x.clone()) };
    let table = limit_compare(sys, &embedding, target, halvings, tol).map_err(CliError::from_run)?;
    let mut unit_shift = Vec::new();
    for group in 0..sys.n() {
        for raise in [true, false] {
            let (deviation, failure) = match unit_shift_check(sys, group, raise, tol) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            };
            unit_shift.push(UnitShift { group: group + 1, raise, deviation, failure });
        }
    }
    Ok(LimitReport { epsilon, halvings, target: target.to_vec(), ratios: table.ratios(), levels: table.levels, unit_shift })
}

pub fn render(report: &LimitReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let n = report.target.len();
            let mut out = String::from("epsilon,");
            for i in 1..=n {
                let _ = write!(out, "k{i},");
            }
            out.push_str("index,error\n");
            for level in &report.levels {
                let k: String = level.k.iter().map(|v| format!("{v},")).collect();
                for (i, e) in level.errors.iter().enumerate() {
                    let _ = writeln!(out, "{},{k}{},{}", num(level.epsilon), i + 1, num(*e));
                }
            }
            out
        }
    }
}

/// Stopped levels are genericity aborts; a unit-shift deviation beyond its
/// bound is a tolerance failure. A unit shift that does not exist is only reported.
pub fn verdict(report: &LimitReport) -> CliResult<()> {
    let stopped: Vec<String> = report
        .levels
        .iter()
        .filter_map(|l| l.failure.as_ref().map(|f| format!("epsilon {}: {f}", l.epsilon)))
        .collect();
    if !stopped.is_empty() {
        return Err(CliError::Genericity(stopped.join("; ")));
    }
    let worst = report.unit_shift.iter().filter_map(|u| u.deviation).fold(0.0, f64::max);
    if worst > UNIT_SHIFT_BOUND {
        return Err(CliError::Tolerance(format!("unit shift deviation {worst:.3e} > {UNIT_SHIFT_BOUND:.0e}")));
    }
    Ok(())
}
