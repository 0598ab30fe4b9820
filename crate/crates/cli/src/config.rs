use std::path::{Path, PathBuf};

use fatoulab::config::FunctionSpec;
use fatoulab::dynamics::Region;
use fatoulab::growth::GrowthCondition;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// `count` points evenly spaced on `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.t_min];
        }
        let h = (self.t_max - self.t_min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.t_min + h * i as f64).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.count == 0 || !(self.t_max >= self.t_min) || !self.t_min.is_finite() || !self.t_max.is_finite() {
            return Err(CliError::config(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

fn default_tol_order() -> f64 {
    0.05
}

fn default_hadamard_tol() -> f64 {
    1e-9
}

fn default_search_grid() -> usize {
    fatoulab::growth::SEARCH_GRID
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    Order {
        grid: GridSpec,
        #[serde(default)]
        expect: Option<f64>,
        #[serde(default = "default_tol_order")]
        tolerance: f64,
    },
    Delta {
        eps1: f64,
        eps2: f64,
        grid: GridSpec,
        #[serde(default)]
        windows: Option<Vec<f64>>,
    },
    GrowthCondition {
        condition: GrowthCondition,
        grid: GridSpec,
    },
    Spike {
        t: f64,
        h: f64,
        #[serde(default = "default_search_grid")]
        search_grid: usize,
    },
    Hadamard {
        grid: GridSpec,
        #[serde(default = "default_hadamard_tol")]
        tolerance: f64,
    },
    HuaYang {
        t_r1: f64,
        steps: usize,
        #[serde(default = "default_search_grid")]
        search_grid: usize,
    },
    OrderGap {
        a: f64,
        b: f64,
        t_r: f64,
        steps: usize,
        order_grid: GridSpec,
    },
    Fabry {
        threshold: f64,
    },
    /// Writes `modulus_curve.csv`.
    Curve {
        grid: GridSpec,
    },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Order { .. } => "estimate_order",
            Check::Delta { .. } => "delta_membership",
            Check::GrowthCondition { .. } => "growth_condition_check",
            Check::Spike { .. } => "spike_finder",
            Check::Hadamard { .. } => "hadamard_convexity_check",
            Check::HuaYang { .. } => "hua_yang_sequence",
            Check::OrderGap { .. } => "order_gap_sequence",
            Check::Fabry { .. } => "fabry_gap_check",
            Check::Curve { .. } => "modulus_curve",
        }
    }
}

/// Which table the all-odd density check runs on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim3Table {
    /// The odd-rule variant of a `lambda` rule, the table itself otherwise.
    #[default]
    Auto,
    Same,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub refine_iters: usize,
    pub max_steps: usize,
    pub escape_t: Option<f64>,
    pub gap_samples: usize,
    pub m_target: f64,
    pub density_slack: f64,
    pub claim3_table: Claim3Table,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            refine_iters: 30,
            max_steps: 10,
            escape_t: None,
            gap_samples: 8,
            m_target: 5.0,
            density_slack: 0.1,
            claim3_table: Claim3Table::Auto,
        }
    }
}

fn default_render_steps() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderParams {
    pub region: Region,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_render_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub escape_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    /// Reserved for sampled tie-breaking; no current check draws from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analysis: Vec<Check>,
    #[serde(default)]
    pub verify: VerifyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderParams>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The config as embedded in reports: precision resolved, output
    /// location dropped.
    pub fn resolved(&self, bits: u32) -> serde_json::Value {
        let mut c = self.clone();
        c.precision_bits = Some(bits);
        c.out = None;
        serde_json::to_value(c).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXP: &str = r#"
[function]
kind = "exp"
terms = 40
tolerance = 1e-12
"#;

    #[test]
    fn minimal_file_takes_defaults() {
        let c = ExperimentConfig::from_toml(EXP).unwrap();
        assert_eq!(c.precision_bits, None);
        assert_eq!(c.seed, 0);
        assert!(c.analysis.is_empty());
        assert_eq!(c.verify, VerifyParams::default());
        assert!(c.render.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml(&format!("colour = 3\n{EXP}")).unwrap_err();
        assert_eq!(e.code, crate::exit::CONFIG);
        let nested = EXP.replace("terms = 40", "terms = 40\nterm = 2");
        assert!(ExperimentConfig::from_toml(&nested).is_err());
    }

    #[test]
    fn checks_parse_with_their_defaults() {
        let text = format!(
            "{EXP}\n[[analysis]]\ncheck = \"order\"\ngrid = {{ t_min = 1.0, t_max = 2.0, count = 3 }}\n\n[[analysis]]\ncheck = \"spike\"\nt = 1.0\nh = 2.0\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.analysis.len(), 2);
        match &c.analysis[0] {
            Check::Order { expect, tolerance, .. } => {
                assert_eq!(*expect, None);
                assert_eq!(*tolerance, 0.05);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.analysis[1].name(), "spike_finder");
    }

    #[test]
    fn grid_points_hit_both_ends() {
        let g = GridSpec {
            t_min: -1.0,
            t_max: 3.0,
            count: 5,
        };
        assert_eq!(g.points(), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        let one = GridSpec { count: 1, ..g };
        assert_eq!(one.points(), vec![-1.0]);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn bad_grids_fail_validation() {
        let g = GridSpec {
            t_min: 0.0,
            t_max: 1.0,
            count: 0,
        };
        assert!(g.validate().is_err());
        assert!(GridSpec { t_max: -1.0, count: 2, ..g }.validate().is_err());
        assert!(GridSpec { t_max: f64::NAN, count: 2, ..g }.validate().is_err());
    }

    #[test]
    fn resolved_config_pins_precision_and_drops_out() {
        let text = format!("out = \"somewhere\"\n{EXP}");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let v = c.resolved(53);
        assert_eq!(v["precision_bits"], 53);
        assert!(v.get("out").is_none());
        let back: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back.function, c.function);
    }
}
