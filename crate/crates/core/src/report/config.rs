use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cglmp::PhaseSearch;
use crate::polytope::KlSearch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Every default tolerance divided by ten.
    Strict,
}

impl ToleranceProfile {
    pub fn scale(self) -> f64 {
        match self {
            Self::Default => 1.0,
            Self::Strict => 0.1,
        }
    }
}

impl std::str::FromStr for ToleranceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Self::Default),
            "strict" => Ok(Self::Strict),
            other => Err(format!("unknown tolerance profile `{other}` (expected default or strict)")),
        }
    }
}

/// Grid resolutions and sample counts used by the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub chsh_thetas: usize,
    pub detection_thetas: usize,
    pub cglmp: PhaseSearch,
    pub kl: KlSearch,
    pub cglmp_oracle_samples: usize,
    pub correlator_oracle_samples: usize,
    pub kl_solver_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            chsh_thetas: 50,
            detection_thetas: 20,
            cglmp: PhaseSearch::default(),
            kl: KlSearch::default(),
            cglmp_oracle_samples: 500,
            correlator_oracle_samples: 1000,
            kl_solver_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproConfig {
    pub seed: u64,
    pub profile: ToleranceProfile,
    /// Absolute tolerances by claim id; these bypass the profile scaling.
    pub tolerances: BTreeMap<String, f64>,
    pub grids: Grids,
}

pub const DEFAULT_SEED: u64 = 20_070_917;

impl Default for ReproConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            profile: ToleranceProfile::Default,
            tolerances: BTreeMap::new(),
            grids: Grids::default(),
        }
    }
}

impl ReproConfig {
    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        self.tolerances
            .get(id)
            .copied()
            .unwrap_or(default * self.profile.scale())
    }
}
