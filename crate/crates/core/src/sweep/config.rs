use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::convergence::{REFERENCE_EXPONENTS, REFERENCE_MODES, REFERENCE_VISCOSITIES};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, TimeGrid};
use crate::picard::half_plane_angles;
use crate::stokes::{HistoryOptions, DEFAULT_STORE_EVERY};

/// Sweep configuration, read from a TOML key-value file.
///
/// Every key is optional; omitted keys take the defaults below, which
/// reproduce the reference protocol. Unknown keys are rejected.
///
/// | key              | default                              |
/// |------------------|--------------------------------------|
/// | `half_width`     | `8.0` (box `[-L, L)^2`)              |
/// | `resolution`     | `256`                                |
/// | `t_final`        | `1.0`                                |
/// | `steps`          | `200`                                |
/// | `store_every`    | `5`                                  |
/// | `modes`          | `[1, 2, 3, 4, 5]`                    |
/// | `k_values`       | `[0, 1, 2, 3]` (`F = 10^k / n`)      |
/// | `viscosities`    | `[0.01, 0.1, 0.3, 0.75, 1.0, 1.5]`   |
/// | `margin`         | `1.0` (`mu = margin * (F/0.01)^1/4`) |
/// | `profile_radii`  | `[0, 0.5, 1, 1.5, 2, 2.5, 3]`        |
/// | `profile_angles` | `17` (evenly over `[0, pi]`)         |
/// | `border_samples` | `50`                                 |
/// | `border_f_min`   | `0.2`                                |
/// | `border_f_max`   | `1000.0`                             |
/// | `workers`        | `0` (one per CPU)                    |
/// | `out_dir`        | unset; the CLI `--out` overrides     |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub half_width: f64,
    pub resolution: usize,
    pub t_final: f64,
    pub steps: usize,
    pub store_every: usize,
    pub modes: Vec<u32>,
    pub k_values: Vec<u32>,
    pub viscosities: Vec<f64>,
    pub margin: f64,
    pub profile_radii: Vec<f64>,
    pub profile_angles: usize,
    pub border_samples: usize,
    pub border_f_min: f64,
    pub border_f_max: f64,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        let time = TimeGrid::default();
        Self {
            half_width: grid.half_width(),
            resolution: grid.resolution(),
            t_final: time.t_final(),
            steps: time.steps(),
            store_every: DEFAULT_STORE_EVERY,
            modes: REFERENCE_MODES.to_vec(),
            k_values: REFERENCE_EXPONENTS.to_vec(),
            viscosities: REFERENCE_VISCOSITIES.to_vec(),
            margin: 1.0,
            profile_radii: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            profile_angles: 17,
            border_samples: 50,
            border_f_min: 0.2,
            border_f_max: 1000.0,
            workers: 0,
            out_dir: None,
        }
    }
}

fn no_duplicates<T: Ord>(name: &str, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for it in items {
        if !seen.insert(it) {
            return Err(Error::Config(format!("duplicate entry in `{name}`")));
        }
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.half_width, self.resolution)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_final, self.steps)
    }

    pub fn history_options(&self) -> HistoryOptions {
        HistoryOptions {
            store_every: self.store_every,
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        half_plane_angles(self.profile_angles)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        let grid = self.grid().map_err(cfg_err)?;
        self.time_grid().map_err(cfg_err)?;
        if self.store_every == 0 {
            return Err(Error::Config("`store_every` must be at least 1".into()));
        }
        if self.modes.contains(&0) {
            return Err(Error::Config("`modes` entries must be >= 1".into()));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k > 300) {
            return Err(Error::Config(format!("`k_values` entry {k} overflows 10^k")));
        }
        if let Some(nu) = self.viscosities.iter().find(|nu| !(nu.is_finite() && **nu > 0.0)) {
            return Err(Error::Config(format!("`viscosities` entry {nu} is not positive")));
        }
        no_duplicates("modes", self.modes.iter())?;
        no_duplicates("k_values", self.k_values.iter())?;
        no_duplicates("viscosities", self.viscosities.iter().map(|v| v.to_bits()))?;
        if !(self.margin.is_finite() && self.margin >= 1.0) {
            return Err(Error::Config(format!("`margin` must be >= 1, got {}", self.margin)));
        }
        let limit = grid.half_width() - grid.dx();
        if let Some(r) = self
            .profile_radii
            .iter()
            .find(|r| !(r.is_finite() && (0.0..=limit).contains(*r)))
        {
            return Err(Error::Config(format!(
                "profile radius {r} outside [0, {limit}]"
            )));
        }
        if self.profile_angles == 0 {
            return Err(Error::Config("`profile_angles` must be at least 1".into()));
        }
        if self.border_samples < 2 {
            return Err(Error::Config("`border_samples` must be at least 2".into()));
        }
        if !(self.border_f_min > 0.0 && self.border_f_max > self.border_f_min && self.border_f_max.is_finite()) {
            return Err(Error::Config(format!(
                "border amplitude range [{}, {}] is invalid",
                self.border_f_min, self.border_f_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::reference_sample_set;

    #[test]
    fn defaults_reproduce_reference_protocol() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        let set = reference_sample_set();
        let from_cfg = crate::convergence::sample_set(&cfg.modes, &cfg.k_values, &cfg.viscosities);
        assert_eq!(from_cfg, set);
        assert_eq!(cfg.resolution, 256);
        assert_eq!(cfg.steps, 200);
        assert_eq!(cfg.margin, 1.0);
    }

    #[test]
    fn parses_partial_files_and_rejects_unknown_keys() {
        let cfg = SweepConfig::from_toml_str("resolution = 64\nviscosities = [0.1]\n").unwrap();
        assert_eq!(cfg.resolution, 64);
        assert_eq!(cfg.viscosities, vec![0.1]);
        assert_eq!(cfg.modes, vec![1, 2, 3, 4, 5]);
        assert!(matches!(
            SweepConfig::from_toml_str("resolutoin = 64\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SweepConfig {
            margin: 1.05,
            out_dir: Some("out".into()),
            ..Default::default()
        };
        assert_eq!(SweepConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid_values() {
        for bad in [
            "resolution = 15",
            "steps = 0",
            "margin = 0.99",
            "modes = [0]",
            "modes = [1, 1]",
            "viscosities = [-0.1]",
            "profile_radii = [7.99]",
            "profile_angles = 0",
            "border_samples = 1",
            "border_f_min = 5.0\nborder_f_max = 1.0",
            "store_every = 0",
        ] {
            assert!(SweepConfig::from_toml_str(bad).is_err(), "{bad}");
        }
    }
}
