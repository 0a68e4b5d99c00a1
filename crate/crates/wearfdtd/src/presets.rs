//! Study presets and configuration files shipped with the tool.

use crate::config::Source;
use crate::error::Result;

pub const DEFAULT_STUDY: &str = include_str!("../data/presets/default.toml");
pub const FREE_SPACE_STUDY: &str = include_str!("../data/presets/free-space.toml");
pub const DEFAULT_CONFIG: &str = include_str!("../data/config/default.toml");

pub const NAMES: [&str; 2] = ["default", "free-space"];

/// A shipped study preset by name; `None` when `name` is not one.
pub fn preset(name: &str) -> Option<Result<Source>> {
    let text = match name {
        "default" => DEFAULT_STUDY,
        "free-space" => FREE_SPACE_STUDY,
        _ => return None,
    };
    Some(Source::parse(format!("<preset {name}>"), text.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wearfdtd_core::dielectrics::TissueDatabase;
    use wearfdtd_core::solver::SimConfig;
    use wearfdtd_core::study::{AnalysisSettings, ScenarioSet};

    #[test]
    fn default_preset_file_matches_the_builtin_set() {
        let db = TissueDatabase::builtin();
        let set = preset("default").unwrap().unwrap().scenario_set(&db).unwrap();
        assert_eq!(set, ScenarioSet::default_preset());
        let fs = preset("free-space").unwrap().unwrap().scenario_set(&db).unwrap();
        assert_eq!(fs, ScenarioSet::free_space_only());
        assert!(preset("nowhere").is_none());
    }

    #[test]
    fn default_config_file_matches_the_builtin_settings() {
        let src = Source::parse("default.toml", DEFAULT_CONFIG.to_string()).unwrap();
        let mut c = SimConfig::default();
        let mut a = AnalysisSettings::default();
        c.max_steps = 1;
        a.n_freq = 2;
        src.apply_config(&mut c, &mut a).unwrap();
        assert_eq!(c, SimConfig::default());
        let mut expected = AnalysisSettings::default();
        expected.n_freq = 401;
        assert_eq!(a, expected);
    }
}
