//! Scenario documents: one JSON file describing the room, the access
//! points, the survey route and the pipeline settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localizer::TrainConfig;
use crate::simulator::{
    drive_continuous, sample_test_scans, survey_grid_scans, AccessPointSpec, Floorplan, SurveyConfig, SurveyRecording,
};
use crate::types::{ApId, LocatedScan, Pose2D};

const REFERENCE_JSON: &str = include_str!("../scenarios/reference.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAp {
    pub id: ApId,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_tx")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_exponent")]
    pub path_loss_exponent: f64,
    #[serde(default = "default_floor")]
    pub detection_floor_dbm: f64,
}

fn default_tx() -> f64 {
    -40.0
}

fn default_exponent() -> f64 {
    2.5
}

fn default_floor() -> f64 {
    -95.0
}

impl From<&ScenarioAp> for AccessPointSpec {
    fn from(a: &ScenarioAp) -> Self {
        AccessPointSpec {
            id: a.id.clone(),
            position: Pose2D::at(a.x, a.y),
            tx_power_dbm: a.tx_power_dbm,
            path_loss_exponent: a.path_loss_exponent,
            detection_floor_dbm: a.detection_floor_dbm,
        }
    }
}

/// File names written by `simulate`. `{spacing}` in the grid name is
/// replaced by the spacing with two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputNames {
    pub odometry: String,
    pub true_poses: String,
    pub scans: String,
    pub grid_truth: String,
    pub test_scans: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        Self {
            odometry: "odometry.csv".into(),
            true_poses: "true_poses.csv".into(),
            scans: "scans.jsonl".into(),
            grid_truth: "grid_truth_{spacing}.json".into(),
            test_scans: "test_scans.json".into(),
        }
    }
}

impl OutputNames {
    pub fn grid_truth_for(&self, spacing: f64) -> String {
        self.grid_truth.replace("{spacing}", &format!("{spacing:.2}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub floorplan: Floorplan,
    pub access_points: Vec<ScenarioAp>,
    pub waypoints: Vec<[f64; 2]>,
    /// The drive speed is chosen so the route takes exactly this long.
    pub survey_duration_s: f64,
    #[serde(default)]
    pub survey: SurveyConfig,
    #[serde(default = "default_spacings")]
    pub grid_spacings: Vec<f64>,
    #[serde(default = "default_dwell")]
    pub grid_dwell_scans: usize,
    #[serde(default = "default_test_scans")]
    pub test_scans: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub outputs: OutputNames,
}

fn default_spacings() -> Vec<f64> {
    vec![0.99, 0.66]
}

fn default_dwell() -> usize {
    1
}

fn default_test_scans() -> usize {
    64
}

impl ScenarioConfig {
    /// The bundled 4 x 10 m office scenario with eight access points.
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_JSON).expect("bundled scenario is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.floorplan.validate()?;
        self.survey.validate()?;
        self.train.validate()?;
        let aps = self.aps();
        if aps.is_empty() {
            return Err(Error::NoAccessPoints);
        }
        for ap in &aps {
            ap.validate()?;
        }
        let mut ids: Vec<&ApId> = self.access_points.iter().map(|a| &a.id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("duplicate access point id".into()));
        }
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidConfig("need at least two waypoints".into()));
        }
        if !(self.survey_duration_s > 0.0) {
            return Err(Error::InvalidConfig("survey_duration_s must be positive".into()));
        }
        if self.route_length() <= 0.0 {
            return Err(Error::InvalidConfig("route has zero length".into()));
        }
        if self.grid_dwell_scans == 0 || self.grid_spacings.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidConfig("grid spacings must be positive and dwell >= 1".into()));
        }
        // Route geometry is checked by the simulator itself.
        crate::simulator::drive_continuous(
            &self.floorplan,
            &aps,
            &self.waypoint_poses(),
            1.0,
            &SurveyConfig { odometry_rate_hz: 2.0, scan_rate_hz: 1.0, scan_start_offset_s: 1e9, ..self.survey.clone() },
        )
        .map(|_| ())
    }

    pub fn aps(&self) -> Vec<AccessPointSpec> {
        self.access_points.iter().map(AccessPointSpec::from).collect()
    }

    pub fn waypoint_poses(&self) -> Vec<Pose2D> {
        self.waypoints.iter().map(|w| Pose2D::at(w[0], w[1])).collect()
    }

    pub fn route_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
    }

    pub fn speed(&self) -> f64 {
        self.route_length() / self.survey_duration_s
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.survey.rng_seed = seed;
        s
    }

    pub fn record(&self) -> Result<SurveyRecording> {
        drive_continuous(&self.floorplan, &self.aps(), &self.waypoint_poses(), self.speed(), &self.survey)
    }

    pub fn grid_scans(&self, spacing: f64) -> Result<Vec<LocatedScan>> {
        survey_grid_scans(&self.floorplan, &self.aps(), spacing, self.grid_dwell_scans, &self.survey)
    }

    pub fn held_out_scans(&self) -> Result<Vec<LocatedScan>> {
        sample_test_scans(&self.floorplan, &self.aps(), self.test_scans, &self.survey)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_shape() {
        let s = ScenarioConfig::reference();
        assert_eq!((s.floorplan.width, s.floorplan.height), (4.0, 10.0));
        assert_eq!(s.access_points.len(), 8);
        assert_eq!(s.survey_duration_s, 320.0);
        assert_eq!(s.survey.scan_start_offset_s, 0.3);
    }

    #[test]
    fn reference_recording_counts() {
        let rec = ScenarioConfig::reference().record().unwrap();
        assert_eq!(rec.odometry.len(), 32_001);
        assert_eq!(rec.scans.len(), 320);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = ScenarioConfig::reference();
        s.waypoints[3] = [3.6, 5.0];
        assert!(s.validate().is_err());
        let mut s = ScenarioConfig::reference();
        s.access_points[1].id = s.access_points[0].id.clone();
        assert!(s.validate().is_err());
        assert!(ScenarioConfig::from_json("{}").is_err());
    }

    #[test]
    fn grid_name_template() {
        assert_eq!(OutputNames::default().grid_truth_for(0.99), "grid_truth_0.99.json");
    }
}
