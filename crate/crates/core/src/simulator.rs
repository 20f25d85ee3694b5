//! Synthetic surveys standing in for the robot.
//!
//! RSSI follows a log-distance path-loss law with log-normal shadowing
//! (reference distance 1 m). Obstacles only block robot motion; they do
//! not attenuate signals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::dataset_from_located;
use crate::error::{Error, Result};
use crate::types::{ApId, FingerprintDataset, LocatedScan, OdometrySample, Pose2D, WifiScan};

pub const REFERENCE_DISTANCE_M: f64 = 1.0;

// Independent random streams derived from one seed.
const STREAM_ODOMETRY: u64 = 1;
const STREAM_CONTINUOUS_RSSI: u64 = 2;
const STREAM_GRID_RSSI: u64 = 3;
const STREAM_TEST: u64 = 4;

const EPS: f64 = 1e-9;

pub(crate) fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Liang-Barsky clip of the segment `a -> b` against the rectangle.
    pub fn intersects_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        let checks = [
            (-dx, a.0 - self.x_min),
            (dx, self.x_max - a.0),
            (-dy, a.1 - self.y_min),
            (dy, self.y_max - a.1),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub obstacles: Vec<Rect>,
}

impl Floorplan {
    pub fn new(width: f64, height: f64, obstacles: Vec<Rect>) -> Result<Self> {
        let plan = Self { width, height, obstacles };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "floorplan must have positive size, got {}x{}",
                self.width, self.height
            )));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            let inside = o.x_min >= 0.0
                && o.y_min >= 0.0
                && o.x_max <= self.width
                && o.y_max <= self.height
                && o.x_min <= o.x_max
                && o.y_min <= o.y_max;
            if !inside {
                return Err(Error::InvalidConfig(format!("obstacle {i} outside floorplan bounds")));
            }
        }
        Ok(())
    }

    pub fn in_bounds(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    /// Inside the room and not on or inside any obstacle.
    pub fn is_free(&self, x: f64, y: f64) -> bool {
        self.in_bounds(x, y) && !self.obstacles.iter().any(|o| o.contains(x, y))
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Area not covered by obstacles (obstacles assumed non-overlapping).
    pub fn free_area(&self) -> f64 {
        self.area() - self.obstacles.iter().map(Rect::area).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPointSpec {
    pub id: ApId,
    pub position: Pose2D,
    pub tx_power_dbm: f64,
    pub path_loss_exponent: f64,
    pub detection_floor_dbm: f64,
}

impl AccessPointSpec {
    /// Access point with the synthetic defaults: -40 dBm at 1 m, exponent
    /// 2.5, detection floor -95 dBm.
    pub fn with_defaults(id: ApId, x: f64, y: f64) -> Self {
        Self {
            id,
            position: Pose2D::at(x, y),
            tx_power_dbm: -40.0,
            path_loss_exponent: 2.5,
            detection_floor_dbm: -95.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.5..=6.0).contains(&self.path_loss_exponent) {
            return Err(Error::InvalidConfig(format!(
                "AP {}: path loss exponent {} outside [1.5, 6]",
                self.id, self.path_loss_exponent
            )));
        }
        if !(self.detection_floor_dbm <= self.tx_power_dbm) {
            return Err(Error::InvalidConfig(format!(
                "AP {}: detection floor above transmit power",
                self.id
            )));
        }
        if !self.position.is_finite() {
            return Err(Error::NonFinite(format!("AP {} position", self.id)));
        }
        Ok(())
    }

    /// Noise-free received power at `p`.
    pub fn mean_rssi(&self, p: &Pose2D) -> f64 {
        let d = self.position.distance_to(p).max(REFERENCE_DISTANCE_M);
        self.tx_power_dbm - 10.0 * self.path_loss_exponent * (d / REFERENCE_DISTANCE_M).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OdomNoise {
    /// Drift stddev accumulated over one meter of travel (random walk).
    pub drift_per_meter: f64,
    /// Independent per-sample position jitter stddev, meters.
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurveyConfig {
    pub odometry_rate_hz: f64,
    pub scan_rate_hz: f64,
    pub scan_start_offset_s: f64,
    pub shadowing_sigma_db: f64,
    pub odom_noise: OdomNoise,
    pub rng_seed: u64,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self {
            odometry_rate_hz: 100.0,
            scan_rate_hz: 1.0,
            scan_start_offset_s: 0.0,
            shadowing_sigma_db: 0.0,
            odom_noise: OdomNoise::default(),
            rng_seed: 0,
        }
    }
}

impl SurveyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.scan_rate_hz > 0.0 && self.odometry_rate_hz > self.scan_rate_hz) {
            return Err(Error::InvalidConfig("need odometry_rate_hz > scan_rate_hz > 0".into()));
        }
        let sigmas = [self.shadowing_sigma_db, self.odom_noise.drift_per_meter, self.odom_noise.jitter];
        if sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("noise sigmas must be finite and >= 0".into()));
        }
        if !(self.scan_start_offset_s >= 0.0) {
            return Err(Error::InvalidConfig("scan_start_offset_s must be >= 0".into()));
        }
        Ok(())
    }
}

/// Everything the robot would have recorded during one continuous drive.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRecording {
    pub true_poses: Vec<OdometrySample>,
    pub odometry: Vec<OdometrySample>,
    pub scans: Vec<WifiScan>,
    pub config: SurveyConfig,
}

impl SurveyRecording {
    pub fn duration(&self) -> f64 {
        match (self.true_poses.first(), self.true_poses.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

/// Received power at `p`, or `None` below the detection floor.
///
/// Always draws exactly one normal variate so the random stream stays in
/// step regardless of sigma.
pub fn rssi_at<R: Rng + ?Sized>(ap: &AccessPointSpec, p: &Pose2D, shadowing_sigma_db: f64, rng: &mut R) -> Option<f64> {
    let z: f64 = rng.sample(StandardNormal);
    let rssi = ap.mean_rssi(p) + shadowing_sigma_db * z;
    (rssi >= ap.detection_floor_dbm).then_some(rssi)
}

/// One scan over all access points at pose `p`.
pub fn scan_at<R: Rng + ?Sized>(aps: &[AccessPointSpec], p: &Pose2D, t: f64, shadowing_sigma_db: f64, rng: &mut R) -> WifiScan {
    let readings = aps
        .iter()
        .filter_map(|ap| rssi_at(ap, p, shadowing_sigma_db, rng).map(|r| (ap.id.clone(), r)))
        .collect();
    WifiScan::new(t, readings)
}

fn check_aps(aps: &[AccessPointSpec]) -> Result<()> {
    if aps.is_empty() {
        return Err(Error::NoAccessPoints);
    }
    aps.iter().try_for_each(AccessPointSpec::validate)
}

fn check_route(plan: &Floorplan, waypoints: &[Pose2D]) -> Result<()> {
    for (i, w) in waypoints.iter().enumerate() {
        if !w.is_finite() || !plan.is_free(w.x, w.y) {
            return Err(Error::UnreachableWaypoint { index: i, x: w.x, y: w.y });
        }
    }
    for (i, pair) in waypoints.windows(2).enumerate() {
        let (a, b) = ((pair[0].x, pair[0].y), (pair[1].x, pair[1].y));
        if plan.obstacles.iter().any(|o| o.intersects_segment(a, b)) {
            return Err(Error::PathBlocked { from: i, to: i + 1 });
        }
    }
    Ok(())
}

/// Piecewise-linear path parameterised by arc length.
struct Route {
    points: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    headings: Vec<f64>,
}

impl Route {
    fn new(waypoints: &[Pose2D]) -> Self {
        let points: Vec<(f64, f64)> = waypoints.iter().map(|w| (w.x, w.y)).collect();
        let mut cumulative = vec![0.0];
        let mut headings = Vec::with_capacity(points.len().saturating_sub(1));
        let mut last_heading = waypoints.first().map_or(0.0, |w| w.heading);
        for pair in points.windows(2) {
            let (dx, dy) = (pair[1].0 - pair[0].0, pair[1].1 - pair[0].1);
            let len = dx.hypot(dy);
            if len > 0.0 {
                last_heading = dy.atan2(dx);
            }
            headings.push(last_heading);
            cumulative.push(cumulative.last().unwrap() + len);
        }
        Self { points, cumulative, headings }
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn pose_at(&self, s: f64) -> Pose2D {
        if self.points.len() == 1 {
            return Pose2D::at(self.points[0].0, self.points[0].1);
        }
        let s = s.clamp(0.0, self.length());
        // Last segment whose start is <= s.
        let seg = match self.cumulative.partition_point(|&c| c <= s) {
            0 => 0,
            k => (k - 1).min(self.points.len() - 2),
        };
        let len = self.cumulative[seg + 1] - self.cumulative[seg];
        let (a, b) = (self.points[seg], self.points[seg + 1]);
        let f = if len > 0.0 { (s - self.cumulative[seg]) / len } else { 0.0 };
        Pose2D::new(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1), self.headings[seg])
    }
}

/// Drives the waypoint route at constant speed, recording odometry and scans.
///
/// Odometry timestamps are `k / odometry_rate_hz` for every sample within
/// the drive duration (endpoints inclusive). Scans fire at
/// `scan_start_offset_s + k / scan_rate_hz` up to the last odometry
/// timestamp. Scans in which no access point is detectable are dropped.
pub fn drive_continuous(
    plan: &Floorplan,
    aps: &[AccessPointSpec],
    waypoints: &[Pose2D],
    speed: f64,
    cfg: &SurveyConfig,
) -> Result<SurveyRecording> {
    plan.validate()?;
    cfg.validate()?;
    check_aps(aps)?;
    if waypoints.is_empty() {
        return Err(Error::InvalidConfig("no waypoints".into()));
    }
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::InvalidConfig(format!("speed must be positive, got {speed}")));
    }
    check_route(plan, waypoints)?;

    let route = Route::new(waypoints);
    let duration = route.length() / speed;
    let n_odom = (duration * cfg.odometry_rate_hz + EPS).floor() as usize + 1;

    let true_poses: Vec<OdometrySample> = (0..n_odom)
        .map(|k| {
            let t = k as f64 / cfg.odometry_rate_hz;
            OdometrySample { t, pose: route.pose_at(speed * t) }
        })
        .collect();

    let mut odo_rng = seeded_stream(cfg.rng_seed, STREAM_ODOMETRY);
    let noise = cfg.odom_noise;
    let (mut drift_x, mut drift_y) = (0.0f64, 0.0f64);
    let mut odometry = Vec::with_capacity(n_odom);
    for (k, s) in true_poses.iter().enumerate() {
        if k > 0 {
            let step = s.pose.distance_to(&true_poses[k - 1].pose);
            let scale = noise.drift_per_meter * step.sqrt();
            drift_x += scale * odo_rng.sample::<f64, _>(StandardNormal);
            drift_y += scale * odo_rng.sample::<f64, _>(StandardNormal);
        }
        let jx = noise.jitter * odo_rng.sample::<f64, _>(StandardNormal);
        let jy = noise.jitter * odo_rng.sample::<f64, _>(StandardNormal);
        let pose = Pose2D { x: s.pose.x + drift_x + jx, y: s.pose.y + drift_y + jy, heading: s.pose.heading };
        odometry.push(OdometrySample { t: s.t, pose });
    }

    let t_end = true_poses.last().map_or(0.0, |s| s.t);
    let mut rssi_rng = seeded_stream(cfg.rng_seed, STREAM_CONTINUOUS_RSSI);
    let mut scans = Vec::new();
    for k in 0.. {
        let t = cfg.scan_start_offset_s + k as f64 / cfg.scan_rate_hz;
        if t > t_end + EPS {
            break;
        }
        let scan = scan_at(aps, &route.pose_at(speed * t), t, cfg.shadowing_sigma_db, &mut rssi_rng);
        if !scan.readings.is_empty() {
            scans.push(scan);
        }
    }

    Ok(SurveyRecording { true_poses, odometry, scans, config: cfg.clone() })
}

/// Lattice points `(i * spacing, j * spacing)` anchored at the room corner,
/// restricted to free space.
pub fn grid_points(plan: &Floorplan, spacing: f64) -> Result<Vec<(f64, f64)>> {
    plan.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {spacing}")));
    }
    if spacing > plan.width && spacing > plan.height {
        return Err(Error::DegenerateGrid(spacing));
    }
    let nx = (plan.width / spacing + EPS).floor() as usize + 1;
    let ny = (plan.height / spacing + EPS).floor() as usize + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            if plan.is_free(x, y) {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}

/// Grid survey scans: `dwell_scans` scans at each free lattice point, with
/// the exact position logged alongside each scan.
pub fn survey_grid_scans(
    plan: &Floorplan,
    aps: &[AccessPointSpec],
    spacing: f64,
    dwell_scans: usize,
    cfg: &SurveyConfig,
) -> Result<Vec<LocatedScan>> {
    cfg.validate()?;
    check_aps(aps)?;
    if dwell_scans == 0 {
        return Err(Error::InvalidConfig("dwell_scans must be >= 1".into()));
    }
    let points = grid_points(plan, spacing)?;
    let mut rng = seeded_stream(cfg.rng_seed, STREAM_GRID_RSSI);
    let mut out = Vec::with_capacity(points.len() * dwell_scans);
    let mut k = 0usize;
    for (x, y) in points {
        let pose = Pose2D::at(x, y);
        for _ in 0..dwell_scans {
            let t = cfg.scan_start_offset_s + k as f64 / cfg.scan_rate_hz;
            k += 1;
            out.push(LocatedScan { x, y, scan: scan_at(aps, &pose, t, cfg.shadowing_sigma_db, &mut rng) });
        }
    }
    Ok(out)
}

/// Grid survey as a fingerprint dataset (positions are logged, no alignment).
pub fn survey_grid(
    plan: &Floorplan,
    aps: &[AccessPointSpec],
    spacing: f64,
    dwell_scans: usize,
    cfg: &SurveyConfig,
) -> Result<FingerprintDataset> {
    dataset_from_located(&survey_grid_scans(plan, aps, spacing, dwell_scans, cfg)?)
}

/// `n` scans at uniformly random free positions, for held-out evaluation.
pub fn sample_test_scans(
    plan: &Floorplan,
    aps: &[AccessPointSpec],
    n: usize,
    cfg: &SurveyConfig,
) -> Result<Vec<LocatedScan>> {
    plan.validate()?;
    check_aps(aps)?;
    let mut rng = seeded_stream(cfg.rng_seed, STREAM_TEST);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * (n + 1) {
            return Err(Error::InvalidConfig("floorplan has no free space to sample".into()));
        }
        let x = rng.random_range(0.0..=plan.width);
        let y = rng.random_range(0.0..=plan.height);
        if !plan.is_free(x, y) {
            continue;
        }
        let t = out.len() as f64 / cfg.scan_rate_hz;
        let scan = scan_at(aps, &Pose2D::at(x, y), t, cfg.shadowing_sigma_db, &mut rng);
        if !scan.readings.is_empty() {
            out.push(LocatedScan { x, y, scan });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(tx: f64, n: f64, floor: f64) -> AccessPointSpec {
        AccessPointSpec {
            id: "aa:00:00:00:00:01".parse().unwrap(),
            position: Pose2D::at(0.0, 0.0),
            tx_power_dbm: tx,
            path_loss_exponent: n,
            detection_floor_dbm: floor,
        }
    }

    fn room() -> Floorplan {
        Floorplan::new(4.0, 10.0, vec![]).unwrap()
    }

    #[test]
    fn rssi_at_reference_distance_is_tx_power() {
        let mut rng = seeded_stream(1, 0);
        let r = rssi_at(&ap(-40.0, 2.5, -95.0), &Pose2D::at(1.0, 0.0), 0.0, &mut rng);
        assert_eq!(r, Some(-40.0));
        // Inside d0 the loss is clamped to zero.
        let r = rssi_at(&ap(-40.0, 2.5, -95.0), &Pose2D::at(0.2, 0.1), 0.0, &mut rng);
        assert_eq!(r, Some(-40.0));
    }

    #[test]
    fn rssi_at_ten_meters() {
        let mut rng = seeded_stream(1, 0);
        let r = rssi_at(&ap(-40.0, 2.0, -95.0), &Pose2D::at(10.0, 0.0), 0.0, &mut rng).unwrap();
        assert!((r + 60.0).abs() < 1e-12);
        assert_eq!(rssi_at(&ap(-40.0, 2.0, -55.0), &Pose2D::at(10.0, 0.0), 0.0, &mut rng), None);
    }

    #[test]
    fn rssi_strictly_decreasing_beyond_reference() {
        let a = ap(-40.0, 3.1, -200.0);
        let mut prev = a.mean_rssi(&Pose2D::at(1.0, 0.0));
        for k in 1..200 {
            let cur = a.mean_rssi(&Pose2D::at(1.0 + k as f64 * 0.05, 0.0));
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn shadowing_mean_converges() {
        let a = ap(-40.0, 2.5, -200.0);
        let p = Pose2D::at(3.0, 4.0);
        let sigma = 4.0;
        let n = 20_000;
        let mut rng = seeded_stream(7, 0);
        let mean = (0..n).map(|_| rssi_at(&a, &p, sigma, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - a.mean_rssi(&p)).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn ap_spec_validation() {
        assert!(ap(-40.0, 1.4, -95.0).validate().is_err());
        assert!(ap(-40.0, 6.1, -95.0).validate().is_err());
        assert!(ap(-40.0, 2.0, -30.0).validate().is_err());
        assert!(ap(-40.0, 2.0, -40.0).validate().is_ok());
    }

    fn line(len: f64) -> Vec<Pose2D> {
        vec![Pose2D::at(0.5, 0.0), Pose2D::at(0.5, len)]
    }

    #[test]
    fn ten_meter_drive_sample_counts() {
        let rec = drive_continuous(&room(), &[ap(-40.0, 2.5, -95.0)], &line(10.0), 1.0, &SurveyConfig::default()).unwrap();
        assert_eq!(rec.odometry.len(), 1001);
        assert_eq!(rec.scans.len(), 11);
        assert_eq!(rec.odometry, rec.true_poses);
        assert_eq!(rec.true_poses.last().unwrap().pose.y, 10.0);
    }

    #[test]
    fn scan_count_matches_duration_times_rate() {
        for (len, speed, rate) in [(8.0, 0.5, 1.0), (9.0, 1.5, 2.0), (6.0, 0.25, 0.5)] {
            let cfg = SurveyConfig { scan_rate_hz: rate, ..Default::default() };
            let rec = drive_continuous(&room(), &[ap(-40.0, 2.5, -95.0)], &line(len), speed, &cfg).unwrap();
            let expected = ((len / speed) * rate).floor() as usize + 1;
            assert_eq!(rec.scans.len(), expected);
        }
    }

    #[test]
    fn drive_is_deterministic_and_noise_applies() {
        let cfg = SurveyConfig {
            shadowing_sigma_db: 2.0,
            odom_noise: OdomNoise { drift_per_meter: 0.02, jitter: 0.01 },
            rng_seed: 99,
            ..Default::default()
        };
        let aps = [ap(-40.0, 2.5, -95.0)];
        let a = drive_continuous(&room(), &aps, &line(5.0), 0.5, &cfg).unwrap();
        let b = drive_continuous(&room(), &aps, &line(5.0), 0.5, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.odometry, a.true_poses);
        let ts: Vec<f64> = a.odometry.iter().map(|s| s.t).collect();
        let tt: Vec<f64> = a.true_poses.iter().map(|s| s.t).collect();
        assert_eq!(ts, tt);
    }

    #[test]
    fn drive_rejects_bad_routes() {
        let plan = Floorplan::new(4.0, 10.0, vec![Rect::new(1.0, 4.0, 3.0, 6.0)]).unwrap();
        let aps = [ap(-40.0, 2.5, -95.0)];
        let cfg = SurveyConfig::default();
        let inside = [Pose2D::at(0.5, 0.5), Pose2D::at(2.0, 5.0)];
        assert!(matches!(
            drive_continuous(&plan, &aps, &inside, 1.0, &cfg),
            Err(Error::UnreachableWaypoint { index: 1, .. })
        ));
        let through = [Pose2D::at(2.0, 1.0), Pose2D::at(2.0, 9.0)];
        assert!(matches!(drive_continuous(&plan, &aps, &through, 1.0, &cfg), Err(Error::PathBlocked { from: 0, to: 1 })));
        let around = [Pose2D::at(0.5, 1.0), Pose2D::at(0.5, 9.0)];
        assert!(drive_continuous(&plan, &aps, &around, 1.0, &cfg).is_ok());
        assert!(drive_continuous(&plan, &aps, &around, 0.0, &cfg).is_err());
    }

    #[test]
    fn grid_point_counts() {
        assert_eq!(grid_points(&room(), 0.99).unwrap().len(), 55);
        let boxed = Floorplan::new(
            4.0,
            10.0,
            vec![Rect::new(0.5, 0.0, 4.0, 10.0), Rect::new(0.0, 0.5, 0.5, 10.0)],
        )
        .unwrap();
        assert_eq!(grid_points(&boxed, 0.99).unwrap(), vec![(0.0, 0.0)]);
        assert!(matches!(grid_points(&room(), 12.0), Err(Error::DegenerateGrid(_))));
        // Larger than one dimension only is still a valid grid.
        assert_eq!(grid_points(&room(), 5.0).unwrap().len(), 3);
    }

    #[test]
    fn dwell_multiplies_rows() {
        let ds = survey_grid(&room(), &[ap(-40.0, 2.5, -95.0)], 0.99, 3, &SurveyConfig::default()).unwrap();
        assert_eq!(ds.len(), 3 * 55);
    }

    #[test]
    fn denser_grid_has_more_points() {
        let plan = Floorplan::new(4.0, 10.0, vec![Rect::new(3.2, 4.5, 4.0, 6.0)]).unwrap();
        for s in [0.33, 0.5, 0.66, 0.99, 1.3] {
            let fine = grid_points(&plan, s).unwrap().len();
            let coarse = grid_points(&plan, 2.0 * s).unwrap().len();
            assert!(fine >= coarse, "spacing {s}");
        }
    }

    #[test]
    fn segment_clipping() {
        let r = Rect::new(1.0, 1.0, 2.0, 2.0);
        assert!(r.intersects_segment((0.0, 1.5), (3.0, 1.5)));
        assert!(r.intersects_segment((0.0, 0.0), (3.0, 3.0)));
        assert!(!r.intersects_segment((0.0, 0.0), (0.9, 3.0)));
        assert!(!r.intersects_segment((0.0, 2.5), (3.0, 2.5)));
        assert!(r.intersects_segment((1.5, 1.5), (1.5, 1.6)));
    }
}
