//! Localization metrics, reference-point density ablation and
//! ground-truth consistency.
//!
//! Per-sample error is the Euclidean distance between predicted and true
//! position; MAE is its mean and RMSE the root of its mean square.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::cell_index;
use crate::error::{Error, Result};
use crate::localizer::{predict_dataset, split_indices, train, TrainConfig};
use crate::scalar::Scalar;
use crate::simulator::seeded_stream;
use crate::types::FingerprintDataset;

/// Stratification cell edge used by the ablation subsampler.
pub const STRATIFY_CELL_M: f64 = 0.66;

/// Share of the dataset held out for testing in the ablation.
pub const ABLATION_TEST_FRACTION: f64 = 0.2;

const STREAM_SUBSAMPLE: u64 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<F> {
    pub rmse: F,
    pub mae: F,
    pub n_test: usize,
    pub rp_count: usize,
    pub rp_per_m2: f64,
    pub per_sample_errors: Vec<F>,
}

impl<F: Scalar> EvalReport<F> {
    pub fn with_density(mut self, rp_count: usize, area_m2: f64) -> Self {
        self.rp_count = rp_count;
        self.rp_per_m2 = if area_m2 > 0.0 { rp_count as f64 / area_m2 } else { 0.0 };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl<F: Scalar> fmt::Display for EvalReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "error metric : euclidean distance per sample (m)")?;
        writeln!(f, "{:<12} {:>10.4}", "rmse_m", self.rmse.to_f64_lossy())?;
        writeln!(f, "{:<12} {:>10.4}", "mae_m", self.mae.to_f64_lossy())?;
        writeln!(f, "{:<12} {:>10}", "n_test", self.n_test)?;
        writeln!(f, "{:<12} {:>10}", "rp_count", self.rp_count)?;
        write!(f, "{:<12} {:>10.4}", "rp_per_m2", self.rp_per_m2)
    }
}

/// RMSE and MAE of 2D predictions against truths.
pub fn metrics<F: Scalar>(predictions: &[(F, F)], truths: &[(F, F)]) -> Result<EvalReport<F>> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(Error::LengthMismatch(predictions.len(), truths.len()));
    }
    let errors: Vec<F> = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p.0 - t.0).hypot(p.1 - t.1))
        .collect();
    let n = F::from_usize_lossy(errors.len());
    let mae = errors.iter().fold(F::zero(), |a, &e| a + e) / n;
    let rmse = (errors.iter().fold(F::zero(), |a, &e| a + e * e) / n).sqrt();
    Ok(EvalReport { rmse, mae, n_test: errors.len(), rp_count: 0, rp_per_m2: 0.0, per_sample_errors: errors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rp_per_m2: f64,
    pub rp_per_s: f64,
}

pub fn density(rows: usize, area_m2: f64, duration_s: f64) -> Result<DensityReport> {
    if !(area_m2 > 0.0 && duration_s > 0.0) {
        return Err(Error::InvalidConfig("area and duration must be positive".into()));
    }
    Ok(DensityReport { rp_per_m2: rows as f64 / area_m2, rp_per_s: rows as f64 / duration_s })
}

/// Reference points per square meter and per second of survey.
pub fn density_report(ds: &FingerprintDataset, area_m2: f64, duration_s: f64) -> Result<DensityReport> {
    density(ds.len(), area_m2, duration_s)
}

/// Trains on `train_ds` and scores on `test_ds`.
pub fn train_and_evaluate<F: Scalar>(
    train_ds: &FingerprintDataset,
    test_ds: &FingerprintDataset,
    cfg: &TrainConfig,
) -> Result<EvalReport<F>> {
    let (model, _) = train::<F>(train_ds, cfg)?;
    let preds: Vec<(F, F)> = predict_dataset(&model, test_ds)?
        .into_iter()
        .map(|(x, y)| (F::from_f64_lossy(x), F::from_f64_lossy(y)))
        .collect();
    let truths: Vec<(F, F)> = test_ds.rows.iter().map(|r| (F::from_f64_lossy(r.x), F::from_f64_lossy(r.y))).collect();
    Ok(metrics(&preds, &truths)?.with_density(train_ds.len(), 0.0))
}

/// Fixed train/test split used by the ablation, in original row order.
pub fn holdout_split(ds: &FingerprintDataset, seed: u64) -> (FingerprintDataset, FingerprintDataset) {
    let (mut train_idx, mut test_idx) = split_indices(ds.len(), ABLATION_TEST_FRACTION, seed);
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    (ds.select_rows(&train_idx), ds.select_rows(&test_idx))
}

/// Spatially stratified subsample of `ds`: rows are grouped into square
/// cells and each cell keeps `floor` or `ceil` of `fraction` of its rows,
/// with the leftover quota going to the cells with the largest remainders.
/// Returns row indices in ascending order.
pub fn stratified_subsample(ds: &FingerprintDataset, fraction: f64, cell_size: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("fraction {fraction} outside (0, 1]")));
    }
    if fraction == 1.0 {
        return Ok((0..ds.len()).collect());
    }
    let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.rows.iter().enumerate() {
        cells.entry(cell_index(r.x, r.y, (0.0, 0.0), cell_size)).or_default().push(i);
    }
    let target = (ds.len() as f64 * fraction).round() as usize;

    let mut quotas: Vec<(usize, f64)> = cells
        .values()
        .map(|rows| {
            let exact = rows.len() as f64 * fraction;
            (exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.0).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    // Largest remainder first, stable on cell order.
    order.sort_by(|&a, &b| quotas[b].1.total_cmp(&quotas[a].1));
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        if quotas[c].1 > 0.0 {
            quotas[c].0 += 1;
        }
    }

    let mut rng = seeded_stream(seed, STREAM_SUBSAMPLE);
    let mut picked = Vec::with_capacity(target);
    for (rows, (quota, _)) in cells.values().zip(&quotas) {
        let mut rows = rows.clone();
        rows.shuffle(&mut rng);
        picked.extend_from_slice(&rows[..*quota]);
    }
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub fraction: f64,
    pub rp_count: usize,
    pub mean_mae: f64,
    pub mean_rmse: f64,
    pub per_seed_mae: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub n_test: usize,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, fraction: f64) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.fraction == fraction)
    }
}

impl fmt::Display for AblationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>10} {:>10} {:>10}", "fraction", "rp_count", "mae_m", "rmse_m", "mae_ratio")?;
        let base = self.row(1.0).or(self.rows.first()).map_or(f64::NAN, |r| r.mean_mae);
        for r in &self.rows {
            writeln!(
                f,
                "{:>8.3} {:>8} {:>10.4} {:>10.4} {:>10.3}",
                r.fraction,
                r.rp_count,
                r.mean_mae,
                r.mean_rmse,
                r.mean_mae / base
            )?;
        }
        write!(f, "test points: {}", self.n_test)
    }
}

/// Reference-point density ablation.
///
/// A test split is held out once (seeded by `cfg.rng_seed`); for every
/// fraction and seed the remaining rows are stratified-subsampled, a model
/// is trained with that seed, and MAE on the fixed test split is averaged
/// over seeds.
pub fn ablate<F: Scalar>(
    ds: &FingerprintDataset,
    fractions: &[f64],
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<AblationTable> {
    if seeds.is_empty() || fractions.is_empty() {
        return Err(Error::InvalidConfig("need at least one fraction and one seed".into()));
    }
    let (train_ds, test_ds) = holdout_split(ds, cfg.rng_seed);
    let mut subsets = Vec::new();
    for &fraction in fractions {
        for &seed in seeds {
            let idx = stratified_subsample(&train_ds, fraction, STRATIFY_CELL_M, seed)?;
            let n_fit = idx.len() - ((idx.len() as f64 * cfg.val_fraction).round() as usize).max(1);
            if idx.len() < 10 || n_fit < cfg.batch_size {
                return Err(Error::InsufficientData(format!(
                    "fraction {fraction} leaves {} rows, below batch size {}",
                    idx.len(),
                    cfg.batch_size
                )));
            }
            subsets.push((fraction, seed, idx));
        }
    }

    let results: Vec<Result<(f64, usize, EvalReport<F>)>> = subsets
        .par_iter()
        .map(|(fraction, seed, idx)| {
            let sub = train_ds.select_rows(idx);
            let run_cfg = TrainConfig { rng_seed: *seed, ..cfg.clone() };
            train_and_evaluate::<F>(&sub, &test_ds, &run_cfg).map(|r| (*fraction, idx.len(), r))
        })
        .collect();

    let mut rows = Vec::with_capacity(fractions.len());
    let mut results = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
    for &fraction in fractions {
        let runs: Vec<_> = results.by_ref().take(seeds.len()).collect();
        let per_seed_mae: Vec<f64> = runs.iter().map(|r| r.2.mae.to_f64_lossy()).collect();
        let k = runs.len() as f64;
        rows.push(AblationRow {
            fraction,
            rp_count: runs.iter().map(|r| r.1).max().unwrap_or(0),
            mean_mae: per_seed_mae.iter().sum::<f64>() / k,
            mean_rmse: runs.iter().map(|r| r.2.rmse.to_f64_lossy()).sum::<f64>() / k,
            per_seed_mae,
        });
    }
    Ok(AblationTable { n_test: test_ds.len(), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub mean_abs_rssi_diff_db: f64,
    pub compared_rps: usize,
    pub mean_neighbor_distance_m: f64,
}

/// Mean |RSSI difference| between each grid reference point and its
/// nearest robot-survey row, over APs present in both rows.
///
/// Grid points sharing no present AP with their neighbour are skipped.
pub fn ground_truth_consistency(robot: &FingerprintDataset, grid: &FingerprintDataset) -> Result<ConsistencyReport> {
    if robot.is_empty() || grid.is_empty() {
        return Err(Error::InsufficientData("both datasets must be non-empty".into()));
    }
    let shared: Vec<(usize, usize)> = grid
        .ap_columns
        .iter()
        .enumerate()
        .filter_map(|(gi, id)| robot.column_index(id).map(|ri| (gi, ri)))
        .collect();
    if shared.is_empty() {
        return Err(Error::NoSharedAps);
    }

    let mut total = 0.0;
    let mut dist_total = 0.0;
    let mut compared = 0usize;
    for g in &grid.rows {
        let (nearest, dist) = robot
            .rows
            .iter()
            .map(|r| (r.x - g.x).hypot(r.y - g.y))
            .enumerate()
            .fold((0usize, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best });
        let r = &robot.rows[nearest];
        let diffs: Vec<f64> = shared
            .iter()
            .filter_map(|&(gi, ri)| match (g.rssi[gi], r.rssi[ri]) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            })
            .collect();
        if !diffs.is_empty() {
            total += diffs.iter().sum::<f64>() / diffs.len() as f64;
            dist_total += dist;
            compared += 1;
        }
    }
    if compared == 0 {
        return Err(Error::NoSharedAps);
    }
    Ok(ConsistencyReport {
        mean_abs_rssi_diff_db: total / compared as f64,
        compared_rps: compared,
        mean_neighbor_distance_m: dist_total / compared as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ApId, FingerprintRow};
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let p = [(1.0, 2.0), (3.0, 4.0)];
        let r = metrics(&p, &p).unwrap();
        assert_eq!((r.rmse, r.mae), (0.0, 0.0));
    }

    #[test]
    fn three_and_four_meter_errors() {
        let preds = [(3.0, 0.0), (0.0, 4.0)];
        let truths = [(0.0, 0.0), (0.0, 0.0)];
        let r = metrics(&preds, &truths).unwrap();
        assert_eq!(r.mae, 3.5);
        assert!((r.rmse - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.per_sample_errors, vec![3.0, 4.0]);
    }

    #[test]
    fn metrics_reject_bad_lengths() {
        assert!(metrics::<f64>(&[], &[]).is_err());
        assert!(metrics(&[(0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn density_examples() {
        let d = density(320, 40.0, 320.0).unwrap();
        assert_eq!((d.rp_per_m2, d.rp_per_s), (8.0, 1.0));
        let b = density(23, 40.0, 656.0).unwrap();
        assert_eq!(b.rp_per_m2, 0.575);
        assert!((b.rp_per_s - 0.0351).abs() < 5e-5);
        assert_eq!(density(0, 40.0, 1.0).unwrap(), DensityReport { rp_per_m2: 0.0, rp_per_s: 0.0 });
    }

    fn grid_ds(n_side: usize, per_cell: usize) -> FingerprintDataset {
        let id = ApId::from_octets([1, 2, 3, 4, 5, 6]);
        let mut rows = Vec::new();
        let mut t = 0.0;
        for i in 0..n_side {
            for j in 0..n_side {
                for k in 0..per_cell {
                    t += 1.0;
                    let off = 0.05 * k as f64 / per_cell as f64;
                    rows.push(FingerprintRow {
                        t,
                        x: i as f64 * 0.66 + 0.1 + off,
                        y: j as f64 * 0.66 + 0.1,
                        rssi: vec![Some(-50.0 - k as f64)],
                    });
                }
            }
        }
        FingerprintDataset::new(vec![id], rows).unwrap()
    }

    #[test]
    fn subsample_is_stratified() {
        let ds = {
            let mut d = grid_ds(4, 5);
            // uneven cell populations
            d.rows.truncate(d.rows.len() - 3);
            d
        };
        let full: BTreeMap<(i64, i64), usize> = ds.rows.iter().fold(BTreeMap::new(), |mut m, r| {
            *m.entry(cell_index(r.x, r.y, (0.0, 0.0), STRATIFY_CELL_M)).or_insert(0) += 1;
            m
        });
        let idx = stratified_subsample(&ds, 0.5, STRATIFY_CELL_M, 3).unwrap();
        assert_eq!(idx.len(), (ds.len() as f64 * 0.5).round() as usize);
        let mut half: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for &i in &idx {
            let r = &ds.rows[i];
            *half.entry(cell_index(r.x, r.y, (0.0, 0.0), STRATIFY_CELL_M)).or_insert(0) += 1;
        }
        for (cell, n) in full {
            let got = *half.get(&cell).unwrap_or(&0) as f64;
            assert!((got - n as f64 / 2.0).abs() <= 1.0, "{cell:?}");
        }
        assert_eq!(stratified_subsample(&ds, 1.0, STRATIFY_CELL_M, 3).unwrap(), (0..ds.len()).collect::<Vec<_>>());
        assert!(stratified_subsample(&ds, 0.0, STRATIFY_CELL_M, 3).is_err());
    }

    #[test]
    fn consistency_with_self_is_zero() {
        let ds = grid_ds(3, 1);
        let r = ground_truth_consistency(&ds, &ds).unwrap();
        assert_eq!(r.mean_abs_rssi_diff_db, 0.0);
        assert_eq!(r.compared_rps, 9);
    }

    #[test]
    fn consistency_requires_shared_aps() {
        let a = grid_ds(2, 1);
        let mut b = a.clone();
        b.ap_columns = vec![ApId::from_octets([9; 6])];
        assert!(matches!(ground_truth_consistency(&a, &b), Err(Error::NoSharedAps)));
    }

    proptest! {
        #[test]
        fn rmse_dominates_mae(pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 1..50)) {
            let p: Vec<(f64, f64)> = pts.iter().map(|v| (v.0, v.1)).collect();
            let t: Vec<(f64, f64)> = pts.iter().map(|v| (v.2, v.3)).collect();
            let r = metrics(&p, &t).unwrap();
            prop_assert!(r.rmse >= r.mae * (1.0 - 1e-12));
            prop_assert!(r.mae >= 0.0);
        }

        #[test]
        fn metrics_translation_invariant(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 1..30),
            dx in -50.0f64..50.0,
            dy in -50.0f64..50.0,
        ) {
            let p: Vec<(f64, f64)> = pts.iter().map(|v| (v.0, v.1)).collect();
            let t: Vec<(f64, f64)> = pts.iter().map(|v| (v.2, v.3)).collect();
            let a = metrics(&p, &t).unwrap();
            let shift = |v: &Vec<(f64, f64)>| v.iter().map(|q| (q.0 + dx, q.1 + dy)).collect::<Vec<_>>();
            let b = metrics(&shift(&p), &shift(&t)).unwrap();
            prop_assert!((a.mae - b.mae).abs() < 1e-9);
            prop_assert!((a.rmse - b.rmse).abs() < 1e-9);
        }
    }
}
