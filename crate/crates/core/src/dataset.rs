//! Fingerprint dataset construction, imputation and heatmap binning.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignmentResult;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{canonical_ap_order, ApId, FingerprintDataset, FingerprintRow, LocatedScan, OdometrySample, WifiScan};

/// RSSI substituted for access points a scan did not see.
pub const DEFAULT_FILL_DBM: f64 = -100.0;

/// Default heatmap cell edge, one floor tile.
pub const DEFAULT_HEATMAP_CELL_M: f64 = 0.33;

fn rssi_slots(columns: &[ApId], scan: &WifiScan) -> Vec<Option<f64>> {
    columns.iter().map(|c| scan.readings.get(c).copied()).collect()
}

fn union_columns<'a>(scans: impl Iterator<Item = &'a WifiScan>) -> Result<Vec<ApId>> {
    let seen: BTreeSet<&ApId> = scans.flat_map(|s| s.readings.keys()).collect();
    canonical_ap_order(seen)
}

/// One row per scan, positioned at the matched odometry pose.
pub fn build_dataset(
    alignment: &AlignmentResult,
    scans: &[WifiScan],
    odometry: &[OdometrySample],
) -> Result<FingerprintDataset> {
    if alignment.matches.len() != scans.len() {
        return Err(Error::CorruptAlignment(format!(
            "{} matches for {} scans",
            alignment.matches.len(),
            scans.len()
        )));
    }
    let columns = union_columns(scans.iter())?;
    let mut rows = Vec::with_capacity(scans.len());
    for (k, &(si, oi)) in alignment.matches.iter().enumerate() {
        if si != k || oi >= odometry.len() {
            return Err(Error::CorruptAlignment(format!("match {k} -> ({si}, {oi}) out of range")));
        }
        let scan = &scans[si];
        let pose = odometry[oi].pose;
        rows.push(FingerprintRow { t: scan.t, x: pose.x, y: pose.y, rssi: rssi_slots(&columns, scan) });
    }
    FingerprintDataset::new(columns, rows)
}

/// Dataset from scans whose positions were logged directly.
pub fn dataset_from_located(scans: &[LocatedScan]) -> Result<FingerprintDataset> {
    let columns = union_columns(scans.iter().map(|s| &s.scan))?;
    let rows = scans
        .iter()
        .map(|s| FingerprintRow { t: s.scan.t, x: s.x, y: s.y, rssi: rssi_slots(&columns, &s.scan) })
        .collect();
    FingerprintDataset::new(columns, rows)
}

/// Rebuilds the located scans a dataset was made from (absent slots dropped).
pub fn located_from_dataset(ds: &FingerprintDataset) -> Vec<LocatedScan> {
    ds.rows
        .iter()
        .map(|r| {
            let readings = ds
                .ap_columns
                .iter()
                .zip(&r.rssi)
                .filter_map(|(id, v)| v.map(|v| (id.clone(), v)))
                .collect();
            LocatedScan { x: r.x, y: r.y, scan: WifiScan::new(r.t, readings) }
        })
        .collect()
}

/// Dense feature matrix (rows x APs) with absent slots set to `fill_dbm`,
/// and the `(x, y)` targets.
pub fn impute<F: Scalar>(ds: &FingerprintDataset, fill_dbm: f64) -> (Array2<F>, Array2<F>) {
    let (n, k) = (ds.rows.len(), ds.ap_columns.len());
    let features = Array2::from_shape_fn((n, k), |(i, j)| F::from_f64_lossy(ds.rows[i].rssi[j].unwrap_or(fill_dbm)));
    let targets = Array2::from_shape_fn((n, 2), |(i, j)| {
        let r = &ds.rows[i];
        F::from_f64_lossy(if j == 0 { r.x } else { r.y })
    });
    (features, targets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub mean_rssi: f64,
    pub sample_count: usize,
}

/// Mean RSSI of one AP per square cell. Cells are half-open `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub cell_size: f64,
    pub origin: (f64, f64),
    pub cells: BTreeMap<(i64, i64), HeatCell>,
}

impl HeatmapGrid {
    pub fn cell_center(&self, col: i64, row: i64) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn total_samples(&self) -> usize {
        self.cells.values().map(|c| c.sample_count).sum()
    }
}

pub fn cell_index(x: f64, y: f64, origin: (f64, f64), cell_size: f64) -> (i64, i64) {
    (((x - origin.0) / cell_size).floor() as i64, ((y - origin.1) / cell_size).floor() as i64)
}

pub fn heatmap(ds: &FingerprintDataset, ap: &ApId, cell_size: f64) -> Result<HeatmapGrid> {
    let col = ds.column_index(ap).ok_or_else(|| Error::UnknownAp(ap.to_string()))?;
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return Err(Error::InvalidConfig(format!("cell size must be positive, got {cell_size}")));
    }
    let origin = (0.0, 0.0);
    let mut acc: BTreeMap<(i64, i64), (f64, usize)> = BTreeMap::new();
    for row in &ds.rows {
        if let Some(v) = row.rssi[col] {
            let e = acc.entry(cell_index(row.x, row.y, origin, cell_size)).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let cells = acc
        .into_iter()
        .map(|(k, (sum, n))| (k, HeatCell { mean_rssi: sum / n as f64, sample_count: n }))
        .collect();
    Ok(HeatmapGrid { cell_size, origin, cells })
}
