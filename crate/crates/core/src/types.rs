//! Domain types shared by every stage of the pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Robot pose in the map frame. Heading never leaves the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading: wrap_angle(heading) }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self { x, y, heading: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdometrySample {
    pub t: f64,
    pub pose: Pose2D,
}

/// MAC-style access point identifier, `aa:bb:cc:00:11:22`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ApId(String);

impl ApId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Builds an id from six raw octets.
    pub fn from_octets(octets: [u8; 6]) -> Self {
        let s = octets.iter().map(|o| format!("{o:02x}")).collect::<Vec<_>>().join(":");
        ApId(s)
    }

    pub fn octets(&self) -> [u8; 6] {
        let mut out = [0u8; 6];
        for (slot, pair) in out.iter_mut().zip(self.0.split(':')) {
            *slot = u8::from_str_radix(pair, 16).expect("validated at construction");
        }
        out
    }
}

impl FromStr for ApId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidApId(s.to_string());
        if s.len() != 17 {
            return Err(bad());
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(bad());
        }
        for p in parts {
            let ok = p.len() == 2
                && p.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
            if !ok {
                return Err(bad());
            }
        }
        Ok(ApId(s.to_string()))
    }
}

impl TryFrom<String> for ApId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ApId> for String {
    fn from(id: ApId) -> String {
        id.0
    }
}

impl fmt::Display for ApId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One WiFi scan: RSSI in dBm per visible access point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WifiScan {
    pub t: f64,
    #[serde(rename = "rssi")]
    pub readings: BTreeMap<ApId, f64>,
}

impl WifiScan {
    pub fn new(t: f64, readings: BTreeMap<ApId, f64>) -> Self {
        Self { t, readings }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::NonFinite(format!("scan timestamp {}", self.t)));
        }
        if let Some((id, v)) = self.readings.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("rssi {v} for {id}")));
        }
        Ok(())
    }
}

/// One reference point: position plus RSSI per dataset column.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub rssi: Vec<Option<f64>>,
}

/// Aligned fingerprint table. Column order is the model input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FingerprintDataset {
    pub ap_columns: Vec<ApId>,
    pub rows: Vec<FingerprintRow>,
}

impl FingerprintDataset {
    pub fn new(ap_columns: Vec<ApId>, rows: Vec<FingerprintRow>) -> Result<Self> {
        let ds = Self { ap_columns, rows };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let unique: BTreeSet<&ApId> = self.ap_columns.iter().collect();
        if unique.len() != self.ap_columns.len() {
            return Err(Error::InvalidConfig("duplicate AP column".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.rssi.len() != self.ap_columns.len() {
                return Err(Error::Schema {
                    index: i,
                    msg: format!("{} rssi slots for {} columns", row.rssi.len(), self.ap_columns.len()),
                });
            }
        }
        if let Some(i) = self.rows.windows(2).position(|w| w[1].t < w[0].t) {
            return Err(Error::NonMonotonic(i + 1));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, ap: &ApId) -> Option<usize> {
        self.ap_columns.iter().position(|c| c == ap)
    }

    /// Copy of the dataset restricted to the given row indices, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> FingerprintDataset {
        FingerprintDataset {
            ap_columns: self.ap_columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// A scan tagged with the position it was taken at. Grid surveys and
/// held-out test scans use this form, since their positions are logged
/// directly rather than recovered by alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatedScan {
    pub x: f64,
    pub y: f64,
    pub scan: WifiScan,
}

/// Canonical column order: lexicographic by identifier string.
pub fn canonical_ap_order<'a, I>(ids: I) -> Result<Vec<ApId>>
where
    I: IntoIterator<Item = &'a ApId>,
{
    let set: BTreeSet<&ApId> = ids.into_iter().collect();
    if set.is_empty() {
        return Err(Error::NoAccessPoints);
    }
    Ok(set.into_iter().cloned().collect())
}
