//! File formats: fingerprint CSV, scan log JSONL, odometry CSV, grid
//! ground-truth JSON and heatmap CSV.
//!
//! Floats are written in their shortest round-trip form, padded to a
//! minimum number of decimals, so a second serialization of a parsed file
//! is byte-identical to the first.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::HeatmapGrid;
use crate::error::{Error, Result};
use crate::types::{ApId, FingerprintDataset, FingerprintRow, LocatedScan, OdometrySample, Pose2D, WifiScan};

pub const FINGERPRINT_HEADER: [&str; 3] = ["timestamp", "x_pos", "y_pos"];
pub const ODOMETRY_HEADER: [&str; 4] = ["t", "x", "y", "theta"];
pub const MISSING: &str = "NaN";

/// Shortest round-trip decimal form of `v` with at least `min_decimals`
/// digits after the point.
pub fn format_float(v: f64, min_decimals: usize) -> String {
    let mut s = format!("{v}");
    if !v.is_finite() {
        return s;
    }
    let decimals = match s.find('.') {
        Some(p) => s.len() - p - 1,
        None => {
            if min_decimals > 0 {
                s.push('.');
            }
            0
        }
    };
    for _ in decimals..min_decimals {
        s.push('0');
    }
    s
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(source)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse { line, msg: e.to_string() }
}

fn parse_finite(cell: &str, line: u64, what: &str) -> Result<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse { line, msg: format!("non-numeric {what} {cell:?}") }),
    }
}

pub fn write_fingerprint_csv<W: Write>(ds: &FingerprintDataset, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    let header: Vec<&str> = FINGERPRINT_HEADER.iter().copied().chain(ds.ap_columns.iter().map(ApId::as_str)).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, row) in ds.rows.iter().enumerate() {
        if ![row.t, row.x, row.y].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("row {i} timestamp/position")));
        }
        let mut cells = vec![format_float(row.t, 4), format_float(row.x, 4), format_float(row.y, 4)];
        for v in &row.rssi {
            cells.push(match v {
                Some(v) if v.is_finite() => format_float(*v, 1),
                Some(v) => return Err(Error::NonFinite(format!("row {i} rssi {v}"))),
                None => MISSING.to_string(),
            });
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fingerprint_csv<R: Read>(source: R) -> Result<FingerprintDataset> {
    let mut records = csv_reader(source).into_records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
    };
    let line = header.position().map_or(1, |p| p.line());
    if header.len() < 3 || header.iter().take(3).ne(FINGERPRINT_HEADER) {
        return Err(Error::Parse { line, msg: format!("malformed header, expected {}", FINGERPRINT_HEADER.join(",")) });
    }
    let ap_columns = header
        .iter()
        .skip(3)
        .map(|h| h.parse::<ApId>().map_err(|_| Error::Parse { line, msg: format!("bad AP column {h:?}") }))
        .collect::<Result<Vec<_>>>()?;
    let width = header.len();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Error::Parse { line, msg: format!("ragged row: {} cells, expected {width}", rec.len()) });
        }
        let t = parse_finite(&rec[0], line, "timestamp")?;
        let x = parse_finite(&rec[1], line, "x_pos")?;
        let y = parse_finite(&rec[2], line, "y_pos")?;
        let rssi = rec
            .iter()
            .skip(3)
            .map(|c| if c == MISSING { Ok(None) } else { parse_finite(c, line, "rssi").map(Some) })
            .collect::<Result<Vec<_>>>()?;
        rows.push(FingerprintRow { t, x, y, rssi });
    }
    let ds = FingerprintDataset { ap_columns, rows };
    ds.validate().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok(ds)
}

pub fn write_scan_log<W: Write>(scans: &[WifiScan], sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    for (i, s) in scans.iter().enumerate() {
        s.validate().map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
        serde_json::to_writer(&mut w, s).map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan_log<R: Read>(source: R) -> Result<Vec<WifiScan>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let scan: WifiScan = serde_json::from_str(&line).map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
        scan.validate().map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
        out.push(scan);
    }
    Ok(out)
}

pub fn write_odometry_csv<W: Write>(samples: &[OdometrySample], sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "{}", ODOMETRY_HEADER.join(","))?;
    for s in samples {
        let p = &s.pose;
        writeln!(w, "{},{},{},{}", format_float(s.t, 0), format_float(p.x, 0), format_float(p.y, 0), format_float(p.heading, 0))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_odometry_csv<R: Read>(source: R) -> Result<Vec<OdometrySample>> {
    let mut records = csv_reader(source).into_records();
    match records.next() {
        Some(h) => {
            let h = h.map_err(csv_err)?;
            if h.iter().ne(ODOMETRY_HEADER) {
                return Err(Error::Parse { line: 1, msg: format!("malformed header, expected {}", ODOMETRY_HEADER.join(",")) });
            }
        }
        None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
    }
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(Error::Parse { line, msg: format!("ragged row: {} cells, expected 4", rec.len()) });
        }
        let v: Vec<f64> = ODOMETRY_HEADER
            .iter()
            .zip(rec.iter())
            .map(|(name, c)| parse_finite(c, line, name))
            .collect::<Result<_>>()?;
        out.push(OdometrySample { t: v[0], pose: Pose2D { x: v[1], y: v[2], heading: v[3] } });
    }
    Ok(out)
}

pub fn write_grid_truth<W: Write>(scans: &[LocatedScan], sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    for (i, s) in scans.iter().enumerate() {
        s.scan.validate().map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
    }
    serde_json::to_writer_pretty(&mut w, scans).map_err(|e| Error::Schema { index: 0, msg: e.to_string() })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_grid_truth<R: Read>(source: R) -> Result<Vec<LocatedScan>> {
    let values: Vec<serde_json::Value> =
        serde_json::from_reader(source).map_err(|e| Error::Schema { index: 0, msg: e.to_string() })?;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let s: LocatedScan = serde_json::from_value(v).map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
            s.scan.validate().map_err(|e| Error::Schema { index: i, msg: e.to_string() })?;
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::Schema { index: i, msg: "non-finite location".into() });
            }
            Ok(s)
        })
        .collect()
}

pub fn write_heatmap_csv<W: Write>(grid: &HeatmapGrid, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "col,row,center_x,center_y,mean_rssi,count")?;
    for (&(col, row), cell) in &grid.cells {
        let (cx, cy) = grid.cell_center(col, row);
        writeln!(
            w,
            "{col},{row},{},{},{},{}",
            format_float(cx, 4),
            format_float(cy, 4),
            format_float(cell.mean_rssi, 1),
            cell.sample_count
        )?;
    }
    w.flush()?;
    Ok(())
}

macro_rules! path_helpers {
    ($($save:ident / $load:ident => $write:ident, $read:ident, $t:ty;)*) => {$(
        pub fn $save(value: &$t, path: impl AsRef<Path>) -> Result<()> {
            $write(value, File::create(path)?)
        }

        pub fn $load(path: impl AsRef<Path>) -> Result<<$t as ToOwned>::Owned> {
            $read(File::open(path)?)
        }
    )*};
}

path_helpers! {
    save_fingerprint_csv / load_fingerprint_csv => write_fingerprint_csv, read_fingerprint_csv, FingerprintDataset;
    save_scan_log / load_scan_log => write_scan_log, read_scan_log, [WifiScan];
    save_odometry_csv / load_odometry_csv => write_odometry_csv, read_odometry_csv, [OdometrySample];
    save_grid_truth / load_grid_truth => write_grid_truth, read_grid_truth, [LocatedScan];
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn id(s: &str) -> ApId {
        s.parse().unwrap()
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0, 4), "0.0000");
        assert_eq!(format_float(1707935831.6001, 4), "1707935831.6001");
        assert_eq!(format_float(-66.0, 1), "-66.0");
        assert_eq!(format_float(0.1 + 0.2, 4), "0.30000000000000004");
        assert_eq!(format_float(3.0, 0), "3");
    }

    #[test]
    fn table_row_layout() {
        let ds = FingerprintDataset::new(
            vec![id("aa:00:00:00:00:01"), id("aa:00:00:00:00:02")],
            vec![FingerprintRow { t: 1707935831.6001, x: 0.0, y: 0.0, rssi: vec![Some(-66.0), None] }],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_fingerprint_csv(&ds, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "timestamp,x_pos,y_pos,aa:00:00:00:00:01,aa:00:00:00:00:02\n1707935831.6001,0.0000,0.0000,-66.0,NaN\n"
        );
    }

    #[test]
    fn empty_dataset_header_only() {
        let mut buf = Vec::new();
        write_fingerprint_csv(&FingerprintDataset::default(), &mut buf).unwrap();
        assert_eq!(buf, b"timestamp,x_pos,y_pos\n");
        assert_eq!(read_fingerprint_csv(&buf[..]).unwrap(), FingerprintDataset::default());
    }

    #[test]
    fn csv_errors_name_line() {
        let bad_header = "time,x,y\n";
        assert!(matches!(read_fingerprint_csv(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let ragged = "timestamp,x_pos,y_pos,aa:00:00:00:00:01\n0.0,0.0,0.0,-50.0\n1.0,0.0,0.0\n";
        assert!(matches!(read_fingerprint_csv(ragged.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let text = "timestamp,x_pos,y_pos,aa:00:00:00:00:01\n0.0,0.0,zero,-50.0\n";
        assert!(matches!(read_fingerprint_csv(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let bad_ap = "timestamp,x_pos,y_pos,MAC_1\n";
        assert!(matches!(read_fingerprint_csv(bad_ap.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn scan_log_round_trip() {
        let mut buf = Vec::new();
        write_scan_log(&[], &mut buf).unwrap();
        assert!(buf.is_empty());
        assert!(read_scan_log(&buf[..]).unwrap().is_empty());

        let mut readings = BTreeMap::new();
        readings.insert(id("aa:00:00:00:00:01"), -66.0);
        let scans = vec![WifiScan::new(1.0, readings)];
        write_scan_log(&scans, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "{\"t\":1.0,\"rssi\":{\"aa:00:00:00:00:01\":-66.0}}\n");
        assert_eq!(read_scan_log(&buf[..]).unwrap(), scans);
    }

    #[test]
    fn scan_log_schema_errors_carry_index() {
        let text = "{\"t\":1.0,\"rssi\":{}}\n{\"t\":2.0,\"rssi\":{\"nope\":-1.0}}\n";
        assert!(matches!(read_scan_log(text.as_bytes()), Err(Error::Schema { index: 1, .. })));
    }

    #[test]
    fn odometry_round_trip() {
        let samples = vec![
            OdometrySample { t: 0.0, pose: Pose2D::new(0.1, 0.2, 0.3) },
            OdometrySample { t: 0.01, pose: Pose2D::new(1.0 / 3.0, -2.5, -3.0) },
        ];
        let mut buf = Vec::new();
        write_odometry_csv(&samples, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,x,y,theta\n"));
        assert_eq!(read_odometry_csv(&buf[..]).unwrap(), samples);
    }

    #[test]
    fn grid_truth_round_trip_and_errors() {
        let mut readings = BTreeMap::new();
        readings.insert(id("aa:00:00:00:00:01"), -61.25);
        let scans = vec![LocatedScan { x: 0.99, y: 1.98, scan: WifiScan::new(3.0, readings) }];
        let mut buf = Vec::new();
        write_grid_truth(&scans, &mut buf).unwrap();
        assert_eq!(read_grid_truth(&buf[..]).unwrap(), scans);
        let broken = "[{\"x\":0.0,\"y\":0.0,\"scan\":{\"t\":0.0,\"rssi\":{}}},{\"x\":1.0}]";
        assert!(matches!(read_grid_truth(broken.as_bytes()), Err(Error::Schema { index: 1, .. })));
    }
}
