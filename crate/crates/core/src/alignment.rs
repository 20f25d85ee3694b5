//! Dynamic time warping between scan and odometry timestamp streams.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{OdometrySample, WifiScan};

/// Accumulated-cost matrix of size `(n + 1) x (m + 1)`, row-major.
///
/// Row 0 and column 0 are `+inf` except the origin, which is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwCostMatrix<T> {
    n: usize,
    m: usize,
    cells: Vec<T>,
}

impl<T: Scalar> DtwCostMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.cells[i * (self.m + 1) + j]
    }

    /// `C[n][m]`, the cost of the optimal warping path.
    pub fn total_cost(&self) -> T {
        self.get(self.n, self.m)
    }
}

/// Fills the DTW accumulated-cost matrix for `a` against `b`.
pub fn dtw<A, B, T, F>(a: &[A], b: &[B], mut local_cost: F) -> Result<DtwCostMatrix<T>>
where
    T: Scalar,
    F: FnMut(&A, &B) -> T,
{
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut cells = vec![T::infinity(); (n + 1) * width];
    cells[0] = T::zero();
    for i in 1..=n {
        let (prev, cur) = cells.split_at_mut(i * width);
        let prev = &prev[(i - 1) * width..];
        let cur = &mut cur[..width];
        let ai = &a[i - 1];
        for j in 1..=m {
            let best = prev[j].min(cur[j - 1]).min(prev[j - 1]);
            cur[j] = local_cost(ai, &b[j - 1]) + best;
        }
    }
    Ok(DtwCostMatrix { n, m, cells })
}

fn check_increasing<T: Scalar>(ts: &[T]) -> Result<()> {
    if let Some(i) = ts.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("timestamp at index {i}")));
    }
    match ts.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::NonMonotonic(i + 1)),
        None => Ok(()),
    }
}

/// DTW over two strictly increasing timestamp sequences with cost `|a - b|`.
pub fn dtw_timestamps<T: Scalar>(a: &[T], b: &[T]) -> Result<DtwCostMatrix<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_increasing(a)?;
    check_increasing(b)?;
    dtw(a, b, |x, y| (*x - *y).abs())
}

/// Optimal warping path from `(1, 1)` to `(n, m)`, 1-based.
///
/// Walks back from `(n, m)` to the cheapest predecessor; ties prefer the
/// diagonal, then `(i - 1, j)`, then `(i, j - 1)`.
pub fn backtrack<T: Scalar>(c: &DtwCostMatrix<T>) -> Vec<(usize, usize)> {
    let (mut i, mut j) = (c.n, c.m);
    let mut path = Vec::with_capacity(c.n + c.m);
    path.push((i, j));
    while (i, j) != (1, 1) {
        let diag = c.get(i - 1, j - 1);
        let up = c.get(i - 1, j);
        let left = c.get(i, j - 1);
        // Row 0 and column 0 hold +inf, so the boundary walks itself.
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    path
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub total_cost: f64,
    /// Warping path, 1-based `(scan, odometry)` indices.
    pub path: Vec<(usize, usize)>,
    /// One `(scan_index, odometry_index)` pair per scan, 0-based.
    pub matches: Vec<(usize, usize)>,
    /// Scans timestamped outside the odometry span; they are matched to the
    /// boundary sample and kept.
    pub out_of_span: Vec<usize>,
}

impl AlignmentResult {
    /// Largest `|t_scan - t_odometry|` over all matches.
    pub fn max_time_gap(&self, scans: &[WifiScan], odometry: &[OdometrySample]) -> f64 {
        self.matches
            .iter()
            .map(|&(s, o)| (scans[s].t - odometry[o].t).abs())
            .fold(0.0, f64::max)
    }
}

/// Pairs every scan with an odometry sample through DTW on timestamps.
///
/// Among the odometry samples the warping path assigns to a scan, the one
/// closest in time wins (earliest on ties).
pub fn match_scans(scans: &[WifiScan], odometry: &[OdometrySample]) -> Result<AlignmentResult> {
    let a: Vec<f64> = scans.iter().map(|s| s.t).collect();
    let b: Vec<f64> = odometry.iter().map(|s| s.t).collect();
    let cost = dtw_timestamps(&a, &b)?;
    let path = backtrack(&cost);

    let mut matches: Vec<(usize, usize)> = Vec::with_capacity(a.len());
    let mut best_gap = f64::INFINITY;
    for &(i, j) in &path {
        let (si, oj) = (i - 1, j - 1);
        let gap = (a[si] - b[oj]).abs();
        match matches.last_mut() {
            Some(last) if last.0 == si => {
                if gap < best_gap {
                    *last = (si, oj);
                    best_gap = gap;
                }
            }
            _ => {
                matches.push((si, oj));
                best_gap = gap;
            }
        }
    }
    debug_assert_eq!(matches.len(), a.len());

    let (lo, hi) = (b[0], b[b.len() - 1]);
    let out_of_span = a.iter().enumerate().filter(|(_, &t)| t < lo || t > hi).map(|(i, _)| i).collect();

    Ok(AlignmentResult { total_cost: cost.total_cost(), path, matches, out_of_span })
}
