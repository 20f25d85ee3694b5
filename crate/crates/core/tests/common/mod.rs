//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wifi_survey::{ApId, FingerprintDataset, FingerprintRow, Mlp};

/// Minimum cost over every monotone path from (0,0) to (n-1,m-1) by
/// exhaustive enumeration. Costs are summed front to back.
pub fn brute_force_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i == a.len() - 1 && j == b.len() - 1 {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Cost of a 1-based warping path.
pub fn path_cost(a: &[f64], b: &[f64], path: &[(usize, usize)]) -> f64 {
    path.iter().fold(0.0, |acc, &(i, j)| acc + (a[i - 1] - b[j - 1]).abs())
}

pub fn increasing_times(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut t = 0.0;
    (0..len)
        .map(|_| {
            t += rng.random_range(0.01..2.0);
            t
        })
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// He-initialized net with random nonzero biases so every ReLU sees both signs.
pub fn random_net(seed: u64, dims: &[usize]) -> Mlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mlp::init_with(dims[0], &dims[1..dims.len() - 1], seed).unwrap();
    for l in &mut m.layers {
        l.biases.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    m
}

/// Central finite difference of the loss with respect to every parameter.
pub fn numeric_grads(m: &Mlp, x: &Array2<f64>, y: &Array2<f64>, h: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let loss = |m: &Mlp| m.loss(x.view(), y.view()).unwrap();
    let mut out = Vec::new();
    for l in 0..m.layers.len() {
        let mut gw = Vec::new();
        for k in 0..m.layers[l].weights.len() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus.layers[l].weights.as_slice_mut().unwrap()[k] += h;
            minus.layers[l].weights.as_slice_mut().unwrap()[k] -= h;
            gw.push((loss(&plus) - loss(&minus)) / (2.0 * h));
        }
        let mut gb = Vec::new();
        for k in 0..m.layers[l].biases.len() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus.layers[l].biases[k] += h;
            minus.layers[l].biases[k] -= h;
            gb.push((loss(&plus) - loss(&minus)) / (2.0 * h));
        }
        out.push((gw, gb));
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Worst relative error between backprop and finite differences over
/// `nets` random 3-5-4-2 networks.
pub fn worst_gradient_error(nets: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..nets {
        let m = random_net(seed, &[3, 5, 4, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x = random_matrix(&mut rng, 6, 3);
        let y = random_matrix(&mut rng, 6, 2);
        let (_, g) = m.loss_and_grads(x.view(), y.view()).unwrap();
        for (l, (nw, nb)) in numeric_grads(&m, &x, &y, 1e-5).into_iter().enumerate() {
            for (a, n) in g.weights[l].iter().zip(&nw) {
                worst = worst.max(rel_err(*a, *n));
            }
            for (a, n) in g.biases[l].iter().zip(&nb) {
                worst = worst.max(rel_err(*a, *n));
            }
        }
    }
    worst
}

/// Dataset with random columns, arbitrary-precision values and gaps.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> FingerprintDataset {
    let n_ap = rng.random_range(0..6);
    let mut cols: Vec<ApId> = (0..n_ap).map(|_| ApId::from_octets(rng.random())).collect();
    cols.sort();
    cols.dedup();
    let mut t = rng.random_range(0.0..2e9);
    let rows = (0..rng.random_range(0..30))
        .map(|_| {
            t += rng.random_range(0.0..3.0);
            FingerprintRow {
                t,
                x: rng.random_range(-50.0..50.0),
                y: rng.random_range(-50.0..50.0),
                rssi: cols
                    .iter()
                    .map(|_| rng.random_bool(0.7).then(|| rng.random_range(-100.0..0.0)))
                    .collect(),
            }
        })
        .collect();
    FingerprintDataset::new(cols, rows).unwrap()
}
