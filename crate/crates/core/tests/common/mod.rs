//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the crate's solver paths: utilities are evaluated
//! from their defining formula and optima are found by direct search.

#![allow(dead_code)]

/// `U(q) = −k(q − s)²` for a single coordinate.
pub fn quadratic_value(q: f64, target: f64, scale: f64) -> f64 {
    -scale * (q - target).powi(2)
}

/// Best allocation found by searching the constraint line `Σ q_i = capacity`.
pub struct GridOptimum {
    pub allocations: Vec<f64>,
    pub welfare: f64,
    pub pitch: f64,
}

/// Coarse-to-fine grid search over the free coordinates `q_1 … q_{N−1}`
/// (the last user takes the remainder), refined until the grid pitch is
/// below `final_pitch`. Each level evaluates a `points^{N−1}` grid centred
/// on the previous best point with half-width two pitches of the previous
/// level, which keeps the maximiser of a concave objective inside the grid.
pub fn grid_argmax(targets: &[f64], scales: &[f64], capacity: f64, final_pitch: f64) -> GridOptimum {
    let n = targets.len();
    assert!(n >= 1 && n == scales.len());
    let welfare = |free: &[f64]| -> f64 {
        let last = capacity - free.iter().sum::<f64>();
        free.iter()
            .chain(std::iter::once(&last))
            .zip(targets.iter().zip(scales))
            .map(|(q, (s, k))| quadratic_value(*q, *s, *k))
            .sum()
    };
    if n == 1 {
        return GridOptimum {
            allocations: vec![capacity],
            welfare: welfare(&[]),
            pitch: 0.0,
        };
    }
    let dim = n - 1;
    let points: usize = match dim {
        1 => 201,
        2 => 41,
        _ => 17,
    };
    let span = 2.0 * (capacity.abs() + targets.iter().map(|s| s.abs()).sum::<f64>()) + 1.0;
    let mut center = vec![capacity / n as f64; dim];
    let mut half = span;
    let mut best = (welfare(&center), center.clone());
    loop {
        let pitch = 2.0 * half / (points - 1) as f64;
        let mut idx = vec![0usize; dim];
        loop {
            let x: Vec<f64> = idx.iter().zip(&center).map(|(&i, c)| c - half + pitch * i as f64).collect();
            let w = welfare(&x);
            if w > best.0 {
                best = (w, x);
            }
            let mut k = 0;
            while k < dim {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        center = best.1.clone();
        if pitch < final_pitch {
            let last = capacity - center.iter().sum::<f64>();
            let mut allocations = center;
            allocations.push(last);
            return GridOptimum {
                allocations,
                welfare: best.0,
                pitch,
            };
        }
        half = 2.0 * pitch;
    }
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
