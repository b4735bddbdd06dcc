//! Multi-dimensional complex FFTs on cubic arrays, built from cached
//! one-dimensional `rustfft` plans applied axis by axis.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Direction {
    /// physical values -> coefficients (unnormalized)
    Forward,
    /// coefficients -> physical values
    Inverse,
}

type PlanCache = HashMap<(usize, Direction), Arc<dyn Fft<f64>>>;

static PLANS: LazyLock<Mutex<(FftPlanner<f64>, PlanCache)>> =
    LazyLock::new(|| Mutex::new((FftPlanner::new(), HashMap::new())));

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut guard = PLANS.lock().expect("fft plan cache poisoned");
    let (planner, cache) = &mut *guard;
    cache
        .entry((len, dir))
        .or_insert_with(|| match dir {
            Direction::Forward => planner.plan_fft_forward(len),
            Direction::Inverse => planner.plan_fft_inverse(len),
        })
        .clone()
}

/// Columns gathered per batch along strided axes.
const TILE: usize = 16;

/// In-place unnormalized transform of an `m^dim` row-major array.
pub(crate) fn transform(data: &mut [Complex64], m: usize, dim: usize, dir: Direction) {
    transform_pruned(data, m, dim, dir, None);
}

/// As [`transform`], skipping lines that cannot matter. `support[t]` marks
/// the per-axis indices where the inverse input may be nonzero, or where the
/// forward output is read. Forward outputs off the support are left
/// unspecified.
pub(crate) fn transform_pruned(
    data: &mut [Complex64],
    m: usize,
    dim: usize,
    dir: Direction,
    support: Option<&[bool]>,
) {
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let fft = plan(m, dir);
    // Lines are skipped by their indices on earlier axes: still zero for an
    // inverse taken last axis first, never read for a forward taken first
    // axis first.
    let axes: Vec<usize> = match (dir, support) {
        (Direction::Inverse, Some(_)) => (0..dim).rev().collect(),
        _ => (0..dim).collect(),
    };
    let scratch_len = fft.get_inplace_scratch_len();
    for axis in axes {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = m * stride;
        let live = |o: usize| match support {
            None => true,
            Some(s) => {
                let mut rest = o;
                (0..axis).all(|_| {
                    let keep = s[rest % m];
                    rest /= m;
                    keep
                })
            }
        };
        if stride == 1 {
            data.par_chunks_mut(m)
                .enumerate()
                .with_min_len(64)
                .for_each_init(
                    || vec![Complex64::default(); scratch_len],
                    |scratch, (o, line)| {
                        if live(o) {
                            fft.process_with_scratch(line, scratch);
                        }
                    },
                );
        } else {
            data.par_chunks_mut(block).enumerate().for_each(|(o, chunk)| {
                if !live(o) {
                    return;
                }
                let mut buf = vec![Complex64::default(); TILE * m];
                let mut scratch = vec![Complex64::default(); scratch_len];
                let mut j0 = 0;
                while j0 < stride {
                    let w = TILE.min(stride - j0);
                    for i in 0..m {
                        let row = &chunk[i * stride + j0..i * stride + j0 + w];
                        for (t, v) in row.iter().enumerate() {
                            buf[t * m + i] = *v;
                        }
                    }
                    fft.process_with_scratch(&mut buf[..w * m], &mut scratch);
                    for i in 0..m {
                        let row = &mut chunk[i * stride + j0..i * stride + j0 + w];
                        for (t, v) in row.iter_mut().enumerate() {
                            *v = buf[t * m + i];
                        }
                    }
                    j0 += w;
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(input: &[Complex64], m: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); m * m];
        let w = -2.0 * std::f64::consts::PI / m as f64;
        for k0 in 0..m {
            for k1 in 0..m {
                let mut acc = Complex64::default();
                for x0 in 0..m {
                    for x1 in 0..m {
                        let ph = w * ((k0 * x0 + k1 * x1) % m) as f64;
                        acc += input[x0 * m + x1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * m + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let m = 12;
        let input: Vec<Complex64> = (0..m * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = input.clone();
        transform(&mut fast, m, 2, Direction::Forward);
        let slow = naive_dft_2d(&input, m);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn pruned_matches_full() {
        let m = 12;
        let support: Vec<bool> = (0..m).map(|i| i < 4 || i >= 9).collect();
        let input: Vec<Complex64> = (0..m * m * m)
            .map(|i| {
                let (a, b, c) = (i / (m * m), (i / m) % m, i % m);
                if support[a] && support[b] && support[c] {
                    Complex64::new((i as f64 * 0.7).sin(), (i as f64).cos())
                } else {
                    Complex64::default()
                }
            })
            .collect();
        let mut full = input.clone();
        transform(&mut full, m, 3, Direction::Inverse);
        let mut pruned = input.clone();
        transform_pruned(&mut pruned, m, 3, Direction::Inverse, Some(&support));
        for (a, b) in full.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut fwd_full = full.clone();
        transform(&mut fwd_full, m, 3, Direction::Forward);
        let mut fwd = full;
        transform_pruned(&mut fwd, m, 3, Direction::Forward, Some(&support));
        for i in 0..m * m * m {
            let (a, b, c) = (i / (m * m), (i / m) % m, i % m);
            if support[a] && support[b] && support[c] {
                assert!((fwd[i] - fwd_full[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_3d() {
        let m = 8;
        let input: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.3).sin()))
            .collect();
        let mut data = input.clone();
        transform(&mut data, m, 3, Direction::Forward);
        transform(&mut data, m, 3, Direction::Inverse);
        let scale = 1.0 / (m * m * m) as f64;
        for (a, b) in data.iter().zip(&input) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }
}
