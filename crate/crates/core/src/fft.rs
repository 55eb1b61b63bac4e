//! Multi-dimensional complex FFTs over the lattice layout used by [`crate::Grid`].

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transform_rows(data: &mut [Complex64], fft: &Plan) {
    let n = fft.len();
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transform_axis(data: &mut [Complex64], n: usize, dim: usize, axis: usize, fft: &Plan) {
    if axis + 1 == dim {
        transform_rows(data, fft);
        return;
    }
    let stride = n.pow((dim - 1 - axis) as u32);
    let block = n * stride;
    let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
    scratch
        .par_chunks_mut(block)
        .zip(data.par_chunks(block))
        .for_each(|(dst, src)| {
            for a in 0..n {
                for b in 0..stride {
                    dst[b * n + a] = src[a * stride + b];
                }
            }
        });
    transform_rows(&mut scratch, fft);
    data.par_chunks_mut(block)
        .zip(scratch.par_chunks(block))
        .for_each(|(dst, src)| {
            for a in 0..n {
                for b in 0..stride {
                    dst[a * stride + b] = src[b * n + a];
                }
            }
        });
}

/// Forward transform, normalized by 1/N so that a unit plane wave maps to a
/// unit coefficient.
pub fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    let fft = plan(n, false);
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, &fft);
    }
    let scale = 1.0 / data.len() as f64;
    data.par_iter_mut().for_each(|c| *c *= scale);
}

/// Unnormalized inverse transform (synthesis of Σ c_k e^{ik·x/L}).
pub fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    let fft = plan(n, true);
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, &fft);
    }
}
