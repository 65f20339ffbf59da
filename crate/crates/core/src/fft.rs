//! Multi-dimensional complex FFT on cubic arrays, built from 1-D rustfft
//! passes, with optional pruning for zero-padded data.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Columns gathered per batch when transforming a strided axis.
const COLUMN_BLOCK: usize = 32;

#[derive(Clone)]
pub(crate) struct NdFft {
    d: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("d", &self.d).field("m", &self.m).finish()
    }
}

impl NdFft {
    pub fn new(d: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        NdFft { d, m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Unnormalized forward transform. Entries with any index `>= active` are
    /// assumed zero on input.
    pub fn forward(&self, buf: &mut [Complex64], active: usize) {
        for axis in (0..self.d).rev() {
            self.pass(buf, axis, active, &self.forward);
        }
    }

    /// Unnormalized inverse transform. Only entries with every index
    /// `< active` are valid on output.
    pub fn inverse(&self, buf: &mut [Complex64], active: usize) {
        for axis in 0..self.d {
            self.pass(buf, axis, active, &self.inverse);
        }
    }

    /// 1-D transforms along `axis`, skipping slabs whose leading indices
    /// (axes before `axis`) reach `active`.
    fn pass(&self, buf: &mut [Complex64], axis: usize, active: usize, fft: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(buf.len(), self.len());
        let m = self.m;
        let stride = m.pow((self.d - 1 - axis) as u32);
        let slab = m * stride;
        let block = COLUMN_BLOCK.min(stride);
        let scratch_len = fft.get_inplace_scratch_len();
        buf.par_chunks_mut(slab)
            .enumerate()
            .filter(|(outer, _)| leading_indices_below(*outer, axis, m, active))
            .for_each_init(
                || (vec![Complex64::default(); scratch_len], vec![Complex64::default(); block * m]),
                |(scratch, lines), (_, slab)| {
                    if stride == 1 {
                        fft.process_with_scratch(slab, scratch);
                        return;
                    }
                    let mut c0 = 0;
                    while c0 < stride {
                        let width = block.min(stride - c0);
                        let lines = &mut lines[..width * m];
                        for r in 0..m {
                            let row = &slab[r * stride + c0..r * stride + c0 + width];
                            for (c, v) in row.iter().enumerate() {
                                lines[c * m + r] = *v;
                            }
                        }
                        fft.process_with_scratch(lines, scratch);
                        for r in 0..m {
                            let row = &mut slab[r * stride + c0..r * stride + c0 + width];
                            for (c, v) in row.iter_mut().enumerate() {
                                *v = lines[c * m + r];
                            }
                        }
                        c0 += width;
                    }
                },
            );
    }
}

fn leading_indices_below(mut outer: usize, axis: usize, m: usize, active: usize) -> bool {
    if active >= m {
        return true;
    }
    for _ in 0..axis {
        if outer % m >= active {
            return false;
        }
        outer /= m;
    }
    true
}
