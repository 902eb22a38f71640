//! Real-input FFT used by the STFT. Power-of-two sizes go through an
//! iterative radix-2 transform; any other size falls back to a direct DFT.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{cos, sin, TAU};

#[derive(Debug, Clone)]
pub struct FftPlan {
    size: usize,
    // e^{-2πik/N}, k < N/2 for radix-2, k < N for the direct DFT
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl FftPlan {
    pub fn new(size: usize) -> Self {
        assert!(size > 0, "FFT size must be positive");
        let radix2 = size.is_power_of_two();
        let tw_len = if radix2 { size / 2 } else { size };
        let twiddles = (0..tw_len)
            .map(|k| {
                let a = -TAU * k as f64 / size as f64;
                Complex64::new(cos(a), sin(a))
            })
            .collect();
        let bit_reverse = if radix2 {
            let bits = size.trailing_zeros();
            (0..size)
                .map(|i| {
                    if bits == 0 {
                        0
                    } else {
                        i.reverse_bits() >> (usize::BITS - bits)
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            size,
            twiddles,
            bit_reverse,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of non-negative frequency bins, `N/2 + 1`.
    pub fn bins(&self) -> usize {
        self.size / 2 + 1
    }

    /// Forward DFT `X[k] = Σ x[n]·e^{-2πikn/N}` of a real buffer of length N,
    /// returning bins `0..=N/2`.
    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.size, "FFT input length");
        let mut buf: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf.truncate(self.bins());
        buf
    }

    /// In-place complex forward DFT.
    pub fn forward(&self, buf: &mut Vec<Complex64>) {
        assert_eq!(buf.len(), self.size, "FFT input length");
        if self.size.is_power_of_two() {
            self.radix2(buf);
        } else {
            let n = self.size;
            let out: Vec<Complex64> = (0..n)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in buf.iter().enumerate() {
                        acc += v * self.twiddles[(k * j) % n];
                    }
                    acc
                })
                .collect();
            *buf = out;
        }
    }

    fn radix2(&self, buf: &mut [Complex64]) {
        let n = self.size;
        for i in 0..n {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let t = buf[start + k + half] * self.twiddles[k * stride];
                    let u = buf[start + k];
                    buf[start + k] = u + t;
                    buf[start + k + half] = u - t;
                }
            }
            len *= 2;
        }
    }
}
