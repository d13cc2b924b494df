//! Forward discrete Fourier transform `X_k = Σ_n x_n e^{-2πi nk/N}`.
//!
//! Iterative radix-2 for powers of two and Bluestein's chirp-z reduction for
//! every other length, so contour sizes are not restricted.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_traits::Zero;

use crate::linalg::C64;

pub fn fft(data: &mut [C64]) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(data, false);
    } else {
        bluestein(data);
    }
}

fn radix2(data: &mut [C64], inverse: bool) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles evaluated directly (not by repeated multiplication) to keep
        // the round-off at O(eps log n).
        let tw: Vec<C64> = (0..half).map(|k| C64::from_polar(1.0, sign * TAU * k as f64 / len as f64)).collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = data[start + k];
                let v = data[start + k + half] * tw[k];
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

fn bluestein(data: &mut [C64]) {
    let n = data.len();
    let m = (2 * n - 1).next_power_of_two();
    // chirp w_k = exp(-iπ k²/n); k² taken mod 2n to keep the angle small.
    let chirp: Vec<C64> = (0..n)
        .map(|k| {
            let k2 = (k as u128 * k as u128) % (2 * n as u128);
            C64::from_polar(1.0, -core::f64::consts::PI * k2 as f64 / n as f64)
        })
        .collect();
    let mut a = vec![C64::zero(); m];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
    }
    let mut b = vec![C64::zero(); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, true);
    let inv_m = 1.0 / m as f64;
    for k in 0..n {
        data[k] = a[k] * inv_m * chirp[k];
    }
}
