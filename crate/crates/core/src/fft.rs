//! Minimal complex FFT: iterative radix-2 for power-of-two sizes and
//! Bluestein's chirp-z transform for everything else.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use crate::math::{cos, sin};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

impl Add for Complex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Forward, unnormalized DFT: `X_k = sum_j x_j exp(-2 pi i j k / m)`.
pub(crate) fn fft(buf: &mut [Complex]) {
    let m = buf.len();
    if m <= 1 {
        return;
    }
    if m.is_power_of_two() {
        radix2(buf, false);
    } else {
        bluestein(buf);
    }
}

fn radix2(buf: &mut [Complex], inverse: bool) {
    let m = buf.len();
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex> = (0..m / 2)
        .map(|k| {
            let a = sign * 2.0 * PI * k as f64 / m as f64;
            Complex::new(cos(a), sin(a))
        })
        .collect();

    let mut len = 2;
    while len <= m {
        let half = len / 2;
        let stride = m / len;
        for start in (0..m).step_by(len) {
            for j in 0..half {
                let w = twiddles[j * stride];
                let u = buf[start + j];
                let v = buf[start + j + half] * w;
                buf[start + j] = u + v;
                buf[start + j + half] = u - v;
            }
        }
        len <<= 1;
    }
}

fn bluestein(buf: &mut [Complex]) {
    let m = buf.len();
    let size = (2 * m - 1).next_power_of_two();

    // chirp w_k = exp(-i pi k^2 / m); k^2 reduced mod 2m keeps the angle small
    let chirp: Vec<Complex> = (0..m)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * m as u128)) as f64;
            let a = -PI * k2 / m as f64;
            Complex::new(cos(a), sin(a))
        })
        .collect();

    let mut a = vec![Complex::ZERO; size];
    for k in 0..m {
        a[k] = buf[k] * chirp[k];
    }
    let mut b = vec![Complex::ZERO; size];
    b[0] = chirp[0].conj();
    for k in 1..m {
        b[k] = chirp[k].conj();
        b[size - k] = chirp[k].conj();
    }

    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y;
    }
    radix2(&mut a, true);

    let norm = 1.0 / size as f64;
    for k in 0..m {
        buf[k] = (a[k] * chirp[k]).scale(norm);
    }
}
