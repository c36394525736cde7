//! Trigonometric interpolation on the odd, half-offset angle grid.
//!
//! Samples v_j sit at g_j = π(j − h)/n with h = (n−1)/2, and are read as the
//! π-periodic trig polynomial Σ_{|k|≤h} d_k e^{2ik(x + πh/n)}. Since n is odd
//! there is no Nyquist mode, so phase shifts are unitary and exactly
//! invertible.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type C = Complex64;

struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
        })
        .clone()
}

/// Signed mode number of DFT bin `k`.
pub fn mode(k: usize, n: usize) -> i64 {
    if k <= (n - 1) / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Coefficients d_k (bin order) of the samples.
pub fn coefficients(v: &[C]) -> Vec<C> {
    let n = v.len();
    let mut d = v.to_vec();
    plans(n).fwd.process(&mut d);
    let s = 1.0 / n as f64;
    d.iter_mut().for_each(|x| *x *= s);
    d
}

/// Unscaled forward DFT.
pub fn dft_in_place(v: &mut [C]) {
    plans(v.len()).fwd.process(v);
}

pub fn from_coefficients(d: &[C]) -> Vec<C> {
    let mut v = d.to_vec();
    plans(v.len()).inv.process(&mut v);
    v
}

/// Evaluate the interpolant with coefficients `d` at angle `x` (any real).
pub fn eval_coefficients(d: &[C], x: f64) -> C {
    let n = d.len();
    let t = x + PI * ((n - 1) / 2) as f64 / n as f64;
    let mut acc = d[0];
    let step = C::from_polar(1.0, 2.0 * t);
    let mut e = step;
    for k in 1..=(n - 1) / 2 {
        acc += d[k] * e + d[n - k] * e.conj();
        e *= step;
    }
    acc
}

fn multiply_modes(v: &mut [C], f: impl Fn(i64) -> C) {
    let n = v.len();
    let p = plans(n);
    p.fwd.process(v);
    let s = 1.0 / n as f64;
    for (k, x) in v.iter_mut().enumerate() {
        *x *= f(mode(k, n)) * s;
    }
    p.inv.process(v);
}

/// Replace samples by the interpolant evaluated at g_j + delta.
pub fn shift_in_place(v: &mut [C], delta: f64) {
    if delta == 0.0 {
        return;
    }
    multiply_modes(v, |m| C::from_polar(1.0, 2.0 * m as f64 * delta));
}

/// `order`-th derivative of the interpolant at the nodes.
pub fn derivative_in_place(v: &mut [C], order: u32) {
    if order == 0 {
        return;
    }
    multiply_modes(v, |m| C::new(0.0, 2.0 * m as f64).powu(order));
}

pub fn shift(v: &[C], delta: f64) -> Vec<C> {
    let mut w = v.to_vec();
    shift_in_place(&mut w, delta);
    w
}

pub fn derivative(v: &[C], order: u32) -> Vec<C> {
    let mut w = v.to_vec();
    derivative_in_place(&mut w, order);
    w
}

/// Shift row i of a row-major n×n array by `deltas[i]`.
pub fn shift_rows(data: &mut [C], n: usize, deltas: &[f64]) {
    data.par_chunks_mut(n).zip(deltas.par_iter()).for_each(|(row, &d)| shift_in_place(row, d));
}

pub fn derivative_rows(data: &mut [C], n: usize, order: u32) {
    data.par_chunks_mut(n).for_each(|row| derivative_in_place(row, order));
}

pub fn transpose(data: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            out[k * n + i] = data[i * n + k];
        }
    }
    out
}

/// Apply `f` to every column of a row-major n×n array.
pub fn map_columns(data: &mut [C], n: usize, f: impl Fn(usize, &mut [C]) + Sync) {
    let mut t = transpose(data, n);
    t.par_chunks_mut(n).enumerate().for_each(|(k, col)| f(k, col));
    data.copy_from_slice(&transpose(&t, n));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Vec<f64> {
        let h = (n - 1) / 2;
        (0..n).map(|j| PI * (j as f64 - h as f64) / n as f64).collect()
    }

    fn poly(x: f64) -> C {
        C::new(0.3, 0.0) + C::from_polar(1.0, 2.0 * x) * 0.5 + C::from_polar(0.25, -6.0 * x + 0.4)
    }

    #[test]
    fn interpolant_reproduces_trig_polynomials() {
        let n = 15;
        let v: Vec<C> = nodes(n).iter().map(|&x| poly(x)).collect();
        let d = coefficients(&v);
        for &x in &[0.123, -1.4, 2.9, 7.0] {
            assert!((eval_coefficients(&d, x) - poly(x)).norm() < 1e-13);
        }
        let s = shift(&v, 0.37);
        for (j, &x) in nodes(n).iter().enumerate() {
            assert!((s[j] - poly(x + 0.37)).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_mode() {
        let n = 9;
        let v: Vec<C> = nodes(n).iter().map(|&x| C::from_polar(1.0, 4.0 * x)).collect();
        let dv = derivative(&v, 1);
        for (j, &x) in nodes(n).iter().enumerate() {
            assert!((dv[j] - C::new(0.0, 4.0) * C::from_polar(1.0, 4.0 * x)).norm() < 1e-12);
        }
    }
}
