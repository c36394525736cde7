//! CSV text for sampled fields. Numbers are printed like C's `%.17g`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{LatticeField, TorusField};
use crate::beta_arith::{momentum_of, Angle, ExtReal};

/// `%.17g` formatting.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", mant, sign, exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn momentum(field_ctx: &crate::beta_arith::BetaContext, alpha: f64) -> f64 {
    match momentum_of(field_ctx, Angle::new(alpha)) {
        ExtReal::Finite(p) => p,
        ExtReal::Infinity => f64::INFINITY,
    }
}

pub fn torus_csv(field: &TorusField) -> String {
    let n = field.n();
    let nodes = field.grid().nodes();
    let mut s = String::from("alpha_prime,alpha,re,im\n");
    for i in 0..n {
        for k in 0..n {
            let z = field.get(i, k);
            let _ = writeln!(s, "{},{},{},{}", g17(nodes[i]), g17(nodes[k]), g17(z.re), g17(z.im));
        }
    }
    s
}

pub fn lattice_csv(field: &LatticeField) -> String {
    let n = field.grid().n();
    let mut s = String::from("q,p,re,im\n");
    for r in 0..2 * field.m_max() + 1 {
        for k in 0..n {
            let z = field.get(r, k);
            let p = momentum(field.ctx(), field.grid().node(k));
            let _ = writeln!(s, "{},{},{},{}", g17(field.q(r)), g17(p), g17(z.re), g17(z.im));
        }
    }
    s
}

/// `q,p,re,im` rows for values indexed [iq * ps.len() + ip].
pub fn window_csv(qs: &[f64], ps: &[f64], values: &[Complex64]) -> String {
    let mut s = String::from("q,p,re,im\n");
    for (iq, &q) in qs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            let z = values[iq * ps.len() + ip];
            let _ = writeln!(s, "{},{},{},{}", g17(q), g17(p), g17(z.re), g17(z.im));
        }
    }
    s
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// n points spanning [lo, hi]; symmetric ranges give exactly antisymmetric points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let last = (n - 1) as f64;
    (0..n).map(|k| mid + half * ((2 * k) as f64 - last) / last).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(std::f64::consts::PI), "3.1415926535897931");
    }

    #[test]
    fn linspace_symmetric() {
        let v = linspace(-10.0, 10.0, 201);
        assert_eq!(v[0], -10.0);
        assert_eq!(v[200], 10.0);
        for k in 0..201 {
            assert_eq!(v[k], -v[200 - k]);
        }
    }
}
