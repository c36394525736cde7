//! Seeded random band-limited fields and states for tests and `verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beta_arith::BetaContext;
use crate::sampling::{AngleGrid, TorusField, Wavefunction};
use crate::star_algebra::AlgebraElement;

type C = Complex64;

fn coeff(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Σ c_{xy} e^{2i(xα′ + yα)} with |x| ≤ ku, |y| ≤ ka.
pub fn random_field(ctx: BetaContext, grid: AngleGrid, seed: u64, ku: i64, ka: i64) -> TorusField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = vec![];
    for x in -ku..=ku {
        for y in -ka..=ka {
            modes.push((x as f64, y as f64, coeff(&mut rng)));
        }
    }
    TorusField::from_fn(ctx, grid, 0.0, move |u, a| {
        modes.iter().map(|&(x, y, c)| c * C::from_polar(1.0, 2.0 * (x * u + y * a))).sum()
    })
}

/// Random trig polynomial in α of degree ≤ k.
pub fn random_wave(ctx: BetaContext, grid: AngleGrid, seed: u64, k: i64) -> Wavefunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, C)> = (-k..=k).map(|x| (x as f64, coeff(&mut rng))).collect();
    Wavefunction::from_fn(ctx, grid, 0.0, move |a| modes.iter().map(|&(x, c)| c * C::from_polar(1.0, 2.0 * x * a)).sum())
}

/// Random element with |modes| ≤ k on both axes.
pub fn random_element(ctx: BetaContext, grid: AngleGrid, seed: u64, k: i64) -> AlgebraElement {
    AlgebraElement::from_field(&random_field(ctx, grid, seed, k, k))
}

/// Normalized random ψ carrying a factor (1 + e^{2iα}), so it vanishes at
/// p = ∞ and p̂ψ stays a trig polynomial.
pub fn tame_wave(ctx: BetaContext, grid: AngleGrid, seed: u64, k: i64) -> Wavefunction {
    let r = random_wave(ctx, grid, seed, k);
    let v = r.values().iter().zip(grid.nodes()).map(|(z, a)| z * (C::new(1.0, 0.0) + C::from_polar(1.0, 2.0 * a))).collect();
    r.with_values(v).normalized()
}

/// Gram-Schmidt on `count` random waves.
pub fn orthonormal_waves(ctx: BetaContext, grid: AngleGrid, seed: u64, k: i64, count: usize) -> Vec<Wavefunction> {
    let mut out: Vec<Wavefunction> = Vec::with_capacity(count);
    for j in 0..count {
        let mut w = random_wave(ctx, grid, seed.wrapping_add(j as u64), k);
        for e in &out {
            let c = e.inner(&w).expect("same grid");
            w = w.sub(&e.scale(c)).expect("same grid");
        }
        out.push(w.normalized());
    }
    out
}
