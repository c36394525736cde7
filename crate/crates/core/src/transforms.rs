//! Symplectic Fourier transform, generalized and twisted convolutions, and
//! multiplication by q and arctan-momentum, all on the f̃ representation.
//!
//! In f̃ form the symplectic transform is the argument swap
//! (𝓕f)~(α′, α) = f̃(α, α′). A twisted field would move its lattice phase onto
//! the α axis, which the carrier cannot express, so the transform-side
//! operations here require q_offset = 0.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::beta_arith::BetaContext;
use crate::sampling::{spectral, AngleGrid, SamplingError, TorusField};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("field has q offset {0}; transform-side operations need an untwisted field")]
    Twisted(f64),
}

fn untwisted(f: &TorusField) -> Result<(), TransformError> {
    if f.q_offset() != 0.0 {
        return Err(TransformError::Twisted(f.q_offset()));
    }
    Ok(())
}

fn pair(f: &TorusField, g: &TorusField) -> Result<(), TransformError> {
    untwisted(f)?;
    untwisted(g)?;
    f.compatible(g)?;
    Ok(())
}

/// 𝓕_β in f̃ form. An involution.
pub fn symplectic_fourier(f: &TorusField) -> Result<TorusField, TransformError> {
    untwisted(f)?;
    Ok(f.transposed())
}

/// f ⊛ g: (1/√β) ∫ f̃(α′, β′) g̃(α′, α − β′) dβ′, a circular convolution along α.
pub fn conv_generalized(f: &TorusField, g: &TorusField) -> Result<TorusField, TransformError> {
    pair(f, g)?;
    let n = f.n();
    let w = f.grid().spacing() / f.ctx().sqrt_beta();
    let (fd, gd) = (f.data(), g.data());
    let grid = *f.grid();
    let data: Vec<C> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, k) = (idx / n, idx % n);
            let row = i * n;
            let s: C = (0..n).map(|j| fd[row + j] * gd[row + grid.sub(k, j)]).sum();
            s * w
        })
        .collect();
    Ok(TorusField::new(*f.ctx(), grid, 0.0, data)?)
}

/// The unit of ⊛: (n√β/π) δ(α) in every row.
pub fn conv_unit(ctx: &BetaContext, grid: AngleGrid) -> TorusField {
    let z = grid.zero();
    let v = grid.n() as f64 * ctx.sqrt_beta() / std::f64::consts::PI;
    TorusField::from_fn(*ctx, grid, 0.0, move |_, a| if a == grid.node(z) { C::new(v, 0.0) } else { C::new(0.0, 0.0) })
}

/// F ⋄ G with F, G given as transform-side f̃ fields:
/// (F⋄G)~(α′, α) = (1/√β) ∫ F̃(α′ + λ(α − β′), β′) G̃(α′ − (1−λ)β′ − λkπ, α ⊖ β′) dβ′
/// where α ⊖ β′ = α − β′ + kπ.
///
/// The λ-shifts follow the raw difference α − β′ rather than its reduction
/// mod π; only that reading agrees with the associative star product on the
/// lattice.
pub fn twisted_conv(f: &TorusField, g: &TorusField) -> Result<TorusField, TransformError> {
    pair(f, g)?;
    let n = f.n();
    let grid = *f.grid();
    let lam = f.ctx().lambda();
    let w = grid.spacing() / f.ctx().sqrt_beta();
    let nodes = grid.nodes();
    // columns of F̃ and G̃ as spectral coefficient vectors
    let fc: Vec<Vec<C>> = spectral::transpose(f.data(), n).par_chunks(n).map(spectral::coefficients).collect();
    let gc: Vec<Vec<C>> = spectral::transpose(g.data(), n).par_chunks(n).map(spectral::coefficients).collect();
    let shifted = |coef: &[C], delta: f64| -> Vec<C> {
        let m: Vec<C> = coef
            .iter()
            .enumerate()
            .map(|(k, &c)| c * C::from_polar(1.0, 2.0 * spectral::mode(k, n) as f64 * delta))
            .collect();
        spectral::from_coefficients(&m)
    };
    let cols: Vec<Vec<C>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = vec![C::new(0.0, 0.0); n];
            for j in 0..n {
                let a = shifted(&fc[j], lam * (nodes[k] - nodes[j]));
                let kj = grid.sub(k, j);
                let wind = nodes[kj] - (nodes[k] - nodes[j]);
                let b = shifted(&gc[kj], -(1.0 - lam) * nodes[j] - lam * wind);
                for i in 0..n {
                    acc[i] += a[i] * b[i];
                }
            }
            acc.iter_mut().for_each(|z| *z *= w);
            acc
        })
        .collect();
    let data: Vec<C> = spectral::transpose(&cols.concat(), n);
    Ok(TorusField::new(*f.ctx(), grid, 0.0, data)?)
}

/// (q f)~ = iħ√β ∂_{α′} f̃.
pub fn mult_by_q(f: &TorusField) -> TorusField {
    f.deriv_alpha_prime(1).scale(C::new(0.0, f.ctx().min_dq()))
}

/// (arctan(√β p)/√β · f)~ = (α/√β) f̃.
pub fn mult_by_atan_p(f: &TorusField) -> TorusField {
    let n = f.n();
    let sb = f.ctx().sqrt_beta();
    let nodes = f.grid().nodes();
    let data = f.data().iter().enumerate().map(|(idx, &z)| z * (nodes[idx % n] / sb)).collect();
    TorusField::new(*f.ctx(), *f.grid(), f.q_offset(), data).expect("shape preserved")
}

/// (D_p f)~ = √β ∂_α f̃.
pub fn d_p_field(f: &TorusField) -> TorusField {
    f.deriv_alpha(1).scale(C::new(f.ctx().sqrt_beta(), 0.0))
}

/// (∂_q f)~ = (iα′/(ħ√β)) f̃, with α′ taken on its principal branch.
pub fn d_q_field(f: &TorusField) -> TorusField {
    let n = f.n();
    let c = f.ctx().min_dq();
    let nodes = f.grid().nodes();
    let data = f.data().iter().enumerate().map(|(idx, &z)| z * C::new(0.0, nodes[idx / n] / c)).collect();
    TorusField::new(*f.ctx(), *f.grid(), f.q_offset(), data).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::beta_arith::ExtReal;
    use crate::sampling::{analyze, synth, LatticeField};
    use crate::star_algebra::AlgebraElement;
    use crate::fixtures::random_field;

    fn ctx(lam: f64) -> BetaContext {
        BetaContext::new(0.7, 0.55, lam).unwrap()
    }

    fn max_diff(a: &TorusField, b: &TorusField) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    /// f on its q-lattice (one full period of m) at the grid momenta.
    fn lattice_of(f: &TorusField) -> LatticeField {
        let g = *f.grid();
        let h = g.half();
        let c = f.ctx();
        let data = (0..g.n())
            .flat_map(|r| {
                let q = c.q_lattice_step() * (r as f64 - h as f64);
                g.nodes().into_iter().map(move |a| synth(f, q, ExtReal::Finite(a.tan() / c.sqrt_beta())))
            })
            .collect();
        LatticeField::new(*c, g, 0.0, h, data).unwrap()
    }

    #[test]
    fn symplectic_fourier_examples() {
        let c = ctx(0.3);
        let g = AngleGrid::new(13).unwrap();
        let f = random_field(c, g, 1, 3, 3);
        let ff = symplectic_fourier(&f).unwrap();
        assert_eq!(symplectic_fourier(&ff).unwrap(), f);
        let sym = f.add(&f.transposed()).unwrap();
        assert_eq!(symplectic_fourier(&sym).unwrap(), sym);
        let a = AlgebraElement::from_field(&f);
        let h = AlgebraElement::from_field(&random_field(c, g, 2, 3, 3));
        let (fa, fh) = (AlgebraElement::from_field(&ff), AlgebraElement::from_field(&symplectic_fourier(&h.to_field()).unwrap()));
        let d = a.inner(&h).unwrap() - fa.inner(&fh).unwrap();
        assert!(d.norm() < 1e-12 * a.norm_2() * h.norm_2());
        let tw = TorusField::from_fn(c, g, 0.4, |_, _| C::new(1.0, 0.0));
        assert!(matches!(symplectic_fourier(&tw), Err(TransformError::Twisted(_))));
    }

    #[test]
    fn symplectic_fourier_by_double_sum() {
        // 𝓕f(q′, p′) = (1/2πħ) Σ_m Σ_j f(q_m, α_j) e^{−i q_m α′/c} e^{i q′ α_j/c} · 2c (π/n)/√β
        let c = ctx(0.3);
        let g = AngleGrid::new(11).unwrap();
        let f = random_field(c, g, 3, 3, 3);
        let lat = lattice_of(&f);
        let tf = symplectic_fourier(&f).unwrap();
        let cq = c.min_dq();
        let w = c.q_lattice_step() * g.spacing() / c.sqrt_beta() / (2.0 * PI * c.hbar());
        let nodes = g.nodes();
        for &qp in &[0.0, c.q_lattice_step(), -3.0 * c.q_lattice_step()] {
            for (k, &ap) in nodes.iter().enumerate().step_by(3) {
                let mut s = C::new(0.0, 0.0);
                for r in 0..g.n() {
                    for (j, &a) in nodes.iter().enumerate() {
                        s += lat.get(r, j) * C::from_polar(1.0, -lat.q(r) * ap / cq + qp * a / cq);
                    }
                }
                let brute = s * w;
                let fast = synth(&tf, qp, ExtReal::Finite(nodes[k].tan() / c.sqrt_beta()));
                assert!((brute - fast).norm() < 1e-10, "{brute} vs {fast}");
            }
        }
    }

    #[test]
    fn generalized_convolution() {
        let c = ctx(0.3);
        let g = AngleGrid::new(17).unwrap();
        let (f, h) = (random_field(c, g, 4, 3, 8), random_field(c, g, 5, 3, 8));
        assert!(max_diff(&conv_generalized(&f, &h).unwrap(), &conv_generalized(&h, &f).unwrap()) < 1e-12);
        let unit = conv_unit(&c, g);
        assert!(max_diff(&conv_generalized(&unit, &h).unwrap(), &h) < 1e-12);

        // the unit again, by solving e ⊛ h = h row by row
        let n = g.n();
        let w = g.spacing() / c.sqrt_beta();
        for i in [0, n / 2] {
            let m = DMatrix::from_fn(n, n, |k, j| h.get(i, g.sub(k, j)) * w);
            let rhs = DVector::from_fn(n, |k, _| h.get(i, k));
            let e = m.lu().solve(&rhs).unwrap();
            for k in 0..n {
                assert!((e[k] - unit.get(i, k)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn convolution_theorem() {
        // 𝓕(f·g) = (1/2πħ) 𝓕f ⊛ 𝓕g, with f·g formed on the q-lattice
        let c = ctx(0.3);
        let g = AngleGrid::new(15).unwrap();
        let (f, h) = (random_field(c, g, 6, 3, 3), random_field(c, g, 7, 3, 3));
        let (lf, lh) = (lattice_of(&f), lattice_of(&h));
        let prod: Vec<C> = lf.data().iter().zip(lh.data()).map(|(a, b)| a * b).collect();
        let fg = analyze(&LatticeField::new(c, g, 0.0, g.half(), prod).unwrap());
        let lhs = symplectic_fourier(&fg).unwrap();
        let rhs = conv_generalized(&symplectic_fourier(&f).unwrap(), &symplectic_fourier(&h).unwrap())
            .unwrap()
            .scale(C::new(1.0 / (2.0 * PI * c.hbar()), 0.0));
        assert!(max_diff(&lhs, &rhs) < 1e-10 * rhs.max_abs());
    }

    #[test]
    fn twisted_convolution_matches_star() {
        for lam in [0.0, 0.3, 0.5, 1.0] {
            let c = ctx(lam);
            let g = AngleGrid::new(15).unwrap();
            let (f, h) = (random_field(c, g, 8, 3, 3), random_field(c, g, 9, 3, 3));
            let star = AlgebraElement::from_field(&f).star(&AlgebraElement::from_field(&h)).unwrap().to_field();
            let lhs = symplectic_fourier(&star).unwrap();
            let rhs = twisted_conv(&symplectic_fourier(&f).unwrap(), &symplectic_fourier(&h).unwrap())
                .unwrap()
                .scale(C::new(1.0 / (2.0 * PI * c.hbar()), 0.0));
            assert!(max_diff(&lhs, &rhs) < 1e-10 * lhs.max_abs(), "lambda {lam}: {}", max_diff(&lhs, &rhs));
        }
    }

    #[test]
    fn twisted_convolution_properties() {
        let c = ctx(0.4);
        let g = AngleGrid::new(13).unwrap();
        let (f, h, k) = (random_field(c, g, 10, 2, 2), random_field(c, g, 11, 2, 2), random_field(c, g, 12, 2, 2));
        let l = twisted_conv(&twisted_conv(&f, &h).unwrap(), &k).unwrap();
        let r = twisted_conv(&f, &twisted_conv(&h, &k).unwrap()).unwrap();
        assert!(max_diff(&l, &r) < 1e-10 * l.max_abs());
        let zero = TorusField::zeros(c, g);
        assert_eq!(twisted_conv(&zero, &h).unwrap().max_abs(), 0.0);

        // λ = 1/2: (𝓕f ⋄ 𝓕g)(0, 0) = ∫ f g dq dμ
        let c = ctx(0.5);
        let (f, h) = (random_field(c, g, 13, 2, 2), random_field(c, g, 14, 2, 2));
        let d = twisted_conv(&symplectic_fourier(&f).unwrap(), &symplectic_fourier(&h).unwrap()).unwrap();
        let at0 = synth(&d, 0.0, ExtReal::Finite(0.0));
        let n = g.n();
        let mut s = C::new(0.0, 0.0);
        for v in 0..n {
            for a in 0..n {
                s += f.get(v, a) * h.get(g.neg(v), a);
            }
        }
        let integral = s * (g.spacing().powi(2) / (2.0 * PI * c.hbar() * c.beta()));
        assert!((at0 - integral).norm() < 1e-10 * integral.norm());
    }

    #[test]
    fn multiplication_relations() {
        let c = ctx(0.3);
        let g = AngleGrid::new(17).unwrap();
        let f = random_field(c, g, 15, 3, 3);
        let ff = symplectic_fourier(&f).unwrap();
        let i_hbar = C::new(0.0, c.hbar());
        let tol = 1e-11 * f.max_abs() * 100.0;
        // D_p 𝓕f = −(i/ħ) 𝓕(qf),  ∂_q 𝓕f = (i/ħ) 𝓕(arctan(√βp)/√β f)
        assert!(max_diff(&d_p_field(&ff), &symplectic_fourier(&mult_by_q(&f)).unwrap().scale(i_hbar.inv())) < tol);
        assert!(max_diff(&d_q_field(&ff), &symplectic_fourier(&mult_by_atan_p(&f)).unwrap().scale(-i_hbar.inv())) < tol);
        // q 𝓕f = iħ 𝓕(D_p f),  arctan(√βp)/√β 𝓕f = −iħ 𝓕(∂_q f)
        assert!(max_diff(&mult_by_q(&ff), &symplectic_fourier(&d_p_field(&f)).unwrap().scale(i_hbar)) < tol);
        assert!(max_diff(&mult_by_atan_p(&ff), &symplectic_fourier(&d_q_field(&f)).unwrap().scale(-i_hbar)) < tol);

        let konst = TorusField::from_fn(c, g, 0.0, |_, _| C::new(2.0, 1.0));
        assert!(mult_by_q(&konst).max_abs() < 1e-13);
        let xi = 1.7;
        let rho = crate::states::position_eigenvector(&c, g, xi).rho.to_field();
        assert!(max_diff(&mult_by_q(&rho), &rho.scale(C::new(xi, 0.0))) < 1e-12);
    }
}
