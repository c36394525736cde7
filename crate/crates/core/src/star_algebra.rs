//! The integral star product and the structure built on it.
//!
//! An element is stored in sheared coordinates
//!
//!   D(α′, a) = e^{iθα′} f̃(α′, a − λα′),   θ = q_offset/(ħ√β),
//!
//! i.e. as a function of the variable conjugate to q and of the first
//! argument of the integral kernel. In these coordinates the twisted
//! convolution is an index-permuted matrix product on the grid, so ⋆ is
//! associative to rounding for any data, and the involution, S and the
//! kernel map are pure permutations. λ-coordinates (the TorusField view) are
//! reached by one spectral shift per row.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::beta_arith::BetaContext;
use crate::sampling::{spectral, AngleGrid, SamplingError, TorusField};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("elements belong to different contexts")]
    ContextMismatch,
    #[error("power iteration did not converge in {0} iterations")]
    NotConverged(usize),
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    ctx: BetaContext,
    grid: AngleGrid,
    q_offset: f64,
    d0: Vec<C>,
}

impl AlgebraElement {
    pub fn from_field(field: &TorusField) -> Self {
        let grid = *field.grid();
        let lam = field.ctx().lambda();
        let mut d0 = field.untwisted();
        let deltas: Vec<f64> = grid.nodes().iter().map(|u| -lam * u).collect();
        spectral::shift_rows(&mut d0, grid.n(), &deltas);
        Self { ctx: *field.ctx(), grid, q_offset: field.q_offset(), d0 }
    }

    pub fn to_field(&self) -> TorusField {
        let lam = self.ctx.lambda();
        let mut d = self.d0.clone();
        let deltas: Vec<f64> = self.grid.nodes().iter().map(|u| lam * u).collect();
        spectral::shift_rows(&mut d, self.n(), &deltas);
        TorusField::from_untwisted(self.ctx, self.grid, self.q_offset, d).expect("shape preserved")
    }

    pub fn from_sheared(ctx: BetaContext, grid: AngleGrid, q_offset: f64, d0: Vec<C>) -> Result<Self, AlgebraError> {
        let n = grid.n();
        if d0.len() != n * n {
            return Err(SamplingError::LengthMismatch { expected: n * n, got: d0.len() }.into());
        }
        Ok(Self { ctx, grid, q_offset, d0 })
    }

    pub fn sheared(&self) -> &[C] {
        &self.d0
    }

    pub fn ctx(&self) -> &BetaContext {
        &self.ctx
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn q_offset(&self) -> f64 {
        self.q_offset
    }

    pub fn theta(&self) -> f64 {
        self.q_offset / self.ctx.min_dq()
    }

    pub fn zeros(ctx: BetaContext, grid: AngleGrid, q_offset: f64) -> Self {
        Self { ctx, grid, q_offset, d0: vec![C::new(0.0, 0.0); grid.n() * grid.n()] }
    }

    fn with_data(&self, d0: Vec<C>) -> Self {
        Self { d0, ..self.clone() }
    }

    /// Same element with its sheared data expressed relative to another
    /// offset of the same lattice sector.
    pub fn rebased(&self, q_offset: f64) -> Result<Self, AlgebraError> {
        if !crate::sampling::same_sector(&self.ctx, self.q_offset, q_offset) {
            return Err(SamplingError::OffsetMismatch(self.q_offset, q_offset).into());
        }
        let dt = (q_offset - self.q_offset) / self.ctx.min_dq();
        if dt == 0.0 {
            return Ok(self.clone());
        }
        let n = self.n();
        let mut d0 = self.d0.clone();
        d0.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let ph = C::from_polar(1.0, dt * self.grid.node(i));
            row.iter_mut().for_each(|z| *z *= ph);
        });
        Ok(Self { q_offset, d0, ..self.clone() })
    }

    fn aligned(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        if self.ctx != other.ctx {
            return Err(AlgebraError::ContextMismatch);
        }
        if self.grid != other.grid {
            return Err(SamplingError::GridMismatch.into());
        }
        other.rebased(self.q_offset)
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        let o = self.aligned(other)?;
        Ok(self.with_data(self.d0.iter().zip(&o.d0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        let o = self.aligned(other)?;
        Ok(self.with_data(self.d0.iter().zip(&o.d0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, s: C) -> AlgebraElement {
        self.with_data(self.d0.iter().map(|&a| a * s).collect())
    }

    /// Unscaled kernel matrix K[a][b] = D(α_a − α_b, α_a).
    pub(crate) fn kernel_matrix(&self) -> DMatrix<C> {
        let n = self.n();
        let g = self.grid;
        DMatrix::from_fn(n, n, |a, b| self.d0[g.sub(a, b) * n + a])
    }

    pub(crate) fn with_kernel_matrix(&self, k: &DMatrix<C>) -> AlgebraElement {
        let n = self.n();
        let g = self.grid;
        let d0 = (0..n * n)
            .map(|idx| {
                let (u, a) = (idx / n, idx % n);
                k[(a, g.sub(a, u))]
            })
            .collect();
        self.with_data(d0)
    }

    /// f ⋆ g. With w = (1/(2πħ√β))(π/n) the sheared product is
    /// H(u, a) = w Σ_v F(v, a) G(u ⊖ v, a ⊖ v), a product of kernel matrices.
    pub fn star(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        let o = self.aligned(other)?;
        let w = self.grid.spacing() / (2.0 * PI * self.ctx.min_dq());
        let prod = self.kernel_matrix() * o.kernel_matrix();
        Ok(self.with_kernel_matrix(&prod).scale(C::new(w, 0.0)))
    }

    /// f*: conj f̃(−α′, α − (1 − 2λ)α′), in sheared form conj D(−u, a − u).
    pub fn involution(&self) -> AlgebraElement {
        let n = self.n();
        let g = self.grid;
        let d0 = (0..n * n)
            .map(|idx| {
                let (u, a) = (idx / n, idx % n);
                self.d0[g.neg(u) * n + g.sub(a, u)].conj()
            })
            .collect();
        self.with_data(d0)
    }

    /// S f = conj(f*), (Sf)~(α′, α) = f̃(α′, α + (1 − 2λ)α′). The result lives
    /// in the algebra with ordering 1 − λ, where its sheared data coincide
    /// with those of f.
    pub fn s_operator(&self) -> AlgebraElement {
        let ctx = self.ctx.with_lambda(1.0 - self.ctx.lambda()).expect("1 - lambda stays in [0, 1]");
        AlgebraElement { ctx, ..self.clone() }
    }

    /// tr f = (1/(2πħ√β)) ∫ f̃(0, α) dα.
    pub fn trace(&self) -> C {
        let n = self.n();
        let z = self.grid.zero();
        let s: C = self.d0[z * n..(z + 1) * n].iter().sum();
        s * (self.grid.spacing() / (2.0 * PI * self.ctx.min_dq()))
    }

    /// (f, g) = (1/(4π²ħ²β)) (π/n)² Σ conj F G.
    pub fn inner(&self, other: &AlgebraElement) -> Result<C, AlgebraError> {
        let o = self.aligned(other)?;
        let s: C = self.d0.par_iter().zip(&o.d0).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.l2_weight())
    }

    fn l2_weight(&self) -> f64 {
        let c = self.ctx.min_dq();
        let h = self.grid.spacing();
        h * h / (4.0 * PI * PI * c * c)
    }

    pub fn norm_2(&self) -> f64 {
        let s: f64 = self.d0.par_iter().map(|z| z.norm_sqr()).sum();
        (s * self.l2_weight()).sqrt()
    }

    /// ∂_q f, i.e. f̃ multiplied by iα′/(ħ√β).
    pub fn d_q(&self) -> AlgebraElement {
        let n = self.n();
        let c = self.ctx.min_dq();
        let mut d0 = self.d0.clone();
        d0.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let f = C::new(0.0, self.grid.node(i) / c);
            row.iter_mut().for_each(|z| *z *= f);
        });
        self.with_data(d0)
    }

    /// D_p f = √β ∂_α f̃.
    pub fn d_p(&self) -> AlgebraElement {
        let mut d0 = self.d0.clone();
        spectral::derivative_rows(&mut d0, self.n(), 1);
        self.with_data(d0).scale(C::new(self.ctx.sqrt_beta(), 0.0))
    }

    /// Left multiplication by q: q_offset·D + iħ√β(∂_u + ∂_a)D.
    fn left_q(&self) -> AlgebraElement {
        let (du, da) = self.sheared_derivatives();
        self.combine_q(&du, Some(&da))
    }

    /// Right multiplication by q: q_offset·D + iħ√β ∂_u D.
    fn right_q(&self) -> AlgebraElement {
        let (du, _) = self.sheared_derivatives();
        self.combine_q(&du, None)
    }

    fn sheared_derivatives(&self) -> (Vec<C>, Vec<C>) {
        let n = self.n();
        let mut du = self.d0.clone();
        spectral::map_columns(&mut du, n, |_, col| spectral::derivative_in_place(col, 1));
        let mut da = self.d0.clone();
        spectral::derivative_rows(&mut da, n, 1);
        (du, da)
    }

    fn combine_q(&self, du: &[C], da: Option<&[C]>) -> AlgebraElement {
        let ic = C::new(0.0, self.ctx.min_dq());
        let q0 = self.q_offset;
        let d0 = (0..self.d0.len())
            .map(|i| {
                let mut z = self.d0[i] * q0 + du[i] * ic;
                if let Some(da) = da {
                    z += da[i] * ic;
                }
                z
            })
            .collect();
        self.with_data(d0)
    }

    fn left_phi(&self, phi: &[C]) -> AlgebraElement {
        let n = self.n();
        self.with_data(self.d0.iter().enumerate().map(|(idx, &z)| z * phi[idx % n]).collect())
    }

    fn right_phi(&self, phi: &[C]) -> AlgebraElement {
        let n = self.n();
        let g = self.grid;
        self.with_data(
            self.d0
                .iter()
                .enumerate()
                .map(|(idx, &z)| z * phi[g.sub(idx % n, idx / n)])
                .collect(),
        )
    }
}

/// The symbol qⁿ φ(p), with φ sampled at the grid angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolObservable {
    pub n: u32,
    phi: Vec<C>,
}

impl SymbolObservable {
    pub fn q_power(n: u32, grid: &AngleGrid) -> Self {
        Self { n, phi: vec![C::new(1.0, 0.0); grid.n()] }
    }

    pub fn from_angle_fn(n: u32, grid: &AngleGrid, phi: impl Fn(f64) -> C) -> Self {
        Self { n, phi: grid.nodes().into_iter().map(phi).collect() }
    }

    /// φ given as a function of momentum; nodes never sit at p = ∞.
    pub fn from_momentum_fn(n: u32, ctx: &BetaContext, grid: &AngleGrid, phi: impl Fn(f64) -> C) -> Self {
        let sb = ctx.sqrt_beta();
        Self::from_angle_fn(n, grid, |a| phi(a.tan() / sb))
    }

    pub fn phi(&self) -> &[C] {
        &self.phi
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_symbol(sym: &SymbolObservable, g: &AlgebraElement) -> Result<(), AlgebraError> {
    if sym.phi.len() != g.n() {
        return Err(SamplingError::LengthMismatch { expected: g.n(), got: sym.phi.len() }.into());
    }
    Ok(())
}

/// (qⁿφ) ⋆ g through the λ-ordered product Σ_l C(n,l) λ^l (1−λ)^{n−l} q^l φ q^{n−l}.
/// The q-multiplications are spectral derivatives at the seam-free sheared
/// coordinates; no q-integral is truncated.
pub fn star_symbol_left(sym: &SymbolObservable, g: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    check_symbol(sym, g)?;
    let lam = g.ctx.lambda();
    let mut acc = AlgebraElement::zeros(g.ctx, g.grid, g.q_offset);
    for l in 0..=sym.n {
        let w = binomial(sym.n, l) * lam.powi(l as i32) * (1.0 - lam).powi((sym.n - l) as i32);
        if w == 0.0 {
            continue;
        }
        let mut t = g.clone();
        for _ in 0..sym.n - l {
            t = t.left_q();
        }
        t = t.left_phi(&sym.phi);
        for _ in 0..l {
            t = t.left_q();
        }
        acc = acc.add(&t.scale(C::new(w, 0.0)))?;
    }
    Ok(acc)
}

/// g ⋆ (qⁿφ).
pub fn star_symbol_right(g: &AlgebraElement, sym: &SymbolObservable) -> Result<AlgebraElement, AlgebraError> {
    check_symbol(sym, g)?;
    let lam = g.ctx.lambda();
    let mut acc = AlgebraElement::zeros(g.ctx, g.grid, g.q_offset);
    for l in 0..=sym.n {
        let w = binomial(sym.n, l) * lam.powi(l as i32) * (1.0 - lam).powi((sym.n - l) as i32);
        if w == 0.0 {
            continue;
        }
        let mut t = g.clone();
        for _ in 0..l {
            t = t.right_q();
        }
        t = t.right_phi(&sym.phi);
        for _ in 0..sym.n - l {
            t = t.right_q();
        }
        acc = acc.add(&t.scale(C::new(w, 0.0)))?;
    }
    Ok(acc)
}

/// ⟨f⟩_ρ = tr(f ⋆ ρ).
pub fn expectation(f: &AlgebraElement, rho: &AlgebraElement) -> Result<C, AlgebraError> {
    Ok(f.star(rho)?.trace())
}

pub fn expectation_symbol(sym: &SymbolObservable, rho: &AlgebraElement) -> Result<C, AlgebraError> {
    Ok(star_symbol_left(sym, rho)?.trace())
}

/// Operator norm of f̂ (the C*-norm), by power iteration.
pub fn cstar_norm_estimate(f: &AlgebraElement) -> Result<f64, AlgebraError> {
    crate::operator_rep::operator_norm(f)
}
