//! Momentum-space operators: kernels, Wigner functions, q̂ and p̂, states.
//!
//! Kernels are taken with respect to dμ in the second slot, so
//! (f̂ψ)(a) = (π/(n√β)) Σ_b 𝔣(a, b) ψ(b). The quadrature weight is uniform,
//! which makes the adjoint kernel exactly the conjugate transpose.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::beta_arith::BetaContext;
use crate::sampling::{same_sector, spectral, AngleGrid, SamplingError, Wavefunction};
use crate::star_algebra::{AlgebraElement, AlgebraError, SymbolObservable};

type C = Complex64;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;
const POWER_SEED: u64 = 42;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("state has norm {0}, expected 1")]
    Unnormalized(f64),
    #[error("mixture weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(f64),
}

/// Samples 𝔣(α_a, α_b), row-major in (a, b).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    ctx: BetaContext,
    grid: AngleGrid,
    q_offset: f64,
    values: Vec<C>,
}

impl OperatorKernel {
    pub fn new(ctx: BetaContext, grid: AngleGrid, q_offset: f64, values: Vec<C>) -> Result<Self, SamplingError> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(SamplingError::LengthMismatch { expected: n * n, got: values.len() });
        }
        Ok(Self { ctx, grid, q_offset, values })
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> C {
        self.values[a * self.grid.n() + b]
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn q_offset(&self) -> f64 {
        self.q_offset
    }

    fn weight(&self) -> f64 {
        self.grid.spacing() / self.ctx.sqrt_beta()
    }

    /// The operator as a matrix acting on node values, weight included.
    pub fn matrix(&self) -> DMatrix<C> {
        let n = self.grid.n();
        let w = self.weight();
        DMatrix::from_fn(n, n, |a, b| self.values[a * n + b] * w)
    }

    pub fn adjoint(&self) -> OperatorKernel {
        let n = self.grid.n();
        let values = (0..n * n).map(|idx| self.values[(idx % n) * n + idx / n].conj()).collect();
        OperatorKernel { values, ..self.clone() }
    }

    /// Kernel of the product f̂ĝ.
    pub fn compose(&self, other: &OperatorKernel) -> OperatorKernel {
        let n = self.grid.n();
        let w = self.weight();
        let a = DMatrix::from_fn(n, n, |i, j| self.values[i * n + j]);
        let b = DMatrix::from_fn(n, n, |i, j| other.values[i * n + j]);
        let p = a * b;
        let values = (0..n * n).map(|idx| p[(idx / n, idx % n)] * w).collect();
        OperatorKernel { values, ..self.clone() }
    }
}

fn twist_phase(theta: f64, grid: &AngleGrid, a: usize, b: usize) -> C {
    C::from_polar(1.0, -theta * (grid.node(a) - grid.node(b)))
}

/// 𝔣(a, b) = f̃(a ⊖ b, a ⊖ λ(a ⊖ b))/(2πħ), with the lattice twist carried on
/// the raw node difference.
pub fn kernel_of(f: &AlgebraElement) -> OperatorKernel {
    let n = f.n();
    let g = *f.grid();
    let th = f.theta();
    let d0 = f.sheared();
    let s = 1.0 / (2.0 * PI * f.ctx().hbar());
    let values = (0..n * n)
        .map(|idx| {
            let (a, b) = (idx / n, idx % n);
            d0[g.sub(a, b) * n + a] * twist_phase(th, &g, a, b) * s
        })
        .collect();
    OperatorKernel { ctx: *f.ctx(), grid: g, q_offset: f.q_offset(), values }
}

pub fn element_of(k: &OperatorKernel) -> AlgebraElement {
    let n = k.grid.n();
    let g = k.grid;
    let th = k.q_offset / k.ctx.min_dq();
    let s = 2.0 * PI * k.ctx.hbar();
    let d0 = (0..n * n)
        .map(|idx| {
            let (u, a) = (idx / n, idx % n);
            let b = g.sub(a, u);
            k.values[a * n + b] * twist_phase(th, &g, a, b).conj() * s
        })
        .collect();
    AlgebraElement::from_sheared(k.ctx, g, k.q_offset, d0).expect("shape preserved")
}

fn check_pair(f: &AlgebraElement, psi: &Wavefunction) -> Result<(), OperatorError> {
    if f.ctx() != psi.ctx() {
        return Err(AlgebraError::ContextMismatch.into());
    }
    if f.grid() != psi.grid() {
        return Err(SamplingError::GridMismatch.into());
    }
    if !same_sector(f.ctx(), f.q_offset(), psi.q_offset()) {
        return Err(SamplingError::OffsetMismatch(f.q_offset(), psi.q_offset()).into());
    }
    Ok(())
}

/// f̂ψ.
pub fn apply_operator(f: &AlgebraElement, psi: &Wavefunction) -> Result<Wavefunction, OperatorError> {
    check_pair(f, psi)?;
    let k = kernel_of(f);
    Ok(apply_kernel(&k, psi))
}

pub fn apply_kernel(k: &OperatorKernel, psi: &Wavefunction) -> Wavefunction {
    let v = DVector::from_column_slice(psi.values());
    let out = k.matrix() * v;
    psi.with_values(out.as_slice().to_vec())
}

/// Tr f̂ = ∫ 𝔣(α, α) dμ.
pub fn trace_op(k: &OperatorKernel) -> C {
    let n = k.grid.n();
    let s: C = (0..n).map(|a| k.values[a * n + a]).sum();
    s * k.weight()
}

/// Tr(f̂†ĝ).
pub fn hilbert_schmidt(k1: &OperatorKernel, k2: &OperatorKernel) -> C {
    let w = k1.weight();
    let s: C = k1.values.iter().zip(&k2.values).map(|(a, b)| a.conj() * b).sum();
    s * w * w
}

/// W(φ, ψ), the element whose operator is ψ(φ, ·).
pub fn wigner(phi: &Wavefunction, psi: &Wavefunction) -> Result<AlgebraElement, OperatorError> {
    phi.compatible(psi)?;
    let n = psi.grid().n();
    let (pv, fv) = (psi.values(), phi.values());
    let values = (0..n * n).map(|idx| pv[idx / n] * fv[idx % n].conj()).collect();
    let k = OperatorKernel::new(*psi.ctx(), *psi.grid(), psi.q_offset(), values)?;
    Ok(element_of(&k))
}

/// (1/2πħ) ∫ W dq at each grid angle, i.e. f̃(0, α)/(2πħ).
pub fn marginal_momentum(rho: &AlgebraElement) -> Vec<f64> {
    let n = rho.n();
    let z = rho.grid().zero();
    let s = 1.0 / (2.0 * PI * rho.ctx().hbar());
    rho.sheared()[z * n..(z + 1) * n].iter().map(|v| v.re * s).collect()
}

/// q̂ψ = iħ√β ∂_α ψ, exact on the twisted trig-polynomial reading of ψ.
pub fn qhat_apply(psi: &Wavefunction) -> Wavefunction {
    let ctx = psi.ctx();
    let p = psi.periodic_part();
    let dp = spectral::derivative(&p, 1);
    let ic = C::new(0.0, ctx.min_dq());
    let q0 = psi.q_offset();
    let per: Vec<C> = p.iter().zip(&dp).map(|(&v, &d)| v * q0 + d * ic).collect();
    Wavefunction::from_periodic(*ctx, *psi.grid(), q0, per).expect("shape preserved")
}

/// p̂ψ = tan(α)/√β · ψ.
pub fn phat_apply(psi: &Wavefunction) -> Wavefunction {
    let sb = psi.ctx().sqrt_beta();
    let g = psi.grid();
    psi.with_values(psi.values().iter().enumerate().map(|(j, &v)| v * (g.node(j).tan() / sb)).collect())
}

/// f̂ for the symbol qⁿφ(p): Σ_l C(n,l) λ^l (1−λ)^{n−l} q̂^l φ(p̂) q̂^{n−l}.
pub struct LambdaOrdered<'a> {
    sym: &'a SymbolObservable,
    lambda: f64,
}

pub fn lambda_ordered_operator<'a>(ctx: &BetaContext, sym: &'a SymbolObservable) -> LambdaOrdered<'a> {
    LambdaOrdered { sym, lambda: ctx.lambda() }
}

impl LambdaOrdered<'_> {
    pub fn apply(&self, psi: &Wavefunction) -> Wavefunction {
        let n = self.sym.n;
        let lam = self.lambda;
        let mut acc = psi.scale(C::new(0.0, 0.0));
        for l in 0..=n {
            let w = binomial(n, l) * lam.powi(l as i32) * (1.0 - lam).powi((n - l) as i32);
            if w == 0.0 {
                continue;
            }
            let mut t = psi.clone();
            for _ in 0..n - l {
                t = qhat_apply(&t);
            }
            t = t.with_values(t.values().iter().zip(self.sym.phi()).map(|(a, b)| a * b).collect());
            for _ in 0..l {
                t = qhat_apply(&t);
            }
            acc = acc.add(&t.scale(C::new(w, 0.0))).expect("same sector");
        }
        acc
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub hermitian: bool,
    pub hermitian_residual: f64,
    pub trace: f64,
    pub trace_imag: f64,
    pub unit_trace: bool,
    pub min_eig: f64,
    pub positive: bool,
    pub pass: bool,
}

pub const STATE_HERMITIAN_TOL: f64 = 1e-9;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_MIN_EIG: f64 = -1e-9;

/// Checks ρ* = ρ, tr ρ = 1 and positivity of ρ̂.
pub fn state_check(rho: &AlgebraElement) -> StateReport {
    let herm_res = rho.involution().sub(rho).map(|d| d.norm_2()).unwrap_or(f64::INFINITY) / rho.norm_2().max(f64::MIN_POSITIVE);
    let tr = rho.trace();
    let m = kernel_of(rho).matrix();
    let h = (&m + m.adjoint()) * C::new(0.5, 0.0);
    let min_eig = h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    let hermitian = herm_res < STATE_HERMITIAN_TOL;
    let unit_trace = (tr - C::new(1.0, 0.0)).norm() < STATE_TRACE_TOL;
    let positive = min_eig >= STATE_MIN_EIG;
    StateReport {
        hermitian,
        hermitian_residual: herm_res,
        trace: tr.re,
        trace_imag: tr.im,
        unit_trace,
        min_eig,
        positive,
        pass: hermitian && unit_trace && positive,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UncertaintyReport {
    pub mean_q: f64,
    pub mean_p: f64,
    pub dq: f64,
    pub dp: f64,
    pub gup_slack: f64,
}

pub const NORMALIZATION_TOL: f64 = 1e-8;

pub fn uncertainty(psi: &Wavefunction) -> Result<UncertaintyReport, OperatorError> {
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(OperatorError::Unnormalized(nrm));
    }
    let ctx = psi.ctx();
    let qpsi = qhat_apply(psi);
    let ppsi = phat_apply(psi);
    let mean_q = psi.inner(&qpsi)?.re;
    let mean_p = psi.inner(&ppsi)?.re;
    let dq = qpsi.sub(&psi.scale(C::new(mean_q, 0.0)))?.norm();
    let dp = ppsi.sub(&psi.scale(C::new(mean_p, 0.0)))?.norm();
    let b = ctx.beta();
    let gup_slack = dq * dp - 0.5 * ctx.hbar() * (1.0 + b * dp * dp + b * mean_p * mean_p);
    Ok(UncertaintyReport { mean_q, mean_p, dq, dp, gup_slack })
}

/// ‖f̂‖ by power iteration on M†M, stopping when the eigen-residual falls
/// below 1e−8 relative.
pub fn operator_norm(f: &AlgebraElement) -> Result<f64, AlgebraError> {
    let m = kernel_of(f).matrix();
    let mh = m.adjoint();
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    v /= C::new(v.norm(), 0.0);
    for _ in 0..POWER_MAX_ITER {
        let w = &mh * (&m * &v);
        let lam = v.dotc(&w).re;
        if lam <= 0.0 {
            return Ok(0.0);
        }
        let res = (&w - &v * C::new(lam, 0.0)).norm();
        if res <= POWER_TOL * lam {
            return Ok(lam.sqrt());
        }
        v = &w / C::new(w.norm(), 0.0);
    }
    Err(AlgebraError::NotConverged(POWER_MAX_ITER))
}

/// A mixture Σ p_k W(φ_k, φ_k).
#[derive(Debug, Clone)]
pub struct DensityState {
    mixture: Vec<(f64, Wavefunction)>,
}

impl DensityState {
    pub fn new(mixture: Vec<(f64, Wavefunction)>) -> Result<Self, OperatorError> {
        let total: f64 = mixture.iter().map(|(p, _)| p).sum();
        if mixture.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(OperatorError::BadWeights(total));
        }
        for (_, phi) in &mixture {
            let nrm = phi.norm();
            if (nrm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(OperatorError::Unnormalized(nrm));
            }
        }
        Ok(Self { mixture })
    }

    pub fn to_element(&self) -> Result<AlgebraElement, OperatorError> {
        let mut it = self.mixture.iter();
        let (p0, phi0) = it.next().ok_or(OperatorError::BadWeights(0.0))?;
        let mut acc = wigner(phi0, phi0)?.scale(C::new(*p0, 0.0));
        for (p, phi) in it {
            acc = acc.add(&wigner(phi, phi)?.scale(C::new(*p, 0.0)))?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::TorusField;
    use crate::fixtures::{random_field, random_wave};

    fn ctx(lam: f64) -> BetaContext {
        BetaContext::new(0.9, 0.45, lam).unwrap()
    }

    fn psi0(c: BetaContext, g: AngleGrid) -> Wavefunction {
        let a = (c.sqrt_beta() / PI).sqrt();
        Wavefunction::from_fn(c, g, 0.0, |_| C::new(a, 0.0))
    }

    fn rho0(c: BetaContext, g: AngleGrid) -> AlgebraElement {
        let two_c = c.q_lattice_step();
        AlgebraElement::from_field(&TorusField::from_fn(c, g, 0.0, |_, _| C::new(two_c, 0.0)))
    }

    fn wave(c: BetaContext, g: AngleGrid, seed: u64, k: i64) -> Wavefunction {
        random_wave(c, g, seed, k).normalized()
    }

    /// Random normalized ψ vanishing at p = ∞, so p̂ψ is a trig polynomial too.
    fn tame_wave(c: BetaContext, g: AngleGrid, seed: u64, k: i64) -> Wavefunction {
        let r = random_wave(c, g, seed, k);
        let v = r.values().iter().zip(g.nodes()).map(|(z, a)| z * (C::new(1.0, 0.0) + C::from_polar(1.0, 2.0 * a))).collect();
        r.with_values(v).normalized()
    }

    fn el(c: BetaContext, g: AngleGrid, seed: u64, k: i64) -> AlgebraElement {
        AlgebraElement::from_field(&random_field(c, g, seed, k, k))
    }

    fn wdist(a: &Wavefunction, b: &Wavefunction) -> f64 {
        a.sub(b).unwrap().norm()
    }

    fn edist(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        a.sub(b).unwrap().norm_2()
    }

    #[test]
    fn kernel_round_trip() {
        let g = AngleGrid::new(17).unwrap();
        for (lam, off) in [(0.3, 0.0), (0.8, 0.21)] {
            let c = ctx(lam);
            let f = random_field(c, g, 1, 3, 3);
            let f = AlgebraElement::from_field(&TorusField::from_untwisted(c, g, off, f.untwisted()).unwrap());
            let back = element_of(&kernel_of(&f));
            assert!(edist(&back, &f) < 1e-12 * f.norm_2());
        }
    }

    #[test]
    fn kernel_examples() {
        let c = ctx(0.3);
        let g = AngleGrid::new(15).unwrap();
        let k = kernel_of(&rho0(c, g));
        let p = psi0(c, g);
        for a in 0..g.n() {
            for b in 0..g.n() {
                let e = p.values()[a] * p.values()[b].conj();
                assert!((k.get(a, b) - e).norm() < 1e-12 * e.norm());
            }
        }
        let c0 = ctx(0.0);
        let f = AlgebraElement::from_field(&random_field(c0, g, 2, 3, 3));
        let ff = f.to_field();
        let k = kernel_of(&f);
        let s = 2.0 * PI * c0.hbar();
        for a in 0..g.n() {
            for b in 0..g.n() {
                assert!((k.get(a, b) * s - ff.get(g.sub(a, b), a)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_action() {
        let c = ctx(0.35);
        let g = AngleGrid::new(21).unwrap();
        let p = psi0(c, g);
        assert!(wdist(&apply_operator(&rho0(c, g), &p).unwrap(), &p) < 1e-13);

        let (f, h) = (el(c, g, 3, 4), el(c, g, 4, 4));
        let psi = wave(c, g, 5, 6);
        let lhs = apply_operator(&f.star(&h).unwrap(), &psi).unwrap();
        let rhs = apply_operator(&f, &apply_operator(&h, &psi).unwrap()).unwrap();
        assert!(wdist(&lhs, &rhs) < 1e-12 * rhs.norm());

        let phi = wave(c, g, 6, 6);
        let a = phi.inner(&apply_operator(&f.involution(), &psi).unwrap()).unwrap();
        let b = apply_operator(&f, &phi).unwrap().inner(&psi).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
        let ka = kernel_of(&f.involution());
        let kb = kernel_of(&f).adjoint();
        assert!(ka.values().iter().zip(kb.values()).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn traces_and_inner_products() {
        let c = ctx(0.6);
        let g = AngleGrid::new(19).unwrap();
        assert!((trace_op(&kernel_of(&rho0(c, g))) - C::new(1.0, 0.0)).norm() < 1e-13);
        let (f, h) = (el(c, g, 7, 3), el(c, g, 8, 3));
        let (kf, kh) = (kernel_of(&f), kernel_of(&h));
        assert!((trace_op(&kf) - f.trace()).norm() < 1e-12 * f.trace().norm());
        let hs = hilbert_schmidt(&kf, &kh);
        let ip = f.inner(&h).unwrap();
        assert!((hs - ip).norm() < 1e-12 * ip.norm());
        let comp = kf.compose(&kh);
        let direct = kernel_of(&f.star(&h).unwrap());
        assert!(comp.values().iter().zip(direct.values()).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn wigner_functions() {
        let c = ctx(0.25);
        let g = AngleGrid::new(21).unwrap();
        let p = psi0(c, g);
        assert!(edist(&wigner(&p, &p).unwrap(), &rho0(c, g)) < 1e-13);

        let w: Vec<Wavefunction> = (0..4).map(|s| wave(c, g, 10 + s, 5)).collect();
        let w01 = wigner(&w[0], &w[1]).unwrap();
        assert!(edist(&w01.involution(), &wigner(&w[1], &w[0]).unwrap()) < 1e-12);
        let lhs = w01.inner(&wigner(&w[2], &w[3]).unwrap()).unwrap();
        let rhs = w[0].inner(&w[2]).unwrap().conj() * w[1].inner(&w[3]).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1e-3));

        let prod = w01.star(&wigner(&w[2], &w[3]).unwrap()).unwrap();
        let expect = wigner(&w[2], &w[1]).unwrap().scale(w[0].inner(&w[3]).unwrap());
        assert!(edist(&prod, &expect) < 1e-12);

        // transform-side form 2πħ conj φ(α − (1−λ)α′) ψ(α + λα′)
        let wf = w01.to_field();
        let nodes = g.nodes();
        let lam = c.lambda();
        for i in 0..g.n() {
            for k in 0..g.n() {
                let u = nodes[i];
                let e = w[0].eval(nodes[k] - (1.0 - lam) * u).conj() * w[1].eval(nodes[k] + lam * u) * (2.0 * PI * c.hbar());
                assert!((wf.get(i, k) - e).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn wigner_tensor_identities() {
        let c = ctx(0.4);
        let g = AngleGrid::new(19).unwrap();
        let (phi, psi) = (wave(c, g, 20, 4), wave(c, g, 21, 4));
        let f = el(c, g, 22, 4);
        let w = wigner(&phi, &psi).unwrap();
        let l = f.star(&w).unwrap();
        let r = wigner(&phi, &apply_operator(&f, &psi).unwrap()).unwrap();
        assert!(edist(&l, &r) < 1e-12 * r.norm_2());
        let l = w.star(&f).unwrap();
        let r = wigner(&apply_operator(&f.involution(), &phi).unwrap(), &psi).unwrap();
        assert!(edist(&l, &r) < 1e-12 * r.norm_2());
    }

    #[test]
    fn marginals() {
        let c = ctx(0.7);
        let g = AngleGrid::new(17).unwrap();
        let p = psi0(c, g);
        let m = marginal_momentum(&wigner(&p, &p).unwrap());
        assert!(m.iter().all(|v| (v - c.sqrt_beta() / PI).abs() < 1e-13));
        let phi = wave(c, g, 30, 5);
        let m = marginal_momentum(&wigner(&phi, &phi).unwrap());
        for (v, z) in m.iter().zip(phi.values()) {
            assert!((v - z.norm_sqr()).abs() < 1e-12);
        }
        let total: f64 = m.iter().sum::<f64>() * g.spacing() / c.sqrt_beta();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn position_and_momentum_operators() {
        let c = ctx(0.5);
        let g = AngleGrid::new(25).unwrap();
        assert!(qhat_apply(&psi0(c, g)).norm() < 1e-13);
        let psi = tame_wave(c, g, 40, 4);
        let qp = qhat_apply(&phat_apply(&psi));
        let pq = phat_apply(&qhat_apply(&psi));
        let comm = qp.sub(&pq).unwrap();
        let nodes = g.nodes();
        let expect = psi.with_values(
            psi.values().iter().zip(&nodes).map(|(z, a)| z * C::new(0.0, c.hbar() / a.cos().powi(2))).collect(),
        );
        assert!(wdist(&comm, &expect) < 1e-10 * expect.norm());
        let phi = wave(c, g, 41, 5);
        let a = phi.inner(&qhat_apply(&psi)).unwrap();
        let b = qhat_apply(&phi).inner(&psi).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn lambda_ordering() {
        let c = ctx(0.3);
        let g = AngleGrid::new(25).unwrap();
        let psi = wave(c, g, 50, 4);
        let sym = SymbolObservable::from_angle_fn(0, &g, |a| C::new(1.5, 0.0) + C::from_polar(0.5, 2.0 * a));
        let got = lambda_ordered_operator(&c, &sym).apply(&psi);
        let expect = psi.with_values(psi.values().iter().zip(sym.phi()).map(|(a, b)| a * b).collect());
        assert!(wdist(&got, &expect) < 1e-14);
        let q = SymbolObservable::q_power(1, &g);
        assert!(wdist(&lambda_ordered_operator(&c, &q).apply(&psi), &qhat_apply(&psi)) < 1e-12);

        // (φ, f̂ψ) = tr(f ⋆ W(φ, ψ)) for f = q²φ(p)
        let sym = SymbolObservable::from_angle_fn(2, &g, |a| C::new(1.0, 0.0) + C::from_polar(0.7, -2.0 * a + 0.3));
        let phi = wave(c, g, 51, 4);
        let lhs = phi.inner(&lambda_ordered_operator(&c, &sym).apply(&psi)).unwrap();
        let rhs = crate::star_algebra::expectation_symbol(&sym, &wigner(&phi, &psi).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }

    #[test]
    fn state_checks() {
        let c = ctx(0.3);
        let g = AngleGrid::new(17).unwrap();
        let (a, b) = (wave(c, g, 60, 3), wave(c, g, 61, 3));
        let mix = DensityState::new(vec![(0.5, a.clone()), (0.5, b.clone())]).unwrap().to_element().unwrap();
        let rep = state_check(&mix);
        assert!(rep.pass, "{rep:?}");
        let pure = wigner(&a, &a).unwrap();
        let rep = state_check(&pure);
        assert!(rep.pass && rep.min_eig.abs() < 1e-12);
        assert!(edist(&pure.star(&pure).unwrap(), &pure) < 1e-12);
        assert!(edist(&mix.star(&mix).unwrap(), &mix) > 1e-3);
        let rep = state_check(&wigner(&a, &b).unwrap());
        assert!(!rep.hermitian && !rep.pass);
        assert!(DensityState::new(vec![(0.7, a.clone()), (0.7, b)]).is_err());
        assert!(DensityState::new(vec![(1.0, a.scale(C::new(2.0, 0.0)))]).is_err());
        let json = serde_json::to_value(state_check(&pure)).unwrap();
        for key in ["hermitian", "trace", "min_eig"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn gup_holds_for_random_states() {
        let c = ctx(0.5);
        let g = AngleGrid::new(33).unwrap();
        for seed in 0..100 {
            let r = uncertainty(&tame_wave(c, g, 100 + seed, 5)).unwrap();
            assert!(r.gup_slack >= -1e-9, "seed {seed}: {r:?}");
        }
        let bad = random_wave(c, g, 7, 3).scale(C::new(3.0, 0.0));
        assert!(matches!(uncertainty(&bad), Err(OperatorError::Unnormalized(_))));
    }

    #[test]
    fn operator_norm_matches_svd() {
        let c = ctx(0.45);
        let g = AngleGrid::new(21).unwrap();
        for seed in 0..3 {
            let f = el(c, g, 70 + seed, 4);
            let est = operator_norm(&f).unwrap();
            let sv = kernel_of(&f).matrix().singular_values();
            let top = sv.iter().cloned().fold(0.0, f64::max);
            assert!((est - top).abs() < 1e-8 * top);
        }
        assert_eq!(operator_norm(&AlgebraElement::zeros(c, g, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn cross_sector_application_fails() {
        let c = ctx(0.5);
        let g = AngleGrid::new(9).unwrap();
        let f = el(c, g, 80, 1);
        let psi = Wavefunction::from_fn(c, g, 0.4, |_| C::new(1.0, 0.0));
        assert!(apply_operator(&f, &psi).is_err());
    }
}
