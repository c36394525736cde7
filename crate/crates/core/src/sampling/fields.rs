use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{same_sector, spectral, AngleGrid, SamplingError};
use crate::beta_arith::{angle_of, BetaContext, ExtReal};

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Samples of f̃(α′, α) on the n×n torus grid, row index = α′ (the variable
/// conjugate to q), column index = α.
///
/// `q_offset` places the q-lattice at q_offset + 2ħ√β·m. Along α′ the field
/// is read as e^{−i q_offset α′/(ħ√β)} times a π-periodic trig polynomial;
/// along α it is plainly π-periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    ctx: BetaContext,
    grid: AngleGrid,
    q_offset: f64,
    data: Vec<C>,
}

impl TorusField {
    pub fn new(ctx: BetaContext, grid: AngleGrid, q_offset: f64, data: Vec<C>) -> Result<Self, SamplingError> {
        let n = grid.n();
        if data.len() != n * n {
            return Err(SamplingError::LengthMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { ctx, grid, q_offset, data })
    }

    pub fn zeros(ctx: BetaContext, grid: AngleGrid) -> Self {
        Self { ctx, grid, q_offset: 0.0, data: vec![zero(); grid.n() * grid.n()] }
    }

    pub fn from_fn(ctx: BetaContext, grid: AngleGrid, q_offset: f64, f: impl Fn(f64, f64) -> C + Sync) -> Self {
        let n = grid.n();
        let nodes = grid.nodes();
        let data = (0..n * n).into_par_iter().map(|idx| f(nodes[idx / n], nodes[idx % n])).collect();
        Self { ctx, grid, q_offset, data }
    }

    /// Build from the untwisted (periodic) samples.
    pub fn from_untwisted(ctx: BetaContext, grid: AngleGrid, q_offset: f64, mut data: Vec<C>) -> Result<Self, SamplingError> {
        let n = grid.n();
        if data.len() != n * n {
            return Err(SamplingError::LengthMismatch { expected: n * n, got: data.len() });
        }
        twist_rows(&mut data, &grid, -q_offset / ctx.min_dq());
        Ok(Self { ctx, grid, q_offset, data })
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

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C> {
        self.data
    }

    pub fn get(&self, i: usize, k: usize) -> C {
        self.data[i * self.n() + k]
    }

    pub fn theta(&self) -> f64 {
        self.q_offset / self.ctx.min_dq()
    }

    pub fn untwisted(&self) -> Vec<C> {
        let mut d = self.data.clone();
        twist_rows(&mut d, &self.grid, self.theta());
        d
    }

    pub fn with_ctx(mut self, ctx: BetaContext) -> Self {
        self.ctx = ctx;
        self
    }

    pub fn compatible(&self, other: &TorusField) -> Result<(), SamplingError> {
        if self.grid != other.grid || self.ctx != other.ctx {
            return Err(SamplingError::GridMismatch);
        }
        if !same_sector(&self.ctx, self.q_offset, other.q_offset) {
            return Err(SamplingError::OffsetMismatch(self.q_offset, other.q_offset));
        }
        Ok(())
    }

    fn zip(&self, other: &TorusField, f: impl Fn(C, C) -> C) -> Result<TorusField, SamplingError> {
        self.compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(TorusField { data, ..self.clone() })
    }

    pub fn add(&self, other: &TorusField) -> Result<TorusField, SamplingError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TorusField) -> Result<TorusField, SamplingError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C) -> TorusField {
        TorusField { data: self.data.iter().map(|&a| a * s).collect(), ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// f̃(α′_i + d_alpha_prime, α_k + d_alpha[i]) by trigonometric interpolation.
    pub fn shift_field(&self, d_alpha_prime: f64, d_alpha: &[f64]) -> Result<TorusField, SamplingError> {
        let n = self.n();
        if d_alpha.len() != n {
            return Err(SamplingError::LengthMismatch { expected: n, got: d_alpha.len() });
        }
        let mut d = self.untwisted();
        if d_alpha_prime != 0.0 {
            spectral::map_columns(&mut d, n, |_, col| spectral::shift_in_place(col, d_alpha_prime));
        }
        spectral::shift_rows(&mut d, n, d_alpha);
        let th = self.theta();
        let nodes = self.grid.nodes();
        d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let ph = C::from_polar(1.0, -th * (nodes[i] + d_alpha_prime));
            row.iter_mut().for_each(|z| *z *= ph);
        });
        Ok(TorusField { data: d, ..self.clone() })
    }

    /// ∂^order along α′, respecting the twist.
    pub fn deriv_alpha_prime(&self, order: u32) -> TorusField {
        let n = self.n();
        let th = self.theta();
        let mut d = self.untwisted();
        spectral::map_columns(&mut d, n, |_, col| {
            let coef = spectral::coefficients(col);
            let scaled: Vec<C> = coef
                .iter()
                .enumerate()
                .map(|(k, &c)| c * C::new(0.0, 2.0 * spectral::mode(k, n) as f64 - th).powu(order))
                .collect();
            col.copy_from_slice(&spectral::from_coefficients(&scaled));
        });
        TorusField::from_untwisted(self.ctx, self.grid, self.q_offset, d).expect("shape preserved")
    }

    /// ∂^order along α.
    pub fn deriv_alpha(&self, order: u32) -> TorusField {
        let mut d = self.data.clone();
        spectral::derivative_rows(&mut d, self.n(), order);
        TorusField { data: d, ..self.clone() }
    }

    /// G[j][k] = F[k][j]. Only meaningful without a twist.
    pub fn transposed(&self) -> TorusField {
        TorusField { data: spectral::transpose(&self.data, self.n()), ..self.clone() }
    }
}

fn twist_rows(data: &mut [C], grid: &AngleGrid, theta: f64) {
    if theta == 0.0 {
        return;
    }
    let n = grid.n();
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let ph = C::from_polar(1.0, theta * grid.node(i));
        row.iter_mut().for_each(|z| *z *= ph);
    });
}

/// A state vector ψ sampled at the grid nodes: values are ψ(p(g_j)).
///
/// Off-grid, ψ(x) = e^{−i q_offset x/(ħ√β)} P(x) with P the periodic
/// interpolant, evaluated at the raw (unreduced) angle x.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    ctx: BetaContext,
    grid: AngleGrid,
    q_offset: f64,
    values: Vec<C>,
}

impl Wavefunction {
    pub fn new(ctx: BetaContext, grid: AngleGrid, q_offset: f64, values: Vec<C>) -> Result<Self, SamplingError> {
        if values.len() != grid.n() {
            return Err(SamplingError::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Self { ctx, grid, q_offset, values })
    }

    pub fn from_fn(ctx: BetaContext, grid: AngleGrid, q_offset: f64, f: impl Fn(f64) -> C) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { ctx, grid, q_offset, values }
    }

    /// Build from samples of the periodic factor P.
    pub fn from_periodic(ctx: BetaContext, grid: AngleGrid, q_offset: f64, periodic: Vec<C>) -> Result<Self, SamplingError> {
        let th = q_offset / ctx.min_dq();
        let values = periodic
            .iter()
            .enumerate()
            .map(|(j, &p)| p * C::from_polar(1.0, -th * grid.node(j)))
            .collect();
        Self::new(ctx, grid, q_offset, values)
    }

    pub fn ctx(&self) -> &BetaContext {
        &self.ctx
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn q_offset(&self) -> f64 {
        self.q_offset
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn theta(&self) -> f64 {
        self.q_offset / self.ctx.min_dq()
    }

    pub fn periodic_part(&self) -> Vec<C> {
        let th = self.theta();
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| v * C::from_polar(1.0, th * self.grid.node(j)))
            .collect()
    }

    pub fn eval(&self, x: f64) -> C {
        let d = spectral::coefficients(&self.periodic_part());
        spectral::eval_coefficients(&d, x) * C::from_polar(1.0, -self.theta() * x)
    }

    pub fn with_values(&self, values: Vec<C>) -> Wavefunction {
        Wavefunction { values, ..self.clone() }
    }

    pub fn compatible(&self, other: &Wavefunction) -> Result<(), SamplingError> {
        if self.grid != other.grid || self.ctx != other.ctx {
            return Err(SamplingError::GridMismatch);
        }
        if !same_sector(&self.ctx, self.q_offset, other.q_offset) {
            return Err(SamplingError::OffsetMismatch(self.q_offset, other.q_offset));
        }
        Ok(())
    }

    /// (φ, ψ) = ∫ conj φ ψ dμ.
    pub fn inner(&self, other: &Wavefunction) -> Result<C, SamplingError> {
        self.compatible(other)?;
        let s: C = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * (self.grid.spacing() / self.ctx.sqrt_beta()))
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.spacing() / self.ctx.sqrt_beta()).sqrt()
    }

    pub fn normalized(&self) -> Wavefunction {
        self.scale(C::new(1.0 / self.norm(), 0.0))
    }

    pub fn scale(&self, s: C) -> Wavefunction {
        self.with_values(self.values.iter().map(|&v| v * s).collect())
    }

    pub fn add(&self, other: &Wavefunction) -> Result<Wavefunction, SamplingError> {
        self.compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Wavefunction) -> Result<Wavefunction, SamplingError> {
        self.compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }
}

/// Samples f(q_m, p(α_k)) on the q-lattice q_m = q_offset + 2ħ√β·m,
/// m ∈ [−M, M], row-major in (m, k).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    ctx: BetaContext,
    grid: AngleGrid,
    q_offset: f64,
    m_max: usize,
    data: Vec<C>,
}

impl LatticeField {
    pub fn new(ctx: BetaContext, grid: AngleGrid, q_offset: f64, m_max: usize, data: Vec<C>) -> Result<Self, SamplingError> {
        let expected = (2 * m_max + 1) * grid.n();
        if data.len() != expected {
            return Err(SamplingError::LengthMismatch { expected, got: data.len() });
        }
        Ok(Self { ctx, grid, q_offset, m_max, data })
    }

    /// Sample f(q, α) with α the angle of the momentum.
    pub fn from_fn(ctx: BetaContext, grid: AngleGrid, q_offset: f64, m_max: usize, f: impl Fn(f64, f64) -> C + Sync) -> Self {
        let n = grid.n();
        let rows = 2 * m_max + 1;
        let step = ctx.q_lattice_step();
        let data = (0..rows * n)
            .into_par_iter()
            .map(|idx| {
                let q = q_offset + step * (idx / n) as f64 - step * m_max as f64;
                f(q, grid.node(idx % n))
            })
            .collect();
        Self { ctx, grid, q_offset, m_max, data }
    }

    pub fn ctx(&self) -> &BetaContext {
        &self.ctx
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn q_offset(&self) -> f64 {
        self.q_offset
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn q(&self, row: usize) -> f64 {
        self.q_offset + self.ctx.q_lattice_step() * (row as f64 - self.m_max as f64)
    }

    pub fn get(&self, row: usize, k: usize) -> C {
        self.data[row * self.grid.n() + k]
    }
}

/// f̃(α′_j, α_k) = 2ħ√β Σ_m f(q_m, α_k) e^{−i q_m α′_j/(ħ√β)}.
pub fn analyze(lattice: &LatticeField) -> TorusField {
    let ctx = lattice.ctx;
    let grid = lattice.grid;
    let n = grid.n();
    let h = grid.half();
    let rows = 2 * lattice.m_max + 1;
    // e^{−2imα′_j} only depends on m mod n: fold, then one DFT per column.
    let mut folded = vec![zero(); n * n];
    for r in 0..rows {
        let m = r as i64 - lattice.m_max as i64;
        let b = m.rem_euclid(n as i64) as usize;
        for k in 0..n {
            folded[b * n + k] += lattice.data[r * n + k];
        }
    }
    let mut cols = spectral::transpose(&folded, n);
    let pref = ctx.q_lattice_step();
    cols.par_chunks_mut(n).for_each(|col| {
        // Σ_b S_b e^{2πib h/n} e^{−2πibj/n}
        for (b, z) in col.iter_mut().enumerate() {
            *z *= C::from_polar(pref, 2.0 * PI * (b * h) as f64 / n as f64);
        }
        spectral::dft_in_place(col);
    });
    let untwisted = spectral::transpose(&cols, n);
    TorusField::from_untwisted(ctx, grid, lattice.q_offset, untwisted).expect("shape preserved")
}

fn row_coefficients(field: &TorusField) -> Vec<Vec<C>> {
    let n = field.n();
    field.data.par_chunks(n).map(spectral::coefficients).collect()
}

fn synth_from_rows(field: &TorusField, coeffs: &[Vec<C>], qs: &[f64], alpha: f64) -> Vec<C> {
    let ctx = field.ctx;
    let c = ctx.min_dq();
    let nodes = field.grid.nodes();
    let r: Vec<C> = coeffs.iter().map(|d| spectral::eval_coefficients(d, alpha)).collect();
    let pref = field.grid.spacing() / (2.0 * PI * c);
    qs.iter()
        .map(|&q| {
            let s: C = r.iter().zip(&nodes).map(|(&v, &u)| v * C::from_polar(1.0, q * u / c)).sum();
            s * pref
        })
        .collect()
}

/// f(q, p) = (1/(2πħ√β)) (π/n) Σ_j f̃(α′_j, α(p)) e^{i q α′_j/(ħ√β)}.
pub fn synth(field: &TorusField, q: f64, p: ExtReal) -> C {
    let alpha = angle_of(&field.ctx, p).value();
    synth_from_rows(field, &row_coefficients(field), &[q], alpha)[0]
}

/// `synth` on a product grid; result indexed [iq * ps.len() + ip].
pub fn synth_grid(field: &TorusField, qs: &[f64], ps: &[ExtReal]) -> Vec<C> {
    let coeffs = row_coefficients(field);
    let cols: Vec<Vec<C>> = ps
        .par_iter()
        .map(|&p| synth_from_rows(field, &coeffs, qs, angle_of(&field.ctx, p).value()))
        .collect();
    let mut out = vec![zero(); qs.len() * ps.len()];
    for (ip, col) in cols.iter().enumerate() {
        for (iq, &v) in col.iter().enumerate() {
            out[iq * ps.len() + ip] = v;
        }
    }
    out
}

/// Back to q-lattice samples: rows q_offset + 2ħ√β·m for |m| ≤ m_max at the
/// grid momenta. Inverts `analyze` when m_max = (n − 1)/2.
pub fn lattice_of(field: &TorusField, m_max: usize) -> LatticeField {
    let ctx = field.ctx;
    let sb = ctx.sqrt_beta();
    let step = ctx.q_lattice_step();
    let qs: Vec<f64> = (0..2 * m_max + 1).map(|r| field.q_offset + step * (r as f64 - m_max as f64)).collect();
    let ps: Vec<ExtReal> = field.grid.nodes().iter().map(|a| ExtReal::Finite(a.tan() / sb)).collect();
    let data = synth_grid(field, &qs, &ps);
    LatticeField::new(ctx, field.grid, field.q_offset, m_max, data).expect("shape matches")
}

/// ‖f‖_{n,m} = max |D_{p′}^n D_p^m f̃| with D = √β ∂ on each axis.
pub fn seminorm(field: &TorusField, n_idx: u32, m_idx: u32) -> f64 {
    let sb = field.ctx.sqrt_beta();
    let d = field.deriv_alpha_prime(n_idx).deriv_alpha(m_idx);
    d.max_abs() * sb.powi((n_idx + m_idx) as i32)
}
