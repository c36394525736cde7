//! Position eigenvectors and maximal-localization states.
//!
//! Both families carry the phase e^{−iξα/(ħ√β)}, which is not π-periodic for
//! generic ξ. They are therefore stored in the lattice sector q_offset = ξ
//! (position eigenvectors) or ξ + ħ√β (ML states, whose cos α supplies an
//! extra e^{−iα}), where the remaining factor is an exact trig polynomial.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::beta_arith::{angle_of, BetaContext, ExtReal};
use crate::operator_rep::{uncertainty, wigner, OperatorError};
use crate::sampling::{AngleGrid, TorusField, Wavefunction};
use crate::star_algebra::AlgebraElement;

type C = Complex64;

/// sin(πx)/(πx).
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

#[derive(Debug, Clone)]
pub struct PositionEigenvector {
    pub xi: f64,
    pub psi: Wavefunction,
    pub rho: AlgebraElement,
    ctx: BetaContext,
}

/// ψ_ξ = √(√β/π) e^{−iξα/(ħ√β)} and ρ̃_ξ = 2ħ√β e^{−iξα′/(ħ√β)}.
pub fn position_eigenvector(ctx: &BetaContext, grid: AngleGrid, xi: f64) -> PositionEigenvector {
    let amp = (ctx.sqrt_beta() / PI).sqrt();
    let psi = Wavefunction::from_periodic(*ctx, grid, xi, vec![C::new(amp, 0.0); grid.n()]).expect("grid-sized");
    let two_c = ctx.q_lattice_step();
    let field = TorusField::from_untwisted(*ctx, grid, xi, vec![C::new(two_c, 0.0); grid.n() * grid.n()]).expect("grid-sized");
    PositionEigenvector { xi, psi, rho: AlgebraElement::from_field(&field), ctx: *ctx }
}

impl PositionEigenvector {
    /// ρ_ξ(q, p) = sinc((q − ξ)/(2ħ√β)).
    pub fn eval(&self, q: f64) -> f64 {
        sinc((q - self.xi) / self.ctx.q_lattice_step())
    }
}

/// How the lattice-regularized ψ_ξ fails to be a state.
#[derive(Debug, Clone, Serialize)]
pub struct PositionDefect {
    pub dq: f64,
    pub min_dq: f64,
    pub sizes: Vec<usize>,
    pub second_moment_p: Vec<f64>,
    pub slope: f64,
    pub not_a_state: bool,
}

/// Δq of ψ_ξ sits below Δq₀, and ⟨p̂²⟩ keeps growing with n (ψ_ξ is not in
/// the domain of p̂ in the continuum).
pub fn position_eigenvector_defect(ctx: &BetaContext, xi: f64, sizes: &[usize]) -> Result<PositionDefect, OperatorError> {
    let mut dq = 0.0;
    let mut sizes_used = vec![];
    let mut moments = vec![];
    for &n in sizes {
        let grid = AngleGrid::at_least(n);
        let psi = position_eigenvector(ctx, grid, xi).psi;
        let r = uncertainty(&psi)?;
        dq = r.dq;
        moments.push(r.dp * r.dp + r.mean_p * r.mean_p);
        sizes_used.push(grid.n());
    }
    let slope = loglog_slope(&sizes_used.iter().map(|&n| n as f64).collect::<Vec<_>>(), &moments);
    Ok(PositionDefect {
        dq,
        min_dq: ctx.min_dq(),
        sizes: sizes_used,
        second_moment_p: moments,
        slope,
        not_a_state: dq < ctx.min_dq() && slope > 0.0,
    })
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// ψ_ξ^ML = √(2√β/π) cos α e^{−iξα/(ħ√β)}, normalized under dμ.
pub fn ml_wavefunction(ctx: &BetaContext, grid: AngleGrid, xi: f64) -> Wavefunction {
    let amp = (2.0 * ctx.sqrt_beta() / PI).sqrt();
    // cos α e^{−iξα/c} = e^{−i(ξ+c)α/c} (1 + e^{2iα})/2
    let per = grid.nodes().iter().map(|&a| (C::new(1.0, 0.0) + C::from_polar(1.0, 2.0 * a)) * (0.5 * amp)).collect();
    Wavefunction::from_periodic(*ctx, grid, xi + ctx.min_dq(), per).expect("grid-sized")
}

/// Closed-form phase-space function of the maximal-localization state.
#[derive(Debug, Clone, Copy)]
pub struct MlState {
    ctx: BetaContext,
    xi: f64,
}

impl MlState {
    pub fn new(ctx: BetaContext, xi: f64) -> Self {
        Self { ctx, xi }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    fn parts(&self, q: f64, p: ExtReal) -> (f64, f64, f64) {
        let a = angle_of(&self.ctx, p).value();
        // (1−βp²)/(1+βp²) = cos 2α, √βp/(1+βp²) = sin 2α / 2; both finite at p = ∞
        ((q - self.xi) / self.ctx.q_lattice_step(), (2.0 * a).cos(), 0.5 * (2.0 * a).sin())
    }

    /// ρ_ξ^ML(q, p) for the context's λ.
    pub fn eval(&self, q: f64, p: ExtReal) -> C {
        let (u, a, b) = self.parts(q, p);
        let l = self.ctx.lambda();
        let (sm, sp) = (sinc(0.5 - l - u), sinc(0.5 - l + u));
        let re = 0.5 * a * (sm + sp) + 0.5 * (sinc(0.5 - u) + sinc(0.5 + u));
        C::new(re, b * (sm - sp))
    }

    /// The separately stated λ = 1/2 form (ignores the context's λ).
    pub fn eval_half(&self, q: f64, p: ExtReal) -> f64 {
        let (u, a, _) = self.parts(q, p);
        a * sinc(u) + 0.5 * (sinc(0.5 - u) + sinc(0.5 + u))
    }

    /// The separately stated λ = 0 form (ignores the context's λ).
    pub fn eval_lambda0(&self, q: f64, p: ExtReal) -> C {
        let (u, a, b) = self.parts(q, p);
        let (sm, sp) = (sinc(0.5 - u), sinc(0.5 + u));
        // 1/(1+βp²) = (1 + cos 2α)/2
        C::new(0.5 * (1.0 + a) * (sm + sp), b * (sm - sp))
    }

    /// Values on a (q, p) window, indexed [iq * ps.len() + ip].
    pub fn window(&self, qs: &[f64], ps: &[f64]) -> Vec<C> {
        qs.iter().flat_map(|&q| ps.iter().map(move |&p| self.eval(q, ExtReal::Finite(p)))).collect()
    }

    pub fn wavefunction(&self, grid: AngleGrid) -> Wavefunction {
        ml_wavefunction(&self.ctx, grid, self.xi)
    }

    /// W(ψ^ML, ψ^ML) on the grid.
    pub fn element(&self, grid: AngleGrid) -> AlgebraElement {
        let psi = self.wavefunction(grid);
        wigner(&psi, &psi).expect("same wavefunction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_rep::{qhat_apply, state_check};
    use crate::sampling::synth;
    use crate::star_algebra::{expectation_symbol, star_symbol_left, star_symbol_right, SymbolObservable};

    fn ctx(lam: f64) -> BetaContext {
        BetaContext::new(1.0, 1.0, lam).unwrap()
    }

    /// ∫_{−π/2}^{π/2} g(t) dt by composite Simpson.
    fn simpson(g: impl Fn(f64) -> C) -> C {
        let m = 20_000;
        let h = PI / m as f64;
        let mut s = g(-PI / 2.0) + g(PI / 2.0);
        for j in 1..m {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += g(-PI / 2.0 + j as f64 * h) * w;
        }
        s * (h / 3.0)
    }

    /// The three trigonometric integrals that produce the closed form.
    fn integral_route(c: &BetaContext, xi: f64, q: f64, p: f64) -> C {
        let b = c.beta();
        let l = c.lambda();
        let k = (q - xi) / c.min_dq();
        let e = |t: f64| C::from_polar(1.0, k * t);
        let d = 1.0 + b * p * p;
        let i1 = simpson(|t| e(t) * ((1.0 - 2.0 * l) * t).cos());
        let i2 = simpson(|t| e(t) * t.cos());
        let i3 = simpson(|t| e(t) * ((1.0 - 2.0 * l) * t).sin());
        (i1 * ((1.0 - b * p * p) / d) + i2 + i3 * (2.0 * b.sqrt() * p / d)) / PI
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(1.0).abs() < 1e-15 && sinc(-3.0).abs() < 1e-15);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_integral_route() {
        for lam in [0.0, 0.3, 0.5, 1.0] {
            let c = BetaContext::new(0.7, 0.8, lam).unwrap();
            let s = MlState::new(c, 0.4);
            for &(q, p) in &[(0.0, 0.0), (1.3, -0.7), (-2.2, 3.1), (5.0, 0.2)] {
                let a = s.eval(q, ExtReal::Finite(p));
                let b = integral_route(&c, 0.4, q, p);
                assert!((a - b).norm() < 1e-10, "lam {lam} at ({q},{p}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let s = MlState::new(ctx(0.5), 0.0);
        assert!((s.eval(0.0, ExtReal::Finite(0.0)).re - (1.0 + 2.0 / PI)).abs() < 1e-14);
        for &(q, p) in &[(0.3, 1.2), (-4.0, -2.0), (7.0, 0.0)] {
            let v = s.eval(q, ExtReal::Finite(p));
            assert!(v.im.abs() < 1e-15);
            assert!((v.re - s.eval_half(q, ExtReal::Finite(p))).abs() < 1e-14);
        }
        let s0 = MlState::new(ctx(0.0), 1.1);
        for &(q, p) in &[(0.3, 1.2), (-4.0, -2.0), (7.0, 0.0)] {
            assert!((s0.eval(q, ExtReal::Finite(p)) - s0.eval_lambda0(q, ExtReal::Finite(p))).norm() < 1e-14);
        }
        // shift covariance
        let c = ctx(0.3);
        let (a, z) = (MlState::new(c, 2.5), MlState::new(c, 0.0));
        assert_eq!(a.eval(3.0, ExtReal::Finite(0.4)), z.eval(0.5, ExtReal::Finite(0.4)));
    }

    #[test]
    fn position_eigenvectors() {
        let c = BetaContext::new(0.6, 0.9, 0.3).unwrap();
        let g = AngleGrid::new(33).unwrap();
        let q = SymbolObservable::q_power(1, &g);
        for xi in [0.0, 1.0, c.q_lattice_step(), 3.7] {
            let pe = position_eigenvector(&c, g, xi);
            assert_eq!(pe.eval(xi), 1.0);
            assert!(pe.eval(xi + 3.0 * c.q_lattice_step()).abs() < 1e-15);
            let r = &pe.rho;
            let scaled = r.scale(C::new(xi, 0.0));
            let tol = 1e-12 * r.norm_2().max(1.0);
            assert!(star_symbol_left(&q, r).unwrap().sub(&scaled).unwrap().norm_2() < tol);
            assert!(star_symbol_right(r, &q).unwrap().sub(&scaled).unwrap().norm_2() < tol);
            let qpsi = qhat_apply(&pe.psi);
            assert!(qpsi.sub(&pe.psi.scale(C::new(xi, 0.0))).unwrap().norm() < 1e-12 * (1.0 + xi));
            let w = wigner(&pe.psi, &pe.psi).unwrap();
            assert!(w.sub(r).unwrap().norm_2() < 1e-12);
            // synth reproduces the sinc on its lattice
            for &qq in &[xi, xi + c.q_lattice_step(), xi - 5.0 * c.q_lattice_step()] {
                assert!((synth(&r.to_field(), qq, ExtReal::Finite(0.8)) - C::new(pe.eval(qq), 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn position_eigenvector_is_not_a_state() {
        let c = ctx(0.5);
        let d = position_eigenvector_defect(&c, 0.7, &[128, 256, 512]).unwrap();
        assert_eq!(d.sizes, vec![129, 257, 513]);
        assert!(d.dq < 1e-12);
        assert!(d.slope > 0.9, "{d:?}");
        assert!(d.not_a_state);
    }

    #[test]
    fn ml_wavefunction_properties() {
        let c = BetaContext::new(0.5, 0.7, 0.3).unwrap();
        let g = AngleGrid::new(65).unwrap();
        for xi in [0.0, 1.3] {
            let psi = ml_wavefunction(&c, g, xi);
            assert!((psi.norm() - 1.0).abs() < 1e-14);
            let nodes = g.nodes();
            let amp = (2.0 * c.sqrt_beta() / PI).sqrt();
            for (j, &a) in nodes.iter().enumerate() {
                let e = C::from_polar(amp * a.cos(), -xi * a / c.min_dq());
                assert!((psi.values()[j] - e).norm() < 1e-14);
            }
            let r = uncertainty(&psi).unwrap();
            assert!((r.mean_q - xi).abs() < 1e-12);
            assert!(r.mean_p.abs() < 1e-12);
            assert!((r.dq - c.min_dq()).abs() < 1e-12);
            assert!(r.gup_slack.abs() < 1e-12);
        }
        let edge = ml_wavefunction(&c, g, 0.0).values()[0].norm();
        assert!(edge < 0.05);
    }

    #[test]
    fn ml_state_is_a_pure_state() {
        let c = BetaContext::new(1.0, 1.0, 0.3).unwrap();
        let g = AngleGrid::new(65).unwrap();
        let s = MlState::new(c, 0.9);
        let rho = s.element(g);
        let rep = state_check(&rho);
        assert!(rep.pass, "{rep:?}");
        assert!(rho.star(&rho).unwrap().sub(&rho).unwrap().norm_2() < 1e-12);
        let q = SymbolObservable::q_power(1, &g);
        assert!((expectation_symbol(&q, &rho).unwrap() - C::new(0.9, 0.0)).norm() < 1e-12);
        // odd φ(p) has zero mean in the state centered at p = 0
        let odd = SymbolObservable::from_angle_fn(0, &g, |a| C::new(a, 0.0));
        assert!(expectation_symbol(&odd, &s.element(g)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn wigner_matches_closed_form() {
        let c = BetaContext::new(1.0, 1.0, 0.3).unwrap();
        let s = MlState::new(c, 0.5);
        let mut errs = vec![];
        for n in [129, 513] {
            let f = s.element(AngleGrid::new(n).unwrap()).to_field();
            let mut e: f64 = 0.0;
            for &q in &[-6.0, -1.0, 0.0, 0.5, 2.3, 8.0] {
                for &p in &[-5.0, -0.4, 0.0, 1.0, 9.0] {
                    e = e.max((synth(&f, q, ExtReal::Finite(p)) - s.eval(q, ExtReal::Finite(p))).norm());
                }
            }
            errs.push(e);
        }
        assert!(errs[1] < 1e-4 && errs[0] / errs[1] > 3.0, "{errs:?}");
    }
}
