//! Invariant suites behind `mlq verify`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;

use super::report::Check;
use super::RunConfig;
use crate::beta_arith::{BetaContext, ExtReal};
use crate::fixtures::{orthonormal_waves, random_element, tame_wave};
use crate::formal_cas::{classical_limit, formal_commutator, formal_star, formal_star_windowed, parse, DerivationPair, FormalPoly};
use crate::operator_rep::{
    apply_operator, hilbert_schmidt, kernel_of, marginal_momentum, operator_norm, qhat_apply, trace_op, uncertainty, wigner,
};
use crate::sampling::{analyze, synth, synth_grid, AngleGrid, Wavefunction};
use crate::star_algebra::{star_symbol_left, star_symbol_right, AlgebraElement, SymbolObservable};
use crate::states::{loglog_slope, ml_wavefunction, position_eigenvector, MlState};
use crate::tolerances as tol;

type C = Complex64;

const INSUFFICIENT: &str = "insufficient resolution";

/// Grids below this skip the suites that need a resolved kink or a wide
/// q-window.
pub const MIN_SPECTRAL_GRID: usize = 257;

fn rel(a: f64, b: f64) -> f64 {
    a / b.max(1e-300)
}

fn edist(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    a.sub(b).map(|d| d.norm_2()).unwrap_or(f64::INFINITY)
}

fn erel(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    rel(edist(a, b), b.norm_2())
}

fn wdist(a: &Wavefunction, b: &Wavefunction) -> f64 {
    a.sub(b).map(|d| d.norm()).unwrap_or(f64::INFINITY)
}

fn crel(a: C, b: C) -> f64 {
    rel((a - b).norm(), b.norm())
}

/// Mode cap for random test elements so pointwise products stay resolved.
fn band(grid: &AngleGrid) -> i64 {
    ((grid.n() as i64 - 1) / 8).clamp(1, 4)
}

struct Env {
    ctx: BetaContext,
    grid: AngleGrid,
    seed: u64,
    scale: tol::Scaled,
}

impl Env {
    fn el(&self, k: u64) -> AlgebraElement {
        random_element(self.ctx, self.grid, self.seed.wrapping_mul(1000).wrapping_add(k), band(&self.grid))
    }

    fn at_most(&self, name: &str, measured: f64, t: f64) -> Check {
        Check::at_most(name, measured, self.scale.of(t))
    }
}

fn exact(name: &str, ok: bool) -> Check {
    Check::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
}

fn formal_suite() -> Vec<Check> {
    let (q, p) = (FormalPoly::q(), FormalPoly::p());
    let ihb = &(&FormalPoly::i() * &FormalPoly::hbar()) * &FormalPoly::onepb(1);
    let main = DerivationPair::Main;
    let alt = DerivationPair::Alt;
    let alt_qq = parse("q^2 + i hbar (2 lambda - 1) beta q p + hbar^2 lambda (1 - lambda) beta^2 p^2").expect("literal");
    let c = formal_commutator(main, &q, &p, 1);
    vec![
        exact("formal.main_commutator_qp", c.terminated && c.value == ihb),
        exact("formal.main_qq_usual", formal_star(main, &q, &q, 2).value == &q * &q),
        exact("formal.main_pp_usual", formal_star(main, &p, &p, 2).value == &p * &p),
        exact("formal.bracket_qp", classical_limit(main, &q, &p) == FormalPoly::onepb(1)),
        exact("formal.alt_commutator_qp", formal_commutator(alt, &q, &p, 2).value == ihb),
        exact("formal.alt_qq", formal_star(alt, &q, &q, 2).value == alt_qq)
            .with_note("second-order coefficient hbar^2*lambda*(1 - lambda)*beta^2 from the exact expansion"),
        exact("formal.alt_pp_usual", formal_star(alt, &p, &p, 2).value == &p * &p),
    ]
}

fn star_suite(e: &Env) -> Vec<Check> {
    let rho0 = position_eigenvector(&e.ctx, e.grid, 0.0).rho;
    let mut assoc: f64 = 0.0;
    for t in 0..3 {
        let (f, g, h) = (e.el(3 * t), e.el(3 * t + 1), e.el(3 * t + 2));
        let l = f.star(&g).and_then(|x| x.star(&h));
        let r = g.star(&h).and_then(|x| f.star(&x));
        let d = match (l, r) {
            (Ok(l), Ok(r)) => edist(&l, &r),
            _ => f64::INFINITY,
        };
        assoc = assoc.max(d / (f.norm_2() * g.norm_2() * h.norm_2()));
    }
    let (f, g) = (e.el(10), e.el(11));
    let fg = f.star(&g).expect("same grid");
    let gf = g.star(&f).expect("same grid");
    let sub = {
        let lhs = fg.norm_2();
        rel(lhs - f.norm_2() * g.norm_2(), f.norm_2() * g.norm_2()).max(0.0)
    };
    vec![
        e.at_most("star.rho0_idempotent", erel(&rho0.star(&rho0).expect("same grid"), &rho0), tol::ASSOCIATIVITY),
        e.at_most("star.associativity", assoc, tol::ASSOCIATIVITY),
        e.at_most("star.submultiplicative_excess", sub, 1e-9),
        e.at_most("trace.cyclic", crel(fg.trace(), gf.trace()), tol::TRACE_CYCLIC),
        e.at_most("trace.rho0_unit", (rho0.trace() - C::new(1.0, 0.0)).norm(), tol::TRACE_CYCLIC),
    ]
}

fn pointwise_trace_suite(e: &Env) -> Vec<Check> {
    let ctx = e.ctx.with_lambda(0.5).expect("valid lambda");
    let env = Env { ctx, ..*e };
    let (f, g) = (env.el(20), env.el(21));
    let lhs = f.star(&g).expect("same grid").trace();
    let (ff, gf) = (f.to_field(), g.to_field());
    let grid = e.grid;
    let w = grid.spacing() / (2.0 * PI * ctx.min_dq());
    let mut s = C::new(0.0, 0.0);
    for v in 0..grid.n() {
        for a in 0..grid.n() {
            s += ff.get(v, a) * gf.get(grid.neg(v), a);
        }
    }
    vec![e.at_most("trace.pointwise_at_half", crel(lhs, s * w * w), tol::TRACE_POINTWISE)]
}

fn involution_suite(e: &Env) -> Vec<Check> {
    let (f, g) = (e.el(30), e.el(31));
    let l = f.star(&g).expect("same grid").involution();
    let r = g.involution().star(&f.involution()).expect("same grid");
    let s_lhs = f.star(&g).expect("same grid").s_operator();
    let s_rhs = f.s_operator().star(&g.s_operator()).expect("same grid");
    let s_err = erel(&s_lhs, &s_rhs);
    let half = Env { ctx: e.ctx.with_lambda(0.5).expect("valid"), ..*e };
    let h = half.el(32).to_field();
    let star = AlgebraElement::from_field(&h).involution().to_field();
    let grid = e.grid;
    let mut conj_err: f64 = 0.0;
    for i in 0..grid.n() {
        for k in 0..grid.n() {
            conj_err = conj_err.max((star.get(i, k) - h.get(grid.neg(i), k).conj()).norm());
        }
    }
    vec![
        e.at_most("involution.anti_multiplicative", erel(&l, &r), tol::INVOLUTION),
        e.at_most("involution.involutive", erel(&f.involution().involution(), &f), tol::INVOLUTION),
        e.at_most("involution.isometry", rel((f.involution().norm_2() - f.norm_2()).abs(), f.norm_2()), tol::INVOLUTION),
        e.at_most("involution.conjugation_at_half", rel(conj_err, h.max_abs()), tol::INVOLUTION),
        e.at_most("s_operator.flips_lambda", s_err, tol::INVOLUTION),
        e.at_most("s_operator.trace", crel(f.s_operator().trace(), f.trace()), tol::TRACE_CYCLIC),
    ]
}

fn representation_suite(e: &Env) -> Vec<Check> {
    let (mut comp, mut adj, mut tr, mut hs): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..3 {
        let (f, g) = (e.el(40 + 2 * k), e.el(41 + 2 * k));
        let (kf, kg) = (kernel_of(&f), kernel_of(&g));
        let direct = kernel_of(&f.star(&g).expect("same grid"));
        let composed = kf.compose(&kg);
        let num: f64 = direct.values().iter().zip(composed.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = direct.values().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        comp = comp.max(rel(num, den));
        let ka = kernel_of(&f.involution());
        let kb = kf.adjoint();
        let num: f64 = ka.values().iter().zip(kb.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = kb.values().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        adj = adj.max(rel(num, den));
        tr = tr.max(crel(trace_op(&kf), f.trace()));
        hs = hs.max(crel(hilbert_schmidt(&kf, &kg), f.inner(&g).expect("same grid")));
    }
    let f = e.el(50);
    let cstar = match (operator_norm(&f), f.involution().star(&f).and_then(|x| operator_norm(&x))) {
        (Ok(n), Ok(m)) => rel((m - n * n).abs(), n * n),
        _ => f64::INFINITY,
    };
    let n_le = match operator_norm(&f) {
        Ok(n) => (n - f.norm_2()).max(0.0) / f.norm_2(),
        Err(_) => f64::INFINITY,
    };
    vec![
        e.at_most("rep.composition", comp, tol::REPRESENTATION),
        e.at_most("rep.adjoint", adj, tol::REPRESENTATION),
        e.at_most("rep.trace", tr, tol::REPRESENTATION),
        e.at_most("rep.hilbert_schmidt", hs, tol::REPRESENTATION),
        e.at_most("rep.cstar_identity", cstar, tol::CSTAR),
        e.at_most("rep.norm_below_l2_excess", n_le, 1e-9),
    ]
}

fn wigner_suite(e: &Env) -> Vec<Check> {
    let w = orthonormal_waves(e.ctx, e.grid, e.seed.wrapping_add(60), band(&e.grid), 4);
    let wg = |a: usize, b: usize| wigner(&w[a], &w[b]).expect("same grid");
    let ip = |a: usize, b: usize| w[a].inner(&w[b]).expect("same grid");
    let (w01, w23) = (wg(0, 1), wg(2, 3));
    let i = erel(&w01.involution(), &wg(1, 0));
    let ii = (wg(0, 0).trace() - ip(0, 0)).norm().max((w01.trace() - ip(0, 1)).norm());
    // orthonormal set: (W01, W23) = 0, (W01, W01) = 1
    let iii = (w01.inner(&w23).expect("same grid") - ip(0, 2).conj() * ip(1, 3))
        .norm()
        .max((w01.inner(&w01).expect("same grid") - C::new(1.0, 0.0)).norm());
    // (φ,χ) = 1 and (φ,χ) = 0 cases
    let iv = erel(&w01.star(&wg(2, 0)).expect("same grid"), &wg(2, 1))
        .max(edist(&w01.star(&wg(1, 2)).expect("same grid"), &wg(1, 1).scale(ip(0, 2))));
    let f = e.el(61);
    let l = f.star(&w01).expect("same grid");
    let r = wigner(&w[0], &apply_operator(&f, &w[1]).expect("same grid")).expect("same grid");
    let l2 = w01.star(&f).expect("same grid");
    let r2 = wigner(&apply_operator(&f.involution(), &w[0]).expect("same grid"), &w[1]).expect("same grid");
    let v = erel(&l, &r).max(erel(&l2, &r2));
    let m = marginal_momentum(&wg(0, 0));
    let marg = m.iter().zip(w[0].values()).map(|(a, z)| (a - z.norm_sqr()).abs()).fold(0.0, f64::max);
    vec![
        e.at_most("wigner.adjoint_swaps", i, tol::WIGNER),
        e.at_most("wigner.trace_is_inner", ii, tol::WIGNER),
        e.at_most("wigner.inner_product", iii, tol::WIGNER),
        e.at_most("wigner.product_rule", iv, tol::WIGNER),
        e.at_most("wigner.operator_action", v, tol::WIGNER),
        e.at_most("wigner.momentum_marginal", marg, tol::MARGINAL),
    ]
}

fn eigen_suite(e: &Env) -> Vec<Check> {
    let q1 = SymbolObservable::q_power(1, &e.grid);
    let (mut left, mut right, mut qhat): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for xi in [0.0, 1.0, e.ctx.q_lattice_step(), 3.7] {
        let v = position_eigenvector(&e.ctx, e.grid, xi);
        let target = v.rho.scale(C::new(xi, 0.0));
        let scale = v.rho.norm_2();
        left = left.max(rel(edist(&star_symbol_left(&q1, &v.rho).expect("same grid"), &target), scale));
        right = right.max(rel(edist(&star_symbol_right(&v.rho, &q1).expect("same grid"), &target), scale));
        qhat = qhat.max(rel(wdist(&qhat_apply(&v.psi), &v.psi.scale(C::new(xi, 0.0))), v.psi.norm()));
    }
    vec![
        e.at_most("eigen.q_left", left, tol::EIGEN_STAR),
        e.at_most("eigen.q_right", right, tol::EIGEN_STAR),
        e.at_most("eigen.qhat", qhat, tol::EIGEN_QHAT),
    ]
}

fn ml_suite(e: &Env) -> Vec<Check> {
    let xi = 0.5;
    let mut out = Vec::new();
    match uncertainty(&ml_wavefunction(&e.ctx, e.grid, xi)) {
        Ok(u) => {
            out.push(e.at_most("ml.mean_q", (u.mean_q - xi).abs(), tol::ML_MEANS));
            out.push(e.at_most("ml.mean_p", u.mean_p.abs(), tol::ML_MEANS));
            out.push(e.at_most("ml.delta_q", (u.dq - e.ctx.min_dq()).abs(), tol::ML_SPREAD));
            out.push(e.at_most("ml.gup_slack", u.gup_slack.abs(), tol::ML_SPREAD));
        }
        Err(err) => out.push(Check::failed("ml.uncertainty", err.to_string())),
    }
    let half = MlState::new(e.ctx.with_lambda(0.5).expect("valid"), 0.0);
    let origin = half.eval(0.0, ExtReal::Finite(0.0));
    out.push(e.at_most("ml.origin_value", (origin - C::new(1.0 + 2.0 / PI, 0.0)).norm(), tol::ML_ORIGIN));
    if e.grid.n() < MIN_SPECTRAL_GRID {
        out.push(Check::skipped("ml.wigner_closed_form", INSUFFICIENT));
    } else {
        let s = MlState::new(e.ctx, xi);
        let f = s.element(e.grid).to_field();
        let mut err: f64 = 0.0;
        for &q in &[-6.0, -1.0, 0.0, 0.5, 2.3, 8.0] {
            for &p in &[-5.0, -0.4, 0.0, 1.0, 9.0] {
                let p = ExtReal::Finite(p / e.ctx.sqrt_beta());
                err = err.max((synth(&f, q * e.ctx.min_dq(), p) - s.eval(q * e.ctx.min_dq(), p)).norm());
            }
        }
        out.push(e.at_most("ml.wigner_closed_form", err, tol::ML_CLOSED_FORM));
    }
    out
}

fn gup_suite(e: &Env) -> Vec<Check> {
    let grid = AngleGrid::at_least(33.min(e.grid.n()).max(9));
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let psi = tame_wave(e.ctx, grid, e.seed.wrapping_mul(7919).wrapping_add(k), band(&grid).min(3));
        match uncertainty(&psi) {
            Ok(u) => worst = worst.min(u.gup_slack),
            Err(_) => worst = f64::NEG_INFINITY,
        }
    }
    vec![Check::at_least("gup.min_slack_random_states", worst, tol::GUP_SLACK_FLOOR * e.scale.0)]
}

/// Truncated formal product against the integral product for windowed
/// e^{−q²/2} p/(1+βp²) and e^{−q²/2} q/(1+βp²); returns the error at each ħ.
pub fn asymptotic_errors(beta: f64, lambda: f64, grid: AngleGrid, hbars: &[f64], order: usize) -> Vec<f64> {
    let f = parse("p / (1 + beta p^2)").expect("literal");
    let g = parse("q / (1 + beta p^2)").expect("literal");
    let half = BigRational::new(1.into(), 2.into());
    let formal = formal_star_windowed(DerivationPair::Main, &f, &half, &g, &half, order);
    let qs: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.2).collect();
    let alphas = grid.nodes();
    hbars
        .iter()
        .map(|&hbar| {
            let ctx = BetaContext::new(beta, hbar, lambda).expect("valid context");
            let m_max = ((9.0 / ctx.q_lattice_step()).ceil() as usize).min(grid.half());
            let fe = AlgebraElement::from_field(&analyze(&f.eval_on_grid(&ctx, grid, m_max, 0.5)));
            let ge = AlgebraElement::from_field(&analyze(&g.eval_on_grid(&ctx, grid, m_max, 0.5)));
            let prod = fe.star(&ge).expect("same grid").to_field();
            let ps: Vec<ExtReal> = alphas.iter().map(|a| ExtReal::Finite(a.tan() / ctx.sqrt_beta())).collect();
            let vals = synth_grid(&prod, &qs, &ps);
            let mut err: f64 = 0.0;
            for (iq, &q) in qs.iter().enumerate() {
                for (ip, a) in alphas.iter().enumerate() {
                    let want = formal.eval(beta, hbar, lambda, q, a.tan() / ctx.sqrt_beta()) * (-q * q).exp();
                    err = err.max((vals[iq * ps.len() + ip] - want).norm());
                }
            }
            err
        })
        .collect()
}

fn asymptotic_suite(e: &Env) -> Vec<Check> {
    if e.grid.n() < MIN_SPECTRAL_GRID {
        return vec![Check::skipped("formal.asymptotic_slope", INSUFFICIENT)];
    }
    let hbars = [0.1, 0.05, 0.025];
    let errs = asymptotic_errors(e.ctx.beta(), e.ctx.lambda(), e.grid, &hbars, 2);
    let slope = loglog_slope(&hbars, &errs);
    vec![e.at_most("formal.asymptotic_slope_deviation", (slope - tol::ASYMPTOTIC_SLOPE).abs(), tol::ASYMPTOTIC_SLOPE_TOL)]
}

pub fn run(cfg: &RunConfig) -> Vec<Check> {
    let e = Env { ctx: cfg.ctx(), grid: cfg.grid(), seed: cfg.seed, scale: tol::Scaled(cfg.tol_scale) };
    let mut out = formal_suite();
    out.extend(star_suite(&e));
    out.extend(pointwise_trace_suite(&e));
    out.extend(involution_suite(&e));
    out.extend(representation_suite(&e));
    out.extend(wigner_suite(&e));
    out.extend(eigen_suite(&e));
    out.extend(ml_suite(&e));
    out.extend(gup_suite(&e));
    out.extend(asymptotic_suite(&e));
    out
}
