use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::json;

use super::report::{Check, Report};
use super::verify::{self, MIN_SPECTRAL_GRID};
use super::{RunConfig, EXIT_FAIL, EXIT_USAGE};
use crate::beta_arith::ExtReal;
use crate::fixtures::random_element;
use crate::formal_cas::{formal_commutator, formal_star, parse, DerivationPair, FormalPoly};
use crate::operator_rep::qhat_apply;
use crate::sampling::csv::{g17, lattice_csv, linspace, torus_csv, window_csv, write_atomic};
use crate::sampling::{analyze, lattice_of, synth_grid};
use crate::star_algebra::{star_symbol_left, star_symbol_right, AlgebraElement, SymbolObservable};
use crate::states::{position_eigenvector, MlState};
use crate::tolerances as tol;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandError {
    pub code: i32,
    pub msg: String,
}

impl CommandError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }

    fn fail(msg: impl Into<String>) -> Self {
        Self { code: EXIT_FAIL, msg: msg.into() }
    }
}

fn write_file(cfg: &RunConfig, report: &mut Report, name: &str, contents: &str) -> Result<(), CommandError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| CommandError::fail(format!("cannot create {}: {e}", cfg.out.display())))?;
    let path = cfg.out.join(name);
    write_atomic(&path, contents).map_err(|e| CommandError::fail(format!("cannot write {}: {e}", path.display())))?;
    report.files.push(path.display().to_string());
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig) -> Report {
    let mut r = Report::new("verify");
    r.extend(verify::run(cfg));
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlstateOptions {
    pub xi: f64,
    /// Half-width of the square q, p window.
    pub window: f64,
    pub points: usize,
}

impl Default for MlstateOptions {
    fn default() -> Self {
        Self { xi: 0.0, window: 10.0, points: 201 }
    }
}

fn component_csv(qs: &[f64], ps: &[f64], values: &[C], part: impl Fn(C) -> f64) -> String {
    let mut s = String::from("q,p,value\n");
    for (iq, &q) in qs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", g17(q), g17(p), g17(part(values[iq * ps.len() + ip])));
        }
    }
    s
}

/// Largest |a(q, p) + a(q, −p)| over a window whose p-points are symmetric.
fn odd_in_p_defect(ps: &[f64], values: &[C], part: impl Fn(C) -> f64) -> f64 {
    let np = ps.len();
    let mut worst: f64 = 0.0;
    for row in values.chunks(np) {
        for ip in 0..np {
            worst = worst.max((part(row[ip]) + part(row[np - 1 - ip])).abs());
        }
    }
    worst
}

/// λ = 1/2 and λ = 0 phase-space grids of the maximal-localization
/// state, from the closed form and, on fine enough grids, from its Wigner
/// function.
pub fn cmd_mlstate(cfg: &RunConfig, opts: &MlstateOptions) -> Result<Report, CommandError> {
    if opts.points < 2 || !(opts.window.is_finite() && opts.window > 0.0) {
        return Err(CommandError::usage("window must be positive and points at least 2"));
    }
    let mut report = Report::new("mlstate");
    let grid = cfg.grid();
    let ctx = cfg.ctx();
    let qs = linspace(-opts.window, opts.window, opts.points);
    let ps = linspace(-opts.window, opts.window, opts.points);
    let ps_ext: Vec<ExtReal> = ps.iter().map(|&p| ExtReal::Finite(p)).collect();
    let symmetric = opts.xi == 0.0;

    for (label, lam) in [("ml_lambda_half", 0.5), ("ml_lambda0", 0.0)] {
        let state = MlState::new(ctx.with_lambda(lam).map_err(|e| CommandError::usage(e.to_string()))?, opts.xi);
        let values = state.window(&qs, &ps);
        if lam == 0.5 {
            write_file(cfg, &mut report, &format!("{label}.csv"), &window_csv(&qs, &ps, &values))?;
            let imag = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            report.push(Check::at_most("mlstate.lambda_half_max_imag", imag, tol::ML_GRID_REAL * cfg.tol_scale));
            let origin = state.eval(opts.xi, ExtReal::Finite(0.0));
            report.push(Check::at_most("mlstate.lambda_half_peak", (origin - C::new(1.0 + 2.0 / PI, 0.0)).norm(), tol::ML_ORIGIN * cfg.tol_scale));
        } else {
            write_file(cfg, &mut report, &format!("{label}_re.csv"), &component_csv(&qs, &ps, &values, |z| z.re))?;
            write_file(cfg, &mut report, &format!("{label}_im.csv"), &component_csv(&qs, &ps, &values, |z| z.im))?;
            let imag = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            report.push(Check::at_least("mlstate.lambda0_max_abs_imag", imag, 1e-3));
            if symmetric {
                let odd = odd_in_p_defect(&ps, &values, |z| z.im);
                report.push(Check::at_most("mlstate.lambda0_imag_odd_in_p", odd, tol::ML_GRID_ODD * cfg.tol_scale));
            } else {
                report.push(Check::skipped("mlstate.lambda0_imag_odd_in_p", "only symmetric for xi = 0"));
            }
        }
        let name = format!("mlstate.{label}_wigner_vs_closed_form");
        if grid.n() < MIN_SPECTRAL_GRID {
            report.push(Check::skipped(&name, "insufficient resolution"));
            continue;
        }
        let wig = synth_grid(&state.element(grid).to_field(), &qs, &ps_ext);
        write_file(cfg, &mut report, &format!("{label}_wigner.csv"), &window_csv(&qs, &ps, &wig))?;
        let diff = values.iter().zip(&wig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        report.push(Check::at_most(&name, diff, tol::ML_CLOSED_FORM * cfg.tol_scale));
    }
    report.result = Some(json!({ "xi": opts.xi, "window": opts.window, "points": opts.points, "grid": grid.n() }));
    Ok(report)
}

fn wave_csv(psi: &crate::sampling::Wavefunction) -> String {
    let sb = psi.ctx().sqrt_beta();
    let mut s = String::from("alpha,p,re,im\n");
    for (a, z) in psi.grid().nodes().iter().zip(psi.values()) {
        let _ = writeln!(s, "{},{},{},{}", g17(*a), g17(a.tan() / sb), g17(z.re), g17(z.im));
    }
    s
}

pub fn cmd_eigenstate(cfg: &RunConfig, xi: f64) -> Result<Report, CommandError> {
    let mut report = Report::new("eigenstate");
    let ctx = cfg.ctx();
    let grid = cfg.grid();
    let v = position_eigenvector(&ctx, grid, xi);
    let q1 = SymbolObservable::q_power(1, &grid);
    let target = v.rho.scale(C::new(xi, 0.0));
    let scale = v.rho.norm_2();
    let err = |x: Result<AlgebraElement, _>| -> f64 {
        x.ok().and_then(|x| x.sub(&target).ok()).map(|d| d.norm_2() / scale).unwrap_or(f64::INFINITY)
    };
    report.push(Check::at_most("eigen.q_left", err(star_symbol_left(&q1, &v.rho)), tol::EIGEN_STAR * cfg.tol_scale));
    report.push(Check::at_most("eigen.q_right", err(star_symbol_right(&v.rho, &q1)), tol::EIGEN_STAR * cfg.tol_scale));
    let qpsi = qhat_apply(&v.psi).sub(&v.psi.scale(C::new(xi, 0.0))).map(|d| d.norm()).unwrap_or(f64::INFINITY);
    report.push(Check::at_most("eigen.qhat", qpsi / v.psi.norm(), tol::EIGEN_QHAT * cfg.tol_scale));
    report.push(Check::at_most("eigen.trace_unit", (v.rho.trace() - C::new(1.0, 0.0)).norm(), tol::TRACE_CYCLIC * cfg.tol_scale));
    write_file(cfg, &mut report, "eigenstate_rho_torus.csv", &torus_csv(&v.rho.to_field()))?;
    write_file(cfg, &mut report, "eigenstate_psi.csv", &wave_csv(&v.psi))?;
    report.result = Some(json!({ "xi": xi, "grid": grid.n() }));
    Ok(report)
}

enum Family {
    Element(AlgebraElement),
    Symbol(SymbolObservable),
}

fn number(spec: &str, text: &str) -> Result<f64, CommandError> {
    text.parse::<f64>().map_err(|_| CommandError::usage(format!("bad number '{text}' in spec '{spec}'")))
}

/// Windowed e^{−q²/(2w²)} / (1 + βp²), sampled on the lattice and transformed.
fn bump(cfg: &RunConfig, width: f64) -> AlgebraElement {
    let ctx = cfg.ctx();
    let grid = cfg.grid();
    let m_max = ((8.0 * width / ctx.q_lattice_step()).ceil() as usize).min(grid.half());
    let shape = FormalPoly::onepb(-1);
    AlgebraElement::from_field(&analyze(&shape.eval_on_grid(&ctx, grid, m_max, 0.5 / (width * width))))
}

fn family(cfg: &RunConfig, spec: &str) -> Result<Family, CommandError> {
    let ctx = cfg.ctx();
    let grid = cfg.grid();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let el = match (head, arg) {
        ("rho0", None) => position_eigenvector(&ctx, grid, 0.0).rho,
        ("rho", Some(a)) => position_eigenvector(&ctx, grid, number(spec, a)?).rho,
        ("ml", Some(a)) => MlState::new(ctx, number(spec, a)?).element(grid),
        ("bump", None) => bump(cfg, 1.0),
        ("bump", Some(a)) => {
            let w = number(spec, a)?;
            if !(w.is_finite() && w > 0.0) {
                return Err(CommandError::usage(format!("bump width must be positive in '{spec}'")));
            }
            bump(cfg, w)
        }
        ("random", Some(a)) => {
            let seed = a.parse::<u64>().map_err(|_| CommandError::usage(format!("bad seed in '{spec}'")))?;
            random_element(ctx, grid, seed, 4.min((grid.n() as i64 - 1) / 4).max(1))
        }
        ("q", None) => return Ok(Family::Symbol(SymbolObservable::q_power(1, &grid))),
        _ => {
            if let Some(n) = spec.strip_prefix("q^") {
                let n = n.parse::<u32>().map_err(|_| CommandError::usage(format!("bad power in '{spec}'")))?;
                return Ok(Family::Symbol(SymbolObservable::q_power(n, &grid)));
            }
            return Err(CommandError::usage(format!(
                "unknown spec '{spec}' (expected rho0, rho:XI, ml:XI, bump, bump:WIDTH, random:SEED, q, q^N)"
            )));
        }
    };
    Ok(Family::Element(el))
}

fn export_element(cfg: &RunConfig, report: &mut Report, prefix: &str, el: &AlgebraElement) -> Result<(), CommandError> {
    let field = el.to_field();
    write_file(cfg, report, &format!("{prefix}_torus.csv"), &torus_csv(&field))?;
    let lattice = lattice_of(&field, field.grid().half());
    write_file(cfg, report, &format!("{prefix}_lattice.csv"), &lattice_csv(&lattice))?;
    let tr = el.trace();
    report.result = Some(json!({
        "grid": field.n(),
        "q_offset": el.q_offset(),
        "norm_2": el.norm_2(),
        "trace_re": tr.re,
        "trace_im": tr.im,
    }));
    Ok(())
}

pub fn cmd_star(cfg: &RunConfig, f: &str, g: &str) -> Result<Report, CommandError> {
    let product = match (family(cfg, f)?, family(cfg, g)?) {
        (Family::Element(a), Family::Element(b)) => a.star(&b),
        (Family::Symbol(s), Family::Element(b)) => star_symbol_left(&s, &b),
        (Family::Element(a), Family::Symbol(s)) => star_symbol_right(&a, &s),
        (Family::Symbol(_), Family::Symbol(_)) => {
            return Err(CommandError::usage("at most one factor may be a q-power symbol; use `formal` for polynomial products"))
        }
    }
    .map_err(|e| CommandError::fail(e.to_string()))?;
    let mut report = Report::new("star");
    export_element(cfg, &mut report, "star", &product)?;
    Ok(report)
}

pub fn cmd_export(cfg: &RunConfig, spec: &str) -> Result<Report, CommandError> {
    match family(cfg, spec)? {
        Family::Element(el) => {
            let mut report = Report::new("export");
            export_element(cfg, &mut report, "export", &el)?;
            Ok(report)
        }
        Family::Symbol(_) => Err(CommandError::usage("q-power symbols are unbounded and have no field to export")),
    }
}

pub fn cmd_formal(pair: DerivationPair, f: &str, g: &str, order: usize, commutator: bool) -> Result<Report, CommandError> {
    let pf = parse(f).map_err(|e| CommandError::usage(format!("first factor: {e}")))?;
    let pg = parse(g).map_err(|e| CommandError::usage(format!("second factor: {e}")))?;
    let out = if commutator { formal_commutator(pair, &pf, &pg, order) } else { formal_star(pair, &pf, &pg, order) };
    let value = out.value.to_string();
    let mut report = Report::new("formal");
    report.text = Some(format!("{value}\nterminated: {}\n", out.terminated));
    report.result = Some(json!({
        "pair": pair.name(),
        "f": pf.to_string(),
        "g": pg.to_string(),
        "order": order,
        "commutator": commutator,
        "value": value,
        "terminated": out.terminated,
    }));
    Ok(report)
}
