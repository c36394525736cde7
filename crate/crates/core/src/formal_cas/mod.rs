//! Exact formal star products over Q(i)[q, p, s, β, ħ, λ] / (s² − 1 − βp²),
//! localized at powers of (1 + βp²).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::beta_arith::BetaContext;
use crate::sampling::{AngleGrid, LatticeField};

mod star;
mod text;

pub use star::{classical_limit, formal_commutator, formal_star, formal_star_windowed, DerivationPair, StarOutcome};
pub use text::{parse, ParseError};

/// Gaussian rational re + i·im.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coeff {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coeff {
    pub fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::real(BigRational::one())
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(v: i64) -> Self {
        Self::ratio(v, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_imaginary(&self) -> bool {
        self.re.is_zero() && !self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_f64(&self.re), rat_f64(&self.im))
    }
}

fn rat_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        Coeff { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        Coeff { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        Coeff { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -&self.re, im: -&self.im }
    }
}

/// Exponents of q^q p^p s^s β^beta ħ^hbar λ^lambda, with s ∈ {0, 1}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub q: u32,
    pub p: u32,
    pub s: u32,
    pub beta: u32,
    pub hbar: u32,
    pub lambda: u32,
}

impl Mono {
    fn times(self, o: Mono) -> Mono {
        Mono {
            q: self.q + o.q,
            p: self.p + o.p,
            s: self.s + o.s,
            beta: self.beta + o.beta,
            hbar: self.hbar + o.hbar,
            lambda: self.lambda + o.lambda,
        }
    }

    fn gcd(self, o: Mono) -> Mono {
        Mono {
            q: self.q.min(o.q),
            p: self.p.min(o.p),
            s: self.s.min(o.s),
            beta: self.beta.min(o.beta),
            hbar: self.hbar.min(o.hbar),
            lambda: self.lambda.min(o.lambda),
        }
    }
}

type Terms = BTreeMap<Mono, Coeff>;

fn push(terms: &mut Terms, m: Mono, c: Coeff) {
    if c.is_zero() {
        return;
    }
    let sum = match terms.get(&m) {
        Some(old) => old + &c,
        None => c,
    };
    if sum.is_zero() {
        terms.remove(&m);
    } else {
        terms.insert(m, sum);
    }
}

/// Adds c·m, rewriting s² as 1 + βp².
fn push_reduced(terms: &mut Terms, m: Mono, c: Coeff) {
    if m.s >= 2 {
        let base = Mono { s: m.s - 2, ..m };
        push_reduced(terms, base, c.clone());
        push_reduced(terms, Mono { p: base.p + 2, beta: base.beta + 1, ..base }, c);
    } else {
        push(terms, m, c);
    }
}

fn terms_mul(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            push_reduced(&mut out, ma.times(*mb), ca * cb);
        }
    }
    out
}

fn onepb_pow(k: u32) -> Terms {
    let mut out = Terms::new();
    out.insert(Mono::default(), Coeff::one());
    let base: Terms = [(Mono::default(), Coeff::one()), (Mono { p: 2, beta: 1, ..Mono::default() }, Coeff::one())].into();
    for _ in 0..k {
        out = terms_mul(&out, &base);
    }
    out
}

/// Exact quotient by (1 + βp²) if it divides.
///
/// Writing N = Σ c_k p^k with coefficients free of p, the quotient's
/// coefficients obey b_k = c_k − β b_{k−2}; divisibility means the recurrence
/// run two steps past the top degree leaves nothing.
fn div_onepb(num: &Terms) -> Option<Terms> {
    let mut by_p: BTreeMap<u32, Terms> = BTreeMap::new();
    for (m, c) in num {
        by_p.entry(m.p).or_default().insert(Mono { p: 0, ..*m }, c.clone());
    }
    let top = *by_p.keys().next_back()?;
    let mut b: Vec<Terms> = Vec::with_capacity(top as usize + 1);
    for k in 0..=top {
        let mut bk = by_p.remove(&k).unwrap_or_default();
        if k >= 2 {
            for (m, c) in &b[k as usize - 2] {
                push(&mut bk, Mono { beta: m.beta + 1, ..*m }, -c);
            }
        }
        b.push(bk);
    }
    let tail_start = top.saturating_sub(1) as usize;
    if b[tail_start..].iter().any(|t| !t.is_empty()) {
        return None;
    }
    let mut out = Terms::new();
    for (k, bk) in b.into_iter().enumerate().take(tail_start) {
        for (m, c) in bk {
            out.insert(Mono { p: k as u32, ..m }, c);
        }
    }
    Some(out)
}

/// N / (1 + βp²)^den in canonical form: s-degree ≤ 1, no common factor of
/// (1 + βp²) between numerator and denominator, zero has no terms and den 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalPoly {
    terms: Terms,
    den: u32,
}

impl FormalPoly {
    fn from_parts(terms: Terms, den: u32) -> Self {
        let mut f = Self { terms, den };
        f.canonicalize();
        f
    }

    fn canonicalize(&mut self) {
        if self.terms.is_empty() {
            self.den = 0;
            return;
        }
        while self.den > 0 {
            match div_onepb(&self.terms) {
                Some(t) => {
                    self.terms = t;
                    self.den -= 1;
                }
                None => break,
            }
        }
    }

    pub fn zero() -> Self {
        Self { terms: Terms::new(), den: 0 }
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(Mono::default(), c)
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn term(m: Mono, c: Coeff) -> Self {
        let mut terms = Terms::new();
        push_reduced(&mut terms, m, c);
        Self::from_parts(terms, 0)
    }

    pub fn monomial(m: Mono) -> Self {
        Self::term(m, Coeff::one())
    }

    pub fn q() -> Self {
        Self::monomial(Mono { q: 1, ..Mono::default() })
    }

    pub fn p() -> Self {
        Self::monomial(Mono { p: 1, ..Mono::default() })
    }

    /// s = (1 + βp²)^{1/2}.
    pub fn s() -> Self {
        Self::monomial(Mono { s: 1, ..Mono::default() })
    }

    pub fn beta() -> Self {
        Self::monomial(Mono { beta: 1, ..Mono::default() })
    }

    pub fn hbar() -> Self {
        Self::monomial(Mono { hbar: 1, ..Mono::default() })
    }

    pub fn lambda() -> Self {
        Self::monomial(Mono { lambda: 1, ..Mono::default() })
    }

    pub fn i() -> Self {
        Self::constant(Coeff::i())
    }

    /// (1 + βp²)^k for any integer k.
    pub fn onepb(k: i32) -> Self {
        if k >= 0 {
            Self::from_parts(onepb_pow(k as u32), 0)
        } else {
            Self::from_parts(onepb_pow(0), (-k) as u32)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn denominator_power(&self) -> u32 {
        self.den
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Coeff)> {
        self.terms.iter()
    }

    pub fn q_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.q).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).filter(|(_, v)| !v.is_zero()).collect();
        Self::from_parts(terms, self.den)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    fn raised_to(&self, den: u32) -> Terms {
        terms_mul(&self.terms, &onepb_pow(den - self.den))
    }

    /// Coefficient of ħ^k, as a polynomial free of ħ.
    pub fn hbar_coefficient(&self, k: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.hbar == k).map(|(m, c)| (Mono { hbar: 0, ..*m }, c.clone())).collect();
        Self::from_parts(terms, self.den)
    }

    /// Drops every power of ħ above k.
    pub fn truncate_hbar(&self, k: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.hbar <= k).map(|(m, c)| (*m, c.clone())).collect();
        Self::from_parts(terms, self.den)
    }

    /// Multiplies by (1 + βp²)^k.
    pub fn times_onepb(&self, k: i32) -> Self {
        self * &Self::onepb(k)
    }

    /// ∂_q.
    pub fn d_q(&self) -> Self {
        let mut terms = Terms::new();
        for (m, c) in &self.terms {
            if m.q > 0 {
                push(&mut terms, Mono { q: m.q - 1, ..*m }, c * &Coeff::int(m.q as i64));
            }
        }
        Self::from_parts(terms, self.den)
    }

    /// ∂_p, with ∂_p s = βp s / (1 + βp²).
    pub fn d_p(&self) -> Self {
        // N = A + Bs over (1+βp²)^d:
        // ∂_p = [(1+βp²)(A′ + B′s) + βp·Bs − 2dβp(A + Bs)] / (1+βp²)^{d+1}
        let mut plain = Terms::new();
        let mut extra = Terms::new();
        let d = self.den as i64;
        for (m, c) in &self.terms {
            if m.p > 0 {
                push(&mut plain, Mono { p: m.p - 1, ..*m }, c * &Coeff::int(m.p as i64));
            }
            let bp = Mono { p: m.p + 1, beta: m.beta + 1, ..*m };
            let k = if m.s == 1 { 1 - 2 * d } else { -2 * d };
            push(&mut extra, bp, c * &Coeff::int(k));
        }
        let mut num = terms_mul(&plain, &onepb_pow(1));
        for (m, c) in extra {
            push(&mut num, m, c);
        }
        Self::from_parts(num, self.den + 1)
    }

    /// D_p = (1 + βp²)∂_p.
    pub fn big_d_p(&self) -> Self {
        self.d_p().times_onepb(1)
    }

    /// Numeric value at (q, p) for given β, ħ, λ.
    pub fn eval(&self, beta: f64, hbar: f64, lambda: f64, q: f64, p: f64) -> Complex64 {
        let w = 1.0 + beta * p * p;
        let s = w.sqrt();
        let num: Complex64 = self
            .terms
            .iter()
            .map(|(m, c)| {
                c.to_complex()
                    * q.powi(m.q as i32)
                    * p.powi(m.p as i32)
                    * s.powi(m.s as i32)
                    * beta.powi(m.beta as i32)
                    * hbar.powi(m.hbar as i32)
                    * lambda.powi(m.lambda as i32)
            })
            .sum();
        num / w.powi(self.den as i32)
    }

    /// Samples e^{−κq²}·f on a q-lattice at the grid's momentum angles,
    /// with β, ħ, λ taken from the context.
    pub fn eval_on_grid(&self, ctx: &BetaContext, grid: AngleGrid, m_max: usize, kappa: f64) -> LatticeField {
        let (beta, hbar, lambda) = (ctx.beta(), ctx.hbar(), ctx.lambda());
        let sb = ctx.sqrt_beta();
        LatticeField::from_fn(*ctx, grid, 0.0, m_max, |q, alpha| {
            let p = alpha.tan() / sb;
            self.eval(beta, hbar, lambda, q, p) * (-kappa * q * q).exp()
        })
    }
}

impl Add for &FormalPoly {
    type Output = FormalPoly;
    fn add(self, o: &FormalPoly) -> FormalPoly {
        let den = self.den.max(o.den);
        let mut terms = self.raised_to(den);
        for (m, c) in o.raised_to(den) {
            push(&mut terms, m, c);
        }
        FormalPoly::from_parts(terms, den)
    }
}

impl Neg for &FormalPoly {
    type Output = FormalPoly;
    fn neg(self) -> FormalPoly {
        FormalPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(), den: self.den }
    }
}

impl Sub for &FormalPoly {
    type Output = FormalPoly;
    fn sub(self, o: &FormalPoly) -> FormalPoly {
        self + &(-o)
    }
}

impl Mul for &FormalPoly {
    type Output = FormalPoly;
    // denominator exponents add
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: &FormalPoly) -> FormalPoly {
        FormalPoly::from_parts(terms_mul(&self.terms, &o.terms), self.den + o.den)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for FormalPoly {
            type Output = FormalPoly;
            fn $f(self, o: FormalPoly) -> FormalPoly {
                (&self).$f(&o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for FormalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render(self))
    }
}
