use num_rational::BigRational;
use num_traits::Zero;

use super::{Coeff, FormalPoly};

/// The two commuting derivations X (position-like) and Y (momentum-like)
/// that define a product
/// f⋆g = Σ_k (iħ)^k/k! Σ_l C(k,l) (1−λ)^l (−λ)^{k−l} (X^l Y^{k−l} f)(X^{k−l} Y^l g).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivationPair {
    /// X = ∂_q, Y = (1 + βp²)∂_p.
    Main,
    /// X = s⁻¹∂_q, Y = −βqps ∂_q + s³∂_p.
    Alt,
}

/// ∂_q of e^{−κq²}·f, with the window factored back out.
fn d_q_windowed(f: &FormalPoly, kappa: &BigRational) -> FormalPoly {
    let d = f.d_q();
    if kappa.is_zero() {
        return d;
    }
    let k2 = Coeff::real(-(kappa + kappa));
    &d + &(&FormalPoly::q() * f).scale(&k2)
}

impl DerivationPair {
    pub fn x(&self, f: &FormalPoly, kappa: &BigRational) -> FormalPoly {
        match self {
            DerivationPair::Main => d_q_windowed(f, kappa),
            DerivationPair::Alt => (&FormalPoly::s() * &d_q_windowed(f, kappa)).times_onepb(-1),
        }
    }

    pub fn y(&self, f: &FormalPoly, kappa: &BigRational) -> FormalPoly {
        match self {
            DerivationPair::Main => f.big_d_p(),
            DerivationPair::Alt => {
                let s = FormalPoly::s();
                let qps = &(&(&FormalPoly::beta() * &FormalPoly::q()) * &FormalPoly::p()) * &s;
                let drift = &qps * &d_q_windowed(f, kappa);
                let flow = (&s * &f.d_p()).times_onepb(1);
                &flow - &drift
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DerivationPair::Main => "main",
            DerivationPair::Alt => "alt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarOutcome {
    pub value: FormalPoly,
    /// All terms past the truncation order vanish identically.
    pub terminated: bool,
}

/// table[l][m] = X^l Y^m f for l + m ≤ order.
fn derivative_table(pair: DerivationPair, f: &FormalPoly, kappa: &BigRational, order: usize) -> Vec<Vec<FormalPoly>> {
    let mut table: Vec<Vec<FormalPoly>> = Vec::with_capacity(order + 1);
    for l in 0..=order {
        let mut row = Vec::with_capacity(order + 1 - l);
        row.push(if l == 0 { f.clone() } else { pair.x(&table[l - 1][0], kappa) });
        for m in 1..=order - l {
            let next = pair.y(&row[m - 1], kappa);
            row.push(next);
        }
        table.push(row);
    }
    table
}

fn binomial(k: usize, l: usize) -> i64 {
    (0..l).fold(1i64, |acc, j| acc * (k - j) as i64 / (j + 1) as i64)
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// k-th order term of the series, without the (iħ)^k/k! prefactor.
fn bidifferential(ft: &[Vec<FormalPoly>], gt: &[Vec<FormalPoly>], k: usize) -> FormalPoly {
    let lam = FormalPoly::lambda();
    let one_minus = &FormalPoly::one() - &lam;
    let minus_lam = -&lam;
    let mut acc = FormalPoly::zero();
    for l in 0..=k {
        let lhs = &ft[l][k - l];
        let rhs = &gt[k - l][l];
        if lhs.is_zero() || rhs.is_zero() {
            continue;
        }
        let weight = (&one_minus.pow(l as u32) * &minus_lam.pow((k - l) as u32)).scale(&Coeff::int(binomial(k, l)));
        acc = &acc + &(&weight * &(lhs * rhs));
    }
    acc
}

fn prefactor(k: usize) -> FormalPoly {
    let i_pow = match k % 4 {
        0 => Coeff::one(),
        1 => Coeff::i(),
        2 => Coeff::int(-1),
        _ => -&Coeff::i(),
    };
    let c = &i_pow * &Coeff::ratio(1, factorial(k));
    FormalPoly::hbar().pow(k as u32).scale(&c)
}

fn series(pair: DerivationPair, f: &FormalPoly, kf: &BigRational, g: &FormalPoly, kg: &BigRational, order: usize, check_to: usize) -> StarOutcome {
    let depth = order.max(check_to);
    let ft = derivative_table(pair, f, kf, depth);
    let gt = derivative_table(pair, g, kg, depth);
    let mut value = FormalPoly::zero();
    for k in 0..=order {
        value = &value + &(&prefactor(k) * &bidifferential(&ft, &gt, k));
    }
    let terminated = (order + 1..=check_to).all(|k| bidifferential(&ft, &gt, k).is_zero());
    StarOutcome { value, terminated }
}

/// Truncated product through ħ^order. Every term of the series needs at
/// least one X on each side beyond the q-degrees, so checking the orders up
/// to deg_q f + deg_q g decides termination.
pub fn formal_star(pair: DerivationPair, f: &FormalPoly, g: &FormalPoly, order: usize) -> StarOutcome {
    let zero = BigRational::zero();
    let bound = (f.q_degree() + g.q_degree()) as usize;
    series(pair, f, &zero, g, &zero, order, bound)
}

/// Product of e^{−κ_f q²} f and e^{−κ_g q²} g; the result carries the window
/// e^{−(κ_f+κ_g) q²}, which is not included in the returned polynomial.
pub fn formal_star_windowed(pair: DerivationPair, f: &FormalPoly, kappa_f: &BigRational, g: &FormalPoly, kappa_g: &BigRational, order: usize) -> FormalPoly {
    series(pair, f, kappa_f, g, kappa_g, order, 0).value
}

pub fn formal_commutator(pair: DerivationPair, f: &FormalPoly, g: &FormalPoly, order: usize) -> StarOutcome {
    let a = formal_star(pair, f, g, order);
    let b = formal_star(pair, g, f, order);
    StarOutcome { value: &a.value - &b.value, terminated: a.terminated && b.terminated }
}

/// The bracket {f, g}: ħ¹ coefficient of the commutator over i.
pub fn classical_limit(pair: DerivationPair, f: &FormalPoly, g: &FormalPoly) -> FormalPoly {
    formal_commutator(pair, f, g, 1).value.hbar_coefficient(1).scale(&-&Coeff::i())
}
