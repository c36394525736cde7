//! Generalized arithmetic on the projectively extended momentum line.
//!
//! With `α = arctan(√β p)` the law `x ⊕ y = (x + y)/(1 − βxy)` becomes
//! addition of angles modulo π; the point at infinity sits at α = −π/2.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("beta must be positive and finite, got {0}")]
    BadBeta(f64),
    #[error("hbar must be positive and finite, got {0}")]
    BadHbar(f64),
    #[error("lambda must lie in [0, 1], got {0}")]
    BadLambda(f64),
    #[error("scalar {0} outside [-1, 1]")]
    ScalarOutOfRange(f64),
    #[error("NaN is not a point of the extended line")]
    NotANumber,
}

/// Deformation parameters. All derived scales come from `c = ħ√β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaContext {
    beta: f64,
    hbar: f64,
    lambda: f64,
}

impl BetaContext {
    pub fn new(beta: f64, hbar: f64, lambda: f64) -> Result<Self, ArithError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ArithError::BadBeta(beta));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(ArithError::BadHbar(hbar));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ArithError::BadLambda(lambda));
        }
        Ok(Self { beta, hbar, lambda })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sqrt_beta(&self) -> f64 {
        self.beta.sqrt()
    }

    /// Smallest attainable position uncertainty, ħ√β. Also the scale that
    /// converts the angle variable conjugate to q into q-units.
    pub fn min_dq(&self) -> f64 {
        self.hbar * self.beta.sqrt()
    }

    pub fn q_lattice_step(&self) -> f64 {
        2.0 * self.min_dq()
    }

    pub fn angle_halfwidth(&self) -> f64 {
        FRAC_PI_2
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ArithError> {
        Self::new(self.beta, self.hbar, lambda)
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self, ArithError> {
        Self::new(self.beta, hbar, self.lambda)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }
}

/// A point of ℝ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl TryFrom<f64> for ExtReal {
    type Error = ArithError;

    /// ±inf both map to the single point at infinity.
    fn try_from(x: f64) -> Result<Self, Self::Error> {
        if x.is_nan() {
            Err(ArithError::NotANumber)
        } else if x.is_infinite() {
            Ok(ExtReal::Infinity)
        } else {
            Ok(ExtReal::Finite(x))
        }
    }
}

/// Reduce an angle to [−π/2, π/2).
pub fn canon(x: f64) -> f64 {
    let r = x - PI * ((x + FRAC_PI_2) / PI).floor();
    if r >= FRAC_PI_2 {
        r - PI
    } else if r < -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

/// Angle coordinate, canonical representative in [−π/2, π/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    pub fn new(alpha: f64) -> Self {
        Angle(canon(alpha))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;

    fn add(self, other: Angle) -> Angle {
        Angle::new(self.0 + other.0)
    }
}

pub fn angle_of(ctx: &BetaContext, p: ExtReal) -> Angle {
    match p {
        ExtReal::Finite(x) => Angle::new((ctx.sqrt_beta() * x).atan()),
        ExtReal::Infinity => Angle(-FRAC_PI_2),
    }
}

pub fn momentum_of(ctx: &BetaContext, a: Angle) -> ExtReal {
    if a.0 == -FRAC_PI_2 {
        ExtReal::Infinity
    } else {
        ExtReal::Finite(a.0.tan() / ctx.sqrt_beta())
    }
}

pub fn oplus(ctx: &BetaContext, x: ExtReal, y: ExtReal) -> ExtReal {
    let b = ctx.beta();
    match (x, y) {
        (ExtReal::Infinity, ExtReal::Infinity) => ExtReal::Finite(0.0),
        (ExtReal::Finite(v), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(v)) => {
            if v == 0.0 {
                ExtReal::Infinity
            } else {
                ExtReal::Finite(-1.0 / (b * v))
            }
        }
        (ExtReal::Finite(u), ExtReal::Finite(v)) => {
            let den = 1.0 - b * (u * v);
            if den == 0.0 {
                ExtReal::Infinity
            } else {
                ExtReal::Finite((u + v) / den)
            }
        }
    }
}

pub fn ominus(ctx: &BetaContext, x: ExtReal, y: ExtReal) -> ExtReal {
    oplus(ctx, x, -y)
}

/// Scalar multiplication `lam ∘ x`; the angle of x is taken in (−π/2, π/2]
/// so that ∞ scales from +π/2.
pub fn circ(ctx: &BetaContext, lam: f64, x: ExtReal) -> Result<ExtReal, ArithError> {
    if !(-1.0..=1.0).contains(&lam) {
        return Err(ArithError::ScalarOutOfRange(lam));
    }
    if lam == 1.0 {
        return Ok(x);
    }
    if lam == -1.0 {
        return Ok(-x);
    }
    let alpha = match x {
        ExtReal::Finite(v) => (ctx.sqrt_beta() * v).atan(),
        ExtReal::Infinity => FRAC_PI_2,
    };
    Ok(momentum_of(ctx, Angle::new(lam * alpha)))
}

/// Generalized pairing (q, p) = q·arctan(√β p)/√β.
pub fn pairing(ctx: &BetaContext, q: f64, p: ExtReal) -> f64 {
    let alpha = match p {
        ExtReal::Finite(v) => (ctx.sqrt_beta() * v).atan(),
        ExtReal::Infinity => FRAC_PI_2,
    };
    q * alpha / ctx.sqrt_beta()
}
