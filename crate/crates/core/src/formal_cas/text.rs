use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Coeff, FormalPoly, Mono};

const NAMES: [&str; 6] = ["beta", "hbar", "lambda", "q", "p", "s"];

fn exps(m: &Mono) -> [u32; 6] {
    [m.beta, m.hbar, m.lambda, m.q, m.p, m.s]
}

fn mono_text(m: &Mono) -> String {
    let parts: Vec<String> = NAMES
        .iter()
        .zip(exps(m))
        .filter(|(_, e)| *e > 0)
        .map(|(n, e)| if e == 1 { n.to_string() } else { format!("{n}^{e}") })
        .collect();
    parts.join("*")
}

fn rat_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// (is_negative, magnitude text) of c·m, with m already rendered.
fn term_text(c: &Coeff, m: &str) -> (bool, String) {
    let join = |coef: String| match (coef.is_empty(), m.is_empty()) {
        (true, true) => "1".to_string(),
        (true, false) => m.to_string(),
        (false, true) => coef,
        (false, false) => format!("{coef}*{m}"),
    };
    if c.is_real() {
        let a = c.re.abs();
        let coef = if a.is_one() { String::new() } else { rat_text(&a) };
        (c.re.is_negative(), join(coef))
    } else if c.re.is_zero() {
        let a = c.im.abs();
        let coef = if a.is_one() { "i".to_string() } else { format!("{}*i", rat_text(&a)) };
        (c.im.is_negative(), join(coef))
    } else {
        let sign = if c.im.is_negative() { "-" } else { "+" };
        let coef = format!("({} {} {}*i)", rat_text(&c.re), sign, rat_text(&c.im.abs()));
        (false, join(coef))
    }
}

fn sum_text(terms: &[(Mono, Coeff)]) -> String {
    let mut out = String::new();
    for (idx, (m, c)) in terms.iter().enumerate() {
        let (neg, body) = term_text(c, &mono_text(m));
        match (idx, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

fn divide_mono(m: &Mono, g: &Mono) -> Mono {
    Mono {
        q: m.q - g.q,
        p: m.p - g.p,
        s: m.s - g.s,
        beta: m.beta - g.beta,
        hbar: m.hbar - g.hbar,
        lambda: m.lambda - g.lambda,
    }
}

/// Canonical text: a common monomial and a common factor i are pulled out,
/// terms sorted by (ħ, λ, q, p, s, β) exponents.
pub(super) fn render(f: &FormalPoly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(Mono, Coeff)> = f.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
    terms.sort_by_key(|(m, _)| (m.hbar, m.lambda, m.q, m.p, m.s, m.beta));
    let (num, bare_sum) = if terms.len() == 1 {
        (sum_text(&terms), false)
    } else {
        let g = terms.iter().skip(1).fold(terms[0].0, |acc, (m, _)| acc.gcd(*m));
        let all_imag = terms.iter().all(|(_, c)| c.is_imaginary());
        let inner: Vec<(Mono, Coeff)> = terms
            .iter()
            .map(|(m, c)| {
                let c = if all_imag { Coeff::real(c.im.clone()) } else { c.clone() };
                (divide_mono(m, &g), c)
            })
            .collect();
        let mut prefix: Vec<String> = Vec::new();
        if all_imag {
            prefix.push("i".to_string());
        }
        let gm = mono_text(&g);
        if !gm.is_empty() {
            prefix.push(gm);
        }
        if prefix.is_empty() {
            (sum_text(&inner), true)
        } else {
            (format!("{}*({})", prefix.join("*"), sum_text(&inner)), false)
        }
    };
    match f.den {
        0 => num,
        d => {
            let num = if bare_sum { format!("({num})") } else { num };
            if d == 1 {
                format!("{num} / (1 + beta*p^2)")
            } else {
                format!("{num} / (1 + beta*p^2)^{d}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Character offset into the input.
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at position {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(digits.parse().expect("ascii digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FormalPoly, ParseError> {
        let mut acc = if self.eat('-') {
            -&self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn term(&mut self) -> Result<FormalPoly, ParseError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.power()?;
            } else if self.peek() == Some(&Tok::Sym('/')) {
                self.at += 1;
                let pos = self.pos();
                let d = self.power()?;
                acc = divide(&acc, &d).ok_or(ParseError { pos, msg: "divisor must be a nonzero constant, s, or a power of (1 + beta*p^2)".into() })?;
            } else if self.starts_atom() {
                acc = &acc * &self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<FormalPoly, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(e)) => {
                    let e: u32 = match u32::try_from(&e) {
                        Ok(v) if v <= 64 => v,
                        _ => return self.err("exponent too large"),
                    };
                    self.at += 1;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<FormalPoly, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(FormalPoly::constant(Coeff::real(BigRational::from_integer(v))))
            }
            Some(Tok::Ident(name)) => {
                let f = match name.as_str() {
                    "q" => FormalPoly::q(),
                    "p" => FormalPoly::p(),
                    "s" => FormalPoly::s(),
                    "beta" => FormalPoly::beta(),
                    "hbar" => FormalPoly::hbar(),
                    "lambda" => FormalPoly::lambda(),
                    "i" => FormalPoly::i(),
                    _ => return self.err(format!("unknown symbol '{name}'")),
                };
                self.at += 1;
                Ok(f)
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(t) => self.err(format!("unexpected {}", describe(&t))),
            None => self.err("unexpected end of input"),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
    }
}

fn divide(num: &FormalPoly, d: &FormalPoly) -> Option<FormalPoly> {
    if d.den != 0 || d.is_zero() {
        return None;
    }
    if d.terms.len() == 1 {
        let (m, c) = d.terms.iter().next()?;
        if *m == Mono::default() {
            let n2 = &c.re * &c.re + &c.im * &c.im;
            let inv = Coeff { re: &c.re / &n2, im: -(&c.im / &n2) };
            return Some(num.scale(&inv));
        }
        if *m == (Mono { s: 1, ..Mono::default() }) && c.is_real() && c.re.is_one() {
            return Some((num * &FormalPoly::s()).times_onepb(-1));
        }
    }
    let k = d.terms.keys().map(|m| m.p).max()? / 2;
    if d.terms == FormalPoly::onepb(k as i32).terms {
        return Some(num.times_onepb(-(k as i32)));
    }
    None
}

/// Parses expressions such as `3/2 q^2 p - i*hbar*(1 + beta*p^2)`.
/// Juxtaposition multiplies; `/` accepts constants, s, and powers of
/// (1 + beta*p^2).
pub fn parse(src: &str) -> Result<FormalPoly, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.chars().count() };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let f = p.expr()?;
    if p.peek().is_some() {
        return p.err(format!("unexpected {}", describe(p.peek().expect("checked"))));
    }
    Ok(f)
}
