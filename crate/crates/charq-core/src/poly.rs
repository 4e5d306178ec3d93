//! Integer polynomials: multivariate, for pattern constraints and coordinate
//! maps evaluated mod p, and univariate in the formal variable q, for
//! generator coefficients and interpolated matrix entries.

use crate::fp::Fp;
use crate::linalg::Q;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Int(i64),
    Ident(usize), // index into the variable list
}

fn tokenize(text: &str, vars: &[String]) -> Result<Vec<Tok>, String> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: i64 = text[start..i]
                    .parse()
                    .map_err(|_| format!("integer literal too large at byte {start}"))?;
                toks.push(Tok::Int(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &text[start..i];
                let idx = vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| format!("unknown variable \"{name}\""))?;
                toks.push(Tok::Ident(idx));
            }
            other => return Err(format!("unexpected character '{other}' at byte {i}")),
        }
    }
    Ok(toks)
}

/// Multivariate polynomial with integer coefficients over a fixed, externally
/// supplied variable list. Exponent vectors are parallel to that list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, i64>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> MPoly {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: i64) -> MPoly {
        let mut p = MPoly::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, idx: usize) -> MPoly {
        let mut exps = vec![0; nvars];
        exps[idx] = 1;
        let mut p = MPoly::zero(nvars);
        p.terms.insert(exps, 1);
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: i64) {
        let entry = self.terms.entry(exps).or_insert(0);
        *entry += c;
        if *entry == 0 {
            let key: Vec<u32> = self
                .terms
                .iter()
                .find(|(_, &v)| v == 0)
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &MPoly) -> MPoly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &rhs.terms {
                let exps: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exps, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut out = MPoly::constant(self.nvars, 1);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn eval_mod(&self, f: Fp, point: &[u64]) -> u64 {
        let mut acc = 0;
        for (exps, &c) in &self.terms {
            let mut t = f.reduce(c);
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    t = f.mul(t, f.pow(point[i], e as u64));
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Parse standard infix syntax (+, -, *, ^, parentheses, integer
    /// coefficients) over the given variable names.
    pub fn parse(text: &str, vars: &[String]) -> Result<MPoly, String> {
        let toks = tokenize(text, vars)?;
        let mut pos = 0;
        let p = parse_expr(&toks, &mut pos, vars.len())?;
        if pos != toks.len() {
            return Err(format!("trailing input after position {pos}"));
        }
        Ok(p)
    }
}

fn parse_expr(toks: &[Tok], pos: &mut usize, nvars: usize) -> Result<MPoly, String> {
    let mut negate = false;
    if toks.get(*pos) == Some(&Tok::Minus) {
        negate = true;
        *pos += 1;
    } else if toks.get(*pos) == Some(&Tok::Plus) {
        *pos += 1;
    }
    let mut acc = parse_term(toks, pos, nvars)?;
    if negate {
        acc = acc.neg();
    }
    while let Some(&t) = toks.get(*pos) {
        match t {
            Tok::Plus => {
                *pos += 1;
                acc = acc.add(&parse_term(toks, pos, nvars)?);
            }
            Tok::Minus => {
                *pos += 1;
                acc = acc.sub(&parse_term(toks, pos, nvars)?);
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_term(toks: &[Tok], pos: &mut usize, nvars: usize) -> Result<MPoly, String> {
    let mut acc = parse_factor(toks, pos, nvars)?;
    while toks.get(*pos) == Some(&Tok::Star) {
        *pos += 1;
        acc = acc.mul(&parse_factor(toks, pos, nvars)?);
    }
    Ok(acc)
}

fn parse_factor(toks: &[Tok], pos: &mut usize, nvars: usize) -> Result<MPoly, String> {
    let base = match toks.get(*pos) {
        Some(&Tok::Int(n)) => {
            *pos += 1;
            MPoly::constant(nvars, n)
        }
        Some(&Tok::Ident(idx)) => {
            *pos += 1;
            MPoly::var(nvars, idx)
        }
        Some(&Tok::LParen) => {
            *pos += 1;
            let inner = parse_expr(toks, pos, nvars)?;
            if toks.get(*pos) != Some(&Tok::RParen) {
                return Err("missing closing parenthesis".into());
            }
            *pos += 1;
            inner
        }
        Some(&Tok::Minus) => {
            *pos += 1;
            parse_factor(toks, pos, nvars)?.neg()
        }
        other => return Err(format!("expected a factor, found {other:?}")),
    };
    if toks.get(*pos) == Some(&Tok::Caret) {
        *pos += 1;
        match toks.get(*pos) {
            Some(&Tok::Int(e)) if e >= 0 => {
                *pos += 1;
                Ok(base.pow(e as u32))
            }
            other => Err(format!("expected a nonnegative exponent, found {other:?}")),
        }
    } else {
        Ok(base)
    }
}

/// Univariate polynomial in q with exact integer coefficients, stored by
/// ascending degree with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PolyQ {
    pub coeffs: Vec<BigInt>,
}

impl PolyQ {
    pub fn zero() -> PolyQ {
        PolyQ { coeffs: vec![] }
    }

    pub fn from_coeffs(ascending: &[i64]) -> PolyQ {
        let mut p = PolyQ {
            coeffs: ascending.iter().map(|&c| BigInt::from(c)).collect(),
        };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_u64(&self, x: u64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    pub fn eval_q(&self, x: u64) -> Q {
        BigRational::from_integer(self.eval_u64(x))
    }

    pub fn add(&self, rhs: &PolyQ) -> PolyQ {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        let mut p = PolyQ { coeffs };
        p.normalize();
        p
    }

    pub fn neg(&self) -> PolyQ {
        PolyQ {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, rhs: &PolyQ) -> PolyQ {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &PolyQ) -> PolyQ {
        if self.is_zero() || rhs.is_zero() {
            return PolyQ::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut p = PolyQ { coeffs };
        p.normalize();
        p
    }

    pub fn scale(&self, c: i64) -> PolyQ {
        let mut p = PolyQ {
            coeffs: self.coeffs.iter().map(|a| a * BigInt::from(c)).collect(),
        };
        p.normalize();
        p
    }

    pub fn parse(text: &str) -> Result<PolyQ, String> {
        let vars = vec!["q".to_string()];
        let m = MPoly::parse(text, &vars)?;
        let mut coeffs = vec![];
        for (exps, &c) in &m.terms {
            let d = exps[0] as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, BigInt::zero());
            }
            coeffs[d] = BigInt::from(c);
        }
        let mut p = PolyQ { coeffs };
        p.normalize();
        Ok(p)
    }

    /// Exact Lagrange interpolation through the given (x, value) nodes.
    /// Errors if nodes repeat or the interpolant has a non-integer coefficient.
    pub fn interpolate(points: &[(u64, Q)]) -> Result<PolyQ, String> {
        for (i, (x, _)) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|(x2, _)| x2 == x) {
                return Err(format!("repeated interpolation node {x}"));
            }
        }
        let n = points.len();
        let mut acc: Vec<Q> = vec![];
        for i in 0..n {
            // basis_i = prod_{j != i} (X - x_j) / (x_i - x_j)
            let mut basis: Vec<Q> = vec![BigRational::one()];
            let mut denom = BigRational::one();
            let xi = BigInt::from(points[i].0);
            for (j, (xj, _)) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let xj = BigInt::from(*xj);
                basis = mul_linear(&basis, &xj);
                denom *= BigRational::from_integer(&xi - &xj);
            }
            let scale = &points[i].1 / denom;
            for (d, c) in basis.iter().enumerate() {
                if acc.len() <= d {
                    acc.resize(d + 1, BigRational::zero());
                }
                acc[d] += c * &scale;
            }
        }
        let mut coeffs = vec![];
        for c in &acc {
            if !c.is_integer() {
                return Err(format!("non-integer coefficient {c} in interpolant"));
            }
            coeffs.push(c.to_integer());
        }
        let mut p = PolyQ { coeffs };
        p.normalize();
        Ok(p)
    }
}

// Multiply a rational coefficient vector by (X - root).
fn mul_linear(poly: &[Q], root: &BigInt) -> Vec<Q> {
    let mut out = vec![BigRational::zero(); poly.len() + 1];
    let r = BigRational::from_integer(root.clone());
    for (d, c) in poly.iter().enumerate() {
        out[d + 1] += c;
        out[d] -= c * &r;
    }
    out
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for d in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[d];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let unit = mag.is_one();
            match d {
                0 => write!(f, "{mag}")?,
                1 => {
                    if unit {
                        write!(f, "q")?;
                    } else {
                        write!(f, "{mag}*q")?;
                    }
                }
                _ => {
                    if unit {
                        write!(f, "q^{d}")?;
                    } else {
                        write!(f, "{mag}*q^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn mpoly_parse_and_eval() {
        let vs = vars(&["a", "b"]);
        let p = MPoly::parse("a*b - 2*a^2 + 3", &vs).unwrap();
        let f = Fp::new(7);
        // at a=2, b=3: 6 - 8 + 3 = 1
        assert_eq!(p.eval_mod(f, &[2, 3]), 1);
        assert!(MPoly::parse("a*c", &vs).is_err());
        assert!(MPoly::parse("a + ", &vs).is_err());
    }

    #[test]
    fn mpoly_negation_and_parens() {
        let vs = vars(&["x"]);
        let p = MPoly::parse("-(x - 1)^2", &vs).unwrap();
        let f = Fp::new(11);
        assert_eq!(p.eval_mod(f, &[4]), f.reduce(-9));
    }

    #[test]
    fn polyq_parse_print_roundtrip() {
        for text in ["q^3-q^2", "q^2-q", "2*q^4+q-5", "-q+1", "7", "0", "q"] {
            let p = PolyQ::parse(text).unwrap();
            assert_eq!(p.to_string(), text);
            assert_eq!(PolyQ::parse(&p.to_string()).unwrap(), p);
        }
        let p = PolyQ::parse("q^2*(q-1)*(q-2)").unwrap();
        assert_eq!(p.to_string(), "q^4-3*q^3+2*q^2");
    }

    #[test]
    fn polyq_eval() {
        let p = PolyQ::parse("q^3-q^2").unwrap();
        assert_eq!(p.eval_u64(13), BigInt::from(2028));
        assert_eq!(p.degree(), Some(3));
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let target = PolyQ::parse("q^3-q^2").unwrap();
        let points: Vec<(u64, Q)> = [3u64, 5, 7, 11]
            .iter()
            .map(|&x| (x, target.eval_q(x)))
            .collect();
        let fit = PolyQ::interpolate(&points).unwrap();
        assert_eq!(fit, target);
    }

    #[test]
    fn interpolation_rejects_fractional_fits() {
        // 1, 2 at x = 0, 2 forces coefficient 1/2.
        let points = vec![
            (0u64, BigRational::from_integer(1.into())),
            (2u64, BigRational::from_integer(2.into())),
        ];
        assert!(PolyQ::interpolate(&points).is_err());
    }
}
