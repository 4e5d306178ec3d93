//! A small language for words in the generating surface pieces (cup, cap,
//! pair of pants and friends), a type checker over circle counts, and an
//! exact evaluator into matrices over tensor powers of the class-function
//! space. Also the brute-force counts these invariants quantize.

use crate::classfun::{commutator_counts_by_enumeration, ClassAlgebra};
use crate::group::FiniteGroup;
use crate::linalg::{q_int, Q, QMat};
use num::{BigInt, BigRational, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BordismError {
    #[error("syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("type mismatch: {0} circles fed into {1}")]
    TypeError(u32, u32),
    #[error("tensor space k^{0} exceeds the cap of {1} basis vectors")]
    MemoryCap(u32, usize),
    #[error("resource cap: {0}")]
    ResourceCap(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Atom {
    Unit,   // 0 -> 1
    Counit, // 1 -> 0
    Mult,   // 2 -> 1
    Comult, // 1 -> 2
    Twist,  // 2 -> 2
    Id,     // 1 -> 1
    Genus,  // 1 -> 1
    Sigma(u32), // 0 -> 0, closed surface of the given genus
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Atom(Atom),
    Compose(Vec<Expr>), // left to right in source order; rightmost acts first
    Tensor(Vec<Expr>),
    Power(Box<Expr>, u32),
}

impl Atom {
    fn arity(&self) -> (u32, u32) {
        match self {
            Atom::Unit => (0, 1),
            Atom::Counit => (1, 0),
            Atom::Mult => (2, 1),
            Atom::Comult => (1, 2),
            Atom::Twist => (2, 2),
            Atom::Id => (1, 1),
            Atom::Genus => (1, 1),
            Atom::Sigma(_) => (0, 0),
        }
    }

    fn name(&self) -> String {
        match self {
            Atom::Unit => "unit".into(),
            Atom::Counit => "counit".into(),
            Atom::Mult => "mult".into(),
            Atom::Comult => "comult".into(),
            Atom::Twist => "twist".into(),
            Atom::Id => "id".into(),
            Atom::Genus => "genus".into(),
            Atom::Sigma(g) => format!("sigma({g})"),
        }
    }
}

/// (inputs, outputs) of a word; errors on mismatched compositions.
pub fn arity(e: &Expr) -> Result<(u32, u32), BordismError> {
    match e {
        Expr::Atom(a) => Ok(a.arity()),
        Expr::Compose(parts) => {
            let mut arities = Vec::with_capacity(parts.len());
            for p in parts {
                arities.push(arity(p)?);
            }
            for w in arities.windows(2) {
                // left part w[0] consumes what right part w[1] produces
                if w[1].1 != w[0].0 {
                    return Err(BordismError::TypeError(w[1].1, w[0].0));
                }
            }
            Ok((arities.last().unwrap().0, arities.first().unwrap().1))
        }
        Expr::Tensor(parts) => {
            let mut i = 0;
            let mut o = 0;
            for p in parts {
                let (pi, po) = arity(p)?;
                i += pi;
                o += po;
            }
            Ok((i, o))
        }
        Expr::Power(base, _) => {
            let (i, o) = arity(base)?;
            if i != o {
                return Err(BordismError::TypeError(o, i));
            }
            Ok((i, o))
        }
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, BordismError> {
        Err(BordismError::SyntaxError {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u32, BordismError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err("integer too large"))
    }

    fn expr(&mut self) -> Result<Expr, BordismError> {
        let mut parts = vec![self.term()?];
        while self.eat('.') {
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Compose(parts)
        })
    }

    fn term(&mut self) -> Result<Expr, BordismError> {
        let mut parts = vec![self.factor()?];
        while self.eat('*') {
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Tensor(parts)
        })
    }

    fn factor(&mut self) -> Result<Expr, BordismError> {
        let base = if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                return self.err("expected ')'");
            }
            inner
        } else {
            self.atom()?
        };
        if self.eat('^') {
            let n = self.integer()?;
            Ok(Expr::Power(Box::new(base), n))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, BordismError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a bordism atom");
        }
        let name = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        let atom = match name {
            "unit" => Atom::Unit,
            "counit" => Atom::Counit,
            "mult" => Atom::Mult,
            "comult" => Atom::Comult,
            "twist" => Atom::Twist,
            "id" => Atom::Id,
            "genus" => Atom::Genus,
            "sigma" => {
                if !self.eat('(') {
                    return self.err("sigma requires a genus argument");
                }
                let g = self.integer()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                return Ok(Expr::Atom(Atom::Sigma(g)));
            }
            other => {
                self.pos = start;
                return self.err(&format!("unknown atom {other:?}"));
            }
        };
        Ok(Expr::Atom(atom))
    }
}

pub fn parse(text: &str) -> Result<Expr, BordismError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(a) => write!(f, "{}", a.name()),
            Expr::Compose(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " . ")?;
                    }
                    if matches!(p, Expr::Compose(_)) {
                        write!(f, "({p})")?;
                    } else {
                        write!(f, "{p}")?;
                    }
                }
                Ok(())
            }
            Expr::Tensor(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    if matches!(p, Expr::Compose(_) | Expr::Tensor(_)) {
                        write!(f, "({p})")?;
                    } else {
                        write!(f, "{p}")?;
                    }
                }
                Ok(())
            }
            Expr::Power(base, n) => {
                if matches!(**base, Expr::Atom(_)) {
                    write!(f, "{base}^{n}")
                } else {
                    write!(f, "({base})^{n}")
                }
            }
        }
    }
}

/// Matrix of a word on tensor powers of the class-function space, shape
/// k^out x k^in.
pub struct TensorLinearMap {
    pub in_arity: u32,
    pub out_arity: u32,
    pub matrix: QMat,
}

pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

fn dim(k: usize, arity: u32, cap: usize) -> Result<usize, BordismError> {
    let mut d = 1usize;
    for _ in 0..arity {
        d = d.saturating_mul(k);
        if d > cap {
            return Err(BordismError::MemoryCap(arity, cap));
        }
    }
    Ok(d)
}

pub fn evaluate(
    expr: &Expr,
    alg: &ClassAlgebra,
    cap: usize,
) -> Result<TensorLinearMap, BordismError> {
    let (in_arity, out_arity) = arity(expr)?;
    let matrix = eval_matrix(expr, alg, cap)?;
    Ok(TensorLinearMap {
        in_arity,
        out_arity,
        matrix,
    })
}

fn eval_matrix(expr: &Expr, alg: &ClassAlgebra, cap: usize) -> Result<QMat, BordismError> {
    let k = alg.k();
    let (i, o) = arity(expr)?;
    let (din, dout) = (dim(k, i, cap)?, dim(k, o, cap)?);
    match expr {
        Expr::Atom(a) => Ok(atom_matrix(*a, alg, din, dout)),
        Expr::Compose(parts) => {
            let mut acc: Option<QMat> = None;
            for p in parts {
                let m = eval_matrix(p, alg, cap)?;
                acc = Some(match acc {
                    None => m,
                    Some(prev) => prev.mul(&m),
                });
            }
            Ok(acc.unwrap())
        }
        Expr::Tensor(parts) => {
            let mut acc: Option<QMat> = None;
            for p in parts {
                let m = eval_matrix(p, alg, cap)?;
                acc = Some(match acc {
                    None => m,
                    Some(prev) => prev.kron(&m),
                });
            }
            Ok(acc.unwrap())
        }
        Expr::Power(base, n) => {
            let m = eval_matrix(base, alg, cap)?;
            Ok(m.pow(*n))
        }
    }
}

fn atom_matrix(a: Atom, alg: &ClassAlgebra, din: usize, dout: usize) -> QMat {
    let k = alg.k();
    let group = &alg.group;
    let mut m = QMat::zero(dout, din);
    match a {
        Atom::Unit => {
            *m.at_mut(0, 0) = q_int(1);
        }
        Atom::Counit => {
            *m.at_mut(0, 0) = q_int(1) / q_int(group.order() as i64);
        }
        Atom::Mult => {
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        let c = alg.structure_constant(i, j, l);
                        if c != 0 {
                            *m.at_mut(l, i * k + j) = q_int(c);
                        }
                    }
                }
            }
        }
        Atom::Comult => {
            for i in 0..k {
                let one = crate::classfun::ClassFunction::indicator(group.clone(), i);
                let d = alg.comultiply(&one).expect("same group");
                for l in 0..k {
                    for j in 0..k {
                        *m.at_mut(l * k + j, i) = d.at(l, j).clone();
                    }
                }
            }
        }
        Atom::Twist => {
            for i in 0..k {
                for j in 0..k {
                    *m.at_mut(j * k + i, i * k + j) = q_int(1);
                }
            }
        }
        Atom::Id => {
            for i in 0..k {
                *m.at_mut(i, i) = q_int(1);
            }
        }
        Atom::Genus => {
            m = alg.h_matrix();
        }
        Atom::Sigma(g) => {
            *m.at_mut(0, 0) = surface_invariant(alg, g);
        }
    }
    m
}

/// The closed-surface invariant of genus g: counit of g applications of the
/// genus operator to the unit. Equals |Hom(pi_1, G)| / |G|.
pub fn surface_invariant(alg: &ClassAlgebra, genus: u32) -> Q {
    let mut a = alg.unit();
    for _ in 0..genus {
        a = alg.genus_operator(&a).expect("same group");
    }
    alg.counit(&a).expect("same group")
}

pub const DEFAULT_NAIVE_CAP: u64 = 100_000_000;

/// Count 2g-tuples with product of commutators equal to the identity.
/// Enumerates tuples directly when |G|^{2g} is within the cap; otherwise
/// convolves the commutator-count function (built by O(|G|^2) enumeration)
/// g times and reads the value at the identity.
pub fn brute_force_hom_count(
    group: &Arc<FiniteGroup>,
    genus: u32,
) -> Result<BigInt, BordismError> {
    brute_force_hom_count_with(group, genus, DEFAULT_NAIVE_CAP)
}

pub fn brute_force_hom_count_with(
    group: &Arc<FiniteGroup>,
    genus: u32,
    naive_cap: u64,
) -> Result<BigInt, BordismError> {
    let n = group.order() as u64;
    let tuples = (n as f64).powi(2 * genus as i32);
    if tuples <= naive_cap as f64 {
        let mut count = BigInt::zero();
        let g = genus as usize;
        let mut tuple = vec![0usize; 2 * g];
        loop {
            let mut prod = 0usize;
            for pair in tuple.chunks(2) {
                prod = group.mul(prod, group.commutator(pair[0], pair[1]));
            }
            if prod == 0 {
                count += 1;
            }
            let mut pos = 0;
            loop {
                if pos == 2 * g {
                    break;
                }
                tuple[pos] += 1;
                if tuple[pos] < n as usize {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
            if pos == 2 * g {
                break;
            }
        }
        Ok(count)
    } else {
        let alg = ClassAlgebra::new(group.clone())
            .map_err(|e| BordismError::ResourceCap(e.to_string()))?;
        let counts = commutator_counts_by_enumeration(group)
            .map_err(BordismError::ResourceCap)?;
        let f = crate::classfun::ClassFunction::from_values(
            group.clone(),
            counts.iter().map(|&v| q_int(v)).collect(),
        );
        let mut acc = f.clone();
        for _ in 1..genus {
            acc = alg.convolve(&acc, &f).map_err(|e| BordismError::ResourceCap(e.to_string()))?;
        }
        let v = &acc.values[0];
        assert!(v.is_integer(), "hom count must be an integer");
        Ok(v.to_integer())
    }
}

/// |Hom(pi_1 of the genus-g surface, G)| / |G|.
pub fn character_groupoid_cardinality(
    group: &Arc<FiniteGroup>,
    genus: u32,
) -> Result<Q, BordismError> {
    let count = brute_force_hom_count(group, genus)?;
    Ok(BigRational::new(count, BigInt::from(group.order())))
}
