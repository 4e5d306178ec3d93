#![allow(dead_code)]

use std::sync::Arc;

use charq_core::bordism::{arity, Atom, Expr};
use charq_core::group::{FamilySpec, FiniteGroup};
use charq_core::schemes::{builtin, BuiltinFamily};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn json_group(json: &str, p: u64) -> Arc<FiniteGroup> {
    Arc::new(
        FamilySpec::from_json_str(json)
            .unwrap()
            .instantiate(p)
            .unwrap(),
    )
}

pub fn catalog(name: &str) -> BuiltinFamily {
    builtin(name).unwrap()
}

pub fn catalog_group(name: &str, p: u64) -> Arc<FiniteGroup> {
    Arc::new(catalog(name).instantiate(p).unwrap())
}

pub fn trivial_group() -> Arc<FiniteGroup> {
    json_group(r#"{"name": "triv", "dim": 1, "pattern": [[1]]}"#, 5)
}

/// The m-th roots of unity inside GL1(F_p); p must satisfy m | p - 1 for the
/// group to have m elements.
pub fn roots_of_unity(m: u64, p: u64) -> Arc<FiniteGroup> {
    let json = format!(
        r#"{{"name": "mu{m}", "dim": 1, "pattern": [["a"]], "constraints": [{{"poly": "a^{m}-1", "rel": "eq"}}]}}"#
    );
    json_group(&json, p)
}

/// A random well-typed expression: a composition chain of tensor layers,
/// occasionally nesting a parenthesized sub-chain as a tensor factor.
pub fn random_wellformed_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    let k = rng.gen_range(0..=3);
    gen_block(rng, k, depth)
}

fn gen_block(rng: &mut ChaCha8Rng, k: u32, depth: usize) -> Expr {
    let mut chain = vec![tensor_layer(rng, k, depth)];
    let mut layers = if depth == 0 { 0 } else { rng.gen_range(0..=depth) };
    while layers > 0 {
        let (_, out) = arity(chain.last().unwrap()).expect("layers are well typed");
        chain.push(tensor_layer(rng, out, depth - 1));
        layers -= 1;
    }
    chain.reverse();
    if chain.len() == 1 {
        chain.pop().unwrap()
    } else {
        Expr::Compose(chain)
    }
}

fn tensor_layer(rng: &mut ChaCha8Rng, k: u32, depth: usize) -> Expr {
    let mut pieces: Vec<Expr> = Vec::new();
    let mut remaining = k;
    while remaining > 0 {
        if remaining >= 2 && rng.gen_bool(0.4) {
            pieces.push(two_leg(rng));
            remaining -= 2;
        } else {
            pieces.push(one_leg(rng, depth));
            remaining -= 1;
        }
        if rng.gen_bool(0.12) {
            pieces.push(zero_leg(rng));
        }
    }
    if pieces.is_empty() {
        pieces.push(zero_leg(rng));
        if rng.gen_bool(0.3) {
            pieces.push(zero_leg(rng));
        }
    }
    if pieces.len() == 1 {
        pieces.pop().unwrap()
    } else {
        Expr::Tensor(pieces)
    }
}

fn one_leg(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    match rng.gen_range(0..8) {
        0 => Expr::Atom(Atom::Counit),
        1 => Expr::Atom(Atom::Id),
        2 => Expr::Atom(Atom::Comult),
        3 => Expr::Atom(Atom::Genus),
        4 => Expr::Power(Box::new(Expr::Atom(Atom::Genus)), rng.gen_range(1..=3)),
        5 => Expr::Power(Box::new(Expr::Atom(Atom::Id)), rng.gen_range(1..=3)),
        6 if depth > 0 => gen_block(rng, 1, depth - 1),
        _ => Expr::Atom(Atom::Genus),
    }
}

fn two_leg(rng: &mut ChaCha8Rng) -> Expr {
    match rng.gen_range(0..3) {
        0 => Expr::Atom(Atom::Mult),
        1 => Expr::Atom(Atom::Twist),
        _ => Expr::Power(Box::new(Expr::Atom(Atom::Twist)), rng.gen_range(1..=2)),
    }
}

fn zero_leg(rng: &mut ChaCha8Rng) -> Expr {
    if rng.gen_bool(0.5) {
        Expr::Atom(Atom::Unit)
    } else {
        Expr::Atom(Atom::Sigma(rng.gen_range(0..=2)))
    }
}
