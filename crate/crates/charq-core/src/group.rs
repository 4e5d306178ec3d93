//! Finite matrix groups over a prime field, built from declarative family
//! patterns. A pattern is an n x n grid of fixed constants and named
//! variables plus polynomial constraints; instantiating at a prime p
//! enumerates the matching matrices, verifies the group axioms, and
//! computes conjugacy-class data.

use crate::fp::{is_prime, Fp, FpMatrix};
use crate::poly::MPoly;
use serde_json::Value;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the configured bound {1}")]
    PrimeTooLarge(u64, u64),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("bad family spec: {0}")]
    BadSpec(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cell {
    Const(i64),
    Var(usize),
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub poly: MPoly,
    pub is_eq: bool, // poly = 0 if true, poly != 0 if false
}

/// Declarative description of a matrix-group family: one spec serves all
/// primes in range.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub dim: usize,
    pub cells: Vec<Cell>, // row-major dim*dim
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub generator_hints: Vec<Vec<i64>>, // variable assignments, parallel to vars
}

/// Resource limits for instantiation.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub max_order: u64,
    pub max_assignments: u64,
    pub mul_table_limit: usize,
    pub exhaustive_limit: usize,
    pub max_prime: u64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            max_order: 1_000_000,
            max_assignments: 10_000_000,
            mul_table_limit: 4096,
            exhaustive_limit: 512,
            max_prime: 101,
        }
    }
}

impl FamilySpec {
    pub fn from_json_str(text: &str) -> Result<FamilySpec, GroupError> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| GroupError::BadSpec(format!("invalid JSON: {e}")))?;
        FamilySpec::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<FamilySpec, GroupError> {
        let bad = |m: &str| GroupError::BadSpec(m.to_string());
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing \"name\""))?
            .to_string();
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"dim\""))? as usize;
        if dim == 0 || dim > 8 {
            return Err(bad("\"dim\" must be between 1 and 8"));
        }
        let pattern = v
            .get("pattern")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"pattern\""))?;
        if pattern.len() != dim {
            return Err(bad("pattern row count must equal dim"));
        }
        let mut vars: Vec<String> = Vec::new();
        let mut cells = Vec::with_capacity(dim * dim);
        for row in pattern {
            let row = row.as_array().ok_or_else(|| bad("pattern rows must be arrays"))?;
            if row.len() != dim {
                return Err(bad("pattern column count must equal dim"));
            }
            for cell in row {
                match cell {
                    Value::Number(n) => {
                        let c = n
                            .as_i64()
                            .ok_or_else(|| bad("pattern constants must be integers"))?;
                        cells.push(Cell::Const(c));
                    }
                    Value::String(s) => {
                        let idx = match vars.iter().position(|v| v == s) {
                            Some(i) => i,
                            None => {
                                vars.push(s.clone());
                                vars.len() - 1
                            }
                        };
                        cells.push(Cell::Var(idx));
                    }
                    _ => return Err(bad("pattern cells must be integers or variable names")),
                }
            }
        }
        let mut constraints = Vec::new();
        if let Some(cs) = v.get("constraints") {
            let cs = cs.as_array().ok_or_else(|| bad("\"constraints\" must be an array"))?;
            for c in cs {
                let poly_text = c
                    .get("poly")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("constraint missing \"poly\""))?;
                let rel = c
                    .get("rel")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("constraint missing \"rel\""))?;
                let poly = MPoly::parse(poly_text, &vars)
                    .map_err(|e| GroupError::BadSpec(format!("constraint {poly_text:?}: {e}")))?;
                let is_eq = match rel {
                    "eq" => true,
                    "neq" => false,
                    other => return Err(GroupError::BadSpec(format!("unknown rel {other:?}"))),
                };
                constraints.push(Constraint { poly, is_eq });
            }
        }
        let mut generator_hints = Vec::new();
        if let Some(gs) = v.get("generators") {
            let gs = gs.as_array().ok_or_else(|| bad("\"generators\" must be an array"))?;
            for g in gs {
                let map = g
                    .as_object()
                    .ok_or_else(|| bad("generators must be objects mapping variables to values"))?;
                let mut assignment = vec![0i64; vars.len()];
                for (key, val) in map {
                    let idx = vars
                        .iter()
                        .position(|v| v == key)
                        .ok_or_else(|| GroupError::BadSpec(format!("unknown variable {key:?} in generator")))?;
                    assignment[idx] = val
                        .as_i64()
                        .ok_or_else(|| bad("generator values must be integers"))?;
                }
                generator_hints.push(assignment);
            }
        }
        Ok(FamilySpec {
            name,
            dim,
            cells,
            vars,
            constraints,
            generator_hints,
        })
    }

    pub fn instantiate(&self, p: u64) -> Result<FiniteGroup, GroupError> {
        self.instantiate_with(p, &Caps::default())
    }

    pub fn instantiate_with(&self, p: u64, caps: &Caps) -> Result<FiniteGroup, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        if p > caps.max_prime {
            return Err(GroupError::PrimeTooLarge(p, caps.max_prime));
        }
        let f = Fp::new(p);
        let m = self.vars.len();
        let total = (p as f64).powi(m as i32);
        if total > caps.max_assignments as f64 {
            return Err(GroupError::TooLarge(format!(
                "{} assignments to enumerate exceeds cap {}",
                total, caps.max_assignments
            )));
        }

        let mut elements: Vec<FpMatrix> = Vec::new();
        let mut assignment = vec![0u64; m];
        loop {
            if self.satisfies(f, &assignment) {
                elements.push(self.build_matrix(f, &assignment));
                if elements.len() as u64 > caps.max_order {
                    return Err(GroupError::TooLarge(format!(
                        "order exceeds cap {}",
                        caps.max_order
                    )));
                }
            }
            // odometer increment; m = 0 means a single constant matrix
            let mut pos = 0;
            loop {
                if pos == m {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] < p {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
            if pos == m {
                break;
            }
        }

        if elements.is_empty() {
            return Err(GroupError::NotAGroup("no matrices match the pattern".into()));
        }
        let id = FpMatrix::identity(self.dim);
        let id_pos = elements
            .iter()
            .position(|e| *e == id)
            .ok_or_else(|| GroupError::NotAGroup("identity matrix not in the set".into()))?;
        elements.swap(0, id_pos);

        let index: HashMap<FpMatrix, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        if index.len() != elements.len() {
            return Err(GroupError::NotAGroup("duplicate matrices in enumeration".into()));
        }
        let n = elements.len();

        let mut inv_table = vec![0u32; n];
        for i in 0..n {
            let inv = elements[i]
                .inverse(f)
                .ok_or_else(|| GroupError::NotAGroup(format!("element {i} is singular")))?;
            let j = *index
                .get(&inv)
                .ok_or_else(|| GroupError::NotAGroup(format!("inverse of element {i} not in the set")))?;
            inv_table[i] = j as u32;
        }

        let mul_table = if n <= caps.mul_table_limit {
            let mut table = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    let prod = elements[i].mul(&elements[j], f);
                    let l = *index.get(&prod).ok_or_else(|| {
                        GroupError::NotAGroup(format!("product of elements {i}, {j} leaves the set"))
                    })?;
                    table[i * n + j] = l as u32;
                }
            }
            Some(table)
        } else {
            None
        };

        let mut group = FiniteGroup {
            name: self.name.clone(),
            p,
            dim: self.dim,
            elements,
            index,
            mul_table,
            inv_table,
            classes: ConjugacyData::default(),
        };
        group.verify_axioms(caps)?;

        let conjugators = group.conjugator_set(self, f, caps)?;
        group.classes = group.classes_via(&conjugators);
        Ok(group)
    }

    fn satisfies(&self, f: Fp, assignment: &[u64]) -> bool {
        self.constraints.iter().all(|c| {
            let v = c.poly.eval_mod(f, assignment);
            (v == 0) == c.is_eq
        })
    }

    fn build_matrix(&self, f: Fp, assignment: &[u64]) -> FpMatrix {
        let entries = self
            .cells
            .iter()
            .map(|cell| match cell {
                Cell::Const(c) => f.reduce(*c),
                Cell::Var(i) => assignment[*i],
            })
            .collect();
        FpMatrix {
            n: self.dim,
            entries,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConjugacyData {
    pub class_of: Vec<u32>,
    pub reps: Vec<usize>,
    pub sizes: Vec<u64>,
    pub centralizer_orders: Vec<u64>,
    pub inverse_class: Vec<usize>,
}

pub struct FiniteGroup {
    pub name: String,
    pub p: u64,
    pub dim: usize,
    elements: Vec<FpMatrix>,
    index: HashMap<FpMatrix, usize>,
    mul_table: Option<Vec<u32>>,
    inv_table: Vec<u32>,
    pub classes: ConjugacyData,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Number of conjugacy classes.
    pub fn k(&self) -> usize {
        self.classes.reps.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element(&self, i: usize) -> &FpMatrix {
        &self.elements[i]
    }

    pub fn index_of(&self, m: &FpMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        match &self.mul_table {
            Some(t) => t[i * self.elements.len() + j] as usize,
            None => {
                let f = Fp::new(self.p);
                let prod = self.elements[i].mul(&self.elements[j], f);
                self.index[&prod]
            }
        }
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inv_table[i] as usize
    }

    /// [a, b] = a b a^{-1} b^{-1}
    pub fn commutator(&self, a: usize, b: usize) -> usize {
        let ab = self.mul(a, b);
        let ai = self.inv(a);
        let bi = self.inv(b);
        self.mul(self.mul(ab, ai), bi)
    }

    pub fn class_of(&self, elem: usize) -> usize {
        self.classes.class_of[elem] as usize
    }

    fn verify_axioms(&self, caps: &Caps) -> Result<(), GroupError> {
        let n = self.order();
        for i in 0..n {
            if self.mul(0, i) != i || self.mul(i, 0) != i {
                return Err(GroupError::NotAGroup(format!("element 0 is not an identity for {i}")));
            }
            let j = self.inv(i);
            if self.mul(i, j) != 0 || self.mul(j, i) != 0 {
                return Err(GroupError::NotAGroup(format!("inverse table wrong at {i}")));
            }
        }
        if n < caps.exhaustive_limit {
            let f = Fp::new(self.p);
            for i in 0..n {
                for j in 0..n {
                    let prod = self.elements[i].mul(&self.elements[j], f);
                    if !self.index.contains_key(&prod) {
                        return Err(GroupError::NotAGroup(format!(
                            "product of elements {i}, {j} leaves the set"
                        )));
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                            return Err(GroupError::NotAGroup("associativity failure".into()));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x5EED_BA5E_u64;
            for _ in 0..10_000 {
                let a = (splitmix64(&mut state) % n as u64) as usize;
                let b = (splitmix64(&mut state) % n as u64) as usize;
                let c = (splitmix64(&mut state) % n as u64) as usize;
                let f = Fp::new(self.p);
                let prod = self.elements[a].mul(&self.elements[b], f);
                if !self.index.contains_key(&prod) {
                    return Err(GroupError::NotAGroup(format!(
                        "product of elements {a}, {b} leaves the set"
                    )));
                }
                if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                    return Err(GroupError::NotAGroup("associativity failure".into()));
                }
            }
        }
        Ok(())
    }

    /// Elements whose conjugation orbits give the true conjugacy classes:
    /// validated generator hints, everything for small groups, or a greedily
    /// discovered generating set.
    fn conjugator_set(
        &self,
        spec: &FamilySpec,
        f: Fp,
        caps: &Caps,
    ) -> Result<Vec<usize>, GroupError> {
        if !spec.generator_hints.is_empty() {
            let mut hints = Vec::new();
            for assignment in &spec.generator_hints {
                let reduced: Vec<u64> = assignment.iter().map(|&v| f.reduce(v)).collect();
                let m = spec.build_matrix(f, &reduced);
                let i = self
                    .index_of(&m)
                    .ok_or_else(|| GroupError::BadSpec("generator hint is not a group element".into()))?;
                hints.push(i);
            }
            if self.closure_size(&hints) == self.order() {
                return Ok(hints);
            }
            // hints do not generate; fall through to the safe defaults
        }
        if self.order() <= caps.mul_table_limit {
            Ok((0..self.order()).collect())
        } else {
            Ok(self.greedy_generating_set())
        }
    }

    fn closure_size(&self, generators: &[usize]) -> usize {
        let n = self.order();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = vec![0usize];
        while let Some(x) = queue.pop() {
            for &g in generators {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push(y);
                }
            }
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Build a generating set by repeatedly adjoining the first element
    /// outside the subgroup generated so far.
    pub fn greedy_generating_set(&self) -> Vec<usize> {
        let n = self.order();
        let mut gens: Vec<usize> = Vec::new();
        let mut in_subgroup = vec![false; n];
        in_subgroup[0] = true;
        let mut count = 1;
        while count < n {
            let next = (0..n).find(|&i| !in_subgroup[i]).unwrap();
            gens.push(next);
            let mut queue: Vec<usize> = (0..n).filter(|&i| in_subgroup[i]).collect();
            while let Some(x) = queue.pop() {
                for &g in &gens {
                    let y = self.mul(x, g);
                    if !in_subgroup[y] {
                        in_subgroup[y] = true;
                        count += 1;
                        queue.push(y);
                    }
                }
            }
        }
        gens
    }

    /// Conjugacy classes as orbits under conjugation by the given elements.
    /// Correct whenever the conjugators generate the group (or are all of it).
    pub fn classes_via(&self, conjugators: &[usize]) -> ConjugacyData {
        let n = self.order();
        let mut class_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for start in 0..n {
            if class_of[start] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            class_of[start] = c;
            let mut orbit = vec![start];
            let mut queue = vec![start];
            while let Some(x) = queue.pop() {
                for &s in conjugators {
                    let y = self.mul(self.mul(s, x), self.inv(s));
                    if class_of[y] == u32::MAX {
                        class_of[y] = c;
                        orbit.push(y);
                        queue.push(y);
                    }
                }
            }
            reps.push(start);
            sizes.push(orbit.len() as u64);
        }
        let centralizer_orders = sizes.iter().map(|&s| n as u64 / s).collect();
        let inverse_class = reps
            .iter()
            .map(|&r| class_of[self.inv(r)] as usize)
            .collect();
        ConjugacyData {
            class_of,
            reps,
            sizes,
            centralizer_orders,
            inverse_class,
        }
    }
}
