//! The commutative Frobenius algebra of rational class functions of a finite
//! group: convolution, pairing, unit, counit, copairing, comultiplication,
//! and the genus operator, all exact. Structure constants are precomputed
//! once per group so repeated convolution is O(k^3) in the class count k.

use crate::group::FiniteGroup;
use crate::linalg::{fmt_q, q_int, Q, QMat};
use num::{BigRational, Zero};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("class functions belong to different groups ({0} vs {1})")]
    GroupMismatch(String, String),
    #[error("group has {0} classes; dense structure constants over the cap")]
    TooManyClasses(usize),
}

/// Exact rational function constant on conjugacy classes, stored by class
/// index.
#[derive(Clone)]
pub struct ClassFunction {
    pub group: Arc<FiniteGroup>,
    pub values: Vec<Q>,
}

impl ClassFunction {
    pub fn zero(group: Arc<FiniteGroup>) -> ClassFunction {
        let k = group.k();
        ClassFunction {
            group,
            values: vec![BigRational::zero(); k],
        }
    }

    pub fn from_values(group: Arc<FiniteGroup>, values: Vec<Q>) -> ClassFunction {
        assert_eq!(values.len(), group.k());
        ClassFunction { group, values }
    }

    /// Characteristic function of one conjugacy class.
    pub fn indicator(group: Arc<FiniteGroup>, class: usize) -> ClassFunction {
        let mut f = ClassFunction::zero(group);
        f.values[class] = q_int(1);
        f
    }

    pub fn constant_one(group: Arc<FiniteGroup>) -> ClassFunction {
        let k = group.k();
        ClassFunction {
            group,
            values: vec![q_int(1); k],
        }
    }

    pub fn at_element(&self, elem: usize) -> &Q {
        &self.values[self.group.class_of(elem)]
    }

    pub fn add(&self, rhs: &ClassFunction) -> ClassFunction {
        ClassFunction {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &ClassFunction) -> ClassFunction {
        ClassFunction {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> ClassFunction {
        ClassFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn to_json(&self) -> Value {
        let reps: Vec<Value> = self
            .group
            .classes
            .reps
            .iter()
            .map(|&r| {
                let m = self.group.element(r);
                json!(m.entries)
            })
            .collect();
        json!({
            "values": self.values.iter().map(fmt_q).collect::<Vec<_>>(),
            "class_reps": reps,
        })
    }
}

impl PartialEq for ClassFunction {
    fn eq(&self, other: &ClassFunction) -> bool {
        self.values == other.values
    }
}

impl std::fmt::Debug for ClassFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vals: Vec<String> = self.values.iter().map(fmt_q).collect();
        write!(f, "ClassFunction[{}]", vals.join(", "))
    }
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || (a.name == b.name && a.p == b.p && a.order() == b.order())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: &str, witness: Option<String>) {
        self.checks.push(AxiomCheck {
            name: name.to_string(),
            pass: witness.is_none(),
            witness,
        });
    }
}

/// Class-algebra context for one group: structure constants
/// N(i,j,l) = #{(x,y) in C_i x C_j : xy = c_l} and the commutator-count
/// function, computed once.
pub struct ClassAlgebra {
    pub group: Arc<FiniteGroup>,
    k: usize,
    n: Vec<i64>,      // (i*k + j)*k + l
    f_by_class: Vec<i64>, // #{(A,B) : [A,B] = c_l}, one value per class
}

const MAX_DENSE_CONSTANTS: usize = 200_000_000;

impl ClassAlgebra {
    pub fn new(group: Arc<FiniteGroup>) -> Result<ClassAlgebra, AlgebraError> {
        let k = group.k();
        if k.saturating_mul(k).saturating_mul(k) > MAX_DENSE_CONSTANTS {
            return Err(AlgebraError::TooManyClasses(k));
        }
        let mut n = vec![0i64; k * k * k];
        for l in 0..k {
            let c = group.classes.reps[l];
            for x in 0..group.order() {
                let i = group.class_of(x);
                let y = group.mul(group.inv(x), c);
                let j = group.class_of(y);
                n[(i * k + j) * k + l] += 1;
            }
        }
        let mut f_by_class = vec![0i64; k];
        for (l, v) in f_by_class.iter_mut().enumerate() {
            let mut acc = 0i64;
            for i in 0..k {
                let istar = group.classes.inverse_class[i];
                let z = group.classes.centralizer_orders[i] as i64;
                acc += z * n[(i * k + istar) * k + l];
            }
            *v = acc;
        }
        Ok(ClassAlgebra {
            group,
            k,
            n,
            f_by_class,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn structure_constant(&self, i: usize, j: usize, l: usize) -> i64 {
        self.n[(i * self.k + j) * self.k + l]
    }

    fn check(&self, a: &ClassFunction) -> Result<(), AlgebraError> {
        if same_group(&a.group, &self.group) {
            Ok(())
        } else {
            Err(AlgebraError::GroupMismatch(
                a.group.name.clone(),
                self.group.name.clone(),
            ))
        }
    }

    /// Convolution product: (a * b)(g) = sum_h a(h) b(h^{-1} g).
    pub fn convolve(
        &self,
        a: &ClassFunction,
        b: &ClassFunction,
    ) -> Result<ClassFunction, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        let k = self.k;
        let mut out = vec![BigRational::zero(); k];
        for i in 0..k {
            if a.values[i].is_zero() {
                continue;
            }
            for j in 0..k {
                if b.values[j].is_zero() {
                    continue;
                }
                let prod = &a.values[i] * &b.values[j];
                for (l, o) in out.iter_mut().enumerate() {
                    let c = self.n[(i * k + j) * k + l];
                    if c != 0 {
                        *o += &prod * q_int(c);
                    }
                }
            }
        }
        Ok(ClassFunction::from_values(self.group.clone(), out))
    }

    /// Pairing beta(a, b) = (1/|G|) sum_g a(g) b(g^{-1}).
    pub fn pair(&self, a: &ClassFunction, b: &ClassFunction) -> Result<Q, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        let mut acc = BigRational::zero();
        for i in 0..self.k {
            let istar = self.group.classes.inverse_class[i];
            let size = q_int(self.group.classes.sizes[i] as i64);
            acc += &a.values[i] * &b.values[istar] * size;
        }
        Ok(acc / q_int(self.group.order() as i64))
    }

    /// The algebra unit: the characteristic function of the identity.
    pub fn unit(&self) -> ClassFunction {
        ClassFunction::indicator(self.group.clone(), 0)
    }

    /// epsilon(a) = a(identity) / |G|.
    pub fn counit(&self, a: &ClassFunction) -> Result<Q, AlgebraError> {
        self.check(a)?;
        Ok(&a.values[0] / q_int(self.group.order() as i64))
    }

    /// The copairing evaluated on a pair of classes: the number of h with
    /// h g1 h^{-1} = g2^{-1}, i.e. the centralizer order when the classes are
    /// inverse to each other and 0 otherwise.
    pub fn gamma(&self, c1: usize, c2: usize) -> Q {
        if self.group.classes.inverse_class[c1] == c2 {
            q_int(self.group.classes.centralizer_orders[c1] as i64)
        } else {
            BigRational::zero()
        }
    }

    /// The copairing as an element of the tensor square: sum_i z_i
    /// (indicator of class i*) tensor (indicator of class i). Entry (l, j)
    /// of the returned matrix is the coefficient of 1_l tensor 1_j.
    pub fn copairing(&self) -> QMat {
        let mut m = QMat::zero(self.k, self.k);
        for i in 0..self.k {
            let istar = self.group.classes.inverse_class[i];
            *m.at_mut(istar, i) = q_int(self.group.classes.centralizer_orders[i] as i64);
        }
        m
    }

    /// delta(a) = (mu tensor id)(a tensor copairing), as a k x k matrix over
    /// the class basis (rows: first tensor factor).
    pub fn comultiply(&self, a: &ClassFunction) -> Result<QMat, AlgebraError> {
        self.check(a)?;
        let k = self.k;
        let mut m = QMat::zero(k, k);
        for j in 0..k {
            let jstar = self.group.classes.inverse_class[j];
            let z = q_int(self.group.classes.centralizer_orders[j] as i64);
            for l in 0..k {
                let mut acc = BigRational::zero();
                for i in 0..k {
                    if a.values[i].is_zero() {
                        continue;
                    }
                    let c = self.n[(i * k + jstar) * k + l];
                    if c != 0 {
                        acc += &a.values[i] * q_int(c);
                    }
                }
                *m.at_mut(l, j) = acc * &z;
            }
        }
        Ok(m)
    }

    /// Apply mu to a tensor-square element given as a k x k matrix.
    pub fn mu_tensor(&self, m: &QMat) -> ClassFunction {
        let k = self.k;
        let mut out = vec![BigRational::zero(); k];
        for l in 0..k {
            for j in 0..k {
                let c = m.at(l, j);
                if c.is_zero() {
                    continue;
                }
                for (r, o) in out.iter_mut().enumerate() {
                    let s = self.n[(l * k + j) * k + r];
                    if s != 0 {
                        *o += c * q_int(s);
                    }
                }
            }
        }
        ClassFunction::from_values(self.group.clone(), out)
    }

    /// The class function g -> #{(A,B) : [A,B] = g}, derived from the
    /// structure constants.
    pub fn commutator_count_fn(&self) -> ClassFunction {
        ClassFunction::from_values(
            self.group.clone(),
            self.f_by_class.iter().map(|&v| q_int(v)).collect(),
        )
    }

    /// The genus operator h = mu . delta, computed as convolution with the
    /// commutator-count function.
    pub fn genus_operator(&self, a: &ClassFunction) -> Result<ClassFunction, AlgebraError> {
        self.check(a)?;
        self.convolve(a, &self.commutator_count_fn())
    }

    /// Matrix of the genus operator in the class basis, columns indexed by
    /// input class: h(1_i) = sum_r H[r][i] 1_r.
    pub fn h_matrix(&self) -> QMat {
        let k = self.k;
        let mut m = QMat::zero(k, k);
        for i in 0..k {
            for r in 0..k {
                let mut acc = 0i64;
                for l in 0..k {
                    acc += self.f_by_class[l] * self.n[(i * k + l) * k + r];
                }
                *m.at_mut(r, i) = q_int(acc);
            }
        }
        m
    }

    /// Check every Frobenius-algebra law on the class basis with exact
    /// arithmetic; failures are reported with witnesses, not thrown.
    pub fn axiom_suite(&self) -> AxiomReport {
        let k = self.k;
        let n = &self.n;
        let sizes = &self.group.classes.sizes;
        let inv_cls = &self.group.classes.inverse_class;
        let mut report = AxiomReport::default();

        let mut witness = None;
        'comm: for i in 0..k {
            for j in 0..i {
                for l in 0..k {
                    if n[(i * k + j) * k + l] != n[(j * k + i) * k + l] {
                        witness = Some(format!("classes ({i},{j}) at {l}"));
                        break 'comm;
                    }
                }
            }
        }
        report.push("multiplication commutative", witness);

        let mut witness = None;
        'stru: for i in 0..k {
            for j in 0..k {
                let mut total = 0i64;
                for l in 0..k {
                    total += sizes[l] as i64 * n[(i * k + j) * k + l];
                }
                if total != (sizes[i] * sizes[j]) as i64 {
                    witness = Some(format!("classes ({i},{j}): weighted sum {total}"));
                    break 'stru;
                }
            }
        }
        report.push("structure constants consistent with class sizes", witness);

        let mut witness = None;
        'asso: for i in 0..k {
            for j in 0..k {
                for m in 0..k {
                    for r in 0..k {
                        let mut lhs = 0i64;
                        let mut rhs = 0i64;
                        for l in 0..k {
                            lhs += n[(i * k + j) * k + l] * n[(l * k + m) * k + r];
                            rhs += n[(j * k + m) * k + l] * n[(i * k + l) * k + r];
                        }
                        if lhs != rhs {
                            witness = Some(format!("classes ({i},{j},{m}) at {r}"));
                            break 'asso;
                        }
                    }
                }
            }
        }
        report.push("multiplication associative", witness);

        let mut witness = None;
        'unit: for j in 0..k {
            for l in 0..k {
                let expected = i64::from(j == l);
                if n[j * k + l] != expected {
                    witness = Some(format!("class {j} at {l}"));
                    break 'unit;
                }
            }
        }
        report.push("unit law", witness);

        let mut witness = None;
        'bass: for i in 0..k {
            for j in 0..k {
                for m in 0..k {
                    let mstar = inv_cls[m];
                    let istar = inv_cls[i];
                    let lhs = n[(i * k + j) * k + mstar] * sizes[mstar] as i64;
                    let rhs = n[(j * k + m) * k + istar] * sizes[i] as i64;
                    if lhs != rhs {
                        witness = Some(format!("classes ({i},{j},{m})"));
                        break 'bass;
                    }
                }
            }
        }
        report.push("pairing associative", witness);

        let mut witness = None;
        for i in 0..k {
            for j in 0..k {
                let istar = inv_cls[i];
                let beta = if j == istar { sizes[i] as i64 } else { 0 };
                if beta != n[(i * k + j) * k] {
                    witness = Some(format!("classes ({i},{j})"));
                }
            }
        }
        report.push("pairing equals counit of product", witness);

        // snake identities for the pairing/copairing, checked as rational
        // identities on the basis
        let mut witness = None;
        for i in 0..k {
            // (beta tensor id)(1_i tensor gamma) = sum_j z_j beta(1_i, 1_{j*}) 1_j
            let mut out = vec![BigRational::zero(); k];
            for j in 0..k {
                let jstar = inv_cls[j];
                let z = q_int(self.group.classes.centralizer_orders[j] as i64);
                // beta(1_i, 1_{j*}) = |C_i|/|G| when j* = i*, i.e. j = i
                let beta = if inv_cls[i] == jstar {
                    q_int(sizes[i] as i64) / q_int(self.group.order() as i64)
                } else {
                    BigRational::zero()
                };
                out[j] = z * beta;
            }
            for (j, v) in out.iter().enumerate() {
                let expected = q_int(i64::from(i == j));
                if *v != expected {
                    witness = Some(format!("basis class {i} at {j}: {}", fmt_q(v)));
                }
            }
        }
        report.push("snake identity", witness);

        // counit laws for delta
        let mut witness = None;
        let order = q_int(self.group.order() as i64);
        for i in 0..k {
            let one = ClassFunction::indicator(self.group.clone(), i);
            let d = self.comultiply(&one).unwrap();
            for j in 0..k {
                let left = d.at(0, j) / &order;
                let right = d.at(j, 0) / &order;
                let expected = q_int(i64::from(i == j));
                if left != expected || right != expected {
                    witness = Some(format!("basis class {i} at {j}"));
                }
            }
        }
        report.push("counit laws", witness);

        // the genus operator mu . delta equals convolution with the
        // commutator-count function, entrywise in integers
        let mut witness = None;
        'lemm: for i in 0..k {
            for r in 0..k {
                let mut lhs = 0i64;
                for j in 0..k {
                    let jstar = inv_cls[j];
                    let z = self.group.classes.centralizer_orders[j] as i64;
                    for l in 0..k {
                        lhs += z * n[(i * k + jstar) * k + l] * n[(l * k + j) * k + r];
                    }
                }
                let mut rhs = 0i64;
                for l in 0..k {
                    rhs += self.f_by_class[l] * n[(i * k + l) * k + r];
                }
                if lhs != rhs {
                    witness = Some(format!("basis class {i} at {r}: {lhs} vs {rhs}"));
                    break 'lemm;
                }
            }
        }
        report.push("genus operator factors through commutator counts", witness);

        report
    }
}

/// Independent oracle: count commutator fibers by enumerating all |G|^2
/// pairs with pure group operations, verify the counts are constant on
/// conjugacy classes, and return one value per class.
pub fn commutator_counts_by_enumeration(group: &FiniteGroup) -> Result<Vec<i64>, String> {
    let n = group.order();
    let mut per_element = vec![0i64; n];
    for a in 0..n {
        for b in 0..n {
            per_element[group.commutator(a, b)] += 1;
        }
    }
    let mut per_class = vec![None; group.k()];
    for (x, &count) in per_element.iter().enumerate() {
        let c = group.class_of(x);
        match per_class[c] {
            None => per_class[c] = Some(count),
            Some(prev) if prev == count => {}
            Some(prev) => {
                return Err(format!(
                    "commutator counts not constant on class {c}: {prev} vs {count}"
                ))
            }
        }
    }
    Ok(per_class.into_iter().map(|v| v.unwrap()).collect())
}
