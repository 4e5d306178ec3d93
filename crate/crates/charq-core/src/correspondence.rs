//! The arithmetic side of the story: genus-operator matrices on generator
//! bases per prime, exact polynomial interpolation in q across primes,
//! eigen-analysis of the genus operator on the cyclic span of the unit, and
//! the character-dimension census that falls out of it.

use crate::classfun::{AlgebraError, ClassAlgebra, ClassFunction};
use crate::linalg::{express_in_span, fmt_q, q_int, Q, QMat};
use crate::poly::PolyQ;
use crate::schemes::{integrate_generator, BuiltinFamily, GeneratorSpec, SchemeError};
use num::{BigInt, BigRational, One, Signed, Zero};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CorrespondenceError {
    #[error("generators are linearly dependent")]
    DependentGenerators,
    #[error("the genus operator leaves the generator span: {0}")]
    NotInvariant(String),
    #[error("need at least {needed} primes (degree bound + 2), got {got}")]
    InsufficientPrimes { needed: usize, got: usize },
    #[error("entry ({row},{col}) interpolates to degree {degree}, over the bound {bound}")]
    DegreeExceeded {
        row: usize,
        col: usize,
        degree: usize,
        bound: usize,
    },
    #[error("entry ({row},{col}) has no exact integer-polynomial fit: {detail}")]
    BadFit {
        row: usize,
        col: usize,
        detail: String,
    },
    #[error("entry ({row},{col}) validates wrong at p={prime}: expected {expected}, got {got}")]
    ValidationFailed {
        row: usize,
        col: usize,
        prime: u64,
        expected: String,
        got: String,
    },
    #[error("genus operator is not diagonalizable over the admissible eigenvalues: {0}")]
    NotDiagonalizable(String),
    #[error("multiplicity for dimension {dim} is not a nonnegative integer: {value}")]
    NonIntegerMultiplicity { dim: u64, value: String },
    #[error("not an eigenvector: {0}")]
    NotEigenvector(String),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Square matrix over integer polynomials in q, together with the data that
/// produced it: generator labels, node primes, and the held-out prime the
/// result was checked against.
#[derive(Clone, Debug, PartialEq)]
pub struct GenusMatrix {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<PolyQ>>, // row-major
    pub degree_bound: usize,
    pub primes: Vec<u64>, // interpolation nodes
    pub validation_prime: u64,
}

impl GenusMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn specialize(&self, p: u64) -> QMat {
        let n = self.size();
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = self.entries[i][j].eval_q(p);
            }
        }
        m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "labels": self.labels,
            "entries": self.entries
                .iter()
                .map(|row| row.iter().map(|e| e.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "primes": self.primes,
            "validated_at": self.validation_prime,
        })
    }
}

/// Multiset of irreducible character dimensions: (d, how many).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionCensus {
    pub entries: Vec<(u64, u64)>, // sorted by dimension
    pub group_order: u64,
}

impl DimensionCensus {
    /// The squares of the dimensions, with multiplicity, must fill the
    /// group order.
    pub fn burnside_ok(&self) -> bool {
        self.entries.iter().map(|&(d, n)| d * d * n).sum::<u64>() == self.group_order
    }

    /// Total number of irreducibles; must equal the class count.
    pub fn class_count(&self) -> u64 {
        self.entries.iter().map(|&(_, n)| n).sum()
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .entries
            .iter()
            .map(|&(d, n)| json!({"dim": d, "count": n}))
            .collect::<Vec<_>>())
    }
}

/// Eigen-decomposition of the genus operator on the cyclic span of the
/// unit: integer eigenvalues (|G|/d)^2, the matching dimensions d, and the
/// projections of the unit summing back to it.
#[derive(Clone, Debug)]
pub struct EigenReport {
    pub dimensions: Vec<u64>,
    pub eigenvalues: Vec<BigInt>,
    pub projections: Vec<ClassFunction>,
}

/// Matrix of the genus operator on the span of the given class functions:
/// column i holds the coordinates of the image of generator i.
pub fn genus_matrix_at_prime(
    alg: &ClassAlgebra,
    generators: &[ClassFunction],
) -> Result<QMat, CorrespondenceError> {
    let m = generators.len();
    if m == 0 {
        return Err(CorrespondenceError::BadInput("no generators given".into()));
    }
    let basis: Vec<Vec<Q>> = generators.iter().map(|g| g.values.clone()).collect();
    if QMat::from_rows(basis.clone()).rank() != m {
        return Err(CorrespondenceError::DependentGenerators);
    }
    let mut out = QMat::zero(m, m);
    for (i, g) in generators.iter().enumerate() {
        let image = alg.genus_operator(g)?;
        let coords = express_in_span(&basis, &image.values).ok_or_else(|| {
            CorrespondenceError::NotInvariant(format!(
                "image of generator {i} is outside the span"
            ))
        })?;
        for (j, c) in coords.into_iter().enumerate() {
            *out.at_mut(j, i) = c;
        }
    }
    Ok(out)
}

/// Entrywise exact interpolation of per-prime matrices into polynomials in
/// q, holding out `validation_prime` and checking the result against it.
pub fn interpolate(
    per_prime: &[(u64, QMat)],
    labels: Vec<String>,
    degree_bound: usize,
    validation_prime: u64,
) -> Result<GenusMatrix, CorrespondenceError> {
    if per_prime.len() < degree_bound + 2 {
        return Err(CorrespondenceError::InsufficientPrimes {
            needed: degree_bound + 2,
            got: per_prime.len(),
        });
    }
    let vpos = per_prime
        .iter()
        .position(|&(p, _)| p == validation_prime)
        .ok_or_else(|| {
            CorrespondenceError::BadInput(format!(
                "validation prime {validation_prime} is not among the supplied primes"
            ))
        })?;
    let n = per_prime[0].1.rows;
    for (p, m) in per_prime {
        if m.rows != n || m.cols != n {
            return Err(CorrespondenceError::BadInput(format!(
                "matrix at p={p} has a different shape"
            )));
        }
    }
    let nodes: Vec<&(u64, QMat)> = per_prime
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != vpos)
        .map(|(_, pm)| pm)
        .collect();
    let validation = &per_prime[vpos].1;

    let mut entries = vec![vec![PolyQ::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let points: Vec<(u64, Q)> =
                nodes.iter().map(|(p, m)| (*p, m.at(i, j).clone())).collect();
            let poly = PolyQ::interpolate(&points).map_err(|detail| {
                CorrespondenceError::BadFit {
                    row: i,
                    col: j,
                    detail,
                }
            })?;
            let degree = poly.degree().unwrap_or(0);
            if degree > degree_bound {
                return Err(CorrespondenceError::DegreeExceeded {
                    row: i,
                    col: j,
                    degree,
                    bound: degree_bound,
                });
            }
            let got = poly.eval_q(validation_prime);
            if &got != validation.at(i, j) {
                return Err(CorrespondenceError::ValidationFailed {
                    row: i,
                    col: j,
                    prime: validation_prime,
                    expected: fmt_q(validation.at(i, j)),
                    got: fmt_q(&got),
                });
            }
            entries[i][j] = poly;
        }
    }
    Ok(GenusMatrix {
        labels,
        entries,
        degree_bound,
        primes: nodes.iter().map(|(p, _)| *p).collect(),
        validation_prime,
    })
}

fn poly_eval_big(monic_tail: &[Q], x: &BigRational) -> BigRational {
    // x^m - sum_j tail[j] x^j, the minimal polynomial of the cyclic span
    let m = monic_tail.len();
    let mut acc = BigRational::one();
    let mut powers = Vec::with_capacity(m);
    for _ in 0..m {
        powers.push(acc.clone());
        acc *= x;
    }
    let mut v = acc; // x^m
    for (j, c) in monic_tail.iter().enumerate() {
        v -= c * &powers[j];
    }
    v
}

/// Expand prod (x - roots[i]) into coefficients by ascending degree
/// (monic, so the returned vector has length roots.len() + 1).
fn expand_roots(roots: &[BigInt]) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for r in roots {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        coeffs = next;
    }
    coeffs
}

/// Eigen-analysis of the genus operator on the cyclic span of the unit,
/// and the dimension census it encodes: eigenvalues are (|G|/d)^2, and the
/// projection of the unit onto each eigenspace has value N_d d^2/|G| at
/// the identity.
pub fn eigen_census(
    alg: &ClassAlgebra,
) -> Result<(DimensionCensus, EigenReport), CorrespondenceError> {
    let n = alg.group.order() as u64;
    let k = alg.k();

    let mut krylov = vec![alg.unit()];
    let tail: Vec<Q> = loop {
        let next = alg.genus_operator(krylov.last().unwrap())?;
        let basis: Vec<Vec<Q>> = krylov.iter().map(|c| c.values.clone()).collect();
        if let Some(coords) = express_in_span(&basis, &next.values) {
            break coords;
        }
        krylov.push(next);
        assert!(krylov.len() <= k, "cyclic span cannot exceed the class count");
    };
    let m = krylov.len();

    let mut roots: Vec<(u64, BigInt)> = Vec::new();
    for d in 1..=n {
        if d * d > n {
            break;
        }
        if n % d != 0 {
            continue;
        }
        let lam = BigInt::from(n / d) * BigInt::from(n / d);
        if poly_eval_big(&tail, &BigRational::from_integer(lam.clone())).is_zero() {
            roots.push((d, lam));
        }
    }
    if roots.len() != m {
        return Err(CorrespondenceError::NotDiagonalizable(format!(
            "cyclic span has dimension {m} but {} admissible eigenvalues",
            roots.len()
        )));
    }
    let lambdas: Vec<BigInt> = roots.iter().map(|(_, l)| l.clone()).collect();
    let product = expand_roots(&lambdas);
    for (j, tail_j) in tail.iter().enumerate() {
        if tail_j != &BigRational::from_integer(-product[j].clone()) {
            return Err(CorrespondenceError::NotDiagonalizable(
                "minimal polynomial does not split into distinct admissible roots".into(),
            ));
        }
    }

    let mut dimensions = Vec::with_capacity(m);
    let mut eigenvalues = Vec::with_capacity(m);
    let mut projections = Vec::with_capacity(m);
    let mut entries = Vec::with_capacity(m);
    for (i, (d, lam)) in roots.iter().enumerate() {
        let others: Vec<BigInt> = lambdas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, l)| l.clone())
            .collect();
        let num = expand_roots(&others);
        let mut denom = BigInt::one();
        for l in &others {
            denom *= lam - l;
        }
        let mut v = ClassFunction::zero(alg.group.clone());
        for (t, c) in num.iter().enumerate() {
            let coeff = BigRational::new(c.clone(), denom.clone());
            v = v.add(&krylov[t].scale(&coeff));
        }
        let count = &v.values[0] * BigRational::new(BigInt::from(n), BigInt::from(d * d));
        if !count.is_integer() || count.is_negative() {
            return Err(CorrespondenceError::NonIntegerMultiplicity {
                dim: *d,
                value: fmt_q(&count),
            });
        }
        let count: u64 = count
            .to_integer()
            .try_into()
            .map_err(|_| CorrespondenceError::NonIntegerMultiplicity {
                dim: *d,
                value: fmt_q(&count),
            })?;
        dimensions.push(*d);
        eigenvalues.push(lam.clone());
        projections.push(v);
        entries.push((*d, count));
    }

    Ok((
        DimensionCensus {
            entries,
            group_order: n,
        },
        EigenReport {
            dimensions,
            eigenvalues,
            projections,
        },
    ))
}

/// |G|^{2g-1} sum_d N_d d^{2-2g}; an integer for g >= 1, a rational in
/// general.
pub fn census_count(census: &DimensionCensus, genus: u32) -> Q {
    let g = genus as i32;
    let order = q_int(census.group_order as i64);
    let mut total = Q::zero();
    for &(d, n_d) in &census.entries {
        total += q_int(n_d as i64) * q_int(d as i64).pow(2 - 2 * g);
    }
    order.pow(2 * g - 1) * total
}

/// Outcome of checking one polynomial combination of generators against
/// the genus operator at a single prime.
#[derive(Clone, Debug)]
pub struct LiftReport {
    pub prime: u64,
    pub eigenvalue: Q,
    pub vector: ClassFunction,
    /// dimension d with eigenvalue (|G|/d)^2
    pub census_dimension: u64,
    /// lift = scalar * (projection of the unit onto this eigenspace), when
    /// the two are collinear
    pub census_scalar: Option<Q>,
    /// lift = ratio * (sum of the dimension-d irreducible characters)
    pub character_sum_ratio: Option<Q>,
}

/// Integrate a polynomial combination of generators at the algebra's prime
/// and check it is an exact eigenvector of the genus operator with the
/// stated polynomial eigenvalue; report how it sits against the census
/// projections.
pub fn verify_lift(
    alg: &ClassAlgebra,
    terms: &[(PolyQ, &GeneratorSpec)],
    lambda: &PolyQ,
) -> Result<LiftReport, CorrespondenceError> {
    let group = alg.group.clone();
    let p = group.p;
    let mut v = ClassFunction::zero(group.clone());
    for (coeff, gen) in terms {
        let part = integrate_generator(gen, &group)?;
        v = v.add(&part.scale(&coeff.eval_q(p)));
    }
    if v.is_zero() {
        return Err(CorrespondenceError::NotEigenvector(
            "the lift integrates to zero".into(),
        ));
    }
    let lam = lambda.eval_q(p);
    let image = alg.genus_operator(&v)?;
    let expected = v.scale(&lam);
    if image != expected {
        let residual = image.sub(&expected);
        let worst = residual
            .values
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_zero())
            .map(|(c, x)| format!("class {c}: residual {}", fmt_q(x)))
            .unwrap_or_default();
        return Err(CorrespondenceError::NotEigenvector(format!(
            "image differs from {} * lift ({worst})",
            fmt_q(&lam)
        )));
    }

    let (_, report) = eigen_census(alg)?;
    let idx = report
        .eigenvalues
        .iter()
        .position(|l| BigRational::from_integer(l.clone()) == lam)
        .ok_or_else(|| {
            CorrespondenceError::NotEigenvector(format!(
                "eigenvalue {} is not in the spectrum of the cyclic span",
                fmt_q(&lam)
            ))
        })?;
    let d = report.dimensions[idx];
    let proj = &report.projections[idx];
    let census_scalar = proj
        .values
        .iter()
        .position(|x| !x.is_zero())
        .map(|j| &v.values[j] / &proj.values[j])
        .filter(|s| proj.scale(s) == v);
    let character_sum_ratio = census_scalar.as_ref().map(|s| {
        s * BigRational::new(BigInt::from(d), BigInt::from(group.order()))
    });
    Ok(LiftReport {
        prime: p,
        eigenvalue: lam,
        vector: v,
        census_dimension: d,
        census_scalar,
        character_sum_ratio,
    })
}

/// Group, algebra, and integrated default basis of a built-in family at
/// one prime.
pub fn family_basis_at_prime(
    fam: &BuiltinFamily,
    p: u64,
) -> Result<(Arc<crate::group::FiniteGroup>, ClassAlgebra, Vec<ClassFunction>), CorrespondenceError>
{
    let group = Arc::new(fam.instantiate(p)?);
    let alg = ClassAlgebra::new(group.clone())?;
    let mut basis = Vec::new();
    for gen in fam.basis_generators() {
        basis.push(integrate_generator(gen, &group)?);
    }
    Ok((group, alg, basis))
}

pub fn family_matrix_at_prime(fam: &BuiltinFamily, p: u64) -> Result<QMat, CorrespondenceError> {
    let (_, alg, basis) = family_basis_at_prime(fam, p)?;
    genus_matrix_at_prime(&alg, &basis)
}

/// Per-prime matrices over the family's default basis, interpolated with
/// one prime held out. `primes` lists the nodes; the validation prime is
/// appended if absent.
pub fn family_matrix(
    fam: &BuiltinFamily,
    primes: &[u64],
    validation_prime: u64,
    degree_bound: usize,
) -> Result<GenusMatrix, CorrespondenceError> {
    let mut all: Vec<u64> = primes.to_vec();
    if !all.contains(&validation_prime) {
        all.push(validation_prime);
    }
    let mut per_prime = Vec::with_capacity(all.len());
    for &p in &all {
        per_prime.push((p, family_matrix_at_prime(fam, p)?));
    }
    interpolate(
        &per_prime,
        fam.matrix_basis.clone(),
        degree_bound,
        validation_prime,
    )
}
