//! Constructible generators over the built-in group families: affine
//! varieties with a polynomial map into the group, integrated to class
//! functions by counting fibers over each element.

use crate::classfun::ClassFunction;
use crate::fp::FpMatrix;
use crate::group::{Constraint, FamilySpec, FiniteGroup, GroupError};
use crate::linalg::Q;
use crate::poly::{MPoly, PolyQ};
use num::{BigRational, Zero};
use serde_json::Value;
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SchemeError {
    #[error("generator {0}: map image at point {1:?} is not in the group")]
    MapNotInGroup(String, Vec<u64>),
    #[error("generator {0}: fiber counts differ within class {1} ({2} vs {3})")]
    NotClassInvariant(String, usize, i64, i64),
    #[error("family {0} is only defined at odd primes")]
    OddPrimesOnly(String),
    #[error("generator {0}: domain has {1} points, over the cap {2}")]
    DomainTooLarge(String, u64, u64),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub const MAX_DOMAIN_POINTS: u64 = 10_000_000;

/// An affine variety (coordinates, equality and inequality constraints)
/// with a polynomial map into a matrix-group family, plus a polynomial
/// scalar applied after counting.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub name: String,
    pub description: String,
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub dim: usize,
    pub map: Vec<MPoly>, // dim*dim, row-major
    pub coefficient: PolyQ,
}

fn parse_constraints(v: Option<&Value>, vars: &[String]) -> Result<Vec<Constraint>, SchemeError> {
    let bad = |m: &str| SchemeError::BadSpec(m.to_string());
    let mut out = Vec::new();
    let Some(list) = v else { return Ok(out) };
    let arr = list.as_array().ok_or_else(|| bad("constraints must be a list"))?;
    for c in arr {
        let poly = c
            .get("poly")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("constraint missing \"poly\""))?;
        let rel = c
            .get("rel")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("constraint missing \"rel\""))?;
        let is_eq = match rel {
            "eq" => true,
            "neq" => false,
            other => return Err(bad(&format!("unknown rel {other:?}"))),
        };
        let poly = MPoly::parse(poly, vars).map_err(|e| bad(&e))?;
        out.push(Constraint { poly, is_eq });
    }
    Ok(out)
}

impl GeneratorSpec {
    /// {"name", "coords": m or [names], "constraints": [...], "map": [[...]],
    /// "coefficient": "q^2-q"}; the group dimension comes from the family.
    pub fn from_json(v: &Value, dim: usize) -> Result<GeneratorSpec, SchemeError> {
        let bad = |m: String| SchemeError::BadSpec(m);
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("generator missing \"name\"".into()))?
            .to_string();
        let description = v
            .get("description")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        let vars: Vec<String> = match v.get("coords") {
            None => Vec::new(),
            Some(Value::Number(n)) => {
                let m = n
                    .as_u64()
                    .ok_or_else(|| bad("\"coords\" count must be a nonnegative integer".into()))?;
                (1..=m).map(|i| format!("x{i}")).collect()
            }
            Some(Value::Array(names)) => names
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| bad("coordinate names must be strings".into()))
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(bad("\"coords\" must be a count or a list of names".into())),
        };
        let constraints = parse_constraints(v.get("constraints"), &vars)?;
        let rows = v
            .get("map")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("generator missing \"map\"".into()))?;
        if rows.len() != dim {
            return Err(bad(format!("map must have {dim} rows")));
        }
        let mut map = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_array().ok_or_else(|| bad("map rows must be lists".into()))?;
            if row.len() != dim {
                return Err(bad(format!("map rows must have {dim} entries")));
            }
            for cell in row {
                let poly = match cell {
                    Value::Number(n) => MPoly::constant(
                        vars.len(),
                        n.as_i64().ok_or_else(|| bad("map entries must be integers".into()))?,
                    ),
                    Value::String(s) => {
                        MPoly::parse(s, &vars).map_err(|e| bad(format!("map entry: {e}")))?
                    }
                    _ => return Err(bad("map entries must be integers or polynomials".into())),
                };
                map.push(poly);
            }
        }
        let coefficient = match v.get("coefficient") {
            None => PolyQ::from_coeffs(&[1]),
            Some(Value::String(s)) => {
                PolyQ::parse(s).map_err(|e| bad(format!("coefficient: {e}")))?
            }
            Some(Value::Number(n)) => PolyQ::from_coeffs(&[n
                .as_i64()
                .ok_or_else(|| bad("coefficient must be an integer or polynomial".into()))?]),
            Some(_) => return Err(bad("coefficient must be an integer or polynomial".into())),
        };
        Ok(GeneratorSpec {
            name,
            description,
            vars,
            constraints,
            dim,
            map,
            coefficient,
        })
    }
}

/// Count, for each element of the group, the points of the generator's
/// domain mapping to it; validate constancy on conjugacy classes; scale by
/// the coefficient evaluated at p. The result is the generator's class
/// function.
pub fn integrate_generator(
    spec: &GeneratorSpec,
    group: &Arc<FiniteGroup>,
) -> Result<ClassFunction, SchemeError> {
    let raw = raw_fiber_counts(spec, group)?;
    let c = spec.coefficient.eval_q(group.p);
    let values = raw
        .iter()
        .map(|&v| BigRational::from_integer(v.into()) * &c)
        .collect();
    Ok(ClassFunction::from_values(group.clone(), values))
}

/// Per-class fiber counts before the coefficient is applied.
pub fn raw_fiber_counts(
    spec: &GeneratorSpec,
    group: &Arc<FiniteGroup>,
) -> Result<Vec<i64>, SchemeError> {
    if spec.dim != group.dim {
        return Err(SchemeError::BadSpec(format!(
            "generator {} is {}x{} but the group is {}x{}",
            spec.name, spec.dim, spec.dim, group.dim, group.dim
        )));
    }
    let f = crate::fp::Fp::new(group.p);
    let m = spec.vars.len();
    let total = (0..m).try_fold(1u64, |acc, _| {
        let next = acc.saturating_mul(group.p);
        if next > MAX_DOMAIN_POINTS {
            None
        } else {
            Some(next)
        }
    })
    .ok_or_else(|| {
        SchemeError::DomainTooLarge(spec.name.clone(), u64::MAX, MAX_DOMAIN_POINTS)
    })?;

    let mut by_element = vec![0i64; group.order()];
    let mut point = vec![0u64; m];
    'points: for idx in 0..total {
        let mut rem = idx;
        for slot in point.iter_mut() {
            *slot = rem % group.p;
            rem /= group.p;
        }
        for c in &spec.constraints {
            let v = c.poly.eval_mod(f, &point);
            if c.is_eq != (v == 0) {
                continue 'points;
            }
        }
        let entries: Vec<u64> = spec.map.iter().map(|poly| poly.eval_mod(f, &point)).collect();
        let image = FpMatrix {
            n: spec.dim,
            entries,
        };
        match group.index_of(&image) {
            Some(i) => by_element[i] += 1,
            None => return Err(SchemeError::MapNotInGroup(spec.name.clone(), point.clone())),
        }
    }

    let k = group.k();
    let mut by_class = vec![i64::MIN; k];
    for (elem, &count) in by_element.iter().enumerate() {
        let c = group.class_of(elem);
        if by_class[c] == i64::MIN {
            by_class[c] = count;
        } else if by_class[c] != count {
            return Err(SchemeError::NotClassInvariant(
                spec.name.clone(),
                c,
                by_class[c],
                count,
            ));
        }
    }
    Ok(by_class)
}

/// A built-in family: the group pattern, its named generators, and the
/// generator subset used as the default basis for genus matrices.
#[derive(Clone, Debug)]
pub struct BuiltinFamily {
    pub name: String,
    pub description: String,
    pub family: FamilySpec,
    pub generators: Vec<GeneratorSpec>,
    pub matrix_basis: Vec<String>,
    pub odd_primes_only: bool,
}

impl BuiltinFamily {
    pub fn instantiate(&self, p: u64) -> Result<FiniteGroup, SchemeError> {
        if self.odd_primes_only && p == 2 {
            return Err(SchemeError::OddPrimesOnly(self.name.clone()));
        }
        Ok(self.family.instantiate(p)?)
    }

    pub fn generator(&self, name: &str) -> Option<&GeneratorSpec> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn basis_generators(&self) -> Vec<&GeneratorSpec> {
        self.matrix_basis
            .iter()
            .map(|n| self.generator(n).expect("basis names are catalog names"))
            .collect()
    }

    /// Default interpolation degree bound: twice the number of free
    /// coordinates in the pattern, plus two.
    pub fn default_degree_bound(&self) -> usize {
        2 * self.family.vars.len() + 2
    }
}

fn family(json: &str) -> FamilySpec {
    FamilySpec::from_json_str(json).expect("builtin family json")
}

fn generator(json: &str, dim: usize) -> GeneratorSpec {
    let v: Value = serde_json::from_str(json).expect("builtin generator json");
    GeneratorSpec::from_json(&v, dim).expect("builtin generator spec")
}

pub fn list_builtins() -> Vec<BuiltinFamily> {
    vec![agl1(), u3(), u4(), gm_z2()]
}

pub fn builtin(name: &str) -> Option<BuiltinFamily> {
    list_builtins().into_iter().find(|f| f.name.eq_ignore_ascii_case(name))
}

fn agl1() -> BuiltinFamily {
    BuiltinFamily {
        name: "AGL1".into(),
        description: "affine maps x -> ax + b of the line, a nonzero; order p(p-1)".into(),
        family: family(
            r#"{
                "name": "AGL1",
                "dim": 2,
                "pattern": [["a", "b"], [0, 1]],
                "constraints": [{"poly": "a", "rel": "neq"}]
            }"#,
        ),
        generators: vec![
            generator(
                r#"{
                    "name": "identity",
                    "description": "the identity point",
                    "map": [[1, 0], [0, 1]]
                }"#,
                2,
            ),
            generator(
                r#"{
                    "name": "translations",
                    "description": "the nonzero translations {a = 1, b != 0}",
                    "coords": ["b"],
                    "constraints": [{"poly": "b", "rel": "neq"}],
                    "map": [[1, "b"], [0, 1]]
                }"#,
                2,
            ),
        ],
        matrix_basis: vec!["identity".into(), "translations".into()],
        odd_primes_only: false,
    }
}

fn u3() -> BuiltinFamily {
    BuiltinFamily {
        name: "U3".into(),
        description: "upper unitriangular 3x3 matrices (Heisenberg group); order p^3".into(),
        family: family(
            r#"{
                "name": "U3",
                "dim": 3,
                "pattern": [[1, "x", "y"], [0, 1, "z"], [0, 0, 1]]
            }"#,
        ),
        generators: vec![
            generator(
                r#"{
                    "name": "identity",
                    "description": "the identity point",
                    "map": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
                }"#,
                3,
            ),
            generator(
                r#"{
                    "name": "center",
                    "description": "the center {x = z = 0}, one line of points",
                    "coords": ["y"],
                    "map": [[1, 0, "y"], [0, 1, 0], [0, 0, 1]]
                }"#,
                3,
            ),
            generator(
                r#"{
                    "name": "center-punctured",
                    "description": "the nonidentity central elements {x = z = 0, y != 0}",
                    "coords": ["y"],
                    "constraints": [{"poly": "y", "rel": "neq"}],
                    "map": [[1, 0, "y"], [0, 1, 0], [0, 0, 1]]
                }"#,
                3,
            ),
        ],
        matrix_basis: vec!["identity".into(), "center-punctured".into()],
        odd_primes_only: false,
    }
}

fn u4() -> BuiltinFamily {
    BuiltinFamily {
        name: "U4".into(),
        description: "upper unitriangular 4x4 matrices; order p^6".into(),
        family: family(
            r#"{
                "name": "U4",
                "dim": 4,
                "pattern": [[1, "a", "b", "c"], [0, 1, "d", "e"], [0, 0, 1, "f"], [0, 0, 0, 1]]
            }"#,
        ),
        generators: vec![
            generator(
                r#"{
                    "name": "identity",
                    "description": "the identity point",
                    "map": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                }"#,
                4,
            ),
            generator(
                r#"{
                    "name": "derived-subgroup",
                    "description": "the derived subgroup {a = d = f = 0}",
                    "coords": ["b", "c", "e"],
                    "map": [[1, 0, "b", "c"], [0, 1, 0, "e"], [0, 0, 1, 0], [0, 0, 0, 1]]
                }"#,
                4,
            ),
            generator(
                r#"{
                    "name": "center",
                    "description": "the center {only the corner entry free}",
                    "coords": ["c"],
                    "map": [[1, 0, 0, "c"], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                }"#,
                4,
            ),
            generator(
                r#"{
                    "name": "center-punctured",
                    "description": "the nonidentity central elements",
                    "coords": ["c"],
                    "constraints": [{"poly": "c", "rel": "neq"}],
                    "map": [[1, 0, 0, "c"], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                }"#,
                4,
            ),
        ],
        matrix_basis: vec!["derived-subgroup".into(), "center".into(), "identity".into()],
        odd_primes_only: false,
    }
}

fn gm_z2() -> BuiltinFamily {
    BuiltinFamily {
        name: "GmZ2".into(),
        description: "monomial 2x2 matrices diag(t, 1/t) and antidiag(s, 1/s): \
                      the torus extended by inversion; order 2(p-1); odd p"
            .into(),
        family: family(
            r#"{
                "name": "GmZ2",
                "dim": 2,
                "pattern": [["w", "x"], ["y", "z"]],
                "constraints": [
                    {"poly": "w*x", "rel": "eq"},
                    {"poly": "w*y", "rel": "eq"},
                    {"poly": "x*z", "rel": "eq"},
                    {"poly": "y*z", "rel": "eq"},
                    {"poly": "w*z+x*y-1", "rel": "eq"}
                ]
            }"#,
        ),
        generators: vec![
            generator(
                r#"{
                    "name": "identity",
                    "description": "the identity point",
                    "map": [[1, 0], [0, 1]]
                }"#,
                2,
            ),
            generator(
                r#"{
                    "name": "square-cover",
                    "description": "the torus mapping onto the square subtorus, t -> diag(t^2, 1/t^2); a double cover of its image",
                    "coords": ["t", "s"],
                    "constraints": [{"poly": "t*s-1", "rel": "eq"}],
                    "map": [["t^2", 0], [0, "s^2"]]
                }"#,
                2,
            ),
        ],
        matrix_basis: vec!["identity".into(), "square-cover".into()],
        odd_primes_only: true,
    }
}

/// Class function with value 1 on exactly the classes where `raw` is
/// nonzero; handy for tests.
pub fn support_indicator(group: &Arc<FiniteGroup>, raw: &[i64]) -> ClassFunction {
    let values = raw
        .iter()
        .map(|&v| if v != 0 { Q::from_integer(1.into()) } else { Q::zero() })
        .collect();
    ClassFunction::from_values(group.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q_int;

    fn group_of(fam: &BuiltinFamily, p: u64) -> Arc<FiniteGroup> {
        Arc::new(fam.instantiate(p).unwrap())
    }

    #[test]
    fn catalog_shape() {
        let names: Vec<String> = list_builtins().into_iter().map(|f| f.name).collect();
        assert_eq!(names, ["AGL1", "U3", "U4", "GmZ2"]);
        let u4 = builtin("u4").unwrap();
        assert_eq!(u4.family.vars, ["a", "b", "c", "d", "e", "f"]);
        assert!(builtin("GmZ2").unwrap().odd_primes_only);
        assert!(matches!(
            builtin("GmZ2").unwrap().instantiate(2),
            Err(SchemeError::OddPrimesOnly(_))
        ));
        assert!(builtin("nope").is_none());
        for fam in list_builtins() {
            for g in &fam.generators {
                assert!(!g.description.is_empty());
            }
            for b in &fam.matrix_basis {
                assert!(fam.generator(b).is_some());
            }
        }
    }

    #[test]
    fn identity_generator_integrates_to_unit_indicator() {
        for (fam, p) in [(agl1(), 5), (u3(), 3), (gm_z2(), 7)] {
            let group = group_of(&fam, p);
            let v = integrate_generator(fam.generator("identity").unwrap(), &group).unwrap();
            for c in 0..group.k() {
                let expect = if c == 0 { q_int(1) } else { q_int(0) };
                assert_eq!(v.values[c], expect);
            }
        }
    }

    #[test]
    fn translations_form_one_class_for_small_odd_primes() {
        let fam = agl1();
        for p in [3u64, 5, 7, 11, 13] {
            let group = group_of(&fam, p);
            let raw = raw_fiber_counts(fam.generator("translations").unwrap(), &group).unwrap();
            let support: Vec<usize> = (0..group.k()).filter(|&c| raw[c] != 0).collect();
            assert_eq!(support.len(), 1, "p = {p}");
            let c = support[0];
            assert_eq!(raw[c], 1);
            assert_eq!(group.classes.sizes[c], p - 1);
        }
    }

    #[test]
    fn heisenberg_center_is_central_points() {
        let fam = u3();
        let group = group_of(&fam, 3);
        let raw = raw_fiber_counts(fam.generator("center").unwrap(), &group).unwrap();
        let support: Vec<usize> = (0..group.k()).filter(|&c| raw[c] != 0).collect();
        assert_eq!(support.len(), 3); // p central points, each its own class
        for &c in &support {
            assert_eq!(group.classes.sizes[c], 1);
            assert_eq!(raw[c], 1);
        }
        let punct =
            raw_fiber_counts(fam.generator("center-punctured").unwrap(), &group).unwrap();
        assert_eq!(punct[0], 0);
        let psupport: Vec<usize> = (0..group.k()).filter(|&c| punct[c] != 0).collect();
        assert_eq!(psupport.len(), 2);
    }

    #[test]
    fn square_cover_counts_two_per_square() {
        let fam = gm_z2();
        let group = group_of(&fam, 5);
        // the doubled cover with coefficient 2, as a standalone spec
        let spec = generator(
            r#"{
                "name": "doubled-square-cover",
                "coords": ["t", "s"],
                "constraints": [{"poly": "t*s-1", "rel": "eq"}],
                "map": [["t^2", 0], [0, "s^2"]],
                "coefficient": 2
            }"#,
            2,
        );
        let v = integrate_generator(&spec, &group).unwrap();
        let class_of = |entries: [u64; 4]| {
            group.class_of(group.index_of(&FpMatrix { n: 2, entries: entries.to_vec() }).unwrap())
        };
        assert_eq!(v.values[0], q_int(4)); // identity is a square
        assert_eq!(v.values[class_of([4, 0, 0, 4])], q_int(4)); // -1 = 2^2
        assert_eq!(v.values[class_of([2, 0, 0, 3])], q_int(0)); // nonsquare torus
        assert_eq!(v.values[class_of([0, 1, 1, 0])], q_int(0)); // reflections
    }

    #[test]
    fn derived_subgroup_of_u4() {
        let fam = u4();
        let group = group_of(&fam, 2);
        assert_eq!(group.order(), 64);
        let raw = raw_fiber_counts(fam.generator("derived-subgroup").unwrap(), &group).unwrap();
        let total: i64 = (0..group.k())
            .map(|c| raw[c] * group.classes.sizes[c] as i64)
            .sum();
        assert_eq!(total, 8); // q^3 points
        assert_eq!(raw[0], 1);
    }

    #[test]
    fn map_outside_group_is_rejected() {
        let fam = agl1();
        let group = group_of(&fam, 5);
        let spec = generator(
            r#"{
                "name": "degenerate",
                "coords": ["b"],
                "map": [["b", 0], [0, 1]]
            }"#,
            2,
        );
        assert!(matches!(
            integrate_generator(&spec, &group),
            Err(SchemeError::MapNotInGroup(_, _))
        ));
    }

    #[test]
    fn non_invariant_subset_is_rejected() {
        let fam = agl1();
        let group = group_of(&fam, 5);
        // the diagonal torus {b = 0} meets each class {a = a0 != 1} in one
        // point out of p, so its fiber counts are not class functions
        let spec = generator(
            r#"{
                "name": "torus",
                "coords": ["a"],
                "constraints": [{"poly": "a", "rel": "neq"}],
                "map": [["a", 0], [0, 1]]
            }"#,
            2,
        );
        assert!(matches!(
            integrate_generator(&spec, &group),
            Err(SchemeError::NotClassInvariant(..))
        ));
    }

    #[test]
    fn coords_count_and_coefficient_forms() {
        let v: Value = serde_json::from_str(
            r#"{
                "name": "g",
                "coords": 1,
                "map": [[1, "x1"], [0, 1]],
                "coefficient": "q-1"
            }"#,
        )
        .unwrap();
        let spec = GeneratorSpec::from_json(&v, 2).unwrap();
        assert_eq!(spec.vars, ["x1"]);
        assert_eq!(spec.coefficient, PolyQ::from_coeffs(&[-1, 1]));
        let fam = agl1();
        let group = group_of(&fam, 5);
        let v = integrate_generator(&spec, &group).unwrap();
        // all translations (b unrestricted), scaled by p-1 = 4
        assert_eq!(v.values[0], q_int(4));
    }
}
