//! Named check suites behind `charq verify`.

use std::sync::Arc;

use charq_core::classfun::ClassAlgebra;
use charq_core::correspondence::{eigen_census, family_matrix, verify_lift};
use charq_core::fp::Fp;
use charq_core::group::{FamilySpec, FiniteGroup};
use charq_core::linalg::{fmt_q, q_int, q_ratio};
use charq_core::poly::PolyQ;
use charq_core::schemes::{builtin, integrate_generator, BuiltinFamily};
use charq_core::spancheck::{beck_chevalley_suite, quantized_operation_suite, CheckOutcome};

fn check(name: String, f: impl FnOnce() -> Result<String, String>) -> CheckOutcome {
    match f() {
        Ok(detail) => CheckOutcome {
            name,
            pass: true,
            detail,
        },
        Err(detail) => CheckOutcome {
            name,
            pass: false,
            detail,
        },
    }
}

fn catalog(name: &str) -> BuiltinFamily {
    builtin(name).expect("catalog name")
}

fn group_at(name: &str, p: u64) -> Result<Arc<FiniteGroup>, String> {
    catalog(name)
        .instantiate(p)
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

fn algebra_at(name: &str, p: u64) -> Result<ClassAlgebra, String> {
    ClassAlgebra::new(group_at(name, p)?).map_err(|e| e.to_string())
}

fn lift_check(
    alg: &ClassAlgebra,
    fam: &BuiltinFamily,
    terms: &[(&str, PolyQ)],
    lambda: &str,
    dim: u64,
) -> Result<String, String> {
    let spec_terms: Vec<_> = terms
        .iter()
        .map(|(g, c)| (c.clone(), fam.generator(g).expect("generator name")))
        .collect();
    let lam = PolyQ::parse(lambda)?;
    let rep = verify_lift(alg, &spec_terms, &lam).map_err(|e| e.to_string())?;
    if rep.census_dimension != dim {
        return Err(format!(
            "landed on census dimension {}, expected {dim}",
            rep.census_dimension
        ));
    }
    Ok(format!(
        "eigenvalue {} on dimension {dim}",
        fmt_q(&rep.eigenvalue)
    ))
}

/// The reproduction suite: genus matrix, lifts, censuses, and the monomial
/// family's integrated table rows.
pub fn tables() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(check("affine genus matrix".into(), || {
        let fam = catalog("AGL1");
        let gm = family_matrix(&fam, &[3, 5, 7, 11, 17], 13, 4).map_err(|e| e.to_string())?;
        let want = [
            ["q^3-q^2", "q^4-3*q^3+2*q^2"],
            ["q^3-2*q^2", "q^4-3*q^3+3*q^2"],
        ];
        for r in 0..2 {
            for c in 0..2 {
                let expect = PolyQ::parse(want[r][c]).unwrap();
                if gm.entries[r][c] != expect {
                    return Err(format!(
                        "entry ({r},{c}) is {}, expected {expect}",
                        gm.entries[r][c]
                    ));
                }
            }
        }
        Ok("matches the closed form, validated at 13".into())
    }));

    for p in [3u64, 5, 7, 11, 13] {
        out.push(check(format!("affine lifts p={p}"), || {
            let fam = catalog("AGL1");
            let alg = algebra_at("AGL1", p)?;
            lift_check(
                &alg,
                &fam,
                &[
                    ("identity", PolyQ::parse("q-1").unwrap()),
                    ("translations", PolyQ::parse("q-1").unwrap()),
                ],
                "q^4-2*q^3+q^2",
                1,
            )?;
            lift_check(
                &alg,
                &fam,
                &[
                    ("identity", PolyQ::parse("q-1").unwrap()),
                    ("translations", PolyQ::from_coeffs(&[-1])),
                ],
                "q^2",
                p - 1,
            )
        }));
        out.push(check(format!("affine census p={p}"), || {
            let alg = algebra_at("AGL1", p)?;
            let (census, _) = eigen_census(&alg).map_err(|e| e.to_string())?;
            if census.entries != vec![(1, p - 1), (p - 1, 1)] {
                return Err(format!("got {:?}", census.entries));
            }
            Ok(format!("{{(1, {}), ({}, 1)}}", p - 1, p - 1))
        }));
    }

    for p in [2u64, 3, 5] {
        out.push(check(format!("heisenberg lifts p={p}"), || {
            let fam = catalog("U3");
            let alg = algebra_at("U3", p)?;
            let first = verify_lift(
                &alg,
                &[(
                    PolyQ::parse("q").unwrap(),
                    fam.generator("center").unwrap(),
                )],
                &PolyQ::parse("q^6").unwrap(),
            )
            .map_err(|e| e.to_string())?;
            if first.census_dimension != 1 {
                return Err(format!(
                    "first lift landed on dimension {}",
                    first.census_dimension
                ));
            }
            let ratio = first.character_sum_ratio.ok_or("lift is not collinear")?;
            if ratio != q_ratio(1, p as i64) {
                return Err(format!("character-sum ratio {}", fmt_q(&ratio)));
            }
            lift_check(
                &alg,
                &fam,
                &[
                    ("identity", PolyQ::parse("q^2-q").unwrap()),
                    ("center-punctured", PolyQ::from_coeffs(&[0, -1])),
                ],
                "q^4",
                p,
            )?;
            Ok(format!("eigenvalues q^6 and q^4; raw character sum off by {p}"))
        }));
    }

    for p in [2u64, 3] {
        out.push(check(format!("rank-4 unitriangular lifts p={p}"), || {
            let fam = catalog("U4");
            let alg = algebra_at("U4", p)?;
            lift_check(
                &alg,
                &fam,
                &[("derived-subgroup", PolyQ::parse("q^2").unwrap())],
                "q^12",
                1,
            )?;
            lift_check(
                &alg,
                &fam,
                &[
                    ("center", PolyQ::parse("q^4").unwrap()),
                    ("derived-subgroup", PolyQ::from_coeffs(&[0, 0, -1])),
                ],
                "q^10",
                p,
            )?;
            lift_check(
                &alg,
                &fam,
                &[
                    ("identity", PolyQ::parse("q^4-q^3").unwrap()),
                    ("center-punctured", PolyQ::from_coeffs(&[0, 0, 0, -1])),
                ],
                "q^8",
                p * p,
            )?;
            let (census, _) = eigen_census(&alg).map_err(|e| e.to_string())?;
            if !census.burnside_ok() {
                return Err("census dimensions do not square-sum to the order".into());
            }
            Ok("eigenvalues (|G|/d)^2 for d in {1, p, p^2}".into())
        }));
    }

    for p in [5u64, 7, 13] {
        out.push(check(format!("monomial table rows p={p}"), || {
            let fam = catalog("GmZ2");
            let group = group_at("GmZ2", p)?;
            let x = integrate_generator(fam.generator("square-cover").unwrap(), &group)
                .map_err(|e| e.to_string())?;
            let id = integrate_generator(fam.generator("identity").unwrap(), &group)
                .map_err(|e| e.to_string())?;
            let row1 = x.scale(&q_int(2));
            let row2 = id.scale(&q_int(p as i64 - 1)).sub(&x);
            let f = Fp::new(p);
            for c in 0..group.k() {
                let rep = group.element(group.classes.reps[c]);
                let is_torus = rep.entries[1] == 0;
                let is_square =
                    is_torus && (0..p).any(|t| t != 0 && f.mul(t, t) == rep.entries[0]);
                let (w1, w2) = if c == 0 {
                    (q_int(4), q_int(p as i64 - 3))
                } else if is_square {
                    (q_int(4), q_int(-2))
                } else {
                    (q_int(0), q_int(0))
                };
                if row1.values[c] != w1 || row2.values[c] != w2 {
                    return Err(format!(
                        "class {c}: ({}, {}) expected ({}, {})",
                        fmt_q(&row1.values[c]),
                        fmt_q(&row2.values[c]),
                        fmt_q(&w1),
                        fmt_q(&w2)
                    ));
                }
            }
            Ok(format!("rows (4, 4, 0) and ({}, -2, 0)", p - 3))
        }));
    }

    out
}

/// Frobenius axiom checks on five groups up to order 729.
pub fn axioms() -> Vec<CheckOutcome> {
    let picks = [
        ("AGL1", 3u64),
        ("AGL1", 5),
        ("U3", 3),
        ("GmZ2", 7),
        ("U4", 3),
    ];
    picks
        .iter()
        .map(|&(name, p)| {
            check(format!("axioms {name} p={p}"), || {
                let alg = algebra_at(name, p)?;
                let order = alg.group.order();
                let report = alg.axiom_suite();
                for c in &report.checks {
                    if !c.pass {
                        return Err(format!(
                            "{} fails: {}",
                            c.name,
                            c.witness.clone().unwrap_or_default()
                        ));
                    }
                }
                Ok(format!("{} checks on the order-{order} group", report.checks.len()))
            })
        })
        .collect()
}

/// Randomized span composition plus quantized structure maps on all groups
/// of order at most 8.
pub fn spans() -> Vec<CheckOutcome> {
    let mut out = beck_chevalley_suite(0x5EED, 50);
    let small: [(&str, u64); 7] = [
        (r#"{"name": "triv", "dim": 1, "pattern": [[1]]}"#, 5),
        (
            r#"{"name": "mu2", "dim": 1, "pattern": [["a"]], "constraints": [{"poly": "a^2-1", "rel": "eq"}]}"#,
            3,
        ),
        (
            r#"{"name": "mu4", "dim": 1, "pattern": [["a"]], "constraints": [{"poly": "a^4-1", "rel": "eq"}]}"#,
            5,
        ),
        (
            r#"{"name": "agl1", "dim": 2, "pattern": [["a", "b"], [0, 1]], "constraints": [{"poly": "a", "rel": "neq"}]}"#,
            3,
        ),
        (
            r#"{"name": "mu6", "dim": 1, "pattern": [["a"]], "constraints": [{"poly": "a^6-1", "rel": "eq"}]}"#,
            7,
        ),
        (
            r#"{"name": "u3", "dim": 3, "pattern": [[1, "x", "y"], [0, 1, "z"], [0, 0, 1]]}"#,
            2,
        ),
        (
            r#"{"name": "gmz2", "dim": 2, "pattern": [["w", "x"], ["y", "z"]], "constraints": [{"poly": "w*x", "rel": "eq"}, {"poly": "w*y", "rel": "eq"}, {"poly": "x*z", "rel": "eq"}, {"poly": "y*z", "rel": "eq"}, {"poly": "w*z+x*y-1", "rel": "eq"}]}"#,
            5,
        ),
    ];
    for (json, p) in small {
        match FamilySpec::from_json_str(json)
            .map_err(|e| e.to_string())
            .and_then(|s| s.instantiate(p).map_err(|e| e.to_string()))
            .map(Arc::new)
            .and_then(|g| quantized_operation_suite(&g).map_err(|e| e.to_string()))
        {
            Ok(mut checks) => out.append(&mut checks),
            Err(e) => out.push(CheckOutcome {
                name: "quantized operations".into(),
                pass: false,
                detail: e,
            }),
        }
    }
    out
}
