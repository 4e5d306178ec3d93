//! Randomized consistency checks for the groupoid calculus.
//!
//! Everything here is deterministic in an explicit seed so the CLI and the
//! test suite report identical outcomes for identical inputs.

use std::collections::HashMap;
use std::sync::Arc;

use crate::classfun::{AlgebraError, ClassAlgebra, ClassFunction};
use crate::group::FiniteGroup;
use crate::groupoid::{
    fiber_product, pullback, pushforward, quantize_span, FiniteGroupoid, GroupSpans,
    GroupoidFunctor, IsoInvariantFunction, DEFAULT_FIBER_CAP,
};
use crate::linalg::{fmt_q, q_int, q_ratio, QMat};

/// One named check with its outcome.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Splitmix64 step; enough randomness for picking small shapes, and stable
/// across platforms.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

struct Component {
    objects: usize,
    m: usize,
    obj_offset: usize,
    mor_offset: usize,
}

impl Component {
    fn mor(&self, x: usize, y: usize, a: usize) -> usize {
        self.mor_offset + (x * self.objects + y) * self.m + a
    }
}

/// A disjoint union of connected groupoids, each with a chosen trivialization:
/// component c has `objects` pairwise isomorphic objects, every automorphism
/// group is Z/m, and the morphism x -> y with label a has a fixed index.
pub struct TrivializedGroupoid {
    pub groupoid: Arc<FiniteGroupoid>,
    comps: Vec<Component>,
}

pub fn trivialized_groupoid(shape: &[(usize, usize)]) -> TrivializedGroupoid {
    let mut comps = Vec::new();
    let (mut obj_offset, mut mor_offset) = (0, 0);
    for &(objects, m) in shape {
        comps.push(Component {
            objects,
            m,
            obj_offset,
            mor_offset,
        });
        obj_offset += objects;
        mor_offset += objects * objects * m;
    }
    let n_objects = obj_offset;
    let mut src = Vec::with_capacity(mor_offset);
    let mut tgt = Vec::with_capacity(mor_offset);
    let mut inverse = Vec::with_capacity(mor_offset);
    let mut identities = vec![0; n_objects];
    let mut compose = HashMap::new();
    for comp in &comps {
        for x in 0..comp.objects {
            identities[comp.obj_offset + x] = comp.mor(x, x, 0);
            for y in 0..comp.objects {
                for a in 0..comp.m {
                    src.push(comp.obj_offset + x);
                    tgt.push(comp.obj_offset + y);
                    inverse.push(comp.mor(y, x, (comp.m - a) % comp.m));
                }
            }
        }
        for x in 0..comp.objects {
            for y in 0..comp.objects {
                for z in 0..comp.objects {
                    for a in 0..comp.m {
                        for b in 0..comp.m {
                            compose.insert(
                                (comp.mor(y, z, b), comp.mor(x, y, a)),
                                comp.mor(x, z, (a + b) % comp.m),
                            );
                        }
                    }
                }
            }
        }
    }
    let groupoid = Arc::new(
        FiniteGroupoid::new(n_objects, src, tgt, identities, inverse, compose)
            .expect("labelled components satisfy the groupoid axioms"),
    );
    TrivializedGroupoid { groupoid, comps }
}

fn random_shape(rng: &mut SplitMix64) -> Vec<(usize, usize)> {
    (0..1 + rng.below(2))
        .map(|_| (1 + rng.below(3), 1 + rng.below(4)))
        .collect()
}

/// A uniformly chosen functor between trivialized groupoids: each component
/// lands in one target component, its loops through a homomorphism
/// Z/m -> Z/m', conjugated by an arbitrary twist at every object.
pub fn random_functor(
    rng: &mut SplitMix64,
    dom: &TrivializedGroupoid,
    cod: &TrivializedGroupoid,
) -> GroupoidFunctor {
    let mut obj_map = vec![0; dom.groupoid.n_objects];
    let mut mor_map = vec![0; dom.groupoid.n_morphisms()];
    for comp in &dom.comps {
        let target = &cod.comps[rng.below(cod.comps.len())];
        let g = num::integer::gcd(comp.m, target.m);
        let t = (target.m / g) * rng.below(g);
        let images: Vec<usize> = (0..comp.objects)
            .map(|_| rng.below(target.objects))
            .collect();
        let twists: Vec<usize> = (0..comp.objects).map(|_| rng.below(target.m)).collect();
        for x in 0..comp.objects {
            obj_map[comp.obj_offset + x] = target.obj_offset + images[x];
            for y in 0..comp.objects {
                for a in 0..comp.m {
                    let label = (twists[y] + t * a + target.m - twists[x]) % target.m;
                    mor_map[comp.mor(x, y, a)] = target.mor(images[x], images[y], label);
                }
            }
        }
    }
    GroupoidFunctor::new(dom.groupoid.clone(), cod.groupoid.clone(), obj_map, mor_map)
        .expect("componentwise twisted homomorphisms are functorial")
}

fn random_function(rng: &mut SplitMix64, g: &Arc<FiniteGroupoid>) -> IsoInvariantFunction {
    let values = (0..g.n_classes())
        .map(|_| q_ratio(rng.below(9) as i64 - 4, 1 + rng.below(3) as i64))
        .collect();
    IsoInvariantFunction::from_class_values(g.clone(), values)
}

/// Compare pushforward-then-pullback across a span B -> A <- C with the route
/// through the iso-comma fiber product, on `cases` randomized spans.
pub fn beck_chevalley_suite(seed: u64, cases: usize) -> Vec<CheckOutcome> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(cases);
    for case in 1..=cases {
        let a = trivialized_groupoid(&random_shape(&mut rng));
        let b = trivialized_groupoid(&random_shape(&mut rng));
        let c = trivialized_groupoid(&random_shape(&mut rng));
        let g = random_functor(&mut rng, &b, &a);
        let h = random_functor(&mut rng, &c, &a);
        let phi = random_function(&mut rng, &b.groupoid);
        let name = format!("span {case:02}");

        let pushed = pushforward(&g, &phi).expect("phi lives on dom(g)");
        let direct = pullback(&h, &pushed).expect("pushforward lands on cod(h)");
        let (apex, pb, pc) = match fiber_product(&g, &h, DEFAULT_FIBER_CAP) {
            Ok(t) => t,
            Err(e) => {
                out.push(CheckOutcome {
                    name,
                    pass: false,
                    detail: format!("fiber product failed: {e}"),
                });
                continue;
            }
        };
        let lifted = pullback(&pb, &phi).expect("projection returns to dom(g)");
        let routed = pushforward(&pc, &lifted).expect("projection starts at the apex");

        let dv = direct.class_values();
        let rv = routed.class_values();
        match dv.iter().zip(&rv).position(|(x, y)| x != y) {
            None => out.push(CheckOutcome {
                name,
                pass: true,
                detail: format!(
                    "agree on {} classes, apex {} objects",
                    dv.len(),
                    apex.n_objects
                ),
            }),
            Some(i) => out.push(CheckOutcome {
                name,
                pass: false,
                detail: format!(
                    "class {} differs: {} via base, {} via apex",
                    i,
                    fmt_q(&dv[i]),
                    fmt_q(&rv[i])
                ),
            }),
        }
    }
    out
}

fn matrix_check(name: String, got: &QMat, want: &QMat) -> CheckOutcome {
    let pass = got == want;
    let detail = if pass {
        format!("{}x{} matrix matches", want.rows, want.cols)
    } else {
        let mut first = String::from("matrix shape differs");
        'scan: for r in 0..want.rows.min(got.rows) {
            for c in 0..want.cols.min(got.cols) {
                if got.at(r, c) != want.at(r, c) {
                    first = format!(
                        "entry ({r},{c}) is {}, expected {}",
                        fmt_q(got.at(r, c)),
                        fmt_q(want.at(r, c))
                    );
                    break 'scan;
                }
            }
        }
        first
    };
    CheckOutcome { name, pass, detail }
}

/// Quantize the structure spans of a finite group and compare against the
/// class-algebra matrices.
pub fn quantized_operation_suite(
    group: &Arc<FiniteGroup>,
) -> Result<Vec<CheckOutcome>, AlgebraError> {
    let alg = ClassAlgebra::new(group.clone())?;
    let spans = GroupSpans::new(group);
    let k = alg.k();
    let mut out = Vec::new();

    let (left, right) = spans.mult(group);
    let got = quantize_span(&left, &right).expect("shared apex");
    let mut want = QMat::zero(k, k * k);
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                *want.at_mut(l, i * k + j) = q_int(alg.structure_constant(i, j, l));
            }
        }
    }
    out.push(matrix_check(
        format!("{} multiplication", group.name),
        &got,
        &want,
    ));

    let (left, right) = spans.unit(group);
    let got = quantize_span(&left, &right).expect("shared apex");
    let mut want = QMat::zero(k, 1);
    for (i, v) in alg.unit().values.into_iter().enumerate() {
        *want.at_mut(i, 0) = v;
    }
    out.push(matrix_check(format!("{} unit", group.name), &got, &want));

    let (left, right) = spans.counit(group);
    let got = quantize_span(&left, &right).expect("shared apex");
    let mut want = QMat::zero(1, k);
    for i in 0..k {
        *want.at_mut(0, i) = alg.counit(&ClassFunction::indicator(group.clone(), i))?;
    }
    out.push(matrix_check(format!("{} counit", group.name), &got, &want));

    let (left, right) = spans.pairing(group);
    let got = quantize_span(&left, &right).expect("shared apex");
    let mut want = QMat::zero(1, k * k);
    for i in 0..k {
        for j in 0..k {
            let a = ClassFunction::indicator(group.clone(), i);
            let b = ClassFunction::indicator(group.clone(), j);
            *want.at_mut(0, i * k + j) = alg.pair(&a, &b)?;
        }
    }
    out.push(matrix_check(format!("{} pairing", group.name), &got, &want));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FamilySpec;

    fn group(json: &str, p: u64) -> Arc<FiniteGroup> {
        Arc::new(
            FamilySpec::from_json_str(json)
                .unwrap()
                .instantiate(p)
                .unwrap(),
        )
    }

    #[test]
    fn randomized_spans_agree() {
        let outcomes = beck_chevalley_suite(0xC0FFEE, 12);
        assert_eq!(outcomes.len(), 12);
        for o in &outcomes {
            assert!(o.pass, "{}: {}", o.name, o.detail);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = beck_chevalley_suite(7, 5);
        let b = beck_chevalley_suite(7, 5);
        let pairs: Vec<_> = a.iter().zip(&b).collect();
        assert!(pairs
            .iter()
            .all(|(x, y)| x.detail == y.detail && x.pass == y.pass));
    }

    #[test]
    fn quantized_operations_match_small_groups() {
        let z2 = group(
            r#"{"name": "mu2", "dim": 1, "pattern": [["a"]], "constraints": [{"poly": "a^2-1", "rel": "eq"}]}"#,
            3,
        );
        let agl = group(
            r#"{"name": "agl1", "dim": 2, "pattern": [["a", "b"], [0, 1]], "constraints": [{"poly": "a", "rel": "neq"}]}"#,
            3,
        );
        for g in [z2, agl] {
            let outcomes = quantized_operation_suite(&g).unwrap();
            assert_eq!(outcomes.len(), 4);
            for o in &outcomes {
                assert!(o.pass, "{}: {}", o.name, o.detail);
            }
        }
    }

    #[test]
    fn functors_respect_component_structure() {
        let mut rng = SplitMix64::new(42);
        for _ in 0..20 {
            let dom = trivialized_groupoid(&random_shape(&mut rng));
            let cod = trivialized_groupoid(&random_shape(&mut rng));
            let f = random_functor(&mut rng, &dom, &cod);
            f.validate().unwrap();
        }
    }
}
