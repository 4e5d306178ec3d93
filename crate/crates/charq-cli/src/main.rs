mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use charq_core::bordism::{
    self, brute_force_hom_count, surface_invariant, BordismError, DEFAULT_TENSOR_CAP,
};
use charq_core::classfun::{AlgebraError, ClassAlgebra};
use charq_core::correspondence::{census_count, eigen_census, family_matrix, CorrespondenceError};
use charq_core::group::{Caps, FamilySpec, FiniteGroup, GroupError};
use charq_core::linalg::{fmt_q, q_int};
use charq_core::schemes::{builtin, list_builtins, SchemeError};
use charq_core::spancheck::CheckOutcome;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "charq",
    version,
    about = "Exact class-function engine for finite matrix groups over F_p: \
             surface-group counts, genus matrices in q, and check suites"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Largest group order a spec may instantiate
    #[arg(long, global = true)]
    cap_order: Option<u64>,
    /// Largest tensor-space dimension during bordism evaluation
    #[arg(long, global = true)]
    cap_tensor: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct GroupSel {
    /// Built-in family name (see `charq catalog`)
    #[arg(long, group = "gsel")]
    family: Option<String>,
    /// Path to a family spec JSON file
    #[arg(long, group = "gsel", value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Field characteristic
    #[arg(short, long)]
    prime: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Order, conjugacy classes, and centralizer orders of one group
    GroupInfo {
        #[command(flatten)]
        sel: GroupSel,
    },
    /// Irreducible character dimensions with multiplicities
    Census {
        #[command(flatten)]
        sel: GroupSel,
    },
    /// Number of homomorphisms from a genus-g surface group
    Count {
        #[command(flatten)]
        sel: GroupSel,
        #[arg(short, long)]
        genus: u32,
        /// Cross-check against direct tuple enumeration
        #[arg(long)]
        oracle: bool,
    },
    /// Interpolated genus matrix of a built-in family, in q
    Matrix {
        /// Built-in family name
        #[arg(long)]
        family: String,
        /// Interpolation node primes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        /// Held-out prime the fitted entries must reproduce
        #[arg(long)]
        validate: u64,
        /// Maximum entry degree (default: a per-family overestimate)
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Parse, typecheck, and evaluate a bordism expression
    Eval {
        /// Expression, e.g. "counit . genus^2 . unit" or "sigma(2)"
        expr: String,
        #[command(flatten)]
        sel: GroupSel,
    },
    /// Run a named check suite; nonzero exit if anything fails
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// List built-in families and their generators
    Catalog,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// Genus matrix, lifts, censuses, and integrated table rows
    Tables,
    /// Frobenius axioms on five groups up to order 729
    Axioms,
    /// Randomized span composition and quantized structure maps
    Spans,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Correspondence(#[from] CorrespondenceError),
    #[error(transparent)]
    Bordism(#[from] BordismError),
}

fn group_code(e: &GroupError) -> u8 {
    match e {
        GroupError::BadSpec(_) => 2,
        GroupError::NotPrime(_) | GroupError::NotAGroup(_) => 3,
        GroupError::PrimeTooLarge(..) | GroupError::TooLarge(_) => 4,
    }
}

fn algebra_code(e: &AlgebraError) -> u8 {
    match e {
        AlgebraError::GroupMismatch(..) => 3,
        AlgebraError::TooManyClasses(_) => 4,
    }
}

fn scheme_code(e: &SchemeError) -> u8 {
    match e {
        SchemeError::BadSpec(_) => 2,
        SchemeError::DomainTooLarge(..) => 4,
        SchemeError::Group(g) => group_code(g),
        _ => 3,
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => 2,
        CliError::Check(_) => 1,
        CliError::Group(g) => group_code(g),
        CliError::Algebra(a) => algebra_code(a),
        CliError::Scheme(s) => scheme_code(s),
        CliError::Correspondence(c) => match c {
            CorrespondenceError::Algebra(a) => algebra_code(a),
            CorrespondenceError::Scheme(s) => scheme_code(s),
            CorrespondenceError::BadInput(_) => 2,
            _ => 3,
        },
        CliError::Bordism(b) => match b {
            BordismError::SyntaxError { .. } | BordismError::TypeError(..) => 2,
            BordismError::MemoryCap(..) | BordismError::ResourceCap(_) => 4,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn build_group(sel: &GroupSel, caps: &Caps) -> Result<Arc<FiniteGroup>, CliError> {
    let spec = match (&sel.family, &sel.spec) {
        (Some(name), None) => {
            let fam = builtin(name).ok_or_else(|| {
                CliError::Usage(format!("unknown family {name:?}; see `charq catalog`"))
            })?;
            if fam.odd_primes_only && sel.prime == 2 {
                return Err(SchemeError::OddPrimesOnly(fam.name).into());
            }
            fam.family
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            FamilySpec::from_json_str(&text)?
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --family or --spec is required".into(),
            ))
        }
    };
    Ok(Arc::new(spec.instantiate_with(sel.prime, caps)?))
}

fn emit(format: Format, value: Value, table: String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
        Format::Table => println!("{table}"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut caps = Caps::default();
    if let Some(order) = cli.cap_order {
        caps.max_order = order;
    }
    let tensor_cap = cli.cap_tensor.unwrap_or(DEFAULT_TENSOR_CAP);

    match cli.cmd {
        Cmd::GroupInfo { sel } => {
            let group = build_group(&sel, &caps)?;
            let sizes = &group.classes.sizes;
            let cents = &group.classes.centralizer_orders;
            let mut table = format!(
                "group {} at p={}: order {}, {} classes\nclass  size  centralizer",
                group.name,
                group.p,
                group.order(),
                group.k()
            );
            for c in 0..group.k() {
                table += &format!("\n{c:<5}  {:<4}  {}", sizes[c], cents[c]);
            }
            emit(
                cli.format,
                json!({
                    "name": group.name,
                    "prime": group.p,
                    "order": group.order(),
                    "classes": group.k(),
                    "class_sizes": sizes,
                    "centralizer_orders": cents,
                }),
                table,
            );
        }
        Cmd::Census { sel } => {
            let group = build_group(&sel, &caps)?;
            let alg = ClassAlgebra::new(group.clone())?;
            let (census, _) = eigen_census(&alg)?;
            let mut table = format!(
                "character dimensions of {} at p={} (order {})\ndim  count",
                group.name,
                group.p,
                census.group_order
            );
            for &(d, n) in &census.entries {
                table += &format!("\n{d:<3}  {n}");
            }
            table += &format!(
                "\nsum of dim^2 = {} = group order",
                census.group_order
            );
            emit(
                cli.format,
                json!({
                    "name": group.name,
                    "prime": group.p,
                    "order": census.group_order,
                    "census": census.to_json(),
                }),
                table,
            );
        }
        Cmd::Count { sel, genus, oracle } => {
            let group = build_group(&sel, &caps)?;
            let alg = ClassAlgebra::new(group.clone())?;
            let (census, _) = eigen_census(&alg)?;
            let n = census_count(&census, genus);
            if genus == 0 {
                eprintln!(
                    "warning: genus 0 evaluates the same character sum; \
                     the validated regime is genus >= 1"
                );
            }
            if oracle {
                let brute = BigRational::from_integer(brute_force_hom_count(&group, genus)?);
                let surf = surface_invariant(&alg, genus) * q_int(group.order() as i64);
                if brute != n || surf != n {
                    return Err(CliError::Check(format!(
                        "count mismatch: census {}, enumeration {}, surface invariant x |G| {}",
                        fmt_q(&n),
                        fmt_q(&brute),
                        fmt_q(&surf)
                    )));
                }
            }
            let note = if oracle { " (cross-checked by enumeration)" } else { "" };
            emit(
                cli.format,
                json!({
                    "name": group.name,
                    "prime": group.p,
                    "genus": genus,
                    "count": fmt_q(&n),
                    "oracle": oracle,
                }),
                format!("{}{note}", fmt_q(&n)),
            );
        }
        Cmd::Matrix {
            family,
            primes,
            validate,
            bound,
        } => {
            let fam = builtin(&family).ok_or_else(|| {
                CliError::Usage(format!("unknown family {family:?}; see `charq catalog`"))
            })?;
            let bound = bound.unwrap_or_else(|| fam.default_degree_bound());
            let gm = family_matrix(&fam, &primes, validate, bound)?;
            let entries: Vec<Vec<String>> = gm
                .entries
                .iter()
                .map(|row| row.iter().map(|p| p.to_string()).collect())
                .collect();
            let width = entries
                .iter()
                .flatten()
                .map(|s| s.len())
                .max()
                .unwrap_or(0);
            let mut table = format!(
                "genus matrix for {} over primes {:?}, validated at {}\nbasis: {}",
                fam.name,
                gm.primes,
                gm.validation_prime,
                gm.labels.join(", ")
            );
            for row in &entries {
                let cells: Vec<String> = row.iter().map(|s| format!("{s:width$}")).collect();
                table += &format!("\n[ {} ]", cells.join("  "));
            }
            emit(cli.format, gm.to_json(), table);
        }
        Cmd::Eval { expr, sel } => {
            let parsed = bordism::parse(&expr)?;
            let group = build_group(&sel, &caps)?;
            let alg = ClassAlgebra::new(group)?;
            let map = bordism::evaluate(&parsed, &alg, tensor_cap)?;
            if map.in_arity == 0 && map.out_arity == 0 {
                let v = map.matrix.at(0, 0);
                emit(cli.format, json!({ "value": fmt_q(v) }), fmt_q(v));
            } else {
                let rows: Vec<Vec<String>> = (0..map.matrix.rows)
                    .map(|r| {
                        (0..map.matrix.cols)
                            .map(|c| fmt_q(map.matrix.at(r, c)))
                            .collect()
                    })
                    .collect();
                let mut table = format!(
                    "map from {} to {} circles ({} x {} matrix)",
                    map.in_arity, map.out_arity, map.matrix.rows, map.matrix.cols
                );
                for row in &rows {
                    table += &format!("\n[ {} ]", row.join("  "));
                }
                emit(
                    cli.format,
                    json!({
                        "in_arity": map.in_arity,
                        "out_arity": map.out_arity,
                        "entries": rows,
                    }),
                    table,
                );
            }
        }
        Cmd::Verify { suite } => {
            let (name, outcomes) = match suite {
                Suite::Tables => ("tables", verify::tables()),
                Suite::Axioms => ("axioms", verify::axioms()),
                Suite::Spans => ("spans", verify::spans()),
            };
            let failures = outcomes.iter().filter(|o| !o.pass).count();
            let table = outcomes
                .iter()
                .map(|o: &CheckOutcome| {
                    format!(
                        "{} {} - {}",
                        if o.pass { "PASS" } else { "FAIL" },
                        o.name,
                        o.detail
                    )
                })
                .chain(std::iter::once(format!(
                    "{} of {} checks passed",
                    outcomes.len() - failures,
                    outcomes.len()
                )))
                .collect::<Vec<_>>()
                .join("\n");
            emit(
                cli.format,
                json!({
                    "suite": name,
                    "checks": outcomes
                        .iter()
                        .map(|o| json!({ "name": o.name, "pass": o.pass, "detail": o.detail }))
                        .collect::<Vec<_>>(),
                    "failures": failures,
                }),
                table,
            );
            if failures > 0 {
                return Err(CliError::Check(format!(
                    "{failures} of {} checks failed",
                    outcomes.len()
                )));
            }
        }
        Cmd::Catalog => {
            let fams = list_builtins();
            let mut table = String::new();
            for fam in &fams {
                table += &format!("{}: {}\n", fam.name, fam.description);
                if fam.odd_primes_only {
                    table += "  (odd primes only)\n";
                }
                for g in &fam.generators {
                    table += &format!("  {} - {}\n", g.name, g.description);
                }
                table += &format!("  matrix basis: {}\n", fam.matrix_basis.join(", "));
            }
            emit(
                cli.format,
                Value::Array(
                    fams.iter()
                        .map(|fam| {
                            json!({
                                "name": fam.name,
                                "description": fam.description,
                                "odd_primes_only": fam.odd_primes_only,
                                "generators": fam.generators
                                    .iter()
                                    .map(|g| json!({ "name": g.name, "description": g.description }))
                                    .collect::<Vec<_>>(),
                                "matrix_basis": fam.matrix_basis,
                                "default_degree_bound": fam.default_degree_bound(),
                            })
                        })
                        .collect(),
                ),
                table.trim_end().to_string(),
            );
        }
    }
    Ok(())
}
