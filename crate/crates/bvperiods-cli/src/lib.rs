//! Command-line driver: argument parsing, dispatch and report rendering.
//!
//! Every command prints one report. JSON reports carry `schema` and
//! `command` fields and contain no timings, so equal inputs give
//! byte-identical output.

use std::path::{Path, PathBuf};

use bvperiods::diffop::DiffOperator;
use bvperiods::family::FamilySpec;
use bvperiods::gdwork::derive_pf_1param;
use bvperiods::iseries::{
    block_weights, build_continued, check_annihilation, mirror_map, shift_sweep, standard_chi_factor, Caps, Reading,
    SweepReport,
};
use bvperiods::relations::{Relation, RelationContext};
use bvperiods::{ParamPolynomial, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "bvperiods", version, about = "Picard-Fuchs operators, Jacobian relations and I-series checks")]
pub struct Cli {
    /// Family JSON file.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for mutation controls.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReadingArg {
    Balanced,
    Printed,
}

impl From<ReadingArg> for Reading {
    fn from(r: ReadingArg) -> Self {
        match r {
            ReadingArg::Balanced => Reading::Balanced,
            ReadingArg::Printed => Reading::Printed,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Picard-Fuchs operator in one deformation parameter.
    Derive {
        #[arg(long)]
        param: String,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..))]
        max_order: u32,
        /// Operator JSON to compare against up to a scalar; mismatch exits 1.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Basis of the relations among degree-k monomial products.
    Relations {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        level: u32,
        /// Relation JSON files to check for membership; any failure exits 1.
        #[arg(long, num_args = 1..)]
        verify: Vec<PathBuf>,
    },
    /// Products, relation rank and local ring dimension at level k.
    Rank {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        level: u32,
    },
    /// Apply an operator to the continued I-series and report residuals.
    VerifyOp(VerifyOp),
    /// Exhaustive sweep of the involution shift identity.
    ShiftCheck {
        /// `a,b,c`: sweep all sectors with a, b <= max(a, b) and c <= c.
        #[arg(long, value_parser = parse_triple)]
        bounds: [u32; 3],
        #[arg(long, value_enum, default_value_t = ReadingArg::Balanced)]
        reading: ReadingArg,
        /// Replace the chi factor (C+1)(C+2) by (C+1)(C+3).
        #[arg(long)]
        mutate: bool,
    },
    /// Mirror map and leading J-function terms at large radius.
    MirrorMap {
        /// `psi,phi,chi` truncation caps.
        #[arg(long, value_parser = parse_triple)]
        bounds: [u32; 3],
        #[arg(long, value_enum, default_value_t = ReadingArg::Balanced)]
        reading: ReadingArg,
    },
}

#[derive(Args, Debug)]
pub struct VerifyOp {
    #[arg(long)]
    pub operator: PathBuf,
    /// `psi,phi,chi` caps; defaults depend on the number of active variables.
    #[arg(long, value_parser = parse_triple)]
    pub bounds: Option<[u32; 3]>,
    /// Variables set to zero; defaults to those the operator does not name.
    #[arg(long, value_delimiter = ',')]
    pub zero: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = ReadingArg::Balanced)]
    pub reading: ReadingArg,
    #[arg(long, default_value_t = 8)]
    pub min_steps: i64,
    /// Residuals listed in the report (the count is always complete).
    #[arg(long, default_value_t = 20)]
    pub max_residuals: usize,
    /// Perturb one coefficient, chosen by `--seed`, before checking.
    #[arg(long)]
    pub mutate: bool,
}

fn parse_triple(s: &str) -> Result<[u32; 3], String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<u32>| format!("expected 3 comma-separated values, got {}", v.len()))
}

/// Exit status and report.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    /// Bad input: exit 2.
    Usage(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// A finished command: its report and whether the mathematics passed.
struct Report {
    pass: bool,
    json: Value,
    text: String,
}

pub fn run(cli: Cli) -> Outcome {
    match dispatch(&cli) {
        Ok(r) => Outcome {
            code: if r.pass { 0 } else { 1 },
            stdout: match cli.format {
                Format::Json => serde_json::to_string_pretty(&r.json).expect("report serializes") + "\n",
                Format::Text => r.text,
            },
            stderr: String::new(),
        },
        Err(Failure::Usage(m)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_family(cli: &Cli) -> Result<(FamilySpec, String), Failure> {
    let path = cli.family.as_ref().ok_or_else(|| usage("--family is required"))?;
    let fs = FamilySpec::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let name = fs
        .name()
        .map(str::to_string)
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    Ok((fs, name))
}

fn load_operator(path: &Path) -> Result<DiffOperator, Failure> {
    DiffOperator::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let (fs, family) = load_family(cli)?;
    let head = |command: &str| json!({ "schema": SCHEMA, "command": command, "family": family });
    match &cli.command {
        Command::Derive { param, max_order, expect } => {
            let restricted = fs.restrict(param).map_err(usage)?;
            let mut j = head("derive");
            let mut text = format!("family {family}, parameter {param}\n");
            match derive_pf_1param(&restricted, *max_order) {
                Ok(d) => {
                    let op = d.operator.normalize();
                    j["param"] = json!(param);
                    j["order"] = json!(d.order);
                    j["ranks"] = json!(d.ranks);
                    j["cohomology_dimension"] = json!(d.cohomology_dimension);
                    j["operator"] = json!(op.to_text());
                    j["operator_json"] = serde_json::from_str(&op.to_json()).expect("operator JSON");
                    text += &format!(
                        "order {}\nranks {:?}\ncohomology dimension {}\noperator {}\n",
                        d.order, d.ranks, d.cohomology_dimension, op
                    );
                    let mut pass = true;
                    if let Some(path) = expect {
                        let want = load_operator(path)?;
                        let matches = op.eq_up_to_scalar(&want);
                        j["expected"] = json!({ "file": path.display().to_string(), "operator": want.normalize().to_text(), "matches": matches });
                        text += &format!("expected {} ({})\n", want.normalize(), if matches { "MATCH" } else { "MISMATCH" });
                        pass = matches;
                    }
                    j["pass"] = json!(pass);
                    Ok(Report { pass, json: j, text })
                }
                Err(e @ bvperiods::gdwork::GdError::NoRelation(_)) => {
                    j["pass"] = json!(false);
                    j["error"] = json!(e.to_string());
                    text += &format!("FAIL: {e}\n");
                    Ok(Report { pass: false, json: j, text })
                }
                Err(e) => Err(usage(e)),
            }
        }
        Command::Relations { level, verify } => {
            let ctx = RelationContext::new(&fs).map_err(usage)?;
            let found = ctx.find_relations(*level);
            let audit = ctx.rank_audit(*level);
            let spans = ctx.spans_level(&found, *level);
            let mut j = head("relations");
            j["level"] = json!(level);
            j["rank"] = json!(audit_json(&audit));
            j["relations"] = json!(found.iter().map(Relation::to_text).collect::<Vec<_>>());
            j["spans_level"] = json!(spans);
            let mut text = format!(
                "level {level}: {} relations, rank ({}, {}, {})\n",
                found.len(),
                audit.num_products,
                audit.relation_rank,
                audit.local_ring_dim
            );
            for r in &found {
                text += &format!("  {}\n", r.to_text());
            }
            let mut pass = spans;
            let mut checks = Vec::new();
            for path in verify {
                let rel = Relation::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let holds = rel.level == *level && ctx.verify(&rel).holds;
                // The found relations span the whole kernel, so membership
                // in the kernel is membership in their span.
                let member = holds && spans;
                pass &= member;
                checks.push(json!({ "file": path.display().to_string(), "relation": rel.to_text(), "holds": holds, "in_span": member }));
                text += &format!("{} {}: {}\n", if member { "PASS" } else { "FAIL" }, path.display(), rel.to_text());
            }
            if !verify.is_empty() {
                j["verify"] = json!(checks);
            }
            j["pass"] = json!(pass);
            Ok(Report { pass, json: j, text })
        }
        Command::Rank { level } => {
            let ctx = RelationContext::new(&fs).map_err(usage)?;
            let a = ctx.rank_audit(*level);
            let mut j = head("rank");
            j["level"] = json!(level);
            j["rank"] = json!(audit_json(&a));
            j["pass"] = json!(true);
            let text = format!("({}, {}, {})\n", a.num_products, a.relation_rank, a.local_ring_dim);
            Ok(Report { pass: true, json: j, text })
        }
        Command::VerifyOp(v) => verify_op(cli, v, &fs, &family, head("verify-op")),
        Command::ShiftCheck { bounds, reading, mutate } => {
            let w = block_weights(&fs).map_err(usage)?;
            let [a, b, c] = *bounds;
            let (max_p, max_c2) = (2 * a.max(b), 2 * c);
            let rep: SweepReport = if *mutate {
                shift_sweep(&w, max_p, max_c2, (*reading).into(), |c2| {
                    Rational::from_integer((c2 as i64 + 1).into()) * Rational::from_integer((c2 as i64 + 3).into())
                })
            } else {
                shift_sweep(&w, max_p, max_c2, (*reading).into(), standard_chi_factor)
            };
            let pass = rep.failures.is_empty();
            let mut j = head("shift-check");
            j["bounds"] = json!(bounds);
            j["mutated"] = json!(mutate);
            j["sweep"] = serde_json::to_value(&rep).expect("sweep serializes");
            j["pass"] = json!(pass);
            let text = format!(
                "{}: {} points, {} nontrivial, {} failures\n",
                if pass { "PASS" } else { "FAIL" },
                rep.checked,
                rep.nontrivial,
                rep.failures.len()
            );
            Ok(Report { pass, json: j, text })
        }
        Command::MirrorMap { bounds, reading } => {
            let caps = Caps { psi: bounds[0] as i64, phi: bounds[1] as i64, chi: bounds[2] as i64 };
            let m = mirror_map(&fs, caps, (*reading).into()).map_err(usage)?;
            let zero = vec![0i64; m.f.vars().len()];
            let one = Rational::from_integer(1.into());
            let f0 = m.f.coeff(&zero).map(|c| c == one).unwrap_or(false);
            let g0 = m.g.iter().chain(&m.tau).all(|g| g.coeff(&zero).map(|c| c.is_zero()).unwrap_or(false));
            let j1 = m.j_z1.len() == 1 && m.j_z1.coeff(&zero).map(|c| c == one).unwrap_or(false);
            let pass = f0 && g0 && j1;
            let mut j = head("mirror-map");
            j["caps"] = json!(caps);
            j["reading"] = json!(m.reading);
            j["checks"] = json!({ "f_constant_one": f0, "g_vanish_at_zero": g0, "j_z1_is_one": j1 });
            j["f"] = series_json(&m.f);
            j["g"] = json!(m.g.iter().map(series_json).collect::<Vec<_>>());
            j["g_sigma"] = series_json(&m.g_sigma);
            j["tau"] = json!(m.tau.iter().map(series_json).collect::<Vec<_>>());
            j["tau_sigma"] = series_json(&m.tau_sigma);
            j["pass"] = json!(pass);
            let mut text = format!(
                "{}: F(0) = 1 {f0}, g(0) = 0 {g0}, J z-part = 1 {j1}\nF = {}\n",
                if pass { "PASS" } else { "FAIL" },
                series_text(&m.f)
            );
            for (name, t) in ["tau_E", "tau_K"].iter().zip(&m.tau) {
                text += &format!("{name} - log q = {}\n", series_text(t));
            }
            text += &format!("tau_sigma = {}\n", series_text(&m.tau_sigma));
            Ok(Report { pass, json: j, text })
        }
    }
}

#[derive(Serialize)]
struct AuditJson {
    num_products: usize,
    relation_rank: usize,
    local_ring_dim: usize,
}

fn audit_json(a: &bvperiods::relations::RankAudit) -> AuditJson {
    AuditJson {
        num_products: a.num_products,
        relation_rank: a.relation_rank,
        local_ring_dim: a.local_ring_dim,
    }
}

fn series_json<C: bvperiods::diffop::SeriesCoeff>(s: &bvperiods::diffop::IndexedSeries<C>) -> Value {
    Value::Array(
        s.terms()
            .map(|(n, c)| json!({ "exponent": s.fmt_exponent(n), "coeff": c.to_string() }))
            .collect(),
    )
}

fn series_text<C: bvperiods::diffop::SeriesCoeff>(s: &bvperiods::diffop::IndexedSeries<C>) -> String {
    let parts: Vec<String> = s.terms().map(|(n, c)| format!("({c})*{}", s.fmt_exponent(n))).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Cap for each variable the operator acts on; fewer active variables
/// allow deeper truncation at the same cost.
fn default_cap(active: usize) -> u32 {
    match active {
        1 => 100,
        2 => 40,
        _ => 24,
    }
}

fn mutate(op: &DiffOperator, seed: u64) -> DiffOperator {
    let terms = op.terms();
    if terms.is_empty() {
        return op.clone();
    }
    let (d, _) = &terms[(seed % terms.len() as u64) as usize];
    let one = ParamPolynomial::monomial([0; 4], Rational::from_integer(1.into()));
    op.add(&DiffOperator::from_terms(op.params(), [(d.clone(), one)]))
}

fn verify_op(cli: &Cli, v: &VerifyOp, fs: &FamilySpec, family: &str, mut j: Value) -> Result<Report, Failure> {
    let mut op = load_operator(&v.operator)?;
    if v.mutate {
        op = mutate(&op, cli.seed);
    }
    let vars = fs.params();
    let zero: Vec<String> = match &v.zero {
        Some(z) => z.clone(),
        None => vars.iter().filter(|p| !op.params().contains(p)).cloned().collect(),
    };
    for z in &zero {
        if !vars.contains(z) {
            return Err(usage(format!("unknown variable `{z}` in --zero")));
        }
    }
    let caps = v.bounds.unwrap_or_else(|| {
        let cap = default_cap(vars.len() - zero.len());
        let c: Vec<u32> = vars.iter().map(|p| if zero.contains(p) { 0 } else { cap }).collect();
        [c[0], c[1], c[2]]
    });
    let caps = Caps { psi: caps[0] as i64, phi: caps[1] as i64, chi: caps[2] as i64 };
    let zero_refs: Vec<&str> = zero.iter().map(String::as_str).collect();
    let series = build_continued(fs, caps, v.reading.into())
        .and_then(|s| s.specialize(&zero_refs))
        .map_err(usage)?;
    let mut rep = check_annihilation(&op, &series, family, v.min_steps).map_err(usage)?;
    let mut text = format!(
        "{}: {} on {family}, {} lattice points, {} residuals\n",
        if rep.pass { "PASS" } else { "FAIL" },
        rep.operator,
        rep.lattice_points,
        rep.residual_count
    );
    for r in rep.residuals.iter().take(v.max_residuals) {
        text += &format!("  {:?} {}: {}\n", r.component, r.exponent, r.value);
    }
    rep.residuals.truncate(v.max_residuals);
    let pass = rep.pass;
    j["caps"] = json!(caps);
    j["zero"] = json!(zero);
    j["mutated"] = json!(v.mutate);
    j["report"] = serde_json::to_value(&rep).expect("report serializes");
    j["pass"] = json!(pass);
    Ok(Report { pass, json: j, text })
}
