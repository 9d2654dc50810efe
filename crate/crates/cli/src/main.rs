//! `orbigentle` command-line front end.
//!
//! Exit codes: 0 ok, 1 violations found, 2 parse or validation failure,
//! 3 the surface violates NL2 (witness reported).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use orbigentle::curved::{CurvedStructure, DeformationParams};
use orbigentle::gentle::Gentle;
use orbigentle::grading::GradingData;
use orbigentle::hochschild::{HhContext, HhReport};
use orbigentle::orbigon::compare_census;
use orbigentle::surface::{CombinatorialMap, Condition, Witness};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "orbigentle", version, about = "Gentle A-infinity algebras of arc collections on marked surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surface summary, quiver, center, gradings and the dual collection.
    Inspect(Opts),
    /// Cross-check the orbigon census of the forward oracle against the enumeration engine.
    Orbigons(Opts),
    /// Check the curved A-infinity relations of the deformed products.
    Verify(Opts),
    /// Hochschild classes: bases, cocycle checks, cup and bracket tables.
    Hh(Opts),
    /// Emit the dual arc collection.
    Dual(Opts),
}

#[derive(Args)]
struct Opts {
    /// Surface file (JSON).
    surface: PathBuf,
    /// Truncation order N of the coefficient ring.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    /// Winding bound J.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    winding: u32,
    /// Arity bound K.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    arity: u32,
    /// Length bound L on basis paths.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    len: u32,
    /// Face budget for the orbigon census.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    faces: u32,
    /// Largest type multiset size in the orbigon census.
    #[arg(long, default_value_t = 2)]
    types: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Outcome {
    text: String,
    json: serde_json::Value,
    code: u8,
}

/// Failure before any check ran.
struct Fatal {
    code: u8,
    message: String,
}

impl Fatal {
    fn validation(message: impl Into<String>) -> Self {
        Fatal { code: 2, message: message.into() }
    }
}

impl From<anyhow::Error> for Fatal {
    fn from(e: anyhow::Error) -> Self {
        Fatal::validation(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let (opts, run): (&Opts, fn(&Opts, CombinatorialMap) -> Result<Outcome, Fatal>) = match &cli.command {
        Command::Inspect(o) => (o, inspect),
        Command::Orbigons(o) => (o, orbigons),
        Command::Verify(o) => (o, verify),
        Command::Hh(o) => (o, hh),
        Command::Dual(o) => (o, dual),
    };
    let result = load(opts).and_then(|map| run(opts, map));
    match result {
        Ok(outcome) => {
            let body = match opts.format {
                Format::Text => outcome.text,
                Format::Json => serde_json::to_string_pretty(&outcome.json).expect("reports serialize") + "\n",
            };
            if let Err(e) = emit(opts, &body) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.code)
        }
        Err(fatal) => {
            eprintln!("error: {}", fatal.message);
            ExitCode::from(fatal.code)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("ORBIGENTLE_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ORBIGENTLE_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load(opts: &Opts) -> Result<CombinatorialMap, Fatal> {
    let text = std::fs::read_to_string(&opts.surface)
        .with_context(|| format!("cannot read {}", opts.surface.display()))?;
    CombinatorialMap::parse(&text)
        .map_err(|e| Fatal::validation(format!("{}: [E{}] {e}", opts.surface.display(), e.code())))
}

fn emit(opts: &Opts, body: &str) -> anyhow::Result<()> {
    match &opts.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn describe_witness(map: &CombinatorialMap, w: &Witness) -> String {
    match w {
        Witness::SmallFace { face, size } => format!("face {} has only {size} sides", map.face_name(*face)),
        Witness::LoopArc { arc } => format!("arc {arc} is a loop"),
        Witness::SharedEndpoints { first, second } => format!("arcs {first} and {second} join the same two marked points"),
        Witness::MixedFace { face } => format!("face {} is neither positive nor negative", map.face_name(*face)),
    }
}

/// The NL2 gate shared by `verify` and `hh`.
fn require_nl2(command: &str, map: &CombinatorialMap) -> Option<Outcome> {
    let w = map.check_condition(Condition::Nl2).err()?;
    let message = describe_witness(map, &w);
    Some(Outcome {
        text: format!("NL2 fails: {message}\n"),
        json: json!({ "command": command, "nl2": false, "witness": to_json(&w), "message": message }),
        code: 3,
    })
}

fn summary_line(map: &CombinatorialMap) -> String {
    let r = map.report();
    let mut line = format!("g={} n={} arcs={} arrows={}", r.genus, r.marked_points, r.arcs, map.dart_count());
    for (flag, name) in [(r.nmd, "NMD"), (r.nl2, "NL2"), (r.dimer, "dimer")] {
        if flag {
            line.push(' ');
            line.push_str(name);
        }
    }
    line
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn inspect(opts: &Opts, map: CombinatorialMap) -> Result<Outcome, Fatal> {
    let map = Arc::new(map);
    let gentle = Gentle::new(map.clone());
    let surface = map.report();
    let degree_one = (0..map.dart_count()).filter(|&d| map.corner_degree(d) == 1).count();
    let center_len = 2 * map.max_valence() as u32;
    let certificate = gentle.center_certificate(center_len);
    let center: Vec<String> = gentle.center_basis(opts.winding, 1).iter().map(|e| gentle.render(e)).collect();
    let grading = GradingData::new(&map).report(&map);
    let (dual_map, dual) = map.dual_report();

    let mut text = summary_line(&map) + "\n";
    let sizes: Vec<String> = map.faces().iter().map(|f| f.size().to_string()).collect();
    let _ = writeln!(text, "faces: {} (sizes {})", surface.faces, sizes.join(","));
    let _ = writeln!(text, "euler characteristic of (S,M): {}", surface.euler_char_marked);
    if let Some(signs) = &surface.face_signs {
        let signs: Vec<String> = signs.iter().map(|s| format!("{s:?}").to_lowercase()).collect();
        let _ = writeln!(text, "face signs: {}", signs.join(" "));
    }
    let _ = writeln!(
        text,
        "quiver: {} vertices, {} arrows ({} of degree 0, {} of degree 1)",
        map.arc_count(),
        map.dart_count(),
        map.dart_count() - degree_one,
        degree_one
    );
    let _ = writeln!(
        text,
        "center on paths of length <= {center_len}: dim {} (expected {}), certificate {}",
        certificate.central_dim,
        certificate.expected_dim,
        if certificate.holds() { "holds" } else { "FAILS" }
    );
    let _ = writeln!(text, "center basis up to winding {}: {}", opts.winding, center.join(", "));
    let _ = writeln!(
        text,
        "gradings: pi.iota = 0 {}, corank of im pi = 1 {}, ker iota diagonal {}, face lift sums {}, lift parity {}",
        yes(grading.pi_iota_zero),
        yes(grading.pi_corank_one),
        yes(grading.iota_kernel_is_diagonal),
        yes(grading.face_lift_sums_ok),
        yes(grading.lift_parity_ok)
    );
    let _ = writeln!(
        text,
        "sum of deg l_m = {} (2|chi| = {}); closed formula 4 - 4g - 2n gives {}{}",
        grading.sum_deg_ell,
        grading.twice_abs_chi,
        grading.lemma_sign_value,
        if grading.lemma_sign_discrepancy { " [sign discrepancy]" } else { "" }
    );
    let _ = writeln!(
        text,
        "dual: {}; degrees complementary {}, double dual matches {}",
        summary_line(&dual_map),
        yes(dual.degrees_complementary),
        yes(dual.double_dual_matches)
    );
    let json = json!({
        "command": "inspect",
        "summary": summary_line(&map),
        "surface": to_json(&surface),
        "quiver": { "vertices": map.arc_count(), "arrows": map.dart_count(), "degree_one_arrows": degree_one },
        "center": { "certificate": to_json(&certificate), "basis": center, "winding": opts.winding },
        "grading": to_json(&grading),
        "dual": { "report": to_json(&dual), "file": to_json(&dual_map.to_file()) },
    });
    Ok(Outcome { text, json, code: 0 })
}

fn orbigons(opts: &Opts, map: CombinatorialMap) -> Result<Outcome, Fatal> {
    let nl2 = map.check_condition(Condition::Nl2).is_ok();
    let gentle = Gentle::new(Arc::new(map));
    let census = compare_census(&gentle, opts.faces as usize, opts.types)
        .map_err(|e| Fatal::validation(e.to_string()))?;
    // reduced length at least 3 is expected only under NL2
    let short_violation = nl2 && !census.short_sequences.is_empty();
    let ok = census.censuses_agree() && census.identities_hold() && !short_violation;

    let mut text = format!("bounds: faces <= {}, type size <= {}\n", census.max_faces, census.max_type);
    let _ = writeln!(
        text,
        "oracle census {}, engine census {}, {} closed patterns checked",
        census.oracle_size, census.engine_size, census.patterns_checked
    );
    let _ = writeln!(text, "censuses agree: {}", yes(census.censuses_agree()));
    for (side, list) in [("oracle", &census.only_in_oracle), ("engine", &census.only_in_engine)] {
        for entry in list {
            let _ = writeln!(text, "  only in {side}: {entry}");
        }
    }
    let _ = writeln!(
        text,
        "token-count identity failures: {}, face-graph Euler failures: {}",
        census.token_failures.len(),
        census.euler_failures.len()
    );
    let _ = writeln!(text, "reduced sequences shorter than 3: {}", census.short_sequences.len());
    for s in &census.short_sequences {
        let _ = writeln!(text, "  {s}");
    }
    let json = json!({ "command": "orbigons", "nl2": nl2, "ok": ok, "census": to_json(&census) });
    Ok(Outcome { text, json, code: if ok { 0 } else { 1 } })
}

fn verify(opts: &Opts, map: CombinatorialMap) -> Result<Outcome, Fatal> {
    if let Some(outcome) = require_nl2("verify", &map) {
        return Ok(outcome);
    }
    let gentle = Gentle::new(Arc::new(map));
    // at order 1 the maximal ideal is zero, so only the undeformed products remain
    let params = if opts.order < 2 {
        DeformationParams::zero(opts.order)
    } else {
        DeformationParams::generic(gentle.map(), opts.order, opts.winding)
    };
    let curvature_len = params.orb.keys().map(|&(m, j)| j * gentle.valence(m)).max().unwrap_or(0);
    let len = opts.len;
    let max_len = (2 * len).max(curvature_len + len);
    let arity = opts.arity as usize;
    let structure = CurvedStructure::new(gentle, params, arity, max_len).map_err(|e| Fatal::validation(e.to_string()))?;
    let run = || -> Result<_, orbigentle::curved::CurvedError> {
        Ok((structure.verify_axioms(arity, len)?, structure.parity_check(arity, len)?, structure.strictness(arity, len)?))
    };
    let (axioms, parity, strictness) = run().map_err(|e| Fatal::validation(e.to_string()))?;
    let ok = axioms.holds() && parity.violations.is_empty() && strictness.violations.is_empty();

    let mut text = format!(
        "bounds: order {}, winding {}, arity {arity}, entry length {len} (relations up to arity {})\n",
        opts.order,
        opts.winding,
        structure.relation_arity(arity)
    );
    let _ = writeln!(text, "curvature: {} (central {})", axioms.curvature, yes(axioms.curvature_central));
    let per_arity: Vec<String> = axioms.per_arity.iter().map(|(k, n)| format!("{k}:{n}")).collect();
    let _ = writeln!(text, "tuples per arity: {}", per_arity.join(" "));
    if axioms.holds() {
        let _ = writeln!(text, "axioms hold: {} tuples", axioms.tuples_checked);
    } else {
        let _ = writeln!(
            text,
            "axioms FAIL: {} residuals, {} reduction mismatches, {} errors out of {} tuples",
            axioms.violations.len(),
            axioms.reduction_mismatches.len(),
            axioms.errors.len(),
            axioms.tuples_checked
        );
        let first = axioms.violations.iter().chain(&axioms.reduction_mismatches).chain(&axioms.errors).next();
        if let Some(v) = first {
            let _ = writeln!(text, "  first failure: ({}) -> {}", v.tuple.join(", "), v.residual);
        }
    }
    let _ = writeln!(
        text,
        "parity and degree: {} violations in {} tuples",
        parity.violations.len(),
        parity.tuples_checked
    );
    let _ = writeln!(
        text,
        "strict unit: {} violations in {} tuples",
        strictness.violations.len(),
        strictness.tuples_checked
    );
    let json = json!({
        "command": "verify",
        "ok": ok,
        "bounds": { "order": opts.order, "winding": opts.winding, "arity": arity, "len": len, "evaluation_len": max_len },
        "axioms": to_json(&axioms),
        "parity": to_json(&parity),
        "strictness": to_json(&strictness),
    });
    Ok(Outcome { text, json, code: if ok { 0 } else { 1 } })
}

fn hh(opts: &Opts, map: CombinatorialMap) -> Result<Outcome, Fatal> {
    if let Some(outcome) = require_nl2("hh", &map) {
        return Ok(outcome);
    }
    let ctx = HhContext::new(Gentle::new(Arc::new(map)), opts.arity as usize).map_err(|e| Fatal::validation(e.to_string()))?;
    // cochain checks grow exponentially in arity and length, so they run on a smaller box
    let check_arity = (opts.arity as usize).min(3);
    let check_len = opts.len.min(3);
    let report = ctx.hh_report(opts.winding, check_arity, check_len).map_err(|e| Fatal::validation(e.to_string()))?;
    let text = render_hh(&report);
    let ok = report.ok();
    let json = json!({ "command": "hh", "ok": ok, "report": to_json(&report) });
    Ok(Outcome { text, json, code: if ok { 0 } else { 1 } })
}

fn render_hh(r: &HhReport) -> String {
    let b = &r.bounds;
    let mut t = format!(
        "bounds: winding {}, product arity {}, cochain checks on arity <= {} and length <= {}, tables at total winding <= {}\n",
        b.winding, b.max_arity, b.check_arity, b.check_len, b.table_total_winding
    );
    let _ = writeln!(t, "spanning tree: {}", r.tree.join(" "));
    for (name, basis, rank) in [("odd", &r.odd_basis, r.odd_rank), ("even", &r.even_basis, r.even_rank)] {
        let _ = writeln!(t, "{name} basis: size {}, rank {rank}", basis.len());
        for e in basis.iter() {
            let _ = writeln!(t, "  {:<16} {}", e.class, e.descriptor);
        }
    }
    let _ = writeln!(t, "bases independent: {}", yes(r.bases_independent));
    for (title, list) in [("cocycle checks", &r.cocycle_checks), ("d.d checks", &r.d_squared_checks)] {
        let _ = writeln!(t, "{title}:");
        for c in list.iter() {
            let _ = writeln!(t, "  {} = 0: {} ({} tuples, {} failures)", c.cochain, yes(c.holds()), c.tuples_checked, c.failures.len());
        }
    }
    let s = &r.sample_differential;
    let _ = writeln!(t, "  {} is nonzero on {} of {} tuples", s.cochain, s.failures.len(), s.tuples_checked);
    let a = &r.arc_classes;
    let _ = writeln!(
        t,
        "arc classes: dim S {} (expected {}), commutator rank {}, quotient {} (#M + 2g - 1 = {}, stated form gives {})",
        a.dim_s, a.expected_dim_s, a.commutator_rank, a.dim_quotient, a.expected_dim, a.lemma_statement_value
    );
    let _ = writeln!(
        t,
        "  left and right constructions agree: {}; oriented face sums vanish: {}",
        yes(a.left_equals_right),
        yes(a.face_sums.iter().all(|f| f.oriented_vanishes))
    );
    let agree = r.arc_choice.iter().filter(|e| e.agree).count();
    let _ = writeln!(t, "arc choice independence: {agree} of {} (point, winding) pairs agree", r.arc_choice.len());
    let _ = writeln!(t, "tables (total winding <= {}):", r.tables.max_total_winding);
    for l in &r.tables.lines {
        let _ = writeln!(t, "  {:<9} {}/{}  {}", l.line, l.matching, l.instances, l.statement);
    }
    if let Some(c) = r.tables.cup3_readings.first() {
        let _ = writeln!(
            t,
            "  cup3 scalar, first instance {}: observed {}, turn reading {}, winding reading {}",
            c.instance,
            c.observed.as_deref().unwrap_or("none"),
            c.turn_value,
            c.winding_times_turn_value
        );
    }
    for (title, table) in [("cup", &r.cup_table), ("bracket", &r.bracket_table)] {
        let _ = writeln!(t, "{title} table (nonzero entries):");
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.ends_with(": 0") {
                    let _ = writeln!(t, "  {} , {} -> {v}", r.table_labels[i], r.table_labels[j]);
                }
            }
        }
    }
    for (title, list) in [("cup graded symmetry", &r.cup_symmetry), ("Leibniz compatibility", &r.leibniz)] {
        let held = list.iter().filter(|e| e.holds).count();
        let _ = writeln!(t, "{title}: {held} of {} hold", list.len());
    }
    let d = &r.degree_audit;
    let _ = writeln!(
        t,
        "degree audit: homogeneous {}, sum of deg l_m {} (2|chi| = {})",
        yes(d.holds()),
        d.sum_deg_ell,
        d.twice_abs_chi
    );
    let _ = writeln!(t, "discrepancies: {}", r.discrepancies.len());
    for x in &r.discrepancies {
        let _ = writeln!(t, "  - {x}");
    }
    let _ = writeln!(t, "tables match: {}; bases independent: {}", yes(r.tables.holds()), yes(r.bases_independent));
    t
}

fn dual(_opts: &Opts, map: CombinatorialMap) -> Result<Outcome, Fatal> {
    let (dual_map, report) = map.dual_report();
    let text = format!(
        "{}\ndegrees complementary: {}\ndouble dual matches the original: {}\n",
        summary_line(&dual_map),
        yes(report.degrees_complementary),
        yes(report.double_dual_matches)
    );
    // the JSON form is the dual surface file itself, so it can be fed back in
    let json = to_json(&dual_map.to_file());
    Ok(Outcome { text, json, code: if report.holds() { 0 } else { 1 } })
}
