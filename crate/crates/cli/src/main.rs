//! `doctrina`: check, sheafify and complete finite doctrines.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use doctrina::doctrine::{
    check_equality_laws, check_existential_laws, check_first_order, validate_doctrine, verify_comprehension, Doctrine,
    TableDoctrine,
};
use doctrina::fincat::{inverse, validate_category, validate_products, validate_terminal, Category};
use doctrina::fixtures::{gen_fixture, generate, FixtureSpec};
use doctrina::format::DoctrineFile;
use doctrina::intlang::{evaluate, parse_formula, Signature, TypingContext};
use doctrina::lattice::validate_nucleus;
use doctrina::maps::{is_complete, is_sheaf};
use doctrina::percompletion::{check_fibers, check_representative_independence};
use doctrina::powerobj::{check_singletons, verify_power_object};
use doctrina::report::{Budget, ValidationReport};
use doctrina::sheafify::sheafify_object;
use doctrina::with_generated;
use serde_json::json;

use report::{Input, Report};

#[derive(Parser)]
#[command(name = "doctrina", version, about = "Check, sheafify and complete finite doctrines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Largest fiber or hom-set enumerated exhaustively.
    #[arg(long, default_value_t = 1 << 20)]
    budget: u128,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Write the report here instead of standard output.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Add wall-clock times to the report.
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn budget(&self) -> Budget {
        Budget { max_enum: self.budget, seed: self.seed, ..Budget::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the laws of a doctrine file.
    Check {
        file: PathBuf,
        /// Comma-separated law groups, or "all".
        #[arg(long, default_value = "all")]
        laws: String,
        /// Object for the singletons, sheaf and complete groups.
        #[arg(long)]
        object: Option<String>,
        /// Objects to quantify over (default: all).
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sheafify one object: singletons, unit and sheaf verdicts.
    Sheafify {
        file: PathBuf,
        #[arg(long)]
        object: String,
        /// Probe objects (default: the terminal object).
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
        /// Write the input file with the certificate appended.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build the completion by partial equivalence relations of a localic file.
    PerComplete {
        file: PathBuf,
        /// Base objects used as carriers (default: all).
        #[arg(long, value_delimiter = ',')]
        objects: Vec<String>,
        /// Keep relations with at most this many inhabited points.
        #[arg(long)]
        max_extent: Option<u32>,
        /// Where to write the completed doctrine file.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        report: Format,
    },
    /// Evaluate a formula in a typing context.
    Eval {
        file: PathBuf,
        /// Typing context, e.g. "y:Y, a:A".
        #[arg(long, default_value = "")]
        context: String,
        #[arg(long)]
        formula: String,
    },
    /// Write a generated fixture.
    Fixture {
        name: String,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<u32>,
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        closure: Option<String>,
        #[arg(long)]
        defect: Option<String>,
        #[arg(long)]
        max_extent: Option<u32>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

/// Input the tool cannot work with; exit code 2.
struct Malformed(String);

impl<E: std::fmt::Display> From<E> for Malformed {
    fn from(e: E) -> Self {
        Malformed(e.to_string())
    }
}

type Outcome = Result<bool, Malformed>;

const GROUPS: [&str; 12] = [
    "category",
    "doctrine",
    "existential",
    "equality",
    "first-order",
    "exists-table",
    "nuclei",
    "power",
    "comprehension",
    "singletons",
    "sheaf",
    "complete",
];
const OBJECT_GROUPS: [&str; 3] = ["singletons", "sheaf", "complete"];

struct Loaded {
    input: Input,
    file: DoctrineFile,
    table: TableDoctrine,
}

fn load(path: &Path) -> Result<Loaded, Malformed> {
    let bytes = fs::read(path).map_err(|e| Malformed(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Malformed(format!("{}: {e}", path.display())))?;
    let file = DoctrineFile::parse(text)?;
    let table = file.to_doctrine()?;
    Ok(Loaded { input: Input::new(&path.display().to_string(), &bytes), file, table })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Malformed> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Malformed(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(r: &Report, format: Format, path: Option<&Path>) -> Outcome {
    let text = match format {
        Format::Text => r.to_text(),
        Format::Json => r.to_json(),
    };
    write_out(path, &text)?;
    Ok(r.passed())
}

/// An object by rendered name, or `A<i>` for the i-th object of the universe.
fn find_object<D: Doctrine>(d: &D, name: &str) -> Result<D::Obj, Malformed> {
    let objs = d.universe();
    if let Some(a) = objs.iter().find(|a| d.render_obj(a) == name) {
        return Ok(a.clone());
    }
    name.strip_prefix('A')
        .and_then(|i| i.parse::<usize>().ok())
        .and_then(|i| objs.get(i).cloned())
        .ok_or_else(|| Malformed(format!("unknown object {name:?}")))
}

fn find_objects<D: Doctrine>(d: &D, names: &[String]) -> Result<Vec<D::Obj>, Malformed> {
    if names.is_empty() {
        return Ok(d.universe());
    }
    names.iter().map(|n| find_object(d, n)).collect()
}

fn timed(timings: bool, f: impl FnOnce() -> ValidationReport) -> (ValidationReport, Option<std::time::Duration>) {
    let t = Instant::now();
    let r = f();
    (r, timings.then(|| t.elapsed()))
}

fn parse_groups(laws: &str, object: bool) -> Result<Vec<&'static str>, Malformed> {
    let mut out = Vec::new();
    for g in laws.split(',').map(str::trim).filter(|g| !g.is_empty()) {
        if g == "all" {
            out.extend(GROUPS.iter().filter(|g| object || !OBJECT_GROUPS.contains(g)));
            continue;
        }
        match GROUPS.iter().find(|k| **k == g) {
            Some(k) => out.push(*k),
            None => return Err(Malformed(format!("unknown law group {g:?}; known: all, {}", GROUPS.join(", ")))),
        }
    }
    out.dedup();
    Ok(out)
}

fn run_group(t: &TableDoctrine, group: &str, scope: &[u32], b: &Budget) -> ValidationReport {
    match group {
        "category" => {
            let mut r = validate_category(t.category());
            r.absorb(validate_terminal(t.category()));
            r.absorb(validate_products(t.category()));
            r
        }
        "doctrine" => validate_doctrine(t, scope, b),
        "existential" => check_existential_laws(t, scope, b),
        "equality" => {
            let mut r = ValidationReport::new("equality laws");
            for a in scope {
                r.absorb(check_equality_laws(t, a, scope, scope, b));
            }
            r
        }
        "first-order" => {
            if t.forall_tables().is_empty() {
                let mut r = ValidationReport::new("first-order structure");
                r.note("no universal quantifier tables declared");
                return r;
            }
            check_first_order(t, scope, b)
        }
        "exists-table" => t.check_declared_exists(),
        "nuclei" => {
            let mut r = ValidationReport::new("nuclei");
            for (name, fiber) in t.lattices() {
                for (j_name, j) in t.nuclei().get(name).into_iter().flatten() {
                    let Some(h) = fiber.heyting() else {
                        r.note(format!("{name} is not Heyting; nucleus {j_name} skipped"));
                        continue;
                    };
                    let mut v = validate_nucleus(h, j);
                    for x in &mut v.violations {
                        x.at.insert(0, format!("{name}.{j_name}"));
                    }
                    r.absorb(v);
                }
            }
            r
        }
        "power" => {
            let mut r = ValidationReport::new("power objects");
            for w in t.power_objects() {
                r.absorb(verify_power_object(t, w, scope, b));
            }
            r
        }
        "comprehension" => {
            let mut r = ValidationReport::new("comprehensions");
            for (&(_, alpha), m) in t.declared_comprehensions() {
                r.absorb(verify_comprehension(t, &alpha, m, scope, b));
            }
            r
        }
        _ => unreachable!("groups are validated"),
    }
}

fn run_object_groups<D: Doctrine>(
    d: &D,
    groups: &[&str],
    object: &str,
    scope: &[String],
    common: &Common,
    report: &mut Report,
) -> Result<(), Malformed> {
    let b = common.budget();
    let a = find_object(d, object)?;
    let objs = find_objects(d, scope)?;
    for g in groups {
        let (r, elapsed) = timed(common.timings, || match *g {
            "singletons" => check_singletons(d, &a, &objs, &b).report,
            "sheaf" => is_sheaf(d, &a, &objs, &b).report,
            _ => is_complete(d, &a, &objs, &b).report,
        });
        report.push(r, elapsed);
    }
    Ok(())
}

fn check(file: &Path, laws: &str, object: Option<&str>, scope: &[String], common: &Common) -> Outcome {
    let loaded = load(file)?;
    let t = &loaded.table;
    let groups = parse_groups(laws, object.is_some())?;
    let (object_groups, table_groups): (Vec<&str>, Vec<&str>) =
        groups.into_iter().partition(|g| OBJECT_GROUPS.contains(g));
    if let Some(name) = object {
        find_object(t, name)?;
    } else if !object_groups.is_empty() {
        return Err(Malformed("the singletons, sheaf and complete groups need --object".into()));
    }
    let objs = find_objects(t, scope)?;
    let b = common.budget();
    let mut report = Report::new("check", Some(loaded.input), b, objs.iter().map(|a| t.render_obj(a)).collect());
    for g in table_groups {
        let (r, elapsed) = timed(common.timings, || run_group(t, g, &objs, &b));
        report.push(r, elapsed);
    }
    if let (Some(name), false) = (object, object_groups.is_empty()) {
        match &loaded.file.generator {
            Some(spec) if spec.defect.is_none() => {
                let g = generate(spec)?;
                with_generated!(&g, d => run_object_groups(d, &object_groups, name, scope, common, &mut report))?
            }
            _ => run_object_groups(t, &object_groups, name, scope, common, &mut report)?,
        }
    }
    emit_report(&report, common.report, common.output.as_deref())
}

fn sheafify_in<D: Doctrine>(
    d: &D,
    object: &str,
    scope: &[String],
    common: &Common,
    report: &mut Report,
) -> Result<serde_json::Value, Malformed> {
    let b = common.budget();
    let a = find_object(d, object)?;
    let probes = if scope.is_empty() {
        vec![d.terminal().ok_or_else(|| Malformed("no terminal object".into()))?]
    } else {
        find_objects(d, scope)?
    };
    report.scope = probes.iter().map(|p| d.render_obj(p)).collect();
    let t = Instant::now();
    let u = sheafify_object(d, &a, &probes, &b);
    report.push(u.singletons.report.clone(), common.timings.then(|| t.elapsed()));
    report.push(u.report.clone(), None);
    let Some(s) = u.data() else {
        return Ok(json!({ "kind": "sheafification", "object": d.render_obj(&a), "singletons": false }));
    };
    let mut sheaf_scope = probes.clone();
    sheaf_scope.push(a.clone());
    let verdict = is_sheaf(d, &a, &sheaf_scope, &b);
    let unextended: Vec<String> =
        verdict.report.violations.iter().map(|v| format!("{}: {}", v.law, v.at.join(" then "))).collect();
    Ok(json!({
        "kind": "sheafification",
        "object": d.render_obj(&a),
        "s": d.render_obj(&s.s),
        "eta": d.render_mor(&s.eta),
        "eta_bijective": u.eta_bijective,
        "eta_iso": inverse(d, &s.eta).is_some(),
        "membership_identity": u.membership_identity,
        "object_is_sheaf_on_probes": verdict.is_sheaf(),
        "sheaf_counterexamples": unextended,
        "probes": report.scope,
    }))
}

fn sheafify(file: &Path, object: &str, scope: &[String], emit: Option<&Path>, common: &Common) -> Outcome {
    let mut loaded = load(file)?;
    let mut report = Report::new("sheafify", Some(loaded.input), common.budget(), vec![]);
    let cert = match &loaded.file.generator {
        Some(spec) if spec.defect.is_none() => {
            let g = generate(spec)?;
            with_generated!(&g, d => sheafify_in(d, object, scope, common, &mut report))?
        }
        _ => sheafify_in(&loaded.table, object, scope, common, &mut report)?,
    };
    report.certificates.push(cert.clone());
    if let Some(p) = emit {
        loaded.file.certificates.push(cert);
        write_out(Some(p), &loaded.file.to_json())?;
    }
    emit_report(&report, common.report, common.output.as_deref())
}

fn per_complete(
    file: &Path,
    objects: &[String],
    max_extent: Option<u32>,
    output: Option<&Path>,
    format: Format,
) -> Outcome {
    let loaded = load(file)?;
    let base = match &loaded.file.generator {
        Some(spec)
            if (spec.fixture == "localic" || spec.fixture == "finset-sub")
                && spec.closure.is_none()
                && spec.defect.is_none() =>
        {
            spec.clone()
        }
        _ => {
            return Err(Malformed("per-complete needs a generated localic base file without closure or defect".into()))
        }
    };
    let t = &loaded.table;
    let carriers: Vec<u32> = find_objects(t, objects)?
        .iter()
        .map(|a| {
            let name = t.render_obj(a);
            name.parse::<u32>().map_err(|_| Malformed(format!("object {name} is not a finite set")))
        })
        .collect::<Result<_, _>>()?;
    let mut spec = FixtureSpec::new("per")
        .algebra(base.algebra.as_deref().unwrap_or(if base.fixture == "finset-sub" { "bool2" } else { "chain3" }))
        .sizes(&carriers);
    spec.max_extent = max_extent;
    let g = generate(&spec)?;
    let doctrina::fixtures::Generated::Per(d) = &g else { unreachable!("per fixtures generate PER doctrines") };
    let objs = d.universe();
    let mut report = Report::new(
        "per-complete",
        Some(loaded.input),
        Budget::default(),
        objs.iter().map(|a| d.render_obj(a)).collect(),
    );
    report.push(check_fibers(d, &objs), None);
    report.push(check_representative_independence(d, &objs), None);
    let out = gen_fixture(&spec)?;
    match output {
        Some(p) => {
            write_out(Some(p), &out.to_json())?;
            emit_report(&report, format, None)
        }
        None => {
            write_out(None, &out.to_json())?;
            Ok(report.passed())
        }
    }
}

fn eval_in<D: Doctrine>(d: &D, context: &str, formula: &str) -> Result<String, Malformed> {
    let sig = Signature::of(d);
    let ctx = TypingContext::parse(d, &sig, context)?;
    let phi = parse_formula(formula, &sig)?;
    let v = evaluate(d, &sig, &ctx, &phi)?;
    Ok(d.render_elem(ctx.object(), &v))
}

fn eval(file: &Path, context: &str, formula: &str) -> Outcome {
    let loaded = load(file)?;
    let rendered = match &loaded.file.generator {
        Some(spec) if spec.defect.is_none() => {
            let g = generate(spec)?;
            with_generated!(&g, d => eval_in(d, context, formula))?
        }
        _ => eval_in(&loaded.table, context, formula)?,
    };
    println!("{rendered}");
    Ok(true)
}

fn fixture(
    name: &str,
    sizes: &[u32],
    algebra: Option<&str>,
    closure: Option<&str>,
    defect: Option<&str>,
    max_extent: Option<u32>,
    output: Option<&Path>,
) -> Outcome {
    let mut spec = FixtureSpec::new(name).sizes(sizes);
    spec.algebra = algebra.map(Into::into);
    spec.closure = closure.map(Into::into);
    spec.defect = defect.map(Into::into);
    spec.max_extent = max_extent;
    write_out(output, &gen_fixture(&spec)?.to_json())?;
    Ok(true)
}

fn configure_threads() {
    if let Some(n) = std::env::var("DOCTRINA_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check { file, laws, object, scope, common } => check(file, laws, object.as_deref(), scope, common),
        Command::Sheafify { file, object, scope, emit, common } => {
            sheafify(file, object, scope, emit.as_deref(), common)
        }
        Command::PerComplete { file, objects, max_extent, output, report } => {
            per_complete(file, objects, *max_extent, output.as_deref(), *report)
        }
        Command::Eval { file, context, formula } => eval(file, context, formula),
        Command::Fixture { name, sizes, algebra, closure, defect, max_extent, output } => fixture(
            name,
            sizes,
            algebra.as_deref(),
            closure.as_deref(),
            defect.as_deref(),
            *max_extent,
            output.as_deref(),
        ),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
