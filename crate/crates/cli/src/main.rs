use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quadstab::battery::{self, BatteryConfig, CRITERIA};
use quadstab::checker::{self, reduce_decorated, SubbundleCatalog, Verdict};
use quadstab::generate::{self, trial_rng, Family, GeneratorConfig};
use quadstab::instance::{read_instance, Instance, Loaded};
use quadstab::invariants::{mu_value, p_value, stab_value};
use quadstab::orthogonal;
use quadstab::splitter;
use quadstab::{Execution, Rational};

#[derive(Parser)]
#[command(name = "quadstab", version, about = "Exact semistability checks for quadric and decorated bundles")]
struct Cli {
    /// Emit one JSON object instead of `field: value` lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance file and check every invariant.
    Validate { path: PathBuf },
    /// Semistability verdict of a catalog at a given δ.
    Check {
        path: PathBuf,
        #[arg(long, value_parser = positive_rational)]
        delta: Rational,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
    },
    /// Split a weighted filtration into subbundles and critical pairs.
    Split {
        path: PathBuf,
        #[arg(long, value_parser = positive_rational)]
        delta: Option<Rational>,
    },
    /// Values of δ in (lo, hi) where the verdict can change.
    Walls {
        path: PathBuf,
        #[arg(long, value_parser = positive_rational)]
        lo: Rational,
        #[arg(long, value_parser = positive_rational)]
        hi: Rational,
    },
    /// Emit random valid instances, one JSON document per line.
    Gen(GenArgs),
    /// Run the differential test battery.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Reduced,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Generic,
    Orthogonal,
    Parabolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Filtration,
    Catalog,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "generic")]
    family: FamilyArg,
    /// Only meaningful for the generic family.
    #[arg(long, value_enum, default_value = "catalog")]
    kind: GenKind,
    /// Give orthogonal instances a nonzero twist where possible.
    #[arg(long)]
    generalized: bool,
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 10)]
    max_rank: usize,
    #[arg(long, default_value_t = 1)]
    min_len: usize,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 6)]
    degree_bound: i64,
    #[arg(long, default_value_t = 16)]
    weight_denominator: i64,
    #[arg(long, default_value_t = 8)]
    max_elements: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Trials per randomized suite; defaults to each suite's own count.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Restrict to these criteria (comma separated).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    /// Perturb every suite so that it must fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    let x: Rational = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_positive() {
        Ok(x)
    } else {
        Err(format!("must be strictly positive, got {x}"))
    }
}

/// Ordered `field: value` report, printed as text or as one JSON object.
#[derive(Default)]
struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    fn verdict(&mut self, prefix: &str, v: &Verdict) {
        self.put(&format!("{prefix}class"), v.class.to_string());
        self.put(&format!("{prefix}witness"), v.witness.as_ref().map_or("none".into(), |w| w.to_string()));
        self.put(&format!("{prefix}margin"), v.margin.map_or("none".into(), |m| m.to_string()));
    }

    fn print(&self, json: bool) {
        if json {
            let map: serde_json::Map<String, Value> = self.fields.iter().cloned().collect();
            println!("{}", Value::Object(map));
            return;
        }
        for (k, v) in &self.fields {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join("; "),
                other => other.to_string(),
            };
            println!("{k}: {text}");
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Exit statuses: 0 success, 1 semantic failure, 2 syntax or usage.
struct Failure {
    code: u8,
    report: Report,
}

fn fail(code: u8, status: &str, msg: impl ToString) -> Failure {
    let mut report = Report::default();
    report.put("status", status).put("error", msg.to_string());
    Failure { code, report }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(2, "io_error", format!("{}: {e}", path.display())))?;
    read_instance(&text).map_err(|e| fail(2, "parse_error", e))?.map_err(|e| fail(1, "invalid", e))
}

fn kind_name(inst: &Instance) -> &'static str {
    match inst {
        Instance::Filtration(..) => "filtration",
        Instance::Catalog(_) => "catalog",
        Instance::Orthogonal(_) => "orthogonal",
        Instance::Parabolic(_) => "parabolic",
    }
}

fn semantic(e: quadstab::Error) -> Failure {
    fail(1, "error", e)
}

fn cmd_validate(path: &Path) -> Result<Report, Failure> {
    let loaded = load(path)?;
    let mut r = Report::default();
    r.put("status", "valid").put("kind", kind_name(&loaded.instance));
    match &loaded.instance {
        Instance::Filtration(f, _) => {
            r.put("rank", f.ambient_rank).put("length", f.len());
        }
        _ => {
            let cat = loaded.verdict_catalog().expect("catalog kinds");
            r.put("rank", cat.ambient_rank).put("elements", cat.len());
        }
    }
    Ok(r)
}

fn cmd_check(path: &Path, delta: Rational, mode: Mode) -> Result<Report, Failure> {
    let loaded = load(path)?;
    let mut r = Report::default();
    r.put("kind", kind_name(&loaded.instance)).put("delta", delta.to_string());
    if let Instance::Filtration(f, m) = &loaded.instance {
        // A single filtration has no verdict of its own; report its value.
        let stab = stab_value(f, m, delta).map_err(semantic)?;
        r.put("stab", stab.to_string()).put("class", checker::StabilityClass::from_margin(stab).to_string());
        return Ok(r);
    }
    let cat = loaded.verdict_catalog().expect("catalog kinds");
    let full = || checker::verdict_full(&cat, delta).map_err(semantic);
    let reduced = || checker::verdict_reduced(&cat, delta).map_err(semantic);
    let mut agree = true;
    let headline = match mode {
        Mode::Full => full()?,
        Mode::Reduced => reduced()?,
        Mode::Both => {
            let (f, red) = (full()?, reduced()?);
            r.verdict("full_", &f);
            r.verdict("reduced_", &red);
            agree = f.class == red.class;
            red
        }
    };
    if let Instance::Orthogonal(o) = &loaded.instance {
        let ram = orthogonal::ramanan_verdict(o).map_err(semantic)?;
        r.verdict("ramanan_", &ram);
        agree &= ram.class == headline.class;
    }
    r.verdict("", &headline);
    if let Some(dec) = &loaded.decorated {
        r.put("twist_degree", reduce_decorated(dec, cat.ambient_degree));
    }
    if mode == Mode::Both || matches!(loaded.instance, Instance::Orthogonal(_)) {
        r.put("agree", agree);
    }
    if agree {
        Ok(r)
    } else {
        r.put("status", "disagreement");
        Err(Failure { code: 1, report: r })
    }
}

fn cmd_split(path: &Path, delta: Option<Rational>) -> Result<Report, Failure> {
    let loaded = load(path)?;
    let Instance::Filtration(f, m) = &loaded.instance else {
        return Err(fail(1, "error", format!("split needs a filtration, got a {}", kind_name(&loaded.instance))));
    };
    let dec = splitter::split_full(f, m).map_err(semantic)?;
    let pieces: Vec<(quadstab::WeightedFiltration, quadstab::VanishingPattern)> =
        dec.pieces.iter().map(|p| (p.filtration(f), p.pattern(m))).collect();
    let sum = |g: &dyn Fn(&quadstab::WeightedFiltration, &quadstab::VanishingPattern) -> quadstab::Result<Rational>| {
        pieces.iter().map(|(pf, pm)| g(pf, pm)).sum::<quadstab::Result<Rational>>()
    };
    let mut r = Report::default();
    r.put("length", f.len());
    r.put("trace", dec.trace.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    r.put("pieces", dec.pieces.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    r.put("p", p_value(f).map_err(semantic)?.to_string());
    r.put("p_pieces", sum(&|pf, _| p_value(pf)).map_err(semantic)?.to_string());
    r.put("mu", mu_value(f, m).map_err(semantic)?.to_string());
    r.put("mu_pieces", sum(&|pf, pm| mu_value(pf, pm)).map_err(semantic)?.to_string());
    if let Some(delta) = delta {
        r.put("delta", delta.to_string());
        r.put("stab", stab_value(f, m, delta).map_err(semantic)?.to_string());
        r.put("stab_pieces", sum(&|pf, pm| stab_value(pf, pm, delta)).map_err(semantic)?.to_string());
    }
    let report = splitter::verify_decomposition(f, m, &dec);
    if report.is_valid() {
        r.put("conservation", "exact");
        Ok(r)
    } else {
        r.put("conservation", "broken").put("violations", report.violations.clone());
        Err(Failure { code: 1, report: r })
    }
}

fn cmd_walls(path: &Path, lo: Rational, hi: Rational) -> Result<Report, Failure> {
    if lo >= hi {
        return Err(fail(2, "usage_error", format!("need lo < hi, got lo={lo}, hi={hi}")));
    }
    let loaded = load(path)?;
    let cat: SubbundleCatalog =
        loaded.verdict_catalog().ok_or_else(|| fail(1, "error", "walls need a catalog, got a filtration"))?;
    let walls = checker::delta_walls(&cat, lo, hi).map_err(semantic)?;
    let mut r = Report::default();
    r.put("lo", lo.to_string()).put("hi", hi.to_string()).put("count", walls.len());
    r.put("walls", walls.iter().map(|w| w.to_string()).collect::<Vec<_>>());
    Ok(r)
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let family = match a.family {
        FamilyArg::Generic => Family::Generic,
        FamilyArg::Orthogonal => Family::Orthogonal,
        FamilyArg::Parabolic => Family::Parabolic,
    };
    let cfg = GeneratorConfig {
        seed: a.seed,
        max_rank: a.max_rank,
        min_len: a.min_len,
        max_len: a.max_len,
        degree_bound: a.degree_bound,
        weight_denominator: a.weight_denominator,
        max_elements: a.max_elements,
        family,
    };
    cfg.check().map_err(semantic)?;
    for i in 0..a.count {
        let rng = &mut trial_rng(cfg.seed, i);
        let instance = match (family, a.kind) {
            (Family::Generic, GenKind::Filtration) => {
                let (f, m) = generate::random_filtration(rng, &cfg).map_err(semantic)?;
                Instance::Filtration(f, m)
            }
            (Family::Generic, GenKind::Catalog) => {
                Instance::Catalog(generate::random_catalog(rng, &cfg).map_err(semantic)?)
            }
            (Family::Orthogonal, _) => {
                Instance::Orthogonal(generate::orthogonal_catalog(rng, &cfg, a.generalized).map_err(semantic)?)
            }
            (Family::Parabolic, _) => Instance::Parabolic(generate::parabolic_catalog(rng, &cfg).map_err(semantic)?),
        };
        let doc: Value = serde_json::from_str(&Loaded::new(instance).to_json()).expect("round trip");
        println!("{doc}");
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs, json: bool) -> Result<(), Failure> {
    let criteria: Vec<u8> =
        if a.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.criteria.clone() };
    if let Some(bad) = criteria.iter().find(|c| !(1..=10).contains(*c)) {
        return Err(fail(2, "usage_error", format!("no criterion {bad}")));
    }
    let exec = if a.jobs > 1 { Execution::Parallel } else { Execution::Sequential };
    let cfg = BatteryConfig { seed: a.seed, trials: a.trials, exec, fault: a.inject_fault };
    if a.trials == Some(0) {
        eprintln!("warning: zero trials requested; every suite passes vacuously");
    }
    let reports = quadstab::par::with_jobs(a.jobs, || {
        criteria.iter().map(|&c| battery::run_suite(c, &cfg)).collect::<quadstab::Result<Vec<_>>>()
    })
    .map_err(semantic)?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if json {
        println!("{}", json!({ "seed": a.seed, "failed": failed, "suites": reports }));
    } else {
        for r in &reports {
            println!("{}", battery::summary_line(r));
            for w in &r.witnesses {
                println!("  witness: {w}");
            }
        }
        println!("status: {}", if failed == 0 { "pass" } else { "fail" });
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure { code: 1, report: Report::default() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { path } => cmd_validate(path).map(Some),
        Command::Check { path, delta, mode } => cmd_check(path, *delta, *mode).map(Some),
        Command::Split { path, delta } => cmd_split(path, *delta).map(Some),
        Command::Walls { path, lo, hi } => cmd_walls(path, *lo, *hi).map(Some),
        Command::Gen(a) => cmd_gen(a).map(|_| None),
        Command::Oracle(a) => cmd_oracle(a, cli.json).map(|_| None),
    };
    match outcome {
        Ok(report) => {
            if let Some(r) = report {
                r.print(cli.json);
            }
            ExitCode::SUCCESS
        }
        Err(Failure { code, report }) => {
            report.print(cli.json);
            ExitCode::from(code)
        }
    }
}
