//! `dglr`: build dgl towers from digraphs and verify their lemma suites.

mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dglr_core::cache::{content_key, Cache};
use dglr_core::dgl::{build_l1, build_tower, default_prime, homology_report, DglPresentation, Scale, TowerOptions, DEFAULT_BUDGET};
use dglr_core::digraph::{realize_group, Digraph, GroupTable};
use dglr_core::frobenius::{Bound, FrobeniusInstance};
use dglr_core::homotopy::cylinder;
use dglr_core::verify::{recheck_report, run_suites, Status, SuiteId, SuiteParams, VerificationReport, SCHEMA};
use dglr_core::LocalPrime;

use error::CliError;

#[derive(Parser)]
#[command(name = "dglr", version, about = "Exact dgl towers from digraphs, with verifiable lemma suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonnegative integer solutions of a1*d1 + ... + ak*dk = target.
    Frobenius(FrobeniusArgs),
    /// Run lemma suites and print one JSON report per line.
    Verify(VerifyArgs),
    /// Write the presentation of L(G,level).
    Build(BuildArgs),
    /// A digraph whose automorphism group is the given group.
    Realize(RealizeArgs),
    /// Linear part and generator-module homology ranks.
    Homology(HomologyArgs),
    /// Square-zero checks on the cylinder and e^θ on cycle generators.
    CylinderCheck(DglArgs),
}

#[derive(Args)]
struct FrobeniusArgs {
    /// Comma-separated positive denominations.
    #[arg(long, value_delimiter = ',', required = true)]
    denoms: Vec<u64>,
    #[arg(long)]
    target: u64,
    /// `i:c` requires a_i >= c (1-based i); repeatable.
    #[arg(long = "min")]
    at_least: Vec<String>,
    /// `i:c` requires a_i <= c (1-based i); repeatable.
    #[arg(long = "max")]
    at_most: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Paper,
    Synthetic,
}

#[derive(Args, Clone)]
struct DglArgs {
    /// Digraph file: JSON `{"vertices": [...], "edges": [[v,u],...]}` or one `v u` pair per line.
    /// Defaults to the two-cycle.
    #[arg(long)]
    digraph: Option<PathBuf>,
    /// Odd n >= 7 fixing the generator degrees at paper scale.
    #[arg(long, default_value_t = 7)]
    n: u32,
    /// Prime for Z_(p); defaults to the smallest admissible prime for n.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, value_enum, default_value = "paper")]
    scale: ScaleArg,
    /// Level of the tower, 1 to 4.
    #[arg(long, default_value_t = 1)]
    level: u8,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite ids or aliases, comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    lemma: String,
    #[command(flatten)]
    dgl: DglArgs,
    /// Largest block of Lie basis columns a single decision may use.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Re-verify the reports in a file (one JSON report per line) from their witnesses.
    #[arg(long)]
    recheck: Option<PathBuf>,
    /// Include wall-clock timings; bypasses the cache.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    dgl: DglArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct RealizeArgs {
    /// JSON `{"elements": [...], "product": [[...]]}`.
    #[arg(long, conflicts_with = "cyclic", required_unless_present = "cyclic")]
    group_table: Option<PathBuf>,
    #[arg(long)]
    cyclic: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HomologyArgs {
    #[command(flatten)]
    dgl: DglArgs,
    /// Degrees to report; defaults to every generator degree.
    #[arg(long, value_delimiter = ',')]
    degrees: Vec<u32>,
}

/// Parameters resolved from the shared flags, with the digraph already validated by building L(G,1).
struct Setup {
    digraph: Digraph,
    scale: Scale,
    prime: LocalPrime,
    level: u8,
}

impl DglArgs {
    fn resolve(&self) -> Result<Setup, CliError> {
        let digraph = match &self.digraph {
            Some(path) => Digraph::parse(&read(path)?).map_err(|e| CliError::Input(e.to_string()))?,
            None => Digraph::two_cycle(),
        };
        let scale = match self.scale {
            ScaleArg::Paper => Scale::Paper { n: self.n },
            ScaleArg::Synthetic => Scale::Synthetic,
        };
        let n = match scale {
            Scale::Paper { n } => n,
            _ => 7,
        };
        let prime = match self.p {
            Some(p) => LocalPrime::new(p).map_err(|e| CliError::Usage(e.to_string()))?,
            None => default_prime(n),
        };
        if !(1..=4).contains(&self.level) {
            return Err(CliError::Usage(format!("level {} is not in 1..4", self.level)));
        }
        build_l1(&digraph, scale, prime)?;
        Ok(Setup { digraph, scale, prime, level: self.level })
    }
}

impl Setup {
    fn presentation(&self, budget: u128) -> Result<DglPresentation, CliError> {
        if self.level == 1 {
            return Ok(build_l1(&self.digraph, self.scale, self.prime)?);
        }
        let mut options = TowerOptions { top: self.level, ..TowerOptions::default() };
        options.cycles = options.cycles.with_budget(budget);
        Ok(build_tower(&self.digraph, self.scale, self.prime, &options)?.top().clone())
    }

    fn key(&self, kind: &str, extra: &[&str]) -> String {
        let scale = serde_json::to_string(&self.scale).expect("scale serializes");
        let p = self.prime.get().to_string();
        let level = self.level.to_string();
        let version = env!("CARGO_PKG_VERSION");
        let schema = SCHEMA.to_string();
        let hash = self.digraph.content_hash();
        let mut parts = vec![kind, version, schema.as_str(), hash.as_str(), scale.as_str(), p.as_str(), level.as_str()];
        parts.extend_from_slice(extra);
        content_key(&parts)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One line on stdout; a closed pipe ends output quietly.
pub(crate) fn say(line: &dyn std::fmt::Display) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            say(&text);
            Ok(())
        }
    }
}

fn parse_bound(text: &str, make: fn(u64) -> Bound) -> Result<(usize, Bound), CliError> {
    let bad = || CliError::Usage(format!("expected i:c with 1-based index i, got {text:?}"));
    let (i, c) = text.split_once(':').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let c: u64 = c.trim().parse().map_err(|_| bad())?;
    if i == 0 {
        return Err(bad());
    }
    Ok((i - 1, make(c)))
}

fn cmd_frobenius(args: &FrobeniusArgs) -> Result<Status, CliError> {
    let mut inst = FrobeniusInstance::new(args.denoms.clone(), args.target).map_err(|e| CliError::Usage(e.to_string()))?;
    let bounds = args.at_least.iter().map(|s| parse_bound(s, Bound::AtLeast)).chain(args.at_most.iter().map(|s| parse_bound(s, Bound::AtMost)));
    let mut constraints = Vec::new();
    for b in bounds {
        let (index, bound) = b?;
        inst = inst.with_constraint(index, bound).map_err(|e| CliError::Usage(e.to_string()))?;
        constraints.push(json!({ "index": index + 1, "bound": bound }));
    }
    let solutions = inst.solve().solutions;
    let out = json!({
        "schema": SCHEMA,
        "denominations": args.denoms,
        "target": args.target,
        "constraints": constraints,
        "count": solutions.len(),
        "solutions": solutions,
    });
    say(&out);
    Ok(Status::Pass)
}

fn parse_ids(text: &str) -> Result<Vec<SuiteId>, CliError> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(SuiteId::ALL.to_vec());
    }
    let mut ids: Vec<SuiteId> = text.split(',').map(|s| s.trim().parse::<SuiteId>().map_err(|e| CliError::Usage(e.to_string()))).collect::<Result<_, _>>()?;
    ids.sort();
    ids.dedup();
    Ok(ids)
}

fn cmd_verify(args: &VerifyArgs, cache: Option<&Cache>) -> Result<Status, CliError> {
    if let Some(path) = &args.recheck {
        return recheck_file(path);
    }
    let ids = parse_ids(&args.lemma)?;
    let setup = args.dgl.resolve()?;
    let params = SuiteParams::new(setup.digraph.clone(), setup.scale).with_prime(setup.prime).with_budget(args.budget).with_timing(args.timing);
    let cache = cache.filter(|_| !args.timing);
    let budget = args.budget.to_string();
    let seed = params.seed.to_string();
    let keys: Vec<String> = ids.iter().map(|id| setup.key("verify", &[id.as_str(), &budget, &seed])).collect();
    let cached: Vec<Option<String>> = keys.iter().map(|k| cache.and_then(|c| c.get("reports", k))).collect();
    let missing: Vec<SuiteId> = ids.iter().zip(&cached).filter(|(_, c)| c.is_none()).map(|(id, _)| *id).collect();
    let mut fresh = run_suites(&missing, &params).into_iter();
    let mut statuses = Vec::new();
    for (key, hit) in keys.iter().zip(cached) {
        let line = match hit.and_then(|text| serde_json::from_str::<VerificationReport>(&text).ok().map(|r| (r, text))) {
            Some((report, text)) => {
                statuses.push(report.status);
                text
            }
            None => {
                let report = fresh.next().expect("one fresh report per missing suite");
                statuses.push(report.status);
                let text = report.to_json();
                if let Some(c) = cache {
                    let _ = c.put("reports", key, &text);
                }
                text
            }
        };
        say(&line);
    }
    Ok(Status::aggregate(statuses))
}

fn recheck_file(path: &Path) -> Result<Status, CliError> {
    let text = read(path)?;
    let mut statuses = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let report: VerificationReport = serde_json::from_str(line).map_err(|e| CliError::Input(format!("report: {e}")))?;
        let (ok, note) = match recheck_report(&report) {
            Ok(ok) => (ok, None),
            Err(e) => (false, Some(e.to_string())),
        };
        statuses.push(if ok { Status::Pass } else { Status::Fail });
        let mut out = json!({ "lemma_id": report.lemma_id, "status": report.status, "recheck": if ok { "pass" } else { "fail" } });
        if let Some(n) = note {
            out["note"] = Value::String(n);
        }
        say(&out);
    }
    if statuses.is_empty() {
        return Err(CliError::Input("no reports in file".into()));
    }
    Ok(Status::aggregate(statuses))
}

fn cmd_build(args: &BuildArgs, cache: Option<&Cache>) -> Result<Status, CliError> {
    let setup = args.dgl.resolve()?;
    let key = setup.key("build", &[]);
    let text = match cache.and_then(|c| c.get("presentations", &key)) {
        Some(t) => t,
        None => {
            let t = setup.presentation(args.budget)?.to_json();
            if let Some(c) = cache {
                let _ = c.put("presentations", &key, &t);
            }
            t
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(Status::Pass)
}

fn cmd_realize(args: &RealizeArgs) -> Result<Status, CliError> {
    let group = match (&args.group_table, args.cyclic) {
        (Some(path), _) => GroupTable::parse_json(&read(path)?).map_err(|e| CliError::Input(e.to_string()))?,
        (None, Some(0)) => return Err(CliError::Usage("--cyclic needs k >= 1".into())),
        (None, Some(k)) => GroupTable::cyclic(k),
        (None, None) => return Err(CliError::Usage("give --group-table or --cyclic".into())),
    };
    let r = realize_group(&group, None).map_err(|e| CliError::Input(e.to_string()))?;
    let auts = r.digraph.automorphism_group_bounded(usize::MAX).map_err(|e| CliError::Input(e.to_string()))?;
    let out = json!({
        "schema": SCHEMA,
        "digraph": r.digraph,
        "digraph_hash": r.digraph.content_hash(),
        "group_order": group.order(),
        "generators": r.generators,
        "certificate": {
            "automorphism_order": r.automorphism_order,
            "automorphisms": auts.iter().map(|s| s.images().to_vec()).collect::<Vec<_>>(),
            "isomorphism_checked": r.isomorphism_checked,
        },
    });
    emit(args.out.as_deref(), &out.to_string())?;
    Ok(Status::Pass)
}

fn cmd_homology(args: &HomologyArgs) -> Result<Status, CliError> {
    let setup = args.dgl.resolve()?;
    let pres = setup.presentation(DEFAULT_BUDGET)?;
    let degrees: Vec<u32> = if args.degrees.is_empty() { pres.generator_count_by_degree().keys().copied().collect() } else { args.degrees.clone() };
    let report = homology_report(&pres, &degrees)?;
    let out = json!({ "schema": SCHEMA, "level": setup.level, "report": report });
    say(&out);
    Ok(Status::Pass)
}

fn cmd_cylinder_check(args: &DglArgs) -> Result<Status, CliError> {
    let setup = args.resolve()?;
    let pres = Arc::new(setup.presentation(DEFAULT_BUDGET)?);
    let cyl = cylinder(pres.clone()).map_err(|e| CliError::Input(e.to_string()))?;
    let squares = cyl.check_squares();
    let ca = cyl.presentation().alphabet();
    let mut cycles = 0;
    let mut exponential_ok = true;
    for w in pres.letters().filter(|&l| pres.differential(l).is_formal_zero()) {
        cycles += 1;
        let want = dglr_core::LieExpression::leaf(w).plus(dglr_core::LieExpression::leaf(cyl.copy(w)));
        exponential_ok &= match cyl.e_theta(w) {
            Ok(img) => img.expand::<dglr_core::PLocalRational>(ca).ok() == want.expand::<dglr_core::PLocalRational>(ca).ok(),
            Err(_) => false,
        };
    }
    let ok = squares.is_ok() && exponential_ok;
    let mut out = json!({
        "schema": SCHEMA,
        "level": setup.level,
        "generators": ca.len(),
        "squares_zero": squares.is_ok(),
        "cycle_generators": cycles,
        "exponential_on_cycles": exponential_ok,
        "status": if ok { Status::Pass } else { Status::Fail },
    });
    if let Err(e) = squares {
        out["note"] = Value::String(e.to_string());
    }
    say(&out);
    Ok(if ok { Status::Pass } else { Status::Fail })
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("DGLR_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("DGLR_THREADS={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status, CliError> {
    configure_threads()?;
    let cache = Cache::from_env();
    match &cli.command {
        Command::Frobenius(a) => cmd_frobenius(a),
        Command::Verify(a) => cmd_verify(a, cache.as_ref()),
        Command::Build(a) => cmd_build(a, cache.as_ref()),
        Command::Realize(a) => cmd_realize(a),
        Command::Homology(a) => cmd_homology(a),
        Command::CylinderCheck(a) => cmd_cylinder_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::Usage(e.render().to_string().trim().to_string()).report(),
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => e.report(),
    }
}
