use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use incon_core::csvio::{load_csv_inferred, relation_to_string, CsvOptions};
use incon_core::datasets::{
    airport_example, airport_like, stock_like, AIRPORT_CONSTRAINTS, STOCK_CONSTRAINTS,
};
use incon_core::harness::{builtin_fixtures, random_dc_instance, random_fd_instance, random_suite, FdParams, Verdict};
use incon_core::maxcut::{brute_force_maxcut, maxcut_instance, predicted_repair_cost, Graph, MAXCUT_CONSTRAINT};
use incon_core::measures::{evaluate_all, MeasureConfig, MeasureKind, UpdateScope, UpdateValues};
use incon_core::noise::{add_noise, NoiseConfig};
use incon_core::repair::{CostModel, RepairScript};
use incon_core::solver::IlpOptions;
use incon_core::constraints::mentioned_relations;
use incon_core::trajectory::{normalize, run_trajectory, to_csv, TrajectoryOptions, TrajectorySource};
use incon_core::violations::McLimits;
use incon_core::{parse_constraints, ConstraintSet, Database};

const GRAMMAR: &str = "\
CONSTRAINT FILES
  One constraint per line; `#` starts a comment.

    FD <Relation>: <A>, <B> -> <C>, <D>
    DC <label>: <t> in <Relation>, <s> in <Relation> | <pred>, <pred>, ...

  A predicate compares two terms with one of  =  !=  <  >  <=  >=
  A term is <var>.<Attribute>, a number, or a double-quoted string.
  The constraint is violated by every choice of distinct facts for the
  variables that makes all predicates true.

    FD Airport: Municipality -> Continent, Country
    DC hl: t in Stock | t.High < t.Low
    DC sd: t in Stock, s in Stock | t.Symbol = s.Symbol, t.Date = s.Date, t.Close != s.Close

DATA FILES
  CSV with a header row, one relation per file. The relation is named after
  the file stem; write `Relation=path.csv` to name it explicitly. With a single
  file whose stem matches no constraint, the one relation the constraints
  mention is used. Reserved columns: `__id` (record id) and `__cost`
  (deletion cost). A header cell `Name:num` or `Name:text` fixes the kind.

REPAIR SCRIPTS
  One operation per line:
    delete 2
    update 2 Continent \"Am\"
    insert Airport \"X1\", \"heliport\", \"Name\", \"NAm\", \"US\", \"Leoti\"

MEASURES
  d mi p mc mcp r rlin rupd viol

EXIT CODES
  0 success, 1 input error, 2 some result capped or inexact";

#[derive(Parser)]
#[command(name = "incon", version, about = "Inconsistency measures for relational data under denial constraints")]
#[command(after_long_help = GRAMMAR)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on enumerated maximal consistent subsets.
    #[arg(long, global = true, default_value_t = McLimits::default().limit)]
    mc_limit: usize,
    /// Branch-and-bound node budget for the repair measure.
    #[arg(long, global = true, default_value_t = IlpOptions::default().node_budget)]
    node_budget: usize,
    /// Use the `__cost` column for deletion costs.
    #[arg(long, global = true, value_enum, default_value_t = Toggle::On)]
    cost_column: Toggle,
    /// Most cell updates tried by `rupd`.
    #[arg(long, global = true, default_value_t = 5)]
    max_updates: usize,
    /// Cells `rupd` may change.
    #[arg(long, global = true, value_enum, default_value_t = Scope::Consequents)]
    update_scope: Scope,
    /// Values `rupd` may write.
    #[arg(long, global = true, value_enum, default_value_t = Values::WithFresh)]
    update_values: Values,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Consequents,
    Constrained,
}

#[derive(Clone, Copy, ValueEnum)]
enum Values {
    ActiveDomain,
    WithFresh,
}

impl Global {
    fn config(&self) -> MeasureConfig {
        MeasureConfig {
            mc: McLimits {
                limit: self.mc_limit,
                ..McLimits::default()
            },
            ilp: IlpOptions {
                node_budget: self.node_budget,
            },
            costs: CostModel {
                use_cost_column: matches!(self.cost_column, Toggle::On),
                ..CostModel::default()
            },
            max_updates: self.max_updates,
            update_scope: match self.update_scope {
                Scope::Consequents => UpdateScope::Consequents,
                Scope::Constrained => UpdateScope::Constrained,
            },
            update_values: match self.update_values {
                Values::ActiveDomain => UpdateValues::ActiveDomain,
                Values::WithFresh => UpdateValues::WithFresh,
            },
            ..MeasureConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate inconsistency measures on a database.
    Measure(MeasureArgs),
    /// Track measures along a noise run or a repair script.
    Trajectory(TrajectoryArgs),
    /// Check the rationality postulates on fixtures or random instances.
    Props(PropsArgs),
    /// Generate instances, noisy data and bundled datasets.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Args)]
struct Input {
    /// CSV files, optionally written `Relation=path.csv`.
    #[arg(required = true)]
    data: Vec<String>,
    /// Constraint file.
    #[arg(long, short)]
    constraints: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    input: Input,
    /// Comma-separated measure tokens.
    #[arg(long, short, value_delimiter = ',', conflicts_with = "all")]
    measures: Vec<MeasureKind>,
    /// Every measure.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    source: SourceArgs,
    /// Chance that a noisy cell becomes a typo.
    #[arg(long, default_value_t = 0.5)]
    typo_prob: f64,
    /// Comma-separated measure tokens.
    #[arg(long, short, value_delimiter = ',', default_value = "d,mi,p,r,rlin")]
    measures: Vec<MeasureKind>,
    /// Record every k-th step (plus the first and last).
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// Divide each measure column by its maximum.
    #[arg(long)]
    normalize: bool,
    /// Append per-measure wall-clock columns.
    #[arg(long)]
    timings: bool,
    /// Write here instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Constraint-oriented noise for this many iterations.
    #[arg(long, value_name = "ITERATIONS")]
    conoise: Option<usize>,
    /// Random cell noise: fraction of cells, Zipf skew.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    rnoise: Option<Vec<f64>>,
    /// Replay a repair script.
    #[arg(long)]
    script: Option<PathBuf>,
}

impl SourceArgs {
    fn noise(&self, seed: u64, typo_prob: f64) -> Option<NoiseConfig> {
        let mut cfg = if let Some(it) = self.conoise {
            NoiseConfig::conoise(it, seed)
        } else {
            let ab = self.rnoise.as_ref()?;
            NoiseConfig::rnoise(ab[0], ab[1], seed)
        };
        cfg.typo_prob = typo_prob;
        Some(cfg)
    }
}

#[derive(Args)]
struct PropsArgs {
    /// Run the built-in fixtures (all, or the named ones).
    #[arg(long, num_args = 0.., value_delimiter = ',', value_name = "NAME")]
    fixtures: Option<Vec<String>>,
    /// Restrict to these measures.
    #[arg(long, short, value_delimiter = ',')]
    measure: Vec<MeasureKind>,
    /// Sample this many random inconsistent instances per measure.
    #[arg(long)]
    random: Option<usize>,
    /// Facts per random instance.
    #[arg(long, default_value_t = 8)]
    rows: usize,
    /// List the fixtures and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Subcommand)]
enum GenKind {
    /// The constraint-repair instance of a graph, with the predicted repair cost.
    Maxcut {
        /// Edge list file (`u v` per line).
        #[arg(long, group = "graph")]
        edges: Option<PathBuf>,
        /// Complete graph on N vertices.
        #[arg(long, group = "graph")]
        complete: Option<usize>,
        /// Path on N vertices.
        #[arg(long, group = "graph")]
        path: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// File name stem for the CSV and constraint files.
        #[arg(long, default_value = "maxcut")]
        name: String,
    },
    /// Dirty a CSV with CONoise or RNoise.
    Noise {
        /// Input CSV, optionally `Relation=path.csv`.
        #[arg(long = "in")]
        input: String,
        #[arg(long, short)]
        constraints: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        /// Chance that a noisy cell becomes a typo.
        #[arg(long, default_value_t = 0.5)]
        typo_prob: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// A small random relation `R` with random constraints.
    RandomInstance {
        #[arg(long, default_value_t = 8)]
        rows: usize,
        /// Values per column.
        #[arg(long, default_value_t = 3)]
        domain: usize,
        /// Only functional dependencies.
        #[arg(long)]
        fd: bool,
        /// Number of FDs with `--fd`.
        #[arg(long, default_value_t = 2)]
        fds: usize,
        /// Number of attributes with `--fd`.
        #[arg(long, default_value_t = 4)]
        attributes: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value = "instance")]
        name: String,
    },
    /// Write a bundled or synthetic dataset with its constraints.
    Dataset {
        #[arg(value_enum)]
        which: Dataset,
        /// Rows for the synthetic datasets.
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    Airport,
    Stock,
    AirportD0,
    AirportD1,
    AirportD2,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Measure(a) => cmd_measure(g, a),
        Command::Trajectory(a) => cmd_trajectory(g, a),
        Command::Props(a) => cmd_props(g, a),
        Command::Gen { kind } => cmd_gen(g, kind),
    }
}

// ---------------------------------------------------------------------------
// Input

fn split_source(arg: &str) -> (Option<&str>, &str) {
    match arg.split_once('=') {
        Some((rel, path)) if !rel.is_empty() && !rel.contains(['/', '\\', '.']) => (Some(rel), path),
        _ => (None, arg),
    }
}

/// Relation names a constraint text refers to, in order of appearance.
fn load_database(specs: &[String], constraint_text: &str, config: &MeasureConfig) -> Result<Database> {
    let mentioned = mentioned_relations(constraint_text);
    let mut db: Option<Database> = None;
    for spec in specs {
        let (rel, path) = split_source(spec);
        let stem = Path::new(path).file_stem().map(|s| s.to_string_lossy().into_owned());
        let relation = match rel {
            Some(r) => Some(r.to_owned()),
            None if specs.len() == 1 && mentioned.len() == 1 && stem.as_deref() != Some(mentioned[0].as_str()) => {
                Some(mentioned[0].clone())
            }
            None => None,
        };
        let options = CsvOptions {
            relation,
            first_id: db.as_ref().map_or(0, |d| d.next_free_id().0),
            ignore_costs: !config.costs.use_cost_column,
        };
        let part = load_csv_inferred(path, &options).with_context(|| format!("reading {path}"))?;
        match db.as_mut() {
            None => db = Some(part),
            Some(d) => d.absorb(&part).with_context(|| format!("adding {path}"))?,
        }
    }
    db.ok_or_else(|| anyhow!("no data files"))
}

fn load_input(input: &Input, config: &MeasureConfig) -> Result<(Database, ConstraintSet)> {
    let text = fs::read_to_string(&input.constraints)
        .with_context(|| format!("reading {}", input.constraints.display()))?;
    let db = load_database(&input.data, &text, config)?;
    let sigma = parse_constraints(&text, db.schema())
        .with_context(|| format!("parsing {}", input.constraints.display()))?;
    Ok((db, sigma))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_measure(g: &Global, a: &MeasureArgs) -> Result<u8> {
    let config = g.config();
    let (db, sigma) = load_input(&a.input, &config)?;
    let kinds: Vec<MeasureKind> = if a.all || a.measures.is_empty() {
        MeasureKind::ALL.to_vec()
    } else {
        a.measures.clone()
    };
    let results = evaluate_all(&kinds, &db, &sigma, &config)?;
    let mut code = 0;
    let mut rows = Vec::new();
    let mut text = format!("{:<7}  {:<10}  exact\n", "measure", "value");
    for (k, r) in kinds.iter().zip(&results) {
        match r {
            Ok(v) => {
                if !v.exact {
                    code = 2;
                }
                let exact = if v.exact { "yes" } else { "no" };
                writeln!(text, "{:<7}  {:<10}  {exact}", k.token(), fmt_value(v.value))?;
                rows.push(serde_json::to_value(v)?);
            }
            Err(e) => {
                code = 2;
                writeln!(text, "{:<7}  {:<10}  error: {e}", k.token(), "-")?;
                rows.push(json!({ "measure": k.token(), "error": e.to_string() }));
            }
        }
    }
    if g.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        print!("{text}");
    }
    Ok(code)
}

fn cmd_trajectory(g: &Global, a: &TrajectoryArgs) -> Result<u8> {
    let config = g.config();
    let (db, sigma) = load_input(&a.input, &config)?;
    let source = match &a.source.script {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TrajectorySource::Script(RepairScript::parse(&text, db.schema())?)
        }
        None => TrajectorySource::Noise(a.source.noise(g.seed, a.typo_prob).expect("one source is required")),
    };
    let options = TrajectoryOptions {
        every: a.every,
        timings: a.timings,
    };
    let mut records = run_trajectory(&db, &sigma, &source, &a.measures, options, &config)?;
    if a.normalize {
        normalize(&mut records);
    }
    let text = if g.json {
        serde_json::to_string_pretty(&records)? + "\n"
    } else {
        to_csv(&records, a.timings)
    };
    write_out(a.out.as_deref(), &text)?;
    let inexact = records.iter().flat_map(|r| &r.values).any(|c| !c.exact);
    Ok(if inexact { 2 } else { 0 })
}

fn cmd_props(g: &Global, a: &PropsArgs) -> Result<u8> {
    let config = g.config();
    let fixtures = builtin_fixtures();
    if a.list {
        let mut out = Vec::new();
        for f in &fixtures {
            if g.json {
                out.push(json!({ "name": f.name, "summary": f.summary }));
            } else {
                println!("{:<20} {}", f.name, f.summary);
            }
        }
        if g.json {
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        return Ok(0);
    }
    if a.fixtures.is_none() && a.random.is_none() {
        bail!("nothing to do: pass --fixtures, --random N or --list");
    }
    let mut ok = true;
    let mut report = serde_json::Map::new();
    if let Some(names) = &a.fixtures {
        for n in names {
            if !fixtures.iter().any(|f| f.name == n) {
                bail!("unknown fixture `{n}` (see --list)");
            }
        }
        let mut out = Vec::new();
        for f in &fixtures {
            if !names.is_empty() && !names.iter().any(|n| n == f.name) {
                continue;
            }
            if !a.measure.is_empty() && !f.measures.iter().any(|m| a.measure.contains(m)) {
                continue;
            }
            let checks = f.check(&config)?;
            let pass = checks.iter().all(|c| c.pass);
            ok &= pass;
            if !g.json {
                println!("{} {}", if pass { "PASS" } else { "FAIL" }, f.name);
                for c in &checks {
                    let mark = if c.pass { "ok " } else { "BAD" };
                    println!("  {mark} {}: expected {}, observed {}", c.what, c.expected, c.observed);
                }
            }
            out.push(json!({ "fixture": f.name, "pass": pass, "checks": checks }));
        }
        report.insert("fixtures".into(), out.into());
    }
    if let Some(n) = a.random {
        let kinds = if a.measure.is_empty() {
            vec![MeasureKind::MinRepairSubsetLin]
        } else {
            a.measure.clone()
        };
        let mut out = Vec::new();
        for k in kinds {
            for s in random_suite(k, n, a.rows, g.seed, &config)? {
                let verdict = match s.report.verdict {
                    Verdict::HoldsOnSample => "holds-on-sample",
                    Verdict::Violated => "violated",
                };
                ok &= s.consistent_with_theory();
                if !g.json {
                    let note = match (s.guaranteed, s.consistent_with_theory()) {
                        (true, true) => "as guaranteed",
                        (true, false) => "CONTRADICTS the guarantee",
                        (false, _) => "not guaranteed",
                    };
                    println!("{k} {}: {verdict} on {} samples ({note})", s.report.postulate, s.report.samples);
                    if let Some(w) = &s.report.witness {
                        println!("  witness {}: values {:?}{}", w.instance, w.values, w.extra.as_deref().map(|e| format!(", {e}")).unwrap_or_default());
                    }
                }
                out.push(json!({
                    "measure": k.token(),
                    "postulate": s.report.postulate.to_string(),
                    "verdict": verdict,
                    "samples": s.report.samples,
                    "guaranteed": s.guaranteed,
                    "witness": s.report.witness,
                }));
            }
        }
        report.insert("random".into(), out.into());
    }
    if g.json {
        report.insert("pass".into(), ok.into());
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(if ok { 0 } else { 1 })
}

fn write_instance(dir: &Path, name: &str, db: &Database, constraints: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let rel = db.schema().relations().next().map(|(r, _)| r.to_owned()).ok_or_else(|| anyhow!("empty schema"))?;
    let csv = dir.join(format!("{name}.csv"));
    let dc = dir.join(format!("{name}.dc"));
    fs::write(&csv, relation_to_string(db, &rel)?).with_context(|| format!("writing {}", csv.display()))?;
    fs::write(&dc, constraints).with_context(|| format!("writing {}", dc.display()))?;
    Ok((csv, dc))
}

fn report_files(g: &Global, files: &(PathBuf, PathBuf), extra: serde_json::Value) -> Result<()> {
    if g.json {
        let mut obj = json!({ "data": files.0.display().to_string(), "constraints": files.1.display().to_string() });
        if let (Some(o), Some(e)) = (obj.as_object_mut(), extra.as_object()) {
            o.extend(e.clone());
        }
        println!("{}", serde_json::to_string_pretty(&obj)?);
    } else {
        println!("wrote {} and {}", files.0.display(), files.1.display());
        if let Some(e) = extra.as_object() {
            for (k, v) in e {
                println!("{k}: {v}");
            }
        }
    }
    Ok(())
}

fn cmd_gen(g: &Global, kind: &GenKind) -> Result<u8> {
    match kind {
        GenKind::Maxcut {
            edges,
            complete,
            path,
            out_dir,
            name,
        } => {
            let graph = match (edges, complete, path) {
                (Some(p), _, _) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Graph::parse(&text)?
                }
                (_, Some(n), _) => Graph::complete(*n),
                (_, _, Some(n)) => Graph::path(*n),
                _ => bail!("give --edges, --complete or --path"),
            };
            if graph.n > 30 {
                bail!("exhaustive cut enumeration is limited to 30 vertices");
            }
            let (db, _, _) = maxcut_instance(&graph)?;
            let files = write_instance(out_dir, name, &db, &format!("{MAXCUT_CONSTRAINT}\n"))?;
            let extra = json!({
                "vertices": graph.n,
                "edges": graph.edges.len(),
                "maxcut": brute_force_maxcut(&graph),
                "predicted_repair_cost": predicted_repair_cost(&graph),
            });
            report_files(g, &files, extra)?;
        }
        GenKind::Noise {
            input,
            constraints,
            source,
            typo_prob,
            out,
        } => {
            if source.script.is_some() {
                bail!("gen noise takes --conoise or --rnoise");
            }
            let config = g.config();
            let text = fs::read_to_string(constraints).with_context(|| format!("reading {}", constraints.display()))?;
            let db = load_database(std::slice::from_ref(input), &text, &config)?;
            let sigma = parse_constraints(&text, db.schema())?;
            let noisy = add_noise(&db, &sigma, &source.noise(g.seed, *typo_prob).expect("noise source"))?;
            let rel = noisy.schema().relations().next().map(|(r, _)| r.to_owned()).expect("one relation");
            let csv = relation_to_string(&noisy, &rel)?;
            match out {
                Some(p) => {
                    fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?;
                    if g.json {
                        println!("{}", json!({ "data": p.display().to_string(), "rows": noisy.len() }));
                    }
                }
                None if g.json => println!("{}", json!({ "relation": rel, "csv": csv })),
                None => print!("{csv}"),
            }
        }
        GenKind::RandomInstance {
            rows,
            domain,
            fd,
            fds,
            attributes,
            out_dir,
            name,
        } => {
            let inst = if *fd {
                let p = FdParams {
                    rows: *rows,
                    attributes: *attributes,
                    domain: *domain,
                    fds: *fds,
                };
                random_fd_instance(p, g.seed)
            } else {
                random_dc_instance(*rows, *domain, g.seed)
            };
            let files = write_instance(out_dir, name, &inst.db, &inst.sigma.to_string())?;
            report_files(g, &files, json!({ "rows": inst.db.len(), "constraints_count": inst.sigma.len() }))?;
        }
        GenKind::Dataset {
            which,
            rows,
            out_dir,
            name,
        } => {
            let (db, constraints, default) = match which {
                Dataset::Airport => (airport_like(*rows, g.seed), AIRPORT_CONSTRAINTS, "airport"),
                Dataset::Stock => (stock_like(*rows, g.seed), STOCK_CONSTRAINTS, "stock"),
                Dataset::AirportD0 => (airport_example(0), AIRPORT_CONSTRAINTS, "airport_d0"),
                Dataset::AirportD1 => (airport_example(1), AIRPORT_CONSTRAINTS, "airport_d1"),
                Dataset::AirportD2 => (airport_example(2), AIRPORT_CONSTRAINTS, "airport_d2"),
            };
            let files = write_instance(out_dir, name.as_deref().unwrap_or(default), &db, constraints)?;
            report_files(g, &files, json!({ "rows": db.len() }))?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_prefixed_paths() {
        assert_eq!(split_source("R=data/x.csv"), (Some("R"), "data/x.csv"));
        assert_eq!(split_source("data/a=b.csv"), (None, "data/a=b.csv"));
        assert_eq!(split_source("x.csv"), (None, "x.csv"));
    }
}
