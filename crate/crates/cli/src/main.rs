//! `fbisim`: command-line front end over the `fbisim` library.
//!
//! Exit codes: 0 on success, 1 when a verification or relation check comes
//! out false, 2 on bad input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use fbisim::coloring::{encode_graph, parse_graph, serialize_graph};
use fbisim::featurecore::Product;
use fbisim::ftsmin::{
    check_feature_bisimulation, minimize_with, CoverOptions, FeatureRelation, MinimizeOptions,
    DEFAULT_COVER_BUDGET, DEFAULT_REFINE_BUDGET,
};
use fbisim::gen::{random_fts, random_graph, random_lts, rng, FtsParams, LtsParams};
use fbisim::ltsmin::minimize_lts;
use fbisim::modelio::{
    export_aut, export_dot_fts, export_dot_lts, load_feature_model, load_fts, load_properties,
    parse_aut, parse_relation, serialize_fts,
};
use fbisim::mucheck::bench::{
    bench_records, expected, load_case_study, render_bench, run_bench, BenchOptions,
};
use fbisim::mucheck::{all_products, render_reports, verify, Pipeline, VerifyOptions};
use fbisim::transys::{Fts, Lts};

#[derive(Parser)]
#[command(
    name = "fbisim",
    version,
    about = "Branching feature bisimulation toolset"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the valid products of a feature model.
    Products {
        fm: PathBuf,
        /// Print only the summary line.
        #[arg(long)]
        count: bool,
    },
    /// Parallel composition of two FTS files.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// State and transition counts; several files are composed first.
    Stats {
        #[arg(required = true)]
        fts: Vec<PathBuf>,
    },
    /// The LTS of one product, in Aldebaran format.
    Project {
        fts: PathBuf,
        /// Features of the product, e.g. `{M,O,E}` or `M,O,E`.
        #[arg(short, long)]
        product: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Branching bisimulation quotient of an Aldebaran LTS.
    MinimizeLts {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coherent branching feature bisimulation quotient of an FTS.
    MinimizeFts {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the witness relation, one `s | guard | t` per line.
        #[arg(long)]
        relation: Option<PathBuf>,
        #[command(flatten)]
        min: MinArgs,
    },
    /// Check a relation between two FTS files.
    CheckRelation {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
    },
    /// Check properties on a family, given as one or more FTS files to
    /// compose.
    Verify {
        props: PathBuf,
        #[arg(required = true)]
        fts: Vec<PathBuf>,
        /// Work on the FTS and project at the end (default).
        #[arg(long, conflicts_with = "products")]
        family: bool,
        /// Project first and check each product on its own.
        #[arg(long)]
        products: bool,
        /// Reduce before checking (default).
        #[arg(long, conflicts_with = "no_bisim")]
        bisim: bool,
        #[arg(long)]
        no_bisim: bool,
        /// Actions left visible, comma separated; defaults to the formula's.
        #[arg(long, value_delimiter = ',')]
        keep: Option<Vec<String>>,
        /// Check only the products of this feature model.
        #[arg(long)]
        fm: Option<PathBuf>,
        /// Only the named properties.
        #[arg(long = "property", action = ArgAction::Append)]
        property: Vec<String>,
        #[command(flatten)]
        min: MinArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Map a graph to the FTS whose minimal quotient counts its colors.
    EncodeColoring {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// All properties of the case study in both pipelines, with and
    /// without reduction.
    Bench {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
        /// Per-property keep set, as `name=a,b`.
        #[arg(long, action = ArgAction::Append)]
        keep: Vec<String>,
        #[command(flatten)]
        min: MinArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Convert an `.fts` or `.aut` file.
    Export {
        input: PathBuf,
        #[arg(long, conflicts_with = "dot", required_unless_present = "dot")]
        aut: bool,
        #[arg(long)]
        dot: bool,
        /// Project an FTS on this product first; needed for `--aut`.
        #[arg(short, long)]
        product: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// A random FTS, LTS or graph.
    Gen {
        #[arg(long, value_enum, default_value_t = GenKind::Fts)]
        kind: GenKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        features: usize,
        #[arg(long, default_value_t = 8)]
        products: usize,
        #[arg(long, default_value_t = 0.3)]
        tau: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Fts,
    Lts,
    Graph,
}

#[derive(Args)]
struct MinArgs {
    /// Greedy instead of minimum cover.
    #[arg(long)]
    greedy: bool,
    /// Search nodes for the exact cover.
    #[arg(long, default_value_t = DEFAULT_COVER_BUDGET)]
    budget: u64,
    /// Work allowed for exact semi-partition refinement before falling
    /// back to a partition.
    #[arg(long, default_value_t = DEFAULT_REFINE_BUDGET)]
    refine_budget: u64,
}

impl MinArgs {
    fn options(&self) -> MinimizeOptions {
        MinimizeOptions {
            cover: CoverOptions {
                greedy: self.greedy,
                budget: self.budget,
            },
            refine_budget: self.refine_budget,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// `key=value` records instead of a table.
    #[arg(long)]
    records: bool,
    /// Include wall times; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
}

/// What a successful run decided.
enum Outcome {
    Ok,
    False,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::False) => ExitCode::from(1),
        Err(e) => {
            // some library errors already print their source
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Products { fm, count } => {
            let fm = load_feature_model(&fm)?;
            let products = fm.enumerate_products();
            let mut out = String::new();
            if !count {
                for p in &products {
                    let _ = writeln!(out, "{p}");
                }
            }
            let _ = writeln!(
                out,
                "{} products over {} features",
                products.len(),
                fm.features().len()
            );
            emit(None, &out)?;
        }
        Command::Compose {
            left,
            right,
            output,
        } => {
            let fts = load_fts(&left)?.fts.compose(&load_fts(&right)?.fts)?;
            emit(output.as_deref(), &serialize_fts(&fts))?;
        }
        Command::Stats { fts } => {
            let f = load_composed(&fts)?;
            let out = format!(
                "states: {} transitions: {}\nproducts: {} features: {} actions: {}\n",
                f.num_states(),
                f.num_transitions(),
                f.universe().len(),
                f.universe().features().len(),
                f.alphabet().visible().count(),
            );
            emit(None, &out)?;
        }
        Command::Project {
            fts,
            product,
            output,
        } => {
            let lts = load_fts(&fts)?.fts.project(&parse_product(&product))?;
            emit(output.as_deref(), &export_aut(&lts))?;
        }
        Command::MinimizeLts { input, output } => {
            let lts = load_aut(&input)?;
            let m = minimize_lts(&lts);
            eprintln!(
                "{}/{} -> {}/{}",
                lts.num_states(),
                lts.num_transitions(),
                m.num_states(),
                m.num_transitions()
            );
            emit(output.as_deref(), &export_aut(&m))?;
        }
        Command::MinimizeFts {
            input,
            output,
            relation,
            min,
        } => {
            let fts = load_fts(&input)?.fts;
            let m = minimize_with(&fts, &min.options())?;
            eprintln!(
                "{}/{} -> {}/{} ({:?})",
                fts.num_states(),
                fts.num_transitions(),
                m.fts.num_states(),
                m.fts.num_transitions(),
                m.route
            );
            if let Some(path) = relation {
                emit(Some(&path), &render_relation(&fts, &m.fts, &m.relation))?;
            }
            emit(output.as_deref(), &serialize_fts(&m.fts))?;
        }
        Command::CheckRelation {
            left,
            right,
            relation,
        } => {
            let (l, r) = (load_fts(&left)?.fts, load_fts(&right)?.fts);
            let text = read(&relation)?;
            let triples = parse_relation(&relation.display().to_string(), &text, &l, &r)?;
            let v = check_feature_bisimulation(&l, &r, &FeatureRelation::new(triples))?;
            let yes = |b: bool| if b { "yes" } else { "no" };
            let mut out = format!(
                "branching feature bisimulation: {}\ncoherent: {}\n",
                yes(v.is_bfb),
                yes(v.is_coherent)
            );
            if let Some(c) = &v.counterexample {
                let name = |s: &fbisim::ftsmin::StateRef| match s.side {
                    fbisim::ftsmin::Side::Left => l.state_name(s.index).to_string(),
                    fbisim::ftsmin::Side::Right => r.state_name(s.index).to_string(),
                };
                let _ = write!(
                    out,
                    "counterexample: {:?} {} {} -> {} {} under {}",
                    c.kind,
                    c.from.side,
                    name(&c.from),
                    c.to.side,
                    name(&c.to),
                    l.universe().product(c.product),
                );
                if let Some((a, t)) = &c.transition {
                    let _ = write!(out, ", unmatched {a} to {}", name(t));
                }
                out.push('\n');
            }
            emit(None, &out)?;
            if !v.is_coherent {
                return Ok(Outcome::False);
            }
        }
        Command::Verify {
            props,
            fts,
            family: _,
            products,
            bisim: _,
            no_bisim,
            keep,
            fm,
            property,
            min,
            report,
        } => {
            let f = load_composed(&fts)?;
            let mut properties = load_properties(&props)?;
            if !property.is_empty() {
                for name in &property {
                    if !properties.iter().any(|p| &p.name == name) {
                        bail!("no property named `{name}` in {}", props.display());
                    }
                }
                properties.retain(|p| property.contains(&p.name));
            }
            let indices = match fm {
                Some(path) => {
                    let model = load_feature_model(&path)?;
                    model
                        .enumerate_products()
                        .iter()
                        .map(|p| {
                            f.universe().index_of(p).with_context(|| {
                                format!("product {p} of {} is not in the FTS", path.display())
                            })
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                None => all_products(&f),
            };
            let pipeline = if products {
                Pipeline::Products
            } else {
                Pipeline::Family
            };
            let opts = VerifyOptions {
                use_bisim: !no_bisim,
                keep: keep.map(|k| k.into_iter().collect()),
                minimize: min.options(),
            };
            let mut rows = Vec::new();
            for p in &properties {
                rows.push((
                    p.name.clone(),
                    verify(&f, &indices, &p.formula, pipeline, &opts)?,
                ));
            }
            let out = if report.records {
                rows.iter()
                    .map(|(n, r)| r.record(n, report.timing) + "\n")
                    .collect()
            } else {
                render_reports(&rows, report.timing)
            };
            emit(None, &out)?;
            if rows.iter().any(|(_, r)| !r.aggregate) {
                return Ok(Outcome::False);
            }
        }
        Command::EncodeColoring { graph, output } => {
            let g = parse_graph(&read(&graph)?)
                .with_context(|| format!("reading {}", graph.display()))?;
            emit(output.as_deref(), &serialize_fts(&encode_graph(&g)))?;
        }
        Command::Bench {
            dir,
            keep,
            min,
            report,
        } => {
            let cs = load_case_study(&dir)?;
            let mut keeps = BTreeMap::new();
            for k in &keep {
                let (name, actions) = k
                    .split_once('=')
                    .with_context(|| format!("--keep `{k}` is not of the form name=a,b"))?;
                let set: BTreeSet<String> = actions
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_string)
                    .collect();
                keeps.insert(name.to_string(), set);
            }
            let opts = BenchOptions {
                keep: keeps,
                minimize: min.options(),
            };
            let rows = run_bench(&cs.fts, &cs.properties, &opts)?;
            let mut out = if report.records {
                bench_records(&rows, report.timing)
            } else {
                render_bench(&rows, report.timing)
            };
            let mismatched: Vec<&str> = rows
                .iter()
                .filter(|r| expected(&r.property).is_some_and(|e| e != r.verdicts()))
                .map(|r| r.property.as_str())
                .collect();
            if !report.records {
                if mismatched.is_empty() {
                    out.push_str("all verdicts match the published results\n");
                } else {
                    let _ = writeln!(out, "verdicts differ for: {}", mismatched.join(" "));
                }
            }
            emit(None, &out)?;
            if !mismatched.is_empty() {
                return Ok(Outcome::False);
            }
        }
        Command::Export {
            input,
            aut,
            dot: _,
            product,
            output,
        } => {
            let is_aut = input.extension().is_some_and(|x| x == "aut");
            let text = if is_aut {
                let lts = load_aut(&input)?;
                if aut {
                    export_aut(&lts)
                } else {
                    export_dot_lts(&lts)
                }
            } else {
                let fts = load_fts(&input)?.fts;
                match (product, aut) {
                    (Some(p), true) => export_aut(&fts.project(&parse_product(&p))?),
                    (Some(p), false) => export_dot_lts(&fts.project(&parse_product(&p))?),
                    (None, true) => bail!("--aut of an FTS needs --product"),
                    (None, false) => export_dot_fts(&fts),
                }
            };
            emit(output.as_deref(), &text)?;
        }
        Command::Gen {
            kind,
            seed,
            states,
            features,
            products,
            tau,
            output,
        } => {
            if !(0.0..=1.0).contains(&tau) {
                bail!("--tau must lie in [0, 1]");
            }
            if states == 0 || products == 0 {
                bail!("--states and --products must be positive");
            }
            let mut r = rng(seed);
            let text = match kind {
                GenKind::Fts => serialize_fts(&random_fts(
                    &mut r,
                    &FtsParams {
                        max_states: states,
                        max_features: features,
                        max_products: products,
                        tau_density: tau,
                        ..FtsParams::default()
                    },
                )),
                GenKind::Lts => export_aut(&random_lts(
                    &mut r,
                    &LtsParams {
                        max_states: states,
                        tau_density: tau,
                        ..LtsParams::default()
                    },
                )),
                GenKind::Graph => serialize_graph(&random_graph(&mut r, states, 0.5)),
            };
            emit(output.as_deref(), &text)?;
        }
    }
    Ok(Outcome::Ok)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_aut(path: &Path) -> Result<Lts> {
    Ok(parse_aut(&path.display().to_string(), &read(path)?)?)
}

fn load_composed(paths: &[PathBuf]) -> Result<Fts> {
    let mut acc = load_fts(&paths[0])?.fts;
    for p in &paths[1..] {
        acc = acc.compose(&load_fts(p)?.fts)?;
    }
    Ok(acc)
}

/// `{a,b}`, `a,b` or `a b`; `{}` is the empty product.
fn parse_product(text: &str) -> Product {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    Product::new(
        inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty()),
    )
}

fn render_relation(left: &Fts, right: &Fts, rel: &FeatureRelation) -> String {
    let mut out = String::new();
    for (s, guard, t) in rel.triples() {
        let _ = writeln!(
            out,
            "{} | {} | {}",
            left.state_name(*s),
            left.universe().describe(guard),
            right.state_name(*t)
        );
    }
    out
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
