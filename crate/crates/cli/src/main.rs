//! `netnorm`: simulate, measure, fit, adjust and compare network statistics
//! across network sizes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netnorm_core::adjust::{run_adjustment, AdjustConfig};
use netnorm_core::compare::build_report;
use netnorm_core::error::read_input;
use netnorm_core::experiments::config::KeyValues;
use netnorm_core::experiments::{
    self, graph_id, raw_stat_rows, simulate_dataset, Artifacts, Study, StudyConfig,
};
use netnorm_core::fitting::{fit_family, ComponentFamily};
use netnorm_core::report::{self, RawStatRow};
use netnorm_core::rng::{SeedTree, DEFAULT_SEED};
use netnorm_core::{io, svg, Error, Result, StatisticKind};

#[derive(Debug, Parser)]
#[command(name = "netnorm", version, about)]
struct Cli {
    /// Master seed. Falls back to the config file, then NETNORM_SEED, then a
    /// fixed default.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "netnorm-out")]
    out: PathBuf,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Config override, e.g. `--set adjust.n_s=500`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate graphs from a generative model into edge-list files.
    Simulate {
        /// Model name: a default dataset (erdos_renyi, bernoulli,
        /// offset_bernoulli, markov_ergm, hier_bernoulli, hier_markov) or a
        /// `model.<name>` block of the config.
        #[arg(long)]
        model: String,
        /// Sizes as `20,40` or `20:100:10`.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Compute every statistic for a collection of edge lists.
    Stats {
        collection: PathBuf,
        #[command(flatten)]
        conv: ConventionArgs,
    },
    /// Fit a component family to every graph of a collection.
    Fit {
        collection: PathBuf,
        #[arg(long, default_value = "bernoulli")]
        family: String,
    },
    /// Standardize statistics against a simulated mixture reference.
    Adjust {
        /// Edge-list collection, or a raw_stats.csv (erdos_renyi family only).
        input: PathBuf,
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "n-m")]
        n_m: Option<usize>,
        #[arg(long = "n-s")]
        n_s: Option<usize>,
        /// `balanced` or `strict`.
        #[arg(long)]
        allocation: Option<String>,
        #[command(flatten)]
        conv: ConventionArgs,
    },
    /// KS matrices, Anderson-Darling and size correlation from a stats CSV.
    Compare {
        stats: PathBuf,
        /// Restrict to one dataset of a multi-dataset CSV.
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Run a scripted study.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
        /// Reduced sizes and replicate counts.
        #[arg(long)]
        smoke: bool,
        /// Collection for the user-data study.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StudyKind {
    Direct,
    Adjustment,
    Feature,
    UserData,
}

#[derive(Debug, Args)]
struct ConventionArgs {
    /// `cap_n` or `largest_component`.
    #[arg(long)]
    closeness: Option<String>,
    /// `mean_reachable_pairs` or `sum_over_n_minus_one`.
    #[arg(long)]
    apl: Option<String>,
}

impl ConventionArgs {
    fn apply(&self, kv: &mut KeyValues) {
        if let Some(c) = &self.closeness {
            kv.set("closeness", c.as_str());
        }
        if let Some(a) = &self.apl {
            kv.set("apl", a.as_str());
        }
    }
}

struct Context {
    kv: KeyValues,
    out: PathBuf,
}

impl Context {
    fn config(&self, study: Study) -> Result<StudyConfig> {
        StudyConfig::from_keys(&self.kv, Some(study))
    }
}

fn load_keys(cli: &Cli) -> Result<KeyValues> {
    let mut kv = match &cli.config {
        Some(p) => KeyValues::parse(&read_input(p)?)?,
        None => KeyValues::default(),
    };
    kv.apply_overrides(&cli.overrides)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => match kv.parsed::<u64>("seed")? {
            Some(s) => s,
            None => match std::env::var("NETNORM_SEED") {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("invalid NETNORM_SEED `{v}`")))?,
                Err(_) => DEFAULT_SEED,
            },
        },
    };
    kv.set("seed", seed.to_string());
    Ok(kv)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn simulate(
    ctx: &mut Context,
    model: &str,
    sizes: Option<&str>,
    reps: Option<usize>,
) -> Result<()> {
    if ctx.kv.get("models").is_none() {
        ctx.kv.set("models", model);
    }
    if let Some(s) = sizes {
        ctx.kv.set("sizes", s);
    }
    if let Some(r) = reps {
        ctx.kv.set("replicates", r.to_string());
    }
    let cfg = ctx.config(Study::DirectComparison)?;
    let named = cfg
        .models
        .iter()
        .find(|m| m.name == model)
        .ok_or_else(|| Error::InvalidParameter(format!("model `{model}` is not configured")))?;
    let seeds = SeedTree::new(cfg.master_seed);
    let ds = simulate_dataset(named, &cfg.sizes, cfg.replicates, &seeds);
    let mut art = Artifacts::new(&ctx.out)?;
    for (id, g) in &ds.graphs {
        art.write(&format!("{id}.edges"), io::format_edge_list(g).as_bytes())?;
    }
    let substreams: Vec<serde_json::Value> = cfg
        .sizes
        .iter()
        .flat_map(|&n| {
            (0..cfg.replicates).map(move |r| {
                serde_json::json!({
                    "graph": graph_id(model, n, r),
                    "tag": format!("dataset:{model}"),
                    "indices": [n, r],
                })
            })
        })
        .collect();
    art.finish(
        &serde_json::json!({
            "command": "simulate",
            "master_seed": cfg.master_seed,
            "model": named,
            "sizes": cfg.sizes,
            "replicates": cfg.replicates,
        }),
        serde_json::json!({ "substreams": substreams }),
    )?;
    eprintln!("wrote {} graphs to {}", ds.graphs.len(), ctx.out.display());
    Ok(())
}

fn stats(ctx: &Context, collection: &Path) -> Result<()> {
    let cfg = ctx.config(Study::UserData)?;
    let graphs = io::read_graphs(collection)?;
    let dataset = collection
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let rows = raw_stat_rows(&dataset, &graphs, cfg.conventions);
    let mut buf = Vec::new();
    report::write_raw_stats(&mut buf, &rows)?;
    write_file(&ctx.out.join("raw_stats.csv"), &buf)?;
    eprintln!("{} graphs, {} rows", graphs.len(), rows.len());
    Ok(())
}

fn fit(ctx: &Context, collection: &Path, family: &str) -> Result<()> {
    let cfg = ctx.config(Study::UserData)?;
    let family: ComponentFamily = family.parse()?;
    let graphs = io::read_graphs(collection)?;
    let seeds = SeedTree::new(cfg.master_seed);
    let mut fits = Vec::with_capacity(graphs.len());
    for (i, (id, g)) in graphs.iter().enumerate() {
        let mut rng = seeds.stream("fit", &[i as u64]);
        let params = fit_family(family, g, &cfg.gibbs, &mut rng)
            .map_err(|e| Error::Precondition(format!("{id}: {e}")))?;
        fits.push(serde_json::json!({ "graph_id": id, "n": g.node_count(), "fit": params }));
    }
    let json = serde_json::to_string_pretty(&fits)? + "\n";
    write_file(&ctx.out.join("fits.json"), json.as_bytes())
}

fn observations_from_csv(path: &Path) -> Result<Vec<(String, RawStatRow)>> {
    let rows = report::read_raw_stats(read_input(path)?.as_bytes())
        .map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))?;
    Ok(rows.into_iter().map(|r| (r.dataset.clone(), r)).collect())
}

fn adjust(ctx: &Context, input: &Path) -> Result<()> {
    let cfg = ctx.config(Study::UserData)?;
    let family = match ctx
        .kv
        .get("adjust.family")
        .or(ctx.kv.get("adjust.families"))
    {
        Some(_) if cfg.families.len() != 1 => {
            return Err(Error::InvalidParameter(
                "adjust takes exactly one family".into(),
            ))
        }
        Some(_) => cfg.families[0],
        None => ComponentFamily::Bernoulli,
    };
    let acfg = AdjustConfig {
        family,
        n_m: cfg.n_m,
        n_s: cfg.n_s,
        allocation: cfg.allocation,
        gibbs: cfg.gibbs,
        conventions: cfg.conventions,
    };
    let seeds = SeedTree::new(cfg.master_seed);
    let is_csv = input.extension().is_some_and(|e| e == "csv");

    let (mixture, summaries, adjusted) = if is_csv {
        if family != ComponentFamily::ErdosRenyi {
            return Err(Error::Precondition(format!(
                "a statistics CSV can only be adjusted with erdos_renyi; {} needs the graphs",
                family.name()
            )));
        }
        let rows = observations_from_csv(input)?;
        let obs: Vec<netnorm_core::adjust::Observation> = rows
            .iter()
            .map(|(_, r)| netnorm_core::adjust::Observation {
                graph_id: r.graph_id.clone(),
                n: r.n,
                value: if r.defined {
                    netnorm_core::StatisticValue::defined(r.statistic, r.value)
                } else {
                    netnorm_core::StatisticValue::undefined(r.statistic)
                },
            })
            .collect();
        if obs.is_empty() {
            return Err(Error::Precondition("statistics CSV has no rows".into()));
        }
        let mixture = netnorm_core::adjust::fit_components(&[], &acfg, &seeds)?;
        let sizes: Vec<usize> = obs.iter().map(|o| o.n).collect();
        let summaries = netnorm_core::adjust::build_reference(
            &mixture,
            &sizes,
            acfg.n_s,
            acfg.allocation,
            acfg.conventions,
            &seeds,
        )?;
        let adjusted = netnorm_core::adjust::adjust(&obs, &summaries)?;
        (mixture, summaries, adjusted)
    } else {
        let graphs = io::read_graphs(input)?;
        let o = run_adjustment(&graphs, &acfg, &seeds)?;
        (o.mixture, o.summaries, o.adjusted)
    };

    if family != ComponentFamily::ErdosRenyi {
        let json = serde_json::to_string_pretty(&mixture)? + "\n";
        write_file(&ctx.out.join("components.json"), json.as_bytes())?;
    }
    let mut buf = Vec::new();
    report::write_reference(&mut buf, &summaries)?;
    write_file(&ctx.out.join("reference.csv"), &buf)?;
    buf.clear();
    let dataset = input
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    report::write_adjusted(&mut buf, &dataset, &adjusted)?;
    write_file(&ctx.out.join("adjusted.csv"), &buf)?;
    eprintln!(
        "adjusted {} values against {} reference cells ({})",
        adjusted.len(),
        summaries.len(),
        family.name()
    );
    Ok(())
}

fn compare(ctx: &Context, stats_csv: &Path, dataset: Option<&str>) -> Result<()> {
    let mut rows = report::read_raw_stats(read_input(stats_csv)?.as_bytes())
        .map_err(|e| Error::Precondition(format!("{}: {e}", stats_csv.display())))?;
    let mut names: Vec<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    match dataset {
        Some(d) => rows.retain(|r| r.dataset == d),
        None if names.len() > 1 => {
            return Err(Error::Precondition(format!(
                "CSV holds several datasets ({}); choose one with --dataset",
                names.join(", ")
            )))
        }
        None => {}
    }
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::Precondition(format!(
            "comparison needs at least two size groups, found {}",
            sizes.len()
        )));
    }
    let mut reports = Vec::new();
    for k in StatisticKind::ALL {
        let groups = report::groups_by_size(&rows, k);
        if groups.iter().all(|g| g.values.is_empty() && g.dropped == 0) {
            continue;
        }
        let hist: Vec<(String, Vec<f64>)> = groups
            .iter()
            .map(|g| (format!("n = {}", g.label), g.values.clone()))
            .collect();
        write_file(
            &ctx.out.join(format!("figures/hist_{}.svg", k.name())),
            svg::histograms(k.label(), &hist, 20).as_bytes(),
        )?;
        match build_report(k, &groups) {
            Ok(rep) => {
                let fig = svg::heatmap(
                    &format!("KS: {}", k.label()),
                    &rep.labels,
                    &rep.ks_matrix,
                    1.0,
                );
                write_file(
                    &ctx.out.join(format!("figures/ks_{}.svg", k.name())),
                    fig.as_bytes(),
                )?;
                reports.push(rep);
            }
            Err(e) => eprintln!("skipping {k}: {e}"),
        }
    }
    let mut buf = Vec::new();
    report::write_comparison_reports(&mut buf, &reports)?;
    write_file(&ctx.out.join("report.csv"), &buf)
}

fn study(ctx: &mut Context, kind: StudyKind, smoke: bool, input: Option<&Path>) -> Result<()> {
    let study = match kind {
        StudyKind::Direct => Study::DirectComparison,
        StudyKind::Adjustment => Study::AdjustmentStudy,
        StudyKind::Feature => Study::FeatureDetection,
        StudyKind::UserData => Study::UserData,
    };
    if let Some(p) = input {
        ctx.kv.set("input", p.to_string_lossy());
    }
    if smoke {
        // smoke defaults sit under any explicit keys
        let base = StudyConfig::smoke(study);
        let defaults = [
            (
                "sizes",
                base.sizes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("replicates", base.replicates.to_string()),
            ("adjust.n_m", base.n_m.to_string()),
            ("adjust.n_s", base.n_s.to_string()),
            ("gibbs.sweeps", base.gibbs.sweeps.to_string()),
            ("gibbs.burn_in", base.gibbs.burn_in_sweeps.to_string()),
        ];
        for (k, v) in defaults {
            if ctx.kv.get(k).is_none() {
                ctx.kv.set(k, v);
            }
        }
    }
    let cfg = ctx.config(study)?;
    let out = Some(ctx.out.as_path());
    match study {
        Study::DirectComparison => {
            let res = experiments::run_direct_comparison(&cfg, out)?;
            eprintln!("direct comparison: {} datasets", res.reports.len());
        }
        Study::AdjustmentStudy => {
            let res = experiments::run_adjustment_study(&cfg, out)?;
            eprintln!("adjustment study: {} AD rows", res.rows.len());
        }
        Study::FeatureDetection => {
            let res = experiments::run_feature_detection(&cfg, out)?;
            eprintln!("feature detection: {} KS cells", res.ks.len());
        }
        Study::UserData => {
            let res = experiments::run_user_data(&cfg, out)?;
            eprintln!(
                "recommended component family: {}",
                res.recommendation.name()
            );
        }
    }
    eprintln!("artifacts in {}", ctx.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::InvalidParameter(
                "--workers must be at least 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    }
    let mut ctx = Context {
        kv: load_keys(&cli)?,
        out: cli.out.clone(),
    };
    match &cli.command {
        Command::Simulate {
            model,
            sizes,
            replicates,
        } => simulate(&mut ctx, model, sizes.as_deref(), *replicates),
        Command::Stats { collection, conv } => {
            conv.apply(&mut ctx.kv);
            stats(&ctx, collection)
        }
        Command::Fit { collection, family } => fit(&ctx, collection, family),
        Command::Adjust {
            input,
            family,
            n_m,
            n_s,
            allocation,
            conv,
        } => {
            conv.apply(&mut ctx.kv);
            if let Some(f) = family {
                ctx.kv.set("adjust.family", f.as_str());
            }
            if let Some(v) = n_m {
                ctx.kv.set("adjust.n_m", v.to_string());
            }
            if let Some(v) = n_s {
                ctx.kv.set("adjust.n_s", v.to_string());
            }
            if let Some(a) = allocation {
                ctx.kv.set("adjust.allocation", a.as_str());
            }
            adjust(&ctx, input)
        }
        Command::Compare { stats, dataset } => compare(&ctx, stats, dataset.as_deref()),
        Command::Study { kind, smoke, input } => study(&mut ctx, *kind, *smoke, input.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
