//! Command-line front end: `fit`, `sparsify`, `simulate`, `gendata`.
//!
//! Exit codes: 0 success, 2 usage, 3 data/validation, 4 numerical.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gdss::criteria::{score_path, select_best, select_heuristic, DfSource, HeuristicStat, IcKind};
use gdss::data::{
    expand_features, hierarchy_from_feature_groups, load_group_spec, load_matrix_csv,
    load_response_csv, standardize, write_group_spec, write_matrix_csv, write_response_csv,
    Dataset, ExpansionRecipe,
};
use gdss::dof::{group_dof_pe, GroupDofTable};
use gdss::error::{Error, Result};
use gdss::gibbs::{posterior_summary, run_chain, McmcConfig, PriorKind};
use gdss::groups::GroupHierarchy;
use gdss::nng::sparsify;
use gdss::report::{path_table_csv, SelectionReport};
use gdss::rng::RngStream;
use gdss::simstudy::{
    run_replications, tally_report, SelectionMethod, SimDesign, StudyConfig, HEURISTIC_LEVEL,
};
use gdss::store::{read_fit, write_fit};

#[derive(Parser)]
#[command(
    name = "gdss",
    version,
    about = "Grouped Bayesian global-local shrinkage regression with decoupled shrinkage and selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the grouped shrinkage model by Gibbs sampling and store the draws.
    Fit {
        /// Design matrix CSV (optional header row).
        #[arg(long)]
        x: PathBuf,
        /// Response CSV (one column).
        #[arg(long)]
        y: PathBuf,
        /// Group-spec CSV with header level,group,column. Without it, every
        /// predictor forms its own singleton group at level 1.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Feature expansion recipe, e.g. poly3:age,dummy:race.
        #[arg(long)]
        expand: Option<String>,
        /// Prior: lasso, horseshoe, or horseshoe+.
        #[arg(long, default_value = "horseshoe")]
        prior: String,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 1_000)]
        burnin: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// 1-based hierarchy level used for selection and the df table.
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Output container path; a .json sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the garrotte path of a stored fit and select sparse models.
    Sparsify {
        /// Fit container written by `fit`.
        #[arg(long)]
        fit: PathBuf,
        /// Comma-separated criteria (bic,aic,aicc,mmlu,varexp,excerr) or
        /// "all".
        #[arg(long, default_value = "all")]
        criteria: String,
        /// Degrees-of-freedom source for the information criteria: yl, pe,
        /// or both.
        #[arg(long, default_value = "pe")]
        df: String,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Write the JSON report here (stdout always gets the table).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the path table CSV (kappa, d_g, support mask, SSE) here.
        #[arg(long)]
        out_path_table: Option<PathBuf>,
    },
    /// Run replications of a named design and tally group identifications.
    Simulate {
        /// Design name: example1 or example2.
        #[arg(long)]
        design: String,
        /// Noise variance (example1 only; defaults to 4).
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value = "horseshoe")]
        prior: String,
        /// Comma-separated selection methods (e.g. mmlu_pe,bic_yl,varexp) or
        /// "all".
        #[arg(long, default_value = "all")]
        criteria: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 1_000)]
        burnin: usize,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Worker threads (defaults to the rayon global pool).
        #[arg(long)]
        threads: Option<usize>,
        /// Write the tally CSV here.
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Generate one dataset from a named design and write it as CSV.
    Gendata {
        #[arg(long)]
        design: String,
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out_x: PathBuf,
        #[arg(long)]
        out_y: PathBuf,
        /// Write the design's group spec here.
        #[arg(long)]
        out_groups: Option<PathBuf>,
        /// Write the generating truth (beta, active groups, SNR) as JSON.
        #[arg(long)]
        out_truth: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { x, y, groups, expand, prior, iters, burnin, seed, level, out } => {
            cmd_fit(x, y, groups, expand, prior, iters, burnin, seed, level, out)
        }
        Command::Sparsify { fit, criteria, df, grid, out, out_path_table } => {
            cmd_sparsify(fit, criteria, df, grid, out, out_path_table)
        }
        Command::Simulate {
            design,
            sigma2,
            reps,
            prior,
            criteria,
            seed,
            iters,
            burnin,
            grid,
            threads,
            out_csv,
        } => cmd_simulate(design, sigma2, reps, prior, criteria, seed, iters, burnin, grid, threads, out_csv),
        Command::Gendata { design, sigma2, seed, out_x, out_y, out_groups, out_truth } => {
            cmd_gendata(design, sigma2, seed, out_x, out_y, out_groups, out_truth)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    x_path: PathBuf,
    y_path: PathBuf,
    groups: Option<PathBuf>,
    expand: Option<String>,
    prior: String,
    iters: usize,
    burnin: usize,
    seed: u64,
    level: usize,
    out: PathBuf,
) -> Result<()> {
    let prior = PriorKind::parse(&prior)?;
    let (x, names) = load_matrix_csv(&x_path)?;
    let y = load_response_csv(&y_path)?;
    let mut dataset = Dataset::new(x, y, names)?;

    if let Some(recipe) = expand {
        dataset = expand_features(&dataset, &ExpansionRecipe::parse(&recipe)?)?;
    }

    let p = dataset.x.ncols();
    let hierarchy = match &groups {
        Some(path) => load_group_spec(path, p)?,
        None if !dataset.groups.is_empty() => hierarchy_from_feature_groups(p, &dataset.groups)?,
        None => {
            // Every predictor its own singleton group.
            GroupHierarchy::new(p, &[(1..=p as u32).collect()])?
        }
    };
    if level == 0 || level > hierarchy.level_count() {
        return Err(Error::Usage(format!(
            "selection level {level} out of range (hierarchy has {} levels)",
            hierarchy.level_count()
        )));
    }

    let std = standardize(&dataset)?;
    let config = McmcConfig { prior, iterations: iters, burn_in: burnin, seed };
    let draws = run_chain(&std.x, &std.y, &hierarchy, &config)?;
    let summary = posterior_summary(&draws)?;
    let df_table = group_dof_pe(&draws, &std.x, &hierarchy, level - 1)?;

    write_fit(
        &out,
        &std.x,
        &std.y,
        &hierarchy,
        &draws,
        &std.names,
        std.standardization.as_ref(),
        level - 1,
        &df_table,
    )?;

    println!(
        "fit: {} prior, {} iterations ({} retained), n = {}, p = {}",
        draws.prior.name(),
        draws.iterations,
        draws.retained(),
        std.x.nrows(),
        p
    );
    println!("sigma2_bar = {:.6}", summary.sigma2_bar);
    println!(
        "largest |beta_bar|: {:.6} (predictor {})",
        summary.beta_bar.amax(),
        summary.beta_bar.iamax() + 1
    );
    println!("df table at level {level}: {:?}", df_table.df.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    println!("wrote {} and {}.json", out.display(), out.display());
    Ok(())
}

fn cmd_sparsify(
    fit: PathBuf,
    criteria: String,
    df: String,
    grid: usize,
    out: Option<PathBuf>,
    out_path_table: Option<PathBuf>,
) -> Result<()> {
    let store = read_fit(&fit)?;
    let level = store.sidecar.selection_level - 1;
    let groups = store.hierarchy.selection_groups(level);
    let summary = posterior_summary(&store.draws)?;

    let path = sparsify(&store.x, &summary.beta_bar, &groups, grid)?;
    let df_sources: Vec<DfSource> = match df.to_ascii_lowercase().as_str() {
        "yl" => vec![DfSource::YuanLin],
        "pe" => vec![DfSource::PosteriorExpected],
        "both" => vec![DfSource::YuanLin, DfSource::PosteriorExpected],
        other => return Err(Error::Usage(format!("unknown df source '{other}'"))),
    };

    let mut ic_kinds: Vec<IcKind> = Vec::new();
    let mut heuristics: Vec<HeuristicStat> = Vec::new();
    if criteria.trim().eq_ignore_ascii_case("all") {
        ic_kinds = IcKind::ALL.to_vec();
        heuristics = vec![HeuristicStat::VarExp, HeuristicStat::ExcErr];
    } else {
        for item in criteria.split(',').filter(|s| !s.trim().is_empty()) {
            match item.trim().to_ascii_lowercase().as_str() {
                "bic" => ic_kinds.push(IcKind::Bic),
                "aic" => ic_kinds.push(IcKind::Aic),
                "aicc" => ic_kinds.push(IcKind::Aicc),
                "mmlu" => ic_kinds.push(IcKind::Mmlu),
                "varexp" => heuristics.push(HeuristicStat::VarExp),
                "excerr" => heuristics.push(HeuristicStat::ExcErr),
                other => return Err(Error::Usage(format!("unknown criterion '{other}'"))),
            }
        }
    }

    let pe_table = GroupDofTable { df: store.sidecar.df_table.clone() };
    let n = store.x.nrows();
    let y_norm2 = store.sidecar.y_norm2;

    let mut report = SelectionReport::new(
        &store.sidecar.prior,
        store.sidecar.seed,
        n,
        store.sidecar.p,
        &path,
    );
    for kind in &ic_kinds {
        for df_source in &df_sources {
            let table = match df_source {
                DfSource::PosteriorExpected => Some(&pe_table),
                DfSource::YuanLin => None,
            };
            let scores = score_path(&path, n, summary.sigma2_bar, y_norm2, *kind, *df_source, table)?;
            report.push_criterion(kind.name(), df_source.name(), select_best(&scores));
        }
    }
    for stat in &heuristics {
        let sel = select_heuristic(
            &path,
            &store.draws,
            &store.x,
            &summary.beta_bar,
            *stat,
            HEURISTIC_LEVEL,
        )?;
        report.push_heuristic(stat.name(), HEURISTIC_LEVEL, &path, &sel);
    }

    print!("{}", report.render());
    if let Some(out) = out {
        std::fs::write(&out, report.to_json()?)?;
        println!("wrote {}", out.display());
    }
    if let Some(out) = out_path_table {
        std::fs::write(&out, path_table_csv(&path)?)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    design: String,
    sigma2: Option<f64>,
    reps: usize,
    prior: String,
    criteria: String,
    seed: u64,
    iters: usize,
    burnin: usize,
    grid: usize,
    threads: Option<usize>,
    out_csv: Option<PathBuf>,
) -> Result<()> {
    let design = SimDesign::by_name(&design, sigma2)?;
    let prior = PriorKind::parse(&prior)?;
    let methods = SelectionMethod::parse_list(&criteria)?;
    let mut cfg = StudyConfig::new(prior, reps, seed);
    cfg.iterations = iters;
    cfg.burn_in = burnin;
    cfg.grid_size = grid;

    let tally = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
            pool.install(|| run_replications(&design, &methods, &cfg))?
        }
        None => run_replications(&design, &methods, &cfg)?,
    };
    let report = tally_report(&tally);
    print!("{}", report.render());
    if let Some(out) = out_csv {
        std::fs::write(&out, report.to_csv())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_gendata(
    design: String,
    sigma2: Option<f64>,
    seed: u64,
    out_x: PathBuf,
    out_y: PathBuf,
    out_groups: Option<PathBuf>,
    out_truth: Option<PathBuf>,
) -> Result<()> {
    let design = SimDesign::by_name(&design, sigma2)?;
    let mut rng = RngStream::new(seed, 0);
    let data = design.generate(&mut rng);

    let names: Vec<String> = (1..=data.x.ncols()).map(|j| format!("x{j}")).collect();
    write_matrix_csv(&out_x, &data.x, &names)?;
    write_response_csv(&out_y, &data.y)?;
    if let Some(path) = &out_groups {
        write_group_spec(path, &data.hierarchy)?;
    }
    if let Some(path) = &out_truth {
        let truth = serde_json::json!({
            "design": design.name,
            "seed": seed,
            "beta": data.beta.iter().copied().collect::<Vec<f64>>(),
            "active_groups": data.active_groups,
            "noise_var": design.noise_var,
            "snr": data.snr,
        });
        std::fs::write(path, serde_json::to_string_pretty(&truth)?)?;
    }
    println!(
        "gendata: {} (n = {}, p = {}, SNR {:.3}) -> {}, {}",
        design.name,
        design.n,
        design.p(),
        data.snr,
        out_x.display(),
        out_y.display()
    );
    if let Some(path) = out_groups {
        println!("wrote {}", path.display());
    }
    if let Some(path) = out_truth {
        println!("wrote {}", path.display());
    }
    Ok(())
}
