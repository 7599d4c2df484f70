//! Subcommand definitions and dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use trendcap_core::correlate::CorrelationResult;
use trendcap_core::ingest::{load_corpus, write_corpus};
use trendcap_core::synth::{generate_corpus, write_truth, CorpusConfig, TRUTH_FILE};

use crate::config::RunConfig;
use crate::output::{self, OutputSet, SeriesRow, CORRELATIONS_FILE, SERIES_DIR};
use crate::pipeline::{self, Overlay, PipelineError, Result, Stage};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "trendcap", version, about = "Search-interest vs. valuation trajectory analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted groups and lags, plus truth.csv.
    Synth(SynthArgs),
    /// Parse a corpus and report counts and warnings.
    Validate(RunArgs),
    /// Score search-interest quality; writes quality.csv.
    ScoreQuality(RunArgs),
    /// Stitch, filter and align; writes series/<id>.csv and stitch_report.json.
    Preprocess(RunArgs),
    /// Correlate interest and valuation; writes correlations.csv.
    Correlate(RunArgs),
    /// Group, dimension, industry and growth-rate reports from correlations.csv.
    PortfolioReport(ReportArgs),
    /// Necessity, truth table and minimized solutions from correlations.csv.
    Fsqca(QcaArgs),
    /// Render `histogram` or a company overlay as SVG.
    Plot(PlotArgs),
    /// Full pipeline with a manifest.
    Run(FullArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus directory (companies.csv, valuations.csv, gt_metadata.csv, gt/).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub analysis_end: Option<NaiveDate>,
    #[arg(long)]
    pub min_rounds: Option<usize>,
    /// Keep companies with a bad quality verdict.
    #[arg(long)]
    pub no_quality_gate: bool,
    #[arg(long)]
    pub alpha_interest: Option<f64>,
    #[arg(long)]
    pub alpha_valuation_raw: Option<f64>,
    #[arg(long)]
    pub alpha_valuation_weekly: Option<f64>,
    #[arg(long)]
    pub strong_tau: Option<f64>,
    #[arg(long)]
    pub min_improvement: Option<f64>,
    #[arg(long)]
    pub significance_alpha: Option<f64>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Leave the generation timestamp out of SVG files.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct QcaFlags {
    #[arg(long)]
    pub cons_suff: Option<f64>,
    #[arg(long)]
    pub freq: Option<usize>,
    #[arg(long)]
    pub cons_nec: Option<f64>,
    #[arg(long)]
    pub ron: Option<f64>,
    /// Full non-membership, crossover and full membership tau.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub anchors: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory holding correlations.csv and series/ (defaults to --out).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QcaArgs {
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub qca: QcaFlags,
}

#[derive(Debug, Args)]
pub struct FullArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub qca: QcaFlags,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// `histogram` or a company id.
    pub target: String,
    /// Directory holding correlations.csv and series/.
    #[arg(long)]
    pub input: PathBuf,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write the corpus into.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub ventures: usize,
    /// Noise standard deviation as a fraction of the latent range.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Ventures built to fail the quality gate.
    #[arg(long, default_value_t = 0)]
    pub poor_quality: usize,
    #[arg(long, default_value_t = 520)]
    pub weeks: usize,
    #[arg(long, default_value_t = 60)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub lag_min: i64,
    #[arg(long, default_value_t = 120)]
    pub lag_max: i64,
    #[arg(long, default_value_t = 0.5)]
    pub unicorn_share: f64,
}

impl RunArgs {
    /// Configuration file (or defaults) with flag overrides applied.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(PipelineError::Input)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.corpus {
            cfg.corpus = Some(p.clone());
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        if let Some(d) = self.analysis_end {
            cfg.analysis_end = d;
        }
        if let Some(n) = self.min_rounds {
            cfg.min_rounds = n;
        }
        if self.no_quality_gate {
            cfg.quality_gate = false;
        }
        let f = &mut cfg.filter;
        f.alpha_interest = self.alpha_interest.unwrap_or(f.alpha_interest);
        f.alpha_valuation_raw = self.alpha_valuation_raw.unwrap_or(f.alpha_valuation_raw);
        f.alpha_valuation_weekly = self.alpha_valuation_weekly.unwrap_or(f.alpha_valuation_weekly);
        let t = &mut cfg.thresholds;
        t.strong_tau = self.strong_tau.unwrap_or(t.strong_tau);
        t.min_improvement = self.min_improvement.unwrap_or(t.min_improvement);
        t.significance_alpha = self.significance_alpha.unwrap_or(t.significance_alpha);
        cfg.histogram_bin_width = self.bin_width.unwrap_or(cfg.histogram_bin_width);
        cfg.reproducible |= self.reproducible;
        cfg.validate().map_err(PipelineError::Input)?;
        Ok(cfg)
    }
}

impl QcaFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let q = &mut cfg.qca;
        q.cons_suff = self.cons_suff.unwrap_or(q.cons_suff);
        q.freq = self.freq.unwrap_or(q.freq);
        q.cons_nec = self.cons_nec.unwrap_or(q.cons_nec);
        q.ron = self.ron.unwrap_or(q.ron);
        if let Some(a) = &self.anchors {
            q.anchors = [a[0], a[1], a[2]];
        }
        cfg.validate().map_err(PipelineError::Input)
    }
}

fn input<T>(r: anyhow::Result<T>) -> Result<T> {
    r.map_err(PipelineError::Input)
}

fn staged<T>(stage: Stage, r: anyhow::Result<T>) -> Result<T> {
    r.map_err(|e| PipelineError::stage(stage, e))
}

fn synth(args: &SynthArgs) -> Result<()> {
    let cfg = CorpusConfig {
        seed: args.seed,
        ventures: args.ventures,
        weeks: args.weeks,
        noise_sigma: args.noise,
        lag_abs_range: (args.lag_min, args.lag_max),
        round_count: args.rounds,
        unicorn_share: args.unicorn_share,
        poor_quality: args.poor_quality,
        ..CorpusConfig::default()
    };
    let synthetic = generate_corpus(&cfg).map_err(|e| PipelineError::Input(e.into()))?;
    let write = || -> anyhow::Result<()> {
        write_corpus(&args.out, &synthetic.corpus)?;
        let path = args.out.join(TRUTH_FILE);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_truth(file, &synthetic.truths)?;
        Ok(())
    };
    staged(Stage::Ingest, write())?;
    println!(
        "wrote {} synthetic ventures to {}",
        synthetic.truths.len(),
        args.out.display()
    );
    Ok(())
}

fn validate(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let a = pipeline::analyze(&cfg, Stage::Ingest)?;
    let c = &a.corpus;
    println!("companies: {}", c.companies.len());
    println!("valuation series: {}", c.valuations.len());
    println!("unicorns: {}", c.valuations.values().filter(|v| v.is_unicorn).count());
    println!("metadata rows: {}", c.metadata.values().map(Vec::len).sum::<usize>());
    println!("search-interest windows: {}", c.windows.values().map(Vec::len).sum::<usize>());
    println!("passing ingest filters: {}", a.funnel.last().map_or(0, |f| f.companies));
    for e in &a.exclusions {
        println!("excluded {} at {}: {}", e.company_id, e.stage, e.reason);
    }
    for w in &a.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn stage_command(args: &RunArgs, stage: Stage) -> Result<()> {
    let cfg = args.config()?;
    let out_dir = input(cfg.out_dir().map(Path::to_path_buf))?;
    let a = pipeline::analyze(&cfg, stage)?;
    let mut out = input(OutputSet::new(&out_dir))?;
    let written = match stage {
        Stage::Quality => pipeline::write_quality(&mut out, &a),
        Stage::Preprocess => pipeline::write_preprocess(&mut out, &a),
        _ => pipeline::write_correlations(&mut out, &a.results),
    }
    .and_then(|_| pipeline::write_exclusions(&mut out, stage, &a.exclusions));
    staged(stage, written)?;
    for f in &a.funnel {
        println!("{:<11} {}", f.step, f.companies);
    }
    Ok(())
}

fn report_inputs(args: &ReportArgs, cfg: &RunConfig) -> Result<(PathBuf, Vec<CorrelationResult>)> {
    let dir = match &args.input {
        Some(d) => d.clone(),
        None => input(cfg.out_dir().map(Path::to_path_buf))?,
    };
    let results = input(output::read_correlations(&dir.join(CORRELATIONS_FILE)))?;
    Ok((dir, results))
}

fn portfolio_report(args: &ReportArgs) -> Result<()> {
    let cfg = args.run.config()?;
    let (dir, results) = report_inputs(args, &cfg)?;
    let corpus = input(load_corpus(input(cfg.corpus_dir())?, cfg.analysis_end).map_err(Into::into))?;
    let features = pipeline::features_of(&corpus);
    let report = staged(
        Stage::Portfolio,
        pipeline::portfolio_stage(&results, &corpus, &features, cfg.histogram_bin_width),
    )?;
    let mut series: Vec<(usize, Vec<SeriesRow>)> = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let path = dir.join(SERIES_DIR).join(format!("{}.csv", r.company_id));
        if path.is_file() {
            series.push((i, input(output::read_series(&path))?));
        }
    }
    let overlays: Vec<Overlay<'_>> = series
        .iter()
        .map(|(i, rows)| Overlay {
            rows,
            result: &results[*i],
        })
        .collect();
    let mut out = input(OutputSet::new(input(cfg.out_dir())?))?;
    staged(
        Stage::Portfolio,
        pipeline::write_portfolio(&mut out, &report, &overlays, cfg.reproducible),
    )?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn fsqca(args: &QcaArgs) -> Result<()> {
    let mut cfg = args.report.run.config()?;
    args.qca.apply(&mut cfg)?;
    let (_, results) = report_inputs(&args.report, &cfg)?;
    let corpus = input(load_corpus(input(cfg.corpus_dir())?, cfg.analysis_end).map_err(Into::into))?;
    let q = staged(
        Stage::Fsqca,
        pipeline::fsqca_stage(&results, &pipeline::features_of(&corpus), &cfg.qca),
    )?;
    let mut out = input(OutputSet::new(input(cfg.out_dir())?))?;
    staged(Stage::Fsqca, pipeline::write_fsqca(&mut out, &q))?;
    print!("{}", pipeline::solution_text(&q));
    Ok(())
}

fn plot(args: &PlotArgs) -> Result<()> {
    let results = input(output::read_correlations(&args.input.join(CORRELATIONS_FILE)))?;
    let svg = if args.target == "histogram" {
        let taus: Vec<f64> = results.iter().map(|r| r.tau_best).collect();
        let h = input(trendcap_core::portfolio::tau_histogram(&taus, args.bin_width).map_err(Into::into))?;
        input(svg::histogram(&h, args.reproducible))?
    } else {
        let result = results
            .iter()
            .find(|r| r.company_id == args.target)
            .ok_or_else(|| PipelineError::Input(anyhow::anyhow!("unknown company id `{}`", args.target)))?;
        let path = args.input.join(SERIES_DIR).join(format!("{}.csv", args.target));
        let rows = input(output::read_series(&path))?;
        input(svg::overlay(&rows, result, args.reproducible))?
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        staged(Stage::Portfolio, std::fs::create_dir_all(parent).map_err(Into::into))?;
    }
    staged(
        Stage::Portfolio,
        std::fs::write(&args.out, svg).with_context(|| format!("writing {}", args.out.display())),
    )
}

fn run(args: &FullArgs) -> Result<()> {
    let mut cfg = args.run.config()?;
    args.qca.apply(&mut cfg)?;
    let manifest = pipeline::run_pipeline(&cfg)?;
    for f in &manifest.funnel {
        println!("{:<11} {}", f.step, f.companies);
    }
    let groups: Vec<String> = manifest.groups.iter().map(|(g, n)| format!("{g} {n}")).collect();
    println!("groups      {}", groups.join(", "));
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Validate(a) => validate(a),
        Command::ScoreQuality(a) => stage_command(a, Stage::Quality),
        Command::Preprocess(a) => stage_command(a, Stage::Preprocess),
        Command::Correlate(a) => stage_command(a, Stage::Correlate),
        Command::PortfolioReport(a) => portfolio_report(a),
        Command::Fsqca(a) => fsqca(a),
        Command::Plot(a) => plot(a),
        Command::Run(a) => run(a),
    }
}

/// Parses arguments and runs; exit status 0 on success, 1 on input errors
/// (including bad arguments), 2 on stage failures.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
