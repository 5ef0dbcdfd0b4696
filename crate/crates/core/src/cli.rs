use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checks::{self, CheckConfig};
use crate::dataset::{self, BuildOptions, DatasetError, Format, Perturbation, SampleRecord, Split, SPLIT_RNG};
use crate::equivalence::MeekRules;
use crate::evaluation::{self, BaselineKind, EvalError, PmiSource};
use crate::graph::MAX_ENUMERATION_NODES;
use crate::verbalizer::{paraphrase, refactor_variables, TemplateSet, TemplateStyle, VerbalizeError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_VAR: &str = "CAUSEFORGE_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Verbalize(#[from] VerbalizeError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0} criteria failed")]
    ChecksFailed(usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "causeforge", version, about = "Correlation-to-causation inference corpus tooling")]
pub struct Cli {
    /// TOML run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, split and write the corpus with stats and a manifest.
    Generate(GenerateArgs),
    /// Write a perturbed copy of a corpus file.
    Perturb(PerturbArgs),
    /// Print corpus statistics as JSON.
    Stats(InputArgs),
    /// N-gram/label PMI table.
    Pmi(PmiArgs),
    /// Score a prediction file or a baseline against gold records.
    Score(ScoreArgs),
    /// Compare PC output with the CPDAG of the generating DAG.
    PcCheck(PcCheckArgs),
    /// Run the acceptance criteria and print one line per check.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbKind {
    Paraphrase,
    Refactor,
}

impl PerturbKind {
    fn apply(self, r: &SampleRecord) -> Result<SampleRecord, VerbalizeError> {
        match self {
            PerturbKind::Paraphrase => paraphrase(r),
            PerturbKind::Refactor => refactor_variables(r),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            PerturbKind::Paraphrase => Perturbation::Paraphrase.as_str(),
            PerturbKind::Refactor => Perturbation::Refactor.as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleArg {
    Default,
    Paraphrase,
}

impl From<StyleArg> for TemplateStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Default => TemplateStyle::Default,
            StyleArg::Paraphrase => TemplateStyle::Paraphrase,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $CAUSEFORGE_OUT, then `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Corpus formats to write; repeatable.
    #[arg(long, value_enum)]
    pub format: Vec<FormatArg>,
    /// Also write a perturbed copy of the test split; repeatable.
    #[arg(long, value_enum)]
    pub perturb: Vec<PerturbKind>,
    #[arg(long, value_enum)]
    pub template_style: Option<StyleArg>,
    /// `relation_slug=template` override lines applied on top of the style.
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

/// Effective generate settings after merging config file and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<FormatArg>,
    pub perturbations: Vec<PerturbKind>,
    pub template_style: StyleArg,
    pub templates: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_min: 2,
            n_max: 6,
            seed: 0,
            out_dir: std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("out"), PathBuf::from),
            formats: vec![FormatArg::Jsonl],
            perturbations: Vec::new(),
            template_style: StyleArg::Default,
            templates: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn merge(mut self, args: &GenerateArgs) -> Self {
        if let Some(v) = args.n_min {
            self.n_min = v;
        }
        if let Some(v) = args.n_max {
            self.n_max = v;
        }
        if let Some(v) = args.seed {
            self.seed = v;
        }
        if let Some(v) = &args.out {
            self.out_dir = v.clone();
        }
        if !args.format.is_empty() {
            self.formats = args.format.clone();
        }
        if !args.perturb.is_empty() {
            self.perturbations = args.perturb.clone();
        }
        if let Some(v) = args.template_style {
            self.template_style = v;
        }
        if let Some(v) = &args.templates {
            self.templates = Some(v.clone());
        }
        self.formats.sort_by_key(|f| *f as u8);
        self.formats.dedup();
        self.perturbations.sort_by_key(|p| *p as u8);
        self.perturbations.dedup();
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_min < 2 || self.n_min > self.n_max || self.n_max > MAX_ENUMERATION_NODES {
            return Err(CliError::Usage(format!(
                "node range {}..={} must satisfy 2 <= n_min <= n_max <= {MAX_ENUMERATION_NODES}",
                self.n_min, self.n_max
            )));
        }
        if self.formats.is_empty() {
            return Err(CliError::Usage("at least one output format is required".into()));
        }
        Ok(())
    }

    pub fn template_set(&self) -> Result<TemplateSet, CliError> {
        let base = TemplateSet::new(self.template_style.into());
        match &self.templates {
            None => Ok(base),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                Ok(base.with_overrides(&text)?)
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format (default: from the file extension).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PerturbKind,
    #[arg(long)]
    pub out: PathBuf,
    /// Format for both input and output (default: from the file extensions).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Only perturb records of this split.
    #[arg(long)]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PmiSourceArg {
    Hypothesis,
    PremiseAndHypothesis,
}

#[derive(Debug, Args)]
pub struct PmiArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = PmiSourceArg::PremiseAndHypothesis)]
    pub source: PmiSourceArg,
    /// Rows printed to stdout.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum)]
    pub gold_format: Option<FormatArg>,
    /// JSONL prediction file of `{id, label}` objects.
    #[arg(long, conflicts_with = "baseline")]
    pub predictions: Option<PathBuf>,
    #[arg(long, required_unless_present = "predictions")]
    pub baseline: Option<BaselineKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restrict gold to one split; the proportional baseline reads its rate from dev.
    #[arg(long)]
    pub split: Option<Split>,
    /// Write baseline predictions here.
    #[arg(long)]
    pub write_predictions: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcCheckArgs {
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable one Meek rule (1-4); the comparison is then expected to fail.
    #[arg(long)]
    pub without_rule: Vec<u8>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated criterion numbers (default: all).
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn format_for(path: &Path, explicit: Option<FormatArg>) -> Result<Format, CliError> {
    if let Some(f) = explicit {
        return Ok(f.into());
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => Ok(Format::Jsonl),
        Some("csv") => Ok(Format::Csv),
        _ => Err(CliError::Usage(format!("cannot infer format of {}; pass --format", path.display()))),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub split_rng: String,
    pub seed: u64,
    pub config: RunConfig,
    pub records: usize,
    pub files: BTreeMap<String, ManifestEntry>,
}

pub fn cmd_generate(config: &RunConfig) -> Result<Manifest, CliError> {
    config.validate()?;
    let options = BuildOptions { templates: config.template_set()? };
    let mut records = dataset::build(config.n_min, config.n_max, &options)?;
    dataset::split(&mut records, config.seed);

    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written: Vec<String> = Vec::new();
    for &f in &config.formats {
        let format = Format::from(f);
        let name = format!("corpus.{}", format.extension());
        let path = dir.join(&name);
        dataset::write_records(&records, &path, format)?;
        if dataset::read_records(&path, format)? != records {
            return Err(CliError::Validation(format!("{name} does not read back to the built corpus")));
        }
        written.push(name);
    }

    let stats = dataset::stats(&records);
    fs::write(dir.join("stats.json"), to_json(&stats)).map_err(io_err(&dir.join("stats.json")))?;
    written.push("stats.json".into());

    let test: Vec<&SampleRecord> = records.iter().filter(|r| r.split == Some(Split::Test)).collect();
    for &kind in &config.perturbations {
        let perturbed: Vec<SampleRecord> = test.iter().map(|r| kind.apply(r)).collect::<Result<_, _>>()?;
        if perturbed.iter().zip(&test).any(|(p, r)| p.label != r.label) {
            return Err(CliError::Validation(format!("{} changed a label", kind.as_str())));
        }
        for &f in &config.formats {
            let format = Format::from(f);
            let name = format!("test_{}.{}", kind.as_str(), format.extension());
            dataset::write_records(&perturbed, &dir.join(&name), format)?;
            written.push(name);
        }
    }

    let mut files = BTreeMap::new();
    for name in written {
        let path = dir.join(&name);
        let bytes = fs::metadata(&path).map_err(io_err(&path))?.len();
        files.insert(name, ManifestEntry { sha256: sha256_file(&path)?, bytes });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        split_rng: SPLIT_RNG.into(),
        seed: config.seed,
        config: config.clone(),
        records: records.len(),
        files,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, to_json(&manifest)).map_err(io_err(&path))?;
    Ok(manifest)
}

pub fn cmd_perturb(args: &PerturbArgs) -> Result<usize, CliError> {
    let in_format = format_for(&args.input, args.format)?;
    let out_format = format_for(&args.out, args.format)?;
    let records = dataset::read_records(&args.input, in_format)?;
    let perturbed: Vec<SampleRecord> = records
        .iter()
        .filter(|r| args.split.is_none() || r.split == args.split)
        .map(|r| args.kind.apply(r))
        .collect::<Result<_, _>>()?;
    dataset::write_records(&perturbed, &args.out, out_format)?;
    Ok(perturbed.len())
}

pub fn cmd_stats(args: &InputArgs) -> Result<(), CliError> {
    let records = dataset::read_records(&args.input, format_for(&args.input, args.format)?)?;
    emit(&to_json(&dataset::stats(&records)), args.out.as_deref())
}

pub fn cmd_pmi(args: &PmiArgs) -> Result<(), CliError> {
    let input = &args.input;
    let records = dataset::read_records(&input.input, format_for(&input.input, input.format)?)?;
    let source = match args.source {
        PmiSourceArg::Hypothesis => PmiSource::Hypothesis,
        PmiSourceArg::PremiseAndHypothesis => PmiSource::PremiseAndHypothesis,
    };
    let rows = evaluation::pmi_table(&records, args.max_len, source);
    if let Some(path) = &input.out {
        evaluation::write_pmi_tsv(&rows, path).map_err(io_err(path))?;
    }
    let mut text = String::from("ngram\tpmi_neg\tpmi_pos\tabs_diff\n");
    for r in rows.iter().take(args.top) {
        text.push_str(&format!("{}\t{:.6}\t{:.6}\t{:.6}\n", r.ngram, r.pmi_neg, r.pmi_pos, r.abs_diff));
    }
    emit(&text, None)
}

pub fn cmd_score(args: &ScoreArgs) -> Result<evaluation::Metrics, CliError> {
    let all = dataset::read_records(&args.gold, format_for(&args.gold, args.gold_format)?)?;
    let gold: Vec<SampleRecord> =
        all.iter().filter(|r| args.split.is_none() || r.split == args.split).cloned().collect();
    let predictions = match (&args.predictions, args.baseline) {
        (Some(path), _) => evaluation::read_predictions(path)?,
        (None, Some(kind)) => {
            let dev: Vec<&SampleRecord> = all.iter().filter(|r| r.split == Some(Split::Dev)).collect();
            let rate = (!dev.is_empty()).then(|| dev.iter().filter(|r| r.label == 1).count() as f64 / dev.len() as f64);
            let preds = evaluation::baseline(kind, &gold, args.seed, rate)?;
            if let Some(path) = &args.write_predictions {
                evaluation::write_predictions(&preds, path).map_err(io_err(path))?;
            }
            preds
        }
        (None, None) => return Err(CliError::Usage("either --predictions or --baseline is required".into())),
    };
    let metrics = evaluation::score(&predictions, &gold)?;
    emit(&to_json(&metrics), args.out.as_deref())?;
    Ok(metrics)
}

fn meek_rules_without(disabled: &[u8]) -> Result<MeekRules, CliError> {
    let mut rules = MeekRules::ALL;
    for &r in disabled {
        match r {
            1 => rules.r1 = false,
            2 => rules.r2 = false,
            3 => rules.r3 = false,
            4 => rules.r4 = false,
            other => return Err(CliError::Usage(format!("no Meek rule {other}"))),
        }
    }
    Ok(rules)
}

fn print_report(report: &checks::Report) -> Result<(), CliError> {
    let mut text = String::new();
    for line in &report.lines {
        text.push_str(&line.to_string());
        text.push('\n');
    }
    emit(&text, None)
}

pub fn cmd_pc_check(args: &PcCheckArgs) -> Result<checks::Report, CliError> {
    let config = CheckConfig {
        seed: args.seed,
        pc_samples: args.samples,
        meek_rules: meek_rules_without(&args.without_rule)?,
        criteria: vec![6],
        ..CheckConfig::default()
    };
    let report = checks::run(&config);
    print_report(&report)?;
    Ok(report)
}

pub fn cmd_check(args: &CheckArgs) -> Result<checks::Report, CliError> {
    let config = CheckConfig { seed: args.seed, criteria: args.criteria.clone(), ..CheckConfig::default() };
    let report = checks::run(&config);
    print_report(&report)?;
    if let Some(path) = &args.json {
        fs::write(path, to_json(&report)).map_err(io_err(path))?;
    }
    Ok(report)
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Generate(args) => {
            let base = match &cli.config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            let config = base.merge(args);
            let manifest = cmd_generate(&config)?;
            eprintln!("wrote {} records to {}", manifest.records, config.out_dir.display());
        }
        Command::Perturb(args) => {
            let count = cmd_perturb(args)?;
            eprintln!("wrote {count} records to {}", args.out.display());
        }
        Command::Stats(args) => cmd_stats(args)?,
        Command::Pmi(args) => cmd_pmi(args)?,
        Command::Score(args) => {
            cmd_score(args)?;
        }
        Command::PcCheck(args) => {
            let report = cmd_pc_check(args)?;
            let failed = report.failures().count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
        Command::Check(args) => {
            let report = cmd_check(args)?;
            let failed = report.failures().count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}
