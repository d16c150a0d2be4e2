//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 data or I/O error, 2 usage error,
//! 3 when no profile passes the support restriction.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dataio::{load_csv, write_results, ConfigEcho, DatasetSchema, ResultDocument, TableReport, TOOL_VERSION};
use crate::discretize::QuantileSpec;
use crate::distribution::{Column, Dataset};
use crate::error::{Error, Result};
use crate::metrics::eta_global;
use crate::search::{
    select_global, select_profile, select_window, subset_table, Candidate, FeatureSubset, Locus, Mode,
    SearchConfig, SearchOutcome,
};

pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_PROFILE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "llds", version, about = "Lift, η and lattice feature selection over categorical data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the lift table of one feature set against the target.
    Lift(LiftArgs),
    /// Rank feature subsets by global η.
    SelectGlobal(SearchArgs),
    /// Rank (subset, window) pairs by windowed η.
    SelectWindow(SearchArgs),
    /// Rank (subset, profile) pairs by lift at one target value.
    SelectProfile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Delimited data file; `.gz` files are decompressed.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON schema file, instead of the inline schema flags.
    #[arg(long, conflicts_with_all = ["names", "no_header", "delimiter", "missing", "target", "continuous", "groups", "ignore"])]
    pub schema: Option<PathBuf>,
    /// Column names, for files without a header row.
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, default_value = "?")]
    pub missing: String,
    #[arg(long, required_unless_present = "schema")]
    pub target: Option<String>,
    /// Continuous columns; selecting them switches to joint discretization.
    #[arg(long, value_delimiter = ',')]
    pub continuous: Vec<String>,
    /// Columns whose values define discretization groups.
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<String>,
    /// Columns to drop on load.
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<String>,
    /// Cutting probabilities for joint discretization.
    #[arg(long, value_parser = parse_quantiles, default_value = "0.3333333333333333,0.6666666666666666")]
    pub quantiles: QuantileSpec,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub features: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Candidate features; defaults to the continuous columns when any are
    /// given, otherwise to every categorical non-target column.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Largest subset size; defaults to the number of features.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_k: Option<u64>,
    #[arg(long, value_parser = parse_support, default_value_t = 0.0)]
    pub min_support: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_window_cells: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 10)]
    pub top_n: u64,
    /// Defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, required = true)]
    pub target_value: String,
}

fn parse_quantiles(s: &str) -> std::result::Result<QuantileSpec, String> {
    let probs = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    QuantileSpec::new(probs).map_err(|e| e.to_string())
}

fn parse_support(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1)"))
    }
}

impl DataArgs {
    fn schema(&self) -> Result<DatasetSchema> {
        if let Some(path) = &self.schema {
            return DatasetSchema::from_json_file(path);
        }
        Ok(DatasetSchema {
            names: self.names.clone(),
            target: self.target.clone().unwrap_or_default(),
            continuous: self.continuous.clone(),
            groups: self.groups.clone(),
            ignore: self.ignore.clone(),
            missing: self.missing.clone(),
            delimiter: self.delimiter,
            header: !self.no_header,
        })
    }
}

fn resolve_features(data: &Dataset, names: Option<&[String]>) -> Result<Vec<usize>> {
    match names {
        Some(names) => names
            .iter()
            .map(|n| {
                data.column_index(n)
                    .filter(|&c| c != data.target() && !data.group_columns().contains(&c))
                    .ok_or_else(|| Error::SchemaMismatch(format!("'{n}' is not a feature column")))
            })
            .collect(),
        None => {
            let all = data.feature_columns();
            let continuous: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&c| matches!(data.column(c), Column::Continuous(_)))
                .collect();
            Ok(if continuous.is_empty() { all } else { continuous })
        }
    }
}

fn mode_for(data: &Dataset, features: &[usize], quantiles: &QuantileSpec) -> Mode {
    if features.iter().any(|&c| matches!(data.column(c), Column::Continuous(_))) {
        Mode::JointDiscretized {
            quantiles: quantiles.clone(),
        }
    } else {
        Mode::Categorical
    }
}

/// A finished run: the result document and the text for standard output.
pub struct Report {
    pub document: ResultDocument,
    pub output: Option<PathBuf>,
    pub text: String,
}

fn describe(c: &Candidate) -> String {
    let features = if c.features.len() == 1 {
        c.features[0].clone()
    } else {
        format!("({})", c.features.join(","))
    };
    match &c.locus {
        Locus::WholeRange => features,
        Locus::Window { .. } => format!("{features} & {}", c.locus.describe()),
        Locus::Profile { .. } => format!("{features} = {}", c.locus.describe()),
    }
}

/// Executes a parsed command without touching standard streams or files.
pub fn execute(command: &Command) -> Result<Report> {
    match command {
        Command::Lift(args) => lift_table(args),
        Command::SelectGlobal(args) => search(args, "select-global", None),
        Command::SelectWindow(args) => search(args, "select-window", None),
        Command::SelectProfile(args) => search(&args.search, "select-profile", Some(&args.target_value)),
    }
}

fn lift_table(args: &LiftArgs) -> Result<Report> {
    let schema = args.data.schema()?;
    let data = load_csv(&args.data.data, &schema)?;
    let features = resolve_features(&data, Some(&args.features))?;
    let config = SearchConfig {
        max_k: features.len(),
        mode: mode_for(&data, &features, &args.data.quantiles),
        ..SearchConfig::default()
    };
    let subset = FeatureSubset::new(features)?;
    let (table, model) = subset_table(&data, &subset, &config)?;
    let eta = eta_global(&table)?;
    let names = subset.names(&data);
    let report = TableReport::new(names.clone(), &table)?;
    let candidate = Candidate {
        subset,
        features: names.clone(),
        locus: Locus::WholeRange,
        score: eta,
        support_count: table.total(),
        table_total: table.total(),
        model,
    };
    let mut text = String::new();
    writeln!(text, "{}: η = {eta:.4} over {} complete cases", describe(&candidate), table.total()).unwrap();
    text.push_str(&report.rendered);
    let document = ResultDocument {
        tool_version: TOOL_VERSION.to_string(),
        algorithm: "lift".into(),
        config: ConfigEcho {
            data: args.data.data.display().to_string(),
            schema,
            features: names,
            target_value: None,
            search: config,
        },
        rows: data.n_rows(),
        rejected_rows: data.rejected_rows(),
        subsets_evaluated: 1,
        candidates: vec![candidate],
        diagnostics: Vec::new(),
        top_table: Some(report),
    };
    Ok(Report {
        document,
        output: args.output.clone(),
        text,
    })
}

fn search(args: &SearchArgs, algorithm: &str, target_value: Option<&String>) -> Result<Report> {
    let schema = args.data.schema()?;
    let data = load_csv(&args.data.data, &schema)?;
    let features = resolve_features(&data, args.features.as_deref())?;
    if features.is_empty() {
        return Err(Error::SchemaMismatch("no feature columns to search".into()));
    }
    let workers = match args.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map(usize::from).unwrap_or(1),
    };
    let config = SearchConfig {
        max_k: args.max_k.map_or(features.len(), |k| (k as usize).min(features.len())),
        min_support: args.min_support,
        max_window_cells: args.max_window_cells.map(|c| c as usize),
        mode: mode_for(&data, &features, &args.data.quantiles),
        top_n: args.top_n as usize,
        workers,
    };
    let SearchOutcome {
        candidates,
        skipped,
        subsets_evaluated,
    } = match target_value {
        Some(y) => select_profile(&data, &features, y, &config)?,
        None if algorithm == "select-window" => select_window(&data, &features, &config)?,
        None => select_global(&data, &features, &config)?,
    };

    let top_table = match candidates.first() {
        Some(top) => {
            let (table, _) = subset_table(&data, &top.subset, &config)?;
            Some(TableReport::new(top.features.clone(), &table)?)
        }
        None => None,
    };

    let mut text = String::new();
    let target = data.name(data.target());
    match target_value {
        Some(y) => writeln!(text, "{algorithm}: {target} = {y}").unwrap(),
        None => writeln!(text, "{algorithm}: {target}").unwrap(),
    }
    writeln!(
        text,
        "{} features, max_k {}, {subsets_evaluated} subsets evaluated, {} skipped",
        features.len(),
        config.max_k,
        skipped.len()
    )
    .unwrap();
    for (rank, c) in candidates.iter().enumerate() {
        writeln!(
            text,
            "{:>3}  {:.4}  {}  (support {} of {})",
            rank + 1,
            c.score,
            describe(c),
            c.support_count,
            c.table_total
        )
        .unwrap();
    }
    if let (Some(top), Some(report)) = (candidates.first(), &top_table) {
        writeln!(text, "\nlift table of {}:", describe(top).split(" = ").next().unwrap_or_default()).unwrap();
        text.push_str(&report.rendered);
    }

    let document = ResultDocument {
        tool_version: TOOL_VERSION.to_string(),
        algorithm: algorithm.to_string(),
        config: ConfigEcho {
            data: args.data.data.display().to_string(),
            schema,
            features: features.iter().map(|&c| data.name(c).to_string()).collect(),
            target_value: target_value.cloned(),
            search: config,
        },
        rows: data.n_rows(),
        rejected_rows: data.rejected_rows(),
        subsets_evaluated,
        candidates,
        diagnostics: skipped,
        top_table,
    };
    Ok(Report {
        document,
        output: args.output.clone(),
        text,
    })
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoFeasibleProfile => EXIT_NO_PROFILE,
        _ => EXIT_DATA,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = execute(&cli.command).and_then(|report| {
        if let Some(path) = &report.output {
            write_results(&report.document, path)?;
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            for s in &report.document.diagnostics {
                eprintln!("skipped {}: {}", s.features.join(","), s.reason);
            }
            print!("{}", report.text);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
