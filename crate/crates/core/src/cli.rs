//! Command-line front end.
//!
//! Exit codes: 0 success, 1 data or validation failure, 2 usage or config
//! error, 3 I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{check_dataset, load_dataset_with, write_dataset, Checked, Dataset, Format, Layout};
use crate::error::Error;
use crate::fitting::{evaluate_all, FitReport, GridOverrides, DEFAULT_FOLDS};
use crate::model::{decide, Family, ModelSpec};
use crate::report::{render, ReportKind};
use crate::simulate::{generate_dataset, SimConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DATA: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

pub const FIT_REPORT_FILE: &str = "fit_report.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Parser)]
#[command(name = "pollvote", version, about = "Fit, evaluate and simulate poll-driven plurality voting models")]
pub struct Cli {
    /// Seed for simulation (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of cross-validation folds.
    #[arg(long, global = true, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,

    /// Dataset file format; guessed from the extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Output directory for commands that write files.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::JsonLines,
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LayoutArgs {
    /// Input rows carry a `tops` column of other players' choices instead of s1..sm.
    #[arg(long, conflicts_with = "ballot_order")]
    pub from_ts16: bool,

    /// Input columns are in ballot order; re-index candidates by utility.
    #[arg(long)]
    pub ballot_order: bool,
}

impl LayoutArgs {
    fn layout(self) -> Layout {
        if self.from_ts16 {
            Layout::Ts16
        } else if self.ballot_order {
            Layout::BallotOrder
        } else {
            Layout::Canonical
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset and report every invalid record.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        layout: LayoutArgs,
    },
    /// Apply one model to every record and print the predicted votes.
    Predict {
        input: PathBuf,
        #[arg(long, value_parser = parse_family)]
        family: Family,
        /// Model parameter as name=value; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[command(flatten)]
        layout: LayoutArgs,
    },
    /// Generate a synthetic dataset and its ground-truth labels.
    Simulate { config: PathBuf },
    /// Cross-validate model families and write the report tables.
    Evaluate {
        input: PathBuf,
        /// Comma-separated family names; all families when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_family)]
        families: Option<Vec<Family>>,
        /// JSON file of grid overrides.
        #[arg(long)]
        grids: Option<PathBuf>,
        #[command(flatten)]
        layout: LayoutArgs,
    },
    /// Print one table of a saved fit report as CSV.
    Report {
        fit_report: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: ReportKind,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        format!("unknown family '{s}' (expected one of {})", names.join(", "))
    })
}

fn parse_kind(s: &str) -> Result<ReportKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

/// A failed command: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if cli.folds < 2 {
        return Err(Failure::usage(format!("--folds must be at least 2, got {}", cli.folds)));
    }
    match &cli.command {
        Command::Validate { input, layout } => cmd_validate(cli, input, layout.layout(), out, err),
        Command::Predict {
            input,
            family,
            params,
            layout,
        } => cmd_predict(cli, input, *family, params, layout.layout(), out),
        Command::Simulate { config } => cmd_simulate(cli, config, out),
        Command::Evaluate {
            input,
            families,
            grids,
            layout,
        } => cmd_evaluate(cli, input, families.as_deref(), grids.as_deref(), layout.layout(), out),
        Command::Report { fit_report, kind } => cmd_report(fit_report, *kind, out),
    }
}

fn stdout_err(e: io::Error) -> Failure {
    Error::io("<stdout>", e).into()
}

/// Opens an input file; a path that does not exist is a usage error.
fn open_input(path: &Path) -> Result<fs::File, Failure> {
    if !path.exists() {
        return Err(Failure::usage(format!("{}: no such file", path.display())));
    }
    fs::File::open(path).map_err(|e| Error::io(path, e).into())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut s = String::new();
    io::Read::read_to_string(&mut open_input(path)?, &mut s).map_err(|e| Failure::from(Error::io(path, e)))?;
    Ok(s)
}

fn input_format(cli: &Cli, path: &Path) -> Format {
    cli.format.map(Format::from).unwrap_or_else(|| Format::from_path(path))
}

fn load(cli: &Cli, path: &Path, layout: Layout) -> Result<Dataset, Failure> {
    let file = open_input(path)?;
    Ok(load_dataset_with(io::BufReader::new(file), input_format(cli, path), layout)?)
}

fn cmd_validate(cli: &Cli, input: &Path, layout: Layout, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let file = open_input(input)?;
    match check_dataset(io::BufReader::new(file), input_format(cli, input), layout)? {
        Checked::Valid(ds) => {
            writeln!(
                out,
                "{}: ok ({} records, {} voters, m = {})",
                input.display(),
                ds.len(),
                ds.voters().len(),
                ds.m()
            )
            .map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
        Checked::Invalid(problems) => {
            for p in &problems {
                let _ = writeln!(err, "{}: {p}", input.display());
            }
            let _ = writeln!(err, "{}: {} problem(s)", input.display(), problems.len());
            Ok(EXIT_DATA)
        }
    }
}

fn cmd_predict(
    cli: &Cli,
    input: &Path,
    family: Family,
    params: &[(String, f64)],
    layout: Layout,
    out: &mut dyn Write,
) -> Outcome {
    if family == Family::FreqBaseline {
        return Err(Failure::usage("FREQ_BASELINE is fitted from votes and cannot predict on its own"));
    }
    let spec = ModelSpec::from_params(family, params).map_err(|e| Failure::usage(e.to_string()))?;
    let ds = load(cli, input, layout)?;
    spec.validate_for(ds.m()).map_err(|e| Failure::usage(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::from(Error::invalid(format!("csv: {e}")));
    w.write_record(["voter_id", "round_index", "predicted"]).map_err(csv_err)?;
    for rec in ds.records() {
        let mut round = rec.round();
        round.vote = None;
        let p = decide(&spec, &round)?;
        w.write_record([rec.voter_id.as_str(), &rec.round_index.to_string(), &p.rank().to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::from(Error::invalid(format!("csv: {e}"))))?;
    out.write_all(&bytes).map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn output_dir(cli: &Cli) -> Result<PathBuf, Failure> {
    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::from(Error::io(&dir, e)))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e).into())
}

fn cmd_simulate(cli: &Cli, config: &Path, out: &mut dyn Write) -> Outcome {
    let text = read_input(config)?;
    let mut cfg: SimConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    if let Some(seed) = cli.seed {
        cfg.pollgen.seed = seed;
    }
    cfg.validate()
        .map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    let (ds, truth) = generate_dataset(&cfg.dataset, &cfg.population, &cfg.pollgen, cfg.pollgen.seed)?;

    let format = cli.format.map(Format::from).unwrap_or(Format::Csv);
    let dir = output_dir(cli)?;
    let data_path = dir.join(match format {
        Format::Csv => "dataset.csv",
        Format::JsonLines => "dataset.jsonl",
    });
    let mut bytes = Vec::new();
    write_dataset(&ds, &mut bytes, format)?;
    write_file(&data_path, &bytes)?;
    let mut truth_json = serde_json::to_string_pretty(&truth).map_err(Error::from)?;
    truth_json.push('\n');
    write_file(&dir.join(GROUND_TRUTH_FILE), truth_json.as_bytes())?;

    let mut per_component = vec![0usize; cfg.population.components.len()];
    for label in truth.voters.values() {
        per_component[label.component] += 1;
    }
    let mut summary = format!(
        "wrote {} records for {} voters to {}\n",
        ds.len(),
        truth.voters.len(),
        data_path.display()
    );
    for (c, count) in cfg.population.components.iter().zip(&per_component) {
        summary.push_str(&format!("  {} (tremble {}): {count} voters\n", c.spec, c.tremble));
    }
    out.write_all(summary.as_bytes()).map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn cmd_evaluate(
    cli: &Cli,
    input: &Path,
    families: Option<&[Family]>,
    grids: Option<&Path>,
    layout: Layout,
    out: &mut dyn Write,
) -> Outcome {
    let overrides: GridOverrides = match grids {
        Some(path) => serde_json::from_str(&read_input(path)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => GridOverrides::new(),
    };
    let families = families.map(<[Family]>::to_vec).unwrap_or_else(|| Family::ALL.to_vec());
    let ds = load(cli, input, layout)?;
    let report = evaluate_all(&ds, &families, &overrides, cli.folds)?;

    let dir = output_dir(cli)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    json.push('\n');
    write_file(&dir.join(FIT_REPORT_FILE), json.as_bytes())?;
    let mut kinds = vec![ReportKind::Overall, ReportKind::Rounds, ReportKind::BestModel];
    if report.m == 3 {
        kinds.insert(1, ReportKind::PollType);
    }
    for kind in kinds {
        write_file(&dir.join(kind.file_name()), render(&report, kind)?.as_bytes())?;
    }

    let mut summary = format!(
        "evaluated {} voters ({} excluded) with {} folds\n",
        report.fitted_voters(),
        report.excluded.len(),
        report.folds
    );
    for note in &report.notes {
        summary.push_str(&format!("note: {note}\n"));
    }
    out.write_all(summary.as_bytes()).map_err(stdout_err)?;
    out.write_all(render(&report, ReportKind::Overall)?.as_bytes())
        .map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn cmd_report(path: &Path, kind: ReportKind, out: &mut dyn Write) -> Outcome {
    let report: FitReport = serde_json::from_str(&read_input(path)?)
        .map_err(|e| Failure::from(Error::invalid(format!("{}: {e}", path.display()))))?;
    out.write_all(render(&report, kind)?.as_bytes()).map_err(stdout_err)?;
    Ok(EXIT_OK)
}
