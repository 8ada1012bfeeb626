//! Command-line front end. `run` parses arguments, executes one subcommand
//! and maps failures to exit codes: 0 success, 1 usage, 2 data, 3 numeric.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use decouplenet::copula::{box_probability, BoxMethod, CopulaSpec, Family, Sample};
use decouplenet::empirical::pseudo_observations;
use decouplenet::io::{format_csv, read_csv, write_atomic};
use decouplenet::net::{train, transform, Activation, TrainConfig};
use decouplenet::numeric::Rng;
use decouplenet::pipeline::{
    assess, batch_size_for, load_net, save_net, simulation_study, AssessConfig, CandidateSet, DecoupleConfig,
    ScoreTable, StudyConfig, TransformKind,
};
use decouplenet::plot::{boxplot_svg, scatter_svg, ColorRule};
use decouplenet::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Lib(e) => match e {
            Error::Config(_) | Error::Unsupported(_) => EXIT_USAGE,
            Error::Numeric(_) | Error::Matrix(_) | Error::Fit(_) => EXIT_NUMERIC,
            Error::Domain(_) | Error::Shape(_) | Error::Input(_) | Error::Format(_) | Error::Io { .. } => EXIT_DATA,
        },
    }
}

#[derive(Parser, Debug)]
#[command(name = "decouplenet", version, about = "Copula model assessment with decoupling networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted, where that makes sense)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// Copula family (indep, normal, normal-ex, t, clayton, frank, gumbel, nested-clayton)
    #[arg(long)]
    family: Option<String>,
    /// Kendall's tau
    #[arg(long)]
    tau: Option<f64>,
    /// Dimension
    #[arg(long)]
    d: Option<usize>,
    /// Degrees of freedom for the t family
    #[arg(long)]
    nu: Option<f64>,
    /// Full model description, e.g. `clayton:d=3,tau=0.4`
    #[arg(long, conflicts_with_all = ["family", "tau", "nu"])]
    spec: Option<String>,
}

#[derive(Args, Debug, Default)]
struct NetArgs {
    /// Output dimension of the network
    #[arg(long, default_value_t = 2)]
    dprime: usize,
    #[arg(long)]
    epochs: Option<usize>,
    /// Batch size (default: largest divisor of the training size up to 1000)
    #[arg(long)]
    batch: Option<usize>,
    /// Comma-separated kernel bandwidths
    #[arg(long)]
    bandwidths: Option<String>,
    /// Comma-separated hidden layer sizes
    #[arg(long)]
    hidden: Option<String>,
    /// Hidden activation (relu, tanh, logistic)
    #[arg(long)]
    activation: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample from a copula and write it as CSV
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
    },
    /// Train a network on the pseudo-observations of a CSV data set
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        data: PathBuf,
    },
    /// Apply a trained network to a CSV of points in (0,1)^d
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Score candidate copulas (and the empirical copula) on a data set
    Assess {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        data: PathBuf,
        /// `;`-separated candidates: `fit:<family>` or `label=<model>`
        #[arg(long)]
        candidates: String,
        #[arg(long, default_value_t = 10_000)]
        n_gen: usize,
        /// Directory for scatter plots (default: next to --out)
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[arg(long, default_value = "mean")]
        color_rule: String,
    },
    /// Run a replicated simulation study described by a key=value file
    Study {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        config: PathBuf,
    },
    /// Probability of a box `lo1,lo2,..:hi1,hi2,..` under a copula
    Boxprob {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long = "box")]
        bounds: String,
        /// Monte Carlo draws for families without a closed form
        #[arg(long, default_value_t = 1_000_000)]
        mc: usize,
    },
    /// Scatter plot of a two-column CSV
    PlotScatter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Input-space rows used for coloring (default: the plotted rows)
        #[arg(long)]
        color_by: Option<PathBuf>,
        #[arg(long, default_value = "mean")]
        color_rule: String,
    },
    /// Box plot of a score CSV
    PlotBox {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scores: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Normal output goes to `out`, diagnostics
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("usage error: {m}"),
                CliError::Lib(l) => l.to_string(),
            };
            let _ = writeln!(err, "decouplenet: {msg}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Sample { common, spec, n } => cmd_sample(&common, &spec, n, out),
        Command::Train { common, net, data } => cmd_train(&common, &net, &data, out),
        Command::Transform { common, net, data } => cmd_transform(&common, &net, &data, out),
        Command::Assess {
            common,
            net,
            data,
            candidates,
            n_gen,
            plot_dir,
            color_rule,
        } => cmd_assess(&common, &net, &data, &candidates, n_gen, plot_dir.as_deref(), &color_rule, out),
        Command::Study { common, net, config } => cmd_study(&common, &net, &config, out),
        Command::Boxprob {
            common,
            spec,
            bounds,
            mc,
        } => cmd_boxprob(&common, &spec, &bounds, mc, out),
        Command::PlotScatter {
            common,
            data,
            color_by,
            color_rule,
        } => cmd_plot_scatter(&common, &data, color_by.as_deref(), &color_rule),
        Command::PlotBox { common, scores } => cmd_plot_box(&common, &scores),
    }
}

fn build_spec(a: &SpecArgs, default_d: Option<usize>) -> CliResult<CopulaSpec> {
    if let Some(s) = &a.spec {
        return s.parse().map_err(|e: Error| usage(e.to_string()));
    }
    let family = a.family.as_deref().ok_or_else(|| usage("either --spec or --family is required"))?;
    let fam: Family = family.parse().map_err(|e: Error| usage(e.to_string()))?;
    let d = a.d.or(default_d).unwrap_or(2);
    let mut text = format!("{}:d={d}", fam.name());
    if let Some(t) = a.tau {
        text.push_str(&format!(",tau={t}"));
    }
    if let Some(nu) = a.nu {
        text.push_str(&format!(",nu={nu}"));
    }
    text.parse().map_err(|e: Error| usage(e.to_string()))
}

fn emit(common: &Common, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &common.out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Lib(Error::Io { path: "<stdout>".into(), source: e })),
    }
}

fn require_out(common: &Common) -> CliResult<&Path> {
    common.out.as_deref().ok_or_else(|| usage("--out is required for this command"))
}

fn column_header(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("{prefix}{j}")).collect()
}

fn cmd_sample(common: &Common, spec: &SpecArgs, n: usize, out: &mut dyn Write) -> CliResult<()> {
    let spec = build_spec(spec, None)?;
    let s = decouplenet::copula::sample_copula(&spec, n, &mut Rng::new(common.seed))?;
    emit(common, &format_csv(s.view(), Some(&column_header("u", s.d()))), out)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| usage(format!("bad {what} '{p}'"))))
        .collect()
}

fn decouple_config(net: &NetArgs, n_trn: Option<usize>) -> CliResult<DecoupleConfig> {
    let mut cfg = DecoupleConfig {
        dprime: net.dprime,
        ..DecoupleConfig::default()
    };
    if let Some(h) = &net.hidden {
        cfg.hidden = parse_list(h, "hidden layer size")?;
    }
    if let Some(a) = &net.activation {
        cfg.hidden_activation = a.parse::<Activation>().map_err(|e| usage(e.to_string()))?;
    }
    if let Some(e) = net.epochs {
        cfg.train.n_epo = e;
    }
    if let Some(b) = &net.bandwidths {
        cfg.train.bandwidths = parse_list(b, "bandwidth")?;
    }
    cfg.train.n_bat = match (net.batch, n_trn) {
        (Some(b), _) => b,
        (None, Some(n)) => batch_size_for(n, TrainConfig::default().n_bat),
        (None, None) => cfg.train.n_bat,
    };
    Ok(cfg)
}

fn cmd_train(common: &Common, net: &NetArgs, data: &Path, out: &mut dyn Write) -> CliResult<()> {
    let path = require_out(common)?;
    let x = read_csv(data)?;
    let pseudo = pseudo_observations(&x)?;
    let mut cfg = decouple_config(net, Some(x.nrows()))?;
    cfg.train.seed = common.seed;
    let report = train(pseudo.sample(), &cfg.net_config(x.ncols()), &cfg.train)?;
    save_net(&report.weights, path)?;
    let _ = writeln!(out, "trained {} steps, wrote {}", report.steps, path.display());
    Ok(())
}

fn cmd_transform(common: &Common, net: &Path, data: &Path, out: &mut dyn Write) -> CliResult<()> {
    let weights = load_net(net)?;
    let u = Sample::new(read_csv(data)?)?;
    let y = transform(&weights, &u)?;
    emit(common, &format_csv(y.view(), Some(&column_header("v", y.d()))), out)
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_assess(
    common: &Common,
    net: &NetArgs,
    data: &Path,
    candidates: &str,
    n_gen: usize,
    plot_dir: Option<&Path>,
    color_rule: &str,
    out: &mut dyn Write,
) -> CliResult<()> {
    let path = require_out(common)?;
    let rule: ColorRule = color_rule.parse().map_err(|e: Error| usage(e.to_string()))?;
    let cands = CandidateSet::parse_list(candidates).map_err(|e| usage(e.to_string()))?;
    let x = read_csv(data)?;
    let cfg = AssessConfig {
        model: decouple_config(net, Some(x.nrows()))?,
        n_gen,
        seed: common.seed,
    };
    let result = assess(&x, &cands, &cfg)?;
    result.table.write(path)?;
    if cfg.model.dprime == 2 {
        let dir = plot_dir
            .map(Path::to_path_buf)
            .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("assess");
        for s in &result.samples {
            let colors = rule.colors(s.input.view());
            let svg = scatter_svg(s.output.view(), Some(&colors), &format!("{} (transformed)", s.label))?;
            write_atomic(&dir.join(format!("{stem}-{}.svg", file_label(&s.label))), svg.as_bytes())?;
        }
    }
    for (label, msg) in &result.failures {
        let _ = writeln!(out, "skipped {label}: {msg}");
    }
    for (label, score) in result.ranked() {
        let _ = writeln!(out, "{label},{score}");
    }
    Ok(())
}

/// `key=value` lines; blank lines and `#` comments are ignored.
fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| usage(format!("bad value '{v}' for '{key}'"))))
        .transpose()
}

const STUDY_KEYS: [&str; 14] = [
    "true", "candidates", "replications", "n_trn", "n_gen", "kind", "seed", "dprime", "epochs", "batch",
    "bandwidths", "hidden", "activation", "out",
];

fn cmd_study(common: &Common, net: &NetArgs, config: &Path, out: &mut dyn Write) -> CliResult<()> {
    let map = read_config(config)?;
    if let Some(k) = map.keys().find(|k| !STUDY_KEYS.contains(&k.as_str())) {
        return Err(usage(format!("unknown study key '{k}'")));
    }
    let truth: CopulaSpec = map
        .get("true")
        .ok_or_else(|| usage("study config needs 'true'"))?
        .parse()
        .map_err(|e: Error| usage(e.to_string()))?;
    let cands = CandidateSet::parse_list(map.get("candidates").map_or("", String::as_str))
        .map_err(|e| usage(e.to_string()))?;
    let n_trn: usize = config_value(&map, "n_trn")?.unwrap_or(20_000);
    // flags given on the command line win over the file
    let merged = NetArgs {
        dprime: if net.dprime != 2 {
            net.dprime
        } else {
            config_value(&map, "dprime")?.unwrap_or(2)
        },
        epochs: net.epochs.or(config_value(&map, "epochs")?),
        batch: net.batch.or(config_value(&map, "batch")?),
        bandwidths: net.bandwidths.clone().or_else(|| map.get("bandwidths").cloned()),
        hidden: net.hidden.clone().or_else(|| map.get("hidden").cloned()),
        activation: net.activation.clone().or_else(|| map.get("activation").cloned()),
    };
    let seed = if common.seed != 0 {
        common.seed
    } else {
        config_value(&map, "seed")?.unwrap_or(0)
    };
    let cfg = StudyConfig {
        replications: config_value(&map, "replications")?.unwrap_or(5),
        n_trn,
        n_gen: config_value(&map, "n_gen")?.unwrap_or(10_000),
        model: decouple_config(&merged, Some(n_trn))?,
        seed,
        kind: map
            .get("kind")
            .map(|k| k.parse::<TransformKind>())
            .transpose()
            .map_err(|e| usage(e.to_string()))?
            .unwrap_or(TransformKind::DecoupleNet),
    };
    let path = match &common.out {
        Some(p) => p.clone(),
        None => PathBuf::from(map.get("out").ok_or_else(|| usage("--out is required for study"))?),
    };
    let result = simulation_study(&truth, &cands, &cfg)?;
    result.table.write(&path)?;
    let svg = boxplot_svg(&result.table, &format!("CvM scores ({})", cfg.kind))?;
    write_atomic(&path.with_extension("svg"), svg.as_bytes())?;
    for (label, msg) in &result.failures {
        let _ = writeln!(out, "dropped {label}: {msg}");
    }
    for b in &result.flagged {
        let _ = writeln!(out, "warning: replication {b} looks like a training failure");
    }
    for (label, m) in result.table.models().iter().zip(result.table.medians()) {
        let _ = writeln!(out, "{label},{m}");
    }
    Ok(())
}

fn cmd_boxprob(common: &Common, spec: &SpecArgs, bounds: &str, mc: usize, out: &mut dyn Write) -> CliResult<()> {
    let (lo, hi) = bounds
        .split_once(':')
        .ok_or_else(|| usage("--box must look like lo1,lo2:hi1,hi2"))?;
    let lower: Vec<f64> = parse_list(lo, "box bound")?;
    let upper: Vec<f64> = parse_list(hi, "box bound")?;
    if lower.len() != upper.len() {
        return Err(usage("box corners have different lengths"));
    }
    let spec = build_spec(spec, Some(lower.len()))?;
    let mut rng = Rng::new(common.seed);
    let p = match box_probability(&spec, &lower, &upper, BoxMethod::ClosedForm, 0, &mut rng) {
        Err(Error::Unsupported(_)) => box_probability(&spec, &lower, &upper, BoxMethod::MonteCarlo, mc, &mut rng)?,
        other => other?,
    };
    emit(common, &format!("{:.6}\n", p.value), out)
}

fn cmd_plot_scatter(common: &Common, data: &Path, color_by: Option<&Path>, rule: &str) -> CliResult<()> {
    let path = require_out(common)?;
    let rule: ColorRule = rule.parse().map_err(|e: Error| usage(e.to_string()))?;
    let y = read_csv(data)?;
    let colors = match color_by {
        Some(p) => {
            let x = read_csv(p)?;
            if x.nrows() != y.nrows() {
                return Err(CliError::Lib(Error::Shape(format!(
                    "{} coloring rows for {} points",
                    x.nrows(),
                    y.nrows()
                ))));
            }
            rule.colors(x.view())
        }
        None => rule.colors(y.view()),
    };
    let title = data.file_name().and_then(|s| s.to_str()).unwrap_or("sample");
    let svg = scatter_svg(y.view(), Some(&colors), title)?;
    Ok(write_atomic(path, svg.as_bytes())?)
}

fn cmd_plot_box(common: &Common, scores: &Path) -> CliResult<()> {
    let path = require_out(common)?;
    let table = ScoreTable::read(scores)?;
    let svg = boxplot_svg(&table, "CvM scores")?;
    Ok(write_atomic(path, svg.as_bytes())?)
}
