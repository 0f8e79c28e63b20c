use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use dessin_core::opmatrix::{self, OpMatrixError};
use dessin_core::partition::{self, CountKey, PartitionError};
use dessin_core::ratseries::{fmt_rat, Rational};
use dessin_core::report::Report;
use dessin_core::spectral::{self, SpectralError};
use dessin_core::suites::{self, SuiteConfig, SuiteError, SUITE_NAMES};

#[derive(Parser, Debug)]
#[command(name = "dessin", version, about = "Counts of directed ribbon graphs and the identities they satisfy")]
struct Cli {
    /// Worker threads (0 lets the pool decide).
    #[arg(long, global = true, env = "DESSIN_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Layers of the partition function.
    Zfun {
        #[arg(long, default_value_t = 3)]
        dmax: u32,
        /// Keep the negative-boundary marker `tm`.
        #[arg(long)]
        marker: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Automorphism-weighted counts read off the connected series.
    Counts {
        #[arg(long)]
        dmax: Option<u32>,
        #[arg(long)]
        g: Option<u32>,
        #[arg(long)]
        nplus: Option<u32>,
        /// Positive perimeters, comma separated.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<u32>>,
        /// Bivalent vertices.
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run verification suites; exit status 1 on any residual.
    Verify {
        /// Comma separated suite names, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all", value_parser = parse_suite)]
        suites: Vec<String>,
        #[command(flatten)]
        window: Window,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Residue recursion for one type, compared with the counts.
    Tr {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        /// Total order of the comparison at infinity.
        #[arg(long, default_value_t = 10)]
        order: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Kernel blocks or correlator tables as JSON.
    Export {
        #[arg(long, value_enum, default_value_t = ExportKind::Blocks)]
        kind: ExportKind,
        #[arg(long, default_value_t = 2)]
        dmax: u32,
        /// Degree cap of block entries or perimeter cap of correlators.
        #[arg(long = "cap-d", default_value_t = 8)]
        cap_d: u32,
        #[arg(long = "n-budget", default_value_t = 16)]
        n_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Window {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    dmax: u32,
    #[arg(long = "cap-d", default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    cap_d: u32,
    #[arg(long = "deg-cap", default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    deg_cap: u32,
    #[arg(long = "var-cap", default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    var_cap: u32,
    #[arg(long = "n-budget", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    n_budget: u64,
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Blocks,
    Correlators,
}

fn parse_suite(s: &str) -> Result<String, String> {
    if s == "all" || SUITE_NAMES.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown suite `{s}` (expected one of: all, {})", SUITE_NAMES.join(", ")))
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    OpMatrix(#[from] OpMatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Suite(e) if e.is_budget() => 3,
            CliError::OpMatrix(OpMatrixError::Enumeration(_)) => 3,
            CliError::Spectral(SpectralError::Unstable { .. } | SpectralError::Unsupported { .. }) => 2,
            CliError::Io(_) | CliError::Csv(_) => 4,
            _ => 1,
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn zfun(dmax: u32, marker: bool, out: &OutArgs) -> Result<bool, CliError> {
    let z = partition::partition_function(dmax, marker);
    match out.format {
        Format::Json => {
            let layers: Vec<Value> = (0..=dmax)
                .map(|d| {
                    let p = z.layer(d).expect("computed");
                    let terms: Vec<Value> = p
                        .terms()
                        .map(|(m, c)| json!({"monomial": m.to_string(), "coeff": fmt_rat(c)}))
                        .collect();
                    json!({"d": d, "poly": p.to_string(), "terms": terms})
                })
                .collect();
            emit(&pretty(&json!({"marker": marker, "layers": layers})), &out.out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["d", "monomial", "coeff"])?;
            for d in 0..=dmax {
                for (m, c) in z.layer(d).expect("computed").terms() {
                    w.write_record([d.to_string(), m.to_string(), fmt_rat(c)])?;
                }
            }
            emit(&String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"), &out.out)?;
        }
    }
    Ok(true)
}

fn counts(
    dmax: Option<u32>,
    g: Option<u32>,
    nplus: Option<u32>,
    alpha: Option<Vec<u32>>,
    m: u32,
    out: &OutArgs,
) -> Result<bool, CliError> {
    if let (Some(a), Some(n)) = (&alpha, nplus) {
        if a.len() != n as usize {
            return Err(CliError::Usage(format!("--alpha has {} entries but --nplus is {n}", a.len())));
        }
    }
    let needed = match &alpha {
        Some(a) => {
            let total: u32 = a.iter().sum();
            if total < m || (total - m) % 2 == 1 {
                return Err(CliError::Usage("sum of --alpha minus --m must be even and non-negative".into()));
            }
            (total - m) / 2
        }
        None => dmax.unwrap_or(3),
    };
    let d = dmax.unwrap_or(needed).max(needed);
    let z = partition::partition_function_bivalent(m, d, true);
    let c = partition::connected(&z)?;
    let mut rows: Vec<(CountKey, Rational)> = partition::count_table(&c)?
        .into_iter()
        .filter(|(k, _)| k.m == m)
        .filter(|(k, _)| g.is_none_or(|g| k.g == g))
        .filter(|(k, _)| nplus.is_none_or(|n| k.n_plus == n))
        .filter(|(k, _)| {
            alpha.as_ref().is_none_or(|a| {
                let mut s = a.clone();
                s.sort_unstable_by(|x, y| y.cmp(x));
                k.alpha == s
            })
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    match out.format {
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|(k, h)| {
                    json!({"g": k.g, "n_plus": k.n_plus, "n_minus": k.n_minus, "m": k.m, "alpha": k.alpha, "count": fmt_rat(h)})
                })
                .collect();
            emit(&pretty(&Value::Array(v)), &out.out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["g", "n_plus", "n_minus", "m", "alpha", "count"])?;
            for (k, h) in &rows {
                let alpha: Vec<String> = k.alpha.iter().map(u32::to_string).collect();
                w.write_record([
                    k.g.to_string(),
                    k.n_plus.to_string(),
                    k.n_minus.to_string(),
                    k.m.to_string(),
                    alpha.join(" "),
                    fmt_rat(h),
                ])?;
            }
            emit(&String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"), &out.out)?;
        }
    }
    Ok(true)
}

fn report_json(name: &str, r: &Report) -> Value {
    json!({"suite": name, "label": r.label, "passed": r.passed(), "checked": r.checked, "residuals": r.residuals})
}

fn verify(names: &[String], window: &Window, out: &OutArgs) -> Result<bool, CliError> {
    let cfg = SuiteConfig {
        d_max: window.dmax,
        deg_cap: window.deg_cap,
        var_cap: window.var_cap,
        cap: window.cap_d,
        n_budget: window.n_budget as usize,
    };
    let selected: Vec<&str> = if names.iter().any(|s| s == "all") {
        SUITE_NAMES.to_vec()
    } else {
        let mut v: Vec<&str> = names.iter().map(String::as_str).collect();
        v.dedup();
        v
    };
    let mut all_passed = true;
    let mut budget_error = None;
    let mut rows = Vec::new();
    let mut lines = String::new();
    for name in selected {
        match suites::run_suite(name, &cfg) {
            Ok(r) => {
                all_passed &= r.passed();
                lines.push_str(&format!("{r}\n"));
                for res in r.residuals.iter().take(10) {
                    lines.push_str(&format!("    {res}\n"));
                }
                rows.push(report_json(name, &r));
            }
            Err(e) if e.is_budget() => {
                lines.push_str(&format!("{name}: {e}\n"));
                rows.push(json!({"suite": name, "error": e.to_string()}));
                budget_error.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    match out.format {
        Format::Json if out.out.is_some() => {
            print!("{lines}");
            emit(&pretty(&Value::Array(rows)), &out.out)?;
        }
        Format::Json => print!("{lines}"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["suite", "passed", "checked", "residuals"])?;
            for r in &rows {
                w.write_record([
                    r["suite"].as_str().unwrap_or_default().to_string(),
                    r["passed"].as_bool().map_or("error".into(), |b| b.to_string()),
                    r["checked"].as_u64().map_or(String::new(), |c| c.to_string()),
                    r["residuals"].as_array().map_or(String::new(), |a| a.len().to_string()),
                ])?;
            }
            emit(&String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"), &out.out)?;
        }
    }
    if let Some(e) = budget_error {
        return Err(e.into());
    }
    Ok(all_passed)
}

fn tr(g: u32, n: u32, order: u32, out: &OutArgs) -> Result<bool, CliError> {
    if out.format == Format::Csv {
        return Err(CliError::Usage("tr only writes JSON".into()));
    }
    let omega = spectral::tr_omega(g, n)?;
    let report = spectral::tr_check(g, n, order)?;
    eprintln!("{report}");
    let v = json!({"omega": omega.to_json(), "check": report_json("tr", &report)});
    emit(&pretty(&v), &out.out)?;
    Ok(report.passed())
}

fn export(kind: ExportKind, dmax: u32, cap: u32, budget: usize, out: &Option<PathBuf>) -> Result<bool, CliError> {
    let v = match kind {
        ExportKind::Blocks => {
            let mut blocks = Vec::new();
            for d in 1..=dmax {
                for b in opmatrix::blocks_of_degree(d, cap.max(2 * d), budget)? {
                    blocks.push(b.to_json());
                }
            }
            json!({"blocks": blocks})
        }
        ExportKind::Correlators => {
            let mut tables = Vec::new();
            for (g, n) in [(0, 1), (0, 2), (1, 1), (0, 3)] {
                tables.push(spectral::laplace_w(g, n, cap).to_json());
            }
            json!({"correlators": tables})
        }
    };
    emit(&pretty(&v), out)?;
    Ok(true)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Zfun { dmax, marker, out } => zfun(dmax, marker, &out),
        Command::Counts { dmax, g, nplus, alpha, m, out } => counts(dmax, g, nplus, alpha, m, &out),
        Command::Verify { suites, window, out } => verify(&suites, &window, &out),
        Command::Tr { g, n, order, out } => tr(g, n, order, &out),
        Command::Export { kind, dmax, cap_d, n_budget, out } => export(kind, dmax, cap_d, n_budget, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
