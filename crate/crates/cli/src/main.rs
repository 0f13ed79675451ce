use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use persistency::headline::headline;
use persistency::linalg::{c, CMatrix};
use persistency::persistency::{analyze, asymmetry_bound, Budget, PersistencyReport, Sections};
use persistency::states::{write_state_file, StateSpec};

mod table;

#[derive(Parser)]
#[command(name = "persistency", version, about = "Entanglement and nonlocality of multipartite states under particle loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the state named by SPEC as JSON.
    Build {
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistency of entanglement and nonlocality, and the strength.
    Analyze(AnalyzeArgs),
    /// Rows of the persistency table.
    Table(TableArgs),
    /// Scalar reference values against their targets.
    Headline {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound on the distance to the nearest permutation-symmetric state.
    Asymmetry {
        /// Observed Bell value.
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Bound of the Bell operator on symmetric states.
        #[arg(long, allow_hyphen_values = true)]
        l: f64,
        /// JSON matrix; entries are numbers or `[re, im]`.
        #[arg(long)]
        operator: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args, Clone)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Bisection tolerance of the strength.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long)]
    fit_samples: Option<usize>,
    /// Grid of the plane scan; 0 disables it.
    #[arg(long)]
    plane_grid: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("--tol must lie in (0, 1), got {}", self.tol);
        }
        let mut b = Budget { restarts: self.restarts, strength_tol: self.tol, ..Budget::default() };
        if let Some(f) = self.fit_samples {
            b.fit_samples = f;
        }
        if let Some(g) = self.plane_grid {
            b.plane_grid = g;
        }
        Ok(b)
    }

    fn init_threads(&self) -> Result<()> {
        if let Some(j) = self.jobs {
            rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global()?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    spec: String,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    no_entanglement: bool,
    #[arg(long)]
    no_hidden: bool,
    #[arg(long)]
    no_strength: bool,
    /// Removal size for the strength; defaults to one below the certified P_NL.
    #[arg(long)]
    k_remove: Option<usize>,
    /// Record the wall-clock runtime (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TableArgs {
    /// Comma-separated families (w, dicke, ti, linear, ring, grid, ghz).
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    /// Inclusive range such as `3..5`, or a single size.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Append the published values and the deltas.
    #[arg(long)]
    compare: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_spec(text: &str) -> Result<StateSpec> {
    StateSpec::parse(text).with_context(|| format!("state spec {text:?}"))
}

fn analyze_csv(r: &PersistencyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["state", "n", "pe_lo", "pe_hi", "pnl", "pnl_star", "w"])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    w.write_record([
        r.spec.clone(),
        r.n.to_string(),
        opt(r.pe.as_ref().map(|p| p.lo.to_string())),
        opt(r.pe.as_ref().map(|p| p.hi.to_string())),
        r.pnl.lb.to_string(),
        opt(r.pnl_star.as_ref().map(|h| h.lb.to_string())),
        opt(r.strength.as_ref().and_then(|s| s.w).map(|w| format!("{w:.6}"))),
    ])?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<ExitCode> {
    a.budget.init_threads()?;
    let spec = parse_spec(&a.spec)?;
    let sections = Sections {
        entanglement: !a.no_entanglement,
        hidden: !a.no_hidden,
        strength: !a.no_strength,
        k_remove: a.k_remove,
    };
    let mut report = analyze(&spec, &a.budget.budget()?, a.seed, &sections)?;
    if !a.timing {
        report.elapsed_ms = None;
    }
    let text = match a.format {
        Format::Csv => analyze_csv(&report)?,
        _ => serde_json::to_string_pretty(&report)? + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    Ok(if report.pe_open() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_headline(seed: u64, format: Format, out: Option<&Path>) -> Result<ExitCode> {
    let report = headline(seed)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "target", "computed", "delta", "tol", "pass"])?;
            for i in &report.items {
                w.write_record([
                    i.name.clone(),
                    i.target.to_string(),
                    i.computed.to_string(),
                    i.delta.to_string(),
                    i.tol.to_string(),
                    i.pass.to_string(),
                ])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Text => {
            let mut s = String::new();
            for i in &report.items {
                s += &format!(
                    "{:<4} {:<52} target {:>10.6}  computed {:>10.6}  |delta| {:.2e}  tol {:.0e}\n",
                    if i.pass { "PASS" } else { "FAIL" },
                    i.name,
                    i.target,
                    i.computed,
                    i.delta,
                    i.tol
                );
                if let Some(n) = &i.note {
                    s += &format!("     {n}\n");
                }
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn entry(v: &Value) -> Result<persistency::linalg::C64> {
    match v {
        Value::Number(x) => Ok(c(x.as_f64().context("number")?, 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().context("real part")?;
            let im = p[1].as_f64().context("imaginary part")?;
            Ok(c(re, im))
        }
        _ => bail!("matrix entries must be numbers or [re, im] pairs"),
    }
}

fn load_operator(path: &Path) -> Result<CMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text)?;
    if let Some(m) = v.get_mut("matrix") {
        v = m.take();
    }
    let rows = v.as_array().context("operator must be a list of rows")?;
    let n = rows.len();
    if n == 0 {
        bail!("empty operator");
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().context("operator rows must be lists")?;
        if row.len() != n {
            bail!("operator must be square: row {i} has {} entries, expected {n}", row.len());
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = entry(e)?;
        }
    }
    Ok(m)
}

fn cmd_asymmetry(s: f64, l: f64, operator: &Path, format: Format) -> Result<ExitCode> {
    let b = load_operator(operator)?;
    let bound = asymmetry_bound(s, l, &b)?;
    let text = match format {
        Format::Text => format!("{bound}\n"),
        _ => serde_json::to_string(&serde_json::json!({ "s": s, "l": l, "bound": bound }))? + "\n",
    };
    emit(None, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { spec, out } => {
            let state = parse_spec(&spec)?.build()?;
            match out {
                Some(p) => write_state_file(&p, &state)?,
                None => {
                    let file = persistency::states::StateFile::from_state(&state);
                    emit(None, &(serde_json::to_string_pretty(&file)? + "\n"))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze(a) => cmd_analyze(a),
        Command::Table(t) => table::cmd_table(t),
        Command::Headline { seed, format, out } => cmd_headline(seed, format, out.as_deref()),
        Command::Asymmetry { s, l, operator, format } => cmd_asymmetry(s, l, &operator, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
