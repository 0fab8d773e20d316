//! Command-line front end: verification suites, Casimir decompositions of
//! scenario modules, PBW normal forms and restriction tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use phigamma::field::{fmt_q, parse_q, Q};
use phigamma::scenario::{bundled_named, Scenario, ScenarioError};
use phigamma::sheaf::{PartitionTable, SheafModule};
use phigamma::translate::{tensor_vk, SpectralReport};
use phigamma::ugl2::UEAElement;
use phigamma::verify::{run_suite, SuiteReport, SUITES};

const REPORT_DIR_VAR: &str = "PHIGAMMA_REPORT_DIR";

#[derive(Parser)]
#[command(
    name = "phigamma",
    version,
    about = "Exact checks on translated (φ, Γ)-modules"
)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite, or `all`.
    Verify { suite: String },
    /// Casimir decomposition of D ⊗ V_k for a scenario file or bundled scenario name.
    Decompose {
        file: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// PBW normal form of an expression in u+, u-, h, z, a+, a-.
    Pbw {
        expr: String,
        /// Reduce modulo z = ζ, c = μ.
        #[arg(long, value_name = "ζ,μ")]
        central: Option<String>,
    },
    /// Partition of unity by ball restrictions.
    Sheaf {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        level: u32,
    },
}

/// Exit 2: the input could not be used.
struct UsageError(String);

impl From<ScenarioError> for UsageError {
    fn from(e: ScenarioError) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, passed, name)) => {
            print!("{text}");
            if let Err(e) = save_report(&name, &text, cli.json) {
                eprintln!("error: could not write report: {e}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn save_report(name: &str, text: &str, json: bool) -> std::io::Result<()> {
    let Some(dir) = std::env::var_os(REPORT_DIR_VAR) else {
        return Ok(());
    };
    let dir = PathBuf::from(dir);
    std::fs::create_dir_all(&dir)?;
    let ext = if json { "json" } else { "txt" };
    std::fs::write(dir.join(format!("{name}.{ext}")), text)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

/// Rendered output, overall verdict, report file stem.
fn run(cli: &Cli) -> Result<(String, bool, String), UsageError> {
    match &cli.command {
        Command::Verify { suite } => verify(suite, cli.json),
        Command::Decompose {
            file,
            k,
            alpha,
            trunc,
        } => {
            let sc = load(file)?;
            let out = decompose(&sc, *k, alpha.as_deref(), *trunc)?;
            let text = if cli.json {
                to_json(&out)
            } else {
                out.render()
            };
            Ok((text, true, format!("decompose-{}-k{k}", sc.name)))
        }
        Command::Pbw { expr, central } => {
            let out = pbw(expr, central.as_deref())?;
            let text = if cli.json {
                to_json(&out)
            } else {
                format!("{}\n", out.normal_form)
            };
            Ok((text, true, "pbw".into()))
        }
        Command::Sheaf { scenario, level } => {
            let sc = load(scenario)?;
            let table = sheaf_table(&sc, *level)?;
            let passed = table.passed;
            let text = if cli.json {
                to_json(&table)
            } else {
                table.render()
            };
            Ok((text, passed, format!("sheaf-{}-level{level}", sc.name)))
        }
    }
}

fn load(file: &str) -> Result<Scenario, UsageError> {
    let path = Path::new(file);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    bundled_named(file)
        .ok_or_else(|| UsageError(format!("no scenario file or bundled scenario `{file}`")))
}

fn verify(suite: &str, json: bool) -> Result<(String, bool, String), UsageError> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite]
    };
    let reports: Vec<SuiteReport> = names
        .iter()
        .map(|s| run_suite(s).map_err(|e| UsageError(e.to_string())))
        .collect::<Result<_, _>>()?;
    let passed = reports.iter().all(|r| r.passed());
    let text = if json {
        to_json(&reports)
    } else {
        reports
            .iter()
            .map(|r| format!("{r}\n"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    Ok((text, passed, format!("verify-{suite}")))
}

#[derive(Serialize)]
struct DecomposeRow {
    mu: String,
    indices: Vec<usize>,
    dim: usize,
    kernel_dims: Vec<usize>,
    sen: Option<String>,
    expected_sen: String,
    sen_divides: bool,
    semisimple: bool,
    split: Option<bool>,
    tag: String,
}

#[derive(Serialize)]
struct DecomposeOutput {
    scenario: String,
    label: String,
    k: usize,
    alpha: String,
    trunc: usize,
    precision: usize,
    rank: usize,
    residual: usize,
    rows: Vec<DecomposeRow>,
}

impl DecomposeOutput {
    fn from_report(name: &str, rep: &SpectralReport) -> Self {
        DecomposeOutput {
            scenario: name.into(),
            label: rep.label.clone(),
            k: rep.k,
            alpha: fmt_q(&rep.alpha),
            trunc: rep.trunc,
            precision: rep.precision,
            rank: rep.rank,
            residual: rep.residual,
            rows: rep
                .pieces
                .iter()
                .map(|p| DecomposeRow {
                    mu: fmt_q(&p.mu),
                    indices: p.indices.clone(),
                    dim: p.dim(),
                    kernel_dims: p.kernel_dims.clone(),
                    sen: p.sen.as_ref().map(|s| s.to_string()),
                    expected_sen: p.expected_sen.to_string(),
                    sen_divides: p.sen_divides,
                    semisimple: p.semisimple,
                    split: p.kernel.as_ref().and_then(|k| k.split()),
                    tag: p.tag.to_string(),
                })
                .collect(),
        }
    }

    fn render(&self) -> String {
        let mut out = format!(
            "{} ({}) ⊗ V_{}  α = {}  N = {}  usable precision {}  rank {}  residual {}\n",
            self.scenario,
            self.label,
            self.k,
            self.alpha,
            self.trunc,
            self.precision,
            self.rank,
            self.residual
        );
        let header = [
            "μ",
            "i",
            "dim",
            "ker (c-μ)^m",
            "Sen polynomial",
            "divides",
            "semisimple",
            "split",
            "tag",
        ];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            let list = |v: &[usize]| {
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            rows.push(vec![
                r.mu.clone(),
                list(&r.indices),
                r.dim.to_string(),
                list(&r.kernel_dims),
                r.sen.clone().unwrap_or_else(|| "-".into()),
                r.sen_divides.to_string(),
                r.semisimple.to_string(),
                r.split.map_or("-".into(), |b| b.to_string()),
                r.tag.clone(),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for r in rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn parse_rational(s: &str, what: &str) -> Result<Q, UsageError> {
    parse_q(s).ok_or_else(|| UsageError(format!("{what}: `{s}` is not a rational number")))
}

fn decompose(
    sc: &Scenario,
    k: usize,
    alpha: Option<&str>,
    trunc: Option<usize>,
) -> Result<DecomposeOutput, UsageError> {
    let mut d = sc.module_at(trunc.unwrap_or(sc.trunc))?;
    if let Some(a) = alpha {
        d = d.with_alpha(parse_rational(a, "--alpha")?);
    }
    let tm = tensor_vk(&d, k).map_err(|e| UsageError(e.to_string()))?;
    let rep = tm
        .spectral_decomposition()
        .map_err(|e| UsageError(e.to_string()))?;
    Ok(DecomposeOutput::from_report(&sc.name, &rep))
}

#[derive(Serialize)]
struct PbwOutput {
    input: String,
    central: Option<[String; 2]>,
    normal_form: String,
}

fn pbw(expr: &str, central: Option<&str>) -> Result<PbwOutput, UsageError> {
    let e = UEAElement::parse(expr).map_err(|err| UsageError(format!("expression: {err}")))?;
    let mut nf = e.normal_form();
    let mut params = None;
    if let Some(c) = central {
        let (zeta, mu) = c
            .split_once(',')
            .ok_or_else(|| UsageError(format!("--central expects ζ,μ, got `{c}`")))?;
        let (zeta, mu) = (parse_rational(zeta, "ζ")?, parse_rational(mu, "μ")?);
        nf = nf.reduce_central(&zeta, &mu);
        params = Some([fmt_q(&zeta), fmt_q(&mu)]);
    }
    Ok(PbwOutput {
        input: expr.into(),
        central: params,
        normal_form: nf.to_string(),
    })
}

#[derive(Serialize)]
struct SheafRow {
    center: u64,
    image_dim: usize,
    idempotent: bool,
    orthogonal: bool,
}

#[derive(Serialize)]
struct SheafOutput {
    scenario: String,
    prime: u64,
    level: u32,
    trunc: usize,
    precision: usize,
    sums_to_identity: bool,
    precision_law: bool,
    passed: bool,
    rows: Vec<SheafRow>,
}

impl SheafOutput {
    fn new(name: &str, t: &PartitionTable) -> Self {
        SheafOutput {
            scenario: name.into(),
            prime: t.prime,
            level: t.level,
            trunc: t.trunc,
            precision: t.precision,
            sums_to_identity: t.sums_to_identity,
            precision_law: t.precision_law,
            passed: t.passed(),
            rows: t
                .rows
                .iter()
                .map(|r| SheafRow {
                    center: r.center,
                    image_dim: r.image_dim,
                    idempotent: r.idempotent,
                    orthogonal: r.orthogonal,
                })
                .collect(),
        }
    }

    fn render(&self) -> String {
        let mut out = format!(
            "{}: balls i + {}^{} Z_p, N = {}, output precision {}\n",
            self.scenario, self.prime, self.level, self.trunc, self.precision
        );
        out.push_str("center  image dim  idempotent  orthogonal\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<6}  {:<9}  {:<10}  {}\n",
                r.center, r.image_dim, r.idempotent, r.orthogonal
            ));
        }
        out.push_str(&format!(
            "sum = id: {}  precision law: {}  {}\n",
            self.sums_to_identity,
            self.precision_law,
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }
}

fn sheaf_table(sc: &Scenario, level: u32) -> Result<SheafOutput, UsageError> {
    let d = sc.module()?;
    let m = SheafModule::from_module(&d).map_err(|e| UsageError(e.to_string()))?;
    let t = m
        .partition_table(d.trunc(), level)
        .map_err(|e| UsageError(e.to_string()))?;
    Ok(SheafOutput::new(&sc.name, &t))
}
