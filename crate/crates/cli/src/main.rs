//! `torsion-census`: invariants, bounds, point counts, modular units and the
//! census from the command line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use torsion_census::bounds::{abramovich_lower, castelnuovo_severi, Quantity};
use torsion_census::census::{
    classify, default_facts, load_facts, verify_trace, CensusOptions, CensusReport, Fact, FactEntry, TorsionGroup,
};
use torsion_census::field::FiniteField;
use torsion_census::pointcount::{count_points, gonality_lower_from_count};
use torsion_census::units::{
    search_exact_degree, search_min_degree, siegel_order_matrix, unit_to_bound, verify_candidate, SearchOptions,
    UnitCandidate, DEFAULT_BOX,
};
use torsion_census::{Invariants, SubgroupSpec};

const BUDGET_ENV: &str = "TORSION_CENSUS_BUDGET";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] torsion_census::Error),
    #[error("{0}")]
    Input(String),
    #[error("verification failed at {0} item(s)")]
    Verification(usize),
    #[error("census result differs from the expected set")]
    Unexpected,
    #[error("{0} shape(s) left undecided")]
    Undecided(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Undecided(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "torsion-census", version, about = "Modular-curve invariants, gonality bounds and the torsion census")]
struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Worker threads for enumeration-heavy commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundRule {
    Abramovich,
    Cs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index, elliptic points, cusps and genus.
    Invariants {
        #[arg(long)]
        curve: SubgroupSpec,
    },
    /// A single gonality bound.
    Bounds {
        #[arg(long)]
        curve: SubgroupSpec,
        #[arg(long, value_enum)]
        rule: BoundRule,
        /// Lower bound for the gonality of X1(2n) (cs only; default from the shipped facts).
        #[arg(long)]
        gon_y: Option<u64>,
    },
    /// Points of X1(2,2n) over F_{p^k}.
    Count {
        #[arg(long)]
        curve: SubgroupSpec,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Search for a modular unit of small degree.
    Units {
        #[arg(long)]
        curve: SubgroupSpec,
        #[arg(long, default_value_t = 7)]
        max_degree: u64,
        /// Look for degree exactly max-degree instead of the least degree.
        #[arg(long)]
        exact: bool,
        #[arg(long = "box", default_value_t = DEFAULT_BOX)]
        box_bound: i64,
        /// Seconds; overridden by TORSION_CENSUS_BUDGET.
        #[arg(long, default_value_t = 600)]
        budget: u64,
    },
    /// Decide membership in Phi^inf(d) and emit the proof trace.
    Census {
        #[arg(long, default_value_t = 7)]
        degree: u64,
        /// Facts file, or "default" for the shipped one.
        #[arg(long, default_value = "default")]
        facts: String,
        /// Write the full report (verdicts and trace) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// JSON list of the groups expected to be members.
        #[arg(long)]
        expect: Option<PathBuf>,
        /// Exit with status 1 when shapes remain undecided.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = 20)]
        unit_max_level: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [9u64, 49])]
        count_q: Vec<u64>,
        #[arg(long, default_value_t = 600)]
        budget: u64,
    },
    /// Replay a report written by `census --trace`, or re-check a unit
    /// candidate (the `search.candidate` object printed by `units`).
    Verify {
        #[arg(long, required_unless_present = "candidate", conflicts_with = "candidate")]
        trace: Option<PathBuf>,
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
}

/// What a command produced, in both structured and tabular form.
struct Output {
    payload: Value,
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    warnings: Vec<String>,
    /// Extra input bytes folded into the digest (file contents).
    inputs: Vec<u8>,
    failure: Option<CliError>,
}

impl Output {
    fn new(payload: impl Serialize, headers: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Output {
            payload: serde_json::to_value(payload).expect("payloads serialise"),
            headers,
            rows,
            warnings: Vec::new(),
            inputs: Vec::new(),
            failure: None,
        }
    }
}

#[derive(Serialize)]
struct OutputEnvelope<'a> {
    command: &'a [String],
    version: &'static str,
    inputs_digest: String,
    payload: &'a Value,
    warnings: &'a [String],
}

fn budget(default_secs: u64) -> CliResult<Duration> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .parse()
            .map(Duration::from_secs)
            .map_err(|_| CliError::Input(format!("{BUDGET_ENV} must be a number of seconds, got {v:?}"))),
        Err(_) => Ok(Duration::from_secs(default_secs)),
    }
}

fn read(path: &PathBuf) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn invariants(curve: SubgroupSpec) -> CliResult<Output> {
    let inv = Invariants::compute(curve)?;
    let row = vec![
        curve.to_string(),
        inv.index.to_string(),
        inv.nu2.to_string(),
        inv.nu3.to_string(),
        inv.cusps.len().to_string(),
        inv.genus.to_string(),
    ];
    Ok(Output::new(&inv, vec!["curve", "index", "nu2", "nu3", "cusps", "genus"], vec![row]))
}

fn bounds(curve: SubgroupSpec, rule: BoundRule, gon_y: Option<u64>) -> CliResult<Output> {
    let fact = match rule {
        BoundRule::Abramovich => abramovich_lower(curve, Invariants::compute(curve)?.index),
        BoundRule::Cs => {
            let n = curve
                .half_level()
                .ok_or_else(|| CliError::Input(format!("the cs rule needs a curve X1(2,2n), got {curve}")))?;
            let y = SubgroupSpec::gamma1(2 * n)?;
            let gon_y = match gon_y {
                Some(g) => g,
                None => default_facts()
                    .iter()
                    .find_map(|e| match &e.fact {
                        Fact::Bound(b) if b.curve == y && b.quantity == Quantity::GonQ => {
                            Some(torsion_census::arith::ceil_rat(b.value) as u64)
                        }
                        _ => None,
                    })
                    .ok_or_else(|| CliError::Input(format!("no gonality bound for {y}; pass --gon-y")))?,
            };
            let (gx, gy) = (Invariants::compute(curve)?.genus, Invariants::compute(y)?.genus);
            castelnuovo_severi(curve, gx, gy, 2, gon_y)?
        }
    };
    let b = &fact.bound;
    let row = vec![
        b.curve.to_string(),
        b.quantity.to_string(),
        b.relation.symbol().to_string(),
        torsion_census::arith::format_rational(&b.value),
        fact.provenance.rule.clone(),
    ];
    Ok(Output::new(&fact, vec!["curve", "quantity", "relation", "value", "rule"], vec![row]))
}

fn count(curve: SubgroupSpec, p: u64, k: u32) -> CliResult<Output> {
    let q = p
        .checked_pow(k)
        .ok_or_else(|| CliError::Input(format!("{p}^{k} overflows")))?;
    let field = FiniteField::new(q)?;
    let record = count_points(curve, &field)?;
    let bound = gonality_lower_from_count(&record);
    let row = vec![
        curve.to_string(),
        p.to_string(),
        k.to_string(),
        q.to_string(),
        record.noncuspidal.to_string(),
        record.cuspidal.to_string(),
        record.total.to_string(),
        torsion_census::arith::format_rational(&bound.bound.value),
    ];
    Ok(Output::new(
        json!({ "record": record, "bound": bound }),
        vec!["curve", "p", "k", "q", "noncuspidal", "cuspidal", "total", "gon_fp_lower"],
        vec![row],
    ))
}

fn units(curve: SubgroupSpec, max_degree: u64, exact: bool, box_bound: i64, secs: u64) -> CliResult<Output> {
    let opts = SearchOptions { box_bound, budget: budget(secs)? };
    let matrix = siegel_order_matrix(curve)?;
    let report = if exact {
        search_exact_degree(&matrix, max_degree, opts)?
    } else {
        search_min_degree(&matrix, max_degree, opts)?
    };
    let mut out_rows = Vec::new();
    let mut facts = None;
    let mut warnings = Vec::new();
    match &report.candidate {
        Some(c) => {
            let (points, bound) = unit_to_bound(c, &matrix)?;
            out_rows.push(vec![
                curve.to_string(),
                c.degree.to_string(),
                format!("{:?}", c.exponents),
                report.nodes.to_string(),
                report.complete.to_string(),
            ]);
            facts = Some(json!({ "infinitely_many_points": points, "bound": bound }));
        }
        None => {
            warnings.push(format!(
                "no certificate found for {curve} (this does not prove that none exists){}",
                if report.complete { "" } else { "; time budget exhausted" }
            ));
            out_rows.push(vec![curve.to_string(), "-".into(), "-".into(), report.nodes.to_string(), report.complete.to_string()]);
        }
    }
    let mut out = Output::new(
        json!({ "rows": matrix.rows.len(), "cusps": matrix.cusps.len(), "search": report, "facts": facts }),
        vec!["curve", "degree", "exponents", "nodes", "complete"],
        out_rows,
    );
    out.warnings = warnings;
    Ok(out)
}

fn census_rows(report: &CensusReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .verdicts
        .iter()
        .map(|v| {
            let status = serde_json::to_value(v.status).expect("status serialises");
            vec![
                v.group.to_string(),
                status.as_str().unwrap_or_default().to_string(),
                v.step.map(|s| s.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    rows.extend(
        report
            .families
            .iter()
            .map(|f| vec![format!("({},n) for n >= {}", f.from.m, f.from.n), "non_member".into(), f.step.to_string()]),
    );
    rows
}

#[allow(clippy::too_many_arguments)]
fn census(
    degree: u64,
    facts: &str,
    trace: Option<PathBuf>,
    expect: Option<PathBuf>,
    strict: bool,
    unit_max_level: u64,
    count_q: Vec<u64>,
    secs: u64,
) -> CliResult<Output> {
    let mut inputs = Vec::new();
    let entries: Vec<FactEntry> = if facts == "default" {
        inputs.extend_from_slice(torsion_census::census::DEFAULT_FACTS.as_bytes());
        default_facts()
    } else {
        let path = PathBuf::from(facts);
        inputs.extend(read(&path)?);
        load_facts(&path)?
    };
    let opts = CensusOptions {
        degree,
        unit_max_level,
        search: SearchOptions { box_bound: DEFAULT_BOX, budget: budget(secs)? },
        count_fields: count_q,
    };
    let report = classify(&entries, &opts)?;
    let verification = verify_trace(&report);
    if let Some(path) = &trace {
        let text = serde_json::to_string_pretty(&report).expect("reports serialise");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut failure = None;
    let mut expected_match = None;
    if let Some(path) = &expect {
        let bytes = read(path)?;
        inputs.extend(&bytes);
        let want: Vec<TorsionGroup> = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut want = want;
        want.sort();
        let matches = want == report.members() && report.is_complete();
        expected_match = Some(matches);
        if !matches {
            failure = Some(CliError::Unexpected);
        }
    }
    if !verification.ok() {
        failure = Some(CliError::Verification(verification.bad.len()));
    } else if failure.is_none() && strict && !report.undecided().is_empty() {
        failure = Some(CliError::Undecided(report.undecided().len()));
    }
    let payload = json!({
        "degree": degree,
        "members": report.members(),
        "members_canonical": report.members_canonical(),
        "nonmembers": report.nonmembers(),
        "undecided": report.undecided(),
        "families": report.families,
        "unsupported_m": report.unsupported_m,
        "trace_steps": report.trace.steps.len(),
        "trace_verified": verification.ok(),
        "matches_expected": expected_match,
    });
    let mut out = Output::new(payload, vec!["group", "status", "step"], census_rows(&report));
    out.warnings = report.notes.clone();
    out.inputs = inputs;
    out.failure = failure;
    Ok(out)
}

fn verify(path: &PathBuf) -> CliResult<Output> {
    let bytes = read(path)?;
    let report: CensusReport = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{} is not a census report: {e}", path.display())))?;
    let v = verify_trace(&report);
    let rows = if v.ok() {
        vec![vec!["all".to_string(), "ok".to_string()]]
    } else {
        v.bad.iter().map(|(id, why)| vec![id.to_string(), why.clone()]).collect()
    };
    let mut out = Output::new(
        json!({ "steps": report.trace.steps.len(), "ok": v.ok(), "bad": v.bad }),
        vec!["step", "result"],
        rows,
    );
    out.inputs = bytes;
    if !v.ok() {
        out.failure = Some(CliError::Verification(v.bad.len()));
    }
    Ok(out)
}

fn verify_unit(path: &PathBuf) -> CliResult<Output> {
    let bytes = read(path)?;
    let candidate: UnitCandidate = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{} is not a unit candidate: {e}", path.display())))?;
    let matrix = siegel_order_matrix(candidate.curve)?;
    let ok = verify_candidate(&candidate, &matrix);
    let mut out = Output::new(
        json!({ "curve": candidate.curve, "degree": candidate.degree, "ok": ok }),
        vec!["curve", "degree", "result"],
        vec![vec![candidate.curve.to_string(), candidate.degree.to_string(), if ok { "ok" } else { "rejected" }.into()]],
    );
    out.inputs = bytes;
    if !ok {
        out.failure = Some(CliError::Verification(1));
    }
    Ok(out)
}

fn run(cli: Cli) -> CliResult<Output> {
    match cli.command {
        Command::Invariants { curve } => invariants(curve),
        Command::Bounds { curve, rule, gon_y } => bounds(curve, rule, gon_y),
        Command::Count { curve, p, k } => count(curve, p, k),
        Command::Units { curve, max_degree, exact, box_bound, budget } => {
            units(curve, max_degree, exact, box_bound, budget)
        }
        Command::Census { degree, facts, trace, expect, strict, unit_max_level, count_q, budget } => {
            census(degree, &facts, trace, expect, strict, unit_max_level, count_q, budget)
        }
        Command::Verify { trace: Some(trace), .. } => verify(&trace),
        Command::Verify { candidate: Some(c), .. } => verify_unit(&c),
        Command::Verify { .. } => Err(CliError::Input("verify needs --trace or --candidate".into())),
    }
}

fn render(format: Format, argv: &[String], out: &Output) -> String {
    match format {
        Format::Json => {
            let mut hasher = Sha256::new();
            hasher.update(serde_json::to_vec(argv).expect("argv serialises"));
            hasher.update(&out.inputs);
            let envelope = OutputEnvelope {
                command: argv,
                version: env!("CARGO_PKG_VERSION"),
                inputs_digest: hex::encode(hasher.finalize()),
                payload: &out.payload,
                warnings: &out.warnings,
            };
            serde_json::to_string_pretty(&envelope).expect("envelopes serialise") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&out.headers).expect("in-memory write");
            for r in &out.rows {
                w.write_record(r).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
        }
        Format::Table => {
            let mut widths: Vec<usize> = out.headers.iter().map(|h| h.chars().count()).collect();
            for r in &out.rows {
                for (w, cell) in widths.iter_mut().zip(r) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: Vec<&str>| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut text = line(out.headers.clone());
            text += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect());
            for r in &out.rows {
                text += &line(r.iter().map(|s| s.as_str()).collect());
            }
            text
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let format = cli.format;
    match run(cli) {
        Ok(mut out) => {
            print!("{}", render(format, &argv, &out));
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            match out.failure.take() {
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
