//! Command-line surface: nice-prime scanning and density, Frobenius orders,
//! purity-window and compatible characteristic-polynomial selection, ledger
//! evaluation, the lifting simulator, and growth schedules.
//!
//! Exit codes: 0 for success (mathematically negative answers included),
//! 2 for usage and validation problems, 3 for domain errors.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use glk_core::charpoly::{
    compatible_choice, purity_window, unconstrained_window, CharPolyError, TraceConstraint,
};
use glk_core::local::{nice_density_oracle, scan_nice, ImageModel};
use glk_core::rep_source::{
    EllipticCurveSource, ExplicitFrobTable, RepresentationSource, SplittingFieldSource,
    DEFAULT_MAX_PRIME,
};
use glk_core::residue::is_prime_u64;
use glk_core::selmer::Ledger;
use glk_core::sim::{
    growth_schedule, growth_violation_check, run_simulation, CountingFunction, SimConfig,
};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "glk", version, about = "Exact mod-p^m deformation toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nice-prime predicates over a representation source.
    Nice {
        #[command(subcommand)]
        command: NiceCommand,
    },
    /// Frobenius data from splitting-field sources.
    Frob {
        #[command(subcommand)]
        command: FrobCommand,
    },
    /// Purity-constrained characteristic polynomial selection.
    Purity {
        #[command(subcommand)]
        command: PurityCommand,
    },
    /// Two-prime compatible characteristic polynomial selection.
    Compatible(CompatibleArgs),
    /// Selmer-dimension ledgers.
    Selmer {
        #[command(subcommand)]
        command: SelmerCommand,
    },
    /// The seeded lifting simulator.
    Lift {
        #[command(subcommand)]
        command: LiftCommand,
    },
    /// Stage schedules for the ramified-prime growth argument.
    Growth {
        #[command(subcommand)]
        command: GrowthCommand,
    },
}

#[derive(Subcommand)]
enum NiceCommand {
    /// Scan primes up to a limit, reporting the nice predicates per prime.
    Scan(ScanArgs),
    /// Exact nice-prime density for a finite image, by enumeration.
    Density(DensityArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Elliptic curve a1,a2,a3,a4,a6 (long Weierstrass form).
    #[arg(long, value_name = "A1,A2,A3,A4,A6")]
    curve: Option<String>,
    /// Explicit Frobenius table (JSON file).
    #[arg(long, value_name = "FILE")]
    table: Option<PathBuf>,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    limit: u64,
    /// Output prefix: writes <out>.csv, <out>.summary.json, <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// "full" or "sl2:<det-generator>".
    #[arg(long, default_value = "full")]
    image: String,
}

#[derive(Subcommand)]
enum FrobCommand {
    /// Order of Frobenius on the roots of a monic integer polynomial mod q.
    Order(FrobOrderArgs),
}

#[derive(Args)]
struct FrobOrderArgs {
    /// Coefficients, highest degree first, e.g. 1,0,1 for x^2+1.
    #[arg(long, value_name = "COEFFS")]
    poly: Option<String>,
    /// Use the built-in degree-7 Zeh-Marschke polynomial.
    #[arg(long, conflicts_with = "poly")]
    zeh_marschke: bool,
    #[arg(long)]
    q: u64,
}

#[derive(Subcommand)]
enum PurityCommand {
    /// Minimal-|a| trace in the purity window for one congruence.
    Window(PurityWindowArgs),
}

#[derive(Args)]
struct PurityWindowArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    trace: Option<i128>,
    /// Drop the purity requirement (weight-0 support).
    #[arg(long)]
    forgo_purity: bool,
    /// Batch mode: CSV of r,trace pairs, one per line.
    #[arg(long, value_name = "FILE")]
    batch: Option<PathBuf>,
}

#[derive(Args)]
struct CompatibleArgs {
    #[arg(long)]
    r: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// First constraint p,m,t.
    #[arg(long, value_name = "P,M,T")]
    c1: String,
    /// Second constraint q,m,t.
    #[arg(long, value_name = "Q,M,T")]
    c2: String,
}

#[derive(Subcommand)]
enum SelmerCommand {
    /// Evaluate a ledger file: the Selmer minus dual-Selmer dimension.
    Ledger(SelmerLedgerArgs),
}

#[derive(Args)]
struct SelmerLedgerArgs {
    #[arg(long, value_name = "FILE")]
    file: PathBuf,
}

#[derive(Subcommand)]
enum LiftCommand {
    /// Run the seeded stage simulation and write the report.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 4)]
    stages: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Auxiliary primes per stage (the dual-basis size).
    #[arg(long, default_value_t = 2)]
    dual_selmer_dim: u32,
    /// Report path; also writes <out>.events.jsonl and <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GrowthCommand {
    /// Minimal stage bounds for a counting function and the violation table.
    Schedule(GrowthScheduleArgs),
}

#[derive(Args)]
struct GrowthScheduleArgs {
    /// Synthetic density D for N(x) = D x / ln x.
    #[arg(long)]
    density: Option<f64>,
    /// Empirical counts: file with one counted prime per line.
    #[arg(long, value_name = "FILE")]
    counts: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    stages: u32,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
}

enum CmdError {
    Usage(String),
    Domain(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Domain(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Domain(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

fn domain(msg: impl std::fmt::Display) -> CmdError {
    CmdError::Domain(msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Nice { command } => match command {
            NiceCommand::Scan(args) => cmd_nice_scan(args),
            NiceCommand::Density(args) => cmd_nice_density(args),
        },
        Command::Frob { command } => match command {
            FrobCommand::Order(args) => cmd_frob_order(args),
        },
        Command::Purity { command } => match command {
            PurityCommand::Window(args) => cmd_purity_window(args),
        },
        Command::Compatible(args) => cmd_compatible(args),
        Command::Selmer { command } => match command {
            SelmerCommand::Ledger(args) => cmd_selmer_ledger(args),
        },
        Command::Lift { command } => match command {
            LiftCommand::Simulate(args) => cmd_lift_simulate(args),
        },
        Command::Growth { command } => match command {
            GrowthCommand::Schedule(args) => cmd_growth_schedule(args),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn require_odd_prime_at_least_5(p: u64) -> Result<(), CmdError> {
    if !is_prime_u64(p) || p < 5 {
        return Err(usage(format!("p must be prime >= 5, got {}", p)));
    }
    Ok(())
}

fn parse_int_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CmdError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| usage(format!("cannot parse {} entry '{}'", what, part)))
        })
        .collect()
}

fn max_prime_bound() -> u64 {
    std::env::var("GLK_MAX_PRIME")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_PRIME)
}

fn ensure_parent_dir(path: &Path) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| usage(format!("cannot create {}: {}", parent.display(), e)))?;
        }
    }
    Ok(())
}

fn build_source(
    curve: &Option<String>,
    table: &Option<PathBuf>,
    manifest: &mut RunManifest,
) -> Result<RepresentationSource, CmdError> {
    match (curve, table) {
        (Some(raw), None) => {
            let coeffs: Vec<i64> = parse_int_list(raw, "curve coefficient")?;
            if coeffs.len() != 5 {
                return Err(usage("curve needs exactly a1,a2,a3,a4,a6"));
            }
            let curve =
                EllipticCurveSource::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4])
                    .map_err(domain)?
                    .with_max_prime(max_prime_bound());
            Ok(RepresentationSource::Curve(curve))
        }
        (None, Some(path)) => {
            manifest
                .record_input(path)
                .map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            let body = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            let table: ExplicitFrobTable = serde_json::from_str(&body)
                .map_err(|e| usage(format!("malformed table JSON: {}", e)))?;
            Ok(RepresentationSource::Table(table))
        }
        _ => Err(usage("exactly one of --curve or --table is required")),
    }
}

fn cmd_nice_scan(args: ScanArgs) -> Result<(), CmdError> {
    require_odd_prime_at_least_5(args.p)?;
    if args.m < 1 {
        return Err(usage("m must be at least 1"));
    }
    if args.limit > max_prime_bound() {
        return Err(usage(format!(
            "limit {} exceeds GLK_MAX_PRIME = {}",
            args.limit,
            max_prime_bound()
        )));
    }
    let mut manifest = RunManifest::new("nice scan", None);
    let source = build_source(&args.curve, &args.table, &mut manifest)?;
    let (records, summary) =
        scan_nice(&source, args.p, args.m, args.k, args.limit).map_err(domain)?;

    let mut csv = String::from("q,is_nice,is_rho_m_nice,trace_mod_p_m\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.q, r.is_nice, r.is_rho_m_nice, r.trace
        ));
    }
    let summary_json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";

    match &args.out {
        Some(prefix) => {
            ensure_parent_dir(prefix)?;
            let csv_path = prefix.with_extension("csv");
            let summary_path = prefix.with_extension("summary.json");
            std::fs::write(&csv_path, &csv)
                .map_err(|e| usage(format!("cannot write {}: {}", csv_path.display(), e)))?;
            std::fs::write(&summary_path, &summary_json)
                .map_err(|e| usage(format!("cannot write {}: {}", summary_path.display(), e)))?;
            manifest
                .write_beside(&csv_path)
                .map_err(|e| usage(format!("cannot write manifest: {}", e)))?;
            println!("wrote {} records to {}", records.len(), csv_path.display());
        }
        None => {
            print!("{}", csv);
            eprint!("{}", summary_json);
        }
    }
    Ok(())
}

fn cmd_nice_density(args: DensityArgs) -> Result<(), CmdError> {
    require_odd_prime_at_least_5(args.p)?;
    let image = parse_image(&args.image)?;
    let (num, den) = nice_density_oracle(args.p, args.k, image);
    let note = match image {
        ImageModel::FullGl2 => "full GL2 image",
        ImageModel::ContainsSl2 { .. } => {
            "image containing SL2; pair weighting over the det fiber is a modeling choice"
        }
    };
    println!(
        "{}",
        json!({
            "p": args.p,
            "k": args.k,
            "density": format!("{}/{}", num, den),
            "density_approx": num as f64 / den as f64,
            "image_model_note": note,
        })
    );
    Ok(())
}

fn parse_image(raw: &str) -> Result<ImageModel, CmdError> {
    if raw == "full" {
        return Ok(ImageModel::FullGl2);
    }
    if let Some(gen) = raw.strip_prefix("sl2:") {
        let det_generator: u64 = gen
            .parse()
            .map_err(|_| usage("image generator must be an integer"))?;
        return Ok(ImageModel::ContainsSl2 { det_generator });
    }
    Err(usage("image must be 'full' or 'sl2:<det-generator>'"))
}

fn cmd_frob_order(args: FrobOrderArgs) -> Result<(), CmdError> {
    if !is_prime_u64(args.q) {
        return Err(usage(format!("q must be prime, got {}", args.q)));
    }
    let source = if args.zeh_marschke {
        SplittingFieldSource::zeh_marschke()
    } else {
        let raw = args
            .poly
            .as_ref()
            .ok_or_else(|| usage("either --poly or --zeh-marschke is required"))?;
        let coeffs: Vec<i128> = parse_int_list(raw, "polynomial coefficient")?;
        if coeffs.first() != Some(&1) {
            return Err(usage(
                "polynomial must be monic (leading coefficient 1 first)",
            ));
        }
        SplittingFieldSource::new(&coeffs).map_err(domain)?
    };
    let order = source.frobenius_order(args.q).map_err(domain)?;
    let degrees = source.factor_degrees(args.q).map_err(domain)?;
    println!(
        "{}",
        json!({
            "q": args.q,
            "order": order,
            "factor_degrees": degrees.iter().map(|&(d, c)| json!([d, c])).collect::<Vec<_>>(),
        })
    );
    Ok(())
}

fn purity_result_json(
    r: u64,
    k: u32,
    result: Result<glk_core::charpoly::CharPolyChoice, CharPolyError>,
) -> Result<serde_json::Value, CmdError> {
    match result {
        Ok(choice) => {
            let rk = (r as i128).pow(k);
            Ok(json!({
                "r": r,
                "k": k,
                "a": choice.a,
                "pure": choice.pure,
                "polynomial": [1, -choice.a, rk],
            }))
        }
        Err(CharPolyError::Infeasible { .. }) => Ok(json!({
            "r": r,
            "k": k,
            "infeasible": true,
        })),
        Err(e @ CharPolyError::NotPrime(_)) | Err(e @ CharPolyError::ConstraintClash) => {
            Err(usage(e.to_string()))
        }
        Err(e) => Err(domain(e)),
    }
}

fn cmd_purity_window(args: PurityWindowArgs) -> Result<(), CmdError> {
    require_odd_prime_at_least_5(args.p)?;
    let constraint_for =
        |t: i128| TraceConstraint::new(args.p, args.m, t).map_err(|e| usage(e.to_string()));
    let select = |r: u64, t: i128| -> Result<serde_json::Value, CmdError> {
        let c = constraint_for(t)?;
        let result = if args.forgo_purity {
            unconstrained_window(r, args.k, c)
        } else {
            purity_window(r, args.k, c)
        };
        purity_result_json(r, args.k, result)
    };
    match (&args.batch, args.r, args.trace) {
        (Some(path), _, _) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            let mut rows = vec![];
            for (lineno, line) in body.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') || line.starts_with("r,") {
                    continue;
                }
                let parts: Vec<&str> = line.split(',').collect();
                if parts.len() != 2 {
                    return Err(usage(format!("batch line {} needs r,trace", lineno + 1)));
                }
                let r: u64 = parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad r on line {}", lineno + 1)))?;
                let t: i128 = parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad trace on line {}", lineno + 1)))?;
                rows.push(select(r, t)?);
            }
            println!("{}", serde_json::Value::Array(rows));
            Ok(())
        }
        (None, Some(r), Some(t)) => {
            println!("{}", select(r, t)?);
            Ok(())
        }
        _ => Err(usage("provide --r and --trace, or --batch FILE")),
    }
}

fn parse_constraint(raw: &str) -> Result<TraceConstraint, CmdError> {
    let parts: Vec<i128> = parse_int_list(raw, "constraint")?;
    if parts.len() != 3 {
        return Err(usage("constraint must be p,m,t"));
    }
    let p = u64::try_from(parts[0]).map_err(|_| usage("constraint prime out of range"))?;
    let m = u32::try_from(parts[1]).map_err(|_| usage("constraint exponent out of range"))?;
    TraceConstraint::new(p, m, parts[2]).map_err(|e| usage(e.to_string()))
}

fn cmd_compatible(args: CompatibleArgs) -> Result<(), CmdError> {
    let c1 = parse_constraint(&args.c1)?;
    let c2 = parse_constraint(&args.c2)?;
    if c1.p == c2.p {
        return Err(usage("the two constraints must use distinct primes"));
    }
    let result = compatible_choice(args.r, args.k, c1, c2);
    println!("{}", purity_result_json(args.r, args.k, result)?);
    Ok(())
}

fn cmd_selmer_ledger(args: SelmerLedgerArgs) -> Result<(), CmdError> {
    let body = std::fs::read_to_string(&args.file)
        .map_err(|e| usage(format!("cannot read {}: {}", args.file.display(), e)))?;
    let ledger: Ledger =
        serde_json::from_str(&body).map_err(|e| usage(format!("malformed ledger JSON: {}", e)))?;
    ledger.validate().map_err(domain)?;
    println!(
        "{}",
        json!({
            "difference": ledger.wiles_difference(),
            "balanced": ledger.auxiliary_balance(),
            "places": ledger.places.len(),
        })
    );
    Ok(())
}

fn cmd_lift_simulate(args: SimulateArgs) -> Result<(), CmdError> {
    require_odd_prime_at_least_5(args.p)?;
    if args.k < 1 {
        return Err(usage("k must be at least 1"));
    }
    if args.stages < 1 {
        return Err(usage("stages must be at least 1"));
    }
    let mut cfg = SimConfig::new(args.p, args.k, args.stages, args.seed);
    cfg.dual_selmer_dim = args.dual_selmer_dim;
    let (report, events) = run_simulation(&cfg).map_err(domain)?;
    let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => {
            ensure_parent_dir(path)?;
            std::fs::write(path, &body)
                .map_err(|e| usage(format!("cannot write {}: {}", path.display(), e)))?;
            let mut events_path = path.as_os_str().to_owned();
            events_path.push(".events.jsonl");
            let mut lines = String::new();
            for event in &events {
                lines.push_str(&serde_json::to_string(event).expect("event serializes"));
                lines.push('\n');
            }
            std::fs::write(Path::new(&events_path), lines)
                .map_err(|e| usage(format!("cannot write events: {}", e)))?;
            RunManifest::new("lift simulate", Some(args.seed))
                .write_beside(path)
                .map_err(|e| usage(format!("cannot write manifest: {}", e)))?;
            let all_green = report.stage_blocks.iter().all(|b| b.audits.all());
            println!(
                "{} stages, audits {}; report at {}",
                report.stage_blocks.len(),
                if all_green { "all true" } else { "FAILED" },
                path.display()
            );
        }
        None => print!("{}", body),
    }
    Ok(())
}

fn cmd_growth_schedule(args: GrowthScheduleArgs) -> Result<(), CmdError> {
    let count = match (&args.density, &args.counts) {
        (Some(d), None) => CountingFunction::SyntheticDensity { density: *d },
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            let mut primes = vec![];
            for line in body.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                primes.push(
                    line.parse::<u64>()
                        .map_err(|_| usage(format!("bad count entry '{}'", line)))?,
                );
            }
            primes.sort_unstable();
            CountingFunction::Empirical { primes }
        }
        _ => return Err(usage("exactly one of --density or --counts is required")),
    };
    if args.epsilon <= 0.0 {
        return Err(usage("epsilon must be positive"));
    }
    let schedule = growth_schedule(&count, args.stages, 2, 1).map_err(domain)?;
    let violation = growth_violation_check(&schedule, args.epsilon);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "f1": schedule.stages.first().and_then(|s| s.f.map(|f| f as u64)),
            "exponents": schedule.stages.iter().map(|s| s.exponent.clone()).collect::<Vec<_>>(),
            "stages": schedule.stages,
            "violation": violation,
        }))
        .expect("schedule serializes")
    );
    Ok(())
}
