//! `tableturn` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 balanced but the real table
//! collides, 3 no sign change of the hover gap, 4 ground precondition
//! failed, 5 a verification suite or gallery demonstration did not hold.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tableturn::collision::{check_real_table, min_leg_length};
use tableturn::geometry::TableSpec;
use tableturn::ground::{estimate_lipschitz, load_grid, parse_ground, Ground, Region};
use tableturn::report::{balance_json, clearance_json, spec_json, sweep_csv, Json};
use tableturn::solver::{
    balance_with, brute_force_balance, hypothesis_warnings, sweep, BalanceOptions, BalanceStatus,
    DEFAULT_SWEEP_SAMPLES,
};
use tableturn::verify::suites::{run_suite, DEFAULT_SEED};

const EXIT_INVALID: u8 = 1;
const EXIT_COLLISION: u8 = 2;
const EXIT_NO_SIGN_CHANGE: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;

const GALLERY: [&str; 4] = ["cliff", "ridge", "cone", "radial"];

#[derive(Parser)]
#[command(
    name = "tableturn",
    version,
    about = "Balance a rectangular table on uneven ground by turning it",
    after_help = "Grounds use a canonical frame where the table diagonal is 2. \
                  To model a table of diagonal d, scale the ground by 2/d in all three axes.\n\
                  TABLETURN_THREADS caps the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a balancing position and check the real table for collisions.
    Balance(TableArgs),
    /// Tabulate the equal-hover state over a half turn as CSV.
    Sweep(TableArgs),
    /// Run a verification suite.
    Verify {
        /// frames, critical-k, uniqueness, d-monotone, coplanar or sharpness.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run a canonical demonstration: cliff, ridge, cone or radial.
    Gallery {
        #[arg(long)]
        name: String,
        /// Evaluation budget of the brute-force search (cliff only).
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the Lipschitz constant of a ground by sampling.
    Lipschitz {
        #[command(flatten)]
        ground: GroundArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = tableturn::ground::DEFAULT_LIPSCHITZ_SEED)]
        seed: u64,
        /// Half width of the square sampling region.
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GroundArgs {
    /// Ground descriptor, e.g. `cone:height=0.7071068,radius=1`.
    #[arg(long)]
    ground: Option<String>,
    /// Height grid file: header `x0 y0 dx dy nx ny`, then `ny` rows of `nx` heights.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    ground: GroundArgs,
    /// Short side over long side, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    /// Leg length of the real table.
    #[arg(long, default_value_t = 0.0)]
    legs: f64,
    /// Azimuth samples over a half turn, at least 4.
    #[arg(long, default_value_t = DEFAULT_SWEEP_SAMPLES)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Invalid(String);

impl<E: std::fmt::Display> From<E> for Invalid {
    fn from(e: E) -> Self {
        Invalid(e.to_string())
    }
}

impl GroundArgs {
    fn load(&self) -> Result<(Ground, String), Invalid> {
        match (&self.ground, &self.grid) {
            (Some(spec), _) => {
                let g = parse_ground(spec).map_err(|e| {
                    Invalid(format!(
                        "invalid ground `{spec}`: {e}\n  {spec}\n  {}^",
                        " ".repeat(e.position)
                    ))
                })?;
                let name = g.to_string();
                Ok((g, name))
            }
            (None, Some(path)) => {
                let g = load_grid(path)
                    .map_err(|e| Invalid(format!("cannot load grid {}: {e}", path.display())))?;
                Ok((g, format!("grid:{}", path.display())))
            }
            (None, None) => Err(Invalid("one of --ground or --grid is required".into())),
        }
    }
}

impl TableArgs {
    fn spec(&self) -> Result<TableSpec, Invalid> {
        if self.samples < 4 {
            return Err(Invalid(format!(
                "--samples must be at least 4, got {}",
                self.samples
            )));
        }
        Ok(TableSpec::new(self.ratio, self.legs)?)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Invalid> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, json: &Json) -> Result<(), Invalid> {
    emit(out, &format!("{json}\n"))
}

fn degrees(rad: f64) -> String {
    format!("{:.2}\u{b0}", rad.to_degrees())
}

fn warn_all(ground: &Ground) {
    for w in hypothesis_warnings(ground) {
        eprintln!("warning: {w}");
    }
}

fn cmd_balance(args: &TableArgs) -> Result<u8, Invalid> {
    let (ground, name) = args.ground.load()?;
    let spec = args.spec()?;
    let report = balance_with(
        &ground,
        &spec,
        &BalanceOptions {
            sweep_samples: args.samples,
        },
    );
    let clearance = check_real_table(&ground, &spec, &report).ok();
    let code = match report.status {
        BalanceStatus::PreconditionFailed => EXIT_PRECONDITION,
        BalanceStatus::NoSignChange => EXIT_NO_SIGN_CHANGE,
        BalanceStatus::Solved | BalanceStatus::BalancedEverywhere => match &clearance {
            Some(c) if c.pass => 0,
            _ => EXIT_COLLISION,
        },
    };
    let json = Json::obj()
        .with("command", "balance")
        .with("ground", name)
        .with("table_spec", spec_json(&spec))
        .with(
            "min_leg_length",
            min_leg_length(spec.ratio()).unwrap_or(f64::NAN),
        )
        .with("balance", balance_json(&report))
        .with("clearance", clearance.as_ref().map(clearance_json))
        .with("exit_code", code as usize);
    emit_json(&args.out, &json)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match (&report.pose, &report.table) {
        (Some(p), Some(t)) => eprintln!(
            "{}: gamma {}, phi {}, theta {}, max |residual| {:.2e}",
            report.status.as_str(),
            degrees(p.azimuth),
            degrees(t.incline()),
            degrees(p.tilt),
            report.max_residual()
        ),
        _ if report.min_abs_hover.is_finite() => eprintln!(
            "{}: min |hover| {:.3e} at gamma {}",
            report.status.as_str(),
            report.min_abs_hover,
            degrees(report.argmin_gamma)
        ),
        _ => eprintln!("{}", report.status.as_str()),
    }
    if let Some(c) = &clearance {
        eprintln!(
            "clearance {}: legs {:.3e}, top {:.3e}, cone certificate {}",
            if c.pass { "pass" } else { "fail" },
            c.min_leg_clearance,
            c.min_top_clearance,
            c.certificate_pass
        );
    }
    Ok(code)
}

fn cmd_sweep(args: &TableArgs) -> Result<u8, Invalid> {
    let (ground, _) = args.ground.load()?;
    let spec = args.spec()?;
    if !ground.is_continuous() {
        eprintln!("precondition failed: ground is not continuous");
        return Ok(EXIT_PRECONDITION);
    }
    warn_all(&ground);
    let rows = sweep(&ground, &spec, args.samples);
    emit(&args.out, &sweep_csv(&rows))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} samples failed", rows.len());
    }
    if failed == 0 && rows.iter().all(|r| r.hover == 0.0) {
        eprintln!("note: hover gap is 0 at every sample (balanced everywhere)");
    }
    Ok(0)
}

fn cmd_verify(suite: &str, seed: u64) -> Result<u8, Invalid> {
    let checks = run_suite(suite, seed)?;
    let mut failed = 0;
    for c in &checks {
        println!("{c}");
        if !c.pass {
            failed += 1;
        }
    }
    println!("{suite}: {}/{} passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { EXIT_CHECK_FAILED })
}

struct Demo {
    json: Json,
    summary: Vec<String>,
    holds: bool,
}

fn gallery_cliff(budget: usize) -> Demo {
    let ground = Ground::cliff();
    let spec = TableSpec::square(1.0);
    let turning = balance_with(&ground, &spec, &BalanceOptions::default());
    let b = brute_force_balance(&ground, &spec, budget);
    let holds = b.objective > 0.0 && turning.status == BalanceStatus::PreconditionFailed;
    Demo {
        json: Json::obj()
            .with("turning_status", turning.status.as_str())
            .with("brute_force_objective", b.objective)
            .with("brute_force_evaluations", b.evaluations)
            .with("exactly_balanced", b.objective == 0.0)
            .with("above_0.1", b.objective > 0.1),
        summary: vec![
            format!("turning solver: {}", turning.status.as_str()),
            format!(
                "no balance; min residual {:.3e} after {} evaluations",
                b.objective, b.evaluations
            ),
            "the residual is not bounded away from 0: tilting a square by e about a diagonal \
             inclined by e fits all four feet inside the high quadrants with residual sin(e)"
                .into(),
        ],
        holds,
    }
}

fn gallery_ridge() -> Demo {
    let ground = Ground::ridge(0.9);
    let spec = TableSpec::square(0.1);
    let report = balance_with(&ground, &spec, &BalanceOptions::default());
    let clearance = check_real_table(&ground, &spec, &report).ok();
    let collides = clearance.as_ref().is_some_and(|c| !c.pass);
    Demo {
        json: Json::obj()
            .with("ground", ground.to_string())
            .with("table_spec", spec_json(&spec))
            .with("balance", balance_json(&report))
            .with("clearance", clearance.as_ref().map(clearance_json)),
        summary: vec![
            format!("balance: {}", report.status.as_str()),
            match &clearance {
                Some(c) => format!(
                    "collision: {}; top clearance {:.4}",
                    !c.pass, c.min_top_clearance
                ),
                None => "no clearance report".into(),
            },
        ],
        holds: report.status.is_balanced() && collides,
    }
}

fn gallery_cone() -> Demo {
    let ground = Ground::cone(FRAC_1_SQRT_2, 1.0);
    let mut json = Json::obj().with("ground", ground.to_string());
    let mut summary = vec![format!(
        "critical angle atan(1/sqrt(2)) = {}",
        degrees(FRAC_1_SQRT_2.atan())
    )];
    let mut verdicts = Vec::new();
    for (key, leg) in [("at", FRAC_1_SQRT_2), ("below", FRAC_1_SQRT_2 - 0.01)] {
        let spec = TableSpec::square(leg);
        let report = balance_with(&ground, &spec, &BalanceOptions::default());
        let c = check_real_table(&ground, &spec, &report).ok();
        verdicts.push(c.as_ref().map(|c| c.pass));
        summary.push(match &c {
            Some(c) => format!(
                "L = {leg:.7}: {}, top clearance {:.7}",
                if c.pass { "pass" } else { "fail" },
                c.min_top_clearance
            ),
            None => format!("L = {leg:.7}: {}", report.status.as_str()),
        });
        json = json.with(
            key,
            Json::obj()
                .with("legs", leg)
                .with("status", report.status.as_str())
                .with("clearance", c.as_ref().map(clearance_json)),
        );
    }
    Demo {
        json,
        summary,
        holds: verdicts == [Some(true), Some(false)],
    }
}

fn gallery_radial() -> Demo {
    let ground = Ground::radial(0.2, 3.0);
    let spec = TableSpec::square(1.0);
    let rows = sweep(&ground, &spec, DEFAULT_SWEEP_SAMPLES);
    let max_h =
        rows.iter().map(|r| r.hover.abs()).fold(
            0.0,
            |m: f64, h| if h.is_nan() { f64::NAN } else { m.max(h) },
        );
    let report = balance_with(&ground, &spec, &BalanceOptions::default());
    Demo {
        json: Json::obj()
            .with("ground", ground.to_string())
            .with("samples", rows.len())
            .with("max_abs_hover", max_h)
            .with("status", report.status.as_str()),
        summary: vec![format!(
            "hover gap \u{2261} 0: max |h| = {max_h:.2e} over {} samples; {}",
            rows.len(),
            report.status.as_str()
        )],
        holds: max_h <= 1e-11 && report.status == BalanceStatus::BalancedEverywhere,
    }
}

fn cmd_gallery(name: &str, budget: usize, out: &Option<PathBuf>) -> Result<u8, Invalid> {
    let demo = match name {
        "cliff" => gallery_cliff(budget),
        "ridge" => gallery_ridge(),
        "cone" => gallery_cone(),
        "radial" => gallery_radial(),
        other => {
            return Err(Invalid(format!(
                "unknown gallery entry '{other}' (expected one of: {})",
                GALLERY.join(", ")
            )))
        }
    };
    emit_json(
        out,
        &Json::obj()
            .with("command", "gallery")
            .with("name", name)
            .with("report", demo.json)
            .with("expected_outcome", demo.holds),
    )?;
    for line in &demo.summary {
        eprintln!("{name}: {line}");
    }
    Ok(if demo.holds { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_lipschitz(
    ground: &GroundArgs,
    samples: usize,
    seed: u64,
    half_width: f64,
    out: &Option<PathBuf>,
) -> Result<u8, Invalid> {
    let (g, name) = ground.load()?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Invalid(format!(
            "--half-width must be positive, got {half_width}"
        )));
    }
    let est = estimate_lipschitz(&g, Region::square(half_width), samples, seed);
    let bound = g.lipschitz_bound();
    emit_json(
        out,
        &Json::obj()
            .with("command", "lipschitz")
            .with("ground", name)
            .with("declared_bound", bound)
            .with("estimate", est)
            .with("samples", samples)
            .with("seed", seed)
            .with("half_width", half_width)
            .with("continuous", g.is_continuous()),
    )?;
    eprintln!(
        "estimate {est:.7} (slope angle {}), declared bound {}, critical 1/sqrt(2) = {FRAC_1_SQRT_2:.7}",
        degrees(est.atan()),
        bound.map_or("unknown".into(), |k| format!("{k:.7}"))
    );
    warn_all(&g);
    Ok(0)
}

fn init_threads() -> Result<(), Invalid> {
    let Ok(v) = std::env::var("TABLETURN_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Invalid(format!(
            "TABLETURN_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Invalid> {
    init_threads()?;
    match &cli.command {
        Command::Balance(args) => cmd_balance(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify { suite, seed } => cmd_verify(suite, *seed),
        Command::Gallery { name, samples, out } => cmd_gallery(name, *samples, out),
        Command::Lipschitz {
            ground,
            samples,
            seed,
            half_width,
            out,
        } => cmd_lipschitz(ground, *samples, *seed, *half_width, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
