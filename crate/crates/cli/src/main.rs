use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gtland::harness::{self, DispersionSpec, HarnessError, Scenario};
use gtland::sim::{self, Law, Outcome};
use gtland::verify;

#[derive(Parser)]
#[command(name = "gtland", version, about = "Gravity-turn landing guidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trajectory CSV.
    Run {
        /// Scenario TOML file or preset name (scenario1, scenario2, scenario3).
        scenario: String,
        #[arg(long)]
        law: Option<Law>,
        /// Integration step (s).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Dispersed closed-loop runs with summary statistics.
    Montecarlo {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Dispersion TOML file; the built-in study is used when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fuel use over a range of initial downrange positions.
    Sweep {
        /// Downrange values as start:stop:step (m).
        #[arg(long, default_value = "-4000:1000:250", allow_hyphen_values = true)]
        x0: String,
        /// Comma-separated reference-deceleration ratios.
        #[arg(long, default_value = "0.85,0.9,0.95")]
        cbeta: String,
        /// Base scenario file or preset.
        #[arg(long, default_value = "scenario3")]
        base: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Verify {
        /// Only run these criteria (repeatable).
        #[arg(long)]
        only: Vec<u8>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn run(message: impl ToString) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Self::config(e)
    }
}

type CliResult = Result<(), Failure>;

fn load(scenario: &str) -> Result<Scenario, HarnessError> {
    if harness::PRESETS.contains(&scenario) {
        harness::preset(scenario)
    } else {
        harness::load_scenario(Path::new(scenario))
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(scenario: &str, law: Option<Law>, dt: Option<f64>, out: &Path) -> CliResult {
    let mut s = load(scenario)?;
    if let Some(law) = law {
        s.sim.law = law;
    }
    if let Some(dt) = dt {
        s.sim.dt = dt;
    }
    s.validate().map_err(Failure::config)?;
    let (records, rep) = s.run().map_err(Failure::config)?;

    create_dir(out)?;
    let law_tag = match s.sim.law {
        Law::GravityTurn => "gt",
        Law::ZemZev => "zemzev",
    };
    let path = out.join(format!("{}_{law_tag}.csv", s.name));
    sim::write_csv_file(&records, &path).map_err(|e| Failure::run(format!("{}: {e}", path.display())))?;

    println!("scenario   {}", s.name);
    println!("outcome    {:?}", rep.outcome);
    println!("t_f        {:.2} s", rep.t_f);
    println!("fuel       {:.2} kg", rep.fuel_used);
    println!("|r_f|      {:.4} m", rep.final_r.norm());
    println!("|v_f|      {:.4} m/s", rep.final_v.norm());
    println!("gamma_f    {:.2} deg", rep.gamma_f.to_degrees());
    println!("theta_u_f  {:.2} deg", rep.theta_u_f.to_degrees());
    println!("min elev   {:.3} deg", rep.min_elevation_angle.to_degrees());
    println!("trajectory {}", path.display());

    match &rep.outcome {
        Outcome::Landed => Ok(()),
        other => Err(Failure::run(format!("run did not land: {other:?}"))),
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(Failure::run)?;
    fs::write(path, text + "\n").map_err(|e| Failure::run(format!("{}: {e}", path.display())))
}

fn cmd_montecarlo(n: usize, seed: u64, spec: Option<&Path>, out: &Path) -> CliResult {
    let spec = match spec {
        Some(p) => DispersionSpec::load(p)?,
        None => DispersionSpec::default(),
    };
    let res = harness::run_monte_carlo(&spec, n, seed).map_err(Failure::config)?;
    create_dir(out)?;
    #[derive(serde::Serialize)]
    struct SummaryFile<'a> {
        seed: u64,
        #[serde(flatten)]
        summary: &'a harness::MonteCarloSummary,
    }
    write_json(
        &SummaryFile {
            seed,
            summary: &res.summary,
        },
        &out.join("summary.json"),
    )?;
    write_json(&res.runs, &out.join("runs.json"))?;

    let s = &res.summary;
    println!("runs          {}", s.n_runs);
    println!("landed        {}", s.n_success);
    println!(
        "fuel          {:.2} +/- {:.2} kg (min {:.2}, max {:.2})",
        s.fuel_kg.mean, s.fuel_kg.std, s.fuel_kg.min, s.fuel_kg.max
    );
    println!("worst |r_f|   {:.4} m", s.worst_final_r_m);
    println!("worst |v_f|   {:.4} m/s", s.worst_final_v_mps);
    println!("elev margin   {:.3} deg", s.min_elevation_margin_deg);
    println!("violations    {}", s.n_constraint_violations);
    println!("summary       {}", out.join("summary.json").display());

    if s.n_success == s.n_runs {
        Ok(())
    } else {
        Err(Failure::run(format!("{} of {} runs did not land", s.n_runs - s.n_success, s.n_runs)))
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::config(format!("invalid range `{text}`, expected start:stop:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !step.is_finite() || step <= 0.0 || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::config(format!("invalid list `{text}`")))
}

fn cmd_sweep(x0: &str, cbeta: &str, base: &str, out: &Path) -> CliResult {
    let xs = parse_range(x0)?;
    let cbs = parse_list(cbeta)?;
    if let Some(cb) = cbs.iter().find(|&&cb| !(cb > 0.0 && cb < 1.0)) {
        return Err(Failure::config(format!("cbeta {cb} must lie in (0, 1)")));
    }
    let base = load(base)?;
    let rows = harness::downrange_sweep(&base, &xs, &cbs).map_err(Failure::config)?;
    create_dir(out)?;
    let path = out.join("sweep.csv");
    let file = fs::File::create(&path).map_err(|e| Failure::run(format!("{}: {e}", path.display())))?;
    harness::write_sweep_csv(&rows, file).map_err(|e| Failure::run(format!("{}: {e}", path.display())))?;

    println!("{:>10} {:>6} {:>10} {:>8}", "x0_m", "cbeta", "dm_kg", "violated");
    for r in &rows {
        println!("{:>10.1} {:>6.3} {:>10.2} {:>8}", r.x0, r.c_beta, r.dm, r.violated);
    }
    println!("table {}", path.display());
    let failed = rows.iter().filter(|r| !r.landed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::run(format!("{failed} sweep runs did not land")))
    }
}

fn cmd_verify(only: &[u8]) -> CliResult {
    let ids: Vec<u8> = if only.is_empty() {
        verify::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        only.to_vec()
    };
    let mut failed = 0;
    for id in ids {
        let rep = verify::run_criterion(id).ok_or_else(|| Failure::config(format!("no criterion {id}")))?;
        println!("{rep}");
        failed += usize::from(!rep.passed);
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: format!("{failed} acceptance criteria failed"),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, law, dt, out } => cmd_run(scenario, *law, *dt, out),
        Command::Montecarlo { n, seed, spec, out } => cmd_montecarlo(*n, *seed, spec.as_deref(), out),
        Command::Sweep { x0, cbeta, base, out } => cmd_sweep(x0, cbeta, base, out),
        Command::Verify { only } => cmd_verify(only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
