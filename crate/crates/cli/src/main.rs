//! `pielm`: solve, benchmark, compare and run studies from the command line.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use pielm_core::config::ProblemConfig;
use pielm_core::elm::RNG_ALGORITHM;
use pielm_core::experiments::{compare_profiles, run_study, StudyConfig};
use pielm_core::fdm::solve_fdm;
use pielm_core::pielm::{solve, Field, MonitoredDataset};
use pielm_core::profile::{format_number, ResponseProfile};
use pielm_core::Error;
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "pielm", version, about = "Pile response to tunnelling: PIELM solver and finite-difference benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the PIELM and write its profile on the benchmark grid.
    Solve {
        /// Problem file, or a manifest from an earlier run.
        #[arg(long)]
        config: PathBuf,
        /// Monitored deflections (CSV: depth_m,deflection_m).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Hidden neurons.
        #[arg(long)]
        mc: Option<usize>,
        /// Collocation points.
        #[arg(long)]
        nc: Option<usize>,
        /// Segments of the output grid.
        #[arg(long)]
        nf: Option<usize>,
        #[arg(long)]
        rcond: Option<f64>,
    },
    /// Solve the finite-difference benchmark.
    Fdm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        nf: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Relative L2 errors of profile B against reference profile A.
    Compare { reference: PathBuf, candidate: PathBuf },
    /// Run a study file (or replay a study manifest).
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        nf: Option<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            config,
            data,
            out,
            seed,
            mc,
            nc,
            nf,
            rcond,
        } => cmd_solve(&config, data.as_deref(), &out, Overrides { seed, mc, nc, nf, rcond }),
        Command::Fdm { config, nf, out } => cmd_fdm(&config, nf, &out),
        Command::Compare { reference, candidate } => cmd_compare(&reference, &candidate),
        Command::Study { config, out, seed, nf } => cmd_study(&config, &out, seed, nf),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Numerical(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.exit_code())
        }
    }
}

#[derive(Default)]
struct Overrides {
    seed: Option<u64>,
    mc: Option<usize>,
    nc: Option<usize>,
    nf: Option<usize>,
    rcond: Option<f64>,
}

/// Reads a TOML file, unwrapping the `[snapshot]` table of a manifest.
fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, format!("cannot read: {e}")))?;
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| io_error(path, format!("TOML syntax: {}", e.message())))?;
    match table.remove("snapshot") {
        Some(Value::Table(snapshot)) => Ok(snapshot),
        Some(_) => Err(io_error(path, "`snapshot` must be a table")),
        None => Ok(table),
    }
}

fn load_problem(path: &Path) -> CliResult<ProblemConfig> {
    ProblemConfig::from_table(&read_table(path)?).map_err(|e| io_error(path, e))
}

fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_error(path, format!("cannot write: {e}")))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, format!("cannot write: {e}")))
}

fn prepare_out(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| io_error(out, format!("cannot create output directory: {e}")))
}

struct Manifest<'a> {
    command: &'a str,
    source: &'a Path,
    seed: Option<u64>,
    started: f64,
    outputs: &'a [(&'a str, &'a str)],
    snapshot: Table,
}

impl Manifest<'_> {
    fn write(self, out: &Path) -> CliResult<()> {
        let mut t = Table::new();
        t.insert("command".into(), self.command.into());
        t.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        t.insert("rng_algorithm".into(), RNG_ALGORITHM.into());
        if let Some(seed) = self.seed {
            t.insert("seed".into(), (seed as i64).into());
        }
        t.insert("config_source".into(), self.source.display().to_string().into());
        t.insert("started_unix_s".into(), self.started.into());
        t.insert("finished_unix_s".into(), unix_seconds().into());
        let mut outputs = Table::new();
        for (key, file) in self.outputs {
            outputs.insert((*key).into(), out.join(file).display().to_string().into());
        }
        outputs.insert("manifest".into(), out.join("manifest.toml").display().to_string().into());
        t.insert("outputs".into(), outputs.into());
        t.insert("snapshot".into(), self.snapshot.into());
        write_text(&out.join("manifest.toml"), &toml::to_string(&t).expect("plain tables always serialize"))
    }
}

fn field_maxima(t: &mut Table, p: &ResponseProfile) {
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    t.insert("max_abs_deflection_m".into(), max(&p.w).into());
    t.insert("max_abs_moment_Nm".into(), max(&p.moment).into());
    t.insert("max_abs_shear_N".into(), max(&p.shear).into());
}

fn cmd_solve(config_path: &Path, data: Option<&Path>, out: &Path, o: Overrides) -> CliResult<()> {
    let started = unix_seconds();
    let mut cfg = load_problem(config_path)?;
    if let Some(seed) = o.seed {
        cfg.solver.elm.seed = seed;
    }
    if let Some(mc) = o.mc {
        cfg.solver.elm.neurons = mc;
    }
    if let Some(nc) = o.nc {
        cfg.solver.collocation_points = nc;
    }
    if let Some(nf) = o.nf {
        cfg.fdm.segments = nf;
    }
    if let Some(rcond) = o.rcond {
        cfg.solver.rcond = rcond;
    }
    cfg.solver.validate()?;
    cfg.fdm.validate()?;
    if let Some(path) = data {
        let file = File::open(path).map_err(|e| io_error(path, format!("cannot read: {e}")))?;
        cfg.data = MonitoredDataset::read_csv(file).map_err(|e| io_error(path, e))?;
        cfg.data.check_within(cfg.problem.length()).map_err(|e| io_error(path, e))?;
    }

    let trained = solve(&cfg.problem, &cfg.solver, &cfg.data)?;
    let profile = trained.evaluate_uniform(cfg.fdm.segments)?;

    prepare_out(out)?;
    profile.write_csv(create(&out.join("profile.csv"))?)?;
    let mut weights = String::from("field,index,beta\n");
    for field in Field::ALL {
        for (i, b) in trained.beta_block(field).iter().enumerate() {
            weights.push_str(&format!("{},{i},{}\n", field.as_str(), format_number(*b)));
        }
    }
    write_text(&out.join("weights.csv"), &weights)?;

    let meta = trained.metadata();
    let mut summary = Table::new();
    summary.insert("command".into(), "solve".into());
    summary.insert("boundary_condition".into(), cfg.problem.bc.as_str().into());
    summary.insert("volume_loss".into(), cfg.problem.tunnel.volume_loss().into());
    summary.insert("neurons".into(), (cfg.solver.elm.neurons as i64).into());
    summary.insert("collocation_points".into(), (cfg.solver.collocation_points as i64).into());
    summary.insert("data_count".into(), (cfg.data.len() as i64).into());
    summary.insert("output_segments".into(), (cfg.fdm.segments as i64).into());
    summary.insert("seed".into(), (cfg.solver.elm.seed as i64).into());
    summary.insert("training_seconds".into(), meta.training_seconds.into());
    summary.insert("residual_norm".into(), meta.residual_norm.into());
    summary.insert("rank".into(), (meta.rank as i64).into());
    summary.insert("rows".into(), (meta.rows as i64).into());
    summary.insert("columns".into(), (meta.columns as i64).into());
    field_maxima(&mut summary, &profile);
    write_text(&out.join("summary.toml"), &toml::to_string(&summary).expect("plain tables always serialize"))?;

    Manifest {
        command: "solve",
        source: config_path,
        seed: Some(cfg.solver.elm.seed),
        started,
        outputs: &[("profile", "profile.csv"), ("weights", "weights.csv"), ("summary", "summary.toml")],
        snapshot: cfg.to_table(),
    }
    .write(out)?;
    println!(
        "trained Mc={} Nc={} in {:.3} s; wrote {}",
        cfg.solver.elm.neurons,
        cfg.solver.collocation_points,
        meta.training_seconds,
        out.join("profile.csv").display()
    );
    Ok(())
}

fn cmd_fdm(config_path: &Path, nf: Option<usize>, out: &Path) -> CliResult<()> {
    let started = unix_seconds();
    let mut cfg = load_problem(config_path)?;
    if let Some(nf) = nf {
        cfg.fdm.segments = nf;
    }
    cfg.fdm.validate()?;
    let clock = Instant::now();
    let solution = solve_fdm(&cfg.problem, &cfg.fdm)?;
    let seconds = clock.elapsed().as_secs_f64();
    let profile = solution.to_profile();

    prepare_out(out)?;
    profile.write_csv(create(&out.join("profile.csv"))?)?;
    let mut summary = Table::new();
    summary.insert("command".into(), "fdm".into());
    summary.insert("boundary_condition".into(), cfg.problem.bc.as_str().into());
    summary.insert("volume_loss".into(), cfg.problem.tunnel.volume_loss().into());
    summary.insert("segments".into(), (cfg.fdm.segments as i64).into());
    summary.insert("solve_seconds".into(), seconds.into());
    field_maxima(&mut summary, &profile);
    write_text(&out.join("summary.toml"), &toml::to_string(&summary).expect("plain tables always serialize"))?;

    Manifest {
        command: "fdm",
        source: config_path,
        seed: None,
        started,
        outputs: &[("profile", "profile.csv"), ("summary", "summary.toml")],
        snapshot: cfg.to_table(),
    }
    .write(out)?;
    println!("solved Nf={} in {:.3} s; wrote {}", cfg.fdm.segments, seconds, out.join("profile.csv").display());
    Ok(())
}

fn read_profile(path: &Path) -> CliResult<ResponseProfile> {
    let file = File::open(path).map_err(|e| io_error(path, format!("cannot read: {e}")))?;
    ResponseProfile::read_csv(file).map_err(|e| io_error(path, e))
}

fn cmd_compare(reference: &Path, candidate: &Path) -> CliResult<()> {
    let a = read_profile(reference)?;
    let b = read_profile(candidate)?;
    let e = compare_profiles(&a, &b)?;
    println!("L2(w) = {}", format_number(e.w));
    println!("L2(M) = {}", format_number(e.moment));
    println!("L2(Q) = {}", format_number(e.shear));
    Ok(())
}

fn cmd_study(config_path: &Path, out: &Path, seed: Option<u64>, nf: Option<usize>) -> CliResult<()> {
    let started = unix_seconds();
    let table = read_table(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let mut study = StudyConfig::from_table(&table, base).map_err(|e| io_error(config_path, e))?;
    if let Some(seed) = seed {
        study.solver.elm.seed = seed;
    }
    if let Some(nf) = nf {
        study.fdm.segments = nf;
    }
    let clock = Instant::now();
    let report = run_study(&study)?;
    let seconds = clock.elapsed().as_secs_f64();

    prepare_out(out)?;
    report.write_records_csv(create(&out.join("report.csv"))?)?;
    let mut outputs = vec![("report", "report.csv"), ("summary", "summary.toml")];
    if !report.profiles.is_empty() {
        report.write_profiles_csv(create(&out.join("profiles.csv"))?)?;
        outputs.push(("profiles", "profiles.csv"));
    }
    let mut summary = Table::new();
    summary.insert("command".into(), "study".into());
    summary.insert("name".into(), report.name.clone().into());
    summary.insert("kind".into(), report.kind.as_str().into());
    summary.insert("runs".into(), (report.records.len() as i64).into());
    summary.insert("elapsed_seconds".into(), seconds.into());
    write_text(&out.join("summary.toml"), &toml::to_string(&summary).expect("plain tables always serialize"))?;

    Manifest {
        command: "study",
        source: config_path,
        seed: Some(study.solver.elm.seed),
        started,
        outputs: &outputs,
        snapshot: study.to_table(),
    }
    .write(out)?;
    for r in &report.records {
        println!(
            "{:<28} L2(w)={:.3e} L2(M)={:.3e} L2(Q)={:.3e} t={:.3}s",
            r.label, r.errors.w, r.errors.moment, r.errors.shear, r.training_seconds
        );
    }
    Ok(())
}
