//! Command-line front end.
//!
//! Subcommands: `orbit`, `julia`, `mandel`, `bulb`, `boxdim`, `dimscan`. Every
//! flag can also come from `--config FILE`, a text file of `key = value` lines
//! (`#` starts a comment, boolean flags take `true`/`false`); flags given on the
//! command line win over the file.
//!
//! Exit status: 0 on success, 2 for bad arguments, 1 for runtime failures.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::dynamics::{
    classify, detect_cycle, iterate, CycleCriterion, CycleMetric, DephasingParams, DuInverseFactor,
    DuParams, Regime, System,
};
use crate::error::Error;
use crate::export;
use crate::fractal::{self, GridSpec3, ProfileStatus};
use crate::quat::Quaternion;
use crate::qubit_state::{from_polar, HamiltonianSpec, PolarState};
use crate::raster::Raster;
use crate::scan::{self, GridSpec, ScanResult, ScanSettings, Slice};

const SUBCOMMANDS: [&str; 6] = ["orbit", "julia", "mandel", "bulb", "boxdim", "dimscan"];

#[derive(Parser, Debug)]
#[command(
    name = "quatpurify",
    version,
    about = "Qubit purification versus decoherence as quaternion dynamics"
)]
struct Cli {
    /// File of `key = value` lines supplying default flag values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate one initial state and write its time series as CSV
    #[command(args_override_self = true)]
    Orbit(OrbitArgs),
    /// Classify initial states over a plane of fixed concurrence
    #[command(args_override_self = true)]
    Julia(JuliaArgs),
    /// Classify parameters p (dephasing) or q (du) over a plane, starting at zeta0 = 0
    #[command(args_override_self = true)]
    Mandel(MandelArgs),
    /// Classify voxels of the 3D embedding and write the border as a PLY cloud
    #[command(args_override_self = true)]
    Bulb(BulbArgs),
    /// Box-counting dimension of a PGM raster
    #[command(args_override_self = true)]
    Boxdim(BoxdimArgs),
    /// Border dimension across concurrence slices, written as CSV
    #[command(args_override_self = true)]
    Dimscan(DimscanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    /// d∘u∘s with dephasing strength beta
    Dephasing,
    /// p∘du∘s with the rotation angles alpha, beta, gamma and shift q
    Du,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    /// Euclidean distance of quaternions
    Quat,
    /// Max-entry distance of density matrices
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    P,
    Q,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Iteration rule
    #[arg(long, value_enum, default_value_t = SystemKind::Dephasing)]
    system: SystemKind,

    /// Phase angle of the evolution step
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,

    /// Dephasing strength, or the ȷ angle for du [default: 0.01 for dephasing, 0 for du]
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,

    /// The k angle of the du rotation
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,

    /// Shift of the dephasing family, as re,im
    #[arg(long, default_value = "1,0.1", value_parser = parse_complex, allow_hyphen_values = true)]
    p: Complex64,

    /// Shift of the du family, as a,b,c,d
    #[arg(long, default_value = "1,0,0,1", value_parser = parse_quaternion, allow_hyphen_values = true)]
    q: Quaternion,

    /// Use gamma in the middle factor of the du denominator instead of beta
    #[arg(long)]
    literal_gamma: bool,

    /// Derive alpha and p from a Hamiltonian, as omega,re_b,im_b,dt (dephasing only)
    #[arg(long, value_parser = parse_hamiltonian, allow_hyphen_values = true)]
    hamiltonian: Option<HamiltonianSpec>,
}

#[derive(Args, Debug, Clone)]
struct AnalysisArgs {
    /// Number of iterations N
    #[arg(long, default_value_t = 100)]
    iters: usize,

    /// Longest cycle period searched
    #[arg(long, default_value_t = 5)]
    cycle_max_period: usize,

    /// Distance below which two states count as equal
    #[arg(long, default_value_t = 1e-4)]
    cycle_tol: f64,

    /// Distance used for cycle detection
    #[arg(long, value_enum, default_value_t = MetricArg::Quat)]
    cycle_metric: MetricArg,

    /// Mean final purity at or above which an orbit counts as purified
    #[arg(long, default_value_t = 0.75)]
    threshold: f64,

    /// Number of final states averaged for the classification
    #[arg(long, default_value_t = 10)]
    class_window: usize,

    /// Worker threads, 0 for one per core; never changes the output
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug, Clone)]
struct PlaneArgs {
    /// Scan window as x_min,x_max,y_min,y_max
    #[arg(long, default_value = "-2,2,-2,2", value_parser = parse_window, allow_hyphen_values = true)]
    window: [f64; 4],

    /// Pixels per side, or nx,ny
    #[arg(long, default_value = "256", value_parser = parse_resolution)]
    resolution: (usize, usize),
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,

    /// Complex coordinate z of the initial state, as re,im
    #[arg(long, default_value = "1,0", value_parser = parse_complex, allow_hyphen_values = true)]
    z0: Complex64,

    /// Mixing angle of the initial state, zeta0 = z0 e^{ȷ lambda0}
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda0: f64,

    /// Output CSV path; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct JuliaArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(flatten)]
    plane: PlaneArgs,

    /// Squared concurrence |zeta0 - Co zeta0|^2 of the slice
    #[arg(long, default_value_t = 0.01)]
    concurrence_sq: f64,

    /// Output prefix for _purity.pgm, _cycles.pgm and _class.pgm
    #[arg(long, default_value = "julia")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MandelArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(flatten)]
    plane: PlaneArgs,

    /// Scanned parameter [default: p for dephasing, q for du]
    #[arg(long, value_enum)]
    param: Option<PlaneArg>,

    /// Fixed ȷ component of q on the q-plane
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    q_im2: f64,

    /// Fixed k component of q on the q-plane
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    q_im3: f64,

    /// Output prefix for _purity.pgm, _cycles.pgm and _class.pgm
    #[arg(long, default_value = "mandel")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BulbArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,

    /// X,Y window as x_min,x_max,y_min,y_max
    #[arg(long, default_value = "-2,2,-2,2", value_parser = parse_window, allow_hyphen_values = true)]
    window: [f64; 4],

    /// Lower end of the Z range; the upper end is 0
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    z_min: f64,

    /// Voxels per side
    #[arg(long, default_value_t = 64)]
    resolution: usize,

    /// Output PLY path
    #[arg(long, default_value = "bulb.ply")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BoxdimArgs {
    /// Input PGM
    #[arg(long)]
    input: PathBuf,

    /// Treat nonzero pixels as the marked set instead of extracting the border between gray levels
    #[arg(long)]
    marks: bool,

    /// Optional CSV of scale,count
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DimscanArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(flatten)]
    plane: PlaneArgs,

    /// Comma-separated squared-concurrence slices
    #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", value_parser = parse_list)]
    slices: FloatList,

    /// Output CSV path
    #[arg(long, default_value = "dimscan.csv")]
    out: PathBuf,
}

fn parse_floats(s: &str, n: Option<usize>) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(n) = n {
        if v.len() != n {
            return Err(format!(
                "expected {n} comma-separated numbers, got {}",
                v.len()
            ));
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = parse_floats(s, Some(2))?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_quaternion(s: &str) -> Result<Quaternion, String> {
    let v = parse_floats(s, Some(4))?;
    Ok(Quaternion::new(v[0], v[1], v[2], v[3]))
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v = parse_floats(s, Some(4))?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn parse_hamiltonian(s: &str) -> Result<HamiltonianSpec, String> {
    let v = parse_floats(s, Some(4))?;
    Ok(HamiltonianSpec::new(v[0], Complex64::new(v[1], v[2]), v[3]))
}

#[derive(Debug, Clone)]
struct FloatList(Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    parse_floats(s, None).map(FloatList)
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v[..] {
        [n] => Ok((n, n)),
        [nx, ny] => Ok((nx, ny)),
        _ => Err("expected N or NX,NY".into()),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Removes `--config FILE` and splices the file's flags in right after the
/// subcommand name, so that later command-line flags override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(PathBuf::from(it.next().ok_or("--config needs a file")?));
        } else if let Some(path) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let injected = config_flags(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let pos = rest
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
        .ok_or("--config needs a subcommand")?;
    rest.splice(pos + 1..pos + 1, injected);
    Ok(rest)
}

fn config_flags(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key {key:?}", lineno + 1));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => out.push(format!("--{key}={v}").into()),
        }
    }
    Ok(out)
}

fn build_system(m: &ModelArgs) -> Result<System, Failure> {
    match m.system {
        SystemKind::Dephasing => {
            if m.literal_gamma {
                return Err(Failure::Usage(
                    "--literal-gamma applies to the du family only".into(),
                ));
            }
            let (alpha, p) = match &m.hamiltonian {
                Some(h) => {
                    let ev = h.evolution().map_err(usage)?;
                    (ev.alpha, ev.p)
                }
                None => (m.alpha, m.p),
            };
            let params = DephasingParams::new(alpha, m.beta.unwrap_or(0.01), p).map_err(usage)?;
            Ok(System::Dephasing(params))
        }
        SystemKind::Du => {
            if m.hamiltonian.is_some() {
                return Err(Failure::Usage(
                    "--hamiltonian applies to the dephasing family only".into(),
                ));
            }
            let factor = if m.literal_gamma {
                DuInverseFactor::Literal
            } else {
                DuInverseFactor::Inverse
            };
            let params = DuParams::new(m.alpha, m.beta.unwrap_or(0.0), m.gamma, m.q)
                .map_err(usage)?
                .with_inverse_factor(factor);
            Ok(System::Du(params))
        }
    }
}

fn build_settings(a: &AnalysisArgs) -> Result<ScanSettings, Failure> {
    if a.cycle_max_period == 0
        || !(a.cycle_tol > 0.0)
        || a.class_window == 0
        || !a.threshold.is_finite()
    {
        return Err(Failure::Usage(
            "cycle-max-period and class-window must be positive, cycle-tol positive, threshold finite".into(),
        ));
    }
    Ok(ScanSettings {
        iters: a.iters,
        cycle: CycleCriterion {
            max_period: a.cycle_max_period,
            tol: a.cycle_tol,
            metric: match a.cycle_metric {
                MetricArg::Quat => CycleMetric::Quaternion,
                MetricArg::Rho => CycleMetric::DensityMatrix,
            },
        },
        window: a.class_window,
        threshold: a.threshold,
    })
}

fn build_grid(p: &PlaneArgs) -> Result<GridSpec, Failure> {
    let [x0, x1, y0, y1] = p.window;
    GridSpec::new(x0, x1, y0, y1, p.resolution.0, p.resolution.1).map_err(usage)
}

fn threaded<R: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<R, Failure> + Send,
) -> Result<R, Failure> {
    scan::with_threads(threads, f)?
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Orbit(a) => orbit(a),
        Command::Julia(a) => julia(a),
        Command::Mandel(a) => mandel(a),
        Command::Bulb(a) => bulb(a),
        Command::Boxdim(a) => boxdim(a),
        Command::Dimscan(a) => dimscan(a),
    }
}

fn orbit(a: OrbitArgs) -> Result<(), Failure> {
    let system = build_system(&a.model)?;
    let settings = build_settings(&a.analysis)?;
    let zeta0 = from_polar(&PolarState::new(a.z0, a.lambda0));
    let record = iterate(zeta0, &system, settings.iters);
    let report = detect_cycle(&record, &settings.cycle);
    let regime = classify(&record, settings.window, settings.threshold);
    match &a.out {
        Some(path) => export::write_orbit_csv(&record, path)?,
        None => print!("{}", export::encode_orbit_csv(&record)),
    }
    let cycle = report.cycle.map_or("none".to_owned(), |c| {
        format!("period {} entry {}", c.period, c.entry_index)
    });
    eprintln!(
        "system {} zeta0 {zeta0} class {regime:?} cycle {cycle}",
        system.name()
    );
    Ok(())
}

fn write_scan(res: &ScanResult, iters: usize, prefix: &Path) -> Result<(), Failure> {
    let with_suffix = |s: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(s);
        PathBuf::from(name)
    };
    export::write_pgm_mapped(
        &res.purity,
        &export::ColorMap::purity(),
        &with_suffix("_purity.pgm"),
    )?;
    export::write_pgm(
        &export::quantize_cycle_entry(&res.cycle_entry, iters),
        &with_suffix("_cycles.pgm"),
    )?;
    export::write_pgm(&res.class.map(Regime::gray), &with_suffix("_class.pgm"))?;
    let boundary = fractal::extract_boundary(&res.class).count();
    println!(
        "{}x{} purification {:.4} decoherence {:.4} unresolved {:.4} boundary_cells {boundary}",
        res.grid.nx,
        res.grid.ny,
        res.fraction(Regime::Purification),
        res.fraction(Regime::Decoherence),
        res.fraction(Regime::Unresolved),
    );
    Ok(())
}

fn julia(a: JuliaArgs) -> Result<(), Failure> {
    let system = build_system(&a.model)?;
    let settings = build_settings(&a.analysis)?;
    let grid = build_grid(&a.plane)?;
    let res = threaded(a.analysis.threads, || {
        scan::julia_scan(&grid, a.concurrence_sq, &system, &settings).map_err(usage)
    })?;
    write_scan(&res, settings.iters, &a.out)
}

fn mandel(a: MandelArgs) -> Result<(), Failure> {
    let system = build_system(&a.model)?;
    let settings = build_settings(&a.analysis)?;
    let grid = build_grid(&a.plane)?;
    let param = a.param.unwrap_or(match system {
        System::Dephasing(_) => PlaneArg::P,
        System::Du(_) => PlaneArg::Q,
    });
    let slice = match param {
        PlaneArg::P => Slice::PPlane,
        PlaneArg::Q => Slice::QPlane {
            im2: a.q_im2,
            im3: a.q_im3,
        },
    };
    let res = threaded(a.analysis.threads, || {
        scan::mandel_scan(&grid, &slice, &system, &settings).map_err(usage)
    })?;
    write_scan(&res, settings.iters, &a.out)
}

fn bulb(a: BulbArgs) -> Result<(), Failure> {
    let system = build_system(&a.model)?;
    let settings = build_settings(&a.analysis)?;
    let [x0, x1, y0, y1] = a.window;
    let plane = GridSpec::new(x0, x1, y0, y1, a.resolution, a.resolution).map_err(usage)?;
    let grid = GridSpec3::new(plane, a.z_min, 0.0, a.resolution).map_err(usage)?;
    let res = threaded(a.analysis.threads, || {
        fractal::bulb_scan(&grid, &system, &settings).map_err(usage)
    })?;
    export::write_ply(&res.boundary, &a.out)?;
    println!(
        "{}^3 voxels boundary_points {}",
        a.resolution,
        res.boundary.len()
    );
    Ok(())
}

fn boxdim(a: BoxdimArgs) -> Result<(), Failure> {
    let raster = export::read_pgm(&a.input)?;
    let marks: Raster<bool> = if a.marks {
        raster.map(|&v| v != 0)
    } else {
        fractal::extract_boundary(&raster)
    };
    let est = fractal::box_dim(&marks)?;
    if let Some(out) = &a.out {
        let rows: Vec<Vec<String>> = est
            .scales
            .iter()
            .zip(&est.counts)
            .map(|(s, c)| vec![s.to_string(), c.to_string()])
            .collect();
        export::write_csv(&["scale", "count"], &rows, out)?;
    }
    for (s, c) in est.scales.iter().zip(&est.counts) {
        println!("scale {s} count {c}");
    }
    println!(
        "dimension {} r2 {} fit_scales {}..={}",
        export::fmt_f64(est.dimension),
        export::fmt_f64(est.r2),
        est.scales[est.range_used.0],
        est.scales[est.range_used.1]
    );
    Ok(())
}

fn dimscan(a: DimscanArgs) -> Result<(), Failure> {
    let system = build_system(&a.model)?;
    let settings = build_settings(&a.analysis)?;
    let grid = build_grid(&a.plane)?;
    if a.slices.0.iter().any(|&c| c < 0.0) {
        return Err(Failure::Usage("slices must be non-negative".into()));
    }
    let profile = threaded(a.analysis.threads, || {
        fractal::dim_profile(&system, &grid, &a.slices.0, &settings).map_err(Failure::from)
    })?;
    export::write_dim_profile_csv(&profile, &a.out)?;
    for e in &profile {
        let flag = match e.status {
            ProfileStatus::Ok => "",
            ProfileStatus::EmptyBoundary => " (empty boundary)",
            ProfileStatus::TooFewPoints => " (too few boundary cells)",
        };
        println!(
            "concurrence_sq {} dimension {:.4} r2 {:.4} boundary_cells {}{flag}",
            export::fmt_f64(e.concurrence_sq),
            e.dimension(),
            e.r2(),
            e.boundary_cells
        );
    }
    Ok(())
}
