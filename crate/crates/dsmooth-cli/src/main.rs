//! Command-line driver: blur+noise generation, double-smoothing solves, and
//! ISTA/FISTA comparisons with CSV metric export.
//!
//! Verbosity is controlled by `DS_LOG=quiet|info|trace` (default `info`).

use clap::{Args, Parser, Subcommand};
use dsmooth::{
    add_gaussian_noise, choose_parameters, fgm_minimize, fista_run, gaussian_kernel, isnr,
    ista_run, load_pgm, save_pgm, select_regime, solve, solve_auto_r, BlurOperator, BoxL1,
    BoxL2L1, CompositeProblem, FgmConfig, GrayImage, LinearMap, PrimalOracle, Problem,
    RegularizerKind, SmoothedDual, SolveReport, SolverConfig, StrongOracle, SquaredDistance,
};
use std::fmt::Write as _;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "dsmooth", about = "Double-smoothing deblurring experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur an image, add seeded Gaussian noise, and write the observation.
    Blur(BlurArgs),
    /// Run the double-smoothing solver on a blurred observation.
    Solve(SolveArgs),
    /// Run DS, ISTA, and/or FISTA on the same observation and merge metrics.
    Compare(CompareArgs),
}

#[derive(Args)]
struct BlurArgs {
    /// Input PGM image (P2 or P5, 8-bit).
    #[arg(long)]
    image: PathBuf,
    /// Gaussian filter size (odd).
    #[arg(long, default_value_t = 9)]
    size: usize,
    /// Gaussian filter standard deviation.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    /// Standard deviation of the added white Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pixel scale: raw 255 maps to this working value.
    #[arg(long, default_value_t = 0.1)]
    scale: f64,
    /// Output PGM path; a raw f64 sidecar `<out>.f64` and a manifest
    /// `<out>.manifest` are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Problem family: `l1` (scale 0.1) or `l2l1` (scale 1.0).
    #[arg(long)]
    problem: String,
    /// Blurred observation: a PGM, or a `.f64` sidecar for exact values.
    #[arg(long)]
    blurred: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    /// Dual norm bound R with ‖p*‖ ≤ R.
    #[arg(long)]
    r: Option<f64>,
    /// Estimate R by restarting with R = 2‖p_K‖ until consistent.
    #[arg(long, default_value_t = false)]
    auto_r: bool,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Ground-truth PGM for ISNR reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 9)]
    size: usize,
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Comma-separated subset of ds,ista,fista.
    #[arg(long, default_value = "ds,ista,fista")]
    methods: String,
    #[arg(long, default_value_t = 100)]
    iters: usize,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum LogLevel {
    Quiet,
    Info,
    Trace,
}

fn log_level() -> LogLevel {
    match std::env::var("DS_LOG").as_deref() {
        Ok("quiet") => LogLevel::Quiet,
        Ok("trace") => LogLevel::Trace,
        _ => LogLevel::Info,
    }
}

fn log(level: LogLevel, msg: &str) {
    if log_level() >= level {
        eprintln!("{msg}");
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Blur(a) => cmd_blur(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

/// Raw sidecar: `DSF64 <rows> <cols>\n` followed by row-major f64 LE values.
fn write_f64_sidecar(path: &Path, rows: usize, cols: usize, values: &[f64]) -> dsmooth::Result<()> {
    let mut bytes = format!("DSF64 {rows} {cols}\n").into_bytes();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| dsmooth::DsError::Io {
            path: path.display().to_string(),
            source: e,
        })
}

fn read_f64_sidecar(path: &Path, scale: f64) -> dsmooth::Result<GrayImage> {
    let io_err = |e| dsmooth::DsError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err)?;
    let fmt_err = |offset: usize, msg: &str| dsmooth::DsError::Format {
        path: path.display().to_string(),
        offset,
        msg: msg.into(),
    };
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| fmt_err(0, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| fmt_err(0, "non-utf8 header"))?;
    let mut it = header.split_whitespace();
    if it.next() != Some("DSF64") {
        return Err(fmt_err(0, "expected DSF64 magic"));
    }
    let rows: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| fmt_err(6, "bad row count"))?;
    let cols: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| fmt_err(6, "bad column count"))?;
    let body = &bytes[nl + 1..];
    if body.len() != rows * cols * 8 {
        return Err(fmt_err(nl + 1, "raster size mismatch"));
    }
    let pixels = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GrayImage::new(rows, cols, pixels, scale)
}

fn load_observation(path: &Path, scale: f64) -> dsmooth::Result<GrayImage> {
    if path.extension().is_some_and(|e| e == "f64") {
        read_f64_sidecar(path, scale)
    } else {
        load_pgm(path, scale)
    }
}

fn write_manifest(path: &Path, entries: &[(&str, String)]) -> dsmooth::Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        writeln!(out, "{k}={v}").unwrap();
    }
    std::fs::write(path, out).map_err(|e| dsmooth::DsError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn cmd_blur(a: &BlurArgs) -> dsmooth::Result<()> {
    let img = load_pgm(&a.image, a.scale)?;
    let kernel = gaussian_kernel(a.size, a.sigma)?;
    let op = BlurOperator::new(img.rows, img.cols, kernel)?;
    let mut b = op.apply(&img.pixels)?;
    add_gaussian_noise(&mut b, a.noise_std, a.seed);
    let out_img = GrayImage::new(img.rows, img.cols, b.clone(), a.scale)?;
    save_pgm(&a.out, &out_img)?;
    write_f64_sidecar(&sibling(&a.out, "f64"), img.rows, img.cols, &b)?;
    write_manifest(
        &sibling(&a.out, "manifest"),
        &[
            ("command", "blur".into()),
            ("image", a.image.display().to_string()),
            ("size", a.size.to_string()),
            ("sigma", fmt_f64(a.sigma)),
            ("noise_std", fmt_f64(a.noise_std)),
            ("seed", a.seed.to_string()),
            ("scale", fmt_f64(a.scale)),
            ("out", a.out.display().to_string()),
        ],
    )?;
    log(
        LogLevel::Info,
        &format!(
            "blur: {}x{} image, filter {}/{}, noise std {}, seed {}",
            img.rows, img.cols, a.size, a.sigma, a.noise_std, a.seed
        ),
    );
    Ok(())
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".");
    os.push(ext);
    PathBuf::from(os)
}

/// Default f64 formatting is shortest-round-trip, so CSV output is both
/// exact and bit-stable across runs.
fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

struct Instance {
    problem: Problem,
    b: GrayImage,
    truth: Option<GrayImage>,
    scale: f64,
    kind: RegularizerKind,
}

fn build_instance(a: &SolveArgs) -> dsmooth::Result<Instance> {
    let (scale, kind) = match a.problem.as_str() {
        "l1" => (0.1, RegularizerKind::L1),
        "l2l1" => (1.0, RegularizerKind::L2L1),
        other => {
            return Err(dsmooth::DsError::InvalidArgument(format!(
                "unknown problem family {other:?}; expected l1 or l2l1"
            )))
        }
    };
    let b = load_observation(&a.blurred, scale)?;
    let truth = a.truth.as_ref().map(|p| load_pgm(p, scale)).transpose()?;
    if let Some(t) = &truth {
        if t.len() != b.len() {
            return Err(dsmooth::DsError::DimensionMismatch {
                expected: b.len(),
                got: t.len(),
            });
        }
    }
    let n = b.len();
    let op: Arc<dyn LinearMap> =
        Arc::new(BlurOperator::new(b.rows, b.cols, gaussian_kernel(a.size, a.sigma)?)?);
    let f: Arc<dyn PrimalOracle> = match kind {
        RegularizerKind::L1 => Arc::new(BoxL1::new(a.lambda, scale, n)?),
        RegularizerKind::L2L1 => Arc::new(BoxL2L1::new(a.lambda, scale, n)?),
    };
    let g: Arc<dyn StrongOracle> = Arc::new(SquaredDistance::new(b.pixels.clone()));
    Ok(Instance {
        problem: Problem { a: op, f, g },
        b,
        truth,
        scale,
        kind,
    })
}

/// DS primal objective at a dual iterate: f(x_{f,p}) + g(A·x_{f,p}).
fn ds_objective(inst: &Instance, x_f: &[f64]) -> dsmooth::Result<f64> {
    let f_val = inst.problem.f.value(x_f).finite().ok_or_else(|| {
        dsmooth::DsError::NumericalFailure("recovered x_f left dom f".into())
    })?;
    let ax = inst.problem.a.apply(x_f)?;
    let g_val = inst.problem.g.value(&ax).finite().ok_or_else(|| {
        dsmooth::DsError::NumericalFailure("A·x_f left dom g".into())
    })?;
    Ok(f_val + g_val)
}

fn isnr_field(inst: &Instance, x_k: &[f64]) -> String {
    match &inst.truth {
        Some(t) => fmt_f64(isnr(&t.pixels, &inst.b.pixels, x_k)),
        None => String::new(),
    }
}

fn solve_manifest(a: &SolveArgs, report: &SolveReport) -> Vec<(&'static str, String)> {
    vec![
        ("command", "solve".into()),
        ("problem", a.problem.clone()),
        ("blurred", a.blurred.display().to_string()),
        (
            "truth",
            a.truth
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        ),
        ("lambda", fmt_f64(a.lambda)),
        ("epsilon", fmt_f64(a.epsilon)),
        ("r", fmt_f64(report.r_used)),
        ("r_heuristic", report.r_heuristic.to_string()),
        ("size", a.size.to_string()),
        ("sigma", fmt_f64(a.sigma)),
        ("regime", report.regime.as_str().into()),
        ("rho", fmt_f64(report.rho)),
        ("kappa", fmt_f64(report.kappa)),
        ("lipschitz", fmt_f64(report.lipschitz)),
        ("iters", report.iterations.to_string()),
        (
            "max_iters",
            a.max_iters.map(|m| m.to_string()).unwrap_or_default(),
        ),
    ]
}

fn cmd_solve(a: &SolveArgs) -> dsmooth::Result<()> {
    let inst = build_instance(a)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| dsmooth::DsError::Io {
        path: a.out_dir.display().to_string(),
        source: e,
    })?;
    let r = match (a.r, a.auto_r) {
        (Some(r), _) => r,
        (None, true) => 1.0, // starting guess for the restart heuristic
        (None, false) => {
            return Err(dsmooth::DsError::InvalidConfiguration(
                "no dual norm bound given: pass --r R, or --auto-R to estimate it by restarts"
                    .into(),
            ))
        }
    };
    let mut cfg = SolverConfig::new(a.epsilon, r)?;
    cfg.max_iters = a.max_iters;
    cfg.record_iterates = true;
    let report = if a.auto_r && a.r.is_none() {
        solve_auto_r(&inst.problem, &cfg)?
    } else {
        solve(&inst.problem, &cfg)?
    };
    log(
        LogLevel::Info,
        &format!(
            "solve: regime {}, {} iterations, grad norm {} (target {})",
            report.regime.as_str(),
            report.iterations,
            report.grad_norm,
            report.grad_norm_target
        ),
    );

    // per-iteration primal metrics from the recorded dual iterates
    let sd = SmoothedDual::new(
        report.regime,
        inst.problem.a.clone(),
        inst.problem.f.clone(),
        inst.problem.g.clone(),
        report.rho,
        report.kappa,
    )?;
    let mut csv = String::from("iter,theta_value,grad_norm_unreg,primal_objective,isnr\n");
    for (rec, p_k) in report.trace.records.iter().zip(&report.trace.iterates) {
        let x_f = sd.eval(p_k)?.x_f;
        let obj = ds_objective(&inst, &x_f)?;
        writeln!(
            csv,
            "{},{},{},{},{}",
            rec.k,
            fmt_f64(rec.value),
            fmt_f64(rec.grad_norm_unreg),
            fmt_f64(obj),
            isnr_field(&inst, &x_f)
        )
        .unwrap();
        log(
            LogLevel::Trace,
            &format!("iter {}: theta {} grad {}", rec.k, rec.value, rec.grad_norm_unreg),
        );
    }
    let csv_path = a.out_dir.join("metrics.csv");
    std::fs::write(&csv_path, csv).map_err(|e| dsmooth::DsError::Io {
        path: csv_path.display().to_string(),
        source: e,
    })?;
    let restored = GrayImage::new(inst.b.rows, inst.b.cols, report.x_primal.clone(), inst.scale)?;
    save_pgm(a.out_dir.join("restored.pgm"), &restored)?;
    write_f64_sidecar(
        &a.out_dir.join("restored.pgm.f64"),
        inst.b.rows,
        inst.b.cols,
        &report.x_primal,
    )?;
    write_manifest(&a.out_dir.join("metrics.csv.manifest"), &solve_manifest(a, &report))?;
    Ok(())
}

/// A DS run pinned to a fixed iteration budget (no gradient-norm stop), so
/// its per-iteration curve is directly comparable with ISTA/FISTA.
fn ds_fixed_iters(inst: &Instance, a: &SolveArgs, iters: usize) -> dsmooth::Result<Vec<Vec<f64>>> {
    let regime = select_regime(inst.problem.f.as_ref(), inst.problem.g.as_ref());
    let (rho, kappa) = choose_parameters(
        regime,
        a.epsilon,
        a.r.unwrap_or(1.0), // R only enters the stop target, which is disabled here
        inst.problem.f.domain_radius_sq_half(),
        inst.problem.f.strong_convexity(),
        inst.problem.g.grad_lipschitz(),
    )?;
    let sd = SmoothedDual::new(
        regime,
        inst.problem.a.clone(),
        inst.problem.f.clone(),
        inst.problem.g.clone(),
        rho,
        kappa,
    )?;
    log(LogLevel::Info, &format!("compare: ds regime {}", regime.as_str()));
    let run = fgm_minimize(
        &sd,
        &FgmConfig {
            max_iters: iters,
            grad_norm_target: None,
            record_trace: true,
            record_iterates: true,
        },
    )?;
    run.trace
        .iterates
        .iter()
        .map(|p| Ok(sd.eval(p)?.x_f))
        .collect()
}

fn cmd_compare(a: &CompareArgs) -> dsmooth::Result<()> {
    let inst = build_instance(&a.solve)?;
    std::fs::create_dir_all(&a.solve.out_dir).map_err(|e| dsmooth::DsError::Io {
        path: a.solve.out_dir.display().to_string(),
        source: e,
    })?;
    let mut methods: Vec<&str> = a.methods.split(',').map(str::trim).collect();
    methods.sort_unstable();
    methods.dedup();
    for m in &methods {
        if !matches!(*m, "ds" | "ista" | "fista") {
            return Err(dsmooth::DsError::InvalidArgument(format!(
                "unknown method {m:?}; expected ds, ista, fista"
            )));
        }
    }

    let composite = CompositeProblem::new(
        inst.problem.a.clone(),
        inst.b.pixels.clone(),
        a.solve.lambda,
        inst.scale,
        inst.kind,
    )?;
    // observed b can exit [0,u] because of noise; baselines start from its
    // projection onto the box
    let x0: Vec<f64> = inst
        .b
        .pixels
        .iter()
        .map(|v| v.clamp(0.0, inst.scale))
        .collect();

    let mut csv = String::from("method,iter,primal_objective,isnr\n");
    for m in &methods {
        let iterates: Vec<Vec<f64>> = match *m {
            "ds" => ds_fixed_iters(&inst, &a.solve, a.iters)?,
            "ista" => ista_run(&composite, &x0, a.iters, true)?.iterates,
            "fista" => fista_run(&composite, &x0, a.iters, true)?.iterates,
            _ => unreachable!(),
        };
        for (k, x_k) in iterates.iter().enumerate() {
            let obj = ds_objective(&inst, x_k)?;
            writeln!(csv, "{m},{k},{},{}", fmt_f64(obj), isnr_field(&inst, x_k)).unwrap();
        }
    }
    let csv_path = a.solve.out_dir.join("compare.csv");
    std::fs::write(&csv_path, csv).map_err(|e| dsmooth::DsError::Io {
        path: csv_path.display().to_string(),
        source: e,
    })?;
    let mut manifest = vec![
        ("command", "compare".into()),
        ("methods", methods.join(",")),
        ("iters", a.iters.to_string()),
        ("problem", a.solve.problem.clone()),
        ("blurred", a.solve.blurred.display().to_string()),
        (
            "truth",
            a.solve
                .truth
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        ),
        ("lambda", fmt_f64(a.solve.lambda)),
        ("epsilon", fmt_f64(a.solve.epsilon)),
        ("size", a.solve.size.to_string()),
        ("sigma", fmt_f64(a.solve.sigma)),
    ];
    manifest.push(("scale", fmt_f64(inst.scale)));
    write_manifest(&a.solve.out_dir.join("compare.csv.manifest"), &manifest)?;
    Ok(())
}
