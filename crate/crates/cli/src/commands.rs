use std::fmt;
use std::fs;
use std::path::Path;

use shiftbench::bench::{gnuplot_script, run_sweep_with, write_csv, SweepSpec, TruthSource};
use shiftbench::estimators::{
    common_cost, estimate_constrained, estimate_noise_variance_stack, estimate_with_weights, CostWeights,
    EstimatorConfig, Init, Method, Optimizer, ShiftSet, SpectralStack,
};
use shiftbench::io;
use shiftbench::par::Execution;
use shiftbench::spectral::{fit_prior_amplitude, shift_grid, PixelGrid, PriorSpectrum, Shift2D};
use shiftbench::synth::{draw_shifts, make_stack, measure_snr_db, periodic_component, sigma2_for_snr_db, TrajectoryModel};

use crate::args::{AlignArgs, BenchArgs, EstimateArgs, InitArg, MethodArg, OptimizerArg, SolverArgs, SynthArgs, TrajectoryArg};

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config (exit 2).
    Usage(String),
    /// Unreadable or inconsistent data (exit 1).
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<shiftbench::Error> for CliError {
    fn from(e: shiftbench::Error) -> Self {
        match e {
            shiftbench::Error::Spec(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be >= 0, got {v}")))
    }
}

fn write_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn describe_trajectory(t: &TrajectoryModel) -> String {
    match t {
        TrajectoryModel::IidUniform { half_range } => format!("iid half_range={half_range}"),
        TrajectoryModel::Drift { speed_mean, speed_std, angle_std, .. } => {
            format!("drift speed_mean={speed_mean} speed_std={speed_std} angle_std={angle_std}")
        }
    }
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let trajectory = match a.trajectory {
        TrajectoryArg::Iid => TrajectoryModel::IidUniform {
            half_range: non_negative("half-range", a.half_range)?,
        },
        TrajectoryArg::Drift => TrajectoryModel::Drift {
            speed_mean: a.speed_mean,
            speed_std: non_negative("speed-std", a.speed_std)?,
            angle_std: non_negative("angle-std", a.angle_std)?,
            initial_angle: None,
        },
    };
    trajectory.validate().map_err(|e| usage(e.to_string()))?;
    if let Some(s) = a.sigma2 {
        non_negative("sigma2", s)?;
    }
    if let Some(db) = a.snr_db {
        if !db.is_finite() {
            return Err(usage(format!("--snr-db must be finite, got {db}")));
        }
    }

    let source: TruthSource = a.truth.parse()?;
    let truth = if a.raw_truth {
        match &source {
            TruthSource::Path(p) => io::read_image(p)?.channels.swap_remove(0),
            TruthSource::DeadLeaves { seed, height, width } => shiftbench::synth::dead_leaves(*height, *width, *seed)?,
        }
    } else {
        source.load()?
    };
    let sigma2 = match (a.sigma2, a.snr_db) {
        (Some(s), _) => s,
        (None, Some(db)) => sigma2_for_snr_db(&truth, db)?,
        (None, None) => 0.0,
    };

    // stored shifts are what the manifest can represent
    let drawn = draw_shifts(&trajectory, a.k as usize, shiftbench::seed::mix(a.seed, &[1]))?;
    let shifts = ShiftSet::new(drawn.iter().map(|&t| io::quantize_shift(t)).collect())?;
    let stack = make_stack(&truth, &shifts, sigma2, shiftbench::seed::mix(a.seed, &[2]))?;

    fs::create_dir_all(&a.out).map_err(|e| write_err(&a.out, e))?;
    let lo = stack.frames.iter().flat_map(|f| f.samples()).copied().fold(f64::INFINITY, f64::min);
    let hi = stack.frames.iter().flat_map(|f| f.samples()).copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    for (i, frame) in stack.frames.iter().enumerate() {
        io::write_npy(&a.out.join(format!("frame_{i:03}.npy")), frame)?;
        let preview = frame.map(|v| v - lo)?;
        io::write_image16(&a.out.join(format!("frame_{i:03}.pgm")), &[preview], span)?;
    }
    io::write_manifest(&a.out.join("shifts.txt"), &stack.true_shifts)?;
    let snr = if sigma2 > 0.0 { measure_snr_db(&truth, sigma2)? } else { f64::INFINITY };
    let (h, w) = truth.dims();
    io::write_metadata(
        &a.out.join("metadata.txt"),
        &[
            ("truth", source.label()),
            ("height", h.to_string()),
            ("width", w.to_string()),
            ("k", a.k.to_string()),
            ("sigma2", format!("{sigma2:e}")),
            ("snr_db", snr.to_string()),
            ("seed", a.seed.to_string()),
            ("trajectory", describe_trajectory(&trajectory)),
            ("pgm_offset", format!("{lo:e}")),
            ("pgm_scale", format!("{:e}", span / 65535.0)),
        ],
    )?;
    println!("wrote {} frames to {}", stack.frames.len(), a.out.display());
    println!("sigma2 {sigma2:e}");
    println!("snr_db {snr}");
    Ok(())
}

fn load_frames(dir: &Path, channel: usize) -> Result<(Vec<PixelGrid>, Vec<Vec<PixelGrid>>, f64)> {
    let paths = io::list_frames(dir)?;
    if paths.len() < 2 {
        return Err(CliError::Data(format!("{}: need at least two frames, found {}", dir.display(), paths.len())));
    }
    let mut selected = Vec::with_capacity(paths.len());
    let mut all = Vec::with_capacity(paths.len());
    let mut max_value: f64 = 0.0;
    for p in &paths {
        let img = io::read_image(p)?;
        let ch = img.channels.get(channel).cloned().ok_or_else(|| {
            usage(format!("{}: channel {channel} requested, image has {}", p.display(), img.channels.len()))
        })?;
        if let Some(first) = selected.first() {
            let first: &PixelGrid = first;
            if first.dims() != ch.dims() {
                return Err(CliError::Data(format!(
                    "{}: frame size {:?} differs from {:?}",
                    p.display(),
                    ch.dims(),
                    first.dims()
                )));
            }
        }
        max_value = max_value.max(img.max_value);
        selected.push(ch);
        all.push(img.channels);
    }
    Ok((selected, all, max_value))
}

fn solver_config(s: &SolverArgs) -> Result<EstimatorConfig> {
    let cfg = EstimatorConfig {
        method: match s.method {
            MethodArg::Map => Method::Map,
            _ => Method::Mle,
        },
        optimizer: match s.optimizer {
            OptimizerArg::Ccd => Optimizer::Ccd,
            OptimizerArg::Vp => Optimizer::Vp,
        },
        init: match s.init {
            InitArg::Pairwise => Init::Pairwise,
            InitArg::Random => Init::Random,
        },
        max_outer_iters: s.max_outer_iters as usize,
        shift_tol: positive("shift-tol", s.shift_tol)?,
        newton_iters: s.newton_iters as usize,
        random_init_half_range: non_negative("random-init-half-range", s.random_init_half_range)?,
        seed: s.seed,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

struct Solved {
    shifts: ShiftSet,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Runs the requested estimator. MAP and constrained use Wiener weights
/// with the prior amplitude fitted to the stack.
fn solve(stack: &SpectralStack, s: &SolverArgs, cfg: &EstimatorConfig, sigma2: f64) -> Result<(Solved, CostWeights)> {
    let weights = match s.method {
        MethodArg::Mle => CostWeights::identity(stack.bins()),
        MethodArg::Map | MethodArg::Constrained => {
            if sigma2 <= 0.0 {
                CostWeights::custom(vec![1.0 / stack.len() as f64; stack.bins()])?
            } else {
                let (h, w) = stack.dims();
                let fit = fit_prior_amplitude(stack.frames(), sigma2)?;
                if fit.clamped {
                    log::warn!("prior amplitude fit hit its lower clamp; the stack shows no detectable signal");
                }
                CostWeights::wiener(&PriorSpectrum::natural(h, w, fit.amplitude, sigma2)?, stack.len())?
            }
        }
    };
    let solved = match s.method {
        MethodArg::Constrained => {
            let shifts = estimate_constrained(stack, &weights, cfg.newton_iters)?;
            Solved {
                cost: common_cost(stack, &shifts, &weights)?,
                shifts,
                iterations: 0,
                converged: true,
            }
        }
        _ => {
            let out = estimate_with_weights(stack, cfg, &weights)?;
            Solved {
                shifts: out.shifts,
                cost: out.final_cost,
                iterations: out.iterations,
                converged: out.converged,
            }
        }
    };
    Ok((solved, weights))
}

fn print_shifts(shifts: &ShiftSet) {
    print!("{}", io::format_manifest(shifts));
}

pub fn estimate(a: &EstimateArgs) -> Result<()> {
    let cfg = solver_config(&a.solver)?;
    if let Some(s) = a.sigma2 {
        non_negative("sigma2", s)?;
    }
    let (frames, _, _) = load_frames(&a.frames, a.solver.channel)?;
    let sigma2 = match a.sigma2 {
        Some(s) => s,
        None if a.solver.method == MethodArg::Mle => 0.0,
        None => {
            let s = estimate_noise_variance_stack(&frames)?;
            println!("sigma2_estimated {s:e}");
            s
        }
    };
    let stack = SpectralStack::from_grids(&frames)?;
    let (solved, _) = solve(&stack, &a.solver, &cfg, sigma2)?;
    print_shifts(&solved.shifts);
    println!("cost {:e}", solved.cost);
    println!("iterations {}", solved.iterations);
    println!("converged {}", solved.converged);
    if let Some(path) = &a.truth_manifest {
        let truth = io::read_manifest(path)?;
        let (h, w) = stack.dims();
        let mse = solved.shifts.mse_against(&truth, h, w).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        println!("mse {mse:e}");
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).map_err(|e| usage(format!("{}: {e}", a.spec.display())))?;
    let spec = SweepSpec::parse(&text).map_err(|e| usage(format!("{}: {e}", a.spec.display())))?;
    let execution = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let total = spec.truths.len() * spec.snr_db.len() * spec.k_values.len() * spec.methods.len();
    let mut done = 0;
    let result = run_sweep_with(&spec, execution, |cell| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {} snr={} K={} {}: mse={:.4e}",
            cell.truth, cell.snr_db, cell.k, cell.method, cell.stats.mse_mean
        );
    })?;
    write_csv(&a.out, &result)?;
    if let Some(plot) = &a.plot {
        let name = a.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        fs::write(plot, gnuplot_script(&result, &name)).map_err(|e| write_err(plot, e))?;
    }
    if !result.is_complete() {
        for f in &result.failures {
            eprintln!("failed: {} {:?}: {}", f.truth, f.snr_db, f.message);
        }
        return Err(CliError::Data(format!("{} of the sweep's groups failed", result.failures.len())));
    }
    println!("wrote {} cells to {}", result.cells.len(), a.out.display());
    Ok(())
}

pub fn align_burst(a: &AlignArgs) -> Result<()> {
    let cfg = solver_config(&a.solver)?;
    let (selected, channels, max_value) = load_frames(&a.frames, a.solver.channel)?;
    let (h, w) = selected[0].dims();
    let size = a.patch_size as usize;
    if size > h || size > w {
        return Err(CliError::Data(format!("patch size {size} exceeds frame size {h}x{w}")));
    }
    let x = a.patch_x.unwrap_or((w - size) / 2);
    let y = a.patch_y.unwrap_or((h - size) / 2);
    if x + size > w || y + size > h {
        return Err(CliError::Data(format!(
            "patch at ({x}, {y}) of size {size} exceeds frame size {h}x{w}"
        )));
    }

    let patches: Vec<PixelGrid> = selected
        .iter()
        .map(|f| periodic_component(&f.crop(y, x, size, size)?))
        .collect::<shiftbench::Result<_>>()?;
    let sigma2 = estimate_noise_variance_stack(&patches)?;
    let stack = SpectralStack::from_grids(&patches)?;
    let (solved, _) = solve(&stack, &a.solver, &cfg, sigma2)?;

    let n = channels.len() as f64;
    let mut average: Vec<PixelGrid> = Vec::new();
    for (frame, &t) in channels.iter().zip(solved.shifts.iter()) {
        for (c, grid) in frame.iter().enumerate() {
            let aligned = if t == Shift2D::ZERO { grid.clone() } else { shift_grid(grid, -t) };
            match average.get_mut(c) {
                None => average.push(aligned.map(|v| v / n)?),
                Some(acc) => {
                    let summed: Vec<f64> = acc.samples().iter().zip(aligned.samples()).map(|(s, v)| s + v / n).collect();
                    *acc = PixelGrid::new(h, w, summed)?;
                }
            }
        }
    }
    io::write_image16(&a.out, &average, if max_value > 0.0 { max_value } else { 1.0 })?;

    print_shifts(&solved.shifts);
    println!("sigma2_estimated {sigma2:e}");
    println!("patch {x} {y} {size}");
    println!("cost {:e}", solved.cost);
    println!("iterations {}", solved.iterations);
    Ok(())
}
