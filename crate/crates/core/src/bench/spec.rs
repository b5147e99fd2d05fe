use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, Init, Method, Optimizer};
use crate::io;
use crate::spectral::PixelGrid;
use crate::synth::{dead_leaves, prepare_truth, TrajectoryModel};

const DEFAULT_SCENE: (usize, usize) = (50, 50);

/// Where a truth image comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthSource {
    /// Built-in periodic dead-leaves scene, written `dead-leaves:<seed>[:<H>x<W>]`.
    DeadLeaves { seed: u64, height: usize, width: usize },
    /// Image file; channel 0 is used.
    Path(PathBuf),
}

impl TruthSource {
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Loads and band-limit-prepares the truth.
    pub fn load(&self) -> Result<PixelGrid> {
        let raw = match self {
            TruthSource::DeadLeaves { seed, height, width } => dead_leaves(*height, *width, *seed)?,
            TruthSource::Path(path) => io::read_image(path)?.channels.swap_remove(0),
        };
        prepare_truth(&raw)
    }
}

impl fmt::Display for TruthSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthSource::DeadLeaves { seed, height, width } => write!(f, "dead-leaves:{seed}:{height}x{width}"),
            TruthSource::Path(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for TruthSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("dead-leaves:") else {
            if s.is_empty() {
                return Err(Error::Spec("empty truth entry".into()));
            }
            return Ok(TruthSource::Path(PathBuf::from(s)));
        };
        let bad = || Error::Spec(format!("bad built-in truth '{s}' (expected dead-leaves:<seed>[:<H>x<W>])"));
        let (seed, dims) = match rest.split_once(':') {
            Some((seed, dims)) => (seed, Some(dims)),
            None => (rest, None),
        };
        let seed = seed.parse().map_err(|_| bad())?;
        let (height, width) = match dims {
            None => DEFAULT_SCENE,
            Some(d) => {
                let (h, w) = d.split_once('x').ok_or_else(bad)?;
                (h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?)
            }
        };
        Ok(TruthSource::DeadLeaves { seed, height, width })
    }
}

/// One estimator variant in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodSpec {
    Iterative { method: Method, optimizer: Optimizer, init: Init },
    /// Pairwise measurements reconciled by least squares, Wiener-weighted.
    Constrained,
}

impl MethodSpec {
    pub const fn new(method: Method, optimizer: Optimizer, init: Init) -> Self {
        MethodSpec::Iterative { method, optimizer, init }
    }

    /// `(method, optimizer, init)` as written to the CSV.
    pub fn columns(&self) -> (&'static str, &'static str, &'static str) {
        match self {
            MethodSpec::Iterative { method, optimizer, init } => (method.as_str(), optimizer.as_str(), init.as_str()),
            MethodSpec::Constrained => ("constrained", "none", "none"),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Constrained => f.write_str("constrained"),
            MethodSpec::Iterative { method, optimizer, init } => write!(f, "{method}:{optimizer}:{init}"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "constrained" {
            return Ok(MethodSpec::Constrained);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let [m, o, i] = parts[..] else {
            return Err(Error::Spec(format!(
                "bad method '{s}' (expected <mle|map>:<ccd|vp>:<random|pairwise> or constrained)"
            )));
        };
        let spec = |e: Error| Error::Spec(e.to_string());
        Ok(MethodSpec::Iterative {
            method: m.parse().map_err(spec)?,
            optimizer: o.parse().map_err(spec)?,
            init: i.parse().map_err(spec)?,
        })
    }
}

/// Full description of a Monte-Carlo sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub truths: Vec<TruthSource>,
    /// `+∞` requests noiseless stacks.
    pub snr_db: Vec<f64>,
    pub k_values: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub trajectory: TrajectoryModel,
    pub trials: usize,
    pub base_seed: u64,
    /// Optimizer settings; `method`, `optimizer`, `init` and `seed` are set per run.
    pub estimator: EstimatorConfig,
    /// Record wall-clock time per cell. Off by default so that CSVs are
    /// bitwise reproducible.
    pub timing: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            truths: vec![TruthSource::DeadLeaves {
                seed: 1,
                height: DEFAULT_SCENE.0,
                width: DEFAULT_SCENE.1,
            }],
            snr_db: snr_range(-20.0, 20.0, 2.0).expect("valid default grid"),
            k_values: vec![5],
            methods: vec![
                MethodSpec::new(Method::Mle, Optimizer::Ccd, Init::Pairwise),
                MethodSpec::new(Method::Map, Optimizer::Ccd, Init::Pairwise),
            ],
            trajectory: TrajectoryModel::IidUniform { half_range: 2.0 },
            trials: 100,
            base_seed: 0,
            estimator: EstimatorConfig::default(),
            timing: false,
        }
    }
}

/// Inclusive grid `lo, lo + step, …, hi`.
pub fn snr_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::Spec(format!("bad SNR range {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

const KEYS: [&str; 16] = [
    "truth",
    "snr_db",
    "k",
    "methods",
    "trajectory",
    "half_range",
    "speed_mean",
    "speed_std",
    "angle_std",
    "trials",
    "seed",
    "max_outer_iters",
    "shift_tol",
    "newton_iters",
    "random_init_half_range",
    "timing",
];

fn parse_list<T>(key: &str, value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Spec(format!("'{key}' is empty")));
    }
    Ok(items)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Spec(format!("'{key}': cannot parse '{value}'")))
}

fn parse_snr(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if let [lo, hi, step] = parts[..] {
        return snr_range(parse_num("snr_db", lo)?, parse_num("snr_db", hi)?, parse_num("snr_db", step)?);
    }
    parse_list("snr_db", value, |s| {
        let v: f64 = parse_num("snr_db", s)?;
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::Spec(format!("'snr_db': bad value '{s}'")));
        }
        Ok(v)
    })
}

impl SweepSpec {
    /// Parses `key=value` text; missing keys take the defaults. Unknown keys
    /// are reported together.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&io::parse_key_values(text)?)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let unknown: Vec<&str> = map.keys().map(String::as_str).filter(|k| !KEYS.contains(k)).collect();
        if !unknown.is_empty() {
            return Err(Error::Spec(format!("unknown keys: {}", unknown.join(", "))));
        }
        let mut spec = SweepSpec::default();
        let get = |k: &str| map.get(k).map(String::as_str);

        if let Some(v) = get("truth") {
            spec.truths = parse_list("truth", v, str::parse)?;
        }
        if let Some(v) = get("snr_db") {
            spec.snr_db = parse_snr(v)?;
        }
        if let Some(v) = get("k") {
            spec.k_values = parse_list("k", v, |s| parse_num("k", s))?;
        }
        if let Some(v) = get("methods") {
            spec.methods = parse_list("methods", v, str::parse)?;
        }
        let half_range = get("half_range").map(|v| parse_num("half_range", v)).transpose()?;
        spec.trajectory = match get("trajectory").unwrap_or("iid") {
            "iid" => TrajectoryModel::IidUniform {
                half_range: half_range.unwrap_or(2.0),
            },
            "drift" => TrajectoryModel::Drift {
                speed_mean: get("speed_mean").map(|v| parse_num("speed_mean", v)).transpose()?.unwrap_or(0.5),
                speed_std: get("speed_std").map(|v| parse_num("speed_std", v)).transpose()?.unwrap_or(0.1),
                angle_std: get("angle_std").map(|v| parse_num("angle_std", v)).transpose()?.unwrap_or(0.2),
                initial_angle: None,
            },
            other => return Err(Error::Spec(format!("'trajectory': unknown model '{other}' (iid or drift)"))),
        };
        if let Some(v) = get("trials") {
            spec.trials = parse_num("trials", v)?;
        }
        if let Some(v) = get("seed") {
            spec.base_seed = parse_num("seed", v)?;
        }
        if let Some(v) = get("max_outer_iters") {
            spec.estimator.max_outer_iters = parse_num("max_outer_iters", v)?;
        }
        if let Some(v) = get("shift_tol") {
            spec.estimator.shift_tol = parse_num("shift_tol", v)?;
        }
        if let Some(v) = get("newton_iters") {
            spec.estimator.newton_iters = parse_num("newton_iters", v)?;
        }
        if let Some(v) = get("random_init_half_range") {
            spec.estimator.random_init_half_range = parse_num("random_init_half_range", v)?;
        }
        if let Some(v) = get("timing") {
            spec.timing = parse_num("timing", v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.truths.is_empty() {
            return fail("no truth images".into());
        }
        if self.snr_db.is_empty() {
            return fail("empty SNR grid".into());
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return fail("'k' needs values >= 1".into());
        }
        if self.methods.is_empty() {
            return fail("no methods".into());
        }
        if self.trials < 2 {
            return fail(format!("'trials' must be >= 2, got {}", self.trials));
        }
        self.trajectory.validate().map_err(|e| Error::Spec(e.to_string()))?;
        self.estimator.validate().map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(0)
    }
}
