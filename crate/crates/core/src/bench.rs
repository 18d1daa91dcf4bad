//! Seeded benchmark sweeps over all allocation methods.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::execution::{run_mission, FeasibilityOracle, Method, MissionConfig, MissionLog};
use crate::scene::{generate_scene, save_scene, Scene, SceneParams};
use crate::traversability::{plans_for_both, retrievable, SceneState};

/// How many sub-seeds [`generate_instance`] tries before giving up.
pub const MAX_INSTANCE_ATTEMPTS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub n_values: Vec<usize>,
    pub repetitions: usize,
    pub methods: Vec<Method>,
    pub oracle: FeasibilityOracle,
    pub seed_base: u64,
    pub budget: usize,
    pub radius_range: (f64, f64),
    pub gripper_radius: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_values: vec![12, 16, 20],
            repetitions: 30,
            methods: Method::ALL.to_vec(),
            oracle: FeasibilityOracle::AlwaysFeasible,
            seed_base: 0,
            budget: 100_000,
            radius_range: (25.0, 45.0),
            gripper_radius: 40.0,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameters(m.to_string()));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.n_values.iter().any(|&n| n < 2) {
            return bad("every N must be at least 2");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods must not repeat");
        }
        if let FeasibilityOracle::SeededRandom { p_fail, .. } = self.oracle {
            if !(0.0..=1.0).contains(&p_fail) {
                return bad("p_fail must lie in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn scene_params(&self, n: usize) -> SceneParams {
        SceneParams {
            radius_range: self.radius_range,
            gripper_radius: self.gripper_radius,
            ..SceneParams::with_objects(n)
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// True when neither arm can take the target straight away, at least one
/// relocation plan exists, and clearing accessible objects eventually
/// frees the target.
pub fn is_nontrivial_solvable(scene: &Scene) -> bool {
    let state = SceneState::new(scene);
    let plans = plans_for_both(&state);
    !plans.is_empty() && plans.iter().all(|p| p.k() > 1) && retrievable(&state)
}

/// Deterministically draws the `repetition`-th benchmark scene for `n`
/// objects, skipping samples that are unsolvable or need no relocation.
pub fn generate_instance(params: &SceneParams, seed_base: u64, repetition: usize) -> Result<Scene> {
    let stream = mix(mix(seed_base) ^ (params.n_objects as u64) << 32 ^ repetition as u64);
    for attempt in 0..MAX_INSTANCE_ATTEMPTS {
        let seed = mix(stream.wrapping_add(attempt));
        match generate_scene(seed, params) {
            Ok(scene) if is_nontrivial_solvable(&scene) => return Ok(scene),
            Ok(_) | Err(Error::GenerationFailure(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailure(format!(
        "no solvable instance with {} objects after {MAX_INSTANCE_ATTEMPTS} samples",
        params.n_objects
    )))
}

pub fn scene_hash(scene: &Scene) -> u64 {
    let mut h = DefaultHasher::new();
    save_scene(scene).hash(&mut h);
    h.finish()
}

/// Outcome of one (method, N, repetition) cell.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub n: usize,
    pub repetition: usize,
    pub scene_hash: u64,
    pub log: MissionLog,
}

impl RunRecord {
    pub fn relocated(&self) -> usize {
        self.log.relocations.len()
    }

    pub fn turn_takings(&self) -> u32 {
        crate::allocation::count_turn_takings(&self.log.assignees()).0
    }

    /// Percentage; `None` for single-relocation runs.
    pub fn rate(&self) -> Option<f64> {
        crate::allocation::count_turn_takings(&self.log.assignees()).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    /// Mean and sample standard deviation; NaN for an empty sample and a
    /// zero deviation for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n == 1 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, sd }
    }
}

/// Aggregates for one method at one N. Everything except `success_rate`
/// averages over successful runs only.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: Method,
    pub n: usize,
    pub turn_takings: Stat,
    pub rate: Stat,
    pub relocated: Stat,
    pub success_rate: f64,
    pub replanning_mean: f64,
    /// Machine-independent work units; see [`MissionLog::planning_work`].
    pub planning_time: Stat,
    pub makespan: Stat,
}

impl MetricsRow {
    pub fn aggregate(method: Method, n: usize, runs: &[&RunRecord]) -> Self {
        let ok: Vec<&&RunRecord> = runs.iter().filter(|r| r.log.success).collect();
        let stat =
            |f: &dyn Fn(&RunRecord) -> f64| Stat::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        let rates: Vec<f64> = ok.iter().filter_map(|r| r.rate()).collect();
        Self {
            method,
            n,
            turn_takings: stat(&|r| f64::from(r.turn_takings())),
            rate: Stat::of(&rates),
            relocated: stat(&|r| r.relocated() as f64),
            success_rate: if runs.is_empty() {
                f64::NAN
            } else {
                100.0 * ok.len() as f64 / runs.len() as f64
            },
            replanning_mean: stat(&|r| r.log.replanning_count as f64).mean,
            planning_time: stat(&|r| r.log.planning_work() as f64),
            makespan: stat(&|r| r.log.makespan),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Sorted by (method order in the config, N, repetition).
    pub runs: Vec<RunRecord>,
    pub rows: Vec<MetricsRow>,
}

impl BenchReport {
    pub fn row(&self, method: Method, n: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.method == method && r.n == n)
    }

    pub fn runs_for(&self, method: Method, n: usize) -> impl Iterator<Item = &RunRecord> {
        self.runs
            .iter()
            .filter(move |r| r.method == method && r.n == n)
    }
}

/// Runs every configured method on the same scene set. Individual mission
/// failures only lower the success rate.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.repetitions).map(move |rep| (n, rep)))
        .collect();
    let scenes: Vec<Scene> = cells
        .par_iter()
        .map(|&(n, rep)| generate_instance(&config.scene_params(n), config.seed_base, rep))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..config.methods.len())
        .flat_map(|m| (0..cells.len()).map(move |c| (m, c)))
        .collect();
    let mut runs: Vec<(usize, RunRecord)> = jobs
        .par_iter()
        .map(|&(m, c)| {
            let (n, repetition) = cells[c];
            let method = config.methods[m];
            let scene = &scenes[c];
            let mission = MissionConfig {
                method,
                oracle: config.oracle.clone(),
                budget: config.budget,
                random_seed: mix(config.seed_base ^ 0x5EED) ^ c as u64,
            };
            let record = RunRecord {
                method,
                n,
                repetition,
                scene_hash: scene_hash(scene),
                log: run_mission(scene, &mission),
            };
            (m, record)
        })
        .collect();
    runs.sort_by_key(|(m, r)| (*m, r.n, r.repetition));
    let runs: Vec<RunRecord> = runs.into_iter().map(|(_, r)| r).collect();

    let mut rows = Vec::new();
    for &method in &config.methods {
        for &n in &config.n_values {
            let group: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.method == method && r.n == n)
                .collect();
            rows.push(MetricsRow::aggregate(method, n, &group));
        }
    }
    Ok(BenchReport { runs, rows })
}

pub const CSV_HEADER: &str = "method,N,turn_takings_mean,turn_takings_sd,rate_mean,rate_sd,\
relocated_mean,relocated_sd,success_rate,replanning_mean,planning_time_mean,planning_time_sd,\
makespan_mean,makespan_sd";

/// Four significant digits, plain decimal notation. `NaN` prints as `nan`.
pub fn format_sig4(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    let scale = 10f64.powi(3 - magnitude);
    let rounded = (x * scale).round() / scale;
    // rounding can carry into the next decade, e.g. 9.9996 -> 10.00
    let magnitude = if rounded == 0.0 {
        magnitude
    } else {
        rounded.abs().log10().floor() as i32
    };
    let decimals = decimals.min((3 - magnitude).max(0) as usize);
    let s = format!("{rounded:.decimals$}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn emit_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.turn_takings.mean,
            r.turn_takings.sd,
            r.rate.mean,
            r.rate.sd,
            r.relocated.mean,
            r.relocated.sd,
            r.success_rate,
            r.replanning_mean,
            r.planning_time.mean,
            r.planning_time.sd,
            r.makespan.mean,
            r.makespan.sd,
        ];
        write!(out, "{},{}", r.method, r.n).unwrap();
        for f in fields {
            write!(out, ",{}", format_sig4(f)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig4_formatting() {
        assert_eq!(format_sig4(82.2222), "82.22");
        assert_eq!(format_sig4(0.012345), "0.01235");
        assert_eq!(format_sig4(123456.0), "123500");
        assert_eq!(format_sig4(9.99996), "10.00");
        assert_eq!(format_sig4(-1.5), "-1.500");
        assert_eq!(format_sig4(0.0), "0");
        assert_eq!(format_sig4(f64::NAN), "nan");
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(emit_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn sample_deviation() {
        let s = Stat::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((s.mean - 5.0).abs() < 1e-12);
        assert!((s.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(Stat::of(&[3.0]).sd, 0.0);
        assert!(Stat::of(&[]).mean.is_nan());
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = BenchConfig::from_toml("").unwrap();
        assert_eq!(c, BenchConfig::default());
        let c = BenchConfig::from_toml(
            "n_values = [8]\nrepetitions = 2\nmethods = [\"search\", \"greedy\"]\n\n[oracle]\nmode = \"seeded-random\"\np_fail = 0.2\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(c.methods, vec![Method::Search, Method::Greedy]);
        assert_eq!(
            c.oracle,
            FeasibilityOracle::SeededRandom {
                p_fail: 0.2,
                seed: 3
            }
        );
        assert!(BenchConfig::from_toml("repetitions = 0").is_err());
        assert!(BenchConfig::from_toml("n_values = [1]").is_err());
        assert!(BenchConfig::from_toml("methods = [\"search\", \"search\"]").is_err());
        match BenchConfig::from_toml("repetitions = 1\nbogus = 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn instances_are_deterministic_and_nontrivial() {
        let params = SceneParams::with_objects(10);
        let a = generate_instance(&params, 4, 0).unwrap();
        let b = generate_instance(&params, 4, 0).unwrap();
        assert_eq!(save_scene(&a), save_scene(&b));
        assert!(is_nontrivial_solvable(&a));
        let c = generate_instance(&params, 4, 1).unwrap();
        assert_ne!(scene_hash(&a), scene_hash(&c));
    }
}
