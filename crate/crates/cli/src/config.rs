//! Run configuration: flat `key = value` lines, `#` starts a comment.
//!
//! Every key may also be given as a `--key value` flag, which overrides the
//! file. Only `lengths`, `T` and `steps` are required.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use corruption_lattice::model::{BondDistribution, CouplingModel, Model, ObjectiveConvention};
use corruption_lattice::sampler::{ChainParams, RunHooks, Schedule};
use corruption_lattice::{InitMode, LatticeGeometry};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Origin, Result};

/// Default output directory is read from this variable before falling back to
/// `./out`.
pub const OUTPUT_ENV: &str = "CORRUPTION_LATTICE_OUTPUT";

/// Recognised keys with a one-line description, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    (
        "lengths",
        "sites per axis, 1 to 3 values, e.g. 60,60,60 (required)",
    ),
    ("T", "temperature, beta = 1/T (required)"),
    ("steps", "elementary trial moves (required)"),
    ("seed", "chain seed [0]"),
    ("schedule", "random_site | sequential_sweep [random_site]"),
    ("init", "random | all_corrupt | all_honest [random]"),
    ("p_corrupt", "corrupt probability for init = random [0.5]"),
    ("coupling", "uniform | bimodal | interval [uniform]"),
    ("J", "uniform coupling, or magnitude for bimodal [1]"),
    ("J_low", "lower end for interval couplings [-1]"),
    ("J_high", "upper end for interval couplings [1]"),
    ("disorder_seed", "seed for quenched couplings [0]"),
    ("objective_convention", "bond_once | literal [bond_once]"),
    (
        "measure_every",
        "steps between series rows, 0 disables [10000]",
    ),
    ("snapshot_every", "steps between snapshots, 0 disables [0]"),
    (
        "snapshot_axis",
        "axis held fixed for plane snapshots of 3D lattices [0]",
    ),
    (
        "snapshot_index",
        "coordinate of the snapshot plane [middle]",
    ),
    (
        "checkpoint_every",
        "steps between checkpoints, 0 disables [0]",
    ),
    (
        "output",
        "output directory [$CORRUPTION_LATTICE_OUTPUT or out]",
    ),
    ("temperatures", "sweep temperatures, comma separated [T]"),
    ("seeds_per_temperature", "sweep chains per temperature [1]"),
    ("workers", "concurrent sweep chains [1]"),
];

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingSpec {
    Uniform {
        j: f64,
    },
    Bimodal {
        magnitude: f64,
        disorder_seed: u64,
    },
    Interval {
        low: f64,
        high: f64,
        disorder_seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub lengths: Vec<usize>,
    pub coupling: CouplingSpec,
    pub convention: ObjectiveConvention,
    pub temperature: f64,
    pub steps: u64,
    pub seed: u64,
    pub schedule: Schedule,
    pub init: InitMode,
    pub measure_every: Option<u64>,
    pub snapshot_every: Option<u64>,
    pub snapshot_axis: usize,
    pub snapshot_index: usize,
    pub checkpoint_every: Option<u64>,
    pub output: PathBuf,
    pub temperatures: Vec<f64>,
    pub seeds_per_temperature: u64,
    pub workers: usize,
}

/// Raw key/value pairs with their origin.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let origin = Origin::Line(n + 1);
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::config(
                    origin,
                    format!("expected `key = value`, found `{content}`"),
                ));
            };
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(CliError::config(origin, format!("duplicate key `{key}`")));
            }
            raw.insert(key, value.trim(), origin)?;
        }
        Ok(raw)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// File contents (if any) with flags applied on top.
    pub fn load(path: Option<&Path>, flags: &[(String, String)]) -> Result<Self> {
        let mut raw = match path {
            Some(p) => Self::read(p)?,
            None => Self::default(),
        };
        for (k, v) in flags {
            raw.set_flag(k, v)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(CliError::config(origin, format!("unknown key `{key}`")));
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Applies a `--key value` flag on top of the file contents.
    pub fn set_flag(&mut self, key: &str, value: &str) -> Result<()> {
        self.insert(key, value, Origin::Flag(key.to_string()))
    }

    /// Fills in `key` unless the file or a flag already set it.
    pub fn set_default(&mut self, key: &str, value: &str) -> Result<()> {
        if self.entries.contains_key(key) {
            return Ok(());
        }
        self.insert(key, value, Origin::Default)
    }

    fn get(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries.get(key).map(|(v, o)| (v.as_str(), o))
    }

    fn parse_value<T: std::str::FromStr>(
        &self,
        key: &str,
        what: &str,
    ) -> Result<Option<(T, Origin)>> {
        let Some((value, origin)) = self.get(key) else {
            return Ok(None);
        };
        value
            .parse()
            .map(|v| Some((v, origin.clone())))
            .map_err(|_| {
                CliError::config(
                    origin.clone(),
                    format!("`{key}` expects {what}, found `{value}`"),
                )
            })
    }

    fn required<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<(T, Origin)> {
        self.parse_value(key, what)?
            .ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))
    }

    fn or<T: std::str::FromStr>(&self, key: &str, what: &str, default: T) -> Result<(T, Origin)> {
        Ok(self
            .parse_value(key, what)?
            .unwrap_or((default, Origin::Default)))
    }

    fn list<T: std::str::FromStr>(
        &self,
        key: &str,
        what: &str,
    ) -> Result<Option<(Vec<T>, Origin)>> {
        let Some((value, origin)) = self.get(key) else {
            return Ok(None);
        };
        let items = value
            .split([',', 'x', ' '])
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| {
                CliError::config(
                    origin.clone(),
                    format!("`{key}` expects a list of {what}, found `{value}`"),
                )
            })?;
        Ok(Some((items, origin.clone())))
    }

    fn every(&self, key: &str, default: u64) -> Result<Option<u64>> {
        let (v, _) = self.or::<u64>(key, "a non-negative integer", default)?;
        Ok((v > 0).then_some(v))
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let (lengths, lengths_origin) = self
            .list::<usize>("lengths", "positive integers")?
            .ok_or_else(|| CliError::Usage("missing required key `lengths`".into()))?;
        let geometry = LatticeGeometry::new(&lengths)
            .map_err(|e| CliError::config(lengths_origin.clone(), e.to_string()))?;

        // A sweep may give only `temperatures`; its first entry stands in for `T`.
        let (temperature, t_origin) = match (
            self.parse_value::<f64>("T", "a number")?,
            self.list::<f64>("temperatures", "numbers")?,
        ) {
            (Some(t), _) => t,
            (None, Some((ts, origin))) if !ts.is_empty() => (ts[0], origin),
            _ => self.required::<f64>("T", "a number")?,
        };
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(CliError::config(
                t_origin,
                format!("temperature {temperature} must be positive"),
            ));
        }
        let (steps, steps_origin) = self.required::<u64>("steps", "a positive integer")?;
        if steps == 0 {
            return Err(CliError::config(
                steps_origin,
                "step budget must be at least 1",
            ));
        }
        let (seed, _) = self.or::<u64>("seed", "an unsigned integer", 0)?;

        let (schedule_name, schedule_origin) =
            self.or::<String>("schedule", "a schedule", "random_site".into())?;
        let schedule = match schedule_name.as_str() {
            "random_site" => Schedule::RandomSite,
            "sequential_sweep" => Schedule::SequentialSweep,
            other => {
                return Err(CliError::config(
                    schedule_origin,
                    format!("unknown schedule `{other}`"),
                ))
            }
        };

        let (p_corrupt, p_origin) = self.or::<f64>("p_corrupt", "a probability", 0.5)?;
        if !(0.0..=1.0).contains(&p_corrupt) {
            return Err(CliError::config(
                p_origin,
                format!("p_corrupt {p_corrupt} outside [0, 1]"),
            ));
        }
        let (init_name, init_origin) =
            self.or::<String>("init", "an init mode", "random".into())?;
        let init = match init_name.as_str() {
            "random" => InitMode::Random { p_corrupt },
            "all_corrupt" => InitMode::AllCorrupt,
            "all_honest" => InitMode::AllHonest,
            other => {
                return Err(CliError::config(
                    init_origin,
                    format!("unknown init mode `{other}`"),
                ))
            }
        };

        let (j, j_origin) = self.or::<f64>("J", "a number", 1.0)?;
        if !j.is_finite() {
            return Err(CliError::config(j_origin, "J must be finite"));
        }
        let (disorder_seed, _) = self.or::<u64>("disorder_seed", "an unsigned integer", 0)?;
        let (coupling_name, coupling_origin) =
            self.or::<String>("coupling", "a coupling kind", "uniform".into())?;
        let coupling = match coupling_name.as_str() {
            "uniform" => CouplingSpec::Uniform { j },
            "bimodal" => CouplingSpec::Bimodal {
                magnitude: j,
                disorder_seed,
            },
            "interval" => {
                let (low, low_origin) = self.or::<f64>("J_low", "a number", -1.0)?;
                let (high, _) = self.or::<f64>("J_high", "a number", 1.0)?;
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    return Err(CliError::config(
                        low_origin,
                        format!("interval [{low}, {high}) is empty"),
                    ));
                }
                CouplingSpec::Interval {
                    low,
                    high,
                    disorder_seed,
                }
            }
            other => {
                return Err(CliError::config(
                    coupling_origin,
                    format!("unknown coupling `{other}`"),
                ))
            }
        };

        let (convention_name, convention_origin) =
            self.or::<String>("objective_convention", "a convention", "bond_once".into())?;
        let convention = match convention_name.as_str() {
            "bond_once" => ObjectiveConvention::BondOnce,
            "literal" => ObjectiveConvention::Literal,
            other => {
                return Err(CliError::config(
                    convention_origin,
                    format!("unknown objective convention `{other}`"),
                ))
            }
        };

        let (snapshot_axis, axis_origin) = self.or::<usize>("snapshot_axis", "an axis index", 0)?;
        if snapshot_axis >= geometry.dimension() {
            return Err(CliError::config(
                axis_origin,
                format!(
                    "snapshot axis {snapshot_axis} on a {}-dimensional lattice",
                    geometry.dimension()
                ),
            ));
        }
        let middle = lengths[snapshot_axis] / 2;
        let (snapshot_index, index_origin) =
            self.or::<usize>("snapshot_index", "a coordinate", middle)?;
        if snapshot_index >= lengths[snapshot_axis] {
            return Err(CliError::config(
                index_origin,
                format!(
                    "snapshot index {snapshot_index} outside axis of length {}",
                    lengths[snapshot_axis]
                ),
            ));
        }

        let output = match self.get("output") {
            Some((path, _)) => PathBuf::from(path),
            None => {
                std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from)
            }
        };

        let temperatures = match self.list::<f64>("temperatures", "numbers")? {
            Some((ts, origin)) => {
                if ts.is_empty() {
                    return Err(CliError::config(origin, "temperature list is empty"));
                }
                if let Some(bad) = ts.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                    return Err(CliError::config(
                        origin,
                        format!("temperature {bad} must be positive"),
                    ));
                }
                ts
            }
            None => vec![temperature],
        };
        let (seeds_per_temperature, seeds_origin) =
            self.or::<u64>("seeds_per_temperature", "a positive integer", 1)?;
        if seeds_per_temperature == 0 {
            return Err(CliError::config(
                seeds_origin,
                "need at least one seed per temperature",
            ));
        }
        let (workers, workers_origin) = self.or::<usize>("workers", "a positive integer", 1)?;
        if workers == 0 {
            return Err(CliError::config(workers_origin, "need at least one worker"));
        }

        Ok(RunConfig {
            lengths,
            coupling,
            convention,
            temperature,
            steps,
            seed,
            schedule,
            init,
            measure_every: self.every("measure_every", 10_000)?,
            snapshot_every: self.every("snapshot_every", 0)?,
            snapshot_axis,
            snapshot_index,
            checkpoint_every: self.every("checkpoint_every", 0)?,
            output,
            temperatures,
            seeds_per_temperature,
            workers,
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path, flags: &[(String, String)]) -> Result<Self> {
        RawConfig::load(Some(path), flags)?.resolve()
    }

    pub fn geometry(&self) -> Result<LatticeGeometry> {
        Ok(LatticeGeometry::new(&self.lengths)?)
    }

    pub fn model(&self, geometry: &LatticeGeometry) -> Result<Model> {
        let couplings = match self.coupling {
            CouplingSpec::Uniform { j } => CouplingModel::uniform(j)?,
            CouplingSpec::Bimodal {
                magnitude,
                disorder_seed,
            } => CouplingModel::quenched(
                geometry,
                BondDistribution::Bimodal { magnitude },
                disorder_seed,
            )?,
            CouplingSpec::Interval {
                low,
                high,
                disorder_seed,
            } => CouplingModel::quenched(
                geometry,
                BondDistribution::Interval { low, high },
                disorder_seed,
            )?,
        };
        Ok(Model::new(couplings, self.convention))
    }

    pub fn chain_params(&self) -> Result<ChainParams> {
        self.chain_params_at(self.temperature, self.seed)
    }

    pub fn chain_params_at(&self, temperature: f64, seed: u64) -> Result<ChainParams> {
        Ok(ChainParams::new(
            temperature,
            self.steps,
            self.schedule,
            seed,
            self.init,
        )?)
    }

    pub fn hooks(&self) -> RunHooks {
        RunHooks {
            measure_every: self.measure_every,
            snapshot_every: self.snapshot_every,
        }
    }

    /// Geometry and model behind shared handles, ready for chains.
    pub fn build(&self) -> Result<(Arc<LatticeGeometry>, Arc<Model>)> {
        let geometry = self.geometry()?;
        let model = self.model(&geometry)?;
        Ok((Arc::new(geometry), Arc::new(model)))
    }

    /// Canonical text of every setting that shapes a trajectory or its
    /// recorded outputs. The step budget, output location and sweep settings
    /// are left out so a checkpointed run can be extended or moved.
    pub fn canonical(&self) -> String {
        let lengths: Vec<String> = self.lengths.iter().map(|l| l.to_string()).collect();
        let coupling = match self.coupling {
            CouplingSpec::Uniform { j } => format!("uniform {j:?}"),
            CouplingSpec::Bimodal {
                magnitude,
                disorder_seed,
            } => format!("bimodal {magnitude:?} {disorder_seed}"),
            CouplingSpec::Interval {
                low,
                high,
                disorder_seed,
            } => format!("interval {low:?} {high:?} {disorder_seed}"),
        };
        let init = match self.init {
            InitMode::AllCorrupt => "all_corrupt".to_string(),
            InitMode::AllHonest => "all_honest".to_string(),
            InitMode::Random { p_corrupt } => format!("random {p_corrupt:?}"),
        };
        format!(
            "lengths={}\ncoupling={coupling}\nconvention={:?}\nT={:?}\nseed={}\nschedule={:?}\ninit={init}\n\
             measure_every={:?}\nsnapshot_every={:?}\nsnapshot_plane={} {}\n",
            lengths.join(","),
            self.convention,
            self.temperature,
            self.seed,
            self.schedule,
            self.measure_every,
            self.snapshot_every,
            self.snapshot_axis,
            self.snapshot_index,
        )
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
