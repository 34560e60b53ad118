//! Checkpoint files: enough chain state to continue a run bit for bit.
//!
//! The file is line-oriented text ending in a SHA-256 of everything before
//! it, so truncation or a flipped byte is caught before any field is trusted.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use corruption_lattice::{
    ChainParams, ChainState, Configuration, LatticeGeometry, Model, RngState,
};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const MAGIC: &str = "corruption-lattice checkpoint v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub step: u64,
    pub rng_state: u128,
    pub index_draws: u64,
    pub real_draws: u64,
    pub running_w: f64,
    pub lengths: Vec<usize>,
    pub states: Vec<i8>,
}

impl Checkpoint {
    pub fn capture(state: &ChainState, config_hash: &str) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            step: state.step_count(),
            rng_state: state.rng().state(),
            index_draws: state.rng().index_draws(),
            real_draws: state.rng().real_draws(),
            running_w: state.current_w(),
            lengths: state.geometry().lengths().to_vec(),
            states: state.config().states().to_vec(),
        }
    }

    pub fn encode(&self) -> String {
        let lengths: Vec<String> = self.lengths.iter().map(|l| l.to_string()).collect();
        let states: String = self
            .states
            .iter()
            .map(|&s| if s > 0 { '+' } else { '-' })
            .collect();
        let mut body = String::new();
        writeln!(body, "{MAGIC}").unwrap();
        writeln!(body, "config_hash {}", self.config_hash).unwrap();
        writeln!(body, "step {}", self.step).unwrap();
        writeln!(body, "rng_state {:032x}", self.rng_state).unwrap();
        writeln!(body, "index_draws {}", self.index_draws).unwrap();
        writeln!(body, "real_draws {}", self.real_draws).unwrap();
        writeln!(body, "running_w {:016x}", self.running_w.to_bits()).unwrap();
        writeln!(body, "lengths {}", lengths.join(",")).unwrap();
        writeln!(body, "states {states}").unwrap();
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        writeln!(body, "sha256 {digest}").unwrap();
        body
    }

    pub fn decode(path: &Path, text: &str) -> Result<Self> {
        let bad = |msg: &str| CliError::format(path, format!("checkpoint: {msg}"));
        let body_end = text
            .rfind("sha256 ")
            .ok_or_else(|| bad("missing digest line"))?;
        let (body, trailer) = text.split_at(body_end);
        let stored = trailer
            .strip_prefix("sha256 ")
            .unwrap_or("")
            .trim_end_matches('\n');
        if stored != hex::encode(Sha256::digest(body.as_bytes())) {
            return Err(bad(
                "digest does not match contents; file is truncated or corrupted",
            ));
        }

        let mut lines = body.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("unrecognised header"));
        }
        let mut field = |name: &str| -> Result<&str> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(name))
                .and_then(|l| l.strip_prefix(' '))
                .ok_or_else(|| bad(&format!("expected field `{name}`")))
        };
        let config_hash = field("config_hash")?.to_string();
        let step = field("step")?.parse().map_err(|_| bad("bad step"))?;
        let rng_state =
            u128::from_str_radix(field("rng_state")?, 16).map_err(|_| bad("bad rng_state"))?;
        let index_draws = field("index_draws")?
            .parse()
            .map_err(|_| bad("bad index_draws"))?;
        let real_draws = field("real_draws")?
            .parse()
            .map_err(|_| bad("bad real_draws"))?;
        let w_bits =
            u64::from_str_radix(field("running_w")?, 16).map_err(|_| bad("bad running_w"))?;
        let lengths = field("lengths")?
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<Vec<usize>, _>>()
            .map_err(|_| bad("bad lengths"))?;
        let states = field("states")?
            .chars()
            .map(|c| match c {
                '+' => Ok(Configuration::CORRUPT),
                '-' => Ok(Configuration::HONEST),
                _ => Err(bad("bad state character")),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(Self {
            config_hash,
            step,
            rng_state,
            index_draws,
            real_draws,
            running_w: f64::from_bits(w_bits),
            lengths,
            states,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text =
            String::from_utf8(text).map_err(|_| CliError::format(path, "checkpoint: not UTF-8"))?;
        Self::decode(path, &text)
    }

    /// Writes through a temporary file so an interrupted write leaves the
    /// previous checkpoint intact.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.encode()).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
    }

    /// Rebuilds the chain. The caller is responsible for checking the hash.
    pub fn restore(
        &self,
        path: &Path,
        geometry: Arc<LatticeGeometry>,
        model: Arc<Model>,
        params: ChainParams,
    ) -> Result<ChainState> {
        if self.lengths != geometry.lengths() {
            return Err(CliError::format(
                path,
                "checkpoint: lattice shape differs from configuration",
            ));
        }
        let config = Configuration::from_states(&geometry, self.states.clone())
            .map_err(|e| CliError::format(path, e.to_string()))?;
        let mut rng = RngState::from_state(self.rng_state);
        rng.set_draw_counts(self.index_draws, self.real_draws);
        let mut state = ChainState::from_parts(geometry, model, params, config, rng, self.step)?;
        state.restore_running_w(self.running_w)?;
        Ok(state)
    }
}
