use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Loaded;
use crate::runner::SweepReport;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub name: String,
    pub kind: String,
    pub output: String,
    pub columns: String,
    pub window_offset: i64,
    pub window_len: usize,
    pub rows: usize,
    pub zero_hit_rows: usize,
}

/// Record of one `run`: what was executed, with which inputs, and where the
/// results went.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub versions: BTreeMap<String, String>,
    pub sweeps: Vec<SweepEntry>,
}

/// `sha256:<hex>` of the config text.
pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl RunManifest {
    pub fn new(
        loaded: &Loaded,
        config_path: &Path,
        report: &[SweepReport],
        elapsed: Duration,
    ) -> Self {
        let versions = BTreeMap::from([
            ("rwdre".to_string(), rwdre::VERSION.to_string()),
            (
                "rwdre-cli".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
        ]);
        RunManifest {
            config_path: config_path.display().to_string(),
            config_digest: digest(&loaded.text),
            master_seed: loaded.config.run.seed,
            workers: rayon::current_num_threads(),
            wall_clock_seconds: elapsed.as_secs_f64(),
            versions,
            sweeps: report
                .iter()
                .map(|s| SweepEntry {
                    name: s.name.clone(),
                    kind: s.kind.to_string(),
                    output: s.file.display().to_string(),
                    columns: s.header.to_string(),
                    window_offset: s.window_offset,
                    window_len: s.window_len,
                    rows: s.rows,
                    zero_hit_rows: s.zero_hit_rows,
                })
                .collect(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Run(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }
}
