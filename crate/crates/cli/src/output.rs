//! Run manifests, output sinks and human-readable number formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const VERSION: &str = env!("WICKETSIM_VERSION");

/// Provenance embedded in every output file. Wall time is deliberately
/// absent so that reruns are byte-identical; it goes to the log instead.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_paths: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sims: Option<u64>,
    pub version: &'static str,
}

impl Manifest {
    pub fn new(command: &str, paths: &[&Path]) -> Self {
        Self {
            command: command.to_string(),
            config_paths: paths.iter().map(|p| p.display().to_string()).collect(),
            seed: None,
            sims: None,
            version: VERSION,
        }
    }

    pub fn with_run(mut self, sims: u64, seed: u64) -> Self {
        self.sims = Some(sims);
        self.seed = Some(seed);
        self
    }

    /// `# manifest: {...}` line heading CSV and human output.
    pub fn comment(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

/// A JSON document with the manifest appended as a `manifest` field.
#[derive(Serialize)]
pub struct WithManifest<'a, T: Serialize> {
    #[serde(flatten)]
    pub body: &'a T,
    pub manifest: &'a Manifest,
}

pub fn sink(out: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Probability as a percentage to three significant figures, e.g. `64.9`.
pub fn pct(p: f64) -> String {
    sig3(100.0 * p)
}

fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = |v: f64| (2 - v.abs().log10().floor() as i32).max(0) as usize;
    let d = decimals(x);
    let rounded: f64 = format!("{x:.d$}").parse().expect("formatted float parses");
    // 9.996 rounds up to 10.00; one decimal fewer restores three figures
    let d = decimals(rounded).min(d);
    format!("{x:.d$}")
}
