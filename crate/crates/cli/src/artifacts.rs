//! Output files with embedded provenance and a closing manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Named input blob hashed into the run's provenance.
pub struct Input {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct Artifacts {
    dir: PathBuf,
    subcommand: &'static str,
    config: Value,
    config_line: String,
    inputs: Vec<(String, String)>,
    inputs_sha256: String,
    outputs: Vec<(String, String)>,
}

impl Artifacts {
    /// `inputs` should hold the raw config (or its resolved form when none
    /// was given) and every data file read.
    pub fn new<C: Serialize>(dir: &Path, subcommand: &'static str, config: &C, inputs: Vec<Input>) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let config = serde_json::to_value(config)?;
        let config_line = serde_json::to_string(&config)?;
        let mut all = Sha256::new();
        let mut listed = Vec::new();
        for input in &inputs {
            all.update((input.name.len() as u64).to_le_bytes());
            all.update(input.name.as_bytes());
            all.update((input.bytes.len() as u64).to_le_bytes());
            all.update(&input.bytes);
            listed.push((input.name.clone(), sha256_hex(&input.bytes)));
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            subcommand,
            config,
            config_line,
            inputs: listed,
            inputs_sha256: hex::encode(all.finalize()),
            outputs: Vec::new(),
        })
    }

    fn preamble(&self, comment: &str, close: &str) -> String {
        format!(
            "{comment} qvtrack {} {}{close}\n{comment} config {}{close}\n{comment} inputs_sha256 {}{close}\n",
            self.subcommand,
            env!("CARGO_PKG_VERSION"),
            self.config_line,
            self.inputs_sha256
        )
    }

    fn write(&mut self, name: &str, content: String) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, &content).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push((name.to_string(), sha256_hex(content.as_bytes())));
        Ok(())
    }

    /// CSV with `#` provenance lines, a header row and pre-formatted cells.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut body = String::new();
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.csv_body(name, header, &body)
    }

    pub fn csv_body(&mut self, name: &str, header: &[&str], body: &str) -> Result<()> {
        let mut out = self.preamble("#", "");
        let _ = writeln!(out, "{}", header.join(","));
        out.push_str(body);
        self.write(name, out)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<()> {
        let (head, rest) = svg.split_once('\n').unwrap_or((svg, ""));
        let comment = self.preamble("<!--", " -->");
        self.write(name, format!("{head}\n{comment}{rest}"))
    }

    /// Write `manifest.json` listing inputs and outputs.
    pub fn finish(self) -> Result<()> {
        let manifest = json!({
            "tool": "qvtrack",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "config": self.config,
            "inputs": self.inputs.iter().map(|(n, h)| json!({"name": n, "sha256": h})).collect::<Vec<_>>(),
            "inputs_sha256": self.inputs_sha256,
            "outputs": self.outputs.iter().map(|(n, h)| json!({"file": n, "sha256": h})).collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn f(v: f64) -> String {
    qvtrack_core::csvio::fmt_f64(v)
}
