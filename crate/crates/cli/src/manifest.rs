//! Run manifests: the subcommand, every resolved option, input and output
//! digests, the seed and the tool version, as `key=value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use clap::{ArgAction, ArgMatches, CommandFactory};
use sha2::{Digest, Sha256};

use crate::{commands, usage, Cli, ReplayArgs};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Options that locate or schedule a run without changing its outputs.
const NOT_RECORDED: [&str; 4] = ["out", "threads", "help", "version"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub version: String,
    pub subcommand: String,
    /// Raw option values by long flag name, defaults included.
    pub options: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn from_matches(subcommand: &str, m: &ArgMatches) -> Manifest {
        let cmd = Cli::command();
        let sub = cmd.find_subcommand(subcommand).expect("subcommand exists");
        let mut options = BTreeMap::new();
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            if NOT_RECORDED.contains(&long) {
                continue;
            }
            if let Ok(Some(raw)) = m.try_get_raw(arg.get_id().as_str()) {
                let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
                options.insert(long.to_string(), vals.join(","));
            }
        }
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            options,
            ..Manifest::default()
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# causalnet run manifest\n");
        let _ = writeln!(out, "version={}", self.version);
        let _ = writeln!(out, "subcommand={}", self.subcommand);
        let _ = writeln!(out, "seed={}", self.options.get("seed").map_or("none", String::as_str));
        for (k, v) in &self.options {
            let _ = writeln!(out, "option.{k}={v}");
        }
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "input.{k}=sha256:{v}");
        }
        for (k, v) in &self.outputs {
            let _ = writeln!(out, "output.{k}=sha256:{v}");
        }
        out
    }

    pub fn parse(text: &str) -> anyhow::Result<Manifest> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("manifest line {}: expected key=value", i + 1))?;
            let digest = || {
                value
                    .strip_prefix("sha256:")
                    .map(str::to_string)
                    .with_context(|| format!("manifest line {}: expected a sha256 digest", i + 1))
            };
            if let Some(k) = key.strip_prefix("option.") {
                m.options.insert(k.to_string(), value.to_string());
            } else if let Some(k) = key.strip_prefix("input.") {
                m.inputs.insert(k.to_string(), digest()?);
            } else if let Some(k) = key.strip_prefix("output.") {
                m.outputs.insert(k.to_string(), digest()?);
            } else {
                match key {
                    "version" => m.version = value.to_string(),
                    "subcommand" => m.subcommand = value.to_string(),
                    "seed" => {}
                    _ => bail!("manifest line {}: unknown key `{key}`", i + 1),
                }
            }
        }
        if m.subcommand.is_empty() {
            bail!("manifest names no subcommand");
        }
        Ok(m)
    }

    /// Command line that reproduces the run into `out`.
    pub fn argv(&self, out: &Path) -> anyhow::Result<Vec<String>> {
        let cmd = Cli::command();
        let sub = cmd
            .find_subcommand(&self.subcommand)
            .ok_or_else(|| usage(format!("unknown subcommand `{}` in manifest", self.subcommand)))?;
        let mut argv = vec!["causalnet".to_string(), self.subcommand.clone()];
        for (long, value) in &self.options {
            let arg = sub
                .get_arguments()
                .find(|a| a.get_long() == Some(long.as_str()))
                .ok_or_else(|| usage(format!("manifest option `{long}` is not accepted by `{}`", self.subcommand)))?;
            if matches!(arg.get_action(), ArgAction::SetTrue) {
                if value == "true" {
                    argv.push(format!("--{long}"));
                }
            } else {
                argv.push(format!("--{long}"));
                argv.push(value.clone());
            }
        }
        argv.push("--out".into());
        argv.push(out.to_string_lossy().into_owned());
        Ok(argv)
    }
}

/// Re-executes a manifest and compares every output digest with the record.
pub fn replay(args: &ReplayArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("cannot read {}", args.manifest.display()))?;
    let recorded = Manifest::parse(&text)?;
    if recorded.version != env!("CARGO_PKG_VERSION") {
        bail!(
            "manifest was written by version {}, this is {}",
            recorded.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    for (key, digest) in &recorded.inputs {
        let path = recorded
            .options
            .get(key)
            .with_context(|| format!("input `{key}` has no recorded path"))?;
        let bytes = fs::read(path).with_context(|| format!("cannot read input {path}"))?;
        if &sha256_hex(&bytes) != digest {
            bail!("input `{key}` ({path}) changed since the manifest was written");
        }
    }

    let argv = recorded.argv(&args.out)?;
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(|e| usage(format!("manifest does not form a valid command line: {e}")))?;
    let cli = <Cli as clap::FromArgMatches>::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("subcommand present");
    let fresh = commands::execute(&cli.command, Manifest::from_matches(name, sub))?;

    let mut differing = Vec::new();
    for (k, v) in &recorded.outputs {
        if fresh.outputs.get(k) != Some(v) {
            differing.push(k.clone());
        }
    }
    differing.extend(fresh.outputs.keys().filter(|k| !recorded.outputs.contains_key(*k)).cloned());
    if !differing.is_empty() {
        bail!("replay differs in {}", differing.join(", "));
    }
    println!("replay: {} outputs identical", recorded.outputs.len());
    Ok(())
}
