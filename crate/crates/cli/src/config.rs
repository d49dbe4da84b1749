//! Config-file defaults merged under command-line flags.

use std::ffi::OsString;
use std::path::{Component, Path, PathBuf};

use anyhow::{bail, Context};
use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory};
use serde_json::{Map, Value};

use crate::args::Cli;
use crate::invalid;

pub const CONFIG_VERSION: u64 = 1;
const GLOBAL_KEYS: [&str; 4] = ["seed", "parallelism", "out_dir", "log_level"];

/// Finds `--config` in `argv` without a full parse.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn to_flag_values(key: &str, v: &Value) -> anyhow::Result<Vec<Option<String>>> {
    Ok(match v {
        Value::Bool(true) => vec![None],
        Value::Bool(false) | Value::Null => vec![],
        Value::Number(n) => vec![Some(n.to_string())],
        Value::String(s) => vec![Some(s.clone())],
        Value::Array(items) => {
            let mut out = Vec::new();
            for i in items {
                out.extend(to_flag_values(key, i)?);
            }
            out
        }
        Value::Object(_) => bail!("config key {key:?} must be a scalar or a list"),
    })
}

/// Walks config blocks alongside the parsed subcommands and appends every
/// value the user did not pass explicitly.
fn append_defaults(
    cmd: &clap::Command,
    matches: &ArgMatches,
    block: &Map<String, Value>,
    globals: &Map<String, Value>,
    extra: &mut Vec<OsString>,
) -> anyhow::Result<()> {
    let (sub_name, sub_matches) = match matches.subcommand() {
        Some(s) => s,
        None => return Ok(()),
    };
    let sub_cmd = cmd.find_subcommand(sub_name).expect("parsed subcommand exists");
    let sub_block = match block.get(sub_name) {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => bail!("config block {sub_name:?} must be an object"),
        None => Map::new(),
    };
    if sub_cmd.get_subcommands().next().is_some() {
        return append_defaults(sub_cmd, sub_matches, &sub_block, globals, extra);
    }
    let entries = globals.iter().chain(sub_block.iter());
    for (key, value) in entries {
        let Some(arg) = sub_cmd.get_arguments().find(|a| a.get_id().as_str() == key) else {
            bail!("config key {key:?} is not an option of {sub_name}");
        };
        if sub_matches.value_source(key) == Some(ValueSource::CommandLine) {
            continue;
        }
        let long = arg.get_long().expect("config-settable options have long names");
        for v in to_flag_values(key, value)? {
            extra.push(format!("--{long}").into());
            if let Some(v) = v {
                extra.push(v.into());
            }
        }
    }
    Ok(())
}

/// Parses `argv`, filling options absent from the command line with values
/// from the `--config` file.
pub fn parse_with_config(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let Some(path) = config_path(&argv) else {
        return Cli::try_parse_from_argv(argv);
    };
    let mut cmd = Cli::command();
    cmd.build();
    // Lenient pass: required options may come from the file.
    let matches = cmd.clone().ignore_errors(true).try_get_matches_from(argv.clone())?;
    let extra = load_config(&path)
        .and_then(|(globals, blocks)| {
            if let Some(k) = blocks.keys().find(|k| cmd.find_subcommand(k.as_str()).is_none()) {
                bail!("config key {k:?} is neither a global option nor a command");
            }
            let mut extra = Vec::new();
            append_defaults(&cmd, &matches, &blocks, &globals, &mut extra)?;
            Ok(extra)
        })
        .map_err(|e| cmd.clone().error(clap::error::ErrorKind::InvalidValue, format!("{e:#}")))?;
    let mut full = argv;
    full.extend(extra);
    Cli::try_parse_from_argv(full)
}

fn load_config(path: &Path) -> anyhow::Result<(Map<String, Value>, Map<String, Value>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let Value::Object(mut root) = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? else {
        bail!("config {} must be a JSON object", path.display());
    };
    match root.remove("version").and_then(|v| v.as_u64()) {
        Some(CONFIG_VERSION) => {}
        Some(v) => bail!("config version {v} is not supported (expected {CONFIG_VERSION})"),
        None => bail!("config {} has no integer \"version\" field", path.display()),
    }
    let mut globals = Map::new();
    for k in GLOBAL_KEYS {
        if let Some(v) = root.remove(k) {
            globals.insert(k.to_string(), v);
        }
    }
    Ok((globals, root))
}

impl Cli {
    fn try_parse_from_argv(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
        <Cli as clap::Parser>::try_parse_from(argv)
    }
}

/// The output directory, with every written path checked to stay inside it.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    /// `name` must be relative and free of `..`.
    pub fn resolve(&self, name: &Path) -> anyhow::Result<PathBuf> {
        if name.as_os_str().is_empty() || !name.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
            return Err(invalid(format!(
                "output name {} must be a relative path inside the output directory",
                name.display()
            )));
        }
        Ok(self.root.join(name))
    }

    /// `name` with its extension replaced by `suffix` (e.g. ".csv").
    pub fn sibling(name: &Path, suffix: &str) -> PathBuf {
        let stem = name.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        name.with_file_name(format!("{stem}{suffix}"))
    }

    pub fn write(&self, name: &Path, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.resolve(name)?;
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            // Refuse symlinked directories that lead elsewhere.
            let root = self.root.canonicalize()?;
            if !parent.canonicalize()?.starts_with(&root) {
                return Err(invalid(format!("{} resolves outside the output directory", name.display())));
            }
        }
        if path.symlink_metadata().is_ok_and(|m| m.file_type().is_symlink()) {
            return Err(invalid(format!("{} is a symlink", name.display())));
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
