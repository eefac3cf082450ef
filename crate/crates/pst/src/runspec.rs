//! Recipe files: a network path plus one command table.
//!
//! ```toml
//! network = "../networks/leucine.toml"   # relative to this file
//!
//! [simulate]
//! pair = "Ca,Cb"
//! tau-mix = 3.0e-4
//! cycles = 99
//! ```
//!
//! Command tables take the same keys as the command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cli::Command;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunSpec {
    pub network: PathBuf,
    #[serde(default)]
    pub dump_operator: Option<PathBuf>,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, thiserror::Error)]
pub enum RunSpecError {
    #[error("cannot read recipe {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("recipe {path}: {source}")]
    Syntax {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("recipe {0}: `run` cannot be nested")]
    Nested(String),
}

pub fn parse_runspec(text: &str) -> Result<RunSpec, toml::de::Error> {
    toml::from_str(text)
}

/// Reads a recipe and resolves its network path against the recipe's
/// directory.
pub fn load_runspec(path: &Path) -> Result<RunSpec, RunSpecError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| RunSpecError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut spec = parse_runspec(&text).map_err(|source| RunSpecError::Syntax {
        path: shown.clone(),
        source,
    })?;
    if matches!(spec.command, Command::Run(_)) {
        return Err(RunSpecError::Nested(shown));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    if spec.network.is_relative() {
        spec.network = base.join(&spec.network);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_command_table() {
        let spec = parse_runspec(
            "network = \"n.toml\"\n[simulate]\npair = \"A,B\"\ntau-mix = 3e-4\ncycles = 5\n",
        )
        .unwrap();
        match spec.command {
            Command::Simulate(a) => {
                assert_eq!(a.pair, "A,B");
                assert_eq!(a.tau_mix, Some(3e-4));
                assert_eq!(a.cycles, Some(5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_commands() {
        assert!(parse_runspec("network = \"n\"\n[simulate]\npair = \"A,B\"\nbogus = 1\n").is_err());
        assert!(parse_runspec("network = \"n\"\n[explode]\n").is_err());
        assert!(parse_runspec("[baseline]\nstart = \"A\"\nduration = 1.0\n").is_err());
    }

    #[test]
    fn network_resolves_against_recipe() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.toml");
        std::fs::write(&p, "network = \"nets/a.toml\"\n[baseline]\nstart = \"A\"\nduration = 0.0\n").unwrap();
        let spec = load_runspec(&p).unwrap();
        assert_eq!(spec.network, dir.path().join("nets/a.toml"));
    }
}
