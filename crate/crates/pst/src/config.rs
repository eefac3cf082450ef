//! TOML network files.
//!
//! ```toml
//! [sites]
//! Ca = 1408.0     # chemical shift offset, Hz
//! Cb = 0.0
//!
//! [couplings]
//! "Ca-Cb" = 35.0  # scalar coupling, Hz
//! ```
//!
//! Sites are numbered in file order. See `docs/network-format.md` for the
//! full grammar.

use std::fmt::Write as _;
use std::path::Path;

use pst_core::SpinNetwork;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Network(#[from] pst_core::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Characters a site label may contain.
pub fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '.'))
}

fn number(v: &Value, what: &str) -> Result<f64, ConfigError> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        other => return Err(invalid(format!("{what}: expected a number, found {}", other.type_str()))),
    };
    if !x.is_finite() {
        return Err(invalid(format!("{what}: value must be finite")));
    }
    Ok(x)
}

fn section<'a>(doc: &'a Table, name: &str) -> Result<Option<&'a Table>, ConfigError> {
    match doc.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(invalid(format!("`{name}` must be a table"))),
    }
}

/// Parses a network file.
pub fn parse_network(text: &str) -> Result<SpinNetwork, ConfigError> {
    let doc: Table = text.parse()?;
    for key in doc.keys() {
        if key != "sites" && key != "couplings" {
            return Err(invalid(format!("unknown section `{key}`")));
        }
    }
    let sites = section(&doc, "sites")?.ok_or_else(|| invalid("missing [sites] table"))?;
    let mut labels = Vec::with_capacity(sites.len());
    let mut shifts = Vec::with_capacity(sites.len());
    for (label, v) in sites {
        if !valid_label(label) {
            return Err(invalid(format!(
                "site label `{label}`: use letters, digits, `_`, `'` or `.`"
            )));
        }
        shifts.push(number(v, &format!("site `{label}`"))?);
        labels.push(label.clone());
    }

    let mut couplings = Vec::new();
    if let Some(table) = section(&doc, "couplings")? {
        for (key, v) in table {
            let (a, b) = key
                .split_once('-')
                .ok_or_else(|| invalid(format!("coupling `{key}`: expected \"A-B\"")))?;
            let find = |l: &str| {
                labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| invalid(format!("coupling `{key}`: unknown site `{l}`")))
            };
            let (i, j) = (find(a.trim())?, find(b.trim())?);
            couplings.push((i, j, number(v, &format!("coupling `{key}`"))?));
        }
    }
    Ok(SpinNetwork::from_hz(labels, &shifts, couplings)?)
}

pub fn load_network(path: &Path) -> Result<SpinNetwork, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_network(&text).map_err(|e| match e {
        ConfigError::Io { .. } => e,
        other => invalid(format!("{}: {other}", path.display())),
    })
}

/// Writes `net` back in the file format. Floats use the shortest
/// round-tripping representation.
pub fn network_to_toml(net: &SpinNetwork) -> String {
    let mut out = String::from("[sites]\n");
    for i in 0..net.len() {
        let _ = writeln!(out, "{} = {:?}", net.label(i), net.shift_hz(i));
    }
    if net.coupling_count() > 0 {
        out.push_str("\n[couplings]\n");
        for ((i, j), _) in net.couplings() {
            let hz = net.coupling_hz(i, j).unwrap_or_default();
            let _ = writeln!(out, "\"{}-{}\" = {:?}", net.label(i), net.label(j), hz);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PAIR: &str = "[sites]\nA = 0.0\nB = 1000\n\n[couplings]\n\"A-B\" = 50.0\n";

    #[test]
    fn parses_in_file_order() {
        let net = parse_network("[sites]\nZ = 1.0\nA = 2.0\n").unwrap();
        assert_eq!(net.labels(), ["Z", "A"]);
        assert_eq!(net.coupling_count(), 0);
        let net = parse_network(PAIR).unwrap();
        assert!((net.coupling_hz(0, 1).unwrap() - 50.0).abs() < 1e-12);
        assert!((net.shift_hz(1) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_network("[sites]\nA = 0.0\nB = = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_bad_content() {
        let cases = [
            ("[couplings]\n\"A-B\" = 1.0\n", "missing [sites]"),
            ("[sites]\nA = 0.0\nB = 1.0\n[couplings]\n\"A-C\" = 1.0\n", "unknown site `C`"),
            ("[sites]\nA = 0.0\nB = 1.0\n[couplings]\n\"A-A\" = 1.0\n", "A"),
            ("[sites]\nA = 0.0\nB = 1.0\n[couplings]\n\"A-B\" = 1.0\n\"B-A\" = 2.0\n", "A"),
            ("[sites]\nA = 0.0\nB = \"x\"\n", "expected a number"),
            ("[sites]\nA = 0.0\nB = nan\n", "finite"),
            ("[sites]\nA = 0.0\nB = 1.0\n[couplings]\nAB = 1.0\n", "\"A-B\""),
            ("[sites]\nA = 0.0\n", ""),
            ("[sites]\nA = 0.0\nB = 1.0\n[extra]\n", "unknown section"),
            ("[sites]\n\"A,B\" = 0.0\nC = 1.0\n", "label"),
        ];
        for (text, needle) in cases {
            let err = parse_network(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?}: {err}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_network(Path::new("/nonexistent/net.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }

    proptest! {
        #[test]
        fn round_trip(
            shifts in proptest::collection::vec(-2.0e4f64..2.0e4, 2..7),
            seed in proptest::collection::vec(0.0f64..100.0, 21),
        ) {
            let n = shifts.len();
            let mut text = String::from("[sites]\n");
            for (k, s) in shifts.iter().enumerate() {
                text.push_str(&format!("S{k} = {s:?}\n"));
            }
            text.push_str("[couplings]\n");
            let mut c = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if seed[c] > 40.0 {
                        text.push_str(&format!("\"S{i}-S{j}\" = {:?}\n", seed[c]));
                    }
                    c += 1;
                }
            }
            let net = parse_network(&text).unwrap();
            let again = parse_network(&network_to_toml(&net)).unwrap();
            prop_assert_eq!(net.labels(), again.labels());
            let close = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0);
            for i in 0..n {
                prop_assert!(close(net.shift(i), again.shift(i)));
            }
            let c1: Vec<_> = net.couplings().collect();
            let c2: Vec<_> = again.couplings().collect();
            prop_assert_eq!(c1.len(), c2.len());
            for ((p, x), (q, y)) in c1.into_iter().zip(c2) {
                prop_assert_eq!(p, q);
                prop_assert!(close(x, y));
            }
        }
    }
}
