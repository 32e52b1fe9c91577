//! JSON system configuration files.
//!
//! ```json
//! {
//!   "default_sr": 0.95,
//!   "max_links": 2,
//!   "candidates_per_worker": 3,
//!   "workers": [
//!     { "id": 0, "qubits": 3, "edges": [[0, 1], [1, 2]],
//!       "err_1q": [0.001, 0.001, 0.001],
//!       "err_2q": { "0-1": 0.01, "1-2": 0.012 },
//!       "err_readout": [0.02, 0.03, 0.02] }
//!   ],
//!   "link_sr": [ { "a": [0, 2], "b": [1, 0], "sr": 0.9 } ]
//! }
//! ```
//!
//! `max_links` defaults to 2, `candidates_per_worker` to 3; `link_sr` and a
//! free-form `note` are optional. Loading reports every problem at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use dismap_core::hardware::{PhysQubit, SystemConfig, WorkerSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigLoadError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config:\n{}", Problems(.0))]
    Invalid(Vec<String>),
}

struct Problems<'a>(&'a [String]);

impl fmt::Display for Problems<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    default_sr: Option<f64>,
    max_links: Option<usize>,
    candidates_per_worker: Option<usize>,
    workers: Option<Vec<WorkerFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    link_sr: Option<Vec<LinkSrFile>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkerFile {
    id: Option<usize>,
    qubits: Option<usize>,
    edges: Option<Vec<[usize; 2]>>,
    err_1q: Option<Vec<f64>>,
    err_2q: Option<BTreeMap<String, f64>>,
    err_readout: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSrFile {
    a: [usize; 2],
    b: [usize; 2],
    sr: f64,
}

fn missing(problems: &mut Vec<String>, what: String) {
    problems.push(format!("{what}: missing"));
}

fn parse_edge_key(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once('-')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn load_config(path: &Path) -> Result<SystemConfig, ConfigLoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigLoadError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    let mut problems = Vec::new();

    let default_sr = file.default_sr.unwrap_or_else(|| {
        missing(&mut problems, "default_sr".into());
        1.0
    });
    let raw_workers = file.workers.unwrap_or_else(|| {
        missing(&mut problems, "workers".into());
        Vec::new()
    });
    let mut workers = Vec::with_capacity(raw_workers.len());
    for (i, w) in raw_workers.into_iter().enumerate() {
        let at = |field: &str| format!("workers[{i}].{field}");
        let id = w.id.unwrap_or_else(|| {
            missing(&mut problems, at("id"));
            i
        });
        let Some(n) = w.qubits else {
            missing(&mut problems, at("qubits"));
            continue;
        };
        let edges: Vec<(usize, usize)> = w
            .edges
            .unwrap_or_else(|| {
                missing(&mut problems, at("edges"));
                Vec::new()
            })
            .into_iter()
            .map(|[a, b]| (a, b))
            .collect();
        let mut spec = WorkerSpec::noiseless(id, n, &edges);
        spec.err_2q.clear();
        match w.err_2q {
            None => missing(&mut problems, at("err_2q")),
            Some(map) => {
                for (key, e) in map {
                    match parse_edge_key(&key) {
                        Some((a, b)) => {
                            spec.err_2q.insert((a.min(b), a.max(b)), e);
                        }
                        None => problems.push(format!(
                            "{}: key {key:?} is not of the form \"a-b\"",
                            at("err_2q")
                        )),
                    }
                }
            }
        }
        match w.err_1q {
            None => missing(&mut problems, at("err_1q")),
            Some(v) => spec.err_1q = v,
        }
        match w.err_readout {
            None => missing(&mut problems, at("err_readout")),
            Some(v) => spec.err_readout = v,
        }
        workers.push(spec);
    }

    let mut config = SystemConfig::new(workers, default_sr);
    if let Some(m) = file.max_links {
        config.max_links = m;
    }
    if let Some(k) = file.candidates_per_worker {
        config.candidates_per_worker = k;
    }
    for l in file.link_sr.unwrap_or_default() {
        let a = PhysQubit::new(l.a[0], l.a[1]);
        let b = PhysQubit::new(l.b[0], l.b[1]);
        config.link_sr.insert((a.min(b), a.max(b)), l.sr);
    }
    problems.extend(config.violations().iter().map(|v| v.to_string()));
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(ConfigLoadError::Invalid(problems))
    }
}

/// Serialize a configuration in the format [`parse_config`] reads.
pub fn config_to_json(config: &SystemConfig) -> String {
    let file = ConfigFile {
        note: None,
        default_sr: Some(config.default_sr),
        max_links: Some(config.max_links),
        candidates_per_worker: Some(config.candidates_per_worker),
        workers: Some(
            config
                .workers
                .iter()
                .map(|w| WorkerFile {
                    id: Some(w.id),
                    qubits: Some(w.n_qubits),
                    edges: Some(w.edges.iter().map(|&(a, b)| [a, b]).collect()),
                    err_1q: Some(w.err_1q.clone()),
                    err_2q: Some(
                        w.err_2q
                            .iter()
                            .map(|(&(a, b), &e)| (format!("{a}-{b}"), e))
                            .collect(),
                    ),
                    err_readout: Some(w.err_readout.clone()),
                })
                .collect(),
        ),
        link_sr: (!config.link_sr.is_empty()).then(|| {
            config
                .link_sr
                .iter()
                .map(|(&(a, b), &sr)| LinkSrFile {
                    a: [a.worker, a.qubit],
                    b: [b.worker, b.qubit],
                    sr,
                })
                .collect()
        }),
    };
    serde_json::to_string_pretty(&file).expect("config serializes")
}
