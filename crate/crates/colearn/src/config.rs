//! Experiment plans: a flat `key = value` config format with sweep axes.
//!
//! The format is line-oriented so plans diff cleanly in experiment logs.
//! Blank lines and lines starting with `#` are skipped. `sweep.<key> =
//! v1,v2,...` turns a scalar key into a sweep axis; the plan expands to the
//! cartesian product of all axes (capped by `sweep_cap`). Each cell derives
//! its seed as a hash of the base seed and the cell index, so cells are
//! decorrelated while the whole sweep stays reproducible.
//!
//! Documented keys and defaults:
//!
//! | key | type | default |
//! |-----|------|---------|
//! | `N` | agents (>= 3) | required |
//! | `K` | arms (>= 2) | required |
//! | `p1`, `p2` | best/second mean | required unless `arm_means_file` |
//! | `arm_fill` | `uniform` \| `equal` | `uniform` |
//! | `arm_means_file` | path | — |
//! | `normalizer` | rating scale | `5` |
//! | `arm_sample_k` | subsample size | — |
//! | `arm_sample_with_replacement` | bool | `false` |
//! | `graph_file` | path | — |
//! | `edge_probability` | ER density | `0.05` |
//! | `mu` | exploration probability | `0.3` |
//! | `h` | budget multiplier | `10` |
//! | `c_ttl` | TTL multiplier | `3` |
//! | `c_slot` | round-length multiplier | `1` |
//! | `tau` | corrupted fraction | `0` |
//! | `adversary_mode` | `per_token` \| `per_agent` | `per_token` |
//! | `max_rounds` | horizon | `200` |
//! | `seed` | base seed | `42` |
//! | `replications` | per cell | `1` |
//! | `init_z1` | initial best-arm adopters | `0` |
//! | `output_dir` | path | `out` |
//! | `sweep_cap` | max cells | `10000` |
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use crate::adversary::AdversaryMode;
use crate::arms::FillRule;
use crate::engine::{ArmSpec, GraphSpec, SimConfig};
use crate::rng;
use crate::{Error, Result};

/// Keys that may appear as sweep axes.
pub const SWEEPABLE_KEYS: &[&str] = &[
    "N",
    "K",
    "p1",
    "p2",
    "mu",
    "h",
    "tau",
    "c_ttl",
    "c_slot",
    "edge_probability",
    "max_rounds",
    "init_z1",
    "replications",
];

/// Raw key assignments (None = key absent, default applies).
#[derive(Debug, Clone, PartialEq, Default)]
struct Raw {
    n: Option<u32>,
    k: Option<u32>,
    p1: Option<f64>,
    p2: Option<f64>,
    arm_fill: Option<FillRule>,
    arm_means_file: Option<String>,
    normalizer: Option<f64>,
    arm_sample_k: Option<u32>,
    arm_sample_with_replacement: Option<bool>,
    graph_file: Option<String>,
    edge_probability: Option<f64>,
    mu: Option<f64>,
    h: Option<u32>,
    c_ttl: Option<f64>,
    c_slot: Option<f64>,
    tau: Option<f64>,
    adversary_mode: Option<AdversaryMode>,
    max_rounds: Option<u32>,
    seed: Option<u64>,
    replications: Option<u32>,
    init_z1: Option<u32>,
    output_dir: Option<String>,
    sweep_cap: Option<usize>,
}

fn config_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("key {key:?}: cannot parse {value:?}")))
}

fn check_unit(key: &str, value: f64, line: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(config_err(
            line,
            format!("key {key:?}: {value} outside [0,1]"),
        ));
    }
    Ok(value)
}

impl Raw {
    /// Applies one `key = value` pair. `allow_override` lifts the duplicate
    /// check when sweep cells overwrite base values.
    fn apply(&mut self, key: &str, value: &str, line: usize, allow_override: bool) -> Result<()> {
        macro_rules! set {
            ($field:ident, $parsed:expr) => {{
                if self.$field.is_some() && !allow_override {
                    return Err(config_err(line, format!("duplicate key {key:?}")));
                }
                self.$field = Some($parsed);
            }};
        }
        match key {
            "N" => set!(n, parse_value(key, value, line)?),
            "K" => set!(k, parse_value(key, value, line)?),
            "p1" => set!(p1, check_unit(key, parse_value(key, value, line)?, line)?),
            "p2" => set!(p2, check_unit(key, parse_value(key, value, line)?, line)?),
            "arm_fill" => set!(
                arm_fill,
                match value {
                    "uniform" => FillRule::Uniform,
                    "equal" => FillRule::Equal,
                    other => {
                        return Err(config_err(
                            line,
                            format!("key \"arm_fill\": expected uniform|equal, got {other:?}"),
                        ))
                    }
                }
            ),
            "arm_means_file" => set!(arm_means_file, value.to_string()),
            "normalizer" => set!(normalizer, parse_value(key, value, line)?),
            "arm_sample_k" => set!(arm_sample_k, parse_value(key, value, line)?),
            "arm_sample_with_replacement" => {
                set!(arm_sample_with_replacement, parse_value(key, value, line)?)
            }
            "graph_file" => set!(graph_file, value.to_string()),
            "edge_probability" => set!(edge_probability, parse_value(key, value, line)?),
            "mu" => set!(mu, check_unit(key, parse_value(key, value, line)?, line)?),
            "h" => set!(h, parse_value(key, value, line)?),
            "c_ttl" => set!(c_ttl, parse_value(key, value, line)?),
            "c_slot" => set!(c_slot, parse_value(key, value, line)?),
            "tau" => set!(tau, check_unit(key, parse_value(key, value, line)?, line)?),
            "adversary_mode" => set!(
                adversary_mode,
                match value {
                    "per_token" => AdversaryMode::PerToken,
                    "per_agent" => AdversaryMode::PerAgent,
                    other => {
                        return Err(config_err(
                            line,
                            format!(
                                "key \"adversary_mode\": expected per_token|per_agent, got {other:?}"
                            ),
                        ))
                    }
                }
            ),
            "max_rounds" => set!(max_rounds, parse_value(key, value, line)?),
            "seed" => set!(seed, parse_value(key, value, line)?),
            "replications" => set!(replications, parse_value(key, value, line)?),
            "init_z1" => set!(init_z1, parse_value(key, value, line)?),
            "output_dir" => set!(output_dir, value.to_string()),
            "sweep_cap" => set!(sweep_cap, parse_value(key, value, line)?),
            other => return Err(config_err(line, format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    fn build(&self, base_dir: &Path) -> Result<SimConfig> {
        let n = self
            .n
            .ok_or_else(|| config_err(0, "missing required key \"N\""))?;
        let k = self
            .k
            .ok_or_else(|| config_err(0, "missing required key \"K\""))?;
        let arms = match (&self.arm_means_file, self.p1, self.p2) {
            (Some(path), None, None) => ArmSpec::File {
                path: base_dir.join(path),
                normalizer: self.normalizer.unwrap_or(5.0),
                sample_k: self.arm_sample_k,
                sample_with_replacement: self.arm_sample_with_replacement.unwrap_or(false),
            },
            (Some(_), _, _) => {
                return Err(config_err(
                    0,
                    "\"arm_means_file\" conflicts with \"p1\"/\"p2\"",
                ))
            }
            (None, Some(p1), Some(p2)) => {
                if self.arm_sample_k.is_some() || self.arm_sample_with_replacement.is_some() {
                    return Err(config_err(
                        0,
                        "\"arm_sample_k\" requires \"arm_means_file\"",
                    ));
                }
                ArmSpec::Sampled {
                    p1,
                    p2,
                    fill: self.arm_fill.unwrap_or_default(),
                }
            }
            _ => {
                return Err(config_err(
                    0,
                    "set both \"p1\" and \"p2\", or \"arm_means_file\"",
                ))
            }
        };
        let graph = match (&self.graph_file, self.edge_probability) {
            (Some(path), None) => GraphSpec::File(base_dir.join(path)),
            (Some(_), Some(_)) => {
                return Err(config_err(
                    0,
                    "\"graph_file\" conflicts with \"edge_probability\"",
                ))
            }
            (None, p) => GraphSpec::Random {
                edge_probability: p.unwrap_or(0.05),
            },
        };
        Ok(SimConfig {
            n,
            k,
            graph,
            arms,
            mu: self.mu.unwrap_or(0.3),
            h: self.h.unwrap_or(10),
            c_ttl: self.c_ttl.unwrap_or(3.0),
            c_slot: self.c_slot.unwrap_or(1.0),
            tau: self.tau.unwrap_or(0.0),
            adversary_mode: self.adversary_mode.unwrap_or_default(),
            max_rounds: self.max_rounds.unwrap_or(200),
            seed: self.seed.unwrap_or(42),
            replications: self.replications.unwrap_or(1),
            init_z1: self.init_z1.unwrap_or(0),
        })
    }

    /// Explicitly-set keys in canonical order, as `key = value` lines.
    fn serialize(&self, out: &mut String) {
        use std::fmt::Write;
        macro_rules! emit {
            ($key:literal, $field:ident) => {
                if let Some(v) = &self.$field {
                    writeln!(out, "{} = {}", $key, v).expect("string write");
                }
            };
            ($key:literal, $field:ident, $fmt:expr) => {
                if let Some(v) = &self.$field {
                    writeln!(out, "{} = {}", $key, $fmt(v)).expect("string write");
                }
            };
        }
        emit!("N", n);
        emit!("K", k);
        emit!("p1", p1);
        emit!("p2", p2);
        emit!("arm_fill", arm_fill, |v: &FillRule| match v {
            FillRule::Uniform => "uniform",
            FillRule::Equal => "equal",
        });
        emit!("arm_means_file", arm_means_file);
        emit!("normalizer", normalizer);
        emit!("arm_sample_k", arm_sample_k);
        emit!("arm_sample_with_replacement", arm_sample_with_replacement);
        emit!("graph_file", graph_file);
        emit!("edge_probability", edge_probability);
        emit!("mu", mu);
        emit!("h", h);
        emit!("c_ttl", c_ttl);
        emit!("c_slot", c_slot);
        emit!("tau", tau);
        emit!("adversary_mode", adversary_mode, |v: &AdversaryMode| match v {
            AdversaryMode::PerToken => "per_token",
            AdversaryMode::PerAgent => "per_agent",
        });
        emit!("max_rounds", max_rounds);
        emit!("seed", seed);
        emit!("replications", replications);
        emit!("init_z1", init_z1);
        emit!("output_dir", output_dir);
        emit!("sweep_cap", sweep_cap);
    }
}

/// One expanded sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    /// `(key, value)` pairs this cell overrides, axis order.
    pub overrides: Vec<(String, String)>,
    /// Complete config with the cell seed already applied.
    pub config: SimConfig,
}

/// A validated experiment plan: base config, sweep axes, output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    raw: Raw,
    /// `(key, values)` in declaration order; first axis is outermost.
    sweeps: Vec<(String, Vec<String>)>,
    base_dir: PathBuf,
}

impl ExperimentPlan {
    /// Parses and fully validates a plan file.
    pub fn load(path: &Path) -> Result<ExperimentPlan> {
        let text = std::fs::read_to_string(path)?;
        let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        ExperimentPlan::parse_str(&text, &base_dir)
    }

    /// Parses plan text; relative paths resolve against `base_dir`.
    pub fn parse_str(text: &str, base_dir: &Path) -> Result<ExperimentPlan> {
        let mut raw = Raw::default();
        let mut sweeps: Vec<(String, Vec<String>)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(lineno, format!("expected \"key = value\", got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(swept) = key.strip_prefix("sweep.") {
                if !SWEEPABLE_KEYS.contains(&swept) {
                    return Err(config_err(
                        lineno,
                        format!("key {swept:?} cannot be swept"),
                    ));
                }
                if sweeps.iter().any(|(k, _)| k == swept) {
                    return Err(config_err(lineno, format!("duplicate sweep axis {swept:?}")));
                }
                let values: Vec<String> =
                    value.split(',').map(|v| v.trim().to_string()).collect();
                if values.is_empty() || values.iter().any(String::is_empty) {
                    return Err(config_err(lineno, format!("empty value in sweep {swept:?}")));
                }
                // validate each value by test-applying it
                for v in &values {
                    raw.clone().apply(swept, v, lineno, true)?;
                }
                sweeps.push((swept.to_string(), values));
            } else {
                raw.apply(key, value, lineno, false)?;
            }
        }
        let plan = ExperimentPlan {
            raw,
            sweeps,
            base_dir: base_dir.to_path_buf(),
        };
        // fail-fast: every cell must build
        plan.cells()?;
        Ok(plan)
    }

    /// Base config before sweep overrides (seed not yet cell-hashed).
    pub fn base_config(&self) -> Result<SimConfig> {
        self.raw.build(&self.base_dir)
    }

    /// Output directory (resolved).
    pub fn output_dir(&self) -> PathBuf {
        self.base_dir
            .join(self.raw.output_dir.as_deref().unwrap_or("out"))
    }

    pub fn sweep_cap(&self) -> usize {
        self.raw.sweep_cap.unwrap_or(10_000)
    }

    pub fn sweeps(&self) -> &[(String, Vec<String>)] {
        &self.sweeps
    }

    /// Expands the cartesian product of the sweep axes. Every cell's seed is
    /// `rng::cell_seed(base seed, cell index)`.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let total: usize = self.sweeps.iter().map(|(_, v)| v.len()).product();
        if total > self.sweep_cap() {
            return Err(config_err(
                0,
                format!("sweep expands to {total} cells, above the cap {}", self.sweep_cap()),
            ));
        }
        let base_seed = self.raw.seed.unwrap_or(42);
        let mut cells = Vec::with_capacity(total);
        for index in 0..total {
            let mut remainder = index;
            let mut overrides = Vec::with_capacity(self.sweeps.len());
            // first axis outermost
            let mut stride = total;
            for (key, values) in &self.sweeps {
                stride /= values.len();
                let pick = remainder / stride;
                remainder %= stride;
                overrides.push((key.clone(), values[pick].clone()));
            }
            let mut raw = self.raw.clone();
            for (key, value) in &overrides {
                raw.apply(key, value, 0, true)?;
            }
            let mut config = raw.build(&self.base_dir)?;
            config.seed = rng::cell_seed(base_seed, index as u64);
            cells.push(Cell {
                index,
                overrides,
                config,
            });
        }
        Ok(cells)
    }

    /// Canonical `key = value` text that parses back to an identical plan.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        self.raw.serialize(&mut out);
        for (key, values) in &self.sweeps {
            out.push_str(&format!("sweep.{key} = {}\n", values.join(",")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentPlan> {
        ExperimentPlan::parse_str(text, Path::new("."))
    }

    #[test]
    fn minimal_config_applies_documented_defaults() {
        let plan = parse("N = 100\nK = 5\np1 = 0.8\np2 = 0.6\n").unwrap();
        let cfg = plan.base_config().unwrap();
        assert_eq!(cfg.mu, 0.3);
        assert_eq!(cfg.h, 10);
        assert_eq!(cfg.c_ttl, 3.0);
        assert_eq!(cfg.c_slot, 1.0);
        assert_eq!(cfg.tau, 0.0);
        assert_eq!(cfg.max_rounds, 200);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.replications, 1);
        assert_eq!(cfg.init_z1, 0);
        assert_eq!(
            cfg.graph,
            GraphSpec::Random { edge_probability: 0.05 }
        );
        assert_eq!(plan.output_dir(), PathBuf::from("./out"));
        assert_eq!(plan.sweep_cap(), 10_000);
    }

    #[test]
    fn out_of_range_values_name_the_key_and_line() {
        let err = parse("N = 100\nK = 5\np1 = 0.8\np2 = 0.6\nmu = 1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mu") && msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(parse("N = 100\nbogus = 2\n").unwrap_err().to_string().contains("bogus"));
        assert!(parse("N = 100\nN = 100\n")
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert!(parse("N ~ 100\n").is_err());
        assert!(parse("K = 5\np1 = 0.8\np2 = 0.6\n")
            .unwrap_err()
            .to_string()
            .contains("\"N\""));
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let err = parse("N = many\nK = 5\np1 = 0.8\np2 = 0.6\n").unwrap_err();
        assert!(err.to_string().contains("cannot parse"));
    }

    #[test]
    fn sweep_expansion_matches_the_synthetic_grid() {
        let plan = parse(
            "N = 2000\nK = 100\np1 = 0.8\np2 = 0.7\nsweep.p2 = 0.6,0.5,0.4\n",
        )
        .unwrap();
        let cells = plan.cells().unwrap();
        assert_eq!(cells.len(), 3);
        for (cell, expect) in cells.iter().zip([0.6, 0.5, 0.4]) {
            match cell.config.arms {
                ArmSpec::Sampled { p2, .. } => assert_eq!(p2, expect),
                _ => panic!("expected sampled arms"),
            }
            assert_eq!(cell.overrides.len(), 1);
        }
        assert_ne!(cells[0].config.seed, cells[1].config.seed);
    }

    #[test]
    fn full_grid_expands_in_declaration_order() {
        let plan = parse(
            "N = 9\nK = 3\np1 = 0.8\np2 = 0.6\n\
             sweep.N = 20,40,60\nsweep.K = 100,200,300\nsweep.p2 = 0.6,0.5,0.4\n",
        )
        .unwrap();
        let cells = plan.cells().unwrap();
        assert_eq!(cells.len(), 27);
        assert_eq!(cells[0].overrides[0], ("N".into(), "20".into()));
        assert_eq!(cells[0].overrides[2], ("p2".into(), "0.6".into()));
        assert_eq!(cells[1].overrides[2], ("p2".into(), "0.5".into()));
        assert_eq!(cells[26].overrides[0], ("N".into(), "60".into()));
    }

    #[test]
    fn sweep_cap_is_enforced() {
        let err = parse(
            "N = 9\nK = 3\np1 = 0.8\np2 = 0.6\nsweep_cap = 2\nsweep.p2 = 0.6,0.5,0.4\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("cap"));
    }

    #[test]
    fn unsweepable_and_invalid_sweep_values_fail_fast() {
        assert!(parse("N = 9\nK = 3\np1 = 0.8\np2 = 0.6\nsweep.output_dir = a,b\n").is_err());
        assert!(parse("N = 9\nK = 3\np1 = 0.8\np2 = 0.6\nsweep.mu = 0.2,1.7\n").is_err());
    }

    #[test]
    fn mutually_exclusive_sources_are_rejected() {
        assert!(parse("N = 9\nK = 3\np1 = 0.8\np2 = 0.6\narm_means_file = x.csv\n").is_err());
        assert!(
            parse("N = 9\nK = 3\np1 = 0.8\np2 = 0.6\ngraph_file = g.txt\nedge_probability = 0.1\n")
                .is_err()
        );
        assert!(parse("N = 9\nK = 3\np1 = 0.8\np2 = 0.6\narm_sample_k = 2\n").is_err());
    }

    #[test]
    fn config_round_trips_through_serialization() {
        let text = "N = 2000\nK = 100\np1 = 0.8\np2 = 0.7\nmu = 0.25\ntau = 0.05\n\
                    adversary_mode = per_agent\nseed = 9\nreplications = 4\n\
                    output_dir = results\nsweep.p2 = 0.6,0.5,0.4\nsweep.K = 100,200\n";
        let plan = parse(text).unwrap();
        let reparsed = parse(&plan.to_config_string()).unwrap();
        assert_eq!(plan, reparsed);
        assert_eq!(plan.to_config_string(), reparsed.to_config_string());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored()  {
        let plan = parse("# a plan\n\nN = 10\nK = 2\n# mid comment\np1 = 0.9\np2 = 0.1\n").unwrap();
        assert_eq!(plan.base_config().unwrap().n, 10);
    }
}
