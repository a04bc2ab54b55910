//! Scenario sets for weather, demand and per-stage shortfall, plus model sizing.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherScenario {
    /// 1 = strong wind at the station.
    pub g: Vec<u8>,
    #[serde(rename = "p")]
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandScenario {
    /// Square matrix dimension per station.
    pub d: Vec<u32>,
    #[serde(rename = "p")]
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortfallScenario {
    pub f: Vec<u8>,
    /// Copies missing per station when the flag is set.
    #[serde(rename = "a")]
    pub magnitude: Vec<u32>,
    #[serde(rename = "p")]
    pub probability: f64,
}

/// Weather set (phase 1), demand set (stage 2) and shortfall sets for stages 3..z.
///
/// Paths are the Cartesian product of the stage sets. A stage-`j` prefix is
/// encoded in mixed radix: `((d * w3 + i3) * w4 + i4) ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub weather: Vec<WeatherScenario>,
    pub demand: Vec<DemandScenario>,
    #[serde(default)]
    pub shortfall: Vec<Vec<ShortfallScenario>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl ScenarioTree {
    /// Number of stages `z` (stage 1 is the subscription stage).
    pub fn stages(&self) -> usize {
        self.shortfall.len() + 2
    }

    /// Number of distinct prefixes ending at `stage` (>= 2).
    pub fn prefix_count(&self, stage: usize) -> usize {
        assert!(stage >= 2 && stage <= self.stages());
        let mut n = self.demand.len();
        for set in &self.shortfall[..stage - 2] {
            n *= set.len();
        }
        n
    }

    /// Prefix id at `stage - 1` of a prefix at `stage` (>= 3).
    pub fn parent(&self, stage: usize, id: usize) -> usize {
        id / self.shortfall[stage - 3].len()
    }

    /// Branch index chosen at `stage` (>= 3) by the prefix.
    pub fn branch(&self, stage: usize, id: usize) -> usize {
        id % self.shortfall[stage - 3].len()
    }

    /// Prefix id at stage `at` (2 <= at <= stage) that is an ancestor of `id`.
    pub fn ancestor(&self, stage: usize, id: usize, at: usize) -> usize {
        let mut cur = id;
        let mut s = stage;
        while s > at {
            cur = self.parent(s, cur);
            s -= 1;
        }
        cur
    }

    pub fn demand_index(&self, stage: usize, id: usize) -> usize {
        self.ancestor(stage, id, 2)
    }

    pub fn prefix_probability(&self, stage: usize, id: usize) -> f64 {
        let mut p = 1.0;
        let mut cur = id;
        let mut s = stage;
        while s > 2 {
            p *= self.shortfall[s - 3][self.branch(s, cur)].probability;
            cur = self.parent(s, cur);
            s -= 1;
        }
        p * self.demand[cur].probability
    }

    /// Shortfall flag at `stage` after chaining: zero once any earlier stage had no shortfall.
    pub fn effective_flag(&self, stage: usize, id: usize, station: usize) -> u8 {
        let mut cur = id;
        let mut s = stage;
        let mut flag = 1u8;
        while s > 2 {
            let sc = &self.shortfall[s - 3][self.branch(s, cur)];
            flag &= sc.f[station];
            cur = self.parent(s, cur);
            s -= 1;
        }
        flag
    }

    /// Magnitude at `stage` when the chained flag is set, else zero.
    pub fn effective_magnitude(&self, stage: usize, id: usize, station: usize) -> u32 {
        if self.effective_flag(stage, id, station) == 0 {
            return 0;
        }
        self.shortfall[stage - 3][self.branch(stage, id)].magnitude[station]
    }

    pub fn max_magnitude(&self) -> u32 {
        self.shortfall
            .iter()
            .flatten()
            .flat_map(|s| s.magnitude.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn station_count(&self) -> Option<usize> {
        self.demand.first().map(|d| d.d.len())
    }
}

fn check_probs<I: Iterator<Item = f64>>(path: &str, probs: I, out: &mut Vec<Violation>) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, p) in probs.enumerate() {
        n += 1;
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            out.push(Violation {
                path: format!("{path}[{i}].p"),
                message: format!("probability {p} outside [0,1]"),
            });
        }
        sum += p;
    }
    if n == 0 {
        out.push(Violation { path: path.into(), message: "empty scenario set".into() });
    } else if (sum - 1.0).abs() > PROB_TOL {
        out.push(Violation { path: path.into(), message: format!("sums to {}", libm::round(sum * 1e9) / 1e9) });
    }
}

/// Every violated invariant, each tagged with where it occurs. Empty means valid.
pub fn validate_tree(tree: &ScenarioTree, stations: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    check_probs("weather", tree.weather.iter().map(|w| w.probability), &mut out);
    for (i, w) in tree.weather.iter().enumerate() {
        if w.g.len() != stations {
            out.push(Violation {
                path: format!("weather[{i}].g"),
                message: format!("has {} entries, expected {stations}", w.g.len()),
            });
        }
        if let Some(j) = w.g.iter().position(|&v| v > 1) {
            out.push(Violation { path: format!("weather[{i}].g[{j}]"), message: "flag must be 0 or 1".into() });
        }
    }
    check_probs("demand", tree.demand.iter().map(|d| d.probability), &mut out);
    for (i, d) in tree.demand.iter().enumerate() {
        if d.d.len() != stations {
            out.push(Violation {
                path: format!("demand[{i}].d"),
                message: format!("has {} entries, expected {stations}", d.d.len()),
            });
        }
        if let Some(j) = d.d.iter().position(|&v| v == 0) {
            out.push(Violation { path: format!("demand[{i}].d[{j}]"), message: "dimension must be > 0".into() });
        }
    }
    for (st, set) in tree.shortfall.iter().enumerate() {
        let base = format!("shortfall[{st}]");
        check_probs(&base, set.iter().map(|s| s.probability), &mut out);
        for (i, s) in set.iter().enumerate() {
            if s.f.len() != stations || s.magnitude.len() != stations {
                out.push(Violation {
                    path: format!("{base}[{i}]"),
                    message: format!(
                        "f/a have {}/{} entries, expected {stations}",
                        s.f.len(),
                        s.magnitude.len()
                    ),
                });
                continue;
            }
            for y in 0..stations {
                if s.f[y] > 1 {
                    out.push(Violation { path: format!("{base}[{i}].f[{y}]"), message: "flag must be 0 or 1".into() });
                }
                if s.f[y] == 0 && s.magnitude[y] != 0 {
                    out.push(Violation {
                        path: format!("{base}[{i}].a[{y}]"),
                        message: format!("magnitude {} with flag 0", s.magnitude[y]),
                    });
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    // chained flags along every full path must never re-open after closing
    let z = tree.stages();
    if z >= 4 {
        for id in 0..tree.prefix_count(z) {
            for y in 0..stations {
                let mut prev = 1;
                for stage in 3..=z {
                    let cur = tree.effective_flag(stage, tree.ancestor(z, id, stage), y);
                    if prev == 0 && cur == 1 {
                        out.push(Violation {
                            path: format!("path[{id}] station {y} stage {stage}"),
                            message: "shortfall after a shortfall-free stage".into(),
                        });
                    }
                    prev = cur;
                }
            }
        }
    }
    out
}

/// Empirical distribution of square task dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandHistogram {
    pub values: Vec<u32>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub probabilities: Vec<f64>,
}

pub fn demand_hist(rows: &[(u32, u32)]) -> Result<DemandHistogram> {
    let mut dims = Vec::with_capacity(rows.len());
    for (i, &(r, c)) in rows.iter().enumerate() {
        if r != c {
            return Err(Error::InvalidArgument(format!("record {}: non-square matrix {r}x{c}", i + 1)));
        }
        if r == 0 {
            return Err(Error::InvalidArgument(format!("record {}: zero dimension", i + 1)));
        }
        dims.push(r);
    }
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no demand records".into()));
    }
    dims.sort_unstable();
    let mut values = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for d in dims {
        if values.last() == Some(&d) {
            *counts.last_mut().unwrap() += 1;
        } else {
            values.push(d);
            counts.push(1);
        }
    }
    let total: u64 = counts.iter().sum();
    let probabilities = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(DemandHistogram { values, counts, total, probabilities })
}

/// `(variables, constraints)` of the reservation model, one domain row per variable.
pub fn model_size_phase1(slots: u64, stations: u64, types: u64, weather: u64) -> (u64, u64) {
    let vars = slots * stations * types + weather * slots * stations;
    let cons = slots * stations + 2 * weather * slots * stations + slots * stations * types;
    (vars, cons)
}

/// Shape of a task-allocation model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase2Shape {
    pub slots: u64,
    pub base_stations: u64,
    pub stations: u64,
    pub demand: u64,
    /// Scenario count per shortfall stage 3..z.
    pub shortfall: Vec<u64>,
    pub gate_stage2_threshold: bool,
    pub threshold_per_bs: bool,
}

impl Phase2Shape {
    fn prefixes(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.shortfall.len());
        let mut p = self.demand;
        for &w in &self.shortfall {
            p *= w;
            out.push(p);
        }
        out
    }
}

/// Exact `(variables, constraints)` of the extensive-form model the builder emits.
pub fn model_size_phase2(shape: &Phase2Shape) -> (u64, u64) {
    let (f, y, lam) = (shape.base_stations, shape.stations, shape.demand);
    let g = shape.gate_stage2_threshold as u64;
    let recovery_rows = if shape.threshold_per_bs { y * f } else { y };
    let mut vars = f + lam * (y + y * f + g * y * f);
    let mut lin = lam * (2 * f + recovery_rows + g * y * f);
    for p in shape.prefixes() {
        vars += p * (y + 2 * y * f);
        lin += p * (2 * f + y * f + 2 * y);
    }
    let vars = shape.slots * vars;
    (vars, shape.slots * lin + vars)
}

/// Subscription and offload variable count with each later stage indexed by its own set only.
pub fn compact_offload_count(shape: &Phase2Shape) -> u64 {
    let (t, f, y) = (shape.slots, shape.base_stations, shape.stations);
    t * f + t * shape.demand * y * f + shape.shortfall.iter().map(|w| t * w * y * f).sum::<u64>()
}
