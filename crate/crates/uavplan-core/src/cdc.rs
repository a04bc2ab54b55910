//! PolyDot slicing arithmetic: recovery threshold and per-copy symbol counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A slicing choice `(m, s, t)` with `s * t = m` and its recovery threshold `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSplit {
    pub m: u32,
    pub s: u32,
    pub t: u32,
    pub k: u32,
}

impl CodeSplit {
    pub fn new(s: u32, t: u32) -> Result<Self> {
        let k = recovery_threshold(s, t)?;
        let m = s
            .checked_mul(t)
            .ok_or_else(|| Error::InvalidArgument("s*t overflows".into()))?;
        Ok(Self { m, s, t, k })
    }

    /// Split with `m` fixed and `s` given; `s` must divide `m`.
    pub fn with_storage(m: u32, s: u32) -> Result<Self> {
        if m == 0 || s == 0 || m % s != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "s={s} does not divide m={m}"
            )));
        }
        Self::new(s, m / s)
    }

    pub fn validate(&self) -> Result<()> {
        let fresh = Self::new(self.s, self.t)?;
        if fresh != *self {
            return Err(Error::InvalidArgument(alloc::format!(
                "inconsistent split {self:?}: expected m={} k={}",
                fresh.m,
                fresh.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitObjective {
    MaxK,
    MinK,
}

/// `k = t^2 (2s - 1)`.
pub fn recovery_threshold(s: u32, t: u32) -> Result<u32> {
    if s == 0 || t == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "recovery threshold needs s,t >= 1 (got s={s}, t={t})"
        )));
    }
    let k = (t as u64) * (t as u64) * (2 * s as u64 - 1);
    u32::try_from(k).map_err(|_| Error::InvalidArgument("recovery threshold overflows u32".into()))
}

/// Best divisor pair of `m` under `objective`; ties go to the smaller `t`.
pub fn optimal_split(m: u32, objective: SplitObjective) -> Result<CodeSplit> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mut best: Option<CodeSplit> = None;
    for t in 1..=m {
        if m % t != 0 {
            continue;
        }
        let cand = CodeSplit::new(m / t, t)?;
        let better = match best {
            None => true,
            Some(b) => match objective {
                SplitObjective::MaxK => cand.k > b.k,
                SplitObjective::MinK => cand.k < b.k,
            },
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("t = 1 always divides m"))
}

/// Symbol counts for one task of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCounts {
    pub d_enc: f64,
    pub d_dec: f64,
    pub d_comm_to: f64,
    pub d_cmp: f64,
    pub d_comm_fr: f64,
}

/// Decoding work in symbols: `N^2 k (log2 k)^2`.
pub fn decode_symbols(n: u32, split: &CodeSplit) -> f64 {
    let n2 = (n as f64) * (n as f64);
    let k = split.k as f64;
    let lg = libm::log2(k);
    n2 * k * lg * lg
}

pub fn symbol_counts(n: u32, split: &CodeSplit, n_local: u32, n_offload: u32) -> Result<SymbolCounts> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be >= 1".into()));
    }
    split.validate()?;
    let nf = n as f64;
    let n2 = nf * nf;
    let (m, t) = (split.m as f64, split.t as f64);
    Ok(SymbolCounts {
        d_enc: n2 * (n_local as f64 + n_offload as f64),
        d_dec: decode_symbols(n, split),
        d_comm_to: n2 / m,
        d_cmp: n2 * nf / (m * t),
        d_comm_fr: n2 / (t * t),
    })
}
