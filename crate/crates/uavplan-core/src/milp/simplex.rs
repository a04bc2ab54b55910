//! Bounded-variable primal simplex with an explicit dense basis inverse.
//!
//! Rows become equalities `a x + s = b` with slack bounds chosen by sense.
//! Phase one drives artificial columns to zero; they are then fixed at zero
//! and phase two optimizes the true objective from the same basis.

use alloc::vec;
use alloc::vec::Vec;

use super::model::{IPModel, Sense};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-11;
const BLAND_AFTER: u32 = 30;
const REFACTOR_EVERY: u32 = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    PivotLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum At {
    Basic,
    Lower,
    Upper,
    Zero,
}

struct Kernel<'a> {
    n: usize,
    m: usize,
    cols: &'a [Vec<(usize, f64)>],
    art_sign: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    at: Vec<At>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    pivots: u64,
    max_pivots: u64,
}

/// Sparse column view of the model's rows.
pub fn columns(model: &IPModel) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); model.variables.len()];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            cols[j].push((i, a));
        }
    }
    cols
}

impl<'a> Kernel<'a> {
    fn col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(i, a) in &self.cols[j] {
                f(i, a);
            }
        } else if j < self.n + self.m {
            f(j - self.n, 1.0);
        } else {
            let i = j - self.n - self.m;
            f(i, self.art_sign[i]);
        }
    }

    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            self.col(j, |i, v| a[i * m + r] = v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        let mut nz_a: Vec<usize> = Vec::with_capacity(m);
        let mut nz_inv: Vec<usize> = Vec::with_capacity(m);
        for c in 0..m {
            let mut p = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..m {
                    a.swap(c * m + k, p * m + k);
                    inv.swap(c * m + k, p * m + k);
                }
            }
            let d = a[c * m + c];
            nz_a.clear();
            nz_inv.clear();
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
                if a[c * m + k] != 0.0 {
                    nz_a.push(k);
                }
                if inv[c * m + k] != 0.0 {
                    nz_inv.push(k);
                }
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for &k in &nz_a {
                    a[r * m + k] -= f * a[c * m + k];
                }
                for &k in &nz_inv {
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        // recompute basic values from nonbasic ones
        let mut rhs = self.b.clone();
        for j in 0..self.at.len() {
            if self.at[j] != At::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.col(j, |i, v| rhs[i] -= v * xj);
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).map(|(p, q)| p * q).sum();
        }
        true
    }

    /// Runs primal simplex iterations for cost vector `c`.
    fn optimize(&mut self, c: &[f64]) -> LpStatus {
        let m = self.m;
        let total = self.at.len();
        let mut degenerate = 0u32;
        let mut bland = false;
        let mut since_refactor = 0u32;
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            if self.pivots >= self.max_pivots {
                return LpStatus::PivotLimit;
            }
            if since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return LpStatus::PivotLimit;
                }
                since_refactor = 0;
            }
            y.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..m {
                let cb = c[self.basis[r]];
                if cb != 0.0 {
                    let row = &self.binv[r * m..(r + 1) * m];
                    for (yk, bk) in y.iter_mut().zip(row) {
                        *yk += cb * bk;
                    }
                }
            }
            // pricing
            let mut enter: Option<(usize, f64)> = None;
            let mut best_score = 0.0;
            for j in 0..total {
                let st = self.at[j];
                if st == At::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let mut d = c[j];
                self.col(j, |i, v| d -= y[i] * v);
                let dir = match st {
                    At::Lower if d < -OPT_TOL => 1.0,
                    At::Upper if d > OPT_TOL => -1.0,
                    At::Zero if d.abs() > OPT_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if d.abs() > best_score {
                    best_score = d.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else {
                return LpStatus::Optimal;
            };
            alpha.iter_mut().for_each(|v| *v = 0.0);
            {
                let binv = &self.binv;
                let mut acc = |i: usize, v: f64| {
                    for r in 0..m {
                        alpha[r] += binv[r * m + i] * v;
                    }
                };
                if q < self.n {
                    for &(i, v) in &self.cols[q] {
                        acc(i, v);
                    }
                } else if q < self.n + m {
                    acc(q - self.n, 1.0);
                } else {
                    let i = q - self.n - m;
                    acc(i, self.art_sign[i]);
                }
            }
            // ratio test
            let mut theta = f64::INFINITY;
            let mut leave: Option<usize> = None;
            let mut leave_piv = 0.0;
            let flip = self.hi[q] - self.lo[q];
            for r in 0..m {
                let a = alpha[r];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let bv = self.basis[r];
                let delta = -dir * a;
                let lim = if delta < 0.0 {
                    if self.lo[bv].is_finite() {
                        ((self.x[bv] - self.lo[bv]) / -delta).max(0.0)
                    } else {
                        continue;
                    }
                } else if self.hi[bv].is_finite() {
                    ((self.hi[bv] - self.x[bv]) / delta).max(0.0)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if lim < theta - 1e-12 {
                            true
                        } else if lim <= theta + 1e-12 {
                            if bland {
                                bv < self.basis[l]
                            } else {
                                a.abs() > leave_piv
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = lim;
                    leave = Some(r);
                    leave_piv = a.abs();
                }
            }
            if flip.is_finite() && flip <= theta {
                // entering variable runs to its opposite bound
                for r in 0..m {
                    if alpha[r] != 0.0 {
                        let bv = self.basis[r];
                        self.x[bv] -= dir * alpha[r] * flip;
                    }
                }
                if dir > 0.0 {
                    self.x[q] = self.hi[q];
                    self.at[q] = At::Upper;
                } else {
                    self.x[q] = self.lo[q];
                    self.at[q] = At::Lower;
                }
                self.pivots += 1;
                if flip > DEGENERATE_STEP {
                    degenerate = 0;
                    bland = false;
                }
                continue;
            }
            let Some(r) = leave else {
                return LpStatus::Unbounded;
            };
            for i in 0..m {
                if alpha[i] != 0.0 {
                    let bv = self.basis[i];
                    self.x[bv] -= dir * alpha[i] * theta;
                }
            }
            self.x[q] += dir * theta;
            let out = self.basis[r];
            let delta_out = -dir * alpha[r];
            if delta_out < 0.0 {
                self.x[out] = self.lo[out];
                self.at[out] = At::Lower;
            } else {
                self.x[out] = self.hi[out];
                self.at[out] = At::Upper;
            }
            self.at[q] = At::Basic;
            self.basis[r] = q;
            // update inverse
            let piv = alpha[r];
            for k in 0..m {
                self.binv[r * m + k] /= piv;
            }
            for i in 0..m {
                if i == r || alpha[i] == 0.0 {
                    continue;
                }
                let f = alpha[i];
                for k in 0..m {
                    let v = self.binv[r * m + k];
                    if v != 0.0 {
                        self.binv[i * m + k] -= f * v;
                    }
                }
            }
            self.pivots += 1;
            since_refactor += 1;
            if theta <= DEGENERATE_STEP {
                degenerate += 1;
                if degenerate > BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }
}

/// Solves the continuous relaxation of `model` with per-variable bounds `lower`/`upper`.
pub fn solve_lp_with_bounds(
    model: &IPModel,
    cols: &[Vec<(usize, f64)>],
    lower: &[f64],
    upper: &[f64],
    max_pivots: u64,
) -> LpResult {
    let n = model.variables.len();
    let m = model.constraints.len();
    let total = n + 2 * m;
    let mut lo = vec![0.0; total];
    let mut hi = vec![0.0; total];
    let mut x = vec![0.0; total];
    let mut at = vec![At::Lower; total];
    for j in 0..n {
        lo[j] = lower[j];
        hi[j] = upper[j];
        if lower[j] > upper[j] {
            return LpResult { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::INFINITY };
        }
        if lo[j].is_finite() {
            x[j] = lo[j];
            at[j] = At::Lower;
        } else if hi[j].is_finite() {
            x[j] = hi[j];
            at[j] = At::Upper;
        } else {
            at[j] = At::Zero;
        }
    }
    let b: Vec<f64> = model.constraints.iter().map(|c| c.rhs).collect();
    let mut resid = b.clone();
    for j in 0..n {
        if x[j] != 0.0 {
            for &(i, a) in &cols[j] {
                resid[i] -= a * x[j];
            }
        }
    }
    let mut art_sign = vec![1.0; m];
    let mut basis = vec![0usize; m];
    let mut binv = vec![0.0; m * m];
    let mut phase1 = vec![0.0; total];
    let mut any_art = false;
    for (i, c) in model.constraints.iter().enumerate() {
        let s = n + i;
        let a = n + m + i;
        let (slo, shi) = match c.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lo[s] = slo;
        hi[s] = shi;
        let r = resid[i];
        if r >= slo && r <= shi {
            x[s] = r;
            at[s] = At::Basic;
            basis[i] = s;
            binv[i * m + i] = 1.0;
            lo[a] = 0.0;
            hi[a] = 0.0;
            at[a] = At::Lower;
        } else {
            x[s] = 0.0;
            at[s] = if c.sense == Sense::Ge { At::Upper } else { At::Lower };
            art_sign[i] = if r >= 0.0 { 1.0 } else { -1.0 };
            lo[a] = 0.0;
            hi[a] = f64::INFINITY;
            x[a] = r.abs();
            at[a] = At::Basic;
            basis[i] = a;
            binv[i * m + i] = art_sign[i];
            phase1[a] = 1.0;
            any_art = true;
        }
    }
    let scale = 1.0 + resid.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut k = Kernel { n, m, cols, art_sign, b, lo, hi, x, at, basis, binv, pivots: 0, max_pivots };
    if any_art {
        match k.optimize(&phase1) {
            LpStatus::Optimal => {}
            LpStatus::PivotLimit => {
                return LpResult { status: LpStatus::PivotLimit, x: Vec::new(), objective: f64::NAN }
            }
            // phase one is bounded below by zero
            LpStatus::Unbounded | LpStatus::Infeasible => unreachable!("phase one cannot be unbounded"),
        }
        let infeas: f64 = (n + m..total).map(|j| k.x[j].max(0.0)).sum();
        if infeas > 1e-7 * scale {
            return LpResult { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::INFINITY };
        }
        for j in n + m..total {
            k.hi[j] = 0.0;
            if k.at[j] != At::Basic {
                k.x[j] = 0.0;
                k.at[j] = At::Lower;
            }
        }
    }
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(&model.objective);
    let status = k.optimize(&cost);
    if status != LpStatus::Optimal {
        return LpResult { status, x: Vec::new(), objective: f64::NAN };
    }
    let mut xs = k.x[..n].to_vec();
    for j in 0..n {
        if (xs[j] - lower[j]).abs() < 1e-9 {
            xs[j] = lower[j];
        } else if (xs[j] - upper[j]).abs() < 1e-9 {
            xs[j] = upper[j];
        }
    }
    let objective = model.objective_value(&xs);
    LpResult { status: LpStatus::Optimal, x: xs, objective }
}
