//! Primal-dual interior method for smooth convex programs `min c.x` subject
//! to `s_i(x) > 0`, whose Hessian is banded in a "head" block of variables,
//! plus a few dense "tail" variables and a handful of rank-one couplings
//! across the head.
//!
//! Iterates stay strictly feasible in `x`; multipliers follow Mehrotra's
//! centering rule and steps are safeguarded by the log-barrier merit. The
//! Newton system is solved by a banded Cholesky factorization, the Woodbury
//! identity for the rank-one terms, and a Schur complement for the tail, so
//! the cost per step is linear in the number of slots.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Tuning of the interior method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSettings {
    /// Target complementarity gap relative to `max(1, |objective|)`.
    pub gap_tol: f64,
    /// Target relative Lagrangian stationarity.
    pub stationarity_tol: f64,
    /// Newton step cap over the whole solve.
    pub max_newton: usize,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        BarrierSettings {
            gap_tol: 1e-7,
            stationarity_tol: 1e-7,
            max_newton: 500,
        }
    }
}

/// A convex program `min c.x` over the interior of `{s_i(x) > 0}`, with the
/// barrier `-sum ln s_i(x)`.
pub(crate) trait BarrierProblem {
    fn dim(&self) -> usize;
    /// Variables `[0, head)` form the banded block; the rest are tail.
    fn head(&self) -> usize;
    fn bandwidth(&self) -> usize;
    fn cost(&self) -> &[f64];
    /// Writes every slack; returns false when any is not strictly positive.
    fn slacks(&self, x: &[f64], out: &mut Vec<f64>) -> bool;
    /// Adds every term at a strictly feasible `x`, in the order of `slacks`.
    fn assemble(&self, x: &[f64], asm: &mut Assembly);
}

/// Barrier gradient and structured primal-dual Hessian.
///
/// Term `i` contributes `-grad s_i / s_i` to `grad` and
/// `lambda_i (g g^T / s_i - hess s_i)` to the Hessian, where `lambda_i`
/// comes from `mult` (or is `1 / s_i` when no multipliers are set, which
/// gives the plain barrier Hessian).
pub(crate) struct Assembly {
    n: usize,
    head: usize,
    bw: usize,
    pub grad: Vec<f64>,
    band: Vec<f64>,
    cross: Vec<f64>,
    tail: Vec<f64>,
    low_rank: Vec<(Vec<(usize, f64)>, f64)>,
    mult: Vec<f64>,
    /// Sparse slack gradients of all terms, flattened, with end offsets.
    term_grads: Vec<(usize, f64)>,
    term_ends: Vec<usize>,
}

impl Assembly {
    pub fn new(n: usize, head: usize, bw: usize) -> Self {
        let m = n - head;
        Assembly {
            n,
            head,
            bw,
            grad: vec![0.0; n],
            band: vec![0.0; head * (bw + 1)],
            cross: vec![0.0; head * m],
            tail: vec![0.0; m * m],
            low_rank: Vec::new(),
            mult: Vec::new(),
            term_grads: Vec::new(),
            term_ends: Vec::new(),
        }
    }

    fn clear(&mut self) {
        self.term_grads.clear();
        self.term_ends.clear();
        self.grad.iter_mut().for_each(|v| *v = 0.0);
        self.band.iter_mut().for_each(|v| *v = 0.0);
        self.cross.iter_mut().for_each(|v| *v = 0.0);
        self.tail.iter_mut().for_each(|v| *v = 0.0);
        self.low_rank.clear();
    }

    /// Adds `v` to `H[i][j]` and, for `i != j`, to `H[j][i]`.
    fn add_hess(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let m = self.n - self.head;
        if i < self.head {
            debug_assert!(i - j <= self.bw, "entry ({i}, {j}) outside the band");
            self.band[i * (self.bw + 1) + (i - j)] += v;
        } else if j < self.head {
            self.cross[j * m + (i - self.head)] += v;
        } else {
            let (a, b) = (i - self.head, j - self.head);
            self.tail[a * m + b] += v;
            if a != b {
                self.tail[b * m + a] += v;
            }
        }
    }

    /// Multiplier of the next term and its curvature weights `(lambda / s, lambda)`.
    fn weights(&mut self, s: f64) -> (f64, f64) {
        let k = self.term_ends.len();
        let lambda = self.mult.get(k).copied().unwrap_or(1.0 / s);
        (lambda / s, lambda)
    }

    /// Term whose slack depends on a few quantities; `idx` maps each local
    /// quantity to a variable (or `None` for constants), `g` and row-major
    /// `h` are the local gradient and Hessian of `s`.
    pub fn add_local(&mut self, idx: &[Option<usize>], s: f64, g: &[f64], h: &[f64]) {
        let m = idx.len();
        let inv = 1.0 / s;
        let (w_outer, w_curv) = self.weights(s);
        for a in 0..m {
            let Some(i) = idx[a] else { continue };
            self.grad[i] -= g[a] * inv;
            if g[a] != 0.0 {
                self.term_grads.push((i, g[a]));
            }
            for b in 0..=a {
                let Some(j) = idx[b] else { continue };
                let v = g[a] * g[b] * w_outer - h[a * m + b] * w_curv;
                if v != 0.0 {
                    self.add_hess(i, j, v);
                }
            }
        }
        self.term_ends.push(self.term_grads.len());
    }

    /// Term whose slack has a sparse gradient and a diagonal Hessian over
    /// many variables: `entries` lists `(var, ds, d2s)`. The gradient outer
    /// product is kept as a separate rank-one term.
    pub fn add_global(&mut self, entries: &[(usize, f64, f64)], s: f64) {
        let inv = 1.0 / s;
        let (w_outer, w_curv) = self.weights(s);
        let mut u = Vec::with_capacity(entries.len());
        for &(i, g, h) in entries {
            self.grad[i] -= g * inv;
            if h != 0.0 {
                self.add_hess(i, i, -h * w_curv);
            }
            if g != 0.0 {
                u.push((i, g));
            }
        }
        self.term_grads.extend_from_slice(&u);
        self.term_ends.push(self.term_grads.len());
        if !u.is_empty() {
            self.low_rank.push((u, w_outer));
        }
    }

    /// Linearized slack changes `grad s_i . d`.
    fn slack_changes(&self, d: &[f64]) -> Vec<f64> {
        let mut start = 0;
        self.term_ends
            .iter()
            .map(|&end| {
                let v = self.term_grads[start..end].iter().map(|&(i, g)| g * d[i]).sum();
                start = end;
                v
            })
            .collect()
    }

    /// `sum_i lambda_i grad s_i`.
    fn weighted_gradient(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let mut start = 0;
        for (&end, l) in self.term_ends.iter().zip(lambda) {
            for &(i, g) in &self.term_grads[start..end] {
                out[i] += l * g;
            }
            start = end;
        }
        out
    }

    /// `H v`.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let head = self.head;
        let m = self.n - head;
        let mut out = vec![0.0; self.n];
        for i in 0..head {
            let row = &self.band[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            out[i] += row[0] * v[i];
            for d in 1..=self.bw.min(i) {
                out[i] += row[d] * v[i - d];
                out[i - d] += row[d] * v[i];
            }
        }
        for j in 0..head {
            for a in 0..m {
                let c = self.cross[j * m + a];
                out[j] += c * v[head + a];
                out[head + a] += c * v[j];
            }
        }
        for a in 0..m {
            for b in 0..m {
                out[head + a] += self.tail[a * m + b] * v[head + b];
            }
        }
        for (u, w) in &self.low_rank {
            let dotp: f64 = u.iter().map(|&(i, c)| c * v[i]).sum();
            for &(i, c) in u {
                out[i] += w * dotp * c;
            }
        }
        out
    }

    /// Dense copy of the Hessian, for checks.
    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.n - self.head;
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.head {
            for d in 0..=self.bw.min(i) {
                let v = self.band[i * (self.bw + 1) + d];
                h[(i, i - d)] += v;
                if d > 0 {
                    h[(i - d, i)] += v;
                }
            }
        }
        for j in 0..self.head {
            for a in 0..m {
                let v = self.cross[j * m + a];
                h[(j, self.head + a)] += v;
                h[(self.head + a, j)] += v;
            }
        }
        for a in 0..m {
            for b in 0..m {
                h[(self.head + a, self.head + b)] += self.tail[a * m + b];
            }
        }
        for (u, w) in &self.low_rank {
            for &(i, ui) in u {
                for &(j, uj) in u {
                    h[(i, j)] += w * ui * uj;
                }
            }
        }
        h
    }

    /// Factors `H` with `shift` added to the banded diagonal.
    ///
    /// Each rank-one term `w u u^T` gets a multiplier `z = w u^T x`, which
    /// turns `H x = b` into the bordered system
    /// `[B E U_h; E^T T U_t; U_h^T U_t^T -1/w] [x_h; x_t; z] = [b_h; b_t; 0]`.
    /// Only the band `B` is factored on its own; the tail and the
    /// multipliers share one small dense block, which stays well
    /// conditioned when a heavily weighted term is all that holds a
    /// direction in place.
    fn factor(&self, shift: f64) -> Option<Factor<'_>> {
        let head = self.head;
        let m = self.n - head;
        let r = self.low_rank.len();
        let chol = BandCholesky::factor(&self.band, head, self.bw, shift)?;
        let mut border = Vec::with_capacity(m + r);
        let mut u_tail = vec![vec![0.0; r]; m];
        for a in 0..m {
            border.push((0..head).map(|j| self.cross[j * m + a]).collect::<Vec<f64>>());
        }
        for (c, (u, _)) in self.low_rank.iter().enumerate() {
            let mut col = vec![0.0; head];
            for &(i, v) in u {
                if i < head {
                    col[i] += v;
                } else {
                    u_tail[i - head][c] += v;
                }
            }
            border.push(col);
        }
        let y: Vec<Vec<f64>> = border
            .iter()
            .map(|col| {
                let mut v = col.clone();
                chol.solve_in_place(&mut v);
                v
            })
            .collect();
        let size = m + r;
        let mut small = DMatrix::<f64>::zeros(size, size);
        for a in 0..size {
            for b in 0..=a {
                let mut v = -dot(&border[a], &y[b]);
                match (a < m, b < m) {
                    (true, true) => {
                        v += self.tail[a * m + b];
                        if a == b {
                            v += shift;
                        }
                    }
                    (false, true) => v += u_tail[b][a - m],
                    (false, false) if a == b => v -= 1.0 / self.low_rank[a - m].1,
                    _ => {}
                }
                small[(a, b)] = v;
                small[(b, a)] = v;
            }
        }
        let lu = small.full_piv_lu();
        if size > 0 && !lu.is_invertible() {
            return None;
        }
        Some(Factor {
            asm: self,
            chol,
            border,
            y,
            small: lu,
        })
    }
}

/// Approximate inverse of the assembled Hessian.
struct Factor<'a> {
    asm: &'a Assembly,
    chol: BandCholesky,
    /// Head parts of the tail columns, then of the rank-one vectors.
    border: Vec<Vec<f64>>,
    /// `B^-1` applied to each border column.
    y: Vec<Vec<f64>>,
    small: nalgebra::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factor<'_> {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let head = self.asm.head;
        let m = self.asm.n - head;
        let mut x = rhs.to_vec();
        let (xh, xt) = x.split_at_mut(head);
        self.chol.solve_in_place(xh);
        if self.border.is_empty() {
            return x;
        }
        let reduced = DVector::from_iterator(
            self.border.len(),
            self.border
                .iter()
                .enumerate()
                .map(|(a, col)| if a < m { xt[a] } else { 0.0 } - dot(col, xh)),
        );
        let sol = self.small.solve(&reduced).unwrap_or(reduced);
        for (a, ya) in self.y.iter().enumerate() {
            for (xi, yi) in xh.iter_mut().zip(ya) {
                *xi -= sol[a] * yi;
            }
        }
        xt.copy_from_slice(&sol.as_slice()[..m]);
        x
    }
}

/// Lower-triangular banded Cholesky factor.
struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(band: &[f64], n: usize, bw: usize, shift: f64) -> Option<Self> {
        let w = bw + 1;
        let mut l = band.to_vec();
        for i in 0..n {
            l[i * w] += shift;
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = l[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    sum -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return None;
                    }
                    l[i * w] = sum.sqrt();
                } else {
                    l[i * w + (i - j)] = sum / l[j * w];
                }
            }
        }
        Some(BandCholesky { n, bw, l })
    }

    fn solve_in_place(&self, v: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = v[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l[i * w + (i - k)] * v[k];
            }
            v[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = v[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.l[k * w + (k - i)] * v[k];
            }
            v[i] = s / self.l[i * w];
        }
    }
}

const REFINE_TOL: f64 = 1e-12;
const REFINE_ITERS: usize = 20;
const ACCURATE_SOLVE: f64 = 1e-9;
/// Least fraction of the distance to the boundary a step may cover; it
/// tends to one as the gap closes.
const TO_BOUNDARY: f64 = 0.995;
const ARMIJO: f64 = 0.1;

/// Result of an interior solve.
#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub x: Vec<f64>,
    /// Relative Lagrangian stationarity `|c - sum lambda_i grad s_i|`, scaled
    /// by the larger of the two terms.
    pub stationarity: f64,
    /// Complementarity gap `sum lambda_i s_i`.
    pub gap: f64,
    pub newton_steps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Solver for one assembled Newton matrix, structured first and dense when
/// the structured solve is not accurate.
struct NewtonSystem<'a> {
    asm: &'a Assembly,
    fast: Option<Factor<'a>>,
    dense: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl<'a> NewtonSystem<'a> {
    fn new(asm: &'a Assembly) -> Self {
        NewtonSystem {
            asm,
            fast: asm.factor(0.0),
            dense: None,
        }
    }

    fn solve(&mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        if let Some(f) = &self.fast {
            let d = refine(self.asm, f, rhs);
            let res: Vec<f64> = self.asm.apply(&d).iter().zip(rhs).map(|(hd, b)| hd - b).collect();
            if d.iter().all(|v| v.is_finite()) && dot(&d, rhs) > 0.0 && max_abs(&res) <= ACCURATE_SOLVE * max_abs(rhs) {
                return Ok(d);
            }
        }
        // The structured path can lose definiteness when a few terms
        // dominate; a dense factorization is slower but stable.
        if self.dense.is_none() {
            self.dense = Some(self.dense_factor()?);
        }
        let d = self.dense.as_ref().map(|c| c.solve(&DVector::from_column_slice(rhs)));
        match d {
            Some(d) if d.iter().all(|v| v.is_finite()) => Ok(d.as_slice().to_vec()),
            _ => Err(PlanError::Solver("interior Newton system could not be solved".into())),
        }
    }

    fn dense_factor(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let h = self.asm.dense();
        let scale = (0..h.nrows()).fold(0.0f64, |a, i| a.max(h[(i, i)].abs())).max(1.0);
        let mut shift = 0.0;
        for _ in 0..8 {
            let mut hs = h.clone();
            for i in 0..hs.nrows() {
                hs[(i, i)] += shift;
            }
            if let Some(c) = hs.cholesky() {
                return Ok(c);
            }
            shift = if shift == 0.0 { 1e-15 * scale } else { shift * 100.0 };
        }
        Err(PlanError::Solver("interior Newton system could not be factored".into()))
    }
}

/// Preconditioned conjugate gradients on `H d = b`, preconditioned by the
/// structured factorization; the factorization alone loses accuracy once
/// the Hessian grows very ill-conditioned.
fn refine(asm: &Assembly, f: &Factor<'_>, b: &[f64]) -> Vec<f64> {
    let target = REFINE_TOL * max_abs(b);
    let mut x = f.solve(b);
    let mut r: Vec<f64> = b.iter().zip(asm.apply(&x)).map(|(b, hx)| b - hx).collect();
    let mut best = (max_abs(&r), x.clone());
    if best.0 <= target {
        return x;
    }
    let mut z = f.solve(&r);
    let mut pdir = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..REFINE_ITERS {
        let hp = asm.apply(&pdir);
        let php = dot(&pdir, &hp);
        if !(php > 0.0) || !(rz > 0.0) {
            break;
        }
        let alpha = rz / php;
        for i in 0..x.len() {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * hp[i];
        }
        let res = max_abs(&r);
        if res < best.0 {
            best = (res, x.clone());
        }
        if res <= target {
            break;
        }
        z = f.solve(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..x.len() {
            pdir[i] = z[i] + beta * pdir[i];
        }
    }
    best.1
}

/// Multiplier step for a primal direction with linearized slack changes
/// `ds`, at centering target `mu_target`.
fn multiplier_step(s: &[f64], lambda: &[f64], ds: &[f64], mu_target: f64) -> Vec<f64> {
    s.iter()
        .zip(lambda)
        .zip(ds)
        .map(|((s, l), ds)| (mu_target - l * s - l * ds) / s)
        .collect()
}

/// Largest step in `(0, 1]` keeping `v + a dv` at least `1 - frac` of `v`.
fn boundary_step(v: &[f64], dv: &[f64], frac: f64) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .fold(1.0f64, |a, (v, d)| a.min(-frac * v / d))
}

/// Runs the interior method from a strictly feasible `x0`.
pub(crate) fn solve<P: BarrierProblem>(p: &P, x0: Vec<f64>, settings: &BarrierSettings) -> Result<BarrierOutcome> {
    let n = p.dim();
    let c = p.cost();
    let mut x = x0;
    let mut s = Vec::new();
    let mut s_new = Vec::new();
    if !p.slacks(&x, &mut s) {
        return Err(PlanError::Solver("interior start point is not strictly feasible".into()));
    }
    let m = s.len();
    let mu0 = dot(c, &x).abs().max(1.0) / m.max(1) as f64;
    let mut lambda: Vec<f64> = s.iter().map(|s| mu0 / s).collect();
    let mut asm = Assembly::new(n, p.head(), p.bandwidth());
    let mut trial = vec![0.0; n];
    let mut steps = 0usize;
    loop {
        asm.clear();
        asm.mult.clone_from(&lambda);
        p.assemble(&x, &mut asm);
        let gap = dot(&lambda, &s);
        let pull = asm.weighted_gradient(&lambda);
        let residual: Vec<f64> = c.iter().zip(&pull).map(|(c, g)| c - g).collect();
        let stationarity = max_abs(&residual) / max_abs(c).max(max_abs(&pull)).max(f64::MIN_POSITIVE);
        let objective = dot(c, &x);
        if gap <= settings.gap_tol * objective.abs().max(1.0) && stationarity <= settings.stationarity_tol {
            return Ok(BarrierOutcome {
                x,
                stationarity,
                gap,
                newton_steps: steps,
            });
        }
        if steps >= settings.max_newton {
            return Err(PlanError::Solver(format!(
                "interior method hit the {} Newton step cap (gap {gap:.3e}, stationarity {stationarity:.3e})",
                settings.max_newton
            )));
        }
        steps += 1;
        let mu = gap / m as f64;
        let frac = (1.0 - mu).max(TO_BOUNDARY);
        let mut system = NewtonSystem::new(&asm);
        // Predictor: pure Newton on the KKT conditions sets the centering.
        let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
        let d_aff = system.solve(&neg_c)?;
        let ds_aff = asm.slack_changes(&d_aff);
        let dl_aff = multiplier_step(&s, &lambda, &ds_aff, 0.0);
        // The predictor is measured on the true slacks, since curved
        // constraints stop it well short of the linearized boundary.
        let mut a_aff = boundary_step(&lambda, &dl_aff, frac).min(boundary_step(&s, &ds_aff, frac));
        let mut mu_aff = mu;
        while a_aff > 1e-8 {
            for i in 0..n {
                trial[i] = x[i] + a_aff * d_aff[i];
            }
            if p.slacks(&trial, &mut s_new) && s_new.iter().zip(&s).all(|(a, b)| *a >= (1.0 - frac) * b) {
                mu_aff = s_new
                    .iter()
                    .zip(lambda.iter().zip(&dl_aff))
                    .map(|(s, (l, dl))| s * (l + a_aff * dl))
                    .sum::<f64>()
                    / m as f64;
                break;
            }
            a_aff *= 0.8;
        }
        // Complementarity may not close faster than stationarity, or the
        // multipliers collapse before they balance the cost.
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3).max(1e-6).max(stationarity.min(0.9));
        let target = sigma * mu;
        let rhs: Vec<f64> = c.iter().zip(&asm.grad).map(|(c, g)| -(c + target * g)).collect();
        let d = system.solve(&rhs)?;
        let ds = asm.slack_changes(&d);
        let dl = multiplier_step(&s, &lambda, &ds, target);
        // Safeguard on the barrier merit `c.x - target sum ln s_i`, whose
        // slope along `d` is `-rhs.d < 0`.
        let slope = -dot(&rhs, &d);
        let cd = dot(c, &d);
        let noise = 1e-13 * target * m as f64 + 1e-15 * objective.abs();
        let mut alpha = 1.0f64;
        let mut accepted = false;
        while alpha > 1e-14 {
            for i in 0..n {
                trial[i] = x[i] + alpha * d[i];
            }
            if p.slacks(&trial, &mut s_new) && s_new.iter().zip(&s).all(|(a, b)| *a >= (1.0 - frac) * b) {
                let change = alpha * cd + target * s.iter().zip(&s_new).map(|(a, b)| (a / b).ln()).sum::<f64>();
                if change <= ARMIJO * alpha * slope + noise {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(PlanError::Solver(format!(
                "interior line search failed (gap {gap:.3e}, stationarity {stationarity:.3e})"
            )));
        }
        let a_dual = boundary_step(&lambda, &dl, frac);
        for (l, dl) in lambda.iter_mut().zip(&dl) {
            *l += a_dual * dl;
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut s, &mut s_new);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min sum x_i subject to x_i >= b_i, x_i x_{i+1}-style coupling through
    /// (x_i - x_{i+1})^2 <= 1, plus a tail variable tying all heads:
    /// t >= 0 and sum_i x_i - t <= budget.
    struct Toy {
        b: Vec<f64>,
        cost: Vec<f64>,
        budget: f64,
    }

    impl Toy {
        fn new(b: Vec<f64>, budget: f64) -> Self {
            let n = b.len();
            let mut cost = vec![1.0; n + 1];
            cost[n] = 3.0;
            Toy { b, cost, budget }
        }
    }

    impl BarrierProblem for Toy {
        fn dim(&self) -> usize {
            self.b.len() + 1
        }
        fn head(&self) -> usize {
            self.b.len()
        }
        fn bandwidth(&self) -> usize {
            1
        }
        fn cost(&self) -> &[f64] {
            &self.cost
        }
        fn slacks(&self, x: &[f64], out: &mut Vec<f64>) -> bool {
            out.clear();
            let n = self.b.len();
            for i in 0..n {
                out.push(x[i] - self.b[i]);
            }
            for i in 0..n - 1 {
                out.push(1.0 - (x[i] - x[i + 1]).powi(2));
            }
            out.push(x[n]);
            out.push(self.budget + x[n] - x[..n].iter().sum::<f64>());
            out.iter().all(|s| *s > 0.0)
        }
        fn assemble(&self, x: &[f64], asm: &mut Assembly) {
            let n = self.b.len();
            for i in 0..n {
                asm.add_local(&[Some(i)], x[i] - self.b[i], &[1.0], &[0.0]);
            }
            for i in 0..n - 1 {
                let d = x[i] - x[i + 1];
                asm.add_local(
                    &[Some(i), Some(i + 1)],
                    1.0 - d * d,
                    &[-2.0 * d, 2.0 * d],
                    &[-2.0, 2.0, 2.0, -2.0],
                );
            }
            asm.add_local(&[Some(n)], x[n], &[1.0], &[0.0]);
            let mut e: Vec<(usize, f64, f64)> = (0..n).map(|i| (i, -1.0, 0.0)).collect();
            e.push((n, 1.0, 0.0));
            let s = self.budget + x[n] - x[..n].iter().sum::<f64>();
            asm.add_global(&e, s);
        }
    }

    #[test]
    fn structured_solve_matches_dense() {
        let p = Toy::new(vec![0.0, 0.5, 1.0, 0.2, 0.9, 0.1], 10.0);
        let x: Vec<f64> = vec![0.3, 0.8, 1.4, 0.7, 1.2, 0.5, 0.4];
        let mut asm = Assembly::new(p.dim(), p.head(), p.bandwidth());
        p.assemble(&x, &mut asm);
        let h = asm.dense();
        let rhs: Vec<f64> = (0..p.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let fast = asm.factor(0.0).unwrap().solve(&rhs);
        let dense = h.clone().cholesky().unwrap().solve(&DVector::from_vec(rhs.clone()));
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    fn tight() -> BarrierSettings {
        BarrierSettings {
            gap_tol: 1e-10,
            ..BarrierSettings::default()
        }
    }

    #[test]
    fn solves_toy_to_the_known_optimum() {
        // The chain constraint forces x_i >= b_max - (distance) when the
        // budget binds nowhere; optimum x_i = max_j (b_j - |i - j|) with t = 0.
        let b = vec![0.0, 0.0, 3.0, 0.0, 0.0];
        let p = Toy::new(b.clone(), 100.0);
        let x0 = vec![5.0, 5.0, 5.0, 5.0, 5.0, 1.0];
        let out = solve(&p, x0, &tight()).unwrap();
        let expect = [1.0, 2.0, 3.0, 2.0, 1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((out.x[i] - e).abs() < 1e-6, "x[{i}] = {}", out.x[i]);
        }
        assert!(out.x[5] < 1e-6);
        assert!((dot(&p.cost, &out.x) - 9.0).abs() < 1e-6);
        assert!(out.stationarity < 1e-5, "{:?}", out);
    }

    #[test]
    fn budget_activates_tail_variable() {
        // Budget 6 < 9 forces t = 3 at cost 3 each.
        let p = Toy::new(vec![0.0, 0.0, 3.0, 0.0, 0.0], 6.0);
        let out = solve(&p, vec![5.0, 5.0, 5.0, 5.0, 5.0, 30.0], &tight()).unwrap();
        assert!((out.x[5] - 3.0).abs() < 1e-6, "t = {}", out.x[5]);
        assert!((dot(&p.cost, &out.x) - 18.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = Toy::new(vec![0.0, 0.0], 10.0);
        assert!(solve(&p, vec![-1.0, 0.0, 1.0], &BarrierSettings::default()).is_err());
    }
}
