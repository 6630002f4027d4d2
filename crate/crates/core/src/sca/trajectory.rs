//! SP2-1: the convexified trajectory and slot-length program.
//!
//! Per slot `n` the program carries the slot length `delta[n]`, the
//! end-of-slot waypoint `q[n + 1]`, and for the scheduled GN an elevation
//! lower bound `theta` and an epigraph variable `t <= r_hat_lb`. A single
//! time-scaled slack `rho` (bps/Hz s) relaxes the rate constraints
//! `sum_n s (2 mu sqrt(t) - mu^2/delta) >= R_min sum_n delta - rho`.

use serde::{Deserialize, Serialize};

use super::barrier::{self, Assembly, BarrierProblem, BarrierSettings};
use super::{angle_transform, anchor_angles, LinkCoefficients, ScaCoefficients, ScaState, x_los, x_nlos};
use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{DesignVars, EnvParams, Point, Scenario};

const DEG: f64 = std::f64::consts::PI / 180.0;

/// How slot lengths enter the program.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum SlotMode {
    /// Every slot has its own length.
    #[default]
    Free,
    /// One length shared by all slots.
    Common,
    /// `Some(d)` pins a slot to `d`; `None` leaves it free.
    Pinned(Vec<Option<f64>>),
}

/// Restrictions that turn the proposed program into a baseline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryVariant {
    /// Pins every interior waypoint to this altitude.
    pub fixed_altitude: Option<f64>,
    /// Keeps the anchor trajectory unchanged.
    pub frozen_trajectory: bool,
    pub slots: SlotMode,
}

/// Output of one SP2-1 solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSolution {
    /// Trajectory and slot lengths with the input schedule.
    pub vars: DesignVars,
    /// Elevation lower bounds (degrees); unscheduled pairs hold the true
    /// angle at the returned trajectory.
    pub theta_lb: Vec<Vec<f64>>,
    /// Time-scaled rate slack (bps/Hz s).
    pub slack: f64,
    /// `sum delta + eta * slack`.
    pub objective: f64,
    pub kkt_residual: f64,
    pub duality_gap: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Quant {
    Var(usize),
    Const(f64),
}

impl Quant {
    fn val(self, x: &[f64]) -> f64 {
        match self {
            Quant::Var(i) => x[i],
            Quant::Const(v) => v,
        }
    }

    fn idx(self) -> Option<usize> {
        match self {
            Quant::Var(i) => Some(i),
            Quant::Const(_) => None,
        }
    }
}

/// Data of a scheduled (GN, slot) pair.
#[derive(Debug, Clone, Copy)]
struct Link {
    gn: usize,
    w: Point,
    theta: usize,
    t: usize,
    lambda: f64,
    mu: f64,
    sin0: f64,
    theta0: f64,
    slope: f64,
    coeffs: LinkCoefficients,
}

struct Sp2 {
    env: EnvParams,
    v_max: f64,
    v_z: f64,
    delta_min: f64,
    delta_max: f64,
    h_min: f64,
    h_max: f64,
    delta: Vec<Quant>,
    /// Shared slot-length variable, if any (bounds are added once).
    shared_delta: Option<usize>,
    pos: Vec<[Quant; 3]>,
    links: Vec<Option<Link>>,
    /// Slots held by each GN.
    held: Vec<Vec<usize>>,
    rho: usize,
    dim: usize,
    head: usize,
    bw: usize,
    cost: Vec<f64>,
}

impl Sp2 {
    fn point(&self, m: usize, x: &[f64]) -> Point {
        let p = &self.pos[m];
        Point::new(p[0].val(x), p[1].val(x), p[2].val(x))
    }

    /// Visits every barrier term, pushing slacks and (optionally) derivatives.
    fn eval(&self, x: &[f64], slacks: &mut Vec<f64>, mut asm: Option<&mut Assembly>) -> bool {
        slacks.clear();
        let mut ok = true;
        let mut push = |s: f64, slacks: &mut Vec<f64>| {
            if !(s > 0.0) || !s.is_finite() {
                ok = false;
            }
            slacks.push(s);
        };
        macro_rules! local {
            ($idx:expr, $s:expr, $g:expr, $h:expr) => {{
                let s = $s;
                push(s, slacks);
                if let Some(a) = asm.as_deref_mut() {
                    if s > 0.0 {
                        a.add_local($idx, s, $g, $h);
                    }
                }
            }};
        }
        let bound = |q: Quant, lo: f64, hi: f64, slacks: &mut Vec<f64>, asm: &mut Option<&mut Assembly>, push: &mut dyn FnMut(f64, &mut Vec<f64>)| {
            if let Quant::Var(i) = q {
                let v = x[i];
                push(v - lo, slacks);
                push(hi - v, slacks);
                if let Some(a) = asm.as_deref_mut() {
                    if v > lo && v < hi {
                        a.add_local(&[Some(i)], v - lo, &[1.0], &[0.0]);
                        a.add_local(&[Some(i)], hi - v, &[-1.0], &[0.0]);
                    }
                }
            }
        };

        let n_slots = self.delta.len();
        if let Some(i) = self.shared_delta {
            bound(Quant::Var(i), self.delta_min, self.delta_max, slacks, &mut asm, &mut push);
        }
        for n in 0..n_slots {
            let d = self.delta[n];
            if self.shared_delta.is_none() {
                bound(d, self.delta_min, self.delta_max, slacks, &mut asm, &mut push);
            }
            if n + 1 < n_slots {
                bound(self.pos[n + 1][2], self.h_min, self.h_max, slacks, &mut asm, &mut push);
            }

            // mobility: V^2 delta^2 - |q[n+1] - q[n]|^2
            let (p0, p1) = (self.pos[n], self.pos[n + 1]);
            let idx = [d.idx(), p0[0].idx(), p0[1].idx(), p0[2].idx(), p1[0].idx(), p1[1].idx(), p1[2].idx()];
            if idx.iter().any(Option::is_some) {
                let dv = d.val(x);
                let a = self.point(n, x);
                let b = self.point(n + 1, x);
                let diff = b - a;
                let v2 = self.v_max * self.v_max;
                let s = v2 * dv * dv - diff.norm_squared();
                let g = [2.0 * v2 * dv, 2.0 * diff.x, 2.0 * diff.y, 2.0 * diff.z, -2.0 * diff.x, -2.0 * diff.y, -2.0 * diff.z];
                let mut h = [0.0; 49];
                h[0] = 2.0 * v2;
                for c in 0..3 {
                    h[(1 + c) * 7 + 1 + c] = -2.0;
                    h[(4 + c) * 7 + 4 + c] = -2.0;
                    h[(1 + c) * 7 + 4 + c] = 2.0;
                    h[(4 + c) * 7 + 1 + c] = 2.0;
                }
                local!(&idx, s, &g, &h);

                let vidx = [d.idx(), p0[2].idx(), p1[2].idx()];
                if vidx.iter().any(Option::is_some) {
                    let dz = b.z - a.z;
                    let zero = [0.0; 9];
                    local!(&vidx, self.v_z * dv - dz, &[self.v_z, 1.0, -1.0], &zero);
                    local!(&vidx, self.v_z * dv + dz, &[self.v_z, -1.0, 1.0], &zero);
                }
            }

            if let Some(l) = &self.links[n] {
                let th = x[l.theta];
                let t = x[l.t];
                bound(Quant::Var(l.theta), 0.0, 90.0, slacks, &mut asm, &mut push);
                local!(&[Some(l.t)], t, &[1.0], &[0.0]);

                let q = self.point(n + 1, x);
                let r = q - l.w;
                let dist = r.norm();
                let h = (q.z - l.w.z).max(0.0);
                let p1 = self.pos[n + 1];
                // angle: 2 lam sqrt(h) - lam^2 d - sin0 - c (theta - theta0)
                {
                    let idx = [Some(l.theta), p1[0].idx(), p1[1].idx(), p1[2].idx()];
                    let lam = l.lambda;
                    let sh = h.sqrt();
                    let s = 2.0 * lam * sh - lam * lam * dist - l.sin0 - l.slope * (th - l.theta0);
                    let gq = -lam * lam * r / dist;
                    let g = [-l.slope, gq.x, gq.y, gq.z + lam / sh];
                    let mut hm = [0.0; 16];
                    let k = -lam * lam / dist;
                    for a in 0..3 {
                        for b in 0..3 {
                            let id = if a == b { 1.0 } else { 0.0 };
                            hm[(1 + a) * 4 + 1 + b] = k * (id - r[a] * r[b] / (dist * dist));
                        }
                    }
                    hm[15] -= lam / (2.0 * h * sh);
                    local!(&idx, s, &g, &hm);
                }
                // epigraph: r_hat_lb(theta, q) - t
                {
                    let idx = [Some(l.theta), Some(l.t), p1[0].idx(), p1[1].idx(), p1[2].idx()];
                    let c = &l.coeffs;
                    let a2 = self.env.a2;
                    let xl = x_los(th, &self.env);
                    let xn = x_nlos(th, &self.env);
                    let y = dist * dist;
                    let s = c.r_hat_lb_at(th, y, &self.env) - t;
                    let dth = c.psi_los * a2 * (xl - 1.0) - c.psi_nlos * a2 * (xn - 1.0);
                    let d2th = -a2 * a2 * (c.psi_los * (xl - 1.0) + c.psi_nlos * (xn - 1.0));
                    let g = [dth, -1.0, -2.0 * c.chi * r.x, -2.0 * c.chi * r.y, -2.0 * c.chi * r.z];
                    let mut hm = [0.0; 25];
                    hm[0] = d2th;
                    for a in 0..3 {
                        hm[(2 + a) * 5 + 2 + a] = -2.0 * c.chi;
                    }
                    local!(&idx, s, &g, &hm);
                }
            }
        }

        // rho >= 0
        {
            let rho = x[self.rho];
            local!(&[Some(self.rho)], rho, &[1.0], &[0.0]);
        }

        // rate constraints
        let r_min = self.env.r_min;
        for held in &self.held {
            let mut s = x[self.rho];
            let mut entries: Vec<(usize, f64, f64)> = Vec::with_capacity(2 * n_slots + 2);
            let mut shared = (0.0, 0.0);
            let mut mine = held.iter().peekable();
            for n in 0..n_slots {
                let dv = self.delta[n].val(x);
                let (mut g, mut h) = (-r_min, 0.0);
                s -= r_min * dv;
                if mine.peek() == Some(&&n) {
                    mine.next();
                    let l = self.links[n].as_ref().expect("held slot has a link");
                    let t = x[l.t];
                    let mu = l.mu;
                    s += 2.0 * mu * t.max(0.0).sqrt() - mu * mu / dv;
                    g += mu * mu / (dv * dv);
                    h -= 2.0 * mu * mu / (dv * dv * dv);
                    if mu > 0.0 && t > 0.0 {
                        entries.push((l.t, mu / t.sqrt(), -0.5 * mu / (t * t.sqrt())));
                    }
                }
                match self.delta[n] {
                    Quant::Var(i) if Some(i) == self.shared_delta => {
                        shared.0 += g;
                        shared.1 += h;
                    }
                    Quant::Var(i) => entries.push((i, g, h)),
                    Quant::Const(_) => {}
                }
            }
            if let Some(i) = self.shared_delta {
                entries.push((i, shared.0, shared.1));
            }
            entries.push((self.rho, 1.0, 0.0));
            push(s, slacks);
            if let Some(a) = asm.as_deref_mut() {
                if s > 0.0 {
                    a.add_global(&entries, s);
                }
            }
        }
        ok
    }
}

impl BarrierProblem for Sp2 {
    fn dim(&self) -> usize {
        self.dim
    }
    fn head(&self) -> usize {
        self.head
    }
    fn bandwidth(&self) -> usize {
        self.bw
    }
    fn cost(&self) -> &[f64] {
        &self.cost
    }
    fn slacks(&self, x: &[f64], out: &mut Vec<f64>) -> bool {
        self.eval(x, out, None)
    }
    fn assemble(&self, x: &[f64], asm: &mut Assembly) {
        let mut scratch = Vec::new();
        self.eval(x, &mut scratch, Some(asm));
    }
}

fn check_inputs(scenario: &Scenario, schedule: &[Vec<f64>], state: &ScaState, coeffs: &ScaCoefficients) -> Result<()> {
    let (k, n) = (scenario.num_gns(), scenario.n_slots);
    if schedule.len() != k || schedule.iter().any(|r| r.len() != n) {
        return Err(PlanError::dims(format!("schedule must be {k} x {n}")));
    }
    for slot in 0..n {
        let mut count = 0;
        for row in schedule {
            let v = row[slot];
            if v != 0.0 && v != 1.0 {
                return Err(PlanError::domain(format!("schedule entry {v} in slot {slot} is not binary")));
            }
            count += v as usize;
        }
        if count > 1 {
            return Err(PlanError::domain(format!("slot {slot} is scheduled to {count} GNs")));
        }
    }
    if state.q_prev.len() != n + 1 || state.delta_prev.len() != n {
        return Err(PlanError::dims("anchor trajectory or slot vector has the wrong length"));
    }
    if state.lambda.len() != k || state.mu.len() != k || state.lambda.iter().chain(&state.mu).any(|r| r.len() != n) {
        return Err(PlanError::dims("auxiliary multipliers must be K x N"));
    }
    if coeffs.num_gns != k || coeffs.num_slots != n {
        return Err(PlanError::dims("SCA coefficients do not match the scenario"));
    }
    if !(state.eta > 0.0) {
        return Err(PlanError::domain("penalty weight must be positive"));
    }
    Ok(())
}

/// Straight constant-speed path pulled into the altitude interior, used to
/// recover a strictly feasible start when the anchor sits on a boundary.
fn interior_path(scenario: &Scenario, fixed_altitude: Option<f64>) -> Vec<Point> {
    let n = scenario.n_slots;
    let margin = (0.25 * (scenario.h_max - scenario.h_min)).min(0.25 * scenario.v_z * scenario.delta_max);
    (0..=n)
        .map(|m| {
            let f = m as f64 / n as f64;
            let mut p = scenario.q_start + (scenario.q_end - scenario.q_start) * f;
            if m > 0 && m < n {
                p.z = match fixed_altitude {
                    Some(z) => z,
                    None => p.z.clamp(scenario.h_min + margin, scenario.h_max - margin),
                };
            }
            p
        })
        .collect()
}

/// Solves SP2-1 for a fixed binary schedule around the anchors in `state`.
pub fn solve_trajectory_subproblem(
    scenario: &Scenario,
    model: &SeModel,
    schedule: &[Vec<f64>],
    state: &ScaState,
    coeffs: &ScaCoefficients,
    variant: &TrajectoryVariant,
    settings: &BarrierSettings,
) -> Result<SubproblemSolution> {
    let (prob, x0) = build(scenario, model, schedule, state, coeffs, variant)?;
    let n_slots = scenario.n_slots;
    let out = barrier::solve(&prob, x0, settings)?;
    let x = &out.x;

    let trajectory: Vec<Point> = (0..=n_slots).map(|m| prob.point(m, x)).collect();
    let slots: Vec<f64> = prob.delta.iter().map(|d| d.val(x)).collect();
    let mut theta_lb = anchor_angles(scenario, &trajectory);
    for (n, l) in prob.links.iter().enumerate() {
        if let Some(l) = l {
            theta_lb[l.gn][n] = x[l.theta];
        }
    }
    let slack = x[prob.rho];
    Ok(SubproblemSolution {
        objective: slots.iter().sum::<f64>() + state.eta * slack,
        vars: DesignVars {
            schedule: schedule.to_vec(),
            trajectory,
            slots,
        },
        theta_lb,
        slack,
        kkt_residual: out.stationarity,
        duality_gap: out.gap,
        newton_steps: out.newton_steps,
    })
}

fn build(
    scenario: &Scenario,
    model: &SeModel,
    schedule: &[Vec<f64>],
    state: &ScaState,
    coeffs: &ScaCoefficients,
    variant: &TrajectoryVariant,
) -> Result<(Sp2, Vec<f64>)> {
    scenario.validate()?;
    check_inputs(scenario, schedule, state, coeffs)?;
    let env = model.env;
    let n_slots = scenario.n_slots;
    let k_count = scenario.num_gns();
    let assignment: Vec<Option<usize>> = (0..n_slots).map(|n| (0..k_count).find(|&k| schedule[k][n] == 1.0)).collect();
    if let SlotMode::Pinned(p) = &variant.slots {
        if p.len() != n_slots {
            return Err(PlanError::dims("pinned slot vector must have N entries"));
        }
    }

    // Variable layout, slot by slot: [delta, theta, t, x, y, z].
    let mut next = 0usize;
    let mut take = || {
        next += 1;
        next - 1
    };
    let mut delta = Vec::with_capacity(n_slots);
    let mut pos: Vec<[Quant; 3]> = Vec::with_capacity(n_slots + 1);
    let c = |p: &Point| [Quant::Const(p.x), Quant::Const(p.y), Quant::Const(p.z)];
    pos.push(c(&scenario.q_start));
    let mut link_idx: Vec<Option<(usize, usize)>> = Vec::with_capacity(n_slots);
    for n in 0..n_slots {
        delta.push(match &variant.slots {
            SlotMode::Free => Quant::Var(take()),
            SlotMode::Common => Quant::Const(f64::NAN),
            SlotMode::Pinned(p) => match p[n] {
                Some(d) => Quant::Const(d),
                None => Quant::Var(take()),
            },
        });
        // With no rate target the rate constraints are vacuous.
        let linked = env.r_min > 0.0;
        link_idx.push(assignment[n].filter(|_| linked).map(|_| (take(), take())));
        if n + 1 < n_slots {
            let anchor = state.q_prev[n + 1];
            if variant.frozen_trajectory {
                pos.push(c(&anchor));
            } else {
                let (xi, yi) = (take(), take());
                let z = match variant.fixed_altitude {
                    Some(h) => Quant::Const(h),
                    None => Quant::Var(take()),
                };
                pos.push([Quant::Var(xi), Quant::Var(yi), z]);
            }
        }
    }
    pos.push(c(&scenario.q_end));
    let head = next;
    let shared_delta = if variant.slots == SlotMode::Common {
        let i = next;
        next += 1;
        for d in delta.iter_mut() {
            *d = Quant::Var(i);
        }
        Some(i)
    } else {
        None
    };
    let rho = next;
    let dim = next + 1;

    // Bandwidth over head variables of every local term.
    let mut bw = 0usize;
    let mut widen = |ids: &[Option<usize>]| {
        let head_ids: Vec<usize> = ids.iter().flatten().copied().filter(|&i| i < head).collect();
        if let (Some(lo), Some(hi)) = (head_ids.iter().min(), head_ids.iter().max()) {
            bw = bw.max(hi - lo);
        }
    };
    for n in 0..n_slots {
        let (p0, p1) = (pos[n], pos[n + 1]);
        widen(&[delta[n].idx(), p0[0].idx(), p0[1].idx(), p0[2].idx(), p1[0].idx(), p1[1].idx(), p1[2].idx()]);
        if let Some((th, t)) = link_idx[n] {
            widen(&[Some(th), Some(t), p1[0].idx(), p1[1].idx(), p1[2].idx()]);
        }
    }

    let mut links = Vec::with_capacity(n_slots);
    let mut held = vec![Vec::new(); k_count];
    for n in 0..n_slots {
        links.push(match (assignment[n], link_idx[n]) {
            (Some(k), Some((theta, t))) => {
                held[k].push(n);
                let theta0 = state.theta_lb_prev[k][n].clamp(0.0, super::THETA_ANCHOR_MAX);
                Some(Link {
                    gn: k,
                    w: scenario.gns[k],
                    theta,
                    t,
                    lambda: state.lambda[k][n],
                    mu: state.mu[k][n],
                    sin0: (theta0 * DEG).sin(),
                    theta0,
                    slope: DEG * (theta0 * DEG).cos(),
                    coeffs: *coeffs.get(k, n),
                })
            }
            _ => None,
        });
    }

    let mut cost = vec![0.0; dim];
    match shared_delta {
        Some(i) => cost[i] = n_slots as f64,
        None => {
            for d in &delta {
                if let Quant::Var(i) = d {
                    cost[*i] = 1.0;
                }
            }
        }
    }
    cost[rho] = state.eta;

    let prob = Sp2 {
        env,
        v_max: scenario.v_max,
        v_z: scenario.v_z,
        delta_min: scenario.delta_min,
        delta_max: scenario.delta_max,
        h_min: scenario.h_min,
        h_max: scenario.h_max,
        delta,
        shared_delta,
        pos,
        links,
        held,
        rho,
        dim,
        head,
        bw,
        cost,
    };

    let x0 = start_point(&prob, scenario, state, variant)?;
    Ok((prob, x0))
}

/// Builds a strictly feasible start: the anchor trajectory, blended toward
/// an interior path when needed, slot lengths nudged inside their bounds,
/// elevation bounds just under their linearized limit, epigraph variables
/// at 90% of the bound, and a slack covering every rate shortfall.
fn start_point(prob: &Sp2, scenario: &Scenario, state: &ScaState, variant: &TrajectoryVariant) -> Result<Vec<f64>> {
    let n_slots = scenario.n_slots;
    let safe = interior_path(scenario, variant.fixed_altitude);
    let mut slacks = Vec::new();
    for kappa in [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.6, 1.0] {
        let mut x = vec![0.0; prob.dim];
        for m in 1..n_slots {
            let p = state.q_prev[m] * (1.0 - kappa) + safe[m] * kappa;
            for c in 0..3 {
                if let Quant::Var(i) = prob.pos[m][c] {
                    x[i] = p[c];
                }
            }
        }
        let q: Vec<Point> = (0..=n_slots).map(|m| prob.point(m, &x)).collect();
        let need: Vec<f64> = (0..n_slots)
            .map(|n| {
                let d = q[n + 1] - q[n];
                (d.norm() / scenario.v_max).max(d.z.abs() / scenario.v_z).max(scenario.delta_min)
            })
            .collect();
        let place = |lo: f64, prev: f64| {
            let gap = scenario.delta_max - lo;
            if gap <= 0.0 {
                None
            } else {
                Some(prev.clamp(lo + 1e-3 * gap, scenario.delta_max - 1e-3 * gap))
            }
        };
        let mut placed = true;
        match prob.shared_delta {
            Some(i) => {
                let lo = need.iter().copied().fold(scenario.delta_min, f64::max);
                let mean = state.delta_prev.iter().sum::<f64>() / n_slots as f64;
                match place(lo, mean) {
                    Some(v) => x[i] = v,
                    None => placed = false,
                }
            }
            None => {
                for n in 0..n_slots {
                    if let Quant::Var(i) = prob.delta[n] {
                        match place(need[n], state.delta_prev[n]) {
                            Some(v) => x[i] = v,
                            None => placed = false,
                        }
                    }
                }
            }
        }
        if !placed {
            continue;
        }
        let mut links_ok = true;
        for (n, l) in prob.links.iter().enumerate() {
            let Some(l) = l else { continue };
            let qn = q[n + 1];
            let val = angle_transform(&qn, &l.w, l.lambda);
            // sin0 + c (theta - theta0) = val at theta_hi
            let theta_hi = if l.slope > 0.0 {
                l.theta0 + (val - l.sin0) / l.slope
            } else {
                f64::NEG_INFINITY
            };
            let theta = (theta_hi - (1e-6f64).max(1e-4 * theta_hi.abs())).min(90.0 - 1e-3);
            if !(theta > 0.0) {
                links_ok = false;
                break;
            }
            x[l.theta] = theta;
            let bound = l.coeffs.r_hat_lb(&qn, theta, &prob.env);
            if !(bound > 0.0) {
                links_ok = false;
                break;
            }
            x[l.t] = 0.9 * bound;
        }
        if !links_ok {
            continue;
        }
        // rho covers the worst shortfall with a margin
        let total: f64 = prob.delta.iter().map(|d| d.val(&x)).sum();
        let mut worst: f64 = 0.0;
        for held in &prob.held {
            let mut lhs = 0.0;
            for &n in held {
                let l = prob.links[n].as_ref().expect("held slot has a link");
                lhs += 2.0 * l.mu * x[l.t].sqrt() - l.mu * l.mu / prob.delta[n].val(&x);
            }
            worst = worst.max(prob.env.r_min * total - lhs);
        }
        x[prob.rho] = worst + (1e-3 * prob.env.r_min * total).max(1e-6);
        if prob.eval(&x, &mut slacks, None) {
            return Ok(x);
        }
    }
    Err(PlanError::domain(
        "no strictly feasible start for the trajectory subproblem around the anchor",
    ))
}
