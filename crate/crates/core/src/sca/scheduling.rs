//! SP1: the relaxed scheduling LP and its rounding.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{PlanError, Result};

/// Relaxed SP1 solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSchedule {
    /// K x N shares in [0, 1].
    pub schedule: Vec<Vec<f64>>,
    /// Rate slack (bps/Hz).
    pub slack: f64,
}

fn check_shapes(rates: &[Vec<f64>], slots: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(PlanError::dims("rate matrix has no GN rows"));
    }
    if rates.iter().any(|r| r.len() != slots.len()) {
        return Err(PlanError::dims(format!(
            "rate rows must have {} entries to match the slot vector",
            slots.len()
        )));
    }
    let total: f64 = slots.iter().sum();
    if !(total > 0.0) {
        return Err(PlanError::domain("total slot time must be positive"));
    }
    if rates.iter().flatten().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(PlanError::domain("per-slot rates must be finite and non-negative"));
    }
    Ok(total)
}

/// Minimizes `eta * rho` over relaxed schedules subject to the per-slot
/// exclusivity and the rate constraints `R_k >= r_min - rho`.
pub fn solve_scheduling_lp(rates: &[Vec<f64>], slots: &[f64], r_min: f64, eta: f64) -> Result<RelaxedSchedule> {
    let total = check_shapes(rates, slots)?;
    if !(eta > 0.0) {
        return Err(PlanError::domain("penalty weight must be positive"));
    }
    let (k_count, n_count) = (rates.len(), slots.len());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let rho = lp.add_var(eta, (0.0, f64::INFINITY));
    let vars: Vec<Vec<_>> = (0..k_count)
        .map(|_| (0..n_count).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    for n in 0..n_count {
        let row: Vec<_> = (0..k_count).map(|k| (vars[k][n], 1.0)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
    }
    for k in 0..k_count {
        let mut row: Vec<_> = (0..n_count)
            .filter(|&n| rates[k][n] * slots[n] > 0.0)
            .map(|n| (vars[k][n], rates[k][n] * slots[n] / total))
            .collect();
        row.push((rho, 1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, r_min);
    }
    let sol = lp
        .solve()
        .map_err(|e| PlanError::Solver(format!("scheduling LP failed: {e}")))?;
    let mut schedule: Vec<Vec<f64>> = vars
        .iter()
        .map(|row| row.iter().map(|v| sol[*v].clamp(0.0, 1.0)).collect())
        .collect();
    // The simplex tolerates small violations of the exclusivity rows.
    for n in 0..n_count {
        let sum: f64 = schedule.iter().map(|r| r[n]).sum();
        if sum > 1.0 {
            schedule.iter_mut().for_each(|r| r[n] /= sum);
        }
    }
    Ok(RelaxedSchedule {
        schedule,
        slack: sol[rho].max(0.0),
    })
}

/// Rounds each slot to its largest share when that share exceeds one half,
/// lowest GN index first on ties; slots whose shares are all below 1e-6 stay
/// idle.
pub fn round_schedule(relaxed: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k_count = relaxed.len();
    let n_count = relaxed.first().map_or(0, Vec::len);
    if relaxed.iter().any(|r| r.len() != n_count) {
        return Err(PlanError::dims("relaxed schedule rows differ in length"));
    }
    let mut out = vec![vec![0.0; n_count]; k_count];
    for n in 0..n_count {
        let sum: f64 = relaxed.iter().map(|r| r[n]).sum();
        if sum > 1.0 + 1e-9 {
            return Err(PlanError::domain(format!("slot {n} shares sum to {sum} > 1")));
        }
        let mut best: Option<(usize, f64)> = None;
        for (k, row) in relaxed.iter().enumerate() {
            if best.is_none_or(|(_, v)| row[n] > v) {
                best = Some((k, row[n]));
            }
        }
        if let Some((k, v)) = best {
            if v >= 0.5 {
                out[k][n] = 1.0;
            }
        }
    }
    Ok(out)
}

/// Smallest rho with `R_k >= r_min - rho` for a fixed schedule.
pub fn schedule_slack(schedule: &[Vec<f64>], rates: &[Vec<f64>], slots: &[f64], r_min: f64) -> Result<f64> {
    let total = check_shapes(rates, slots)?;
    if schedule.len() != rates.len() || schedule.iter().any(|r| r.len() != slots.len()) {
        return Err(PlanError::dims("schedule does not match the rate matrix"));
    }
    Ok(schedule
        .iter()
        .zip(rates)
        .map(|(s, r)| {
            let rate: f64 = s.iter().zip(r).zip(slots).map(|((s, r), d)| s * r * d).sum::<f64>() / total;
            r_min - rate
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_slot_meets_target() {
        let sol = solve_scheduling_lp(&[vec![3.0]], &[1.0], 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(sol.slack, 0.0, epsilon = 1e-12);
        assert!(sol.schedule[0][0] >= 2.0 / 3.0 - 1e-9);
        assert_eq!(round_schedule(&sol.schedule).unwrap(), vec![vec![1.0]]);
    }

    #[test]
    fn zero_rates_push_everything_into_slack() {
        let sol = solve_scheduling_lp(&[vec![0.0; 3], vec![0.0; 3]], &[1.0; 3], 2.4, 5.0).unwrap();
        assert_abs_diff_eq!(sol.slack, 2.4, epsilon = 1e-12);
    }

    /// Two-GN relaxation solved exactly: the rate frontier is traced by giving
    /// GN 1 the slots with the highest rate ratio first, splitting one slot.
    fn two_gn_frontier_slack(a: &[f64], b: &[f64], r_min: f64) -> f64 {
        let mut order: Vec<usize> = (0..a.len()).collect();
        order.sort_by(|&i, &j| (a[j] * b[i]).partial_cmp(&(a[i] * b[j])).unwrap());
        let mut best = f64::NEG_INFINITY;
        for (pos, &j) in order.iter().enumerate() {
            let head: f64 = order[..pos].iter().map(|&i| a[i]).sum();
            let tail: f64 = order[pos + 1..].iter().map(|&i| b[i]).sum();
            // rate1 = head + f a_j rises, rate2 = tail + (1 - f) b_j falls
            let mut cands = vec![0.0, 1.0];
            if a[j] + b[j] > 0.0 {
                cands.push(((tail + b[j] - head) / (a[j] + b[j])).clamp(0.0, 1.0));
            }
            for f in cands {
                best = best.max((head + f * a[j]).min(tail + (1.0 - f) * b[j]));
            }
        }
        (r_min - best).max(0.0)
    }

    #[test]
    fn lp_matches_exact_two_gn_oracle() {
        let rates = vec![vec![6.0, 1.0, 3.0], vec![2.0, 5.0, 4.0]];
        let slots = [1.0, 2.0, 0.5];
        let total: f64 = slots.iter().sum();
        let a: Vec<f64> = (0..3).map(|n| rates[0][n] * slots[n] / total).collect();
        let b: Vec<f64> = (0..3).map(|n| rates[1][n] * slots[n] / total).collect();
        for r_min in [1.0, 2.5, 3.2, 6.0] {
            let sol = solve_scheduling_lp(&rates, &slots, r_min, 1.0).unwrap();
            assert_abs_diff_eq!(sol.slack, two_gn_frontier_slack(&a, &b, r_min), epsilon = 1e-9);
            assert_abs_diff_eq!(schedule_slack(&sol.schedule, &rates, &slots, r_min).unwrap(), sol.slack, epsilon = 1e-9);
            let mut best_binary = f64::INFINITY;
            for code in 0..27usize {
                let mut s = vec![vec![0.0; 3]; 2];
                let mut c = code;
                for n in 0..3 {
                    match c % 3 {
                        1 => s[0][n] = 1.0,
                        2 => s[1][n] = 1.0,
                        _ => {}
                    }
                    c /= 3;
                }
                best_binary = best_binary.min(schedule_slack(&s, &rates, &slots, r_min).unwrap());
            }
            assert!(sol.slack <= best_binary + 1e-9);
        }
    }

    #[test]
    fn rounding_rules() {
        let bin = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(round_schedule(&bin).unwrap(), bin);
        let r = round_schedule(&[vec![0.6, 0.5, 1e-7], vec![0.4, 0.5, 1e-7]]).unwrap();
        assert_eq!(r, vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert!(round_schedule(&[vec![0.7], vec![0.7]]).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(solve_scheduling_lp(&[vec![1.0, 2.0]], &[1.0], 1.0, 1.0).is_err());
        assert!(solve_scheduling_lp(&[vec![1.0]], &[0.0], 1.0, 1.0).is_err());
    }
}
