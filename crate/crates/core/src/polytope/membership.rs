use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::LocalPolytope;
use crate::quantum::BehaviorTable;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    /// Smallest L1 distance from the behavior to any vertex mixture.
    pub l1_residual: f64,
    pub member: bool,
}

/// LP feasibility of `sum_v mu_v V_v = P` with `mu` in the simplex, solved
/// as `min ||sum_v mu_v V_v - P||_1`.
pub fn lp_membership<T: Real>(p: &BehaviorTable<T>, polytope: &LocalPolytope<T>, tol: f64) -> Result<Membership> {
    polytope.scenario().require(p.scenario())?;
    let cells = p.scenario().cells();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mu: Vec<_> = (0..polytope.len()).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let slack_up: Vec<_> = (0..cells).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let slack_down: Vec<_> = (0..cells).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let mut rows: Vec<Vec<(minilp::Variable, f64)>> = (0..cells)
        .map(|z| vec![(slack_up[z], 1.0), (slack_down[z], -1.0)])
        .collect();
    for (v, var) in mu.iter().enumerate() {
        for z in polytope.support(v) {
            rows[z].push((*var, 1.0));
        }
    }
    for (z, row) in rows.iter().enumerate() {
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, p.probs()[z].as_f64());
    }
    let simplex: Vec<_> = mu.iter().map(|v| (*v, 1.0)).collect();
    lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
    let solution = lp
        .solve()
        .map_err(|e| Error::InvalidBehavior(format!("membership LP failed: {e}")))?;
    let l1_residual = solution.objective().max(0.0);
    Ok(Membership {
        l1_residual,
        member: l1_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::enumerate_vertices;
    use crate::quantum::Scenario;

    #[test]
    fn vertex_and_uniform_are_members() {
        let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
        let v = &poly.vertices()[5];
        assert!(lp_membership(v, &poly, 1e-9).unwrap().member);
        let u = BehaviorTable::uniform(Scenario::CHSH);
        assert!(lp_membership(&u, &poly, 1e-9).unwrap().member);
    }

    #[test]
    fn pr_box_is_not() {
        let pr = crate::nlb::pr_box_behavior::<f64>();
        let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
        let m = lp_membership(&pr, &poly, 1e-9).unwrap();
        assert!(!m.member);
        assert!(m.l1_residual > 0.1);
    }
}
