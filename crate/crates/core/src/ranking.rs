//! CMA-ME improvement ranking.

use crate::archive::{AddResult, AddStatus};

fn stage(status: AddStatus) -> u8 {
    match status {
        AddStatus::NewCell => 2,
        AddStatus::Improved => 1,
        AddStatus::Rejected => 0,
    }
}

/// Two-stage order, best first: new cells by objective, then improvements by
/// Δ, then rejected candidates by Δ. Ties keep batch order.
pub fn improvement_rank(results: &[AddResult]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&results[a], &results[b]);
        stage(rb.status)
            .cmp(&stage(ra.status))
            .then_with(|| rb.improvement.total_cmp(&ra.improvement))
    });
    order
}

/// Order by the single scalar `f + C` for new cells and Δ otherwise. For
/// `C` larger than twice the objective range this reproduces
/// [`improvement_rank`].
pub fn j2_rank_oracle(results: &[AddResult], c: f64) -> Vec<usize> {
    let value = |r: &AddResult| match r.status {
        AddStatus::NewCell => r.improvement + c,
        _ => r.improvement,
    };
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| value(&results[b]).total_cmp(&value(&results[a])));
    order
}
