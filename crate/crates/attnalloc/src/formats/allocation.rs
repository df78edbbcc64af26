use super::csv_writer;
use crate::Result;
use attnalloc_core::allocator::{AllocationProblem, AllocationResult};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Serialize)]
pub struct AllocationSummary {
    pub objective: f64,
    pub lagrange_multiplier: f64,
    pub budget: f64,
    pub floor: f64,
    pub allocated: f64,
    /// `|Σc − budget| / budget`.
    pub budget_residual: f64,
}

impl AllocationSummary {
    pub fn new(problem: &AllocationProblem, result: &AllocationResult) -> Self {
        let allocated: f64 = result.capacities.iter().sum();
        Self {
            objective: result.objective,
            lagrange_multiplier: result.lagrange_multiplier,
            budget: problem.budget(),
            floor: problem.floor(),
            allocated,
            budget_residual: (allocated - problem.budget()).abs() / problem.budget(),
        }
    }
}

/// CSV with header `object_id,weight,capacity_k`. `ids` defaults to positions.
pub fn write_allocation<W: Write>(
    w: W,
    ids: Option<&[usize]>,
    problem: &AllocationProblem,
    result: &AllocationResult,
) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["object_id", "weight", "capacity_k"])?;
    for (i, (weight, cap)) in problem.weights().iter().zip(&result.capacities).enumerate() {
        let id = ids.map_or(i, |ids| ids[i]);
        out.write_record([id.to_string(), weight.to_string(), cap.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_allocation_summary<W: Write>(mut w: W, summary: &AllocationSummary) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub const WEIGHTS_HEADER: [&str; 2] = ["object_id", "weight"];

/// Reads `object_id,weight` rows, keeping file order.
pub fn read_weights<R: std::io::Read>(r: R) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut reader = super::csv_reader(r);
    let rows = super::expect_header(&mut reader, &WEIGHTS_HEADER)?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for row in &rows {
        ids.push(super::field(row, 0, "object_id")?);
        weights.push(super::field(row, 1, "weight")?);
    }
    Ok((ids, weights))
}
