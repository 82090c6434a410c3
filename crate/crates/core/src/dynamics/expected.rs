use serde::{Deserialize, Serialize};

use super::{DynamicsError, ExpertAssignment};
use crate::graph::{resolve_sizes, Block, CounterexampleParams, Graph};

/// Expert counts per block, indexed by [`Block::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounts {
    pub ones: [usize; 5],
    pub zeros: [usize; 5],
}

impl BlockCounts {
    pub fn from_assignment(graph: &Graph, assignment: &ExpertAssignment) -> Result<Self, DynamicsError> {
        let layout = graph.layout().ok_or(DynamicsError::NoLayout)?;
        assignment.validate(graph.n())?;
        let mut c = Self::default();
        for &v in &assignment.e1 {
            c.ones[layout.block_of(v).index()] += 1;
        }
        for &v in &assignment.e0 {
            c.zeros[layout.block_of(v).index()] += 1;
        }
        Ok(c)
    }

    pub fn ones_in(&self, b: Block) -> usize {
        self.ones[b.index()]
    }

    pub fn zeros_in(&self, b: Block) -> usize {
        self.zeros[b.index()]
    }

    fn diff(&self, b: Block) -> f64 {
        self.ones_in(b) as f64 - self.zeros_in(b) as f64
    }
}

/// Expected Δ of a non-expert vertex in `block` over the random bipartite
/// blocks: clique and `O` connections count fully, random blocks with their
/// edge probability. `D` is left out, which shifts the value by at most one.
pub fn expected_delta(
    block: Block,
    counts: &BlockCounts,
    params: &CounterexampleParams,
    n: usize,
) -> Result<f64, DynamicsError> {
    if block == Block::D {
        return Err(DynamicsError::UnsupportedBlock(block));
    }
    let sizes = resolve_sizes(params, n)?;
    for b in Block::ALL {
        let (c1, c0) = (counts.ones_in(b), counts.zeros_in(b));
        if c1 + c0 > sizes.get(b) {
            return Err(DynamicsError::InconsistentCounts(format!(
                "block {b} has {c1} + {c0} experts but only {} vertices",
                sizes.get(b)
            )));
        }
    }
    let implicit = block.implicit_neighbors();
    Ok(Block::ALL
        .iter()
        .map(|&b| {
            let w = if implicit.contains(&b) {
                1.0
            } else {
                params.cross_probability(block, b).unwrap_or(0.0)
            };
            w * counts.diff(b)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pstar() -> CounterexampleParams {
        CounterexampleParams::new(0.4, 0.45, 0.089, 5e-4, 0.004)
    }

    fn i_vs_o() -> BlockCounts {
        let mut c = BlockCounts::default();
        c.ones[Block::I.index()] = 7600;
        c.zeros[Block::O.index()] = 400;
        c
    }

    #[test]
    fn block_formulas_at_reference_point() {
        let p = pstar();
        let c = i_vs_o();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(expected_delta(Block::O, &c, &p, 20_000).unwrap(), 7200.0));
        assert!(close(expected_delta(Block::P, &c, &p, 20_000).unwrap(), -3.8));
        assert!(close(expected_delta(Block::J, &c, &p, 20_000).unwrap(), 676.4));
        assert!(close(expected_delta(Block::I, &c, &p, 20_000).unwrap(), 7200.0));
    }

    #[test]
    fn d_block_and_oversized_counts_rejected() {
        let p = pstar();
        assert!(matches!(
            expected_delta(Block::D, &i_vs_o(), &p, 20_000),
            Err(DynamicsError::UnsupportedBlock(Block::D))
        ));
        let mut c = i_vs_o();
        c.ones[Block::O.index()] = 1;
        assert!(matches!(
            expected_delta(Block::P, &c, &p, 20_000),
            Err(DynamicsError::InconsistentCounts(_))
        ));
    }
}
