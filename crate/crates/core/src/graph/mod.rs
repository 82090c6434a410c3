//! Block-aware undirected graphs.
//!
//! A [`Graph`] stores explicit edges in a compressed sparse row layout. Graphs
//! built by the five-block construction additionally carry a [`BlockLayout`]:
//! clique blocks and the "adjacent to everything except `D`" block are never
//! materialized, adjacency inside them is answered by index arithmetic.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod counterexample;
mod generators;
mod io;
mod spec;

pub use counterexample::{
    generate_counterexample, resolve_sizes, round_half_up, validate_params, BlockSizes,
    ConstructionMode, CounterexampleParams, ValidationReport, Violation,
};
pub use generators::{
    disjoint_union, generate_complete, generate_er, generate_line, generate_random_regular,
    generate_star,
};
pub use io::{write_edge_list, EDGE_LIST_MAX_VERTICES};
pub use spec::GraphSpec;

/// Vertex counts above which invariant checks sample instead of scanning.
pub const FULL_SCAN_LIMIT: usize = 10_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("infeasible block sizes: {0}")]
    InfeasibleSizes(String),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("invalid counterexample parameters: {0}")]
    InvalidParams(String),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("graph invariant violated: {0}")]
    Invariant(String),
    #[error("edge list export is limited to {limit} vertices, graph has {n}")]
    ExportTooLarge { n: usize, limit: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// The five vertex classes of the counterexample construction, in layout order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    I,
    J,
    O,
    P,
    D,
}

impl Block {
    pub const ALL: [Block; 5] = [Block::I, Block::J, Block::O, Block::P, Block::D];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Blocks whose every vertex is adjacent to every (other) vertex of `self`.
    pub fn implicit_neighbors(self) -> &'static [Block] {
        match self {
            Block::I => &[Block::I, Block::O],
            Block::J => &[Block::J, Block::O],
            Block::O => &[Block::I, Block::J, Block::O, Block::P],
            Block::P => &[Block::P, Block::O],
            Block::D => &[],
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Block::I => "I",
            Block::J => "J",
            Block::O => "O",
            Block::P => "P",
            Block::D => "D",
        };
        f.write_str(s)
    }
}

/// Contiguous placement of the blocks `I, J, O, P, D` on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    sizes: BlockSizes,
    bounds: [usize; 6],
}

impl BlockLayout {
    pub fn new(sizes: BlockSizes) -> Self {
        let mut bounds = [0usize; 6];
        for b in Block::ALL {
            bounds[b.index() + 1] = bounds[b.index()] + sizes.get(b);
        }
        Self { sizes, bounds }
    }

    pub fn sizes(&self) -> &BlockSizes {
        &self.sizes
    }

    pub fn range(&self, block: Block) -> Range<usize> {
        self.bounds[block.index()]..self.bounds[block.index() + 1]
    }

    pub fn block_of(&self, v: usize) -> Block {
        debug_assert!(v < self.bounds[5]);
        // bounds is sorted; the last block start <= v wins.
        let idx = self.bounds[1..5].iter().take_while(|&&b| b <= v).count();
        Block::ALL[idx]
    }

    fn total(&self) -> usize {
        self.bounds[5]
    }
}

/// How the random parts of a graph were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// Sampled from a seeded random model.
    Random,
    /// Counterexample with derandomized bipartite blocks.
    Regular,
    /// Deterministic explicit construction.
    Explicit,
}

/// Generator that produced a contiguous vertex range; kept through unions so
/// placement strategies can find e.g. the star center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartKind {
    Line,
    Star,
    Complete,
    Regular,
    Er,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub kind: PartKind,
    pub range: Range<usize>,
}

/// Immutable undirected simple graph.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    mode: GraphMode,
    layout: Option<BlockLayout>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    parts: Vec<Part>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Duplicate edges are merged.
    pub(crate) fn from_edges(n: usize, edges: &[(u32, u32)], mode: GraphMode) -> Self {
        Self::with_layout(n, None, edges, mode)
    }

    pub(crate) fn with_layout(
        n: usize,
        layout: Option<BlockLayout>,
        edges: &[(u32, u32)],
        mode: GraphMode,
    ) -> Self {
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 index space");
        if let Some(l) = &layout {
            assert_eq!(l.total(), n);
        }
        let mut degree = vec![0usize; n + 1];
        for &(u, v) in edges {
            debug_assert_ne!(u, v, "self-loop");
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree[..n] {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; acc];
        for &(u, v) in edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        let mut g = Self {
            n,
            mode,
            layout,
            offsets,
            targets,
            parts: Vec::new(),
        };
        g.sort_and_dedup();
        g
    }

    fn sort_and_dedup(&mut self) {
        let mut compact = Vec::with_capacity(self.targets.len());
        let mut offsets = Vec::with_capacity(self.n + 1);
        offsets.push(0);
        for v in 0..self.n {
            let list = &mut self.targets[self.offsets[v]..self.offsets[v + 1]];
            list.sort_unstable();
            let mut last = None;
            for &u in list.iter() {
                if last != Some(u) {
                    compact.push(u);
                    last = Some(u);
                }
            }
            offsets.push(compact.len());
        }
        self.targets = compact;
        self.offsets = offsets;
    }

    pub(crate) fn with_parts(mut self, parts: Vec<Part>) -> Self {
        self.parts = parts;
        self
    }

    pub fn empty() -> Self {
        Self::from_edges(0, &[], GraphMode::Explicit)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn layout(&self) -> Option<&BlockLayout> {
        self.layout.as_ref()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn block_of(&self, v: usize) -> Option<Block> {
        self.layout.as_ref().map(|l| l.block_of(v))
    }

    /// Whole blocks adjacent to `v` without being stored (its own clique
    /// included; `v` itself is never a neighbor).
    pub fn implicit_blocks(&self, v: usize) -> &'static [Block] {
        match &self.layout {
            Some(l) => l.block_of(v).implicit_neighbors(),
            None => &[],
        }
    }

    /// Materialized neighbors of `v`, sorted ascending.
    pub fn explicit_neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let implicit = self.implicit_blocks(v).iter().flat_map(move |&b| {
            let range = self.layout.as_ref().map(|l| l.range(b)).unwrap_or(0..0);
            range.filter(move |&u| u != v)
        });
        implicit.chain(self.explicit_neighbors(v).iter().map(|&u| u as usize))
    }

    pub fn degree(&self, v: usize) -> usize {
        let implicit: usize = match &self.layout {
            Some(l) => self
                .implicit_blocks(v)
                .iter()
                .map(|&b| l.sizes.get(b))
                .sum::<usize>()
                .saturating_sub(if self.implicit_blocks(v).is_empty() { 0 } else { 1 }),
            None => 0,
        };
        implicit + self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v || u >= self.n || v >= self.n {
            return false;
        }
        if let Some(l) = &self.layout {
            if l.block_of(u).implicit_neighbors().contains(&l.block_of(v)) {
                return true;
            }
        }
        self.explicit_neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn explicit_edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn edge_count(&self) -> usize {
        let implicit = match &self.layout {
            Some(l) => {
                let s = &l.sizes;
                let pairs = |k: usize| k * k.saturating_sub(1) / 2;
                pairs(s.i) + pairs(s.j) + pairs(s.o) + pairs(s.p) + s.o * (s.i + s.j + s.p)
            }
            None => 0,
        };
        implicit + self.explicit_edge_count()
    }

    /// Neighbors of `v` inside `range`, counted without materializing cliques.
    pub fn degree_into(&self, v: usize, range: Range<usize>) -> usize {
        let mut count = 0;
        if let Some(l) = &self.layout {
            for &b in self.implicit_blocks(v) {
                let r = l.range(b);
                let lo = r.start.max(range.start);
                let hi = r.end.min(range.end);
                if lo < hi {
                    count += hi - lo;
                    if (lo..hi).contains(&v) {
                        count -= 1;
                    }
                }
            }
        }
        let list = self.explicit_neighbors(v);
        let lo = list.partition_point(|&u| (u as usize) < range.start);
        let hi = list.partition_point(|&u| (u as usize) < range.end);
        count + (hi - lo)
    }

    /// All edges `(u, v)` with `u < v`, sorted. Intended for small graphs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            let mut nb: Vec<usize> = self.neighbors(u).filter(|&v| v > u).collect();
            nb.sort_unstable();
            out.extend(nb.into_iter().map(|v| (u, v)));
        }
        out
    }

    /// Verifies symmetry, absence of self-loops, and the block invariants.
    ///
    /// Above [`FULL_SCAN_LIMIT`] vertices only an evenly strided sample of
    /// vertices is checked.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let stride = if self.n <= FULL_SCAN_LIMIT {
            1
        } else {
            self.n / 1000
        };
        for v in (0..self.n).step_by(stride.max(1)) {
            for &u in self.explicit_neighbors(v) {
                let u = u as usize;
                if u == v {
                    return Err(GraphError::Invariant(format!("self-loop at {v}")));
                }
                if self.explicit_neighbors(u).binary_search(&(v as u32)).is_err() {
                    return Err(GraphError::Invariant(format!("edge {v}->{u} not symmetric")));
                }
                if let Some(l) = &self.layout {
                    let (bv, bu) = (l.block_of(v), l.block_of(u));
                    if bv.implicit_neighbors().contains(&bu) {
                        return Err(GraphError::Invariant(format!(
                            "explicit edge {v}-{u} duplicates implicit {bv}-{bu} adjacency"
                        )));
                    }
                }
            }
        }
        if let Some(l) = &self.layout {
            let mut seen = std::collections::HashSet::new();
            let j = l.range(Block::J);
            for v in l.range(Block::D) {
                let nb = self.explicit_neighbors(v);
                if nb.len() != 1 || !j.contains(&(nb[0] as usize)) {
                    return Err(GraphError::Invariant(format!(
                        "D-vertex {v} must have exactly one neighbor in J"
                    )));
                }
                if !seen.insert(nb[0]) {
                    return Err(GraphError::Invariant(format!(
                        "D-vertices share neighbor {}",
                        nb[0]
                    )));
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.mode == other.mode
            && self.layout == other.layout
            && self.offsets == other.offsets
            && self.targets == other.targets
    }
}
