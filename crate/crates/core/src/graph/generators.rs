use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::{Graph, GraphError, GraphMode, Part, PartKind};

/// Random-regular generation gives up after this many restarts.
const MAX_REGULAR_RESTARTS: usize = 1000;

fn single_part(g: Graph, kind: PartKind) -> Graph {
    let n = g.n();
    g.with_parts(vec![Part { kind, range: 0..n }])
}

/// `G(n, p)`: every unordered pair is an edge independently with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut edges = Vec::new();
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                edges.push((v as u32, w as u32));
            }
        }
    } else if p > 0.0 {
        // Batagelj-Brandes skipping over the lower triangle.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaps = Geometric::new(p).expect("p in (0, 1)");
        let (mut v, mut w) = (1u64, 0u64);
        w += gaps.sample(&mut rng);
        let n = n as u64;
        loop {
            while v < n && w >= v {
                w -= v;
                v += 1;
            }
            if v >= n {
                break;
            }
            edges.push((v as u32, w as u32));
            w += 1 + gaps.sample(&mut rng);
        }
    }
    Ok(single_part(
        Graph::from_edges(n, &edges, GraphMode::Random),
        PartKind::Er,
    ))
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn generate_line(n: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..n).map(|v| (v as u32 - 1, v as u32)).collect();
    single_part(
        Graph::from_edges(n, &edges, GraphMode::Explicit),
        PartKind::Line,
    )
}

/// Star with center `0` and leaves `1..=leaves`.
pub fn generate_star(leaves: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..=leaves).map(|v| (0, v as u32)).collect();
    single_part(
        Graph::from_edges(leaves + 1, &edges, GraphMode::Explicit),
        PartKind::Star,
    )
}

pub fn generate_complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for v in 1..n {
        for w in 0..v {
            edges.push((w as u32, v as u32));
        }
    }
    single_part(
        Graph::from_edges(n, &edges, GraphMode::Explicit),
        PartKind::Complete,
    )
}

/// Uniform-ish simple `deg`-regular graph via the pairing model.
///
/// Stubs are paired one random pair at a time, rejecting pairs that would form
/// a loop or a multi-edge; when the remaining stubs admit no valid pair the
/// pairing restarts from scratch.
pub fn generate_random_regular(n: usize, deg: usize, seed: u64) -> Result<Graph, GraphError> {
    if !(n * deg).is_multiple_of(2) {
        return Err(GraphError::Infeasible(format!(
            "n·deg = {n}·{deg} is odd"
        )));
    }
    if deg > 0 && deg >= n {
        return Err(GraphError::Infeasible(format!(
            "degree {deg} needs more than {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REGULAR_RESTARTS {
        if let Some(edges) = try_pairing(n, deg, &mut rng) {
            return Ok(single_part(
                Graph::from_edges(n, &edges, GraphMode::Random),
                PartKind::Regular,
            ));
        }
    }
    Err(GraphError::Infeasible(format!(
        "no simple {deg}-regular pairing on {n} vertices after {MAX_REGULAR_RESTARTS} restarts"
    )))
}

fn try_pairing(n: usize, deg: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(u32, u32)>> {
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, deg))
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(deg); n];
    let mut edges = Vec::with_capacity(n * deg / 2);
    let valid = |adj: &Vec<Vec<u32>>, u: u32, v: u32| u != v && !adj[u as usize].contains(&v);

    while !stubs.is_empty() {
        let mut found = None;
        for _ in 0..64 {
            let a = rng.random_range(0..stubs.len());
            let b = rng.random_range(0..stubs.len());
            if a != b && valid(&adj, stubs[a], stubs[b]) {
                found = Some((a, b));
                break;
            }
        }
        if found.is_none() {
            let candidates: Vec<(usize, usize)> = (0..stubs.len())
                .flat_map(|a| (a + 1..stubs.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| valid(&adj, stubs[a], stubs[b]))
                .collect();
            if candidates.is_empty() {
                return None;
            }
            found = Some(candidates[rng.random_range(0..candidates.len())]);
        }
        let (a, b) = found.expect("pair chosen");
        let (u, v) = (stubs[a], stubs[b]);
        adj[u as usize].push(v);
        adj[v as usize].push(u);
        edges.push((u, v));
        // remove the higher index first so the lower one stays valid
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    Some(edges)
}

/// Places `g2` after `g1` with no edges between them.
///
/// Implicit block adjacency of either input is materialized; the result is an
/// explicit graph that keeps the parts of both inputs.
pub fn disjoint_union(g1: &Graph, g2: &Graph) -> Graph {
    if g2.n() == 0 {
        return g1.clone();
    }
    if g1.n() == 0 {
        return g2.clone();
    }
    let offset = g1.n();
    let mut edges = Vec::new();
    for (g, shift) in [(g1, 0usize), (g2, offset)] {
        for (u, v) in g.edges() {
            edges.push(((u + shift) as u32, (v + shift) as u32));
        }
    }
    let mode = if g1.mode() == GraphMode::Random || g2.mode() == GraphMode::Random {
        GraphMode::Random
    } else {
        GraphMode::Explicit
    };
    let mut parts: Vec<Part> = g1.parts().to_vec();
    parts.extend(g2.parts().iter().map(|p| Part {
        kind: p.kind,
        range: p.range.start + offset..p.range.end + offset,
    }));
    Graph::from_edges(offset + g2.n(), &edges, mode).with_parts(parts)
}
