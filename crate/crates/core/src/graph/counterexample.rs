//! The five-block graph on which iterativity hurts the strong adversary.
//!
//! Layout on `0..n`: `I`, `J`, `O`, `P` are cliques placed in that order,
//! followed by the independent set `D`. `O` is adjacent to every vertex outside
//! `D`. The pairs `(I, J)`, `(I, P)`, `(J, P)` are bipartite blocks, either
//! Bernoulli random or derandomized by wraparound intervals. Every `D`-vertex
//! hangs off a distinct `J`-vertex.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::{Block, BlockLayout, Graph, GraphError, GraphMode, Part, PartKind};

/// Relative slack under which two sides of a strict inequality count as equal.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Round half up, tolerant of representation error just below a half.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5 + 1e-9 * x.abs().max(1.0)).floor() as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub mu: f64,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub d: f64,
}

impl CounterexampleParams {
    pub fn new(mu: f64, delta: f64, eps1: f64, eps2: f64, d: f64) -> Self {
        Self {
            mu,
            delta,
            eps1,
            eps2,
            d,
        }
    }

    /// `(1/2 - δ) / (1/2 + δ)`, the edge density that would balance `I` against `O`.
    pub fn balance_ratio(&self) -> f64 {
        (0.5 - self.delta) / (0.5 + self.delta)
    }

    pub fn p_ij(&self) -> f64 {
        self.balance_ratio() + self.eps1
    }

    pub fn p_jp(&self) -> f64 {
        self.p_ij()
    }

    pub fn p_ip(&self) -> f64 {
        self.balance_ratio() - self.eps2
    }

    /// Edge probability of the bipartite block between `a` and `b`, if any.
    pub fn cross_probability(&self, a: Block, b: Block) -> Option<f64> {
        use Block::*;
        match (a.min(b), a.max(b)) {
            (I, J) => Some(self.p_ij()),
            (J, P) => Some(self.p_jp()),
            (I, P) => Some(self.p_ip()),
            _ => None,
        }
    }
}

/// One violated strict inequality `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn require_less(&mut self, constraint: &str, lhs: f64, rhs: f64) {
        let scale = lhs.abs().max(rhs.abs());
        let strictly_less = lhs < rhs && rhs - lhs > BOUNDARY_TOLERANCE * scale;
        if !strictly_less || !lhs.is_finite() || !rhs.is_finite() {
            self.violations.push(Violation {
                constraint: constraint.to_string(),
                lhs,
                rhs,
            });
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(
                f,
                "violated: {}  (lhs = {:.6e}, rhs = {:.6e})",
                v.constraint, v.lhs, v.rhs
            )?;
        }
        Ok(())
    }
}

/// Checks every strict inequality the robustness argument relies on.
/// Equality at a boundary is reported as a violation.
pub fn validate_params(params: &CounterexampleParams) -> ValidationReport {
    let CounterexampleParams {
        mu,
        delta,
        eps1,
        eps2,
        d,
    } = *params;
    let mut report = ValidationReport::default();
    report.require_less("μ > 0", 0.0, mu);
    report.require_less("μ < 1/2", mu, 0.5);
    report.require_less("δ > 1/6", 1.0 / 6.0, delta);
    report.require_less("δ < 1/2", delta, 0.5);
    report.require_less("ε₁ > 0", 0.0, eps1);
    report.require_less("ε₂ > 0", 0.0, eps2);
    report.require_less("d > 0", 0.0, d);

    let half_plus = 0.5 + delta;
    let slack = 4.0 * delta / half_plus - 1.0;
    report.require_less("ε₁ < δμ/2", eps1, delta * mu / 2.0);
    report.require_less("ε₁ < 4δ/(1/2+δ) − 1", eps1, slack);
    report.require_less("d < ε₁δ/(1/2+δ)", d, eps1 * delta / half_plus);
    report.require_less("d < ε₁δμ/4", d, eps1 * delta * mu / 4.0);
    report.require_less("d < (1−μ−2δμ)/3", d, (1.0 - mu - 2.0 * delta * mu) / 3.0);
    report.require_less(
        "ε₂ < (d/6)(4δ/(1/2+δ) − 1 − ε₁)",
        eps2,
        d / 6.0 * (slack - eps1),
    );
    report.require_less("ε₂ < (1/2−δ)/(1+2δ)", eps2, (0.5 - delta) / (1.0 + 2.0 * delta));
    report.require_less("ε₁ < 2δ/(1/2+δ)", eps1, 2.0 * delta / half_plus);
    report.require_less("ε₂ < (1/2−δ)/(1/2+δ)", eps2, (0.5 - delta) / half_plus);
    report
}

/// Vertex counts of the five blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSizes {
    pub i: usize,
    pub j: usize,
    pub o: usize,
    pub p: usize,
    pub d: usize,
}

impl BlockSizes {
    pub fn get(&self, block: Block) -> usize {
        match block {
            Block::I => self.i,
            Block::J => self.j,
            Block::O => self.o,
            Block::P => self.p,
            Block::D => self.d,
        }
    }

    pub fn total(&self) -> usize {
        self.i + self.j + self.o + self.p + self.d
    }
}

/// Resolves block sizes for `n` vertices.
///
/// `|I| = round(μ(1/2+δ)n)` and `|O| = round(μn) − |I|`, so the two expert
/// blocks always add up to the strong adversary's expert count. `|D| =
/// round(dn)`, moved by one toward `dn` if needed to make `n − |D|` even.
pub fn resolve_sizes(params: &CounterexampleParams, n: usize) -> Result<BlockSizes, GraphError> {
    if n == 0 {
        return Err(GraphError::InfeasibleSizes("graph has no vertices".into()));
    }
    let nf = n as f64;
    let experts = round_half_up(params.mu * nf);
    let i = round_half_up(params.mu * (0.5 + params.delta) * nf);
    let o = experts - i;

    let exact_d = params.d * nf;
    let mut d = round_half_up(exact_d);
    if (n as i64 - d) % 2 != 0 {
        let down = d - 1;
        let up = d + 1;
        d = if down >= 0 && (exact_d - down as f64) < (up as f64 - exact_d) {
            down
        } else {
            up
        };
    }
    let half = (n as i64 - d) / 2;
    let j = half - i;
    let p = half - o;

    let all = [("I", i), ("J", j), ("O", o), ("P", p), ("D", d)];
    if let Some((name, s)) = all.iter().find(|(_, s)| *s < 0) {
        return Err(GraphError::InfeasibleSizes(format!(
            "block {name} would have {s} vertices at n = {n}"
        )));
    }
    if d > j {
        return Err(GraphError::InfeasibleSizes(format!(
            "|D| = {d} exceeds |J| = {j}; D-vertices need distinct J-neighbors"
        )));
    }
    Ok(BlockSizes {
        i: i as usize,
        j: j as usize,
        o: o as usize,
        p: p as usize,
        d: d as usize,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionMode {
    /// Independent Bernoulli edges in each bipartite block.
    Random,
    /// Wraparound-interval blocks with degrees equal to the rounded expectation.
    Regular,
}

pub fn generate_counterexample(
    params: &CounterexampleParams,
    n: usize,
    mode: ConstructionMode,
    seed: u64,
) -> Result<Graph, GraphError> {
    let sizes = resolve_sizes(params, n)?;
    let layout = BlockLayout::new(sizes);
    let mut edges: Vec<(u32, u32)> = Vec::new();

    // (exact-degree side, other side, probability)
    let blocks = [
        (Block::J, Block::I, params.p_ij()),
        (Block::P, Block::I, params.p_ip()),
        (Block::J, Block::P, params.p_jp()),
    ];
    for p in blocks.iter().map(|b| b.2) {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidProbability(p));
        }
    }

    let graph_mode = match mode {
        ConstructionMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &(a, b, p) in &blocks {
                random_bipartite(&layout, a, b, p, &mut rng, &mut edges);
            }
            GraphMode::Random
        }
        ConstructionMode::Regular => {
            for &(a, b, p) in &blocks {
                interval_bipartite(&layout, a, b, p, &mut edges);
            }
            GraphMode::Regular
        }
    };

    let j_start = layout.range(Block::J).start;
    for (k, v) in layout.range(Block::D).enumerate() {
        edges.push((v as u32, (j_start + k) as u32));
    }

    Ok(Graph::with_layout(n, Some(layout), &edges, graph_mode).with_parts(vec![Part {
        kind: PartKind::Counterexample,
        range: 0..n,
    }]))
}

fn random_bipartite(
    layout: &BlockLayout,
    a: Block,
    b: Block,
    p: f64,
    rng: &mut ChaCha8Rng,
    edges: &mut Vec<(u32, u32)>,
) {
    let ra = layout.range(a);
    let rb = layout.range(b);
    let width = rb.len() as u64;
    let total = ra.len() as u64 * width;
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for u in ra {
            for v in rb.clone() {
                edges.push((u as u32, v as u32));
            }
        }
        return;
    }
    // Skip over non-edges: gaps between successive successes are geometric.
    let gaps = Geometric::new(p).expect("p in (0, 1)");
    let mut t = gaps.sample(rng);
    while t < total {
        let u = ra.start + (t / width) as usize;
        let v = rb.start + (t % width) as usize;
        edges.push((u as u32, v as u32));
        t = t.saturating_add(1).saturating_add(gaps.sample(rng));
    }
}

/// Vertex `i` of `a` is joined to `round(p|b|)` consecutive vertices of `b`
/// starting at `ceil(i |b| / |a|)`, wrapping around.
fn interval_bipartite(layout: &BlockLayout, a: Block, b: Block, p: f64, edges: &mut Vec<(u32, u32)>) {
    let ra = layout.range(a);
    let rb = layout.range(b);
    let (na, nb) = (ra.len() as u64, rb.len() as u64);
    if na == 0 || nb == 0 {
        return;
    }
    let k = (round_half_up(p * nb as f64).max(0) as u64).min(nb);
    edges.reserve((na * k) as usize);
    for i in 0..na {
        let start = (i * nb).div_ceil(na);
        let u = (ra.start as u64 + i) as u32;
        for t in 0..k {
            let v = rb.start as u64 + (start + t) % nb;
            edges.push((u, v as u32));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_star() -> CounterexampleParams {
        CounterexampleParams::new(0.4, 0.45, 0.089, 5e-4, 0.004)
    }

    fn names(r: &ValidationReport) -> Vec<&str> {
        r.violations.iter().map(|v| v.constraint.as_str()).collect()
    }

    #[test]
    fn p_star_is_valid() {
        let r = validate_params(&p_star());
        assert!(r.is_ok(), "{r}");
        // the tightest margin: d against ε₁δμ/4 = 0.004005
        assert!((0.089 * 0.45 * 0.4 / 4.0 - 0.004005f64).abs() < 1e-15);
    }

    #[test]
    fn quoted_values_sit_on_the_d_boundary() {
        let r = validate_params(&CounterexampleParams::new(0.2, 0.2, 1e-2, 1e-6, 1e-4));
        assert_eq!(names(&r), vec!["d < ε₁δμ/4"]);
        assert!((r.violations[0].rhs - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn eps1_too_large() {
        let r = validate_params(&CounterexampleParams::new(0.2, 0.2, 0.03, 1e-7, 1e-5));
        assert_eq!(names(&r), vec!["ε₁ < δμ/2"]);
    }

    #[test]
    fn range_violations_are_named() {
        let r = validate_params(&CounterexampleParams::new(0.6, 0.1, 0.01, 1e-6, 1e-4));
        let n = names(&r);
        assert!(n.contains(&"μ < 1/2"));
        assert!(n.contains(&"δ > 1/6"));
        let r = validate_params(&CounterexampleParams::new(f64::NAN, 0.3, 0.01, 1e-6, 1e-4));
        assert!(!r.is_ok());
    }

    #[test]
    fn derived_probabilities() {
        let p = p_star();
        assert!((p.balance_ratio() - 0.05 / 0.95).abs() < 1e-15);
        assert!((p.p_ij() - (0.05 / 0.95 + 0.089)).abs() < 1e-15);
        assert_eq!(p.p_ij(), p.p_jp());
        assert_eq!(p.cross_probability(Block::P, Block::I), Some(p.p_ip()));
        assert_eq!(p.cross_probability(Block::O, Block::I), None);
    }

    #[test]
    fn sizes_p_star() {
        let s = resolve_sizes(&p_star(), 20_000).unwrap();
        assert_eq!(
            s,
            BlockSizes {
                i: 7600,
                j: 2360,
                o: 400,
                p: 9560,
                d: 80
            }
        );
    }

    #[test]
    fn sizes_quoted_values() {
        let params = CounterexampleParams::new(0.2, 0.2, 1e-2, 1e-6, 1e-4);
        let s = resolve_sizes(&params, 100_000).unwrap();
        assert_eq!(
            s,
            BlockSizes {
                i: 14000,
                j: 35995,
                o: 6000,
                p: 43995,
                d: 10
            }
        );
    }

    #[test]
    fn sizes_empty_graph_is_infeasible() {
        assert!(matches!(
            resolve_sizes(&p_star(), 0),
            Err(GraphError::InfeasibleSizes(_))
        ));
    }

    #[test]
    fn sizes_parity_adjustment() {
        // dn = 80.4 at n = 20101 -> 80, n - 80 odd, 81 is closer than 79
        let s = resolve_sizes(&p_star(), 20_101).unwrap();
        assert_eq!(s.d, 81);
        assert_eq!((s.total() - s.d) % 2, 0);
        assert_eq!(s.total(), 20_101);
    }

    #[test]
    fn d_larger_than_j_is_infeasible() {
        let params = CounterexampleParams::new(0.49, 0.45, 0.01, 1e-6, 0.3);
        assert!(matches!(
            resolve_sizes(&params, 1000),
            Err(GraphError::InfeasibleSizes(_))
        ));
    }

    #[test]
    fn regular_mode_small_instance() {
        let g = generate_counterexample(&p_star(), 2000, ConstructionMode::Regular, 0).unwrap();
        g.check_invariants().unwrap();
        let l = g.layout().unwrap();
        let s = *l.sizes();
        let k_pi = round_half_up(p_star().p_ip() * s.i as f64) as usize;
        for v in l.range(Block::P) {
            assert_eq!(g.degree_into(v, l.range(Block::I)), k_pi);
        }
        for v in l.range(Block::O) {
            assert_eq!(g.degree(v), 2000 - s.d - 1);
        }
    }

    #[test]
    fn random_mode_is_seed_deterministic() {
        let a = generate_counterexample(&p_star(), 3000, ConstructionMode::Random, 11).unwrap();
        let b = generate_counterexample(&p_star(), 3000, ConstructionMode::Random, 11).unwrap();
        let c = generate_counterexample(&p_star(), 3000, ConstructionMode::Random, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        a.check_invariants().unwrap();
    }
}
