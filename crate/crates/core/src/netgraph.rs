//! Network geometry: random node layouts, the multicast routing tree, and
//! the interference-and-collision graph over its links.
//!
//! The routing tree is the Euclidean minimum spanning tree rooted at the
//! source node, with links directed away from the source (multicast flow
//! direction). Link pair classification follows the collision predicate:
//! two links collide when they share a transmitter or when the transmitter
//! of one is the receiver of the other; every other pair merely interferes.

use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("need at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("area side must be positive, got {0}")]
    BadAreaSide(f64),
    #[error("source index {index} out of range for {n_nodes} nodes")]
    BadSource { index: usize, n_nodes: usize },
    #[error("could not place {n_nodes} nodes with min separation {min_separation} in a {area_side} m square")]
    PlacementFailed { n_nodes: usize, area_side: f64, min_separation: f64 },
}

/// Node layout in a square area.
#[derive(Debug, Clone)]
pub struct Topology {
    pub positions: Vec<(f64, f64)>,
    pub area_side: f64,
    pub source: usize,
}

impl Topology {
    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (xa, ya) = self.positions[a];
        let (xb, yb) = self.positions[b];
        ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt()
    }
}

/// One directed link of the routing tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub id: usize,
    pub tx: usize,
    pub rx: usize,
    pub distance: f64,
}

/// Spanning tree rooted at the source, links directed away from it.
#[derive(Debug, Clone)]
pub struct RoutingTree {
    pub links: Vec<Link>,
    /// parent[node] = Some(parent node) for every non-source node.
    pub parent: Vec<Option<usize>>,
    pub source: usize,
}

impl RoutingTree {
    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn total_length(&self) -> f64 {
        self.links.iter().map(|l| l.distance).sum()
    }
}

/// Parameters for topology generation.
#[derive(Debug, Clone, Copy)]
pub struct TopologyParams {
    pub n_nodes: usize,
    pub area_side: f64,
    pub seed: u64,
    pub source: usize,
    /// Minimum pairwise node distance in meters; avoids unbounded path-loss
    /// gains from near-coincident nodes.
    pub min_separation: f64,
}

impl TopologyParams {
    pub fn new(n_nodes: usize, area_side: f64, seed: u64) -> Self {
        TopologyParams { n_nodes, area_side, seed, source: 0, min_separation: 0.5 }
    }
}

/// Draw node positions i.i.d. uniform over the square, re-drawing any point
/// that lands closer than the minimum separation to an earlier one.
pub fn generate_topology_with(params: &TopologyParams) -> Result<Topology, NetError> {
    if params.n_nodes < 2 {
        return Err(NetError::TooFewNodes(params.n_nodes));
    }
    if !(params.area_side > 0.0) {
        return Err(NetError::BadAreaSide(params.area_side));
    }
    if params.source >= params.n_nodes {
        return Err(NetError::BadSource { index: params.source, n_nodes: params.n_nodes });
    }
    let mut rng = Rng::from_stream(params.seed, &[0x544f_504f]);
    let mut positions: Vec<(f64, f64)> = Vec::with_capacity(params.n_nodes);
    let mut attempts = 0usize;
    while positions.len() < params.n_nodes {
        let p = (rng.next_range(params.area_side), rng.next_range(params.area_side));
        let ok = positions
            .iter()
            .all(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() >= params.min_separation);
        if ok {
            positions.push(p);
        }
        attempts += 1;
        if attempts > 100_000 {
            return Err(NetError::PlacementFailed {
                n_nodes: params.n_nodes,
                area_side: params.area_side,
                min_separation: params.min_separation,
            });
        }
    }
    Ok(Topology { positions, area_side: params.area_side, source: params.source })
}

/// Uniform layout with the default source (node 0) and 0.5 m separation.
pub fn generate_topology(n_nodes: usize, area_side: f64, seed: u64) -> Result<Topology, NetError> {
    generate_topology_with(&TopologyParams::new(n_nodes, area_side, seed))
}

/// Euclidean MST via Prim's construction, rooted at the source. Links are
/// numbered in breadth-first order from the source so ids are deterministic.
pub fn build_routing_tree(topology: &Topology) -> RoutingTree {
    let n = topology.n_nodes();
    let source = topology.source;
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    in_tree[source] = true;
    for v in 0..n {
        if v != source {
            best_dist[v] = topology.distance(source, v);
            best_from[v] = source;
        }
    }
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && (best_dist[v] < pick_d || (best_dist[v] == pick_d && v < pick)) {
                pick = v;
                pick_d = best_dist[v];
            }
        }
        in_tree[pick] = true;
        parent[pick] = Some(best_from[pick]);
        for v in 0..n {
            if !in_tree[v] {
                let d = topology.distance(pick, v);
                if d < best_dist[v] {
                    best_dist[v] = d;
                    best_from[v] = pick;
                }
            }
        }
    }

    // Children adjacency, then breadth-first link numbering from the source.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = parent[v] {
            children[p].push(v);
        }
    }
    for c in children.iter_mut() {
        c.sort_unstable();
    }
    let mut links = Vec::with_capacity(n - 1);
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &children[u] {
            links.push(Link { id: links.len(), tx: u, rx: v, distance: topology.distance(u, v) });
            queue.push_back(v);
        }
    }
    RoutingTree { links, parent, source }
}

/// Colliding / interfering classification of every unordered link pair.
#[derive(Debug, Clone)]
pub struct InterferenceCollisionGraph {
    n_links: usize,
    colliding: Vec<bool>,
}

impl InterferenceCollisionGraph {
    pub fn n_links(&self) -> usize {
        self.n_links
    }

    #[inline]
    pub fn is_colliding(&self, a: usize, b: usize) -> bool {
        a != b && self.colliding[a * self.n_links + b]
    }

    #[inline]
    pub fn is_interfering(&self, a: usize, b: usize) -> bool {
        a != b && !self.colliding[a * self.n_links + b]
    }

    /// Collision degree restricted to the links flagged in `active`
    /// (pass all-true for the full-graph degree).
    pub fn collision_degree(&self, k: usize, active: &[bool]) -> usize {
        (0..self.n_links)
            .filter(|&l| l != k && active[l] && self.is_colliding(k, l))
            .count()
    }

    pub fn max_collision_degree(&self, active: &[bool]) -> usize {
        (0..self.n_links)
            .filter(|&k| active[k])
            .map(|k| self.collision_degree(k, active))
            .max()
            .unwrap_or(0)
    }
}

/// Classify link pairs: colliding iff t_k = t_l, t_k = r_l or t_l = r_k.
/// Receivers are unique in a routing tree, so r_k = r_l never occurs.
pub fn build_icg(tree: &RoutingTree) -> InterferenceCollisionGraph {
    let n = tree.links.len();
    let mut colliding = vec![false; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let (la, lb) = (&tree.links[a], &tree.links[b]);
            let hit = la.tx == lb.tx || la.tx == lb.rx || lb.tx == la.rx;
            colliding[a * n + b] = hit;
            colliding[b * n + a] = hit;
        }
    }
    InterferenceCollisionGraph { n_links: n, colliding }
}

/// Channel gain g_k = sigma_1^2 / d^alpha.
pub fn channel_gain(sigma1_sq: f64, distance: f64, alpha: f64) -> f64 {
    assert!(distance > 0.0, "distance must be positive");
    sigma1_sq / distance.powf(alpha)
}

/// Plain-text table of node positions: `node x y` per line.
pub fn format_topology(topology: &Topology) -> String {
    let mut out = String::from("node\tx\ty\n");
    for (i, (x, y)) in topology.positions.iter().enumerate() {
        out.push_str(&format!("{i}\t{x:.8e}\t{y:.8e}\n"));
    }
    out
}

/// Plain-text table of links: `id tx rx distance` per line.
pub fn format_links(tree: &RoutingTree) -> String {
    let mut out = String::from("link\ttx\trx\tdistance\n");
    for l in &tree.links {
        out.push_str(&format!("{}\t{}\t{}\t{:.8e}\n", l.id, l.tx, l.rx, l.distance));
    }
    out
}
