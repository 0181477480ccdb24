//! Ballistic deposition on arbitrary substrate graphs.
//!
//! Rows here are heights above the ground (the ground is height 0).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lattice::DirectionSet;
use crate::simulator::{run_script, ThrowScript};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BdError {
    #[error("vertex {vertex} is outside 1..={n}")]
    UnknownVertex { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("value {0} is not a positive integer")]
    NonPositiveValue(i64),
    #[error("malformed layering: {0}")]
    MalformedLayering(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Undirected substrate graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl SubstrateGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, BdError> {
        let mut sets = vec![BTreeSet::new(); n + 1];
        for (u, v) in edges {
            for x in [u, v] {
                if x == 0 || x > n {
                    return Err(BdError::UnknownVertex { vertex: x, n });
                }
            }
            if u == v {
                return Err(BdError::SelfLoop(u));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        Ok(SubstrateGraph { n, adj: sets.into_iter().map(|s| s.into_iter().collect()).collect() })
    }

    /// The path `1 - 2 - ... - n`, i.e. the columns of a 1-DLA lattice.
    pub fn path(n: usize) -> Self {
        SubstrateGraph::new(n, (1..n).map(|v| (v, v + 1))).expect("path edges are valid")
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        u <= self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n).flat_map(move |u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    fn check(&self, v: usize) -> Result<(), BdError> {
        if v == 0 || v > self.n {
            Err(BdError::UnknownVertex { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Text format: a line `"n m"` followed by `m` lines `"u v"`.
pub fn parse_graph(text: &str) -> Result<SubstrateGraph, BdError> {
    let mut nums = text.split_whitespace().map(|t| t.parse::<usize>().map_err(|e| BdError::Parse(format!("{t:?}: {e}"))));
    let mut next = |what: &str| nums.next().unwrap_or_else(|| Err(BdError::Parse(format!("missing {what}"))));
    let n = next("vertex count")?;
    let m = next("edge count")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        edges.push((next("edge endpoint")?, next("edge endpoint")?));
    }
    if nums.next().is_some() {
        return Err(BdError::Parse("trailing tokens after the edge list".into()));
    }
    SubstrateGraph::new(n, edges)
}

impl fmt::Display for SubstrateGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<_> = self.edges().collect();
        writeln!(f, "{} {}", self.n, edges.len())?;
        for (u, v) in edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DropSequence {
    pub drops: Vec<usize>,
}

impl DropSequence {
    pub fn new(drops: Vec<usize>) -> Self {
        DropSequence { drops }
    }

    pub fn len(&self) -> usize {
        self.drops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drops.is_empty()
    }
}

impl fmt::Display for DropSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.drops.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn parse_sequence(text: &str) -> Result<DropSequence, BdError> {
    text.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| BdError::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(DropSequence::new)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BdSite {
    pub height: usize,
    pub vertex: usize,
}

impl BdSite {
    pub fn new(height: usize, vertex: usize) -> Self {
        BdSite { height, vertex }
    }
}

/// Parses `"h v"`.
pub fn parse_site(text: &str) -> Result<BdSite, BdError> {
    let nums: Vec<usize> = text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| BdError::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [h, v] if h >= 1 => Ok(BdSite::new(h, v)),
        [_, _] => Err(BdError::Parse("site height must be at least 1".into())),
        _ => Err(BdError::Parse(format!("site needs \"h v\", got {text:?}"))),
    }
}

fn check_drops(g: &SubstrateGraph, s: &DropSequence) -> Result<(), BdError> {
    s.drops.iter().try_for_each(|&v| g.check(v))
}

/// Direct simulation over per-vertex tops: a particle at `v` lands at
/// `max(t(v) + 1, max_{u ~ v} t(u))`.
pub fn bd_simulate(g: &SubstrateGraph, s: &DropSequence) -> Result<Vec<usize>, BdError> {
    check_drops(g, s)?;
    let mut top = vec![0usize; g.n + 1];
    Ok(s.drops
        .iter()
        .map(|&v| {
            let lateral = g.neighbors(v).iter().map(|&u| top[u]).max().unwrap_or(0);
            let row = (top[v] + 1).max(lateral);
            top[v] = row;
            row
        })
        .collect())
}

/// The triple `(V(p), num(p), pos(p))`, all 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleRecord {
    pub vertex: usize,
    pub num: usize,
    pub pos: usize,
}

impl ParticleRecord {
    pub fn new(vertex: usize, num: usize, pos: usize) -> Self {
        ParticleRecord { vertex, num, pos }
    }
}

impl fmt::Display for ParticleRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.vertex, self.num, self.pos)
    }
}

pub fn particle_records(s: &DropSequence) -> Vec<ParticleRecord> {
    let mut seen = std::collections::HashMap::new();
    s.drops
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = seen.entry(v).or_insert(0usize);
            *c += 1;
            ParticleRecord::new(v, *c, i + 1)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DagSource {
    Ground,
    /// Index into [`WeightedDepDag::particles`].
    Particle(usize),
}

/// The graph `G_S`. Edges of weight −∞ are absent; `incoming[q]` lists
/// every finite-weight edge into particle `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDepDag {
    pub particles: Vec<ParticleRecord>,
    pub incoming: Vec<Vec<(DagSource, u8)>>,
}

impl WeightedDepDag {
    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, from: DagSource, to: usize) -> Option<u8> {
        self.incoming[to].iter().find(|(src, _)| *src == from).map(|&(_, w)| w)
    }
}

pub fn build_dependency_dag(g: &SubstrateGraph, s: &DropSequence) -> Result<WeightedDepDag, BdError> {
    check_drops(g, s)?;
    let particles = particle_records(s);
    let incoming = (0..particles.len())
        .map(|q| {
            let vq = s.drops[q];
            let mut edges: Vec<(DagSource, u8)> = (0..q)
                .filter_map(|p| {
                    let vp = s.drops[p];
                    if vp == vq {
                        Some((DagSource::Particle(p), 1))
                    } else if g.is_adjacent(vp, vq) {
                        Some((DagSource::Particle(p), 0))
                    } else {
                        None
                    }
                })
                .collect();
            if edges.is_empty() {
                edges.push((DagSource::Ground, 1));
            }
            edges
        })
        .collect();
    Ok(WeightedDepDag { particles, incoming })
}

/// Longest path rows plus, for each particle, the predecessor achieving it.
fn longest_paths(dag: &WeightedDepDag) -> (Vec<usize>, Vec<DagSource>) {
    // Edges only go from earlier to later positions, so index order is topological.
    let mut rows = Vec::with_capacity(dag.particles.len());
    let mut best = Vec::with_capacity(dag.particles.len());
    for edges in &dag.incoming {
        let (src, w) = edges
            .iter()
            .map(|&(src, w)| {
                let base = match src {
                    DagSource::Ground => 0,
                    DagSource::Particle(p) => rows[p],
                };
                (src, base + w as usize)
            })
            .max_by_key(|&(_, w)| w)
            .expect("every particle has an incoming edge");
        rows.push(w);
        best.push(src);
    }
    (rows, best)
}

/// Maximum weight of a path from the ground to each particle.
pub fn longest_path_rows(dag: &WeightedDepDag) -> Vec<usize> {
    longest_paths(dag).0
}

pub fn bd_predict(g: &SubstrateGraph, s: &DropSequence, site: BdSite) -> Result<bool, BdError> {
    g.check(site.vertex)?;
    let dag = build_dependency_dag(g, s)?;
    let rows = longest_path_rows(&dag);
    Ok(dag.particles.iter().zip(&rows).any(|(p, &r)| p.vertex == site.vertex && r == site.height))
}

pub fn is_valid_particle(s: &DropSequence, p: &ParticleRecord) -> bool {
    if p.pos == 0 || p.pos > s.len() || s.drops[p.pos - 1] != p.vertex {
        return false;
    }
    s.drops[..p.pos].iter().filter(|&&v| v == p.vertex).count() == p.num
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightSource {
    Ground,
    Particle(ParticleRecord),
}

/// Decides `W(p, q) = w` by scanning the sequence, without building `G_S`.
pub fn weight(g: &SubstrateGraph, s: &DropSequence, p: WeightSource, q: &ParticleRecord, w: u8) -> bool {
    if q.pos == 0 || q.pos > s.len() {
        return false;
    }
    match p {
        WeightSource::Ground => {
            w == 1 && s.drops[..q.pos - 1].iter().all(|&v| v != q.vertex && !g.is_adjacent(v, q.vertex))
        }
        WeightSource::Particle(p) => match w {
            1 => p.pos < q.pos && p.vertex == q.vertex,
            0 => p.pos < q.pos && p.vertex != q.vertex && g.is_adjacent(p.vertex, q.vertex),
            _ => false,
        },
    }
}

/// One step of a certificate: a particle and the weight of the edge into it
/// (from the ground for the first link).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainLink {
    pub particle: ParticleRecord,
    pub weight: u8,
}

/// Replays the guess-and-check walk from the ground: the first particle must
/// hang off the ground with weight 1, and each later link must be a valid
/// particle joined to its predecessor by an edge of the stated weight.
///
/// Accepts when the weights sum to `site.height` and the walk ends on
/// `site.vertex`. The sum certifies the occupied height only when the walk
/// is a maximum-weight path; shorter walks to the same particle are accepted
/// for their own (smaller) sum.
pub fn verify_certificate(g: &SubstrateGraph, s: &DropSequence, site: BdSite, chain: &[ChainLink]) -> bool {
    let Some(first) = chain.first() else { return false };
    if !is_valid_particle(s, &first.particle) || first.weight != 1 || !weight(g, s, WeightSource::Ground, &first.particle, 1) {
        return false;
    }
    let mut sum = 1usize;
    for pair in chain.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if !is_valid_particle(s, &cur.particle)
            || !weight(g, s, WeightSource::Particle(prev.particle), &cur.particle, cur.weight)
        {
            return false;
        }
        sum += cur.weight as usize;
    }
    sum == site.height && chain.last().is_some_and(|l| l.particle.vertex == site.vertex)
}

/// A maximum-weight ground-to-particle path ending at the particle that
/// occupies `site`, if any.
pub fn certificate_for(g: &SubstrateGraph, s: &DropSequence, site: BdSite) -> Result<Option<Vec<ChainLink>>, BdError> {
    g.check(site.vertex)?;
    let dag = build_dependency_dag(g, s)?;
    let (rows, best) = longest_paths(&dag);
    let Some(end) = (0..dag.particles.len()).find(|&i| dag.particles[i].vertex == site.vertex && rows[i] == site.height)
    else {
        return Ok(None);
    };
    let mut chain = Vec::new();
    let mut cur = end;
    loop {
        let src = best[cur];
        let w = dag.weight(src, cur).expect("best predecessor is an edge");
        chain.push(ChainLink { particle: dag.particles[cur], weight: w });
        match src {
            DagSource::Ground => break,
            DagSource::Particle(p) => cur = p,
        }
    }
    chain.reverse();
    Ok(Some(chain))
}

/// Sorts positive integers decreasingly by dropping beads down even columns
/// of a 1-DLA lattice and counting occupied rods per height.
pub fn bead_sort(values: &[i64]) -> Result<Vec<i64>, BdError> {
    if let Some(&bad) = values.iter().find(|&&v| v <= 0) {
        return Err(BdError::NonPositiveValue(bad));
    }
    let Some(&m) = values.iter().max() else { return Ok(Vec::new()) };
    let m = m as usize;
    // Columns 2..2m hold the rods; the lattice must also be tall enough for
    // the first rod, which receives one bead per value.
    let n = (2 * m).max(values.len());
    let drops: Vec<usize> = values.iter().flat_map(|&a| (1..=a as usize).map(|k| 2 * k)).collect();
    let fig = run_script(&ThrowScript::from_drops(n, &drops), DirectionSet::new(1).expect("k=1"))
        .expect("straight-down drops are legal");
    Ok((1..=values.len())
        .map(|h| (1..=m).filter(|&k| fig.contains(crate::lattice::Cell::from_height(n, h, 2 * k))).count() as i64)
        .collect())
}

/// Directed graph on `1..=n`; self-loops and cycles are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredDagInstance {
    pub n_vertices: usize,
    pub arcs: Vec<(usize, usize)>,
    /// `layer[v]` for `v` in `1..=n_vertices`; index 0 is unused.
    pub layer: Vec<usize>,
    pub source: usize,
    pub target: usize,
    pub k: usize,
}

impl LayeredDagInstance {
    fn validate(&self) -> Result<(), BdError> {
        if self.layer.len() != self.n_vertices + 1 {
            return Err(BdError::MalformedLayering("layer table length does not match vertex count".into()));
        }
        for v in [self.source, self.target] {
            if v == 0 || v > self.n_vertices {
                return Err(BdError::UnknownVertex { vertex: v, n: self.n_vertices });
            }
        }
        for &(u, v) in &self.arcs {
            if u == 0 || v == 0 || u > self.n_vertices || v > self.n_vertices {
                return Err(BdError::MalformedLayering(format!("arc ({u},{v}) has an unknown endpoint")));
            }
            if self.layer[v] != self.layer[u] + 1 {
                return Err(BdError::MalformedLayering(format!("arc ({u},{v}) does not join consecutive layers")));
            }
        }
        Ok(())
    }
}

/// Text format: `"n m k"`, then `"source target"`, then the `n` layer
/// indices, then `m` lines `"u v"`.
pub fn parse_layered(text: &str) -> Result<LayeredDagInstance, BdError> {
    let mut nums = text.split_whitespace().map(|t| t.parse::<usize>().map_err(|e| BdError::Parse(format!("{t:?}: {e}"))));
    let mut next = |what: &str| nums.next().unwrap_or_else(|| Err(BdError::Parse(format!("missing {what}"))));
    let (n, m, k) = (next("vertex count")?, next("arc count")?, next("path length")?);
    let (source, target) = (next("source")?, next("target")?);
    let mut layer = vec![0];
    for _ in 0..n {
        layer.push(next("layer index")?);
    }
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        arcs.push((next("arc tail")?, next("arc head")?));
    }
    if nums.next().is_some() {
        return Err(BdError::Parse("trailing tokens after the arc list".into()));
    }
    let inst = LayeredDagInstance { n_vertices: n, arcs, layer, source, target, k };
    inst.validate()?;
    if inst.layer[target] != inst.layer[source] + k {
        return Err(BdError::MalformedLayering(format!("target is not {k} layers above the source")));
    }
    Ok(inst)
}

impl fmt::Display for LayeredDagInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.n_vertices, self.arcs.len(), self.k)?;
        writeln!(f, "{} {}", self.source, self.target)?;
        let layers: Vec<String> = self.layer[1..].iter().map(|l| l.to_string()).collect();
        writeln!(f, "{}", layers.join(" "))?;
        for (u, v) in &self.arcs {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Text format: `"n m"` followed by `m` lines `"u v"` (arcs `u -> v`).
pub fn parse_digraph(text: &str) -> Result<Digraph, BdError> {
    let nums: Vec<usize> = text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| BdError::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let [n, m, ref rest @ ..] = nums[..] else { return Err(BdError::Parse("missing \"n m\" header".into())) };
    if rest.len() != 2 * m {
        return Err(BdError::Parse(format!("expected {m} arcs, found {} numbers", rest.len())));
    }
    let arcs: Vec<_> = rest.chunks(2).map(|c| (c[0], c[1])).collect();
    if let Some(&v) = rest.iter().find(|&&v| v == 0 || v > n) {
        return Err(BdError::UnknownVertex { vertex: v, n });
    }
    Ok(Digraph { n, arcs })
}

/// Layers `0..=k` of copies of `g`; copy `i` of vertex `v` is `i*n + v`.
/// An arc `u -> v` becomes `u_i -> v_{i+1}`, so a length-`k` walk from `s`
/// to `t` in `g` is a path from `s_0` to `t_k`.
pub fn reduce_exact_to_layered(g: &Digraph, s: usize, t: usize, k: usize) -> Result<LayeredDagInstance, BdError> {
    for v in [s, t].into_iter().chain(g.arcs.iter().flat_map(|&(u, v)| [u, v])) {
        if v == 0 || v > g.n {
            return Err(BdError::UnknownVertex { vertex: v, n: g.n });
        }
    }
    let n = g.n;
    let id = |i: usize, v: usize| i * n + v;
    let mut layer = vec![0; (k + 1) * n + 1];
    for i in 0..=k {
        for v in 1..=n {
            layer[id(i, v)] = i;
        }
    }
    let arcs = (0..k).flat_map(|i| g.arcs.iter().map(move |&(u, v)| (id(i, u), id(i + 1, v)))).collect();
    Ok(LayeredDagInstance { n_vertices: (k + 1) * n, arcs, layer, source: id(0, s), target: id(k, t), k })
}

/// Is there a directed path of exactly `k` arcs from source to target?
pub fn layered_reachable(inst: &LayeredDagInstance) -> bool {
    let mut out = vec![Vec::new(); inst.n_vertices + 1];
    for &(u, v) in &inst.arcs {
        out[u].push(v);
    }
    let mut frontier = vec![inst.source];
    for _ in 0..inst.k {
        let mut seen = vec![false; inst.n_vertices + 1];
        frontier = frontier.iter().flat_map(|&u| &out[u]).copied().filter(|&v| !std::mem::replace(&mut seen[v], true)).collect();
    }
    frontier.contains(&inst.target)
}

/// Builds a BD instance whose site is occupied iff the layered instance has
/// a length-`k` path from source to target.
///
/// The source receives two particles and every vertex of the next `k`
/// layers receives two, layer by layer. A vertex `j` layers above the
/// source then tops out at height `j + 2` exactly when the source reaches
/// it, and at most `j + 1` otherwise; the site is `(k + 2, target)`.
pub fn reduce_ldereach_to_bd(inst: &LayeredDagInstance) -> Result<(SubstrateGraph, DropSequence, BdSite), BdError> {
    inst.validate()?;
    let g = SubstrateGraph::new(inst.n_vertices, inst.arcs.iter().copied())?;
    let base = inst.layer[inst.source];
    let mut drops = vec![inst.source, inst.source];
    for j in base + 1..=base + inst.k {
        for v in (1..=inst.n_vertices).filter(|&v| inst.layer[v] == j) {
            drops.extend([v, v]);
        }
    }
    Ok((g, DropSequence::new(drops), BdSite::new(inst.k + 2, inst.target)))
}
