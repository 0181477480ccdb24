//! 1-DLA realization: the figure graph, its vertex split, and a
//! reachability-based decider with a matching drop-sequence constructor.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::ballistic::DropSequence;
use crate::lattice::{Cell, DirectionSet, Figure};
use crate::simulator::{run_trajectory, Outcome, Trajectory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizeError {
    #[error("figure is not realizable")]
    NotRealizable,
    #[error("figure has {cells} particles, more than the brute-force bound {bound}")]
    TooLarge { cells: usize, bound: usize },
}

/// The graph `G_a`: one node per occupied cell plus the ground. An arc
/// `v -> u` reads "v can rest on u".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureGraph1D {
    pub cells: Vec<Cell>,
    /// Right-stick arcs `(i,j) -> (i,j+1)`, as indices into `cells`.
    pub e1: Vec<(usize, usize)>,
    /// Left-stick arcs `(i,j) -> (i,j-1)`.
    pub e2: Vec<(usize, usize)>,
    /// Falling arcs `(i,j) -> (i+1,j)`.
    pub e3: Vec<(usize, usize)>,
    /// Bottom-row cells, each with an arc to the ground.
    pub e4: Vec<usize>,
}

impl FigureGraph1D {
    pub fn ground(&self) -> usize {
        self.cells.len()
    }

    pub fn node_count(&self) -> usize {
        self.cells.len() + 1
    }

    /// All arcs with the ground numbered `cells.len()`.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let g = self.ground();
        self.e1.iter().chain(&self.e2).chain(&self.e3).copied().chain(self.e4.iter().map(move |&v| (v, g)))
    }
}

pub fn build_figure_graph(fig: &Figure) -> FigureGraph1D {
    let cells: Vec<Cell> = fig.cells().collect();
    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let (mut e1, mut e2, mut e3, mut e4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, &c) in cells.iter().enumerate() {
        let at = |dr, dc| c.offset(dr, dc).and_then(|o| index.get(&o).copied());
        if let Some(j) = at(0, 1) {
            e1.push((i, j));
        }
        if let Some(j) = at(0, -1) {
            e2.push((i, j));
        }
        if let Some(j) = at(1, 0) {
            e3.push((i, j));
        }
        if c.row == fig.n_size() {
            e4.push(i);
        }
    }
    FigureGraph1D { cells, e1, e2, e3, e4 }
}

/// Vertex-split of `G_a`: cell `i` becomes `2i` (entry copy) and `2i + 1`
/// (exit copy); the ground is the single sink `2 * cells`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitGraph {
    pub n_cells: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl SplitGraph {
    pub fn ground(&self) -> usize {
        2 * self.n_cells
    }

    pub fn node_count(&self) -> usize {
        2 * self.n_cells + 1
    }

    pub fn entry(i: usize) -> usize {
        2 * i
    }

    pub fn exit(i: usize) -> usize {
        2 * i + 1
    }

    fn out_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for &(u, v) in &self.arcs {
            out[u].push(v);
        }
        out
    }

    pub fn sinks(&self) -> Vec<usize> {
        let out = self.out_lists();
        (0..self.node_count()).filter(|&v| out[v].is_empty()).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        let out = self.out_lists();
        let mut indeg = vec![0usize; self.node_count()];
        for &(_, v) in &self.arcs {
            indeg[v] += 1;
        }
        let mut queue: Vec<usize> = (0..self.node_count()).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        seen == self.node_count()
    }
}

pub fn split_to_mspd(ga: &FigureGraph1D) -> SplitGraph {
    let (en, ex) = (SplitGraph::entry, SplitGraph::exit);
    let g = 2 * ga.cells.len();
    let mut arcs: Vec<(usize, usize)> = (0..ga.cells.len()).map(|i| (en(i), ex(i))).collect();
    arcs.extend(ga.e1.iter().map(|&(v, u)| (en(v), en(u))));
    arcs.extend(ga.e2.iter().map(|&(v, u)| (ex(v), ex(u))));
    arcs.extend(ga.e3.iter().map(|&(v, u)| (ex(v), en(u))));
    arcs.extend(ga.e4.iter().map(|&v| (ex(v), g)));
    SplitGraph { n_cells: ga.cells.len(), arcs }
}

fn reverse_bfs(node_count: usize, arcs: impl Iterator<Item = (usize, usize)>, from: usize) -> Vec<Option<usize>> {
    let mut rev = vec![Vec::new(); node_count];
    for (u, v) in arcs {
        rev[v].push(u);
    }
    let mut dist = vec![None; node_count];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &u in &rev[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Does every entry copy reach the ground?
pub fn reachable_all(sg: &SplitGraph) -> bool {
    let dist = reverse_bfs(sg.node_count(), sg.arcs.iter().copied(), sg.ground());
    (0..sg.n_cells).all(|i| dist[SplitGraph::entry(i)].is_some())
}

pub fn realizable_1d(fig: &Figure) -> bool {
    reachable_all(&split_to_mspd(&build_figure_graph(fig)))
}

/// Distance of every cell to the ground in `G_a` (`None` if unreachable).
pub fn ground_distances(ga: &FigureGraph1D) -> Vec<Option<usize>> {
    let mut dist = reverse_bfs(ga.node_count(), ga.arcs(), ga.ground());
    dist.truncate(ga.cells.len());
    dist
}

/// A straight-down drop sequence that rebuilds `fig`.
///
/// Cells are emitted bottom row first; inside a row, by ground distance in
/// `G_a` and then left to right. Going row by row keeps every drop clear of
/// cells above it in neighbouring columns, and the distance order
/// guarantees each cell hangs off something already placed.
pub fn construct_sequence_1d(fig: &Figure) -> Result<DropSequence, RealizeError> {
    let ga = build_figure_graph(fig);
    let dist = ground_distances(&ga);
    let mut order: Vec<(usize, usize, usize)> = Vec::with_capacity(ga.cells.len());
    for (c, d) in ga.cells.iter().zip(&dist) {
        let d = d.ok_or(RealizeError::NotRealizable)?;
        order.push((usize::MAX - c.row, d, c.col));
    }
    order.sort_unstable();
    Ok(DropSequence::new(order.into_iter().map(|(_, _, col)| col).collect()))
}

/// Exhaustive oracle: searches placement orders in which each cell is the
/// landing spot of a straight-down drop on the cells placed so far.
pub fn brute_force_realizable_1d(fig: &Figure, bound: usize) -> Result<bool, RealizeError> {
    let cells: Vec<Cell> = fig.cells().collect();
    if cells.len() > bound || cells.len() > 63 {
        return Err(RealizeError::TooLarge { cells: cells.len(), bound: bound.min(63) });
    }
    let mut failed = HashSet::new();
    let mut placed = Figure::new(fig.n_size());
    Ok(search_1d(&cells, 0, &mut placed, &mut failed))
}

fn search_1d(cells: &[Cell], mask: u64, placed: &mut Figure, failed: &mut HashSet<u64>) -> bool {
    if mask.count_ones() as usize == cells.len() {
        return true;
    }
    if failed.contains(&mask) {
        return false;
    }
    let k1 = DirectionSet::new(1).expect("k=1");
    let n = placed.n_size();
    for (i, &c) in cells.iter().enumerate() {
        if mask & (1 << i) != 0 {
            continue;
        }
        let lands = run_trajectory(placed, &Trajectory::straight_down(c.col, n), k1) == Ok(Outcome::Stuck(c));
        if lands {
            placed.insert(c);
            let ok = search_1d(cells, mask | (1 << i), placed, failed);
            placed.remove(c);
            if ok {
                return true;
            }
        }
    }
    failed.insert(mask);
    false
}
