//! 2-DLA realization (moves Down and Right).
//!
//! Every public entry point works on a copy of the figure padded with an
//! empty border of [`BORDER`] cells on the top and both sides, so approach
//! paths are never cut off by the lattice edge.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::lattice::{pad_figure, Cell, Direction, Figure};
use crate::simulator::{ThrowScript, Trajectory};

pub const BORDER: usize = 3;

/// Default particle bound for [`brute_force_realizable`].
pub const BRUTE_FORCE_BOUND: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Realize2Error {
    #[error("figure is not 2-DLA realizable")]
    NotRealizable,
    #[error("order is not a permutation of the figure's cells")]
    NotAPermutation,
    #[error("figure has {cells} particles, more than the brute-force bound {bound}")]
    TooLarge { cells: usize, bound: usize },
}

/// Is `w` in the shadow of `u` (strictly below and to the right)?
pub fn in_shadow(u: Cell, w: Cell) -> bool {
    w.row > u.row && w.col > u.col
}

/// Is `w` in the scope of `u` (strictly above and to the left)?
pub fn in_scope(u: Cell, w: Cell) -> bool {
    w.row < u.row && w.col < u.col
}

/// Cells that must be free for each of the four Down/Right approaches from
/// `(i-2, j-2)` to `(i, j)`: the path's interior plus its side neighbours,
/// leaving out the start, the target and anything strictly up-left.
pub const Q_OFFSETS: [&[(isize, isize)]; 4] = [
    &[(-3, 0), (-2, 0), (-1, 0), (-2, 1), (-1, 1)],
    &[(-2, 0), (-1, 0), (-1, 1), (0, -1)],
    &[(0, -3), (0, -2), (0, -1), (1, -2), (1, -1)],
    &[(0, -2), (0, -1), (1, -1), (-1, 0)],
];

/// The four blocking sets of `u` intersected with the figure and the
/// ground (ground cells appear with row `N + 1`).
pub fn q_blocking(u: Cell, fig: &Figure) -> [Vec<Cell>; 4] {
    Q_OFFSETS.map(|offs| {
        offs.iter().filter_map(|&(dr, dc)| u.offset(dr, dc)).filter(|&c| fig.is_solid(c)).collect()
    })
}

/// The dependency graph `H`: an edge `u -> v` means `u` is fixed before `v`
/// in every canonical realization; a self-loop marks a dead end at `v`.
#[derive(Debug, Clone)]
pub struct DependencyGraph2D {
    pub cells: Vec<Cell>,
    succ: Vec<FixedBitSet>,
    pred: Vec<FixedBitSet>,
    /// Number of rule rounds run before the fixed point.
    pub rounds: usize,
}

impl DependencyGraph2D {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(v)
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[u].ones()
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.pred[v].ones()
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.succ[u].count_ones(..)
    }

    pub fn edges(&self) -> Vec<(Cell, Cell)> {
        (0..self.len()).flat_map(|u| self.succ[u].ones().map(move |v| (self.cells[u], self.cells[v]))).collect()
    }

    pub fn index_of(&self, c: Cell) -> Option<usize> {
        self.cells.binary_search(&c).ok()
    }

    fn add(&mut self, u: usize, v: usize) -> bool {
        if self.succ[u].put(v) {
            return false;
        }
        self.pred[v].insert(u);
        true
    }
}

struct Local {
    nbrs: Vec<usize>,
    on_ground: bool,
    q: [Vec<usize>; 4],
    q_ground: [bool; 4],
}

/// Runs both rules to a fixed point on an already padded figure.
pub fn build_dependency_graph(fig: &Figure) -> DependencyGraph2D {
    let cells: Vec<Cell> = fig.cells().collect();
    let n = cells.len();
    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let locals: Vec<Local> = cells
        .iter()
        .map(|&c| {
            let nbrs = c.neighbors().filter_map(|x| index.get(&x).copied()).collect();
            let q_cells = q_blocking(c, fig);
            Local {
                nbrs,
                on_ground: c.row == fig.n_size(),
                q: q_cells.clone().map(|set| set.iter().filter_map(|x| index.get(x).copied()).collect()),
                q_ground: q_cells.map(|set| set.iter().any(|&x| fig.is_ground(x))),
            }
        })
        .collect();

    let mut dg = DependencyGraph2D {
        cells: cells.clone(),
        succ: vec![FixedBitSet::with_capacity(n); n],
        pred: vec![FixedBitSet::with_capacity(n); n],
        rounds: 0,
    };
    for (v, &cv) in cells.iter().enumerate() {
        for (w, &cw) in cells.iter().enumerate() {
            if in_shadow(cv, cw) {
                dg.add(w, v);
            }
        }
    }

    for _ in 0..(n * n).max(1) {
        let mut fresh = Vec::new();
        for (v, loc) in locals.iter().enumerate() {
            // Rule 1: a particle off the ground needs some neighbour fixed
            // before it. Applied to every particle, not only those without
            // predecessors; the argument does not depend on that.
            if !loc.on_ground {
                let mut later = dg.succ[v].clone();
                for w in dg.succ[v].ones() {
                    later.union_with(&dg.succ[w]);
                }
                let r: Vec<usize> = loc.nbrs.iter().copied().filter(|&u| !later.contains(u)).collect();
                if r.is_empty() {
                    fresh.push((v, v));
                }
                for &u in &r {
                    if r.iter().all(|&x| x == u || dg.succ[u].contains(x)) {
                        fresh.push((u, v));
                    }
                }
            }
            // Rule 2: whatever lies on every still-open approach is fixed after v.
            let open: Vec<usize> =
                (0..4).filter(|&k| !loc.q_ground[k] && !loc.q[k].iter().any(|&x| dg.pred[v].contains(x))).collect();
            if open.is_empty() {
                fresh.push((v, v));
            } else {
                let first = &loc.q[open[0]];
                for &u in first {
                    if open[1..].iter().all(|&k| loc.q[k].contains(&u)) {
                        fresh.push((v, u));
                    }
                }
            }
        }
        dg.rounds += 1;
        let mut changed = false;
        for (u, v) in fresh {
            changed |= dg.add(u, v);
        }
        if !changed {
            break;
        }
    }
    dg
}

/// Cycle detection; self-loops count as cycles.
pub fn is_acyclic(dg: &DependencyGraph2D) -> bool {
    let n = dg.len();
    let mut indeg: Vec<usize> = (0..n).map(|v| dg.pred[v].count_ones(..)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = stack.pop() {
        seen += 1;
        for v in dg.succ[u].ones() {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    seen == n
}

pub fn realizable_2d(fig: &Figure) -> bool {
    is_acyclic(&build_dependency_graph(&pad_figure(fig, BORDER)))
}

/// A particle that can be fixed last: some approach is entirely free, it has
/// no successors, and the figure without it still has an acyclic graph.
/// Candidates are tried leftmost column first, lowest first within a column.
pub fn find_removable(fig: &Figure, dg: &DependencyGraph2D) -> Option<Cell> {
    removable_with_graph(fig, dg).map(|(c, _)| c)
}

fn removable_with_graph(fig: &Figure, dg: &DependencyGraph2D) -> Option<(Cell, DependencyGraph2D)> {
    let mut candidates: Vec<usize> = (0..dg.len())
        .filter(|&u| dg.out_degree(u) == 0)
        .filter(|&u| q_blocking(dg.cells[u], fig).iter().any(Vec::is_empty))
        .collect();
    candidates.sort_by_key(|&u| (dg.cells[u].col, usize::MAX - dg.cells[u].row));
    candidates.into_iter().find_map(|u| {
        let mut rest = fig.clone();
        rest.remove(dg.cells[u]);
        let sub = build_dependency_graph(&rest);
        is_acyclic(&sub).then_some((dg.cells[u], sub))
    })
}

/// An ordered placement of every particle, in the figure's own coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub order: Vec<Cell>,
}

fn unpad(c: Cell) -> Cell {
    Cell::new(c.row - 2 * BORDER, c.col - BORDER)
}

fn to_padded(c: Cell) -> Cell {
    Cell::new(c.row + 2 * BORDER, c.col + BORDER)
}

/// Repeatedly peels off a removable particle; the peeled particles in
/// reverse form a canonical realization.
pub fn construct_realization_2d(fig: &Figure) -> Result<Realization, Realize2Error> {
    let mut cur = pad_figure(fig, BORDER);
    let mut dg = build_dependency_graph(&cur);
    if !is_acyclic(&dg) {
        return Err(Realize2Error::NotRealizable);
    }
    let mut peeled = Vec::with_capacity(cur.len());
    while !cur.is_empty() {
        let (u, next) = removable_with_graph(&cur, &dg).ok_or(Realize2Error::NotRealizable)?;
        cur.remove(u);
        peeled.push(unpad(u));
        dg = next;
    }
    peeled.reverse();
    Ok(Realization { order: peeled })
}

/// Free cells reachable from the top edge by Down/Right moves, with the
/// move used to enter each one. A free cell is empty, not beside a fixed
/// cell, and not in the bottom row.
fn approach_map(fixed: &Figure) -> Vec<Option<Option<Direction>>> {
    let n = fixed.n_size();
    let mut reach = vec![None; (n + 1) * (n + 1)];
    for r in 1..n {
        for c in 1..=n {
            let cell = Cell::new(r, c);
            if fixed.contains(cell) || fixed.touches_solid(cell) {
                continue;
            }
            reach[r * (n + 1) + c] = if r == 1 {
                Some(None)
            } else if reach[(r - 1) * (n + 1) + c].is_some() {
                Some(Some(Direction::Down))
            } else if c > 1 && reach[r * (n + 1) + c - 1].is_some() {
                Some(Some(Direction::Right))
            } else {
                None
            };
        }
    }
    reach
}

/// Moves from the top edge to `target`, if an available path exists.
fn approach(fixed: &Figure, reach: &[Option<Option<Direction>>], target: Cell) -> Option<Trajectory> {
    let w = fixed.n_size() + 1;
    let at = |c: Cell| reach[c.row * w + c.col];
    let (mut cur, mut moves) = if target.row == 1 {
        (target, Vec::new())
    } else if at(Cell::new(target.row - 1, target.col)).is_some() {
        (Cell::new(target.row - 1, target.col), vec![Direction::Down])
    } else if target.col > 1 && at(Cell::new(target.row, target.col - 1)).is_some() {
        (Cell::new(target.row, target.col - 1), vec![Direction::Right])
    } else {
        return None;
    };
    while let Some(Some(d)) = at(cur).filter(|_| cur != target) {
        moves.push(d);
        cur = match d {
            Direction::Down => Cell::new(cur.row - 1, cur.col),
            _ => Cell::new(cur.row, cur.col - 1),
        };
    }
    moves.reverse();
    Some(Trajectory::new(cur.col, moves))
}

fn attaches(fixed: &Figure, c: Cell) -> bool {
    !fixed.contains(c) && fixed.touches_solid(c)
}

/// Turns a placement order into Down/Right throws on the padded lattice
/// (size `N + 2 * BORDER`). `None` if some step has no available path or
/// nothing to attach to.
pub fn realization_script(fig: &Figure, r: &Realization) -> Result<Option<ThrowScript>, Realize2Error> {
    check_permutation(fig, r)?;
    let n = fig.n_size() + 2 * BORDER;
    let mut fixed = Figure::new(n);
    let mut throws = Vec::with_capacity(r.order.len());
    for &c in &r.order {
        let c = to_padded(c);
        if !attaches(&fixed, c) {
            return Ok(None);
        }
        let Some(t) = approach(&fixed, &approach_map(&fixed), c) else { return Ok(None) };
        throws.push(t);
        fixed.insert(c);
    }
    Ok(Some(ThrowScript::new(n, throws)))
}

fn check_permutation(fig: &Figure, r: &Realization) -> Result<(), Realize2Error> {
    let set: HashSet<Cell> = r.order.iter().copied().collect();
    if set.len() != r.order.len() || set.len() != fig.len() || !r.order.iter().all(|&c| fig.contains(c)) {
        return Err(Realize2Error::NotAPermutation);
    }
    Ok(())
}

/// Replays `r`: each particle must touch an earlier one (or the ground) and
/// have an available Down/Right path from the top edge.
pub fn verify_realization(fig: &Figure, r: &Realization) -> Result<bool, Realize2Error> {
    realization_script(fig, r).map(|s| s.is_some())
}

/// Exhaustive oracle over placement orders, memoised on the fixed set.
pub fn brute_force_realizable(fig: &Figure) -> Result<bool, Realize2Error> {
    brute_force_order(fig, BRUTE_FORCE_BOUND).map(|o| o.is_some())
}

/// Like [`brute_force_realizable`] with an explicit particle bound, returning
/// a realizing order when one exists.
pub fn brute_force_order(fig: &Figure, bound: usize) -> Result<Option<Realization>, Realize2Error> {
    if fig.len() > bound.min(63) {
        return Err(Realize2Error::TooLarge { cells: fig.len(), bound: bound.min(63) });
    }
    let padded = pad_figure(fig, BORDER);
    let cells: Vec<Cell> = padded.cells().collect();
    let mut fixed = Figure::new(padded.n_size());
    let mut order = Vec::with_capacity(cells.len());
    let mut failed = HashSet::new();
    Ok(search_2d(&cells, 0, &mut fixed, &mut order, &mut failed)
        .then(|| Realization { order: order.into_iter().map(|i| unpad(cells[i])).collect() }))
}

fn search_2d(cells: &[Cell], mask: u64, fixed: &mut Figure, order: &mut Vec<usize>, failed: &mut HashSet<u64>) -> bool {
    if order.len() == cells.len() {
        return true;
    }
    if failed.contains(&mask) {
        return false;
    }
    let reach = approach_map(fixed);
    let pending = (0..cells.len()).filter(|&i| mask & (1 << i) == 0);
    let mut ready = Vec::new();
    for i in pending {
        // Fixing more cells only closes paths, so a cell with no path now never gets one.
        if approach(fixed, &reach, cells[i]).is_none() {
            failed.insert(mask);
            return false;
        }
        if attaches(fixed, cells[i]) {
            ready.push(i);
        }
    }
    for i in ready {
        fixed.insert(cells[i]);
        order.push(i);
        if search_2d(cells, mask | (1 << i), fixed, order, failed) {
            return true;
        }
        order.pop();
        fixed.remove(cells[i]);
    }
    failed.insert(mask);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parse_figure, DirectionSet};
    use crate::simulator::run_script;

    fn fig(text: &str, n: usize) -> Figure {
        parse_figure(text, n).unwrap()
    }

    #[test]
    fn quadrants_are_mirror_images() {
        let (u, w) = (Cell::new(3, 3), Cell::new(5, 4));
        assert!(in_shadow(u, w) && in_scope(w, u));
        assert!(!in_shadow(u, u) && !in_shadow(u, Cell::new(3, 5)));
    }

    #[test]
    fn blocking_sets() {
        let empty = Figure::new(8);
        assert!(q_blocking(Cell::new(5, 5), &empty).iter().all(Vec::is_empty));
        let one = Figure::from_cells(8, [Cell::new(2, 5)]).unwrap();
        let q = q_blocking(Cell::new(5, 5), &one);
        assert_eq!(q[0], vec![Cell::new(2, 5)]);
        assert!(q[1..].iter().all(Vec::is_empty));
        let q = q_blocking(Cell::new(8, 5), &empty);
        assert!(q[2].iter().any(|c| c.row == 9) && q[3].iter().any(|c| c.row == 9));
        assert!(q[0].is_empty() && q[1].is_empty());
    }

    #[test]
    fn single_particle_and_stack() {
        let single = Figure::from_cells(8, [Cell::new(8, 5)]).unwrap();
        let dg = build_dependency_graph(&single);
        assert!(dg.edges().is_empty() && is_acyclic(&dg));
        assert_eq!(find_removable(&single, &dg), Some(Cell::new(8, 5)));

        let stack = Figure::from_cells(8, [Cell::new(8, 5), Cell::new(7, 5)]).unwrap();
        let dg = build_dependency_graph(&stack);
        assert_eq!(dg.edges(), vec![(Cell::new(8, 5), Cell::new(7, 5))]);
        assert_eq!(find_removable(&stack, &dg), Some(Cell::new(7, 5)));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let mut dg = build_dependency_graph(&Figure::from_cells(8, [Cell::new(8, 5)]).unwrap());
        assert!(is_acyclic(&dg));
        dg.add(0, 0);
        assert!(!is_acyclic(&dg));
    }

    #[test]
    fn bottom_row_is_realizable() {
        let bar = fig("....\n....\n....\n##.#", 4);
        assert!(realizable_2d(&bar));
        assert_eq!(brute_force_realizable(&bar), Ok(true));
    }

    #[test]
    fn stack_orders() {
        let stack = Figure::from_cells(3, [Cell::new(3, 2), Cell::new(2, 2)]).unwrap();
        let r = construct_realization_2d(&stack).unwrap();
        assert_eq!(r.order, vec![Cell::new(3, 2), Cell::new(2, 2)]);
        assert_eq!(verify_realization(&stack, &r), Ok(true));
        let wrong = Realization { order: vec![Cell::new(2, 2), Cell::new(3, 2)] };
        assert_eq!(verify_realization(&stack, &wrong), Ok(false));
        let short = Realization { order: vec![Cell::new(3, 2)] };
        assert_eq!(verify_realization(&stack, &short), Err(Realize2Error::NotAPermutation));
        assert_eq!(brute_force_realizable(&stack), Ok(true));
    }

    #[test]
    fn floating_cell_is_not_realizable() {
        let float = Figure::from_cells(4, [Cell::new(2, 2)]).unwrap();
        assert!(!realizable_2d(&float));
        assert_eq!(brute_force_realizable(&float), Ok(false));
        assert_eq!(construct_realization_2d(&float), Err(Realize2Error::NotRealizable));
    }

    #[test]
    fn constructed_orders_replay_through_the_simulator() {
        let f = fig("....\n.##.\n.#..\n##.#", 4);
        assert!(realizable_2d(&f));
        let r = construct_realization_2d(&f).unwrap();
        let script = realization_script(&f, &r).unwrap().unwrap();
        assert_eq!(run_script(&script, DirectionSet::new(2).unwrap()).unwrap(), pad_figure(&f, BORDER));
    }

    #[test]
    fn brute_force_bound() {
        let full = fig("###\n###\n###", 3);
        assert_eq!(brute_force_realizable(&full), Err(Realize2Error::TooLarge { cells: 9, bound: 8 }));
    }
}
