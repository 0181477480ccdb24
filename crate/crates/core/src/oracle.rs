//! Equivalence sweeps that pit each decider against an independent
//! brute-force oracle.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ballistic::{
    bd_predict, bd_simulate, build_dependency_dag, layered_reachable, longest_path_rows, reduce_exact_to_layered,
    reduce_ldereach_to_bd, Digraph, DropSequence, LayeredDagInstance, SubstrateGraph,
};
use crate::circuits::{all_assignments, Assignment, check_compiled_with, random_circuit, small_circuits, NorCircuit};
use crate::lattice::{Cell, DirectionSet, Figure};
use crate::realize1::{brute_force_realizable_1d, construct_sequence_1d, realizable_1d};
use crate::realize2::{brute_force_order, construct_realization_2d, realizable_2d, verify_realization};
use crate::simulator::{random_script, run_script, ThrowScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Realize1,
    Realize2,
    BdRows,
    Reductions,
    Circuits,
}

impl OracleKind {
    pub const ALL: [OracleKind; 5] =
        [OracleKind::Realize1, OracleKind::Realize2, OracleKind::BdRows, OracleKind::Reductions, OracleKind::Circuits];

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Realize1 => "realize1",
            OracleKind::Realize2 => "realize2",
            OracleKind::BdRows => "bdrows",
            OracleKind::Reductions => "reductions",
            OracleKind::Circuits => "circuits",
        }
    }
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        OracleKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown oracle kind {s:?}"))
    }
}

/// `instances` sets the size of the random part of a sweep; exhaustive
/// parts always run in full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub instances: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { instances: 1000, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub kind: OracleKind,
    pub instances: usize,
    pub mismatches: usize,
    /// Descriptions of the first few mismatches.
    pub samples: Vec<String>,
    pub elapsed: Duration,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} instances, {} mismatches, {:.3}s",
            self.kind.name(),
            self.instances,
            self.mismatches,
            self.elapsed.as_secs_f64()
        )?;
        for s in &self.samples {
            write!(f, "\n  {s}")?;
        }
        Ok(())
    }
}

const SAMPLES: usize = 5;

/// How a sweep spreads its independent instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Execution::Sequential;
    }
}

/// Maps `check` over `items`, keeping failures in input order.
fn sweep<T: Sync>(exec: Execution, items: &[T], check: impl Fn(&T) -> Option<String> + Sync + Send) -> Vec<String> {
    match exec {
        Execution::Sequential => items.iter().filter_map(check).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().filter_map(check).collect()
        }
    }
}

pub fn oracle_check(kind: OracleKind, budget: Budget) -> Report {
    oracle_check_with(kind, budget, Execution::default())
}

pub fn oracle_check_with(kind: OracleKind, budget: Budget, exec: Execution) -> Report {
    let start = Instant::now();
    let (instances, failures) = match kind {
        OracleKind::Realize1 => realize1_suite(budget, exec),
        OracleKind::Realize2 => realize2_suite(budget, exec),
        OracleKind::BdRows => bdrows_suite(budget, exec),
        OracleKind::Reductions => reductions_suite(budget, exec),
        OracleKind::Circuits => circuits_suite(budget, exec),
    };
    Report {
        kind,
        instances,
        mismatches: failures.len(),
        samples: failures.into_iter().take(SAMPLES).collect(),
        elapsed: start.elapsed(),
    }
}

/// Figure on an `n` lattice whose bit `b` of `mask` fills the cell at
/// offset `(b / w, b % w)` of the bottom-left `w` by `h` window.
pub fn window_figure(n: usize, w: usize, h: usize, mask: u64) -> Figure {
    let mut f = Figure::new(n);
    for b in (0..w * h).filter(|b| mask >> b & 1 == 1) {
        f.insert(Cell::new(n - h + 1 + b / w, 1 + b % w));
    }
    f
}

/// A 5x5 figure: even seeds give a uniform random cell set, odd seeds the
/// result of a random `k`-direction script with one cell possibly toggled.
pub fn random_figure(seed: u64, k: u8) -> Figure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        return window_figure(5, 5, 5, rng.gen::<u64>() & ((1 << 25) - 1));
    }
    let dirs = DirectionSet::new(k).expect("k is 1 or 2");
    let m = rng.gen_range(1..=14);
    let script = if k == 1 {
        ThrowScript::from_drops(5, &(0..m).map(|_| rng.gen_range(1..=5)).collect::<Vec<_>>())
    } else {
        random_script(5, m, rng.gen_range(5..=10), dirs, rng.gen())
    };
    let mut fig = run_script(&script, dirs).expect("generated scripts are valid");
    if rng.gen_bool(0.5) {
        let cell = Cell::new(rng.gen_range(1..=5), rng.gen_range(1..=5));
        if !fig.remove(cell) {
            fig.insert(cell);
        }
    }
    fig
}

fn realize1_case(fig: &Figure) -> Option<String> {
    let fast = realizable_1d(fig);
    let slow = brute_force_realizable_1d(fig, 25).expect("window figures are within the bound");
    if fast != slow {
        return Some(format!("decider {fast} oracle {slow}\n{fig:?}"));
    }
    if fast {
        let seq = construct_sequence_1d(fig).expect("realizable");
        let script = ThrowScript::from_drops(fig.n_size(), &seq.drops);
        let replay = run_script(&script, DirectionSet::new(1).expect("k=1")).expect("drops are in range");
        if replay != *fig {
            return Some(format!("sequence {seq} does not rebuild\n{fig:?}"));
        }
    }
    None
}

fn realize1_suite(b: Budget, exec: Execution) -> (usize, Vec<String>) {
    let mut figs: Vec<Figure> = (0..1u64 << 12).map(|m| window_figure(4, 4, 3, m)).collect();
    figs.extend((0..b.instances as u64).map(|i| random_figure(b.seed.wrapping_mul(1_000_003).wrapping_add(i), 1)));
    (figs.len(), sweep(exec, &figs, realize1_case))
}

fn realize2_case(fig: &Figure) -> Option<String> {
    let fast = realizable_2d(fig);
    let slow = brute_force_order(fig, 25).expect("window figures are within the bound").is_some();
    if fast != slow {
        return Some(format!("decider {fast} oracle {slow}\n{fig:?}"));
    }
    if fast {
        let ok = construct_realization_2d(fig).and_then(|r| verify_realization(fig, &r));
        if ok != Ok(true) {
            return Some(format!("construction failed verification ({ok:?})\n{fig:?}"));
        }
    }
    None
}

fn realize2_suite(b: Budget, exec: Execution) -> (usize, Vec<String>) {
    let mut figs: Vec<Figure> =
        (0..1u64 << 16).filter(|m| m.count_ones() <= 6).map(|m| window_figure(4, 4, 4, m)).collect();
    figs.extend((0..b.instances as u64).map(|i| random_figure(b.seed.wrapping_mul(1_000_003).wrapping_add(i), 2)));
    (figs.len(), sweep(exec, &figs, realize2_case))
}

/// Random graph on at most 12 vertices with a drop sequence of at most 40.
pub fn random_bd_instance(seed: u64) -> (SubstrateGraph, DropSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=12);
    let p = rng.gen_range(0.0..0.6);
    let edges: Vec<_> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
    let g = SubstrateGraph::new(n, edges).expect("edges are in range");
    let len = rng.gen_range(0..=40);
    let s = DropSequence::new((0..len).map(|_| rng.gen_range(1..=n)).collect());
    (g, s)
}

fn bdrows_suite(b: Budget, exec: Execution) -> (usize, Vec<String>) {
    let seeds: Vec<u64> = (0..b.instances as u64).map(|i| b.seed.wrapping_mul(1_000_003).wrapping_add(i)).collect();
    let failures = sweep(exec, &seeds, |&seed| {
        let (g, s) = random_bd_instance(seed);
        let direct = bd_simulate(&g, &s).expect("valid instance");
        let dag = build_dependency_dag(&g, &s).expect("valid instance");
        let rows = longest_path_rows(&dag);
        (rows != direct).then(|| format!("graph {g} sequence {s}: dag {rows:?} direct {direct:?}"))
    });
    (seeds.len(), failures)
}

/// Does `g` have a walk of exactly `k` arcs from `s` to `t`? Plain DFS.
fn walk_exists(g: &Digraph, s: usize, t: usize, k: usize) -> bool {
    if k == 0 {
        return s == t;
    }
    g.arcs.iter().any(|&(u, v)| u == s && walk_exists(g, v, t, k - 1))
}

fn random_digraph(rng: &mut ChaCha8Rng) -> (Digraph, usize, usize, usize) {
    let n = rng.gen_range(1..=6);
    let p = rng.gen_range(0.1..0.5);
    let arcs = (1..=n).flat_map(|u| (1..=n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
    (Digraph { n, arcs }, rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(0..=5))
}

/// Random layered DAG with the target `k` layers above the source.
pub fn random_layered(seed: u64) -> LayeredDagInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = rng.gen_range(1..=6);
    let mut layer = vec![0];
    let mut by_layer = vec![Vec::new(); layers];
    for (l, members) in by_layer.iter_mut().enumerate() {
        for _ in 0..rng.gen_range(1..=3) {
            layer.push(l);
            members.push(layer.len() - 1);
        }
    }
    let p = rng.gen_range(0.2..0.8);
    let mut arcs = Vec::new();
    for l in 0..layers - 1 {
        for &u in &by_layer[l] {
            for &v in &by_layer[l + 1] {
                if rng.gen_bool(p) {
                    arcs.push((u, v));
                }
            }
        }
    }
    let base = rng.gen_range(0..layers);
    let k = rng.gen_range(0..layers - base);
    let pick = |rng: &mut ChaCha8Rng, l: usize| by_layer[l][rng.gen_range(0..by_layer[l].len())];
    let source = pick(&mut rng, base);
    let target = pick(&mut rng, base + k);
    LayeredDagInstance { n_vertices: layer.len() - 1, arcs, layer, source, target, k }
}

fn reductions_suite(b: Budget, exec: Execution) -> (usize, Vec<String>) {
    let seeds: Vec<u64> = (0..b.instances as u64).map(|i| b.seed.wrapping_mul(1_000_003).wrapping_add(i)).collect();
    let failures = sweep(exec, &seeds, |&seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, s, t, k) = random_digraph(&mut rng);
        let inst = reduce_exact_to_layered(&g, s, t, k).expect("valid digraph");
        let (via, want) = (layered_reachable(&inst), walk_exists(&g, s, t, k));
        if via != want {
            return Some(format!("exact-length {g:?} s={s} t={t} k={k}: reduction {via} oracle {want}"));
        }
        let layered = random_layered(seed);
        let as_digraph = Digraph { n: layered.n_vertices, arcs: layered.arcs.clone() };
        let want = walk_exists(&as_digraph, layered.source, layered.target, layered.k);
        let (bg, bs, site) = reduce_ldereach_to_bd(&layered).expect("valid layering");
        let got = bd_predict(&bg, &bs, site).expect("valid instance");
        (got != want).then(|| format!("ldereach {layered:?}: bd {got} oracle {want}"))
    });
    (2 * seeds.len(), failures)
}

fn circuit_case((c, k, asgs): &(NorCircuit, u8, Vec<Assignment>)) -> Option<String> {
    asgs.iter().find_map(|a| match check_compiled_with(c, a, *k) {
        Ok(true) => None,
        other => Some(format!("k={k} {a:?} -> {other:?}\n{c}")),
    })
}

/// Random assignments checked per random circuit.
const RANDOM_ASSIGNMENTS: usize = 4;

fn circuits_suite(b: Budget, exec: Execution) -> (usize, Vec<String>) {
    let mut cases: Vec<(NorCircuit, u8, Vec<Assignment>)> = Vec::new();
    for c in small_circuits(4) {
        let asgs = all_assignments(&c);
        cases.extend([(c.clone(), 2, asgs.clone()), (c, 3, asgs)]);
    }
    for i in 0..b.instances as u64 {
        let seed = b.seed.wrapping_mul(1_000_003).wrapping_add(i);
        let c = random_circuit(4, 20, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let asgs: Vec<Assignment> = (0..RANDOM_ASSIGNMENTS)
            .map(|_| c.inputs().map(|name| (name.to_string(), rng.gen_bool(0.5))).collect())
            .collect();
        cases.extend([(c.clone(), 2, asgs.clone()), (c, 3, asgs)]);
    }
    (cases.len(), sweep(exec, &cases, circuit_case))
}
