//! NOR circuit values: parsing, evaluation, and compilation into 2-DLA
//! throw scripts whose final figure encodes every gate's value.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::lattice::{Cell, Direction, DirectionSet, Figure};
use crate::simulator::{run_script, ThrowScript, Trajectory};

/// Largest lattice the layout engine will emit.
pub const MAX_LATTICE: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("gate {0:?} is defined twice")]
    Duplicate(String),
    #[error("reference to undefined gate {0:?}")]
    UnknownGateRef(String),
    #[error("cycle through gate {0:?}")]
    CycleDetected(String),
    #[error("gate {gate:?} reads inputs from layers {left} and {right}")]
    NotLayered { gate: String, left: usize, right: usize },
    #[error("assignment: {0}")]
    Assignment(String),
    #[error("layout needs a {needed}x{needed} lattice, above the limit {MAX_LATTICE}")]
    LayoutOverflow { needed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(String),
    Nor(String, String, String),
    Or(String, String),
}

impl Gate {
    pub fn name(&self) -> &str {
        match self {
            Gate::Input(n) | Gate::Nor(n, _, _) | Gate::Or(n, _) => n,
        }
    }

    fn inputs(&self) -> Vec<&str> {
        match self {
            Gate::Input(_) => vec![],
            Gate::Nor(_, a, b) => vec![a, b],
            Gate::Or(_, a) => vec![a],
        }
    }
}

/// A validated circuit with gates in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NorCircuit {
    pub gates: Vec<Gate>,
    pub outputs: Vec<String>,
    pub layers: Vec<usize>,
}

impl NorCircuit {
    pub fn new(gates: Vec<Gate>, outputs: Vec<String>) -> Result<Self, CircuitError> {
        let mut index = HashMap::new();
        for (i, g) in gates.iter().enumerate() {
            if index.insert(g.name().to_string(), i).is_some() {
                return Err(CircuitError::Duplicate(g.name().to_string()));
            }
        }
        for name in gates.iter().flat_map(Gate::inputs).chain(outputs.iter().map(String::as_str)) {
            if !index.contains_key(name) {
                return Err(CircuitError::UnknownGateRef(name.to_string()));
            }
        }
        // Depth-first topological sort, keeping the written order where possible.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut mark = vec![Mark::New; gates.len()];
        let mut order = Vec::with_capacity(gates.len());
        fn visit(
            i: usize,
            gates: &[Gate],
            index: &HashMap<String, usize>,
            mark: &mut [Mark],
            order: &mut Vec<usize>,
        ) -> Result<(), CircuitError> {
            match mark[i] {
                Mark::Done => return Ok(()),
                Mark::Open => return Err(CircuitError::CycleDetected(gates[i].name().to_string())),
                Mark::New => {}
            }
            mark[i] = Mark::Open;
            for name in gates[i].inputs() {
                visit(index[name], gates, index, mark, order)?;
            }
            mark[i] = Mark::Done;
            order.push(i);
            Ok(())
        }
        for i in 0..gates.len() {
            visit(i, &gates, &index, &mut mark, &mut order)?;
        }
        let gates: Vec<Gate> = order.into_iter().map(|i| gates[i].clone()).collect();
        let mut layer_of: HashMap<&str, usize> = HashMap::new();
        let mut layers = Vec::with_capacity(gates.len());
        for g in &gates {
            let layer = match g {
                Gate::Input(_) => 0,
                Gate::Or(_, a) => layer_of[a.as_str()] + 1,
                Gate::Nor(name, a, b) => {
                    let (la, lb) = (layer_of[a.as_str()], layer_of[b.as_str()]);
                    if la != lb {
                        return Err(CircuitError::NotLayered { gate: name.clone(), left: la, right: lb });
                    }
                    la + 1
                }
            };
            layer_of.insert(g.name(), layer);
            layers.push(layer);
        }
        Ok(NorCircuit { gates, outputs, layers })
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.gates.iter().filter_map(|g| match g {
            Gate::Input(n) => Some(n.as_str()),
            _ => None,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.iter().copied().max().unwrap_or(0)
    }
}

/// Line format: `input NAME`, `nor NAME A B`, `or NAME A`, `output NAME`.
/// Blank lines and `#` comments are ignored.
pub fn parse_circuit(text: &str) -> Result<NorCircuit, CircuitError> {
    let mut gates = Vec::new();
    let mut outputs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let own = |s: &str| s.to_string();
        match words[..] {
            ["input", n] => gates.push(Gate::Input(own(n))),
            ["nor", n, a, b] => gates.push(Gate::Nor(own(n), own(a), own(b))),
            ["or", n, a] => gates.push(Gate::Or(own(n), own(a))),
            ["output", n] => outputs.push(own(n)),
            _ => return Err(CircuitError::Syntax { line: i + 1, msg: format!("cannot read {line:?}") }),
        }
    }
    NorCircuit::new(gates, outputs)
}

impl std::fmt::Display for NorCircuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for g in &self.gates {
            match g {
                Gate::Input(n) => writeln!(f, "input {n}")?,
                Gate::Nor(n, a, b) => writeln!(f, "nor {n} {a} {b}")?,
                Gate::Or(n, a) => writeln!(f, "or {n} {a}")?,
            }
        }
        for o in &self.outputs {
            writeln!(f, "output {o}")?;
        }
        Ok(())
    }
}

pub type Assignment = BTreeMap<String, bool>;

/// Parses `"a=1,b=0"` and checks it covers exactly the circuit's inputs.
pub fn parse_assignment(text: &str, c: &NorCircuit) -> Result<Assignment, CircuitError> {
    let mut asg = Assignment::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) =
            part.split_once('=').ok_or_else(|| CircuitError::Assignment(format!("expected NAME=0|1, got {part:?}")))?;
        let value = match value.trim() {
            "0" => false,
            "1" => true,
            v => return Err(CircuitError::Assignment(format!("value {v:?} for {name:?} is not 0 or 1"))),
        };
        if asg.insert(name.trim().to_string(), value).is_some() {
            return Err(CircuitError::Assignment(format!("{name:?} assigned twice")));
        }
    }
    check_assignment(c, &asg)?;
    Ok(asg)
}

fn check_assignment(c: &NorCircuit, asg: &Assignment) -> Result<(), CircuitError> {
    for name in asg.keys() {
        if !c.inputs().any(|i| i == name) {
            return Err(CircuitError::Assignment(format!("{name:?} is not an input")));
        }
    }
    if let Some(missing) = c.inputs().find(|i| !asg.contains_key(*i)) {
        return Err(CircuitError::Assignment(format!("input {missing:?} has no value")));
    }
    Ok(())
}

pub fn evaluate(c: &NorCircuit, asg: &Assignment) -> Result<BTreeMap<String, bool>, CircuitError> {
    check_assignment(c, asg)?;
    let mut val: BTreeMap<String, bool> = BTreeMap::new();
    for g in &c.gates {
        let v = match g {
            Gate::Input(n) => asg[n],
            Gate::Nor(_, a, b) => !(val[a] || val[b]),
            Gate::Or(_, a) => val[a],
        };
        val.insert(g.name().to_string(), v);
    }
    Ok(val)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledCircuit {
    pub script: ThrowScript,
    /// The cell that ends up occupied iff the gate evaluates to true.
    pub probes: BTreeMap<String, Cell>,
    /// Number of leading throws that depend on the assignment.
    pub starter_throws: usize,
}

/// Spacing between signal lanes; four empty columns separate neighbours.
const LANE_GAP: usize = 5;
const LEFT_MARGIN: usize = 3;
/// Rows between consecutive gadgets.
const GADGET_PITCH: usize = 3;
/// Particles stacked on a true input before any gadget runs.
const STARTER: usize = 3;

enum Signal {
    Input(String),
    Nor(usize, usize),
}

/// Lays the circuit out as one vertical lane per signal.
///
/// A true signal is a solid stack in its lane; a false one leaves the lane
/// empty. Each lane is grown one cell per throw, straight down to the cell
/// above the current top; a throw that finds nothing there steps two
/// columns right and drops onto a discard pile beside the lane.
///
/// Gates are built bottom-up, one per probe row `r`. For `NOR(p, q)` the
/// inputs are grown to row `r`, a power stack is raised in the gate's lane
/// up to row `r + 1`, and a single probe falls beside the leftmost input
/// and then runs right along row `r`. It sticks next to the first true
/// input it meets, or else on top of the power stack at `(r, lane)`,
/// which is the gate's probe cell. `OR(a)` is built as two chained
/// `NOR(x, x)` inverters.
///
/// Only the starter stacks of true inputs depend on the assignment; they
/// form a prefix of the script.
pub fn compile_to_2dla(c: &NorCircuit, asg: &Assignment) -> Result<CompiledCircuit, CircuitError> {
    check_assignment(c, asg)?;
    let mut signals: Vec<Signal> = Vec::new();
    let mut lane_of: HashMap<&str, usize> = HashMap::new();
    for g in &c.gates {
        let id = match g {
            Gate::Input(n) => {
                signals.push(Signal::Input(n.clone()));
                signals.len() - 1
            }
            Gate::Nor(_, a, b) => {
                signals.push(Signal::Nor(lane_of[a.as_str()], lane_of[b.as_str()]));
                signals.len() - 1
            }
            Gate::Or(_, a) => {
                let x = lane_of[a.as_str()];
                signals.push(Signal::Nor(x, x));
                let inv = signals.len() - 1;
                signals.push(Signal::Nor(inv, inv));
                signals.len() - 1
            }
        };
        lane_of.insert(g.name(), id);
    }
    let gadgets = signals.iter().filter(|s| matches!(s, Signal::Nor(..))).count();
    let inputs = signals.len() - gadgets;
    let width = LEFT_MARGIN + LANE_GAP * signals.len() + 2;
    let height = GADGET_PITCH * gadgets + 7;
    let n = width.max(height).max(10 * c.depth()).max(5 * inputs).max(10);
    if n > MAX_LATTICE {
        return Err(CircuitError::LayoutOverflow { needed: n });
    }

    let col = |s: usize| LEFT_MARGIN + LANE_GAP * s;
    let mut throws = Vec::new();
    let mut top = vec![0usize; signals.len()];
    let mut probe_cell = vec![Cell::new(n, 1); signals.len()];
    for (s, sig) in signals.iter().enumerate() {
        if let Signal::Input(name) = sig {
            if asg[name] {
                throws.extend((0..STARTER).map(|_| Trajectory::straight_down(col(s), n)));
            }
            top[s] = n + 1 - STARTER;
            probe_cell[s] = Cell::new(n, col(s));
        }
    }
    let starter_throws = throws.len();

    let grow = |throws: &mut Vec<Trajectory>, lane: usize, top: &mut usize, to_row: usize| {
        while *top > to_row {
            let x = *top - 1;
            let mut moves = vec![Direction::Down; x - 1];
            moves.extend([Direction::Right, Direction::Right]);
            moves.extend(std::iter::repeat_n(Direction::Down, n - x));
            throws.push(Trajectory::new(col(lane), moves));
            *top = x;
        }
    };

    let mut row = n - 5;
    for (g, sig) in signals.iter().enumerate() {
        let Signal::Nor(a, b) = *sig else { continue };
        let (p, q) = (a.min(b), a.max(b));
        grow(&mut throws, p, &mut top[p], row);
        grow(&mut throws, q, &mut top[q], row);
        throws.extend((row + 1..=n).map(|_| Trajectory::straight_down(col(g), n)));
        let mut moves = vec![Direction::Down; row - 1];
        moves.extend(std::iter::repeat_n(Direction::Right, col(g) - col(p) + 1));
        throws.push(Trajectory::new(col(p) - 1, moves));
        top[g] = row;
        probe_cell[g] = Cell::new(row, col(g));
        row -= GADGET_PITCH;
    }

    let probes = c.gates.iter().map(|g| (g.name().to_string(), probe_cell[lane_of[g.name()]])).collect();
    Ok(CompiledCircuit { script: ThrowScript::new(n, throws), probes, starter_throws })
}

/// Gate values read back from a simulated figure.
pub fn read_probes(compiled: &CompiledCircuit, fig: &Figure) -> BTreeMap<String, bool> {
    compiled.probes.iter().map(|(name, &cell)| (name.clone(), fig.contains(cell))).collect()
}

/// Compiles, simulates under `k` directions, and compares every probe with
/// the evaluator.
pub fn check_compiled_with(c: &NorCircuit, asg: &Assignment, k: u8) -> Result<bool, CircuitError> {
    let compiled = compile_to_2dla(c, asg)?;
    let dirs = DirectionSet::new(k).map_err(|e| CircuitError::Assignment(e.to_string()))?;
    let fig = run_script(&compiled.script, dirs).expect("compiled scripts use only Down and Right");
    Ok(read_probes(&compiled, &fig) == evaluate(c, asg)?)
}

pub fn check_compiled(c: &NorCircuit, asg: &Assignment) -> Result<bool, CircuitError> {
    check_compiled_with(c, asg, 2)
}

/// Random layered circuit: `inputs` inputs, then `gates` NOR/OR gates, each
/// reading from the layer directly below it.
pub fn random_circuit(inputs: usize, gates: usize, seed: u64) -> NorCircuit {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let inputs = inputs.max(1);
    let mut list: Vec<Gate> = (0..inputs).map(|i| Gate::Input(format!("x{i}"))).collect();
    let mut by_layer: Vec<Vec<String>> = vec![list.iter().map(|g| g.name().to_string()).collect()];
    for i in 0..gates {
        let top = by_layer.len() - 1;
        // Favour building on the newest layer once it has two signals.
        let from = if by_layer[top].len() >= 2 && rng.gen_bool(0.5) { top } else { rng.gen_range(0..=top) };
        let pool = &by_layer[from];
        let name = format!("g{i}");
        let a = pool[rng.gen_range(0..pool.len())].clone();
        let gate = if rng.gen_bool(0.2) {
            Gate::Or(name.clone(), a)
        } else {
            Gate::Nor(name.clone(), a, pool[rng.gen_range(0..pool.len())].clone())
        };
        if from + 1 == by_layer.len() {
            by_layer.push(Vec::new());
        }
        by_layer[from + 1].push(name);
        list.push(gate);
    }
    let outputs = by_layer.last().cloned().unwrap_or_default();
    NorCircuit::new(list, outputs).expect("generator builds layered acyclic circuits")
}

/// Every layered circuit with at most `max_gates` gates counting inputs,
/// at least one non-input gate, and gates listed in construction order.
pub fn small_circuits(max_gates: usize) -> Vec<NorCircuit> {
    fn extend(gates: Vec<Gate>, layers: Vec<usize>, left: usize, out: &mut Vec<NorCircuit>) {
        if gates.iter().any(|g| !matches!(g, Gate::Input(_))) {
            out.push(NorCircuit::new(gates.clone(), vec![]).expect("enumerated circuits are layered"));
        }
        if left == 0 {
            return;
        }
        let name = format!("g{}", gates.len());
        for a in 0..gates.len() {
            let mut push = |g: Gate, layer: usize| {
                let (mut gs, mut ls) = (gates.clone(), layers.clone());
                gs.push(g);
                ls.push(layer);
                extend(gs, ls, left - 1, out);
            };
            push(Gate::Or(name.clone(), gates[a].name().into()), layers[a] + 1);
            for b in a..gates.len() {
                if layers[a] == layers[b] {
                    push(Gate::Nor(name.clone(), gates[a].name().into(), gates[b].name().into()), layers[a] + 1);
                }
            }
        }
    }
    let mut all = Vec::new();
    for inputs in 1..max_gates {
        let gates = (0..inputs).map(|i| Gate::Input(format!("x{i}"))).collect();
        extend(gates, vec![0; inputs], max_gates - inputs, &mut all);
    }
    all
}

/// Every assignment of the circuit's inputs, in binary counting order.
pub fn all_assignments(c: &NorCircuit) -> Vec<Assignment> {
    let names: Vec<&str> = c.inputs().collect();
    (0u64..1 << names.len())
        .map(|m| names.iter().enumerate().map(|(i, n)| (n.to_string(), m >> i & 1 == 1)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asg(pairs: &[(&str, bool)]) -> Assignment {
        pairs.iter().map(|&(n, v)| (n.to_string(), v)).collect()
    }

    #[test]
    fn parse_and_layer() {
        let c = parse_circuit("input a\ninput b\nnor g a b\noutput g\n").unwrap();
        assert_eq!(c.layers, vec![0, 0, 1]);
        assert_eq!(c.depth(), 1);
        let w = parse_circuit("input a\nor w a\noutput w").unwrap();
        assert_eq!(w.layers, vec![0, 1]);
        assert_eq!(parse_circuit("input a\nnor g a z"), Err(CircuitError::UnknownGateRef("z".into())));
        assert!(matches!(parse_circuit("nor x y y\nnor y x x"), Err(CircuitError::CycleDetected(_))));
        assert!(matches!(
            parse_circuit("input a\ninput b\nnor c a b\nnor d c a"),
            Err(CircuitError::NotLayered { .. })
        ));
        assert!(matches!(parse_circuit("and g a b"), Err(CircuitError::Syntax { line: 1, .. })));
    }

    #[test]
    fn forward_references_are_sorted() {
        let c = parse_circuit("nor g a b\ninput a\ninput b").unwrap();
        assert_eq!(c.gates.last().unwrap().name(), "g");
    }

    #[test]
    fn evaluation() {
        let c = parse_circuit("input a\ninput b\nnor g a b").unwrap();
        assert!(evaluate(&c, &asg(&[("a", false), ("b", false)])).unwrap()["g"]);
        assert!(!evaluate(&c, &asg(&[("a", true), ("b", false)])).unwrap()["g"]);
        assert!(evaluate(&c, &asg(&[("a", true)])).is_err());
    }

    #[test]
    fn assignments() {
        let c = parse_circuit("input a\ninput b\nnor g a b").unwrap();
        assert_eq!(parse_assignment("a=1, b=0", &c).unwrap(), asg(&[("a", true), ("b", false)]));
        assert!(parse_assignment("a=1", &c).is_err());
        assert!(parse_assignment("a=1,b=2", &c).is_err());
        assert!(parse_assignment("a=1,b=0,z=1", &c).is_err());
    }

    #[test]
    fn identity_wire() {
        let c = parse_circuit("input a\nor w a\noutput w").unwrap();
        for v in [true, false] {
            let a = asg(&[("a", v)]);
            let compiled = compile_to_2dla(&c, &a).unwrap();
            let fig = run_script(&compiled.script, DirectionSet::new(2).unwrap()).unwrap();
            assert_eq!(fig.contains(compiled.probes["w"]), v);
        }
    }

    #[test]
    fn single_nor_truth_table() {
        let c = parse_circuit("input a\ninput b\nnor g a b\noutput g").unwrap();
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            let a = asg(&[("a", x), ("b", y)]);
            assert!(check_compiled(&c, &a).unwrap(), "a={x} b={y}");
            assert!(check_compiled_with(&c, &a, 3).unwrap());
        }
    }

    #[test]
    fn lanes_and_moves() {
        let c = parse_circuit("input a\ninput b\nnor g a b\nor h g").unwrap();
        let compiled = compile_to_2dla(&c, &asg(&[("a", true), ("b", true)])).unwrap();
        assert_eq!(compiled.starter_throws, 2 * STARTER);
        assert!(compiled.script.n_size >= 10);
        let mut cells: Vec<_> = compiled.probes.values().collect();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), compiled.probes.len());
        assert!(compiled
            .script
            .trajectories
            .iter()
            .all(|t| t.moves.iter().all(|d| matches!(d, Direction::Down | Direction::Right))));
    }
}
