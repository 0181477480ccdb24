//! Deterministic k-direction DLA driven by explicit trajectories.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lattice::{Cell, Direction, DirectionSet, Figure};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub start_col: usize,
    pub moves: Vec<Direction>,
}

impl Trajectory {
    pub fn new(start_col: usize, moves: Vec<Direction>) -> Self {
        Trajectory { start_col, moves }
    }

    /// A trajectory that falls straight down column `col` of a size-`n` lattice.
    pub fn straight_down(col: usize, n: usize) -> Self {
        Trajectory::new(col, vec![Direction::Down; n])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThrowScript {
    pub n_size: usize,
    pub max_len: usize,
    pub trajectories: Vec<Trajectory>,
}

impl ThrowScript {
    pub fn new(n_size: usize, trajectories: Vec<Trajectory>) -> Self {
        let max_len = trajectories.iter().map(|t| t.moves.len()).max().unwrap_or(0);
        ThrowScript { n_size, max_len, trajectories }
    }

    /// One straight-down throw per entry of `cols`.
    pub fn from_drops(n_size: usize, cols: &[usize]) -> Self {
        ThrowScript::new(n_size, cols.iter().map(|&c| Trajectory::straight_down(c, n_size)).collect())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscardReason {
    LeftLattice,
    MovesExhausted,
    /// The entry cell on the top edge was already occupied.
    EntryBlocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Stuck(Cell),
    Discarded(DiscardReason),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("move {index} ({dir:?}) of trajectory {throw} is not allowed with k = {k}")]
    MoveNotAllowed { throw: usize, index: usize, dir: Direction, k: u8 },
    #[error("trajectory {throw} starts at column {col}, outside 1..={n}")]
    BadStartColumn { throw: usize, col: usize, n: usize },
    #[error("site {0} is outside the lattice")]
    SiteOutOfRange(Cell),
    #[error("trajectory {throw} has {len} moves, more than the script limit {max_len}")]
    TooLong { throw: usize, len: usize, max_len: usize },
}

fn check_trajectory(throw: usize, traj: &Trajectory, n: usize, dirs: DirectionSet) -> Result<(), SimError> {
    if !(1..=n).contains(&traj.start_col) {
        return Err(SimError::BadStartColumn { throw, col: traj.start_col, n });
    }
    if let Some((index, &dir)) = traj.moves.iter().enumerate().find(|(_, d)| !dirs.allows(**d)) {
        return Err(SimError::MoveNotAllowed { throw, index, dir, k: dirs.k() });
    }
    Ok(())
}

/// Walks one particle from `(1, start_col)` without modifying `fig`.
///
/// The particle sticks at the first visited cell (the entry cell included)
/// that is 4-adjacent to an occupied cell or to the ground.
pub fn run_trajectory(fig: &Figure, traj: &Trajectory, dirs: DirectionSet) -> Result<Outcome, SimError> {
    check_trajectory(0, traj, fig.n_size(), dirs)?;
    Ok(walk(fig, traj))
}

fn walk(fig: &Figure, traj: &Trajectory) -> Outcome {
    let n = fig.n_size() as isize;
    let mut pos = Cell::new(1, traj.start_col);
    if fig.contains(pos) {
        return Outcome::Discarded(DiscardReason::EntryBlocked);
    }
    for &dir in &traj.moves {
        if fig.touches_solid(pos) {
            return Outcome::Stuck(pos);
        }
        let (dr, dc) = dir.delta();
        let (r, c) = (pos.row as isize + dr, pos.col as isize + dc);
        if r < 1 || r > n || c < 1 || c > n {
            return Outcome::Discarded(DiscardReason::LeftLattice);
        }
        pos = Cell::new(r as usize, c as usize);
    }
    if fig.touches_solid(pos) {
        Outcome::Stuck(pos)
    } else {
        Outcome::Discarded(DiscardReason::MovesExhausted)
    }
}

fn check_script(script: &ThrowScript, dirs: DirectionSet) -> Result<(), SimError> {
    for (i, t) in script.trajectories.iter().enumerate() {
        if t.moves.len() > script.max_len {
            return Err(SimError::TooLong { throw: i, len: t.moves.len(), max_len: script.max_len });
        }
        check_trajectory(i, t, script.n_size, dirs)?;
    }
    Ok(())
}

/// Runs every throw in order on an initially empty lattice and records each outcome.
pub fn run_script_outcomes(script: &ThrowScript, dirs: DirectionSet) -> Result<(Figure, Vec<Outcome>), SimError> {
    check_script(script, dirs)?;
    let mut fig = Figure::new(script.n_size);
    let mut outcomes = Vec::with_capacity(script.len());
    for t in &script.trajectories {
        let out = walk(&fig, t);
        if let Outcome::Stuck(c) = out {
            fig.insert(c);
        }
        outcomes.push(out);
    }
    Ok((fig, outcomes))
}

pub fn run_script(script: &ThrowScript, dirs: DirectionSet) -> Result<Figure, SimError> {
    run_script_outcomes(script, dirs).map(|(f, _)| f)
}

/// k-DLA prediction: is `site` occupied once every particle has been thrown?
pub fn predict(script: &ThrowScript, dirs: DirectionSet, site: Cell) -> Result<bool, SimError> {
    if !(1..=script.n_size).contains(&site.row) || !(1..=script.n_size).contains(&site.col) {
        return Err(SimError::SiteOutOfRange(site));
    }
    Ok(run_script(script, dirs)?.contains(site))
}

/// Seeded random script: uniform entry columns and uniform moves over `dirs`,
/// every trajectory exactly `l` moves long.
pub fn random_script(n: usize, m: usize, l: usize, dirs: DirectionSet, seed: u64) -> ThrowScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let allowed = dirs.allowed();
    let trajectories = (0..m)
        .map(|_| {
            let start = rng.gen_range(1..=n);
            let moves = (0..l).map(|_| allowed[rng.gen_range(0..allowed.len())]).collect();
            Trajectory::new(start, moves)
        })
        .collect();
    ThrowScript { n_size: n, max_len: l, trajectories }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptParseError {
    #[error("missing header line \"N M L\"")]
    MissingHeader,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("header announces {expected} trajectories, found {found}")]
    CountMismatch { expected: usize, found: usize },
}

impl fmt::Display for ThrowScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.n_size, self.trajectories.len(), self.max_len)?;
        for t in &self.trajectories {
            if t.moves.is_empty() {
                writeln!(f, "{} -", t.start_col)?;
            } else {
                let moves: String = t.moves.iter().map(|d| d.as_char()).collect();
                writeln!(f, "{} {}", t.start_col, moves)?;
            }
        }
        Ok(())
    }
}

/// Parses the text format: a header `"N M L"` followed by `M` lines
/// `"<start_col> <moves>"`, moves over `{D,R,L,U}` or `-` when empty.
pub fn parse_script(text: &str) -> Result<ThrowScript, ScriptParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(ScriptParseError::MissingHeader)?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| ScriptParseError::Malformed { line: hline, msg: format!("header: {e}") })?;
    let [n, m, l] = nums[..] else {
        return Err(ScriptParseError::Malformed { line: hline, msg: "header needs exactly N M L".into() });
    };
    let mut trajectories = Vec::with_capacity(m);
    for (line, text) in lines {
        let mut parts = text.split_whitespace();
        let start = parts
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| ScriptParseError::Malformed { line, msg: "bad start column".into() })?;
        let moves_text = parts.next().unwrap_or("-");
        if parts.next().is_some() {
            return Err(ScriptParseError::Malformed { line, msg: "trailing tokens".into() });
        }
        let moves = if moves_text == "-" {
            Vec::new()
        } else {
            moves_text
                .chars()
                .map(|c| {
                    Direction::from_char(c)
                        .ok_or_else(|| ScriptParseError::Malformed { line, msg: format!("unknown move {c:?}") })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        trajectories.push(Trajectory::new(start, moves));
    }
    if trajectories.len() != m {
        return Err(ScriptParseError::CountMismatch { expected: m, found: trajectories.len() });
    }
    Ok(ThrowScript { n_size: n, max_len: l, trajectories })
}
