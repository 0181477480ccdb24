//! Lattice coordinates, figures and their text/bitmap encodings.
//!
//! Rows are numbered from the top: row 1 is the top edge of an `N x N`
//! lattice and row `N + 1` is the ground, which is always occupied and never
//! stored. The height of a cell above the ground is `N + 1 - row`.

use std::fmt;

use thiserror::Error;

/// A lattice site, 1-indexed. Ordered row-major (top to bottom, then left to right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Shifted copy, or `None` if either coordinate would drop below 1.
    pub fn offset(self, dr: isize, dc: isize) -> Option<Cell> {
        let row = self.row as isize + dr;
        let col = self.col as isize + dc;
        (row >= 1 && col >= 1).then(|| Cell::new(row as usize, col as usize))
    }

    /// Height above the ground in a lattice of size `n`.
    pub fn height(self, n: usize) -> usize {
        n + 1 - self.row
    }

    /// The cell at `height` in column `col` of a lattice of size `n`.
    pub fn from_height(n: usize, height: usize, col: usize) -> Cell {
        Cell::new(n + 1 - height, col)
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col) == 1
    }

    /// The four lattice neighbours that have positive coordinates.
    pub fn neighbors(self) -> impl Iterator<Item = Cell> {
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(dr, dc)| self.offset(dr, dc))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Directions of motion. The first `k` of `[Down, Right, Left, Up]` make up
/// the moves allowed in k-DLA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Right,
    Left,
    Up,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Down, Direction::Right, Direction::Left, Direction::Up];

    /// Position of this direction in the canonical order, 1-based.
    pub fn rank(self) -> u8 {
        match self {
            Direction::Down => 1,
            Direction::Right => 2,
            Direction::Left => 3,
            Direction::Up => 4,
        }
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Down => (1, 0),
            Direction::Right => (0, 1),
            Direction::Left => (0, -1),
            Direction::Up => (-1, 0),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Direction::Down => 'D',
            Direction::Right => 'R',
            Direction::Left => 'L',
            Direction::Up => 'U',
        }
    }

    pub fn from_char(c: char) -> Option<Direction> {
        match c {
            'D' => Some(Direction::Down),
            'R' => Some(Direction::Right),
            'L' => Some(Direction::Left),
            'U' => Some(Direction::Up),
            _ => None,
        }
    }
}

/// The allowed directions `{d_1, ..., d_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectionSet {
    k: u8,
}

impl DirectionSet {
    pub fn new(k: u8) -> Result<Self, FigureError> {
        if (1..=4).contains(&k) {
            Ok(DirectionSet { k })
        } else {
            Err(FigureError::BadDirectionCount(k))
        }
    }

    pub fn k(self) -> u8 {
        self.k
    }

    pub fn allows(self, d: Direction) -> bool {
        d.rank() <= self.k
    }

    pub fn allowed(self) -> &'static [Direction] {
        &Direction::ALL[..self.k as usize]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FigureError {
    #[error("illegal character {ch:?} at line {line}, column {col}")]
    IllegalCharacter { line: usize, col: usize, ch: char },
    #[error("line {line} has {len} characters, lattice is only {n} wide")]
    LineTooLong { line: usize, len: usize, n: usize },
    #[error("{rows} rows given for a lattice of size {n}")]
    TooManyRows { rows: usize, n: usize },
    #[error("cell {cell} lies outside a lattice of size {n}")]
    OutOfRange { cell: Cell, n: usize },
    #[error("lattice size must be positive")]
    EmptyLattice,
    #[error("direction count must be between 1 and 4, got {0}")]
    BadDirectionCount(u8),
}

/// Occupancy of an `N x N` lattice above the implicit ground row.
///
/// Stored as a row-major bit grid so that the simulator's adjacency checks
/// stay cheap on the large lattices used by the circuit compiler.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Figure {
    n: usize,
    count: usize,
    bits: Vec<u64>,
}

impl Figure {
    pub fn new(n: usize) -> Figure {
        assert!(n >= 1, "lattice size must be positive");
        Figure {
            n,
            count: 0,
            bits: vec![0; (n * n).div_ceil(64)],
        }
    }

    pub fn from_cells<I: IntoIterator<Item = Cell>>(n: usize, cells: I) -> Result<Figure, FigureError> {
        if n == 0 {
            return Err(FigureError::EmptyLattice);
        }
        let mut fig = Figure::new(n);
        for cell in cells {
            if !fig.in_lattice(cell) {
                return Err(FigureError::OutOfRange { cell, n });
            }
            fig.insert(cell);
        }
        Ok(fig)
    }

    pub fn n_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn in_lattice(&self, cell: Cell) -> bool {
        (1..=self.n).contains(&cell.row) && (1..=self.n).contains(&cell.col)
    }

    fn index(&self, cell: Cell) -> usize {
        (cell.row - 1) * self.n + (cell.col - 1)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        if !self.in_lattice(cell) {
            return false;
        }
        let i = self.index(cell);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// True for stored cells and for every cell of the ground row.
    pub fn is_solid(&self, cell: Cell) -> bool {
        (cell.row == self.n + 1 && (1..=self.n).contains(&cell.col)) || self.contains(cell)
    }

    pub fn is_ground(&self, cell: Cell) -> bool {
        cell.row == self.n + 1 && (1..=self.n).contains(&cell.col)
    }

    /// Whether `cell` is 4-adjacent to a stored cell or to the ground.
    pub fn touches_solid(&self, cell: Cell) -> bool {
        cell.neighbors().any(|nb| self.is_solid(nb))
    }

    /// Inserts a cell, returning `false` if it was already present.
    ///
    /// Panics if the cell lies outside the lattice.
    pub fn insert(&mut self, cell: Cell) -> bool {
        assert!(self.in_lattice(cell), "cell {cell} outside lattice of size {}", self.n);
        let i = self.index(cell);
        let mask = 1u64 << (i % 64);
        let fresh = self.bits[i / 64] & mask == 0;
        if fresh {
            self.bits[i / 64] |= mask;
            self.count += 1;
        }
        fresh
    }

    pub fn remove(&mut self, cell: Cell) -> bool {
        if !self.contains(cell) {
            return false;
        }
        let i = self.index(cell);
        self.bits[i / 64] &= !(1u64 << (i % 64));
        self.count -= 1;
        true
    }

    /// Occupied cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                let i = w * 64 + b;
                Some(Cell::new(i / self.n + 1, i % self.n + 1))
            })
        })
    }

    /// Heights of the occupied cells of column `col`, ascending.
    pub fn column_heights(&self, col: usize) -> Vec<usize> {
        let mut hs: Vec<usize> = (1..=self.n)
            .filter(|&row| self.contains(Cell::new(row, col)))
            .map(|row| self.n + 1 - row)
            .collect();
        hs.sort_unstable();
        hs
    }
}

impl fmt::Debug for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Figure(n={}, len={})", self.n, self.count)?;
        f.write_str(&String::from_utf8_lossy(&render_figure(self, RenderFormat::Ascii)))
    }
}

/// Parses the `'.'`/`'#'` text encoding; line 1 is the top row. Short lines and
/// missing rows are read as empty.
pub fn parse_figure(text: &str, n: usize) -> Result<Figure, FigureError> {
    if n == 0 {
        return Err(FigureError::EmptyLattice);
    }
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() > n {
        return Err(FigureError::TooManyRows { rows: lines.len(), n });
    }
    let mut fig = Figure::new(n);
    for (li, line) in lines.iter().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let len = line.chars().count();
        if len > n {
            return Err(FigureError::LineTooLong { line: li + 1, len, n });
        }
        for (ci, ch) in line.chars().enumerate() {
            match ch {
                '.' => {}
                '#' => {
                    fig.insert(Cell::new(li + 1, ci + 1));
                }
                _ => return Err(FigureError::IllegalCharacter { line: li + 1, col: ci + 1, ch }),
            }
        }
    }
    Ok(fig)
}

/// Reads a figure file whose lattice size is implied by its contents: the
/// larger of its row count and widest line, unless `n` is given. A final
/// all-`'#'` line is taken as a rendered ground row and dropped when the
/// file has one row more than the lattice.
pub fn read_figure(text: &str, n: Option<usize>) -> Result<Figure, FigureError> {
    let mut lines: Vec<&str> = text.lines().map(|l| l.trim_end()).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    let width = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let is_ground = |l: &str| !l.is_empty() && l.chars().all(|c| c == '#');
    let ground_line = lines.len() >= 2 && lines.last().is_some_and(|l| is_ground(l));
    let n = n.unwrap_or_else(|| {
        let rows = if ground_line && lines.len() > width { lines.len() - 1 } else { lines.len() };
        rows.max(width)
    });
    if ground_line && lines.len() == n + 1 {
        lines.pop();
    }
    parse_figure(&lines.join("\n"), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    /// Plain PBM (`P1`), ground row included.
    Pbm,
}

pub fn render_figure(fig: &Figure, format: RenderFormat) -> Vec<u8> {
    let n = fig.n_size();
    let mut out = String::new();
    match format {
        RenderFormat::Ascii => {
            for row in 1..=n {
                for col in 1..=n {
                    out.push(if fig.contains(Cell::new(row, col)) { '#' } else { '.' });
                }
                out.push('\n');
            }
            out.extend(std::iter::repeat_n('#', n));
            out.push('\n');
        }
        RenderFormat::Pbm => {
            out.push_str(&format!("P1\n{} {}\n", n, n + 1));
            for row in 1..=n + 1 {
                let line: Vec<&str> = (1..=n)
                    .map(|col| if fig.is_solid(Cell::new(row, col)) { "1" } else { "0" })
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
    }
    out.into_bytes()
}

/// Embeds `fig` in a lattice of size `N + 2*margin`: `margin` empty columns on
/// each side, `2*margin` empty rows on top, and the figure still resting on the
/// ground.
pub fn pad_figure(fig: &Figure, margin: usize) -> Figure {
    let n = fig.n_size() + 2 * margin;
    let mut out = Figure::new(n);
    for c in fig.cells() {
        out.insert(Cell::new(c.row + 2 * margin, c.col + margin));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_figure_infers_size_and_ground() {
        let f = read_figure("...\n.#.\n##.\n###\n", None).unwrap();
        assert_eq!(f.n_size(), 3);
        assert_eq!(f.len(), 3);
        let g = read_figure("....\n#...\n", None).unwrap();
        assert_eq!(g.n_size(), 4);
        assert!(g.contains(Cell::new(2, 1)));
        assert_eq!(read_figure("#\n", Some(2)).unwrap().len(), 1);
    }

    #[test]
    fn parse_edge_cases() {
        assert!(parse_figure("", 5).unwrap().is_empty());
        let f = parse_figure("..#", 3).unwrap();
        assert_eq!(f.cells().collect::<Vec<_>>(), vec![Cell::new(1, 3)]);
        assert_eq!(
            parse_figure("..x", 3),
            Err(FigureError::IllegalCharacter { line: 1, col: 3, ch: 'x' })
        );
        assert!(matches!(parse_figure("....", 3), Err(FigureError::LineTooLong { .. })));
        assert!(matches!(parse_figure(".\n.\n.\n.", 3), Err(FigureError::TooManyRows { .. })));
    }

    #[test]
    fn render_ascii() {
        let empty = Figure::new(2);
        assert_eq!(render_figure(&empty, RenderFormat::Ascii), b"..\n..\n##\n");
        let f = Figure::from_cells(2, [Cell::new(2, 1)]).unwrap();
        assert_eq!(render_figure(&f, RenderFormat::Ascii), b"..\n#.\n##\n");
    }

    #[test]
    fn render_pbm_has_ground() {
        let f = Figure::from_cells(2, [Cell::new(1, 2)]).unwrap();
        let s = String::from_utf8(render_figure(&f, RenderFormat::Pbm)).unwrap();
        assert_eq!(s, "P1\n2 3\n0 1\n0 0\n1 1\n");
    }

    #[test]
    fn pad_shifts_and_keeps_ground_contact() {
        assert_eq!(pad_figure(&Figure::new(2), 3), Figure::new(8));
        let f = Figure::from_cells(2, [Cell::new(2, 1)]).unwrap();
        let p = pad_figure(&f, 1);
        assert_eq!(p.n_size(), 4);
        assert_eq!(p.cells().collect::<Vec<_>>(), vec![Cell::new(4, 2)]);
        assert!(p.touches_solid(Cell::new(4, 2)));
    }

    #[test]
    fn heights() {
        let c = Cell::new(3, 1);
        assert_eq!(c.height(7), 5);
        assert_eq!(Cell::from_height(7, 5, 1), c);
        assert_eq!(Cell::new(8, 1).height(7), 0);
    }

    #[test]
    fn direction_sets_are_prefixes() {
        let two = DirectionSet::new(2).unwrap();
        assert!(two.allows(Direction::Down) && two.allows(Direction::Right));
        assert!(!two.allows(Direction::Left));
        assert_eq!(DirectionSet::new(5), Err(FigureError::BadDirectionCount(5)));
    }

    #[test]
    fn insert_remove_count() {
        let mut f = Figure::new(9);
        assert!(f.insert(Cell::new(9, 9)));
        assert!(!f.insert(Cell::new(9, 9)));
        assert_eq!(f.len(), 1);
        assert!(f.remove(Cell::new(9, 9)));
        assert!(f.is_empty());
    }
}
