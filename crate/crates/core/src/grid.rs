//! Bumpless pipe dream tile grids and their alternating sign matrices.
//!
//! Grids use matrix coordinates: row 1 is the top row, column 1 the leftmost
//! column. Every pipe enters through the south edge of a column and leaves
//! through the east edge of a row; pipe `y -> x` enters column `y` and exits row `x`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{Permutation, MAX_SIZE};

const N: u8 = 1;
const S: u8 = 2;
const W: u8 = 4;
const E: u8 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tile {
    Blank,
    Horizontal,
    Vertical,
    Cross,
    /// Connects the south and east edges.
    RElbow,
    /// Connects the west and north edges.
    JElbow,
    /// Two strands touching without crossing: south to east and west to north.
    /// Only produced by K-theoretic resolution.
    Bump,
}

impl Tile {
    /// Open sides as a bitmask of N/S/W/E.
    pub(crate) fn sides(self) -> u8 {
        match self {
            Tile::Blank => 0,
            Tile::Horizontal => W | E,
            Tile::Vertical => N | S,
            Tile::Cross | Tile::Bump => N | S | W | E,
            Tile::RElbow => S | E,
            Tile::JElbow => N | W,
        }
    }

    pub fn north_open(self) -> bool {
        self.sides() & N != 0
    }

    pub fn south_open(self) -> bool {
        self.sides() & S != 0
    }

    pub fn west_open(self) -> bool {
        self.sides() & W != 0
    }

    pub fn east_open(self) -> bool {
        self.sides() & E != 0
    }

    /// Tile of a raw (bump-free) grid with the given open sides.
    pub(crate) fn from_sides(north: bool, south: bool, west: bool, east: bool) -> Option<Tile> {
        Some(match (north, south, west, east) {
            (false, false, false, false) => Tile::Blank,
            (false, false, true, true) => Tile::Horizontal,
            (true, true, false, false) => Tile::Vertical,
            (true, true, true, true) => Tile::Cross,
            (false, true, false, true) => Tile::RElbow,
            (true, false, true, false) => Tile::JElbow,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Tile::Blank => '.',
            Tile::Horizontal => '-',
            Tile::Vertical => '|',
            Tile::Cross => '+',
            Tile::RElbow => 'r',
            Tile::JElbow => 'j',
            Tile::Bump => 'b',
        }
    }

    pub fn from_char(c: char) -> Option<Tile> {
        Some(match c {
            '.' => Tile::Blank,
            '-' => Tile::Horizontal,
            '|' => Tile::Vertical,
            '+' => Tile::Cross,
            'r' => Tile::RElbow,
            'j' => Tile::JElbow,
            'b' => Tile::Bump,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    North,
    West,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("expected {expected} tiles, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("unknown tile character {0:?}")]
    BadTile(char),
    #[error("grid of size {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("strand broken at cell ({row}, {col})")]
    BrokenStrand { row: usize, col: usize },
    #[error("strand leaks through the {edge:?} boundary at index {index}")]
    BoundaryLeak { edge: Edge, index: usize },
    #[error("bump tile at ({row}, {col}) in a raw grid")]
    UnexpectedBump { row: usize, col: usize },
    #[error("elbows do not alternate in {0}")]
    ElbowsNotAlternating(String),
    #[error("pipes do not form a permutation")]
    NotBijective,
    #[error("inconsistent alternating sign matrix: {0}")]
    InconsistentAsm(String),
    #[error("bad grid json: {0}")]
    Json(String),
}

/// An `n x n` tile grid. Construction only checks the shape; [`BpdGrid::validate`]
/// checks that the tiles form a bumpless pipe dream.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BpdGrid {
    n: usize,
    tiles: Vec<Tile>,
}

impl BpdGrid {
    pub fn new(n: usize, tiles: Vec<Tile>) -> Result<Self, GridError> {
        if n > MAX_SIZE {
            return Err(GridError::TooLarge(n));
        }
        if tiles.len() != n * n {
            return Err(GridError::Shape {
                expected: n * n,
                found: tiles.len(),
            });
        }
        Ok(BpdGrid { n, tiles })
    }

    pub(crate) fn from_parts_unchecked(n: usize, tiles: Vec<Tile>) -> Self {
        debug_assert_eq!(tiles.len(), n * n);
        BpdGrid { n, tiles }
    }

    /// One row per line using `. - | + r j b`; blank lines are ignored.
    pub fn from_ascii(text: &str) -> Result<Self, GridError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = rows.len();
        let mut tiles = Vec::with_capacity(n * n);
        for row in &rows {
            let before = tiles.len();
            for c in row.chars() {
                tiles.push(Tile::from_char(c).ok_or(GridError::BadTile(c))?);
            }
            if tiles.len() - before != n {
                return Err(GridError::Shape {
                    expected: n,
                    found: tiles.len() - before,
                });
            }
        }
        BpdGrid::new(n, tiles)
    }

    /// The unique bumpless pipe dream of the identity: r-elbows on the diagonal.
    pub fn identity(n: usize) -> Self {
        let mut tiles = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                tiles.push(match i.cmp(&j) {
                    std::cmp::Ordering::Equal => Tile::RElbow,
                    std::cmp::Ordering::Greater => Tile::Vertical,
                    std::cmp::Ordering::Less => Tile::Horizontal,
                });
            }
        }
        BpdGrid { n, tiles }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Tile at 1-based `(row, col)`.
    pub fn tile(&self, row: usize, col: usize) -> Tile {
        self.tiles[(row - 1) * self.n + (col - 1)]
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Tile]> {
        self.tiles.chunks(self.n.max(1)).take(self.n)
    }

    pub fn count(&self, tile: Tile) -> usize {
        self.tiles.iter().filter(|&&t| t == tile).count()
    }

    pub fn blank_count(&self) -> usize {
        self.count(Tile::Blank)
    }

    pub fn jelbow_count(&self) -> usize {
        self.count(Tile::JElbow)
    }

    /// 1-based positions holding `tile`, row-major.
    pub fn positions(&self, tile: Tile) -> Vec<(usize, usize)> {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == tile)
            .map(|(k, _)| (k / self.n + 1, k % self.n + 1))
            .collect()
    }

    pub fn to_ascii(&self) -> String {
        self.rows()
            .map(|r| r.iter().map(|t| t.to_char()).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn validate(&self) -> Result<(), GridError> {
        check_tiles(self.n, &self.tiles, false)?;
        let exits = sweep(self.n, &self.tiles, ScanOrder::ColumnMajor, SweepMode::Trace).exits;
        let word: Vec<usize> = exits.iter().map(|&x| x as usize).collect();
        Permutation::parse(&word).map_err(|_| GridError::NotBijective)?;
        Ok(())
    }

    /// Follows every strand; crosses are pass-through.
    ///
    /// Expects a grid that passed [`BpdGrid::validate`].
    pub fn trace(&self) -> PipeTrace {
        let result = sweep(self.n, &self.tiles, ScanOrder::ColumnMajor, SweepMode::Trace);
        let word: Vec<usize> = result.exits.iter().map(|&x| x as usize).collect();
        let perm = Permutation::parse(&word).expect("trace requires a validated grid");
        PipeTrace {
            perm,
            crossings: result.crossings,
            jelbow_count: self.jelbow_count(),
            blank_count: self.blank_count(),
        }
    }

    /// `w_B` alone, without crossing bookkeeping.
    pub fn permutation(&self) -> Permutation {
        self.trace().perm
    }

    pub fn to_asm(&self) -> Asm {
        let entries = self
            .tiles
            .iter()
            .map(|t| match t {
                Tile::RElbow => 1,
                Tile::JElbow => -1,
                _ => 0,
            })
            .collect();
        Asm { n: self.n, entries }
    }

    pub fn from_asm(asm: &Asm) -> BpdGrid {
        let mut tiles = Vec::with_capacity(asm.n * asm.n);
        tiles_from_entries(asm.n, &asm.entries, &mut tiles);
        BpdGrid { n: asm.n, tiles }
    }

    /// Overwrites this grid with `Phi^{-1}` of a size-`n` entry matrix, reusing the buffer.
    pub(crate) fn refill_from_entries(&mut self, n: usize, entries: &[i8]) {
        self.n = n;
        tiles_from_entries(n, entries, &mut self.tiles);
    }

    pub fn render(&self, format: RenderFormat) -> String {
        match format {
            RenderFormat::Ascii => self.to_ascii(),
            RenderFormat::Json => self.to_json(),
            RenderFormat::Svg => render_svg(self.n, &self.tiles),
        }
    }

    pub fn to_json(&self) -> String {
        let record = GridJson {
            n: self.n,
            tiles: self.to_ascii().lines().map(str::to_owned).collect(),
            perm: self.trace().perm.word().to_vec(),
        };
        serde_json::to_string(&record).expect("grid json is always serializable")
    }

    /// Parses the json produced by [`BpdGrid::to_json`]; the `perm` field is checked
    /// against the traced permutation.
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let record: GridJson =
            serde_json::from_str(text).map_err(|e| GridError::Json(e.to_string()))?;
        let grid = BpdGrid::from_ascii(&record.tiles.join("\n"))?;
        if grid.n != record.n {
            return Err(GridError::Json(format!("n = {} but {} rows", record.n, grid.n)));
        }
        grid.validate()?;
        if grid.trace().perm.word() != record.perm.as_slice() {
            return Err(GridError::Json("perm does not match tiles".into()));
        }
        Ok(grid)
    }
}

impl fmt::Debug for BpdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BpdGrid(n = {})", self.n)?;
        f.write_str(&self.to_ascii())
    }
}

impl fmt::Display for BpdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Json,
    Svg,
}

impl std::str::FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(RenderFormat::Ascii),
            "json" => Ok(RenderFormat::Json),
            "svg" => Ok(RenderFormat::Svg),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

/// Wire form of a grid: `{"n":…, "tiles":[row strings], "perm":[…]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridJson {
    pub n: usize,
    pub tiles: Vec<String>,
    pub perm: Vec<u8>,
}

/// Result of following every strand of a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipeTrace {
    pub perm: Permutation,
    /// `crossings[(a-1)*n + (b-1)]` counts shared cross tiles of pipes entering
    /// columns `a` and `b`; symmetric.
    crossings: Vec<u16>,
    pub jelbow_count: usize,
    pub blank_count: usize,
}

impl PipeTrace {
    /// Number of cross tiles shared by the pipes entering columns `a` and `b`.
    pub fn crossings(&self, a: usize, b: usize) -> usize {
        let n = self.perm.len();
        self.crossings[(a - 1) * n + (b - 1)] as usize
    }

    /// `(a, b, count)` with `a < b` for every pair of pipes that cross.
    pub fn crossing_pairs(&self) -> Vec<(usize, usize, usize)> {
        let n = self.perm.len();
        let mut out = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                let c = self.crossings(a, b);
                if c > 0 {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.crossings.iter().all(|&c| c <= 1)
    }
}

/// An `n x n` alternating sign matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Asm {
    n: usize,
    entries: Vec<i8>,
}

impl Asm {
    pub fn new(n: usize, entries: Vec<i8>) -> Result<Self, GridError> {
        if entries.len() != n * n {
            return Err(GridError::Shape {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|&&e| !(-1..=1).contains(&e)) {
            return Err(GridError::InconsistentAsm(format!("entry {bad}")));
        }
        for i in 0..n {
            if !alternates((0..n).map(|j| entries[i * n + j])) {
                return Err(GridError::InconsistentAsm(format!("row {}", i + 1)));
            }
            if !alternates((0..n).map(|j| entries[j * n + i])) {
                return Err(GridError::InconsistentAsm(format!("column {}", i + 1)));
            }
        }
        Ok(Asm { n, entries })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self, GridError> {
        let n = rows.len();
        Asm::new(n, rows.iter().flatten().copied().collect())
    }

    pub(crate) fn from_entries_unchecked(n: usize, entries: Vec<i8>) -> Self {
        Asm { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Asm { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// Entry at 1-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.entries[(row - 1) * self.n + (col - 1)]
    }

    pub fn minus_ones(&self) -> usize {
        self.entries.iter().filter(|&&e| e == -1).count()
    }

    /// Deletes the given 1-based rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Asm {
        let keep_rows: Vec<usize> = (1..=self.n).filter(|r| !rows.contains(r)).collect();
        let keep_cols: Vec<usize> = (1..=self.n).filter(|c| !cols.contains(c)).collect();
        debug_assert_eq!(keep_rows.len(), keep_cols.len());
        let mut entries = Vec::with_capacity(keep_rows.len() * keep_cols.len());
        for &r in &keep_rows {
            for &c in &keep_cols {
                entries.push(self.entry(r, c));
            }
        }
        Asm {
            n: keep_rows.len(),
            entries,
        }
    }
}

impl fmt::Debug for Asm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Asm(n = {})", self.n)?;
        for row in self.entries.chunks(self.n.max(1)).take(self.n) {
            let cells: Vec<String> = row.iter().map(|e| format!("{e:>2}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

fn alternates(line: impl Iterator<Item = i8>) -> bool {
    let mut expect = 1;
    let mut last = 0;
    for e in line.filter(|&e| e != 0) {
        if e != expect {
            return false;
        }
        expect = -expect;
        last = e;
    }
    last == 1
}

/// Fills `out` with the tiles of `Phi^{-1}(entries)`. A vertical strand crosses the
/// north edge of `(i, j)` exactly when the column prefix above row `i` sums to 1,
/// and a horizontal strand crosses the west edge exactly when the row prefix left of
/// column `j` sums to 1.
pub(crate) fn tiles_from_entries(n: usize, entries: &[i8], out: &mut Vec<Tile>) {
    out.clear();
    let mut col_prefix = vec![0i8; n];
    for i in 0..n {
        let mut row_prefix = 0i8;
        for j in 0..n {
            let a = entries[i * n + j];
            let north = col_prefix[j] == 1;
            let west = row_prefix == 1;
            col_prefix[j] += a;
            row_prefix += a;
            let tile = match a {
                1 => Tile::RElbow,
                -1 => Tile::JElbow,
                _ => match (north, west) {
                    (false, false) => Tile::Blank,
                    (true, false) => Tile::Vertical,
                    (false, true) => Tile::Horizontal,
                    (true, true) => Tile::Cross,
                },
            };
            out.push(tile);
        }
    }
}

/// Checks strand continuity, boundaries and elbow alternation. `allow_bumps`
/// admits resolved grids.
pub(crate) fn check_tiles(n: usize, tiles: &[Tile], allow_bumps: bool) -> Result<(), GridError> {
    let at = |i: usize, j: usize| tiles[i * n + j];
    for i in 0..n {
        for j in 0..n {
            let t = at(i, j);
            let (row, col) = (i + 1, j + 1);
            if t == Tile::Bump && !allow_bumps {
                return Err(GridError::UnexpectedBump { row, col });
            }
            if i == 0 && t.north_open() {
                return Err(GridError::BoundaryLeak {
                    edge: Edge::North,
                    index: col,
                });
            }
            if j == 0 && t.west_open() {
                return Err(GridError::BoundaryLeak {
                    edge: Edge::West,
                    index: row,
                });
            }
            let south_ok = if i + 1 == n {
                t.south_open()
            } else {
                t.south_open() == at(i + 1, j).north_open()
            };
            let east_ok = if j + 1 == n {
                t.east_open()
            } else {
                t.east_open() == at(i, j + 1).west_open()
            };
            if !south_ok || !east_ok {
                return Err(GridError::BrokenStrand { row, col });
            }
        }
    }
    for i in 0..n {
        if !alternates((0..n).map(|j| elbow_sign(at(i, j)))) {
            return Err(GridError::ElbowsNotAlternating(format!("row {}", i + 1)));
        }
        if !alternates((0..n).map(|j| elbow_sign(at(j, i)))) {
            return Err(GridError::ElbowsNotAlternating(format!("column {}", i + 1)));
        }
    }
    Ok(())
}

fn elbow_sign(t: Tile) -> i8 {
    match t {
        Tile::RElbow => 1,
        Tile::JElbow => -1,
        _ => 0,
    }
}

/// Order in which cells are visited by [`sweep`]. Both orders visit every cell
/// after all cells upstream of it (weakly south-west along any pipe).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    /// Columns left to right, each column bottom to top.
    ColumnMajor,
    /// Rows bottom to top, each row left to right.
    RowMajor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SweepMode {
    /// Crosses are pass-through; count crossings per pipe pair.
    Trace,
    /// A cross whose two pipes already crossed becomes a bump.
    Resolve,
}

pub(crate) struct SweepResult {
    /// `exits[i]` is the pipe label leaving row `i + 1`.
    pub exits: Vec<u8>,
    pub crossings: Vec<u16>,
    /// Row-major indices of crosses turned into bumps (resolve mode only).
    pub bumps: Vec<usize>,
}

/// Propagates pipe labels (entry column) through the grid. Each cell reads the
/// labels arriving on its south and west edges and writes labels to its north and
/// east edges.
pub(crate) fn sweep(n: usize, tiles: &[Tile], order: ScanOrder, mode: SweepMode) -> SweepResult {
    let mut north = vec![0u8; n * n];
    let mut east = vec![0u8; n * n];
    let mut crossings = vec![0u16; n * n];
    let mut crossed = vec![0u64; n + 1];
    let mut bumps = Vec::new();

    let mut visit = |i: usize, j: usize| {
        let k = i * n + j;
        let from_south = if i + 1 == n { (j + 1) as u8 } else { north[k + n] };
        let from_west = if j == 0 { 0 } else { east[k - 1] };
        let (up, right) = match tiles[k] {
            Tile::Blank => (0, 0),
            Tile::Horizontal => (0, from_west),
            Tile::Vertical => (from_south, 0),
            Tile::RElbow => (0, from_south),
            Tile::JElbow => (from_west, 0),
            Tile::Bump => (from_west, from_south),
            Tile::Cross => {
                let (a, b) = (from_south as usize, from_west as usize);
                match mode {
                    SweepMode::Trace => {
                        if a > 0 && b > 0 {
                            crossings[(a - 1) * n + (b - 1)] += 1;
                            crossings[(b - 1) * n + (a - 1)] += 1;
                        }
                        (from_south, from_west)
                    }
                    SweepMode::Resolve => {
                        if crossed[a] & (1 << b) != 0 {
                            bumps.push(k);
                            (from_west, from_south)
                        } else {
                            crossed[a] |= 1 << b;
                            crossed[b] |= 1 << a;
                            (from_south, from_west)
                        }
                    }
                }
            }
        };
        north[k] = up;
        east[k] = right;
    };

    match order {
        ScanOrder::ColumnMajor => {
            for j in 0..n {
                for i in (0..n).rev() {
                    visit(i, j);
                }
            }
        }
        ScanOrder::RowMajor => {
            for i in (0..n).rev() {
                for j in 0..n {
                    visit(i, j);
                }
            }
        }
    }

    let exits = (0..n).map(|i| east[i * n + n - 1]).collect();
    SweepResult {
        exits,
        crossings,
        bumps,
    }
}

pub(crate) fn render_svg(n: usize, tiles: &[Tile]) -> String {
    const CELL: usize = 40;
    const HALF: usize = CELL / 2;
    let size = CELL * n.max(1);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" fill=\"white\" stroke=\"#999\"/>\n"
    ));
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (j * CELL, i * CELL);
            let (cx, cy) = (x + HALF, y + HALF);
            let mut paths = Vec::new();
            let vertical = format!("M {cx} {y} L {cx} {}", y + CELL);
            let horizontal = format!("M {x} {cy} L {} {cy}", x + CELL);
            let r_arc = format!("M {cx} {} A {HALF} {HALF} 0 0 1 {} {cy}", y + CELL, x + CELL);
            let j_arc = format!("M {x} {cy} A {HALF} {HALF} 0 0 0 {cx} {y}");
            match tiles[i * n + j] {
                Tile::Blank => {}
                Tile::Horizontal => paths.push(horizontal),
                Tile::Vertical => paths.push(vertical),
                Tile::Cross => {
                    paths.push(vertical);
                    paths.push(horizontal);
                }
                Tile::RElbow => paths.push(r_arc),
                Tile::JElbow => paths.push(j_arc),
                Tile::Bump => {
                    paths.push(r_arc);
                    paths.push(j_arc);
                }
            }
            out.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"none\" stroke=\"#ddd\"/>\n"
            ));
            for d in paths {
                out.push_str(&format!(
                    "<path d=\"{d}\" fill=\"none\" stroke=\"#e87722\" stroke-width=\"4\"/>\n"
                ));
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
