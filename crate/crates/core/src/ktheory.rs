//! K-theoretic resolution of a grid: repeated crossings become bumps.

use std::fmt;

use thiserror::Error;

use crate::grid::{check_tiles, render_svg, sweep, BpdGrid, GridError, GridJson, RenderFormat, SweepMode, Tile};
pub use crate::grid::ScanOrder;
use crate::perm::{first_occurrence, pattern_1243, pattern_2143, Permutation, SubwordSelection};
use crate::poly::BetaPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KTheoryError {
    #[error("{blanks} blank tiles but reference length {reference}")]
    NegativeExponent { blanks: usize, reference: usize },
    #[error("no pattern witness for nonreduced grid: {0}")]
    WitnessNotFound(String),
}

/// A grid in which some crosses have been turned into bumps.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResolvedGrid {
    n: usize,
    tiles: Vec<Tile>,
}

impl ResolvedGrid {
    pub fn from_ascii(text: &str) -> Result<Self, GridError> {
        // Parse through BpdGrid for the shape checks; bumps are legal here.
        let raw = BpdGrid::from_ascii(text)?;
        Ok(ResolvedGrid {
            n: raw.size(),
            tiles: raw.tiles().to_vec(),
        })
    }

    pub fn validate(&self) -> Result<(), GridError> {
        check_tiles(self.n, &self.tiles, true)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile(&self, row: usize, col: usize) -> Tile {
        self.tiles[(row - 1) * self.n + (col - 1)]
    }

    pub fn bump_count(&self) -> usize {
        self.tiles.iter().filter(|&&t| t == Tile::Bump).count()
    }

    /// Forgets the bumps, recovering the source grid.
    pub fn underlying(&self) -> BpdGrid {
        let tiles = self
            .tiles
            .iter()
            .map(|&t| if t == Tile::Bump { Tile::Cross } else { t })
            .collect();
        BpdGrid::from_parts_unchecked(self.n, tiles)
    }

    /// Permutation of the strand network, bumps included.
    pub fn permutation(&self) -> Permutation {
        let result = sweep(self.n, &self.tiles, ScanOrder::ColumnMajor, SweepMode::Trace);
        exits_to_perm(&result.exits)
    }

    /// No two strands share more than one cross.
    pub fn is_reduced(&self) -> bool {
        sweep(self.n, &self.tiles, ScanOrder::ColumnMajor, SweepMode::Trace)
            .crossings
            .iter()
            .all(|&c| c <= 1)
    }

    /// Runs the resolution again on this network; bumps stay bumps.
    pub fn re_resolve(&self) -> ResolvedGrid {
        let result = sweep(self.n, &self.tiles, ScanOrder::ColumnMajor, SweepMode::Resolve);
        let mut tiles = self.tiles.clone();
        for k in result.bumps {
            tiles[k] = Tile::Bump;
        }
        ResolvedGrid { n: self.n, tiles }
    }

    pub fn to_ascii(&self) -> String {
        self.tiles
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|r| r.iter().map(|t| t.to_char()).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn render(&self, format: RenderFormat) -> String {
        match format {
            RenderFormat::Ascii => self.to_ascii(),
            RenderFormat::Svg => render_svg(self.n, &self.tiles),
            RenderFormat::Json => {
                let record = GridJson {
                    n: self.n,
                    tiles: self.to_ascii().lines().map(str::to_owned).collect(),
                    perm: self.permutation().word().to_vec(),
                };
                serde_json::to_string(&record).expect("grid json is always serializable")
            }
        }
    }
}

impl fmt::Debug for ResolvedGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ResolvedGrid(n = {})", self.n)?;
        f.write_str(&self.to_ascii())
    }
}

fn exits_to_perm(exits: &[u8]) -> Permutation {
    let word: Vec<usize> = exits.iter().map(|&x| x as usize).collect();
    Permutation::parse(&word).expect("strand network of a validated grid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub grid: ResolvedGrid,
    /// `∂(B)`, the permutation of the resolved network.
    pub permutation_type: Permutation,
}

/// Visits crosses left to right, bottom to top.
pub fn resolve(grid: &BpdGrid) -> Resolution {
    resolve_with_order(grid, ScanOrder::ColumnMajor)
}

pub fn resolve_with_order(grid: &BpdGrid, order: ScanOrder) -> Resolution {
    let result = sweep(grid.size(), grid.tiles(), order, SweepMode::Resolve);
    let mut tiles = grid.tiles().to_vec();
    for k in result.bumps {
        tiles[k] = Tile::Bump;
    }
    Resolution {
        grid: ResolvedGrid {
            n: grid.size(),
            tiles,
        },
        permutation_type: exits_to_perm(&result.exits),
    }
}

/// `∂(B)` without materializing the resolved grid.
pub fn grid_type(grid: &BpdGrid) -> Permutation {
    let result = sweep(grid.size(), grid.tiles(), ScanOrder::ColumnMajor, SweepMode::Resolve);
    exits_to_perm(&result.exits)
}

/// `β^(blanks - reference_length) (1+β)^(j-elbows)`.
pub fn beta_weight(grid: &BpdGrid, reference_length: usize) -> Result<BetaPolynomial, KTheoryError> {
    let blanks = grid.blank_count();
    let excess = blanks
        .checked_sub(reference_length)
        .ok_or(KTheoryError::NegativeExponent {
            blanks,
            reference: reference_length,
        })?;
    Ok(BetaPolynomial::weight(excess, grid.jelbow_count()))
}

/// `β`-weight relative to the grid's own type, the summand of `ν^(β)_{∂(B)}`.
pub fn type_weight(grid: &BpdGrid) -> BetaPolynomial {
    beta_weight(grid, grid_type(grid).coxeter_length())
        .expect("blank count is at least the length of the type")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Evidence that a nonreduced grid's permutation contains 1243 or 2143.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonreducedWitness {
    /// Entry columns of the two pipes that cross repeatedly.
    pub pipes: (usize, usize),
    pub crossings: usize,
    pub parity: Parity,
    /// 1243 for even parity, 2143 for odd.
    pub pattern: Permutation,
    /// Occurrence of `pattern` in `w_B` whose first two entries are the two pipes.
    pub occurrence: SubwordSelection,
    /// An occurrence of 2143 in the type `∂(B)`.
    pub type_occurrence: SubwordSelection,
}

/// `None` for reduced grids. Otherwise uses the first pipe pair (by entry columns)
/// crossing at least twice.
pub fn nonreduced_witness(grid: &BpdGrid) -> Result<Option<NonreducedWitness>, KTheoryError> {
    let trace = grid.trace();
    let Some(&(a, b, _)) = trace.crossing_pairs().iter().find(|&&(_, _, c)| c >= 2) else {
        return Ok(None);
    };
    witness_for_pair(grid, a, b).map(Some)
}

/// Witness built from the pipes entering columns `a` and `b`, which must cross at
/// least twice.
pub fn witness_for_pair(grid: &BpdGrid, a: usize, b: usize) -> Result<NonreducedWitness, KTheoryError> {
    let trace = grid.trace();
    let crossings = trace.crossings(a, b);
    if crossings < 2 {
        return Err(KTheoryError::WitnessNotFound(format!(
            "pipes {a} and {b} cross {crossings} times"
        )));
    }
    let w = &trace.perm;
    let inv = w.inverse();
    // Pipe y -> x exits row x = w^{-1}(y); order the pair by exit row.
    let (mut x, mut x2) = (inv.at(a), inv.at(b));
    if x > x2 {
        std::mem::swap(&mut x, &mut x2);
    }
    let (y, y2) = (w.at(x), w.at(x2));
    let parity = if crossings % 2 == 0 { Parity::Even } else { Parity::Odd };
    let pattern = match parity {
        Parity::Even => pattern_1243(),
        Parity::Odd => pattern_2143(),
    };
    if (parity == Parity::Even) != (y < y2) {
        return Err(KTheoryError::WitnessNotFound(format!(
            "pipes {y}->{x} and {y2}->{x2} cross {crossings} times but enter in the wrong order"
        )));
    }
    let floor = y.max(y2);
    let n = w.len();
    let mut found = None;
    'search: for p in x2 + 1..=n {
        for q in p + 1..=n {
            if w.at(p) > w.at(q) && w.at(q) > floor {
                found = Some((p, q));
                break 'search;
            }
        }
    }
    let (p, q) = found.ok_or_else(|| {
        KTheoryError::WitnessNotFound(format!("{w}: no descent above {floor} after position {x2}"))
    })?;
    let occurrence = SubwordSelection::new(w, &[x, x2, p, q]).expect("increasing positions");
    debug_assert_eq!(occurrence.flatten(), pattern);
    let ty = grid_type(grid);
    let type_occurrence = first_occurrence(&pattern_2143(), &ty)
        .ok_or_else(|| KTheoryError::WitnessNotFound(format!("type {ty} avoids 2143")))?;
    Ok(NonreducedWitness {
        pipes: (a.min(b), a.max(b)),
        crossings,
        parity,
        pattern,
        occurrence,
        type_occurrence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_grid_is_unchanged() {
        let g = BpdGrid::from_ascii(".r\nr+").unwrap();
        let r = resolve(&g);
        assert_eq!(r.grid.underlying(), g);
        assert_eq!(r.grid.bump_count(), 0);
        assert_eq!(r.permutation_type, g.permutation());
    }

    #[test]
    fn weights() {
        let g = BpdGrid::from_ascii(".r\nr+").unwrap();
        assert_eq!(beta_weight(&g, 1).unwrap(), BetaPolynomial::one());
        assert_eq!(beta_weight(&g, 0).unwrap(), BetaPolynomial::from_coeffs(vec![0, 1]));
        assert_eq!(
            beta_weight(&g, 2),
            Err(KTheoryError::NegativeExponent { blanks: 1, reference: 2 })
        );
    }

    #[test]
    fn reduced_grid_has_no_witness() {
        assert_eq!(nonreduced_witness(&BpdGrid::identity(3)), Ok(None));
    }
}
