//! Removing the removable pipes of a grid and re-inserting them.
//!
//! [`remove`] sends a grid of `BPD(w;v)` to a minimal grid of `mBPD(perm(v))`;
//! [`insert`] is its inverse.

use thiserror::Error;

use crate::enumeration::removable_pipes;
use crate::grid::{BpdGrid, GridError, Tile};
use crate::perm::{Permutation, SubwordSelection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemovalError {
    #[error("grid has removable pipes")]
    NotMinimal,
    #[error("subword mismatch: {0}")]
    SubwordMismatch(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Deletes rows `x_k` and columns `y_k` of the matrix of `grid`, where the
/// `y_k -> x_k` are the removable pipes. Returns the image and the subword `v`.
pub fn remove(grid: &BpdGrid) -> (BpdGrid, SubwordSelection) {
    let report = removable_pipes(grid);
    let rows: Vec<usize> = report.pipes.iter().map(|p| p.row).collect();
    let cols: Vec<usize> = report.pipes.iter().map(|p| p.column).collect();
    let image = BpdGrid::from_asm(&grid.to_asm().minor(&rows, &cols));
    (image, report.subword)
}

/// Same map as [`remove`], done on tiles: erase each removable hook, then
/// contract its row and column.
pub fn remove_by_contraction(grid: &BpdGrid) -> (BpdGrid, SubwordSelection) {
    let n = grid.size();
    let report = removable_pipes(grid);
    let mut sides: Vec<u8> = grid.tiles().iter().map(|t| t.sides()).collect();
    for p in &report.pipes {
        let (x, y) = (p.row - 1, p.column - 1);
        sides[x * n + y] = 0;
        for i in x + 1..n {
            sides[i * n + y] &= !(NORTH | SOUTH);
        }
        for j in y + 1..n {
            sides[x * n + j] &= !(WEST | EAST);
        }
    }
    let mut tiles = Vec::new();
    for i in 0..n {
        if report.pipes.iter().any(|p| p.row == i + 1) {
            continue;
        }
        for j in 0..n {
            if report.pipes.iter().any(|p| p.column == j + 1) {
                continue;
            }
            tiles.push(tile_of(sides[i * n + j]).expect("contraction leaves raw tiles"));
        }
    }
    let m = n - report.pipes.len();
    (BpdGrid::from_parts_unchecked(m, tiles), report.subword)
}

const NORTH: u8 = 1;
const SOUTH: u8 = 2;
const WEST: u8 = 4;
const EAST: u8 = 8;

fn tile_of(sides: u8) -> Option<Tile> {
    Tile::from_sides(
        sides & NORTH != 0,
        sides & SOUTH != 0,
        sides & WEST != 0,
        sides & EAST != 0,
    )
}

/// Inverse of [`remove`]: expands the minimal grid `image` into the rows and
/// columns of `v` inside `w` and adds the hooks `w(x) -> x` for every position
/// `x` outside `v`.
pub fn insert(image: &BpdGrid, w: &Permutation, v: &SubwordSelection) -> Result<BpdGrid, RemovalError> {
    if v.host() != w {
        return Err(RemovalError::SubwordMismatch(format!("{} is not a subword of {w}", v)));
    }
    let m = image.size();
    if v.len() != m {
        return Err(RemovalError::SubwordMismatch(format!(
            "grid of size {m} but subword of length {}",
            v.len()
        )));
    }
    image.validate()?;
    if image.permutation() != v.flatten() {
        return Err(RemovalError::SubwordMismatch(format!(
            "grid permutation {} differs from perm(v) = {}",
            image.permutation(),
            v.flatten()
        )));
    }
    if !removable_pipes(image).minimal {
        return Err(RemovalError::NotMinimal);
    }

    let n = w.len();
    let s = v.positions();
    let mut t = v.entries();
    t.sort_unstable();
    let hooks: Vec<(usize, usize)> = v.complement_positions().into_iter().map(|x| (x, w.at(x))).collect();

    // Index of the last kept line strictly before `k`, if any.
    let before = |kept: &[usize], k: usize| kept.iter().rposition(|&p| p < k);

    // Columns: m rows by n columns.
    let mut wide = vec![0u8; m * n];
    for a in 0..m {
        for y in 1..=n {
            wide[a * n + y - 1] = match t.binary_search(&y) {
                Ok(b) => image.tile(a + 1, b + 1).sides(),
                Err(_) => match before(&t, y) {
                    Some(b) if image.tile(a + 1, b + 1).east_open() => WEST | EAST,
                    _ => 0,
                },
            };
        }
    }

    // Rows: n by n.
    let mut sides = vec![0u8; n * n];
    for x in 1..=n {
        for y in 1..=n {
            sides[(x - 1) * n + y - 1] = match s.binary_search(&x) {
                Ok(a) => wide[a * n + y - 1],
                Err(_) => match before(&s, x) {
                    Some(a) if wide[a * n + y - 1] & SOUTH != 0 => NORTH | SOUTH,
                    _ => 0,
                },
            };
        }
    }

    for &(x, y) in &hooks {
        let (i, j) = (x - 1, y - 1);
        sides[i * n + j] = SOUTH | EAST;
        for r in i + 1..n {
            sides[r * n + j] |= NORTH | SOUTH;
        }
        for c in j + 1..n {
            sides[i * n + c] |= WEST | EAST;
        }
    }

    let tiles = sides
        .iter()
        .map(|&b| tile_of(b).ok_or_else(|| RemovalError::SubwordMismatch(format!("hooks of {v} collide"))))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = BpdGrid::new(n, tiles)?;
    grid.validate()?;
    if &grid.permutation() != w {
        return Err(RemovalError::SubwordMismatch(format!(
            "expanded grid has permutation {}",
            grid.permutation()
        )));
    }
    Ok(grid)
}
