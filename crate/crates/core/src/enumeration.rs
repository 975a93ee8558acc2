//! Exhaustive generation of alternating sign matrices and the bumpless pipe
//! dream families filtered from them.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{Asm, BpdGrid, Tile};
use crate::ktheory::grid_type;
use crate::perm::{Permutation, SubwordSelection};

/// Default resource guard on the size of queried permutations.
pub const DEFAULT_GUARD: usize = 9;

/// Largest size whose full grid list is kept in memory by [`atlas`].
pub const ATLAS_MAX: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("size {size} exceeds the guard {guard}")]
    GuardExceeded { size: usize, guard: usize },
    #[error("query kind {0:?} requires a subword")]
    MissingSubword(SetKind),
    #[error("query kind {0:?} takes no subword")]
    UnexpectedSubword(SetKind),
    #[error("subword host {host} differs from {w}")]
    HostMismatch { host: Permutation, w: Permutation },
}

/// One admissible row given the column state: bitmasks of `+1` and `-1` columns.
type Row = (u32, u32);

/// Every row that keeps all column prefix sums in `{0, 1}`. `state` has bit `j`
/// set when column `j` currently sums to 1. Rows are listed depth-first by
/// column, so the order is deterministic.
fn admissible_rows(n: usize, state: u32) -> Vec<Row> {
    fn extend(n: usize, state: u32, col: usize, plus: u32, minus: u32, want_plus: bool, out: &mut Vec<Row>) {
        for c in col..n {
            let bit = 1u32 << c;
            let one = state & bit != 0;
            if want_plus && !one {
                out.push((plus | bit, minus));
                extend(n, state, c + 1, plus | bit, minus, false, out);
            } else if !want_plus && one {
                extend(n, state, c + 1, plus, minus | bit, true, out);
            }
        }
    }
    let mut out = Vec::new();
    extend(n, state, 0, 0, 0, true, &mut out);
    out
}

struct Frame {
    state: u32,
    rows: Vec<Row>,
    next: usize,
}

/// Lazily enumerates every alternating sign matrix of size `n`, exactly once,
/// in a fixed order. Rows are chosen top to bottom.
///
/// `shard` restricts to matrices whose first row has its `+1` in a given column,
/// splitting the stream into `n` independent parts.
pub struct AsmStream {
    n: usize,
    stack: Vec<Frame>,
    chosen: Vec<Row>,
    entries: Vec<i8>,
    started: bool,
    empty_pending: bool,
}

impl AsmStream {
    pub fn new(n: usize) -> Self {
        Self::build(n, None)
    }

    /// Matrices whose first row is `+1` at 1-based `first_col`.
    pub fn shard(n: usize, first_col: usize) -> Self {
        assert!((1..=n).contains(&first_col), "shard column out of range");
        Self::build(n, Some(first_col - 1))
    }

    fn build(n: usize, first: Option<usize>) -> Self {
        assert!(n <= 31, "ASM size {n} too large");
        let mut rows = if n == 0 { Vec::new() } else { admissible_rows(n, 0) };
        if let Some(c) = first {
            rows.retain(|&(plus, _)| plus == 1 << c);
        }
        if n == 1 {
            rows.retain(|&(plus, minus)| plus == 1 && minus == 0);
        }
        AsmStream {
            n,
            stack: vec![Frame { state: 0, rows, next: 0 }],
            chosen: Vec::with_capacity(n),
            entries: vec![0; n * n],
            started: false,
            empty_pending: n == 0,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Advances to the next matrix and returns its row-major entries.
    pub fn next_entries(&mut self) -> Option<&[i8]> {
        if self.n == 0 {
            return std::mem::take(&mut self.empty_pending).then_some(&self.entries[..]);
        }
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        if self.started {
            // Resume: the deepest frame already produced a matrix.
            self.chosen.pop();
        }
        self.started = true;
        loop {
            let depth = self.stack.len() - 1;
            let frame = self.stack.last_mut()?;
            if frame.next >= frame.rows.len() {
                self.stack.pop();
                if self.stack.is_empty() {
                    return None;
                }
                self.chosen.pop();
                continue;
            }
            let (plus, minus) = frame.rows[frame.next];
            frame.next += 1;
            let state = (frame.state | plus) & !minus;
            self.chosen.push((plus, minus));
            if depth + 1 == self.n {
                self.fill();
                return Some(&self.entries);
            }
            let mut rows = admissible_rows(self.n, state);
            if depth + 2 == self.n {
                rows.retain(|&(p, m)| (state | p) & !m == full);
            }
            self.stack.push(Frame { state, rows, next: 0 });
        }
    }

    fn fill(&mut self) {
        let n = self.n;
        for (i, &(plus, minus)) in self.chosen.iter().enumerate() {
            for j in 0..n {
                let bit = 1 << j;
                self.entries[i * n + j] = if plus & bit != 0 {
                    1
                } else if minus & bit != 0 {
                    -1
                } else {
                    0
                };
            }
        }
    }
}

impl Iterator for AsmStream {
    type Item = Asm;

    fn next(&mut self) -> Option<Asm> {
        let n = self.n;
        self.next_entries()
            .map(|e| Asm::from_entries_unchecked(n, e.to_vec()))
    }
}

pub fn enumerate_asm(n: usize) -> AsmStream {
    AsmStream::new(n)
}

/// Folds over every grid of `BPD(n)` with one rayon task per first-row shard.
/// Shard results are merged left to right, so order-sensitive merges are deterministic.
pub fn fold_grids<T, I, F, M>(n: usize, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &BpdGrid) + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let run = |mut stream: AsmStream| {
        let mut acc = init();
        let mut grid = BpdGrid::identity(0);
        while let Some(entries) = stream.next_entries() {
            grid.refill_from_entries(n, entries);
            fold(&mut acc, &grid);
        }
        acc
    };
    if n == 0 {
        return run(AsmStream::new(0));
    }
    let parts: Vec<T> = (1..=n)
        .into_par_iter()
        .map(|k| run(AsmStream::shard(n, k)))
        .collect();
    parts.into_iter().reduce(merge).expect("n >= 1 shards")
}

/// A removable pipe `column -> row`: its r-elbow at `(row, column)` is the only
/// r-elbow in that row and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RemovablePipe {
    pub column: usize,
    pub row: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovablePipeReport {
    /// Sorted by entry column.
    pub pipes: Vec<RemovablePipe>,
    /// `w_B` with the removable pipes' values deleted.
    pub subword: SubwordSelection,
    pub minimal: bool,
}

/// Bitmask of rows `x` (bit `x-1`) carrying a removable pipe.
pub(crate) fn removable_rows_mask(grid: &BpdGrid) -> u32 {
    let n = grid.size();
    let tiles = grid.tiles();
    let mut row_count = vec![0u8; n];
    let mut col_count = vec![0u8; n];
    for (k, &t) in tiles.iter().enumerate() {
        if t == Tile::RElbow {
            row_count[k / n] += 1;
            col_count[k % n] += 1;
        }
    }
    let mut mask = 0;
    for (k, &t) in tiles.iter().enumerate() {
        if t == Tile::RElbow && row_count[k / n] == 1 && col_count[k % n] == 1 {
            mask |= 1 << (k / n);
        }
    }
    mask
}

pub fn removable_pipes(grid: &BpdGrid) -> RemovablePipeReport {
    let w = grid.permutation();
    report_from_mask(grid, &w, removable_rows_mask(grid))
}

fn report_from_mask(grid: &BpdGrid, w: &Permutation, mask: u32) -> RemovablePipeReport {
    let n = grid.size();
    let mut pipes: Vec<RemovablePipe> = (1..=n)
        .filter(|x| mask & (1 << (x - 1)) != 0)
        .map(|x| {
            debug_assert_eq!(grid.tile(x, w.at(x)), Tile::RElbow);
            RemovablePipe {
                column: w.at(x),
                row: x,
            }
        })
        .collect();
    pipes.sort();
    let kept: Vec<usize> = (1..=n).filter(|x| mask & (1 << (x - 1)) == 0).collect();
    RemovablePipeReport {
        minimal: pipes.is_empty(),
        pipes,
        subword: SubwordSelection::new(w, &kept).expect("increasing positions"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetKind {
    /// `BPD(w)`: permutation `w`.
    All,
    /// `bpd(w)`: reduced with permutation `w`.
    Reduced,
    /// `BPD_K(w)`: type `w`.
    KType,
    /// `mBPD(w)`.
    Minimal,
    /// `mbpd(w)`.
    MinimalReduced,
    /// `BPD(w;v)`.
    Subword,
    /// `bpd(w;v)`.
    ReducedSubword,
}

impl SetKind {
    pub fn needs_subword(self) -> bool {
        matches!(self, SetKind::Subword | SetKind::ReducedSubword)
    }
}

impl FromStr for SetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "BPD" => SetKind::All,
            "bpd" => SetKind::Reduced,
            "BPD_K" => SetKind::KType,
            "mBPD" => SetKind::Minimal,
            "mbpd" => SetKind::MinimalReduced,
            "BPD_v" => SetKind::Subword,
            "bpd_v" => SetKind::ReducedSubword,
            _ => return Err(format!("unknown set kind {s:?}")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetQuery {
    pub kind: SetKind,
    pub w: Permutation,
    pub v: Option<SubwordSelection>,
}

impl SetQuery {
    pub fn new(kind: SetKind, w: Permutation) -> Result<Self, EnumError> {
        if kind.needs_subword() {
            return Err(EnumError::MissingSubword(kind));
        }
        Ok(SetQuery { kind, w, v: None })
    }

    pub fn with_subword(kind: SetKind, w: Permutation, v: SubwordSelection) -> Result<Self, EnumError> {
        if !kind.needs_subword() {
            return Err(EnumError::UnexpectedSubword(kind));
        }
        if v.host() != &w {
            return Err(EnumError::HostMismatch {
                host: v.host().clone(),
                w,
            });
        }
        Ok(SetQuery {
            kind,
            w,
            v: Some(v),
        })
    }
}

/// Everything the set filters need about one grid.
#[derive(Clone, Debug)]
pub struct AtlasEntry {
    pub grid: BpdGrid,
    pub perm: Permutation,
    pub permutation_type: Permutation,
    pub reduced: bool,
    removable_rows: u32,
}

impl AtlasEntry {
    pub fn new(grid: &BpdGrid) -> Self {
        let trace = grid.trace();
        AtlasEntry {
            grid: grid.clone(),
            reduced: trace.is_reduced(),
            permutation_type: grid_type(grid),
            perm: trace.perm,
            removable_rows: removable_rows_mask(grid),
        }
    }

    pub fn minimal(&self) -> bool {
        self.removable_rows == 0
    }

    pub fn removable(&self) -> RemovablePipeReport {
        report_from_mask(&self.grid, &self.perm, self.removable_rows)
    }

    /// 0-based positions of the subword `v` this grid is assigned to, as a mask.
    pub fn subword_mask(&self) -> u32 {
        let n = self.grid.size();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        full & !self.removable_rows
    }

    pub fn matches(&self, q: &SetQuery) -> bool {
        let in_subword = |reduced_only: bool| {
            let v = q.v.as_ref().expect("validated query");
            let mask = v.positions().iter().fold(0u32, |m, p| m | 1 << (p - 1));
            self.perm == q.w && (!reduced_only || self.reduced) && self.subword_mask() == mask
        };
        match q.kind {
            SetKind::All => self.perm == q.w,
            SetKind::Reduced => self.perm == q.w && self.reduced,
            SetKind::KType => self.permutation_type == q.w,
            SetKind::Minimal => self.perm == q.w && self.minimal(),
            SetKind::MinimalReduced => self.perm == q.w && self.reduced && self.minimal(),
            SetKind::Subword => in_subword(false),
            SetKind::ReducedSubword => in_subword(true),
        }
    }
}

/// All of `BPD(n)` with per-grid annotations, in [`AsmStream`] order.
pub struct Atlas {
    pub n: usize,
    pub entries: Vec<AtlasEntry>,
}

impl Atlas {
    pub fn build(n: usize) -> Atlas {
        let entries = fold_grids(
            n,
            Vec::new,
            |acc: &mut Vec<AtlasEntry>, g| acc.push(AtlasEntry::new(g)),
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        Atlas { n, entries }
    }

    pub fn select<'a>(&'a self, q: &'a SetQuery) -> impl Iterator<Item = &'a AtlasEntry> + 'a {
        self.entries.iter().filter(move |e| e.matches(q))
    }

    /// Entries grouped by permutation `w_B`.
    pub fn by_permutation(&self) -> HashMap<Permutation, Vec<&AtlasEntry>> {
        let mut out: HashMap<Permutation, Vec<&AtlasEntry>> = HashMap::new();
        for e in &self.entries {
            out.entry(e.perm.clone()).or_default().push(e);
        }
        out
    }

    /// Entries grouped by type `∂(B)`.
    pub fn by_type(&self) -> HashMap<Permutation, Vec<&AtlasEntry>> {
        let mut out: HashMap<Permutation, Vec<&AtlasEntry>> = HashMap::new();
        for e in &self.entries {
            out.entry(e.permutation_type.clone()).or_default().push(e);
        }
        out
    }
}

/// Shared, memoized atlas of size `n <= ATLAS_MAX`.
pub fn atlas(n: usize) -> Arc<Atlas> {
    assert!(n <= ATLAS_MAX, "atlas size {n} exceeds {ATLAS_MAX}");
    static STORE: OnceLock<Mutex<HashMap<usize, Arc<Atlas>>>> = OnceLock::new();
    let store = STORE.get_or_init(Default::default);
    if let Some(a) = store.lock().expect("atlas store").get(&n) {
        return a.clone();
    }
    // Built outside the lock; a racing builder produces an identical atlas.
    let built = Arc::new(Atlas::build(n));
    store
        .lock()
        .expect("atlas store")
        .entry(n)
        .or_insert(built)
        .clone()
}

/// Grids of the queried family, in [`AsmStream`] order.
pub fn query(q: &SetQuery, max_n_guard: usize) -> Result<Vec<BpdGrid>, EnumError> {
    let n = q.w.len();
    if n > max_n_guard {
        return Err(EnumError::GuardExceeded {
            size: n,
            guard: max_n_guard,
        });
    }
    if q.kind.needs_subword() != q.v.is_some() {
        return Err(if q.v.is_some() {
            EnumError::UnexpectedSubword(q.kind)
        } else {
            EnumError::MissingSubword(q.kind)
        });
    }
    if n <= ATLAS_MAX {
        return Ok(atlas(n).select(q).map(|e| e.grid.clone()).collect());
    }
    Ok(fold_grids(
        n,
        Vec::new,
        |acc: &mut Vec<BpdGrid>, g| {
            if AtlasEntry::new(g).matches(q) {
                acc.push(g.clone());
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    ))
}
