//! Named exhaustive checks of the structural and enumerative statements, and the
//! table of maximal `ν^(β)` and `c^(β)` values.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{atlas, Atlas, AtlasEntry, ATLAS_MAX};
use crate::grid::{BpdGrid, Tile};
use crate::ktheory::{beta_weight, grid_type, nonreduced_witness, resolve_with_order, ScanOrder};
use crate::perm::{pattern_count, subwords, Permutation, SubwordSelection};
use crate::poly::BetaPolynomial;
use crate::removal::{insert, remove, remove_by_contraction};
use crate::specialization::{pattern_profile, CoefficientMode, SpecError, Specializer};

/// Counterexamples kept per report.
pub const MAX_FAILURES: usize = 10;

pub const CHECK_IDS: &[&str] = &[
    "upper-bound",
    "thm-1243",
    "vexillary-K",
    "nonreduced-pattern",
    "bijection-roundtrip",
    "reduced-restriction",
    "weight-preservation",
    "groth-1243-2143",
    "conj-gao",
    "conj-groth",
    "skew",
    "pattern-sum",
    "stanley",
    "gao-bound",
    "bk-order",
];

/// Checks that need every grid of each size in memory.
const GRID_CHECKS: &[&str] = &[
    "upper-bound",
    "thm-1243",
    "vexillary-K",
    "nonreduced-pattern",
    "bijection-roundtrip",
    "reduced-restriction",
    "weight-preservation",
    "groth-1243-2143",
    "skew",
    "bk-order",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("size {size} exceeds the guard {guard} for this check")]
    GuardExceeded { size: usize, guard: usize },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub n: usize,
    pub instances_checked: u64,
    pub failure_count: u64,
    /// At most [`MAX_FAILURES`] counterexample descriptors.
    pub failures: Vec<String>,
    pub elapsed_secs: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

struct Tally {
    instances: u64,
    failure_count: u64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            instances: 0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(describe());
            }
        }
    }
}

fn fixture(grid: &BpdGrid) -> String {
    grid.to_ascii().replace('\n', "/")
}

/// Runs `check_id` over every size `0..=n`.
pub fn run_check(check_id: &str, n: usize) -> Result<CheckReport, VerifyError> {
    run_check_with(Specializer::global(), check_id, n)
}

pub fn run_check_with(sp: &Specializer, check_id: &str, n: usize) -> Result<CheckReport, VerifyError> {
    if !CHECK_IDS.contains(&check_id) {
        return Err(VerifyError::UnknownCheck(check_id.to_string()));
    }
    let guard = if GRID_CHECKS.contains(&check_id) {
        ATLAS_MAX.min(sp.guard())
    } else {
        sp.guard()
    };
    if n > guard {
        return Err(VerifyError::GuardExceeded { size: n, guard });
    }
    let start = Instant::now();
    let mut t = Tally::new();
    for k in 0..=n {
        match check_id {
            "upper-bound" => upper_bound(k, &mut t),
            "thm-1243" => thm_1243(sp, k, &mut t)?,
            "vexillary-K" => vexillary_k(k, &mut t),
            "nonreduced-pattern" => nonreduced_pattern(k, &mut t),
            "bijection-roundtrip" => bijection_roundtrip(k, &mut t),
            "reduced-restriction" => reduced_restriction(k, &mut t),
            "weight-preservation" => weight_preservation(k, &mut t),
            "groth-1243-2143" => groth_1243_2143(sp, k, &mut t)?,
            "conj-gao" => conjecture(sp, k, &mut t, |c| c.constant_term() >= 0.into())?,
            "conj-groth" => conjecture(sp, k, &mut t, BetaPolynomial::is_nonnegative)?,
            "skew" => skew(sp, k, &mut t)?,
            "pattern-sum" => pattern_sum(sp, k, &mut t)?,
            "stanley" => stanley(sp, k, &mut t)?,
            "gao-bound" => gao_bound(sp, k, &mut t)?,
            "bk-order" => bk_order(k, &mut t),
            _ => unreachable!("check ids validated above"),
        }
    }
    Ok(CheckReport {
        check_id: check_id.to_string(),
        n,
        instances_checked: t.instances,
        failure_count: t.failure_count,
        failures: t.failures,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Per-permutation counts and weights of one size, derived from its atlas.
pub struct SizeStats {
    pub atlas: Arc<Atlas>,
    pub bpd: HashMap<Permutation, u64>,
    pub mbpd: HashMap<Permutation, u64>,
    /// `wt^(β)(mbpd(u))`.
    pub mbpd_weight: HashMap<Permutation, BetaPolynomial>,
    /// `wt^(β)(mBPD(u))`, `None` when some minimal grid has fewer blanks than `ℓ(u)`.
    pub mbpd_all_weight: HashMap<Permutation, Option<BetaPolynomial>>,
    /// Grid count per `(w, subword mask)`, over all grids and over reduced ones.
    pub by_subword: HashMap<(Permutation, u32), (u64, u64)>,
}

pub fn size_stats(k: usize) -> Arc<SizeStats> {
    static STORE: OnceLock<Mutex<HashMap<usize, Arc<SizeStats>>>> = OnceLock::new();
    let store = STORE.get_or_init(Default::default);
    if let Some(s) = store.lock().expect("stats store").get(&k) {
        return s.clone();
    }
    let a = atlas(k);
    let mut s = SizeStats {
        atlas: a.clone(),
        bpd: HashMap::new(),
        mbpd: HashMap::new(),
        mbpd_weight: HashMap::new(),
        mbpd_all_weight: HashMap::new(),
        by_subword: HashMap::new(),
    };
    for e in &a.entries {
        let len = e.perm.coxeter_length();
        if e.reduced {
            *s.bpd.entry(e.perm.clone()).or_default() += 1;
        }
        if e.minimal() {
            let w = beta_weight(&e.grid, len).ok();
            let slot = s
                .mbpd_all_weight
                .entry(e.perm.clone())
                .or_insert(Some(BetaPolynomial::zero()));
            *slot = match (slot.take(), w.clone()) {
                (Some(acc), Some(w)) => Some(&acc + &w),
                _ => None,
            };
            if e.reduced {
                *s.mbpd.entry(e.perm.clone()).or_default() += 1;
                *s.mbpd_weight.entry(e.perm.clone()).or_default() +=
                    &w.expect("reduced grids have exactly ℓ blanks");
            }
        }
        let slot = s.by_subword.entry((e.perm.clone(), e.subword_mask())).or_default();
        slot.0 += 1;
        slot.1 += e.reduced as u64;
    }
    let s = Arc::new(s);
    store.lock().expect("stats store").entry(k).or_insert(s).clone()
}

fn mbpd_count(u: &Permutation) -> u64 {
    size_stats(u.len()).mbpd.get(u).copied().unwrap_or(0)
}

fn mbpd_weight(u: &Permutation) -> BetaPolynomial {
    size_stats(u.len()).mbpd_weight.get(u).cloned().unwrap_or_default()
}

/// Every pattern of `w` including `w` itself, with multiplicity.
fn all_patterns(w: &Permutation) -> BTreeMap<Permutation, u64> {
    let mut p = pattern_profile(w);
    p.insert(w.clone(), 1);
    p
}

/// `Σ_{u ≤ w} |mbpd(u)| p_u(w)`.
fn mbpd_bound(w: &Permutation) -> u64 {
    all_patterns(w).iter().map(|(u, c)| mbpd_count(u) * c).sum()
}

fn avoids_1243(w: &Permutation) -> bool {
    w.avoids(&"1243".parse().expect("literal"))
}

fn upper_bound(k: usize, t: &mut Tally) {
    let stats = size_stats(k);
    for w in Permutation::all(k) {
        let nu = stats.bpd.get(&w).copied().unwrap_or(0);
        let bound = mbpd_bound(&w);
        t.check(nu <= bound, || format!("{w}: |bpd| = {nu} > {bound}"));
    }
}

fn thm_1243(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    let stats = size_stats(k);
    for w in Permutation::all(k).filter(avoids_1243) {
        let nu = sp.nu(&w)?.constant_term();
        let bpd = stats.bpd.get(&w).copied().unwrap_or(0);
        let bound = mbpd_bound(&w);
        let c = sp.coefficient(&w, CoefficientMode::Recursive)?.constant_term();
        let m = mbpd_count(&w);
        t.check(nu == bpd.into() && bpd == bound && c == m.into(), || {
            format!("{w}: ν = {nu}, |bpd| = {bpd}, bound = {bound}, c = {c}, |mbpd| = {m}")
        });
    }
    Ok(())
}

fn sorted_grids<'a>(it: impl Iterator<Item = &'a AtlasEntry>) -> Vec<&'a BpdGrid> {
    let mut v: Vec<&BpdGrid> = it.map(|e| &e.grid).collect();
    v.sort();
    v
}

fn vexillary_k(k: usize, t: &mut Tally) {
    let stats = size_stats(k);
    let by_perm = stats.atlas.by_permutation();
    let by_type = stats.atlas.by_type();
    for w in Permutation::all(k).filter(Permutation::is_vexillary) {
        let all = by_perm.get(&w).map(Vec::as_slice).unwrap_or(&[]);
        let reduced = sorted_grids(all.iter().copied().filter(|e| e.reduced));
        let ktype = sorted_grids(by_type.get(&w).map(Vec::as_slice).unwrap_or(&[]).iter().copied());
        t.check(ktype == reduced, || {
            format!("{w}: |BPD_K| = {}, |bpd| = {}", ktype.len(), reduced.len())
        });
        if avoids_1243(&w) {
            let everything = sorted_grids(all.iter().copied());
            t.check(everything == reduced, || {
                format!("{w}: |BPD| = {}, |bpd| = {}", everything.len(), reduced.len())
            });
        }
    }
}

fn nonreduced_pattern(k: usize, t: &mut Tally) {
    for e in size_stats(k).atlas.entries.iter().filter(|e| !e.reduced) {
        let outcome = nonreduced_witness(&e.grid);
        let ok = matches!(&outcome, Ok(Some(wit)) if wit.occurrence.flatten() == wit.pattern
            && wit.type_occurrence.flatten().to_string() == "2143");
        t.check(ok, || format!("{}: {outcome:?}", fixture(&e.grid)));
    }
}

fn bijection_roundtrip(k: usize, t: &mut Tally) {
    let stats = size_stats(k);
    for e in &stats.atlas.entries {
        let (image, v) = remove(&e.grid);
        let image_entry = AtlasEntry::new(&image);
        let ok = image_entry.minimal()
            && image_entry.perm == v.flatten()
            && image.jelbow_count() == e.grid.jelbow_count()
            && remove_by_contraction(&e.grid) == (image.clone(), v.clone())
            && insert(&image, &e.perm, &v).as_ref() == Ok(&e.grid);
        t.check(ok, || format!("{}: image {}", fixture(&e.grid), fixture(&image)));
    }
    let minimal_counts = |u: &Permutation| {
        size_stats(u.len())
            .atlas
            .entries
            .iter()
            .filter(|e| &e.perm == u && e.minimal())
            .count() as u64
    };
    let mut minimal_memo: HashMap<Permutation, u64> = HashMap::new();
    for w in Permutation::all(k) {
        for v in all_subword_selections(&w) {
            let count = stats.by_subword.get(&(w.clone(), mask_of(&v))).map_or(0, |c| c.0);
            let u = v.flatten();
            let target = *minimal_memo.entry(u.clone()).or_insert_with(|| minimal_counts(&u));
            t.check(count == target, || format!("|BPD({w};{v})| = {count} but |mBPD({u})| = {target}"));
        }
    }
}

fn all_subword_selections(w: &Permutation) -> impl Iterator<Item = SubwordSelection> + '_ {
    (0..=w.len()).flat_map(move |m| subwords(w, m))
}

fn mask_of(v: &SubwordSelection) -> u32 {
    v.positions().iter().fold(0, |m, p| m | 1 << (p - 1))
}

fn reduced_restriction(k: usize, t: &mut Tally) {
    let stats = size_stats(k);
    for e in stats.atlas.entries.iter().filter(|e| e.reduced) {
        let (image, _) = remove(&e.grid);
        t.check(image.trace().is_reduced(), || format!("{}: image not reduced", fixture(&e.grid)));
    }
    for w in Permutation::all(k).filter(avoids_1243) {
        for v in all_subword_selections(&w) {
            let count = stats.by_subword.get(&(w.clone(), mask_of(&v))).map_or(0, |c| c.1);
            let u = v.flatten();
            let target = mbpd_count(&u);
            t.check(count == target, || format!("|bpd({w};{v})| = {count} but |mbpd({u})| = {target}"));
        }
    }
}

fn weight_preservation(k: usize, t: &mut Tally) {
    let stats = size_stats(k);
    let mut sums: HashMap<(Permutation, u32), BetaPolynomial> = HashMap::new();
    for e in stats.atlas.entries.iter().filter(|e| e.reduced) {
        let (image, v) = remove(&e.grid);
        let before = beta_weight(&e.grid, e.perm.coxeter_length());
        let after = beta_weight(&image, v.flatten().coxeter_length());
        t.check(before.is_ok() && before == after, || {
            format!("{}: {before:?} vs {after:?}", fixture(&e.grid))
        });
        if let Ok(w) = before {
            *sums.entry((e.perm.clone(), e.subword_mask())).or_default() += &w;
        }
    }
    for w in Permutation::all(k).filter(avoids_1243) {
        for v in all_subword_selections(&w) {
            let lhs = sums.get(&(w.clone(), mask_of(&v))).cloned().unwrap_or_default();
            let rhs = mbpd_weight(&v.flatten());
            t.check(lhs == rhs, || format!("wt(bpd({w};{v})) = {lhs} but wt(mbpd) = {rhs}"));
        }
    }
}

fn groth_1243_2143(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    let stats = size_stats(k);
    for w in Permutation::all(k).filter(|w| w.is_vexillary() && avoids_1243(w)) {
        let nu = sp.nu(&w)?;
        let sum: BetaPolynomial = all_patterns(&w)
            .iter()
            .map(|(u, c)| mbpd_weight(u).scale(&(*c).into()))
            .sum();
        let c = sp.coefficient(&w, CoefficientMode::Recursive)?;
        let m = mbpd_weight(&w);
        let m_all = stats.mbpd_all_weight.get(&w).cloned().unwrap_or(Some(BetaPolynomial::zero()));
        t.check(nu == sum && c == m && m_all.as_ref() == Some(&m), || {
            format!("{w}: ν = {nu}, Σ = {sum}, c = {c}, wt(mbpd) = {m}, wt(mBPD) = {m_all:?}")
        });
    }
    Ok(())
}

fn conjecture(
    sp: &Specializer,
    k: usize,
    t: &mut Tally,
    holds: impl Fn(&BetaPolynomial) -> bool,
) -> Result<(), VerifyError> {
    for w in Permutation::all(k) {
        let c = sp.coefficient(&w, CoefficientMode::Recursive)?;
        t.check(holds(&c), || format!("{w}: c = {c}"));
    }
    Ok(())
}

/// Splits a grid of size `m + n` into the blocks of a skew sum: blanks in the
/// top-left `m x n`, crosses in the bottom-right `n x m`, and the two diagonal blocks.
pub fn skew_blocks(grid: &BpdGrid, m: usize) -> Option<(BpdGrid, BpdGrid)> {
    let total = grid.size();
    let n = total.checked_sub(m)?;
    let mut top = Vec::with_capacity(m * m);
    let mut bottom = Vec::with_capacity(n * n);
    for r in 1..=total {
        for c in 1..=total {
            let tile = grid.tile(r, c);
            match (r <= m, c <= n) {
                (true, true) if tile != Tile::Blank => return None,
                (false, false) if tile != Tile::Cross => return None,
                (true, false) => top.push(tile),
                (false, true) => bottom.push(tile),
                _ => {}
            }
        }
    }
    let top = BpdGrid::new(m, top).ok()?;
    let bottom = BpdGrid::new(n, bottom).ok()?;
    (top.validate().is_ok() && bottom.validate().is_ok()).then_some((top, bottom))
}

fn skew(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    let stats = size_stats(k);
    let by_type = stats.atlas.by_type();
    let type_count = |u: &Permutation| {
        size_stats(u.len())
            .atlas
            .entries
            .iter()
            .filter(|e| &e.permutation_type == u)
            .count()
    };
    for m in 1..k {
        for u in Permutation::all(m) {
            for v in Permutation::all(k - m) {
                let report = sp.skew_identities(&u, &v)?;
                t.check(report.nu_holds() && report.c_holds(), || format!("{report:?}"));
                let family = by_type.get(&report.skew).map(Vec::as_slice).unwrap_or(&[]);
                let blocks_ok = family.iter().all(|e| {
                    skew_blocks(&e.grid, m).is_some_and(|(a, b)| grid_type(&a) == u && grid_type(&b) == v)
                });
                let count_ok = family.len() == type_count(&u) * type_count(&v);
                t.check(blocks_ok && count_ok, || {
                    format!("BPD_K({}) is not the block product of BPD_K({u}) and BPD_K({v})", report.skew)
                });
            }
        }
    }
    Ok(())
}

fn pattern_sum(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    for w in Permutation::all(k) {
        let nu = sp.nu(&w)?;
        let mut sum = BetaPolynomial::zero();
        for (u, c) in all_patterns(&w) {
            sum += &sp.coefficient(&u, CoefficientMode::Recursive)?.scale(&c.into());
        }
        t.check(nu == sum, || format!("{w}: ν = {nu}, Σ c = {sum}"));
    }
    Ok(())
}

fn stanley(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    let p132: Permutation = "132".parse().expect("literal");
    for w in Permutation::all(k) {
        let nu = sp.nu(&w)?.constant_term();
        let p = pattern_count(&p132, &w);
        t.check((nu == 2.into()) == (p == 1), || format!("{w}: ν = {nu}, p_132 = {p}"));
    }
    Ok(())
}

fn gao_bound(sp: &Specializer, k: usize, t: &mut Tally) -> Result<(), VerifyError> {
    let p132: Permutation = "132".parse().expect("literal");
    let p1432: Permutation = "1432".parse().expect("literal");
    for w in Permutation::all(k) {
        let nu = sp.nu(&w)?.constant_term();
        let bound = 1 + pattern_count(&p132, &w) + pattern_count(&p1432, &w);
        t.check(nu >= bound.into(), || format!("{w}: ν = {nu} < {bound}"));
    }
    Ok(())
}

fn bk_order(k: usize, t: &mut Tally) {
    for e in &size_stats(k).atlas.entries {
        let col = resolve_with_order(&e.grid, ScanOrder::ColumnMajor);
        let row = resolve_with_order(&e.grid, ScanOrder::RowMajor);
        let ok = col == row
            && col.grid.underlying() == e.grid
            && col.grid.is_reduced()
            && col.grid.re_resolve() == col.grid
            && (!e.reduced || col.permutation_type == e.perm)
            && (e.reduced || col.grid.bump_count() > 0)
            && col.grid.permutation() == col.permutation_type;
        t.check(ok, || fixture(&e.grid));
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximaRow {
    pub n: usize,
    pub beta_value: i64,
    pub max_nu: i128,
    pub max_c: i128,
    pub argmax_nu: Vec<Permutation>,
    pub argmax_c: Vec<Permutation>,
}

impl MaximaRow {
    /// Every maximizer is layered.
    pub fn argmax_layered(&self) -> bool {
        self.argmax_nu.iter().chain(&self.argmax_c).all(Permutation::is_layered)
    }

    pub fn argmax_agree(&self) -> bool {
        self.argmax_nu == self.argmax_c
    }
}

/// Maxima of `ν^(β)_w` and `c^(β)_w` over `S_n` at an integer β.
pub fn maxima_table(n: usize, beta_value: i64) -> Result<MaximaRow, VerifyError> {
    maxima_table_with(Specializer::global(), n, beta_value)
}

pub fn maxima_table_with(sp: &Specializer, n: usize, beta_value: i64) -> Result<MaximaRow, VerifyError> {
    let levels = sp.evaluate_all(n, beta_value)?;
    let level = &levels[n];
    let argmax = |pick: fn(&(i128, i128)) -> i128| {
        let best = level.values().map(pick).max().expect("S_n is nonempty");
        let mut arg: Vec<Permutation> = level
            .iter()
            .filter(|(_, v)| pick(v) == best)
            .map(|(&key, _)| Permutation::unpack(key, n))
            .collect();
        arg.sort();
        (best, arg)
    };
    let (max_nu, argmax_nu) = argmax(|v| v.0);
    let (max_c, argmax_c) = argmax(|v| v.1);
    Ok(MaximaRow {
        n,
        beta_value,
        max_nu,
        max_c,
        argmax_nu,
        argmax_c,
    })
}
