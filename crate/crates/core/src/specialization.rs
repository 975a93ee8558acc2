//! Principal specializations `ν_w^(β)`, pattern coefficients `c_w^(β)` and
//! β-Grothendieck polynomials, all computed from the grids of `BPD_K(w)`.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::enumeration::{atlas, fold_grids, ATLAS_MAX, DEFAULT_GUARD};
use crate::grid::{BpdGrid, Tile};
use crate::ktheory::grid_type;
use crate::perm::{flatten_word, Permutation};
use crate::poly::{BetaPolynomial, MultivariatePolynomial};

/// Largest size for which type tables can be built; permutations are packed into
/// `u64` keys at 4 bits per entry.
pub const TABLE_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("size {size} exceeds the guard {guard}")]
    GuardExceeded { size: usize, guard: usize },
    #[error("β^{length} does not divide the weight sum of {w}")]
    Cancellation { w: Permutation, length: usize },
    #[error("integer overflow evaluating at β = {0}")]
    Overflow(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoefficientMode {
    Recursive,
    InclusionExclusion,
}

impl FromStr for CoefficientMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "recursive" => Ok(CoefficientMode::Recursive),
            "ie" | "inclusion_exclusion" | "inclusion-exclusion" => Ok(CoefficientMode::InclusionExclusion),
            _ => Err(format!("unknown coefficient mode {s:?}")),
        }
    }
}

/// Blank excess and j-elbow count of a grid.
type WeightKey = (u8, u8);

/// For every type `w ∈ S_n`, how many grids of `BPD_K(w)` have each weight.
pub struct TypeTable {
    n: usize,
    hist: HashMap<u64, Vec<(WeightKey, u64)>>,
}

impl TypeTable {
    /// One pass over `BPD(n)`.
    pub fn build(n: usize) -> TypeTable {
        assert!(n <= TABLE_MAX, "type table size {n} exceeds {TABLE_MAX}");
        let raw = fold_grids(
            n,
            HashMap::<u64, HashMap<WeightKey, u64>>::new,
            |acc, grid| {
                let ty = grid_type(grid);
                let excess = grid.blank_count() - ty.coxeter_length();
                let key = (excess as u8, grid.jelbow_count() as u8);
                *acc.entry(ty.pack()).or_default().entry(key).or_default() += 1;
            },
            |mut a, b| {
                for (ty, h) in b {
                    let slot = a.entry(ty).or_default();
                    for (k, c) in h {
                        *slot.entry(k).or_default() += c;
                    }
                }
                a
            },
        );
        let hist = raw
            .into_iter()
            .map(|(ty, h)| {
                let mut v: Vec<_> = h.into_iter().collect();
                v.sort_unstable();
                (ty, v)
            })
            .collect();
        TypeTable { n, hist }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of distinct types, which is `n!`.
    pub fn type_count(&self) -> usize {
        self.hist.len()
    }

    pub fn types(&self) -> impl Iterator<Item = Permutation> + '_ {
        self.hist.keys().map(|&k| Permutation::unpack(k, self.n))
    }

    /// `(blank excess, j-elbows, grid count)` over `BPD_K(w)`.
    pub fn histogram(&self, w: &Permutation) -> Vec<(usize, usize, u64)> {
        assert_eq!(w.len(), self.n);
        self.hist
            .get(&w.pack())
            .map(|v| v.iter().map(|&((e, j), c)| (e as usize, j as usize, c)).collect())
            .unwrap_or_default()
    }

    pub fn nu(&self, w: &Permutation) -> BetaPolynomial {
        self.histogram(w)
            .into_iter()
            .map(|(e, j, c)| BetaPolynomial::weight(e, j).scale(&BigInt::from(c)))
            .sum()
    }

    /// `ν_w^(β)` at an integer β, for every type, keyed by packed word.
    pub fn nu_at(&self, beta: i64) -> Result<HashMap<u64, i128>, SpecError> {
        let b = beta as i128;
        let pow = |base: i128, k: u8| -> Option<i128> { (0..k).try_fold(1i128, |acc, _| acc.checked_mul(base)) };
        self.hist
            .iter()
            .map(|(&ty, h)| {
                let total = h.iter().try_fold(0i128, |acc, &((e, j), c)| {
                    let term = pow(b, e)?.checked_mul(pow(b.checked_add(1)?, j)?)?;
                    acc.checked_add(term.checked_mul(c as i128)?)
                });
                total.map(|t| (ty, t)).ok_or(SpecError::Overflow(beta))
            })
            .collect()
    }
}

/// Counts of each proper pattern of `w`, including the empty one.
pub fn pattern_profile(w: &Permutation) -> BTreeMap<Permutation, u64> {
    let n = w.len();
    let word = w.word();
    let mut out = BTreeMap::new();
    let mut buf = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) - 1 {
        buf.clear();
        buf.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| word[i]));
        *out.entry(flatten_word(&buf)).or_insert(0) += 1;
    }
    out
}

/// `(nu, c)` at an integer β for every permutation of one size, keyed by packed word.
pub type EvaluatedLevel = HashMap<u64, (i128, i128)>;

/// Memoizing calculator. All methods refuse permutations longer than the guard.
pub struct Specializer {
    guard: usize,
    tables: RwLock<HashMap<usize, Arc<TypeTable>>>,
    nu_cache: RwLock<HashMap<Permutation, BetaPolynomial>>,
    coeff_cache: RwLock<HashMap<Permutation, BetaPolynomial>>,
}

impl Default for Specializer {
    fn default() -> Self {
        Specializer::new(DEFAULT_GUARD)
    }
}

impl Specializer {
    pub fn new(guard: usize) -> Self {
        Specializer {
            guard: guard.min(TABLE_MAX),
            tables: RwLock::default(),
            nu_cache: RwLock::default(),
            coeff_cache: RwLock::default(),
        }
    }

    /// Process-wide instance with the default guard.
    pub fn global() -> &'static Specializer {
        static GLOBAL: OnceLock<Specializer> = OnceLock::new();
        GLOBAL.get_or_init(Specializer::default)
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    fn check(&self, size: usize) -> Result<(), SpecError> {
        if size > self.guard {
            return Err(SpecError::GuardExceeded {
                size,
                guard: self.guard,
            });
        }
        Ok(())
    }

    pub fn table(&self, n: usize) -> Result<Arc<TypeTable>, SpecError> {
        self.check(n)?;
        if let Some(t) = self.tables.read().expect("table lock").get(&n) {
            return Ok(t.clone());
        }
        let built = Arc::new(TypeTable::build(n));
        Ok(self
            .tables
            .write()
            .expect("table lock")
            .entry(n)
            .or_insert(built)
            .clone())
    }

    /// Seeds the ν memo, e.g. from a disk cache.
    pub fn preload(&self, entries: impl IntoIterator<Item = (Permutation, BetaPolynomial)>) {
        self.nu_cache.write().expect("nu lock").extend(entries);
    }

    /// Every memoized ν, sorted by permutation.
    pub fn cached_nu(&self) -> Vec<(Permutation, BetaPolynomial)> {
        let mut out: Vec<_> = self
            .nu_cache
            .read()
            .expect("nu lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        out.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        out
    }

    /// `ν_w^(β)`, the β-weight sum over `BPD_K(w)`.
    pub fn nu(&self, w: &Permutation) -> Result<BetaPolynomial, SpecError> {
        self.check(w.len())?;
        if let Some(v) = self.nu_cache.read().expect("nu lock").get(w) {
            return Ok(v.clone());
        }
        let v = self.table(w.len())?.nu(w);
        self.nu_cache.write().expect("nu lock").insert(w.clone(), v.clone());
        Ok(v)
    }

    pub fn coefficient(&self, w: &Permutation, mode: CoefficientMode) -> Result<BetaPolynomial, SpecError> {
        self.check(w.len())?;
        match mode {
            CoefficientMode::Recursive => self.coefficient_recursive(w),
            CoefficientMode::InclusionExclusion => {
                let n = w.len();
                let mut total = BetaPolynomial::zero();
                for (u, count) in pattern_profile(w)
                    .into_iter()
                    .chain(std::iter::once((w.clone(), 1)))
                {
                    let term = self.nu(&u)?.scale(&BigInt::from(count));
                    if (n - u.len()) % 2 == 0 {
                        total += &term;
                    } else {
                        total -= &term;
                    }
                }
                Ok(total)
            }
        }
    }

    /// `c_w = ν_w - Σ_{|u| < |w|} c_u p_u(w)`, seeded by `c_∅ = 1`.
    fn coefficient_recursive(&self, w: &Permutation) -> Result<BetaPolynomial, SpecError> {
        if let Some(c) = self.coeff_cache.read().expect("coefficient lock").get(w) {
            return Ok(c.clone());
        }
        let mut c = self.nu(w)?;
        for (u, count) in pattern_profile(w) {
            c -= &self.coefficient_recursive(&u)?.scale(&BigInt::from(count));
        }
        self.coeff_cache
            .write()
            .expect("coefficient lock")
            .insert(w.clone(), c.clone());
        Ok(c)
    }

    /// `𝔊_w^(β)` in `x_1, ..., x_{n-1}`.
    pub fn grothendieck(&self, w: &Permutation) -> Result<MultivariatePolynomial, SpecError> {
        self.check(w.len())?;
        let n = w.len();
        let vars = n.saturating_sub(1);
        let mut profiles: HashMap<(Vec<u32>, Vec<u32>), u64> = HashMap::new();
        let mut add = |grid: &BpdGrid| {
            let mut blanks = vec![0u32; vars];
            let mut jelbows = vec![0u32; vars];
            for (row, tiles) in grid.rows().enumerate() {
                for &t in tiles {
                    let slot = match t {
                        Tile::Blank => &mut blanks,
                        Tile::JElbow => &mut jelbows,
                        _ => continue,
                    };
                    assert!(row < vars, "bottom row holds only tiles open to the south");
                    slot[row] += 1;
                }
            }
            *profiles.entry((blanks, jelbows)).or_default() += 1;
        };
        if n <= ATLAS_MAX {
            for e in atlas(n).entries.iter().filter(|e| &e.permutation_type == w) {
                add(&e.grid);
            }
        } else {
            let grids = fold_grids(
                n,
                Vec::new,
                |acc: &mut Vec<BpdGrid>, g| {
                    if &grid_type(g) == w {
                        acc.push(g.clone());
                    }
                },
                |mut a, b| {
                    a.extend(b);
                    a
                },
            );
            grids.iter().for_each(&mut add);
        }

        let mut sum = MultivariatePolynomial::zero(vars);
        let mut keys: Vec<_> = profiles.into_iter().collect();
        keys.sort();
        for ((blanks, jelbows), count) in keys {
            let total_blanks: u32 = blanks.iter().sum();
            let mut term = MultivariatePolynomial::zero(vars);
            term.add_term(blanks, BetaPolynomial::monomial(count, total_blanks as usize));
            for (i, &j) in jelbows.iter().enumerate() {
                if j == 0 {
                    continue;
                }
                // (1 + β x_i)^j
                let mut factor = MultivariatePolynomial::zero(vars);
                for (k, binom) in BetaPolynomial::weight(0, j as usize).coeffs().iter().enumerate() {
                    let mut e = vec![0; vars];
                    e[i] = k as u32;
                    factor.add_term(e, BetaPolynomial::monomial(binom.clone(), k));
                }
                term = term.mul(&factor);
            }
            sum = sum.add(&term);
        }
        let length = w.coxeter_length();
        sum.map_coeffs(|c| c.divide_by_beta_power(length))
            .ok_or(SpecError::Cancellation { w: w.clone(), length })
    }

    pub fn skew_identities(&self, u: &Permutation, v: &Permutation) -> Result<SkewReport, SpecError> {
        self.check(u.len() + v.len())?;
        let skew = u.skew_sum(v);
        let mode = CoefficientMode::Recursive;
        Ok(SkewReport {
            nu_skew: self.nu(&skew)?,
            nu_product: &self.nu(u)? * &self.nu(v)?,
            c_skew: self.coefficient(&skew, mode)?,
            c_product: &self.coefficient(u, mode)? * &self.coefficient(v, mode)?,
            u: u.clone(),
            v: v.clone(),
            skew,
        })
    }

    /// `ν` and `c` at an integer β for every permutation of size `0..=n`; entry `k`
    /// of the result covers `S_k`.
    pub fn evaluate_all(&self, n: usize, beta: i64) -> Result<Vec<EvaluatedLevel>, SpecError> {
        self.check(n)?;
        let mut levels: Vec<EvaluatedLevel> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let nu = self.table(k)?.nu_at(beta)?;
            let keys: Vec<u64> = nu.keys().copied().collect();
            let level: Result<EvaluatedLevel, SpecError> = keys
                .par_iter()
                .map(|&key| {
                    let w = Permutation::unpack(key, k);
                    let mut c = nu[&key];
                    let word = w.word();
                    let mut buf = Vec::with_capacity(k);
                    for mask in 0u32..(1u32 << k) - 1 {
                        buf.clear();
                        buf.extend((0..k).filter(|i| mask & (1 << i) != 0).map(|i| word[i]));
                        let m = buf.len();
                        let cu = levels[m][&pack_flattened(&buf)].1;
                        c = c.checked_sub(cu).ok_or(SpecError::Overflow(beta))?;
                    }
                    Ok((key, (nu[&key], c)))
                })
                .collect();
            levels.push(level?);
        }
        Ok(levels)
    }
}

/// Packed key of the flattening of distinct values `entries` (each at most 16).
fn pack_flattened(entries: &[u8]) -> u64 {
    let present = entries.iter().fold(0u32, |m, &x| m | 1 << x);
    entries.iter().enumerate().fold(0u64, |acc, (i, &x)| {
        let rank = (present & ((1u32 << x) - 1)).count_ones() as u64;
        acc | (rank << (4 * i))
    })
}

/// Both sides of `ν_{u⊖v} = ν_u ν_v` and `c_{u⊖v} = c_u c_v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewReport {
    pub u: Permutation,
    pub v: Permutation,
    pub skew: Permutation,
    pub nu_skew: BetaPolynomial,
    pub nu_product: BetaPolynomial,
    pub c_skew: BetaPolynomial,
    pub c_product: BetaPolynomial,
}

impl SkewReport {
    pub fn nu_holds(&self) -> bool {
        self.nu_skew == self.nu_product
    }

    pub fn c_holds(&self) -> bool {
        self.c_skew == self.c_product
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::pack_word;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn small_values() {
        let sp = Specializer::new(6);
        assert_eq!(sp.nu(&p("")).unwrap(), BetaPolynomial::one());
        assert_eq!(sp.nu(&p("123")).unwrap(), BetaPolynomial::one());
        assert_eq!(sp.nu(&p("1243")).unwrap().to_string(), "b^2+3b+3");
        assert_eq!(sp.nu(&p("132")).unwrap().to_string(), "b+2");
        assert_eq!(
            sp.coefficient(&p("132"), CoefficientMode::Recursive).unwrap().to_string(),
            "b+1"
        );
    }

    #[test]
    fn packed_flatten_matches() {
        for w in Permutation::all(5) {
            let word = w.word();
            for mask in 0u32..32 {
                let sub: Vec<u8> = (0..5).filter(|i| mask & (1 << i) != 0).map(|i| word[i]).collect();
                assert_eq!(pack_flattened(&sub), pack_word(flatten_word(&sub).word()));
            }
        }
    }

    #[test]
    fn guard() {
        let sp = Specializer::new(3);
        assert_eq!(
            sp.nu(&p("1234")),
            Err(SpecError::GuardExceeded { size: 4, guard: 3 })
        );
    }

    #[test]
    fn profile_of_132() {
        let prof = pattern_profile(&p("132"));
        let expect: BTreeMap<Permutation, u64> = [("", 1), ("1", 3), ("12", 2), ("21", 1)]
            .into_iter()
            .map(|(s, c)| (p(s), c))
            .collect();
        assert_eq!(prof, expect);
    }
}
