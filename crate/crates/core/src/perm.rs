//! Permutations in one-line notation, subwords and classical pattern counting.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest permutation size the crate handles. Pipe labels and crossing sets are
/// packed into `u32` bitmasks, so this is a hard ceiling.
pub const MAX_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("cannot parse permutation from {0:?}")]
    Syntax(String),
    #[error("permutation of size {0} exceeds the supported maximum {MAX_SIZE}")]
    TooLarge(usize),
}

/// A bijection of `[n]` stored as its one-line word `w(1) w(2) ... w(n)`.
///
/// The derived ordering is lexicographic on the word, which gives deterministic
/// iteration order and usable map keys.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn parse(word: &[usize]) -> Result<Self, PermError> {
        let n = word.len();
        if n > MAX_SIZE {
            return Err(PermError::TooLarge(n));
        }
        let mut seen = vec![false; n + 1];
        for &x in word {
            if x == 0 || x > n || seen[x] {
                return Err(PermError::NotAPermutation(word.to_vec()));
            }
            seen[x] = true;
        }
        Ok(Permutation(word.iter().map(|&x| x as u8).collect()))
    }

    pub fn empty() -> Self {
        Permutation(Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n as u8).collect())
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (1..=n as u8).permutations(n).map(Permutation)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn word(&self) -> &[u8] {
        &self.0
    }

    /// `w(i)` for 1-based `i`.
    pub fn at(&self, i: usize) -> usize {
        self.0[i - 1] as usize
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize - 1] = (i + 1) as u8;
        }
        Permutation(inv)
    }

    /// Number of inversions.
    pub fn coxeter_length(&self) -> usize {
        let w = &self.0;
        (0..w.len())
            .map(|i| w[i + 1..].iter().filter(|&&x| x < w[i]).count())
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| x as usize == i + 1)
    }

    /// `(u(1)+n) ... (u(m)+n) v(1) ... v(n)` where `n = |v|`.
    pub fn skew_sum(&self, other: &Permutation) -> Permutation {
        let shift = other.len() as u8;
        let word = self
            .0
            .iter()
            .map(|&x| x + shift)
            .chain(other.0.iter().copied())
            .collect();
        Permutation(word)
    }

    /// `u(1) ... u(m) (v(1)+m) ... (v(n)+m)`.
    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let shift = self.len() as u8;
        let word = self
            .0
            .iter()
            .copied()
            .chain(other.0.iter().map(|&x| x + shift))
            .collect();
        Permutation(word)
    }

    pub fn contains(&self, pattern: &Permutation) -> bool {
        first_occurrence(pattern, self).is_some()
    }

    pub fn avoids(&self, pattern: &Permutation) -> bool {
        !self.contains(pattern)
    }

    /// Avoids 2143.
    pub fn is_vexillary(&self) -> bool {
        self.avoids(&pattern_2143())
    }

    /// Concatenation of consecutive decreasing blocks.
    pub fn is_layered(&self) -> bool {
        let w = &self.0;
        let mut start = 0;
        while start < w.len() {
            // A block starting at `start` covers values start+1..=top and begins with top.
            let top = w[start] as usize;
            if top <= start {
                return false;
            }
            for (k, &x) in w[start..top.min(w.len())].iter().enumerate() {
                if x as usize != top - k {
                    return false;
                }
            }
            start = top;
        }
        true
    }

    /// Packs the word into a `u64` key, 4 bits per entry storing `w(i) - 1`.
    /// Only valid for `n <= 16`.
    pub(crate) fn pack(&self) -> u64 {
        pack_word(&self.0)
    }

    pub(crate) fn unpack(key: u64, n: usize) -> Permutation {
        Permutation((0..n).map(|i| ((key >> (4 * i)) & 0xF) as u8 + 1).collect())
    }
}

pub(crate) fn pack_word(word: &[u8]) -> u64 {
    debug_assert!(word.len() <= 16);
    word.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &x)| acc | (((x - 1) as u64) << (4 * i)))
}

pub(crate) fn pattern_1243() -> Permutation {
    Permutation(vec![1, 2, 4, 3])
}

pub(crate) fn pattern_2143() -> Permutation {
    Permutation(vec![2, 1, 4, 3])
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        if self.len() <= 9 {
            for x in &self.0 {
                write!(f, "{x}")?;
            }
            Ok(())
        } else {
            write!(f, "{}", self.0.iter().join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    /// Accepts concatenated digits (`"2164753"`), comma separated entries
    /// (`"10,1,2,3,4,5,6,7,8,9"`), and `""`/`"∅"`/`"e"` for the empty permutation.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "∅" || s == "e" {
            return Ok(Permutation::empty());
        }
        let entries: Option<Vec<usize>> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse::<usize>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
        };
        let entries = entries.ok_or_else(|| PermError::Syntax(s.to_string()))?;
        Permutation::parse(&entries)
    }
}

/// Serialized as its one-line text form.
impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A choice of positions `s_1 < ... < s_m` inside a host permutation.
///
/// Positions are stored 0-based; [`SubwordSelection::positions`] reports them 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SubwordSelection {
    host: Permutation,
    indices: Vec<u8>,
}

impl SubwordSelection {
    /// `positions` are 1-based and must be strictly increasing within the host.
    pub fn new(host: &Permutation, positions: &[usize]) -> Result<Self, PermError> {
        let ok = positions.iter().all(|&p| p >= 1 && p <= host.len())
            && positions.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(PermError::Syntax(format!(
                "invalid subword positions {positions:?} for {host}"
            )));
        }
        Ok(SubwordSelection {
            host: host.clone(),
            indices: positions.iter().map(|&p| (p - 1) as u8).collect(),
        })
    }

    pub fn full(host: &Permutation) -> Self {
        SubwordSelection {
            host: host.clone(),
            indices: (0..host.len() as u8).collect(),
        }
    }

    pub(crate) fn from_zero_based(host: &Permutation, indices: Vec<u8>) -> Self {
        SubwordSelection {
            host: host.clone(),
            indices,
        }
    }

    pub fn host(&self) -> &Permutation {
        &self.host
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i as usize + 1).collect()
    }

    /// The selected entries `v(1) ... v(m)`.
    pub fn entries(&self) -> Vec<usize> {
        self.indices
            .iter()
            .map(|&i| self.host.0[i as usize] as usize)
            .collect()
    }

    /// Positions of the host *not* selected, 1-based.
    pub fn complement_positions(&self) -> Vec<usize> {
        (1..=self.host.len())
            .filter(|p| !self.indices.contains(&((p - 1) as u8)))
            .collect()
    }

    /// `perm(v)`.
    pub fn flatten(&self) -> Permutation {
        let entries: Vec<u8> = self.indices.iter().map(|&i| self.host.0[i as usize]).collect();
        flatten_word(&entries)
    }
}

impl fmt::Display for SubwordSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        let e = self.entries();
        if self.host.len() <= 9 {
            write!(f, "{}", e.iter().join(""))
        } else {
            write!(f, "{}", e.iter().join(","))
        }
    }
}

/// Order-isomorphic permutation of a word of distinct values.
pub fn flatten_word(entries: &[u8]) -> Permutation {
    let word = entries
        .iter()
        .map(|&x| 1 + entries.iter().filter(|&&y| y < x).count() as u8)
        .collect();
    Permutation(word)
}

/// Every `m`-element position set of `w`, in lexicographic order of positions.
pub fn subwords(w: &Permutation, m: usize) -> impl Iterator<Item = SubwordSelection> + '_ {
    (0..w.len() as u8)
        .combinations(m)
        .map(move |indices| SubwordSelection::from_zero_based(w, indices))
}

/// Every subword of `w` of every size, smallest sizes first.
pub fn all_subwords(w: &Permutation) -> impl Iterator<Item = SubwordSelection> + '_ {
    (0..=w.len()).flat_map(move |m| subwords(w, m))
}

fn is_occurrence(pattern: &[u8], host: &[u8], indices: &[u8]) -> bool {
    for a in 0..indices.len() {
        for b in a + 1..indices.len() {
            let lhs = host[indices[a] as usize] < host[indices[b] as usize];
            if lhs != (pattern[a] < pattern[b]) {
                return false;
            }
        }
    }
    true
}

/// `p_u(w)`: the number of subwords of `w` order-isomorphic to `u`.
pub fn pattern_count(u: &Permutation, w: &Permutation) -> u64 {
    if u.len() > w.len() {
        return 0;
    }
    (0..w.len() as u8)
        .combinations(u.len())
        .filter(|idx| is_occurrence(&u.0, &w.0, idx))
        .count() as u64
}

/// Lexicographically first occurrence of `u` in `w`.
pub fn first_occurrence(u: &Permutation, w: &Permutation) -> Option<SubwordSelection> {
    if u.len() > w.len() {
        return None;
    }
    (0..w.len() as u8)
        .combinations(u.len())
        .find(|idx| is_occurrence(&u.0, &w.0, idx))
        .map(|idx| SubwordSelection::from_zero_based(w, idx))
}

/// Layered permutations of size `n`, one per composition of `n`, sorted.
pub fn layered(n: usize) -> Vec<Permutation> {
    if n == 0 {
        return vec![Permutation::empty()];
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    // Bit k of `cuts` set means a block boundary after position k+1.
    for cuts in 0u32..(1 << (n - 1)) {
        let mut word = Vec::with_capacity(n);
        let mut start = 0;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                word.extend((start + 1..=end).rev().map(|x| x as u8));
                start = end;
            }
        }
        out.push(Permutation(word));
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn parse_accepts_and_rejects() {
        assert_eq!(Permutation::parse(&[2, 1, 6, 4, 7, 5, 3]).unwrap().len(), 7);
        assert!(Permutation::parse(&[]).unwrap().is_empty());
        assert_eq!(
            Permutation::parse(&[1, 1, 2]),
            Err(PermError::NotAPermutation(vec![1, 1, 2]))
        );
        assert!(Permutation::parse(&[0, 1]).is_err());
        assert!(Permutation::parse(&[1, 3]).is_err());
    }

    #[test]
    fn text_forms() {
        assert_eq!(p("2164753").to_string(), "2164753");
        let big = p("10,1,2,3,4,5,6,7,8,9");
        assert_eq!(big.len(), 10);
        assert_eq!(big.to_string(), "10,1,2,3,4,5,6,7,8,9");
        assert_eq!(p("∅"), Permutation::empty());
        assert!("12a".parse::<Permutation>().is_err());
        assert!("113".parse::<Permutation>().is_err());
    }

    #[test]
    fn lengths() {
        assert_eq!(Permutation::empty().coxeter_length(), 0);
        assert_eq!(p("2164753").coxeter_length(), 8);
        assert_eq!(p("35421").coxeter_length(), 8);
        assert_eq!(p("35421").coxeter_length(), 3 * 2 + p("132").coxeter_length() + p("21").coxeter_length());
    }

    #[test]
    fn flatten_examples() {
        let host = p("12453");
        let v = SubwordSelection::new(&host, &[2, 4, 5]).unwrap();
        assert_eq!(v.entries(), vec![2, 5, 3]);
        assert_eq!(v.flatten(), p("132"));
        assert_eq!(SubwordSelection::full(&p("2164753")).flatten(), p("2164753"));
        let w = p("2164753");
        let v = SubwordSelection::new(&w, &[1, 2, 5, 6, 7]).unwrap();
        assert_eq!(v.to_string(), "21753");
        assert_eq!(v.flatten(), p("21543"));
        assert_eq!(v.complement_positions(), vec![3, 4]);
    }

    #[test]
    fn subword_streams() {
        let w = p("132");
        let empty: Vec<_> = subwords(&w, 0).collect();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());
        let full: Vec<_> = subwords(&w, 3).collect();
        assert_eq!(full, vec![SubwordSelection::full(&w)]);
        let w = p("1243");
        let three: Vec<_> = subwords(&w, 3).map(|s| s.positions()).collect();
        assert_eq!(three, vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]);
    }

    #[test]
    fn pattern_counts() {
        // Occurrences 2143 and 2153.
        assert_eq!(pattern_count(&p("2143"), &p("21453")), 2);
        assert_eq!(pattern_count(&p("2143"), &p("21354")), 1);
        assert_eq!(pattern_count(&p("2143"), &p("12453")), 0);
        assert_eq!(pattern_count(&p("132"), &p("21453")), 4);
        for w in Permutation::all(4) {
            assert_eq!(pattern_count(&Permutation::empty(), &w), 1);
        }
        assert_eq!(pattern_count(&p("132"), &p("1243")), 2);
        assert_eq!(pattern_count(&p("132"), &p("1432")), 3);
        assert_eq!(pattern_count(&p("1234"), &p("123")), 0);
    }

    #[test]
    fn skew_sums() {
        assert_eq!(p("1").skew_sum(&p("1")), p("21"));
        assert_eq!(p("132").skew_sum(&p("21")), p("35421"));
        assert_eq!(Permutation::empty().skew_sum(&p("312")), p("312"));
        assert_eq!(p("21").direct_sum(&p("1")), p("213"));
    }

    #[test]
    fn layered_lists() {
        assert_eq!(layered(2), vec![p("12"), p("21")]);
        let four = layered(4);
        assert_eq!(four.len(), 8);
        assert!(four.contains(&p("1432")) && four.contains(&p("2143")));
        assert!(layered(9).contains(&p("143298765")));
        assert_eq!(layered(0), vec![Permutation::empty()]);
        for n in 1..=7 {
            let all = layered(n);
            assert_eq!(all.len(), 1 << (n - 1));
            assert!(all.iter().all(Permutation::is_layered));
        }
        assert!(!p("2413").is_layered());
        assert!(!p("231").is_layered());
    }

    #[test]
    fn layered_iff_avoids_231_and_312() {
        for n in 0..=7 {
            for w in Permutation::all(n) {
                let avoids = w.avoids(&p("231")) && w.avoids(&p("312"));
                assert_eq!(w.is_layered(), avoids, "{w}");
            }
        }
    }

    #[test]
    fn packing_round_trips() {
        for w in Permutation::all(5) {
            assert_eq!(Permutation::unpack(w.pack(), 5), w);
        }
    }
}
