//! Complete deterministic automata, their word actions and the exact
//! reset-threshold oracle.
//!
//! States are `0..n` internally. Everything that faces a user (the text
//! format, reports, `Display` impls) shows them as `1..=n`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Index of a letter in the automaton's alphabet (alphabet order = input order).
pub type LetterId = usize;

/// Default cap on the number of subsets visited by [`Automaton::reset_threshold_exact`].
pub const DEFAULT_SUBSET_CAP: usize = 1 << 22;

/// A finite word over the alphabet of some automaton. The empty word is ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<LetterId>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(a: LetterId) -> Self {
        Word(vec![a])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[LetterId] {
        &self.0
    }

    pub fn push(&mut self, a: LetterId) {
        self.0.push(a);
    }

    /// `a · self`
    pub fn prepend(&self, a: LetterId) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// `self · a`
    pub fn append(&self, a: LetterId) -> Word {
        let mut v = self.0.clone();
        v.push(a);
        Word(v)
    }

    /// `self · other`
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Letter names in order.
    pub fn names(&self, aut: &Automaton) -> Vec<String> {
        self.0
            .iter()
            .map(|&a| aut.letter_name(a).to_string())
            .collect()
    }

    /// Space separated letter names, or `ε` for the empty word.
    pub fn render(&self, aut: &Automaton) -> String {
        if self.0.is_empty() {
            "ε".to_string()
        } else {
            self.names(aut).join(" ")
        }
    }

    /// Shortlex comparison: shorter first, then lexicographic by letter id.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<LetterId>> for Word {
    fn from(v: Vec<LetterId>) -> Self {
        Word(v)
    }
}

impl FromIterator<LetterId> for Word {
    fn from_iter<I: IntoIterator<Item = LetterId>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// A subset of the state set `0..n`, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    n: usize,
    bits: Vec<u64>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet {
            n,
            bits: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = StateSet::empty(n);
        for q in 0..n {
            s.insert(q);
        }
        s
    }

    pub fn singleton(n: usize, q: usize) -> Self {
        let mut s = StateSet::empty(n);
        s.insert(q);
        s
    }

    /// Builds a set from 0-based states, rejecting out-of-range ones.
    pub fn from_states<I: IntoIterator<Item = usize>>(n: usize, states: I) -> Result<Self> {
        let mut s = StateSet::empty(n);
        for q in states {
            if q >= n {
                return Err(Error::StateOutOfRange { state: q + 1, n });
            }
            s.insert(q);
        }
        Ok(s)
    }

    /// Builds a set from 1-based states.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(n: usize, states: I) -> Result<Self> {
        let mut s = StateSet::empty(n);
        for q in states {
            if q == 0 || q > n {
                return Err(Error::StateOutOfRange { state: q, n });
            }
            s.insert(q - 1);
        }
        Ok(s)
    }

    /// Set whose members are the one bits of `mask` (requires `n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "from_mask needs n <= 64");
        let mut s = StateSet::empty(n);
        if n > 0 {
            let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            s.bits[0] = mask & keep;
        }
        s
    }

    /// The set as a bitmask, when it fits in one word.
    pub fn to_mask(&self) -> Option<u64> {
        match self.bits.len() {
            0 => Some(0),
            1 => Some(self.bits[0]),
            _ => None,
        }
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, q: usize) {
        debug_assert!(q < self.n);
        self.bits[q / 64] |= 1 << (q % 64);
    }

    pub fn remove(&mut self, q: usize) {
        debug_assert!(q < self.n);
        self.bits[q / 64] &= !(1 << (q % 64));
    }

    pub fn contains(&self, q: usize) -> bool {
        q < self.n && self.bits[q / 64] & (1 << (q % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Members in increasing order (0-based).
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&q| self.contains(q))
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|q| q + 1).collect()
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|q| (q + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A complete deterministic automaton `(Q, Σ, δ)` with `Q = 0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automaton {
    n: usize,
    names: Vec<String>,
    // table[a][q] = q.a
    table: Vec<Vec<usize>>,
}

/// Result of the exact reset-threshold search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetThreshold {
    pub length: usize,
    pub witness: Word,
}

impl Automaton {
    /// Builds an automaton from named letters with 0-based image tables.
    pub fn new(n: usize, letters: Vec<(String, Vec<usize>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidAutomaton("need at least one state".into()));
        }
        if letters.is_empty() {
            return Err(Error::InvalidAutomaton("need at least one letter".into()));
        }
        let mut names = Vec::with_capacity(letters.len());
        let mut table = Vec::with_capacity(letters.len());
        for (name, images) in letters {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAutomaton(format!(
                    "letter name `{name}` must be nonempty and whitespace-free"
                )));
            }
            if names.contains(&name) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate letter name `{name}`"
                )));
            }
            if images.len() != n {
                return Err(Error::InvalidAutomaton(format!(
                    "letter `{name}` has {} images, expected {n}",
                    images.len()
                )));
            }
            if let Some(&bad) = images.iter().find(|&&q| q >= n) {
                return Err(Error::StateOutOfRange { state: bad + 1, n });
            }
            names.push(name);
            table.push(images);
        }
        Ok(Automaton { n, names, table })
    }

    /// Same as [`Automaton::new`] but with 1-based images.
    pub fn from_one_based(n: usize, letters: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut converted = Vec::with_capacity(letters.len());
        for (name, images) in letters {
            let mut zero = Vec::with_capacity(images.len());
            for q in images {
                if q == 0 || q > n {
                    return Err(Error::StateOutOfRange { state: q, n });
                }
                zero.push(q - 1);
            }
            converted.push((name, zero));
        }
        Automaton::new(n, converted)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.table.len()
    }

    pub fn letters(&self) -> std::ops::Range<LetterId> {
        0..self.table.len()
    }

    pub fn letter_name(&self, a: LetterId) -> &str {
        &self.names[a]
    }

    pub fn letter_id(&self, name: &str) -> Result<LetterId> {
        self.names
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// Parses a space separated list of letter names into a word.
    pub fn word_from_names(&self, text: &str) -> Result<Word> {
        text.split_whitespace().map(|s| self.letter_id(s)).collect()
    }

    /// The image table of letter `a` (0-based).
    pub fn table(&self, a: LetterId) -> &[usize] {
        &self.table[a]
    }

    /// `q.a`
    pub fn step(&self, q: usize, a: LetterId) -> usize {
        self.table[a][q]
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&a| a >= self.table.len()) {
            Some(&id) => Err(Error::InvalidLetter {
                id,
                size: self.table.len(),
            }),
            None => Ok(()),
        }
    }

    /// `q.w`; the word must be valid.
    pub fn state_after(&self, q: usize, w: &Word) -> usize {
        w.letters().iter().fold(q, |p, &a| self.table[a][p])
    }

    /// The transformation `q ↦ q.w` as an image vector.
    pub fn transformation(&self, w: &Word) -> Result<Vec<usize>> {
        self.check_word(w)?;
        Ok((0..self.n).map(|q| self.state_after(q, w)).collect())
    }

    /// `S.w = { p.w : p ∈ S }`
    pub fn apply_word(&self, s: &StateSet, w: &Word) -> Result<StateSet> {
        self.check_word(w)?;
        let mut out = StateSet::empty(self.n);
        for q in s.iter() {
            out.insert(self.state_after(q, w));
        }
        Ok(out)
    }

    /// `S.a⁻¹` for a single letter.
    pub fn preimage_letter(&self, s: &StateSet, a: LetterId) -> StateSet {
        let mut out = StateSet::empty(self.n);
        for (q, &img) in self.table[a].iter().enumerate() {
            if s.contains(img) {
                out.insert(q);
            }
        }
        out
    }

    /// `S.w⁻¹ = { q : q.w ∈ S }`
    pub fn preimage(&self, s: &StateSet, w: &Word) -> Result<StateSet> {
        self.check_word(w)?;
        Ok(w.letters()
            .iter()
            .rev()
            .fold(s.clone(), |acc, &a| self.preimage_letter(&acc, a)))
    }

    /// `|Q| − |Q.w|`
    pub fn defect(&self, w: &Word) -> Result<usize> {
        let image = self.apply_word(&StateSet::full(self.n), w)?;
        Ok(self.n - image.len())
    }

    pub fn letter_defect(&self, a: LetterId) -> usize {
        let mut seen = vec![false; self.n];
        for &q in &self.table[a] {
            seen[q] = true;
        }
        seen.iter().filter(|&&b| !b).count()
    }

    /// Defect of every letter, in alphabet order.
    pub fn defect_profile(&self) -> Vec<usize> {
        self.letters().map(|a| self.letter_defect(a)).collect()
    }

    /// `Σ_i`: the letters of defect exactly `i`.
    pub fn letters_of_defect(&self, i: usize) -> Vec<LetterId> {
        self.letters()
            .filter(|&a| self.letter_defect(a) == i)
            .collect()
    }

    /// Letters of positive defect, `Σ \ Σ_0`.
    pub fn deficient_letters(&self) -> Vec<LetterId> {
        self.letters()
            .filter(|&a| self.letter_defect(a) > 0)
            .collect()
    }

    pub fn max_letter_defect(&self) -> usize {
        self.defect_profile().into_iter().max().unwrap_or(0)
    }

    pub fn is_reset_word(&self, w: &Word) -> Result<bool> {
        Ok(self.apply_word(&StateSet::full(self.n), w)?.len() == 1)
    }

    /// Whether every state reaches every other state in the transition digraph.
    pub fn is_strongly_connected(&self) -> bool {
        let forward = self.reach_from(0, false);
        let backward = self.reach_from(0, true);
        forward.iter().all(|&b| b) && backward.iter().all(|&b| b)
    }

    fn reach_from(&self, start: usize, reverse: bool) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.n];
        for row in &self.table {
            for (q, &p) in row.iter().enumerate() {
                if reverse {
                    adj[p].push(q);
                } else {
                    adj[q].push(p);
                }
            }
        }
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for &p in &adj[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Pair-merging criterion: every pair of states is merged by some word.
    pub fn is_synchronizing(&self) -> bool {
        let n = self.n;
        if n == 1 {
            return true;
        }
        let idx = |p: usize, q: usize| {
            let (p, q) = if p < q { (p, q) } else { (q, p) };
            p * n + q
        };
        let inverse: Vec<Vec<Vec<usize>>> = self
            .table
            .iter()
            .map(|row| {
                let mut inv = vec![Vec::new(); n];
                for (q, &p) in row.iter().enumerate() {
                    inv[p].push(q);
                }
                inv
            })
            .collect();
        let mut merged = vec![false; n * n];
        let mut queue = VecDeque::new();
        for row in &self.table {
            for p in 0..n {
                for q in p + 1..n {
                    if row[p] == row[q] && !merged[idx(p, q)] {
                        merged[idx(p, q)] = true;
                        queue.push_back((p, q));
                    }
                }
            }
        }
        let mut count = queue.len();
        while let Some((p, q)) = queue.pop_front() {
            for inv in &inverse {
                for &pp in &inv[p] {
                    for &qq in &inv[q] {
                        if pp != qq && !merged[idx(pp, qq)] {
                            merged[idx(pp, qq)] = true;
                            count += 1;
                            queue.push_back((pp, qq));
                        }
                    }
                }
            }
        }
        count == n * (n - 1) / 2
    }

    /// Exact reset threshold by breadth-first search over the subset lattice,
    /// starting at `Q` and applying letters forward. Ties are broken by
    /// alphabet order. `subset_cap` bounds the number of visited subsets.
    pub fn reset_threshold_exact(&self, subset_cap: usize) -> Result<ResetThreshold> {
        if !self.is_synchronizing() {
            return Err(Error::NotSynchronizing);
        }
        if self.n > 64 {
            return Err(Error::ResourceCap {
                what: format!("subset search over {} states", self.n),
                limit: 64,
            });
        }
        let start = StateSet::full(self.n).to_mask().expect("n <= 64");
        if start.count_ones() == 1 {
            return Ok(ResetThreshold {
                length: 0,
                witness: Word::empty(),
            });
        }
        // letter images as lookup rows
        let rows: Vec<Vec<u64>> = self
            .table
            .iter()
            .map(|row| row.iter().map(|&p| 1u64 << p).collect())
            .collect();
        let mut parent: HashMap<u64, (u64, LetterId)> = HashMap::new();
        parent.insert(start, (start, usize::MAX));
        let mut queue = VecDeque::from([start]);
        while let Some(mask) = queue.pop_front() {
            for (a, row) in rows.iter().enumerate() {
                let mut image = 0u64;
                let mut rest = mask;
                while rest != 0 {
                    let q = rest.trailing_zeros() as usize;
                    image |= row[q];
                    rest &= rest - 1;
                }
                if parent.contains_key(&image) {
                    continue;
                }
                parent.insert(image, (mask, a));
                if image.count_ones() == 1 {
                    let mut letters = Vec::new();
                    let mut cur = image;
                    while cur != start {
                        let (prev, a) = parent[&cur];
                        letters.push(a);
                        cur = prev;
                    }
                    letters.reverse();
                    return Ok(ResetThreshold {
                        length: letters.len(),
                        witness: Word(letters),
                    });
                }
                if parent.len() > subset_cap {
                    return Err(Error::ResourceCap {
                        what: "subset BFS frontier".into(),
                        limit: subset_cap,
                    });
                }
                queue.push_back(image);
            }
        }
        // unreachable for synchronizing automata
        Err(Error::InternalContradiction(
            "pair criterion says synchronizing but subset BFS found no singleton".into(),
        ))
    }
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.table.len())?;
        for (name, row) in self.names.iter().zip(&self.table) {
            write!(f, "{name}")?;
            for &q in row {
                write!(f, " {}", q + 1)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cerny;

    fn set(n: usize, xs: &[usize]) -> StateSet {
        StateSet::from_one_based(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn apply_word_on_c4() {
        let c4 = cerny(4).unwrap();
        let a = Word::letter(0);
        let b = Word::letter(1);
        assert_eq!(
            c4.apply_word(&StateSet::full(4), &Word::empty()).unwrap(),
            StateSet::full(4)
        );
        assert_eq!(c4.apply_word(&set(4, &[1]), &a).unwrap(), set(4, &[2]));
        assert_eq!(c4.apply_word(&set(4, &[1, 2]), &b).unwrap(), set(4, &[2]));
    }

    #[test]
    fn preimage_on_c4() {
        let c4 = cerny(4).unwrap();
        let b = Word::letter(1);
        assert_eq!(c4.preimage(&set(4, &[2]), &b).unwrap(), set(4, &[1, 2]));
        assert!(c4.preimage(&set(4, &[1]), &b).unwrap().is_empty());
        let w = c4.word_from_names("a b b a").unwrap();
        assert_eq!(
            c4.preimage(&StateSet::full(4), &w).unwrap(),
            StateSet::full(4)
        );
    }

    #[test]
    fn invalid_letter_rejected() {
        let c4 = cerny(4).unwrap();
        let bad = Word::from(vec![0, 7]);
        assert!(matches!(
            c4.apply_word(&StateSet::full(4), &bad),
            Err(Error::InvalidLetter { id: 7, size: 2 })
        ));
        assert!(c4.preimage(&StateSet::full(4), &bad).is_err());
        assert!(c4.defect(&bad).is_err());
    }

    #[test]
    fn defects_on_c4() {
        let c4 = cerny(4).unwrap();
        assert_eq!(c4.defect(&Word::empty()).unwrap(), 0);
        assert_eq!(c4.defect(&Word::letter(0)).unwrap(), 0);
        assert_eq!(c4.defect(&Word::letter(1)).unwrap(), 1);
        let rt = c4.reset_threshold_exact(DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(c4.defect(&rt.witness).unwrap(), 3);
        assert_eq!(c4.letters_of_defect(0), vec![0]);
        assert_eq!(c4.letters_of_defect(1), vec![1]);
        assert!(c4.letters_of_defect(2).is_empty());
    }

    #[test]
    fn connectivity() {
        assert!(cerny(4).unwrap().is_strongly_connected());
        let fixed = Automaton::from_one_based(2, vec![("a".into(), vec![1, 2])]).unwrap();
        assert!(!fixed.is_strongly_connected());
    }

    #[test]
    fn synchronization() {
        assert!(cerny(4).unwrap().is_synchronizing());
        let perms = Automaton::from_one_based(
            3,
            vec![("a".into(), vec![2, 3, 1]), ("b".into(), vec![2, 1, 3])],
        )
        .unwrap();
        assert!(!perms.is_synchronizing());
        let one = Automaton::from_one_based(1, vec![("a".into(), vec![1])]).unwrap();
        assert!(one.is_synchronizing());
        assert_eq!(one.reset_threshold_exact(16).unwrap().length, 0);
    }

    #[test]
    fn exact_thresholds() {
        let c4 = cerny(4).unwrap();
        let rt = c4.reset_threshold_exact(DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(rt.length, 9);
        assert!(c4.is_reset_word(&rt.witness).unwrap());
        assert_eq!(rt.witness.render(&c4), "b a a a b a a a b");
        assert_eq!(
            cerny(5)
                .unwrap()
                .reset_threshold_exact(DEFAULT_SUBSET_CAP)
                .unwrap()
                .length,
            16
        );
        let constant = Automaton::from_one_based(2, vec![("c".into(), vec![1, 1])]).unwrap();
        assert_eq!(constant.reset_threshold_exact(16).unwrap().length, 1);
    }

    #[test]
    fn threshold_errors() {
        let perms = Automaton::from_one_based(2, vec![("a".into(), vec![2, 1])]).unwrap();
        assert_eq!(
            perms.reset_threshold_exact(16),
            Err(Error::NotSynchronizing)
        );
        let c8 = cerny(8).unwrap();
        assert!(matches!(
            c8.reset_threshold_exact(10),
            Err(Error::ResourceCap { limit: 10, .. })
        ));
    }

    #[test]
    fn construction_guards() {
        assert!(Automaton::from_one_based(2, vec![("a".into(), vec![1, 3])]).is_err());
        assert!(Automaton::from_one_based(
            2,
            vec![("a".into(), vec![1, 2]), ("a".into(), vec![2, 2])]
        )
        .is_err());
        assert!(Automaton::new(2, vec![]).is_err());
        assert!(Automaton::new(0, vec![("a".into(), vec![])]).is_err());
    }

    #[test]
    fn wide_state_sets() {
        let mut s = StateSet::empty(130);
        s.insert(0);
        s.insert(129);
        assert_eq!(s.len(), 2);
        assert!(s.contains(129));
        assert!(!s.contains(64));
        assert_eq!(s.to_mask(), None);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 129]);
    }
}
