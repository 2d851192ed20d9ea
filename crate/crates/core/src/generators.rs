//! Instance sources: the Černý family, seeded random ST automata and
//! exhaustive enumeration of small transition tables.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::Automaton;
use crate::error::{Error, Result};
use crate::perm::{is_transitive, PermSet};

/// Retry cap for the rejection loops in [`random_st`].
pub const RANDOM_RETRIES: usize = 10_000;

/// Largest number of tables [`enumerate_automata`] will stream.
pub const ENUMERATION_CAP: u64 = 1 << 32;

/// The Černý automaton: `a` is the cycle `i ↦ i+1`, `b` sends 1 to 2 and fixes the rest.
pub fn cerny(n: usize) -> Result<Automaton> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "the Černý automaton needs n ≥ 2, got {n}"
        )));
    }
    let a = (0..n).map(|q| (q + 1) % n).collect();
    let mut b: Vec<usize> = (0..n).collect();
    b[0] = 1;
    Automaton::new(n, vec![("a".into(), a), ("b".into(), b)])
}

/// Synchronizing, and the defect-0 letters generate a transitive group.
pub fn is_st(aut: &Automaton) -> bool {
    aut.is_synchronizing() && is_transitive(&PermSet::all_permutation_letters(aut))
}

fn letter_names(n_perm: usize, n_def1: usize) -> Vec<String> {
    let perm = (0..n_perm).map(|i| {
        if n_perm == 1 {
            "a".into()
        } else {
            format!("a{}", i + 1)
        }
    });
    let def = (0..n_def1).map(|i| {
        if n_def1 == 1 {
            "b".into()
        } else {
            format!("b{}", i + 1)
        }
    });
    perm.chain(def).collect()
}

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A permutation with one image redirected onto another state's image.
fn random_defect_one(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p = random_permutation(n, rng);
    let from = rng.gen_range(0..n);
    let mut to = rng.gen_range(0..n - 1);
    if to >= from {
        to += 1;
    }
    p[from] = p[to];
    p
}

/// A random ST automaton with `n_perm` permutation letters `a…` and `n_def1`
/// defect-1 letters `b…`. Reproducible from `seed`.
pub fn random_st(n: usize, n_perm: usize, n_def1: usize, seed: u64) -> Result<Automaton> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "random ST automata need n ≥ 2, got {n}"
        )));
    }
    if n_perm == 0 {
        return Err(Error::Precondition(
            "at least one permutation letter is required".into(),
        ));
    }
    if n_def1 == 0 {
        return Err(Error::Precondition(
            "at least one defect-1 letter is required".into(),
        ));
    }
    let names = letter_names(n_perm, n_def1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intransitive = 0;
    let mut unsynchronized = 0;
    for _ in 0..RANDOM_RETRIES {
        let perms: Vec<Vec<usize>> = (0..n_perm)
            .map(|_| random_permutation(n, &mut rng))
            .collect();
        let probe = Automaton::new(
            n,
            names.iter().cloned().zip(perms.iter().cloned()).collect(),
        )?;
        if !is_transitive(&PermSet::all_permutation_letters(&probe)) {
            intransitive += 1;
            continue;
        }
        let tables = perms
            .into_iter()
            .chain((0..n_def1).map(|_| random_defect_one(n, &mut rng)));
        let aut = Automaton::new(n, names.iter().cloned().zip(tables).collect())?;
        if aut.is_synchronizing() {
            return Ok(aut);
        }
        unsynchronized += 1;
    }
    Err(Error::RetryExhausted {
        attempts: RANDOM_RETRIES,
        reason: format!(
            "n = {n}: {intransitive} samples had an intransitive group, {unsynchronized} were not synchronizing"
        ),
    })
}

/// A uniformly random `k`-letter automaton on `n` states.
pub fn random_automaton(n: usize, k: usize, seed: u64) -> Result<Automaton> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition(
            "need at least one state and one letter".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = (0..k)
        .map(|i| {
            (
                default_letter_name(i),
                (0..n).map(|_| rng.gen_range(0..n)).collect(),
            )
        })
        .collect();
    Automaton::new(n, letters)
}

/// `a, b, c, …` then `x27, x28, …`
pub fn default_letter_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("x{}", i + 1)
    }
}

/// Streams every `k`-letter table on `n` states in lexicographic order of the
/// flattened tables, optionally keeping one representative per relabeling class.
#[derive(Clone, Debug)]
pub struct Enumeration {
    n: usize,
    k: usize,
    names: Vec<String>,
    current: Option<Vec<usize>>,
    relabelings: Option<Vec<Vec<usize>>>,
}

impl Enumeration {
    /// `n^(n·k)`
    pub fn raw_count(&self) -> u64 {
        (self.n as u64).pow((self.n * self.k) as u32)
    }

    fn advance(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.as_mut()?;
        let out = cur.clone();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.n {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }

    fn build(&self, flat: &[usize]) -> Automaton {
        let letters = self
            .names
            .iter()
            .cloned()
            .zip(flat.chunks(self.n).map(<[usize]>::to_vec))
            .collect();
        Automaton::new(self.n, letters).expect("enumerated tables are valid")
    }
}

impl Iterator for Enumeration {
    type Item = Automaton;

    fn next(&mut self) -> Option<Automaton> {
        loop {
            let flat = self.advance()?;
            match &self.relabelings {
                None => return Some(self.build(&flat)),
                Some(perms) => {
                    if perms.iter().all(|p| relabel(&flat, self.n, p) >= flat) {
                        return Some(self.build(&flat));
                    }
                }
            }
        }
    }
}

/// The flattened table after renaming each state `q` to `p[q]`.
fn relabel(flat: &[usize], n: usize, p: &[usize]) -> Vec<usize> {
    let mut out = vec![0; flat.len()];
    for (a, row) in flat.chunks(n).enumerate() {
        for (q, &img) in row.iter().enumerate() {
            out[a * n + p[q]] = p[img];
        }
    }
    out
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Canonical form of an automaton's table under state relabeling: the
/// lexicographically least flattened table.
pub fn canonical_table(aut: &Automaton) -> Vec<usize> {
    let n = aut.n();
    let flat: Vec<usize> = aut.letters().flat_map(|a| aut.table(a).to_vec()).collect();
    all_permutations(n)
        .iter()
        .map(|p| relabel(&flat, n, p))
        .min()
        .expect("at least one relabeling")
}

/// Every `k`-letter automaton on `n` states. Deduplication by relabeling is
/// only offered for `n ≤ 4`.
pub fn enumerate_automata(n: usize, k: usize, dedup: bool) -> Result<Enumeration> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition(
            "need at least one state and one letter".into(),
        ));
    }
    let exponent = (n * k) as u32;
    let raw = (n as u64)
        .checked_pow(exponent)
        .filter(|&c| c <= ENUMERATION_CAP);
    if raw.is_none() {
        return Err(Error::ResourceCap {
            what: format!("enumeration of {k}-letter tables on {n} states"),
            limit: ENUMERATION_CAP as usize,
        });
    }
    if dedup && n > 4 {
        return Err(Error::Precondition(
            "deduplication by relabeling is only available for n ≤ 4".into(),
        ));
    }
    Ok(Enumeration {
        n,
        k,
        names: (0..k).map(default_letter_name).collect(),
        current: Some(vec![0; n * k]),
        relabelings: dedup.then(|| all_permutations(n)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Cerny,
    RandomSt,
    Enumerate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeneratorFilters {
    pub synchronizing_only: bool,
    pub st_only: bool,
    pub defect_at_most_one: bool,
}

impl GeneratorFilters {
    pub fn accepts(&self, aut: &Automaton) -> bool {
        (!self.defect_at_most_one || aut.max_letter_defect() <= 1)
            && (!self.synchronizing_only || aut.is_synchronizing())
            && (!self.st_only || is_st(aut))
    }
}

/// A recorded description of where a batch of instances came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    /// Permutation letters for `random-st`, total letters for `enumerate`.
    pub letters: usize,
    pub defect_one_letters: usize,
    pub seed: Option<u64>,
    pub filters: GeneratorFilters,
}

impl GeneratorSpec {
    pub fn cerny(n: usize) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Cerny,
            n,
            letters: 2,
            defect_one_letters: 1,
            seed: None,
            filters: GeneratorFilters::default(),
        }
    }

    pub fn random_st(n: usize, n_perm: usize, n_def1: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::RandomSt,
            n,
            letters: n_perm,
            defect_one_letters: n_def1,
            seed: Some(seed),
            filters: GeneratorFilters::default(),
        }
    }

    pub fn enumerate(n: usize, k: usize, filters: GeneratorFilters) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Enumerate,
            n,
            letters: k,
            defect_one_letters: 0,
            seed: None,
            filters,
        }
    }

    /// Materializes the instances described, after filtering. `dedup` only
    /// affects enumeration.
    pub fn instances(&self, dedup: bool) -> Result<Vec<Automaton>> {
        if self.n == 0 {
            return Err(Error::Precondition("n must be positive".into()));
        }
        if self.seed.is_some() != (self.kind == GeneratorKind::RandomSt) {
            return Err(Error::Precondition(
                "a seed is required exactly for random-st".into(),
            ));
        }
        let all = match self.kind {
            GeneratorKind::Cerny => vec![cerny(self.n)?],
            GeneratorKind::RandomSt => vec![random_st(
                self.n,
                self.letters,
                self.defect_one_letters,
                self.seed.unwrap_or_default(),
            )?],
            GeneratorKind::Enumerate => enumerate_automata(self.n, self.letters, dedup)?.collect(),
        };
        Ok(all
            .into_iter()
            .filter(|a| self.filters.accepts(a))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn cerny_shape() {
        let c4 = cerny(4).unwrap();
        assert_eq!(c4.table(0), &[1, 2, 3, 0]);
        assert_eq!(c4.table(1), &[1, 1, 2, 3]);
        assert_eq!(c4.defect_profile(), vec![0, 1]);
        assert!(c4.is_strongly_connected());
        assert!(is_st(&c4));
        assert!(cerny(1).is_err());
        for n in 2..=6 {
            let c = cerny(n).unwrap();
            assert_eq!(
                c.reset_threshold_exact(1 << 20).unwrap().length,
                (n - 1) * (n - 1)
            );
        }
    }

    #[test]
    fn random_st_is_st_and_reproducible() {
        for seed in 0..20 {
            let aut = random_st(6, 2, 1, seed).unwrap();
            assert!(is_st(&aut));
            assert_eq!(aut.defect_profile(), vec![0, 0, 1]);
            assert_eq!(aut, random_st(6, 2, 1, seed).unwrap());
        }
        assert!(random_st(2, 1, 1, 99).is_ok());
        assert!(matches!(random_st(5, 0, 1, 0), Err(Error::Precondition(_))));
        let a = random_st(4, 1, 2, 3).unwrap();
        let names: Vec<&str> = a.letters().map(|l| a.letter_name(l)).collect();
        assert_eq!(names, vec!["a", "b1", "b2"]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_automata(2, 1, false).unwrap().count(), 4);
        assert_eq!(enumerate_automata(3, 2, false).unwrap().count(), 729);
        let e = enumerate_automata(4, 2, false).unwrap();
        assert_eq!(e.raw_count(), 65536);
        assert!(matches!(
            enumerate_automata(9, 3, false),
            Err(Error::ResourceCap { .. })
        ));
        assert!(enumerate_automata(5, 1, true).is_err());
    }

    #[test]
    fn dedup_covers_every_class() {
        let reps: Vec<Automaton> = enumerate_automata(3, 2, true).unwrap().collect();
        assert!(reps.len() < 729);
        let canon: HashSet<Vec<usize>> = reps.iter().map(canonical_table).collect();
        assert_eq!(
            canon.len(),
            reps.len(),
            "representatives are pairwise non-isomorphic"
        );
        for aut in enumerate_automata(3, 2, false).unwrap().step_by(7) {
            assert!(canon.contains(&canonical_table(&aut)));
        }
    }

    #[test]
    fn spec_filters() {
        let spec = GeneratorSpec::enumerate(
            2,
            2,
            GeneratorFilters {
                st_only: true,
                ..Default::default()
            },
        );
        let found = spec.instances(false).unwrap();
        assert!(!found.is_empty());
        assert!(found.iter().all(is_st));
        let bad = GeneratorSpec {
            seed: Some(1),
            ..GeneratorSpec::cerny(3)
        };
        assert!(bad.instances(false).is_err());
    }
}
