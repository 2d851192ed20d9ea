//! Permutation letters and the group they generate.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::automaton::{Automaton, LetterId};
use crate::error::{Error, Result};

/// Default element cap for group closure and Cayley-diameter computations.
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// A bijection on `0..n`, acting on the right: `q.(gh) = (q.g).h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &q in &image {
            if q >= n || seen[q] {
                return Err(Error::Precondition(format!("{image:?} is not a bijection")));
            }
            seen[q] = true;
        }
        Ok(Permutation { image })
    }

    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::Precondition("0 in a 1-based image".into()));
        }
        Permutation::new(image.iter().map(|&q| q - 1).collect())
    }

    /// Builds a permutation of `1..=n` from 1-based cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (i, &q) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                if q == 0 || q > n || next == 0 || next > n {
                    return Err(Error::StateOutOfRange {
                        state: q.max(next),
                        n,
                    });
                }
                image[q - 1] = next - 1;
            }
        }
        Permutation::new(image)
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, q: usize) -> usize {
        self.image[q]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `self · other`: first `self`, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            image: self.image.iter().map(|&q| other.image[q]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (q, &p) in self.image.iter().enumerate() {
            inv[p] = q;
        }
        Permutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(q, &p)| q == p)
    }

    fn key(&self) -> PermKey {
        if self.image.len() <= 16 {
            PermKey::Packed(
                self.image
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &q)| acc | (q as u64) << (4 * i)),
            )
        } else {
            PermKey::Wide(self.image.iter().map(|&q| q as u32).collect())
        }
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with 1-based points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.image.len()];
        let mut wrote = false;
        for start in 0..self.image.len() {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut cycle = vec![start + 1];
            seen[start] = true;
            let mut q = self.image[start];
            while q != start {
                seen[q] = true;
                cycle.push(q + 1);
                q = self.image[q];
            }
            let parts: Vec<String> = cycle.iter().map(ToString::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PermKey {
    Packed(u64),
    Wide(Vec<u32>),
}

/// The bijection `q ↦ q.a` of a defect-0 letter.
pub fn permutation_of_letter(aut: &Automaton, a: LetterId) -> Result<Permutation> {
    if a >= aut.alphabet_size() {
        return Err(Error::InvalidLetter {
            id: a,
            size: aut.alphabet_size(),
        });
    }
    Permutation::new(aut.table(a).to_vec())
        .map_err(|_| Error::NotAPermutation(aut.letter_name(a).to_string()))
}

/// A set `A ⊆ Σ_0` of permutation letters, each materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermSet {
    n: usize,
    letters: Vec<LetterId>,
    perms: Vec<Permutation>,
}

impl PermSet {
    /// The given letters, which must all have defect 0.
    pub fn from_letters(aut: &Automaton, letters: &[LetterId]) -> Result<Self> {
        let mut ls: Vec<LetterId> = Vec::with_capacity(letters.len());
        for &a in letters {
            if !ls.contains(&a) {
                ls.push(a);
            }
        }
        ls.sort_unstable();
        let perms = ls
            .iter()
            .map(|&a| permutation_of_letter(aut, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(PermSet {
            n: aut.n(),
            letters: ls,
            perms,
        })
    }

    /// Letters given by name (comma or whitespace separated).
    pub fn from_names(aut: &Automaton, names: &str) -> Result<Self> {
        let ids = names
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| aut.letter_id(s))
            .collect::<Result<Vec<_>>>()?;
        PermSet::from_letters(aut, &ids)
    }

    /// All of `Σ_0`.
    pub fn all_permutation_letters(aut: &Automaton) -> Self {
        PermSet::from_letters(aut, &aut.letters_of_defect(0))
            .expect("defect-0 letters are bijections")
    }

    /// A generating set not attached to any automaton; letter ids are `0..k`.
    pub fn from_permutations(n: usize, perms: Vec<Permutation>) -> Result<Self> {
        if let Some(p) = perms.iter().find(|p| p.n() != n) {
            return Err(Error::Precondition(format!(
                "permutation on {} points in a set over {n}",
                p.n()
            )));
        }
        Ok(PermSet {
            n,
            letters: (0..perms.len()).collect(),
            perms,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[LetterId] {
        &self.letters
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn names(&self, aut: &Automaton) -> Vec<String> {
        self.letters
            .iter()
            .map(|&a| aut.letter_name(a).to_string())
            .collect()
    }
}

/// Orbits of the group generated by `perms`, each sorted, ordered by least element.
pub fn orbits(perms: &PermSet) -> Vec<Vec<usize>> {
    let n = perms.n;
    let inverses: Vec<Permutation> = perms.perms.iter().map(Permutation::inverse).collect();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[start] = id;
        let mut orbit = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for g in perms.perms.iter().chain(&inverses) {
                let p = g.apply(q);
                if label[p] == usize::MAX {
                    label[p] = id;
                    orbit.push(p);
                    queue.push_back(p);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// Whether `⟨A⟩` has a single orbit; one BFS from state 0 over generators and inverses.
pub fn is_transitive(perms: &PermSet) -> bool {
    let n = perms.n;
    if n <= 1 {
        return true;
    }
    let inverses: Vec<Permutation> = perms.perms.iter().map(Permutation::inverse).collect();
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut reached = 1;
    let mut queue = VecDeque::from([0]);
    while let Some(q) = queue.pop_front() {
        for g in perms.perms.iter().chain(&inverses) {
            let p = g.apply(q);
            if !seen[p] {
                seen[p] = true;
                reached += 1;
                queue.push_back(p);
            }
        }
    }
    reached == n
}

/// An explicitly enumerated permutation group together with its Cayley digraph.
#[derive(Clone, Debug)]
pub struct Group {
    n: usize,
    elements: Vec<Permutation>,
    index: HashMap<PermKey, usize>,
    // right multiplication by generator j: cayley[i][j] = index of elements[i] · gen_j
    cayley: Vec<Vec<usize>>,
    generators: Vec<usize>,
}

impl Group {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Elements in BFS discovery order; the identity comes first.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.n() == self.n && self.index.contains_key(&g.key())
    }

    fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(&g.key()).copied()
    }
}

/// `δ(A*)` by breadth-first closure under right multiplication by generators.
/// Fails with [`Error::CapExceeded`] when the group has more than `cap` elements.
pub fn group_closure(perms: &PermSet, cap: usize) -> Result<Group> {
    if cap == 0 {
        return Err(Error::Precondition("group cap must be at least 1".into()));
    }
    let id = Permutation::identity(perms.n);
    let mut elements = vec![id.clone()];
    let mut index = HashMap::from([(id.key(), 0usize)]);
    let mut cayley: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < elements.len() {
        let mut row = Vec::with_capacity(perms.perms.len());
        for gen in &perms.perms {
            let prod = elements[i].then(gen);
            let key = prod.key();
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded {
                            cap,
                            partial: elements.len(),
                        });
                    }
                    let j = elements.len();
                    index.insert(key, j);
                    elements.push(prod);
                    j
                }
            };
            row.push(j);
        }
        cayley.push(row);
        i += 1;
    }
    let generators = perms.perms.iter().map(|g| index[&g.key()]).collect();
    Ok(Group {
        n: perms.n,
        elements,
        index,
        cayley,
        generators,
    })
}

/// Both readings of the Cayley-digraph diameter `d_A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CayleyDiameter {
    /// Least `d ≥ 1` such that every group element is `δ(w)` for a nonempty
    /// word `w` of length at most `d`. This is the value used by the Rystsov bound.
    pub exact_power: usize,
    /// Least `d` such that `A^{≤d}` (empty word included) covers the group:
    /// the eccentricity of the identity in the Cayley digraph.
    pub prefix: usize,
}

/// Cayley diameter of `⟨A⟩` with generating set `A`, in both readings.
pub fn cayley_diameter(perms: &PermSet, cap: usize) -> Result<CayleyDiameter> {
    let group = group_closure(perms, cap)?;
    Ok(cayley_diameter_of(&group))
}

pub fn cayley_diameter_of(group: &Group) -> CayleyDiameter {
    let order = group.order();
    let bfs = |seeds: &[usize], start_level: usize| -> usize {
        let mut dist = vec![usize::MAX; order];
        let mut queue = VecDeque::new();
        for &s in seeds {
            if dist[s] == usize::MAX {
                dist[s] = start_level;
                queue.push_back(s);
            }
        }
        let mut far = start_level;
        while let Some(i) = queue.pop_front() {
            far = far.max(dist[i]);
            for &j in &group.cayley[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        far
    };
    let prefix = bfs(&[0], 0);
    let exact_power = if group.generators.is_empty() {
        0
    } else {
        bfs(&group.generators, 1)
    };
    CayleyDiameter {
        exact_power,
        prefix,
    }
}

/// Orbit count of an enumerated group, computed from its elements directly.
pub fn orbit_count_of(group: &Group) -> usize {
    let mut seen = vec![false; group.n];
    let mut count = 0;
    for q in 0..group.n {
        if seen[q] {
            continue;
        }
        count += 1;
        for g in &group.elements {
            seen[g.apply(q)] = true;
        }
    }
    count
}

/// Whether `g` lies in the enumerated group.
pub fn group_contains(group: &Group, g: &Permutation) -> bool {
    group.index_of(g).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cerny;
    use std::collections::HashSet;

    fn set(perms: Vec<Permutation>) -> PermSet {
        let n = perms[0].n();
        PermSet::from_permutations(n, perms).unwrap()
    }

    fn four_cycle() -> Permutation {
        Permutation::from_cycles(4, &[&[1, 2, 3, 4]]).unwrap()
    }

    /// δ(A^{1..=d}) by explicit enumeration of words, independent of the BFS.
    fn covered_by_words(perms: &PermSet, d: usize, with_empty: bool) -> HashSet<Permutation> {
        let mut level = vec![Permutation::identity(perms.n())];
        let mut all: HashSet<Permutation> = HashSet::new();
        if with_empty {
            all.insert(Permutation::identity(perms.n()));
        }
        for _ in 0..d {
            let next: Vec<Permutation> = level
                .iter()
                .flat_map(|g| perms.perms().iter().map(move |a| g.then(a)))
                .collect();
            all.extend(next.iter().cloned());
            level = next;
        }
        all
    }

    #[test]
    fn transitivity() {
        assert!(is_transitive(&set(vec![four_cycle()])));
        assert!(!is_transitive(&set(vec![Permutation::identity(2)])));
        assert!(is_transitive(
            &PermSet::from_permutations(1, vec![]).unwrap()
        ));
        assert!(!is_transitive(
            &PermSet::from_permutations(3, vec![]).unwrap()
        ));
    }

    #[test]
    fn closures() {
        assert_eq!(
            group_closure(&set(vec![four_cycle()]), 100)
                .unwrap()
                .order(),
            4
        );
        assert_eq!(
            group_closure(&set(vec![Permutation::identity(3)]), 100)
                .unwrap()
                .order(),
            1
        );
        let s3 = set(vec![
            Permutation::from_cycles(3, &[&[1, 2]]).unwrap(),
            Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap(),
        ]);
        let g = group_closure(&s3, 10).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(orbit_count_of(&g), 1);
        assert!(matches!(
            group_closure(&s3, 5),
            Err(Error::CapExceeded { cap: 5, .. })
        ));
    }

    #[test]
    fn closure_is_a_group() {
        let gens = set(vec![
            Permutation::from_cycles(5, &[&[1, 2, 3, 4, 5]]).unwrap(),
            Permutation::from_cycles(5, &[&[1, 2]]).unwrap(),
        ]);
        let g = group_closure(&gens, 1000).unwrap();
        assert_eq!(g.order(), 120);
        for x in g.elements().iter().step_by(7) {
            assert!(group_contains(&g, &x.inverse()));
            for y in g.elements().iter().step_by(11) {
                assert!(group_contains(&g, &x.then(y)));
            }
        }
        assert!(g.elements()[0].is_identity());
    }

    #[test]
    fn diameters_match_word_enumeration() {
        let cases = vec![
            (set(vec![four_cycle()]), 4, 3),
            (set(vec![Permutation::identity(4)]), 1, 0),
            (
                set(vec![
                    Permutation::from_cycles(2, &[&[1, 2]]).unwrap(),
                    Permutation::identity(2),
                ]),
                1,
                1,
            ),
        ];
        for (gens, exact_power, prefix) in cases {
            let d = cayley_diameter(&gens, 100).unwrap();
            assert_eq!(
                d,
                CayleyDiameter {
                    exact_power,
                    prefix
                }
            );
            let order = group_closure(&gens, 100).unwrap().order();
            assert_eq!(covered_by_words(&gens, exact_power, false).len(), order);
            if exact_power > 1 {
                assert!(covered_by_words(&gens, exact_power - 1, false).len() < order);
            }
            assert_eq!(covered_by_words(&gens, prefix, true).len(), order);
            if prefix > 0 {
                assert!(covered_by_words(&gens, prefix - 1, true).len() < order);
            }
        }
    }

    #[test]
    fn letters_to_permutations() {
        let c4 = cerny(4).unwrap();
        assert_eq!(permutation_of_letter(&c4, 0).unwrap(), four_cycle());
        assert_eq!(
            permutation_of_letter(&c4, 1),
            Err(Error::NotAPermutation("b".into()))
        );
        let one = Automaton::from_one_based(1, vec![("x".into(), vec![1])]).unwrap();
        assert!(permutation_of_letter(&one, 0).unwrap().is_identity());
        assert_eq!(four_cycle().to_string(), "(1 2 3 4)");
        assert!(PermSet::from_names(&c4, "a,b").is_err());
        assert_eq!(PermSet::all_permutation_letters(&c4).letters(), &[0]);
    }

    #[test]
    fn orbit_partition() {
        let c6 = Permutation::from_cycles(6, &[&[1, 2, 3, 4, 5, 6]]).unwrap();
        let sq = c6.then(&c6);
        assert_eq!(orbits(&set(vec![sq])), vec![vec![0, 2, 4], vec![1, 3, 5]]);
    }
}
