//! Fiber vectors `k_w`, preimage matrices `[w]`, the generator sequence
//! `T_i = {k_w : w ∈ (Σ∖Σ_0) A^{≤i}}` with cones `K_i = cone(T_i)`, and the
//! subset-extension engine built on them.
//!
//! `T_{i+1} = T_0 ∪ {k_v·[a]⁻¹ : k_v ∈ T_i, a ∈ A}` because for a permutation
//! `a` the fibers of `va` are the fibers of `v` pushed forward along `a`.
//! Since each `[a]⁻¹` is linear, `K_{j+1} = K_j` already forces `K_{j+2} = K_{j+1}`,
//! so the first repeat is the transient length. The same holds for `T`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::automaton::{Automaton, StateSet, Word};
use crate::error::{Error, Result};
use crate::linalg::{
    in_cone, orthogonal_complement, span_basis, ConeGenerators, RationalMatrix, RationalVector,
    SubspaceBasis,
};
use crate::perm::{is_transitive, PermSet};

/// `k_w` together with the word it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KVector {
    pub vector: RationalVector,
    pub word: Word,
}

/// `k_w(i) = |i.w⁻¹| − 1` as integers.
pub fn k_vector_integers(aut: &Automaton, w: &Word) -> Result<Vec<i64>> {
    let map = aut.transformation(w)?;
    let mut k = vec![-1i64; aut.n()];
    for q in map {
        k[q] += 1;
    }
    Ok(k)
}

pub fn k_vector(aut: &Automaton, w: &Word) -> Result<KVector> {
    Ok(KVector {
        vector: RationalVector::from_integers(&k_vector_integers(aut, w)?),
        word: w.clone(),
    })
}

/// `[w]`: the matrix whose row `q` is `χ_{q.w⁻¹}`, so `χ_S [w] = χ_{S.w⁻¹}`.
pub fn preimage_matrix(aut: &Automaton, w: &Word) -> Result<RationalMatrix> {
    let map = aut.transformation(w)?;
    let n = aut.n();
    let mut m = RationalMatrix::zeros(n, n);
    for (p, &q) in map.iter().enumerate() {
        m.set(q, p, num_traits::One::one());
    }
    Ok(m)
}

/// A member of `T_∞` with the first word found for it and the level at which it appeared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeGenerator {
    pub coords: Vec<i64>,
    pub word: Word,
    pub level: usize,
}

impl ConeGenerator {
    pub fn vector(&self) -> RationalVector {
        RationalVector::from_integers(&self.coords)
    }

    /// `⟨k, χ_S⟩`
    pub fn pairing(&self, s: &StateSet) -> i64 {
        s.iter().map(|q| self.coords[q]).sum()
    }
}

/// Summary of the sequences `T_i` and `K_i`.
#[derive(Clone, Debug)]
pub struct ConeReport {
    pub n: usize,
    pub trans_len_t: usize,
    pub trans_len_k: usize,
    /// Every `T_∞` member, in discovery order (nondecreasing level).
    pub generators: Vec<ConeGenerator>,
    /// `|T_i|` for `i = 0..=transLen(T)`.
    pub level_sizes: Vec<usize>,
    /// `Span(T_∞)`
    pub span: SubspaceBasis,
    /// Whether `−x ∈ cone(T_∞)` for every `x ∈ T_∞`, i.e. `K_∞` is a subspace.
    pub is_subspace: bool,
    pub group_transitive: bool,
    /// `(K_∞)° = (K_∞)^⊥` when `K_∞` is a subspace.
    pub polar: Option<SubspaceBasis>,
}

impl ConeReport {
    /// `dim(K_∞)` when `K_∞` is a subspace.
    pub fn dim(&self) -> Option<usize> {
        self.is_subspace.then(|| self.span.dim())
    }

    /// `K_∞` as a subspace, when it is one.
    pub fn k_limit(&self) -> Option<&SubspaceBasis> {
        self.is_subspace.then_some(&self.span)
    }

    /// Generators of `T_i`.
    pub fn t_at(&self, i: usize) -> impl Iterator<Item = &ConeGenerator> {
        self.generators.iter().filter(move |g| g.level <= i)
    }

    pub fn cone_at(&self, i: usize) -> ConeGenerators {
        ConeGenerators::new(self.n, self.t_at(i).map(ConeGenerator::vector).collect())
            .expect("lengths agree")
    }

    pub fn limit_cone(&self) -> ConeGenerators {
        self.cone_at(self.trans_len_t)
    }

    /// `χ_S ∈ (K_∞)°`, i.e. `⟨k, χ_S⟩ ≤ 0` for every generator.
    pub fn char_in_polar(&self, s: &StateSet) -> bool {
        self.generators.iter().all(|g| g.pairing(s) <= 0)
    }
}

/// Computes `T_i`, `K_i`, their transient lengths and the limit cone's structure.
pub fn cone_sequence(aut: &Automaton, a_set: &PermSet) -> Result<ConeReport> {
    let deficient = aut.deficient_letters();
    if deficient.is_empty() {
        return Err(Error::NoDeficientLetters);
    }
    if a_set.n() != aut.n() {
        return Err(Error::Precondition(
            "permutation set is over a different state count".into(),
        ));
    }
    let n = aut.n();
    let mut generators: Vec<ConeGenerator> = Vec::new();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut frontier = Vec::new();
    for b in deficient {
        let w = Word::letter(b);
        let coords = k_vector_integers(aut, &w)?;
        if !seen.contains_key(&coords) {
            seen.insert(coords.clone(), generators.len());
            frontier.push(generators.len());
            generators.push(ConeGenerator {
                coords,
                word: w,
                level: 0,
            });
        }
    }
    let mut level_sizes = vec![generators.len()];
    loop {
        let level = level_sizes.len();
        let mut fresh = Vec::new();
        for &g in &frontier {
            for (&a, perm) in a_set.letters().iter().zip(a_set.perms()) {
                let mut shifted = vec![0i64; n];
                for (q, &x) in generators[g].coords.iter().enumerate() {
                    shifted[perm.apply(q)] = x;
                }
                if seen.contains_key(&shifted) {
                    continue;
                }
                seen.insert(shifted.clone(), generators.len());
                fresh.push(generators.len());
                let word = generators[g].word.append(a);
                generators.push(ConeGenerator {
                    coords: shifted,
                    word,
                    level,
                });
            }
        }
        if fresh.is_empty() {
            break;
        }
        level_sizes.push(generators.len());
        frontier = fresh;
    }
    let trans_len_t = level_sizes.len() - 1;

    let vector_of = |g: &ConeGenerator| g.vector();
    let mut trans_len_k = trans_len_t;
    for j in 0..trans_len_t {
        let cone_j = ConeGenerators::new(
            n,
            generators
                .iter()
                .filter(|g| g.level <= j)
                .map(vector_of)
                .collect(),
        )?;
        let mut stable = true;
        for g in generators.iter().filter(|g| g.level == j + 1) {
            if !in_cone(&g.vector(), &cone_j)? {
                stable = false;
                break;
            }
        }
        if stable {
            trans_len_k = j;
            break;
        }
    }

    let vectors: Vec<RationalVector> = generators.iter().map(vector_of).collect();
    let limit = ConeGenerators::new(n, vectors.clone())?;
    let mut is_subspace = true;
    for v in &vectors {
        if !in_cone(&-v, &limit)? {
            is_subspace = false;
            break;
        }
    }
    let span = span_basis(&vectors, n)?;
    let polar = is_subspace.then(|| orthogonal_complement(&span));
    Ok(ConeReport {
        n,
        trans_len_t,
        trans_len_k,
        generators,
        level_sizes,
        span,
        is_subspace,
        group_transitive: is_transitive(a_set),
        polar,
    })
}

/// `K_∞` as the span of `T_∞`; requires a transitive group.
pub fn k_limit_subspace(aut: &Automaton, a_set: &PermSet) -> Result<SubspaceBasis> {
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    let report = cone_sequence(aut, a_set)?;
    if !report.is_subspace {
        return Err(Error::InternalContradiction(
            "transitive group but T_∞ is not closed under negation in its cone".into(),
        ));
    }
    Ok(report.span)
}

/// `ℓ(S)` and a shortest witness word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ell {
    pub length: usize,
    pub witness: Word,
}

/// One extension `S → S.v⁻¹` with its ingredients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    /// `v = u·w`
    pub word: Word,
    /// The `ℓ(S)` witness `w`.
    pub ell: Ell,
    /// The generator word `u ∈ (Σ∖Σ_0)A^{≤transLen(K)}`.
    pub u: Word,
    pub extended: StateSet,
}

/// Precomputed cone data for repeated `ℓ`/extension queries on one automaton.
#[derive(Clone, Debug)]
pub struct ConeContext<'a> {
    aut: &'a Automaton,
    report: ConeReport,
    synchronizing: bool,
    strongly_connected: bool,
}

impl<'a> ConeContext<'a> {
    pub fn new(aut: &'a Automaton, a_set: &PermSet) -> Result<Self> {
        Ok(ConeContext {
            aut,
            report: cone_sequence(aut, a_set)?,
            synchronizing: aut.is_synchronizing(),
            strongly_connected: aut.is_strongly_connected(),
        })
    }

    pub fn report(&self) -> &ConeReport {
        &self.report
    }

    pub fn automaton(&self) -> &Automaton {
        self.aut
    }

    fn check_subset(&self, s: &StateSet) -> Result<()> {
        if !self.synchronizing {
            return Err(Error::NotSynchronizing);
        }
        if !self.strongly_connected {
            return Err(Error::NotStronglyConnected);
        }
        if s.universe_size() != self.aut.n() || s.is_empty() || s.is_full() {
            return Err(Error::Precondition(format!(
                "{s} must be a nonempty proper subset of the {} states",
                self.aut.n()
            )));
        }
        Ok(())
    }

    /// Shortest `w` with `χ_{S.w⁻¹} ∉ (K_∞)°`, by BFS over preimages under all letters.
    pub fn ell(&self, s: &StateSet) -> Result<Ell> {
        self.check_subset(s)?;
        if !self.report.char_in_polar(s) {
            return Ok(Ell {
                length: 0,
                witness: Word::empty(),
            });
        }
        let mut seen = HashSet::from([s.clone()]);
        let mut queue = VecDeque::from([(s.clone(), Word::empty())]);
        while let Some((p, w)) = queue.pop_front() {
            for a in self.aut.letters() {
                let pre = self.aut.preimage_letter(&p, a);
                if !seen.insert(pre.clone()) {
                    continue;
                }
                let word = w.prepend(a);
                if !self.report.char_in_polar(&pre) {
                    return Ok(Ell {
                        length: word.len(),
                        witness: word,
                    });
                }
                queue.push_back((pre, word));
            }
        }
        Err(Error::InternalContradiction(format!(
            "no word takes χ of {s} outside the polar cone of K_∞"
        )))
    }

    /// A word `v = u·w` with `|S.v⁻¹| > |S|` and `|v| ≤ transLen(K) + ℓ(S) + 1`.
    pub fn extend(&self, s: &StateSet) -> Result<Extension> {
        let ell = self.ell(s)?;
        let p = self.aut.preimage(s, &ell.witness)?;
        let k = self.report.trans_len_k;
        let u = self
            .report
            .t_at(k)
            .filter(|g| g.pairing(&p) > 0)
            .map(|g| &g.word)
            .min_by(|x, y| x.shortlex_cmp(y))
            .cloned()
            .ok_or_else(|| {
                Error::InternalContradiction(format!(
                    "no generator of T_{k} pairs positively with χ of {p}"
                ))
            })?;
        let word = u.concat(&ell.witness);
        let extended = self.aut.preimage(s, &word)?;
        if extended.len() <= s.len() {
            return Err(Error::InternalContradiction(format!(
                "word {} does not extend {s}",
                word.render(self.aut)
            )));
        }
        if word.len() > k + ell.length + 1 {
            return Err(Error::InternalContradiction(format!(
                "extension of {s} has length {} > transLen(K) + ℓ(S) + 1 = {}",
                word.len(),
                k + ell.length + 1
            )));
        }
        Ok(Extension {
            word,
            ell,
            u,
            extended,
        })
    }
}

/// `ℓ(S)` for one subset.
pub fn ell(aut: &Automaton, a_set: &PermSet, s: &StateSet) -> Result<Ell> {
    ConeContext::new(aut, a_set)?.ell(s)
}

/// An extending word for `S`; requires a synchronizing automaton and a transitive `A`.
pub fn extend_subset(aut: &Automaton, a_set: &PermSet, s: &StateSet) -> Result<Word> {
    if !aut.is_synchronizing() {
        return Err(Error::NotSynchronizing);
    }
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    Ok(ConeContext::new(aut, a_set)?.extend(s)?.word)
}

/// Serializable digest of a [`ConeReport`] for reports.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ConeSummary {
    pub trans_len_t: usize,
    pub trans_len_k: usize,
    pub is_subspace: bool,
    pub dim_k_limit: Option<usize>,
    pub dim_span: usize,
    pub t_sizes: Vec<usize>,
    pub k_limit_basis: Option<Vec<Vec<String>>>,
    pub polar_basis: Option<Vec<Vec<String>>>,
}

fn basis_strings(b: &SubspaceBasis) -> Vec<Vec<String>> {
    b.vectors()
        .iter()
        .map(|v| v.coords().iter().map(ToString::to_string).collect())
        .collect()
}

impl From<&ConeReport> for ConeSummary {
    fn from(r: &ConeReport) -> Self {
        ConeSummary {
            trans_len_t: r.trans_len_t,
            trans_len_k: r.trans_len_k,
            is_subspace: r.is_subspace,
            dim_k_limit: r.dim(),
            dim_span: r.span.dim(),
            t_sizes: r.level_sizes.clone(),
            k_limit_basis: r.k_limit().map(basis_strings),
            polar_basis: r.polar.as_ref().map(basis_strings),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cerny;
    use crate::linalg::{char_vector, in_polar_cone};

    fn c4() -> (Automaton, PermSet) {
        let aut = cerny(4).unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        (aut, a)
    }

    #[test]
    fn k_vectors_on_c4() {
        let (aut, _) = c4();
        assert_eq!(
            k_vector_integers(&aut, &Word::empty()).unwrap(),
            vec![0, 0, 0, 0]
        );
        assert_eq!(
            k_vector_integers(&aut, &Word::letter(1)).unwrap(),
            vec![-1, 1, 0, 0]
        );
        assert_eq!(
            k_vector_integers(&aut, &Word::letter(0)).unwrap(),
            vec![0, 0, 0, 0]
        );
        let kv = k_vector(&aut, &Word::letter(1)).unwrap();
        assert_eq!(kv.vector, RationalVector::from_integers(&[-1, 1, 0, 0]));
    }

    #[test]
    fn preimage_matrices_on_c4() {
        let (aut, _) = c4();
        assert_eq!(
            preimage_matrix(&aut, &Word::empty()).unwrap(),
            RationalMatrix::identity(4)
        );
        let b = preimage_matrix(&aut, &Word::letter(1)).unwrap();
        assert!(b.row(0).is_zero());
        assert_eq!(b.row(1), RationalVector::from_integers(&[1, 1, 0, 0]));
        let a = preimage_matrix(&aut, &Word::letter(0)).unwrap();
        // row q is χ of q.a⁻¹ = q − 1
        assert_eq!(a.row(0), RationalVector::unit(4, 3));
        assert_eq!(a.row(2), RationalVector::unit(4, 1));
    }

    #[test]
    fn sequence_on_c4() {
        let (aut, a) = c4();
        let r = cone_sequence(&aut, &a).unwrap();
        assert_eq!(r.trans_len_t, 3);
        assert_eq!(r.trans_len_k, 3);
        assert!(r.is_subspace);
        assert_eq!(r.dim(), Some(3));
        assert_eq!(r.level_sizes, vec![1, 2, 3, 4]);
        let polar = r.polar.as_ref().unwrap();
        assert_eq!(polar.dim(), 1);
        assert!(polar
            .contains(&RationalVector::from_integers(&[1, 1, 1, 1]))
            .unwrap());
        assert_eq!(k_limit_subspace(&aut, &a).unwrap().dim(), 3);
    }

    #[test]
    fn fixed_pair_gives_zero_transient() {
        // A = {id}: no shifting at all
        let aut = Automaton::from_one_based(
            3,
            vec![("e".into(), vec![1, 2, 3]), ("b".into(), vec![2, 2, 3])],
        )
        .unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        let r = cone_sequence(&aut, &a).unwrap();
        assert_eq!(r.trans_len_t, 0);
        assert_eq!(r.trans_len_k, 0);
        assert!(!r.is_subspace);
        assert!(matches!(
            k_limit_subspace(&aut, &a),
            Err(Error::NotTransitive)
        ));
    }

    #[test]
    fn two_state_limit() {
        let aut =
            Automaton::from_one_based(2, vec![("s".into(), vec![2, 1]), ("m".into(), vec![2, 2])])
                .unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        assert_eq!(k_limit_subspace(&aut, &a).unwrap().dim(), 1);
    }

    #[test]
    fn no_deficient_letters() {
        let aut = Automaton::from_one_based(2, vec![("s".into(), vec![2, 1])]).unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        assert_eq!(
            cone_sequence(&aut, &a).unwrap_err(),
            Error::NoDeficientLetters
        );
    }

    #[test]
    fn ell_on_c4_is_zero_everywhere() {
        let (aut, a) = c4();
        let ctx = ConeContext::new(&aut, &a).unwrap();
        let gens = ctx.report().limit_cone();
        for mask in 1u64..15 {
            let s = StateSet::from_mask(4, mask);
            assert_eq!(ctx.ell(&s).unwrap().length, 0, "S = {s}");
            assert!(!in_polar_cone(&char_vector(&s), &gens).unwrap());
        }
        assert!(ctx.ell(&StateSet::full(4)).is_err());
        assert!(ctx.ell(&StateSet::empty(4)).is_err());
    }

    #[test]
    fn extensions_on_c4() {
        let (aut, a) = c4();
        let s2 = StateSet::from_one_based(4, [2]).unwrap();
        let w = extend_subset(&aut, &a, &s2).unwrap();
        assert_eq!(w.render(&aut), "b");
        let s123 = StateSet::from_one_based(4, [1, 2, 3]).unwrap();
        let w = extend_subset(&aut, &a, &s123).unwrap();
        assert!(w.len() <= 4);
        assert_eq!(aut.preimage(&s123, &w).unwrap().len(), 4);
        assert!(extend_subset(&aut, &a, &StateSet::full(4)).is_err());
    }

    #[test]
    fn positive_ell_needs_search() {
        // A = {id}: K_∞ = cone{k_b} is a ray, many subsets start inside its polar cone
        let aut = Automaton::from_one_based(
            3,
            vec![("r".into(), vec![2, 3, 1]), ("b".into(), vec![2, 2, 3])],
        )
        .unwrap();
        let a = PermSet::from_letters(&aut, &[]).unwrap();
        let ctx = ConeContext::new(&aut, &a).unwrap();
        let s = StateSet::from_one_based(3, [1]).unwrap();
        let e = ctx.ell(&s).unwrap();
        assert!(e.length > 0);
        let moved = aut.preimage(&s, &e.witness).unwrap();
        assert!(!ctx.report().char_in_polar(&moved));
        let ext = ctx.extend(&s).unwrap();
        assert!(ext.extended.len() > 1);
    }
}
