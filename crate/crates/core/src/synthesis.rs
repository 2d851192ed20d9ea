//! Reset word synthesis by repeated subset extension, and the closed-form
//! reset-threshold bounds it certifies.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::{Automaton, StateSet, Word};
use crate::cone::{ConeContext, ConeReport};
use crate::error::{Error, Result};
use crate::growth::require_defect_at_most_one;
use crate::perm::{cayley_diameter, is_transitive, CayleyDiameter, PermSet};

/// One link of the extension chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionStep {
    /// 1-based states of the subset before this step.
    pub subset: Vec<usize>,
    pub size_before: usize,
    pub size_after: usize,
    pub word: Vec<String>,
    pub length: usize,
    /// `ℓ(S)`; absent for the seeding letter.
    pub ell: Option<usize>,
    pub trans_len_k: usize,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub word: Word,
    pub length: usize,
    pub steps: Vec<ExtensionStep>,
    pub dim_k_limit: usize,
    pub trans_len_k: usize,
    pub bound_main: usize,
    /// Longest extension word after the seeding letter.
    pub max_step_length: usize,
    /// `|Q.word| = 1`, rechecked on the automaton.
    pub verified_reset: bool,
    pub within_bound: bool,
}

/// `1 + (n−2)(n − dim(K_∞) + transLen(K))`
pub fn main_bound_formula(n: usize, dim: usize, trans_len_k: usize) -> usize {
    match n {
        0 | 1 => 0,
        _ => 1 + (n - 2) * (n - dim + trans_len_k),
    }
}

/// `1 + (n−2)(n − 1 + d_A)`
pub fn rystsov_bound_formula(n: usize, d: usize) -> usize {
    match n {
        0 | 1 => 0,
        _ => 1 + (n - 2) * (n - 1 + d),
    }
}

/// `2n² − 7n + 7`
pub fn defect1_bound_formula(n: usize) -> usize {
    2 * n * n + 7 - 7 * n
}

/// `(n−1)²`
pub fn cerny_bound(n: usize) -> usize {
    n.saturating_sub(1).pow(2)
}

fn require_st(aut: &Automaton, a_set: &PermSet) -> Result<()> {
    if !aut.is_synchronizing() {
        return Err(Error::NotSynchronizing);
    }
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    Ok(())
}

fn limit_dim(report: &ConeReport) -> Result<usize> {
    report.dim().ok_or_else(|| {
        Error::InternalContradiction("transitive group but K_∞ is not a subspace".into())
    })
}

/// Builds a reset word backwards: seed with `{dupl(b)}` for the first deficient
/// letter `b`, then extend until the subset is all of `Q`. Extensions found in
/// order `w_1, …, w_t` assemble as `w_t ⋯ w_1`.
pub fn synthesize_reset_word(aut: &Automaton, a_set: &PermSet) -> Result<SynthesisResult> {
    let n = aut.n();
    if n < 2 {
        return Err(Error::Precondition(
            "synthesis needs at least two states".into(),
        ));
    }
    require_st(aut, a_set)?;
    let ctx = ConeContext::new(aut, a_set)?;
    let report = ctx.report();
    let dim = limit_dim(report)?;
    let k = report.trans_len_k;

    let b = aut.deficient_letters()[0];
    let seed_state = (0..n)
        .find(|&q| aut.table(b).iter().filter(|&&p| p == q).count() >= 2)
        .expect("a deficient letter has a fiber of size at least 2");
    let seed = StateSet::singleton(n, seed_state);
    let first = Word::letter(b);
    let mut subset = aut.preimage(&seed, &first)?;
    let mut steps = vec![ExtensionStep {
        subset: seed.to_one_based(),
        size_before: 1,
        size_after: subset.len(),
        word: first.names(aut),
        length: 1,
        ell: None,
        trans_len_k: k,
    }];
    let mut pieces = vec![first];
    while !subset.is_full() {
        let ext = ctx.extend(&subset)?;
        steps.push(ExtensionStep {
            subset: subset.to_one_based(),
            size_before: subset.len(),
            size_after: ext.extended.len(),
            word: ext.word.names(aut),
            length: ext.word.len(),
            ell: Some(ext.ell.length),
            trans_len_k: k,
        });
        pieces.push(ext.word);
        subset = ext.extended;
    }
    let word = pieces
        .iter()
        .rev()
        .fold(Word::empty(), |acc, piece| acc.concat(piece));
    let verified_reset = aut.is_reset_word(&word)?;
    if !verified_reset {
        return Err(Error::InternalContradiction(format!(
            "assembled word {} is not a reset word",
            word.render(aut)
        )));
    }
    let bound_main = main_bound_formula(n, dim, k);
    let length = word.len();
    Ok(SynthesisResult {
        max_step_length: steps.iter().skip(1).map(|s| s.length).max().unwrap_or(0),
        word,
        length,
        steps,
        dim_k_limit: dim,
        trans_len_k: k,
        bound_main,
        verified_reset,
        within_bound: length <= bound_main,
    })
}

pub fn bound_main(aut: &Automaton, a_set: &PermSet) -> Result<usize> {
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    let ctx = ConeContext::new(aut, a_set)?;
    let dim = limit_dim(ctx.report())?;
    Ok(main_bound_formula(aut.n(), dim, ctx.report().trans_len_k))
}

/// Rystsov's bound with the exact-power reading of `d_A`.
pub fn bound_rystsov(aut: &Automaton, a_set: &PermSet, cap: usize) -> Result<usize> {
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    let d = cayley_diameter(a_set, cap)?;
    Ok(rystsov_bound_formula(aut.n(), d.exact_power))
}

pub fn bound_defect1(aut: &Automaton) -> Result<usize> {
    require_defect_at_most_one(aut)?;
    Ok(defect1_bound_formula(aut.n()))
}

/// Options for [`bounds_report`].
#[derive(Clone, Copy, Debug)]
pub struct BoundsOptions {
    pub group_cap: usize,
    pub subset_cap: usize,
    /// Also compute the exact reset threshold.
    pub exact: bool,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            group_cap: crate::perm::DEFAULT_GROUP_CAP,
            subset_cap: crate::automaton::DEFAULT_SUBSET_CAP,
            exact: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BoundsReport {
    pub n: usize,
    pub dim_k_limit: usize,
    pub trans_len_k: usize,
    pub trans_len_t: usize,
    /// Absent when the group exceeded the cap.
    pub cayley_diameter: Option<CayleyDiameter>,
    pub group_order: Option<usize>,
    pub bound_rystsov: Option<usize>,
    pub bound_rystsov_prefix: Option<usize>,
    pub bound_main: usize,
    /// Present when every letter has defect at most 1.
    pub bound_defect1: Option<usize>,
    pub rt_exact: Option<usize>,
    pub cerny_bound: usize,
}

pub fn bounds_report(
    aut: &Automaton,
    a_set: &PermSet,
    opts: BoundsOptions,
) -> Result<BoundsReport> {
    require_st(aut, a_set)?;
    let ctx = ConeContext::new(aut, a_set)?;
    bounds_report_with(&ctx, a_set, opts)
}

pub(crate) fn bounds_report_with(
    ctx: &ConeContext<'_>,
    a_set: &PermSet,
    opts: BoundsOptions,
) -> Result<BoundsReport> {
    let aut = ctx.automaton();
    let n = aut.n();
    let report = ctx.report();
    let dim = limit_dim(report)?;
    let (cayley, order) = match crate::perm::group_closure(a_set, opts.group_cap) {
        Ok(group) => (
            Some(crate::perm::cayley_diameter_of(&group)),
            Some(group.order()),
        ),
        Err(Error::CapExceeded { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    let rt_exact = if opts.exact {
        Some(aut.reset_threshold_exact(opts.subset_cap)?.length)
    } else {
        None
    };
    Ok(BoundsReport {
        n,
        dim_k_limit: dim,
        trans_len_k: report.trans_len_k,
        trans_len_t: report.trans_len_t,
        cayley_diameter: cayley,
        group_order: order,
        bound_rystsov: cayley.map(|d| rystsov_bound_formula(n, d.exact_power)),
        bound_rystsov_prefix: cayley.map(|d| rystsov_bound_formula(n, d.prefix)),
        bound_main: main_bound_formula(n, dim, report.trans_len_k),
        bound_defect1: bound_defect1(aut).ok(),
        rt_exact,
        cerny_bound: cerny_bound(n),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensibilityMode {
    /// `n < 6`: checked through the exact reset threshold against `(n−1)²`.
    ExactOracle,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ExtensibilityReport {
    pub n: usize,
    pub mode: ExtensibilityMode,
    /// `2n − 3`
    pub bound: usize,
    pub subsets_checked: usize,
    pub max_ell: usize,
    pub max_extension_length: usize,
    pub rt_exact: Option<usize>,
    pub failures: Vec<String>,
}

impl ExtensibilityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that every nonempty proper subset is `(2n−3)`-extensible through
/// `transLen(K) + ℓ(S) + 1 ≤ 2n − 3`. Exhaustive up to `exhaustive_limit`
/// states, otherwise `samples` random subsets drawn from `seed`.
pub fn extensibility_bound_check(
    aut: &Automaton,
    a_set: &PermSet,
    exhaustive_limit: usize,
    samples: usize,
    seed: u64,
) -> Result<ExtensibilityReport> {
    require_defect_at_most_one(aut)?;
    require_st(aut, a_set)?;
    let n = aut.n();
    let bound = (2 * n).saturating_sub(3);
    if n < 6 {
        let rt = aut
            .reset_threshold_exact(crate::automaton::DEFAULT_SUBSET_CAP)?
            .length;
        let mut failures = Vec::new();
        if rt > cerny_bound(n) {
            failures.push(format!("rt = {rt} > (n−1)² = {}", cerny_bound(n)));
        }
        return Ok(ExtensibilityReport {
            n,
            mode: ExtensibilityMode::ExactOracle,
            bound,
            subsets_checked: 0,
            max_ell: 0,
            max_extension_length: 0,
            rt_exact: Some(rt),
            failures,
        });
    }
    let ctx = ConeContext::new(aut, a_set)?;
    let k = ctx.report().trans_len_k;
    let (mode, subsets): (ExtensibilityMode, Vec<StateSet>) = if n <= exhaustive_limit.min(63) {
        (
            ExtensibilityMode::Exhaustive,
            (1u64..(1u64 << n) - 1)
                .map(|m| StateSet::from_mask(n, m))
                .collect(),
        )
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states: Vec<usize> = (0..n).collect();
        let subsets = (0..samples)
            .map(|i| {
                let size = 1 + i % (n - 1);
                StateSet::from_states(n, states.choose_multiple(&mut rng, size).copied())
                    .expect("in range")
            })
            .collect();
        (ExtensibilityMode::Sampled, subsets)
    };
    let mut failures = Vec::new();
    let mut max_ell = 0;
    let mut max_len = 0;
    for s in &subsets {
        let ext = ctx.extend(s)?;
        max_ell = max_ell.max(ext.ell.length);
        max_len = max_len.max(ext.word.len());
        if k + ext.ell.length + 1 > bound {
            failures.push(format!(
                "{s}: transLen(K) + ℓ(S) + 1 = {} > {bound}",
                k + ext.ell.length + 1
            ));
        }
        if ext.word.len() > bound {
            failures.push(format!(
                "{s}: extension length {} > {bound}",
                ext.word.len()
            ));
        }
    }
    Ok(ExtensibilityReport {
        n,
        mode,
        bound,
        subsets_checked: subsets.len(),
        max_ell,
        max_extension_length: max_len,
        rt_exact: None,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cerny, random_st};

    #[test]
    fn formulas() {
        assert_eq!(main_bound_formula(4, 3, 3), 9);
        assert_eq!(main_bound_formula(6, 5, 2), 13);
        assert_eq!(main_bound_formula(2, 1, 7), 1);
        assert_eq!(rystsov_bound_formula(4, 4), 15);
        assert_eq!(rystsov_bound_formula(4, 3), 13);
        assert_eq!(rystsov_bound_formula(2, 100), 1);
        assert_eq!(defect1_bound_formula(4), 11);
        assert_eq!(defect1_bound_formula(6), 37);
        assert_eq!(cerny_bound(4), 9);
    }

    #[test]
    fn c4_bounds() {
        let c4 = cerny(4).unwrap();
        let a = PermSet::all_permutation_letters(&c4);
        assert_eq!(bound_main(&c4, &a).unwrap(), 9);
        assert_eq!(bound_rystsov(&c4, &a, 100).unwrap(), 15);
        assert_eq!(bound_defect1(&c4).unwrap(), 11);
        let r = bounds_report(
            &c4,
            &a,
            BoundsOptions {
                exact: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.rt_exact, Some(9));
        assert_eq!(r.bound_rystsov_prefix, Some(13));
        assert_eq!(r.group_order, Some(4));
    }

    #[test]
    fn c4_synthesis_is_tight() {
        let c4 = cerny(4).unwrap();
        let a = PermSet::all_permutation_letters(&c4);
        let s = synthesize_reset_word(&c4, &a).unwrap();
        assert!(s.verified_reset);
        assert_eq!(s.bound_main, 9);
        assert_eq!(s.length, 9);
        assert_eq!(s.steps.len(), 3);
        let sizes: Vec<usize> = s.steps.iter().map(|x| x.size_after).collect();
        assert_eq!(sizes, vec![2, 3, 4]);
    }

    #[test]
    fn two_state_synthesis() {
        let aut =
            Automaton::from_one_based(2, vec![("s".into(), vec![2, 1]), ("m".into(), vec![2, 2])])
                .unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        let s = synthesize_reset_word(&aut, &a).unwrap();
        assert_eq!(s.length, 1);
    }

    #[test]
    fn synthesis_guards() {
        let c4 = cerny(4).unwrap();
        let none = PermSet::from_letters(&c4, &[]).unwrap();
        assert_eq!(
            synthesize_reset_word(&c4, &none).unwrap_err(),
            Error::NotTransitive
        );
        let perms =
            Automaton::from_one_based(2, vec![("s".into(), vec![2, 1]), ("i".into(), vec![1, 2])])
                .unwrap();
        let a = PermSet::all_permutation_letters(&perms);
        assert_eq!(
            synthesize_reset_word(&perms, &a).unwrap_err(),
            Error::NotSynchronizing
        );
        let defect2 = Automaton::from_one_based(
            3,
            vec![("a".into(), vec![2, 3, 1]), ("c".into(), vec![1, 1, 1])],
        )
        .unwrap();
        assert!(matches!(
            bound_defect1(&defect2),
            Err(Error::UnsupportedAlphabet { .. })
        ));
    }

    #[test]
    fn extensibility_routes() {
        let c4 = cerny(4).unwrap();
        let a = PermSet::all_permutation_letters(&c4);
        let r = extensibility_bound_check(&c4, &a, 12, 0, 0).unwrap();
        assert_eq!(r.mode, ExtensibilityMode::ExactOracle);
        assert_eq!(r.rt_exact, Some(9));
        assert!(r.passed());

        let c6 = cerny(6).unwrap();
        let a = PermSet::all_permutation_letters(&c6);
        let r = extensibility_bound_check(&c6, &a, 12, 0, 0).unwrap();
        assert_eq!(r.mode, ExtensibilityMode::Exhaustive);
        assert_eq!(r.subsets_checked, 62);
        assert_eq!(r.bound, 9);
        assert!(r.passed(), "{r:?}");

        let aut = random_st(8, 2, 1, 3).unwrap();
        let a = PermSet::all_permutation_letters(&aut);
        let r = extensibility_bound_check(&aut, &a, 12, 0, 0).unwrap();
        assert_eq!(r.bound, 13);
        assert!(r.passed(), "{r:?}");
        let sampled = extensibility_bound_check(&aut, &a, 6, 40, 9).unwrap();
        assert_eq!(sampled.mode, ExtensibilityMode::Sampled);
        assert_eq!(sampled.subsets_checked, 40);
    }
}
