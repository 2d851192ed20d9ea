//! Executable checks of the structural facts behind the bounds, run per
//! instance and batched into suites.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::automaton::{Automaton, StateSet, Word};
use crate::cone::{k_vector, preimage_matrix, ConeContext};
use crate::error::{Error, Result};
use crate::format::emit_automaton;
use crate::generators::{cerny, enumerate_automata, is_st, random_automaton, random_st};
use crate::growth::{
    check_trace, gamma_growth, scc_wcc, translen_k_bound_for, Digraph, LemmaCheck,
};
use crate::linalg::{
    char_vector, in_cone, in_cone_lp, span_basis, ConeGenerators, RationalVector, SubspaceBasis,
};
use crate::perm::{is_transitive, PermSet};
use crate::synthesis::{
    bounds_report_with, cerny_bound, defect1_bound_formula, synthesize_reset_word, BoundsOptions,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail(String),
    NotApplicable(String),
}

impl CheckStatus {
    pub fn is_failure(&self) -> bool {
        matches!(self, CheckStatus::Fail(_))
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, CheckStatus::Pass)
    }

    fn from_failure(failure: Option<String>) -> Self {
        failure.map_or(CheckStatus::Pass, CheckStatus::Fail)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Subsets are enumerated exhaustively up to this many states, sampled above it.
    pub exhaustive_limit: usize,
    pub samples: usize,
    /// Longest word used by the inner-product identity check.
    pub max_word_len: usize,
    pub seed: u64,
    pub group_cap: usize,
    pub subset_cap: usize,
    /// Largest `n` for which the exact reset threshold is computed.
    pub exact_limit: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            exhaustive_limit: 10,
            samples: 256,
            max_word_len: 3,
            seed: 0,
            group_cap: crate::perm::DEFAULT_GROUP_CAP,
            subset_cap: crate::automaton::DEFAULT_SUBSET_CAP,
            exact_limit: 16,
        }
    }
}

/// All checks run on one automaton.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub label: String,
    pub n: usize,
    pub checks: Vec<LemmaCheck>,
}

impl InstanceReport {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| c.status.is_failure())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

fn push(checks: &mut Vec<LemmaCheck>, name: &'static str, status: CheckStatus) {
    checks.push(LemmaCheck { name, status });
}

fn na(why: &str) -> CheckStatus {
    CheckStatus::NotApplicable(why.to_string())
}

/// Every word of length at most `max_len`, shortest first.
pub fn words_up_to(alphabet: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut level = vec![Word::empty()];
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|w| (0..alphabet).map(move |a| w.append(a)))
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// All subsets of `Q` when `n ≤ limit`, otherwise `samples` random ones
/// together with `∅` and `Q`.
fn subsets(n: usize, limit: usize, samples: usize, seed: u64) -> Vec<StateSet> {
    if n <= limit.min(20) {
        return (0u64..1 << n).map(|m| StateSet::from_mask(n, m)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![StateSet::empty(n), StateSet::full(n)];
    out.extend((0..samples).map(|_| {
        StateSet::from_states(n, (0..n).filter(|_| rng.gen_bool(0.5))).expect("in range")
    }));
    out
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

/// Cone, extension and growth checks on one ST automaton.
pub fn check_instance(
    aut: &Automaton,
    a_set: &PermSet,
    label: &str,
    opts: &CheckOptions,
) -> Result<InstanceReport> {
    require_st(aut, a_set)?;
    let n = aut.n();
    let ctx = ConeContext::new(aut, a_set)?;
    let report = ctx.report();
    let mut checks = Vec::new();
    let all_sets = subsets(n, opts.exhaustive_limit, opts.samples, opts.seed);

    // |S.w⁻¹| − |S| = ⟨χ_S, k_w⟩
    let mut failure = None;
    'identity: for w in words_up_to(aut.alphabet_size(), opts.max_word_len) {
        let k = k_vector(aut, &w)?.vector;
        for s in &all_sets {
            let lhs = aut.preimage(s, &w)?.len() as i64 - s.len() as i64;
            let rhs = char_vector(s).inner_product(&k)?;
            if rhs != crate::linalg::integer(lhs) {
                failure = Some(format!("S = {s}, w = {}: {lhs} ≠ {rhs}", w.render(aut)));
                break 'identity;
            }
        }
    }
    push(
        &mut checks,
        "inner-product-identity",
        CheckStatus::from_failure(failure),
    );

    let bad_sum = report
        .generators
        .iter()
        .find(|g| g.coords.iter().sum::<i64>() != 0);
    push(
        &mut checks,
        "coordinate-sum-zero",
        CheckStatus::from_failure(
            bad_sum.map(|g| format!("k of {} has nonzero sum", g.word.render(aut))),
        ),
    );

    // −x ∈ cone(T_∞) for x ∈ T_∞
    let cone = report.limit_cone();
    let mut failure = None;
    for g in &report.generators {
        if !in_cone(&-&g.vector(), &cone)? {
            failure = Some(format!("−k of {} is outside cone(T_∞)", g.word.render(aut)));
            break;
        }
    }
    push(
        &mut checks,
        "negation-closure",
        CheckStatus::from_failure(failure),
    );
    let dim = report.dim().ok_or_else(|| {
        Error::InternalContradiction("transitive group but K_∞ is not a subspace".into())
    })?;

    // χ_S ∈ (K_∞)° ⇒ |S.a⁻¹| = |S| for every letter
    let mut failure = None;
    'polar: for s in all_sets.iter().filter(|s| report.char_in_polar(s)) {
        for a in aut.letters() {
            let pre = aut.preimage_letter(s, a);
            if pre.len() != s.len() {
                failure = Some(format!(
                    "χ of {s} is in the polar cone but |S.{}⁻¹| = {}",
                    aut.letter_name(a),
                    pre.len()
                ));
                break 'polar;
            }
        }
    }
    push(
        &mut checks,
        "polar-stability",
        CheckStatus::from_failure(failure),
    );

    // ℓ(S) ≤ n − 1 − dim and |extension| ≤ transLen(K) + ℓ(S) + 1
    let k = report.trans_len_k;
    let mut ell_failure = None;
    let mut ext_failure = None;
    for s in all_sets.iter().filter(|s| !s.is_empty() && !s.is_full()) {
        let ext = match ctx.extend(s) {
            Ok(ext) => ext,
            Err(e) => {
                ext_failure.get_or_insert(format!("{s}: {e}"));
                continue;
            }
        };
        if ext.ell.length + 1 + dim > n {
            ell_failure.get_or_insert(format!(
                "ℓ({s}) = {} > n − 1 − dim = {}",
                ext.ell.length,
                n as i64 - 1 - dim as i64
            ));
        }
        let grown = aut.preimage(s, &ext.word)?;
        if grown.len() <= s.len() || ext.word.len() > k + ext.ell.length + 1 {
            ext_failure.get_or_insert(format!(
                "{s}: word {} of length {} gives |S.v⁻¹| = {}",
                ext.word.render(aut),
                ext.word.len(),
                grown.len()
            ));
        }
    }
    push(
        &mut checks,
        "ell-bound",
        CheckStatus::from_failure(ell_failure),
    );
    push(
        &mut checks,
        "extension-length",
        CheckStatus::from_failure(ext_failure),
    );

    push(
        &mut checks,
        "translen-t-at-least-k",
        if report.trans_len_t >= report.trans_len_k {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(format!(
                "transLen(T) = {} < transLen(K) = {}",
                report.trans_len_t, report.trans_len_k
            ))
        },
    );

    let only_defect_one = aut.max_letter_defect() <= 1;
    let trace = match gamma_growth(aut, a_set) {
        Ok(t) => Some(t),
        Err(Error::NoDefectOneLetters) => None,
        Err(e) => return Err(e),
    };

    if only_defect_one {
        let bound = translen_k_bound_for(n, dim);
        push(
            &mut checks,
            "translen-k-stated-bound",
            if k <= bound {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail(format!(
                    "transLen(K) = {k} > {bound} (n = {n}, dim = {dim})"
                ))
            },
        );
    } else {
        push(
            &mut checks,
            "translen-k-stated-bound",
            na("a letter has defect ≥ 2"),
        );
    }

    match (&trace, only_defect_one) {
        (Some(trace), true) => {
            // T_i = {χ_dupl − χ_excl : (excl, dupl) ∈ E_i}
            let last = report.trans_len_t.max(trace.transient_length()) + 1;
            let mut failure = None;
            for i in 0..=last {
                let t: BTreeSet<Vec<i64>> = report.t_at(i).map(|g| g.coords.clone()).collect();
                let e: BTreeSet<Vec<i64>> = trace
                    .gamma(i)
                    .graph
                    .arcs()
                    .map(|(excl, dupl)| {
                        let mut v = vec![0i64; n];
                        v[excl] = -1;
                        v[dupl] = 1;
                        v
                    })
                    .collect();
                if t != e {
                    failure = Some(format!(
                        "T_{i} has {} vectors, E_{i} has {} arcs",
                        t.len(),
                        e.len()
                    ));
                    break;
                }
            }
            push(
                &mut checks,
                "cone-digraph-bridge",
                CheckStatus::from_failure(failure),
            );

            let d = trace.d;
            push(
                &mut checks,
                "dimension-equals-n-minus-d",
                if dim + d == n {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail(format!("dim = {dim}, n − d = {}", n - d))
                },
            );

            let limit = trace.limit().components.strong_partition();
            let m = (0..=trace.transient_length())
                .find(|&i| trace.gamma(i).components.strong_partition() == limit)
                .expect("the limit matches itself");
            push(
                &mut checks,
                "translen-k-at-most-strong-stabilization",
                if k <= m {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail(format!("transLen(K) = {k} > {m}"))
                },
            );
        }
        _ => {
            let why = if trace.is_none() {
                "no letter of defect 1"
            } else {
                "a letter has defect ≥ 2"
            };
            for name in [
                "cone-digraph-bridge",
                "dimension-equals-n-minus-d",
                "translen-k-at-most-strong-stabilization",
            ] {
                push(&mut checks, name, na(why));
            }
        }
    }

    match &trace {
        Some(trace) => checks.extend(check_trace(trace, a_set).checks),
        None => push(&mut checks, "growth-lemmas", na("no letter of defect 1")),
    }

    Ok(InstanceReport {
        label: label.to_string(),
        n,
        checks,
    })
}

/// Synthesis and bound-ordering checks on one ST automaton.
pub fn check_bounds(
    aut: &Automaton,
    a_set: &PermSet,
    label: &str,
    opts: &CheckOptions,
) -> Result<InstanceReport> {
    require_st(aut, a_set)?;
    let n = aut.n();
    let ctx = ConeContext::new(aut, a_set)?;
    let bounds = bounds_report_with(
        &ctx,
        a_set,
        BoundsOptions {
            group_cap: opts.group_cap,
            subset_cap: opts.subset_cap,
            exact: n <= opts.exact_limit,
        },
    )?;
    let synth = synthesize_reset_word(aut, a_set)?;
    let len = synth.length;
    let mut checks = Vec::new();
    let compare = |ok: bool, msg: String| {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(msg)
        }
    };

    push(
        &mut checks,
        "reset-word-verified",
        compare(
            aut.apply_word(&StateSet::full(n), &synth.word)?.len() == 1,
            format!("{} does not reset", synth.word.render(aut)),
        ),
    );
    let sizes: Vec<usize> = synth.steps.iter().map(|s| s.size_after).collect();
    let increasing = synth.steps.iter().all(|s| s.size_after > s.size_before)
        && sizes.last() == Some(&n)
        && synth.steps.len() < n;
    let chain_total = 1 + n.saturating_sub(2) * synth.max_step_length;
    push(
        &mut checks,
        "extension-chain-arithmetic",
        compare(
            increasing && (n < 2 || len <= chain_total.max(1)),
            format!("sizes {sizes:?}, length {len}, 1 + (n−2)·m = {chain_total}"),
        ),
    );
    match bounds.rt_exact {
        Some(rt) => {
            push(
                &mut checks,
                "rt-at-most-synthesized",
                compare(rt <= len, format!("rt = {rt} > synthesized {len}")),
            );
            push(
                &mut checks,
                "rt-at-most-cerny-bound",
                compare(
                    rt <= cerny_bound(n),
                    format!("rt = {rt} > (n−1)² = {}", cerny_bound(n)),
                ),
            );
        }
        None => {
            push(
                &mut checks,
                "rt-at-most-synthesized",
                na("n above exact limit"),
            );
            push(
                &mut checks,
                "rt-at-most-cerny-bound",
                na("n above exact limit"),
            );
        }
    }
    push(
        &mut checks,
        "synthesized-at-most-main-bound",
        compare(
            len <= bounds.bound_main,
            format!("synthesized {len} > bound {}", bounds.bound_main),
        ),
    );
    push(
        &mut checks,
        "main-bound-at-most-rystsov",
        match bounds.bound_rystsov {
            Some(r) => compare(
                bounds.bound_main <= r,
                format!("main bound {} > Rystsov bound {r}", bounds.bound_main),
            ),
            None => na("group exceeds the enumeration cap"),
        },
    );
    push(
        &mut checks,
        "synthesized-at-most-defect-one-bound",
        if n >= 6 && aut.max_letter_defect() <= 1 {
            let b = defect1_bound_formula(n);
            compare(len <= b, format!("synthesized {len} > 2n² − 7n + 7 = {b}"))
        } else {
            na("needs n ≥ 6 and Σ = Σ_0 ∪ Σ_1")
        },
    );
    Ok(InstanceReport {
        label: label.to_string(),
        n,
        checks,
    })
}

/// One failed check in a suite, with the automaton for reproduction.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SuiteFailure {
    pub instance: String,
    pub check: String,
    pub detail: String,
    pub automaton: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub checks_run: usize,
    pub not_applicable: usize,
    pub failures: Vec<SuiteFailure>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            instances: 0,
            checks_run: 0,
            not_applicable: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, report: InstanceReport, aut: &Automaton) {
        self.instances += 1;
        for c in report.checks {
            match c.status {
                CheckStatus::Pass => self.checks_run += 1,
                CheckStatus::NotApplicable(_) => self.not_applicable += 1,
                CheckStatus::Fail(detail) => {
                    self.checks_run += 1;
                    self.failures.push(SuiteFailure {
                        instance: report.label.clone(),
                        check: c.name.to_string(),
                        detail,
                        automaton: Some(emit_automaton(aut)),
                    });
                }
            }
        }
    }

    fn error(&mut self, label: &str, err: &Error, aut: Option<&Automaton>) {
        self.instances += 1;
        self.checks_run += 1;
        self.failures.push(SuiteFailure {
            instance: label.to_string(),
            check: "error".into(),
            detail: err.to_string(),
            automaton: aut.map(emit_automaton),
        });
    }

    fn record(&mut self, label: &str, aut: &Automaton, outcome: Result<InstanceReport>) {
        match outcome {
            Ok(r) => self.absorb(r, aut),
            Err(e) => self.error(label, &e, Some(aut)),
        }
    }
}

/// A labelled automaton in a batch.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub automaton: Automaton,
}

/// `count` reproducible ST automata with `n ∈ {5..10}` and only letters of
/// defect 0 or 1; instance `i` uses seed `seed + i`.
pub fn random_st_batch(count: usize, seed: u64) -> Result<Vec<Instance>> {
    random_st_batch_sizes(count, seed, &[5, 6, 7, 8, 9, 10])
}

/// As [`random_st_batch`], cycling through the given state counts. One or two
/// permutation letters and one or two defect-1 letters, alternating.
pub fn random_st_batch_sizes(count: usize, seed: u64, sizes: &[usize]) -> Result<Vec<Instance>> {
    if sizes.is_empty() {
        return Err(Error::Precondition("no state counts given".into()));
    }
    let m = sizes.len();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let n = sizes[i % m];
            let n_perm = 1 + (i / m) % 2;
            let n_def1 = 1 + (i / (2 * m)) % 2;
            let s = seed.wrapping_add(i as u64);
            Ok(Instance {
                label: format!("random-st n={n} perm={n_perm} def1={n_def1} seed={s}"),
                automaton: random_st(n, n_perm, n_def1, s)?,
            })
        })
        .collect()
}

/// Every ST automaton, up to relabeling of states, among 2-letter tables on
/// 2 to 4 states and 3-letter tables on 3 states.
pub fn exhaustive_st_batch() -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (n, k) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
        let found: Vec<Automaton> = enumerate_automata(n, k, true)?
            .par_bridge()
            .filter(|a| !a.deficient_letters().is_empty() && is_st(a))
            .collect();
        let mut found = found;
        found.sort_by_key(crate::generators::canonical_table);
        out.extend(found.into_iter().enumerate().map(|(i, a)| Instance {
            label: format!("enumerated n={n} k={k} #{i}"),
            automaton: a,
        }));
    }
    Ok(out)
}

fn run_batch<F>(suite: &str, instances: &[Instance], f: F) -> SuiteReport
where
    F: Fn(&Automaton, &PermSet, &str) -> Result<InstanceReport> + Sync,
{
    let outcomes: Vec<Result<InstanceReport>> = instances
        .par_iter()
        .map(|inst| {
            let a = PermSet::all_permutation_letters(&inst.automaton);
            f(&inst.automaton, &a, &inst.label)
        })
        .collect();
    let mut report = SuiteReport::new(suite);
    for (inst, outcome) in instances.iter().zip(outcomes) {
        report.record(&inst.label, &inst.automaton, outcome);
    }
    report
}

/// Cone, extension and growth checks over a batch, with `A = Σ_0`.
pub fn lemma_suite(instances: &[Instance], opts: &CheckOptions) -> SuiteReport {
    run_batch("lemmas", instances, |aut, a, label| {
        check_instance(aut, a, label, opts)
    })
}

/// Synthesis and bound ordering over a batch, with `A = Σ_0`.
pub fn bounds_suite(instances: &[Instance], opts: &CheckOptions) -> SuiteReport {
    run_batch("bounds", instances, |aut, a, label| {
        check_bounds(aut, a, label, opts)
    })
}

/// Ground truth on the Černý family for `n = 2..=max_n`: exact threshold
/// `(n−1)²`, and for `n ≥ 3` the main bound, `dim(K_∞)` and `transLen(K)`.
pub fn cerny_suite(max_n: usize, opts: &CheckOptions) -> Result<SuiteReport> {
    if max_n < 2 {
        return Err(Error::Precondition("the Černý suite needs n ≥ 2".into()));
    }
    let outcomes: Vec<(usize, Automaton, Result<InstanceReport>)> = (2..=max_n)
        .into_par_iter()
        .map(|n| {
            let aut = cerny(n).expect("n ≥ 2");
            let outcome = cerny_checks(&aut, opts);
            (n, aut, outcome)
        })
        .collect();
    let mut report = SuiteReport::new("cerny");
    for (n, aut, outcome) in outcomes {
        report.record(&format!("C{n}"), &aut, outcome);
    }
    Ok(report)
}

fn cerny_checks(aut: &Automaton, opts: &CheckOptions) -> Result<InstanceReport> {
    let n = aut.n();
    let expected = cerny_bound(n);
    let rt = aut.reset_threshold_exact(opts.subset_cap)?.length;
    let mut checks = Vec::new();
    push(
        &mut checks,
        "rt-equals-cerny-bound",
        if rt == expected {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(format!("rt = {rt}, (n−1)² = {expected}"))
        },
    );
    if n >= 3 {
        let a = PermSet::from_names(aut, "a")?;
        let ctx = ConeContext::new(aut, &a)?;
        let r = ctx.report();
        let bounds = bounds_report_with(&ctx, &a, BoundsOptions::default())?;
        let synth = synthesize_reset_word(aut, &a)?;
        let shape = r.dim() == Some(n - 1) && r.trans_len_k == n - 1;
        push(
            &mut checks,
            "main-bound-equals-cerny-bound",
            if bounds.bound_main == expected && shape {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail(format!(
                    "bound {} with dim {:?}, transLen(K) {}",
                    bounds.bound_main,
                    r.dim(),
                    r.trans_len_k
                ))
            },
        );
        push(
            &mut checks,
            "synthesized-within-bound",
            if synth.verified_reset && rt <= synth.length && synth.length <= expected {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail(format!("synthesized length {}", synth.length))
            },
        );
    }
    Ok(InstanceReport {
        label: format!("C{n}"),
        n,
        checks,
    })
}

/// Every synchronizing `k`-letter automaton on `n` states has `rt ≤ (n−1)²`.
pub fn enumerate_suite(n: usize, k: usize, opts: &CheckOptions) -> Result<SuiteReport> {
    let bound = cerny_bound(n);
    let results: Vec<(usize, usize, Option<SuiteFailure>)> = enumerate_automata(n, k, false)?
        .par_bridge()
        .map(|aut| {
            if !aut.is_synchronizing() {
                return (1, 0, None);
            }
            match aut.reset_threshold_exact(opts.subset_cap) {
                Ok(rt) if rt.length <= bound => (1, 1, None),
                Ok(rt) => (
                    1,
                    1,
                    Some(SuiteFailure {
                        instance: format!("table {}", emit_automaton(&aut).replace('\n', "; ")),
                        check: "rt-at-most-cerny-bound".into(),
                        detail: format!("rt = {} > {bound}", rt.length),
                        automaton: Some(emit_automaton(&aut)),
                    }),
                ),
                Err(e) => (
                    1,
                    1,
                    Some(SuiteFailure {
                        instance: "table".into(),
                        check: "error".into(),
                        detail: e.to_string(),
                        automaton: Some(emit_automaton(&aut)),
                    }),
                ),
            }
        })
        .collect();
    let mut report = SuiteReport::new("enumerate");
    report.instances = results.iter().map(|r| r.0).sum();
    report.checks_run = results.iter().map(|r| r.1).sum();
    report.not_applicable = report.instances - report.checks_run;
    report.failures = results.into_iter().filter_map(|r| r.2).collect();
    report.notes.push(format!(
        "{} of {} tables are synchronizing; bound (n−1)² = {bound}",
        report.checks_run, report.instances
    ));
    Ok(report)
}

/// A random loop-free digraph on `n` vertices with arc probability `p`.
pub fn random_digraph(n: usize, p: f64, rng: &mut impl Rng) -> Digraph {
    let mut g = Digraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                g.add_arc(u, v).expect("valid arc");
            }
        }
    }
    g
}

/// Cone membership of `χ_s − χ_t` among the incidence vectors of a digraph
/// against plain reachability, plus `dim span = n − #WCC`, on `count` random
/// digraphs with `2 ≤ n ≤ max_n`.
pub fn reachability_oracle_suite(count: usize, max_n: usize, seed: u64) -> SuiteReport {
    let max_n = max_n.max(2);
    let failures: Vec<Option<SuiteFailure>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let n = rng.gen_range(2..=max_n);
            let p = rng.gen_range(0.05..0.45);
            let g = random_digraph(n, p, &mut rng);
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            let fail = |detail: String| {
                Some(SuiteFailure {
                    instance: format!("digraph #{i} (n={n})"),
                    check: "cone-vs-reachability".into(),
                    detail,
                    automaton: Some(g.to_dot("g")),
                })
            };
            let gens = ConeGenerators::new(n, g.incidence_vectors()).expect("lengths agree");
            let v = &RationalVector::unit(n, s) - &RationalVector::unit(n, t);
            let by_lp = in_cone_lp(&v, &gens).expect("lengths agree");
            let by_shortcut = in_cone(&v, &gens).expect("lengths agree");
            let reach = g.reachable(s, t);
            if by_lp != reach || by_shortcut != reach {
                return fail(format!(
                    "{}→{}: reachable {reach}, simplex {by_lp}, shortcut {by_shortcut}",
                    s + 1,
                    t + 1
                ));
            }
            let dim = span_basis(gens.vectors(), n).expect("lengths agree").dim();
            let wcc = scc_wcc(&g).weak_count();
            if dim != n - wcc {
                return Some(SuiteFailure {
                    check: "incidence-span-dimension".into(),
                    detail: format!("dim span = {dim}, n − #WCC = {}", n - wcc),
                    ..fail(String::new()).expect("constructed")
                });
            }
            None
        })
        .collect();
    let mut report = SuiteReport::new("reachability-oracle");
    report.instances = count;
    report.checks_run = 2 * count;
    report.failures = failures.into_iter().flatten().collect();
    report
}

/// `x[w]` with `(x[w])(j) = x(j.w)`, computed straight from the table.
fn act(aut: &Automaton, x: &[i64], a: usize) -> Vec<i64> {
    (0..aut.n()).map(|j| x[aut.step(j, a)]).collect()
}

/// A shortest word `w` with `x[w] ∉ L`, searching every distinct vector
/// reachable from `x`.
pub fn shortest_escaping_word(
    aut: &Automaton,
    l: &SubspaceBasis,
    x: &[i64],
) -> Result<Option<Word>> {
    let mut seen = HashSet::from([x.to_vec()]);
    let mut queue = VecDeque::from([(x.to_vec(), Word::empty())]);
    while let Some((y, w)) = queue.pop_front() {
        if !l.contains(&RationalVector::from_integers(&y))? {
            return Ok(Some(w));
        }
        for a in aut.letters() {
            let next = act(aut, &y, a);
            if seen.insert(next.clone()) {
                // y = x[w], so y[a] = x[a·w]
                queue.push_back((next, w.prepend(a)));
            }
        }
    }
    Ok(None)
}

/// On `count` random (automaton, subspace `L`, nonzero `x ∈ L`) triples that
/// admit an escaping word, the shortest one has length at most `dim L`.
pub fn escape_length_suite(count: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("escape-length");
    let mut attempts = 0usize;
    let attempt_cap = 100 * count.max(1);
    while report.instances < count {
        attempts += 1;
        if attempts > attempt_cap {
            return Err(Error::RetryExhausted {
                attempts: attempt_cap,
                reason: format!("only {} escaping pairs found", report.instances),
            });
        }
        let n = rng.gen_range(3..=7);
        let k = rng.gen_range(1..=3);
        let aut = random_automaton(n, k, rng.gen())?;
        let r = rng.gen_range(1..n);
        let spanning: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect())
            .collect();
        let l = span_basis(
            &spanning
                .iter()
                .map(|v| RationalVector::from_integers(v))
                .collect::<Vec<_>>(),
            n,
        )?;
        let coeffs: Vec<i64> = (0..r).map(|_| rng.gen_range(-3..=3)).collect();
        let x: Vec<i64> = (0..n)
            .map(|j| spanning.iter().zip(&coeffs).map(|(v, c)| v[j] * c).sum())
            .collect();
        if x.iter().all(|&c| c == 0) {
            continue;
        }
        let Some(w) = shortest_escaping_word(&aut, &l, &x)? else {
            continue;
        };
        report.instances += 1;
        report.checks_run += 1;
        let xr = RationalVector::from_integers(&x);
        let via_matrix = xr.times(&preimage_matrix(&aut, &w)?)?;
        let direct = w
            .letters()
            .iter()
            .rev()
            .fold(x.clone(), |y, &a| act(&aut, &y, a));
        if via_matrix != RationalVector::from_integers(&direct) || l.contains(&via_matrix)? {
            report.failures.push(SuiteFailure {
                instance: format!("pair #{}", report.instances),
                check: "escape-witness".into(),
                detail: format!("x = {xr}, w = {}", w.render(&aut)),
                automaton: Some(emit_automaton(&aut)),
            });
        } else if w.len() > l.dim() {
            report.failures.push(SuiteFailure {
                instance: format!("pair #{}", report.instances),
                check: "escape-length-at-most-dim".into(),
                detail: format!("|w| = {} > dim L = {}, x = {xr}", w.len(), l.dim()),
                automaton: Some(emit_automaton(&aut)),
            });
        }
    }
    report.notes.push(format!("{attempts} samples drawn"));
    Ok(report)
}
