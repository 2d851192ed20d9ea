//! Loop-free digraphs on the state set and the growth sequence `Γ_0, Γ_1, …`
//! of arcs `(excl(w), dupl(w))` for defect-1 words `w ∈ Σ_1 A^{≤i}`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::automaton::{Automaton, StateSet, Word};
use crate::cone::cone_sequence;
use crate::error::{Error, Result};
use crate::linalg::{char_vector, orthogonal_complement, span_basis, RationalVector};
use crate::perm::{is_transitive, PermSet};
use crate::verify::CheckStatus;

/// A loop-free digraph on `0..n`. Parallel arcs collapse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            arcs: BTreeSet::new(),
        }
    }

    pub fn from_arcs<I: IntoIterator<Item = (usize, usize)>>(n: usize, arcs: I) -> Result<Self> {
        let mut g = Digraph::new(n);
        for (p, q) in arcs {
            g.add_arc(p, q)?;
        }
        Ok(g)
    }

    /// Adds `(p, q)`; returns whether it was new. Loops are rejected.
    pub fn add_arc(&mut self, p: usize, q: usize) -> Result<bool> {
        if p >= self.n || q >= self.n {
            return Err(Error::StateOutOfRange {
                state: p.max(q) + 1,
                n: self.n,
            });
        }
        if p == q {
            return Err(Error::Precondition(format!("loop at vertex {}", p + 1)));
        }
        Ok(self.arcs.insert((p, q)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.arcs.contains(&(p, q))
    }

    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.arcs.is_subset(&other.arcs)
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(p, q) in &self.arcs {
            adj[p].push(q);
        }
        adj
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.arcs.iter().filter(|&&(p, _)| p == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.arcs.iter().filter(|&&(_, q)| q == v).count()
    }

    /// Whether a directed path leads from `from` to `to`.
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        let adj = self.successors();
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                return true;
            }
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// `χ_p − χ_q` for the arc `(p, q)`.
    pub fn incidence_vector(&self, (p, q): (usize, usize)) -> RationalVector {
        &RationalVector::unit(self.n, p) - &RationalVector::unit(self.n, q)
    }

    pub fn incidence_vectors(&self) -> Vec<RationalVector> {
        self.arcs().map(|e| self.incidence_vector(e)).collect()
    }

    /// Graphviz rendering with 1-based vertex labels, one arc per line.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {};", v + 1);
        }
        for &(p, q) in &self.arcs {
            let _ = writeln!(out, "  {} -> {};", p + 1, q + 1);
        }
        out.push_str("}\n");
        out
    }
}

/// Strongly and weakly connected components of a digraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentDecomposition {
    /// Strong components in topological order of the condensation (sources first),
    /// each sorted.
    pub strong: Vec<Vec<usize>>,
    /// Weak components sorted by least vertex.
    pub weak: Vec<Vec<usize>>,
    pub is_sink: Vec<bool>,
    pub is_source: Vec<bool>,
}

impl ComponentDecomposition {
    pub fn strong_count(&self) -> usize {
        self.strong.len()
    }

    pub fn weak_count(&self) -> usize {
        self.weak.len()
    }

    pub fn sink_count(&self) -> usize {
        self.is_sink.iter().filter(|&&b| b).count()
    }

    /// Strong partition sorted by least vertex, for comparing equivalence relations.
    pub fn strong_partition(&self) -> Vec<Vec<usize>> {
        let mut p = self.strong.clone();
        p.sort();
        p
    }

    pub fn weak_partition(&self) -> Vec<Vec<usize>> {
        self.weak.clone()
    }
}

/// Tarjan's algorithm for strong components, union-find for weak ones.
pub fn scc_wcc(g: &Digraph) -> ComponentDecomposition {
    let n = g.n;
    let adj = g.successors();

    // iterative Tarjan
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    // Tarjan emits sinks first
    comps.reverse();
    let mut comp_of = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut is_sink = vec![true; comps.len()];
    let mut is_source = vec![true; comps.len()];
    for (p, q) in g.arcs() {
        if comp_of[p] != comp_of[q] {
            is_sink[comp_of[p]] = false;
            is_source[comp_of[q]] = false;
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (p, q) in g.arcs() {
        let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
        if rp != rq {
            parent[rp.max(rq)] = rp.min(rq);
        }
    }
    let mut weak: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if slot[r] == usize::MAX {
            slot[r] = weak.len();
            weak.push(Vec::new());
        }
        weak[slot[r]].push(v);
    }

    ComponentDecomposition {
        strong: comps,
        weak,
        is_sink,
        is_source,
    }
}

/// Excluded and duplicate state of a defect-1 word.
pub fn excluded_and_duplicate(aut: &Automaton, w: &Word) -> Result<(usize, usize)> {
    let map = aut.transformation(w)?;
    let n = aut.n();
    let mut fiber = vec![0usize; n];
    for &q in &map {
        fiber[q] += 1;
    }
    let missing: Vec<usize> = (0..n).filter(|&q| fiber[q] == 0).collect();
    if missing.len() != 1 {
        return Err(Error::WrongDefect(missing.len()));
    }
    let dupl = (0..n)
        .find(|&q| fiber[q] == 2)
        .expect("defect 1 has a 2-element fiber");
    Ok((missing[0], dupl))
}

/// One digraph of the growth sequence.
#[derive(Clone, Debug)]
pub struct GrowthStep {
    pub index: usize,
    pub graph: Digraph,
    pub components: ComponentDecomposition,
}

/// `Γ_0, …, Γ_m` where `m` is the transient length; `Γ_i = Γ_m` for `i > m`.
#[derive(Clone, Debug)]
pub struct GrowthTrace {
    pub steps: Vec<GrowthStep>,
    /// `|Strong(Γ_∞)|`
    pub d: usize,
}

impl GrowthTrace {
    pub fn transient_length(&self) -> usize {
        self.steps.len() - 1
    }

    /// `Γ_i` for any `i`, using the stabilized tail past the transient.
    pub fn gamma(&self, i: usize) -> &GrowthStep {
        &self.steps[i.min(self.steps.len() - 1)]
    }

    pub fn limit(&self) -> &GrowthStep {
        self.steps.last().expect("trace is nonempty")
    }
}

/// The `A`-growth of `start`: `E_i = {(p.w, q.w) : (p,q) ∈ E_0, w ∈ A^{≤i}}`,
/// computed level by level from the arcs that were new at the previous level.
pub fn growth_of(start: &Digraph, a_set: &PermSet) -> Result<GrowthTrace> {
    if a_set.n() != start.n() {
        return Err(Error::Precondition(
            "permutation set and digraph differ in size".into(),
        ));
    }
    let mut graph = start.clone();
    let mut frontier: Vec<(usize, usize)> = graph.arcs().collect();
    let mut steps = vec![GrowthStep {
        index: 0,
        components: scc_wcc(&graph),
        graph: graph.clone(),
    }];
    loop {
        let mut fresh = Vec::new();
        for &(p, q) in &frontier {
            for perm in a_set.perms() {
                let arc = (perm.apply(p), perm.apply(q));
                if graph.add_arc(arc.0, arc.1)? {
                    fresh.push(arc);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        steps.push(GrowthStep {
            index: steps.len(),
            components: scc_wcc(&graph),
            graph: graph.clone(),
        });
        frontier = fresh;
    }
    let d = steps.last().expect("nonempty").components.strong_count();
    Ok(GrowthTrace { steps, d })
}

/// `Γ_0` of an automaton: one arc `(excl(b), dupl(b))` per letter `b ∈ Σ_1`.
pub fn rystsov_seed(aut: &Automaton) -> Result<Digraph> {
    let sigma1 = aut.letters_of_defect(1);
    if sigma1.is_empty() {
        return Err(Error::NoDefectOneLetters);
    }
    let mut g = Digraph::new(aut.n());
    for b in sigma1 {
        let (excl, dupl) = excluded_and_duplicate(aut, &Word::letter(b))?;
        g.add_arc(excl, dupl)?;
    }
    Ok(g)
}

/// The growth trace `Γ_0, Γ_1, …` of the automaton with respect to `A`.
pub fn gamma_growth(aut: &Automaton, a_set: &PermSet) -> Result<GrowthTrace> {
    growth_of(&rystsov_seed(aut)?, a_set)
}

/// Outcome of one executable lemma check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    #[serde(flatten)]
    pub status: CheckStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthLemmaReport {
    pub transient_length: usize,
    pub d: usize,
    pub transitive: bool,
    pub checks: Vec<LemmaCheck>,
}

impl GrowthLemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| !c.status.is_failure())
    }
}

fn status(ok: bool, why: impl FnOnce() -> String) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail(why())
    }
}

/// Runs the structural facts about the growth trace as boolean checks.
/// Checks that need a transitive group are reported as not applicable otherwise.
pub fn verify_growth_lemmas(aut: &Automaton, a_set: &PermSet) -> Result<GrowthLemmaReport> {
    let trace = gamma_growth(aut, a_set)?;
    Ok(check_trace(&trace, a_set))
}

pub(crate) fn check_trace(trace: &GrowthTrace, a_set: &PermSet) -> GrowthLemmaReport {
    let n = trace.steps[0].graph.n();
    let d = trace.d;
    let transitive = is_transitive(a_set);
    let limit = trace.limit();
    let na = |why: &str| CheckStatus::NotApplicable(why.to_string());
    let mut checks = Vec::new();

    // monotone growth
    let monotone = trace
        .steps
        .windows(2)
        .all(|w| w[0].graph.is_subgraph_of(&w[1].graph) && w[0].graph != w[1].graph);
    checks.push(LemmaCheck {
        name: "growth-monotone",
        status: status(monotone, || {
            "E_i not strictly increasing before stabilization".into()
        }),
    });

    // arc shift closure: (p.a, q.a) ∈ E_{i+1}
    let mut shift_fail = None;
    'outer: for i in 0..trace.steps.len() {
        let next = &trace.gamma(i + 1).graph;
        for (p, q) in trace.steps[i].graph.arcs() {
            for perm in a_set.perms() {
                if !next.contains(perm.apply(p), perm.apply(q)) {
                    shift_fail = Some(format!(
                        "arc ({},{}) of Γ_{i} shifted by {perm} missing from Γ_{}",
                        p + 1,
                        q + 1,
                        i + 1
                    ));
                    break 'outer;
                }
            }
        }
    }
    checks.push(LemmaCheck {
        name: "arc-shift-closure",
        status: match shift_fail {
            None => CheckStatus::Pass,
            Some(s) => CheckStatus::Fail(s),
        },
    });

    // incidence span dimension and its complement
    let mut span_fail = None;
    for step in &trace.steps {
        let l = span_basis(&step.graph.incidence_vectors(), n).expect("lengths agree");
        let weak = &step.components.weak;
        let wcc_chars: Vec<RationalVector> = weak
            .iter()
            .map(|c| char_vector(&StateSet::from_states(n, c.iter().copied()).expect("in range")))
            .collect();
        let expected = span_basis(&wcc_chars, n).expect("lengths agree");
        if l.dim() != n - weak.len() || orthogonal_complement(&l) != expected {
            span_fail = Some(format!(
                "Γ_{}: dim L = {}, n − #WCC = {}",
                step.index,
                l.dim(),
                n - weak.len()
            ));
            break;
        }
    }
    checks.push(LemmaCheck {
        name: "incidence-span-complement",
        status: match span_fail {
            None => CheckStatus::Pass,
            Some(s) => CheckStatus::Fail(s),
        },
    });

    if !transitive {
        for name in [
            "weak-equals-strong-at-limit",
            "weak-stabilizes-by-n-d-1",
            "degrees-at-n-1",
            "strong-stabilizes-by-n",
            "strong-stabilizes-by-2n-3d-1",
        ] {
            checks.push(LemmaCheck {
                name,
                status: na("group not transitive"),
            });
        }
        return GrowthLemmaReport {
            transient_length: trace.transient_length(),
            d,
            transitive,
            checks,
        };
    }

    let limit_strong = limit.components.strong_partition();
    checks.push(LemmaCheck {
        name: "weak-equals-strong-at-limit",
        status: status(limit.components.weak_partition() == limit_strong, || {
            "Γ_∞ weak and strong partitions differ".into()
        }),
    });

    let nonempty = trace.steps[0].graph.arc_count() > 0;
    let idx = n.saturating_sub(d + 1);
    checks.push(LemmaCheck {
        name: "weak-stabilizes-by-n-d-1",
        status: if nonempty && d < n {
            status(
                trace.gamma(idx).components.weak_partition() == limit.components.weak_partition(),
                || format!("weak partition of Γ_{idx} differs from Γ_∞"),
            )
        } else {
            na("E_0 empty")
        },
    });

    let g = &trace.gamma(n.saturating_sub(1)).graph;
    let bad_vertex = (0..n).find(|&v| g.out_degree(v) == 0 || g.in_degree(v) == 0);
    checks.push(LemmaCheck {
        name: "degrees-at-n-1",
        status: if nonempty {
            status(bad_vertex.is_none(), || {
                format!(
                    "vertex {} lacks an in- or out-arc in Γ_{}",
                    bad_vertex.unwrap_or(0) + 1,
                    n - 1
                )
            })
        } else {
            na("E_0 empty")
        },
    });

    // d > n/3  ⇔  3d > n
    checks.push(LemmaCheck {
        name: "strong-stabilizes-by-n",
        status: if 3 * d > n {
            status(
                trace.gamma(n).components.strong_partition() == limit_strong,
                || format!("strong partition of Γ_{n} differs from Γ_∞"),
            )
        } else {
            na("d ≤ n/3")
        },
    });
    checks.push(LemmaCheck {
        name: "strong-stabilizes-by-2n-3d-1",
        status: if 3 * d <= n {
            let idx = 2 * n - 3 * d - 1;
            status(
                trace.gamma(idx).components.strong_partition() == limit_strong,
                || format!("strong partition of Γ_{idx} differs from Γ_∞"),
            )
        } else {
            na("d > n/3")
        },
    });

    GrowthLemmaReport {
        transient_length: trace.transient_length(),
        d,
        transitive,
        checks,
    }
}

/// Upper bound on `transLen(K)` in terms of `dim(K_∞)`:
/// `n` when `dim = n/2`, otherwise `3·dim − n − 1`.
pub fn translen_k_bound_for(n: usize, dim: usize) -> usize {
    if 2 * dim == n {
        n
    } else {
        (3 * dim).saturating_sub(n + 1)
    }
}

/// The bound above for an automaton with `Σ = Σ_0 ∪ Σ_1` and transitive `A`.
pub fn translen_k_bound(aut: &Automaton, a_set: &PermSet) -> Result<usize> {
    require_defect_at_most_one(aut)?;
    if !is_transitive(a_set) {
        return Err(Error::NotTransitive);
    }
    let report = cone_sequence(aut, a_set)?;
    let dim = report.dim().ok_or_else(|| {
        Error::InternalContradiction("transitive group but K_∞ is not a subspace".into())
    })?;
    Ok(translen_k_bound_for(aut.n(), dim))
}

pub(crate) fn require_defect_at_most_one(aut: &Automaton) -> Result<()> {
    for a in aut.letters() {
        let defect = aut.letter_defect(a);
        if defect >= 2 {
            return Err(Error::UnsupportedAlphabet {
                letter: aut.letter_name(a).to_string(),
                defect,
            });
        }
    }
    Ok(())
}
