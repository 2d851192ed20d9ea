//! The seven end-to-end acceptance criteria. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use synchro::generators::cerny;
use synchro::growth::verify_growth_lemmas;
use synchro::perm::PermSet;
use synchro::synthesis::{bound_main, cerny_bound};
use synchro::verify::{
    bounds_suite, enumerate_suite, escape_length_suite, exhaustive_st_batch, lemma_suite,
    random_st_batch, reachability_oracle_suite, CheckOptions, Instance, SuiteReport,
};

const RANDOM_SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

fn from_suites(suites: &[&SuiteReport]) -> Outcome {
    let details: Vec<String> = suites
        .iter()
        .flat_map(|s| {
            s.failures
                .iter()
                .take(10)
                .map(move |f| format!("{}: {} [{}] {}", s.suite, f.instance, f.check, f.detail))
        })
        .collect();
    let summary = suites
        .iter()
        .map(|s| {
            format!(
                "{}: {} instances, {} checks, {} failures",
                s.suite,
                s.instances,
                s.checks_run,
                s.failures.len()
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        passed: suites.iter().all(|s| s.passed()),
        summary,
        details,
    }
}

fn cerny_thresholds() -> Outcome {
    let mut details = Vec::new();
    for n in 2..=8 {
        let rt = cerny(n)
            .unwrap()
            .reset_threshold_exact(1 << 22)
            .unwrap()
            .length;
        if rt != cerny_bound(n) {
            details.push(format!("C{n}: rt = {rt}, expected {}", cerny_bound(n)));
        }
    }
    Outcome {
        passed: details.is_empty(),
        summary: "rt(C_n) = (n−1)² for n = 2..8".into(),
        details,
    }
}

fn cerny_bound_tightness() -> Outcome {
    let mut details = Vec::new();
    for n in 3..=8 {
        let c = cerny(n).unwrap();
        let a = PermSet::from_names(&c, "a").unwrap();
        let b = bound_main(&c, &a).unwrap();
        if b != cerny_bound(n) {
            details.push(format!("C{n}: main bound {b}, expected {}", cerny_bound(n)));
        }
    }
    Outcome {
        passed: details.is_empty(),
        summary: "main bound of (C_n, {a}) = (n−1)² for n = 3..8".into(),
        details,
    }
}

fn exhaustive_cerny(opts: &CheckOptions) -> Outcome {
    let three = enumerate_suite(3, 2, opts).unwrap();
    let four = enumerate_suite(4, 2, opts).unwrap();
    let mut out = from_suites(&[&three, &four]);
    out.summary = format!(
        "n=3: {} synchronizing of {}; n=4: {} synchronizing of {}",
        three.checks_run, three.instances, four.checks_run, four.instances
    );
    out.passed &= three.instances == 729 && four.instances == 65_536;
    out
}

fn growth_span_identity(random: &[Instance]) -> SuiteReport {
    let mut report = reachability_oracle_suite(0, 2, 0);
    report.suite = "incidence-span-dimension".into();
    for inst in random {
        let a = PermSet::all_permutation_letters(&inst.automaton);
        let r = verify_growth_lemmas(&inst.automaton, &a).unwrap();
        report.instances += 1;
        for c in r
            .checks
            .iter()
            .filter(|c| c.name == "incidence-span-complement")
        {
            report.checks_run += 1;
            if c.status.is_failure() {
                report.failures.push(synchro::verify::SuiteFailure {
                    instance: inst.label.clone(),
                    check: c.name.into(),
                    detail: format!("{:?}", c.status),
                    automaton: None,
                });
            }
        }
    }
    report
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>, Duration);

fn main() -> ExitCode {
    let opts = CheckOptions::default();
    let start = Instant::now();
    let random = random_st_batch(200, RANDOM_SEED).expect("random ST batch");
    let mut exhaustive = exhaustive_st_batch().expect("exhaustive ST batch");
    let mut both = random.clone();
    both.append(&mut exhaustive);

    let criteria: Vec<Criterion<'_>> = vec![
        (
            "Černý family exact thresholds",
            Box::new(cerny_thresholds),
            Duration::from_secs(60),
        ),
        (
            "main bound tight on the Černý family",
            Box::new(cerny_bound_tightness),
            Duration::MAX,
        ),
        (
            "exhaustive Černý conjecture check, n = 3 and 4",
            Box::new(|| exhaustive_cerny(&opts)),
            Duration::from_secs(600),
        ),
        (
            "bound ordering on 200 random ST automata",
            Box::new(|| from_suites(&[&bounds_suite(&random, &opts)])),
            Duration::MAX,
        ),
        (
            "lemma properties on random and exhaustive ST automata",
            Box::new(|| from_suites(&[&lemma_suite(&both, &opts)])),
            Duration::MAX,
        ),
        (
            "cone membership vs reachability, span dimension",
            Box::new(|| {
                from_suites(&[
                    &reachability_oracle_suite(1000, 10, RANDOM_SEED),
                    &growth_span_identity(&random),
                ])
            }),
            Duration::MAX,
        ),
        (
            "shortest escaping word within dim L",
            Box::new(|| from_suites(&[&escape_length_suite(500, RANDOM_SEED).unwrap()])),
            Duration::MAX,
        ),
    ];

    println!(
        "instances: {} random ST (seed {RANDOM_SEED}), {} exhaustive ST",
        random.len(),
        both.len() - random.len()
    );
    let mut all = true;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = run();
        let elapsed = t.elapsed();
        if elapsed > *limit {
            outcome.passed = false;
            outcome
                .details
                .push(format!("took {elapsed:?}, limit {limit:?}"));
        }
        all &= outcome.passed;
        println!(
            "criterion {}: {} {name} ({}) [{:.2?}]",
            i + 1,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.summary,
            elapsed
        );
        for d in &outcome.details {
            println!("    {d}");
        }
    }
    println!("total {:.2?}", start.elapsed());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
