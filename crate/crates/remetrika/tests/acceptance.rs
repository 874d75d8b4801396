//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The random corpus is generated deterministically (splitmix64, fixed seed)
//! and shared across criteria: gated instances with up to 5 points and up to
//! 3 maps, with every brute-force oracle precondition asserted rather than
//! assumed.

use std::sync::OnceLock;
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use remetrika::chainmetric::{brute_chain_oracle, dmu_exact, dmu_truncated, m_star, semi_metric_suite};
use remetrika::converse::{bessaga_metric, psi_compose, unbounded_metric, wong_metric};
use remetrika::cover::{limit_set_suite, extended_cylinder_suite};
use remetrika::instance::{fixture, FiniteInstance};
use remetrika::monoid::{build_automaton, MonoidAutomaton, DEFAULT_STATE_CAP};
use remetrika::ratio::{rat, rat_int, Rat};
use remetrika::remetrize::{remetrize, ScaleSequence};
use remetrika::render::SplitMix64;
use remetrika::WeightSequence;

const CORPUS_SEED: u64 = 0xACCE_17ED;
const CORPUS_SIZE: usize = 200;

fn aut(inst: &FiniteInstance) -> MonoidAutomaton {
    build_automaton(inst, DEFAULT_STATE_CAP).unwrap()
}

fn fixture_aut(name: &str) -> MonoidAutomaton {
    aut(&fixture(name).unwrap())
}

/// 200 deterministic random instances that pass the attractor gate. The
/// brute-oracle word bound of 6 must dominate every instance's deepest
/// finite cylinder depth for the equivalence theorem to apply; that is
/// asserted here, not assumed.
fn corpus() -> &'static Vec<FiniteInstance> {
    static CORPUS: OnceLock<Vec<FiniteInstance>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut rng = SplitMix64::new(CORPUS_SEED);
        let mut out = Vec::new();
        while out.len() < CORPUS_SIZE {
            let points = 1 + rng.next_below(5);
            let k = 1 + rng.next_below(3);
            let maps: Vec<Vec<usize>> = (0..k)
                .map(|_| (0..points).map(|_| rng.next_below(points)).collect())
                .collect();
            let inst = FiniteInstance::new(points, maps).unwrap();
            let a = aut(&inst);
            if a.has_attractor() && m_star(&a) <= 6 {
                out.push(inst);
            }
        }
        out
    })
}

fn geo(p: i64, q: i64) -> WeightSequence {
    WeightSequence::geometric(rat(p, q)).unwrap()
}

fn standard_mus() -> [WeightSequence; 3] {
    [
        WeightSequence::constant(rat_int(1)).unwrap(),
        geo(1, 2),
        geo(9, 10),
    ]
}

#[test]
fn acceptance_02_oracle_equivalence() {
    let start = Instant::now();
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().cloned());
    let mu = geo(1, 2);
    for inst in &instances {
        let a = aut(inst);
        assert!(
            m_star(&a) <= 6,
            "corpus violates the word-length precondition"
        );
        let chain_cap = a.subset_profiles().len();
        let d = dmu_exact(&a, &mu).unwrap();
        for x in 0..inst.points {
            for y in 0..inst.points {
                let brute = brute_chain_oracle(&a, &mu, 6, chain_cap, x, y).unwrap();
                assert_eq!(&brute, d.get(x, y), "instance {:?} at ({x},{y})", inst.maps);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    println!(
        "acceptance 2: PASS — dmu_exact equals the brute chain oracle entrywise on {} instances ({elapsed:?})",
        instances.len()
    );
}

#[test]
fn acceptance_03_semi_metric_suite() {
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().cloned());
    for inst in &instances {
        let a = aut(inst);
        for mu in &standard_mus() {
            let report = semi_metric_suite(&a, mu).unwrap();
            assert!(
                report.all_pass(),
                "instance {:?}: {:?}",
                inst.maps,
                report.failures().collect::<Vec<_>>()
            );
        }
    }
    println!(
        "acceptance 3: PASS — semi-metric axioms, nonexpansiveness and bounds hold exactly on {} instances x 3 weight sequences",
        instances.len()
    );
}

#[test]
fn acceptance_04_truncation_identity() {
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().cloned());
    let mu = geo(1, 2);
    for inst in &instances {
        let a = aut(inst);
        let exact = dmu_exact(&a, &mu).unwrap();
        for n in 0..=4usize {
            let truncated = dmu_truncated(&a, &mu, n).unwrap();
            let frozen = dmu_exact(&a, &mu.freeze_after(n)).unwrap();
            assert_eq!(truncated, frozen, "instance {:?}, N = {n}", inst.maps);
        }
        let star = m_star(&a);
        for n in star..=star + 2 {
            let truncated = dmu_truncated(&a, &mu, n).unwrap();
            assert_eq!(
                truncated, exact,
                "instance {:?}, N = {n} >= M* = {star}",
                inst.maps
            );
        }
    }
    println!(
        "acceptance 4: PASS — d^mu_N = d^(mu_N) exactly for N in 0..=4 and d_N stabilizes at M* on {} instances",
        instances.len()
    );
}

#[test]
fn acceptance_05_p_limit_attained() {
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().cloned());
    let mu = geo(1, 2);
    for inst in &instances {
        let a = aut(inst);
        let star = m_star(&a);
        for n in 0..=3usize {
            let target = dmu_exact(&a, &mu.freeze_after(n)).unwrap();
            let p_star = star.saturating_sub(n);
            let mut prev = None;
            for p in 0..=p_star + 2 {
                let d = dmu_exact(&a, &mu.freeze_then_halve(n, p)).unwrap();
                if let Some(prev) = &prev {
                    assert!(
                        MetricOrd(prev).le(&d),
                        "instance {:?}: N = {n}, p = {p} not nondecreasing",
                        inst.maps
                    );
                }
                if p >= p_star {
                    assert_eq!(d, target, "instance {:?}: N = {n}, p = {p}", inst.maps);
                }
                prev = Some(d);
            }
        }
    }
    println!(
        "acceptance 5: PASS — d^(mu_N_p) is nondecreasing in p and attains d^(mu_N) at p = max(0, M* - N) on {} instances",
        instances.len()
    );
}

struct MetricOrd<'a>(&'a remetrika::MetricMatrix);

impl MetricOrd<'_> {
    fn le(&self, other: &remetrika::MetricMatrix) -> bool {
        self.0.le_entrywise(other)
    }
}

#[test]
fn acceptance_06_separating_sequence_contract() {
    for name in ["T1", "T2"] {
        let a = fixture_aut(name);
        let attractor = a.attractor_info().unwrap().attractor.clone();
        let m = rat_int(1);
        for (i, &x) in attractor.iter().enumerate() {
            for &y in attractor.iter().skip(i + 1) {
                let mu = remetrika::remetrize::separating_sequence(&a, x, y, &m).unwrap();
                assert!(mu.limit().is_zero(), "{name}: limit");
                let d = dmu_exact(&a, &mu).unwrap();
                assert!(d.max_entry() <= m, "{name}: bound");
                assert!(d.get(x, y) >= &rat(1, 2), "{name}: separation of ({x},{y})");
            }
        }
    }
    println!(
        "acceptance 6: PASS — separating sequences vanish, stay below M = 1 and keep their pair at least 1/2 apart on T1 and T2"
    );
}

#[test]
fn acceptance_07_remetrize_end_to_end() {
    let start = Instant::now();
    let one = rat_int(1);
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T4", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().take(50).cloned());
    for inst in &instances {
        let a = aut(inst);
        let cert = remetrize(&a, &one, &ScaleSequence).unwrap();
        assert!(
            cert.checks.all_pass(),
            "instance {:?}: {:?}",
            inst.maps,
            cert.checks.failures().collect::<Vec<_>>()
        );
        // Independent spot assertions on top of the certificate's own report.
        assert!(
            cert.d.is_metric() || inst.points == 1,
            "instance {:?}",
            inst.maps
        );
        assert!(cert.d.max_entry() <= rat_int(4), "instance {:?}", inst.maps);
        for x in 0..inst.points {
            for y in 0..inst.points {
                let dv = cert.d.get(x, y);
                assert!(dv >= cert.delta.get(x, y) && *dv <= rat_int(2) * cert.delta.get(x, y));
                for table in &inst.maps {
                    assert!(
                        cert.d.get(table[x], table[y]) <= &cert.phi.eval(dv),
                        "instance {:?}: contraction at ({x},{y})",
                        inst.maps
                    );
                }
            }
        }
        assert!(cert.phi.is_comparison());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 120 s");
    println!(
        "acceptance 7: PASS — full pipeline produces exact phi-contraction certificates on {} instances ({elapsed:?})",
        instances.len()
    );
}

#[test]
fn acceptance_08_browder_conclusion() {
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T4", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().take(50).cloned());
    let one = rat_int(1);
    for inst in &instances {
        let a = aut(inst);
        let cert = remetrize(&a, &one, &ScaleSequence).unwrap();
        // Under the synthesized metric every map is a phi-contraction on a
        // complete bounded space; its iteration must land on a unique fixed
        // point within the point count — checked directly.
        for table in &inst.maps {
            let fixed: Vec<usize> = (0..inst.points).filter(|&x| table[x] == x).collect();
            assert_eq!(fixed.len(), 1, "instance {:?}", inst.maps);
            for start_point in 0..inst.points {
                let mut x = start_point;
                for _ in 0..inst.points {
                    x = table[x];
                }
                assert_eq!(x, fixed[0], "instance {:?} from {start_point}", inst.maps);
                assert!(cert.d.get(x, fixed[0]).is_zero());
            }
        }
    }
    println!(
        "acceptance 8: PASS — every map's iteration reaches its unique fixed point within N steps on {} instances",
        instances.len()
    );
}

#[test]
fn acceptance_09_bessaga_and_wong() {
    // Single map: exact values and a tight bound at the pair (1, 2).
    let t5 = fixture("T5").unwrap();
    let alpha = rat(1, 2);
    let d = bessaga_metric(&t5, &alpha).unwrap();
    assert_eq!(d.get(0, 1), &rat(1, 2));
    assert_eq!(d.get(0, 2), &rat_int(1));
    assert_eq!(d.get(1, 2), &rat_int(1));
    let f = &t5.maps[0];
    assert_eq!(d.get(f[1], f[2]), &(&alpha * d.get(1, 2)), "tight at (1,2)");

    // Common fixed point: the alpha bound holds for both maps and factors.
    let t4 = fixture("T4").unwrap();
    for alpha in [rat(1, 2), rat(9, 10)] {
        let d = wong_metric(&t4, &alpha).unwrap();
        for table in &t4.maps {
            for x in 0..t4.points {
                for y in 0..t4.points {
                    assert!(d.get(table[x], table[y]) <= &(&alpha * d.get(x, y)));
                }
            }
        }
    }
    println!(
        "acceptance 9: PASS — the prescribed-factor metrics match their pinned values on T5 and satisfy both alpha bounds on T4"
    );
}

#[test]
fn acceptance_10_unbounded_extension() {
    let inst = FiniteInstance::new(4, vec![vec![0, 0, 1, 2]]).unwrap();
    let a = rat(1, 2);
    let cert = unbounded_metric(&inst, &[0, 1], &a, &rat_int(1)).unwrap();
    assert!(
        cert.checks.all_pass(),
        "{:?}",
        cert.checks.failures().collect::<Vec<_>>()
    );
    assert_eq!(cert.d.get(3, 2), &rat_int(4), "D(3,2)");

    // psi-contraction over every pair and the single map, directly.
    let psi = psi_compose(&cert.inner.phi, &a).unwrap();
    for x in 0..4 {
        for y in 0..4 {
            let lhs = cert.d.get(inst.maps[0][x], inst.maps[0][y]);
            assert!(lhs <= &psi.eval(cert.d.get(x, y)), "pair ({x},{y})");
        }
    }

    // Grid dominance at step M/256 up to 8M.
    let step = &cert.m_bound / rat_int(256);
    for j in 0..=(8 * 256) {
        let t = rat_int(j) * &step;
        let v = psi.eval(&t);
        assert!(v >= &a * &t, "psi below the line at t = {j}*M/256");
        assert!(
            v >= cert.inner.phi.eval(&t),
            "psi below phi at t = {j}*M/256"
        );
        if t.is_positive() {
            assert!(v < t, "psi touches the identity at t = {j}*M/256");
        }
    }
    println!(
        "acceptance 10: PASS — D(3,2) = 4 exactly, psi-contraction holds for all pairs, psi dominates a*t and phi on the 1/256 grid"
    );
}

#[test]
fn acceptance_11_cover_suites_and_discreteness() {
    let mut instances: Vec<FiniteInstance> = ["T1", "T2", "T4", "T5"]
        .iter()
        .map(|n| fixture(n).unwrap())
        .collect();
    instances.extend(corpus().iter().cloned());
    for inst in &instances {
        let a = aut(inst);
        let p36 = limit_set_suite(&a, 3).unwrap();
        assert!(
            p36.all_pass(),
            "instance {:?}: {:?}",
            inst.maps,
            p36.failures().collect::<Vec<_>>()
        );
        let p37 = extended_cylinder_suite(&a, 3).unwrap();
        assert!(
            p37.all_pass(),
            "instance {:?}: {:?}",
            inst.maps,
            p37.failures().collect::<Vec<_>>()
        );

        let attractor = a.attractor_info().unwrap().attractor.clone();
        for mu in &standard_mus() {
            let d = dmu_exact(&a, mu).unwrap();
            for x in 0..inst.points {
                if attractor.contains(&x) {
                    continue;
                }
                let bound = mu.value_at(a.m_of_point(x).unwrap());
                for y in 0..inst.points {
                    if y != x {
                        assert!(
                            d.get(x, y) >= &bound,
                            "instance {:?}: discreteness at ({x},{y})",
                            inst.maps
                        );
                    }
                }
            }
        }
    }
    println!(
        "acceptance 11: PASS — cylinder suites at depth 3 and the escape-depth discreteness bound hold on {} instances",
        instances.len()
    );
}

#[test]
fn acceptance_corpus_properties() {
    // Not a numbered criterion: records the deterministic corpus shape the
    // other tests rely on.
    let corpus = corpus();
    assert_eq!(corpus.len(), 200);
    assert!(corpus.iter().all(|i| i.points <= 5 && i.map_count() <= 3));
    let max_mstar = corpus.iter().map(|i| m_star(&aut(i))).max().unwrap();
    assert!(max_mstar <= 6);
    println!(
        "acceptance corpus: 200 gated instances, max points 5, max maps 3, max finite depth {max_mstar}"
    );
}

#[test]
fn acceptance_one_is_rat_one() {
    // Guard against accidental drift in the helper constructors used above.
    assert_eq!(rat_int(1), Rat::one());
}
