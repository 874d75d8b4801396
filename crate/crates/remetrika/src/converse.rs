//! Converse constructions: the single-map metric with a prescribed
//! contraction factor, its common-fixed-point companion for families, and
//! the unbounded extension built from a forward-invariant core.
//!
//! The single-map and common-fixed-point metrics are the chain semi-metric
//! under geometric weights: prepending a letter multiplies every chain
//! weight by the ratio, which is exactly the prescribed Lipschitz factor.
//! The unbounded extension glues the pipeline metric on the core to an
//! escape-level geometry outside it, and trades the comparison function for
//! its supremal convolution with the line `a t`.

use num_traits::{One, Signed, Zero};

use crate::chainmetric::{dmu_exact, MetricMatrix, WeightSequence};
use crate::instance::FiniteInstance;
use crate::monoid::{build_automaton, DEFAULT_STATE_CAP};
use crate::ratio::{rat_int, rat_pow, rat_to_string, Rat};
use crate::remetrize::{
    remetrize, ComparisonFunction, Piece, RemetrizationCertificate, ScaleSequence,
};
use crate::report::SuiteReport;
use crate::{Error, Result};

/// Escape depth into the invariant core: the first Hutchinson iterate of
/// `{x}` that lands inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Level {
    Inside,
    Steps(usize),
}

#[derive(Debug, Clone)]
pub struct LevelFunction {
    pub levels: Vec<Level>,
}

impl LevelFunction {
    /// `M a^{-l(x)}`, with the inside convention `a^{-inside} = 0`.
    pub fn scaled(&self, m: &Rat, a: &Rat, x: usize) -> Rat {
        match &self.levels[x] {
            Level::Inside => Rat::zero(),
            Level::Steps(q) => m / rat_pow(a, *q),
        }
    }
}

fn check_factor(a: &Rat) -> Result<()> {
    if !a.is_positive() || a >= &Rat::one() {
        return Err(Error::Precondition(format!(
            "the factor must lie in (0, 1), got {}",
            rat_to_string(a)
        )));
    }
    Ok(())
}

/// A complete bounded metric making a single map an `alpha`-contraction:
/// the chain semi-metric under `mu = (alpha^n)`. Requires the iterated
/// image of the whole space to collapse to one point.
pub fn bessaga_metric(inst: &FiniteInstance, alpha: &Rat) -> Result<MetricMatrix> {
    check_factor(alpha)?;
    if inst.map_count() != 1 {
        return Err(Error::Precondition(format!(
            "the single-map construction needs exactly one map, got {}",
            inst.map_count()
        )));
    }
    let aut = build_automaton(inst, DEFAULT_STATE_CAP)?;
    aut.require_attractor()?;
    let d = dmu_exact(&aut, &WeightSequence::geometric(alpha.clone())?)?;
    verify_factor_contraction(inst, &d, alpha)?;
    Ok(d)
}

/// The family companion: with a common fixed point the attractor is that
/// single point, and the geometric chain semi-metric is a genuine metric
/// making every member an `alpha`-contraction. No commutativity is needed.
pub fn wong_metric(inst: &FiniteInstance, alpha: &Rat) -> Result<MetricMatrix> {
    check_factor(alpha)?;
    inst.validate()?;
    let common = (0..inst.points).find(|&x| inst.maps.iter().all(|table| table[x] == x));
    let Some(x0) = common else {
        return Err(Error::Precondition(
            "the maps have no common fixed point".into(),
        ));
    };
    let aut = build_automaton(inst, DEFAULT_STATE_CAP)?;
    aut.require_attractor()?;
    let attractor = &aut.attractor_info()?.attractor;
    if attractor != &[x0] {
        return Err(Error::Verification(format!(
            "attractor {attractor:?} is not the common fixed point {{{x0}}}"
        )));
    }
    let d = dmu_exact(&aut, &WeightSequence::geometric(alpha.clone())?)?;
    verify_factor_contraction(inst, &d, alpha)?;
    Ok(d)
}

fn verify_factor_contraction(inst: &FiniteInstance, d: &MetricMatrix, alpha: &Rat) -> Result<()> {
    if !d.is_metric() {
        return Err(Error::Verification(
            "the constructed table is not a metric".into(),
        ));
    }
    if d.max_entry() > Rat::one() {
        return Err(Error::Verification("the metric exceeds its bound 1".into()));
    }
    for (mi, table) in inst.maps.iter().enumerate() {
        for x in 0..inst.points {
            for y in 0..inst.points {
                if d.get(table[x], table[y]) > &(alpha * d.get(x, y)) {
                    return Err(Error::Verification(format!(
                        "map {}: d(f({x}), f({y})) exceeds alpha d({x},{y})",
                        mi + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The supremal convolution `psi(t) = sup {a x + phi(t - x) : 0 <= x <= t}`,
/// exactly. Substituting `u = t - x` the objective is `a(t-u) + phi(u)`; on
/// each piece of `phi` it is affine in `u`, so the supremum is attained at
/// `u = t` (giving `phi` itself) or at a breakpoint of `phi` (giving the
/// line of slope `a` through that breakpoint, clamped below it). `psi` is
/// their pointwise maximum.
pub fn psi_compose(phi: &ComparisonFunction, a: &Rat) -> Result<ComparisonFunction> {
    check_factor(a)?;
    let mut psi = phi.clone();
    for piece in phi.pieces() {
        let b = &piece.start;
        let value = phi.eval(b);
        let candidate = if b.is_zero() {
            ComparisonFunction::new(vec![Piece {
                start: Rat::zero(),
                value,
                slope: a.clone(),
            }])?
        } else {
            ComparisonFunction::new(vec![
                Piece {
                    start: Rat::zero(),
                    value: Rat::zero(),
                    slope: Rat::zero(),
                },
                Piece {
                    start: b.clone(),
                    value,
                    slope: a.clone(),
                },
            ])?
        };
        psi = psi.max(&candidate);
    }
    let report = psi.comparison_report();
    if !report.all_pass() {
        return Err(Error::Verification(format!(
            "psi violates the comparison axioms: {:?}",
            report.failures().collect::<Vec<_>>()
        )));
    }
    Ok(psi)
}

/// Level assignment for a forward-invariant core: errors when the core is
/// not invariant (condition a) or some orbit never enters it (condition d).
pub fn level_function(inst: &FiniteInstance, core: &[usize]) -> Result<LevelFunction> {
    inst.validate()?;
    let mut sorted: Vec<usize> = core.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&x| x >= inst.points) {
        return Err(Error::Precondition(format!(
            "core point {bad} out of range"
        )));
    }
    let inside = |x: usize| sorted.binary_search(&x).is_ok();
    let image = inst.hutchinson(&sorted);
    if let Some(&escape) = image.iter().find(|&&x| !inside(x)) {
        return Err(Error::Precondition(format!(
            "condition (a) fails: the core is not forward invariant (point {escape} escapes)"
        )));
    }
    let mut levels = Vec::with_capacity(inst.points);
    for x in 0..inst.points {
        if inside(x) {
            levels.push(Level::Inside);
            continue;
        }
        // Orbits that stay outside for `points` steps loop outside forever:
        // a backward chain of outside points must repeat.
        let mut set = vec![x];
        let mut found = None;
        for step in 1..=inst.points {
            set = inst.hutchinson(&set);
            if set.iter().all(|&y| inside(y)) {
                found = Some(step);
                break;
            }
        }
        match found {
            Some(step) => levels.push(Level::Steps(step)),
            None => {
                return Err(Error::Precondition(format!(
                    "condition (d) fails: the orbit of point {x} never enters the core"
                )))
            }
        }
    }
    Ok(LevelFunction { levels })
}

/// The unbounded-extension certificate: the glued metric on all of `X`, the
/// convolved comparison function, and the inner pipeline certificate on the
/// core.
#[derive(Debug, Clone)]
pub struct UnboundedCertificate {
    /// Sorted core carrier.
    pub core: Vec<usize>,
    pub levels: LevelFunction,
    /// Upper bound of the core metric used in the escape formula.
    pub m_bound: Rat,
    pub d: MetricMatrix,
    pub psi: ComparisonFunction,
    pub inner: RemetrizationCertificate,
    pub checks: SuiteReport,
}

/// Builds the metric `D`: the pipeline metric on the core, zero on the
/// diagonal, and the escape-level maximum everywhere else; then verifies
/// that every map is a `psi`-contraction with `psi` the convolution of the
/// core comparison function with the line `a t`.
pub fn unbounded_metric(
    inst: &FiniteInstance,
    core: &[usize],
    a: &Rat,
    pipeline_m: &Rat,
) -> Result<UnboundedCertificate> {
    check_factor(a)?;
    let levels = level_function(inst, core)?;
    let (sub, carrier) = inst.restrict(core)?;
    let sub_aut = build_automaton(&sub, DEFAULT_STATE_CAP)?;
    sub_aut.require_attractor()?;
    let inner = remetrize(&sub_aut, pipeline_m, &ScaleSequence)?;
    if !inner.checks.all_pass() {
        return Err(Error::Verification(
            "the core certificate failed verification".into(),
        ));
    }

    // The escape formula needs an upper bound for the core metric; its exact
    // maximum keeps the contraction cases tight. A one-point core has no
    // positive distances, so fall back to the pipeline bound.
    let max_inner = inner.d.max_entry();
    let m_bound = if max_inner.is_zero() {
        pipeline_m.clone()
    } else {
        max_inner
    };

    let n = inst.points;
    let position = |x: usize| carrier.binary_search(&x).ok();
    let mut d = MetricMatrix::zero(n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = match (position(x), position(y)) {
                (Some(px), Some(py)) => inner.d.get(px, py).clone(),
                _ => levels
                    .scaled(&m_bound, a, x)
                    .max(levels.scaled(&m_bound, a, y)),
            };
            d.set(x, y, v);
        }
    }
    let psi = psi_compose(&inner.phi, a)?;

    let mut checks = d.metric_axiom_report("unbounded-metric");

    // The core block is exactly the pipeline metric.
    let mut bad = None;
    for (px, &x) in carrier.iter().enumerate() {
        for (py, &y) in carrier.iter().enumerate() {
            if d.get(x, y) != inner.d.get(px, py) {
                bad.get_or_insert(format!("({x},{y})"));
            }
        }
    }
    checks.check("restricts-to-core-metric", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // psi-contraction for every map and pair, with the boundary mixed case
    // (one endpoint inside the core) reported separately rather than assumed.
    let mut bad_all = None;
    let mut bad_mixed = None;
    for (mi, table) in inst.maps.iter().enumerate() {
        for x in 0..n {
            for y in 0..n {
                let lhs = d.get(table[x], table[y]);
                let rhs = psi.eval(d.get(x, y));
                if lhs > &rhs {
                    let mixed = (position(x).is_some()) != (position(y).is_some());
                    let ce = format!(
                        "map {}: D(f({x}), f({y})) = {} > psi(D({x},{y})) = {}",
                        mi + 1,
                        rat_to_string(lhs),
                        rat_to_string(&rhs)
                    );
                    if mixed {
                        bad_mixed.get_or_insert(ce);
                    } else {
                        bad_all.get_or_insert(ce);
                    }
                }
            }
        }
    }
    checks.check("psi-contraction", bad_all.is_none(), || {
        bad_all.clone().unwrap()
    });
    checks.check(
        "psi-contraction-boundary-mixed",
        bad_mixed.is_none(),
        || bad_mixed.clone().unwrap(),
    );

    // psi dominates both the line and phi on a fine grid, and stays below
    // the identity.
    let grid_step = &m_bound / rat_int(256);
    let mut bad = None;
    for j in 0..=(8 * 256) {
        let t = rat_int(j) * &grid_step;
        let psi_t = psi.eval(&t);
        if psi_t < a * &t || psi_t < inner.phi.eval(&t) {
            bad.get_or_insert(format!("t = {}", rat_to_string(&t)));
        }
        if t.is_positive() && psi_t >= t {
            bad.get_or_insert(format!("psi(t) >= t at t = {}", rat_to_string(&t)));
        }
    }
    checks.check("psi-dominates-line-and-phi", bad.is_none(), || {
        bad.clone().unwrap()
    });

    Ok(UnboundedCertificate {
        core: carrier,
        levels,
        m_bound,
        d,
        psi,
        inner,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixture;
    use crate::ratio::rat;

    fn one_half() -> Rat {
        rat(1, 2)
    }

    #[test]
    fn bessaga_on_t5() {
        let inst = fixture("T5").unwrap();
        let d = bessaga_metric(&inst, &one_half()).unwrap();
        assert_eq!(d.get(0, 1), &rat(1, 2));
        assert_eq!(d.get(0, 2), &rat(1, 1));
        assert_eq!(d.get(1, 2), &rat(1, 1));
        // The contraction bound is tight at (1, 2): d(f(1), f(2)) = d(0, 1).
        assert_eq!(d.get(0, 1), &(one_half() * d.get(1, 2)));
    }

    #[test]
    fn bessaga_rejects_swap_and_families() {
        let swap = fixture("T3").unwrap();
        assert!(matches!(
            bessaga_metric(&swap, &one_half()),
            Err(Error::NoAttractor { .. })
        ));
        let family = fixture("T1").unwrap();
        assert!(matches!(
            bessaga_metric(&family, &one_half()),
            Err(Error::Precondition(_))
        ));
        let t5 = fixture("T5").unwrap();
        assert!(bessaga_metric(&t5, &rat_int(1)).is_err());
        assert!(bessaga_metric(&t5, &rat(3, 2)).is_err());
    }

    #[test]
    fn bessaga_constant_map() {
        let inst = FiniteInstance::new(4, vec![vec![2, 2, 2, 2]]).unwrap();
        let d = bessaga_metric(&inst, &rat(1, 3)).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let expect = if x == y { rat_int(0) } else { rat_int(1) };
                assert_eq!(d.get(x, y), &expect);
            }
        }
    }

    #[test]
    fn bessaga_uniqueness_of_iterate_fixed_points() {
        // Every iterate of the map has exactly the attractor point fixed.
        let inst = fixture("T5").unwrap();
        let _ = bessaga_metric(&inst, &one_half()).unwrap();
        let mut power: Vec<usize> = (0..inst.points).collect();
        for _ in 1..=inst.points {
            power = power.iter().map(|&x| inst.maps[0][x]).collect();
            let fixed: Vec<usize> = (0..inst.points).filter(|&x| power[x] == x).collect();
            assert_eq!(fixed, vec![0]);
        }
    }

    #[test]
    fn wong_on_t4() {
        let inst = fixture("T4").unwrap();
        for alpha in [one_half(), rat(9, 10)] {
            let d = wong_metric(&inst, &alpha).unwrap();
            assert!(d.is_metric());
            for table in &inst.maps {
                for x in 0..3 {
                    for y in 0..3 {
                        assert!(d.get(table[x], table[y]) <= &(&alpha * d.get(x, y)));
                    }
                }
            }
        }
    }

    #[test]
    fn wong_requires_common_fixed_point() {
        let inst = fixture("T1").unwrap();
        assert!(matches!(
            wong_metric(&inst, &one_half()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn psi_of_linear_phi() {
        // phi(t) = t/2 capped far out; convolving with a = 3/4 gives 3t/4 on
        // the linear range.
        let phi = ComparisonFunction::new(vec![
            Piece {
                start: rat_int(0),
                value: rat_int(0),
                slope: rat(1, 2),
            },
            Piece {
                start: rat_int(1000),
                value: rat_int(500),
                slope: rat_int(0),
            },
        ])
        .unwrap();
        let psi = psi_compose(&phi, &rat(3, 4)).unwrap();
        for t in [rat(1, 4), rat_int(1), rat_int(7), rat_int(900)] {
            assert_eq!(psi.eval(&t), rat(3, 4) * &t, "t = {}", rat_to_string(&t));
        }
    }

    #[test]
    fn psi_of_jump_phi() {
        // phi = 0 on [0,1), 1/2 from 1 on; a = 1/2: both candidate families
        // agree on t/2 everywhere.
        let phi = ComparisonFunction::new(vec![
            Piece {
                start: rat_int(0),
                value: rat_int(0),
                slope: rat_int(0),
            },
            Piece {
                start: rat_int(1),
                value: rat(1, 2),
                slope: rat_int(0),
            },
        ])
        .unwrap();
        let psi = psi_compose(&phi, &one_half()).unwrap();
        for t in [rat_int(0), rat(1, 2), rat_int(1), rat(3, 2), rat_int(5)] {
            assert_eq!(psi.eval(&t), one_half() * &t, "t = {}", rat_to_string(&t));
        }
        assert_eq!(psi.eval(&rat_int(0)), rat_int(0));
    }

    #[test]
    fn psi_matches_grid_oracle() {
        // Independent oracle: direct evaluation of the objective over a fine
        // grid plus the exact candidate offsets.
        let phi = ComparisonFunction::new(vec![
            Piece {
                start: rat_int(0),
                value: rat_int(0),
                slope: rat_int(0),
            },
            Piece {
                start: rat(3, 4),
                value: rat(51, 80),
                slope: rat(17, 20),
            },
            Piece {
                start: rat(5, 4),
                value: rat(17, 16),
                slope: rat_int(0),
            },
        ])
        .unwrap();
        assert!(phi.is_comparison());
        let a = rat(2, 5);
        let psi = psi_compose(&phi, &a).unwrap();
        for j in 0..=64 {
            let t = rat_int(j) * rat(1, 8);
            let mut candidates: Vec<Rat> = Vec::new();
            for g in 0..=256 {
                let x = &t * rat_int(g) / rat_int(256);
                candidates.push(&a * &x + phi.eval(&(&t - &x)));
            }
            for p in phi.pieces() {
                if p.start <= t {
                    let x = &t - &p.start;
                    candidates.push(&a * &x + phi.eval(&p.start));
                }
            }
            let oracle = candidates.into_iter().max().unwrap();
            assert_eq!(psi.eval(&t), oracle, "t = {}", rat_to_string(&t));
        }
    }

    #[test]
    fn psi_rejects_bad_factor() {
        let phi = ComparisonFunction::zero();
        assert!(psi_compose(&phi, &rat_int(1)).is_err());
        assert!(psi_compose(&phi, &rat_int(0)).is_err());
    }

    #[test]
    fn level_function_example() {
        let inst = FiniteInstance::new(4, vec![vec![0, 0, 1, 2]]).unwrap();
        let lf = level_function(&inst, &[0, 1]).unwrap();
        assert_eq!(lf.levels[0], Level::Inside);
        assert_eq!(lf.levels[1], Level::Inside);
        assert_eq!(lf.levels[2], Level::Steps(1));
        assert_eq!(lf.levels[3], Level::Steps(2));
    }

    #[test]
    fn level_function_rejects_bad_cores() {
        let t2 = fixture("T2").unwrap();
        // The whole space is trivially fine.
        let lf = level_function(&t2, &[0, 1, 2, 3]).unwrap();
        assert!(lf.levels.iter().all(|l| l == &Level::Inside));
        // {0} is not invariant: f2(0) = 2 escapes.
        assert!(matches!(
            level_function(&t2, &[0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unbounded_example_values() {
        let inst = FiniteInstance::new(4, vec![vec![0, 0, 1, 2]]).unwrap();
        let cert = unbounded_metric(&inst, &[0, 1], &one_half(), &rat_int(1)).unwrap();
        assert!(
            cert.checks.all_pass(),
            "{:?}",
            cert.checks.failures().collect::<Vec<_>>()
        );
        assert_eq!(cert.m_bound, rat_int(1));
        // D(3,2) = max{M a^-2, M a^-1} = 4.
        assert_eq!(cert.d.get(3, 2), &rat_int(4));
        // Core pairs carry the pipeline metric; mixed pairs the escape value.
        assert_eq!(cert.d.get(0, 1), cert.inner.d.get(0, 1));
        assert_eq!(cert.d.get(0, 2), &rat_int(2));
        assert_eq!(cert.d.get(0, 0), &rat_int(0));
        assert_eq!(cert.d.get(3, 3), &rat_int(0));
        // The escape region rises above the core bound.
        assert!(cert.d.max_entry() > cert.m_bound);
    }

    #[test]
    fn unbounded_propagates_condition_errors() {
        let t2 = fixture("T2").unwrap();
        assert!(matches!(
            unbounded_metric(&t2, &[0], &one_half(), &rat_int(1)),
            Err(Error::Precondition(_))
        ));
    }
}
