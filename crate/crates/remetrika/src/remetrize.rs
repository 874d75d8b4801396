//! The remetrization pipeline: separating sequences, the metric `rho`, the
//! sequence `eta`, the metric `delta = d^eta`, the scale-weighted final
//! metric `d`, and the comparison function `phi`, assembled into a checkable
//! certificate.
//!
//! On a finite instance every limit in the construction is attained, which
//! turns the existence proof into an exact computation: the separating
//! staircases change nothing below the deepest finite cylinder depth, the
//! pair enumeration over the attractor replaces the compactness extraction,
//! and `phi` is a finite pointwise maximum of one-patch comparison functions
//! centered at the realized distances of `d`.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::chainmetric::{dmu_exact, m_star, MetricMatrix, WeightSequence};
use crate::cover::sample_periodic_words;
use crate::monoid::MonoidAutomaton;
use crate::ratio::{half_pow, rat, rat_int, rat_to_string, Rat};
use crate::report::SuiteReport;
use crate::{Error, Result};

/// The scale sequence `c_n = 2 - 2^{-n}` with limit 2: `c_0 = 1`, strictly
/// increasing, and the ratios `c_n / c_{n+1}` climb strictly inside
/// `[1/2, 1)`.
#[derive(Debug, Clone, Default)]
pub struct ScaleSequence;

impl ScaleSequence {
    pub fn c(&self, n: usize) -> Rat {
        rat_int(2) - half_pow(n)
    }

    pub fn c_infinity(&self) -> Rat {
        rat_int(2)
    }

    /// The scale applied to a composed map: `c` at its longest realization,
    /// the limit for unbounded ones.
    pub fn c_at_depth(&self, depth: Option<usize>) -> Rat {
        match depth {
            Some(n) => self.c(n),
            None => self.c_infinity(),
        }
    }

    /// Checks the defining axioms exactly for all `n <= bound`, plus the
    /// closed-form ratio identity at a few large indices.
    pub fn axioms_report(&self, bound: usize) -> SuiteReport {
        let mut report = SuiteReport::new("scale-sequence");
        report.check("c0-is-1", self.c(0) == rat_int(1), || {
            rat_to_string(&self.c(0))
        });
        let mut bad = None;
        let mut prev_ratio: Option<Rat> = None;
        for n in 0..=bound {
            let cn = self.c(n);
            let cn1 = self.c(n + 1);
            if cn >= cn1 {
                bad.get_or_insert(format!("c_{n} >= c_{}", n + 1));
            }
            if cn > rat_int(2) {
                bad.get_or_insert(format!("c_{n} > 2"));
            }
            let ratio = &cn / &cn1;
            if ratio < rat(1, 2) || ratio >= rat_int(1) {
                bad.get_or_insert(format!("ratio at {n} leaves [1/2, 1)"));
            }
            if let Some(prev) = &prev_ratio {
                if prev >= &ratio {
                    bad.get_or_insert(format!("ratios not strictly increasing at {n}"));
                }
            }
            prev_ratio = Some(ratio);
        }
        report.check("axioms-to-bound", bad.is_none(), || bad.clone().unwrap());
        // c_n / c_{n+1} = (2^{n+2} - 2) / (2^{n+2} - 1), checked at indices
        // far beyond the sampled range.
        let mut bad = None;
        for n in [bound, 200, 1000] {
            let lhs = self.c(n) / self.c(n + 1);
            let two = rat_int(2);
            let pow = crate::ratio::rat_pow(&two, n + 2);
            let rhs = (&pow - &two) / (&pow - &rat_int(1));
            if lhs != rhs {
                bad.get_or_insert(format!("closed form fails at {n}"));
            }
        }
        report.check("ratio-closed-form", bad.is_none(), || bad.clone().unwrap());
        report
    }
}

/// A piecewise-linear, right-continuous, nondecreasing function given by
/// pieces `[start_j, start_{j+1})` with explicit value and slope; the last
/// piece extends to infinity. Eventually constant when the last slope is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonFunction {
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: Rat,
    pub value: Rat,
    pub slope: Rat,
}

impl ComparisonFunction {
    pub fn new(pieces: Vec<Piece>) -> Result<ComparisonFunction> {
        if pieces.is_empty() {
            return Err(Error::Validation(
                "a comparison function needs pieces".into(),
            ));
        }
        if !pieces[0].start.is_zero() {
            return Err(Error::Validation("the first piece must start at 0".into()));
        }
        if pieces.windows(2).any(|w| w[0].start >= w[1].start) {
            return Err(Error::Validation(
                "piece starts must strictly increase".into(),
            ));
        }
        Ok(ComparisonFunction { pieces })
    }

    /// The zero function (a valid comparison function).
    pub fn zero() -> ComparisonFunction {
        ComparisonFunction {
            pieces: vec![Piece {
                start: Rat::zero(),
                value: Rat::zero(),
                slope: Rat::zero(),
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_index_at(&self, t: &Rat) -> usize {
        match self.pieces.binary_search_by(|p| p.start.cmp(t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        if t.is_negative() {
            return Rat::zero();
        }
        let p = &self.pieces[self.piece_index_at(t)];
        &p.value + &p.slope * (t - &p.start)
    }

    /// `(value, slope)` of the affine piece governing `[t, next break)`.
    fn affine_at(&self, t: &Rat) -> (Rat, Rat) {
        let p = &self.pieces[self.piece_index_at(t)];
        (&p.value + &p.slope * (t - &p.start), p.slope.clone())
    }

    /// The final constant value, when the function is eventually constant.
    pub fn final_value(&self) -> Option<Rat> {
        let last = self.pieces.last().expect("nonempty");
        last.slope.is_zero().then(|| last.value.clone())
    }

    /// Largest `t` below which the function vanishes identically.
    pub fn zero_until(&self) -> Rat {
        let mut bound = Rat::zero();
        for p in &self.pieces {
            if p.value.is_zero() && p.slope.is_zero() {
                continue;
            }
            bound = p.start.clone();
            break;
        }
        bound
    }

    /// Pointwise maximum of two functions; exact, with crossing breakpoints
    /// inserted.
    pub fn max(&self, other: &ComparisonFunction) -> ComparisonFunction {
        let mut starts: Vec<Rat> = self
            .pieces
            .iter()
            .map(|p| p.start.clone())
            .chain(other.pieces.iter().map(|p| p.start.clone()))
            .collect();
        starts.sort();
        starts.dedup();

        let mut pieces: Vec<Piece> = Vec::new();
        for (idx, a) in starts.iter().enumerate() {
            let end = starts.get(idx + 1);
            let (va, sa) = self.affine_at(a);
            let (vb, sb) = other.affine_at(a);
            // Leader at the left end of the interval; ties broken toward the
            // larger slope so the leader stays correct just right of `a`.
            let (mut v, mut s, ov, os) = if (va.clone(), sa.clone()) >= (vb.clone(), sb.clone()) {
                (va.clone(), sa.clone(), vb, sb)
            } else {
                (vb.clone(), sb.clone(), va, sa)
            };
            push_piece(&mut pieces, a.clone(), v.clone(), s.clone());
            // One crossing is possible inside the open interval when the
            // trailing line is steeper.
            if os > s {
                let t_cross = a + (&v - &ov) / (&os - &s);
                let crosses_inside = match end {
                    Some(e) => &t_cross < e,
                    None => true,
                };
                if crosses_inside && &t_cross > a {
                    let value_at_cross = &ov + &os * (&t_cross - a);
                    v = value_at_cross.clone();
                    s = os;
                    push_piece(&mut pieces, t_cross, v, s);
                }
            }
        }
        ComparisonFunction { pieces }
    }

    /// Validates all comparison-function properties exactly: zero at zero,
    /// nondecreasing with upward jumps only, below the identity on `(0, oo)`,
    /// and a final slope strictly below 1.
    pub fn comparison_report(&self) -> SuiteReport {
        let mut report = SuiteReport::new("comparison-function");
        report.check("zero-at-zero", self.eval(&Rat::zero()).is_zero(), || {
            rat_to_string(&self.eval(&Rat::zero()))
        });

        let mut bad = None;
        for p in &self.pieces {
            if p.slope.is_negative() || p.value.is_negative() {
                bad.get_or_insert(format!("piece at {}", rat_to_string(&p.start)));
            }
        }
        for w in self.pieces.windows(2) {
            let left_limit = &w[0].value + &w[0].slope * (&w[1].start - &w[0].start);
            if w[1].value < left_limit {
                bad.get_or_insert(format!("downward jump at {}", rat_to_string(&w[1].start)));
            }
        }
        report.check("nondecreasing", bad.is_none(), || bad.clone().unwrap());

        // phi(t) < t on every piece: at the left endpoint (or just right of
        // 0), and in the limit toward the right endpoint.
        let mut bad = None;
        for (idx, p) in self.pieces.iter().enumerate() {
            let end = self.pieces.get(idx + 1).map(|q| &q.start);
            if p.start.is_positive() && p.value >= p.start {
                bad.get_or_insert(format!(
                    "phi({}) = {} not below the identity",
                    rat_to_string(&p.start),
                    rat_to_string(&p.value)
                ));
            }
            if p.start.is_zero() && p.value.is_positive() {
                bad.get_or_insert("positive value at 0".to_string());
            }
            match end {
                Some(e) => {
                    let left_limit = &p.value + &p.slope * (e - &p.start);
                    if &left_limit > e {
                        bad.get_or_insert(format!(
                            "phi exceeds the identity approaching {}",
                            rat_to_string(e)
                        ));
                    }
                }
                None => {
                    if p.slope > Rat::one() {
                        bad.get_or_insert("final slope exceeds 1".to_string());
                    }
                    if p.slope.is_one() && p.value >= p.start && p.start.is_positive() {
                        bad.get_or_insert("final unit slope touches the identity".to_string());
                    }
                    if p.slope.is_one() && p.start.is_zero() {
                        bad.get_or_insert("identity tail from 0".to_string());
                    }
                }
            }
        }
        report.check("below-identity", bad.is_none(), || bad.clone().unwrap());
        report
    }

    pub fn is_comparison(&self) -> bool {
        self.comparison_report().all_pass()
    }

    /// Structural witness that iterates vanish: the function is dominated by
    /// `s_max t` with `s_max` strictly below 1 (so orbits decay at least
    /// geometrically) and is identically zero below its first active piece
    /// (so they land exactly on zero after finitely many steps). Stepping the
    /// orbit explicitly is hopeless when `s_max` is close to 1.
    pub fn vanishing_report(&self) -> SuiteReport {
        let mut report = SuiteReport::new("phi-vanishing");
        if self
            .pieces
            .iter()
            .all(|p| p.value.is_zero() && p.slope.is_zero())
        {
            report.check("identically-zero", true, || unreachable!());
            return report;
        }
        let max_slope = self
            .pieces
            .iter()
            .map(|p| p.slope.clone())
            .max()
            .expect("nonempty");
        report.check("slope-below-one", max_slope < Rat::one(), || {
            rat_to_string(&max_slope)
        });
        let mut bad = None;
        for p in &self.pieces {
            if p.value > &max_slope * &p.start {
                bad.get_or_insert(format!("piece at {}", rat_to_string(&p.start)));
            }
        }
        report.check("dominated-by-slope-line", bad.is_none(), || {
            bad.clone().unwrap()
        });
        report.check(
            "zero-below-first-patch",
            self.zero_until().is_positive(),
            || "no leading zero patch".into(),
        );
        report
    }

    /// Iterates from `t0` until the value reaches exactly zero; errors when
    /// the iterates stop decreasing or the step budget runs out.
    pub fn iterates_to_zero(&self, t0: &Rat, max_steps: usize) -> Result<usize> {
        let mut t = t0.clone();
        for step in 0..max_steps {
            if t.is_zero() {
                return Ok(step);
            }
            let next = self.eval(&t);
            if next >= t {
                return Err(Error::Verification(format!(
                    "iterate did not decrease at {}",
                    rat_to_string(&t)
                )));
            }
            t = next;
        }
        Err(Error::Verification(format!(
            "iterates from {} still positive after {max_steps} steps",
            rat_to_string(t0)
        )))
    }

    /// `[[t, value, slope], ...]` plus the final constant value when there is
    /// one.
    pub fn to_json(&self) -> Value {
        json!({
            "breakpoints": self.pieces.iter().map(|p| {
                json!([rat_to_string(&p.start), rat_to_string(&p.value), rat_to_string(&p.slope)])
            }).collect::<Vec<_>>(),
            "final": self.final_value().as_ref().map(rat_to_string),
        })
    }
}

fn push_piece(pieces: &mut Vec<Piece>, start: Rat, value: Rat, slope: Rat) {
    if let Some(last) = pieces.last() {
        // Merge colinear continuations; replace zero-length pieces.
        let continues =
            last.slope == slope && value == &last.value + &last.slope * (&start - &last.start);
        if continues {
            return;
        }
        if last.start == start {
            pieces.pop();
        }
    }
    pieces.push(Piece {
        start,
        value,
        slope,
    });
}

/// A staircase sequence separating `x` from `y`: level `m` down to the
/// deepest finite cylinder depth, then halving per index. Each halving round
/// is verified to cost exactly nothing (it only touches indices beyond that
/// depth), which realizes the less-than-geometric-loss requirement with
/// zero loss.
pub fn separating_sequence(
    aut: &MonoidAutomaton,
    x: usize,
    y: usize,
    m: &Rat,
) -> Result<WeightSequence> {
    aut.require_attractor()?;
    if x == y {
        return Err(Error::Precondition("separating a point from itself".into()));
    }
    if !m.is_positive() {
        return Err(Error::Precondition("the bound M must be positive".into()));
    }
    let p1 = m_star(aut) + 1;
    let staircase = WeightSequence::staircase(m, p1);

    // Round-by-round verification against the frozen intermediates.
    let mut previous = dmu_exact(aut, &staircase.freeze_after(p1))?;
    for k in 1..=3 {
        let frozen = dmu_exact(aut, &staircase.freeze_after(p1 + k))?;
        let loss = previous.get(x, y) - frozen.get(x, y);
        let allowed = m * half_pow(k + 1);
        if loss >= allowed || loss.is_negative() {
            return Err(Error::Verification(format!(
                "halving round {k} lost {} of d(x, y), allowed below {}",
                rat_to_string(&loss),
                rat_to_string(&allowed)
            )));
        }
        previous = frozen;
    }

    // Contract: vanishing tail, bounded by M, and at least M/2 apart.
    if !staircase.limit().is_zero() {
        return Err(Error::Verification("staircase tail does not vanish".into()));
    }
    let d = dmu_exact(aut, &staircase)?;
    if d.max_entry() > *m {
        return Err(Error::Verification(
            "separating sequence exceeds the bound M".into(),
        ));
    }
    if d.get(x, y) < &(m * rat(1, 2)) {
        return Err(Error::Verification(format!(
            "d({x},{y}) = {} fell below M/2",
            rat_to_string(d.get(x, y))
        )));
    }
    Ok(staircase)
}

/// The bounded metric `rho` with the separating data it was built from.
pub struct RhoMetric {
    pub matrix: MetricMatrix,
    pub sequences: Vec<WeightSequence>,
    pub pairs: Vec<(usize, usize)>,
}

/// One separating sequence per unordered attractor pair (lexicographic), and
/// the bounded metric `rho`: the geometrically weighted sum of their chain
/// semi-metrics. With no pairs (singleton attractor) one default staircase
/// keeps the sum a metric, since points off the attractor separate under any
/// weights.
pub fn rho_metric(aut: &MonoidAutomaton, m: &Rat) -> Result<RhoMetric> {
    let info = aut.attractor_info()?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, &a) in info.attractor.iter().enumerate() {
        for &b in info.attractor.iter().skip(i + 1) {
            pairs.push((a, b));
        }
    }
    let sequences: Vec<WeightSequence> = if pairs.is_empty() {
        vec![WeightSequence::staircase(m, m_star(aut) + 1)]
    } else {
        pairs
            .iter()
            .map(|&(x, y)| separating_sequence(aut, x, y, m))
            .collect::<Result<_>>()?
    };

    let n = aut.point_count();
    let mut rho = MetricMatrix::zero(n);
    for (idx, mu) in sequences.iter().enumerate() {
        let d = dmu_exact(aut, mu)?;
        let weight = half_pow(idx);
        for x in 0..n {
            for y in 0..n {
                let v = rho.get(x, y) + &weight * d.get(x, y);
                rho.set(x, y, v);
            }
        }
    }
    if !rho.is_metric() {
        return Err(Error::Verification("rho is not a metric".into()));
    }
    if rho.max_entry() > rat_int(2) * m {
        return Err(Error::Verification("rho exceeds 2M".into()));
    }
    Ok(RhoMetric {
        matrix: rho,
        sequences,
        pairs,
    })
}

/// The geometrically weighted sum of the separating sequences, as a closed
/// form. Requires every summand to step per index with one common ratio
/// (which the pipeline's staircases do).
pub fn eta_sequence(sequences: &[WeightSequence]) -> Result<WeightSequence> {
    if sequences.is_empty() {
        return Err(Error::Precondition(
            "eta needs at least one sequence".into(),
        ));
    }
    if sequences.iter().any(|s| s.block_len() != 1) {
        return Err(Error::Precondition("eta requires per-index tails".into()));
    }
    let ratio = sequences[0].ratio().clone();
    if sequences.iter().any(|s| s.ratio() != &ratio) {
        return Err(Error::Precondition(
            "eta requires one common tail ratio".into(),
        ));
    }
    let len = sequences
        .iter()
        .map(|s| s.prefix().len())
        .max()
        .expect("nonempty");
    let prefix: Vec<Rat> = (0..len)
        .map(|k| {
            sequences
                .iter()
                .enumerate()
                .map(|(n, s)| half_pow(n) * s.value_at(k))
                .fold(Rat::zero(), |acc, v| acc + v)
        })
        .collect();
    WeightSequence::new(prefix, 1, ratio)
}

/// `delta = d^eta`, with the sandwich `rho <= delta <= 2M` verified.
pub fn delta_metric(
    aut: &MonoidAutomaton,
    eta: &WeightSequence,
    rho: &MetricMatrix,
    m: &Rat,
) -> Result<MetricMatrix> {
    let delta = dmu_exact(aut, eta)?;
    if !rho.le_entrywise(&delta) {
        return Err(Error::Verification("rho exceeds delta somewhere".into()));
    }
    if delta.max_entry() > rat_int(2) * m {
        return Err(Error::Verification("delta exceeds 2M".into()));
    }
    Ok(delta)
}

/// The supremum `d(x, y) = sup_w c_{|w|} delta(f_w(x), f_w(y))`, taken
/// exactly over monoid states: the scale is increasing, so each state
/// contributes `c` at its deepest realization, the limit scale when
/// unbounded.
pub fn final_metric(
    aut: &MonoidAutomaton,
    delta: &MetricMatrix,
    scale: &ScaleSequence,
) -> Result<MetricMatrix> {
    aut.require_attractor()?;
    let n = aut.point_count();
    let mut d = MetricMatrix::zero(n);
    for x in 0..n {
        for y in (x + 1)..n {
            let mut best = Rat::zero();
            for e in aut.elements() {
                let v = scale.c_at_depth(e.max_len) * delta.get(e.table[x], e.table[y]);
                if v > best {
                    best = v;
                }
            }
            d.set(x, y, best.clone());
            d.set(y, x, best);
        }
    }
    // The identity contributes c_0 delta = delta; nonexpansiveness caps the
    // rest at 2 delta.
    if !delta.le_entrywise(&d) {
        return Err(Error::Verification("d fell below delta".into()));
    }
    let two_delta = {
        let mut t = MetricMatrix::zero(n);
        for x in 0..n {
            for y in 0..n {
                t.set(x, y, rat_int(2) * delta.get(x, y));
            }
        }
        t
    };
    if !d.le_entrywise(&two_delta) {
        return Err(Error::Verification("d exceeds 2 delta".into()));
    }
    Ok(d)
}

/// Builds `phi` as the pointwise maximum of one comparison patch per realized
/// positive distance `r` of `d`: zero below the patch, slope
/// `c_{n_r} / c_{n_r + 1}` across `[r - rho_r, r + rho_r]`, constant beyond,
/// where `n_r` is the first index with `2 eta_n <= r / 20` and `rho_r` sits
/// at half its allowed supremum. The distance `4M` gets the wide `[2M, 4M]`
/// patch.
pub fn build_phi(
    d: &MetricMatrix,
    eta: &WeightSequence,
    scale: &ScaleSequence,
    m: &Rat,
) -> Result<ComparisonFunction> {
    let four_m = rat_int(4) * m;
    if d.max_entry() > four_m {
        return Err(Error::Precondition("d is not bounded by 4M".into()));
    }
    if !eta.limit().is_zero() {
        return Err(Error::Precondition("eta must vanish in the limit".into()));
    }
    let mut phi = ComparisonFunction::zero();
    for r in d.positive_values() {
        let threshold = &r / rat_int(20);
        let mut n_r = 0usize;
        while rat_int(2) * eta.value_at(n_r) > threshold {
            n_r += 1;
            if n_r > 1_000_000 {
                return Err(Error::Resource("n_r search exceeded its budget".into()));
            }
        }
        let slope = scale.c(n_r) / scale.c(n_r + 1);
        let (lower, upper) = if r < four_m {
            let rho_r = (&four_m - &r).min(&r / rat_int(2)) / rat_int(2);
            (&r - &rho_r, &r + &rho_r)
        } else {
            (rat_int(2) * m, four_m.clone())
        };
        if !(lower <= r && r <= upper) {
            return Err(Error::Verification(format!(
                "patch at {} does not cover its distance",
                rat_to_string(&r)
            )));
        }
        let patch = ComparisonFunction::new(vec![
            Piece {
                start: Rat::zero(),
                value: Rat::zero(),
                slope: Rat::zero(),
            },
            Piece {
                start: lower.clone(),
                value: &slope * &lower,
                slope: slope.clone(),
            },
            Piece {
                start: upper.clone(),
                value: &slope * &upper,
                slope: Rat::zero(),
            },
        ])?;
        phi = phi.max(&patch);
    }
    let report = phi.comparison_report();
    if !report.all_pass() {
        return Err(Error::Verification(format!(
            "phi violates the comparison axioms: {:?}",
            report.failures().collect::<Vec<_>>()
        )));
    }
    Ok(phi)
}

/// Everything the pipeline produced, with its verification report.
#[derive(Debug, Clone)]
pub struct RemetrizationCertificate {
    pub m: Rat,
    pub attractor_pairs: Vec<(usize, usize)>,
    pub mu_sequences: Vec<WeightSequence>,
    pub rho: MetricMatrix,
    pub eta: WeightSequence,
    pub delta: MetricMatrix,
    pub d: MetricMatrix,
    pub phi: ComparisonFunction,
    pub checks: SuiteReport,
}

impl RemetrizationCertificate {
    pub fn to_json(&self) -> Value {
        let mut checks = serde_json::Map::new();
        let mut counterexamples = serde_json::Map::new();
        for c in &self.checks.checks {
            checks.insert(c.id.clone(), Value::Bool(c.pass));
            if let Some(ce) = &c.counterexample {
                counterexamples.insert(c.id.clone(), Value::String(ce.clone()));
            }
        }
        json!({
            "M": rat_to_string(&self.m),
            "pairs": self.attractor_pairs,
            "mu": self.mu_sequences.iter().map(WeightSequence::to_json).collect::<Vec<_>>(),
            "rho": self.rho.to_json(),
            "eta": self.eta.to_json(),
            "delta": self.delta.to_json(),
            "d": self.d.to_json(),
            "phi": self.phi.to_json(),
            "checks": Value::Object(checks),
            "counterexamples": Value::Object(counterexamples),
        })
    }

    /// Breakpoint table of `phi` as CSV rows `t,value,slope`.
    pub fn phi_csv(&self) -> String {
        let mut out = String::from("t,value,slope\n");
        for p in self.phi.pieces() {
            out.push_str(&format!(
                "{},{},{}\n",
                rat_to_string(&p.start),
                rat_to_string(&p.value),
                rat_to_string(&p.slope)
            ));
        }
        out
    }
}

/// Runs the whole pipeline and verifies the result.
pub fn remetrize(
    aut: &MonoidAutomaton,
    m: &Rat,
    scale: &ScaleSequence,
) -> Result<RemetrizationCertificate> {
    aut.require_attractor()?;
    if !m.is_positive() {
        return Err(Error::Precondition("the bound M must be positive".into()));
    }
    let RhoMetric {
        matrix: rho,
        sequences: mu_sequences,
        pairs: attractor_pairs,
    } = rho_metric(aut, m)?;
    let eta = eta_sequence(&mu_sequences)?;
    let delta = delta_metric(aut, &eta, &rho, m)?;
    let d = final_metric(aut, &delta, scale)?;
    let phi = build_phi(&d, &eta, scale, m)?;
    let mut cert = RemetrizationCertificate {
        m: m.clone(),
        attractor_pairs,
        mu_sequences,
        rho,
        eta,
        delta,
        d,
        phi,
        checks: SuiteReport::new("certificate"),
    };
    cert.checks = verify_certificate(aut, &cert)?;
    Ok(cert)
}

/// Exhaustive certificate verification: metric axioms, bounds, the
/// delta-sandwich, the contraction inequality at every pair under every map,
/// the cylinder-diameter bound, the vanishing of phi iterates, the iterated
/// diameter bound along sampled words, and the fixed-point conclusion.
pub fn verify_certificate(
    aut: &MonoidAutomaton,
    cert: &RemetrizationCertificate,
) -> Result<SuiteReport> {
    aut.require_attractor()?;
    let n = aut.point_count();
    let d = &cert.d;
    let mut report = d.metric_axiom_report("certificate");

    let four_m = rat_int(4) * &cert.m;
    report.check("bounded-by-4M", d.max_entry() <= four_m, || {
        format!("max d = {}", rat_to_string(&d.max_entry()))
    });

    let mut bad = None;
    for x in 0..n {
        for y in 0..n {
            let dv = d.get(x, y);
            let lo = cert.delta.get(x, y);
            let hi = rat_int(2) * lo;
            if dv < lo || dv > &hi {
                bad.get_or_insert(format!("({x},{y})"));
            }
        }
    }
    report.check("delta-sandwich", bad.is_none(), || bad.clone().unwrap());

    report.check(
        "rho-below-delta",
        cert.rho.le_entrywise(&cert.delta),
        || "rho > delta somewhere".into(),
    );

    // The headline inequality: every map is a phi-contraction under d.
    let mut bad = None;
    for (mi, table) in aut.instance().maps.iter().enumerate() {
        for x in 0..n {
            for y in 0..n {
                let lhs = d.get(table[x], table[y]);
                let rhs = cert.phi.eval(d.get(x, y));
                if lhs > &rhs {
                    bad.get_or_insert(format!(
                        "map {}: d(f({x}), f({y})) = {} > phi(d({x},{y})) = {}",
                        mi + 1,
                        rat_to_string(lhs),
                        rat_to_string(&rhs)
                    ));
                }
            }
        }
    }
    report.check("phi-contraction", bad.is_none(), || bad.clone().unwrap());

    report.merge(cert.phi.comparison_report());

    // Cylinder diameters under d are bounded by twice the depth weight. Per
    // state, the binding case is its deepest realization; unbounded states
    // are singletons with zero diameter.
    let mut bad = None;
    for e in aut.elements() {
        let diam = set_diameter(d, &e.image);
        match e.max_len {
            Some(len) => {
                if diam > rat_int(2) * cert.eta.value_at(len) {
                    bad.get_or_insert(format!("state with image {:?} at depth {len}", e.image));
                }
            }
            None => {
                if !diam.is_zero() {
                    bad.get_or_insert(format!("unbounded state with image {:?}", e.image));
                }
            }
        }
    }
    report.check("cylinder-diameter-bound", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // Iterated diameter bound along sampled periodic words:
    // d(X_{[alpha]_n}) <= phi^[n](diam X).
    let mut bad = None;
    let whole: Vec<usize> = (0..n).collect();
    let diam_x = set_diameter(d, &whole);
    let stab = aut.stabilization_depth();
    for alpha in sample_periodic_words(aut.map_count() as u32, 1, 2) {
        let mut bound = diam_x.clone();
        let mut state = MonoidAutomaton::IDENTITY;
        for step in 0..=stab {
            let diam = set_diameter(d, &aut.element(state).image);
            if diam > bound {
                bad.get_or_insert(format!("alpha = {alpha}, depth {step}"));
            }
            state = aut.step(state, alpha.letter_at(step));
            bound = cert.phi.eval(&bound);
        }
    }
    report.check("iterated-diameter-bound", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // phi iterates vanish from any start: geometric domination plus a
    // leading zero patch.
    report.merge(cert.phi.vanishing_report());

    // Fixed-point conclusion per map: a unique fixed point that every
    // iteration reaches within the point count.
    let mut bad = None;
    for (mi, table) in aut.instance().maps.iter().enumerate() {
        let fixed: Vec<usize> = (0..n).filter(|&x| table[x] == x).collect();
        if fixed.len() != 1 {
            bad.get_or_insert(format!("map {} has fixed points {fixed:?}", mi + 1));
            continue;
        }
        for start in 0..n {
            let mut x = start;
            for _ in 0..n {
                x = table[x];
            }
            if x != fixed[0] {
                bad.get_or_insert(format!(
                    "map {}: iteration from {start} sits at {x}, not {}",
                    mi + 1,
                    fixed[0]
                ));
            }
        }
    }
    report.check("browder-fixed-points", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // Completeness needs no argument on a finite space.
    report.check("complete-finite-space", true, || unreachable!());

    Ok(report)
}

fn set_diameter(d: &MetricMatrix, set: &[usize]) -> Rat {
    let mut best = Rat::zero();
    for (i, &x) in set.iter().enumerate() {
        for &y in set.iter().skip(i + 1) {
            let v = d.get(x, y);
            if v > &best {
                best = v.clone();
            }
        }
    }
    best
}
