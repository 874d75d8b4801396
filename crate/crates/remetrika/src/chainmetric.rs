//! Weight sequences and the chain semi-metric.
//!
//! A weight sequence is a positive nonincreasing `(z_n)` with a closed-form
//! tail. The chain semi-metric `d^mu(x, y)` is the infimum over chains of
//! pairwise-overlapping cylinder sets joining `x` to `y` of the sum of
//! depth-indexed weights. On finite instances the extended cylinders equal
//! the plain ones and chain validity depends only on the sets, so the
//! infimum decomposes: each set contributes its cheapest weight over
//! realizable depths, and the whole thing is a node-weighted shortest path
//! over the cylinder-overlap graph. Unbounded-depth sets are attractor
//! singletons and never help a chain (their neighbors already contain the
//! point), so the computed minimum is attained and exact.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::monoid::MonoidAutomaton;
use crate::ratio::{parse_rat, rat, rat_from_json, rat_pow, rat_to_string, Rat};
use crate::report::SuiteReport;
use crate::{Error, Result};

/// A positive nonincreasing sequence: explicit prefix `z_0 ... z_P`, then one
/// multiplication by `ratio` per block of `block_len` indices. `ratio = 1`
/// freezes the sequence at its last prefix value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    prefix: Vec<Rat>,
    block_len: usize,
    ratio: Rat,
}

impl WeightSequence {
    pub fn new(prefix: Vec<Rat>, block_len: usize, ratio: Rat) -> Result<WeightSequence> {
        if prefix.is_empty() {
            return Err(Error::Validation(
                "weight sequence needs at least z_0".into(),
            ));
        }
        if prefix.iter().any(|z| !z.is_positive()) {
            return Err(Error::Validation("weights must be positive".into()));
        }
        if prefix.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Validation("weights must be nonincreasing".into()));
        }
        if block_len == 0 {
            return Err(Error::Validation("block_len must be >= 1".into()));
        }
        if !ratio.is_positive() || ratio > Rat::one() {
            return Err(Error::Validation("ratio must lie in (0, 1]".into()));
        }
        Ok(WeightSequence {
            prefix,
            block_len,
            ratio,
        })
    }

    /// The constant sequence `z_n = m`.
    pub fn constant(m: Rat) -> Result<WeightSequence> {
        WeightSequence::new(vec![m], 1, Rat::one())
    }

    /// `z_n = r^n`.
    pub fn geometric(r: Rat) -> Result<WeightSequence> {
        WeightSequence::new(vec![Rat::one()], 1, r)
    }

    /// The separating staircase: `m` up to index `p1`, then halving once per
    /// index.
    pub fn staircase(m: &Rat, p1: usize) -> WeightSequence {
        WeightSequence::new(vec![m.clone(); p1 + 1], 1, rat(1, 2)).expect("staircase is valid")
    }

    /// `mu_N`: the sequence frozen at `z_N` beyond index `N`.
    pub fn freeze_after(&self, n: usize) -> WeightSequence {
        let prefix: Vec<Rat> = (0..=n).map(|i| self.value_at(i)).collect();
        WeightSequence::new(prefix, 1, Rat::one()).expect("freezing keeps validity")
    }

    /// `mu_{N,p}`: `z_n` up to `N`, then `z_N` for `p` more indices, then
    /// `z_N / 2` forever.
    pub fn freeze_then_halve(&self, n: usize, p: usize) -> WeightSequence {
        let mut prefix: Vec<Rat> = (0..=n).map(|i| self.value_at(i)).collect();
        let zn = self.value_at(n);
        for _ in 0..p {
            prefix.push(zn.clone());
        }
        prefix.push(zn / rat(2, 1));
        WeightSequence::new(prefix, 1, Rat::one()).expect("freeze-then-halve keeps validity")
    }

    pub fn value_at(&self, n: usize) -> Rat {
        let p = self.prefix.len() - 1;
        if n <= p {
            return self.prefix[n].clone();
        }
        let past = n - p;
        let blocks = past.div_ceil(self.block_len);
        self.prefix[p].clone() * rat_pow(&self.ratio, blocks)
    }

    /// `lim z_n`: the last prefix value for a frozen tail, zero otherwise.
    pub fn limit(&self) -> Rat {
        if self.ratio.is_one() {
            self.prefix.last().expect("prefix nonempty").clone()
        } else {
            Rat::zero()
        }
    }

    pub fn z0(&self) -> Rat {
        self.prefix[0].clone()
    }

    pub fn prefix(&self) -> &[Rat] {
        &self.prefix
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    pub fn is_constant(&self) -> bool {
        self.ratio.is_one() && self.prefix.iter().all(|z| z == &self.prefix[0])
    }

    /// Pointwise order `self ≺ other` checked on indices up to `bound` plus
    /// the limits.
    pub fn pointwise_le(&self, other: &WeightSequence, bound: usize) -> bool {
        (0..=bound).all(|n| self.value_at(n) <= other.value_at(n)) && self.limit() <= other.limit()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prefix": self.prefix.iter().map(rat_to_string).collect::<Vec<_>>(),
            "block_len": self.block_len,
            "ratio": rat_to_string(&self.ratio),
        })
    }

    pub fn from_json(value: &Value) -> Result<WeightSequence> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse("$", "expected a weight-sequence object"))?;
        let prefix_value = obj
            .get("prefix")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("$.prefix", "missing or not an array"))?;
        let mut prefix = Vec::with_capacity(prefix_value.len());
        for (i, v) in prefix_value.iter().enumerate() {
            prefix.push(rat_from_json(v, &format!("$.prefix[{i}]"))?);
        }
        let block_len = obj
            .get("block_len")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("$.block_len", "missing or not an integer"))?
            as usize;
        let ratio = rat_from_json(
            obj.get("ratio")
                .ok_or_else(|| Error::parse("$.ratio", "missing"))?,
            "$.ratio",
        )?;
        WeightSequence::new(prefix, block_len, ratio)
    }
}

/// A CLI-style specifier: `constant:M`, `geometric:r`, or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MuSpec {
    Constant(String),
    Geometric(String),
    File(String),
}

/// Splits a specifier without touching the filesystem.
pub fn parse_mu_spec(spec: &str) -> Result<MuSpec> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::parse("mu", format!("expected `kind:arg`, got {spec:?}")))?;
    match kind {
        "constant" => Ok(MuSpec::Constant(arg.to_string())),
        "geometric" => Ok(MuSpec::Geometric(arg.to_string())),
        "file" => Ok(MuSpec::File(arg.to_string())),
        other => Err(Error::parse(
            "mu",
            format!("unknown specifier kind {other:?}"),
        )),
    }
}

impl MuSpec {
    /// Builds the sequence, reading the file variant from disk.
    pub fn resolve(&self) -> Result<WeightSequence> {
        match self {
            MuSpec::Constant(arg) => {
                let m = parse_rat(arg)?;
                if !m.is_positive() {
                    return Err(Error::Validation("constant weight must be positive".into()));
                }
                WeightSequence::constant(m)
            }
            MuSpec::Geometric(arg) => WeightSequence::geometric(parse_rat(arg)?),
            MuSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::parse("mu", format!("cannot read {path:?}: {e}")))?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::parse("mu", format!("invalid JSON in {path:?}: {e}")))?;
                WeightSequence::from_json(&value)
            }
        }
    }
}

/// A symmetric rational distance table with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    n: usize,
    entries: Vec<Rat>,
}

impl MetricMatrix {
    pub fn zero(n: usize) -> MetricMatrix {
        MetricMatrix {
            n,
            entries: vec![Rat::zero(); n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> &Rat {
        &self.entries[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, v: Rat) {
        self.entries[x * self.n + y] = v;
    }

    pub fn max_entry(&self) -> Rat {
        self.entries.iter().max().cloned().unwrap_or_else(Rat::zero)
    }

    /// Distinct positive values, ascending.
    pub fn positive_values(&self) -> Vec<Rat> {
        let mut vals: Vec<Rat> = self
            .entries
            .iter()
            .filter(|v| v.is_positive())
            .cloned()
            .collect();
        vals.sort();
        vals.dedup();
        vals
    }

    pub fn le_entrywise(&self, other: &MetricMatrix) -> bool {
        self.n == other.n && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    /// Metric axioms; each failure carries a counterexample.
    pub fn metric_axiom_report(&self, name: &str) -> SuiteReport {
        let mut report = SuiteReport::new(name.to_string());
        let mut diag = None;
        let mut neg = None;
        let mut asym = None;
        let mut positivity = None;
        for x in 0..self.n {
            if !self.get(x, x).is_zero() {
                diag.get_or_insert(x);
            }
            for y in 0..self.n {
                if self.get(x, y).is_negative() {
                    neg.get_or_insert((x, y));
                }
                if self.get(x, y) != self.get(y, x) {
                    asym.get_or_insert((x, y));
                }
                if x != y && self.get(x, y).is_zero() {
                    positivity.get_or_insert((x, y));
                }
            }
        }
        report.check("zero-diagonal", diag.is_none(), || {
            format!("d({0},{0}) != 0", diag.unwrap())
        });
        report.check("nonnegative", neg.is_none(), || {
            let (x, y) = neg.unwrap();
            format!("d({x},{y}) = {}", rat_to_string(self.get(x, y)))
        });
        report.check("symmetric", asym.is_none(), || {
            let (x, y) = asym.unwrap();
            format!("d({x},{y}) != d({y},{x})")
        });
        report.check("positive-off-diagonal", positivity.is_none(), || {
            let (x, y) = positivity.unwrap();
            format!("d({x},{y}) = 0 with {x} != {y}")
        });
        let tri = self.triangle_counterexample();
        report.check("triangle-inequality", tri.is_none(), || {
            let (x, y, z) = tri.unwrap();
            format!(
                "d({x},{y}) = {} > d({x},{z}) + d({z},{y}) = {} + {}",
                rat_to_string(self.get(x, y)),
                rat_to_string(self.get(x, z)),
                rat_to_string(self.get(z, y))
            )
        });
        report
    }

    pub fn triangle_counterexample(&self) -> Option<(usize, usize, usize)> {
        for x in 0..self.n {
            for y in 0..self.n {
                for z in 0..self.n {
                    if self.get(x, y) > &(self.get(x, z) + self.get(z, y)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// True when all axioms including off-diagonal positivity hold.
    pub fn is_metric(&self) -> bool {
        self.metric_axiom_report("metric").all_pass()
    }

    /// Two-sided Hausdorff distance between nonempty point sets.
    pub fn hausdorff(&self, a: &[usize], b: &[usize]) -> Rat {
        assert!(
            !a.is_empty() && !b.is_empty(),
            "Hausdorff needs nonempty sets"
        );
        let one_sided = |from: &[usize], to: &[usize]| {
            from.iter()
                .map(|&x| {
                    to.iter()
                        .map(|&y| self.get(x, y).clone())
                        .min()
                        .expect("nonempty")
                })
                .max()
                .expect("nonempty")
        };
        one_sided(a, b).max(one_sided(b, a))
    }

    /// Rows of `p/q` entries joined with commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for x in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|y| rat_to_string(self.get(x, y))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.n)
                .map(|x| {
                    Value::Array(
                        (0..self.n)
                            .map(|y| Value::String(rat_to_string(self.get(x, y))))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// One node of the cylinder-overlap graph.
#[derive(Debug, Clone)]
pub struct ChainNode {
    pub subset: Vec<usize>,
    pub depth: Option<usize>,
    pub weight: Rat,
}

/// The cylinder-overlap graph: nodes are distinct cylinder sets weighted by
/// their cheapest realizable depth; edges join intersecting sets.
pub struct ChainGraph {
    pub nodes: Vec<ChainNode>,
    adj: Vec<Vec<usize>>,
    containing: Vec<Vec<usize>>,
}

impl ChainGraph {
    /// Full graph: every distinct cylinder set, weighted at its depth
    /// (`limit` for unbounded depth).
    pub fn build(aut: &MonoidAutomaton, mu: &WeightSequence) -> ChainGraph {
        let nodes: Vec<ChainNode> = aut
            .subset_profiles()
            .iter()
            .map(|p| ChainNode {
                subset: p.subset.clone(),
                depth: p.depth,
                weight: match p.depth {
                    Some(d) => mu.value_at(d),
                    None => mu.limit(),
                },
            })
            .collect();
        Self::finish(aut.point_count(), nodes)
    }

    /// Depth-truncated graph: only sets realizable by words of length at most
    /// `n`, each weighted at its deepest realization within the bound.
    pub fn build_truncated(aut: &MonoidAutomaton, mu: &WeightSequence, n: usize) -> ChainGraph {
        let layers = aut.realizable_lengths(n);
        let mut best: std::collections::BTreeMap<Vec<usize>, usize> = Default::default();
        for state in 0..aut.state_count() {
            for (len, layer) in layers.iter().enumerate() {
                if layer[state] {
                    let subset = aut.element(state).image.clone();
                    let entry = best.entry(subset).or_insert(len);
                    *entry = (*entry).max(len);
                }
            }
        }
        let nodes: Vec<ChainNode> = best
            .into_iter()
            .map(|(subset, depth)| ChainNode {
                subset,
                depth: Some(depth),
                weight: mu.value_at(depth),
            })
            .collect();
        Self::finish(aut.point_count(), nodes)
    }

    fn finish(points: usize, nodes: Vec<ChainNode>) -> ChainGraph {
        debug_assert!(
            nodes.iter().any(|n| n.subset.len() == points),
            "the whole-space node must be present"
        );
        let mut adj = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if intersects(&nodes[i].subset, &nodes[j].subset) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut containing = vec![Vec::new(); points];
        for (i, node) in nodes.iter().enumerate() {
            for &x in &node.subset {
                containing[x].push(i);
            }
        }
        ChainGraph {
            nodes,
            adj,
            containing,
        }
    }

    /// Drops unbounded-depth nodes; used to validate their removability.
    pub fn without_infinite_nodes(&self) -> ChainGraph {
        let keep: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].depth.is_some())
            .collect();
        let nodes: Vec<ChainNode> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let points = self.containing.len();
        Self::finish(points, nodes)
    }

    /// Cheapest chain cost from `x` to every point: Dijkstra where a path
    /// pays every node it visits.
    fn chain_distances(&self, x: usize) -> Vec<Option<Rat>> {
        let mut dist: Vec<Option<Rat>> = vec![None; self.nodes.len()];
        let mut heap: BinaryHeap<Reverse<(Rat, usize)>> = BinaryHeap::new();
        for &i in &self.containing[x] {
            let w = self.nodes[i].weight.clone();
            if dist[i].as_ref().is_none_or(|d| *d > w) {
                dist[i] = Some(w.clone());
                heap.push(Reverse((w, i)));
            }
        }
        while let Some(Reverse((cost, i))) = heap.pop() {
            if dist[i].as_ref() != Some(&cost) {
                continue;
            }
            for &j in &self.adj[i] {
                let next = &cost + &self.nodes[j].weight;
                if dist[j].as_ref().is_none_or(|d| *d > next) {
                    dist[j] = Some(next.clone());
                    heap.push(Reverse((next, j)));
                }
            }
        }
        let points = self.containing.len();
        (0..points)
            .map(|y| {
                self.containing[y]
                    .iter()
                    .filter_map(|&i| dist[i].clone())
                    .min()
            })
            .collect()
    }

    fn metric(&self) -> MetricMatrix {
        let points = self.containing.len();
        let mut m = MetricMatrix::zero(points);
        for x in 0..points {
            let row = self.chain_distances(x);
            for (y, entry) in row.into_iter().enumerate() {
                if x == y {
                    continue;
                }
                let v = entry.expect("the whole-space node joins all points");
                m.set(x, y, v);
            }
        }
        m
    }
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// The chain semi-metric `d^mu`, exactly.
pub fn dmu_exact(aut: &MonoidAutomaton, mu: &WeightSequence) -> Result<MetricMatrix> {
    aut.require_attractor()?;
    Ok(ChainGraph::build(aut, mu).metric())
}

/// `d^mu_N`: chains restricted to cylinders of words no longer than `n`.
pub fn dmu_truncated(aut: &MonoidAutomaton, mu: &WeightSequence, n: usize) -> Result<MetricMatrix> {
    aut.require_attractor()?;
    Ok(ChainGraph::build_truncated(aut, mu, n).metric())
}

/// Largest finite cylinder depth (`M*`); beyond it truncation changes
/// nothing.
pub fn m_star(aut: &MonoidAutomaton) -> usize {
    aut.subset_profiles()
        .iter()
        .filter_map(|p| p.depth)
        .max()
        .unwrap_or(0)
}

/// Exhaustive chain search, independent of the shortest-path reduction: words
/// are enumerated by direct table composition, chains by depth-first search
/// over sequences of distinct sets with branch-and-bound pruning.
pub fn brute_chain_oracle(
    aut: &MonoidAutomaton,
    mu: &WeightSequence,
    max_word_len: usize,
    max_chain_len: usize,
    x: usize,
    y: usize,
) -> Result<Rat> {
    aut.require_attractor()?;
    let inst = aut.instance();
    let n = inst.points;
    if x >= n || y >= n {
        return Err(Error::Precondition("point out of range".into()));
    }
    if x == y {
        return Ok(Rat::zero());
    }

    // All distinct cylinder sets of words up to the length bound, each with
    // the cheapest weight among its realizations.
    let mut frontier: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut cheapest: Vec<(Vec<usize>, Rat)> = Vec::new();
    for len in 0..=max_word_len {
        if len > 0 {
            frontier = frontier
                .iter()
                .flat_map(|t| {
                    inst.maps
                        .iter()
                        .map(move |m| (0..n).map(|p| t[m[p]]).collect::<Vec<usize>>())
                })
                .collect();
            frontier.sort();
            frontier.dedup();
        }
        let w = mu.value_at(len);
        for table in &frontier {
            let mut set = table.clone();
            set.sort_unstable();
            set.dedup();
            match cheapest.iter_mut().find(|(s, _)| s == &set) {
                Some((_, best)) => {
                    if *best > w {
                        *best = w.clone();
                    }
                }
                None => cheapest.push((set, w.clone())),
            }
        }
    }

    let sets: Vec<Vec<usize>> = cheapest.iter().map(|(s, _)| s.clone()).collect();
    let weights: Vec<Rat> = cheapest.iter().map(|(_, w)| w.clone()).collect();
    let mut search = ChainSearch {
        sets: &sets,
        weights: &weights,
        target: y,
        budget: 10_000_000,
        best: None,
    };
    let mut used = vec![false; sets.len()];
    for start in 0..sets.len() {
        if sets[start].binary_search(&x).is_err() {
            continue;
        }
        let cost = weights[start].clone();
        if search.best.as_ref().is_some_and(|b| cost >= *b) {
            continue;
        }
        used[start] = true;
        search.dfs(&mut used, start, cost, max_chain_len.saturating_sub(1))?;
        used[start] = false;
    }
    search.best.ok_or_else(|| {
        Error::Verification(format!(
            "no chain joins {x} and {y} within the given bounds"
        ))
    })
}

/// Depth-first enumeration of simple chains with branch-and-bound pruning.
struct ChainSearch<'a> {
    sets: &'a [Vec<usize>],
    weights: &'a [Rat],
    target: usize,
    budget: usize,
    best: Option<Rat>,
}

impl ChainSearch<'_> {
    fn dfs(
        &mut self,
        used: &mut [bool],
        current: usize,
        cost: Rat,
        remaining: usize,
    ) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Resource("brute chain search budget exceeded".into()));
        }
        self.budget -= 1;
        if self.sets[current].binary_search(&self.target).is_ok()
            && self.best.as_ref().is_none_or(|b| *b > cost)
        {
            self.best = Some(cost.clone());
        }
        if remaining == 0 {
            return Ok(());
        }
        for next in 0..self.sets.len() {
            if used[next] || !intersects(&self.sets[current], &self.sets[next]) {
                continue;
            }
            let next_cost = &cost + &self.weights[next];
            if self.best.as_ref().is_some_and(|b| next_cost >= *b) {
                continue;
            }
            used[next] = true;
            self.dfs(used, next, next_cost, remaining - 1)?;
            used[next] = false;
        }
        Ok(())
    }
}

/// The d^mu property suite: semi-metric axioms, the escape-depth lower bound,
/// nonexpansiveness, the z_0 bound, and metricity for constant sequences.
pub fn semi_metric_suite(aut: &MonoidAutomaton, mu: &WeightSequence) -> Result<SuiteReport> {
    let d = dmu_exact(aut, mu)?;
    let inst = aut.instance();
    let n = inst.points;
    let attractor = &aut.attractor_info()?.attractor;
    let mut report = SuiteReport::new("chain-semi-metric");

    let mut bad_diag = None;
    let mut bad_sym = None;
    let mut bad_tri = d.triangle_counterexample();
    for x in 0..n {
        if !d.get(x, x).is_zero() {
            bad_diag.get_or_insert(x);
        }
        for y in 0..n {
            if d.get(x, y) != d.get(y, x) {
                bad_sym.get_or_insert((x, y));
            }
        }
    }
    report.check("a-zero-diagonal", bad_diag.is_none(), || {
        format!("x = {}", bad_diag.unwrap())
    });
    report.check("b-symmetry", bad_sym.is_none(), || {
        format!("{:?}", bad_sym.unwrap())
    });
    report.check("c-triangle", bad_tri.is_none(), || {
        format!("{:?}", bad_tri.take().unwrap())
    });

    // d) off the attractor, the depth weight is a positive lower bound.
    let mut bad_lower = None;
    for x in 0..n {
        if attractor.contains(&x) {
            continue;
        }
        let m = aut
            .m_of_point(x)
            .expect("points off the attractor have finite depth");
        let bound = mu.value_at(m);
        if !bound.is_positive() {
            bad_lower.get_or_insert(format!("weight_at(m({x})) is not positive"));
        }
        for y in 0..n {
            if y != x && d.get(x, y) < &bound {
                bad_lower.get_or_insert(format!(
                    "d({x},{y}) = {} < z_m({x}) = {}",
                    rat_to_string(d.get(x, y)),
                    rat_to_string(&bound)
                ));
            }
        }
    }
    report.check("d-escape-lower-bound", bad_lower.is_none(), || {
        bad_lower.clone().unwrap()
    });

    // e) every map is nonexpansive.
    let mut bad_nonexp = None;
    for (m, table) in inst.maps.iter().enumerate() {
        for x in 0..n {
            for y in 0..n {
                if d.get(table[x], table[y]) > d.get(x, y) {
                    bad_nonexp.get_or_insert(format!(
                        "map {}: d(f({x}), f({y})) = {} > d({x},{y}) = {}",
                        m + 1,
                        rat_to_string(d.get(table[x], table[y])),
                        rat_to_string(d.get(x, y))
                    ));
                }
            }
        }
    }
    report.check("e-nonexpansive", bad_nonexp.is_none(), || {
        bad_nonexp.clone().unwrap()
    });

    // f) bounded by z_0.
    let z0 = mu.z0();
    let over = d.max_entry() > z0;
    report.check("f-bounded-by-z0", !over, || {
        format!(
            "max entry {} exceeds z_0 = {}",
            rat_to_string(&d.max_entry()),
            rat_to_string(&z0)
        )
    });

    // g) constant sequences give a genuine metric.
    if mu.is_constant() {
        let mut bad = None;
        for x in 0..n {
            for y in 0..n {
                if x != y && d.get(x, y).is_zero() {
                    bad.get_or_insert((x, y));
                }
            }
        }
        report.check("g-constant-implies-metric", bad.is_none(), || {
            format!("{:?}", bad.unwrap())
        });
    }
    Ok(report)
}

/// The truncation suite: the monotone chain, the exact identity
/// `d^mu_N = d^{mu_N}`, attained stabilization beyond `M*`, and the attained
/// `p`-limit for `mu_{N,p}`.
pub fn truncation_suite(
    aut: &MonoidAutomaton,
    mu: &WeightSequence,
    n_max: usize,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("truncation-limits");
    let exact = dmu_exact(aut, mu)?;
    let star = m_star(aut);

    let truncated: Vec<MetricMatrix> = (0..=n_max.max(star) + 1)
        .map(|n| dmu_truncated(aut, mu, n))
        .collect::<Result<_>>()?;

    // Truncations decrease entrywise toward the exact metric.
    let mut bad = None;
    for (n, pair) in truncated.windows(2).enumerate() {
        if !pair[1].le_entrywise(&pair[0]) {
            bad.get_or_insert(format!("d_{} > d_{}", n + 1, n));
        }
        if !exact.le_entrywise(&pair[0]) {
            bad.get_or_insert(format!("d^mu > d_{n}"));
        }
    }
    report.check("monotone-chain", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // Truncating the chains equals freezing the weights, exactly.
    let mut bad = None;
    for (n, t) in truncated.iter().enumerate().take(n_max + 1) {
        let frozen = dmu_exact(aut, &mu.freeze_after(n))?;
        if &frozen != t {
            bad.get_or_insert(format!("N = {n}"));
        }
    }
    report.check("truncation-identity", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // Beyond the deepest finite depth, truncation changes nothing.
    let mut bad = None;
    for (n, t) in truncated.iter().enumerate().skip(star) {
        if t != &exact {
            bad.get_or_insert(format!("N = {n} with M* = {star}"));
        }
    }
    report.check("stabilizes-at-deepest-depth", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // The freeze-then-halve family climbs with p and attains the frozen
    // metric once the halving point clears the deepest finite depth.
    let mut bad = None;
    for n in 0..=n_max.min(3) {
        let target = dmu_exact(aut, &mu.freeze_after(n))?;
        let p_star = star.saturating_sub(n);
        let mut prev: Option<MetricMatrix> = None;
        for p in 0..=p_star + 2 {
            let d = dmu_exact(aut, &mu.freeze_then_halve(n, p))?;
            if let Some(prev) = &prev {
                if !prev.le_entrywise(&d) {
                    bad.get_or_insert(format!("N = {n}: not nondecreasing at p = {p}"));
                }
            }
            if p >= p_star && d != target {
                bad.get_or_insert(format!("N = {n}, p = {p}: limit not attained"));
            }
            prev = Some(d);
        }
    }
    report.check("p-limit-attained", bad.is_none(), || {
        bad.clone().unwrap()
    });

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixture;
    use crate::monoid::{build_automaton, DEFAULT_STATE_CAP};

    fn aut(name: &str) -> MonoidAutomaton {
        build_automaton(&fixture(name).unwrap(), DEFAULT_STATE_CAP).unwrap()
    }

    fn geo_half() -> WeightSequence {
        WeightSequence::geometric(rat(1, 2)).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(geo_half().value_at(3), rat(1, 8));
        // mu_N freezes: with N = 2, index 5 still pays z_2.
        assert_eq!(geo_half().freeze_after(2).value_at(5), rat(1, 4));
        // mu_{N,p} halves once beyond N + p.
        assert_eq!(geo_half().freeze_then_halve(2, 3).value_at(6), rat(1, 8));
        assert_eq!(geo_half().freeze_then_halve(2, 3).value_at(5), rat(1, 4));
        assert_eq!(geo_half().limit(), rat(0, 1));
        assert_eq!(
            WeightSequence::constant(rat(3, 2)).unwrap().limit(),
            rat(3, 2)
        );
    }

    #[test]
    fn staircase_shape() {
        let s = WeightSequence::staircase(&rat(1, 1), 1);
        assert_eq!(s.value_at(0), rat(1, 1));
        assert_eq!(s.value_at(1), rat(1, 1));
        assert_eq!(s.value_at(2), rat(1, 2));
        assert_eq!(s.value_at(3), rat(1, 4));
        assert_eq!(s.limit(), rat(0, 1));
    }

    #[test]
    fn rejects_invalid_sequences() {
        assert!(WeightSequence::new(vec![], 1, rat(1, 2)).is_err());
        assert!(WeightSequence::new(vec![rat(0, 1)], 1, rat(1, 2)).is_err());
        assert!(WeightSequence::new(vec![rat(1, 2), rat(1, 1)], 1, rat(1, 2)).is_err());
        assert!(WeightSequence::new(vec![rat(1, 1)], 0, rat(1, 2)).is_err());
        assert!(WeightSequence::new(vec![rat(1, 1)], 1, rat(3, 2)).is_err());
        assert!(WeightSequence::geometric(rat(0, 1)).is_err());
    }

    #[test]
    fn mu_spec_round_trip() {
        assert_eq!(
            parse_mu_spec("constant:1").unwrap(),
            MuSpec::Constant("1".into())
        );
        assert_eq!(
            parse_mu_spec("geometric:1/2").unwrap(),
            MuSpec::Geometric("1/2".into())
        );
        assert_eq!(
            parse_mu_spec("file:/tmp/mu.json").unwrap(),
            MuSpec::File("/tmp/mu.json".into())
        );
        assert!(parse_mu_spec("geometric").is_err());
        assert!(parse_mu_spec("poisson:3").is_err());
        let mu = geo_half();
        assert_eq!(WeightSequence::from_json(&mu.to_json()).unwrap(), mu);
    }

    #[test]
    fn dmu_exact_t2() {
        let a = aut("T2");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        assert_eq!(d.get(0, 1), &rat(1, 2));
        assert_eq!(d.get(2, 3), &rat(1, 2));
        assert_eq!(d.get(0, 2), &rat(1, 1));
        assert_eq!(d.get(0, 3), &rat(1, 1));
        // Cross-check against the independent chain search.
        for x in 0..4 {
            for y in 0..4 {
                let brute = brute_chain_oracle(&a, &geo_half(), 4, 5, x, y).unwrap();
                assert_eq!(&brute, d.get(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn dmu_exact_t1_is_all_ones() {
        let a = aut("T1");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expect = if x == y { rat(0, 1) } else { rat(1, 1) };
                assert_eq!(d.get(x, y), &expect, "({x},{y})");
                let brute = brute_chain_oracle(&a, &geo_half(), 3, 4, x, y).unwrap();
                assert_eq!(brute, expect);
            }
        }
    }

    #[test]
    fn brute_oracle_pins() {
        assert_eq!(
            brute_chain_oracle(&aut("T2"), &geo_half(), 4, 5, 0, 1).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            brute_chain_oracle(&aut("T1"), &geo_half(), 3, 4, 0, 2).unwrap(),
            rat(1, 1)
        );
        assert_eq!(
            brute_chain_oracle(&aut("T5"), &geo_half(), 3, 4, 1, 2).unwrap(),
            rat(1, 1)
        );
    }

    #[test]
    fn dmu_truncated_examples() {
        let a = aut("T2");
        let d0 = dmu_truncated(&a, &geo_half(), 0).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let expect = if x == y { rat(0, 1) } else { rat(1, 1) };
                assert_eq!(d0.get(x, y), &expect);
            }
        }
        let d1 = dmu_truncated(&a, &geo_half(), 1).unwrap();
        assert_eq!(d1.get(0, 1), &rat(1, 2));

        let t5 = aut("T5");
        let d2 = dmu_truncated(&t5, &geo_half(), 2).unwrap();
        assert_eq!(d2.get(1, 2), &rat(1, 1));
        assert_eq!(d2.get(0, 1), &rat(1, 2));
        assert_eq!(d2.get(0, 2), &rat(1, 1));
    }

    #[test]
    fn t5_exact_matches_brute() {
        let a = aut("T5");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let brute = brute_chain_oracle(&a, &geo_half(), 6, 8, x, y).unwrap();
                assert_eq!(&brute, d.get(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn gate_is_enforced() {
        let a = aut("T3");
        assert!(matches!(
            dmu_exact(&a, &geo_half()),
            Err(Error::NoAttractor { .. })
        ));
    }

    #[test]
    fn semi_metric_suite_on_fixtures() {
        let mus = [
            WeightSequence::constant(rat(1, 1)).unwrap(),
            geo_half(),
            WeightSequence::geometric(rat(9, 10)).unwrap(),
        ];
        for name in ["T1", "T2", "T4", "T5"] {
            let a = aut(name);
            for mu in &mus {
                let report = semi_metric_suite(&a, mu).unwrap();
                assert!(
                    report.all_pass(),
                    "{name}: {:?}",
                    report.failures().collect::<Vec<_>>()
                );
            }
        }
        // Constant weights on T1: metric with all off-diagonal entries 1.
        let d = dmu_exact(&aut("T1"), &WeightSequence::constant(rat(1, 1)).unwrap()).unwrap();
        assert!(d.is_metric());
        assert_eq!(d.get(0, 1), &rat(1, 1));
    }

    #[test]
    fn escape_bound_tight_on_t5() {
        // d(2, 0) = 1 >= z_{m(2)} = z_0 = 1: the bound is tight at depth 0.
        let a = aut("T5");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        assert_eq!(a.m_of_point(2), Some(0));
        assert_eq!(d.get(2, 0), &geo_half().value_at(0));
    }

    #[test]
    fn truncation_suite_on_fixtures() {
        for (name, expected_mstar) in [("T1", 0), ("T2", 1), ("T5", 1)] {
            let a = aut(name);
            assert_eq!(m_star(&a), expected_mstar, "{name}");
            let report = truncation_suite(&a, &geo_half(), 4).unwrap();
            assert!(
                report.all_pass(),
                "{name}: {:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn mu_monotonicity_implies_metric_monotonicity() {
        let a = aut("T2");
        let lo = geo_half();
        let hi = WeightSequence::geometric(rat(9, 10)).unwrap();
        assert!(lo.pointwise_le(&hi, 64));
        let dlo = dmu_exact(&a, &lo).unwrap();
        let dhi = dmu_exact(&a, &hi).unwrap();
        assert!(dlo.le_entrywise(&dhi));
    }

    #[test]
    fn infinite_nodes_are_removable() {
        for name in ["T1", "T2", "T4", "T5"] {
            let a = aut(name);
            for mu in [geo_half(), WeightSequence::constant(rat(1, 1)).unwrap()] {
                let full = ChainGraph::build(&a, &mu);
                let trimmed = full.without_infinite_nodes();
                assert_eq!(full.metric(), trimmed.metric(), "{name}");
            }
        }
    }

    #[test]
    fn discreteness_bound() {
        // Off the attractor the nearest neighbor is at least the depth
        // weight away.
        for name in ["T1", "T2", "T4", "T5"] {
            let a = aut(name);
            let attractor = a.attractor_info().unwrap().attractor.clone();
            let d = dmu_exact(&a, &geo_half()).unwrap();
            for x in 0..a.point_count() {
                if attractor.contains(&x) {
                    continue;
                }
                let bound = geo_half().value_at(a.m_of_point(x).unwrap());
                let nearest = (0..a.point_count())
                    .filter(|&y| y != x)
                    .map(|y| d.get(x, y).clone())
                    .min()
                    .unwrap();
                assert!(nearest >= bound, "{name}: point {x}");
            }
        }
    }

    #[test]
    fn hausdorff_on_a_matrix() {
        let mut m = MetricMatrix::zero(3);
        for (x, y, v) in [(0, 1, rat(1, 2)), (0, 2, rat(1, 1)), (1, 2, rat(1, 1))] {
            m.set(x, y, v.clone());
            m.set(y, x, v);
        }
        assert_eq!(m.hausdorff(&[0], &[0, 1]), rat(1, 2));
        assert_eq!(m.hausdorff(&[0, 1], &[0, 1]), rat(0, 1));
        assert_eq!(m.hausdorff(&[2], &[0, 1]), rat(1, 1));
    }

    #[test]
    fn csv_shape() {
        let a = aut("T2");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        let csv = d.to_csv();
        let first: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(first, vec!["0", "1/2", "1", "1"]);
    }

    #[test]
    fn hutchinson_iteration_reaches_the_attractor() {
        let a = aut("T2");
        let d = dmu_exact(&a, &geo_half()).unwrap();
        let seq = a.hutchinson_sequence(&[0], &d).unwrap();
        let sets: Vec<&[usize]> = seq.iter().map(|(s, _)| s.as_slice()).collect();
        assert_eq!(sets, vec![&[0][..], &[0, 2][..], &[0, 1, 2, 3][..]]);
        assert!(seq.last().unwrap().1.is_zero());
        assert!(seq[0].1.is_positive());

        let t1 = aut("T1");
        let d = dmu_exact(&t1, &geo_half()).unwrap();
        let seq = t1.hutchinson_sequence(&[2], &d).unwrap();
        let sets: Vec<&[usize]> = seq.iter().map(|(s, _)| s.as_slice()).collect();
        assert_eq!(sets, vec![&[2][..], &[0, 1][..]]);
        assert!(seq.last().unwrap().1.is_zero());

        let t4 = aut("T4");
        let d = dmu_exact(&t4, &geo_half()).unwrap();
        let seq = t4.hutchinson_sequence(&[2], &d).unwrap();
        let sets: Vec<&[usize]> = seq.iter().map(|(s, _)| s.as_slice()).collect();
        assert_eq!(sets, vec![&[2][..], &[0, 1][..], &[0][..]]);
    }
}
