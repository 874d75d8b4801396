//! The transformation-monoid automaton of composed maps.
//!
//! States are the distinct composed maps `f_w` reachable from the identity;
//! the edge `g --i--> g . f_i` appends a letter on the right, so the state
//! reached by reading `w = w_1 ... w_n` left to right is `f_w` and its image
//! is the cylinder set `X_w`. Right-append is what makes images monotone
//! along prefixes: `X_{w i} = f_w(f_i(X)) ⊆ f_w(X) = X_w`.
//!
//! On top of the automaton this module decides the attractor property,
//! evaluates symbolic addresses, and computes the depth data every chain
//! metric is built from.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::OnceLock;

use crate::chainmetric::MetricMatrix;
use crate::instance::FiniteInstance;
use crate::ratio::Rat;
use crate::words::{Letter, PeriodicWord, Word};
use crate::{Error, Result};

/// Default cap on the number of monoid states; the worst case is `N^N`.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// One composed map, with the range of word lengths that realize it.
#[derive(Debug, Clone)]
pub struct MapElement {
    /// The composed function as an index table.
    pub table: Vec<usize>,
    /// Sorted distinct values of `table`: the cylinder set this state names.
    pub image: Vec<usize>,
    /// Shortest realizing word length (BFS layer).
    pub min_len: usize,
    /// Longest realizing word length; `None` when realizations are unbounded
    /// (the state is reachable through a repeated state).
    pub max_len: Option<usize>,
}

/// The right-Cayley graph of composed maps, plus cached analyses.
#[derive(Debug)]
pub struct MonoidAutomaton {
    instance: FiniteInstance,
    elements: Vec<MapElement>,
    /// `edges[state][letter - 1]` is the state of `g . f_letter`.
    edges: Vec<Vec<usize>>,
    condition_a: OnceLock<ConditionA>,
    attractor: OnceLock<Result<AttractorInfo>>,
    profiles: OnceLock<Vec<SubsetProfile>>,
}

/// Outcome of the condition a) check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionA {
    Holds,
    /// A lasso word whose prefix images never shrink to a singleton.
    Violated {
        lasso: PeriodicWord,
    },
}

/// Decision certificate: condition a), the derived condition b), and
/// spot checks of eventual disjointness on sampled word pairs.
#[derive(Debug, Clone)]
pub struct AttractorCertificate {
    pub has_attractor: bool,
    pub condition_a: ConditionA,
    /// `(alpha, beta, n0)` with disjoint depth-`n0` prefix images, for sampled
    /// pairs of period-1 words with distinct addresses.
    pub spot_checks: Vec<(PeriodicWord, PeriodicWord, usize)>,
}

/// The attractor with per-point escape depths and symbolic addresses.
#[derive(Debug, Clone)]
pub struct AttractorInfo {
    /// Sorted attractor point indices.
    pub attractor: Vec<usize>,
    /// `n(x)`: the last Hutchinson iterate containing `x`; `None` means the
    /// point never leaves (it belongs to the attractor).
    pub n_table: Vec<Option<usize>>,
    /// One eventually periodic address per attractor point.
    pub addresses: BTreeMap<usize, PeriodicWord>,
    /// Number of Hutchinson steps until the iteration of `X` stabilizes.
    pub iterations_to_fixpoint: usize,
}

/// A distinct cylinder set with its depth `m(S)`: the largest realizable word
/// length among states with this image (`None` = unbounded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetProfile {
    pub subset: Vec<usize>,
    pub depth: Option<usize>,
}

/// Breadth-first closure of the composed maps from the identity.
pub fn build_automaton(inst: &FiniteInstance, state_cap: usize) -> Result<MonoidAutomaton> {
    inst.validate()?;
    let n = inst.points;
    let k = inst.map_count();

    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut elements: Vec<MapElement> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();

    let identity: Vec<usize> = (0..n).collect();
    index.insert(identity.clone(), 0);
    elements.push(element_of(identity, 0));
    edges.push(vec![usize::MAX; k]);
    queue.push_back(0usize);

    while let Some(s) = queue.pop_front() {
        let layer = elements[s].min_len;
        for i in 0..k {
            // (g . f_i)(x) = g(f_i(x)); composing the tables the other way
            // round would break prefix-image monotonicity.
            let composed: Vec<usize> = (0..n).map(|x| elements[s].table[inst.maps[i][x]]).collect();
            let id = match index.get(&composed) {
                Some(&id) => id,
                None => {
                    let id = elements.len();
                    if id >= state_cap {
                        return Err(Error::Resource(format!(
                            "monoid state budget of {state_cap} states exceeded"
                        )));
                    }
                    index.insert(composed.clone(), id);
                    elements.push(element_of(composed, layer + 1));
                    edges.push(vec![usize::MAX; k]);
                    queue.push_back(id);
                    id
                }
            };
            edges[s][i] = id;
        }
    }

    let mut aut = MonoidAutomaton {
        instance: inst.clone(),
        elements,
        edges,
        condition_a: OnceLock::new(),
        attractor: OnceLock::new(),
        profiles: OnceLock::new(),
    };
    aut.fill_max_lengths();
    Ok(aut)
}

fn element_of(table: Vec<usize>, min_len: usize) -> MapElement {
    let mut image = table.clone();
    image.sort_unstable();
    image.dedup();
    MapElement {
        table,
        image,
        min_len,
        max_len: None,
    }
}

impl MonoidAutomaton {
    pub fn instance(&self) -> &FiniteInstance {
        &self.instance
    }

    pub fn point_count(&self) -> usize {
        self.instance.points
    }

    pub fn map_count(&self) -> usize {
        self.instance.map_count()
    }

    pub fn state_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, state: usize) -> &MapElement {
        &self.elements[state]
    }

    pub fn elements(&self) -> &[MapElement] {
        &self.elements
    }

    /// The identity state.
    pub const IDENTITY: usize = 0;

    pub fn step(&self, state: usize, letter: Letter) -> usize {
        self.edges[state][letter.map_index()]
    }

    /// The state of `f_w`.
    pub fn state_of_word(&self, w: &Word) -> usize {
        w.letters()
            .iter()
            .fold(Self::IDENTITY, |s, &l| self.step(s, l))
    }

    /// The cylinder set `X_w`.
    pub fn image_of_word(&self, w: &Word) -> Vec<usize> {
        self.elements[self.state_of_word(w)].image.clone()
    }

    /// State of the length-`n` prefix of an infinite word.
    pub fn prefix_state(&self, alpha: &PeriodicWord, n: usize) -> usize {
        (0..n).fold(Self::IDENTITY, |s, i| self.step(s, alpha.letter_at(i)))
    }

    /// Validates that every letter of a word names one of the instance maps.
    pub fn check_alphabet(&self, max_index: u32) -> Result<()> {
        if max_index as usize > self.map_count() {
            return Err(Error::Precondition(format!(
                "letter {max_index} exceeds the alphabet size {}",
                self.map_count()
            )));
        }
        Ok(())
    }

    /// States whose realizable word lengths are unbounded, and the longest
    /// realization for the rest.
    fn fill_max_lengths(&mut self) {
        let v = self.elements.len();
        let scc = tarjan_scc(v, &self.edges);
        let mut scc_size = vec![0usize; v];
        for &c in &scc {
            scc_size[c] += 1;
        }
        // A state lies on a cycle iff its SCC is nontrivial or it has a
        // self-loop; everything reachable from such a state has unbounded
        // realizations (pump the cycle).
        let mut unbounded = vec![false; v];
        let mut queue = VecDeque::new();
        for s in 0..v {
            let on_cycle = scc_size[scc[s]] >= 2 || self.edges[s].contains(&s);
            if on_cycle {
                unbounded[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &t in &self.edges[s] {
                if !unbounded[t] {
                    unbounded[t] = true;
                    queue.push_back(t);
                }
            }
        }
        // Longest path from the identity over the remaining acyclic part.
        let mut indeg = vec![0usize; v];
        for s in 0..v {
            if unbounded[s] {
                continue;
            }
            for &t in &self.edges[s] {
                if !unbounded[t] {
                    indeg[t] += 1;
                }
            }
        }
        let mut longest = vec![0usize; v];
        let mut topo: VecDeque<usize> =
            (0..v).filter(|&s| !unbounded[s] && indeg[s] == 0).collect();
        while let Some(s) = topo.pop_front() {
            for &t in &self.edges[s] {
                if unbounded[t] {
                    continue;
                }
                longest[t] = longest[t].max(longest[s] + 1);
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    topo.push_back(t);
                }
            }
        }
        for s in 0..v {
            self.elements[s].max_len = if unbounded[s] { None } else { Some(longest[s]) };
        }
    }

    /// Condition a): every infinite word's nested cylinder chain reaches a
    /// singleton. Holds iff no cycle exists among states with image size >= 2
    /// (image sizes only shrink along edges, so a never-shrinking word is
    /// exactly a lasso through such a cycle).
    pub fn check_condition_a(&self) -> &ConditionA {
        self.condition_a.get_or_init(|| {
            let v = self.state_count();
            let big: Vec<bool> = self.elements.iter().map(|e| e.image.len() >= 2).collect();
            // Cycles within the big-state subgraph, via SCCs of the full
            // graph: a cycle's states all share one image size, so any cycle
            // touching a big state stays big.
            let scc = tarjan_scc(v, &self.edges);
            let mut scc_size = vec![0usize; v];
            for &c in &scc {
                scc_size[c] += 1;
            }
            let mut witness_state = None;
            for s in 0..v {
                if !big[s] {
                    continue;
                }
                if scc_size[scc[s]] >= 2 || self.edges[s].contains(&s) {
                    witness_state = Some(s);
                    break;
                }
            }
            let Some(c) = witness_state else {
                return ConditionA::Holds;
            };

            // Access path id ->* c. Every state on it has image at least as
            // large as c's, so the whole lasso keeps image size >= 2.
            let access = self.bfs_word(Self::IDENTITY, c).expect("c is reachable");
            // Cycle word c ->+ c inside c's SCC (or the self-loop).
            let cycle = self.cycle_word(c, &scc).expect("c lies on a cycle");
            let lasso = PeriodicWord::new(access, cycle).expect("cycle word is nonempty");
            ConditionA::Violated { lasso }
        })
    }

    /// Shortest word driving `from` to `to`.
    fn bfs_word(&self, from: usize, to: usize) -> Option<Word> {
        if from == to {
            return Some(Word::empty());
        }
        let mut prev: Vec<Option<(usize, Letter)>> = vec![None; self.state_count()];
        let mut seen = vec![false; self.state_count()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            for (i, &t) in self.edges[s].iter().enumerate() {
                if seen[t] {
                    continue;
                }
                seen[t] = true;
                prev[t] = Some((s, Letter::new(i as u32 + 1).expect("letters are 1-based")));
                if t == to {
                    let mut letters = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let (p, l) = prev[cur].expect("path recorded");
                        letters.push(l);
                        cur = p;
                    }
                    letters.reverse();
                    return Some(Word::new(letters));
                }
                queue.push_back(t);
            }
        }
        None
    }

    /// Shortest nonempty word from `c` back to `c` staying inside `c`'s SCC.
    fn cycle_word(&self, c: usize, scc: &[usize]) -> Option<Word> {
        let target_comp = scc[c];
        let mut prev: Vec<Option<(usize, Letter)>> = vec![None; self.state_count()];
        let mut seen = vec![false; self.state_count()];
        let mut queue = VecDeque::new();
        for (i, &t) in self.edges[c].iter().enumerate() {
            let letter = Letter::new(i as u32 + 1).expect("letters are 1-based");
            if t == c {
                return Some(Word::new(vec![letter]));
            }
            if scc[t] == target_comp && !seen[t] {
                seen[t] = true;
                prev[t] = Some((c, letter));
                queue.push_back(t);
            }
        }
        while let Some(s) = queue.pop_front() {
            for (i, &t) in self.edges[s].iter().enumerate() {
                let letter = Letter::new(i as u32 + 1).expect("letters are 1-based");
                if t == c {
                    let mut letters = vec![letter];
                    let mut cur = s;
                    while cur != c {
                        let (p, l) = prev[cur].expect("path recorded");
                        letters.push(l);
                        cur = p;
                    }
                    letters.reverse();
                    return Some(Word::new(letters));
                }
                if scc[t] == target_comp && !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((s, letter));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Decides the attractor property. Condition b) follows from a) on finite
    /// instances: each decreasing cylinder chain reaches its singleton at
    /// finite depth, so distinct limits force eventually disjoint prefixes.
    /// The certificate records separation spot checks on all pairs of
    /// period-1 words.
    pub fn attractor_certificate(&self) -> AttractorCertificate {
        match self.check_condition_a() {
            ConditionA::Violated { lasso } => AttractorCertificate {
                has_attractor: false,
                condition_a: ConditionA::Violated {
                    lasso: lasso.clone(),
                },
                spot_checks: Vec::new(),
            },
            ConditionA::Holds => {
                let mut spot_checks = Vec::new();
                let k = self.map_count() as u32;
                for i in 1..=k {
                    for j in (i + 1)..=k {
                        let a = PeriodicWord::parse(&format!("({i})")).expect("valid word");
                        let b = PeriodicWord::parse(&format!("({j})")).expect("valid word");
                        let pa = self.evaluate_address(&a).expect("condition a holds");
                        let pb = self.evaluate_address(&b).expect("condition a holds");
                        if pa != pb {
                            let n0 = self
                                .separation_witness(&a, &b)
                                .expect("distinct addresses separate");
                            spot_checks.push((a, b, n0));
                        }
                    }
                }
                AttractorCertificate {
                    has_attractor: true,
                    condition_a: ConditionA::Holds,
                    spot_checks,
                }
            }
        }
    }

    /// True iff the family has an attractor.
    pub fn has_attractor(&self) -> bool {
        matches!(self.check_condition_a(), ConditionA::Holds)
    }

    pub fn require_attractor(&self) -> Result<()> {
        match self.check_condition_a() {
            ConditionA::Holds => Ok(()),
            ConditionA::Violated { lasso } => Err(Error::NoAttractor {
                lasso: Some(lasso.to_string()),
            }),
        }
    }

    /// The point `a_alpha` named by an eventually periodic address: iterate
    /// the period's composed map on its own image until the chain collapses,
    /// then apply the preperiod.
    pub fn evaluate_address(&self, alpha: &PeriodicWord) -> Result<usize> {
        self.check_alphabet(alpha.max_index())?;
        let period_state = self.state_of_word(alpha.period());
        let table = &self.elements[period_state].table;
        let mut set = self.elements[period_state].image.clone();
        for _ in 0..=self.state_count() {
            if set.len() == 1 {
                break;
            }
            let mut next: Vec<usize> = set.iter().map(|&x| table[x]).collect();
            next.sort_unstable();
            next.dedup();
            if next == set {
                break;
            }
            set = next;
        }
        if set.len() != 1 {
            return Err(Error::NoAttractor {
                lasso: Some(format!(
                    "image chain of ({}) stalls at {set:?}",
                    alpha.period()
                )),
            });
        }
        let mut point = set[0];
        for &l in alpha.preperiod().letters().iter().rev() {
            point = self.instance.apply(l, point);
        }
        Ok(point)
    }

    /// Attractor, escape depths `n(x)`, and one address per attractor point.
    pub fn attractor_info(&self) -> Result<&AttractorInfo> {
        self.attractor
            .get_or_init(|| {
                self.require_attractor()?;
                let n = self.point_count();
                // Decreasing Hutchinson iteration from the whole space.
                let mut n_table: Vec<Option<usize>> = vec![Some(0); n];
                let mut current: Vec<usize> = (0..n).collect();
                let mut steps = 0usize;
                loop {
                    let next = self.instance.hutchinson(&current);
                    if next == current {
                        break;
                    }
                    steps += 1;
                    for &x in &next {
                        n_table[x] = Some(steps);
                    }
                    current = next;
                }
                for &x in &current {
                    n_table[x] = None;
                }
                let attractor = current;

                let addresses = self.derive_addresses(&attractor)?;
                Ok(AttractorInfo {
                    attractor,
                    n_table,
                    addresses,
                    iterations_to_fixpoint: steps,
                })
            })
            .as_ref()
            .map_err(clone_error)
    }

    /// Backward chaining over the attractor: each point is some `f_i` image
    /// of an attractor point, so following preimages must close a cycle,
    /// yielding an eventually periodic address.
    fn derive_addresses(&self, attractor: &[usize]) -> Result<BTreeMap<usize, PeriodicWord>> {
        let mut out = BTreeMap::new();
        for &a in attractor {
            let mut chain = vec![a];
            let mut letters: Vec<Letter> = Vec::new();
            let (pre_len, cycle_len) = loop {
                let current = *chain.last().expect("chain is nonempty");
                let (letter, pred) = self.pick_preimage(current, attractor)?;
                letters.push(letter);
                if let Some(pos) = chain.iter().position(|&p| p == pred) {
                    break (pos, chain.len() - pos);
                }
                chain.push(pred);
            };
            let pre = Word::new(letters[..pre_len].to_vec());
            let period = Word::new(letters[pre_len..pre_len + cycle_len].to_vec());
            let address = PeriodicWord::new(pre, period)?;
            let check = self.evaluate_address(&address)?;
            if check != a {
                return Err(Error::Verification(format!(
                    "derived address {address} evaluates to {check}, expected {a}"
                )));
            }
            out.insert(a, address);
        }
        Ok(out)
    }

    /// A `(i, a')` with `f_i(a') = a` and `a'` in the attractor, preferring a
    /// self-loop so fixed points get purely periodic addresses.
    fn pick_preimage(&self, a: usize, attractor: &[usize]) -> Result<(Letter, usize)> {
        for (m, table) in self.instance.maps.iter().enumerate() {
            if table[a] == a {
                return Ok((Letter::new(m as u32 + 1)?, a));
            }
        }
        for (m, table) in self.instance.maps.iter().enumerate() {
            for &p in attractor {
                if table[p] == a {
                    return Ok((Letter::new(m as u32 + 1)?, p));
                }
            }
        }
        Err(Error::Verification(format!(
            "attractor point {a} has no preimage inside the attractor"
        )))
    }

    /// Distinct cylinder sets with their depths.
    pub fn subset_profiles(&self) -> &[SubsetProfile] {
        self.profiles.get_or_init(|| {
            let mut by_subset: BTreeMap<Vec<usize>, Option<usize>> = BTreeMap::new();
            for e in &self.elements {
                let entry = by_subset.entry(e.image.clone()).or_insert(Some(0));
                *entry = match (&entry, e.max_len) {
                    (None, _) | (_, None) => None,
                    (Some(cur), Some(new)) => Some(*cur.max(&new)),
                };
            }
            by_subset
                .into_iter()
                .map(|(subset, depth)| SubsetProfile { subset, depth })
                .collect()
        })
    }

    /// `m(x)`: the longest word depth whose cylinder still contains `x`
    /// (`None` = unbounded, which characterizes attractor points).
    pub fn m_of_point(&self, x: usize) -> Option<usize> {
        let mut best = Some(0);
        for p in self.subset_profiles() {
            if !p.subset.contains(&x) {
                continue;
            }
            best = match (best, p.depth) {
                (None, _) | (_, None) => None,
                (Some(a), Some(b)) => Some(a.max(b)),
            };
            if best.is_none() {
                break;
            }
        }
        best
    }

    /// First depth at which every word has a singleton image: one past the
    /// longest realization of any state with image size >= 2. Only meaningful
    /// under condition a).
    pub fn stabilization_depth(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| e.image.len() >= 2)
            .map(|e| e.max_len.map_or(usize::MAX, |l| l + 1))
            .max()
            .unwrap_or(0)
    }

    /// Least `n0` with disjoint depth-`n0` prefix images of two addresses.
    pub fn separation_witness(&self, alpha: &PeriodicWord, beta: &PeriodicWord) -> Result<usize> {
        self.require_attractor()?;
        let a = self.evaluate_address(alpha)?;
        let b = self.evaluate_address(beta)?;
        if a == b {
            return Err(Error::Precondition(format!(
                "addresses {alpha} and {beta} evaluate to the same point {a}"
            )));
        }
        let bound = self.stabilization_depth();
        let mut sa = Self::IDENTITY;
        let mut sb = Self::IDENTITY;
        for n in 0..=bound {
            if disjoint(&self.elements[sa].image, &self.elements[sb].image) {
                return Ok(n);
            }
            sa = self.step(sa, alpha.letter_at(n));
            sb = self.step(sb, beta.letter_at(n));
        }
        if disjoint(&self.elements[sa].image, &self.elements[sb].image) {
            return Ok(bound + 1);
        }
        Err(Error::Verification(format!(
            "prefix images of {alpha} and {beta} still meet at the stabilization depth"
        )))
    }

    /// Hutchinson iteration from `B`, with the Hausdorff distance to the
    /// attractor under the given metric at every step. The last reported
    /// distance is exactly zero.
    pub fn hutchinson_sequence(
        &self,
        start: &[usize],
        metric: &MetricMatrix,
    ) -> Result<Vec<(Vec<usize>, Rat)>> {
        if start.is_empty() {
            return Err(Error::Precondition(
                "the starting set must be nonempty".into(),
            ));
        }
        if let Some(&bad) = start.iter().find(|&&x| x >= self.point_count()) {
            return Err(Error::Precondition(format!(
                "start point {bad} out of range"
            )));
        }
        if metric.size() != self.point_count() {
            return Err(Error::Precondition(
                "metric size does not match the instance".into(),
            ));
        }
        let info = self.attractor_info()?;
        let mut set: Vec<usize> = start.to_vec();
        set.sort_unstable();
        set.dedup();
        let mut out = Vec::new();
        // Every length-n image with n at the stabilization depth is an
        // attractor singleton, so the iteration lands exactly on A by then.
        let cap = self.stabilization_depth() + 1;
        for _ in 0..=cap {
            let h = metric.hausdorff(&set, &info.attractor);
            let done = set == info.attractor;
            out.push((set.clone(), h));
            if done {
                return Ok(out);
            }
            set = self.instance.hutchinson(&set);
        }
        Err(Error::Verification(
            "Hutchinson iteration did not reach the attractor at the stabilization depth".into(),
        ))
    }

    /// `realizable[l][s]`: some length-`l` word reaches state `s`. Computed
    /// to `bound` inclusive.
    pub(crate) fn realizable_lengths(&self, bound: usize) -> Vec<Vec<bool>> {
        let v = self.state_count();
        let mut layers = Vec::with_capacity(bound + 1);
        let mut current = vec![false; v];
        current[Self::IDENTITY] = true;
        layers.push(current.clone());
        for _ in 0..bound {
            let mut next = vec![false; v];
            for (s, _) in current.iter().enumerate().filter(|(_, live)| **live) {
                for &t in &self.edges[s] {
                    next[t] = true;
                }
            }
            layers.push(next.clone());
            current = next;
        }
        layers
    }
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    // Both sorted.
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Parse { path, message } => Error::Parse {
            path: path.clone(),
            message: message.clone(),
        },
        Error::Validation(m) => Error::Validation(m.clone()),
        Error::Precondition(m) => Error::Precondition(m.clone()),
        Error::NoAttractor { lasso } => Error::NoAttractor {
            lasso: lasso.clone(),
        },
        Error::Resource(m) => Error::Resource(m.clone()),
        Error::Verification(m) => Error::Verification(m.clone()),
    }
}

/// Iterative Tarjan: returns a component id per node.
fn tarjan_scc(n: usize, edges: &[Vec<usize>]) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut comp = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut next_comp = 0usize;
    // Explicit DFS stack of (node, next edge position).
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("stack holds the component");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}
