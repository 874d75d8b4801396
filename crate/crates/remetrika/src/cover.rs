//! Cylinder sets `X_w`, their limit parts `Y_w`, the extended cylinders, and
//! the executable suites for their structural properties.
//!
//! `Y_w` collects the attractor points whose own cylinder chains meet `X_w`
//! at every depth. On a finite instance each chain reaches its singleton at
//! finite depth, so membership reduces to the closed form `Y_w = A ∩ X_w` and
//! the extended cylinder `X_w ∪ Y_w` equals `X_w` itself. The truncated
//! original definition is kept around as the test oracle.

use crate::monoid::MonoidAutomaton;
use crate::report::SuiteReport;
use crate::words::{Letter, PeriodicWord, Word};
use crate::Result;

/// A cylinder set together with its limit part and extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedCylinder {
    pub word: Word,
    pub base: Vec<usize>,
    pub limit_part: Vec<usize>,
    pub extended: Vec<usize>,
}

/// `Y_w = A ∩ X_w`, exactly.
pub fn y_set(aut: &MonoidAutomaton, word: &Word) -> Result<Vec<usize>> {
    aut.check_alphabet(word.max_index())?;
    let attractor = &aut.attractor_info()?.attractor;
    let image = aut.image_of_word(word);
    Ok(intersection(attractor, &image))
}

/// The truncated original definition, the independent oracle for [`y_set`]:
/// addresses whose prefix cylinders meet `X_w` at every depth up to `depth`.
pub fn y_set_truncated(
    aut: &MonoidAutomaton,
    word: &Word,
    depth: usize,
    betas: &[PeriodicWord],
) -> Result<Vec<usize>> {
    aut.require_attractor()?;
    let image = aut.image_of_word(word);
    let mut out = Vec::new();
    for beta in betas {
        let meets_all = (0..=depth).all(|n| {
            let state = aut.prefix_state(beta, n);
            !intersection(&image, &aut.element(state).image).is_empty()
        });
        if meets_all {
            out.push(aut.evaluate_address(beta)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Assembles base, limit part and extension; on finite instances the
/// extension adds nothing.
pub fn x_tilde(aut: &MonoidAutomaton, word: &Word) -> Result<ExtendedCylinder> {
    let base = aut.image_of_word(word);
    let limit_part = y_set(aut, word)?;
    let extended = union(&base, &limit_part);
    debug_assert_eq!(
        extended, base,
        "limit parts are contained in the base cylinder"
    );
    Ok(ExtendedCylinder {
        word: word.clone(),
        base,
        limit_part,
        extended,
    })
}

/// All words over `{1..k}` of length up to `max_len`.
pub fn enumerate_words(k: u32, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|w| {
                (1..=k).map(move |i| {
                    let mut letters = w.letters().to_vec();
                    letters.push(Letter::new(i).expect("letters are 1-based"));
                    Word::new(letters)
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Canonical periodic words with preperiod length up to `pre` and period
/// length up to `per`, deduplicated.
pub fn sample_periodic_words(k: u32, pre: usize, per: usize) -> Vec<PeriodicWord> {
    let mut out: Vec<PeriodicWord> = Vec::new();
    for preword in enumerate_words(k, pre) {
        for perword in enumerate_words(k, per) {
            if perword.is_empty() {
                continue;
            }
            let candidate = PeriodicWord::new(preword.clone(), perword).expect("nonempty period");
            if !out.contains(&candidate) {
                out.push(candidate);
            }
        }
    }
    out
}

/// Executable checks for the structural properties of `X_w` and `Y_w`.
pub fn limit_set_suite(aut: &MonoidAutomaton, depth: usize) -> Result<SuiteReport> {
    let info = aut.attractor_info()?;
    let attractor = &info.attractor;
    let k = aut.map_count() as u32;
    let words = enumerate_words(k, depth);
    let samples = sample_periodic_words(k, 1, 2);
    let stab = aut.stabilization_depth();
    let mut report = SuiteReport::new("limit-sets");

    // a) f_w(A) ⊆ Y_w ⊆ A.
    let mut bad = None;
    for w in &words {
        let y = y_set(aut, w)?;
        let state = aut.state_of_word(w);
        let a_w: Vec<usize> = {
            let table = &aut.element(state).table;
            let mut v: Vec<usize> = attractor.iter().map(|&x| table[x]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        if !subset(&a_w, &y) || !subset(&y, attractor) {
            bad.get_or_insert(format!("word {w}"));
        }
    }
    report.check("a-limit-between-A_w-and-A", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // b) X_w ⊆ X~_w ⊆ X_w ∪ A.
    let mut bad = None;
    for w in &words {
        let cyl = x_tilde(aut, w)?;
        let with_a = union(&cyl.base, attractor);
        if !subset(&cyl.base, &cyl.extended) || !subset(&cyl.extended, &with_a) {
            bad.get_or_insert(format!("word {w}"));
        }
    }
    report.check("b-extension-bounds", bad.is_none(), || bad.clone().unwrap());

    // c) Y along prefixes of periodic words is nested downward.
    let mut bad = None;
    for alpha in &samples {
        for n in 0..depth {
            let outer = y_set(aut, &alpha.prefix(n))?;
            let inner = y_set(aut, &alpha.prefix(n + 1))?;
            if !subset(&inner, &outer) {
                bad.get_or_insert(format!("alpha = {alpha}, n = {n}"));
            }
        }
    }
    report.check("c-nested-limits", bad.is_none(), || bad.clone().unwrap());

    // d) intersection distributes over the union X ∪ Y at stabilization.
    // e) the nested limit sets collapse onto the address point.
    let mut bad_d = None;
    let mut bad_e = None;
    for alpha in &samples {
        let point = aut.evaluate_address(alpha)?;
        let mut meet_x: Option<Vec<usize>> = None;
        let mut meet_y: Option<Vec<usize>> = None;
        let mut meet_union: Option<Vec<usize>> = None;
        for n in 0..=stab {
            let prefix = alpha.prefix(n);
            let x = aut.image_of_word(&prefix);
            let y = y_set(aut, &prefix)?;
            let u = union(&x, &y);
            meet_x = Some(meet_x.map_or(x.clone(), |m| intersection(&m, &x)));
            meet_y = Some(meet_y.map_or(y.clone(), |m| intersection(&m, &y)));
            meet_union = Some(meet_union.map_or(u.clone(), |m| intersection(&m, &u)));
        }
        let (mx, my, mu) = (meet_x.unwrap(), meet_y.unwrap(), meet_union.unwrap());
        if mu != union(&mx, &my) {
            bad_d.get_or_insert(format!("alpha = {alpha}"));
        }
        if my != vec![point] {
            bad_e.get_or_insert(format!("alpha = {alpha}: got {my:?}, expected [{point}]"));
        }
    }
    report.check("d-intersection-distributes", bad_d.is_none(), || {
        bad_d.clone().unwrap()
    });
    report.check("e-limits-collapse-to-address", bad_e.is_none(), || {
        bad_e.clone().unwrap()
    });

    // f) A ∩ X_w ⊆ Y_w.
    let mut bad = None;
    for w in &words {
        let x = aut.image_of_word(w);
        let y = y_set(aut, w)?;
        if !subset(&intersection(attractor, &x), &y) {
            bad.get_or_insert(format!("word {w}"));
        }
    }
    report.check("f-attractor-part-is-limit", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // g) f_i(Y_w) ⊆ Y_{iw}.
    let mut bad = None;
    for w in &words {
        let y = y_set(aut, w)?;
        for i in 1..=k {
            let letter = Letter::new(i)?;
            let mut image: Vec<usize> =
                y.iter().map(|&x| aut.instance().apply(letter, x)).collect();
            image.sort_unstable();
            image.dedup();
            let mut shifted_letters = vec![letter];
            shifted_letters.extend_from_slice(w.letters());
            let shifted = y_set(aut, &Word::new(shifted_letters))?;
            if !subset(&image, &shifted) {
                bad.get_or_insert(format!("word {w}, letter {i}"));
            }
        }
    }
    report.check("g-equivariance", bad.is_none(), || bad.clone().unwrap());

    Ok(report)
}

/// Executable checks for the extended cylinders.
pub fn extended_cylinder_suite(aut: &MonoidAutomaton, depth: usize) -> Result<SuiteReport> {
    aut.require_attractor()?;
    let k = aut.map_count() as u32;
    let words = enumerate_words(k, depth);
    let samples = sample_periodic_words(k, 1, 2);
    let stab = aut.stabilization_depth();
    let mut report = SuiteReport::new("extended-cylinders");

    let tilde = |w: &Word| -> Result<Vec<usize>> { Ok(x_tilde(aut, w)?.extended) };

    // a) nesting along prefixes.
    let mut bad = None;
    for alpha in &samples {
        for n in 0..depth {
            let outer = tilde(&alpha.prefix(n))?;
            let inner = tilde(&alpha.prefix(n + 1))?;
            if !subset(&inner, &outer) {
                bad.get_or_insert(format!("alpha = {alpha}, n = {n}"));
            }
        }
    }
    report.check("a-nested", bad.is_none(), || bad.clone().unwrap());

    // b) the nested chain collapses onto the address point.
    let mut bad = None;
    for alpha in &samples {
        let point = aut.evaluate_address(alpha)?;
        let mut meet: Option<Vec<usize>> = None;
        for n in 0..=stab {
            let t = tilde(&alpha.prefix(n))?;
            meet = Some(meet.map_or(t.clone(), |m| intersection(&m, &t)));
        }
        let meet = meet.unwrap();
        if meet != vec![point] {
            bad.get_or_insert(format!("alpha = {alpha}: got {meet:?}, expected [{point}]"));
        }
    }
    report.check("b-collapse-to-address", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // c) persistent overlap with all prefixes pulls the address in.
    let mut bad = None;
    for w in &words {
        let x_w = aut.image_of_word(w);
        for beta in &samples {
            let meets_all = (0..=stab).all(|n| {
                let t = x_tilde(aut, &beta.prefix(n)).expect("gate checked");
                !intersection(&x_w, &t.extended).is_empty()
            });
            if meets_all {
                let point = aut.evaluate_address(beta)?;
                if !tilde(w)?.contains(&point) {
                    bad.get_or_insert(format!("word {w}, beta = {beta}"));
                }
            }
        }
    }
    report.check("c-persistent-overlap", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // d) distinct addresses have eventually disjoint extended cylinders.
    let mut bad = None;
    for (i, alpha) in samples.iter().enumerate() {
        for beta in samples.iter().skip(i + 1) {
            if aut.evaluate_address(alpha)? == aut.evaluate_address(beta)? {
                continue;
            }
            let n0 = aut.separation_witness(alpha, beta)?;
            let ta = tilde(&alpha.prefix(n0))?;
            let tb = tilde(&beta.prefix(n0))?;
            if !intersection(&ta, &tb).is_empty() {
                bad.get_or_insert(format!("alpha = {alpha}, beta = {beta}, n0 = {n0}"));
            }
        }
    }
    report.check("d-eventual-disjointness", bad.is_none(), || {
        bad.clone().unwrap()
    });

    // e) f_i(X~_w) ⊆ X~_{iw}.
    let mut bad = None;
    for w in &words {
        let t = tilde(w)?;
        for i in 1..=k {
            let letter = Letter::new(i)?;
            let mut image: Vec<usize> =
                t.iter().map(|&x| aut.instance().apply(letter, x)).collect();
            image.sort_unstable();
            image.dedup();
            let mut shifted_letters = vec![letter];
            shifted_letters.extend_from_slice(w.letters());
            let shifted = tilde(&Word::new(shifted_letters))?;
            if !subset(&image, &shifted) {
                bad.get_or_insert(format!("word {w}, letter {i}"));
            }
        }
    }
    report.check("e-equivariance", bad.is_none(), || bad.clone().unwrap());

    Ok(report)
}

pub(crate) fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.contains(x)).copied().collect()
}

pub(crate) fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub(crate) fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}
