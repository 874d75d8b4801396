//! Finite and eventually periodic words over the alphabet `{1, ..., k}`, and
//! the code-space metric.
//!
//! `Word` is a finite word (possibly empty); `PeriodicWord` is the canonical
//! presentation `u(v)` of the infinite word `u v v v ...`. Canonical means the
//! period is primitive (not a power of a shorter word) and the preperiod is
//! minimal (its tail does not merge into the period), so structural equality
//! coincides with equality of the denoted infinite sequences.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::ratio::{rat_pow, Rat};
use crate::{Error, Result};

/// A 1-based alphabet symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u32);

impl Letter {
    pub fn new(index: u32) -> Result<Letter> {
        if index == 0 {
            return Err(Error::Validation(
                "letters are 1-based; 0 is not a letter".into(),
            ));
        }
        Ok(Letter(index))
    }

    /// 1-based index.
    pub fn index(self) -> u32 {
        self.0
    }

    /// 0-based index into an instance's map list.
    pub fn map_index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word; the empty word is written `λ` in diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    /// Builds a word from 1-based indices.
    pub fn from_indices(indices: &[u32]) -> Result<Word> {
        indices
            .iter()
            .map(|&i| Letter::new(i))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// First `n` letters. Errors when `n` exceeds the length.
    pub fn prefix(&self, n: usize) -> Result<Word> {
        if n > self.len() {
            return Err(Error::Precondition(format!(
                "prefix length {n} exceeds word length {}",
                self.len()
            )));
        }
        Ok(Word(self.0[..n].to_vec()))
    }

    /// Greatest letter index, or 0 for the empty word.
    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|l| l.0).max().unwrap_or(0)
    }

    /// Parses the serialization form: digits for single-digit alphabets
    /// (`"121"`), comma-separated integers otherwise (`"12,3,1"`). The empty
    /// string and `"λ"` denote the empty word.
    pub fn parse(s: &str) -> Result<Word> {
        if s.is_empty() || s == "λ" {
            return Ok(Word::empty());
        }
        let indices: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|part| {
                    part.parse::<u32>()
                        .map_err(|_| Error::parse("word", format!("bad letter {part:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10).ok_or_else(|| {
                        Error::parse("word", format!("bad letter {c:?} (non-digit)"))
                    })
                })
                .collect::<Result<_>>()?
        };
        Word::from_indices(&indices)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return Ok(());
        }
        if self.0.iter().all(|l| l.0 <= 9) {
            for l in &self.0 {
                write!(f, "{}", l.0)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.0.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// The canonical form `u(v)` of an eventually periodic infinite word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodicWord {
    preperiod: Word,
    period: Word,
}

impl PeriodicWord {
    /// Canonicalizes: the period is replaced by its primitive root, then the
    /// preperiod is shortened while its last letter equals the period's last
    /// letter (rotating the period right each time).
    pub fn new(preperiod: Word, period: Word) -> Result<PeriodicWord> {
        if period.is_empty() {
            return Err(Error::Validation("period must have length >= 1".into()));
        }
        let mut period = primitive_root(&period);
        let mut pre = preperiod.0;
        while let (Some(&pl), Some(&vl)) = (pre.last(), period.0.last()) {
            if pl != vl {
                break;
            }
            pre.pop();
            let last = period.0.pop().expect("period nonempty");
            period.0.insert(0, last);
        }
        Ok(PeriodicWord {
            preperiod: Word(pre),
            period,
        })
    }

    /// The purely periodic word `(v)`.
    pub fn periodic(period: Word) -> Result<PeriodicWord> {
        PeriodicWord::new(Word::empty(), period)
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn max_index(&self) -> u32 {
        self.preperiod.max_index().max(self.period.max_index())
    }

    /// The letter at 0-based position `n` of the infinite word.
    pub fn letter_at(&self, n: usize) -> Letter {
        if n < self.preperiod.len() {
            self.preperiod.0[n]
        } else {
            let off = (n - self.preperiod.len()) % self.period.len();
            self.period.0[off]
        }
    }

    /// First `n` letters as a finite word.
    pub fn prefix(&self, n: usize) -> Word {
        (0..n).map(|i| self.letter_at(i)).collect()
    }

    /// Prepends a single letter: `i · α`.
    pub fn shift(&self, i: Letter) -> PeriodicWord {
        let mut pre = Vec::with_capacity(self.preperiod.len() + 1);
        pre.push(i);
        pre.extend_from_slice(&self.preperiod.0);
        PeriodicWord::new(Word(pre), self.period.clone()).expect("period stays nonempty")
    }

    /// Prepends a finite word: `u · α`.
    pub fn concat_front(&self, u: &Word) -> PeriodicWord {
        PeriodicWord::new(u.concat(&self.preperiod), self.period.clone())
            .expect("period stays nonempty")
    }

    /// Parses the `u(v)` form, e.g. `"2(1)"`, `"(12)"`.
    pub fn parse(s: &str) -> Result<PeriodicWord> {
        let open = s
            .find('(')
            .ok_or_else(|| Error::parse("periodic word", format!("missing `(` in {s:?}")))?;
        if !s.ends_with(')') {
            return Err(Error::parse(
                "periodic word",
                format!("missing trailing `)` in {s:?}"),
            ));
        }
        let pre = Word::parse(&s[..open])?;
        let per = Word::parse(&s[open + 1..s.len() - 1])?;
        PeriodicWord::new(pre, per)
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.preperiod, self.period)
    }
}

/// Shortest word `w` with `v = w^m`.
fn primitive_root(v: &Word) -> Word {
    let n = v.len();
    for p in 1..=n {
        if !n.is_multiple_of(p) {
            continue;
        }
        if (p..n).all(|i| v.0[i] == v.0[i - p]) {
            return Word(v.0[..p].to_vec());
        }
    }
    v.clone()
}

/// Concatenation of two finite words (free-function form of [`Word::concat`]).
pub fn concat(u: &Word, v: &Word) -> Word {
    u.concat(v)
}

/// Concatenation of a finite word with an eventually periodic word.
pub fn concat_inf(u: &Word, alpha: &PeriodicWord) -> PeriodicWord {
    alpha.concat_front(u)
}

/// Code-space distance: the sum over positions `n >= 1` of `3^-n` for every
/// position where the two infinite words disagree. The mismatch indicator of
/// two eventually periodic words is eventually periodic, so the series has an
/// exact rational value.
pub fn code_distance(alpha: &PeriodicWord, beta: &PeriodicWord) -> Rat {
    let pre = alpha.preperiod.len().max(beta.preperiod.len());
    let cycle = alpha.period.len().lcm(&beta.period.len());
    let third = Rat::new(1.into(), 3.into());

    // Head: positions 1..=pre (0-based 0..pre).
    let mut head = Rat::zero();
    let mut w = third.clone();
    for n in 0..pre {
        if alpha.letter_at(n) != beta.letter_at(n) {
            head += &w;
        }
        w *= &third;
    }

    // One period of the tail, scaled by the geometric factor of repetition.
    let mut tail = Rat::zero();
    let mut v = third.clone();
    for j in 0..cycle {
        if alpha.letter_at(pre + j) != beta.letter_at(pre + j) {
            tail += &v;
        }
        v *= &third;
    }
    let scale = rat_pow(&third, pre);
    let repeat = Rat::one() / (Rat::one() - rat_pow(&third, cycle));
    head + scale * tail * repeat
}
