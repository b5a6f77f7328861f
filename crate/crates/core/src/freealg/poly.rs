use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{Field, Scalar};

/// A monomial: generator indices in product order. The empty word is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn one() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: usize) -> Self {
        Word(vec![i as u32])
    }

    pub fn from_letters<I: IntoIterator<Item = usize>>(letters: I) -> Self {
        Word(letters.into_iter().map(|l| l as u32).collect())
    }

    pub fn letters(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn raw(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    /// First position where `pattern` occurs as a contiguous subword.
    pub fn find(&self, pattern: &Word) -> Option<usize> {
        if pattern.0.is_empty() {
            return Some(0);
        }
        self.0.windows(pattern.0.len()).position(|w| w == pattern.0.as_slice())
    }

    pub fn map_letters(&self, f: impl Fn(usize) -> usize) -> Word {
        Word(self.0.iter().map(|&l| f(l as usize) as u32).collect())
    }

    /// Every word of length exactly `len` over `n` letters, in lex order.
    pub fn all_of_length(n: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::one()];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|w| (0..n).map(move |l| w.concat(&Word::letter(l))))
                .collect();
        }
        out
    }
}

/// Degree-lexicographic: shorter words first, ties broken letter by letter.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A noncommutative polynomial in canonical form: no stored zero coefficient.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NcPoly {
    terms: BTreeMap<Word, Scalar>,
}

impl fmt::Debug for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..=self.max_letter().unwrap_or(0)).map(|i| format!("x{i}")).collect();
        write!(f, "NcPoly({})", self.format(&names))
    }
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(Word::one(), c)
    }

    pub fn one(field: Field) -> Self {
        Self::constant(field.one())
    }

    pub fn var(i: usize, field: Field) -> Self {
        Self::monomial(Word::letter(i), field.one())
    }

    pub fn monomial(w: Word, c: Scalar) -> Self {
        let mut p = NcPoly::zero();
        p.add_term(w, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` encodes the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::len)
    }

    pub fn leading(&self) -> Option<(&Word, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Scalar> {
        self.terms.values()
    }

    pub fn coefficient(&self, w: &Word) -> Option<&Scalar> {
        self.terms.get(w)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn field(&self) -> Option<Field> {
        self.terms.values().next().map(Scalar::field)
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.terms.keys().flat_map(|w| w.letters()).max()
    }

    /// Adds `c·w`, keeping the canonical form.
    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(old) => {
                let sum = &*old + &c;
                if sum.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(Word, Scalar)> {
        self.terms.pop_last()
    }

    pub fn scale(&self, c: &Scalar) -> NcPoly {
        if c.is_zero() {
            return NcPoly::zero();
        }
        NcPoly {
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a * c)).collect(),
        }
    }

    /// Leading coefficient normalised to one.
    pub fn monic(&self) -> NcPoly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
            None => NcPoly::zero(),
        }
    }

    /// `u · self · v` for words `u`, `v`.
    pub fn sandwich(&self, u: &Word, v: &Word) -> NcPoly {
        NcPoly {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (u.concat(w).concat(v), c.clone()))
                .collect(),
        }
    }

    pub fn map_letters(&self, f: impl Fn(usize) -> usize) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.map_letters(&f), c.clone());
        }
        out
    }

    /// Unital algebra map `x_i -> images[i]`; panics on a letter without image.
    pub fn substitute(&self, images: &[NcPoly]) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            let mut acc = NcPoly::constant(c.clone());
            for l in w.letters() {
                if acc.is_zero() {
                    break;
                }
                acc = &acc * &images[l];
            }
            out = &out + &acc;
        }
        out
    }

    /// Evaluates with commuting scalar values for the letters.
    pub fn eval_scalars(&self, values: &[Scalar], field: Field) -> Scalar {
        let mut acc = field.zero();
        for (w, c) in &self.terms {
            let mut t = c.clone();
            for l in w.letters() {
                t = &t * &values[l];
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in self.terms.iter().rev().enumerate() {
            let (neg, mag) = c.split_sign();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let word: Vec<&str> = w.letters().map(|l| names[l].as_str()).collect();
            if w.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&word.join("*"));
            } else {
                out.push_str(&format!("{}*{}", mag, word.join("*")));
            }
        }
        out
    }
}

impl<'a> Add<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;
    fn add(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;
    fn sub(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;
    fn mul(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = NcPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out
    }
}

impl Neg for &NcPoly {
    type Output = NcPoly;
    fn neg(self) -> NcPoly {
        NcPoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}
