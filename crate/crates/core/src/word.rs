//! Freely reduced words in the free group on `a`, `b`.
//!
//! Words are stored run-length encoded by syllables (generator plus a
//! nonzero exponent, adjacent syllables on different generators). Text
//! syntax is `a`, `A` (= a⁻¹), `b`, `B` (= b⁻¹), optionally followed by
//! `^n` on input; the identity prints as `1`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseWordError;

/// One of the two free generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    A,
    B,
}

impl Gen {
    pub fn other(self) -> Gen {
        match self {
            Gen::A => Gen::B,
            Gen::B => Gen::A,
        }
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    pub const A: Letter = Letter { gen: Gen::A, inverse: false };
    pub const A_INV: Letter = Letter { gen: Gen::A, inverse: true };
    pub const B: Letter = Letter { gen: Gen::B, inverse: false };
    pub const B_INV: Letter = Letter { gen: Gen::B, inverse: true };

    pub fn new(gen: Gen, sign: i32) -> Letter {
        Letter { gen, inverse: sign < 0 }
    }

    pub fn sign(self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    /// Position in the fixed letter order a < a⁻¹ < b < b⁻¹.
    pub fn rank(self) -> u8 {
        match (self.gen, self.inverse) {
            (Gen::A, false) => 0,
            (Gen::A, true) => 1,
            (Gen::B, false) => 2,
            (Gen::B, true) => 3,
        }
    }

    pub fn to_char(self) -> char {
        match (self.gen, self.inverse) {
            (Gen::A, false) => 'a',
            (Gen::A, true) => 'A',
            (Gen::B, false) => 'b',
            (Gen::B, true) => 'B',
        }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

/// A maximal power of one generator inside a reduced word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub gen: Gen,
    pub exp: i32,
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn a() -> Word {
        Word::power(Gen::A, 1)
    }

    pub fn b() -> Word {
        Word::power(Gen::B, 1)
    }

    pub fn power(gen: Gen, exp: i32) -> Word {
        let mut w = Word::identity();
        w.push_syllable(gen, exp);
        w
    }

    pub fn letter(l: Letter) -> Word {
        Word::power(l.gen, l.sign())
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
        let mut w = Word::identity();
        for l in raw {
            w.push_syllable(l.gen, l.sign());
        }
        w
    }

    pub fn from_syllables<I: IntoIterator<Item = (Gen, i32)>>(syllables: I) -> Word {
        let mut w = Word::identity();
        for (g, e) in syllables {
            w.push_syllable(g, e);
        }
        w
    }

    fn push_syllable(&mut self, gen: Gen, exp: i32) {
        if exp == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += exp;
                if last.exp == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push(Syllable { gen, exp }),
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syllables
            .iter()
            .flat_map(|s| std::iter::repeat_n(Letter::new(s.gen, s.exp.signum()), s.exp.unsigned_abs() as usize))
    }

    pub fn to_letters(&self) -> Vec<Letter> {
        self.letters().collect()
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.syllables.first().map(|s| Letter::new(s.gen, s.exp.signum()))
    }

    pub fn last_letter(&self) -> Option<Letter> {
        self.syllables.last().map(|s| Letter::new(s.gen, s.exp.signum()))
    }

    /// Returns the single letter if the word has length one.
    pub fn as_letter(&self) -> Option<Letter> {
        match self.syllables.as_slice() {
            [s] if s.exp.abs() == 1 => Some(Letter::new(s.gen, s.exp)),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push_syllable(s.gen, s.exp);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word { syllables: self.syllables.iter().rev().map(|s| Syllable { gen: s.gen, exp: -s.exp }).collect() }
    }

    pub fn pow(&self, n: i32) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..n.unsigned_abs() {
            w = w.mul(&base);
        }
        w
    }

    /// `g⁻¹ · self · g`.
    pub fn conjugate(&self, g: &Word) -> Word {
        g.inverse().mul(self).mul(g)
    }

    /// Commutator `u⁻¹ v⁻¹ u v`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.inverse().mul(&v.inverse()).mul(u).mul(v)
    }

    /// Returns the cyclically reduced core and a witness `g` with
    /// `self == core.conjugate(g)`.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let letters = self.to_letters();
        let (mut i, mut j) = (0usize, letters.len());
        while j >= i + 2 && letters[i] == letters[j - 1].inv() {
            i += 1;
            j -= 1;
        }
        let prefix = Word::reduce(letters[..i].iter().copied());
        let core = CyclicWord::from_letters(letters[i..j].to_vec());
        (core, prefix.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first_letter(), self.last_letter()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inv(),
            _ => true,
        }
    }

    /// Exponent sum of a single generator.
    pub fn exponent_sum(&self, gen: Gen) -> i64 {
        self.syllables.iter().filter(|s| s.gen == gen).map(|s| s.exp as i64).sum()
    }

    /// Number of `a`-letters (the a-length).
    pub fn a_length(&self) -> usize {
        self.syllables.iter().filter(|s| s.gen == Gen::A).map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    /// Drops a leading power of `b`.
    pub fn strip_leading_b(&self) -> Word {
        match self.syllables.first() {
            Some(s) if s.gen == Gen::B => Word { syllables: self.syllables[1..].to_vec() },
            _ => self.clone(),
        }
    }

    /// Image under the substitution `a ↦ image_a`, `b ↦ image_b`.
    pub fn substitute(&self, image_a: &Word, image_b: &Word) -> Word {
        let mut out = Word::identity();
        for s in &self.syllables {
            let base = match s.gen {
                Gen::A => image_a,
                Gen::B => image_b,
            };
            out = out.mul(&base.pow(s.exp));
        }
        out
    }
}

/// Shortlex order: shorter words first, then letterwise with a < a⁻¹ < b < b⁻¹.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "1" || trimmed == "e" || trimmed == "ε" {
            return Ok(Word::identity());
        }
        let mut w = Word::identity();
        let mut chars = trimmed.char_indices().peekable();
        while let Some((pos, c)) = chars.next() {
            let letter = match c {
                'a' => Letter::A,
                'A' => Letter::A_INV,
                'b' => Letter::B,
                'B' => Letter::B_INV,
                c if c.is_whitespace() => continue,
                other => return Err(ParseWordError::UnexpectedChar { ch: other, pos }),
            };
            let mut exp: i64 = 1;
            if let Some(&(caret, '^')) = chars.peek() {
                chars.next();
                let mut digits = String::new();
                if let Some(&(_, sign @ ('-' | '+'))) = chars.peek() {
                    digits.push(sign);
                    chars.next();
                }
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                exp = digits.parse::<i64>().map_err(|_| ParseWordError::BadExponent { pos: caret })?;
                if exp.abs() > MAX_PARSED_EXPONENT {
                    return Err(ParseWordError::ExponentTooLarge { pos: caret });
                }
            }
            w.push_syllable(letter.gen, letter.sign() * exp as i32);
            if w.len() > MAX_PARSED_LENGTH {
                return Err(ParseWordError::TooLong);
            }
        }
        Ok(w)
    }
}

/// Bound on a single `^n` exponent accepted by the parser.
impl TryFrom<String> for Word {
    type Error = ParseWordError;
    fn try_from(s: String) -> Result<Self, ParseWordError> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

pub const MAX_PARSED_EXPONENT: i64 = 1 << 16;
/// Bound on the reduced length of a parsed word.
pub const MAX_PARSED_LENGTH: usize = 1 << 20;

/// A cyclically reduced word taken up to rotation.
///
/// The letters keep the rotation they were created with; equality and
/// hashing use the least rotation.
#[derive(Clone)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// Panics in debug builds if the letters are not cyclically reduced.
    pub fn from_letters(letters: Vec<Letter>) -> CyclicWord {
        debug_assert!(Word::reduce(letters.iter().copied()).len() == letters.len());
        debug_assert!(letters.len() < 2 || letters[0] != letters[letters.len() - 1].inv(), "not cyclically reduced");
        CyclicWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word::reduce(self.letters.iter().copied())
    }

    pub fn rotate(&self, r: usize) -> CyclicWord {
        let n = self.letters.len();
        if n == 0 {
            return self.clone();
        }
        let r = r % n;
        let mut v = self.letters[r..].to_vec();
        v.extend_from_slice(&self.letters[..r]);
        CyclicWord { letters: v }
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    /// Least rotation in the letter order.
    pub fn min_rotation(&self) -> Vec<Letter> {
        (0..self.letters.len().max(1))
            .map(|r| self.rotate(r).letters)
            .min_by(|x, y| x.iter().map(|l| l.rank()).cmp(y.iter().map(|l| l.rank())))
            .unwrap_or_default()
    }

    /// Rotation offset `r` with `self.rotate(r) == other` letterwise.
    pub fn rotation_to(&self, other: &CyclicWord) -> Option<usize> {
        if self.len() != other.len() {
            return None;
        }
        if self.is_empty() {
            return Some(0);
        }
        (0..self.len()).find(|&r| self.rotate(r).letters == other.letters)
    }

    /// Syllables read cyclically, starting at a generator boundary.
    /// Returns pairs `(gen, exp)`; a single-generator word yields one syllable.
    pub fn cyclic_syllables(&self) -> Vec<(Gen, i32)> {
        let n = self.letters.len();
        if n == 0 {
            return Vec::new();
        }
        let start = (0..n).find(|&i| self.letters[i].gen != self.letters[(i + n - 1) % n].gen);
        let Some(start) = start else {
            let sign = self.letters[0].sign();
            return vec![(self.letters[0].gen, sign * n as i32)];
        };
        let rotated = self.rotate(start);
        rotated.to_word().syllables().iter().map(|s| (s.gen, s.exp)).collect()
    }
}

impl PartialEq for CyclicWord {
    fn eq(&self, other: &Self) -> bool {
        self.rotation_to(other).is_some()
    }
}

impl Eq for CyclicWord {}

impl Hash for CyclicWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for l in self.min_rotation() {
            l.rank().hash(state);
        }
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_word())
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord{self}")
    }
}

/// True iff `u` and `v` are conjugate in F₂.
pub fn conjugacy_equal(u: &Word, v: &Word) -> bool {
    u.cyclic_reduce().0 == v.cyclic_reduce().0
}

/// Key identifying the conjugacy class of `⟨u⟩`: the least rotation of
/// the cyclic core or of its inverse.
pub fn class_key(u: &Word) -> Vec<Letter> {
    let core = u.cyclic_reduce().0;
    let fwd = core.min_rotation();
    let bwd = core.inverse().min_rotation();
    if Word::reduce(bwd.iter().copied()) < Word::reduce(fwd.iter().copied()) {
        bwd
    } else {
        fwd
    }
}

/// Some `t` with `v == u.conjugate(t)`, if `u` and `v` are conjugate.
pub fn conjugator(u: &Word, v: &Word) -> Option<Word> {
    let (cu, gu) = u.cyclic_reduce();
    let (cv, gv) = v.cyclic_reduce();
    let r = cu.rotation_to(&cv)?;
    // cu = P Q with |P| = r, cv = Q P = cu^P.
    let p = Word::reduce(cu.letters()[..r].iter().copied());
    Some(gu.inverse().mul(&p).mul(&gv))
}

/// b-exponents between consecutive `a`-letters, including the (possibly
/// empty) leading and trailing tiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileProfile {
    pub tiles: Vec<i32>,
    pub a_length: usize,
}

pub fn tile_profile(u: &Word) -> TileProfile {
    let mut tiles = vec![0];
    let mut a_length = 0;
    for l in u.letters() {
        match l.gen {
            Gen::A => {
                a_length += 1;
                tiles.push(0);
            }
            Gen::B => *tiles.last_mut().expect("nonempty") += l.sign(),
        }
    }
    TileProfile { tiles, a_length }
}

/// Tile length of a cyclically reduced primitive word: the least absolute
/// `b`-exponent in its syllable decomposition (`b`-exponents of a primitive
/// word take at most two adjacent values). `a^{±1}` has tile length 0.
pub fn tile_b(u: &CyclicWord) -> Result<u32, crate::error::F2Error> {
    use crate::error::F2Error;
    let w = u.to_word();
    if w.as_letter().map(|l| l.gen) == Some(Gen::B) {
        return Err(F2Error::Undefined(format!("tile length of {w}")));
    }
    if w.as_letter().map(|l| l.gen) == Some(Gen::A) {
        return Ok(0);
    }
    if !crate::primitive::is_primitive(&w).0 {
        return Err(F2Error::NotPrimitive(w.to_string()));
    }
    crate::primitive::cohen_form(u).ok_or_else(|| F2Error::NotPrimitive(w.to_string()))?;
    Ok(u.cyclic_syllables().iter().filter(|(g, _)| *g == Gen::B).map(|(_, e)| e.unsigned_abs()).min().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        let raw = |s: &str| s.chars().map(|c| w(&c.to_string()).as_letter().unwrap()).collect::<Vec<_>>();
        assert_eq!(Word::reduce(raw("aAb")), w("b"));
        assert_eq!(Word::reduce(raw("bb")), w("b^2"));
        assert_eq!(Word::reduce(raw("abBa")), w("aa"));
    }

    #[test]
    fn multiply_invert_conjugate() {
        assert!(w("ab").mul(&w("BA")).is_identity());
        assert_eq!(w("ab").mul(&w("ba")), w("abba"));
        assert_eq!(w("a").mul(&w("Ab")), w("b"));
        assert_eq!(w("ab").inverse(), w("BA"));
        assert!(Word::identity().inverse().is_identity());
        assert_eq!(w("aab").inverse(), w("BAA"));
        assert_eq!(w("b").conjugate(&w("a")), w("Aba"));
        assert_eq!(w("b").conjugate(&w("b^5")), w("b"));
        assert_eq!(w("a").conjugate(&w("ab")), w("Bab"));
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, g) = w("abA").cyclic_reduce();
        assert_eq!(core.to_word(), w("b"));
        assert_eq!(g, w("A"));
        let (core, g) = w("ab").cyclic_reduce();
        assert_eq!(core.to_word(), w("ab"));
        assert!(g.is_identity());
        let (core, g) = w("Aba").cyclic_reduce();
        assert_eq!((core.to_word(), g), (w("b"), w("a")));
    }

    #[test]
    fn conjugacy_examples() {
        assert!(conjugacy_equal(&w("b"), &w("abA")));
        assert!(conjugacy_equal(&w("ab"), &w("ba")));
        assert!(!conjugacy_equal(&w("a"), &w("b")));
        let t = conjugator(&w("ab"), &w("ba")).unwrap();
        assert_eq!(w("ab").conjugate(&t), w("ba"));
    }

    #[test]
    fn tile_profile_examples() {
        let p = tile_profile(&w("abbaB"));
        assert_eq!(p.tiles, vec![0, 2, -1]);
        assert_eq!(p.a_length, 2);
        assert_eq!(tile_profile(&w("aabAbbb")).a_length, 3);
        let p = tile_profile(&w("b^7"));
        assert_eq!((p.tiles, p.a_length), (vec![7], 0));
    }

    #[test]
    fn tile_b_examples() {
        let core = |s: &str| w(s).cyclic_reduce().0;
        assert_eq!(tile_b(&core("abab^2")).unwrap(), 1);
        assert_eq!(tile_b(&core("ab")).unwrap(), 1);
        assert_eq!(tile_b(&core("ab^2ab^2ab^3")).unwrap(), 2);
        assert_eq!(tile_b(&core("a")).unwrap(), 0);
        assert!(tile_b(&core("b")).is_err());
        assert!(tile_b(&core("B")).is_err());
        assert!(tile_b(&core("aabb")).is_err());
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(w("a^-2b").to_string(), "AAb");
        assert_eq!(w("1").to_string(), "1");
        assert!("ac".parse::<Word>().is_err());
        assert!("a^".parse::<Word>().is_err());
        assert!("a^99999999999".parse::<Word>().is_err());
    }

    #[test]
    fn shortlex_order() {
        assert!(w("b") < w("ab"));
        assert!(w("a") < w("A"));
        assert!(w("A") < w("b"));
        assert!(w("abA") < w("aBA"));
    }
}
