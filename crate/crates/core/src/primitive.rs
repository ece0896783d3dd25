//! Primitive elements, bases and automorphisms of F₂.
//!
//! Bases are decided by greedy Nielsen reduction of the pair; the
//! commutator criterion ([u,v] conjugate to [a,b]^{±1}) is kept as an
//! independent check. Primitivity runs an abelianization prefilter and then
//! Whitehead length reduction of the cyclic core down to a single letter.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{F2Error, Result};
use crate::word::{conjugacy_equal, conjugator, CyclicWord, Gen, Letter, Word};

/// Exponent sums of `a` and `b`.
pub fn abelianize(u: &Word) -> (i64, i64) {
    (u.exponent_sum(Gen::A), u.exponent_sum(Gen::B))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// An endomorphism of F₂ given by the images of `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub image_a: Word,
    pub image_b: Word,
}

impl Automorphism {
    pub fn identity() -> Automorphism {
        Automorphism { image_a: Word::a(), image_b: Word::b() }
    }

    pub fn new(image_a: Word, image_b: Word) -> Automorphism {
        Automorphism { image_a, image_b }
    }

    pub fn image(&self, gen: Gen) -> &Word {
        match gen {
            Gen::A => &self.image_a,
            Gen::B => &self.image_b,
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.image_a, &self.image_b)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism { image_a: self.apply(&other.image_a), image_b: self.apply(&other.image_b) }
    }

    /// Inverse, if the images form a basis.
    pub fn inverse(&self) -> Option<Automorphism> {
        let red = nielsen_reduce(&self.image_a, &self.image_b);
        if !red.is_basis() {
            return None;
        }
        // self ∘ τ₁ ∘ … ∘ τₙ = π, so self⁻¹ = τ₁ ∘ … ∘ τₙ ∘ π⁻¹.
        let mut inv = Automorphism::identity();
        for mv in &red.moves {
            inv = inv.compose(&mv.as_automorphism());
        }
        let (pa, pb) = (red.first.as_letter()?, red.second.as_letter()?);
        let mut pi_inv = Automorphism::identity();
        // π(a) = pa, π(b) = pb  ⇒  π⁻¹(pa.gen) = a^{sign}, π⁻¹(pb.gen) = b^{sign}.
        let set = |aut: &mut Automorphism, gen: Gen, w: Word| match gen {
            Gen::A => aut.image_a = w,
            Gen::B => aut.image_b = w,
        };
        set(&mut pi_inv, pa.gen, Word::power(Gen::A, pa.sign()));
        set(&mut pi_inv, pb.gen, Word::power(Gen::B, pb.sign()));
        Some(inv.compose(&pi_inv))
    }

    /// The automorphism sending `(a, b)` to the given basis pair.
    pub fn from_basis(first: &Word, second: &Word) -> Option<Automorphism> {
        is_basis(first, second).then(|| Automorphism::new(first.clone(), second.clone()))
    }
}

/// An elementary Nielsen move on a pair `(p, q)`; `index` picks the entry
/// that is replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMove {
    pub index: u8,
    pub left: bool,
    pub exp: i32,
}

impl PairMove {
    /// Fixed enumeration order used for tie-breaking.
    pub const ALL: [PairMove; 8] = [
        PairMove { index: 0, left: false, exp: 1 },
        PairMove { index: 0, left: false, exp: -1 },
        PairMove { index: 0, left: true, exp: 1 },
        PairMove { index: 0, left: true, exp: -1 },
        PairMove { index: 1, left: false, exp: 1 },
        PairMove { index: 1, left: false, exp: -1 },
        PairMove { index: 1, left: true, exp: 1 },
        PairMove { index: 1, left: true, exp: -1 },
    ];

    pub fn apply(&self, p: &Word, q: &Word) -> (Word, Word) {
        let (target, other) = if self.index == 0 { (p, q) } else { (q, p) };
        let m = other.pow(self.exp);
        let replaced = if self.left { m.mul(target) } else { target.mul(&m) };
        if self.index == 0 {
            (replaced, q.clone())
        } else {
            (p.clone(), replaced)
        }
    }

    /// The automorphism τ with `(σ∘τ)(a, b) = move(σ(a), σ(b))`.
    pub fn as_automorphism(&self) -> Automorphism {
        let (p, q) = self.apply(&Word::a(), &Word::b());
        Automorphism::new(p, q)
    }
}

/// Outcome of greedy Nielsen reduction of a pair.
#[derive(Clone, Debug)]
pub struct NielsenReduction {
    pub first: Word,
    pub second: Word,
    pub moves: Vec<PairMove>,
}

impl NielsenReduction {
    pub fn is_basis(&self) -> bool {
        match (self.first.as_letter(), self.second.as_letter()) {
            (Some(x), Some(y)) => x.gen != y.gen,
            _ => false,
        }
    }
}

/// Greedy Nielsen reduction: apply the first move (in [`PairMove::ALL`]
/// order) that strictly lowers the total length, until none does.
pub fn nielsen_reduce(p: &Word, q: &Word) -> NielsenReduction {
    let (mut p, mut q) = (p.clone(), q.clone());
    let mut moves = Vec::new();
    'outer: loop {
        if p.is_identity() || q.is_identity() {
            break;
        }
        let total = p.len() + q.len();
        for mv in PairMove::ALL {
            let (np, nq) = mv.apply(&p, &q);
            if np.len() + nq.len() < total {
                p = np;
                q = nq;
                moves.push(mv);
                continue 'outer;
            }
        }
        break;
    }
    NielsenReduction { first: p, second: q, moves }
}

/// True iff `{u, v}` is a basis of F₂ (Nielsen reduction).
pub fn is_basis(u: &Word, v: &Word) -> bool {
    let (au, bu) = abelianize(u);
    let (av, bv) = abelianize(v);
    if (au * bv - bu * av).abs() != 1 {
        return false;
    }
    nielsen_reduce(u, v).is_basis()
}

/// Independent basis test: `[u, v]` is conjugate to `[a, b]^{±1}`.
pub fn is_basis_by_commutator(u: &Word, v: &Word) -> bool {
    let c = Word::commutator(u, v);
    let std = Word::commutator(&Word::a(), &Word::b());
    conjugacy_equal(&c, &std) || conjugacy_equal(&c, &std.inverse())
}

/// Elementary automorphism `target ↦ target·m^exp` (or `m^exp·target`),
/// `m` the other generator. These are the length-changing Whitehead
/// automorphisms of F₂ up to inner automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhiteheadMove {
    pub target: Gen,
    pub left: bool,
    pub exp: i32,
}

impl WhiteheadMove {
    pub const ALL: [WhiteheadMove; 8] = [
        WhiteheadMove { target: Gen::A, left: false, exp: 1 },
        WhiteheadMove { target: Gen::A, left: false, exp: -1 },
        WhiteheadMove { target: Gen::A, left: true, exp: 1 },
        WhiteheadMove { target: Gen::A, left: true, exp: -1 },
        WhiteheadMove { target: Gen::B, left: false, exp: 1 },
        WhiteheadMove { target: Gen::B, left: false, exp: -1 },
        WhiteheadMove { target: Gen::B, left: true, exp: 1 },
        WhiteheadMove { target: Gen::B, left: true, exp: -1 },
    ];

    pub fn as_automorphism(&self) -> Automorphism {
        let m = Word::power(self.target.other(), self.exp);
        let t = Word::power(self.target, 1);
        let img = if self.left { m.mul(&t) } else { t.mul(&m) };
        match self.target {
            Gen::A => Automorphism::new(img, Word::b()),
            Gen::B => Automorphism::new(Word::a(), img),
        }
    }

    pub fn inverse(&self) -> WhiteheadMove {
        WhiteheadMove { exp: -self.exp, ..*self }
    }
}

/// One Whitehead step: the move and the cyclic core it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteheadStep {
    pub mv: WhiteheadMove,
    pub core: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    Identity,
    /// Abelianization `(p, q)` with `gcd(p, q) ≠ 1`.
    Abelianization {
        a: i64,
        b: i64,
    },
    /// The recorded steps end at a cyclic core of length > 1 that no
    /// Whitehead move shortens.
    LengthIrreducible {
        steps: Vec<WhiteheadStep>,
        core: Word,
    },
}

/// Replayable witness for a primitivity verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimitivityCertificate {
    Primitive { core: Word, conjugator: Word, steps: Vec<WhiteheadStep>, letter: Letter },
    NotPrimitive(Refutation),
}

impl PrimitivityCertificate {
    pub fn is_primitive(&self) -> bool {
        matches!(self, PrimitivityCertificate::Primitive { .. })
    }

    /// Replays the certificate against `u`.
    pub fn verify(&self, u: &Word) -> bool {
        match self {
            PrimitivityCertificate::Primitive { core, conjugator, steps, letter } => {
                core.conjugate(conjugator) == *u
                    && replay_steps(core, steps).and_then(|w| w.as_letter()) == Some(*letter)
            }
            PrimitivityCertificate::NotPrimitive(Refutation::Identity) => u.is_identity(),
            PrimitivityCertificate::NotPrimitive(Refutation::Abelianization { a, b }) => {
                abelianize(u) == (*a, *b) && gcd(*a, *b) != 1
            }
            PrimitivityCertificate::NotPrimitive(Refutation::LengthIrreducible { steps, core }) => {
                replay_steps(&u.cyclic_reduce().0.to_word(), steps).as_ref() == Some(core)
                    && core.len() > 1
                    && WhiteheadMove::ALL
                        .iter()
                        .all(|mv| mv.as_automorphism().apply(core).cyclic_reduce().0.len() >= core.len())
            }
        }
    }
}

fn replay_steps(start: &Word, steps: &[WhiteheadStep]) -> Option<Word> {
    let mut cur = start.clone();
    for step in steps {
        let next = step.mv.as_automorphism().apply(&cur).cyclic_reduce().0.to_word();
        if next != step.core || next.len() >= cur.len() {
            return None;
        }
        cur = next;
    }
    Some(cur)
}

/// Decides primitivity and returns a certificate.
pub fn is_primitive(u: &Word) -> (bool, PrimitivityCertificate) {
    if u.is_identity() {
        return (false, PrimitivityCertificate::NotPrimitive(Refutation::Identity));
    }
    let (a, b) = abelianize(u);
    if gcd(a, b) != 1 {
        return (false, PrimitivityCertificate::NotPrimitive(Refutation::Abelianization { a, b }));
    }
    let (core, g) = u.cyclic_reduce();
    let core = core.to_word();
    let mut cur = core.clone();
    let mut steps = Vec::new();
    'outer: while cur.len() > 1 {
        for mv in WhiteheadMove::ALL {
            let next = mv.as_automorphism().apply(&cur).cyclic_reduce().0.to_word();
            if next.len() < cur.len() {
                steps.push(WhiteheadStep { mv, core: next.clone() });
                cur = next;
                continue 'outer;
            }
        }
        return (false, PrimitivityCertificate::NotPrimitive(Refutation::LengthIrreducible { steps, core: cur }));
    }
    let letter = cur.as_letter().expect("length one");
    (true, PrimitivityCertificate::Primitive { core, conjugator: g, steps, letter })
}

/// Position of a cyclically reduced word in Cohen's normal form for
/// primitive elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohenForm {
    /// The pattern matched the inverse word.
    pub inverted: bool,
    /// Letter offset of the matching rotation.
    pub rotation: usize,
    /// Common exponent of the single-letter syllables.
    pub epsilon: i32,
    /// The other generator's exponents lie in `{k, k+1}`.
    pub k: u32,
    /// True when the roles of `a` and `b` are interchanged
    /// (all `b`-exponents equal `epsilon`).
    pub swapped: bool,
}

/// Matches Cohen's pattern `a^{m₁}b^{n₁}…a^{mₛ}b^{nₛ}` with one generator's
/// exponents all equal to `ε = ±1` and the other's in `{k, k+1}`, `k > 0`.
/// The pattern is necessary for primitivity but not sufficient.
pub fn cohen_form(u: &CyclicWord) -> Option<CohenForm> {
    for inverted in [false, true] {
        let c = if inverted { u.inverse() } else { u.clone() };
        let syl = c.cyclic_syllables();
        if syl.len() < 2 {
            return None;
        }
        for swapped in [false, true] {
            let (unit_gen, other_gen) = if swapped { (Gen::B, Gen::A) } else { (Gen::A, Gen::B) };
            let units: Vec<i32> = syl.iter().filter(|s| s.0 == unit_gen).map(|s| s.1).collect();
            let others: Vec<i32> = syl.iter().filter(|s| s.0 == other_gen).map(|s| s.1).collect();
            let epsilon = units[0];
            if epsilon.abs() != 1 || units.iter().any(|&e| e != epsilon) {
                continue;
            }
            let k = *others.iter().min().expect("nonempty");
            if k <= 0 || others.iter().any(|&e| e != k && e != k + 1) {
                continue;
            }
            let letters = c.letters();
            let n = letters.len();
            let rotation =
                (0..n).find(|&i| letters[i].gen == Gen::A && letters[(i + n - 1) % n].gen == Gen::B).unwrap_or(0);
            return Some(CohenForm { inverted, rotation, epsilon, k: k as u32, swapped });
        }
    }
    None
}

/// Returns `v` with `{u, v}` a basis. Deterministic: the Whitehead
/// certificate is inverted and applied to the complementary generator, then
/// `v` is shortened by multiplying with `u^{±1}` and the smaller of `v`,
/// `v⁻¹` is returned.
pub fn complete_to_basis(u: &Word) -> Result<Word> {
    let (ok, cert) = is_primitive(u);
    let PrimitivityCertificate::Primitive { steps, letter, .. } = cert else {
        debug_assert!(!ok);
        return Err(F2Error::NotPrimitive(u.to_string()));
    };
    let mut phi = Automorphism::identity();
    for step in &steps {
        phi = phi.compose(&step.mv.inverse().as_automorphism());
    }
    let x = Word::power(letter.gen, letter.sign());
    let w = phi.apply(&x);
    let t = conjugator(&w, u).expect("certificate maps the letter to a conjugate of u");
    let mut v = phi.apply(&Word::power(letter.gen.other(), 1)).conjugate(&t);
    debug_assert!(is_basis(u, &v));
    let ui = u.inverse();
    loop {
        let candidates = [u.mul(&v), ui.mul(&v), v.mul(u), v.mul(&ui)];
        match candidates.into_iter().filter(|c| c.len() < v.len()).min() {
            Some(shorter) => v = shorter,
            None => break,
        }
    }
    let vi = v.inverse();
    Ok(if vi < v { vi } else { v })
}

/// A vertex of the free factor complex: the cyclic subgroup generated by a
/// primitive word, represented by the smaller of the two generators.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Vertex(Word);

impl Vertex {
    pub fn new(u: &Word) -> Result<Vertex> {
        if !is_primitive(u).0 {
            return Err(F2Error::NotPrimitive(u.to_string()));
        }
        Ok(Vertex::assume_primitive(u))
    }

    /// Canonicalizes without checking primitivity; for words known to be
    /// primitive (images of primitives under automorphisms).
    pub fn assume_primitive(u: &Word) -> Vertex {
        let inv = u.inverse();
        Vertex(if inv < *u { inv } else { u.clone() })
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn a() -> Vertex {
        Vertex(Word::a())
    }

    pub fn b() -> Vertex {
        Vertex(Word::b())
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}⟩", self.0)
    }
}

impl std::str::FromStr for Vertex {
    type Err = F2Error;
    fn from_str(s: &str) -> Result<Self> {
        Vertex::new(&s.parse::<Word>()?)
    }
}

impl TryFrom<String> for Vertex {
    type Error = F2Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Vertex> for String {
    fn from(v: Vertex) -> String {
        v.to_string()
    }
}

pub fn canonical_vertex(u: &Word) -> Result<Vertex> {
    Vertex::new(u)
}

/// A basis pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisPair {
    pub first: Word,
    pub second: Word,
}

impl BasisPair {
    pub fn new(first: Word, second: Word) -> Option<BasisPair> {
        is_basis(&first, &second).then_some(BasisPair { first, second })
    }

    pub fn standard() -> BasisPair {
        BasisPair { first: Word::a(), second: Word::b() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(abelianize(&w("abAb")), (0, 2));
        assert_eq!(abelianize(&Word::identity()), (0, 0));
        assert_eq!(abelianize(&w("aaB")), (2, -1));
    }

    #[test]
    fn primitivity_examples() {
        for (s, expect) in [("a", true), ("abAB", false), ("abab^2", true), ("a^2b^2", false)] {
            let (p, cert) = is_primitive(&w(s));
            assert_eq!(p, expect, "{s}");
            assert!(cert.verify(&w(s)), "{s}");
        }
        // abab² = u²v for u = ab, v = b.
        let u = w("ab");
        let v = w("b");
        assert_eq!(u.pow(2).mul(&v), w("abab^2"));
    }

    #[test]
    fn length_irreducible_refutation() {
        // Abelianization (1, 1) is coprime but the word is not primitive.
        let u = w("a^2 b^2 a^-1 b^-1");
        let (p, cert) = is_primitive(&u);
        assert!(!p);
        assert!(matches!(cert, PrimitivityCertificate::NotPrimitive(Refutation::LengthIrreducible { .. })));
        assert!(cert.verify(&u));
    }

    #[test]
    fn cohen_examples() {
        let core = |s: &str| w(s).cyclic_reduce().0;
        let c = cohen_form(&core("abab^2")).unwrap();
        assert_eq!((c.epsilon, c.k, c.swapped), (1, 1, false));
        assert!(cohen_form(&core("a^2b^2")).is_none());
        assert!(!is_primitive(&w("a^2b^2")).0);
        let c = cohen_form(&core("aB")).unwrap();
        assert_eq!(c.epsilon, -1);
    }

    #[test]
    fn basis_examples() {
        assert!(is_basis(&w("a"), &w("b")));
        assert!(is_basis(&w("b"), &w("bbaB")));
        assert!(!is_basis(&w("a"), &w("baB")));
        assert!(!is_basis_by_commutator(&w("a"), &w("baB")));
        assert!(is_basis_by_commutator(&w("b"), &w("bbaB")));
    }

    #[test]
    fn completion_examples() {
        assert_eq!(complete_to_basis(&w("a")).unwrap(), w("b"));
        assert_eq!(complete_to_basis(&w("Aba")).unwrap(), w("a"));
        let v = complete_to_basis(&w("abab^2")).unwrap();
        assert!(is_basis(&w("abab^2"), &v));
        assert_eq!(v, w("ab"));
        assert!(complete_to_basis(&w("aabb")).is_err());
    }

    #[test]
    fn vertex_examples() {
        assert_eq!(canonical_vertex(&w("A")).unwrap().word(), &w("a"));
        assert_eq!(canonical_vertex(&w("BA")).unwrap().word(), &w("ab"));
        assert_eq!(canonical_vertex(&w("abA")).unwrap().word(), &w("abA"));
        assert!(canonical_vertex(&w("abAB")).is_err());
    }

    #[test]
    fn automorphism_inverse() {
        let s = Automorphism::new(w("abab^2"), w("ab"));
        let si = s.inverse().unwrap();
        assert_eq!(s.compose(&si), Automorphism::identity());
        assert_eq!(si.compose(&s), Automorphism::identity());
    }
}
