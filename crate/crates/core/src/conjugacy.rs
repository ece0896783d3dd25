//! C-edges, lines, parallelism and neighbour closures.
//!
//! Every query is transported to the model vertex `⟨b⟩`: for a vertex `⟨x⟩`
//! with completion `y`, the automorphism `σ: a ↦ y, b ↦ x` sends `b` to `x`,
//! so a conjugate `v` of `x` pulls back to `b^g` and all statements become
//! pattern matches on the normalized conjugator `g` (leading `b`-power
//! stripped). In this frame the C-neighbours of `b` are `b^{a^δ b^m}` and the
//! line `ℓ(b, b^{a^δ b^m})` is `{⟨b^{-m} a^{-δ} b^j⟩ : j ∈ ℤ}`.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{F2Error, Result};
use crate::factor_graph::{is_edge, neighbors};
use crate::primitive::{complete_to_basis, Automorphism, Vertex};
use crate::word::{conjugator, Gen, Letter, Word};

/// The completion automorphism of a vertex and its inverse.
#[derive(Clone, Debug)]
pub struct Frame {
    vertex: Vertex,
    sigma: Automorphism,
    sigma_inv: Automorphism,
}

impl Frame {
    pub fn new(u: &Vertex) -> Frame {
        let x = u.word().clone();
        let y = complete_to_basis(&x).expect("vertices are primitive");
        let sigma = Automorphism::new(y, x);
        let sigma_inv = sigma.inverse().expect("completion is a basis");
        Frame { vertex: u.clone(), sigma, sigma_inv }
    }

    pub fn vertex(&self) -> &Vertex {
        &self.vertex
    }

    /// `σ` with `σ(b) = rep(u)`.
    pub fn sigma(&self) -> &Automorphism {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &Automorphism {
        &self.sigma_inv
    }

    /// Normalized `g` with `σ⁻¹(v) = b^{±g}`, or `None` if `v` is not
    /// conjugate to `u`.
    pub fn conjugator(&self, v: &Vertex) -> Option<Word> {
        let w = self.sigma_inv.apply(v.word());
        let t = conjugator(&Word::b(), &w).or_else(|| conjugator(&Word::letter(Letter::B_INV), &w))?;
        Some(t.strip_leading_b())
    }

    /// The vertex `σ(w)`.
    pub fn push(&self, w: &Word) -> Vertex {
        Vertex::assume_primitive(&self.sigma.apply(w))
    }

    /// The vertex `σ(b^g)`.
    pub fn push_conjugate(&self, g: &Word) -> Vertex {
        self.push(&Word::b().conjugate(g))
    }

    /// The vertex `σ⁻¹(v)` in model coordinates.
    pub fn pull(&self, v: &Vertex) -> Vertex {
        Vertex::assume_primitive(&self.sigma_inv.apply(v.word()))
    }
}

/// Splits a C-neighbour conjugator `a^δ b^m` into `(δ, m)`.
fn unit_conjugator(g: &Word) -> Option<(i32, i32)> {
    let s = g.syllables();
    match s {
        [x] if x.gen == Gen::A && x.exp.abs() == 1 => Some((x.exp, 0)),
        [x, y] if x.gen == Gen::A && x.exp.abs() == 1 => Some((x.exp, y.exp)),
        _ => None,
    }
}

fn unit_word(delta: i32, m: i32) -> Word {
    Word::from_syllables([(Gen::A, delta), (Gen::B, m)])
}

/// `u ~ v`, checked exactly through the frame of `u`.
pub fn is_c_edge(u: &Vertex, v: &Vertex) -> bool {
    u != v && Frame::new(u).conjugator(v).is_some_and(|g| g.a_length() == 1)
}

/// Length of the unique C-path from `u` to `v`; `None` if not conjugate.
pub fn c_distance(u: &Vertex, v: &Vertex) -> Option<usize> {
    Frame::new(u).conjugator(v).map(|g| g.a_length())
}

/// The unique C-path from `u` to `v`, endpoints included.
pub fn c_path(u: &Vertex, v: &Vertex) -> Result<Vec<Vertex>> {
    let frame = Frame::new(u);
    let g = frame.conjugator(v).ok_or_else(|| F2Error::NotConjugate(u.to_string(), v.to_string()))?;
    let letters = g.to_letters();
    let mut path = vec![u.clone()];
    // Suffixes of g starting at an a-letter, shortest first.
    for i in (0..letters.len()).rev().filter(|&i| letters[i].gen == Gen::A) {
        let suffix = Word::reduce(letters[i..].iter().copied());
        path.push(frame.push_conjugate(&suffix));
    }
    debug_assert_eq!(path.last(), Some(v));
    Ok(path)
}

/// A line, stored by its sorted endpoint pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub ends: (Vertex, Vertex),
}

impl Line {
    pub fn new(u: &Vertex, v: &Vertex) -> Result<Line> {
        if !is_c_edge(u, v) {
            return Err(F2Error::NotACEdge(u.to_string(), v.to_string()));
        }
        let ends = if u <= v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
        Ok(Line { ends })
    }

    pub fn points(&self, window: u32) -> BTreeSet<Vertex> {
        line_points(&self.ends.0, &self.ends.1, window).expect("lines join C-edges")
    }
}

/// `{⟨b^{-m} a^{-δ} b^j⟩ : |j| ≤ window}` in the frame of `u`.
pub fn line_points(u: &Vertex, v: &Vertex, window: u32) -> Result<BTreeSet<Vertex>> {
    let frame = Frame::new(u);
    let (delta, m) = frame
        .conjugator(v)
        .and_then(|g| unit_conjugator(&g))
        .ok_or_else(|| F2Error::NotACEdge(u.to_string(), v.to_string()))?;
    let w = window as i32;
    Ok((-w..=w).map(|j| frame.push(&Word::from_syllables([(Gen::B, -m), (Gen::A, -delta), (Gen::B, j)]))).collect())
}

/// Counts windowed common neighbours and applies the `≥ 5` threshold.
pub fn common_neighbour_count(u: &Vertex, v: &Vertex, window: u32) -> usize {
    neighbors(u, window).iter().filter(|t| *t != v && is_edge(t, v)).count()
}

pub fn detect_c_edge_definably(u: &Vertex, v: &Vertex, window: u32) -> bool {
    u != v && common_neighbour_count(u, v, window) >= 5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Parallel,
    Orthogonal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClass {
    pub verdict: Verdict,
    pub witness: Option<Vertex>,
}

/// Classifies two vertices at C-distance 2 through their common C-neighbour.
pub fn classify_pair(v1: &Vertex, v2: &Vertex) -> Result<PairClass> {
    let path = c_path(v1, v2).map_err(|_| F2Error::NotDistanceTwo(v1.to_string(), v2.to_string()))?;
    if path.len() != 3 {
        return Err(F2Error::NotDistanceTwo(v1.to_string(), v2.to_string()));
    }
    let frame = Frame::new(&path[1]);
    let unit = |v: &Vertex| frame.conjugator(v).and_then(|g| unit_conjugator(&g)).expect("C-neighbour");
    let ((d1, m1), (d2, m2)) = (unit(v1), unit(v2));
    if d1 == d2 {
        return Ok(PairClass { verdict: Verdict::Parallel, witness: None });
    }
    let (mp, mn) = if d1 == 1 { (m1, m2) } else { (m2, m1) };
    let witness = frame.push(&Word::from_syllables([(Gen::B, -mp), (Gen::A, -1), (Gen::B, mn)]));
    Ok(PairClass { verdict: Verdict::Orthogonal, witness: Some(witness) })
}

/// The family sign `δ` of a C-neighbour `q` of `p`: neighbours with equal
/// signs are parallel, opposite signs orthogonal.
pub fn c_family(p: &Vertex, q: &Vertex) -> Option<i32> {
    Frame::new(p).conjugator(q).and_then(|g| unit_conjugator(&g)).map(|(d, _)| d)
}

/// The four neighbour lines: two at each endpoint.
pub fn line_neighbours(line: &Line) -> BTreeSet<Line> {
    let mut out = BTreeSet::new();
    for (p, q) in [(&line.ends.0, &line.ends.1), (&line.ends.1, &line.ends.0)] {
        out.extend(endpoint_neighbours(p, q).into_iter().map(|r| Line::new(p, &r).expect("C-edge")));
    }
    out
}

/// The two vertices `r` with `ℓ(p, r)` a neighbour of `ℓ(p, q)`.
pub fn endpoint_neighbours(p: &Vertex, q: &Vertex) -> [Vertex; 2] {
    let frame = Frame::new(p);
    let (delta, m) = frame.conjugator(q).and_then(|g| unit_conjugator(&g)).expect("C-edge");
    [frame.push_conjugate(&unit_word(delta, m - 1)), frame.push_conjugate(&unit_word(delta, m + 1))]
}

/// Iterated neighbour-line closure of a C-edge, windowed by the seed frame:
/// members have normalized conjugator of a-length and all `|b|`-exponents at
/// most `window`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureSet {
    pub seed: (Vertex, Vertex),
    pub members: BTreeSet<Vertex>,
    pub depth: usize,
}

impl ClosureSet {
    pub fn contains(&self, v: &Vertex) -> bool {
        self.members.contains(v)
    }
}

fn within_window(frame: &Frame, v: &Vertex, window: u32) -> bool {
    frame.conjugator(v).is_some_and(|g| {
        g.a_length() <= window as usize && g.syllables().iter().all(|s| s.exp.unsigned_abs() <= window)
    })
}

pub fn neighbour_closure(u: &Vertex, v: &Vertex, depth: usize, window: u32) -> Result<ClosureSet> {
    let seed = Line::new(u, v)?;
    let frame = Frame::new(u);
    let mut lines: HashSet<Line> = HashSet::from([seed.clone()]);
    let mut frontier = vec![seed];
    for _ in 0..depth {
        let mut next = Vec::new();
        for line in &frontier {
            for n in line_neighbours(line) {
                let inside = within_window(&frame, &n.ends.0, window) && within_window(&frame, &n.ends.1, window);
                if inside && lines.insert(n.clone()) {
                    next.push(n);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let members = lines.into_iter().flat_map(|l| [l.ends.0, l.ends.1]).collect();
    Ok(ClosureSet { seed: (u.clone(), v.clone()), members, depth })
}

/// Exact membership of `x` in `cl(u, v)`: the C-path from `x` running
/// through the seed edge is straight.
pub fn in_closure(u: &Vertex, v: &Vertex, x: &Vertex) -> Result<bool> {
    if !is_c_edge(u, v) {
        return Err(F2Error::NotACEdge(u.to_string(), v.to_string()));
    }
    if x == u || x == v {
        return Ok(true);
    }
    let Ok(to_v) = c_path(x, v) else {
        return Ok(false);
    };
    // In a tree one of the two paths runs through the seed edge.
    let path = if to_v.contains(u) { to_v } else { c_path(x, u)? };
    is_straight(&path)
}

/// Every gap-2 pair of a C-path classifies parallel.
pub fn is_straight(path: &[Vertex]) -> Result<bool> {
    for w in path.windows(2) {
        if !is_c_edge(&w[0], &w[1]) {
            return Err(F2Error::NotACPath(format!("{} and {} are not C-adjacent", w[0], w[1])));
        }
    }
    for w in path.windows(3) {
        if w[0] == w[2] {
            return Err(F2Error::NotACPath(format!("path backtracks at {}", w[1])));
        }
        if classify_pair(&w[0], &w[2])?.verdict == Verdict::Orthogonal {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Windowed intersection is a single vertex and some cross pair is
/// orthogonal.
pub fn families_orthogonal(c1: &ClosureSet, c2: &ClosureSet) -> bool {
    if c1.members.intersection(&c2.members).count() != 1 {
        return false;
    }
    c1.members.iter().any(|x| {
        c2.members
            .iter()
            .any(|y| c_distance(x, y) == Some(2) && classify_pair(x, y).is_ok_and(|c| c.verdict == Verdict::Orthogonal))
    })
}

/// `N_k(x, y)` for some `k ≥ 1`: distinct conjugates joined by a straight
/// C-path.
pub fn n_any(x: &Vertex, y: &Vertex) -> bool {
    x != y && c_path(x, y).is_ok_and(|p| is_straight(&p).unwrap_or(false))
}

/// `N_k(x, y)`: a chain of at most `k` neighbour steps from a line with
/// endpoint `x` to a line with endpoint `y`. Bounded search: start lines at
/// `x` range over conjugator exponents `|m| ≤ k + 1 + M` where `M` bounds the
/// exponents of the conjugator from `x` to `y`.
pub fn n_k(x: &Vertex, y: &Vertex, k: usize) -> bool {
    if !n_any(x, y) {
        return false;
    }
    let frame = Frame::new(x);
    let g = frame.conjugator(y).expect("conjugate");
    let bound = g.syllables().iter().map(|s| s.exp.abs()).max().unwrap_or(0) + k as i32 + 1;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for delta in [-1, 1] {
        for m in -bound..=bound {
            let l = Line::new(x, &frame.push_conjugate(&unit_word(delta, m))).expect("C-edge");
            if seen.insert(l.clone()) {
                queue.push_back((l, 0usize));
            }
        }
    }
    while let Some((l, d)) = queue.pop_front() {
        if d >= 1 && (&l.ends.0 == y || &l.ends.1 == y) {
            return true;
        }
        if d == k {
            continue;
        }
        for n in line_neighbours(&l) {
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    fn conj(x: &str, g: &str) -> Vertex {
        Vertex::assume_primitive(&x.parse::<Word>().unwrap().conjugate(&g.parse().unwrap()))
    }

    #[test]
    fn c_edges() {
        assert!(is_c_edge(&v("b"), &v("Aba")));
        assert!(!is_c_edge(&v("b"), &v("AAbaa")));
        assert!(!is_c_edge(&v("a"), &v("b")));
    }

    #[test]
    fn distances_and_paths() {
        let b = v("b");
        assert_eq!(c_distance(&b, &b), Some(0));
        assert_eq!(c_distance(&b, &conj("b", "abA")), Some(2));
        assert_eq!(c_distance(&b, &conj("b", "bbba")), Some(1));
        assert_eq!(c_path(&b, &conj("b", "abA")).unwrap(), vec![b.clone(), conj("b", "A"), conj("b", "abA")]);
        assert_eq!(c_path(&b, &b).unwrap(), vec![b.clone()]);
        assert!(c_path(&b, &v("a")).is_err());
    }

    #[test]
    fn lines() {
        let b = v("b");
        let pts = line_points(&b, &conj("b", "A"), 1).unwrap();
        assert_eq!(pts, [v("aB"), v("a"), v("ab")].into_iter().collect());
        let pts = line_points(&b, &conj("b", "a"), 2).unwrap();
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| is_edge(p, &b) && is_edge(p, &conj("b", "a"))));
    }

    #[test]
    fn definable_detection() {
        let b = v("b");
        assert!(detect_c_edge_definably(&b, &conj("b", "a"), 3));
        assert!(!detect_c_edge_definably(&b, &conj("b", "aa"), 8));
        assert!(!detect_c_edge_definably(&v("a"), &b, 8));
        assert_eq!(common_neighbour_count(&v("a"), &b, 8), 4);
    }

    #[test]
    fn classification() {
        let p = classify_pair(&conj("b", "ab"), &conj("b", "abb")).unwrap();
        assert_eq!(p.verdict, Verdict::Parallel);
        let o = classify_pair(&conj("b", "a"), &conj("b", "A")).unwrap();
        assert_eq!(o, PairClass { verdict: Verdict::Orthogonal, witness: Some(v("a")) });
        let o = classify_pair(&conj("b", "ab"), &conj("b", "A")).unwrap();
        assert_eq!(o.verdict, Verdict::Orthogonal);
        let w = o.witness.unwrap();
        for x in [v("b"), conj("b", "ab"), conj("b", "A")] {
            assert!(is_edge(&w, &x));
        }
        assert!(classify_pair(&v("b"), &conj("b", "a")).is_err());
    }

    #[test]
    fn four_neighbours() {
        let b = v("b");
        let l = Line::new(&b, &conj("b", "a")).unwrap();
        let n = line_neighbours(&l);
        assert_eq!(n.len(), 4);
        assert!(n.contains(&Line::new(&b, &conj("b", "ab")).unwrap()));
        assert!(n.contains(&Line::new(&b, &conj("b", "aB")).unwrap()));
        assert!(!n.contains(&Line::new(&b, &conj("b", "abb")).unwrap()));
    }

    #[test]
    fn closures() {
        let b = v("b");
        let ba = conj("b", "a");
        let c = neighbour_closure(&b, &ba, 1, 2).unwrap();
        assert!(c.contains(&conj("b", "ab")) && c.contains(&conj("b", "aB")));
        let c = neighbour_closure(&b, &ba, 4, 2).unwrap();
        for k in -2..=2 {
            assert!(c.contains(&conj("b", &format!("ab^{k}"))));
        }
        for m in &c.members {
            assert!(c_distance(&b, m).is_some());
            assert!(in_closure(&b, &ba, m).unwrap());
        }
        assert!(!in_closure(&b, &ba, &conj("b", "A")).unwrap());
    }

    #[test]
    fn straightness() {
        let b = v("b");
        assert!(is_straight(&[conj("b", "ab"), b.clone(), conj("b", "abb")]).unwrap());
        assert!(!is_straight(&[conj("b", "a"), b.clone(), conj("b", "A")]).unwrap());
        assert!(is_straight(&[b.clone(), conj("b", "a")]).unwrap());
        assert!(is_straight(&[b]).unwrap());
    }

    #[test]
    fn orthogonal_families() {
        let b = v("b");
        let c1 = neighbour_closure(&b, &conj("b", "a"), 3, 2).unwrap();
        let c2 = neighbour_closure(&b, &conj("b", "A"), 3, 2).unwrap();
        assert!(families_orthogonal(&c1, &c2));
        assert!(!families_orthogonal(&c1, &c1));
    }

    #[test]
    fn n_relations() {
        let b = v("b");
        assert!(n_k(&conj("b", "a"), &conj("b", "ab"), 1));
        assert!(!n_k(&conj("b", "a"), &conj("b", "abb"), 1));
        assert!(n_k(&conj("b", "a"), &conj("b", "abb"), 2));
        assert!(!n_any(&conj("b", "a"), &conj("b", "A")));
        assert!(n_any(&b, &conj("b", "a")));
    }
}
