//! The Farey graph as the conjugation quotient of AF₂, its labeling by
//! cyclically reduced primitive words, and λ-certificates along paths.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{F2Error, Result};
use crate::factor_graph::{is_edge, BlockGraph};
use crate::primitive::{abelianize, Vertex};
use crate::word::{class_key, conjugator, tile_b, CyclicWord, Gen, Word};

pub const DEFAULT_FAREY_CAP: u32 = 16;

/// A conjugacy class of vertices, keyed by the least rotation of the cyclic
/// core or its inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassId(Word);

impl ClassId {
    pub fn of_word(w: &Word) -> ClassId {
        ClassId(Word::reduce(class_key(w)))
    }

    pub fn key(&self) -> &Word {
        &self.0
    }

    pub fn is_base_b(&self) -> bool {
        self.0.as_letter().is_some_and(|l| l.gen == Gen::B)
    }

    /// Abelianization normalized to `p > 0`, or `(0, 1)` for `[b]`.
    pub fn slope(&self) -> (i64, i64) {
        let (p, q) = abelianize(&self.0);
        if p < 0 || (p == 0 && q < 0) {
            (-p, -q)
        } else {
            (p, q)
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

impl fmt::Debug for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TryFrom<String> for ClassId {
    type Error = F2Error;
    fn try_from(s: String) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        Ok(ClassId::of_word(&s.parse::<Word>()?))
    }
}

impl From<ClassId> for String {
    fn from(c: ClassId) -> String {
        c.0.to_string()
    }
}

pub fn project(v: &Vertex) -> ClassId {
    ClassId::of_word(v.word())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyVertex {
    pub level: u32,
    /// Edge this vertex was born from; `None` for level 0.
    pub parent: Option<usize>,
    pub label: Option<Word>,
}

/// An oriented edge; `labels` are the ordered end labels once labeled (the
/// end at `[b]` may carry `b` or `b⁻¹`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyEdge {
    pub from: usize,
    pub to: usize,
    pub born: u32,
    pub parent: Option<usize>,
    pub labels: Option<(Word, Word)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyGraph {
    pub levels: u32,
    pub vertices: Vec<FareyVertex>,
    pub edges: Vec<FareyEdge>,
    /// Indices of the current boundary edges.
    pub boundary: Vec<usize>,
}

impl FareyGraph {
    pub fn label(&self, v: usize) -> Option<&Word> {
        self.vertices[v].label.as_ref()
    }

    pub fn is_labeled(&self) -> bool {
        self.vertices.iter().all(|v| v.label.is_some())
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.iter().any(|e| (e.from == u && e.to == v) || (e.from == v && e.to == u))
    }
}

/// `FG₀` (two triangles on `[a], [b], [ab], [ab⁻¹]`) with `levels` rounds
/// of triangle attachment.
pub fn build_farey(levels: u32, cap: u32) -> Result<FareyGraph> {
    if levels > cap {
        return Err(F2Error::LevelCapExceeded { level: levels, cap });
    }
    let vertex = |level| FareyVertex { level, parent: None, label: None };
    let edge = |from, to| FareyEdge { from, to, born: 0, parent: None, labels: None };
    let mut fg = FareyGraph {
        levels,
        vertices: vec![vertex(0), vertex(0), vertex(0), vertex(0)],
        edges: vec![edge(0, 1), edge(0, 2), edge(2, 1), edge(0, 3), edge(3, 1)],
        boundary: vec![1, 2, 3, 4],
    };
    for level in 1..=levels {
        let mut boundary = Vec::with_capacity(2 * fg.boundary.len());
        for &e in &fg.boundary {
            let (x, y) = (fg.edges[e].from, fg.edges[e].to);
            let z = fg.vertices.len();
            fg.vertices.push(FareyVertex { level, parent: Some(e), label: None });
            for (from, to) in [(x, z), (z, y)] {
                boundary.push(fg.edges.len());
                fg.edges.push(FareyEdge { from, to, born: level, parent: Some(e), labels: None });
            }
        }
        fg.boundary = boundary;
    }
    Ok(fg)
}

/// Assigns `f`: `a`, `b`, `ab`, `ab⁻¹` on `FG₀` and `f(z) = f(x)f(y)` for `z`
/// born from the oriented edge `(x, y)`.
pub fn label_farey(fg: &FareyGraph) -> FareyGraph {
    let w = |s: &str| s.parse::<Word>().expect("static label");
    let mut out = fg.clone();
    for (i, l) in ["a", "b", "ab", "aB"].iter().enumerate() {
        out.vertices[i].label = Some(w(l));
    }
    let initial = [("a", "b"), ("a", "ab"), ("ab", "b"), ("a", "aB"), ("aB", "B")];
    for (i, (x, y)) in initial.iter().enumerate() {
        out.edges[i].labels = Some((w(x), w(y)));
    }
    // Vertices and edges are stored in birth order, so parents come first.
    for e in initial.len()..out.edges.len() {
        let parent = out.edges[e].parent.expect("later edges have parents");
        let (px, py) = out.edges[parent].labels.clone().expect("parent labeled");
        let z_label = px.mul(&py);
        let (from, to) = (out.edges[e].from, out.edges[e].to);
        let labels = if out.edges[parent].from == from { (px, z_label.clone()) } else { (z_label.clone(), py) };
        let z = if out.edges[parent].from == from { to } else { from };
        out.vertices[z].label = Some(z_label);
        out.edges[e].labels = Some(labels);
    }
    out
}

/// `f` of a class, by Stern–Brocot descent on the abelianization.
pub fn class_label(c: &ClassId) -> Word {
    let (p, q) = c.slope();
    if p == 0 {
        return Word::b();
    }
    if q == 0 {
        return Word::a();
    }
    let mut left = ((1i64, 0i64), Word::a());
    let mut right = ((0i64, q.signum()), Word::power(Gen::B, q.signum() as i32));
    let cross = |u: (i64, i64), v: (i64, i64)| u.0 * v.1 - u.1 * v.0;
    let orient = cross(left.0, right.0).signum();
    loop {
        let m = (left.0 .0 + right.0 .0, left.0 .1 + right.0 .1);
        let label = left.1.mul(&right.1);
        if m == (p, q) {
            return label;
        }
        if orient * cross(m, (p, q)) > 0 {
            left = (m, label);
        } else {
            right = (m, label);
        }
    }
}

/// Farey level of a class (`[a], [b], [ab], [ab⁻¹]` are level 0).
pub fn class_level(c: &ClassId) -> u32 {
    let (p, q) = c.slope();
    if p == 0 || q == 0 {
        return 0;
    }
    // Mediant steps after the first, i.e. Stern-Brocot depth minus one.
    let (mut p, mut q) = (p, q.abs());
    let mut depth = 0;
    while p != q {
        if p > q {
            p -= q;
        } else {
            q -= p;
        }
        depth += 1;
    }
    depth
}

/// Farey adjacency of primitive classes: abelianizations with determinant
/// `±1`.
pub fn classes_adjacent(c1: &ClassId, c2: &ClassId) -> bool {
    let (p1, q1) = c1.slope();
    let (p2, q2) = c2.slope();
    (p1 * q2 - q1 * p2).abs() == 1
}

/// `|tile_b(f[x]) − tile_b(f[y])|` for adjacent classes other than `[b]`.
pub fn edge_tile_gap(c1: &ClassId, c2: &ClassId) -> Result<u32> {
    if c1.is_base_b() || c2.is_base_b() {
        return Err(F2Error::ClassIsBaseB);
    }
    if !classes_adjacent(c1, c2) {
        return Err(F2Error::NotAdjacent(c1.to_string(), c2.to_string()));
    }
    let t = |c: &ClassId| tile_b(&CyclicWord::from_letters(class_label(c).to_letters()));
    Ok(t(c1)?.abs_diff(t(c2)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientGraph {
    pub classes: BTreeSet<ClassId>,
    pub edges: BTreeSet<(ClassId, ClassId)>,
}

pub fn quotient_graph(block: &BlockGraph) -> QuotientGraph {
    let classes = block.vertices.keys().map(project).collect();
    let edges = block
        .e_edges
        .iter()
        .map(|(x, y)| {
            let (cx, cy) = (project(x), project(y));
            if cx <= cy {
                (cx, cy)
            } else {
                (cy, cx)
            }
        })
        .collect();
    QuotientGraph { classes, edges }
}

/// Embeds a quotient graph into the labeled Farey graph: each class goes to
/// the vertex whose label lies in it. `None` if some class or edge is missing.
pub fn embed_quotient(q: &QuotientGraph, fg: &FareyGraph) -> Option<BTreeMap<ClassId, usize>> {
    let by_class: HashMap<ClassId, usize> = fg
        .vertices
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.label.as_ref().map(|l| (ClassId::of_word(l), i)))
        .collect();
    let map: BTreeMap<ClassId, usize> =
        q.classes.iter().map(|c| by_class.get(c).map(|&i| (c.clone(), i))).collect::<Option<_>>()?;
    q.edges.iter().all(|(x, y)| fg.adjacent(map[x], map[y])).then_some(map)
}

/// Exponents `s_0, …, s_{k-1}` (with `s_k = 0`) such that
/// `λ = f(t_k)^{s_k} ⋯ f(t_0)^{s_0}` satisfies `t_k = ⟨f(t_k)^λ⟩`.
/// `f(t_k)^{s_k}` commutes with `f(t_k)`, so `s_k` is fixed to 0 without loss.
pub fn lambda_along_path(path: &[Vertex], exp_bound: u32) -> Result<Option<(Vec<i32>, Word)>> {
    let (Some(start), Some(end)) = (path.first(), path.last()) else {
        return Ok(None);
    };
    for w in path.windows(2) {
        if !is_edge(&w[0], &w[1]) {
            return Err(F2Error::NotAnEdge(w[0].to_string(), w[1].to_string()));
        }
    }
    if Vertex::assume_primitive(&class_label(&project(start))) != *start {
        return Err(F2Error::Undefined(format!("{start} is not its own label")));
    }
    let labels: Vec<Word> = path.iter().map(|v| class_label(&project(v))).collect();
    let target = &labels[labels.len() - 1];
    let y = end.word();
    // f(y)^λ = y^{±1} iff λ ∈ ⟨f(y)⟩ g0 for a fixed solution g0.
    let g0s: Vec<Word> = [y.clone(), y.inverse()].iter().filter_map(|yy| conjugator(target, yy)).collect();
    let k = path.len() - 1;
    let in_coset = |lambda: &Word| {
        g0s.iter().any(|g0| {
            let h = lambda.mul(&g0.inverse());
            h.is_identity() || is_power_of(&h, target)
        })
    };
    // Shells of increasing max-norm, so small certificates come first.
    for r in 0..=exp_bound as i32 {
        let mut s = vec![-r; k];
        loop {
            if s.iter().any(|x| x.abs() == r) || k == 0 {
                let mut lambda = Word::identity();
                for i in (0..k).rev() {
                    lambda = lambda.mul(&labels[i].pow(s[i]));
                }
                if in_coset(&lambda) {
                    let mut out = s.clone();
                    out.push(0);
                    return Ok(Some((out, lambda)));
                }
            }
            let Some(i) = (0..k).find(|&i| s[i] < r) else { break };
            s[i] += 1;
            for x in &mut s[..i] {
                *x = -r;
            }
        }
    }
    Ok(None)
}

fn is_power_of(h: &Word, x: &Word) -> bool {
    let n = h.len() / x.len().max(1);
    n > 0 && (x.pow(n as i32) == *h || x.pow(-(n as i32)) == *h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn farey_sizes() {
        let fg = build_farey(0, 16).unwrap();
        assert_eq!((fg.vertices.len(), fg.edges.len()), (4, 5));
        assert_eq!(build_farey(1, 16).unwrap().vertices.len(), 8);
        assert!(build_farey(17, 16).is_err());
    }

    #[test]
    fn labels() {
        let fg = label_farey(&build_farey(2, 16).unwrap());
        assert_eq!(fg.label(0), Some(&w("a")));
        let level1: BTreeSet<_> = (2..4).map(|i| fg.label(i).unwrap().clone()).collect();
        assert_eq!(level1, BTreeSet::from([w("ab"), w("aB")]));
        let all: Vec<_> = fg.vertices.iter().map(|x| x.label.clone().unwrap()).collect();
        assert!(all.contains(&w("aab")));
        for (i, l) in all.iter().enumerate() {
            assert_eq!(&class_label(&ClassId::of_word(l)), l, "vertex {i}");
        }
    }

    #[test]
    fn projections() {
        assert_eq!(project(&v("abA")), project(&v("b")));
        assert_eq!(project(&v("ab")), project(&v("ba")));
        assert_ne!(project(&v("a")), project(&v("b")));
    }

    #[test]
    fn tile_gaps() {
        let c = |s: &str| ClassId::of_word(&w(s));
        assert_eq!(edge_tile_gap(&c("ab"), &c("abb")).unwrap(), 1);
        assert_eq!(edge_tile_gap(&c("a"), &c("ab")).unwrap(), 1);
        assert_eq!(edge_tile_gap(&c("aab"), &c("ab")).unwrap(), 0);
        assert_eq!(edge_tile_gap(&c("b"), &c("ab")), Err(F2Error::ClassIsBaseB));
    }

    #[test]
    fn levels() {
        let fg = label_farey(&build_farey(4, 16).unwrap());
        for x in &fg.vertices {
            assert_eq!(class_level(&ClassId::of_word(x.label.as_ref().unwrap())), x.level);
        }
    }

    #[test]
    fn ext1_quotient_embeds() {
        let e1 = crate::factor_graph::build_ext((&v("a"), &v("b")), 1, 4).unwrap();
        let q = quotient_graph(&e1);
        let expected: BTreeSet<_> = ["a", "b", "ab", "aB"].iter().map(|s| ClassId::of_word(&w(s))).collect();
        assert_eq!(q.classes, expected);
        let fg = label_farey(&build_farey(5, 16).unwrap());
        assert!(embed_quotient(&q, &fg).is_some());
    }

    #[test]
    fn lambdas() {
        let (s, _) = lambda_along_path(&[v("a"), v("b")], 3).unwrap().unwrap();
        assert!(s.iter().all(|&x| x == 0));
        let (s, _) = lambda_along_path(&[v("a"), v("b"), v("ab")], 3).unwrap().unwrap();
        assert!(s.iter().all(|&x| x == 0));
        let (_, lambda) = lambda_along_path(&[v("a"), v("b"), v("bab")], 3).unwrap().unwrap();
        let label = class_label(&project(&v("bab")));
        assert_eq!(label, w("abb"));
        assert_eq!(Vertex::assume_primitive(&label.conjugate(&lambda)), v("bab"));
    }
}
