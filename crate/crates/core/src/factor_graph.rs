//! E-edge geometry: neighbourhoods, sticks, block extensions and windowed
//! searches.
//!
//! AF₂ is locally infinite, so every search takes a window bounding the
//! exponents in the enumeration `x^m y^δ x^k` of a vertex's neighbours.
//! `None` from a windowed search means "not found within bounds".

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::conjugacy::{classify_pair, Frame, Verdict};
use crate::error::{F2Error, Result};
use crate::primitive::{complete_to_basis, is_basis, Automorphism, Vertex};
use crate::word::{class_key, Word};

pub const DEFAULT_LEVEL_CAP: u32 = 4;

/// Unordered vertex pair, stored sorted.
pub type Pair = (Vertex, Vertex);

pub fn pair(u: &Vertex, v: &Vertex) -> Pair {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

pub fn is_edge(u: &Vertex, v: &Vertex) -> bool {
    u != v && is_basis(u.word(), v.word())
}

/// `{⟨x^m y^δ x^k⟩ : |m|, |k| ≤ window, δ = ±1}` with `y` the completion of
/// `x`.
pub fn neighbors(v: &Vertex, window: u32) -> BTreeSet<Vertex> {
    let x = v.word();
    let y = complete_to_basis(x).expect("vertices are primitive");
    let w = window as i32;
    let mut out = BTreeSet::new();
    for m in -w..=w {
        let left = x.pow(m);
        for delta in [-1, 1] {
            let mid = left.mul(&y.pow(delta));
            for k in -w..=w {
                out.insert(Vertex::assume_primitive(&mid.mul(&x.pow(k))));
            }
        }
    }
    out
}

/// The four common neighbours `xy, xy⁻¹, x⁻¹y, x⁻¹y⁻¹` of an edge.
pub fn sticks(u: &Vertex, v: &Vertex) -> Result<BTreeSet<Vertex>> {
    if !is_edge(u, v) {
        return Err(F2Error::NotAnEdge(u.to_string(), v.to_string()));
    }
    Ok(raw_sticks(u.word(), v.word()))
}

fn raw_sticks(x: &Word, y: &Word) -> BTreeSet<Vertex> {
    let (xi, yi) = (x.inverse(), y.inverse());
    [x.mul(y), x.mul(&yi), xi.mul(y), xi.mul(&yi)].iter().map(Vertex::assume_primitive).collect()
}

/// A finite annotated fragment of AF₂ realizing `Ext_k(e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGraph {
    pub origin: Pair,
    pub level: u32,
    /// Vertex with its birth level.
    pub vertices: BTreeMap<Vertex, u32>,
    pub e_edges: BTreeSet<Pair>,
    pub c_edges: BTreeSet<Pair>,
    /// Orthogonal C-distance-2 pairs with their witness.
    pub orth: BTreeMap<Pair, Vertex>,
    pub par: BTreeSet<Pair>,
}

impl BlockGraph {
    pub fn contains(&self, v: &Vertex) -> bool {
        self.vertices.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_e_edge(&self, u: &Vertex, v: &Vertex) -> bool {
        self.e_edges.contains(&pair(u, v))
    }

    pub fn has_c_edge(&self, u: &Vertex, v: &Vertex) -> bool {
        self.c_edges.contains(&pair(u, v))
    }

    pub fn e_neighbours(&self, v: &Vertex) -> impl Iterator<Item = &Vertex> + '_ {
        let v = v.clone();
        self.e_edges.iter().filter_map(move |(x, y)| {
            if *x == v {
                Some(y)
            } else if *y == v {
                Some(x)
            } else {
                None
            }
        })
    }

    /// The sub-block of vertices born at level `≤ k`.
    pub fn restrict(&self, k: u32) -> BlockGraph {
        let vertices: BTreeMap<_, _> =
            self.vertices.iter().filter(|(_, &l)| l <= k).map(|(v, l)| (v.clone(), *l)).collect();
        let keep = |p: &Pair| vertices.contains_key(&p.0) && vertices.contains_key(&p.1);
        BlockGraph {
            origin: self.origin.clone(),
            level: k.min(self.level),
            e_edges: self.e_edges.iter().filter(|p| keep(p)).cloned().collect(),
            c_edges: self.c_edges.iter().filter(|p| keep(p)).cloned().collect(),
            orth: self.orth.iter().filter(|(p, _)| keep(p)).map(|(p, w)| (p.clone(), w.clone())).collect(),
            par: self.par.iter().filter(|p| keep(p)).cloned().collect(),
            vertices,
        }
    }

    /// Image under an automorphism; annotations are preserved because
    /// automorphisms act on AF₂ by graph automorphisms.
    pub fn map(&self, phi: &Automorphism) -> BlockGraph {
        let f = |v: &Vertex| Vertex::assume_primitive(&phi.apply(v.word()));
        let fp = |p: &Pair| pair(&f(&p.0), &f(&p.1));
        BlockGraph {
            origin: (f(&self.origin.0), f(&self.origin.1)),
            level: self.level,
            vertices: self.vertices.iter().map(|(v, l)| (f(v), *l)).collect(),
            e_edges: self.e_edges.iter().map(fp).collect(),
            c_edges: self.c_edges.iter().map(fp).collect(),
            orth: self.orth.iter().map(|(p, w)| (fp(p), f(w))).collect(),
            par: self.par.iter().map(fp).collect(),
        }
    }
}

fn induced_edges(vertices: &[Vertex]) -> BTreeSet<Pair> {
    (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let vi = &vertices[i];
            vertices[i + 1..].iter().filter(|vj| is_edge(vi, vj)).map(|vj| pair(vi, vj)).collect::<Vec<_>>()
        })
        .collect()
}

/// C-edges and parallel/orthogonal pairs among the given vertices.
fn annotate(vertices: &[Vertex]) -> (BTreeSet<Pair>, BTreeMap<Pair, Vertex>, BTreeSet<Pair>) {
    let mut classes: HashMap<Vec<_>, Vec<Vertex>> = HashMap::new();
    for v in vertices {
        classes.entry(class_key(v.word())).or_default().push(v.clone());
    }
    let results: Vec<(Pair, usize)> = classes
        .into_values()
        .filter(|c| c.len() > 1)
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|class| {
            let mut out = Vec::new();
            for (i, u) in class.iter().enumerate() {
                let frame = Frame::new(u);
                for v in &class[i + 1..] {
                    let d = frame.conjugator(v).expect("same class").a_length();
                    if d <= 2 {
                        out.push((pair(u, v), d));
                    }
                }
            }
            out
        })
        .collect();
    let mut c_edges = BTreeSet::new();
    let mut orth = BTreeMap::new();
    let mut par = BTreeSet::new();
    for (p, d) in results {
        if d == 1 {
            c_edges.insert(p);
        } else {
            let class = classify_pair(&p.0, &p.1).expect("distance two");
            match class.verdict {
                Verdict::Parallel => {
                    par.insert(p);
                }
                Verdict::Orthogonal => {
                    orth.insert(p, class.witness.expect("orthogonal witness"));
                }
            }
        }
    }
    (c_edges, orth, par)
}

fn assemble(origin: Pair, level: u32, vertices: BTreeMap<Vertex, u32>) -> BlockGraph {
    let list: Vec<Vertex> = vertices.keys().cloned().collect();
    let e_edges = induced_edges(&list);
    let (c_edges, orth, par) = annotate(&list);
    BlockGraph { origin, level, vertices, e_edges, c_edges, orth, par }
}

/// `Ext_k(e)`: `Ext_{k-1}(e)` together with the sticks of every edge of the
/// (induced) graph `Ext_{k-1}(e)`.
pub fn build_ext(e: (&Vertex, &Vertex), k: u32, cap: u32) -> Result<BlockGraph> {
    if k > cap {
        return Err(F2Error::LevelCapExceeded { level: k, cap });
    }
    let (x, y) = e;
    if !is_edge(x, y) {
        return Err(F2Error::NotAnEdge(x.to_string(), y.to_string()));
    }
    let mut vertices: BTreeMap<Vertex, u32> = [(x.clone(), 0), (y.clone(), 0)].into_iter().collect();
    let mut edges = BTreeSet::from([pair(x, y)]);
    for level in 1..=k {
        let new: BTreeSet<Vertex> = edges
            .par_iter()
            .flat_map_iter(|(p, q)| raw_sticks(p.word(), q.word()))
            .filter(|s| !vertices.contains_key(s))
            .collect();
        let old: Vec<Vertex> = vertices.keys().cloned().collect();
        let new: Vec<Vertex> = new.into_iter().collect();
        let added: Vec<Pair> = new
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, n)| {
                old.iter().chain(&new[i + 1..]).filter(|o| is_edge(n, o)).map(|o| pair(n, o)).collect::<Vec<_>>()
            })
            .collect();
        edges.extend(added);
        vertices.extend(new.into_iter().map(|v| (v, level)));
    }
    let origin = (x.clone(), y.clone());
    let list: Vec<Vertex> = vertices.keys().cloned().collect();
    let (c_edges, orth, par) = annotate(&list);
    Ok(BlockGraph { origin, level: k, vertices, e_edges: edges, c_edges, orth, par })
}

/// The worklist variant: at each step, for every edge `e'` with
/// `Ext₁(e') ⊆ X` but `Ext₂(e') ⊄ X`, add the sticks of all edges of
/// `Ext₁(e')`.
pub fn build_ext_worklist(e: (&Vertex, &Vertex), k: u32, cap: u32) -> Result<BlockGraph> {
    if k > cap {
        return Err(F2Error::LevelCapExceeded { level: k, cap });
    }
    let (x, y) = e;
    if !is_edge(x, y) {
        return Err(F2Error::NotAnEdge(x.to_string(), y.to_string()));
    }
    let mut vertices: BTreeMap<Vertex, u32> = [(x.clone(), 0), (y.clone(), 0)].into_iter().collect();
    let seed: BTreeSet<Vertex> = raw_sticks(x.word(), y.word());
    vertices.extend(seed.into_iter().map(|s| (s, 1)));
    for level in 2..=k {
        let list: Vec<Vertex> = vertices.keys().cloned().collect();
        let edges = induced_edges(&list);
        let mut new = BTreeSet::new();
        for (p, q) in &edges {
            let ext1: BTreeSet<Vertex> = raw_sticks(p.word(), q.word());
            if !ext1.iter().all(|s| vertices.contains_key(s)) {
                continue;
            }
            let mut members: Vec<Vertex> = ext1.into_iter().collect();
            members.push(p.clone());
            members.push(q.clone());
            let ext1_edges = induced_edges(&members);
            let ext2: BTreeSet<Vertex> = ext1_edges.iter().flat_map(|(s, t)| raw_sticks(s.word(), t.word())).collect();
            new.extend(ext2.into_iter().filter(|s| !vertices.contains_key(s)));
        }
        vertices.extend(new.into_iter().map(|v| (v, level)));
    }
    if k == 0 {
        vertices.retain(|_, l| *l == 0);
    }
    Ok(assemble((x.clone(), y.clone()), k, vertices))
}

fn standard_cache() -> &'static Mutex<Vec<Arc<BlockGraph>>> {
    static CACHE: OnceLock<Mutex<Vec<Arc<BlockGraph>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// `Ext_k(a, b)`, memoized per level.
pub fn standard_ext(k: u32, cap: u32) -> Result<Arc<BlockGraph>> {
    if k > cap {
        return Err(F2Error::LevelCapExceeded { level: k, cap });
    }
    let mut cache = standard_cache().lock().expect("cache lock");
    while cache.len() <= k as usize {
        let level = cache.len() as u32;
        let g = build_ext((&Vertex::a(), &Vertex::b()), level, level)?;
        cache.push(Arc::new(g));
    }
    Ok(cache[k as usize].clone())
}

/// Automorphism `τ` with `τ(x) = a`, `τ(y) = b` for an edge `(x, y)`.
pub fn edge_chart(x: &Vertex, y: &Vertex) -> Result<Automorphism> {
    Automorphism::new(x.word().clone(), y.word().clone())
        .inverse()
        .ok_or_else(|| F2Error::NotAnEdge(x.to_string(), y.to_string()))
}

/// True iff all `points` lie in `Ext_k(x, y)`, decided by transporting to the
/// standard block.
pub fn in_ext(x: &Vertex, y: &Vertex, k: u32, points: &[&Vertex], cap: u32) -> Result<bool> {
    let tau = edge_chart(x, y)?;
    let block = standard_ext(k, cap)?;
    Ok(points.iter().all(|p| block.contains(&Vertex::assume_primitive(&tau.apply(p.word())))))
}

/// Shortest path by windowed BFS; `None` if longer than `bound` at this
/// window.
pub fn distance(u: &Vertex, v: &Vertex, bound: usize, window: u32) -> Option<(usize, Vec<Vertex>)> {
    bfs_path(u, v, bound, window, |_| true)
}

/// Which vertices a path must keep off its interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvoidanceSpec {
    pub center: Vertex,
    /// `None` for the whole conjugacy class.
    pub radius: Option<usize>,
}

impl AvoidanceSpec {
    pub fn forbids(&self, x: &Vertex) -> bool {
        match Frame::new(&self.center).conjugator(x) {
            None => false,
            Some(g) => self.radius.is_none_or(|r| g.a_length() <= r),
        }
    }
}

pub fn find_path_avoiding(
    u: &Vertex,
    v: &Vertex,
    avoid: &AvoidanceSpec,
    max_len: usize,
    window: u32,
) -> Option<Vec<Vertex>> {
    bfs_path(u, v, max_len, window, |x| !avoid.forbids(x)).map(|(_, p)| p)
}

fn bfs_path(
    u: &Vertex,
    v: &Vertex,
    bound: usize,
    window: u32,
    interior_ok: impl Fn(&Vertex) -> bool,
) -> Option<(usize, Vec<Vertex>)> {
    if u == v {
        return Some((0, vec![u.clone()]));
    }
    let mut parent: HashMap<Vertex, Vertex> = HashMap::new();
    let mut seen: HashSet<Vertex> = HashSet::from([u.clone()]);
    let mut queue = VecDeque::from([(u.clone(), 0usize)]);
    while let Some((x, d)) = queue.pop_front() {
        if d == bound {
            continue;
        }
        // Direct edges to the target are checked exactly, not through the window.
        if is_edge(&x, v) {
            let mut path = vec![v.clone(), x.clone()];
            let mut cur = x;
            while let Some(p) = parent.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some((path.len() - 1, path));
        }
        if d + 1 == bound {
            continue;
        }
        for n in neighbors(&x, window) {
            if !seen.contains(&n) && interior_ok(&n) {
                seen.insert(n.clone());
                parent.insert(n.clone(), x.clone());
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

/// Smallest `k ≤ k_max` with an edge `e` such that `u, v ∈ Ext_k(e)`, and
/// the least such witness edge. Candidates are edges of the windowed ball of
/// radius `k + 1` around `u`.
pub fn min_block_level(u: &Vertex, v: &Vertex, k_max: u32, window: u32, cap: u32) -> Result<Option<(u32, Pair)>> {
    for k in 0..=k_max {
        let block = standard_ext(k, cap)?;
        let radius = k as usize + 1;
        let ball = windowed_ball(u, radius, window);
        let mut candidates: BTreeSet<Pair> = BTreeSet::new();
        for x in ball.iter().filter(|(_, d)| **d < radius).map(|(x, _)| x) {
            for y in neighbors(x, window) {
                candidates.insert(pair(x, &y));
            }
        }
        let hit = candidates.into_par_iter().find_first(|(x, y)| {
            let tau = edge_chart(x, y).expect("candidate edges are edges");
            [u, v].iter().all(|p| block.contains(&Vertex::assume_primitive(&tau.apply(p.word()))))
        });
        if let Some(e) = hit {
            return Ok(Some((k, e)));
        }
    }
    Ok(None)
}

fn windowed_ball(u: &Vertex, radius: usize, window: u32) -> HashMap<Vertex, usize> {
    let mut dist = HashMap::from([(u.clone(), 0usize)]);
    let mut frontier = vec![u.clone()];
    for d in 1..=radius {
        let mut next = Vec::new();
        for x in &frontier {
            for n in neighbors(x, window) {
                if !dist.contains_key(&n) {
                    dist.insert(n.clone(), d);
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Least `k'` such that the origin edge lies in `Ext_{k'}(e')` for every edge
/// `e'` of `Ext_k(a, b)`.
pub fn estimate_g(k: u32, cap: u32) -> Result<u32> {
    let block = standard_ext(k, cap)?;
    let (a, b) = (Vertex::a(), Vertex::b());
    let per_edge: Vec<Result<u32>> = block
        .e_edges
        .par_iter()
        .map(|(x, y)| {
            for kp in 0..=cap {
                if in_ext(x, y, kp, &[&a, &b], cap)? {
                    return Ok(kp);
                }
            }
            Err(F2Error::LevelCapExceeded { level: cap + 1, cap })
        })
        .collect();
    per_edge.into_iter().try_fold(0, |acc, r| r.map(|kp| acc.max(kp)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn edges() {
        assert!(is_edge(&v("a"), &v("b")));
        assert!(!is_edge(&v("b"), &v("Aba")));
        assert!(is_edge(&v("b"), &v("bab")));
    }

    #[test]
    fn neighbor_counts() {
        assert_eq!(neighbors(&v("b"), 0), BTreeSet::from([v("a")]));
        assert_eq!(neighbors(&v("b"), 1).len(), 9);
        for n in neighbors(&v("a"), 2) {
            assert!(is_edge(&v("a"), &n));
        }
    }

    #[test]
    fn sticks_of_standard_edge() {
        let s = sticks(&v("a"), &v("b")).unwrap();
        assert_eq!(s, BTreeSet::from([v("ab"), v("aB"), v("Ab"), v("AB")]));
        let n1 = neighbors(&v("a"), 1);
        let n2 = neighbors(&v("b"), 1);
        assert!(s.iter().all(|x| n1.contains(x) && n2.contains(x)));
        assert!(sticks(&v("b"), &v("Aba")).is_err());
    }

    #[test]
    fn ext_sizes() {
        let (a, b) = (v("a"), v("b"));
        assert_eq!(build_ext((&a, &b), 0, 4).unwrap().len(), 2);
        let e1 = build_ext((&a, &b), 1, 4).unwrap();
        assert_eq!(e1.len(), 6);
        assert_eq!(e1.c_edges, BTreeSet::from([pair(&v("ab"), &v("AB")), pair(&v("Ab"), &v("aB"))]));
        let e2 = build_ext((&a, &b), 2, 4).unwrap();
        assert_eq!(e2.len(), 22);
        assert_eq!(e2.orth.get(&pair(&v("abA"), &v("Aba"))), Some(&a));
        assert_eq!(e2.restrict(1), e1);
        assert!(matches!(build_ext((&a, &b), 5, 4), Err(F2Error::LevelCapExceeded { .. })));
        assert!(build_ext((&b, &v("Aba")), 1, 4).is_err());
    }

    #[test]
    fn worklist_agrees_at_level_two() {
        let (a, b) = (v("a"), v("b"));
        assert_eq!(build_ext_worklist((&a, &b), 2, 4).unwrap(), build_ext((&a, &b), 2, 4).unwrap());
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&v("a"), &v("b"), 3, 1).unwrap().0, 1);
        let (d, path) = distance(&v("b"), &v("Aba"), 3, 1).unwrap();
        assert_eq!(d, 2);
        assert_eq!(path[1], v("a"));
        assert_eq!(distance(&v("ab"), &v("ab"), 3, 1).unwrap().0, 0);
    }

    #[test]
    fn avoiding_paths() {
        let c_a = AvoidanceSpec { center: v("a"), radius: None };
        assert_eq!(find_path_avoiding(&v("b"), &v("ab"), &c_a, 3, 1).unwrap().len(), 2);
        let c_b = AvoidanceSpec { center: v("b"), radius: None };
        let p = find_path_avoiding(&v("ab"), &v("aB"), &c_b, 3, 1).unwrap();
        assert_eq!(p.len(), 3);
        assert!(!c_b.forbids(&p[1]));
    }

    #[test]
    fn block_levels() {
        let (a, b) = (v("a"), v("b"));
        assert_eq!(min_block_level(&a, &b, 2, 1, 4).unwrap(), Some((0, pair(&a, &b))));
        assert_eq!(min_block_level(&v("ab"), &v("AB"), 2, 1, 4).unwrap(), Some((1, pair(&a, &b))));
        assert_eq!(min_block_level(&v("abA"), &v("Aba"), 2, 1, 4).unwrap(), Some((2, pair(&a, &b))));
    }

    #[test]
    fn g_estimates() {
        assert_eq!(estimate_g(0, 4).unwrap(), 0);
        let g1 = estimate_g(1, 4).unwrap();
        let g2 = estimate_g(2, 4).unwrap();
        assert!(g1 <= g2);
    }
}
