use f2core::conjugacy::{c_path, is_c_edge};
use f2core::factor_graph::{build_ext, is_edge, standard_ext, sticks};
use f2core::primitive::{Automorphism, PairMove, Vertex};
use f2core::BlockGraph;
use proptest::prelude::*;

fn ext(k: u32) -> BlockGraph {
    (*standard_ext(k, 3).unwrap()).clone()
}

#[test]
fn levels_are_nested() {
    for k in 1..=3 {
        let (small, big) = (ext(k - 1), ext(k));
        for (v, l) in &small.vertices {
            assert_eq!(big.vertices.get(v), Some(l), "{v} at level {k}");
        }
        assert!(small.e_edges.is_subset(&big.e_edges));
        assert!(small.c_edges.is_subset(&big.c_edges));
        assert!(small.par.is_subset(&big.par));
        for (p, w) in &small.orth {
            assert_eq!(big.orth.get(p), Some(w));
        }
    }
}

#[test]
fn sticks_of_every_edge_appear_one_level_up() {
    for k in 1..=3 {
        let (small, big) = (ext(k - 1), ext(k));
        for (x, y) in &small.e_edges {
            for s in sticks(x, y).unwrap() {
                assert!(big.contains(&s), "stick {s} of {x}-{y}");
                assert!(big.has_e_edge(&s, x) && big.has_e_edge(&s, y));
            }
        }
    }
}

#[test]
fn blocks_are_induced() {
    let g = ext(3);
    let vs: Vec<&Vertex> = g.vertices.keys().collect();
    for (i, u) in vs.iter().enumerate() {
        for v in &vs[i + 1..] {
            assert_eq!(g.has_e_edge(u, v), is_edge(u, v), "{u} {v}");
            assert_eq!(g.has_c_edge(u, v), is_c_edge(u, v), "{u} {v}");
        }
    }
}

#[test]
fn conjugacy_paths_stay_inside() {
    let g = ext(3);
    let vs: Vec<&Vertex> = g.vertices.keys().collect();
    for (i, u) in vs.iter().enumerate() {
        for v in &vs[i + 1..] {
            if let Ok(path) = c_path(u, v) {
                assert!(path.iter().all(|p| g.contains(p)), "{u} {v}");
                for w in path.windows(2) {
                    assert!(g.has_c_edge(&w[0], &w[1]));
                }
            }
        }
    }
}

#[test]
fn new_vertices_have_one_older_c_neighbour() {
    for k in 1..=3 {
        let g = ext(k);
        for (v, &l) in g.vertices.iter().filter(|(_, &l)| l == k) {
            let older = g
                .c_edges
                .iter()
                .filter_map(|(x, y)| {
                    if x == v {
                        Some(y)
                    } else if y == v {
                        Some(x)
                    } else {
                        None
                    }
                })
                .filter(|u| g.vertices[*u] < l)
                .count();
            assert!(older <= 1, "{v} has {older} older C-neighbours");
        }
    }
}

fn automorphism(max: usize) -> impl Strategy<Value = Automorphism> {
    prop::collection::vec(0usize..8, 0..=max).prop_map(|moves| {
        moves.into_iter().fold(Automorphism::identity(), |acc, i| acc.compose(&PairMove::ALL[i].as_automorphism()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_are_isomorphic(phi in automorphism(8), k in 0u32..=2) {
        let x = Vertex::new(&phi.apply(Vertex::a().word())).unwrap();
        let y = Vertex::new(&phi.apply(Vertex::b().word())).unwrap();
        let built = build_ext((&x, &y), k, 3).unwrap();
        let moved = ext(k).map(&phi);
        prop_assert_eq!(&built, &moved);
        prop_assert_eq!(built.origin, (x, y));
    }

    #[test]
    fn relations_are_invariant(phi in automorphism(8)) {
        let g = ext(2);
        let vs: Vec<&Vertex> = g.vertices.keys().collect();
        let img = |v: &Vertex| Vertex::new(&phi.apply(v.word())).unwrap();
        for (i, u) in vs.iter().enumerate() {
            for v in &vs[i + 1..] {
                prop_assert_eq!(is_edge(u, v), is_edge(&img(u), &img(v)));
                prop_assert_eq!(is_c_edge(u, v), is_c_edge(&img(u), &img(v)));
            }
        }
    }
}
