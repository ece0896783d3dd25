//! Random admissible structures, strong extensions and planted defects, and
//! the amalgamation and axiom suites built on them.

use std::collections::{BTreeMap, BTreeSet};

use f2core::conjugacy::is_straight;
use f2core::factor_graph::{build_ext, in_ext, neighbors, standard_ext};
use f2core::model::{
    amalgamate, check_axioms, decompose, is_strong, is_strong_via, quotient_tree_check, validate_admissible,
    AdmissibleStructure, AmalgamCase, ComponentSpec, Site, StructureSpec,
};
use f2core::{Automorphism, Vertex};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use crate::error::Result;
use crate::gen::{random_automorphism, random_basis};
use crate::suites::{check, fail, merge, run_trials, single, Outcome, RunConfig, Tally};

/// Limits for generated structures.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_components: usize,
    pub max_level: u32,
    pub cap: u32,
}

impl Shape {
    pub fn from_config(cfg: &RunConfig) -> Shape {
        Shape { max_components: 4, max_level: cfg.level_cap.min(3), cap: cfg.level_cap.max(3) }
    }
}

const ATTEMPTS: usize = 12;

/// A straight C-path of up to `len` further vertices from a random vertex of
/// the block, staying inside it.
fn straight_path<R: Rng>(rng: &mut R, block: &f2core::BlockGraph, len: usize) -> Vec<Vertex> {
    // Shorter words keep generated structures small.
    let mut by_length: Vec<&Vertex> = block.vertices.keys().collect();
    by_length.sort_by_key(|v| v.word().len());
    let start = (*by_length[..by_length.len().div_ceil(2)].choose(rng).expect("blocks are nonempty")).clone();
    let mut path = vec![start];
    for _ in 0..len {
        let last = path.last().expect("nonempty").clone();
        let next = block
            .c_edges
            .iter()
            .filter_map(|(x, y)| {
                if *x == last {
                    Some(y)
                } else if *y == last {
                    Some(x)
                } else {
                    None
                }
            })
            .filter(|n| !path.contains(n))
            .filter(|n| {
                let mut p = path.clone();
                p.push((*n).clone());
                is_straight(&p).unwrap_or(false)
            })
            .choose(rng)
            .cloned();
        match next {
            Some(n) => path.push(n),
            None => break,
        }
    }
    path
}

/// One of the four shortest E-neighbours of `p`.
fn short_neighbour<R: Rng>(rng: &mut R, p: &Vertex) -> Vertex {
    let mut nbrs: Vec<Vertex> = neighbors(p, 2).into_iter().collect();
    nbrs.sort_by_key(|v| (v.word().len(), v.clone()));
    nbrs[..4].choose(rng).expect("vertices have neighbours").clone()
}

/// A new component glued to `host` along a straight C-path of length 0–2,
/// at identical coordinates: its origin is an edge at the path's first
/// vertex whose block contains the whole path.
fn attach<R: Rng>(rng: &mut R, spec: &mut StructureSpec, host: usize, id: usize, shape: Shape) -> Result<()> {
    let h = spec.components.iter().find(|c| c.id == host).expect("host listed").clone();
    let block = f2core::model::component_block(&h.origin.0, &h.origin.1, h.level, shape.cap)?;
    let len = rng.gen_range(0..=2);
    let mut path = straight_path(rng, &block, len);
    let level = rng.gen_range(1..=shape.max_level.max(1));
    let mut origin = None;
    for _ in 0..ATTEMPTS {
        let p = &path[0];
        let q = short_neighbour(rng, p);
        let points: Vec<&Vertex> = path.iter().collect();
        if in_ext(p, &q, level, &points, shape.cap)? {
            origin = Some((p.clone(), q));
            break;
        }
    }
    let origin = match origin {
        Some(o) => o,
        None => {
            path.truncate(1);
            let q = short_neighbour(rng, &path[0]);
            (path[0].clone(), q)
        }
    };
    spec.components.push(ComponentSpec { id, origin, level });
    for v in path {
        spec.gluing.push((Site::new(host, v.clone()), Site::new(id, v)));
    }
    Ok(())
}

fn next_id(spec: &StructureSpec) -> usize {
    spec.components.iter().map(|c| c.id + 1).max().unwrap_or(0)
}

/// A valid admissible structure with 1 to `max_components` components, or
/// `None` if every attempt produced an invalid one.
pub fn random_structure<R: Rng>(rng: &mut R, shape: Shape) -> Result<Option<AdmissibleStructure>> {
    for _ in 0..ATTEMPTS {
        let (x, y) = random_basis(rng, 6);
        let mut spec = StructureSpec {
            components: vec![ComponentSpec { id: 0, origin: (x, y), level: rng.gen_range(1..=shape.max_level.max(1)) }],
            gluing: Vec::new(),
        };
        let n = rng.gen_range(1..=shape.max_components);
        while spec.components.len() < n {
            let host = spec.components.choose(rng).expect("nonempty").id;
            let id = next_id(&spec);
            attach(rng, &mut spec, host, id, shape)?;
        }
        let m = AdmissibleStructure::new(&spec, shape.cap)?;
        if validate_admissible(&m).is_valid() {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// A strong extension of `a`: some components grow, and new components are
/// glued on, keeping at most `shape.max_components` in total.
pub fn random_extension<R: Rng>(
    rng: &mut R,
    a: &AdmissibleStructure,
    shape: Shape,
) -> Result<Option<AdmissibleStructure>> {
    for _ in 0..ATTEMPTS {
        let mut spec = a.spec();
        for c in &mut spec.components {
            if rng.gen_bool(0.5) && c.level < shape.max_level {
                c.level = rng.gen_range(c.level..=shape.max_level);
            }
        }
        let n = rng.gen_range(spec.components.len()..=shape.max_components.max(spec.components.len()));
        while spec.components.len() < n {
            let host = spec.components.choose(rng).expect("nonempty").id;
            let id = next_id(&spec);
            attach(rng, &mut spec, host, id, shape)?;
        }
        let b = AdmissibleStructure::new(&spec, shape.cap)?;
        if validate_admissible(&b).is_valid() && is_strong(a, &b)? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

fn moved(phi: &Automorphism, v: &str) -> Vertex {
    let v: Vertex = v.parse().expect("fixed vertex");
    Vertex::assume_primitive(&phi.apply(v.word()))
}

/// A known-bad structure with the axiom and admissibility condition it must
/// be rejected under.
pub struct Planted {
    pub name: &'static str,
    pub axiom: u8,
    pub condition: u8,
    pub structure: AdmissibleStructure,
}

/// Two blocks glued so that they close a C-cycle, share a full E-edge, or
/// disagree on par/orth at a shared center; all carried by `φ`.
pub fn planted_defects(phi: &Automorphism, cap: u32) -> Result<Vec<Planted>> {
    let origin = (moved(phi, "a"), moved(phi, "b"));
    let comp = |id, level| ComponentSpec { id, origin: origin.clone(), level };
    let glue = |pairs: &[(&str, &str)]| -> Vec<(Site, Site)> {
        pairs.iter().map(|(p, q)| (Site::new(0, moved(phi, p)), Site::new(1, moved(phi, q)))).collect()
    };
    let build = |levels: (u32, u32), gluing| {
        AdmissibleStructure::new(&StructureSpec { components: vec![comp(0, levels.0), comp(1, levels.1)], gluing }, cap)
    };
    // aab ~ a ~ AAB in one component, a ~ baB in the other.
    let cycle = build((2, 2), glue(&[("aab", "a"), ("AAB", "baB")]))?;
    let edge = build((1, 1), glue(&[("a", "a"), ("b", "b")]))?;
    // At the center a, glue a parallel pair of one copy onto an orthogonal
    // pair of the other.
    let block = standard_ext(3, cap)?;
    let a = Vertex::a();
    let nbrs: BTreeSet<&Vertex> = block
        .c_edges
        .iter()
        .filter_map(|(x, y)| {
            if *x == a {
                Some(y)
            } else if *y == a {
                Some(x)
            } else {
                None
            }
        })
        .collect();
    let par = block.par.iter().find(|(x, y)| nbrs.contains(x) && nbrs.contains(y)).expect("parallel pair at a");
    let orth = block
        .orth
        .keys()
        .find(|(x, y)| (*x == par.0 || *y == par.0) && nbrs.contains(x) && nbrs.contains(y))
        .expect("orthogonal pair at a");
    let other = if orth.0 == par.0 { &orth.1 } else { &orth.0 };
    let (p0, p1, o) = (par.0.to_string(), par.1.to_string(), other.to_string());
    let conflict = build((3, 3), glue(&[("a", "a"), (&p0, &p0), (&p1, &o)]))?;
    Ok(vec![
        Planted { name: "C-cycle", axiom: 3, condition: 3, structure: cycle },
        Planted { name: "shared E-edge", axiom: 2, condition: 7, structure: edge },
        Planted { name: "par/orth conflict", axiom: 4, condition: 4, structure: conflict },
    ])
}

fn describe(m: &AdmissibleStructure) -> String {
    serde_json::to_string(&m.spec()).expect("serializable")
}

fn amalgam_trial<R: Rng>(rng: &mut R, shape: Shape) -> Result<Outcome> {
    let small = Shape { max_components: 2, ..shape };
    let Some(a) = random_structure(rng, small)? else { return Ok(Outcome::Skip) };
    let Some(b) = random_extension(rng, &a, shape)? else { return Ok(Outcome::Skip) };
    let Some(c) = random_extension(rng, &a, shape)? else { return Ok(Outcome::Skip) };
    let inputs = || format!("A={} B={} C={}", describe(&a), describe(&b), describe(&c));
    let d = match amalgamate(&a, &b, &c) {
        Ok(d) => d,
        Err(e) => return Ok(fail(inputs(), "an amalgam", e)),
    };
    let report = validate_admissible(&d.structure);
    if !report.is_valid() {
        return Ok(fail(inputs(), "D admissible", format!("{:?}", report.violated())));
    }
    let b_ids: BTreeMap<usize, usize> = b.component_ids().into_iter().map(|i| (i, i)).collect();
    let strong = (is_strong_via(&b, &d.structure, &b_ids)?, is_strong_via(&c, &d.structure, &d.c_map)?);
    if strong != (true, true) {
        return Ok(fail(inputs(), "B ≤ D and C ≤ D", format!("{strong:?}")));
    }
    let parts: BTreeSet<BTreeSet<usize>> =
        d.structure.component_ids().iter().map(|&i| d.structure.members(i)).collect();
    Ok(check(
        quotient_tree_check(&d.structure) && decompose(&d.structure) == parts,
        inputs,
        "tree quotient, unique components",
        "violated",
    ))
}

pub(crate) fn amalgamation(cfg: &RunConfig) -> Tally {
    let shape = Shape::from_config(cfg);
    let (x, y) = (Vertex::a(), Vertex::b());
    let s = |k| AdmissibleStructure::single(&x, &y, k);
    let canonical = match (s(1), s(2), s(3)) {
        (Ok(a), Ok(b), Ok(c)) => match amalgamate(&a, &b, &c) {
            Ok(d) => {
                let block = d.structure.component(0).map(|c| (*c.block).clone());
                let expected = build_ext((&x, &y), 3, 3).ok();
                check(
                    d.structure.component_ids().len() == 1
                        && block == expected
                        && d.cases.contains(&AmalgamCase::CanonicalBlock),
                    || "Ext1 ≤ Ext2, Ext3".into(),
                    "D = Ext3",
                    format!("{:?}", d.cases),
                )
            }
            Err(e) => fail("Ext1 ≤ Ext2, Ext3", "an amalgam", e),
        },
        _ => fail("Ext1, Ext2, Ext3", "blocks", "construction failed"),
    };
    let random = run_trials(cfg, 100, |rng, _| {
        amalgam_trial(rng, shape).unwrap_or_else(|e| fail("generation", "structures", e))
    });
    merge(single(|| canonical).named("canonical-block"), random.named("random-triples"))
}

fn axiom_trial<R: Rng>(rng: &mut R, t: u64, shape: Shape, window: u32) -> Result<Outcome> {
    match t % 3 {
        0 => {
            let (x, y) = random_basis(rng, 8);
            let k = rng.gen_range(1..=shape.max_level.max(1));
            let m = AdmissibleStructure::single(&x, &y, k)?;
            let r = check_axioms(&m, window);
            Ok(check(
                r.exact_axioms_hold(),
                || format!("Ext{k}({x}, {y})"),
                "axioms (1)-(8)",
                format!("{:?}", r.violated()),
            ))
        }
        1 => {
            let Some(m) = random_structure(rng, shape)? else { return Ok(Outcome::Skip) };
            let r = check_axioms(&m, window);
            Ok(check(r.exact_axioms_hold(), || describe(&m), "axioms (1)-(8)", format!("{:?}", r.violated())))
        }
        _ => {
            let phi = random_automorphism(rng, 6);
            for p in planted_defects(&phi, shape.cap)? {
                let axioms = check_axioms(&p.structure, window).violated();
                let conditions = validate_admissible(&p.structure).violated();
                if !axioms.contains(&p.axiom) || !conditions.contains(&p.condition) {
                    return Ok(fail(
                        format!("{} under {:?}", p.name, phi),
                        format!("axiom {} and condition {}", p.axiom, p.condition),
                        format!("axioms {axioms:?}, conditions {conditions:?}"),
                    ));
                }
            }
            Ok(Outcome::Pass)
        }
    }
}

pub(crate) fn axioms(cfg: &RunConfig) -> Tally {
    let shape = Shape::from_config(cfg);
    let window = cfg.window.min(3);
    run_trials(cfg, 60, |rng, t| {
        axiom_trial(rng, t, shape, window).unwrap_or_else(|e| fail("generation", "structures", e))
    })
}
