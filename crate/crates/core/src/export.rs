//! Canonical JSON and DOT renderings. Every collection is emitted in sorted
//! order, so output is byte-stable and JSON round-trips.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{F2Error, Result};
use crate::factor_graph::{pair, BlockGraph, Pair};
use crate::farey::FareyGraph;
use crate::model::AdmissibleStructure;
use crate::primitive::Vertex;

pub const BLOCK_FORMAT: &str = "f2-block/1";

/// Wire form of a [`BlockGraph`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub format: String,
    pub origin: (Vertex, Vertex),
    pub level: u32,
    /// Vertex with its birth level.
    pub vertices: Vec<(Vertex, u32)>,
    pub e_edges: Vec<Pair>,
    pub c_edges: Vec<Pair>,
    /// Orthogonal pair with its witness.
    pub orthogonal: Vec<(Vertex, Vertex, Vertex)>,
    pub parallel: Vec<Pair>,
}

impl From<&BlockGraph> for BlockJson {
    fn from(g: &BlockGraph) -> BlockJson {
        BlockJson {
            format: BLOCK_FORMAT.into(),
            origin: g.origin.clone(),
            level: g.level,
            vertices: g.vertices.iter().map(|(v, l)| (v.clone(), *l)).collect(),
            e_edges: g.e_edges.iter().cloned().collect(),
            c_edges: g.c_edges.iter().cloned().collect(),
            orthogonal: g.orth.iter().map(|((x, y), w)| (x.clone(), y.clone(), w.clone())).collect(),
            parallel: g.par.iter().cloned().collect(),
        }
    }
}

impl TryFrom<BlockJson> for BlockGraph {
    type Error = F2Error;

    fn try_from(j: BlockJson) -> Result<BlockGraph> {
        if j.format != BLOCK_FORMAT {
            return Err(F2Error::InvalidStructure(format!("unknown format {:?}", j.format)));
        }
        let vertices: BTreeMap<Vertex, u32> = j.vertices.into_iter().collect();
        let known = |v: &Vertex| {
            if vertices.contains_key(v) {
                Ok(())
            } else {
                Err(F2Error::InvalidStructure(format!("{v} is not a listed vertex")))
            }
        };
        let pairs = |list: Vec<Pair>| -> Result<BTreeSet<Pair>> {
            list.into_iter()
                .map(|(x, y)| {
                    known(&x)?;
                    known(&y)?;
                    if x == y {
                        return Err(F2Error::InvalidStructure(format!("loop at {x}")));
                    }
                    Ok(pair(&x, &y))
                })
                .collect()
        };
        known(&j.origin.0)?;
        known(&j.origin.1)?;
        let e_edges = pairs(j.e_edges)?;
        let c_edges = pairs(j.c_edges)?;
        let par = pairs(j.parallel)?;
        let mut orth = BTreeMap::new();
        for (x, y, w) in j.orthogonal {
            known(&w)?;
            let p = pairs(vec![(x, y)])?.into_iter().next().expect("one pair");
            orth.insert(p, w);
        }
        Ok(BlockGraph { origin: j.origin, level: j.level, vertices, e_edges, c_edges, orth, par })
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| F2Error::InvalidStructure(e.to_string()))
}

pub fn block_to_json(g: &BlockGraph) -> String {
    pretty(&BlockJson::from(g))
}

pub fn block_from_json(text: &str) -> Result<BlockGraph> {
    parse::<BlockJson>(text)?.try_into()
}

pub fn farey_to_json(g: &FareyGraph) -> String {
    pretty(g)
}

pub fn farey_from_json(text: &str) -> Result<FareyGraph> {
    let g: FareyGraph = parse(text)?;
    let n = g.vertices.len();
    let bad_edge = g.edges.iter().any(|e| e.from >= n || e.to >= n || e.parent.is_some_and(|p| p >= g.edges.len()));
    let bad_vertex = g.vertices.iter().any(|v| v.parent.is_some_and(|p| p >= g.edges.len()));
    if bad_edge || bad_vertex || g.boundary.iter().any(|&b| b >= g.edges.len()) {
        return Err(F2Error::InvalidStructure("index out of range".into()));
    }
    Ok(g)
}

pub fn structure_to_json(m: &AdmissibleStructure) -> String {
    pretty(m)
}

pub fn structure_from_json(text: &str) -> Result<AdmissibleStructure> {
    let spec: crate::model::StructureSpec = parse(text)?;
    AdmissibleStructure::new(&spec, crate::factor_graph::DEFAULT_LEVEL_CAP)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// E-edges solid, C-edges dashed, the origin edge bold; orthogonal pairs
/// dotted and labeled by their witness.
pub fn block_to_dot(g: &BlockGraph) -> String {
    let mut out = String::from("graph block {\n  node [shape=circle];\n");
    for (v, level) in &g.vertices {
        writeln!(out, "  {} [level={level}];", quote(&v.to_string())).expect("string write");
    }
    let origin = pair(&g.origin.0, &g.origin.1);
    for (x, y) in &g.e_edges {
        let style = if (x, y) == (&origin.0, &origin.1) { " [style=bold]" } else { "" };
        writeln!(out, "  {} -- {}{style};", quote(&x.to_string()), quote(&y.to_string())).expect("string write");
    }
    for (x, y) in &g.c_edges {
        writeln!(out, "  {} -- {} [style=dashed];", quote(&x.to_string()), quote(&y.to_string()))
            .expect("string write");
    }
    for ((x, y), w) in &g.orth {
        writeln!(
            out,
            "  {} -- {} [style=dotted, label={}];",
            quote(&x.to_string()),
            quote(&y.to_string()),
            quote(&w.to_string())
        )
        .expect("string write");
    }
    out.push_str("}\n");
    out
}

pub fn farey_to_dot(g: &FareyGraph) -> String {
    let mut out = String::from("graph farey {\n");
    for (i, v) in g.vertices.iter().enumerate() {
        let label = v.label.as_ref().map_or_else(|| i.to_string(), |w| w.to_string());
        writeln!(out, "  {i} [label={}, level={}];", quote(&label), v.level).expect("string write");
    }
    for e in &g.edges {
        writeln!(out, "  {} -- {};", e.from, e.to).expect("string write");
    }
    out.push_str("}\n");
    out
}

/// One node per glued vertex, named by its least site; edges colored by
/// the component holding them.
pub fn structure_to_dot(m: &AdmissibleStructure) -> String {
    let rel = m.relations();
    let name = |g: usize| quote(&m.sites(g)[0].to_string());
    let mut out = String::from("graph structure {\n");
    for g in 0..m.len() {
        let comps: Vec<String> = m.comps_of(g).map(|c| c.to_string()).collect();
        writeln!(out, "  {} [components={}];", name(g), quote(&comps.join(","))).expect("string write");
    }
    let origins: BTreeSet<(usize, usize)> = m
        .components()
        .filter_map(|c| {
            let x = m.global(&crate::model::Site::new(c.id, c.origin.0.clone()))?;
            let y = m.global(&crate::model::Site::new(c.id, c.origin.1.clone()))?;
            Some((x.min(y), x.max(y)))
        })
        .collect();
    for (&(x, y), comps) in &rel.e {
        let comp = comps.iter().next().expect("component");
        let bold = if origins.contains(&(x, y)) { ", style=bold" } else { "" };
        writeln!(out, "  {} -- {} [component={comp}{bold}];", name(x), name(y)).expect("string write");
    }
    for (&(x, y), comps) in &rel.c {
        let comp = comps.iter().next().expect("component");
        writeln!(out, "  {} -- {} [component={comp}, style=dashed];", name(x), name(y)).expect("string write");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::build_ext;

    fn ext(k: u32) -> BlockGraph {
        build_ext((&Vertex::a(), &Vertex::b()), k, k).unwrap()
    }

    #[test]
    fn block_json_is_stable() {
        let g = ext(1);
        let json = block_to_json(&g);
        let back = block_from_json(&json).unwrap();
        assert_eq!(back, g);
        assert_eq!(block_to_json(&back), json);
        assert_eq!(back.vertices.len(), 6);
    }

    #[test]
    fn block_json_rejects_dangling_edges() {
        let mut j = BlockJson::from(&ext(1));
        j.e_edges.push((Vertex::a(), "aab".parse().unwrap()));
        let text = serde_json::to_string(&j).unwrap();
        assert!(block_from_json(&text).is_err());
        assert!(block_from_json("{").is_err());
    }

    #[test]
    fn dot_styles() {
        let dot = block_to_dot(&ext(2));
        assert!(dot.contains("\"a\" -- \"baB\" [style=dashed];"));
        assert!(dot.contains("\"a\" -- \"b\" [style=bold];"));
    }

    #[test]
    fn farey_round_trip() {
        let g = crate::farey::label_farey(&crate::farey::build_farey(2, 16).unwrap());
        let json = farey_to_json(&g);
        assert_eq!(farey_to_json(&farey_from_json(&json).unwrap()), json);
        assert!(farey_to_dot(&g).starts_with("graph farey {"));
    }

    #[test]
    fn structure_round_trip() {
        let m = AdmissibleStructure::single(&Vertex::a(), &Vertex::b(), 2).unwrap();
        let json = structure_to_json(&m);
        assert_eq!(structure_to_json(&structure_from_json(&json).unwrap()), json);
        assert!(structure_to_dot(&m).contains("style=bold"));
    }
}
