//! The reviewed transcription of the `Ext₂(x, y)` diagram (`x = a`,
//! `y = b`) and its canonical JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::error::{F2Error, Result};
use crate::factor_graph::{pair, BlockGraph};
use crate::primitive::Vertex;

pub const EXT2_TRANSCRIPTION: &str = include_str!("../fixtures/ext2_transcription.json");
pub const EXT2_CANONICAL: &str = include_str!("../fixtures/ext2_canonical.json");

#[derive(Clone, Debug, Deserialize)]
pub struct Ext1Listing {
    pub sticks: Vec<String>,
    pub c_edges: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Entry {
    pub vertex: String,
    pub stick_of: Vec<[String; 2]>,
    #[serde(default)]
    pub e_edge: Option<String>,
    #[serde(default)]
    pub c_edge: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct OrthEntry {
    pub pair: [String; 2],
    pub witness: String,
}

/// An E-edge entry of the listing replaced by the actual neighbour.
#[derive(Clone, Debug, Deserialize)]
pub struct Correction {
    pub vertex: String,
    pub listed: String,
    pub corrected: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Transcription {
    pub description: String,
    pub origin: [String; 2],
    pub ext1: Ext1Listing,
    pub ext2: Vec<Entry>,
    pub orthogonal: Vec<OrthEntry>,
    pub other_c2_pairs: String,
    pub corrections: Vec<Correction>,
    /// Listing names in `x, y` to canonical vertex names.
    pub aliases: BTreeMap<String, String>,
}

impl Transcription {
    pub fn load() -> Result<Transcription> {
        serde_json::from_str(EXT2_TRANSCRIPTION).map_err(|e| F2Error::InvalidStructure(e.to_string()))
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex> {
        let canonical =
            self.aliases.get(name).ok_or_else(|| F2Error::InvalidStructure(format!("no alias for {name}")))?;
        canonical.parse()
    }

    /// The listed E-neighbour after corrections.
    fn e_edge(&self, entry: &Entry) -> Option<String> {
        let listed = entry.e_edge.as_ref()?;
        let fix = self.corrections.iter().find(|c| c.vertex == entry.vertex && &c.listed == listed);
        Some(fix.map_or_else(|| listed.clone(), |c| c.corrected.clone()))
    }

    /// The annotated block described by the listing: birth levels, E- and
    /// C-edges as listed, the listed orthogonal pairs, and every other pair
    /// at distance two in the listed C-graph parallel.
    pub fn block(&self) -> Result<BlockGraph> {
        let v = |s: &str| self.vertex(s);
        let (x, y) = (v(&self.origin[0])?, v(&self.origin[1])?);
        let mut vertices = BTreeMap::from([(x.clone(), 0), (y.clone(), 0)]);
        let mut e_edges = BTreeSet::from([pair(&x, &y)]);
        let mut c_edges = BTreeSet::new();
        for s in &self.ext1.sticks {
            let s = v(s)?;
            vertices.insert(s.clone(), 1);
            e_edges.insert(pair(&s, &x));
            e_edges.insert(pair(&s, &y));
        }
        for [p, q] in &self.ext1.c_edges {
            c_edges.insert(pair(&v(p)?, &v(q)?));
        }
        for entry in &self.ext2 {
            let n = v(&entry.vertex)?;
            vertices.insert(n.clone(), 2);
            for [p, q] in &entry.stick_of {
                e_edges.insert(pair(&n, &v(p)?));
                e_edges.insert(pair(&n, &v(q)?));
            }
            if let Some(e) = self.e_edge(entry) {
                e_edges.insert(pair(&n, &v(&e)?));
            }
            if let Some(c) = &entry.c_edge {
                c_edges.insert(pair(&n, &v(c)?));
            }
        }
        let mut orth = BTreeMap::new();
        for o in &self.orthogonal {
            orth.insert(pair(&v(&o.pair[0])?, &v(&o.pair[1])?), v(&o.witness)?);
        }
        let mut adj: BTreeMap<&Vertex, BTreeSet<&Vertex>> = BTreeMap::new();
        for (p, q) in &c_edges {
            adj.entry(p).or_default().insert(q);
            adj.entry(q).or_default().insert(p);
        }
        let mut par = BTreeSet::new();
        if self.other_c2_pairs == "parallel" {
            for nbrs in adj.values() {
                let list: Vec<&&Vertex> = nbrs.iter().collect();
                for (i, p) in list.iter().enumerate() {
                    for q in &list[i + 1..] {
                        let key = pair(p, q);
                        if !orth.contains_key(&key) && !c_edges.contains(&key) {
                            par.insert(key);
                        }
                    }
                }
            }
        }
        Ok(BlockGraph { origin: (x, y), level: 2, vertices, e_edges, c_edges, orth, par })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::{block_from_json, block_to_json};
    use crate::factor_graph::{build_ext, is_edge};
    use crate::word::Word;

    fn substitute(name: &str) -> Option<Vertex> {
        let w: Word = name.replace('x', "a").replace('y', "b").parse().ok()?;
        Vertex::new(&w).ok()
    }

    #[test]
    fn aliases_canonicalize() {
        let t = Transcription::load().unwrap();
        for (name, canonical) in &t.aliases {
            assert_eq!(substitute(name).unwrap().to_string(), *canonical, "{name}");
        }
    }

    #[test]
    fn listed_typos_are_not_edges() {
        let t = Transcription::load().unwrap();
        for c in &t.corrections {
            let u = t.vertex(&c.vertex).unwrap();
            if let Some(listed) = substitute(&c.listed) {
                assert!(!is_edge(&u, &listed), "{} {}", c.vertex, c.listed);
            }
            assert!(is_edge(&u, &t.vertex(&c.corrected).unwrap()));
        }
    }

    #[test]
    fn transcription_matches_construction() {
        let t = Transcription::load().unwrap();
        let listed = t.block().unwrap();
        let built = build_ext((&Vertex::a(), &Vertex::b()), 2, 2).unwrap();
        assert_eq!(listed.vertices, built.vertices);
        assert_eq!(listed.e_edges, built.e_edges);
        assert_eq!(listed.c_edges, built.c_edges);
        assert_eq!(listed.orth, built.orth);
        assert_eq!(listed.par, built.par);
        assert_eq!(listed.e_edges.len(), 57);
        assert_eq!(block_to_json(&listed), EXT2_CANONICAL);
        assert_eq!(block_to_json(&built), EXT2_CANONICAL);
        assert_eq!(block_from_json(EXT2_CANONICAL).unwrap(), built);
    }
}
