//! Named verification suites. Every trial draws from its own generator
//! `trial_rng(seed, trial)`, so failures replay from `(seed, trial)` and
//! aggregation does not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use f2core::conjugacy::{c_distance, c_path, common_neighbour_count, is_c_edge, line_neighbours, Frame, Line};
use f2core::factor_graph::{build_ext, is_edge, neighbors, standard_ext};
use f2core::farey::{build_farey, class_label, edge_tile_gap, label_farey, lambda_along_path, project, ClassId};
use f2core::primitive::{is_basis, is_basis_by_commutator, is_primitive};
use f2core::word::{tile_b, Gen};
use f2core::{BlockGraph, Vertex, Word};
use rand::seq::IteratorRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::gen::{random_basis, random_conjugator, random_vertex, random_word, trial_rng};

pub const REPORT_FORMAT: &str = "f2-report/1";

pub const SUITES: [&str; 12] = [
    "sticks",
    "ext2-golden",
    "triple-bound",
    "five-characterization",
    "conjugacy-tree",
    "four-neighbours",
    "tile-bounds",
    "farey-labels",
    "amalgamation",
    "axioms",
    "basis-oracle",
    "block-isomorphism",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub window: u32,
    pub level_cap: u32,
    /// Overrides the suite's default trial count.
    pub trials: Option<usize>,
    /// Runs only this trial.
    pub only: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig { seed: 20_240_601, window: 4, level_cap: 3, trials: None, only: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: u64,
    pub seed: u64,
    pub inputs: String,
    pub expected: String,
    pub actual: String,
}

/// Counts for one labeled part of a suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub name: String,
    pub trials: usize,
    pub skipped: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub format: String,
    pub suite: String,
    pub config: RunConfig,
    pub trials: usize,
    /// Trials whose premise could not be met within the search bounds.
    pub skipped: usize,
    pub failures: Vec<Failure>,
    pub parts: Vec<Part>,
    pub wall_ms: u64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn part(&self, name: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.name == name)
    }
}

/// What a trial found when it did not pass.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub inputs: String,
    pub expected: String,
    pub actual: String,
}

pub enum Outcome {
    Pass,
    Skip,
    Fail(Mismatch),
}

pub(crate) fn fail(inputs: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Outcome {
    Outcome::Fail(Mismatch { inputs: inputs.into(), expected: expected.to_string(), actual: actual.to_string() })
}

pub(crate) fn check(
    ok: bool,
    inputs: impl FnOnce() -> String,
    expected: impl ToString,
    actual: impl ToString,
) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        fail(inputs(), expected, actual)
    }
}

pub(crate) struct Tally {
    trials: usize,
    skipped: usize,
    failures: Vec<Failure>,
    parts: Vec<Part>,
}

impl Tally {
    fn new(trials: usize, skipped: usize, failures: Vec<Failure>) -> Tally {
        Tally { trials, skipped, failures, parts: Vec::new() }
    }

    /// Labels this tally as one part of a suite.
    pub(crate) fn named(mut self, name: &str) -> Tally {
        self.parts =
            vec![Part { name: name.into(), trials: self.trials, skipped: self.skipped, failures: self.failures.len() }];
        self
    }
}

pub(crate) fn run_trials<F>(cfg: &RunConfig, default: usize, f: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, u64) -> Outcome + Sync,
{
    let n = cfg.trials.unwrap_or(default) as u64;
    let ids: Vec<u64> = match cfg.only {
        Some(t) => vec![t],
        None => (0..n).collect(),
    };
    let outcomes: Vec<(u64, Outcome)> = ids.par_iter().map(|&t| (t, f(&mut trial_rng(cfg.seed, t), t))).collect();
    let mut tally = Tally::new(outcomes.len(), 0, Vec::new());
    for (trial, o) in outcomes {
        match o {
            Outcome::Pass => {}
            Outcome::Skip => tally.skipped += 1,
            Outcome::Fail(m) => tally.failures.push(Failure {
                trial,
                seed: cfg.seed,
                inputs: m.inputs,
                expected: m.expected,
                actual: m.actual,
            }),
        }
    }
    tally
}

pub(crate) fn single(f: impl FnOnce() -> Outcome) -> Tally {
    match f() {
        Outcome::Fail(m) => Tally::new(
            1,
            0,
            vec![Failure { trial: 0, seed: 0, inputs: m.inputs, expected: m.expected, actual: m.actual }],
        ),
        Outcome::Skip => Tally::new(1, 1, Vec::new()),
        Outcome::Pass => Tally::new(1, 0, Vec::new()),
    }
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteResult> {
    let start = Instant::now();
    let mut tally = match name {
        "sticks" => sticks(cfg),
        "ext2-golden" => single(ext2_golden),
        "triple-bound" => triple_bound(cfg),
        "five-characterization" => five_characterization(cfg),
        "conjugacy-tree" => conjugacy_tree(cfg),
        "four-neighbours" => four_neighbours(cfg),
        "tile-bounds" => tile_bounds(cfg)?,
        "farey-labels" => farey_labels(cfg)?,
        "amalgamation" => crate::model_suites::amalgamation(cfg),
        "axioms" => crate::model_suites::axioms(cfg),
        "basis-oracle" => basis_oracle(cfg),
        "block-isomorphism" => block_isomorphism(cfg)?,
        _ => return Err(CliError::UnknownSuite(name.to_string())),
    };
    if tally.parts.is_empty() {
        tally = tally.named(name);
    }
    Ok(SuiteResult {
        format: REPORT_FORMAT.into(),
        suite: name.into(),
        config: cfg.clone(),
        trials: tally.trials,
        skipped: tally.skipped,
        failures: tally.failures,
        parts: tally.parts,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

fn show(vs: &BTreeSet<Vertex>) -> String {
    let items: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

/// Largest `|m|, |k|` with `σ⁻¹(y) = ⟨b^m a^{±1} b^k⟩` in the frame of `x`.
fn neighbour_offset(x: &Vertex, y: &Vertex) -> u32 {
    let pulled = Frame::new(x).pull(y);
    pulled.word().syllables().iter().filter(|s| s.gen == Gen::B).map(|s| s.exp.unsigned_abs()).max().unwrap_or(0)
}

fn sticks(cfg: &RunConfig) -> Tally {
    run_trials(cfg, 200, |rng, _| {
        let (x, y) = random_basis(rng, 12);
        let (xw, yw) = (x.word(), y.word());
        let (xi, yi) = (xw.inverse(), yw.inverse());
        let expected: BTreeSet<Vertex> =
            [xw.mul(yw), xw.mul(&yi), xi.mul(yw), xi.mul(&yi)].iter().map(Vertex::assume_primitive).collect();
        // A window that reaches y reaches every stick.
        let window = neighbour_offset(&x, &y) + 2;
        let found: BTreeSet<Vertex> = neighbors(&x, window).into_iter().filter(|t| *t != y && is_edge(t, &y)).collect();
        check(found == expected && found.len() == 4, || format!("x={x} y={y}"), show(&expected), show(&found))
    })
}

fn ext2_golden() -> Outcome {
    use f2core::export::block_to_json;
    use f2core::golden::{Transcription, EXT2_CANONICAL};
    let listed = match Transcription::load().and_then(|t| t.block()) {
        Ok(b) => b,
        Err(e) => return fail("transcription", "a block", e),
    };
    let built = match build_ext((&Vertex::a(), &Vertex::b()), 2, 2) {
        Ok(b) => b,
        Err(e) => return fail("build_ext((a,b),2)", "a block", e),
    };
    let counts = |g: &BlockGraph| (g.len(), g.e_edges.len(), g.c_edges.len(), g.orth.len(), g.par.len());
    if listed != built {
        return fail("Ext2(a,b)", format!("{:?}", counts(&listed)), format!("{:?}", counts(&built)));
    }
    if counts(&built) != (22, 57, 14, 6, 0) {
        return fail("Ext2(a,b) counts", "(22, 57, 14, 6, 0)", format!("{:?}", counts(&built)));
    }
    let json = block_to_json(&built);
    check(json == EXT2_CANONICAL, || "canonical JSON".into(), "byte-equal fixture", "differs")
}

fn triple_bound(cfg: &RunConfig) -> Tally {
    let window = cfg.window;
    run_trials(cfg, 500, |rng, _| {
        let x = random_vertex(rng, 10);
        let frame = Frame::new(&x);
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                // A C-neighbour, so the triple shares lines.
                let d = if rng.gen_bool(0.5) { 1 } else { -1 };
                frame.push_conjugate(&Word::from_syllables([(Gen::A, d), (Gen::B, rng.gen_range(-2..=2))]))
            } else {
                frame.push_conjugate(&random_conjugator(rng, 3, 2))
            }
        };
        let (y, z) = loop {
            let (y, z) = (pick(rng), pick(rng));
            if x != y && y != z && x != z {
                break (y, z);
            }
        };
        let common = neighbors(&x, window).into_iter().filter(|t| is_edge(t, &y) && is_edge(t, &z)).count();
        check(common <= 1, || format!("x={x} y={y} z={z}"), "≤ 1", common)
    })
}

fn five_characterization(cfg: &RunConfig) -> Tally {
    run_trials(cfg, 400, |rng, t| {
        let x = random_vertex(rng, 10);
        let frame = Frame::new(&x);
        let d = if rng.gen_bool(0.5) { 1 } else { -1 };
        let m = rng.gen_range(-2..=2);
        if t % 2 == 0 {
            let y = frame.push_conjugate(&Word::from_syllables([(Gen::A, d), (Gen::B, m)]));
            let count = common_neighbour_count(&x, &y, 3);
            return check(count >= 5, || format!("C-edge x={x} y={y}"), "≥ 5 at window 3", count);
        }
        let y = loop {
            let y = match t % 6 {
                1 => {
                    let e = if rng.gen_bool(0.5) { 1 } else { -1 };
                    let g =
                        Word::from_syllables([(Gen::A, d), (Gen::B, m), (Gen::A, e), (Gen::B, rng.gen_range(-2..=2))]);
                    frame.push_conjugate(&g)
                }
                3 => Vertex::assume_primitive(frame.sigma().image(Gen::A)),
                _ => random_vertex(rng, 10),
            };
            if x != y && !is_c_edge(&x, &y) {
                break y;
            }
        };
        let count = common_neighbour_count(&x, &y, 8);
        check(count <= 4, || format!("non-C pair x={x} y={y}"), "≤ 4 at window 8", count)
    })
}

/// The vertex `⟨b^h⟩` keyed by `h` with any leading `b`-power removed.
fn model_key(h: &Word) -> Word {
    h.strip_leading_b()
}

/// Windowed C-neighbours of `⟨b^h⟩`: `⟨b^{a^δ b^m h}⟩` for `|m| ≤ window`.
fn model_c_neighbours(h: &Word, window: i32) -> Vec<Word> {
    let mut out = Vec::new();
    for d in [1, -1] {
        for m in -window..=window {
            out.push(model_key(&Word::from_syllables([(Gen::A, d), (Gen::B, m)]).mul(h)));
        }
    }
    out
}

/// Breadth-first layers from `h` up to `depth`: distance and number of
/// shortest paths for every vertex reached.
fn c_layers(h: &Word, depth: usize, window: i32) -> HashMap<Word, (usize, u64)> {
    let mut seen = HashMap::from([(model_key(h), (0usize, 1u64))]);
    let mut frontier = vec![model_key(h)];
    for d in 1..=depth {
        let mut next: HashMap<Word, u64> = HashMap::new();
        for u in &frontier {
            let paths = seen[u].1;
            for n in model_c_neighbours(u, window) {
                if !seen.contains_key(&n) {
                    *next.entry(n).or_default() += paths;
                }
            }
        }
        frontier = next.keys().cloned().collect();
        seen.extend(next.into_iter().map(|(n, p)| (n, (d, p))));
    }
    seen
}

/// The C-graph induced on the windowed ball of radius 2 around `x` is a tree.
fn ball_is_tree(frame: &Frame) -> std::result::Result<(), String> {
    let mut hs = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..2 {
        layer = layer.iter().flat_map(|h| model_c_neighbours(h, 1)).filter(|n| !hs.contains(n)).collect();
        layer.sort();
        layer.dedup();
        hs.extend(layer.iter().cloned());
    }
    let vs: Vec<Vertex> = hs.iter().map(|h| frame.push_conjugate(h)).collect();
    let frames: Vec<Frame> = vs.iter().map(Frame::new).collect();
    let mut edges = 0;
    let mut parent: Vec<usize> = (0..vs.len()).collect();
    fn root(p: &mut [usize], i: usize) -> usize {
        if p[i] != i {
            let r = root(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            if frames[i].conjugator(&vs[j]).is_some_and(|g| g.a_length() == 1) {
                edges += 1;
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri == rj {
                    return Err(format!("cycle through {} and {}", vs[i], vs[j]));
                }
                parent[ri] = rj;
            }
        }
    }
    if edges + 1 != vs.len() {
        return Err(format!("{} vertices, {edges} edges", vs.len()));
    }
    Ok(())
}

fn conjugacy_tree(cfg: &RunConfig) -> Tally {
    run_trials(cfg, 300, |rng, t| {
        let x = random_vertex(rng, 10);
        let frame = Frame::new(&x);
        let g = random_conjugator(rng, 10, 1);
        let n: usize = g.syllables().iter().filter(|s| s.gen == Gen::A).map(|s| s.exp.unsigned_abs() as usize).sum();
        let y = frame.push_conjugate(&g);
        let inputs = || format!("x={x} g={g}");
        if c_distance(&x, &y) != Some(n) {
            return fail(inputs(), n, format!("{:?}", c_distance(&x, &y)));
        }
        if c_path(&x, &y).map(|p| p.len()).ok() != Some(n + 1) {
            return fail(inputs(), "a C-path of that length", "none");
        }
        let window = g.syllables().iter().filter(|s| s.gen == Gen::B).map(|s| s.exp.abs()).max().unwrap_or(0).max(1);
        // Meet in the middle: every shortest b → b^g path crosses the
        // layer at distance ⌈n/2⌉ exactly once.
        let (n1, n2) = (n.div_ceil(2), n / 2);
        let (left, right) = (c_layers(&Word::identity(), n1, window), c_layers(&g, n2, window));
        let shortest = left.iter().filter_map(|(v, &(d1, _))| right.get(v).map(|&(d2, _)| d1 + d2)).min();
        let count: u64 = left
            .iter()
            .filter(|(_, &(d1, _))| d1 == n1)
            .filter_map(|(v, &(_, p1))| right.get(v).filter(|&&(d2, _)| d2 == n2).map(|&(_, p2)| p1 * p2))
            .sum();
        if shortest != Some(n) || count != 1 {
            return fail(inputs(), format!("one path of length {n}"), format!("length {shortest:?}, {count} paths"));
        }
        if t % 10 == 0 {
            if let Err(e) = ball_is_tree(&frame) {
                return fail(format!("ball around {x}"), "a tree", e);
            }
        }
        Outcome::Pass
    })
}

fn unit(d: i32, m: i32) -> Word {
    Word::from_syllables([(Gen::A, d), (Gen::B, m)])
}

/// Every point of `l` (windowed) has exactly one E-neighbour on `other`.
fn bijectively_adjacent(l: &Line, other: &Line, window: u32) -> bool {
    let far = other.points(window + 12);
    l.points(window).iter().all(|p| far.iter().filter(|q| is_edge(p, q)).count() == 1)
}

fn four_neighbours(cfg: &RunConfig) -> Tally {
    run_trials(cfg, 40, |rng, _| {
        let x = random_vertex(rng, 8);
        let frame = Frame::new(&x);
        let d = if rng.gen_bool(0.5) { 1 } else { -1 };
        let m = rng.gen_range(-2..=2);
        let line = Line::new(&x, &frame.push_conjugate(&unit(d, m))).expect("unit conjugators give C-edges");
        let nbrs = line_neighbours(&line);
        let inputs = || format!("x={x} δ={d} m={m}");
        if nbrs.len() != 4 {
            return fail(inputs(), 4, nbrs.len());
        }
        for k in (-6..=6).filter(|&k| k != 0) {
            let other = Line::new(&x, &frame.push_conjugate(&unit(d, m + k))).expect("C-edge");
            let listed = nbrs.contains(&other);
            let adjacent = bijectively_adjacent(&line, &other, 3);
            let expected = k == 1 || k == -1;
            if listed != expected || adjacent != expected {
                return fail(
                    format!("{} k={k}", inputs()),
                    format!("neighbour={expected}"),
                    format!("listed={listed} bijective={adjacent}"),
                );
            }
        }
        Outcome::Pass
    })
}

fn vertex_tile(v: &Vertex) -> Option<u32> {
    tile_b(&v.word().cyclic_reduce().0).ok()
}

pub(crate) fn merge(mut a: Tally, b: Tally) -> Tally {
    a.trials += b.trials;
    a.skipped += b.skipped;
    a.failures.extend(b.failures);
    a.parts.extend(b.parts);
    a
}

fn checks(mismatches: Vec<Mismatch>, count: usize) -> Tally {
    let failures = mismatches
        .into_iter()
        .map(|m| Failure { trial: 0, seed: 0, inputs: m.inputs, expected: m.expected, actual: m.actual })
        .collect();
    Tally::new(count, 0, failures)
}

pub const FAREY_CAP: u32 = 16;

fn tile_bounds(cfg: &RunConfig) -> Result<Tally> {
    let fg = label_farey(&build_farey(5, FAREY_CAP)?);
    let base_b = project(&Vertex::b());
    let mut bad = Vec::new();
    let mut edges = 0;
    for e in &fg.edges {
        let (c1, c2) =
            (ClassId::of_word(fg.label(e.from).expect("labeled")), ClassId::of_word(fg.label(e.to).expect("labeled")));
        if c1 == base_b || c2 == base_b {
            continue;
        }
        edges += 1;
        let gap = edge_tile_gap(&c1, &c2)?;
        if gap > 1 {
            bad.push(Mismatch {
                inputs: format!("edge {c1:?} {c2:?}"),
                expected: "≤ 1".into(),
                actual: gap.to_string(),
            });
        }
    }
    let farey = checks(bad, edges).named("farey-edges");
    let paths = run_trials(cfg, 200, |rng, _| {
        let step = |v: &Vertex, rng: &mut ChaCha8Rng| {
            neighbors(v, 2).into_iter().filter(|n| project(n) != base_b).choose(rng).expect("neighbours off C(b)")
        };
        let mut v = Vertex::a();
        for _ in 0..rng.gen_range(0..6) {
            v = step(&v, rng);
        }
        let start = v.clone();
        let k = rng.gen_range(1..=5u32);
        let mut path = vec![start.clone()];
        for _ in 0..k {
            v = step(&v, rng);
            path.push(v.clone());
        }
        let (t0, t1) = (vertex_tile(&start).expect("off C(b)"), vertex_tile(&v).expect("off C(b)"));
        let gap = t0.abs_diff(t1);
        check(gap <= k, || format!("path {}", join(&path)), format!("≤ {k}"), gap)
    })
    .named("avoiding-paths");
    let crucial_cfg = RunConfig { seed: cfg.seed ^ 0xC0C0, trials: Some(cfg.trials.unwrap_or(100)), ..cfg.clone() };
    let crucial = run_trials(&crucial_cfg, 100, |rng, _| {
        let k = rng.gen_range(1..=4usize);
        let m = k + rng.gen_range(0..=2usize);
        let b = Vertex::b();
        // Resample until λ is found within the exponent bound.
        let found = (0..20).find_map(|_| {
            let mut path = vec![Vertex::a()];
            for _ in 0..k {
                let next = neighbors(path.last().expect("nonempty"), 1)
                    .into_iter()
                    .filter(|n| c_distance(&b, n).is_none_or(|d| d > m))
                    .choose(rng)
                    .expect("neighbours off C_m(b)");
                path.push(next);
            }
            match lambda_along_path(&path, 4) {
                Ok(Some((_, lambda))) => Some((path, lambda)),
                _ => None,
            }
        });
        let Some((path, lambda)) = found else {
            return Outcome::Skip;
        };
        let bound = (1u32 << (k + 1)) - 1;
        let tiles: Vec<u32> = lambda
            .syllables()
            .iter()
            .filter(|s| s.gen == Gen::B)
            .map(|s| s.exp.unsigned_abs())
            .take(m + 2 - k)
            .collect();
        check(
            tiles.iter().all(|&t| t <= bound),
            || format!("k={k} m={m} path {} λ={lambda}", join(&path)),
            format!("tiles ≤ {bound}"),
            format!("{tiles:?}"),
        )
    })
    .named("crucial-lemma");
    Ok(merge(merge(farey, paths), crucial))
}

fn join(path: &[Vertex]) -> String {
    path.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn in_p_ab(w: &Word) -> bool {
    let letters = w.to_letters();
    letters.first().is_some_and(|l| l.gen == Gen::A && !l.inverse)
        && letters.iter().all(|l| !(l.gen == Gen::A && l.inverse))
        && letters.last().is_some_and(|l| l.gen == Gen::B)
        && w.is_cyclically_reduced()
}

fn farey_labels(_cfg: &RunConfig) -> Result<Tally> {
    let fg = label_farey(&build_farey(5, FAREY_CAP)?);
    let mut bad = Vec::new();
    let labels: Vec<&Word> = fg.vertices.iter().map(|v| v.label.as_ref().expect("labeled")).collect();
    let distinct: BTreeSet<&Word> = labels.iter().copied().collect();
    if distinct.len() != labels.len() {
        bad.push(Mismatch {
            inputs: "labels".into(),
            expected: labels.len().to_string(),
            actual: distinct.len().to_string(),
        });
    }
    for l in &labels {
        let ok = is_primitive(l).0
            && (**l == Word::a() || **l == Word::b() || in_p_ab(l))
            && class_label(&ClassId::of_word(l)) == **l;
        if !ok {
            bad.push(Mismatch {
                inputs: l.to_string(),
                expected: "primitive label in P_ab".into(),
                actual: "not".into(),
            });
        }
    }
    let mut certificates = 0;
    for e in fg.edges.iter().filter(|e| fg.vertices[e.from].level <= 4 && fg.vertices[e.to].level <= 4) {
        for (s, d) in [(e.from, e.to), (e.to, e.from)] {
            let fx = labels[s];
            let x = Vertex::assume_primitive(fx);
            let target = ClassId::of_word(labels[d]);
            for y in neighbors(&x, 2).into_iter().filter(|n| project(n) == target) {
                certificates += 1;
                let found = lambda_along_path(&[x.clone(), y.clone()], 4)?;
                let ok = found.as_ref().is_some_and(|(s, lambda)| {
                    *lambda == fx.pow(s[0]) && Vertex::assume_primitive(&labels[d].conjugate(lambda)) == y
                });
                if !ok {
                    bad.push(Mismatch {
                        inputs: format!("x={x} y={y}"),
                        expected: "y = ⟨f([y])^{x^k}⟩, |k| ≤ 4".into(),
                        actual: format!("{found:?}"),
                    });
                }
            }
        }
    }
    Ok(checks(bad, labels.len() + certificates))
}

fn basis_oracle(cfg: &RunConfig) -> Tally {
    run_trials(cfg, 1000, |rng, t| {
        let (u, v) = match t % 3 {
            0 => (random_word(rng, 12), random_word(rng, 12)),
            _ => loop {
                let (x, y) = random_basis(rng, 5);
                let (mut u, v) = (x.word().clone(), y.word().clone());
                if t % 3 == 2 {
                    // Near misses: a basis with one factor perturbed.
                    u = u.mul(&random_word(rng, 2));
                }
                if u.len() <= 12 && v.len() <= 12 {
                    break (u, v);
                }
            },
        };
        let (n, c) = (is_basis(&u, &v), is_basis_by_commutator(&u, &v));
        check(n == c, || format!("({u}, {v})"), format!("commutator oracle {c}"), format!("Nielsen {n}"))
    })
}

fn block_isomorphism(cfg: &RunConfig) -> Result<Tally> {
    let max_level = cfg.level_cap.min(3);
    let standards: Vec<BlockGraph> = (0..=max_level)
        .map(|k| standard_ext(k, cfg.level_cap).map(|g| (*g).clone()))
        .collect::<std::result::Result<_, _>>()?;
    let tally = run_trials(cfg, 50, |rng, t| {
        let phi = crate::gen::random_automorphism(rng, 10);
        let (x, y) = (Vertex::assume_primitive(&phi.image_a), Vertex::assume_primitive(&phi.image_b));
        let k = if max_level == 0 { 0 } else { 1 + (t as u32 % max_level) };
        let built = match build_ext((&x, &y), k, cfg.level_cap) {
            Ok(g) => g,
            Err(e) => return fail(format!("({x}, {y})"), "a block", e),
        };
        // φ is an explicit isomorphism from the standard block.
        let image = standards[k as usize].map(&phi);
        if image != built {
            return fail(format!("({x}, {y}) level {k}"), "φ(Ext_k(a,b))", "a different block");
        }
        check(
            fingerprint(&built) == fingerprint(&standards[k as usize]),
            || format!("({x}, {y})"),
            "equal invariants",
            "differ",
        )
    });
    Ok(tally)
}

/// Isomorphism invariant: per birth level, the sorted (E-degree, C-degree)
/// profile, and the relation sizes.
type Fingerprint = (BTreeMap<u32, Vec<(usize, usize)>>, [usize; 4]);

fn fingerprint(g: &BlockGraph) -> Fingerprint {
    let mut deg: BTreeMap<&Vertex, (usize, usize)> = g.vertices.keys().map(|v| (v, (0, 0))).collect();
    for (x, y) in &g.e_edges {
        deg.get_mut(x).expect("vertex").0 += 1;
        deg.get_mut(y).expect("vertex").0 += 1;
    }
    for (x, y) in &g.c_edges {
        deg.get_mut(x).expect("vertex").1 += 1;
        deg.get_mut(y).expect("vertex").1 += 1;
    }
    let mut by_level: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (v, l) in &g.vertices {
        by_level.entry(*l).or_default().push(deg[v]);
    }
    by_level.values_mut().for_each(|d| d.sort());
    (by_level, [g.len(), g.e_edges.len(), g.orth.len(), g.par.len()])
}
