//! The acceptance battery: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Duration;

use f2::suites::{run_suite, RunConfig, SuiteResult};

/// Trials that actually ran, at least `n` of them.
fn ran(r: &SuiteResult, n: usize) -> Result<(), String> {
    let done = r.trials - r.skipped;
    if done < n {
        return Err(format!("only {done} of {n} trials ran"));
    }
    Ok(())
}

fn part_ran(r: &SuiteResult, name: &str, n: usize) -> Result<(), String> {
    let p = r.part(name).ok_or_else(|| format!("missing part {name}"))?;
    if p.trials - p.skipped < n {
        return Err(format!("{name}: only {} of {n} trials ran", p.trials - p.skipped));
    }
    Ok(())
}

type Extra = fn(&SuiteResult) -> Result<(), String>;

const CRITERIA: [(u8, &str, Extra); 12] = [
    (1, "sticks", |r| {
        ran(r, 200)?;
        if Duration::from_millis(r.wall_ms) >= Duration::from_secs(10) {
            return Err(format!("took {} ms", r.wall_ms));
        }
        Ok(())
    }),
    (2, "ext2-golden", |r| ran(r, 1)),
    (3, "triple-bound", |r| ran(r, 500)),
    (4, "five-characterization", |r| ran(r, 400)),
    (5, "conjugacy-tree", |r| ran(r, 300)),
    (6, "four-neighbours", |r| ran(r, 1)),
    (7, "tile-bounds", |r| {
        part_ran(r, "farey-edges", 1)?;
        part_ran(r, "avoiding-paths", 200)?;
        part_ran(r, "crucial-lemma", 100)
    }),
    (8, "farey-labels", |r| ran(r, 1)),
    (9, "amalgamation", |r| {
        part_ran(r, "canonical-block", 1)?;
        part_ran(r, "random-triples", 100)
    }),
    (10, "axioms", |r| ran(r, 1)),
    (11, "basis-oracle", |r| ran(r, 1000)),
    (12, "block-isomorphism", |r| ran(r, 50)),
];

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut all = true;
    for (n, suite, extra) in CRITERIA {
        let line = match run_suite(suite, &cfg) {
            Ok(r) => {
                let verdict = if r.passed() { extra(&r) } else { Err(format!("{} failures", r.failures.len())) };
                let head = format!("criterion {n:>2} [{suite}] {} trials, {} ms", r.trials - r.skipped, r.wall_ms);
                match verdict {
                    Ok(()) => format!("PASS {head}"),
                    Err(why) => {
                        all = false;
                        let first = r
                            .failures
                            .first()
                            .map(|f| format!("; first: {} expected {} got {}", f.inputs, f.expected, f.actual));
                        format!("FAIL {head}: {why}{}", first.unwrap_or_default())
                    }
                }
            }
            Err(e) => {
                all = false;
                format!("FAIL criterion {n:>2} [{suite}]: {e}")
            }
        };
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
