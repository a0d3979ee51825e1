//! Acceptance criteria. Each criterion runs once under sequential and once
//! under parallel execution; the two runs must agree bit for bit.

use std::process::ExitCode;
use std::time::Instant;

use parbayes_core::engine::{ceil_log2, conflicts_detected, run, RoundProgram, Step};
use parbayes_core::generate::Generator;
use parbayes_core::junction::{
    is_chordal, junction_posteriors, junction_tree, running_intersection_holds, separator_marginals,
};
use parbayes_core::polytree::{polytree_marginals, polytree_marginals_traced, polytree_posteriors};
use parbayes_core::tree::{
    preorder, reverse_arcs, tree_marginals, tree_marginals_traced, tree_posteriors,
};
use parbayes_core::{oracle, Engine, Error, Network, Result};
use rand::Rng;

const TOL: f64 = 1e-9;

/// Result of one criterion under one execution mode.
#[derive(Default)]
struct Outcome {
    failures: Vec<String>,
    /// Probability bits and round counts, compared across modes.
    fingerprint: Vec<u64>,
    note: String,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    fn record(&mut self, dists: &[Vec<f64>], rounds: usize) {
        self.fingerprint
            .extend(dists.iter().flatten().map(|x| x.to_bits()));
        self.fingerprint.push(rounds as u64);
    }
}

fn max_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn marginals_on_polytrees(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let start = Instant::now();
    for case in 0..200 {
        let mut g = Generator::new(1000 + case);
        let n = g.rng().random_range(3..=12);
        let net: Network = g.polytree(n, &[2, 3], 3);
        let (m, stats) = polytree_marginals(&net, e)?;
        let err = max_error(&m, &oracle::marginals(&net)?);
        out.check(err <= TOL, || format!("case {case}: error {err:e}"));
        out.record(&m, stats.rounds);
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(secs < 60.0, || format!("took {secs:.1}s"));
    out.note = format!("200 polytrees in {secs:.2}s");
    Ok(out)
}

fn posteriors_on_trees_and_polytrees(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let mut g = Generator::new(2000 + case);
        let n = g.rng().random_range(3..=12);
        let k = g.rng().random_range(1..=2);
        let tree = case < 100;
        let net: Network = if tree {
            g.tree(n, &[2, 3])
        } else {
            g.polytree(n, &[2, 3], 3)
        };
        let ev = g.evidence(&net, k);
        let (p, stats) = if tree {
            tree_posteriors(&net, &ev, e)?
        } else {
            polytree_posteriors(&net, &ev, e)?
        };
        let err = max_error(&p, &oracle::posteriors(&net, &ev)?);
        worst = worst.max(err);
        out.check(err <= TOL, || format!("case {case}: error {err:e}"));
        out.record(&p, stats.rounds);
    }
    out.note = format!("100 trees, 100 polytrees, max error {worst:.1e}");
    Ok(out)
}

fn multiply_connected(case: u64) -> (Network, parbayes_core::Evidence) {
    let mut g = Generator::new(3000 + case);
    let n = g.rng().random_range(4..=10);
    let k = g.rng().random_range(0..=2);
    let net: Network = g.multiply_connected(n, &[2], 14, 3);
    let ev = g.evidence(&net, k);
    (net, ev)
}

fn junction_correctness(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut widest = 0;
    for case in 0..50 {
        let (net, ev) = multiply_connected(case);
        out.check(net.edges().len() <= 14, || {
            format!("case {case}: too many edges")
        });
        let jt = junction_tree(&net)?;
        widest = widest.max(jt.tree.width());
        out.check(is_chordal(&jt.triangulated), || {
            format!("case {case}: not chordal")
        });
        out.check(running_intersection_holds(&jt.tree), || {
            format!("case {case}: running intersection fails")
        });
        let (p, stats) = junction_posteriors(&net, &ev, e)?;
        let err = max_error(&p, &oracle::posteriors(&net, &ev)?);
        out.check(err <= TOL, || format!("case {case}: error {err:e}"));
        out.record(&p, stats.rounds);
    }
    out.note = format!("50 nets, widest clique {widest}");
    Ok(out)
}

fn chain_rounds(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    for n in [8usize, 64, 1024] {
        let net: Network = Generator::new(n as u64).chain(n, &[2, 3]);
        let (m, stats, done) = tree_marginals_traced(&net, e)?;
        let log = n.trailing_zeros() as usize;
        out.check(stats.rounds == log, || {
            format!("n={n}: {} rounds, expected {log}", stats.rounds)
        });
        for (t, flags) in done.iter().enumerate() {
            let count = flags.iter().filter(|&&d| d).count();
            out.check(count == 1 << t, || {
                format!("n={n}: {count} done after round {t}")
            });
        }
        out.record(&m, stats.rounds);
    }
    out.note = "n = 8, 64, 1024".into();
    Ok(out)
}

fn tree_depth_rounds(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut summary = Vec::new();
    for d in [2usize, 10, 100, 1000] {
        let mut g = Generator::new(d as u64);
        let balanced: Network = if d <= 10 {
            g.complete_tree(d, 2, &[2])
        } else {
            g.spider(8, d, &[2])
        };
        let skewed: Network = g.caterpillar(d, &[2]);
        let bound = ceil_log2(d) + 1;
        for (shape, net) in [("balanced", balanced), ("caterpillar", skewed)] {
            let (m, stats) = tree_marginals(&net, e)?;
            out.check(stats.rounds <= bound, || {
                format!("{shape} d={d}: {} rounds > {bound}", stats.rounds)
            });
            summary.push(stats.rounds.to_string());
            out.record(&m, stats.rounds);
        }
    }
    out.note = format!("rounds {}", summary.join(","));
    Ok(out)
}

fn ancestral_halving(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut strict = 0;
    for case in 0..50 {
        let mut g = Generator::new(6000 + case);
        let n = g.rng().random_range(3..=60);
        let net: Network = g.polytree(n, &[2, 3], 3);
        let (m, stats, trace) = polytree_marginals_traced(&net, e)?;
        if let Some((t, v)) = trace.halving_violation() {
            out.check(false, || format!("case {case}: variable {v} at round {t}"));
        }
        if let Some((t, v)) = trace.poly_excess() {
            out.check(false, || {
                format!("case {case}: |P| > |R| at {v}, round {t}")
            });
        }
        strict += trace.strict_halving_violation().is_some() as usize;
        out.record(&m, stats.rounds);
    }
    out.note = format!("active-to-active halving missed on {strict}/50 nets");
    Ok(out)
}

fn reversal_preserves_joint(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let mut g = Generator::new(7000 + case);
        let n = g.rng().random_range(2..=10);
        let net: Network = g.tree(n, &[2, 3]);
        let root = g.rng().random_range(0..n);
        let (m, _) = tree_marginals(&net, e)?;
        let (ord, _) = preorder(&net, root, e)?;
        let (rev, stats) = reverse_arcs(&net, &ord, &m, e)?;
        let diff = oracle::max_joint_difference(&net, &rev)?;
        worst = worst.max(diff);
        out.check(diff <= TOL, || {
            format!("case {case}: joint differs by {diff:e}")
        });
        let tables: Vec<Vec<f64>> = rev.cpts().iter().map(|c| c.entries().to_vec()).collect();
        out.record(&tables, stats.rounds);
    }
    out.note = format!("max joint difference {worst:.1e}");
    Ok(out)
}

fn work_bound(e: &Engine) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut tightest: f64 = 0.0;
    for case in 0..50 {
        let (net, ev) = multiply_connected(case);
        let jt = junction_tree(&net)?;
        let r = *net.ranges().iter().max().unwrap() as u128;
        let bound = r.saturating_pow(3 * jt.tree.width() as u32);
        let (p, stats) = junction_posteriors(&net, &ev, e)?;
        let peak = stats.peak_step_work as u128;
        tightest = tightest.max(peak as f64 / bound as f64);
        out.check(peak <= bound, || {
            format!("case {case}: work {peak} > {bound}")
        });
        let (fast, s1) = separator_marginals(&jt.tree, e)?;
        let (plain, s2) = tree_marginals(jt.tree.network(), e)?;
        let err = max_error(&fast, &plain);
        out.check(err <= TOL, || {
            format!("case {case}: paths differ by {err:e}")
        });
        out.record(&p, stats.rounds);
        out.record(&fast, s1.rounds);
        out.record(&plain, s2.rounds);
    }
    out.note = format!("peak work at most {:.3} of r^(3w)", tightest);
    Ok(out)
}

/// Two processors writing the same cell in the same round.
struct Clash;

impl RoundProgram for Clash {
    type Cell = u32;

    fn is_active(&self, _: usize, cells: &[u32]) -> bool {
        cells[0] == 0
    }

    fn step(&self, _: usize, i: usize, _: &[u32]) -> Result<Step<u32>> {
        Ok(Step::write(0, i as u32 + 1, 1))
    }
}

fn crew_discipline(before: usize) -> Outcome {
    let mut out = Outcome::default();
    out.check(before == 0, || {
        format!("{before} conflicts during the criteria")
    });
    for e in [Engine::sequential(), Engine::parallel()] {
        let caught = matches!(
            run(vec![0u32; 4], &Clash, &e),
            Err(Error::WriteConflict { target: 0, .. })
        );
        out.check(caught, || format!("{:?}: conflict not caught", e.execution));
    }
    let after = conflicts_detected();
    out.check(after == before + 2, || format!("counter at {after}"));
    out.note = format!("{before} conflicts in criteria runs, adversarial writes caught");
    out
}

type Criterion = (usize, &'static str, fn(&Engine) -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            1,
            "polytree marginals match the oracle",
            marginals_on_polytrees,
        ),
        (
            2,
            "tree and polytree posteriors match the oracle",
            posteriors_on_trees_and_polytrees,
        ),
        (
            3,
            "junction posteriors, chordality, running intersection",
            junction_correctness,
        ),
        (
            4,
            "chain finishes in log2 n rounds, 2^t done after round t",
            chain_rounds,
        ),
        (5, "tree rounds within ceil(log2 d) + 1", tree_depth_rounds),
        (
            6,
            "ancestral subnetwork halving and |P| <= |R|",
            ancestral_halving,
        ),
        (
            7,
            "arc reversal preserves the joint",
            reversal_preserves_joint,
        ),
        (
            10,
            "junction work within r^(3w), separator path agrees",
            work_bound,
        ),
    ];
    let mut lines = Vec::new();
    let mut identical = Vec::new();
    for (id, title, body) in criteria {
        let seq = body(&Engine::sequential().audited());
        let par = body(&Engine::parallel().audited());
        let (pass, detail) = match (seq, par) {
            (Ok(s), Ok(p)) => {
                let same = s.fingerprint == p.fingerprint;
                identical.push((id, same));
                let mut failures = s.failures;
                failures.extend(p.failures.into_iter().map(|f| format!("parallel: {f}")));
                if failures.is_empty() {
                    (true, s.note)
                } else {
                    (false, failures.join("; "))
                }
            }
            (Err(err), _) | (_, Err(err)) => {
                identical.push((id, false));
                (false, format!("error: {err}"))
            }
        };
        lines.push((id, title, pass, detail));
    }

    let crew = crew_discipline(conflicts_detected());
    let crew_ok = crew.failures.is_empty();
    let crew_detail = if crew_ok {
        crew.note
    } else {
        crew.failures.join("; ")
    };
    lines.push((8, "CREW write discipline", crew_ok, crew_detail));

    let differing: Vec<String> = identical
        .iter()
        .filter(|(_, same)| !same)
        .map(|(id, _)| id.to_string())
        .collect();
    let det_detail = if differing.is_empty() {
        format!(
            "{} criteria bit-identical across execution modes",
            identical.len()
        )
    } else {
        format!("criteria {} differ between modes", differing.join(", "))
    };
    lines.push((
        9,
        "sequential and parallel runs agree",
        differing.is_empty(),
        det_detail,
    ));

    lines.sort_by_key(|l| l.0);
    let mut all = true;
    for (id, title, pass, detail) in &lines {
        all &= pass;
        let verdict = if *pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} - {title} ({detail})");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
