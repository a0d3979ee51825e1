//! Round-synchronous CREW execution.
//!
//! A [`RoundProgram`] assigns one processor per cell. Each round, every
//! active processor reads a frozen snapshot of the previous state and emits
//! writes; the engine checks that no two processors wrote the same cell,
//! then installs the writes as the next snapshot. Physical execution may be
//! sequential or data-parallel; both produce identical states and
//! statistics because every step is a pure function of the snapshot.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static CONFLICTS_DETECTED: AtomicUsize = AtomicUsize::new(0);

/// Total write conflicts the engine has detected in this process.
pub fn conflicts_detected() -> usize {
    CONFLICTS_DETECTED.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// Execution settings shared by every algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Engine {
    pub execution: Execution,
    /// Overrides the default round limit of `2 * ceil(log2 n) + 4`.
    pub max_rounds: Option<usize>,
    /// Validate every intermediate network between rounds.
    pub audit: bool,
}

impl Engine {
    pub fn sequential() -> Self {
        Engine::default()
    }

    pub fn parallel() -> Self {
        Engine {
            execution: Execution::Parallel,
            ..Engine::default()
        }
    }

    pub fn audited(mut self) -> Self {
        self.audit = true;
        self
    }

    pub fn with_max_rounds(mut self, limit: usize) -> Self {
        self.max_rounds = Some(limit);
        self
    }

    fn limit_for(&self, processors: usize) -> usize {
        self.max_rounds
            .unwrap_or_else(|| 2 * ceil_log2(processors) + 4)
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Writes produced by one processor in one phase.
#[derive(Debug, Clone)]
pub struct Step<C> {
    pub writes: Vec<(usize, C)>,
    /// CPT-entry multiply-adds spent.
    pub work: u64,
}

impl<C> Step<C> {
    pub fn idle() -> Self {
        Step {
            writes: Vec::new(),
            work: 0,
        }
    }

    pub fn write(target: usize, cell: C, work: u64) -> Self {
        Step {
            writes: vec![(target, cell)],
            work,
        }
    }
}

/// A per-processor update executed in lockstep rounds.
pub trait RoundProgram: Sync {
    type Cell: Clone + Send + Sync;

    /// Snapshot-isolated sub-steps per round. All of them count as one round.
    fn phases(&self) -> usize {
        1
    }

    /// Whether `processor` still has work; the run ends when none does.
    fn is_active(&self, processor: usize, cells: &[Self::Cell]) -> bool;

    fn step(
        &self,
        phase: usize,
        processor: usize,
        snapshot: &[Self::Cell],
    ) -> Result<Step<Self::Cell>>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub round: usize,
    pub target: usize,
    pub writers: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub rounds: usize,
    pub total_work: u64,
    pub per_round_active: Vec<usize>,
    /// Largest work spent by a single processor in a single phase.
    #[serde(default)]
    pub peak_step_work: u64,
    #[serde(skip)]
    pub conflicts: Vec<Conflict>,
}

impl RoundStats {
    /// Appends a later run executed after this one.
    pub fn absorb(&mut self, later: &RoundStats) {
        self.rounds += later.rounds;
        self.total_work += later.total_work;
        self.per_round_active
            .extend_from_slice(&later.per_round_active);
        self.peak_step_work = self.peak_step_work.max(later.peak_step_work);
        self.conflicts.extend_from_slice(&later.conflicts);
    }
}

pub fn run<P: RoundProgram>(
    cells: Vec<P::Cell>,
    program: &P,
    engine: &Engine,
) -> Result<(Vec<P::Cell>, RoundStats)> {
    run_observed(cells, program, engine, |_, _| Ok(()))
}

/// Like [`run`], calling `observe(round, state)` after every round.
pub fn run_observed<P, F>(
    mut cells: Vec<P::Cell>,
    program: &P,
    engine: &Engine,
    mut observe: F,
) -> Result<(Vec<P::Cell>, RoundStats)>
where
    P: RoundProgram,
    F: FnMut(usize, &[P::Cell]) -> Result<()>,
{
    let processors = cells.len();
    let limit = engine.limit_for(processors);
    let mut stats = RoundStats::default();
    loop {
        let active: Vec<usize> = (0..processors)
            .filter(|&i| program.is_active(i, &cells))
            .collect();
        if active.is_empty() {
            break;
        }
        if stats.rounds >= limit {
            return Err(Error::RoundLimit { limit });
        }
        stats.rounds += 1;
        cells = execute_round(cells, &active, program, engine, &mut stats)?;
        observe(stats.rounds, &cells)?;
    }
    Ok((cells, stats))
}

/// Executes exactly one round over every active processor, for
/// constant-time transforms.
pub fn run_single<P: RoundProgram>(
    cells: Vec<P::Cell>,
    program: &P,
    engine: &Engine,
) -> Result<(Vec<P::Cell>, RoundStats)> {
    let active: Vec<usize> = (0..cells.len())
        .filter(|&i| program.is_active(i, &cells))
        .collect();
    let mut stats = RoundStats {
        rounds: 1,
        ..RoundStats::default()
    };
    let cells = execute_round(cells, &active, program, engine, &mut stats)?;
    Ok((cells, stats))
}

fn execute_round<P: RoundProgram>(
    mut cells: Vec<P::Cell>,
    active: &[usize],
    program: &P,
    engine: &Engine,
    stats: &mut RoundStats,
) -> Result<Vec<P::Cell>> {
    stats.per_round_active.push(active.len());
    for phase in 0..program.phases() {
        let snapshot = &cells;
        let steps: Vec<Result<Step<P::Cell>>> = match engine.execution {
            Execution::Sequential => active
                .iter()
                .map(|&i| program.step(phase, i, snapshot))
                .collect(),
            Execution::Parallel => active
                .par_iter()
                .map(|&i| program.step(phase, i, snapshot))
                .collect(),
        };
        let mut writers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut next = cells.clone();
        for (&proc, step) in active.iter().zip(steps) {
            let step = step?;
            stats.total_work += step.work;
            stats.peak_step_work = stats.peak_step_work.max(step.work);
            for (target, cell) in step.writes {
                writers.entry(target).or_default().push(proc);
                next[target] = cell;
            }
        }
        if let Some((&target, procs)) = writers.iter().find(|(_, w)| w.len() > 1) {
            CONFLICTS_DETECTED.fetch_add(1, Ordering::SeqCst);
            stats.conflicts.push(Conflict {
                round: stats.rounds,
                target,
                writers: procs.clone(),
            });
            return Err(Error::WriteConflict {
                round: stats.rounds,
                target,
                writers: procs.clone(),
            });
        }
        cells = next;
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy)]
struct Link {
    next: Option<usize>,
    sum: u64,
}

struct SuffixJump;

impl RoundProgram for SuffixJump {
    type Cell = Link;

    fn is_active(&self, i: usize, cells: &[Link]) -> bool {
        cells[i].next.is_some()
    }

    fn step(&self, _: usize, i: usize, snap: &[Link]) -> Result<Step<Link>> {
        let me = snap[i];
        let Some(s) = me.next else {
            return Ok(Step::idle());
        };
        let cell = Link {
            next: snap[s].next,
            sum: me.sum + snap[s].sum,
        };
        Ok(Step::write(i, cell, 1))
    }
}

/// Inclusive suffix sums of `weights` along successor-linked paths,
/// computed by pointer jumping.
pub fn suffix_sums(
    successor: &[Option<usize>],
    weights: &[u64],
    engine: &Engine,
) -> Result<(Vec<u64>, RoundStats)> {
    assert_eq!(successor.len(), weights.len());
    let n = successor.len();
    let mut indegree = vec![0u8; n];
    for s in successor.iter().flatten() {
        if *s >= n || indegree[*s] > 0 {
            return Err(Error::Cycle);
        }
        indegree[*s] += 1;
    }
    let cells = successor
        .iter()
        .zip(weights)
        .map(|(&next, &sum)| Link { next, sum })
        .collect();
    let engine = Engine {
        max_rounds: Some(engine.max_rounds.unwrap_or(ceil_log2(n) + 2)),
        ..*engine
    };
    match run(cells, &SuffixJump, &engine) {
        Ok((cells, stats)) => Ok((cells.iter().map(|c| c.sum).collect(), stats)),
        Err(Error::RoundLimit { .. }) => Err(Error::Cycle),
        Err(e) => Err(e),
    }
}

/// Distance from each element to the end of its path.
pub fn list_rank(successor: &[Option<usize>], engine: &Engine) -> Result<(Vec<usize>, RoundStats)> {
    let weights: Vec<u64> = successor.iter().map(|s| s.is_some() as u64).collect();
    let (sums, stats) = suffix_sums(successor, &weights, engine)?;
    Ok((sums.into_iter().map(|s| s as usize).collect(), stats))
}

struct RootJump;

impl RoundProgram for RootJump {
    type Cell = usize;

    fn is_active(&self, i: usize, up: &[usize]) -> bool {
        up[up[i]] != up[i]
    }

    fn step(&self, _: usize, i: usize, up: &[usize]) -> Result<Step<usize>> {
        Ok(Step::write(i, up[up[i]], 1))
    }
}

/// Root of every node in a forest given by parent pointers.
pub fn find_roots(parent: &[Option<usize>], engine: &Engine) -> Result<(Vec<usize>, RoundStats)> {
    let up: Vec<usize> = parent
        .iter()
        .enumerate()
        .map(|(i, p)| p.unwrap_or(i))
        .collect();
    run(up, &RootJump, engine)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct MarkAll;

    impl RoundProgram for MarkAll {
        type Cell = bool;
        fn is_active(&self, i: usize, c: &[bool]) -> bool {
            !c[i]
        }
        fn step(&self, _: usize, i: usize, _: &[bool]) -> Result<Step<bool>> {
            Ok(Step::write(i, true, 1))
        }
    }

    /// Each processor copies its left neighbour's flag, so a value written
    /// this round must not be visible until the next.
    struct Shift;

    impl RoundProgram for Shift {
        type Cell = (bool, usize);
        fn is_active(&self, i: usize, c: &[(bool, usize)]) -> bool {
            c[i].1 < 1
        }
        fn step(&self, _: usize, i: usize, c: &[(bool, usize)]) -> Result<Step<(bool, usize)>> {
            let seen = if i == 0 { true } else { c[i - 1].0 };
            Ok(Step::write(i, (seen, c[i].1 + 1), 0))
        }
    }

    struct Collide;

    impl RoundProgram for Collide {
        type Cell = u8;
        fn is_active(&self, _: usize, c: &[u8]) -> bool {
            c[0] == 0
        }
        fn step(&self, _: usize, i: usize, _: &[u8]) -> Result<Step<u8>> {
            Ok(Step::write(0, i as u8 + 1, 1))
        }
    }

    #[test]
    fn immediate_termination_takes_one_round() {
        let (cells, stats) = run(vec![false; 5], &MarkAll, &Engine::sequential()).unwrap();
        assert!(cells.iter().all(|&c| c));
        assert_eq!(stats.rounds, 1);
        assert_eq!(stats.per_round_active, vec![5]);
        assert_eq!(stats.total_work, 5);
    }

    #[test]
    fn reads_observe_previous_round() {
        let (cells, _) = run(vec![(false, 0); 4], &Shift, &Engine::sequential()).unwrap();
        assert_eq!(
            cells.iter().map(|c| c.0).collect::<Vec<_>>(),
            vec![true, false, false, false]
        );
    }

    #[test]
    fn conflicting_writes_are_rejected() {
        match run(vec![0u8; 3], &Collide, &Engine::parallel()) {
            Err(Error::WriteConflict {
                target, writers, ..
            }) => {
                assert_eq!(target, 0);
                assert_eq!(writers, vec![0, 1, 2]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(conflicts_detected() >= 1);
    }

    #[test]
    fn round_limit() {
        let e = Engine::sequential().with_max_rounds(0);
        assert!(matches!(
            run(vec![false], &MarkAll, &e),
            Err(Error::RoundLimit { limit: 0 })
        ));
    }

    #[test]
    fn ranks_of_short_paths() {
        let (r, s) = list_rank(&[None], &Engine::sequential()).unwrap();
        assert_eq!((r, s.rounds), (vec![0], 0));
        let succ = [Some(1), Some(2), Some(3), None];
        let (r, s) = list_rank(&succ, &Engine::sequential()).unwrap();
        assert_eq!(r, vec![3, 2, 1, 0]);
        assert_eq!(s.rounds, 2);
    }

    #[test]
    fn cyclic_links_are_rejected() {
        let succ = [Some(1), Some(2), Some(0)];
        assert!(matches!(
            list_rank(&succ, &Engine::sequential()),
            Err(Error::Cycle)
        ));
        let merge = [Some(2), Some(2), None];
        assert!(matches!(
            list_rank(&merge, &Engine::sequential()),
            Err(Error::Cycle)
        ));
    }

    #[test]
    fn roots_by_jumping() {
        let parent = [None, Some(0), Some(1), Some(2), None, Some(4)];
        let (roots, stats) = find_roots(&parent, &Engine::sequential()).unwrap();
        assert_eq!(roots, vec![0, 0, 0, 0, 4, 4]);
        assert_eq!(stats.rounds, 2);
    }

    #[test]
    fn stats_serialize() {
        let stats = RoundStats {
            rounds: 3,
            total_work: 12,
            per_round_active: vec![4, 2, 1],
            peak_step_work: 8,
            conflicts: Vec::new(),
        };
        let json = serde_json::to_value(&stats).unwrap();
        assert_eq!(json["rounds"], 3);
        assert_eq!(json["per_round_active"], serde_json::json!([4, 2, 1]));
        assert_eq!(serde_json::from_value::<RoundStats>(json).unwrap(), stats);
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9, 1024].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 4, 10]
        );
    }
}
