//! Seeded random networks for tests, benchmarks and acceptance sweeps.
//!
//! Every generated network has topological variable indices and strictly
//! positive CPT entries, so any point evidence has positive probability.
//! Entries are ratios of small integers, which keeps exact-rational
//! networks cheap.

use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};

use crate::model::{skeleton_is_forest, BayesNet, Cpt, Evidence};
use crate::scalar::Probability;

pub struct Generator {
    rng: StdRng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut StdRng {
        &mut self.rng
    }

    fn pick_range(&mut self, ranges: &[usize]) -> usize {
        *ranges.choose(&mut self.rng).expect("at least one range")
    }

    fn table<T: Probability>(&mut self, v: usize, ranges: &[usize], parents: &[usize]) -> Cpt<T> {
        let r = ranges[v];
        let pr: Vec<usize> = parents.iter().map(|&p| ranges[p]).collect();
        let rows: usize = pr.iter().product();
        let mut entries = Vec::with_capacity(r * rows);
        for _ in 0..rows {
            let w: Vec<usize> = (0..r).map(|_| self.rng.random_range(1..=20)).collect();
            let total = T::from_usize(w.iter().sum()).expect("small integer");
            entries.extend(
                w.into_iter()
                    .map(|x| T::from_usize(x).expect("small integer") / total.clone()),
            );
        }
        Cpt::new(v, r, parents.to_vec(), pr, entries).expect("consistent shape")
    }

    /// Random tables for a fixed structure. `parents[v]` must hold only
    /// indices below `v`.
    pub fn with_structure<T: Probability>(
        &mut self,
        ranges: Vec<usize>,
        parents: &[Vec<usize>],
    ) -> BayesNet<T> {
        let cpts = (0..ranges.len())
            .map(|v| self.table(v, &ranges, &parents[v]))
            .collect();
        BayesNet::new(ranges, cpts).expect("generated network is well formed")
    }

    fn ranges(&mut self, n: usize, choices: &[usize]) -> Vec<usize> {
        (0..n).map(|_| self.pick_range(choices)).collect()
    }

    pub fn chain<T: Probability>(&mut self, n: usize, range_choices: &[usize]) -> BayesNet<T> {
        let parents: Vec<Vec<usize>> = (0..n)
            .map(|v| if v == 0 { vec![] } else { vec![v - 1] })
            .collect();
        let ranges = self.ranges(n, range_choices);
        self.with_structure(ranges, &parents)
    }

    /// Uniformly attached random tree rooted at variable 0.
    pub fn tree<T: Probability>(&mut self, n: usize, range_choices: &[usize]) -> BayesNet<T> {
        let parents: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if v == 0 {
                    vec![]
                } else {
                    vec![self.rng.random_range(0..v)]
                }
            })
            .collect();
        let ranges = self.ranges(n, range_choices);
        self.with_structure(ranges, &parents)
    }

    /// Complete tree: every internal variable has `branching` children and
    /// every leaf sits at `depth`.
    pub fn complete_tree<T: Probability>(
        &mut self,
        depth: usize,
        branching: usize,
        range_choices: &[usize],
    ) -> BayesNet<T> {
        let mut parents = vec![vec![]];
        let mut level = vec![0];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &p in &level {
                for _ in 0..branching {
                    next.push(parents.len());
                    parents.push(vec![p]);
                }
            }
            level = next;
        }
        let ranges = self.ranges(parents.len(), range_choices);
        self.with_structure(ranges, &parents)
    }

    /// `legs` disjoint paths of `depth` arcs hanging from one root.
    pub fn spider<T: Probability>(
        &mut self,
        legs: usize,
        depth: usize,
        range_choices: &[usize],
    ) -> BayesNet<T> {
        let mut parents = vec![vec![]];
        for _ in 0..legs {
            let mut above = 0;
            for _ in 0..depth {
                parents.push(vec![above]);
                above = parents.len() - 1;
            }
        }
        let ranges = self.ranges(parents.len(), range_choices);
        self.with_structure(ranges, &parents)
    }

    /// A path of `depth` arcs with a leaf hanging off every path variable.
    pub fn caterpillar<T: Probability>(
        &mut self,
        depth: usize,
        range_choices: &[usize],
    ) -> BayesNet<T> {
        let mut parents = vec![vec![]];
        let mut spine = 0;
        for _ in 0..depth {
            parents.push(vec![spine]);
            parents.push(vec![spine]);
            spine = parents.len() - 2;
        }
        let ranges = self.ranges(parents.len(), range_choices);
        self.with_structure(ranges, &parents)
    }

    /// Random connected polytree with at most `max_parents` parents per
    /// variable.
    pub fn polytree<T: Probability>(
        &mut self,
        n: usize,
        range_choices: &[usize],
        max_parents: usize,
    ) -> BayesNet<T> {
        let mut arcs = Vec::new();
        let mut indegree = vec![0; n];
        for v in 1..n {
            let u = self.rng.random_range(0..v);
            let (from, to) = if indegree[u] < max_parents && self.rng.random_bool(0.5) {
                (v, u)
            } else if indegree[v] < max_parents {
                (u, v)
            } else {
                (v, u)
            };
            indegree[to] += 1;
            arcs.push((from, to));
        }
        let ranges = self.ranges(n, range_choices);
        self.relabeled(n, &arcs, ranges)
    }

    /// Random connected DAG whose skeleton has at least one cycle, built
    /// from a random polytree plus extra arcs. Needs `n >= 3` and
    /// `max_edges >= n`.
    pub fn multiply_connected<T: Probability>(
        &mut self,
        n: usize,
        range_choices: &[usize],
        max_edges: usize,
        max_parents: usize,
    ) -> BayesNet<T> {
        assert!(n >= 3 && max_edges >= n, "no room for a loop");
        let base: BayesNet<T> = self.polytree(n, range_choices, max_parents);
        let mut parents: Vec<Vec<usize>> = (0..n).map(|v| base.parents(v).to_vec()).collect();
        let extra = self.rng.random_range(1..=max_edges - (n - 1));
        let mut added = 0;
        let mut attempts = 0;
        while added < extra && attempts < 200 {
            attempts += 1;
            let c = self.rng.random_range(1..n);
            let p = self.rng.random_range(0..c);
            if parents[c].contains(&p) || parents[c].len() >= max_parents {
                continue;
            }
            parents[c].push(p);
            added += 1;
        }
        let ranges = base.ranges().to_vec();
        let net: BayesNet<T> = self.with_structure(ranges, &parents);
        if skeleton_is_forest(&net) {
            // Every attempt was rejected; retry with a fresh draw.
            return self.multiply_connected(n, range_choices, max_edges, max_parents);
        }
        net
    }

    /// Relabels an oriented graph so that parents precede children,
    /// choosing the lowest ready variable first.
    fn relabeled<T: Probability>(
        &mut self,
        n: usize,
        arcs: &[(usize, usize)],
        ranges: Vec<usize>,
    ) -> BayesNet<T> {
        let mut indegree = vec![0; n];
        let mut out = vec![Vec::new(); n];
        for &(a, b) in arcs {
            indegree[b] += 1;
            out[a].push(b);
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut label = vec![0; n];
        let mut next = 0;
        while let Some(v) = ready.pop_first() {
            label[v] = next;
            next += 1;
            for &c in &out[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        let mut parents = vec![Vec::new(); n];
        let mut new_ranges = vec![0; n];
        for v in 0..n {
            new_ranges[label[v]] = ranges[v];
        }
        for &(a, b) in arcs {
            parents[label[b]].push(label[a]);
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        self.with_structure(new_ranges, &parents)
    }

    /// Observes `count` distinct variables at values drawn from one
    /// forward sample, so the evidence has positive probability.
    pub fn evidence<T: Probability>(&mut self, net: &BayesNet<T>, count: usize) -> Evidence {
        let mut sample = vec![0; net.len()];
        for v in 0..net.len() {
            let cpt = net.cpt(v);
            let cond: Vec<usize> = cpt.conditioners().iter().map(|&p| sample[p]).collect();
            let row = cpt.row(cpt.radix().encode(&cond));
            let mut u: f64 = self.rng.random();
            sample[v] = row.len() - 1;
            for (a, p) in row.iter().enumerate() {
                u -= p.as_f64();
                if u < 0.0 {
                    sample[v] = a;
                    break;
                }
            }
        }
        let mut vars: Vec<usize> = (0..net.len()).collect();
        let (chosen, _) = vars.partial_shuffle(&mut self.rng, count.min(net.len()));
        Evidence::new(chosen.iter().map(|&v| (v, sample[v])).collect())
    }
}
