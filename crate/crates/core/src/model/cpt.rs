use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::scalar::{self, Probability};

/// Dense conditional probability table `Pr(child | conditioners)`.
///
/// Entry index is `child_value + config * child_range`, where `config` is
/// the mixed-radix index of the conditioner values with the first listed
/// conditioner most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt<T> {
    child: usize,
    child_range: usize,
    conditioners: Vec<usize>,
    radix: MixedRadix,
    entries: Vec<T>,
}

impl<T: Probability> Cpt<T> {
    pub fn new(
        child: usize,
        child_range: usize,
        conditioners: Vec<usize>,
        conditioner_ranges: Vec<usize>,
        entries: Vec<T>,
    ) -> Result<Self> {
        if conditioners.len() != conditioner_ranges.len() {
            return Err(Error::Shape(format!(
                "cpt for variable {} lists {} conditioners but {} ranges",
                child + 1,
                conditioners.len(),
                conditioner_ranges.len()
            )));
        }
        let radix = MixedRadix::new(conditioner_ranges);
        let expected = child_range * radix.size();
        if entries.len() != expected {
            return Err(Error::Shape(format!(
                "cpt for variable {} has {} entries, expected {}",
                child + 1,
                entries.len(),
                expected
            )));
        }
        Ok(Cpt {
            child,
            child_range,
            conditioners,
            radix,
            entries,
        })
    }

    /// Unconditional distribution over `child`.
    pub fn marginal(child: usize, entries: Vec<T>) -> Self {
        Cpt {
            child,
            child_range: entries.len(),
            conditioners: Vec::new(),
            radix: MixedRadix::new(Vec::new()),
            entries,
        }
    }

    pub fn point_mass(child: usize, range: usize, value: usize) -> Self {
        let entries = (0..range)
            .map(|v| if v == value { T::one() } else { T::zero() })
            .collect();
        Self::marginal(child, entries)
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn child_range(&self) -> usize {
        self.child_range
    }

    pub fn conditioners(&self) -> &[usize] {
        &self.conditioners
    }

    pub fn conditioner_ranges(&self) -> &[usize] {
        self.radix.radices()
    }

    pub fn radix(&self) -> &MixedRadix {
        &self.radix
    }

    /// Number of conditioner configurations.
    pub fn configs(&self) -> usize {
        self.radix.size()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn is_marginal(&self) -> bool {
        self.conditioners.is_empty()
    }

    pub fn entry(&self, child_value: usize, config: usize) -> &T {
        &self.entries[config * self.child_range + child_value]
    }

    pub fn row(&self, config: usize) -> &[T] {
        let start = config * self.child_range;
        &self.entries[start..start + self.child_range]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.child_range)
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.rows().map(scalar::sum).collect()
    }

    /// Rescales every row to sum to one. Zero rows become uniform.
    pub fn normalize_rows(&mut self) {
        let r = self.child_range;
        for row in self.entries.chunks_mut(r) {
            let total = scalar::sum(row);
            if total.is_zero() {
                row.iter_mut().for_each(|x| *x = T::uniform(r));
            } else {
                row.iter_mut().for_each(|x| *x = x.clone() / total.clone());
            }
        }
    }

    /// Rewrites a single-conditioner table `Pr(self | p)` through the
    /// parent's table `Pr(p | G)` into `Pr(self | G)`.
    ///
    /// Returns the new table and the multiply-add count.
    pub fn compose_through(&self, parent: &Cpt<T>) -> (Cpt<T>, u64) {
        assert_eq!(
            self.conditioners,
            [parent.child],
            "compose needs the parent as sole conditioner"
        );
        let r = self.child_range;
        let rp = parent.child_range;
        let configs = parent.configs();
        let mut entries = Vec::with_capacity(r * configs);
        for g in 0..configs {
            let prow = parent.row(g);
            for j in 0..r {
                let mut acc = T::zero();
                for (p, pp) in prow.iter().enumerate() {
                    acc = acc + self.entry(j, p).clone() * pp.clone();
                }
                entries.push(acc);
            }
        }
        let cpt = Cpt {
            child: self.child,
            child_range: r,
            conditioners: parent.conditioners.clone(),
            radix: parent.radix.clone(),
            entries,
        };
        (cpt, (r * rp * configs) as u64)
    }

    /// Sums out the listed conditioners against their (independent)
    /// marginals, keeping the rest in their original relative order.
    pub fn absorb_conditioners(&self, absorbed: &[(usize, &[T])]) -> (Cpt<T>, u64) {
        let positions: Vec<usize> = absorbed
            .iter()
            .map(|(v, _)| {
                self.conditioners
                    .iter()
                    .position(|c| c == v)
                    .expect("absorbed variable is a conditioner")
            })
            .collect();
        let mut kept = Vec::new();
        let mut kept_ranges = Vec::new();
        let mut kept_pos = Vec::new();
        for (k, (&c, &rc)) in self
            .conditioners
            .iter()
            .zip(self.radix.radices())
            .enumerate()
        {
            if !positions.contains(&k) {
                kept.push(c);
                kept_ranges.push(rc);
                kept_pos.push(k);
            }
        }
        let kept_radix = MixedRadix::new(kept_ranges);
        let absorbed_radix =
            MixedRadix::new(positions.iter().map(|&k| self.radix.radices()[k]).collect());
        let r = self.child_range;
        let mut entries = vec![T::zero(); r * kept_radix.size()];
        let mut full = vec![0; self.conditioners.len()];
        let mut work = 0u64;
        for ki in 0..kept_radix.size() {
            let kd = kept_radix.decode(ki);
            for (&k, &d) in kept_pos.iter().zip(&kd) {
                full[k] = d;
            }
            for ai in 0..absorbed_radix.size() {
                let ad = absorbed_radix.decode(ai);
                let mut weight = T::one();
                for ((&k, &d), (_, marg)) in positions.iter().zip(&ad).zip(absorbed) {
                    full[k] = d;
                    weight = weight * marg[d].clone();
                }
                let src = self.radix.encode(&full);
                for j in 0..r {
                    let e = &mut entries[ki * r + j];
                    *e = e.clone() + self.entry(j, src).clone() * weight.clone();
                }
                work += r as u64;
            }
        }
        let cpt = Cpt {
            child: self.child,
            child_range: r,
            conditioners: kept,
            radix: kept_radix,
            entries,
        };
        (cpt, work)
    }

    /// Bayes-rule reversal of a single-conditioner arc. `self` is
    /// `Pr(j | i)` and `prior` is `Pr(i)`; the result is `Pr(i | j)`.
    ///
    /// `Pr(j)` is taken as the row total of the numerators. A row whose
    /// total is zero conditions on an impossible value and is set uniform.
    pub fn reversed(&self, prior: &[T]) -> (Cpt<T>, u64) {
        assert_eq!(
            self.conditioners.len(),
            1,
            "reversal needs exactly one conditioner"
        );
        let i = self.conditioners[0];
        let ri = self.radix.radices()[0];
        assert_eq!(prior.len(), ri);
        let rj = self.child_range;
        let mut entries = Vec::with_capacity(ri * rj);
        for a in 0..rj {
            let numerators: Vec<T> = (0..ri)
                .map(|x| self.entry(a, x).clone() * prior[x].clone())
                .collect();
            let total = scalar::sum(&numerators);
            if total.is_zero() {
                entries.extend((0..ri).map(|_| T::uniform(ri)));
            } else {
                entries.extend(numerators.into_iter().map(|n| n / total.clone()));
            }
        }
        let cpt = Cpt {
            child: i,
            child_range: ri,
            conditioners: vec![self.child],
            radix: MixedRadix::new(vec![rj]),
            entries,
        };
        (cpt, (2 * ri * rj) as u64)
    }

    /// Fixes one conditioner at `value` and drops it.
    pub fn slice(&self, conditioner: usize, value: usize) -> Cpt<T> {
        let k = self
            .conditioners
            .iter()
            .position(|&c| c == conditioner)
            .expect("sliced variable is a conditioner");
        let mut conditioners = self.conditioners.clone();
        conditioners.remove(k);
        let mut ranges = self.radix.radices().to_vec();
        ranges.remove(k);
        let radix = MixedRadix::new(ranges);
        let r = self.child_range;
        let mut entries = Vec::with_capacity(r * radix.size());
        for ci in 0..radix.size() {
            let mut full = radix.decode(ci);
            full.insert(k, value);
            entries.extend_from_slice(self.row(self.radix.encode(&full)));
        }
        Cpt {
            child: self.child,
            child_range: r,
            conditioners,
            radix,
            entries,
        }
    }

    /// Conditions an unconditional table on the child lying in `allowed`.
    /// Returns `None` when the allowed mass is negligible.
    pub fn restricted(&self, allowed: &[bool]) -> Option<Cpt<T>> {
        assert!(self.is_marginal());
        assert_eq!(allowed.len(), self.child_range);
        let masked: Vec<T> = self
            .entries
            .iter()
            .zip(allowed)
            .map(|(p, &ok)| if ok { p.clone() } else { T::zero() })
            .collect();
        let mass = scalar::sum(&masked);
        if mass.as_f64() <= scalar::IMPOSSIBLE_TOL && mass.as_f64() >= -scalar::IMPOSSIBLE_TOL {
            return None;
        }
        let entries = masked.into_iter().map(|p| p / mass.clone()).collect();
        Some(Cpt::marginal(self.child, entries))
    }

    /// Same table over a different numeric type.
    pub fn map_scalar<U: Probability>(&self, f: impl Fn(&T) -> U) -> Cpt<U> {
        Cpt {
            child: self.child,
            child_range: self.child_range,
            conditioners: self.conditioners.clone(),
            radix: self.radix.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }
}
