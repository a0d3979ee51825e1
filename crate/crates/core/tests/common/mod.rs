//! Shared helpers for the integration tests, including a serial
//! message-passing reference for polytrees too large to enumerate.

#![allow(dead_code)]

use std::collections::HashMap;

use parbayes_core::generate::Generator;
use parbayes_core::{BayesNet, Evidence, Marginals};

pub fn max_error(a: &Marginals<f64>, b: &Marginals<f64>) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

/// Serial causal/diagnostic message passing on a polytree with point
/// evidence. Messages are computed recursively along the skeleton and
/// memoized per directed edge.
pub struct SerialPolytree<'a> {
    net: &'a BayesNet<f64>,
    evidence: &'a Evidence,
    causal: HashMap<(usize, usize), Vec<f64>>,
    diagnostic: HashMap<(usize, usize), Vec<f64>>,
}

impl<'a> SerialPolytree<'a> {
    pub fn new(net: &'a BayesNet<f64>, evidence: &'a Evidence) -> Self {
        SerialPolytree {
            net,
            evidence,
            causal: HashMap::new(),
            diagnostic: HashMap::new(),
        }
    }

    fn local(&self, v: usize) -> Vec<f64> {
        let r = self.net.range(v);
        match self.evidence.value_of(v) {
            Some(a) => (0..r).map(|x| (x == a) as u8 as f64).collect(),
            None => vec![1.0; r],
        }
    }

    /// Prior-side support of `v` from all its parents.
    fn support_from_parents(&mut self, v: usize) -> Vec<f64> {
        let cpt = self.net.cpt(v).clone();
        let msgs: Vec<Vec<f64>> = cpt
            .conditioners()
            .iter()
            .map(|&p| self.parent_to_child(p, v))
            .collect();
        let r = cpt.child_range();
        let mut out = vec![0.0; r];
        for cfg in 0..cpt.configs() {
            let digits = cpt.radix().decode(cfg);
            let w: f64 = digits.iter().zip(&msgs).map(|(&d, m)| m[d]).product();
            for (x, o) in out.iter_mut().enumerate() {
                *o += cpt.entry(x, cfg) * w;
            }
        }
        out
    }

    /// Evidence-side support of `v` from its children except `skip`.
    fn support_from_children(&mut self, v: usize, skip: Option<usize>) -> Vec<f64> {
        let mut out = self.local(v);
        for c in self.net.children(v).to_vec() {
            if Some(c) != skip {
                let m = self.child_to_parent(c, v);
                out.iter_mut().zip(m).for_each(|(o, x)| *o *= x);
            }
        }
        out
    }

    fn parent_to_child(&mut self, p: usize, c: usize) -> Vec<f64> {
        if let Some(m) = self.causal.get(&(p, c)) {
            return m.clone();
        }
        let prior = self.support_from_parents(p);
        let below = self.support_from_children(p, Some(c));
        let m = normalized(prior.iter().zip(below).map(|(a, b)| a * b).collect());
        self.causal.insert((p, c), m.clone());
        m
    }

    fn child_to_parent(&mut self, c: usize, p: usize) -> Vec<f64> {
        if let Some(m) = self.diagnostic.get(&(c, p)) {
            return m.clone();
        }
        let below = self.support_from_children(c, None);
        let cpt = self.net.cpt(c).clone();
        let k = cpt.conditioners().iter().position(|&x| x == p).unwrap();
        let others: Vec<(usize, Vec<f64>)> = cpt
            .conditioners()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(i, &o)| (i, self.parent_to_child(o, c)))
            .collect();
        let mut out = vec![0.0; self.net.range(p)];
        for cfg in 0..cpt.configs() {
            let digits = cpt.radix().decode(cfg);
            let w: f64 = others.iter().map(|(i, m)| m[digits[*i]]).product();
            let s: f64 = (0..cpt.child_range())
                .map(|y| cpt.entry(y, cfg) * below[y])
                .sum();
            out[digits[k]] += w * s;
        }
        let m = normalized(out);
        self.diagnostic.insert((c, p), m.clone());
        m
    }

    pub fn posteriors(mut self) -> Marginals<f64> {
        (0..self.net.len())
            .map(|v| {
                let prior = self.support_from_parents(v);
                let below = self.support_from_children(v, None);
                normalized(prior.iter().zip(below).map(|(a, b)| a * b).collect())
            })
            .collect()
    }
}

/// Random polytree sizes and seeds shared by several tests.
pub fn polytree(seed: u64, n: usize) -> BayesNet<f64> {
    Generator::new(seed).polytree(n, &[2, 3], 3)
}
