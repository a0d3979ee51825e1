//! Brute-force reference inference by full joint enumeration.

use crate::error::{Error, Result};
use crate::index::MixedRadix;
use crate::model::{BayesNet, Evidence};
use crate::scalar::{self, Probability, IMPOSSIBLE_TOL};

/// Largest joint table the oracle will materialize.
pub const MAX_JOINT_ENTRIES: usize = 1 << 24;

/// Joint distribution over all variables, variable 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable<T> {
    radix: MixedRadix,
    probs: Vec<T>,
}

impl<T: Probability> JointTable<T> {
    pub fn ranges(&self) -> &[usize] {
        self.radix.radices()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, config: &[usize]) -> &T {
        &self.probs[self.radix.encode(config)]
    }

    pub fn total(&self) -> T {
        scalar::sum(&self.probs)
    }

    /// Distribution of `v` restricted to configurations consistent with
    /// `ev`, unnormalized.
    fn slice_sum(&self, v: usize, ev: &Evidence) -> Vec<T> {
        let mut out = vec![T::zero(); self.ranges()[v]];
        let mut digits = vec![0; self.ranges().len()];
        for (i, p) in self.probs.iter().enumerate() {
            let mut idx = i;
            self.radix.decode_into(&mut idx, &mut digits);
            if ev.items().iter().all(|&(e, a)| digits[e] == a) {
                out[digits[v]] = out[digits[v]].clone() + p.clone();
            }
        }
        out
    }
}

pub fn joint<T: Probability>(net: &BayesNet<T>) -> Result<JointTable<T>> {
    let size = net
        .ranges()
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .filter(|&s| s <= MAX_JOINT_ENTRIES)
        .ok_or_else(|| {
            Error::Intractable(format!("joint table exceeds {MAX_JOINT_ENTRIES} entries"))
        })?;
    let radix = MixedRadix::new(net.ranges().to_vec());
    let mut probs = Vec::with_capacity(size);
    let mut digits = vec![0; net.len()];
    let mut cond = Vec::new();
    for i in 0..size {
        let mut idx = i;
        radix.decode_into(&mut idx, &mut digits);
        let mut p = T::one();
        for v in 0..net.len() {
            let cpt = net.cpt(v);
            cond.clear();
            cond.extend(cpt.conditioners().iter().map(|&c| digits[c]));
            p = p * cpt.entry(digits[v], cpt.radix().encode(&cond)).clone();
        }
        probs.push(p);
    }
    Ok(JointTable { radix, probs })
}

pub fn marginal<T: Probability>(net: &BayesNet<T>, v: usize) -> Result<Vec<T>> {
    Ok(joint(net)?.slice_sum(v, &Evidence::empty()))
}

/// Every variable's marginal from one joint enumeration.
pub fn marginals<T: Probability>(net: &BayesNet<T>) -> Result<Vec<Vec<T>>> {
    let table = joint(net)?;
    Ok((0..net.len())
        .map(|v| table.slice_sum(v, &Evidence::empty()))
        .collect())
}

fn normalize_slice<T: Probability>(slice: Vec<T>) -> Result<Vec<T>> {
    let mass = scalar::sum(&slice);
    if mass.as_f64() <= IMPOSSIBLE_TOL {
        return Err(Error::ImpossibleEvidence(format!(
            "evidence has probability {}",
            mass.as_f64()
        )));
    }
    Ok(slice.into_iter().map(|p| p / mass.clone()).collect())
}

pub fn posterior<T: Probability>(net: &BayesNet<T>, v: usize, ev: &Evidence) -> Result<Vec<T>> {
    ev.check(net)?;
    normalize_slice(joint(net)?.slice_sum(v, ev))
}

/// Posterior of every variable given `ev`.
pub fn posteriors<T: Probability>(net: &BayesNet<T>, ev: &Evidence) -> Result<Vec<Vec<T>>> {
    ev.check(net)?;
    let table = joint(net)?;
    (0..net.len())
        .map(|v| normalize_slice(table.slice_sum(v, ev)))
        .collect()
}

/// True when both networks encode joints within `tol` of each other.
pub fn joints_equal<T: Probability>(a: &BayesNet<T>, b: &BayesNet<T>, tol: f64) -> Result<bool> {
    Ok(max_joint_difference(a, b)? <= tol)
}

pub fn max_joint_difference<T: Probability>(a: &BayesNet<T>, b: &BayesNet<T>) -> Result<f64> {
    if a.ranges() != b.ranges() {
        return Err(Error::MismatchedVariables(format!(
            "ranges {:?} vs {:?}",
            a.ranges(),
            b.ranges()
        )));
    }
    let (ja, jb) = (joint(a)?, joint(b)?);
    Ok(scalar::max_abs_diff(ja.probs(), jb.probs()))
}
