//! Binary switching: choose which dataword label each codeword carries so
//! that likely codeword confusions cost few bit errors.
//!
//! The cost of codeword `i` is
//! `phi(i) = (1/M) sum_{j != i} d(label_i, label_j) Q(sqrt(delta_ij^2 / (2 N0)))`
//! with `delta_ij^2 = hamming(cw_i, cw_j) * pulse_energy` for OOK, and
//! `sum_i phi(i) / k` estimates the bit error rate at high SNR.

use super::q_function;
use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Relative improvement a swap must achieve to count as a strict decrease.
const REL_TOL: f64 = 1e-12;

/// `perm[slot]` is the dataword label carried by codeword slot `slot`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping {
    perm: Vec<u32>,
}

impl Mapping {
    pub fn new(perm: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            match seen.get_mut(p as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::NotAPermutation(perm.len())),
            }
        }
        Ok(Mapping { perm })
    }

    pub fn identity(m: usize) -> Self {
        Mapping {
            perm: (0..m as u32).collect(),
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut perm: Vec<u32> = (0..m as u32).collect();
        perm.shuffle(rng);
        Mapping { perm }
    }

    /// The labelling a codebook already carries.
    pub fn of_codebook(cb: &Codebook) -> Result<Self> {
        Mapping::new(cb.entries().iter().map(|e| e.0).collect())
    }

    pub fn labels(&self) -> &[u32] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.perm.swap(i, j);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub per_codeword: Vec<f64>,
    pub total: f64,
    pub ber_estimate: f64,
}

struct CostModel {
    m: usize,
    k: usize,
    weight: Vec<f64>,
}

impl CostModel {
    fn new(cb: &Codebook, n0: f64, pulse_energy: f64) -> Result<Self> {
        if !(n0 > 0.0) || !(pulse_energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "n0 ({n0}) and pulse energy ({pulse_energy}) must be positive"
            )));
        }
        let words: Vec<u64> = cb.codewords().map(|c| c.value()).collect();
        let m = words.len();
        let mut weight = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let d2 = (words[i] ^ words[j]).count_ones() as f64 * pulse_energy;
                    weight[i * m + j] = q_function((d2 / (2.0 * n0)).sqrt()) / m as f64;
                }
            }
        }
        Ok(CostModel { m, k: cb.k(), weight })
    }

    fn check(&self, mapping: &Mapping) -> Result<()> {
        if mapping.len() != self.m {
            return Err(Error::NotAPermutation(self.m));
        }
        Ok(())
    }

    fn phi(&self, labels: &[u32], i: usize) -> f64 {
        (0..self.m)
            .map(|j| (labels[i] ^ labels[j]).count_ones() as f64 * self.weight[i * self.m + j])
            .sum()
    }

    fn report(&self, labels: &[u32]) -> CostReport {
        let per_codeword: Vec<f64> = (0..self.m).map(|i| self.phi(labels, i)).collect();
        let total: f64 = per_codeword.iter().sum();
        CostReport {
            per_codeword,
            total,
            ber_estimate: total / self.k.max(1) as f64,
        }
    }

    /// Change in total cost from exchanging the labels of `i` and `j`.
    fn swap_delta(&self, labels: &[u32], i: usize, j: usize) -> f64 {
        let (li, lj) = (labels[i], labels[j]);
        let mut delta = 0.0;
        for (t, &lt) in labels.iter().enumerate() {
            if t == i || t == j {
                continue;
            }
            let dd = (lj ^ lt).count_ones() as f64 - (li ^ lt).count_ones() as f64;
            let wi = self.weight[i * self.m + t] + self.weight[t * self.m + i];
            let wj = self.weight[j * self.m + t] + self.weight[t * self.m + j];
            delta += dd * (wi - wj);
        }
        delta
    }
}

pub fn bsa_cost(mapping: &Mapping, cb: &Codebook, n0: f64, pulse_energy: f64) -> Result<CostReport> {
    let model = CostModel::new(cb, n0, pulse_energy)?;
    model.check(mapping)?;
    Ok(model.report(mapping.labels()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BsaOutcome {
    pub mapping: Mapping,
    /// Total cost of the initial mapping followed by the total after every
    /// accepted swap.
    pub trace: Vec<f64>,
}

/// Pairwise label swapping until no swap lowers the total cost.
///
/// Codewords are visited in order of decreasing `phi(i)`; each is paired with
/// the partner giving the largest reduction, and after an accepted swap the
/// ordering is recomputed. Swaps that do not strictly lower the cost are
/// rejected.
pub fn bsa_optimize(cb: &Codebook, init: &Mapping, n0: f64, pulse_energy: f64) -> Result<BsaOutcome> {
    let model = CostModel::new(cb, n0, pulse_energy)?;
    model.check(init)?;
    let mut labels = init.labels().to_vec();
    let mut total = model.report(&labels).total;
    let mut trace = vec![total];

    loop {
        let phi: Vec<f64> = (0..model.m).map(|i| model.phi(&labels, i)).collect();
        let mut order: Vec<usize> = (0..model.m).collect();
        order.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));

        let mut accepted = false;
        for &i in &order {
            let best = (0..model.m)
                .filter(|&j| j != i)
                .map(|j| (model.swap_delta(&labels, i, j), j))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((delta, j)) = best {
                if delta < -REL_TOL * total {
                    labels.swap(i, j);
                    total = model.report(&labels).total;
                    trace.push(total);
                    accepted = true;
                    break;
                }
            }
        }
        if !accepted {
            break;
        }
    }

    Ok(BsaOutcome {
        mapping: Mapping { perm: labels },
        trace,
    })
}

/// Recomputes the full cost for every one of the `M (M - 1) / 2` label swaps
/// and reports whether none of them is a strict improvement.
pub fn is_swap_local_optimum(
    mapping: &Mapping,
    cb: &Codebook,
    n0: f64,
    pulse_energy: f64,
) -> Result<bool> {
    let base = bsa_cost(mapping, cb, n0, pulse_energy)?.total;
    let mut trial = mapping.clone();
    for i in 0..mapping.len() {
        for j in i + 1..mapping.len() {
            trial.swap(i, j);
            let total = bsa_cost(&trial, cb, n0, pulse_energy)?.total;
            trial.swap(i, j);
            if total < base * (1.0 - REL_TOL) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
