use super::q_function;
use crate::channel::db_to_linear;

/// Union bound on the symbol error probability of a constant-weight OOK
/// code, `sum_r avg(A_r) Q(sqrt(r eps / N0))`, where `average[r - 1]` counts
/// neighbours at Hamming distance `2r` and `eps / N0 = (Eb/N0) / eb_per_pulse`.
pub fn union_bound_ser(average: &[f64], eb_n0_db: f64, eb_per_pulse: f64) -> f64 {
    let es_n0 = db_to_linear(eb_n0_db) / eb_per_pulse;
    average
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let r = (i + 1) as f64;
            a * q_function((r * es_n0).sqrt())
        })
        .sum()
}

/// Bit error probability bracket for `data_bits`-bit symbols: a symbol error
/// costs at least one and at most `data_bits` bit errors.
pub fn ber_bounds(pe: f64, data_bits: usize) -> (f64, f64) {
    (pe / data_bits as f64, pe)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub eb_n0_db: f64,
    pub ser_upper_bound: f64,
    pub ber_lower: f64,
    pub ber_upper: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn evaluate(average: &[f64], eb_per_pulse: f64, data_bits: usize, eb_n0_db: &[f64]) -> Self {
        let points = eb_n0_db
            .iter()
            .map(|&db| {
                let pe = union_bound_ser(average, db, eb_per_pulse);
                let (ber_lower, ber_upper) = ber_bounds(pe, data_bits);
                BoundPoint {
                    eb_n0_db: db,
                    ser_upper_bound: pe,
                    ber_lower,
                    ber_upper,
                }
            })
            .collect();
        BoundCurve { points }
    }
}
