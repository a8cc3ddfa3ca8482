//! Decision correctness and cost aggregates.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Decision;
use crate::scalar::Scalar;

/// `lc = b · l`.
pub fn local_cost<T: Scalar>(l: T, b: T) -> T {
    b * l
}

/// `oc = b · l + 2 · cc`: execution at the peer plus a round trip.
pub fn offload_cost<T: Scalar>(l: T, b: T, cc: T) -> T {
    b * l + T::lit(2.0) * cc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    TruePositive,
    FalsePositive,
    TrueNegative,
    FalseNegative,
}

/// Local execution is the positive class; it is correct when `lc < oc`.
/// Exact ties count as correct either way.
pub fn classify_decision<T: Scalar>(decision: Decision, lc: T, oc: T) -> Outcome {
    match decision {
        Decision::Local if lc <= oc => Outcome::TruePositive,
        Decision::Local => Outcome::FalsePositive,
        Decision::Offload if lc >= oc => Outcome::TrueNegative,
        Decision::Offload => Outcome::FalseNegative,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositive => self.fp += 1,
            Outcome::TrueNegative => self.tn += 1,
            Outcome::FalseNegative => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.tn += rhs.tn;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

/// Accuracy, precision, recall and F-measure. `None` marks a zero denominator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aprf<T> {
    pub accuracy: T,
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub f_measure: Option<T>,
}

fn ratio<T: Scalar>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::lit(num as f64) / T::lit(den as f64))
}

pub fn aprf<T: Scalar>(c: &ConfusionCounts) -> Result<Aprf<T>> {
    let accuracy = ratio(c.tp + c.tn, c.total()).ok_or(Error::NoData("no classified decisions"))?;
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f_measure = match (precision, recall) {
        (Some(p), Some(r)) if p + r > T::zero() => Some(T::lit(2.0) * p * r / (p + r)),
        _ => None,
    };
    Ok(Aprf {
        accuracy,
        precision,
        recall,
        f_measure,
    })
}

/// Per-run cost ledger: local execution costs and the edge costs of offloads.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger<T> {
    pub local_costs: Vec<T>,
    pub offload_ccs: Vec<T>,
}

impl<T: Scalar> CostLedger<T> {
    pub fn lambda_local(&self) -> usize {
        self.local_costs.len()
    }

    pub fn lambda_offload(&self) -> usize {
        self.offload_ccs.len()
    }

    pub fn extend(&mut self, other: &CostLedger<T>) {
        self.local_costs.extend_from_slice(&other.local_costs);
        self.offload_ccs.extend_from_slice(&other.offload_ccs);
    }
}

/// Order-independent sum (values are summed in sorted order).
fn stable_sum<T: Scalar>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.into_iter().sum()
}

/// `C = (Σ lc + 2 Σ cc) / (λ1 + λ2)`.
pub fn run_cost<T: Scalar>(ledger: &CostLedger<T>) -> Result<T> {
    let n = ledger.lambda_local() + ledger.lambda_offload();
    if n == 0 {
        return Err(Error::NoData("no executed or offloaded tasks"));
    }
    let total = stable_sum(&ledger.local_costs) + T::lit(2.0) * stable_sum(&ledger.offload_ccs);
    Ok(total / T::from_count(n))
}

/// Mean of per-experiment costs.
pub fn average_cost<T: Scalar>(costs: &[T]) -> Result<T> {
    if costs.is_empty() {
        return Err(Error::NoData("no experiments"));
    }
    Ok(costs.iter().copied().sum::<T>() / T::from_count(costs.len()))
}

/// `(AC_m - AC_aa) / AC_aa · 100`; negative means the model is cheaper.
pub fn relative_difference<T: Scalar>(ac_model: T, ac_alternative: T) -> Result<T> {
    if ac_alternative == T::zero() {
        return Err(Error::UndefinedBaseline);
    }
    Ok((ac_model - ac_alternative) / ac_alternative * T::lit(100.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cost_functions() {
        assert!((local_cost(0.6, 0.5) - 0.30f64).abs() < 1e-15);
        assert_eq!(local_cost(0.0, 0.5), 0.0);
        assert_eq!(local_cost(1.0, 0.5), 0.5);
        assert!((offload_cost(0.6, 0.5, 0.2) - 0.70f64).abs() < 1e-15);
        assert!((offload_cost(0.0, 0.5, 0.1) - 0.20f64).abs() < 1e-15);
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify_decision(Decision::Local, 0.3, 0.7), Outcome::TruePositive);
        assert_eq!(classify_decision(Decision::Offload, 0.3, 0.7), Outcome::FalseNegative);
        assert_eq!(classify_decision(Decision::Offload, 0.5, 0.2), Outcome::TrueNegative);
        assert_eq!(classify_decision(Decision::Local, 0.5, 0.2), Outcome::FalsePositive);
        assert_eq!(classify_decision(Decision::Local, 0.4, 0.4), Outcome::TruePositive);
        assert_eq!(classify_decision(Decision::Offload, 0.4, 0.4), Outcome::TrueNegative);
    }

    #[test]
    fn aprf_examples() {
        let c = ConfusionCounts { tp: 8, tn: 1, fp: 1, fn_: 0 };
        let m = aprf::<f64>(&c).unwrap();
        assert!((m.accuracy - 0.9).abs() < 1e-15);
        assert!((m.precision.unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(m.recall, Some(1.0));
        assert!((m.f_measure.unwrap() - 0.941).abs() < 1e-3);

        let perfect = aprf::<f64>(&ConfusionCounts { tp: 5, tn: 3, fp: 0, fn_: 0 }).unwrap();
        assert_eq!(
            (perfect.accuracy, perfect.precision, perfect.recall, perfect.f_measure),
            (1.0, Some(1.0), Some(1.0), Some(1.0))
        );

        let no_pos = aprf::<f64>(&ConfusionCounts { tp: 0, tn: 3, fp: 0, fn_: 2 }).unwrap();
        assert_eq!(no_pos.precision, None);
        assert_eq!(no_pos.f_measure, None);

        assert!(matches!(aprf::<f64>(&ConfusionCounts::default()), Err(Error::NoData(_))));
    }

    #[test]
    fn run_cost_examples() {
        let both = CostLedger { local_costs: vec![0.3], offload_ccs: vec![0.2] };
        assert!((run_cost(&both).unwrap() - 0.35f64).abs() < 1e-15);
        let local = CostLedger { local_costs: vec![0.1, 0.3], offload_ccs: vec![] };
        assert!((run_cost(&local).unwrap() - 0.2f64).abs() < 1e-15);
        let off = CostLedger::<f64> { local_costs: vec![], offload_ccs: vec![0.1, 0.3] };
        assert!((run_cost(&off).unwrap() - 0.4).abs() < 1e-15);
        assert!(run_cost(&CostLedger::<f64>::default()).is_err());
    }

    #[test]
    fn average_and_relative() {
        assert!((average_cost(&[0.4, 0.6]).unwrap() - 0.5f64).abs() < 1e-15);
        assert_eq!(average_cost(&[0.37]).unwrap(), 0.37);
        assert!(average_cost::<f64>(&[]).is_err());
        assert_eq!(relative_difference(0.4, 0.4).unwrap(), 0.0);
        let d: f64 = relative_difference(0.439, 0.435).unwrap();
        assert!((d - 0.9195).abs() < 1e-3 && d > 0.0);
        assert!(matches!(relative_difference(0.3, 0.0), Err(Error::UndefinedBaseline)));
    }

    proptest! {
        #[test]
        fn run_cost_permutation_invariant(
            mut lc in prop::collection::vec(0.0f64..0.5, 0..40),
            mut cc in prop::collection::vec(1e-6f64..1.0, 1..40),
            seed in any::<u64>(),
        ) {
            let before = run_cost(&CostLedger { local_costs: lc.clone(), offload_ccs: cc.clone() }).unwrap();
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            lc.shuffle(&mut rng);
            cc.shuffle(&mut rng);
            let after = run_cost(&CostLedger { local_costs: lc, offload_ccs: cc }).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn sign_convention(m in 0.01f64..1.0, a in 0.01f64..1.0) {
            let d = relative_difference(m, a).unwrap();
            prop_assert_eq!(d < 0.0, m < a);
        }
    }
}
