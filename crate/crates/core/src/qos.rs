//! Streaming estimation of QoS-violation probabilities from response-time and
//! throughput windows.
//!
//! Each node keeps the last `W` epoch values of RT and TP. Densities come from a
//! kernel density estimate over the window; the distribution function always uses
//! the Gaussian kernel through `erf`, which is what makes the violation
//! probabilities closed-form. The two violation probabilities are fused with a
//! weighted geometric-mean odds rule.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Clamp applied to each violation probability before fusion.
pub const PROBABILITY_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
}

impl Kernel {
    /// Kernel value at the scaled offset `u = (x - x_i) / h`.
    pub fn eval<T: Scalar>(self, u: T) -> T {
        match self {
            Kernel::Gaussian => (-(u * u) / T::lit(2.0)).exp() / T::TAU().sqrt(),
            Kernel::Epanechnikov => {
                if u.abs() <= T::one() {
                    T::lit(0.75) * (T::one() - u * u)
                } else {
                    T::zero()
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Bandwidth<T> {
    Fixed { h: T },
    /// `1.06 · σ̂ · n^(-1/5)`, never below `floor`.
    Silverman { floor: T },
}

impl<T: Scalar> Default for Bandwidth<T> {
    fn default() -> Self {
        Bandwidth::Silverman { floor: T::lit(0.01) }
    }
}

/// Bounded sample window with its kernel and bandwidth rule.
#[derive(Clone, Debug, PartialEq)]
pub struct KdeWindow<T> {
    samples: VecDeque<T>,
    capacity: usize,
    bandwidth: Bandwidth<T>,
    kernel: Kernel,
}

impl<T: Scalar> KdeWindow<T> {
    pub fn new(capacity: usize, bandwidth: Bandwidth<T>, kernel: Kernel) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("window size must be >= 1".into()));
        }
        let bw_ok = match bandwidth {
            Bandwidth::Fixed { h } => h > T::zero() && h.is_finite(),
            Bandwidth::Silverman { floor } => floor > T::zero() && floor.is_finite(),
        };
        if !bw_ok {
            return Err(Error::InvalidConfig("bandwidth must be positive".into()));
        }
        Ok(Self {
            samples: VecDeque::with_capacity(capacity),
            capacity,
            bandwidth,
            kernel,
        })
    }

    /// Window pre-filled with `samples`, keeping only the newest `capacity` entries.
    pub fn from_samples(
        capacity: usize,
        bandwidth: Bandwidth<T>,
        kernel: Kernel,
        samples: impl IntoIterator<Item = T>,
    ) -> Result<Self> {
        let mut w = Self::new(capacity, bandwidth, kernel)?;
        for s in samples {
            w.push(s);
        }
        Ok(w)
    }

    /// Appends a sample, evicting the oldest once the window is full.
    pub fn push(&mut self, value: T) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(value);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Oldest first.
    pub fn samples(&self) -> impl DoubleEndedIterator<Item = T> + ExactSizeIterator + '_ {
        self.samples.iter().copied()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    /// Bandwidth currently in effect.
    pub fn h(&self) -> T {
        match self.bandwidth {
            Bandwidth::Fixed { h } => h,
            Bandwidth::Silverman { floor } => {
                let n = self.samples.len();
                if n < 2 {
                    return floor;
                }
                let nf = T::from_count(n);
                let mean = self.samples().sum::<T>() / nf;
                let var = self.samples().map(|x| (x - mean) * (x - mean)).sum::<T>()
                    / T::from_count(n - 1);
                let h = T::lit(1.06) * var.sqrt() * nf.powf(T::lit(-0.2));
                h.max(floor)
            }
        }
    }
}

/// Error function via the Abramowitz–Stegun 7.1.26 rational approximation
/// (absolute error below 1.5e-7).
pub fn erf<T: Scalar>(x: T) -> T {
    const P: f64 = 0.327_591_1;
    const A: [f64; 5] = [
        0.254_829_592,
        -0.284_496_736,
        1.421_413_741,
        -1.453_152_027,
        1.061_405_429,
    ];
    let sign = if x < T::zero() { -T::one() } else { T::one() };
    let ax = x.abs();
    if ax > T::lit(6.0) {
        // exp(-36) is below the precision of the result
        return sign;
    }
    let t = T::one() / (T::one() + T::lit(P) * ax);
    let poly = A
        .iter()
        .rev()
        .fold(T::zero(), |acc, &a| (acc + T::lit(a)) * t);
    sign * (T::one() - poly * (-(ax * ax)).exp())
}

/// Mean response time of an epoch.
pub fn epoch_rt<T: Scalar>(rts: &[T]) -> Result<T> {
    if rts.is_empty() {
        return Err(Error::UndefinedEpoch("no completed tasks"));
    }
    Ok(rts.iter().copied().sum::<T>() / T::from_count(rts.len()))
}

/// Raw throughput `|T| / E_D`.
pub fn epoch_tp<T: Scalar>(task_count: usize, duration: T) -> Result<T> {
    if !(duration > T::zero()) {
        return Err(Error::UndefinedEpoch("zero epoch duration"));
    }
    Ok(T::from_count(task_count) / duration)
}

/// Linear normalization into `[0, 1]` against a reference maximum.
pub fn normalize<T: Scalar>(raw: T, max: T) -> T {
    (raw / max).max(T::zero()).min(T::one())
}

/// Batch kernel density estimate `(1 / nh) Σ K((x - x_i) / h)`.
pub fn kde_pdf<T: Scalar>(window: &KdeWindow<T>, x: T) -> Result<T> {
    if window.is_empty() {
        return Err(Error::InsufficientData("empty KDE window"));
    }
    let h = window.h();
    let sum: T = window.samples().map(|xi| window.kernel.eval((x - xi) / h)).sum();
    Ok(sum / (T::from_count(window.len()) * h))
}

/// One step of the recursive density update at a fixed query point:
/// `((j-1)/j) · prev + (1 / (j h)) · K((x - x_new) / h)`.
pub fn kde_pdf_incremental<T: Scalar>(
    prev_estimate: T,
    new_sample: T,
    x: T,
    j: usize,
    h: T,
    kernel: Kernel,
) -> Result<T> {
    if j < 1 {
        return Err(Error::InvalidStep(j));
    }
    let jf = T::from_count(j);
    let decay = T::from_count(j - 1) / jf;
    Ok(decay * prev_estimate + kernel.eval((x - new_sample) / h) / (jf * h))
}

/// Gaussian-kernel distribution function `(1/W) Σ ½(1 + erf((x - x_j) / (h√2)))`.
///
/// Uses the Gaussian kernel regardless of the window's density kernel.
pub fn kde_cdf<T: Scalar>(window: &KdeWindow<T>, x: T) -> Result<T> {
    if window.is_empty() {
        return Err(Error::InsufficientData("empty KDE window"));
    }
    let scale = window.h() * T::SQRT_2();
    let half = T::lit(0.5);
    let sum: T = window
        .samples()
        .map(|xj| half * (T::one() + erf((x - xj) / scale)))
        .sum();
    Ok(sum / T::from_count(window.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerDirection {
    /// Fire when `P_QoS >= P_trig`.
    AtLeast,
    /// Fire when `P_QoS <= P_trig`.
    AtMost,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QosConfig<T> {
    pub th_rt: T,
    pub th_tp: T,
    pub w_rt: T,
    pub w_tp: T,
    pub p_trig: T,
    pub direction: TriggerDirection,
    pub min_samples: usize,
}

impl<T: Scalar> Default for QosConfig<T> {
    fn default() -> Self {
        Self {
            th_rt: T::lit(0.3),
            th_tp: T::lit(0.3),
            w_rt: T::lit(0.5),
            w_tp: T::lit(0.5),
            p_trig: T::lit(0.5),
            direction: TriggerDirection::AtLeast,
            min_samples: 5,
        }
    }
}

impl<T: Scalar> QosConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |key: &str, v: T| -> Result<()> {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::Validation {
                    key: key.into(),
                    value: v.to_string(),
                    allowed: "[0, 1]".into(),
                })
            }
        };
        unit("th_rt", self.th_rt)?;
        unit("th_tp", self.th_tp)?;
        unit("w_rt", self.w_rt)?;
        unit("w_tp", self.w_tp)?;
        unit("p_trig", self.p_trig)?;
        if (self.w_rt + self.w_tp - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::Validation {
                key: "w_rt + w_tp".into(),
                value: (self.w_rt + self.w_tp).to_string(),
                allowed: "1".into(),
            });
        }
        if self.min_samples == 0 {
            return Err(Error::Validation {
                key: "min_samples".into(),
                value: "0".into(),
                allowed: ">= 1".into(),
            });
        }
        Ok(())
    }

    pub fn triggers(&self, p_qos: T) -> bool {
        match self.direction {
            TriggerDirection::AtLeast => p_qos >= self.p_trig,
            TriggerDirection::AtMost => p_qos <= self.p_trig,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationProbabilities<T> {
    pub p_rt: T,
    pub p_tp: T,
}

fn clamp_probability<T: Scalar>(p: T) -> T {
    let eps = T::lit(PROBABILITY_EPSILON);
    p.max(eps).min(T::one() - eps)
}

/// `P_RT = 1 - F_RT(Th_RT)` and `P_TP = F_TP(Th_TP)`, clamped to `[ε, 1-ε]`.
///
/// Returns `None` while either window holds fewer than `min_samples` values.
pub fn violation_probabilities<T: Scalar>(
    rt_window: &KdeWindow<T>,
    tp_window: &KdeWindow<T>,
    cfg: &QosConfig<T>,
) -> Option<ViolationProbabilities<T>> {
    let need = cfg.min_samples.max(1);
    if rt_window.len() < need || tp_window.len() < need {
        return None;
    }
    let f_rt = kde_cdf(rt_window, cfg.th_rt).ok()?;
    let f_tp = kde_cdf(tp_window, cfg.th_tp).ok()?;
    Some(ViolationProbabilities {
        p_rt: clamp_probability(T::one() - f_rt),
        p_tp: clamp_probability(f_tp),
    })
}

/// Weighted geometric-odds fusion of the two violation probabilities.
pub fn fuse_probabilities<T: Scalar>(p_rt: T, p_tp: T, w_rt: T, w_tp: T) -> T {
    let yes = p_rt.powf(w_rt) * p_tp.powf(w_tp);
    let no = (T::one() - p_rt).powf(w_rt) * (T::one() - p_tp).powf(w_tp);
    yes / (yes + no)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QosAssessment<T> {
    pub p_rt: T,
    pub p_tp: T,
    pub p_qos: T,
    pub triggered: bool,
}

/// Full monitoring step: violation probabilities, fusion and trigger test.
pub fn assess<T: Scalar>(
    rt_window: &KdeWindow<T>,
    tp_window: &KdeWindow<T>,
    cfg: &QosConfig<T>,
) -> Option<QosAssessment<T>> {
    let v = violation_probabilities(rt_window, tp_window, cfg)?;
    let p_qos = fuse_probabilities(v.p_rt, v.p_tp, cfg.w_rt, cfg.w_tp);
    Some(QosAssessment {
        p_rt: v.p_rt,
        p_tp: v.p_tp,
        p_qos,
        triggered: cfg.triggers(p_qos),
    })
}
