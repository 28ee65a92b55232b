//! Evaluable convergence bounds and SFO-complexity formulas.
//!
//! Every bound has the form `(2F + L σ² S₂) / ((2 − L η_max) S₁)` where
//! `F = f(x₀) − f*`, `S₁` lower-bounds `Σ η_t` and `S₂` upper-bounds
//! `Σ η_t²/b_t` over the window `t ∈ [T_w, T)`. [`lemma1_bound`] uses the
//! exact sums; [`theorem_bound`] uses closed-form relaxations of them, so it
//! always dominates.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::{BatchSchedule, Decay, LrSchedule};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundInputs {
    /// `f(x₀) − f*`.
    pub f0_gap: f64,
    /// Retraction-smoothness constant `L_r`.
    pub l_r: f64,
    /// Gradient-noise variance `σ²`.
    pub sigma_sq: f64,
    pub lr: LrSchedule,
    pub bs: BatchSchedule,
    /// Total iterations `T`.
    pub total: usize,
}

impl BoundInputs {
    /// Warm-up length `T_w` (0 without warm-up).
    pub fn t_w(&self) -> usize {
        self.lr.warmup_iters()
    }

    fn window(&self) -> usize {
        self.total - self.t_w()
    }

    fn validate(&self) -> Result<()> {
        if !(self.f0_gap >= 0.0) || !self.f0_gap.is_finite() {
            return Err(Error::invalid(format!("f0_gap must be nonnegative, got {}", self.f0_gap)));
        }
        if !(self.sigma_sq >= 0.0) || !self.sigma_sq.is_finite() {
            return Err(Error::invalid(format!("sigma_sq must be nonnegative, got {}", self.sigma_sq)));
        }
        self.lr.validate(self.total, Some(self.l_r))?;
        self.bs.validate()?;
        if self.lr.eta_max() <= 0.0 {
            return Err(Error::invalid("eta_max must be positive"));
        }
        if self.t_w() >= self.total {
            return Err(Error::invalid(format!(
                "the window [T_w, T) = [{}, {}) is empty",
                self.t_w(),
                self.total
            )));
        }
        Ok(())
    }

    fn combine(&self, s1: f64, s2: f64) -> f64 {
        let eta = self.lr.eta_max();
        let denom = (2.0 - self.l_r * eta) * s1;
        2.0 * self.f0_gap / denom + self.l_r * self.sigma_sq * s2 / denom
    }
}

/// The summed bound
/// `2F/((2 − Lη_max) Ση_t) + Lσ²(Ση_t²/b_t)/((2 − Lη_max) Ση_t)`
/// over `t ∈ [T_w, T)`.
pub fn lemma1_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for t in inputs.t_w()..inputs.total {
        let eta = inputs.lr.lr_at(t, inputs.total)?;
        s1 += eta;
        s2 += eta * eta / inputs.bs.bs_at(t) as f64;
    }
    if !(s1 > 0.0) {
        return Err(Error::invalid("the learning rates sum to zero over the window"));
    }
    Ok(inputs.combine(s1, s2))
}

/// Which closed-form bound applies, determined by the batch-size schedule
/// (constant or growing) and whether the learning rate warms up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Constant batch size, decaying learning rate.
    ConstantBatch,
    /// Growing batch size, decaying learning rate.
    IncreasingBatch,
    /// Growing batch size, warm-up then decay.
    IncreasingBatchWarmup,
    /// Constant batch size, warm-up then decay.
    ConstantBatchWarmup,
}

impl Theorem {
    pub fn for_schedules(lr: &LrSchedule, bs: &BatchSchedule) -> Theorem {
        match (bs.is_constant(), lr.is_warmup()) {
            (true, false) => Theorem::ConstantBatch,
            (false, false) => Theorem::IncreasingBatch,
            (false, true) => Theorem::IncreasingBatchWarmup,
            (true, true) => Theorem::ConstantBatchWarmup,
        }
    }

    pub fn all() -> [Theorem; 4] {
        [
            Theorem::ConstantBatch,
            Theorem::IncreasingBatch,
            Theorem::IncreasingBatchWarmup,
            Theorem::ConstantBatchWarmup,
        ]
    }
}

/// Riemann zeta `ζ(c) = Σ_{n≥1} n^{−c}` for `c > 1`, by direct summation
/// with an Euler–Maclaurin tail.
pub fn zeta(c: f64) -> Result<f64> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::invalid(format!("zeta requires c > 1, got {c}")));
    }
    const N: usize = 1000;
    let nf = N as f64;
    let tail = nf.powf(1.0 - c) / (c - 1.0) + 0.5 * nf.powf(-c) + c / 12.0 * nf.powf(-c - 1.0)
        - c * (c + 1.0) * (c + 2.0) / 720.0 * nf.powf(-c - 3.0);
    let mut sum = tail;
    for n in (1..N).rev() {
        sum += (n as f64).powf(-c);
    }
    Ok(sum)
}

/// `Σ_t 1/b_t ≤ b_factor`: the closed-form bound on the reciprocal batch sum
/// of a growing schedule, `Kγ/((γ−1)b₀)` or `Kζ(c)/ā^e` with `ā = min(a, b₀)`.
fn reciprocal_batch_bound(bs: &BatchSchedule) -> Result<f64> {
    match *bs {
        BatchSchedule::Constant { .. } => Err(Error::invalid("batch size is not growing")),
        BatchSchedule::Exponential { b0, gamma, k } => Ok(k as f64 * gamma / ((gamma - 1.0) * b0 as f64)),
        BatchSchedule::Polynomial { b0, a, c, k } => {
            let a_low = a.min(b0 as f64);
            // (a m + b₀)^c ≥ (ā(m+1))^c ≥ ā^⌊c⌋ (m+1)^c needs ā ≥ 1; below 1 keep ā^c.
            let exponent = if a_low >= 1.0 { c.floor() } else { c };
            Ok(k as f64 * zeta(c)? / a_low.powf(exponent))
        }
    }
}

/// Lower bound on `Σ η_t` over the window.
fn s1_closed(inputs: &BoundInputs) -> f64 {
    let eta = inputs.lr.eta_max();
    let eta_min = inputs.lr.eta_min();
    let p = inputs.lr.p();
    let w = inputs.window() as f64;
    let total = inputs.total as f64;
    let tw = inputs.t_w() as f64;
    match inputs.lr.decay() {
        Decay::Constant => eta * w,
        Decay::Cosine => (eta + eta_min) * w / 2.0,
        Decay::PolyDecay => (eta + p * eta_min) * w / (p + 1.0),
        Decay::Diminishing if inputs.t_w() == 0 => eta * total.sqrt(),
        Decay::Diminishing => 2.0 * eta * ((total + 1.0).sqrt() - (tw + 1.0).sqrt()),
    }
}

/// Upper bound on `Σ η_t² / b_t` over the window for a constant batch `b`.
fn s2_constant_batch(inputs: &BoundInputs, b: f64) -> f64 {
    let eta = inputs.lr.eta_max();
    let eta_min = inputs.lr.eta_min();
    let p = inputs.lr.p();
    let w = inputs.window() as f64;
    let total = inputs.total as f64;
    let warm = inputs.t_w() > 0;
    match inputs.lr.decay() {
        Decay::Constant | Decay::Cosine => eta * eta * w / b,
        Decay::Diminishing if !warm => eta * eta * (1.0 + total.ln()) / b,
        Decay::Diminishing => eta * eta * (1.0 + (total / inputs.t_w() as f64).ln()) / b,
        Decay::PolyDecay if !warm => {
            let d = eta - eta_min;
            let per_step = eta_min * eta_min + 2.0 * eta_min * d / (p + 1.0) + d * d / (2.0 * p + 1.0);
            ((eta * eta - eta_min * eta_min) + per_step * total) / b
        }
        Decay::PolyDecay => 2.0 * eta * eta * w / b,
    }
}

/// Closed-form bound on `min_t E‖grad f(x_t)‖²` for the given case.
pub fn theorem_bound(theorem: Theorem, inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let expected = Theorem::for_schedules(&inputs.lr, &inputs.bs);
    if theorem != expected {
        return Err(Error::invalid(format!(
            "case {theorem:?} does not match the schedules, which call for {expected:?}"
        )));
    }
    let s1 = s1_closed(inputs);
    let s2 = match inputs.bs {
        BatchSchedule::Constant { b0 } => s2_constant_batch(inputs, b0 as f64),
        _ => {
            let eta = inputs.lr.eta_max();
            eta * eta * reciprocal_batch_bound(&inputs.bs)?
        }
    };
    Ok(inputs.combine(s1, s2))
}

/// Constants of a constant-batch bound `Q̃₁/(T − T_w) + Q̃₂σ²/b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantBatchConstants {
    pub q1: f64,
    pub q2: f64,
}

/// Constants of a growing-batch bound `(Q̃₁ + Q̃₂σ²/b₀)/(T − T_w)` with
/// `Q̃₂ = K Q̃₃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IncreasingBatchConstants {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

fn s1_per_step(inputs: &BoundInputs) -> Result<f64> {
    let eta = inputs.lr.eta_max();
    let eta_min = inputs.lr.eta_min();
    let p = inputs.lr.p();
    match inputs.lr.decay() {
        Decay::Constant => Ok(eta),
        Decay::Cosine => Ok((eta + eta_min) / 2.0),
        Decay::PolyDecay => Ok((eta + p * eta_min) / (p + 1.0)),
        Decay::Diminishing => Err(Error::invalid(
            "the diminishing learning rate has no constant-rate form Q1/T + Q2 sigma^2/b",
        )),
    }
}

/// Constant-batch constants. For polynomial decay without warm-up the
/// window-independent part of the noise term is folded into `Q̃₁` using
/// `b ≥ 1`, so `Q̃₁` then depends on `σ²`.
pub fn constant_batch_constants(inputs: &BoundInputs) -> Result<ConstantBatchConstants> {
    inputs.validate()?;
    if !inputs.bs.is_constant() {
        return Err(Error::invalid("constant-batch constants need a constant batch size"));
    }
    let eta = inputs.lr.eta_max();
    let eta_min = inputs.lr.eta_min();
    let p = inputs.lr.p();
    let l = inputs.l_r;
    let scale = (2.0 - l * eta) * s1_per_step(inputs)?;
    let warm = inputs.t_w() > 0;
    let (extra, per_step) = match inputs.lr.decay() {
        Decay::PolyDecay if !warm => {
            let d = eta - eta_min;
            let per = eta_min * eta_min + 2.0 * eta_min * d / (p + 1.0) + d * d / (2.0 * p + 1.0);
            (l * inputs.sigma_sq * (eta * eta - eta_min * eta_min), per)
        }
        Decay::PolyDecay => (0.0, 2.0 * eta * eta),
        _ => (0.0, eta * eta),
    };
    Ok(ConstantBatchConstants { q1: (2.0 * inputs.f0_gap + extra) / scale, q2: l * per_step / scale })
}

pub fn increasing_batch_constants(inputs: &BoundInputs) -> Result<IncreasingBatchConstants> {
    inputs.validate()?;
    let k = inputs
        .bs
        .stage_len()
        .ok_or_else(|| Error::invalid("increasing-batch constants need a growing batch size"))?;
    let eta = inputs.lr.eta_max();
    let scale = (2.0 - inputs.l_r * eta) * s1_per_step(inputs)?;
    let b0 = inputs.bs.b0() as f64;
    let q2 = inputs.l_r * eta * eta * reciprocal_batch_bound(&inputs.bs)? * b0 / scale;
    Ok(IncreasingBatchConstants { q1: 2.0 * inputs.f0_gap / scale, q2, q3: q2 / k as f64 })
}

/// SFO complexity `bT` of a constant batch.
pub fn sfo_constant(b: u64, total: u64) -> u64 {
    b * total
}

/// SFO needed by a constant batch `b` to reach `‖grad‖² ≤ ε²`:
/// `b²Q̃₁/(bε² − Q̃₂σ²)`.
pub fn sfo_const_eps(c: &ConstantBatchConstants, sigma_sq: f64, eps: f64, b: f64) -> Result<f64> {
    let denom = b * eps * eps - c.q2 * sigma_sq;
    if !(denom > 0.0) {
        return Err(Error::InfeasibleBudget(format!(
            "batch size {b} cannot reach eps = {eps}: b eps^2 <= Q2 sigma^2"
        )));
    }
    Ok(b * b * c.q1 / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalBatch {
    /// `b* = 2Q̃₂σ²/ε²`; 0 when `σ² Q̃₂ = 0`.
    pub b_star: f64,
    /// `4Q̃₁Q̃₂σ²ε⁻⁴`; when `b* = 0` the SFO at the smallest batch `b = 1`, `Q̃₁/ε²`.
    pub sfo_at_star: f64,
}

pub fn critical_batch(c: &ConstantBatchConstants, sigma_sq: f64, eps: f64) -> Result<CriticalBatch> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let e2 = eps * eps;
    let noise = c.q2 * sigma_sq;
    if noise == 0.0 {
        return Ok(CriticalBatch { b_star: 0.0, sfo_at_star: c.q1 / e2 });
    }
    Ok(CriticalBatch { b_star: 2.0 * noise / e2, sfo_at_star: 4.0 * c.q1 * noise / (e2 * e2) })
}

/// SFO complexity of an exponentially growing batch over `M` stages of `K`
/// steps: `b₀K(γ^M − 1)/(γ − 1)`.
pub fn sfo_increasing(b0: f64, gamma: f64, k: f64, m: f64) -> f64 {
    b0 * k * (gamma.powf(m) - 1.0) / (gamma - 1.0)
}

/// How the budget grows when the target `ε` shrinks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SfoMode {
    /// Fixed stage length `K`; the number of stages `M` grows.
    FixedK { k: f64 },
    /// Fixed number of stages `M`; the stage length `K` grows.
    FixedM { m: f64 },
}

/// SFO for an exponentially growing batch to reach `‖grad‖² ≤ ε²`.
pub fn sfo_eps_increasing(
    c: &IncreasingBatchConstants,
    sigma_sq: f64,
    b0: f64,
    gamma: f64,
    eps: f64,
    mode: SfoMode,
) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(eps > 0.0) || !(b0 >= 1.0) {
        return Err(Error::invalid("eps must be positive and b0 at least 1"));
    }
    let e2 = eps * eps;
    match mode {
        SfoMode::FixedK { k } => {
            let stages = (c.q1 + k * c.q3 * sigma_sq / b0) / (k * e2);
            Ok(sfo_increasing(b0, gamma, k, stages))
        }
        SfoMode::FixedM { m } => {
            let denom = m * e2 - c.q3 * sigma_sq / b0;
            if !(denom > 0.0) {
                return Err(Error::InfeasibleBudget(format!(
                    "M eps^2 = {} does not exceed Q3 sigma^2 / b0 = {}",
                    m * e2,
                    c.q3 * sigma_sq / b0
                )));
            }
            let k = c.q1 / denom;
            Ok(sfo_increasing(b0, gamma, k, m))
        }
    }
}

/// `f(γ) = 1 + γ/(γ − 1)`.
pub fn tradeoff_f(gamma: f64) -> f64 {
    1.0 + gamma / (gamma - 1.0)
}

/// `g(b₀) = b₀³/(b₀² − 1)`.
pub fn tradeoff_g(b0: f64) -> f64 {
    b0.powi(3) / (b0 * b0 - 1.0)
}

/// `h(M) = γ^M / M`.
pub fn tradeoff_h(gamma: f64, m: f64) -> f64 {
    gamma.powf(m) / m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffTables {
    pub f: Vec<(f64, f64)>,
    pub g: Vec<(f64, f64)>,
    pub h: Vec<(f64, f64)>,
    pub gamma_fixed: f64,
}

pub fn tradeoff_curves(gammas: &[f64], b0s: &[f64], ms: &[f64], gamma_fixed: f64) -> Result<TradeoffTables> {
    if let Some(g) = gammas.iter().chain(std::iter::once(&gamma_fixed)).find(|&&g| !(g > 1.0)) {
        return Err(Error::invalid(format!("gamma must exceed 1, got {g}")));
    }
    if let Some(b) = b0s.iter().find(|&&b| !(b >= 2.0)) {
        return Err(Error::invalid(format!("b0 must be at least 2, got {b}")));
    }
    if let Some(m) = ms.iter().find(|&&m| !(m >= 1.0)) {
        return Err(Error::invalid(format!("M must be at least 1, got {m}")));
    }
    Ok(TradeoffTables {
        f: gammas.iter().map(|&g| (g, tradeoff_f(g))).collect(),
        g: b0s.iter().map(|&b| (b, tradeoff_g(b))).collect(),
        h: ms.iter().map(|&m| (m, tradeoff_h(gamma_fixed, m))).collect(),
        gamma_fixed,
    })
}

/// `ζ(2) = π²/6`, handy for checking [`zeta`].
pub const ZETA_2: f64 = PI * PI / 6.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn worked(sigma_sq: f64, f0_gap: f64) -> BoundInputs {
        BoundInputs {
            f0_gap,
            l_r: 1.0,
            sigma_sq,
            lr: LrSchedule::Constant { eta_max: 1.0 },
            bs: BatchSchedule::Constant { b0: 4 },
            total: 10,
        }
    }

    #[test]
    fn lemma_worked_example() {
        // 2·1/(1·10) + 1·1·(10/4)/(1·10)
        let v = lemma1_bound(&worked(1.0, 1.0)).unwrap();
        assert!((v - 0.45).abs() < 1e-15);
        let t = theorem_bound(Theorem::ConstantBatch, &worked(1.0, 1.0)).unwrap();
        assert!((t - 0.45).abs() < 1e-15);
    }

    #[test]
    fn lemma_noise_free() {
        let v = lemma1_bound(&worked(0.0, 1.0)).unwrap();
        assert!((v - 2.0 / (1.0 * 1.0 * 10.0)).abs() < 1e-15);
        assert_eq!(lemma1_bound(&worked(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn lemma_rejects_large_step() {
        let mut inp = worked(1.0, 1.0);
        inp.l_r = 2.0;
        assert!(lemma1_bound(&inp).is_err());
    }

    #[test]
    fn case_mismatch() {
        assert!(theorem_bound(Theorem::IncreasingBatch, &worked(1.0, 1.0)).is_err());
    }

    #[test]
    fn exponential_batch_noise_free() {
        let inp = BoundInputs {
            f0_gap: 3.0,
            l_r: 0.5,
            sigma_sq: 0.0,
            lr: LrSchedule::Constant { eta_max: 0.8 },
            bs: BatchSchedule::Exponential { b0: 8, gamma: 2.0, k: 10 },
            total: 50,
        };
        let v = theorem_bound(Theorem::IncreasingBatch, &inp).unwrap();
        assert!((v - 2.0 * 3.0 / ((2.0 - 0.4) * 0.8 * 50.0)).abs() < 1e-15);
    }

    #[test]
    fn polynomial_batch_uses_zeta() {
        let inp = BoundInputs {
            f0_gap: 0.0,
            l_r: 1.0,
            sigma_sq: 1.0,
            lr: LrSchedule::Constant { eta_max: 1.0 },
            bs: BatchSchedule::Polynomial { b0: 3, a: 2.0, c: 2.0, k: 5 },
            total: 20,
        };
        let v = theorem_bound(Theorem::IncreasingBatch, &inp).unwrap();
        // L σ² η² K ζ(2)/ā² / ((2 − Lη) η T)
        let expected = 5.0 * ZETA_2 / 4.0 / 20.0;
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0).unwrap() - ZETA_2).abs() < 1e-12);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta(3.0).unwrap() - 1.202_056_903_159_594_2).abs() < 1e-12);
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
    }

    #[test]
    fn sfo_examples() {
        assert_eq!(sfo_constant(256, 3000), 768_000);
        assert_eq!(sfo_constant(1, 1), 1);
        assert_eq!(sfo_increasing(27.0, 3.0, 1000.0, 3.0), 351_000.0);
        assert_eq!(sfo_increasing(27.0, 3.0, 1000.0, 1.0), 27_000.0);
    }

    #[test]
    fn critical_batch_examples() {
        let c = ConstantBatchConstants { q1: 5.0, q2: 1.0 };
        let cb = critical_batch(&c, 1.0, 1.0).unwrap();
        assert_eq!(cb.b_star, 2.0);
        assert_eq!(cb.sfo_at_star, 20.0);
        assert_eq!(sfo_const_eps(&c, 1.0, 1.0, 2.0).unwrap(), 20.0);

        let cb = critical_batch(&c, 0.0, 0.5).unwrap();
        assert_eq!(cb.b_star, 0.0);
        assert_eq!(cb.sfo_at_star, sfo_const_eps(&c, 0.0, 0.5, 1.0).unwrap());

        assert!(matches!(sfo_const_eps(&c, 1.0, 1.0, 1.0), Err(Error::InfeasibleBudget(_))));
    }

    #[test]
    fn fixed_m_infeasible() {
        let c = IncreasingBatchConstants { q1: 1.0, q2: 10.0, q3: 1.0 };
        let r = sfo_eps_increasing(&c, 1.0, 1.0, 3.0, 0.1, SfoMode::FixedM { m: 3.0 });
        assert!(matches!(r, Err(Error::InfeasibleBudget(_))));
    }

    #[test]
    fn tradeoff_examples() {
        assert_eq!(tradeoff_f(2.0), 3.0);
        assert_eq!(tradeoff_f(3.0), 2.5);
        assert_eq!(tradeoff_g(2.0), 8.0 / 3.0);
        assert_eq!(tradeoff_g(3.0), 27.0 / 8.0);
        assert_eq!(tradeoff_h(3.0, 1.0), 3.0);
        assert_eq!(tradeoff_h(3.0, 2.0), 4.5);
        assert_eq!(tradeoff_h(3.0, 3.0), 9.0);
        assert!(tradeoff_curves(&[1.0], &[2.0], &[1.0], 3.0).is_err());
        let t = tradeoff_curves(&[2.0, 3.0], &[2.0], &[1.0, 2.0], 3.0).unwrap();
        assert_eq!(t.f.len(), 2);
        assert_eq!(t.h[1], (2.0, 4.5));
    }
}
