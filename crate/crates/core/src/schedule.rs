//! Learning-rate and batch-size schedules.
//!
//! Stage-based schedules use the stage index `m = ⌊t/K⌋` (or `⌊t/K'⌋` for
//! warm-up learning rates). Non-integral batch sizes are rounded half-up with
//! a floor of 1.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_p() -> f64 {
    2.0
}

/// The decaying part of a learning-rate schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decay {
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "diminishing")]
    Diminishing,
    #[serde(rename = "cosine")]
    Cosine,
    #[serde(rename = "polydecay")]
    PolyDecay,
}

impl Decay {
    /// Value of the decay part.
    ///
    /// `frac ∈ [0, 1]` is the fraction of the decay window already elapsed
    /// (used by cosine and polynomial decay); `t` is the global iteration
    /// (used by the diminishing rule `η_max/√(t+1)`).
    pub fn value(self, eta_max: f64, eta_min: f64, p: f64, frac: f64, t: usize) -> f64 {
        match self {
            Decay::Constant => eta_max,
            Decay::Diminishing => eta_max / ((t + 1) as f64).sqrt(),
            Decay::Cosine => {
                let w = 0.5 * (1.0 + (PI * frac).cos());
                eta_max * w + eta_min * (1.0 - w)
            }
            Decay::PolyDecay => {
                let w = (1.0 - frac).powf(p);
                eta_max * w + eta_min * (1.0 - w)
            }
        }
    }
}

impl fmt::Display for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Decay::Constant => "constant",
            Decay::Diminishing => "diminishing",
            Decay::Cosine => "cosine",
            Decay::PolyDecay => "polydecay",
        };
        f.write_str(s)
    }
}

/// A learning-rate schedule `t ↦ η_t` over `T` total iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum LrSchedule {
    /// `η_t = η_max`.
    #[serde(rename = "constant")]
    Constant { eta_max: f64 },
    /// `η_t = η_max / √(t+1)`.
    #[serde(rename = "diminishing")]
    Diminishing { eta_max: f64 },
    /// `η_t = η_min + (η_max − η_min)(1 + cos(πt/T))/2`.
    #[serde(rename = "cosine")]
    Cosine {
        eta_max: f64,
        #[serde(default)]
        eta_min: f64,
    },
    /// `η_t = η_min + (η_max − η_min)(1 − t/T)^p`.
    #[serde(rename = "polydecay")]
    PolyDecay {
        eta_max: f64,
        #[serde(default)]
        eta_min: f64,
        #[serde(default = "default_p")]
        p: f64,
    },
    /// `η_t = η₀ δ^m` with `m = ⌊t/K'⌋` for `t < T_w = l_w K'`, then `decay`.
    #[serde(rename = "warmup_exp")]
    WarmupExp {
        eta0: f64,
        delta: f64,
        #[serde(rename = "Kprime")]
        k_prime: usize,
        l_w: usize,
        decay: Decay,
        #[serde(default)]
        eta_min: f64,
        #[serde(default = "default_p")]
        p: f64,
    },
    /// `η_t = (s m + η₀)^q` with `m = ⌊t/K'⌋` for `t < T_w = l_w K'`, then `decay`.
    #[serde(rename = "warmup_poly")]
    WarmupPoly {
        eta0: f64,
        s: f64,
        q: f64,
        #[serde(rename = "Kprime")]
        k_prime: usize,
        l_w: usize,
        decay: Decay,
        #[serde(default)]
        eta_min: f64,
        #[serde(default = "default_p")]
        p: f64,
    },
}

impl LrSchedule {
    pub fn is_warmup(&self) -> bool {
        matches!(self, LrSchedule::WarmupExp { .. } | LrSchedule::WarmupPoly { .. })
    }

    /// Number of warm-up iterations `T_w = l_w K'` (0 without warm-up).
    pub fn warmup_iters(&self) -> usize {
        match self {
            LrSchedule::WarmupExp { k_prime, l_w, .. } | LrSchedule::WarmupPoly { k_prime, l_w, .. } => {
                k_prime * l_w
            }
            _ => 0,
        }
    }

    /// The decay rule used after warm-up (or throughout, without warm-up).
    pub fn decay(&self) -> Decay {
        match self {
            LrSchedule::Constant { .. } => Decay::Constant,
            LrSchedule::Diminishing { .. } => Decay::Diminishing,
            LrSchedule::Cosine { .. } => Decay::Cosine,
            LrSchedule::PolyDecay { .. } => Decay::PolyDecay,
            LrSchedule::WarmupExp { decay, .. } | LrSchedule::WarmupPoly { decay, .. } => *decay,
        }
    }

    /// Warm-up value at stage `m`.
    fn warmup_stage(&self, m: usize) -> f64 {
        match *self {
            LrSchedule::WarmupExp { eta0, delta, .. } => eta0 * delta.powi(m as i32),
            LrSchedule::WarmupPoly { eta0, s, q, .. } => (s * m as f64 + eta0).powf(q),
            _ => unreachable!("warm-up stage requested for a schedule without warm-up"),
        }
    }

    /// The largest learning rate. For warm-up schedules this is the last
    /// warm-up value `η_{T_w − 1}`, which is also where the decay part starts.
    pub fn eta_max(&self) -> f64 {
        match *self {
            LrSchedule::Constant { eta_max }
            | LrSchedule::Diminishing { eta_max }
            | LrSchedule::Cosine { eta_max, .. }
            | LrSchedule::PolyDecay { eta_max, .. } => eta_max,
            LrSchedule::WarmupExp { l_w, .. } | LrSchedule::WarmupPoly { l_w, .. } => {
                self.warmup_stage(l_w.saturating_sub(1))
            }
        }
    }

    pub fn eta_min(&self) -> f64 {
        match *self {
            LrSchedule::Cosine { eta_min, .. }
            | LrSchedule::PolyDecay { eta_min, .. }
            | LrSchedule::WarmupExp { eta_min, .. }
            | LrSchedule::WarmupPoly { eta_min, .. } => eta_min,
            LrSchedule::Constant { .. } | LrSchedule::Diminishing { .. } => 0.0,
        }
    }

    /// Polynomial-decay exponent (meaningful only for polynomial decay).
    pub fn p(&self) -> f64 {
        match *self {
            LrSchedule::PolyDecay { p, .. }
            | LrSchedule::WarmupExp { p, .. }
            | LrSchedule::WarmupPoly { p, .. } => p,
            _ => default_p(),
        }
    }

    /// Checks parameter ranges. When `l_r` is given, also checks
    /// `η_max < 2/L_r`.
    pub fn validate(&self, total: usize, l_r: Option<f64>) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        }
        fn nonnegative(name: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be nonnegative and finite, got {v}")))
            }
        }
        if total == 0 {
            return Err(Error::invalid("T must be at least 1"));
        }
        match *self {
            LrSchedule::Constant { eta_max } | LrSchedule::Diminishing { eta_max } => {
                nonnegative("eta_max", eta_max)?;
            }
            LrSchedule::Cosine { eta_max, eta_min } => {
                nonnegative("eta_max", eta_max)?;
                check_eta_min(eta_min, eta_max)?;
            }
            LrSchedule::PolyDecay { eta_max, eta_min, p } => {
                nonnegative("eta_max", eta_max)?;
                positive("p", p)?;
                check_eta_min(eta_min, eta_max)?;
            }
            LrSchedule::WarmupExp { eta0, delta, k_prime, l_w, eta_min, p, .. } => {
                positive("eta0", eta0)?;
                positive("p", p)?;
                if !(delta > 1.0) || !delta.is_finite() {
                    return Err(Error::invalid(format!("delta must exceed 1, got {delta}")));
                }
                check_warmup_len(k_prime, l_w, total)?;
                check_eta_min(eta_min, self.eta_max())?;
            }
            LrSchedule::WarmupPoly { eta0, s, q, k_prime, l_w, eta_min, p, .. } => {
                positive("eta0", eta0)?;
                positive("s", s)?;
                positive("p", p)?;
                if !(q > 1.0) || !q.is_finite() {
                    return Err(Error::invalid(format!("q must exceed 1, got {q}")));
                }
                check_warmup_len(k_prime, l_w, total)?;
                check_eta_min(eta_min, self.eta_max())?;
            }
        }
        if let Some(l) = l_r {
            positive("L_r", l)?;
            let eta_max = self.eta_max();
            if !(eta_max < 2.0 / l) {
                return Err(Error::invalid(format!(
                    "eta_max = {eta_max} must be below 2/L_r = {}",
                    2.0 / l
                )));
            }
        }
        Ok(())
    }

    /// Learning rate at iteration `t` of a `total`-iteration run.
    pub fn lr_at(&self, t: usize, total: usize) -> Result<f64> {
        if t >= total {
            return Err(Error::invalid(format!("iteration {t} is outside [0, {total})")));
        }
        let tw = self.warmup_iters();
        let value = match *self {
            LrSchedule::WarmupExp { k_prime, .. } | LrSchedule::WarmupPoly { k_prime, .. } if t < tw => {
                self.warmup_stage(t / k_prime)
            }
            _ => {
                let window = (total - tw) as f64;
                let frac = (t - tw) as f64 / window;
                self.decay().value(self.eta_max(), self.eta_min(), self.p(), frac, t)
            }
        };
        Ok(value)
    }
}

fn check_eta_min(eta_min: f64, eta_max: f64) -> Result<()> {
    if !(eta_min >= 0.0 && eta_min <= eta_max) {
        return Err(Error::invalid(format!(
            "eta_min must lie in [0, eta_max = {eta_max}], got {eta_min}"
        )));
    }
    Ok(())
}

fn check_warmup_len(k_prime: usize, l_w: usize, total: usize) -> Result<()> {
    if k_prime == 0 || l_w == 0 {
        return Err(Error::invalid("Kprime and l_w must be at least 1"));
    }
    if k_prime * l_w > total {
        return Err(Error::invalid(format!(
            "warm-up length l_w*Kprime = {} exceeds T = {total}",
            k_prime * l_w
        )));
    }
    Ok(())
}

/// A batch-size schedule `t ↦ b_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BatchSchedule {
    /// `b_t = b₀`.
    #[serde(rename = "bs_constant")]
    Constant { b0: u64 },
    /// `b_t = b₀ γ^m`, `m = ⌊t/K⌋`.
    #[serde(rename = "bs_exp")]
    Exponential {
        b0: u64,
        gamma: f64,
        #[serde(rename = "K")]
        k: usize,
    },
    /// `b_t = (a m + b₀)^c`, `m = ⌊t/K⌋`.
    #[serde(rename = "bs_poly")]
    Polynomial {
        b0: u64,
        a: f64,
        c: f64,
        #[serde(rename = "K")]
        k: usize,
    },
}

impl BatchSchedule {
    pub fn b0(&self) -> u64 {
        match *self {
            BatchSchedule::Constant { b0 }
            | BatchSchedule::Exponential { b0, .. }
            | BatchSchedule::Polynomial { b0, .. } => b0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, BatchSchedule::Constant { .. })
    }

    /// Steps per stage (`None` for a constant schedule).
    pub fn stage_len(&self) -> Option<usize> {
        match *self {
            BatchSchedule::Constant { .. } => None,
            BatchSchedule::Exponential { k, .. } | BatchSchedule::Polynomial { k, .. } => Some(k),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b0() == 0 {
            return Err(Error::invalid("b0 must be at least 1"));
        }
        match *self {
            BatchSchedule::Constant { .. } => {}
            BatchSchedule::Exponential { gamma, k, .. } => {
                if !(gamma > 1.0) || !gamma.is_finite() {
                    return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
                }
                if k == 0 {
                    return Err(Error::invalid("K must be at least 1"));
                }
            }
            BatchSchedule::Polynomial { a, c, k, .. } => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::invalid(format!("a must be positive, got {a}")));
                }
                if !(c > 1.0) || !c.is_finite() {
                    return Err(Error::invalid(format!("c must exceed 1, got {c}")));
                }
                if k == 0 {
                    return Err(Error::invalid("K must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Unrounded batch size at stage `m`.
    pub fn stage_raw(&self, m: usize) -> f64 {
        match *self {
            BatchSchedule::Constant { b0 } => b0 as f64,
            BatchSchedule::Exponential { b0, gamma, .. } => b0 as f64 * gamma.powi(m as i32),
            BatchSchedule::Polynomial { b0, a, c, .. } => (a * m as f64 + b0 as f64).powf(c),
        }
    }

    /// Unrounded batch size at iteration `t`.
    pub fn bs_raw(&self, t: usize) -> f64 {
        self.stage_raw(self.stage_len().map_or(0, |k| t / k))
    }

    /// Batch size at iteration `t`, rounded half-up with a floor of 1.
    pub fn bs_at(&self, t: usize) -> u64 {
        round_batch(self.bs_raw(t))
    }
}

fn round_batch(raw: f64) -> u64 {
    let rounded = (raw + 0.5).floor();
    if rounded < 1.0 {
        1
    } else if rounded >= u64::MAX as f64 {
        u64::MAX
    } else {
        rounded as u64
    }
}

/// Compatibility data between a warm-up learning rate and a growing batch
/// size: the batch grows every `K = l K'` steps, the learning rate every `K'`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarmupCompat {
    pub l: usize,
    pub k: usize,
    pub k_prime: usize,
    pub l_w: usize,
    pub total: usize,
    /// Batch growth factor; the `δ^{2l} < γ` check runs only when both
    /// `gamma` and `delta` are present.
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WarmupViolation {
    StageMismatch { k: usize, l: usize, k_prime: usize },
    GrowthRatio { delta_pow: f64, gamma: f64 },
    WarmupTooLong { t_w: usize, total: usize },
    WarmupTooShort { l_w: usize, l: usize },
}

impl fmt::Display for WarmupViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarmupViolation::StageMismatch { k, l, k_prime } => {
                write!(f, "K = l*Kprime violated: K = {k}, l*Kprime = {}", l * k_prime)
            }
            WarmupViolation::GrowthRatio { delta_pow, gamma } => {
                write!(f, "delta^(2l) < gamma violated: delta^(2l) = {delta_pow}, gamma = {gamma}")
            }
            WarmupViolation::WarmupTooLong { t_w, total } => {
                write!(f, "T_w <= T violated: T_w = {t_w}, T = {total}")
            }
            WarmupViolation::WarmupTooShort { l_w, l } => {
                write!(f, "l_w >= l violated: l_w = {l_w}, l = {l}")
            }
        }
    }
}

/// Outcome of [`validate_warmup`]; empty means compatible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WarmupReport {
    pub violations: Vec<WarmupViolation>,
}

impl WarmupReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for WarmupReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

pub fn validate_warmup(ws: &WarmupCompat) -> WarmupReport {
    let mut violations = Vec::new();
    if ws.l == 0 || ws.k != ws.l * ws.k_prime {
        violations.push(WarmupViolation::StageMismatch { k: ws.k, l: ws.l, k_prime: ws.k_prime });
    }
    if let (Some(gamma), Some(delta)) = (ws.gamma, ws.delta) {
        let delta_pow = delta.powi(2 * ws.l as i32);
        if !(delta_pow < gamma) {
            violations.push(WarmupViolation::GrowthRatio { delta_pow, gamma });
        }
    }
    let t_w = ws.l_w * ws.k_prime;
    if t_w > ws.total {
        violations.push(WarmupViolation::WarmupTooLong { t_w, total: ws.total });
    }
    if ws.l_w < ws.l {
        violations.push(WarmupViolation::WarmupTooShort { l_w: ws.l_w, l: ws.l });
    }
    WarmupReport { violations }
}

/// Builds the compatibility data for a warm-up learning rate paired with a
/// growing batch size. Returns `None` when the pair has no coupling (no
/// warm-up, or a constant batch size).
pub fn warmup_compat(lr: &LrSchedule, bs: &BatchSchedule, total: usize) -> Option<WarmupCompat> {
    let (k_prime, l_w, delta) = match *lr {
        LrSchedule::WarmupExp { k_prime, l_w, delta, .. } => (k_prime, l_w, Some(delta)),
        LrSchedule::WarmupPoly { k_prime, l_w, .. } => (k_prime, l_w, None),
        _ => return None,
    };
    let (k, gamma) = match *bs {
        BatchSchedule::Constant { .. } => return None,
        BatchSchedule::Exponential { k, gamma, .. } => (k, Some(gamma)),
        BatchSchedule::Polynomial { k, .. } => (k, None),
    };
    let l = if k_prime == 0 { 0 } else { k / k_prime };
    Some(WarmupCompat { l, k, k_prime, l_w, total, gamma, delta })
}

/// Validates a learning-rate/batch-size pair for a `total`-iteration run.
pub fn validate_pair(lr: &LrSchedule, bs: &BatchSchedule, total: usize, l_r: Option<f64>) -> Result<()> {
    lr.validate(total, l_r)?;
    bs.validate()?;
    if let Some(ws) = warmup_compat(lr, bs, total) {
        let report = validate_warmup(&ws);
        if !report.is_ok() {
            return Err(Error::invalid(format!("warm-up incompatible with batch growth: {report}")));
        }
    }
    Ok(())
}
