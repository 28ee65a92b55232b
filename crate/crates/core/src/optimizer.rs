//! The RSGD loop `x_{t+1} = R_{x_t}(−η_t grad f_{B_t}(x_t))` with i.i.d.
//! uniform minibatches, SFO accounting and periodic full-objective telemetry.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldDescriptor, ManifoldPoint};
use crate::problems::Problem;
use crate::schedule::{validate_pair, BatchSchedule, LrSchedule};

/// The starting point of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// Orthonormalized standard-Gaussian matrix drawn from the run's seed.
    RandomOrthonormal,
    Provided(ManifoldPoint),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsgdConfig {
    /// Total iterations `T`.
    pub total: usize,
    pub seed: u64,
    pub lr: LrSchedule,
    pub bs: BatchSchedule,
    /// Iterations between full-objective evaluations.
    pub eval_period: usize,
    pub manifold: ManifoldDescriptor,
    pub init: Init,
}

impl RsgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total == 0 {
            return Err(Error::invalid("T must be at least 1"));
        }
        if self.eval_period == 0 || self.eval_period > self.total {
            return Err(Error::invalid(format!(
                "eval_period must lie in [1, T = {}], got {}",
                self.total, self.eval_period
            )));
        }
        validate_pair(&self.lr, &self.bs, self.total, None)?;
        if let Init::Provided(x) = &self.init {
            self.manifold.point(x.value().clone())?;
        }
        Ok(())
    }

    fn is_eval_iter(&self, t: usize) -> bool {
        t % self.eval_period == 0 || t + 1 == self.total
    }
}

/// Full-objective telemetry taken at the iterate `x_t` before step `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub iter: usize,
    pub batch_size: u64,
    pub lr: f64,
    /// Stochastic gradient evaluations spent before this iteration.
    pub sfo_cum: u64,
    /// Full Riemannian gradient norm.
    pub grad_norm: f64,
    pub loss: f64,
    /// Milliseconds since the run started; not reproducible.
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TelemetryRow>,
    pub final_point: ManifoldPoint,
    /// Smallest evaluated squared full-gradient norm.
    pub min_grad_norm_sq: f64,
    pub total_sfo: u64,
}

impl RunRecord {
    pub fn final_loss(&self) -> Option<f64> {
        self.rows.last().map(|r| r.loss)
    }
}

/// `b` i.i.d. uniform indices in `[0, n)`, drawn with replacement.
pub fn sample_batch<R: Rng + ?Sized>(rng: &mut R, n: usize, b: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("cannot sample from an empty dataset"));
    }
    Ok((0..b).map(|_| rng.random_range(0..n)).collect())
}

/// One RSGD step from `x` with the minibatch `batch` and step size `eta`.
pub fn rsgd_step<P: Problem + ?Sized>(
    problem: &P,
    x: &ManifoldPoint,
    batch: &[usize],
    eta: f64,
) -> Result<ManifoldPoint> {
    if !(eta >= 0.0) {
        return Err(Error::invalid(format!("step size must be nonnegative, got {eta}")));
    }
    let g = problem.rgrad(x, Some(batch))?;
    problem.manifold().retract(x, &g.scaled(-eta))
}

fn initial_point(cfg: &RsgdConfig, rng: &mut ChaCha8Rng) -> Result<ManifoldPoint> {
    match &cfg.init {
        Init::RandomOrthonormal => cfg.manifold.random_point(rng),
        Init::Provided(x) => Ok(x.clone()),
    }
}

/// Runs `T` iterations of RSGD. Deterministic given the configuration, the
/// seed and the problem data.
pub fn run<P: Problem + ?Sized>(problem: &P, cfg: &RsgdConfig) -> Result<RunRecord> {
    cfg.validate()?;
    if problem.manifold() != cfg.manifold {
        return Err(Error::invalid(format!(
            "problem lives on {:?} but the configuration names {:?}",
            problem.manifold(),
            cfg.manifold
        )));
    }
    let n = problem.num_samples();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = initial_point(cfg, &mut rng)?;
    let m = problem.manifold();

    let mut rows = Vec::new();
    let mut sfo: u64 = 0;
    let mut min_sq = f64::INFINITY;
    for t in 0..cfg.total {
        let eta = cfg.lr.lr_at(t, cfg.total)?;
        let b = cfg.bs.bs_at(t);
        if cfg.is_eval_iter(t) {
            let loss = problem.loss(&x, None)?;
            let grad_norm = problem.rgrad(&x, None)?.frobenius_norm();
            if !loss.is_finite() || !grad_norm.is_finite() {
                return Err(Error::Diverged {
                    iter: t,
                    reason: format!("loss = {loss}, gradient norm = {grad_norm}"),
                });
            }
            min_sq = min_sq.min(grad_norm * grad_norm);
            rows.push(TelemetryRow {
                iter: t,
                batch_size: b,
                lr: eta,
                sfo_cum: sfo,
                grad_norm,
                loss,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        let batch = sample_batch(&mut rng, n, b as usize)?;
        let g = problem.rgrad(&x, Some(&batch))?;
        if !g.is_finite() {
            return Err(Error::Diverged { iter: t, reason: "non-finite stochastic gradient".into() });
        }
        x = m.retract(&x, &g.scaled(-eta)).map_err(|e| match e {
            Error::NumericalDegeneracy(reason) => Error::Diverged { iter: t, reason },
            other => other,
        })?;
        sfo += b;
    }
    Ok(RunRecord { rows, final_point: x, min_grad_norm_sq: min_sq, total_sfo: sfo })
}

/// Numerical estimate of the retraction-smoothness constant:
/// the largest `2(f(R_x(v)) − f(x) − ⟨grad f(x), v⟩)/‖v‖²` over `probes`
/// random points `x` and tangent vectors with `0 < ‖v‖ ≤ max_step`.
pub fn estimate_smoothness<P: Problem + ?Sized>(
    problem: &P,
    probes: usize,
    max_step: f64,
    seed: u64,
) -> Result<f64> {
    let m = problem.manifold();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..probes {
        let x = m.random_point(&mut rng)?;
        let f0 = problem.loss(&x, None)?;
        let g = problem.rgrad(&x, None)?;
        let dir = m.random_tangent(&x, &mut rng)?;
        let norm = dir.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let len = max_step * rng.random_range(f64::EPSILON..=1.0);
        let v = dir.scaled(len / norm);
        let y = m.retract(&x, &v)?;
        let f1 = problem.loss(&y, None)?;
        let vn2 = v.frobenius_norm().powi(2);
        let ratio = 2.0 * (f1 - f0 - m.inner(&x, &g, &v)?) / vn2;
        best = best.max(ratio);
    }
    Ok(best)
}
