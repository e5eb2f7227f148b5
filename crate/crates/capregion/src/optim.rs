//! Weighted boundary optimization over per-mode power allocations.
//!
//! Both rate characterizations reduce to the same finite program: indices
//! `i` carry a measure `b_i` (1/N for time-domain modes, quadrature weights
//! for spectral nodes), a coupling coefficient `c_i` in [0, 1], and per-user
//! budgets `sum_i b_i x_{k,i} <= B_k` with `x >= 0`. The achievable rates of
//! an allocation are
//!
//! ```text
//! a_k  = (1/2) sum_i b_i log2(1 + x_{k,i} / s^2)
//! a12  = (1/2) sum_i b_i log2(1 + (x_1 + x_2)/s^2 + c x_1 x_2 / s^4)
//! ```
//!
//! and the region is the union of pentagons {r1 <= a1, r2 <= a2,
//! r1 + r2 <= a12}. For a boundary weight (mu1, mu2) the pentagon maximum
//! sits at a corner, and which corner wins is decided by the weight order
//! alone (the corner-value difference is (mu1 - mu2)(a1 + a2 - a12) with
//! a1 + a2 >= a12 always), so each weight solves one smooth concave program:
//! a nonnegative combination of `a_fav` and `a12`. That program is ascended
//! with projected Barzilai-Borwein gradient steps from several deterministic
//! starts, and the best converged iterate is kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CapError, CapResult};
use crate::quad::kahan_sum;
use crate::rate_freq::SpectralGrid;
use crate::rate_time::RateTriple;
use crate::toeplitz::InterferenceMatrices;

const LN_2: f64 = std::f64::consts::LN_2;

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Stopping policy for the projected ascent.
#[derive(Debug, Clone, Copy)]
pub struct AscentParams {
    /// Hard iteration cap; exceeding it without converging is an error.
    pub max_iterations: usize,
    /// Convergence window length in iterations.
    pub window: usize,
    /// Converged when the objective improves by less than this over one
    /// window.
    pub tol: f64,
}

impl Default for AscentParams {
    fn default() -> Self {
        AscentParams {
            max_iterations: 20_000,
            window: 50,
            tol: 1e-10,
        }
    }
}

/// The unified mode/spectral allocation program.
#[derive(Debug, Clone)]
pub struct ModeProblem {
    b: Vec<f64>,
    coupling: Vec<f64>,
    dead: Vec<bool>,
    sigma_sq: f64,
    budgets: (f64, f64),
}

/// Result of one weighted boundary solve.
#[derive(Debug, Clone)]
pub struct WeightedSolution {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub rates: RateTriple,
    /// Pentagon corner (r1, r2) realizing the weighted maximum.
    pub corner: (f64, f64),
    /// Weighted objective value at the corner.
    pub objective: f64,
    /// Total ascent iterations across all starts.
    pub iterations: usize,
}

struct AscentResult {
    z: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
    window_gain: f64,
}

impl ModeProblem {
    pub fn new(
        b: Vec<f64>,
        coupling: Vec<f64>,
        dead: Vec<bool>,
        sigma_sq: f64,
        budgets: (f64, f64),
    ) -> CapResult<ModeProblem> {
        let n = b.len();
        if n == 0 || coupling.len() != n || dead.len() != n {
            return Err(CapError::invalid(
                "mode_problem",
                "index vectors must be nonempty and of equal length",
            ));
        }
        if b.iter().any(|&w| !(w > 0.0)) {
            return Err(CapError::invalid("mode_problem.b", "measures must be > 0"));
        }
        if coupling.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(CapError::invalid(
                "mode_problem.coupling",
                "coupling must lie in [0, 1]",
            ));
        }
        if !(sigma_sq > 0.0) {
            return Err(CapError::invalid("mode_problem.sigma_sq", "must be > 0"));
        }
        if !(budgets.0 >= 0.0 && budgets.1 >= 0.0) {
            return Err(CapError::invalid("mode_problem.budgets", "must be >= 0"));
        }
        if dead.iter().all(|&d| d) {
            return Err(CapError::invalid(
                "mode_problem.dead",
                "at least one live index required",
            ));
        }
        Ok(ModeProblem {
            b,
            coupling,
            dead,
            sigma_sq,
            budgets,
        })
    }

    /// Time-domain instance: one index per mode, measure 1/N, budgets
    /// `dT P_k` (so that the measure-weighted total reproduces
    /// `sum psi <= N dT P_k`).
    pub fn from_matrices(m: &InterferenceMatrices) -> ModeProblem {
        let n = m.chan.n_symbols;
        let dt = m.pulse.accelerated_period();
        ModeProblem {
            b: vec![1.0 / n as f64; n],
            coupling: m.mode_coupling(),
            dead: vec![false; n],
            sigma_sq: m.chan.sigma0_sq,
            budgets: (dt * m.chan.power.0, dt * m.chan.power.1),
        }
    }

    /// Frequency-domain instance: one index per quadrature node, measure =
    /// quadrature weight, budgets `P_k`, effective noise `sigma0^2 / dT`
    /// (the dT converts composite spectra into per-mode received power).
    pub fn from_grid(grid: &SpectralGrid, sigma0_sq: f64, powers: (f64, f64)) -> ModeProblem {
        ModeProblem {
            b: grid.weights.clone(),
            coupling: grid.coupling.clone(),
            dead: grid.dead.clone(),
            sigma_sq: sigma0_sq / grid.pulse.accelerated_period(),
            budgets: powers,
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn budgets(&self) -> (f64, f64) {
        self.budgets
    }

    /// Total measure of live indices.
    pub fn live_measure(&self) -> f64 {
        kahan_sum(
            self.b
                .iter()
                .zip(&self.dead)
                .filter(|(_, &d)| !d)
                .map(|(&w, _)| w),
        )
    }

    /// Measure-weighted amount an allocation spends.
    pub fn spent(&self, x: &[f64]) -> f64 {
        kahan_sum(self.b.iter().zip(x).map(|(&w, &v)| w * v))
    }

    /// Rate triple of an allocation pair.
    pub fn rates(&self, x1: &[f64], x2: &[f64]) -> RateTriple {
        let n = self.len();
        assert_eq!(x1.len(), n, "allocation length mismatch");
        assert_eq!(x2.len(), n, "allocation length mismatch");
        let s2 = self.sigma_sq;
        let r1 = 0.5
            * kahan_sum((0..n).map(|i| self.b[i] * log2_1p(x1[i].max(0.0) / s2)));
        let r2 = 0.5
            * kahan_sum((0..n).map(|i| self.b[i] * log2_1p(x2[i].max(0.0) / s2)));
        let r_sum = 0.5
            * kahan_sum((0..n).map(|i| {
                let a = x1[i].max(0.0) / s2;
                let b = x2[i].max(0.0) / s2;
                self.b[i] * log2_1p(a + b + a * b * self.coupling[i])
            }));
        RateTriple { r1, r2, r_sum }
    }

    /// Flat full-budget allocation for one user (equal value on every live
    /// index); with uniform mode gains this is also the water-filling
    /// solution of the single-user problem.
    pub fn flat(&self, user: usize) -> Vec<f64> {
        let budget = if user == 1 { self.budgets.0 } else { self.budgets.1 };
        let live = self.live_measure();
        let v = if live > 0.0 { budget / live } else { 0.0 };
        self.dead.iter().map(|&d| if d { 0.0 } else { v }).collect()
    }

    /// Random full-budget feasible allocation pair.
    pub fn random_feasible(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let mut draw = |budget: f64| -> Vec<f64> {
            let u: Vec<f64> = self
                .dead
                .iter()
                .map(|&d| if d { 0.0 } else { rng.random_range(0.01..1.0) })
                .collect();
            let mass = self.spent(&u);
            if mass <= 0.0 {
                return self.flat(1);
            }
            let s = budget / mass;
            u.into_iter().map(|v| v * s).collect()
        };
        let x1 = draw(self.budgets.0);
        let x2 = draw(self.budgets.1);
        (x1, x2)
    }

    /// Euclidean projection of one user's allocation onto
    /// `{x >= 0, x = 0 on dead indices, sum_i b_i x_i <= budget}`.
    pub fn project(&self, x: &mut [f64], user: usize) {
        let budget = if user == 1 { self.budgets.0 } else { self.budgets.1 };
        project_budget(x, &self.b, &self.dead, budget);
    }

    /// Maximizes `mu1 r1 + mu2 r2` over the union of pentagons. `seed`
    /// determinizes the random starts; identical inputs give bit-identical
    /// outputs regardless of threading in the caller.
    pub fn maximize_weighted(
        &self,
        mu: (f64, f64),
        seed: u64,
        params: &AscentParams,
    ) -> CapResult<WeightedSolution> {
        if !(mu.0 >= 0.0 && mu.1 >= 0.0) || (mu.0 == 0.0 && mu.1 == 0.0) {
            return Err(CapError::PreconditionViolated {
                context: "maximize_weighted",
                reason: format!("weights must be nonnegative and not both zero, got {mu:?}"),
            });
        }
        if mu.1 == 0.0 {
            return self.endpoint(1, mu, seed, params);
        }
        if mu.0 == 0.0 {
            return self.endpoint(2, mu, seed, params);
        }

        let n = self.len();
        // Corner choice by weight order: user-1-favoring corner
        // (a1, a12 - a1) wins when mu1 >= mu2, the other otherwise.
        let favor1 = mu.0 >= mu.1;
        let (solo_coef, sum_coef) = if favor1 {
            (mu.0 - mu.1, mu.1)
        } else {
            (mu.1 - mu.0, mu.0)
        };

        let objective = |z: &[f64]| self.corner_objective(z, favor1, solo_coef, sum_coef);
        let gradient = |z: &[f64], g: &mut [f64]| {
            self.corner_gradient(z, favor1, solo_coef, sum_coef, g)
        };
        let project = |z: &mut [f64]| {
            let (z1, z2) = z.split_at_mut(n);
            self.project(z1, 1);
            self.project(z2, 2);
        };

        let mut best: Option<AscentResult> = None;
        let mut iterations = 0usize;
        for (idx, start) in self.start_points(seed).into_iter().enumerate() {
            let out = ascend(&objective, &gradient, &project, start, params);
            iterations += out.iterations;
            if !out.converged {
                return Err(CapError::OptimizerStalled {
                    iterations: out.iterations,
                    objective: out.value,
                    window_gain: out.window_gain,
                });
            }
            let better = match &best {
                None => true,
                Some(b) => out.value > b.value,
            };
            if better {
                best = Some(out);
            }
            let _ = idx;
        }
        let best = best.expect("at least one start");
        let (x1, x2) = split_vec(best.z, n);
        let rates = self.rates(&x1, &x2);
        let corner = corner_point(&rates, favor1);
        Ok(WeightedSolution {
            x1,
            x2,
            rates,
            corner,
            objective: mu.0 * corner.0 + mu.1 * corner.1,
            iterations,
        })
    }

    /// Axis endpoint: the favored user takes its exact single-user optimum
    /// (flat over live indices), then the other user's allocation maximizes
    /// the joint-rate integrand with the favored allocation frozen, which
    /// maximizes the corner's second coordinate.
    fn endpoint(
        &self,
        favored: usize,
        mu: (f64, f64),
        seed: u64,
        params: &AscentParams,
    ) -> CapResult<WeightedSolution> {
        let n = self.len();
        let x_fav = self.flat(favored);
        let other = if favored == 1 { 2 } else { 1 };

        let pair = |x_oth: &[f64]| -> (Vec<f64>, Vec<f64>) {
            if favored == 1 {
                (x_fav.clone(), x_oth.to_vec())
            } else {
                (x_oth.to_vec(), x_fav.clone())
            }
        };
        let objective = |z: &[f64]| {
            let (x1, x2) = pair(z);
            self.rates(&x1, &x2).r_sum
        };
        let gradient = |z: &[f64], g: &mut [f64]| {
            let s2 = self.sigma_sq;
            for i in 0..n {
                if self.dead[i] {
                    g[i] = 0.0;
                    continue;
                }
                let (own, frozen) = (z[i].max(0.0), x_fav[i]);
                let d = 1.0
                    + (own + frozen) / s2
                    + self.coupling[i] * own * frozen / (s2 * s2);
                g[i] = 0.5 * self.b[i] * (1.0 / s2 + self.coupling[i] * frozen / (s2 * s2))
                    / (LN_2 * d);
            }
        };
        let project = |z: &mut [f64]| self.project(z, other);

        let mut best: Option<AscentResult> = None;
        let mut iterations = 0usize;
        let mut starts: Vec<Vec<f64>> = vec![self.flat(other), self.flat(other)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let (a, b) = self.random_feasible(&mut rng);
            starts.push(if other == 1 { a } else { b });
        }
        for start in starts {
            let out = ascend(&objective, &gradient, &project, start, params);
            iterations += out.iterations;
            if !out.converged {
                return Err(CapError::OptimizerStalled {
                    iterations: out.iterations,
                    objective: out.value,
                    window_gain: out.window_gain,
                });
            }
            let better = match &best {
                None => true,
                Some(b) => out.value > b.value,
            };
            if better {
                best = Some(out);
            }
        }
        let best = best.expect("at least one start");
        let (x1, x2) = pair(&best.z);
        let rates = self.rates(&x1, &x2);
        let corner = corner_point(&rates, favored == 1);
        Ok(WeightedSolution {
            x1,
            x2,
            rates,
            corner,
            objective: mu.0 * corner.0 + mu.1 * corner.1,
            iterations,
        })
    }

    /// Deterministic start battery: flat pair, water-filling pair (equal to
    /// flat here since every mode has the same gain; kept as a distinct
    /// start for robustness at negligible cost), and eight seeded random
    /// feasible pairs.
    fn start_points(&self, seed: u64) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut starts = Vec::with_capacity(10);
        let flat = {
            let mut z = self.flat(1);
            z.extend(self.flat(2));
            z
        };
        starts.push(flat.clone());
        starts.push(flat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let (x1, x2) = self.random_feasible(&mut rng);
            let mut z = x1;
            z.extend(x2);
            debug_assert_eq!(z.len(), 2 * n);
            starts.push(z);
        }
        starts
    }

    fn corner_objective(&self, z: &[f64], favor1: bool, solo_coef: f64, sum_coef: f64) -> f64 {
        let n = self.len();
        let (x1, x2) = z.split_at(n);
        let t = self.rates(x1, x2);
        let solo = if favor1 { t.r1 } else { t.r2 };
        solo_coef * solo + sum_coef * t.r_sum
    }

    fn corner_gradient(
        &self,
        z: &[f64],
        favor1: bool,
        solo_coef: f64,
        sum_coef: f64,
        g: &mut [f64],
    ) {
        let n = self.len();
        let s2 = self.sigma_sq;
        let (x1, x2) = z.split_at(n);
        for i in 0..n {
            if self.dead[i] {
                g[i] = 0.0;
                g[n + i] = 0.0;
                continue;
            }
            let a = x1[i].max(0.0);
            let b = x2[i].max(0.0);
            let c = self.coupling[i];
            let d = 1.0 + (a + b) / s2 + c * a * b / (s2 * s2);
            let scale = 0.5 * self.b[i] / LN_2;
            let dsum_da = scale * (1.0 / s2 + c * b / (s2 * s2)) / d;
            let dsum_db = scale * (1.0 / s2 + c * a / (s2 * s2)) / d;
            let dsolo = if favor1 {
                scale / (s2 + a)
            } else {
                scale / (s2 + b)
            };
            g[i] = sum_coef * dsum_da + if favor1 { solo_coef * dsolo } else { 0.0 };
            g[n + i] = sum_coef * dsum_db + if favor1 { 0.0 } else { solo_coef * dsolo };
        }
    }
}

/// Pentagon corner realizing the weighted maximum: the favored user keeps
/// its solo rate, the other takes the sum-rate remainder.
fn corner_point(t: &RateTriple, favor1: bool) -> (f64, f64) {
    if favor1 {
        (t.r1, (t.r_sum - t.r1).max(0.0))
    } else {
        ((t.r_sum - t.r2).max(0.0), t.r2)
    }
}

fn split_vec(z: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x2 = z[n..].to_vec();
    let mut x1 = z;
    x1.truncate(n);
    (x1, x2)
}

/// Euclidean projection onto `{x >= 0, x_dead = 0, sum b_i x_i <= budget}`
/// by the exact sorted-breakpoint method: the solution has the form
/// `x_i = max(y_i - nu b_i, 0)` with `nu = 0` if the clamped point is
/// already inside the budget, otherwise the unique positive root of the
/// budget equation.
pub fn project_budget(x: &mut [f64], b: &[f64], dead: &[bool], budget: f64) {
    let n = x.len();
    assert_eq!(b.len(), n);
    assert_eq!(dead.len(), n);
    if budget <= 0.0 {
        for v in x.iter_mut() {
            *v = 0.0;
        }
        return;
    }
    let mut clamped_total = 0.0;
    for i in 0..n {
        if dead[i] {
            x[i] = 0.0;
        } else if x[i] > 0.0 {
            clamped_total += b[i] * x[i];
        }
    }
    if clamped_total <= budget {
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        return;
    }
    // Candidates with positive value, sorted by breakpoint y/b descending
    // (ties broken by index so the projection is deterministic).
    let mut order: Vec<usize> = (0..n).filter(|&i| !dead[i] && x[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let ri = x[i] / b[i];
        let rj = x[j] / b[j];
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    let mut acc_by = 0.0;
    let mut acc_bb = 0.0;
    let mut nu = 0.0;
    for (k, &i) in order.iter().enumerate() {
        acc_by += b[i] * x[i];
        acc_bb += b[i] * b[i];
        let candidate = (acc_by - budget) / acc_bb;
        let next_ratio = order.get(k + 1).map(|&j| x[j] / b[j]);
        if next_ratio.map_or(true, |r| candidate >= r) {
            nu = candidate.max(0.0);
            break;
        }
    }
    for i in 0..n {
        x[i] = if dead[i] { 0.0 } else { (x[i] - nu * b[i]).max(0.0) };
    }
}

/// Projected gradient ascent with Barzilai-Borwein steps and halving on
/// rejection. Converges when the running best improves by less than
/// `params.tol` over `params.window` iterations (or the step underflows);
/// reports `converged = false` when the iteration cap is hit first.
fn ascend(
    objective: &impl Fn(&[f64]) -> f64,
    gradient: &impl Fn(&[f64], &mut [f64]),
    project: &impl Fn(&mut [f64]),
    start: Vec<f64>,
    params: &AscentParams,
) -> AscentResult {
    let mut z = start;
    project(&mut z);
    let mut f = objective(&z);
    let mut g = vec![0.0; z.len()];
    gradient(&z, &mut g);
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut step = (1.0 + znorm) / (1.0 + gnorm);

    let mut best = f;
    let mut history: Vec<f64> = Vec::with_capacity(params.max_iterations + 1);
    history.push(best);
    let mut iterations = 0usize;
    let mut converged = false;

    let mut trial = vec![0.0; z.len()];
    let mut g_new = vec![0.0; z.len()];
    while iterations < params.max_iterations {
        iterations += 1;
        for i in 0..z.len() {
            trial[i] = z[i] + step * g[i];
        }
        project(&mut trial);
        let ft = objective(&trial);
        if ft > f {
            gradient(&trial, &mut g_new);
            let mut ss = 0.0;
            let mut sd = 0.0;
            for i in 0..z.len() {
                let s = trial[i] - z[i];
                ss += s * s;
                sd += s * (g[i] - g_new[i]);
            }
            step = if sd > 1e-300 {
                (ss / sd).clamp(1e-14, 1e14)
            } else {
                (step * 2.0).min(1e14)
            };
            std::mem::swap(&mut z, &mut trial);
            std::mem::swap(&mut g, &mut g_new);
            f = ft;
            if f > best {
                best = f;
            }
        } else {
            step *= 0.5;
            if step < 1e-250 {
                converged = true;
                history.push(best);
                break;
            }
        }
        history.push(best);
        if history.len() > params.window {
            let then = history[history.len() - 1 - params.window];
            if best - then < params.tol {
                converged = true;
                break;
            }
        }
    }

    let window_gain = if history.len() > params.window {
        best - history[history.len() - 1 - params.window]
    } else {
        best - history[0]
    };
    AscentResult {
        z,
        value: f,
        iterations,
        converged,
        window_gain,
    }
}

// ---------------------------------------------------------------------------
