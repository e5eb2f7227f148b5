//! Finite-block rate formulas in the time domain.
//!
//! All rates here are in bits per symbol interval (per real channel use,
//! i.e. already normalized by the block length through the 1/(2N) factor).
//! Three layers are provided, from most general to most structured:
//!
//! * [`sum_rate_logdet`] / [`single_user_rate`] — log-determinant mutual
//!   informations for arbitrary symbol covariances, evaluated through
//!   symmetrized eigenvalue problems so rank-deficient Gram matrices and
//!   covariances are handled without forming explicit inverses;
//! * [`rate_triple_from_modes`] — the closed per-mode form valid when each
//!   user's covariance is aligned with its singular-vector basis of the
//!   whitened cross operator, in which case the 2N x 2N block determinant
//!   factors into N independent 2 x 2 determinants;
//! * [`iid_successive_baseline`] — the suboptimal reference scheme: white
//!   symbol covariances, one user decoded from its own matched-filter
//!   outputs with the other treated as colored noise, the other decoded
//!   interference-free afterwards.

use nalgebra::DMatrix;

use crate::error::{CapError, CapResult};
use crate::linalg;
use crate::quad::kahan_sum;
use crate::toeplitz::{hermitian_sqrt, InterferenceMatrices};

/// A point of the rate region: per-user rates and the sum rate, in bits per
/// symbol interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub r1: f64,
    pub r2: f64,
    pub r_sum: f64,
}

impl RateTriple {
    /// Multiplies every component by `factor` (used for unit conversions).
    pub fn scaled(self, factor: f64) -> RateTriple {
        RateTriple {
            r1: self.r1 * factor,
            r2: self.r2 * factor,
            r_sum: self.r_sum * factor,
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// `(1 / 2N) * sum_i log2(1 + eig_i / sigma_sq)` over clamped eigenvalues.
fn rate_from_eigs(eigs: impl IntoIterator<Item = f64>, sigma_sq: f64, n: usize) -> f64 {
    let s = kahan_sum(eigs.into_iter().map(|e| log2_1p(e.max(0.0) / sigma_sq)));
    s / (2.0 * n as f64)
}

/// Builds the symbol covariance realizing the mode allocation `psi` for one
/// user: `R = G^{-1/2} W diag(psi) W' G^{-1/2}` with `W` the user's singular
/// basis of the whitened cross operator. Fails if the allocation overdraws
/// the user's power budget `N dT P_k` (tiny rounding slack allowed).
pub fn covariance_from_modes(
    m: &InterferenceMatrices,
    user: usize,
    psi: &[f64],
) -> CapResult<DMatrix<f64>> {
    let n = m.chan.n_symbols;
    assert!(user == 1 || user == 2, "user must be 1 or 2");
    assert_eq!(psi.len(), n, "one mode weight per symbol required");
    let total = kahan_sum(psi.iter().copied());
    let budget = m.mode_budget(user);
    if total > budget * (1.0 + 1e-9) + 1e-12 {
        return Err(CapError::BudgetExceeded {
            user,
            allocated: total,
            budget,
        });
    }
    let w = if user == 1 { &m.phi_u } else { &m.phi_v };
    let mut scaled = w.clone();
    for (j, &p) in psi.iter().enumerate() {
        let mut col = scaled.column_mut(j);
        let p = p.max(0.0).sqrt();
        for v in col.iter_mut() {
            *v *= p;
        }
    }
    // R = G^{-1/2} (W D W') G^{-1/2} with W D W' assembled as (W D^{1/2})(W D^{1/2})'
    let core = &scaled * scaled.transpose();
    Ok(&m.g_inv_sqrt * core * &m.g_inv_sqrt)
}

/// Power actually spent by a covariance: `tr(G R)`.
pub fn power_used(m: &InterferenceMatrices, r: &DMatrix<f64>) -> f64 {
    (&m.g * r).trace()
}

/// Interference-free rate of one user with symbol covariance `r`:
/// `(1 / 2N) log2 det(I + sigma0^{-2} R^{1/2} G R^{1/2})`.
pub fn single_user_rate(m: &InterferenceMatrices, r: &DMatrix<f64>) -> CapResult<f64> {
    let n = m.chan.n_symbols;
    assert_eq!(r.nrows(), n, "covariance dimension mismatch");
    let s = hermitian_sqrt(r)?;
    let b = &s * &m.g * &s;
    let (vals, _) = linalg::sym_eigen_desc(&b);
    Ok(rate_from_eigs(vals.iter().copied(), m.chan.sigma0_sq, n))
}

/// Joint sum rate for arbitrary symbol covariances:
/// `(1 / 2N) log2 det(I + sigma0^{-2} R~^{1/2} G~ R~^{1/2})` with
/// `R~ = blkdiag(R1, R2)` and `G~` the stacked interference matrix. The
/// square-root symmetrization keeps the computation well defined even when
/// the stacked Gram matrix is singular (it restricts to the signal range,
/// which is where the noise lives too).
pub fn sum_rate_logdet(
    m: &InterferenceMatrices,
    r1: &DMatrix<f64>,
    r2: &DMatrix<f64>,
) -> CapResult<f64> {
    let n = m.chan.n_symbols;
    assert_eq!(r1.nrows(), n, "user-1 covariance dimension mismatch");
    assert_eq!(r2.nrows(), n, "user-2 covariance dimension mismatch");
    let s1 = hermitian_sqrt(r1)?;
    let s2 = hermitian_sqrt(r2)?;
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&(&s1 * &m.g * &s1));
    b.view_mut((0, n), (n, n)).copy_from(&(&s1 * &m.g12 * &s2));
    b.view_mut((n, 0), (n, n)).copy_from(&(&s2 * &m.g21 * &s1));
    b.view_mut((n, n), (n, n)).copy_from(&(&s2 * &m.g * &s2));
    let (vals, _) = linalg::sym_eigen_desc(&b);
    Ok(rate_from_eigs(vals.iter().copied(), m.chan.sigma0_sq, 2 * n) * 2.0)
}

/// Rate triple for mode-aligned covariances, evaluated in closed form. With
/// user 1 allocating `psi1` along the left singular basis and user 2
/// allocating `psi2` along the right one, the stacked interference matrix
/// block-diagonalizes and each mode contributes an independent 2 x 2
/// determinant with coupling `c_i = 1 - sv_i^2`:
///
/// ```text
/// r1    = (1/2N) sum_i log2(1 + psi1_i / s^2)
/// r2    = (1/2N) sum_i log2(1 + psi2_i / s^2)
/// r_sum = (1/2N) sum_i log2(1 + psi1_i/s^2 + psi2_i/s^2 + psi1_i psi2_i c_i / s^4)
/// ```
///
/// Budgets are not re-checked here; callers produce feasible allocations.
pub fn rate_triple_from_modes(m: &InterferenceMatrices, psi1: &[f64], psi2: &[f64]) -> RateTriple {
    let n = m.chan.n_symbols;
    assert_eq!(psi1.len(), n, "one mode weight per symbol required");
    assert_eq!(psi2.len(), n, "one mode weight per symbol required");
    let s2 = m.chan.sigma0_sq;
    let coupling = m.mode_coupling();
    let norm = 1.0 / (2.0 * n as f64);
    let r1 = kahan_sum(psi1.iter().map(|&p| log2_1p(p.max(0.0) / s2))) * norm;
    let r2 = kahan_sum(psi2.iter().map(|&p| log2_1p(p.max(0.0) / s2))) * norm;
    let r_sum = kahan_sum((0..n).map(|i| {
        let a = psi1[i].max(0.0) / s2;
        let b = psi2[i].max(0.0) / s2;
        log2_1p(a + b + a * b * coupling[i])
    })) * norm;
    RateTriple { r1, r2, r_sum }
}

/// Upper bound on the joint mutual information from the diagonals of the
/// rotated mode matrices: projects each covariance into its singular basis
/// (`Psi~_k = W' G^{1/2} R_k G^{1/2} W`), keeps only the diagonals, and
/// evaluates the closed per-mode form. For any admissible covariances the
/// block log-det is at most this value, with equality exactly when both
/// rotated matrices are diagonal. Returns the bounding triple together with
/// the combined off-diagonal Frobenius mass (a diagonality certificate).
pub fn mode_diagonal_bound(
    m: &InterferenceMatrices,
    r1: &DMatrix<f64>,
    r2: &DMatrix<f64>,
) -> (RateTriple, f64) {
    let n = m.chan.n_symbols;
    assert_eq!(r1.nrows(), n, "user-1 covariance dimension mismatch");
    assert_eq!(r2.nrows(), n, "user-2 covariance dimension mismatch");
    let rotated = |r: &DMatrix<f64>, w: &DMatrix<f64>| -> DMatrix<f64> {
        w.transpose() * &m.g_sqrt * r * &m.g_sqrt * w
    };
    let p1 = rotated(r1, &m.phi_u);
    let p2 = rotated(r2, &m.phi_v);
    let mut off_sq = 0.0;
    for p in [&p1, &p2] {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off_sq += p[(i, j)] * p[(i, j)];
                }
            }
        }
    }
    let psi1: Vec<f64> = (0..n).map(|i| p1[(i, i)]).collect();
    let psi2: Vec<f64> = (0..n).map(|i| p2[(i, i)]).collect();
    (rate_triple_from_modes(m, &psi1, &psi2), off_sq.sqrt())
}

/// Suboptimal reference scheme: both users transmit white symbols at full
/// power (`R_k = dT P_k I`, which spends the budget exactly since the pulse
/// has unit energy); user 2 is decoded from its own matched-filter outputs
/// with user 1's signal treated as colored Gaussian noise, then user 1 is
/// decoded interference-free. Returns the per-user rates and their sum.
pub fn iid_successive_baseline(m: &InterferenceMatrices) -> CapResult<RateTriple> {
    let n = m.chan.n_symbols;
    let dt = m.pulse.accelerated_period();
    let s2 = m.chan.sigma0_sq;
    let p1 = dt * m.chan.power.0;
    let p2 = dt * m.chan.power.1;

    // User 1, interference removed: eigenvalues of p1 * G.
    let r1 = rate_from_eigs(m.g_eigvals.iter().map(|&e| p1 * e), s2, n);

    // User 2 with user 1 as noise: det(S_y2) / det(S_y2|a2)
    //   = det(I + A^{-1/2} (p2 G G) A^{-1/2}),  A = p1 G21 G21' + s2 G.
    let noise = &m.g21 * m.g21.transpose() * p1 + &m.g * s2;
    let (nvals, nvecs) = linalg::sym_eigen_desc(&noise);
    if nvals[n - 1] <= 0.0 {
        return Err(CapError::NotPsd {
            context: "interference-plus-noise covariance",
            min_eigenvalue: nvals[n - 1],
        });
    }
    let whiten = linalg::sym_function(&nvals, &nvecs, |x| 1.0 / x.sqrt());
    let signal = &m.g * &m.g * p2;
    let c = &whiten * signal * &whiten;
    let (cvals, _) = linalg::sym_eigen_desc(&c);
    let r2 = rate_from_eigs(cvals.iter().copied(), 1.0, n);

    Ok(RateTriple {
        r1,
        r2,
        r_sum: r1 + r2,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseSpec;
    use crate::toeplitz::{build_interference, ChannelSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const POWER: f64 = 100.0;

    fn setup(beta: f64, delta: f64, tau2: f64, n: usize) -> InterferenceMatrices {
        let pulse = PulseSpec::new(beta, 1.0, delta).unwrap();
        let chan = ChannelSpec::new(0.0, tau2, 1.0, (POWER, POWER), n).unwrap();
        build_interference(&pulse, &chan).unwrap()
    }

    fn flat_modes(m: &InterferenceMatrices, user: usize) -> Vec<f64> {
        let n = m.chan.n_symbols;
        vec![m.mode_budget(user) / n as f64; n]
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() * (scale / n as f64)
    }

    #[test]
    fn flat_allocation_hits_the_scalar_single_user_capacity() {
        // The mode construction absorbs the Gram matrix, so a flat mode
        // allocation gives exactly (1/2) log2(1 + dT P / s^2) at every N.
        for (beta, delta, n) in [(0.25, 1.0, 4), (0.25, 0.9, 9), (0.3, 0.8, 16)] {
            let m = setup(beta, delta, 0.45, n);
            let dt = m.pulse.accelerated_period();
            let expected = 0.5 * (1.0 + dt * POWER).log2();
            let psi = flat_modes(&m, 1);
            let closed = rate_triple_from_modes(&m, &psi, &vec![0.0; n]).r1;
            assert!(
                (closed - expected).abs() < 1e-12,
                "closed form {closed} vs {expected} at delta={delta}, N={n}"
            );
            let r = covariance_from_modes(&m, 1, &psi).unwrap();
            let logdet = single_user_rate(&m, &r).unwrap();
            assert!(
                (logdet - expected).abs() < 1e-9,
                "logdet {logdet} vs {expected} at delta={delta}, N={n}"
            );
        }
    }

    #[test]
    fn reconstructed_covariance_spends_the_mode_total() {
        let m = setup(0.25, 0.9, 0.3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let psi: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..60.0)).collect();
            let total: f64 = psi.iter().sum();
            for user in [1, 2] {
                let r = covariance_from_modes(&m, user, &psi).unwrap();
                let spent = power_used(&m, &r);
                assert!(
                    (spent - total).abs() < 1e-9 * total.max(1.0),
                    "tr(GR) = {spent}, expected {total}"
                );
            }
        }
    }

    #[test]
    fn overdrawn_allocation_is_rejected() {
        let m = setup(0.25, 0.85, 0.3, 6);
        let budget = m.mode_budget(1);
        let psi = vec![budget / 3.0; 6]; // sum = 2 * budget
        assert!(matches!(
            covariance_from_modes(&m, 1, &psi),
            Err(CapError::BudgetExceeded { user: 1, .. })
        ));
    }

    #[test]
    fn mode_closed_form_matches_block_determinant() {
        let m = setup(0.25, 0.9, 0.45, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let psi1: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..50.0)).collect();
            let psi2: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..50.0)).collect();
            let closed = rate_triple_from_modes(&m, &psi1, &psi2);
            let r1 = covariance_from_modes(&m, 1, &psi1).unwrap();
            let r2 = covariance_from_modes(&m, 2, &psi2).unwrap();
            let joint = sum_rate_logdet(&m, &r1, &r2).unwrap();
            assert!(
                (closed.r_sum - joint).abs() < 1e-9,
                "mode sum {} vs block determinant {}",
                closed.r_sum,
                joint
            );
            let single = single_user_rate(&m, &r1).unwrap();
            assert!((closed.r1 - single).abs() < 1e-9);
        }
    }

    #[test]
    fn block_determinant_matches_dense_lu_oracle() {
        // Independent check of the symmetrized evaluation:
        // (1/2N) log2 det(I + s^{-2} R~ G~) computed by plain LU.
        let m = setup(0.25, 0.9, 0.37, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..12 {
            let r1 = random_psd(&mut rng, 4, 40.0);
            let r2 = random_psd(&mut rng, 4, 40.0);
            let fast = sum_rate_logdet(&m, &r1, &r2).unwrap();
            let mut stacked = DMatrix::zeros(8, 8);
            stacked.view_mut((0, 0), (4, 4)).copy_from(&r1);
            stacked.view_mut((4, 4), (4, 4)).copy_from(&r2);
            let big = DMatrix::<f64>::identity(8, 8)
                + &stacked * &m.g_tilde / m.chan.sigma0_sq;
            let oracle = big.determinant().log2() / 8.0;
            assert!(
                (fast - oracle).abs() < 1e-9 * oracle.abs().max(1.0),
                "symmetrized {fast} vs LU oracle {oracle}"
            );
        }
    }

    #[test]
    fn zero_power_means_zero_rate() {
        let m = setup(0.25, 0.9, 0.45, 5);
        let zeros = vec![0.0; 5];
        let t = rate_triple_from_modes(&m, &zeros, &zeros);
        assert_eq!(t.r1, 0.0);
        assert_eq!(t.r2, 0.0);
        assert_eq!(t.r_sum, 0.0);
        let r = covariance_from_modes(&m, 1, &zeros).unwrap();
        assert!(single_user_rate(&m, &r).unwrap().abs() < 1e-15);
    }

    #[test]
    fn baseline_reduces_to_scalar_formulas_for_one_synchronous_symbol() {
        // N = 1, same delay, no acceleration: every matrix is the scalar 1.
        // Clean user: (1/2) log2(1 + P). Interfered user:
        // (1/2) log2((2P + 1) / (P + 1)). Their sum telescopes to the
        // synchronous sum capacity (1/2) log2(1 + 2P), which the joint
        // determinant reproduces on the rank-one stacked Gram matrix.
        let pulse = PulseSpec::new(0.25, 1.0, 1.0).unwrap();
        let chan = ChannelSpec::new(0.0, 0.0, 1.0, (POWER, POWER), 1).unwrap();
        let m = build_interference(&pulse, &chan).unwrap();
        let t = iid_successive_baseline(&m).unwrap();
        let r1_expect = 0.5 * (1.0 + POWER).log2();
        let r2_expect = 0.5 * ((1.0 + 2.0 * POWER) / (1.0 + POWER)).log2();
        assert!((t.r1 - r1_expect).abs() < 1e-12);
        assert!((t.r2 - r2_expect).abs() < 1e-12);
        let eye = DMatrix::<f64>::identity(1, 1) * POWER;
        let joint = sum_rate_logdet(&m, &eye, &eye).unwrap();
        assert!((t.r_sum - joint).abs() < 1e-12);
        assert!((joint - 0.5 * (1.0 + 2.0 * POWER).log2()).abs() < 1e-12);
    }

    #[test]
    fn baseline_never_beats_joint_decoding_of_the_same_covariances() {
        // Each baseline stage observes only one user's matched-filter
        // outputs, so its total is at most the joint mutual information of
        // the identical white covariances.
        let mut cases = Vec::new();
        for (beta, delta) in [(0.25, 1.0), (0.25, 0.9), (0.25, 0.8), (0.3, 0.85)] {
            for tau2_frac in [0.0, 0.25, 0.5] {
                cases.push((beta, delta, tau2_frac));
            }
        }
        for (beta, delta, tau2_frac) in cases {
            let pulse = PulseSpec::new(beta, 1.0, delta).unwrap();
            let tau2 = tau2_frac * pulse.accelerated_period();
            let chan = ChannelSpec::new(0.0, tau2, 1.0, (POWER, POWER), 10).unwrap();
            let m = build_interference(&pulse, &chan).unwrap();
            let base = iid_successive_baseline(&m).unwrap();
            let dt = pulse.accelerated_period();
            let white = DMatrix::<f64>::identity(10, 10) * (dt * POWER);
            let joint = sum_rate_logdet(&m, &white, &white).unwrap();
            assert!(
                base.r_sum <= joint + 1e-9,
                "baseline {} exceeds joint {} at beta={beta}, delta={delta}, tau2={tau2}",
                base.r_sum,
                joint
            );
        }
    }

    #[test]
    fn closed_form_requires_the_matched_singular_bases() {
        // Swapping the two users' singular bases yields valid covariances
        // with the same per-mode powers, but the block determinant no longer
        // factors, so the closed form must not match it.
        let m = setup(0.25, 0.85, 0.37, 6);
        let psi1: Vec<f64> = vec![60.0, 45.0, 30.0, 20.0, 10.0, 5.0];
        let psi2: Vec<f64> = vec![5.0, 10.0, 20.0, 30.0, 45.0, 60.0];
        let closed = rate_triple_from_modes(&m, &psi1, &psi2);

        let scale_cols = |w: &DMatrix<f64>, psi: &[f64]| {
            let mut s = w.clone();
            for (j, &p) in psi.iter().enumerate() {
                for v in s.column_mut(j).iter_mut() {
                    *v *= p.sqrt();
                }
            }
            &m.g_inv_sqrt * (&s * s.transpose()) * &m.g_inv_sqrt
        };
        let r1_swapped = scale_cols(&m.phi_v, &psi1);
        let r2_swapped = scale_cols(&m.phi_u, &psi2);
        let joint = sum_rate_logdet(&m, &r1_swapped, &r2_swapped).unwrap();
        assert!(
            (closed.r_sum - joint).abs() > 1e-6,
            "swapped bases should break the factorization: closed {} vs joint {}",
            closed.r_sum,
            joint
        );
    }

    #[test]
    fn block_determinant_never_exceeds_the_diagonal_mode_bound() {
        // Generic covariances rotate to non-diagonal mode matrices; the
        // closed form over their diagonals must upper-bound the true joint
        // rate, strictly so when the off-diagonal mass is substantial.
        let m = setup(0.25, 0.9, 0.37, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..10 {
            let r1 = random_psd(&mut rng, 6, 30.0);
            let r2 = random_psd(&mut rng, 6, 30.0);
            let joint = sum_rate_logdet(&m, &r1, &r2).unwrap();
            let (bound, off) = mode_diagonal_bound(&m, &r1, &r2);
            assert!(
                joint <= bound.r_sum + 1e-12,
                "trial {trial}: joint {joint} exceeds bound {}",
                bound.r_sum
            );
            assert!(off > 1e-3, "random covariances should be non-diagonal");
        }
        // Mode-aligned covariances achieve the bound.
        let psi1: Vec<f64> = (1..=6).map(|i| 4.0 * i as f64).collect();
        let psi2: Vec<f64> = (1..=6).rev().map(|i| 3.0 * i as f64).collect();
        let r1 = covariance_from_modes(&m, 1, &psi1).unwrap();
        let r2 = covariance_from_modes(&m, 2, &psi2).unwrap();
        let joint = sum_rate_logdet(&m, &r1, &r2).unwrap();
        let (bound, off) = mode_diagonal_bound(&m, &r1, &r2);
        assert!(off < 1e-8, "aligned covariances rotate to diagonal, off {off}");
        assert!((joint - bound.r_sum).abs() < 1e-9);
    }

    #[test]
    fn rates_are_monotone_in_each_mode_power() {
        let m = setup(0.25, 0.9, 0.45, 5);
        let psi1 = vec![10.0, 25.0, 5.0, 40.0, 0.0];
        let psi2 = vec![30.0, 0.0, 15.0, 8.0, 22.0];
        let base = rate_triple_from_modes(&m, &psi1, &psi2);
        for i in 0..5 {
            let mut bumped = psi1.clone();
            bumped[i] += 1.0;
            let t = rate_triple_from_modes(&m, &bumped, &psi2);
            assert!(t.r1 >= base.r1 && t.r2 >= base.r2 - 1e-15 && t.r_sum >= base.r_sum);
            let mut bumped2 = psi2.clone();
            bumped2[i] += 1.0;
            let t2 = rate_triple_from_modes(&m, &psi1, &bumped2);
            assert!(t2.r2 >= base.r2 && t2.r1 >= base.r1 - 1e-15 && t2.r_sum >= base.r_sum);
        }
    }

    #[test]
    fn common_snr_rescaling_leaves_rates_unchanged() {
        let pulse = PulseSpec::new(0.25, 1.0, 0.9).unwrap();
        let psi1 = vec![12.0, 3.0, 44.0, 7.0];
        let psi2 = vec![6.0, 28.0, 0.5, 19.0];
        let mut triples = Vec::new();
        for scale in [1.0, 7.5, 0.02] {
            let chan = ChannelSpec::new(0.0, 0.45, scale, (1e9, 1e9), 4).unwrap();
            let m = build_interference(&pulse, &chan).unwrap();
            let s1: Vec<f64> = psi1.iter().map(|p| p * scale).collect();
            let s2: Vec<f64> = psi2.iter().map(|p| p * scale).collect();
            triples.push(rate_triple_from_modes(&m, &s1, &s2));
        }
        for t in &triples[1..] {
            assert!((t.r1 - triples[0].r1).abs() < 1e-12);
            assert!((t.r2 - triples[0].r2).abs() < 1e-12);
            assert!((t.r_sum - triples[0].r_sum).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn mode_rates_satisfy_the_polymatroid_inequalities(
            alloc in proptest::collection::vec((0.0..80.0f64, 0.0..80.0f64), 5)
        ) {
            let m = setup(0.25, 0.9, 0.45, 5);
            let psi1: Vec<f64> = alloc.iter().map(|a| a.0).collect();
            let psi2: Vec<f64> = alloc.iter().map(|a| a.1).collect();
            let t = rate_triple_from_modes(&m, &psi1, &psi2);
            prop_assert!(t.r_sum <= t.r1 + t.r2 + 1e-12);
            prop_assert!(t.r_sum >= t.r1.max(t.r2) - 1e-12);
        }
    }
}
