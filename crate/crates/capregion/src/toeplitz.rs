//! Block-Toeplitz interference structure of the two-user accelerated channel.
//!
//! Sampling each user's matched filter at the accelerated symbol rate turns
//! the waveform channel into a linear model with Toeplitz Gram matrices:
//! `G[n, m] = g((n - m) dT)` for intra-user interference and
//! `G12[n, m] = g((n - m) dT + (tau1 - tau2))` for cross-user interference,
//! stacked into the symmetric 2N x 2N block matrix used by the sum-rate
//! determinant. This module builds those matrices, their spectral factors
//! (square roots, the whitened cross operator and its SVD), and provides the
//! asymptotic diagnostics that connect them to the folded spectra: the
//! generating function of a coefficient sequence, the DFT near-eigenvector
//! residual, and the eigenvalue/integral comparison in the Szego limit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CapError, CapResult};
use crate::linalg;
use crate::pulse::PulseSpec;
use crate::quad::QuadRule;

/// Relative eigenvalue floor applied to the Gram matrix when the spectral
/// stability condition fails: eigenvalues below `FLOOR_REL * max_eig` are
/// clamped up to that floor before inversion.
pub const EIGENVALUE_FLOOR_REL: f64 = 1e-10;

/// Two-user channel description: delays, noise level, power budgets, block
/// length. Delays satisfy `0 <= tau1 <= tau2 <= T` (checked against the
/// pulse when matrices are built).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub tau1: f64,
    pub tau2: f64,
    /// Noise variance per matched-filter sample (noise PSD level).
    pub sigma0_sq: f64,
    /// Average power budgets (P1, P2).
    pub power: (f64, f64),
    /// Block length N (symbols per user).
    pub n_symbols: usize,
}

impl ChannelSpec {
    pub fn new(
        tau1: f64,
        tau2: f64,
        sigma0_sq: f64,
        power: (f64, f64),
        n_symbols: usize,
    ) -> CapResult<Self> {
        if !tau1.is_finite() || !tau2.is_finite() || tau1 < 0.0 || tau2 < tau1 {
            return Err(CapError::invalid(
                "channel.tau",
                "delays must satisfy 0 <= tau1 <= tau2",
            ));
        }
        if !(sigma0_sq > 0.0) {
            return Err(CapError::invalid("channel.sigma0_sq", "must be > 0"));
        }
        if !(power.0 >= 0.0 && power.1 >= 0.0) {
            return Err(CapError::invalid("channel.power", "budgets must be >= 0"));
        }
        if n_symbols == 0 {
            return Err(CapError::invalid("channel.N", "block length must be >= 1"));
        }
        Ok(ChannelSpec {
            tau1,
            tau2,
            sigma0_sq,
            power: (power.0, power.1),
            n_symbols,
        })
    }

    /// Builds a channel from an SNR in dB (per user, `P_k = sigma0^2 * 10^(snr/10)`
    /// with unit noise variance).
    pub fn from_snr_db(tau1: f64, tau2: f64, snr_db: f64, n_symbols: usize) -> CapResult<Self> {
        let p = 10f64.powf(snr_db / 10.0);
        ChannelSpec::new(tau1, tau2, 1.0, (p, p), n_symbols)
    }

    /// Delay difference `tau1 - tau2` that enters the cross matrices.
    pub fn delay_diff(&self) -> f64 {
        self.tau1 - self.tau2
    }
}

/// Outcome of the eigenvalue-floor policy applied while building matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Whether `delta * (1 + beta) >= 1` held for the pulse.
    pub spectrally_stable: bool,
    /// Smallest raw eigenvalue of the Gram matrix before flooring.
    pub min_eigenvalue: f64,
    /// Number of eigenvalues clamped up to the floor (0 when none).
    pub floored_modes: usize,
    /// The absolute floor that was in effect.
    pub floor: f64,
}

/// Gram and cross-interference matrices for one channel instance, together
/// with the spectral factors every rate computation reuses: the
/// eigendecomposition of `G`, its square root and inverse square root, the
/// whitened cross operator `Phi = G^{-1/2} G12 G^{-1/2}`, and Phi's SVD.
#[derive(Debug, Clone)]
pub struct InterferenceMatrices {
    pub pulse: PulseSpec,
    pub chan: ChannelSpec,
    pub g: DMatrix<f64>,
    pub g12: DMatrix<f64>,
    pub g21: DMatrix<f64>,
    pub g_tilde: DMatrix<f64>,
    /// Eigenvalues of `G`, descending (after flooring, if applied).
    pub g_eigvals: DVector<f64>,
    pub g_eigvecs: DMatrix<f64>,
    pub g_sqrt: DMatrix<f64>,
    pub g_inv_sqrt: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    /// Left singular vectors of Phi (user-1 mode basis).
    pub phi_u: DMatrix<f64>,
    /// Singular values of Phi, descending; all < 1 for stable channels.
    pub phi_sv: DVector<f64>,
    /// Right singular vectors of Phi (user-2 mode basis).
    pub phi_v: DMatrix<f64>,
    pub stability: StabilityReport,
}

impl InterferenceMatrices {
    /// Per-mode interference coefficients `1 - sv_i^2`, clamped to [0, 1].
    pub fn mode_coupling(&self) -> Vec<f64> {
        self.phi_sv
            .iter()
            .map(|s| (1.0 - s * s).clamp(0.0, 1.0))
            .collect()
    }

    /// Power budget in mode coordinates: `N * dT * P_k`.
    pub fn mode_budget(&self, user: usize) -> f64 {
        let p = if user == 1 {
            self.chan.power.0
        } else {
            self.chan.power.1
        };
        self.chan.n_symbols as f64 * self.pulse.accelerated_period() * p
    }
}

/// Builds the interference matrices with the eigenvalue floor enabled: on a
/// spectrally unstable channel the Gram matrix is regularized and the fact
/// recorded in the [`StabilityReport`].
pub fn build_interference(pulse: &PulseSpec, chan: &ChannelSpec) -> CapResult<InterferenceMatrices> {
    build_interference_with(pulse, chan, true)
}

/// Like [`build_interference`] but with the eigenvalue floor optional: with
/// `allow_flooring = false`, an eigenvalue at or below the floor is a
/// [`CapError::DegenerateMatrix`] error instead of a silent repair.
pub fn build_interference_with(
    pulse: &PulseSpec,
    chan: &ChannelSpec,
    allow_flooring: bool,
) -> CapResult<InterferenceMatrices> {
    if chan.tau2 > pulse.symbol_period + 1e-12 {
        return Err(CapError::invalid(
            "channel.tau2",
            format!(
                "delay {} exceeds the symbol period {}",
                chan.tau2, pulse.symbol_period
            ),
        ));
    }
    let n = chan.n_symbols;
    let dt = pulse.accelerated_period();
    let dtau = chan.delay_diff();

    let g = toeplitz_from(n, |k| pulse.autocorrelation(k as f64 * dt));
    let g12 = toeplitz_from(n, |k| pulse.autocorrelation(k as f64 * dt + dtau));
    let g21 = g12.transpose();

    let mut g_tilde = DMatrix::zeros(2 * n, 2 * n);
    g_tilde.view_mut((0, 0), (n, n)).copy_from(&g);
    g_tilde.view_mut((0, n), (n, n)).copy_from(&g12);
    g_tilde.view_mut((n, 0), (n, n)).copy_from(&g21);
    g_tilde.view_mut((n, n), (n, n)).copy_from(&g);

    let (mut vals, vecs) = linalg::sym_eigen_desc(&g);
    let max_eig = vals[0].max(0.0);
    let floor = EIGENVALUE_FLOOR_REL * max_eig;
    let min_eigenvalue = vals[vals.len() - 1];
    let mut floored = 0usize;
    if min_eigenvalue <= floor {
        if !allow_flooring {
            return Err(CapError::DegenerateMatrix {
                context: "interference Gram matrix",
                eigenvalue: min_eigenvalue,
                floor,
            });
        }
        for v in vals.iter_mut() {
            if *v < floor {
                *v = floor;
                floored += 1;
            }
        }
    }

    let g_sqrt = linalg::sym_function(&vals, &vecs, f64::sqrt);
    let g_inv_sqrt = linalg::sym_function(&vals, &vecs, |x| 1.0 / x.sqrt());
    let phi = &g_inv_sqrt * &g12 * &g_inv_sqrt;
    let (phi_u, phi_sv, phi_v) = linalg::svd_desc(&phi);

    Ok(InterferenceMatrices {
        pulse: *pulse,
        chan: *chan,
        g,
        g12,
        g21,
        g_tilde,
        g_eigvals: vals,
        g_eigvecs: vecs,
        g_sqrt,
        g_inv_sqrt,
        phi,
        phi_u,
        phi_sv,
        phi_v,
        stability: StabilityReport {
            spectrally_stable: pulse.is_stable(),
            min_eigenvalue,
            floored_modes: floored,
            floor,
        },
    })
}

/// Symmetric positive-semidefinite square root of a symmetric matrix.
/// Eigenvalues below `-1e-10 * max_eig` are rejected as not PSD; small
/// negative values from rounding are clamped to zero.
pub fn hermitian_sqrt(a: &DMatrix<f64>) -> CapResult<DMatrix<f64>> {
    let (vals, vecs) = linalg::sym_eigen_desc(a);
    let scale = vals[0].abs().max(1e-300);
    let min = vals[vals.len() - 1];
    if min < -1e-10 * scale {
        return Err(CapError::NotPsd {
            context: "hermitian_sqrt",
            min_eigenvalue: min,
        });
    }
    Ok(linalg::sym_function(&vals, &vecs, |x| x.max(0.0).sqrt()))
}

/// Value of a generating function `sum_k t_k exp(j 2 pi lambda k)` together
/// with the truncation diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct GenValue {
    pub value: Complex64,
    /// Estimated magnitude of the discarded tail (cubic-decay fit).
    pub truncation_bound: f64,
    /// Number of coefficient indices actually summed (both signs plus zero).
    pub terms_used: usize,
}

/// Evaluates the generating function of the two-sided coefficient sequence
/// `coeff(k)`, truncating once eight consecutive coefficient magnitudes on
/// both sides fall below 1e-14 (or at a hard cap of 2^20 indices). The
/// reported truncation bound extrapolates the tail from a `|t_k| ~ c/k^3`
/// decay fit, which matches raised-cosine autocorrelation samples.
pub fn generating_function(coeff: impl Fn(i64) -> Complex64, lambda: f64) -> GenValue {
    const TOL: f64 = 1e-14;
    const QUIET_RUN: usize = 8;
    const HARD_CAP: i64 = 1 << 20;

    let mut sum = coeff(0);
    let mut terms = 1usize;
    let mut quiet = 0usize;
    let mut k = 0i64;
    let mut tail_fit: f64 = 0.0;
    while k < HARD_CAP {
        k += 1;
        let phase = 2.0 * std::f64::consts::PI * lambda * k as f64;
        let rot = Complex64::new(phase.cos(), phase.sin());
        let tp = coeff(k);
        let tm = coeff(-k);
        sum += tp * rot + tm * rot.conj();
        terms += 2;
        let mag = tp.norm().max(tm.norm());
        if mag < TOL {
            quiet += 1;
            tail_fit = tail_fit.max(mag * (k as f64).powi(3));
            if quiet >= QUIET_RUN {
                break;
            }
        } else {
            quiet = 0;
            tail_fit = 0.0;
        }
    }
    let bound = if k >= HARD_CAP {
        // Could not certify decay; report a conservative bound from the last
        // magnitudes seen.
        coeff(k).norm().max(coeff(-k).norm()) * k as f64
    } else {
        tail_fit / (k as f64).powi(2)
    };
    GenValue {
        value: sum,
        truncation_bound: bound,
        terms_used: terms,
    }
}

/// Relative residual of the k-th unit DFT vector as an approximate
/// eigenvector of a symmetric Toeplitz matrix:
/// `|A f_k - symbol(k/N) f_k|_2 / |A|_2`, where `symbol` is the generating
/// function of the matrix's coefficient sequence (evaluated periodically).
/// Vanishes for circulants and decays as N grows for summable sequences.
pub fn dft_eigen_residual(
    matrix: &DMatrix<f64>,
    symbol: impl Fn(f64) -> Complex64,
    k: usize,
) -> f64 {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    assert!(k < n, "mode index out of range");
    let mut lam = k as f64 / n as f64;
    if lam > 0.5 {
        lam -= 1.0;
    }
    let s = symbol(lam);
    let scale = 1.0 / (n as f64).sqrt();
    let mut fre = DVector::zeros(n);
    let mut fim = DVector::zeros(n);
    for i in 0..n {
        let phase = 2.0 * std::f64::consts::PI * (k as f64) * (i as f64) / n as f64;
        fre[i] = scale * phase.cos();
        fim[i] = scale * phase.sin();
    }
    let are = matrix * &fre;
    let aim = matrix * &fim;
    let mut res_sq = 0.0;
    for i in 0..n {
        let rr = are[i] - (s.re * fre[i] - s.im * fim[i]);
        let ri = aim[i] - (s.re * fim[i] + s.im * fre[i]);
        res_sq += rr * rr + ri * ri;
    }
    let (vals, _) = linalg::sym_eigen_desc(matrix);
    let norm2 = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    res_sq.sqrt() / norm2.max(1e-300)
}

/// One row of a Szego-limit comparison: eigenvalue trace average versus the
/// spectral integral of the same transform.
#[derive(Debug, Clone, Copy)]
pub struct SzegoRow {
    pub n: usize,
    pub trace_average: f64,
    pub spectral_integral: f64,
    pub gap: f64,
}

/// Compares `(1/N) sum_i transform(eig_i(A_N))` against
/// `integral_{-1/2}^{1/2} transform(symbol(lambda)) d lambda` for each block
/// size. `breakpoints` lists the symbol's non-smooth points for the
/// quadrature split (pass `[-0.5, 0.5]` when the symbol is smooth).
pub fn szego_check(
    family: impl Fn(usize) -> DMatrix<f64>,
    symbol: impl Fn(f64) -> f64,
    transform: impl Fn(f64) -> f64,
    n_values: &[usize],
    breakpoints: &[f64],
) -> Vec<SzegoRow> {
    let rule = QuadRule::composite(breakpoints, 2048, 16);
    let integral = rule.integrate(|lam| transform(symbol(lam)));
    n_values
        .iter()
        .map(|&n| {
            let a = family(n);
            let (vals, _) = linalg::sym_eigen_desc(&a);
            let avg = crate::quad::kahan_sum(vals.iter().map(|v| transform(*v))) / n as f64;
            SzegoRow {
                n,
                trace_average: avg,
                spectral_integral: integral,
                gap: (avg - integral).abs(),
            }
        })
        .collect()
}

/// Dense symmetric Toeplitz matrix from a two-sided coefficient function
/// evaluated at index differences (`coeff(i - j)` at entry `(i, j)`).
fn toeplitz_from(n: usize, coeff: impl Fn(i64) -> f64) -> DMatrix<f64> {
    // Evaluate each distinct lag once so equal lags are bit-identical.
    let lags: Vec<f64> = (-(n as i64 - 1)..=(n as i64 - 1)).map(&coeff).collect();
    let offset = n as i64 - 1;
    DMatrix::from_fn(n, n, |i, j| lags[(i as i64 - j as i64 + offset) as usize])
}

// ---------------------------------------------------------------------------
