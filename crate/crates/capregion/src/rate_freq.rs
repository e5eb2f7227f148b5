//! Frequency-domain (infinite-block) rate integrals.
//!
//! The limiting capacity region is described by three integrals over the
//! normalized frequency lambda in [-1/2, 1/2] of the composite channel-input
//! spectra `S_1`, `S_2` (power per unit normalized frequency, budget
//! `integral S_k <= P_k`):
//!
//! ```text
//! r1    = (1/2) int log2(1 + dT S1 / s^2) dlambda
//! r2    = (1/2) int log2(1 + dT S2 / s^2) dlambda
//! r_sum = (1/2) int log2(1 + dT(S1 + S2)/s^2 + dT^2 S1 S2 c(lambda) / s^4) dlambda
//! ```
//!
//! with the coupling profile `c = 1 - |G12_folded / G_folded|^2` in [0, 1].
//! The `dT` factor converts the composite spectrum into received power per
//! mode, which is what enters the per-mode SNR; it makes these integrals the
//! exact block-length limits of the time-domain mode sums (same budgets,
//! same integrand), as the consistency tests verify. Quadrature uses
//! composite Gauss-Legendre panels split at the alias-band breakpoints, so
//! the piecewise-smooth integrands converge spectrally; the panel nodes
//! double as the allocation grid.

use crate::error::{CapError, CapResult};
use crate::pulse::PulseSpec;
use crate::quad::{kahan_sum, QuadRule};
use crate::rate_time::RateTriple;

/// Folded-spectrum values below this threshold are a dead band: no power may
/// be placed there (only possible when `delta (1 + beta) < 1`).
pub const DEAD_BAND: f64 = 1e-12;

/// Quadrature grid over normalized frequency with the channel profiles
/// every spectral rate evaluation needs, precomputed at the nodes.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub pulse: PulseSpec,
    /// Delay difference `tau1 - tau2` baked into the cross profile.
    pub dtau: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Folded spectrum of the pulse at each node.
    pub folded: Vec<f64>,
    /// Coupling profile `1 - |cross / folded|^2`, clamped to [0, 1];
    /// zero on dead nodes.
    pub coupling: Vec<f64>,
    /// Dead-band mask (`folded < DEAD_BAND`).
    pub dead: Vec<bool>,
}

impl SpectralGrid {
    /// Builds a grid of roughly `target_nodes` points (order-16 panels
    /// between alias-band breakpoints, at least one panel per piece).
    pub fn build(pulse: &PulseSpec, dtau: f64, target_nodes: usize) -> SpectralGrid {
        let rule = QuadRule::composite(&pulse.band_breakpoints(), target_nodes, 16);
        let mut folded = Vec::with_capacity(rule.len());
        let mut coupling = Vec::with_capacity(rule.len());
        let mut dead = Vec::with_capacity(rule.len());
        for &lam in &rule.nodes {
            let g = pulse.folded_spectrum(lam);
            if g < DEAD_BAND {
                folded.push(g);
                coupling.push(0.0);
                dead.push(true);
            } else {
                let ratio_sq = pulse.cross_spectrum(lam, dtau).norm_sqr() / (g * g);
                folded.push(g);
                coupling.push((1.0 - ratio_sq).clamp(0.0, 1.0));
                dead.push(false);
            }
        }
        SpectralGrid {
            pulse: *pulse,
            dtau,
            nodes: rule.nodes,
            weights: rule.weights,
            folded,
            coupling,
            dead,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total quadrature weight of the live (non-dead) nodes; 1 for
    /// spectrally stable pulses, about `delta (1 + beta)` otherwise.
    pub fn live_measure(&self) -> f64 {
        kahan_sum(
            self.weights
                .iter()
                .zip(&self.dead)
                .filter(|(_, &d)| !d)
                .map(|(&w, _)| w),
        )
    }

    /// Largest coupling value over live nodes — zero exactly when the
    /// asynchronous region has collapsed onto the synchronous one.
    pub fn max_coupling(&self) -> f64 {
        self.coupling
            .iter()
            .zip(&self.dead)
            .filter(|(_, &d)| !d)
            .fold(0.0f64, |m, (&c, _)| m.max(c))
    }

    /// Quadrature value of a nodewise-sampled spectrum.
    pub fn spent(&self, s: &[f64]) -> f64 {
        assert_eq!(s.len(), self.len(), "spectrum length mismatch");
        kahan_sum(self.weights.iter().zip(s).map(|(&w, &x)| w * x))
    }
}

/// Composite channel-input spectra sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct SpectralAllocation {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

impl SpectralAllocation {
    /// Flat spectra meeting the budgets exactly: `S_k = P_k / live_measure`
    /// on live nodes, zero on dead ones.
    pub fn flat(grid: &SpectralGrid, p1: f64, p2: f64) -> SpectralAllocation {
        let live = grid.live_measure();
        let fill = |p: f64| -> Vec<f64> {
            grid.dead
                .iter()
                .map(|&d| if d { 0.0 } else { p / live })
                .collect()
        };
        SpectralAllocation {
            s1: fill(p1),
            s2: fill(p2),
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Evaluates the three spectral rate integrals for the given allocation.
/// Rates are in bits per symbol interval, directly comparable with the
/// time-domain normalization.
///
/// Errors with [`CapError::SpectrumOnDeadBand`] if either spectrum puts
/// power where the folded spectrum vanishes: the channel passes nothing
/// there, so such an allocation is physically unrealizable.
pub fn rate_integrals(
    grid: &SpectralGrid,
    alloc: &SpectralAllocation,
    sigma0_sq: f64,
) -> CapResult<RateTriple> {
    let n = grid.len();
    assert_eq!(alloc.s1.len(), n, "user-1 spectrum length mismatch");
    assert_eq!(alloc.s2.len(), n, "user-2 spectrum length mismatch");
    assert!(sigma0_sq > 0.0, "noise variance must be positive");
    let snr_scale = grid.pulse.accelerated_period() / sigma0_sq;
    for i in 0..n {
        if grid.dead[i] && (alloc.s1[i] > 0.0 || alloc.s2[i] > 0.0) {
            return Err(CapError::SpectrumOnDeadBand {
                lambda: grid.nodes[i],
                folded: grid.folded[i],
            });
        }
    }
    let r1 = 0.5 * kahan_sum(
        (0..n).map(|i| grid.weights[i] * log2_1p(snr_scale * alloc.s1[i].max(0.0))),
    );
    let r2 = 0.5 * kahan_sum(
        (0..n).map(|i| grid.weights[i] * log2_1p(snr_scale * alloc.s2[i].max(0.0))),
    );
    let r_sum = 0.5 * kahan_sum((0..n).map(|i| {
        let a = snr_scale * alloc.s1[i].max(0.0);
        let b = snr_scale * alloc.s2[i].max(0.0);
        grid.weights[i] * log2_1p(a + b + a * b * grid.coupling[i])
    }));
    Ok(RateTriple { r1, r2, r_sum })
}

/// Named entry point for the no-acceleration reduction: with `delta = 1` the
/// folded spectrum is identically 1 (orthogonal signaling) and the integrals
/// reduce to the classical asynchronous-MAC form. Identical to
/// [`rate_integrals`]; exists so the reduction is a first-class call target.
pub fn orthogonal_special_case(
    grid: &SpectralGrid,
    alloc: &SpectralAllocation,
    sigma0_sq: f64,
) -> CapResult<RateTriple> {
    if (grid.pulse.delta - 1.0).abs() > 1e-12 {
        return Err(CapError::PreconditionViolated {
            context: "orthogonal_special_case",
            reason: format!("requires delta = 1, got {}", grid.pulse.delta),
        });
    }
    rate_integrals(grid, alloc, sigma0_sq)
}

// ---------------------------------------------------------------------------
