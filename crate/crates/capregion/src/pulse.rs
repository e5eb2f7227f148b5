//! Root-raised-cosine pulse family and its sampled-spectrum descriptors.
//!
//! Transmit pulses are unit-energy root-raised-cosine shapes with roll-off
//! `beta`, so the matched-filter autocorrelation is the raised-cosine
//! function. Symbols are spaced `delta * T` apart with acceleration factor
//! `delta` in (0, 1]; `delta = 1` is ordinary Nyquist-rate signaling and
//! `delta < 1` packs symbols faster than the orthogonality limit.
//!
//! Everything downstream is driven by three scalar functions provided here:
//! the autocorrelation `g(t)`, its Fourier transform `G(f)`, and the folded
//! (aliased) spectrum seen at the accelerated symbol rate, together with the
//! cross-user variant that carries the inter-user delay phase.
//!
//! # Example
//! ```
//! use capregion::pulse::PulseSpec;
//!
//! let pulse = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
//! // delta * (1 + beta) = 1: the folded spectrum just fills the band.
//! assert!(pulse.is_stable());
//! assert!((pulse.autocorrelation(0.0) - 1.0).abs() < 1e-15);
//! ```

use num_complex::Complex64;

use crate::error::{CapError, CapResult};

/// Raised-cosine pulse description: roll-off, symbol period, acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Excess-bandwidth roll-off, in [0, 1].
    pub beta: f64,
    /// Nyquist symbol period `T` (seconds).
    pub symbol_period: f64,
    /// Acceleration factor in (0, 1]; symbols are sent every `delta * T`.
    pub delta: f64,
}

impl PulseSpec {
    /// Validates and builds a pulse description.
    pub fn new(beta: f64, symbol_period: f64, delta: f64) -> CapResult<Self> {
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(CapError::invalid("pulse.beta", "must lie in [0, 1]"));
        }
        if !(symbol_period > 0.0) || !symbol_period.is_finite() {
            return Err(CapError::invalid("pulse.T", "must be > 0"));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(CapError::invalid("pulse.delta", "must lie in (0, 1]"));
        }
        Ok(PulseSpec {
            beta,
            symbol_period,
            delta,
        })
    }

    /// Accelerated symbol period `delta * T`.
    pub fn accelerated_period(&self) -> f64 {
        self.delta * self.symbol_period
    }

    /// Whether the accelerated rate keeps the folded spectrum positive:
    /// `delta * (1 + beta) >= 1`. Below this the folded spectrum vanishes on
    /// a band and the symbol-rate Gram matrix degenerates as the block grows.
    pub fn is_stable(&self) -> bool {
        self.delta * (1.0 + self.beta) >= 1.0 - 1e-12
    }

    /// Raised-cosine autocorrelation `g(t)`, normalized so `g(0) = 1`.
    ///
    /// The closed form has a removable singularity at `|t| = T / (2 beta)`;
    /// near it (denominator magnitude below 1e-8) the analytic limit
    /// `(pi/4) * sinc(1 / (2 beta))` is returned instead.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        let u = (t / self.symbol_period).abs();
        if self.beta == 0.0 {
            return sinc(u);
        }
        let denom = 1.0 - (2.0 * self.beta * u).powi(2);
        if denom.abs() < 1e-8 {
            return std::f64::consts::FRAC_PI_4 * sinc(1.0 / (2.0 * self.beta));
        }
        sinc(u) * (std::f64::consts::PI * self.beta * u).cos() / denom
    }

    /// Raised-cosine spectrum `G(f)`: flat at `T` inside the Nyquist band,
    /// cosine taper over the excess band, zero outside. Even in `f`, and its
    /// total integral equals `g(0) = 1`.
    pub fn spectrum(&self, f: f64) -> f64 {
        let t = self.symbol_period;
        let af = f.abs();
        let flat_edge = (1.0 - self.beta) / (2.0 * t);
        let band_edge = (1.0 + self.beta) / (2.0 * t);
        if self.beta == 0.0 {
            // Brick wall; the midpoint value at the jump keeps alias sums
            // exact when a fold lands on the edge.
            return if af < band_edge {
                t
            } else if af == band_edge {
                0.5 * t
            } else {
                0.0
            };
        }
        if af <= flat_edge {
            t
        } else if af <= band_edge {
            0.5 * t * (1.0 + (std::f64::consts::PI * t / self.beta * (af - flat_edge)).cos())
        } else {
            0.0
        }
    }

    /// Folded spectrum at the accelerated rate,
    /// `G_d(lambda) = (1 / dT) * sum_n G((lambda - n) / dT)` with
    /// `dT = delta * T`, for normalized frequency `lambda` interpreted
    /// modulo 1 and folded into [-1/2, 1/2]. The alias sum is finite because
    /// `G` has bounded support; every contributing index is included.
    pub fn folded_spectrum(&self, lambda: f64) -> f64 {
        let lam = fold_unit(lambda);
        let dt = self.accelerated_period();
        let mut acc = 0.0;
        for n in self.alias_indices(lam) {
            acc += self.spectrum((lam - n as f64) / dt);
        }
        acc / dt
    }

    /// Cross spectrum between the two users,
    /// `G_12,d(lambda) = (1 / dT) * sum_n G((lambda - n)/dT) * exp(j 2 pi dtau (lambda - n)/dT)`,
    /// where `dtau` is the delay difference `tau_1 - tau_2`. Its modulus is
    /// bounded by the folded spectrum, with equality whenever a single alias
    /// term contributes (in particular for `delta = 1 / (1 + beta)`).
    pub fn cross_spectrum(&self, lambda: f64, dtau: f64) -> Complex64 {
        let lam = fold_unit(lambda);
        let dt = self.accelerated_period();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in self.alias_indices(lam) {
            let arg = (lam - n as f64) / dt;
            let mag = self.spectrum(arg);
            if mag != 0.0 {
                let phase = 2.0 * std::f64::consts::PI * dtau * arg;
                acc += Complex64::new(mag * phase.cos(), mag * phase.sin());
            }
        }
        acc / dt
    }

    /// Normalized frequencies in [-1/2, 1/2] where the alias sum changes
    /// smoothness: the flat-edge and band-edge images of every contributing
    /// alias, plus the interval endpoints. Sorted and deduplicated. These
    /// are the mandatory split points for spectral quadrature.
    pub fn band_breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![-0.5, 0.5];
        let half_flat = self.delta * (1.0 - self.beta) / 2.0;
        let half_band = self.delta * (1.0 + self.beta) / 2.0;
        for n in -2i64..=2 {
            for edge in [half_flat, half_band] {
                for sign in [-1.0, 1.0] {
                    let x = n as f64 + sign * edge;
                    if (-0.5..=0.5).contains(&x) {
                        pts.push(x);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    /// Alias indices `n` with `G((lambda - n) / dT)` possibly nonzero.
    fn alias_indices(&self, lam: f64) -> std::ops::RangeInclusive<i64> {
        let half_band = self.delta * (1.0 + self.beta) / 2.0;
        let lo = (lam - half_band).ceil() as i64;
        let hi = (lam + half_band).floor() as i64;
        lo..=hi
    }
}

/// Normalized sinc: `sin(pi x) / (pi x)` with the removable zero filled in.
fn sinc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-6 {
        let px = std::f64::consts::PI * x;
        1.0 - px * px / 6.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Folds a normalized frequency into [-1/2, 1/2] by subtracting the nearest
/// integer (periodic extension).
fn fold_unit(lambda: f64) -> f64 {
    let f = lambda - lambda.round();
    // round() maps 0.5 to 1, so f stays in [-1/2, 1/2].
    f
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    /// Composite Simpson rule on [a, b]; the test-side quadrature oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let n = panels * 2;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn autocorrelation_is_unit_at_origin() {
        for beta in [0.0, 0.1, 0.25, 0.5, 1.0] {
            let p = PulseSpec::new(beta, 1.0, 0.9).unwrap();
            assert_eq!(p.autocorrelation(0.0), 1.0, "g(0) must be 1 for beta={beta}");
        }
    }

    #[test]
    fn autocorrelation_has_nyquist_zero_crossings() {
        let p = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
        for k in 1..=6 {
            let g = p.autocorrelation(k as f64);
            assert!(
                g.abs() < 1e-14,
                "g({k}) = {g} should vanish at integer multiples of T"
            );
        }
    }

    #[test]
    fn autocorrelation_matches_inverse_transform_of_spectrum() {
        // Oracle: g(t) = 2 * integral_0^fmax G(f) cos(2 pi f t) df, with the
        // integral split at the flat-edge kink. Independent of the closed form.
        let p = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
        let flat_edge = (1.0 - p.beta) / 2.0;
        let band_edge = (1.0 + p.beta) / 2.0;
        for t in [0.3, 0.5, 1.25, 1.7, 2.0, 3.4] {
            let integrand = |f: f64| p.spectrum(f) * (2.0 * std::f64::consts::PI * f * t).cos();
            let oracle = 2.0
                * (simpson(integrand, 0.0, flat_edge, 4000)
                    + simpson(integrand, flat_edge, band_edge, 4000));
            let got = p.autocorrelation(t);
            assert!(
                (got - oracle).abs() < 1e-8,
                "g({t}): closed form {got} vs transform oracle {oracle}"
            );
        }
    }

    #[test]
    fn autocorrelation_singularity_is_continuous() {
        // The removable singularity sits at t = T / (2 beta) = 2 for beta = 1/4.
        let p = PulseSpec::new(0.25, 1.0, 0.9).unwrap();
        let t_star = 2.0;
        let at = p.autocorrelation(t_star);
        let expected = std::f64::consts::FRAC_PI_4 * sinc(2.0);
        assert!((at - expected).abs() < EPS, "limit value at singularity");
        for dt in [1e-7, -1e-7, 3e-8, -3e-8] {
            let near = p.autocorrelation(t_star + dt);
            assert!(
                (near - at).abs() < 1e-6,
                "continuity across singularity: g({}) = {near} vs {at}",
                t_star + dt
            );
        }
    }

    #[test]
    fn beta_zero_reduces_to_sinc() {
        let p = PulseSpec::new(0.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.25, 0.5, 1.0, 2.5] {
            assert!(
                (p.autocorrelation(t) - sinc(t)).abs() < 1e-15,
                "beta = 0 must give the sinc autocorrelation at t={t}"
            );
        }
    }

    #[test]
    fn spectrum_shape_and_band_edges() {
        let p = PulseSpec::new(0.25, 1.0, 0.9).unwrap();
        assert_eq!(p.spectrum(0.0), 1.0);
        assert_eq!(p.spectrum(0.375), 1.0, "flat edge is inclusive");
        // Taper midpoint: cosine at quarter period gives exactly T/2.
        assert!((p.spectrum(0.5) - 0.5).abs() < EPS);
        assert!((p.spectrum(-0.5) - 0.5).abs() < EPS, "spectrum is even");
        assert_eq!(p.spectrum(0.625), 0.0, "band edge value");
        assert_eq!(p.spectrum(0.7), 0.0, "no energy outside the band");
    }

    #[test]
    fn spectrum_integrates_to_unit_energy() {
        let p = PulseSpec::new(0.25, 1.0, 0.9).unwrap();
        let total = 2.0
            * (simpson(|f| p.spectrum(f), 0.0, 0.375, 2000)
                + simpson(|f| p.spectrum(f), 0.375, 0.625, 2000));
        assert!(
            (total - 1.0).abs() < 1e-10,
            "integral of G must equal g(0) = 1, got {total}"
        );
    }

    #[test]
    fn folded_spectrum_is_flat_at_nyquist_rate() {
        // delta = 1 restores orthogonality: the alias sum telescopes to 1.
        let p = PulseSpec::new(0.25, 1.0, 1.0).unwrap();
        for lam in [-0.49, -0.3, -0.1, 0.0, 0.2, 0.37, 0.44] {
            let v = p.folded_spectrum(lam);
            assert!(
                (v - 1.0).abs() < 1e-12,
                "folded spectrum at delta=1 should be 1, got {v} at lambda={lam}"
            );
        }
    }

    #[test]
    fn folded_spectrum_known_values_at_critical_acceleration() {
        let p = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
        // At lambda = 0 only the n = 0 alias contributes: G(0)/0.8.
        assert!((p.folded_spectrum(0.0) - 1.25).abs() < EPS);
        // At the fold point both contributing aliases taper to zero.
        let edge = p.folded_spectrum(0.5);
        assert!(
            edge.abs() < 1e-15,
            "folded spectrum must vanish at the fold when delta*(1+beta)=1, got {edge}"
        );
    }

    #[test]
    fn folded_spectrum_integrates_to_one() {
        // Poisson: the folded spectrum integrates to g(0) regardless of delta.
        for (beta, delta) in [(0.25, 1.0), (0.25, 0.9), (0.25, 0.8), (0.5, 0.7), (0.0, 1.0)] {
            let p = PulseSpec::new(beta, 1.0, delta).unwrap();
            let total = simpson(|lam| p.folded_spectrum(lam), -0.5, 0.5, 120_000);
            assert!(
                (total - 1.0).abs() < 1e-6,
                "integral of folded spectrum should be 1, got {total} for beta={beta}, delta={delta}"
            );
        }
    }

    #[test]
    fn cross_spectrum_with_zero_delay_equals_folded() {
        let p = PulseSpec::new(0.25, 1.0, 0.9).unwrap();
        for lam in [-0.45, -0.2, 0.0, 0.31, 0.5] {
            let c = p.cross_spectrum(lam, 0.0);
            assert!(c.im.abs() < 1e-15);
            assert!((c.re - p.folded_spectrum(lam)).abs() < EPS);
        }
    }

    #[test]
    fn cross_spectrum_matches_independent_alias_sum() {
        // Oracle: re-derive the alias sum with its own piecewise spectrum
        // formula and explicit real/imaginary accumulation.
        let (beta, t, delta, dtau, lam) = (0.25, 1.0, 0.9, -0.45, 0.3);
        let p = PulseSpec::new(beta, t, delta).unwrap();
        let dt = delta * t;
        let spec = |f: f64| -> f64 {
            let af: f64 = f.abs();
            if af <= (1.0 - beta) / (2.0 * t) {
                t
            } else if af <= (1.0 + beta) / (2.0 * t) {
                0.5 * t
                    * (1.0
                        + (std::f64::consts::PI * t / beta * (af - (1.0 - beta) / (2.0 * t))).cos())
            } else {
                0.0
            }
        };
        let (mut re, mut im) = (0.0, 0.0);
        for n in -3i64..=3 {
            let arg = (lam - n as f64) / dt;
            let mag = spec(arg) / dt;
            let ph = 2.0 * std::f64::consts::PI * dtau * arg;
            re += mag * ph.cos();
            im += mag * ph.sin();
        }
        let got = p.cross_spectrum(lam, dtau);
        assert!(
            (got.re - re).abs() < 1e-10 && (got.im - im).abs() < 1e-10,
            "cross spectrum {got} vs oracle {re}+{im}i"
        );
    }

    #[test]
    fn cross_spectrum_modulus_saturates_at_critical_acceleration() {
        // delta = 1/(1+beta): a single alias survives, so the modulus equals
        // the folded spectrum for every delay difference.
        let p = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
        for dtau in [-0.4, -0.123, 0.2, 0.77] {
            for lam in [-0.47, -0.25, 0.0, 0.124, 0.36, 0.499] {
                let ratio_gap = p.cross_spectrum(lam, dtau).norm() - p.folded_spectrum(lam);
                assert!(
                    ratio_gap.abs() < 1e-12,
                    "|G12| must equal folded spectrum at critical acceleration: gap {ratio_gap}"
                );
            }
        }
    }

    #[test]
    fn breakpoints_cover_band_edges() {
        let p = PulseSpec::new(0.25, 1.0, 0.8).unwrap();
        let bps = p.band_breakpoints();
        assert!(bps.first().map(|v| (*v + 0.5).abs() < EPS).unwrap());
        assert!(bps.last().map(|v| (*v - 0.5).abs() < EPS).unwrap());
        // delta (1 - beta)/2 = 0.3 and delta (1 + beta)/2 = 0.5 must appear.
        assert!(bps.iter().any(|v| (*v - 0.3).abs() < EPS));
        assert!(bps.iter().any(|v| (*v + 0.3).abs() < EPS));
        for w in bps.windows(2) {
            assert!(w[0] < w[1], "breakpoints must be strictly sorted");
        }
    }

    proptest! {
        #[test]
        fn cross_modulus_never_exceeds_folded(
            beta in 0.0f64..=1.0,
            delta_frac in 0.0f64..=1.0,
            lam in -0.5f64..=0.5,
            dtau in -1.0f64..=1.0,
        ) {
            // Keep delta in the stable range for the property to be about
            // well-posed channels: delta in [1/(1+beta), 1].
            let delta = (1.0 / (1.0 + beta)) * (1.0 - delta_frac) + 1.0 * delta_frac;
            let p = PulseSpec::new(beta, 1.0, delta).unwrap();
            let folded = p.folded_spectrum(lam);
            let cross = p.cross_spectrum(lam, dtau).norm();
            prop_assert!(folded >= 0.0);
            prop_assert!(cross <= folded + 1e-12,
                "|G12| = {} exceeds folded {}", cross, folded);
        }

        #[test]
        fn folded_spectrum_is_even(
            beta in 0.0f64..=1.0,
            delta in 0.5f64..=1.0,
            lam in 0.0f64..=0.5,
        ) {
            let p = PulseSpec::new(beta, 1.0, delta).unwrap();
            let diff = p.folded_spectrum(lam) - p.folded_spectrum(-lam);
            prop_assert!(diff.abs() < 1e-13);
        }

        #[test]
        fn cross_spectrum_conjugate_symmetry(
            beta in 0.0f64..=1.0,
            delta in 0.5f64..=1.0,
            lam in 0.0f64..=0.5,
            dtau in -1.0f64..=1.0,
        ) {
            let p = PulseSpec::new(beta, 1.0, delta).unwrap();
            let a = p.cross_spectrum(lam, dtau);
            let b = p.cross_spectrum(-lam, dtau).conj();
            prop_assert!((a - b).norm() < 1e-12,
                "G12(-lambda) must be the conjugate of G12(lambda)");
        }
    }
}
