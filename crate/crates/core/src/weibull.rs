//! Weibull clutter amplitude law.
//!
//! Samples `z` are clutter *amplitudes* (envelope, not power). With shape `k`
//! and scale `b`:
//!
//! ```text
//! F(z) = 1 - exp(-(z/b)^k)
//! f(z) = (k/b) (z/b)^(k-1) exp(-(z/b)^k)
//! ```
//!
//! `k = 2` is the Rayleigh envelope (power exponentially distributed) and
//! `k = 1` the exponential law. The shape is a per-region configuration
//! input; only the scale is estimated from data.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{require_positive, Error, Result};
use crate::rng::{open01, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    shape: f64,
    scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        require_positive("scale", scale)?;
        Ok(WeibullParams { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn check_support(z: f64) -> Result<()> {
        if z >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain("z", format!("must be >= 0, got {z}")))
        }
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        Self::check_support(z)?;
        Ok(-(-(z / self.scale).powf(self.shape)).exp_m1())
    }

    /// Survival function `1 - F(z)`, evaluated without cancellation so that
    /// tail probabilities far below machine epsilon stay accurate.
    pub fn sf(&self, z: f64) -> Result<f64> {
        Self::check_support(z)?;
        Ok((-(z / self.scale).powf(self.shape)).exp())
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        Self::check_support(z)?;
        let (k, b) = (self.shape, self.scale);
        let u = z / b;
        if z == 0.0 {
            // Limit depends on the shape: diverges for k < 1, 1/b at k = 1.
            return Ok(match k {
                k if k < 1.0 => f64::INFINITY,
                k if k == 1.0 => 1.0 / b,
                _ => 0.0,
            });
        }
        Ok(k / b * u.powf(k - 1.0) * (-u.powf(k)).exp())
    }

    /// Inverse CDF for `p` in [0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain("p", format!("must lie in [0, 1), got {p}")));
        }
        Ok(self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape))
    }

    /// First moment `b Γ(1 + 1/k)`.
    pub fn mean_amplitude(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// Clutter "mean power" in the published form `b Γ(1 + 2/k)`.
    ///
    /// This is linear in `b`; the true second moment of the amplitude is
    /// [`second_moment`](Self::second_moment).
    pub fn mean_power(&self) -> f64 {
        self.scale * gamma(1.0 + 2.0 / self.shape)
    }

    /// `E[z²] = b² Γ(1 + 2/k)`, the mean power of the amplitude samples.
    pub fn second_moment(&self) -> f64 {
        self.scale * self.mean_power()
    }

    /// One amplitude by inverse-CDF transform of a uniform deviate.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * (-open01(rng).ln()).powf(1.0 / self.shape)
    }

    /// `n` amplitudes from substream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.sample_stream(n, seed, 0)
    }

    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("n", "sample count must be >= 1"));
        }
        let mut rng = stream_rng(seed, stream);
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }

    /// Threshold `T = b (-ln pfa)^(1/k)` solving `1 - F(T) = pfa`.
    pub fn threshold_for_pfa(&self, pfa: f64) -> Result<f64> {
        if !(pfa > 0.0 && pfa < 1.0) {
            return Err(Error::domain("pfa", format!("must lie in (0, 1), got {pfa}")));
        }
        Ok(self.scale * (-pfa.ln()).powf(1.0 / self.shape))
    }

    /// False-alarm probability of a fixed threshold, `exp(-(T/b)^k)`.
    pub fn pfa_at_threshold(&self, threshold: f64) -> Result<f64> {
        self.sf(threshold)
    }
}

/// Known-shape maximum-likelihood scale estimate `((1/N) Σ zᵢᵏ)^(1/k)`.
pub fn mle_scale(samples: &[f64], shape_k: f64) -> Result<f64> {
    require_positive("shape_k", shape_k)?;
    if samples.is_empty() {
        return Err(Error::domain("samples", "empty sample set"));
    }
    let mut acc = 0.0;
    for &z in samples {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::domain("samples", format!("amplitudes must be finite and >= 0, got {z}")));
        }
        acc += z.powf(shape_k);
    }
    if acc == 0.0 {
        return Err(Error::domain("samples", "all samples are zero"));
    }
    Ok(scale_from_moment(acc / samples.len() as f64, shape_k))
}

/// Scale estimate from the sample mean of `zᵏ`.
pub(crate) fn scale_from_moment(mean_zk: f64, shape_k: f64) -> f64 {
    mean_zk.powf(1.0 / shape_k)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_critical_1pct, ks_statistic};
    use proptest::prelude::*;

    fn w(k: f64, b: f64) -> WeibullParams {
        WeibullParams::new(k, b).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_matches_reference_values() {
        // 40-digit reference values.
        let cases = [
            (0.5, 1.772_453_850_905_516_0),
            (0.7, 1.298_055_332_647_557_8),
            (1.0, 1.0),
            (1.5, 0.886_226_925_452_758_0),
            (2.5, 1.329_340_388_179_137_0),
            (7.0 / 3.0, 1.190_639_348_758_998_9),
            (1.0 + 2.0 / 1.2, 1.504_575_488_251_556_0),
            (7.25, 1_155.381_013_919_989_7),
            (19.5, 2.772_432_298_633_371_8e16),
        ];
        for (x, g) in cases {
            assert!(rel(gamma(x), g) < 1e-13, "gamma({x}) = {} vs {g}", gamma(x));
        }
        assert!(rel(gamma(3.0), 2.0) < 1e-14);
    }

    #[test]
    fn parameters_must_be_positive() {
        assert!(WeibullParams::new(0.0, 1.0).is_err());
        assert!(WeibullParams::new(1.0, -1.0).is_err());
        assert!(WeibullParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cdf_values() {
        let p = w(1.5, 1.67);
        assert!((p.cdf(1.67).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((w(2.0, 3.0).cdf(3.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert_eq!(p.cdf(0.0).unwrap(), 0.0);
        assert!(rel(p.cdf(10.0).unwrap(), 0.999_999_567_185_934_781_7) < 1e-12);
        assert!(p.cdf(-0.1).is_err());
    }

    #[test]
    fn pdf_values() {
        assert!(rel(w(1.0, 2.5).pdf(0.0).unwrap(), 0.4) < 1e-15);
        assert!(rel(w(2.0, 1.0).pdf(1.0).unwrap(), 0.735_758_882_342_884_6) < 1e-14);
        assert!(w(2.0, 1.0).pdf(-1.0).is_err());
        // Central difference of the CDF.
        let p = w(2.0, 1.0);
        let h = 1e-5;
        let fd = (p.cdf(1.3 + h).unwrap() - p.cdf(1.3 - h).unwrap()) / (2.0 * h);
        assert!((fd - p.pdf(1.3).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Simpson's rule in u with z = u², which turns the z^(k-1) cusp at the
        // origin into a smooth integrand; the tail beyond the 1 - 1e-14
        // quantile is below the tolerance.
        for (k, b) in [(1.5, 1.67), (2.0, 1.0), (3.0, 0.5), (1.2, 2.0)] {
            let p = w(k, b);
            let u_max = p.quantile(1.0 - 1e-14).unwrap().sqrt();
            let n = 200_000;
            let h = u_max / n as f64;
            let f = |u: f64| p.pdf(u * u).unwrap() * 2.0 * u;
            let mut s = f(0.0) + f(u_max);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-9, "k={k}: {integral}");
        }
    }

    #[test]
    fn moments() {
        assert!(rel(w(2.0, 1.0).mean_power(), 1.0) < 1e-14);
        assert!(rel(w(1.0, 2.0).mean_power(), 4.0) < 1e-14);
        assert!(rel(w(1.5, 1.67).mean_power(), 1.988_367_712_427_528) < 1e-13);
        assert!(rel(w(1.5, 1.67).second_moment(), 3.320_574_079_753_972) < 1e-13);
        assert!(rel(w(2.0, 1.0).mean_amplitude(), 0.886_226_925_452_758) < 1e-13);
    }

    #[test]
    fn second_moment_matches_monte_carlo() {
        let p = w(1.5, 1.67);
        let xs = p.sample(10_000_000, 11).unwrap();
        let m2 = xs.iter().map(|z| z * z).sum::<f64>() / xs.len() as f64;
        // Relative SE of the z² mean is ~0.07% at this size.
        assert!(rel(m2, p.second_moment()) < 0.004, "{m2}");
        assert!(rel(m2 / p.scale(), p.mean_power()) < 0.004);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = w(1.5, 1.67);
        assert_eq!(p.sample(1000, 5).unwrap(), p.sample(1000, 5).unwrap());
        assert_ne!(p.sample(1000, 5).unwrap(), p.sample(1000, 6).unwrap());
        assert!(p.sample(0, 5).is_err());
    }

    #[test]
    fn empirical_cdf_and_mean() {
        let p = w(2.0, 1.0);
        let xs = p.sample(1_000_000, 3).unwrap();
        let below = xs.iter().filter(|&&z| z <= 1.0).count() as f64 / xs.len() as f64;
        assert!((below - 0.632).abs() < 0.002);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.886_227).abs() < 0.003);
    }

    #[test]
    fn ks_passes_for_most_seeds() {
        let p = w(1.5, 1.67);
        let n = 100_000;
        let passes = (0..20)
            .filter(|&seed| {
                let xs = p.sample(n, seed).unwrap();
                ks_statistic(&xs, |z| p.cdf(z).unwrap()) < ks_critical_1pct(n)
            })
            .count();
        assert!(passes >= 19, "{passes}/20");
    }

    #[test]
    fn rayleigh_reduction_power_is_exponential() {
        let b = 1.3;
        let p = w(2.0, b);
        let pw: Vec<f64> = p.sample(1_000_000, 21).unwrap().iter().map(|z| z * z).collect();
        let mean = pw.iter().sum::<f64>() / pw.len() as f64;
        assert!(rel(mean, b * b) < 0.01);
        // Exponential law: second moment is twice the squared mean.
        let m2 = pw.iter().map(|x| x * x).sum::<f64>() / pw.len() as f64;
        assert!(rel(m2, 2.0 * b.powi(4)) < 0.02);
        // k = 2 CDF equals the Rayleigh CDF with sigma = b / sqrt 2.
        let sigma = b / 2f64.sqrt();
        for z in [0.1, 0.7, 1.3, 2.9] {
            let rayleigh = 1.0 - (-z * z / (2.0 * sigma * sigma)).exp();
            assert!((p.cdf(z).unwrap() - rayleigh).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_reduction() {
        let p = w(1.0, 2.0);
        for z in [0.0, 0.5, 3.0] {
            assert!((p.cdf(z).unwrap() - (1.0 - (-z / 2.0).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn mle_examples() {
        assert!(rel(mle_scale(&[1.0, 2.0, 3.0], 1.0).unwrap(), 2.0) < 1e-15);
        assert!(rel(mle_scale(&[0.731], 2.7).unwrap(), 0.731) < 1e-14);
        assert!(mle_scale(&[], 2.0).is_err());
        assert!(mle_scale(&[0.0, 0.0], 2.0).is_err());
        assert!(mle_scale(&[1.0, -1.0], 2.0).is_err());
        let xs = w(2.0, 1.67).sample(100_000, 8).unwrap();
        let b = mle_scale(&xs, 2.0).unwrap();
        assert!((1.65..=1.69).contains(&b), "{b}");
    }

    #[test]
    fn mle_recovers_scale_across_seeds() {
        for (k, b) in [(1.5, 1.67), (2.0, 1.0), (3.0, 0.5)] {
            let p = w(k, b);
            let ok = (0..20)
                .filter(|&s| rel(mle_scale(&p.sample(100_000, s).unwrap(), k).unwrap(), b) < 0.02)
                .count();
            assert!(ok >= 19);
        }
    }

    #[test]
    fn threshold_examples() {
        let t = w(2.0, 1.0).threshold_for_pfa((-1f64).exp()).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        let t = w(2.0, 1.67).threshold_for_pfa(1e-5).unwrap();
        assert!(rel(t, 5.666_427_254_386_618) < 1e-13);
        assert!(w(2.0, 1.0).threshold_for_pfa(0.0).is_err());
        assert!(w(2.0, 1.0).threshold_for_pfa(1.0).is_err());
    }

    #[test]
    fn shape_sensitivity_at_fixed_threshold() {
        let lo = w(2.0, 1.67).pfa_at_threshold(10.0).unwrap();
        let hi = w(1.5, 1.67).pfa_at_threshold(10.0).unwrap();
        let ratio = hi / lo;
        let expected = ((10.0f64 / 1.67).powi(2) - (10.0f64 / 1.67).powf(1.5)).exp();
        assert!(rel(ratio, expected) < 1e-12);
        assert!(rel(ratio, 1_616_409_614.304_858_9) < 1e-10);
        assert!(ratio > 1e6);
    }

    proptest! {
        #[test]
        fn threshold_round_trip(k in 0.3f64..6.0, b in 0.01f64..100.0, lp in -15.0f64..-0.01) {
            let pfa = 10f64.powf(lp);
            let p = w(k, b);
            let t = p.threshold_for_pfa(pfa).unwrap();
            prop_assert!(rel(p.sf(t).unwrap(), pfa) < 1e-12);
            prop_assert!(rel(p.cdf(t).unwrap(), 1.0 - pfa) < 1e-12);
        }

        #[test]
        fn quantile_cdf_identities(k in 0.3f64..6.0, b in 0.01f64..100.0, q in 1e-9f64..0.999_999) {
            let p = w(k, b);
            let z = p.quantile(q).unwrap();
            prop_assert!((p.cdf(z).unwrap() - q).abs() < 1e-10);
            let back = p.quantile(p.cdf(z).unwrap()).unwrap();
            prop_assert!((back - z).abs() <= 1e-10 * z.max(1.0));
        }

        #[test]
        fn cdf_is_nondecreasing(k in 0.3f64..6.0, b in 0.01f64..10.0, z in 0.0f64..20.0, dz in 0.0f64..5.0) {
            let p = w(k, b);
            prop_assert!(p.cdf(z + dz).unwrap() >= p.cdf(z).unwrap());
        }
    }
}
