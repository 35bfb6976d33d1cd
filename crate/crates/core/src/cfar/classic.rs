use super::{CfarConfig, CfarDetector, Threshold};
use crate::error::{Error, Result};

/// Threshold multiplier `α = N (P_fa^(-1/N) - 1)` of cell-averaging CFAR,
/// exact for exponentially distributed cell power.
pub fn alpha_multiplier(n_train: usize, pfa: f64) -> Result<f64> {
    if n_train < 1 {
        return Err(Error::domain("n_train", "must be >= 1"));
    }
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(Error::domain("pfa", format!("must lie in (0, 1], got {pfa}")));
    }
    let n = n_train as f64;
    // P_fa^(-1/N) - 1 = expm1(-ln(P_fa)/N), accurate for large N.
    Ok(n * (-pfa.ln() / n).exp_m1())
}

/// Mean training power times `α(N, P_fa)`.
#[derive(Debug, Clone)]
pub struct ClassicMultiplier {
    pfa: f64,
    /// `α` indexed by training count, filled up to the full window size.
    alpha: Vec<f64>,
}

impl ClassicMultiplier {
    pub const NAME: &'static str = "classic_multiplier";

    pub fn new(pfa: f64, max_train: usize) -> Result<Self> {
        let alpha = (0..=max_train)
            .map(|n| if n == 0 { Ok(0.0) } else { alpha_multiplier(n, pfa) })
            .collect::<Result<_>>()?;
        Ok(ClassicMultiplier { pfa, alpha })
    }

    pub(super) fn build(cfg: &CfarConfig) -> Result<Box<dyn CfarDetector>> {
        Ok(Box::new(Self::new(cfg.pfa, cfg.num_training_cells())?))
    }

    fn alpha(&self, n: usize) -> f64 {
        match self.alpha.get(n) {
            Some(&a) => a,
            None => alpha_multiplier(n, self.pfa).expect("validated pfa"),
        }
    }
}

impl CfarDetector for ClassicMultiplier {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn cell_statistic(&self, power: f64) -> f64 {
        power
    }

    fn threshold(&self, mean_power: f64, n_train: usize) -> Threshold {
        Threshold {
            power: self.alpha(n_train) * mean_power,
            local_stat: mean_power,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alpha_operating_point() {
        let a = alpha_multiplier(20, 1e-5).unwrap();
        assert!((a - 15.565_588_200_778_5).abs() < 1e-9, "{a}");
        assert!((a - 20.0 * (10f64.powf(0.25) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn alpha_large_n_limit() {
        let a = alpha_multiplier(1_000_000, 1e-5).unwrap();
        let lim = (1e5f64).ln();
        assert!((a / lim - 1.0).abs() < 1e-4);
    }

    #[test]
    fn alpha_degenerate_and_invalid() {
        assert_eq!(alpha_multiplier(20, 1.0).unwrap(), 0.0);
        assert!(alpha_multiplier(20, 0.0).is_err());
        assert!(alpha_multiplier(20, -0.1).is_err());
        assert!(alpha_multiplier(20, 1.1).is_err());
        assert!(alpha_multiplier(20, f64::NAN).is_err());
        assert!(alpha_multiplier(0, 0.1).is_err());
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let c = ClassicMultiplier::new(1e-3, 8).unwrap();
        for n in 1..=12 {
            assert_eq!(c.threshold(1.0, n).power, alpha_multiplier(n, 1e-3).unwrap());
        }
    }

    proptest! {
        #[test]
        fn alpha_decreases_in_n(n in 2usize..500, pfa in 1e-8f64..0.5) {
            prop_assert!(alpha_multiplier(n + 1, pfa).unwrap() < alpha_multiplier(n, pfa).unwrap());
        }

        #[test]
        fn alpha_grows_as_pfa_shrinks(n in 2usize..500, pfa in 1e-8f64..0.5, f in 0.01f64..0.99) {
            prop_assert!(alpha_multiplier(n, pfa * f).unwrap() > alpha_multiplier(n, pfa).unwrap());
        }

        #[test]
        fn exact_pfa_for_exponential_power(n in 1usize..200, pfa in 1e-8f64..0.9) {
            // For exponential power, P(X > α·mean) averaged over the mean of N
            // training cells is (1 + α/N)^(-N).
            let a = alpha_multiplier(n, pfa).unwrap();
            let p = (1.0 + a / n as f64).powi(-(n as i32));
            prop_assert!((p / pfa - 1.0).abs() < 1e-9);
        }
    }
}
