use super::{CfarConfig, CfarDetector, Threshold};
use crate::error::{require_positive, Error, Result};
use crate::weibull::scale_from_moment;

/// Known-shape Weibull fit on training amplitudes.
///
/// Map cells hold power, so the amplitude is `sqrt(power)` and the averaged
/// statistic `z^k` is `power^(k/2)`. The scale estimate
/// `b = (mean z^k)^(1/k)` gives the amplitude threshold
/// `T = b (-ln P_fa)^(1/k)`; the cell fires when its power exceeds `T²`.
#[derive(Debug, Clone)]
pub struct WeibullAdaptive {
    shape: f64,
    /// `(-ln P_fa)^(1/k)`.
    tail_factor: f64,
}

impl WeibullAdaptive {
    pub const NAME: &'static str = "weibull_adaptive";

    pub fn new(shape: f64, pfa: f64) -> Result<Self> {
        require_positive("weibull_shape_k", shape)?;
        if !(pfa > 0.0 && pfa <= 1.0) {
            return Err(Error::domain("pfa", format!("must lie in (0, 1], got {pfa}")));
        }
        Ok(WeibullAdaptive {
            shape,
            tail_factor: (-pfa.ln()).powf(1.0 / shape),
        })
    }

    pub(super) fn build(cfg: &CfarConfig) -> Result<Box<dyn CfarDetector>> {
        Ok(Box::new(Self::new(cfg.weibull_shape_k, cfg.pfa)?))
    }
}

impl CfarDetector for WeibullAdaptive {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn cell_statistic(&self, power: f64) -> f64 {
        power.powf(0.5 * self.shape)
    }

    fn threshold(&self, mean_zk: f64, _n_train: usize) -> Threshold {
        let b_hat = scale_from_moment(mean_zk, self.shape);
        let t = b_hat * self.tail_factor;
        Threshold {
            power: t * t,
            local_stat: b_hat,
        }
    }
}
