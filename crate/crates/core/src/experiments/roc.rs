//! Monte-Carlo detection probability versus signal-to-clutter ratio.
//!
//! Each trial builds one CFAR window in the map domain: training cells carry
//! clutter power `z²` with `z ~ Weibull`, and the cell under test holds a
//! constant-amplitude target with random phase added coherently to a clutter
//! sample. The target amplitude is set so that its power over the mean
//! clutter cell power equals the SCR. Trial `t` draws from substream `t`, and
//! every SCR point reuses the same draws.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cfar::{CfarConfig, DetectorRegistry};
use crate::error::{Error, Result};
use crate::rng::{open01, stream_rng};
use crate::stats::{binomial_std_error, wilson_interval};
use crate::weibull::WeibullParams;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocRow {
    pub scr_db: f64,
    pub pfa: f64,
    pub pd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub detections: u64,
    pub trials: u64,
}

/// `max(1e4, 100/pfa)`, capped at `1e6`.
pub fn default_trials(pfa: f64) -> u64 {
    ((100.0 / pfa).ceil() as u64).clamp(10_000, 1_000_000)
}

/// Detection counts at each of `scr_db` for one detector configuration.
pub fn roc_counts(
    clutter: &WeibullParams,
    cfar: &CfarConfig,
    scr_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    cfar.validate()?;
    if trials == 0 {
        return Err(Error::domain("trials", "must be >= 1"));
    }
    let detector = DetectorRegistry::with_builtin().create(cfar)?;
    let n = cfar.num_training_cells();
    let mean_clutter = clutter.second_moment();
    let amps: Vec<f64> = scr_db
        .iter()
        .map(|s| (10f64.powf(s / 10.0) * mean_clutter).sqrt())
        .collect();
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; amps.len()],
            |mut acc, t| {
                let mut rng = stream_rng(seed, t);
                let mut sum = 0.0;
                for _ in 0..n {
                    let z = clutter.draw(&mut rng);
                    sum += detector.cell_statistic(z * z);
                }
                let threshold = detector.threshold(sum / n as f64, n).power;
                let c = Complex64::from_polar(clutter.draw(&mut rng), std::f64::consts::TAU * open01(&mut rng));
                let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * open01(&mut rng));
                for (slot, &a) in acc.iter_mut().zip(&amps) {
                    if (phase * a + c).norm_sqr() > threshold {
                        *slot += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; amps.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// ROC table over the config's SCR and P_fa lists, P_fa outermost and SCR
/// ascending. Runs [`check_roc_monotone`] before returning.
pub fn run_roc(cfg: &ExperimentConfig) -> Result<Vec<RocRow>> {
    let clutter = cfg.clutter.weibull()?;
    let mut scr = cfg.roc.scr_db.clone();
    scr.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &pfa in &cfg.roc.pfa {
        let trials = if cfg.roc.trials > 0 { cfg.roc.trials } else { default_trials(pfa) };
        let cfar = CfarConfig {
            pfa,
            ..cfg.cfar.clone()
        };
        let counts = roc_counts(&clutter, &cfar, &scr, trials, cfg.seed)?;
        for (&s, &hits) in scr.iter().zip(&counts) {
            let (ci_low, ci_high) = wilson_interval(hits, trials);
            rows.push(RocRow {
                scr_db: s,
                pfa,
                pd: hits as f64 / trials as f64,
                ci_low,
                ci_high,
                detections: hits,
                trials,
            });
        }
    }
    check_roc_monotone(&rows)?;
    Ok(rows)
}

/// At each P_fa, P_d must not fall by more than two standard errors between
/// consecutive SCR points.
pub fn check_roc_monotone(rows: &[RocRow]) -> Result<()> {
    let mut pfas: Vec<f64> = rows.iter().map(|r| r.pfa).collect();
    pfas.sort_by(f64::total_cmp);
    pfas.dedup();
    for pfa in pfas {
        let mut curve: Vec<&RocRow> = rows.iter().filter(|r| r.pfa == pfa).collect();
        curve.sort_by(|a, b| a.scr_db.total_cmp(&b.scr_db));
        for w in curve.windows(2) {
            let slack = 2.0
                * (binomial_std_error(w[0].pd, w[0].trials).powi(2) + binomial_std_error(w[1].pd, w[1].trials).powi(2))
                    .sqrt();
            if w[1].pd < w[0].pd - slack {
                return Err(Error::Invariant(format!(
                    "P_d fell from {} at {} dB to {} at {} dB (pfa {pfa})",
                    w[0].pd, w[0].scr_db, w[1].pd, w[1].scr_db
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.roc.scr_db = vec![-30.0, 0.0, 10.0, 30.0];
        cfg.roc.pfa = vec![1e-2];
        cfg.roc.trials = 20_000;
        cfg
    }

    #[test]
    fn trial_count_rule() {
        assert_eq!(default_trials(1e-2), 10_000);
        assert_eq!(default_trials(1e-3), 100_000);
        assert_eq!(default_trials(1e-5), 1_000_000);
        assert_eq!(default_trials(1e-8), 1_000_000);
    }

    #[test]
    fn curve_spans_floor_to_saturation() {
        let rows = run_roc(&small_cfg()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].pd <= 2.0 * 1e-2, "{:?}", rows[0]);
        assert!(rows[3].pd >= 0.99);
        for r in &rows {
            assert!(r.ci_low <= r.pd && r.pd <= r.ci_high);
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = run_roc(&small_cfg()).unwrap();
        let b = run_roc(&small_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_monotone_curve_is_rejected() {
        let row = |scr_db, pd| RocRow {
            scr_db,
            pfa: 1e-3,
            pd,
            ci_low: 0.0,
            ci_high: 1.0,
            detections: 0,
            trials: 10_000,
        };
        assert!(check_roc_monotone(&[row(0.0, 0.5), row(5.0, 0.49)]).is_ok());
        assert!(matches!(
            check_roc_monotone(&[row(0.0, 0.5), row(5.0, 0.4)]),
            Err(Error::Invariant(_))
        ));
    }
}
