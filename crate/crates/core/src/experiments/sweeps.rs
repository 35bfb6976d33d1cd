//! Threshold and maximum-range tabulations.

use crate::error::{Error, Result};
use crate::linkbudget::{dbm_to_watts, max_range_eq1, RadarParams};
use crate::weibull::WeibullParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub k: f64,
    pub pfa: f64,
    pub threshold: f64,
}

/// Weibull amplitude threshold for every `(k, pfa)` pair, `k` outermost.
/// Fails with [`Error::Invariant`] if a row does not invert back to its
/// `pfa`, or if thresholds are not monotone in `pfa`.
pub fn run_threshold_sweep(b_hat: f64, k_list: &[f64], pfa_list: &[f64]) -> Result<Vec<ThresholdRow>> {
    if k_list.is_empty() || pfa_list.is_empty() {
        return Err(Error::domain("sweep", "k and pfa lists must be nonempty"));
    }
    let mut rows = Vec::with_capacity(k_list.len() * pfa_list.len());
    for &k in k_list {
        let w = WeibullParams::new(k, b_hat)?;
        for &pfa in pfa_list {
            let threshold = w.threshold_for_pfa(pfa)?;
            let back = w.sf(threshold)?;
            if ((back - pfa) / pfa).abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "threshold {threshold} for k = {k} inverts to pfa {back}, not {pfa}"
                )));
            }
            rows.push(ThresholdRow { k, pfa, threshold });
        }
    }
    check_threshold_monotone(&rows)?;
    Ok(rows)
}

/// For each `k`, a smaller `pfa` must give a larger threshold.
pub fn check_threshold_monotone(rows: &[ThresholdRow]) -> Result<()> {
    for a in rows {
        for b in rows {
            if a.k == b.k && a.pfa < b.pfa && !(a.threshold > b.threshold) {
                return Err(Error::Invariant(format!(
                    "k = {}: threshold at pfa {} ({}) not above threshold at pfa {} ({})",
                    a.k, a.pfa, a.threshold, b.pfa, b.threshold
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxRangeRow {
    pub tx_power_dbm: f64,
    pub tx_power_w: f64,
    pub rcs_m2: f64,
    pub range_m: f64,
}

/// Free-space maximum range over a transmit-power by RCS grid, power
/// outermost. All other link-budget terms come from `p`.
pub fn run_max_range_table(p: &RadarParams, rcs_list: &[f64], tx_power_dbm: &[f64]) -> Result<Vec<MaxRangeRow>> {
    if rcs_list.is_empty() || tx_power_dbm.is_empty() {
        return Err(Error::domain("max_range", "rcs and power lists must be nonempty"));
    }
    let mut rows = Vec::new();
    for &dbm in tx_power_dbm {
        let radar = RadarParams {
            tx_power_w: dbm_to_watts(dbm),
            ..p.clone()
        };
        for &rcs in rcs_list {
            rows.push(MaxRangeRow {
                tx_power_dbm: dbm,
                tx_power_w: radar.tx_power_w,
                rcs_m2: rcs,
                range_m: max_range_eq1(&radar, rcs)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig8() -> Vec<ThresholdRow> {
        let pfas: Vec<f64> = (1..=6).map(|i| 10f64.powi(-i)).collect();
        run_threshold_sweep(1.65, &[1.5, 2.0, 2.5], &pfas).unwrap()
    }

    #[test]
    fn smaller_shape_needs_higher_threshold() {
        let rows = fig8();
        for pfa in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let at = |k: f64| {
                rows.iter()
                    .find(|r| r.k == k && (r.pfa / pfa - 1.0).abs() < 1e-12)
                    .unwrap()
                    .threshold
            };
            assert!(at(1.5) > at(2.0) && at(2.0) > at(2.5), "{pfa}");
        }
    }

    #[test]
    fn threshold_equals_scale_at_inverse_e() {
        let rows = run_threshold_sweep(1.65, &[1.5, 2.0, 2.5], &[(-1f64).exp()]).unwrap();
        for r in rows {
            assert!((r.threshold - 1.65).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_invert_to_their_pfa() {
        for r in fig8() {
            let w = WeibullParams::new(r.k, 1.65).unwrap();
            assert!((w.sf(r.threshold).unwrap() / r.pfa - 1.0).abs() < 1e-12);
            assert!(((1.0 - w.cdf(r.threshold).unwrap()) / r.pfa - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn monotonicity_violation_is_an_invariant_error() {
        let rows = [
            ThresholdRow { k: 2.0, pfa: 1e-3, threshold: 1.0 },
            ThresholdRow { k: 2.0, pfa: 1e-2, threshold: 2.0 },
        ];
        assert!(matches!(check_threshold_monotone(&rows), Err(Error::Invariant(_))));
    }

    #[test]
    fn bad_inputs() {
        assert!(run_threshold_sweep(1.65, &[], &[0.1]).is_err());
        assert!(run_threshold_sweep(1.65, &[2.0], &[1.0]).is_err());
        assert!(run_max_range_table(&RadarParams::table1(), &[0.1], &[]).is_err());
    }

    #[test]
    fn sixteen_fold_power_doubles_range() {
        let p = RadarParams::table1();
        let dbm16 = 10.0 * 16f64.log10();
        let rows = run_max_range_table(&p, &[0.01, 0.1, 1.0], &[0.0, dbm16]).unwrap();
        for i in 0..3 {
            let (lo, hi) = (rows[i], rows[i + 3]);
            assert_eq!(lo.rcs_m2, hi.rcs_m2);
            assert!((hi.range_m / lo.range_m / 2.0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curves_do_not_cross() {
        let p = RadarParams::table1();
        let powers: Vec<f64> = (0..=10).map(|i| 3.0 * i as f64).collect();
        let rows = run_max_range_table(&p, &[0.01, 0.1, 1.0], &powers).unwrap();
        for chunk in rows.chunks(3) {
            assert!(chunk[0].range_m < chunk[1].range_m && chunk[1].range_m < chunk[2].range_m);
        }
    }
}
