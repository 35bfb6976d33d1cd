//! Closed-form radar link-budget relations.
//!
//! All formulas take linear units. Conversions to and from decibels are the
//! explicit helpers at the top of the module.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::SPEED_OF_LIGHT;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Standard reference noise temperature, K.
pub const T0_KELVIN: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts * 1e3)
}

/// FMCW waveform and link-budget description.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarParams {
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    /// Chirp duration; also the fast-time observation window and the pulse
    /// length used by the clutter-limited range relation.
    pub sweep_time_s: f64,
    pub samples_per_sweep: usize,
    pub prf_hz: f64,
    pub tx_power_w: f64,
    pub antenna_gain_linear: f64,
    pub system_loss_linear: f64,
    pub noise_figure_db: f64,
    /// Receiver sensitivity, the `P_r` of the maximum-range equation.
    pub min_detectable_power_w: f64,
}

/// Default required SNR for the sensitivity helper, dB.
pub const DEFAULT_SNR_MIN_DB: f64 = 13.0;

impl RadarParams {
    /// The 24 GHz Ancortek-style FMCW radar: 0.5 GHz sweep, 1 ms chirp, 128
    /// samples, 12 dBm, 1 kHz PRF, 20 dBi, NF 6.4 dB, no extra loss.
    /// Sensitivity comes from [`receiver_sensitivity_w`] over the swept
    /// bandwidth at [`DEFAULT_SNR_MIN_DB`].
    pub fn table1() -> Self {
        let bandwidth_hz = 0.5e9;
        let noise_figure_db = 6.4;
        RadarParams {
            center_freq_hz: 24e9,
            bandwidth_hz,
            sweep_time_s: 1e-3,
            samples_per_sweep: 128,
            prf_hz: 1e3,
            tx_power_w: dbm_to_watts(12.0),
            antenna_gain_linear: db_to_linear(20.0),
            system_loss_linear: 1.0,
            noise_figure_db,
            min_detectable_power_w: receiver_sensitivity_w(
                bandwidth_hz,
                noise_figure_db,
                DEFAULT_SNR_MIN_DB,
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("center_freq_hz", self.center_freq_hz)?;
        require_positive("bandwidth_hz", self.bandwidth_hz)?;
        require_positive("sweep_time_s", self.sweep_time_s)?;
        require_positive("prf_hz", self.prf_hz)?;
        require_positive("tx_power_w", self.tx_power_w)?;
        require_positive("antenna_gain_linear", self.antenna_gain_linear)?;
        require_positive("min_detectable_power_w", self.min_detectable_power_w)?;
        if !(self.system_loss_linear >= 1.0 && self.system_loss_linear.is_finite()) {
            return Err(Error::domain(
                "system_loss_linear",
                format!("must be >= 1, got {}", self.system_loss_linear),
            ));
        }
        if !(self.noise_figure_db >= 0.0) {
            return Err(Error::domain(
                "noise_figure_db",
                format!("must be >= 0, got {}", self.noise_figure_db),
            ));
        }
        if self.samples_per_sweep < 2 {
            return Err(Error::domain(
                "samples_per_sweep",
                format!("must be >= 2, got {}", self.samples_per_sweep),
            ));
        }
        // Allow a one-ulp-scale slack so prf = 1/sweep_time passes.
        if self.prf_hz * self.sweep_time_s > 1.0 + 1e-12 {
            return Err(Error::domain(
                "prf_hz",
                format!(
                    "{} Hz exceeds 1/sweep_time = {} Hz",
                    self.prf_hz,
                    1.0 / self.sweep_time_s
                ),
            ));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.center_freq_hz
    }

    /// Complex fast-time sample rate.
    pub fn sample_rate_hz(&self) -> f64 {
        self.samples_per_sweep as f64 / self.sweep_time_s
    }

    /// Chirp slope, Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth_hz / self.sweep_time_s
    }

    /// Largest range whose beat frequency stays below half the sample rate.
    pub fn max_unambiguous_range_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.samples_per_sweep as f64 / (4.0 * self.bandwidth_hz)
    }

    /// Largest radial speed whose Doppler stays below PRF/2.
    pub fn max_unambiguous_velocity_mps(&self) -> f64 {
        self.wavelength_m() * self.prf_hz / 4.0
    }
}

/// Minimum detectable power `k T0 B · NF · SNR_min`, in watts.
pub fn receiver_sensitivity_w(noise_bandwidth_hz: f64, noise_figure_db: f64, snr_min_db: f64) -> f64 {
    BOLTZMANN * T0_KELVIN * noise_bandwidth_hz * db_to_linear(noise_figure_db) * db_to_linear(snr_min_db)
}

/// Maximum detectable range from the monostatic radar equation,
/// `R = (Pt G² λ² σ / (Pr (4π)³ L))^(1/4)`.
pub fn max_range_eq1(p: &RadarParams, target_rcs_m2: f64) -> Result<f64> {
    require_positive("tx_power_w", p.tx_power_w)?;
    require_positive("antenna_gain_linear", p.antenna_gain_linear)?;
    require_positive("center_freq_hz", p.center_freq_hz)?;
    require_positive("min_detectable_power_w", p.min_detectable_power_w)?;
    require_positive("system_loss_linear", p.system_loss_linear)?;
    require_positive("target_rcs_m2", target_rcs_m2)?;
    let lambda = p.wavelength_m();
    let num = p.tx_power_w * p.antenna_gain_linear.powi(2) * lambda * lambda * target_rcs_m2;
    let den = p.min_detectable_power_w * (4.0 * PI).powi(3) * p.system_loss_linear;
    Ok((num / den).sqrt().sqrt())
}

/// Geometry of an area-clutter engagement at low grazing angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GrazingGeometry {
    pub grazing_angle_rad: f64,
    pub azimuth_beamwidth_rad: f64,
    pub elevation_beamwidth_rad: f64,
    /// Terrain backscatter per unit area, m²/m².
    pub clutter_reflectivity: f64,
    pub target_rcs_m2: f64,
    pub scr_linear: f64,
}

impl GrazingGeometry {
    pub fn validate(&self) -> Result<()> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        for (field, angle) in [
            ("grazing_angle_rad", self.grazing_angle_rad),
            ("azimuth_beamwidth_rad", self.azimuth_beamwidth_rad),
            ("elevation_beamwidth_rad", self.elevation_beamwidth_rad),
        ] {
            if !(angle > 0.0 && angle < half_pi) {
                return Err(Error::domain(field, format!("must lie in (0, pi/2), got {angle}")));
            }
        }
        require_positive("clutter_reflectivity", self.clutter_reflectivity)?;
        require_positive("target_rcs_m2", self.target_rcs_m2)?;
        require_positive("scr_linear", self.scr_linear)
    }
}

/// Result of the clutter-limited range relation together with its regime check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterLimitedRange {
    pub range_m: f64,
    /// `tan ψ < φ R / (cτ/2)`; when false the beam-limited area assumption
    /// behind the formula does not hold at the returned range.
    pub valid: bool,
    pub tan_grazing: f64,
    pub validity_bound: f64,
}

/// Detection range in area clutter,
/// `R = L cos ψ σt / (SCR (cτ/2) θ σ0)`, with `τ` = sweep time.
pub fn clutter_limited_range_eq2(p: &RadarParams, g: &GrazingGeometry) -> Result<ClutterLimitedRange> {
    g.validate()?;
    require_positive("sweep_time_s", p.sweep_time_s)?;
    require_positive("system_loss_linear", p.system_loss_linear)?;
    let half_pulse = SPEED_OF_LIGHT * p.sweep_time_s / 2.0;
    let range_m = p.system_loss_linear * g.grazing_angle_rad.cos() * g.target_rcs_m2
        / (g.scr_linear * half_pulse * g.azimuth_beamwidth_rad * g.clutter_reflectivity);
    let tan_grazing = g.grazing_angle_rad.tan();
    let validity_bound = g.elevation_beamwidth_rad * range_m / half_pulse;
    Ok(ClutterLimitedRange {
        range_m,
        valid: tan_grazing < validity_bound,
        tan_grazing,
        validity_bound,
    })
}

/// Range-cell size `c / 2B`.
pub fn range_resolution(p: &RadarParams) -> Result<f64> {
    require_positive("bandwidth_hz", p.bandwidth_hz)?;
    Ok(SPEED_OF_LIGHT / (2.0 * p.bandwidth_hz))
}

/// Radial velocity `f_D c / (2 f0)`; positive values are closing.
pub fn velocity_from_doppler(p: &RadarParams, doppler_hz: f64) -> Result<f64> {
    require_positive("center_freq_hz", p.center_freq_hz)?;
    Ok(doppler_hz * SPEED_OF_LIGHT / (2.0 * p.center_freq_hz))
}

/// Inverse of [`velocity_from_doppler`].
pub fn doppler_from_velocity(p: &RadarParams, velocity_mps: f64) -> Result<f64> {
    require_positive("center_freq_hz", p.center_freq_hz)?;
    Ok(2.0 * velocity_mps * p.center_freq_hz / SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn eq1_radar() -> RadarParams {
        RadarParams {
            min_detectable_power_w: dbm_to_watts(-90.0),
            ..RadarParams::table1()
        }
    }

    #[test]
    fn table1_is_valid() {
        RadarParams::table1().validate().unwrap();
    }

    #[test]
    fn eq1_matches_hand_evaluation() {
        // 40-digit evaluation of the radar equation for this operating point.
        let r = max_range_eq1(&eq1_radar(), 0.01).unwrap();
        assert!(rel(r, 18.788_725_979_819_2) < 1e-6, "{r}");
    }

    #[test]
    fn eq1_fourth_root_scaling() {
        let p = eq1_radar();
        let r = max_range_eq1(&p, 0.01).unwrap();
        let doubled = RadarParams {
            tx_power_w: 2.0 * p.tx_power_w,
            ..p.clone()
        };
        assert!(rel(max_range_eq1(&doubled, 0.01).unwrap(), r * 2f64.powf(0.25)) < 1e-14);
        assert!(rel(max_range_eq1(&p, 0.16).unwrap(), 2.0 * r) < 1e-14);
    }

    #[test]
    fn eq1_rejects_nonpositive_input() {
        let p = RadarParams {
            tx_power_w: 0.0,
            ..RadarParams::table1()
        };
        match max_range_eq1(&p, 1.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "tx_power_w"),
            other => panic!("{other:?}"),
        }
        assert!(max_range_eq1(&RadarParams::table1(), -1.0).is_err());
    }

    fn eq2_geometry() -> GrazingGeometry {
        GrazingGeometry {
            grazing_angle_rad: 1f64.to_radians(),
            azimuth_beamwidth_rad: 0.1,
            elevation_beamwidth_rad: 0.1,
            clutter_reflectivity: 1e-4,
            target_rcs_m2: 0.01,
            scr_linear: 10.0,
        }
    }

    #[test]
    fn eq2_matches_hand_evaluation() {
        let out = clutter_limited_range_eq2(&RadarParams::table1(), &eq2_geometry()).unwrap();
        assert!(rel(out.range_m, 6.670_265_835_415_99e-4) < 1e-6, "{}", out.range_m);
        assert!(rel(out.tan_grazing, 0.017_455_064_928_217_6) < 1e-9);
        assert!(rel(out.validity_bound, 4.449_922_376_243_36e-10) < 1e-6);
        assert!(!out.valid);
    }

    #[test]
    fn eq2_small_angle_limit_and_reflectivity_scaling() {
        let p = RadarParams::table1();
        let mut g = eq2_geometry();
        g.grazing_angle_rad = 1e-9;
        let r0 = clutter_limited_range_eq2(&p, &g).unwrap().range_m;
        let expected = g.target_rcs_m2
            / (g.scr_linear * SPEED_OF_LIGHT * p.sweep_time_s / 2.0 * g.azimuth_beamwidth_rad * g.clutter_reflectivity);
        assert!(rel(r0, expected) < 1e-15);
        g.clutter_reflectivity *= 2.0;
        assert!(rel(clutter_limited_range_eq2(&p, &g).unwrap().range_m, r0 / 2.0) < 1e-15);
    }

    #[test]
    fn eq2_flags_rather_than_fails() {
        let mut g = eq2_geometry();
        g.clutter_reflectivity = 1e-12;
        g.elevation_beamwidth_rad = 1.0;
        let out = clutter_limited_range_eq2(&RadarParams::table1(), &g).unwrap();
        assert!(out.valid);
        g.grazing_angle_rad = 0.0;
        assert!(clutter_limited_range_eq2(&RadarParams::table1(), &g).is_err());
    }

    #[test]
    fn resolution_values() {
        let mut p = RadarParams::table1();
        assert!(rel(range_resolution(&p).unwrap(), 0.299_792_458) < 1e-15);
        p.bandwidth_hz = 1e9;
        assert!(rel(range_resolution(&p).unwrap(), 0.149_896_229) < 1e-15);
        p.bandwidth_hz = 150e6;
        assert!((range_resolution(&p).unwrap() - 0.99931).abs() < 5e-6);
        p.bandwidth_hz = 0.0;
        assert!(range_resolution(&p).is_err());
    }

    #[test]
    fn velocity_readout() {
        let p = RadarParams::table1();
        let v = velocity_from_doppler(&p, 200.0).unwrap();
        assert!(rel(v, 1.249_135_241_666_67) < 1e-12);
        // Reported in the source as roughly 1.2 m/s.
        assert_eq!((v * 10.0).round() / 10.0, 1.2);
        assert_eq!(velocity_from_doppler(&p, 0.0).unwrap(), 0.0);
        assert_eq!(velocity_from_doppler(&p, -200.0).unwrap(), -v);
        assert!(rel(doppler_from_velocity(&p, v).unwrap(), 200.0) < 1e-14);
    }

    #[test]
    fn db_helpers() {
        assert!(rel(dbm_to_watts(12.0), 0.015_848_931_924_611_1) < 1e-14);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
        assert!(rel(db_to_linear(20.0), 100.0) < 1e-15);
        assert!((linear_to_db(1000.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_helper() {
        // kT0 over 1 Hz with 0 dB figures is -174 dBm/Hz.
        let s = receiver_sensitivity_w(1.0, 0.0, 0.0);
        assert!((watts_to_dbm(s) + 173.975).abs() < 1e-3);
    }

    #[test]
    fn validation_catches_prf_and_samples() {
        let mut p = RadarParams::table1();
        p.prf_hz = 2000.0;
        assert!(p.validate().is_err());
        let mut p = RadarParams::table1();
        p.samples_per_sweep = 1;
        assert!(p.validate().is_err());
        let mut p = RadarParams::table1();
        p.system_loss_linear = 0.5;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn eq1_monotone_in_power_and_rcs(pt in 1e-3f64..10.0, f in 1.01f64..10.0, rcs in 1e-4f64..10.0) {
            let p = eq1_radar();
            let lo = RadarParams { tx_power_w: pt, ..p.clone() };
            let hi = RadarParams { tx_power_w: pt * f, ..p.clone() };
            prop_assert!(max_range_eq1(&hi, rcs).unwrap() > max_range_eq1(&lo, rcs).unwrap());
            prop_assert!(max_range_eq1(&lo, rcs * f).unwrap() > max_range_eq1(&lo, rcs).unwrap());
        }

        #[test]
        fn eq1_power_scaling_law(a in 0.05f64..20.0, pt in 1e-3f64..10.0) {
            let p = RadarParams { tx_power_w: pt, ..eq1_radar() };
            let scaled = RadarParams { tx_power_w: pt * a.powi(4), ..p.clone() };
            let r = max_range_eq1(&p, 0.1).unwrap();
            prop_assert!(rel(max_range_eq1(&scaled, 0.1).unwrap(), a * r) < 1e-12);
        }

        #[test]
        fn eq2_joint_rcs_reflectivity_invariance(a in 1e-3f64..1e3) {
            let p = RadarParams::table1();
            let g = eq2_geometry();
            let g2 = GrazingGeometry {
                target_rcs_m2: g.target_rcs_m2 * a,
                clutter_reflectivity: g.clutter_reflectivity * a,
                ..g.clone()
            };
            let r1 = clutter_limited_range_eq2(&p, &g).unwrap().range_m;
            let r2 = clutter_limited_range_eq2(&p, &g2).unwrap().range_m;
            prop_assert!(rel(r2, r1) < 1e-12);
        }

        #[test]
        fn velocity_is_linear(a in -5e3f64..5e3, b in -5e3f64..5e3) {
            let p = RadarParams::table1();
            let lhs = velocity_from_doppler(&p, a + b).unwrap();
            let rhs = velocity_from_doppler(&p, a).unwrap() + velocity_from_doppler(&p, b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
