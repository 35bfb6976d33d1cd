//! Cell-averaging CFAR on range-Doppler maps.
//!
//! The sliding-window machinery is shared; what differs between modes is the
//! per-cell statistic averaged over the training cells and how that average
//! becomes a threshold. Modes implement [`CfarDetector`] and are looked up by
//! name in a [`DetectorRegistry`].

mod classic;
mod weibull_adaptive;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

pub use classic::{alpha_multiplier, ClassicMultiplier};
pub use weibull_adaptive::WeibullAdaptive;

use crate::error::{require_positive, Error, Result};
use crate::rdproc::RangeDopplerMap;
use crate::stats::wilson_interval;
use crate::synth::homogeneous_clutter_map;
use crate::weibull::WeibullParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgePolicy {
    /// Use whatever part of the window lies inside the map and recompute the
    /// threshold for that training count.
    #[default]
    TruncateWindow,
    /// Only test cells whose full window fits.
    SkipCell,
}

impl EdgePolicy {
    pub fn name(self) -> &'static str {
        match self {
            EdgePolicy::TruncateWindow => "truncate_window",
            EdgePolicy::SkipCell => "skip_cell",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "truncate_window" => Some(EdgePolicy::TruncateWindow),
            "skip_cell" => Some(EdgePolicy::SkipCell),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfarConfig {
    pub train_cells_per_side_range: usize,
    pub train_cells_per_side_doppler: usize,
    /// Applied on every axis that has training cells.
    pub guard_cells_per_side: usize,
    pub pfa: f64,
    /// Registry name of the detector.
    pub mode: String,
    pub weibull_shape_k: f64,
    pub edge_policy: EdgePolicy,
}

impl Default for CfarConfig {
    /// Twenty range-only training cells, two guards per side, `P_fa = 1e-5`.
    fn default() -> Self {
        CfarConfig {
            train_cells_per_side_range: 10,
            train_cells_per_side_doppler: 0,
            guard_cells_per_side: 2,
            pfa: 1e-5,
            mode: ClassicMultiplier::NAME.to_string(),
            weibull_shape_k: 2.0,
            edge_policy: EdgePolicy::TruncateWindow,
        }
    }
}

impl CfarConfig {
    fn guard_range(&self) -> usize {
        if self.train_cells_per_side_range > 0 {
            self.guard_cells_per_side
        } else {
            0
        }
    }

    fn guard_doppler(&self) -> usize {
        if self.train_cells_per_side_doppler > 0 {
            self.guard_cells_per_side
        } else {
            0
        }
    }

    /// Half-extent of the full window, `(doppler, range)`.
    pub fn half_extent(&self) -> (usize, usize) {
        (
            self.guard_doppler() + self.train_cells_per_side_doppler,
            self.guard_range() + self.train_cells_per_side_range,
        )
    }

    /// Training-cell offsets `(dd, dr)` of the full window.
    pub fn training_offsets(&self) -> Vec<(isize, isize)> {
        let (hd, hr) = self.half_extent();
        let (gd, gr) = (self.guard_doppler() as isize, self.guard_range() as isize);
        let (hd, hr) = (hd as isize, hr as isize);
        let mut out = Vec::new();
        for dd in -hd..=hd {
            for dr in -hr..=hr {
                if dd.abs() > gd || dr.abs() > gr {
                    out.push((dd, dr));
                }
            }
        }
        out
    }

    pub fn num_training_cells(&self) -> usize {
        let (hd, hr) = self.half_extent();
        let (gd, gr) = (self.guard_doppler(), self.guard_range());
        (2 * hd + 1) * (2 * hr + 1) - (2 * gd + 1) * (2 * gr + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa <= 1.0) {
            return Err(Error::domain("pfa", format!("must lie in (0, 1], got {}", self.pfa)));
        }
        require_positive("weibull_shape_k", self.weibull_shape_k)?;
        let n = self.num_training_cells();
        if n < 2 {
            return Err(Error::domain("train_cells", format!("need >= 2 training cells, got {n}")));
        }
        Ok(())
    }
}

/// Threshold for one cell under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// In map power units; the cell fires when its power exceeds this.
    pub power: f64,
    /// Mode-specific local estimate (mean power, or Weibull scale).
    pub local_stat: f64,
}

/// One CFAR mode.
pub trait CfarDetector: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Quantity averaged over the training cells, computed from a cell power.
    fn cell_statistic(&self, power: f64) -> f64;

    /// Threshold from the mean training statistic over `n_train` cells.
    fn threshold(&self, mean_stat: f64, n_train: usize) -> Threshold;
}

pub type DetectorFactory = fn(&CfarConfig) -> Result<Box<dyn CfarDetector>>;

/// Name-to-factory table of CFAR modes.
#[derive(Clone)]
pub struct DetectorRegistry {
    factories: BTreeMap<&'static str, DetectorFactory>,
}

impl fmt::Debug for DetectorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        DetectorRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding `classic_multiplier` and `weibull_adaptive`.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(ClassicMultiplier::NAME, ClassicMultiplier::build);
        r.register(WeibullAdaptive::NAME, WeibullAdaptive::build);
        r
    }

    /// Adds or replaces a mode.
    pub fn register(&mut self, name: &'static str, factory: DetectorFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, cfg: &CfarConfig) -> Result<Box<dyn CfarDetector>> {
        match self.factories.get(cfg.mode.as_str()) {
            Some(f) => f(cfg),
            None => Err(Error::domain(
                "mode",
                format!("unknown CFAR mode `{}` (known: {})", cfg.mode, self.names().join(", ")),
            )),
        }
    }
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub doppler_idx: usize,
    pub range_idx: usize,
    pub range_m: f64,
    pub doppler_hz: f64,
    pub velocity_mps: f64,
    pub power: f64,
    pub threshold: f64,
    pub local_stat: f64,
}

/// Sliding-window processor for one configured detector.
#[derive(Debug)]
pub struct Cfar {
    cfg: CfarConfig,
    detector: Box<dyn CfarDetector>,
    offsets: Vec<(isize, isize)>,
}

/// Outcome of testing one cell.
#[derive(Debug, Clone, Copy)]
struct CellTest {
    fired: bool,
    threshold: Threshold,
}

impl Cfar {
    pub fn new(cfg: &CfarConfig, registry: &DetectorRegistry) -> Result<Self> {
        cfg.validate()?;
        Ok(Cfar {
            cfg: cfg.clone(),
            detector: registry.create(cfg)?,
            offsets: cfg.training_offsets(),
        })
    }

    /// Processor using the built-in registry.
    pub fn from_config(cfg: &CfarConfig) -> Result<Self> {
        Self::new(cfg, &DetectorRegistry::with_builtin())
    }

    pub fn config(&self) -> &CfarConfig {
        &self.cfg
    }

    pub fn detector(&self) -> &dyn CfarDetector {
        self.detector.as_ref()
    }

    fn check_fits(&self, map: &RangeDopplerMap) -> Result<()> {
        if self.cfg.edge_policy == EdgePolicy::SkipCell {
            let (hd, hr) = self.cfg.half_extent();
            if map.num_doppler_bins() < 2 * hd + 1 || map.num_range_bins() < 2 * hr + 1 {
                return Err(Error::domain(
                    "map",
                    format!(
                        "{}x{} map is smaller than one {}x{} CFAR window",
                        map.num_doppler_bins(),
                        map.num_range_bins(),
                        2 * hd + 1,
                        2 * hr + 1
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Tests one cell; `None` when the edge policy excludes it.
    fn test_cell(&self, map: &RangeDopplerMap, d: usize, r: usize) -> Option<CellTest> {
        let (nd, nr) = (map.num_doppler_bins() as isize, map.num_range_bins() as isize);
        let (hd, hr) = self.cfg.half_extent();
        if self.cfg.edge_policy == EdgePolicy::SkipCell
            && (d < hd || r < hr || d + hd >= nd as usize || r + hr >= nr as usize)
        {
            return None;
        }
        let mut sum = 0.0;
        let mut n = 0usize;
        for &(dd, dr) in &self.offsets {
            let (i, j) = (d as isize + dd, r as isize + dr);
            if i >= 0 && i < nd && j >= 0 && j < nr {
                sum += self.detector.cell_statistic(map.get(i as usize, j as usize));
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        let threshold = self.detector.threshold(sum / n as f64, n);
        Some(CellTest {
            fired: map.get(d, r) > threshold.power,
            threshold,
        })
    }

    /// Threshold the processor would apply at `(d, r)`.
    pub fn threshold_at(&self, map: &RangeDopplerMap, d: usize, r: usize) -> Option<Threshold> {
        self.test_cell(map, d, r).map(|t| t.threshold)
    }

    /// Every firing cell, in row-major order.
    pub fn detect(&self, map: &RangeDopplerMap) -> Result<Vec<Detection>> {
        self.check_fits(map)?;
        let nr = map.num_range_bins();
        let rows: Vec<Vec<Detection>> = (0..map.num_doppler_bins())
            .into_par_iter()
            .map(|d| {
                let mut out = Vec::new();
                for r in 0..nr {
                    if let Some(t) = self.test_cell(map, d, r) {
                        if t.fired {
                            let ro = map.readout(d, r).expect("cell in bounds");
                            out.push(Detection {
                                doppler_idx: d,
                                range_idx: r,
                                range_m: ro.range_m,
                                doppler_hz: ro.doppler_hz,
                                velocity_mps: ro.velocity_mps,
                                power: ro.power,
                                threshold: t.threshold.power,
                                local_stat: t.threshold.local_stat,
                            });
                        }
                    }
                }
                out
            })
            .collect();
        Ok(rows.into_iter().flatten().collect())
    }

    /// `(firing cells, cells tested)`.
    pub fn count(&self, map: &RangeDopplerMap) -> Result<(u64, u64)> {
        self.check_fits(map)?;
        let nr = map.num_range_bins();
        Ok((0..map.num_doppler_bins())
            .into_par_iter()
            .map(|d| {
                let mut fired = 0u64;
                let mut tested = 0u64;
                for r in 0..nr {
                    if let Some(t) = self.test_cell(map, d, r) {
                        tested += 1;
                        fired += t.fired as u64;
                    }
                }
                (fired, tested)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1)))
    }
}

/// Runs the classic multiplier detector whatever `cfg.mode` says.
pub fn detect_classic(map: &RangeDopplerMap, cfg: &CfarConfig) -> Result<Vec<Detection>> {
    let cfg = CfarConfig {
        mode: ClassicMultiplier::NAME.into(),
        ..cfg.clone()
    };
    Cfar::from_config(&cfg)?.detect(map)
}

/// Runs the Weibull-adaptive detector whatever `cfg.mode` says.
pub fn detect_weibull(map: &RangeDopplerMap, cfg: &CfarConfig) -> Result<Vec<Detection>> {
    let cfg = CfarConfig {
        mode: WeibullAdaptive::NAME.into(),
        ..cfg.clone()
    };
    Cfar::from_config(&cfg)?.detect(map)
}

/// Merges 8-connected firing cells, keeping the strongest cell of each group.
/// Output is row-major.
pub fn cluster_detections(dets: &[Detection]) -> Vec<Detection> {
    let index: BTreeMap<(usize, usize), usize> = dets
        .iter()
        .enumerate()
        .map(|(i, d)| ((d.doppler_idx, d.range_idx), i))
        .collect();
    let mut seen = vec![false; dets.len()];
    let mut out = Vec::new();
    for start in 0..dets.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut best = start;
        while let Some(i) = stack.pop() {
            if dets[i].power > dets[best].power {
                best = i;
            }
            let (d, r) = (dets[i].doppler_idx as isize, dets[i].range_idx as isize);
            for dd in -1..=1 {
                for dr in -1..=1 {
                    let (a, b) = (d + dd, r + dr);
                    if a < 0 || b < 0 {
                        continue;
                    }
                    if let Some(&j) = index.get(&(a as usize, b as usize)) {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        out.push(dets[best]);
    }
    out.sort_by_key(|d| (d.doppler_idx, d.range_idx));
    out
}

/// Empirical false-alarm rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfaEstimate {
    pub false_alarms: u64,
    pub cells_tested: u64,
    pub pfa: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Side of the square clutter maps used by [`measure_pfa`].
pub const PFA_MAP_SIZE: usize = 256;

/// Runs the configured detector over target-free homogeneous clutter maps
/// (cell power `z²`, `z ~ Weibull`) until at least `num_cells` cells have been
/// tested. Map `i` draws from substream `i` of `seed`.
pub fn measure_pfa(clutter: &WeibullParams, cfg: &CfarConfig, num_cells: u64, seed: u64) -> Result<PfaEstimate> {
    if num_cells < 100_000 {
        return Err(Error::domain("num_cells", format!("must be >= 1e5, got {num_cells}")));
    }
    let cfar = Cfar::from_config(cfg)?;
    let radar = crate::linkbudget::RadarParams::table1();
    let probe = homogeneous_clutter_map(&radar, clutter, PFA_MAP_SIZE, PFA_MAP_SIZE, seed, 0)?;
    let (_, per_map) = cfar.count(&probe)?;
    if per_map == 0 {
        return Err(Error::domain("map", "no testable cells"));
    }
    let maps = num_cells.div_ceil(per_map);
    let (fired, tested) = (0..maps)
        .into_par_iter()
        .map(|i| {
            let map = homogeneous_clutter_map(&radar, clutter, PFA_MAP_SIZE, PFA_MAP_SIZE, seed, i)?;
            cfar.count(&map)
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let (ci_low, ci_high) = wilson_interval(fired, tested);
    Ok(PfaEstimate {
        false_alarms: fired,
        cells_tested: tested,
        pfa: fired as f64 / tested as f64,
        ci_low,
        ci_high,
    })
}
