//! Monte Carlo experiment engine.
//!
//! A drop is one topology and shadowing draw. Everything that depends only on
//! large-scale fading (estimation statistics, B and A matrices, combiner
//! profiles) is computed once per drop in a [`DropContext`]; then
//! `n_realizations` channel and pilot-noise draws are simulated for the
//! instantaneous-CSI bound. UatF and hardening bounds of profile schemes are
//! evaluated in closed form.
//!
//! Drop `i` draws from its own ChaCha stream keyed by `(seed, i)`, and results
//! are merged in drop order, so output does not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combining::{
    compute_a, compute_b, gmr_profile, mmse_combiner, mmse_combiner_dual, mr_profile,
    noise_interference_diag, profile_vectors, rcmmse_profile, CoefficientMatrix,
    NoiseInterferenceDiag, ScalarProfile,
};
use crate::error::{Error, Result};
use crate::estimation::{
    despread_pilot, estimation_stats, mmse_estimate, sample_channels, ChannelEstimate,
    EstimationStats, C64,
};
use crate::precoding::{
    duality_scaling, power_allocation, precoder_profile, Mode, PowerMode,
};
use crate::scenario::{generate_profile, LargeScaleProfile, RadioConfig, ScenarioConfig, SnrSet};
use crate::se::{
    dl_moments_closed_form, dl_moments_mc, se_from_sinr, ul_sinr_csi, uatf_sinr_closed_form,
    RunningMean,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MR")]
    Mr,
    #[serde(rename = "MMSE")]
    Mmse,
    #[serde(rename = "RCMMSE")]
    RcMmse,
    #[serde(rename = "GMR")]
    Gmr,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mr => "MR",
            Scheme::Mmse => "MMSE",
            Scheme::RcMmse => "RCMMSE",
            Scheme::Gmr => "GMR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Csi,
    Uatf,
    DlHardening,
}

impl Bound {
    pub fn as_str(self) -> &'static str {
        match self {
            Bound::Csi => "csi",
            Bound::Uatf => "uatf",
            Bound::DlHardening => "dl_hardening",
        }
    }
}

/// One curve of an experiment: a combiner or precoder, where it runs, and the
/// bound used to score it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Series {
    pub scheme: Scheme,
    pub mode: Mode,
    pub bound: Bound,
}

impl Series {
    pub const fn new(scheme: Scheme, mode: Mode, bound: Bound) -> Self {
        Self { scheme, mode, bound }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match (self.scheme, self.mode, self.bound) {
            (Scheme::Mmse, Mode::Distributed, _) => false,
            (Scheme::Mmse, _, Bound::Uatf) => false,
            (_, Mode::Centralized, Bound::Csi) => true,
            (_, Mode::Distributed, Bound::Uatf) => true,
            (_, _, Bound::DlHardening) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("unsupported series {self}")))
        }
    }

    /// Power split the paper-style DL experiments pair with this series.
    pub fn default_power(&self) -> PowerMode {
        match self.mode {
            Mode::Centralized => PowerMode::NetworkWideEqual,
            Mode::Distributed => PowerMode::PerApSqrtBeta,
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Centralized => "c",
            Mode::Distributed => "d",
        };
        write!(f, "{}-{}:{}", self.scheme.as_str(), mode, self.bound.as_str())
    }
}

impl FromStr for Series {
    type Err = Error;

    /// Parses labels such as `GMR-d:uatf` or `MMSE-c:dl_hardening`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse series '{s}', expected e.g. GMR-d:uatf"));
        let (head, bound) = s.trim().split_once(':').ok_or_else(bad)?;
        let (scheme, mode) = head.rsplit_once('-').ok_or_else(bad)?;
        let scheme = match scheme.to_ascii_uppercase().as_str() {
            "MR" => Scheme::Mr,
            "MMSE" => Scheme::Mmse,
            "RCMMSE" | "RC-MMSE" => Scheme::RcMmse,
            "GMR" => Scheme::Gmr,
            _ => return Err(bad()),
        };
        let mode = match mode {
            "c" | "centralized" => Mode::Centralized,
            "d" | "distributed" => Mode::Distributed,
            _ => return Err(bad()),
        };
        let bound = match bound {
            "csi" => Bound::Csi,
            "uatf" => Bound::Uatf,
            "dl" | "dl_hardening" => Bound::DlHardening,
            _ => return Err(bad()),
        };
        let series = Series { scheme, mode, bound };
        series.validate()?;
        Ok(series)
    }
}

/// Uplink series of the CDF experiment.
pub const UL_CDF_SERIES: [Series; 6] = [
    Series::new(Scheme::Mmse, Mode::Centralized, Bound::Csi),
    Series::new(Scheme::RcMmse, Mode::Centralized, Bound::Csi),
    Series::new(Scheme::Gmr, Mode::Centralized, Bound::Csi),
    Series::new(Scheme::RcMmse, Mode::Distributed, Bound::Uatf),
    Series::new(Scheme::Gmr, Mode::Distributed, Bound::Uatf),
    Series::new(Scheme::Mr, Mode::Distributed, Bound::Uatf),
];

/// Downlink series of the CDF experiment.
pub const DL_CDF_SERIES: [Series; 3] = [
    Series::new(Scheme::Mmse, Mode::Centralized, Bound::DlHardening),
    Series::new(Scheme::RcMmse, Mode::Centralized, Bound::DlHardening),
    Series::new(Scheme::Gmr, Mode::Distributed, Bound::DlHardening),
];

/// Series of the M sweep.
pub const SWEEP_SERIES: [Series; 6] = UL_CDF_SERIES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub radio: RadioConfig,
    pub series: Vec<Series>,
    pub n_drops: usize,
    pub n_realizations: usize,
    pub seed: u64,
    /// AP counts for the M sweep.
    pub sweep: Option<Vec<usize>>,
    /// Overrides the per-series DL power split.
    pub dl_power: Option<PowerMode>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            radio: RadioConfig::default(),
            series: UL_CDF_SERIES.to_vec(),
            n_drops: 200,
            n_realizations: 1000,
            seed: 1,
            sweep: None,
            dl_power: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.radio.validate()?;
        if self.series.is_empty() {
            return Err(Error::Config("no series requested".into()));
        }
        for s in &self.series {
            s.validate()?;
        }
        if self.n_drops == 0 || self.n_realizations == 0 {
            return Err(Error::Config("n_drops and n_realizations must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() || sweep.contains(&0) {
                return Err(Error::Config("sweep must list positive AP counts".into()));
            }
        }
        Ok(())
    }

    pub fn power_for(&self, series: &Series) -> PowerMode {
        self.dl_power.unwrap_or_else(|| series.default_power())
    }

    fn needs_csi_loop(&self) -> bool {
        self.series.iter().any(|s| {
            s.bound == Bound::Csi || (s.bound == Bound::DlHardening && s.scheme == Scheme::Mmse)
        })
    }
}

/// Large-scale quantities shared by every realization of a drop.
#[derive(Debug, Clone)]
pub struct DropContext {
    pub profile: LargeScaleProfile,
    pub snr: SnrSet,
    pub stats: EstimationStats,
    pub z: NoiseInterferenceDiag,
    pub b: CoefficientMatrix,
    pub a: CoefficientMatrix,
    pub mr: ScalarProfile,
    pub rcmmse: ScalarProfile,
    pub gmr: ScalarProfile,
}

impl DropContext {
    pub fn new(profile: LargeScaleProfile, snr: SnrSet) -> Result<Self> {
        let beta = &profile.beta;
        let stats = estimation_stats(beta, snr.rho_p);
        let z = noise_interference_diag(&stats, snr.rho_u);
        let b = compute_b(beta, snr.rho_p, snr.rho_u)?;
        let a = compute_a(beta, snr.rho_p, snr.rho_u)?;
        let mr = mr_profile(beta, &stats);
        let rcmmse = rcmmse_profile(beta, &stats, &z, &b);
        let gmr = gmr_profile(beta, &stats, snr.rho_u, &a);
        Ok(Self { profile, snr, stats, z, b, a, mr, rcmmse, gmr })
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.profile.beta
    }

    /// Deterministic profile of a statistics-based scheme.
    pub fn scalar_profile(&self, scheme: Scheme) -> Option<&ScalarProfile> {
        match scheme {
            Scheme::Mr => Some(&self.mr),
            Scheme::RcMmse => Some(&self.rcmmse),
            Scheme::Gmr => Some(&self.gmr),
            Scheme::Mmse => None,
        }
    }

    /// Centralized MMSE combiner, up to a positive scale. The K x K form is
    /// used whenever it is the smaller system.
    pub fn mmse_vectors(&self, est: &ChannelEstimate<'_>) -> Result<DMatrix<C64>> {
        let (m, k) = self.beta().shape();
        let set = if k < m {
            mmse_combiner_dual(est, &self.z)?
        } else {
            mmse_combiner(est, &self.z)?
        };
        Ok(set.v)
    }
}

/// SE of one UE with its Monte Carlo standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEstimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop_index: u64,
    /// Per requested series, one entry per UE.
    pub se: Vec<(Series, Vec<SeEstimate>)>,
    /// Fraction of realizations on which MMSE had the largest CSI SINR for
    /// every UE among the requested CSI series. `None` without MMSE-c:csi.
    pub mmse_dominance: Option<f64>,
}

impl DropResult {
    pub fn series(&self, series: &Series) -> Option<&[SeEstimate]> {
        self.se.iter().find(|(s, _)| s == series).map(|(_, v)| v.as_slice())
    }
}

pub fn drop_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run_drop(cfg: &ExperimentConfig, drop_index: u64) -> Result<DropResult> {
    run_drop_on_stream(cfg, drop_index, drop_index)
}

fn run_drop_on_stream(cfg: &ExperimentConfig, drop_index: u64, stream: u64) -> Result<DropResult> {
    cfg.validate()?;
    let mut rng = drop_rng(cfg.seed, stream);
    let profile = generate_profile(&cfg.scenario, &cfg.radio, &mut rng)?;
    let ctx = DropContext::new(profile, SnrSet::for_normalized_gains(&cfg.radio))?;
    evaluate_drop(cfg, &ctx, drop_index, &mut rng)
}

/// Scores every requested series on a prepared drop.
pub fn evaluate_drop(
    cfg: &ExperimentConfig,
    ctx: &DropContext,
    drop_index: u64,
    rng: &mut ChaCha8Rng,
) -> Result<DropResult> {
    let beta = ctx.beta();
    let (m, k) = beta.shape();
    let snr = ctx.snr;
    let ul_prelog = cfg.radio.ul_prelog();
    let dl_prelog = cfg.radio.dl_prelog();

    let csi_series: Vec<Series> =
        cfg.series.iter().copied().filter(|s| s.bound == Bound::Csi).collect();
    let want_mmse_dl = cfg
        .series
        .iter()
        .any(|s| s.bound == Bound::DlHardening && s.scheme == Scheme::Mmse);
    let track_dominance = csi_series.iter().any(|s| s.scheme == Scheme::Mmse) && csi_series.len() > 1;

    let mut csi_acc = vec![vec![RunningMean::default(); k]; csi_series.len()];
    let mut mmse_entry_power = DMatrix::<f64>::zeros(m, k);
    let mut dominated = 0usize;

    if cfg.needs_csi_loop() {
        for _ in 0..cfg.n_realizations {
            let h = sample_channels(beta, rng);
            let obs = despread_pilot(&h, snr.rho_p, rng);
            let est = mmse_estimate(&obs, &ctx.stats, beta);
            let mmse_v = if csi_series.iter().any(|s| s.scheme == Scheme::Mmse) || want_mmse_dl {
                Some(ctx.mmse_vectors(&est)?)
            } else {
                None
            };
            if let Some(v) = &mmse_v {
                if want_mmse_dl {
                    mmse_entry_power += v.map(|x| x.norm_sqr());
                }
            }
            let mut sinrs = Vec::with_capacity(csi_series.len());
            for (slot, series) in csi_series.iter().enumerate() {
                let sinr = match ctx.scalar_profile(series.scheme) {
                    Some(p) => ul_sinr_csi(&profile_vectors(p, &obs), &est.hhat, &ctx.z),
                    None => ul_sinr_csi(mmse_v.as_ref().expect("MMSE computed"), &est.hhat, &ctx.z),
                };
                for ue in 0..k {
                    csi_acc[slot][ue].push(se_from_sinr(sinr[ue], ul_prelog));
                }
                sinrs.push((series.scheme, sinr));
            }
            if track_dominance {
                let best = &sinrs.iter().find(|(s, _)| *s == Scheme::Mmse).expect("MMSE present").1;
                let ok = sinrs.iter().all(|(_, other)| {
                    (0..k).all(|ue| best[ue] >= other[ue] * (1.0 - 1e-9))
                });
                if ok {
                    dominated += 1;
                }
            }
        }
    }

    let mut se = Vec::with_capacity(cfg.series.len());
    for series in &cfg.series {
        let values: Vec<SeEstimate> = match series.bound {
            Bound::Csi => {
                let slot = csi_series.iter().position(|s| s == series).expect("csi slot");
                csi_acc[slot]
                    .iter()
                    .map(|acc| SeEstimate { mean: acc.mean(), std_error: acc.std_error() })
                    .collect()
            }
            Bound::Uatf => {
                let profile = ctx.scalar_profile(series.scheme).ok_or(Error::MissingProfile)?;
                uatf_sinr_closed_form(profile, beta, &ctx.stats, snr.rho_u)
                    .iter()
                    .map(|s| SeEstimate { mean: se_from_sinr(*s, ul_prelog), std_error: 0.0 })
                    .collect()
            }
            Bound::DlHardening => {
                let eta = power_allocation(cfg.power_for(series), beta);
                let moments = match ctx.scalar_profile(series.scheme) {
                    Some(p) => {
                        let d = precoder_profile(p, &ctx.stats, &eta, series.mode)?;
                        dl_moments_closed_form(&d, beta, &ctx.stats)
                    }
                    None => {
                        let power = &mmse_entry_power / cfg.n_realizations as f64;
                        let scale = duality_scaling(&power, &eta, series.mode)?;
                        dl_moments_mc(
                            |est, _| Ok(ctx.mmse_vectors(est)?.zip_map(&scale, |v, s| v * s)),
                            beta,
                            &ctx.stats,
                            snr.rho_p,
                            cfg.n_realizations,
                            rng,
                        )?
                    }
                };
                moments
                    .iter()
                    .map(|mo| SeEstimate {
                        mean: se_from_sinr(mo.sinr(snr.rho_d), dl_prelog),
                        std_error: 0.0,
                    })
                    .collect()
            }
        };
        se.push((*series, values));
    }

    Ok(DropResult {
        drop_index,
        se,
        mmse_dominance: track_dominance.then(|| dominated as f64 / cfg.n_realizations as f64),
    })
}

/// Runs drops `0..n` in parallel and returns them in index order.
pub fn run_drops(cfg: &ExperimentConfig) -> Result<Vec<DropResult>> {
    cfg.validate()?;
    (0..cfg.n_drops as u64)
        .into_par_iter()
        .map(|d| run_drop(cfg, d))
        .collect()
}

/// Empirical CDF of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSeries {
    pub series: Series,
    /// Sorted sample values.
    pub values: Vec<f64>,
    /// `probs[i] = (i + 1) / n`.
    pub probs: Vec<f64>,
}

impl CdfSeries {
    pub fn from_samples(series: Series, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let probs = (1..=values.len()).map(|i| i as f64 / n).collect();
        Self { series, values, probs }
    }

    pub fn median(&self) -> f64 {
        median(&self.values)
    }
}

/// Median of already sorted values.
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Pools per-UE average SEs of all drops, one CDF per series.
pub fn cdf_from_drops(cfg: &ExperimentConfig, drops: &[DropResult]) -> Vec<CdfSeries> {
    cfg.series
        .iter()
        .map(|s| {
            let values = drops
                .iter()
                .flat_map(|d| d.series(s).expect("series evaluated").iter().map(|e| e.mean))
                .collect();
            CdfSeries::from_samples(*s, values)
        })
        .collect()
}

pub fn run_cdf_experiment(cfg: &ExperimentConfig) -> Result<Vec<CdfSeries>> {
    let drops = run_drops(cfg)?;
    Ok(cdf_from_drops(cfg, &drops))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub series: Series,
    pub m: usize,
    /// SE averaged over UEs and drops.
    pub avg_se: f64,
}

/// Average SE per UE for every AP count in the sweep.
///
/// Point `j` of the sweep uses streams `(j << 32) | drop`, so a sweep with a
/// single entry reproduces [`run_drops`].
pub fn run_m_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("no sweep values configured".into()))?;
    let mut points = Vec::new();
    for (j, &m) in sweep.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        point_cfg.scenario.m = m;
        let drops: Vec<DropResult> = (0..cfg.n_drops as u64)
            .into_par_iter()
            .map(|d| run_drop_on_stream(&point_cfg, d, ((j as u64) << 32) | d))
            .collect::<Result<_>>()?;
        for s in &cfg.series {
            let mut total = 0.0;
            let mut count = 0usize;
            for d in &drops {
                for e in d.series(s).expect("series evaluated") {
                    total += e.mean;
                    count += 1;
                }
            }
            points.push(SweepPoint { series: *s, m, avg_se: total / count as f64 });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioConfig { m: 16, k: 4, side_m: 250.0, ..Default::default() },
            n_drops: 3,
            n_realizations: 20,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn series_labels_round_trip() {
        for s in UL_CDF_SERIES.iter().chain(&DL_CDF_SERIES) {
            assert_eq!(s.to_string().parse::<Series>().unwrap(), *s);
        }
        assert!("MMSE-d:csi".parse::<Series>().is_err());
        assert!("MMSE-c:uatf".parse::<Series>().is_err());
        assert!("GMR-d:csi".parse::<Series>().is_err());
        assert!("GMR-x:csi".parse::<Series>().is_err());
    }

    #[test]
    fn mr_uatf_drop_has_k_nonnegative_values() {
        let cfg = ExperimentConfig {
            series: vec![Series::new(Scheme::Mr, Mode::Distributed, Bound::Uatf)],
            ..small_cfg()
        };
        let r = run_drop(&cfg, 0).unwrap();
        let v = r.series(&cfg.series[0]).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|e| e.mean >= 0.0));
    }

    #[test]
    fn drops_are_reproducible() {
        let mut cfg = small_cfg();
        cfg.series.extend(DL_CDF_SERIES);
        assert_eq!(run_drop(&cfg, 2).unwrap(), run_drop(&cfg, 2).unwrap());
        assert_ne!(run_drop(&cfg, 1).unwrap(), run_drop(&cfg, 2).unwrap());
    }

    #[test]
    fn mmse_dominates_rcmmse_per_ue() {
        let cfg = ExperimentConfig {
            series: vec![
                Series::new(Scheme::Mmse, Mode::Centralized, Bound::Csi),
                Series::new(Scheme::RcMmse, Mode::Centralized, Bound::Csi),
            ],
            n_realizations: 200,
            ..small_cfg()
        };
        let r = run_drop(&cfg, 0).unwrap();
        assert_eq!(r.mmse_dominance, Some(1.0));
        let mmse = r.series(&cfg.series[0]).unwrap();
        let rc = r.series(&cfg.series[1]).unwrap();
        for (a, b) in mmse.iter().zip(rc) {
            assert!(a.mean + 3.0 * a.std_error >= b.mean - 3.0 * b.std_error);
        }
    }

    #[test]
    fn cdf_counts_and_shape() {
        let cfg = ExperimentConfig { n_drops: 2, ..small_cfg() };
        let cdfs = run_cdf_experiment(&cfg).unwrap();
        assert_eq!(cdfs.len(), 6);
        for c in &cdfs {
            assert_eq!(c.values.len(), 8);
            assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
            assert!(c.probs.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*c.probs.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn empirical_cdf_definition() {
        let s = Series::new(Scheme::Mr, Mode::Distributed, Bound::Uatf);
        let c = CdfSeries::from_samples(s, vec![3.0, 1.0, 2.0]);
        assert_eq!(c.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(c.probs, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(c.median(), 2.0);
    }

    #[test]
    fn single_point_sweep_matches_drop_average() {
        let cfg = ExperimentConfig { sweep: Some(vec![16]), ..small_cfg() };
        let points = run_m_sweep(&cfg).unwrap();
        let drops = run_drops(&cfg).unwrap();
        for p in points {
            let vals: Vec<f64> = drops
                .iter()
                .flat_map(|d| d.series(&p.series).unwrap().iter().map(|e| e.mean))
                .collect();
            let avg = vals.iter().sum::<f64>() / vals.len() as f64;
            assert_eq!(p.avg_se, avg);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_cfg();
        cfg.n_drops = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.sweep = Some(vec![]);
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.series = vec![Series::new(Scheme::Mmse, Mode::Distributed, Bound::Csi)];
        assert!(cfg.validate().is_err());
    }
}
