//! Network geometry and large-scale fading.
//!
//! APs are dropped uniformly in a square of side `side_m`. UEs are either
//! dropped uniformly as well or placed on a horizontal line through the
//! centre of the square. Link gains follow a log-distance model with
//! log-normal shadowing and are expressed relative to the receiver noise
//! power, so that a gain of 1 means 0 dB SNR at 1 mW transmit power.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path loss at the 1 m reference distance, in dB.
pub const PATH_LOSS_INTERCEPT_DB: f64 = -35.3;
/// Thermal noise density at room temperature, in dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UePlacement {
    Uniform,
    /// UEs on a line through the centre, `spacing` metres apart.
    CenteredCluster { spacing: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of single-antenna APs.
    pub m: usize,
    /// Number of single-antenna UEs, all sharing one pilot.
    pub k: usize,
    /// Side of the square coverage area, metres.
    pub side_m: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Shadowing standard deviation, dB.
    pub sigma_chi_db: f64,
    pub ue_placement: UePlacement,
    /// Distances below this are clamped, metres.
    pub d_min_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            m: 100,
            k: 20,
            side_m: 250.0,
            alpha: 3.76,
            sigma_chi_db: 10.0,
            ue_placement: UePlacement::Uniform,
            d_min_m: 1.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.side_m.is_finite() && self.side_m > 0.0) {
            return Err(Error::Config("side_m must be positive".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(self.sigma_chi_db.is_finite() && self.sigma_chi_db >= 0.0) {
            return Err(Error::Config("sigma_chi_db must be nonnegative".into()));
        }
        if !(self.d_min_m.is_finite() && self.d_min_m > 0.0) {
            return Err(Error::Config("d_min_m must be positive".into()));
        }
        if let UePlacement::CenteredCluster { spacing } = self.ue_placement {
            if !(spacing.is_finite() && spacing > 0.0) {
                return Err(Error::Config("cluster spacing must be positive".into()));
            }
            if (self.k - 1) as f64 * spacing > self.side_m {
                return Err(Error::Config(format!(
                    "cluster of {} UEs spaced {} m does not fit in a {} m square",
                    self.k, spacing, self.side_m
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub p_ul_mw: f64,
    pub p_dl_mw: f64,
    /// Coherence block length in channel uses.
    pub tau_c: u32,
    pub tau_p: u32,
    pub tau_d: u32,
    pub tau_u: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 2e9,
            bandwidth_hz: 20e6,
            noise_figure_db: 7.0,
            p_ul_mw: 100.0,
            p_dl_mw: 200.0,
            tau_c: 200,
            tau_p: 1,
            // (tau_c - tau_p) / 2 rounded down to whole channel uses
            tau_d: 99,
            tau_u: 99,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("p_ul_mw", self.p_ul_mw),
            ("p_dl_mw", self.p_dl_mw),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::Config("noise_figure_db must be finite".into()));
        }
        if self.tau_p == 0 || self.tau_d == 0 || self.tau_u == 0 {
            return Err(Error::Config("tau_p, tau_d and tau_u must be positive".into()));
        }
        if self.tau_c < self.tau_p + self.tau_d + self.tau_u {
            return Err(Error::Config(format!(
                "tau_c = {} is shorter than tau_p + tau_d + tau_u = {}",
                self.tau_c,
                self.tau_p + self.tau_d + self.tau_u
            )));
        }
        Ok(())
    }

    /// Receiver noise power in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    pub fn ul_prelog(&self) -> f64 {
        self.tau_u as f64 / self.tau_c as f64
    }

    pub fn dl_prelog(&self) -> f64 {
        self.tau_d as f64 / self.tau_c as f64
    }
}

/// Linear SNRs with the noise normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSet {
    pub rho_p: f64,
    pub rho_u: f64,
    pub rho_d: f64,
}

impl SnrSet {
    pub fn new(rho_p: f64, rho_u: f64, rho_d: f64) -> Result<Self> {
        for (name, v) in [("rho_p", rho_p), ("rho_u", rho_u), ("rho_d", rho_d)] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be strictly positive")));
            }
        }
        Ok(Self { rho_p, rho_u, rho_d })
    }

    /// SNRs to pair with noise-normalized gains from [`large_scale_fading`]:
    /// the transmit powers in mW, with the pilot energy spread over `tau_p`.
    pub fn for_normalized_gains(radio: &RadioConfig) -> Self {
        Self {
            rho_p: radio.tau_p as f64 * radio.p_ul_mw,
            rho_u: radio.p_ul_mw,
            rho_d: radio.p_dl_mw,
        }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Transmit-power-over-noise ratios for a unit (0 dB) channel gain.
///
/// These are the SNRs to use with raw path gains. Gains from
/// [`large_scale_fading`] already include the noise, see
/// [`SnrSet::for_normalized_gains`].
pub fn effective_snrs(radio: &RadioConfig) -> SnrSet {
    let noise_mw = db_to_linear(radio.noise_power_dbm());
    let rho_u = radio.p_ul_mw / noise_mw;
    SnrSet {
        rho_p: radio.tau_p as f64 * rho_u,
        rho_u,
        rho_d: radio.p_dl_mw / noise_mw,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub ap: Vec<[f64; 2]>,
    pub ue: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleProfile {
    /// M x K linear gains over noise.
    pub beta: DMatrix<f64>,
    pub positions: Positions,
}

impl LargeScaleProfile {
    pub fn m(&self) -> usize {
        self.beta.nrows()
    }

    pub fn k(&self) -> usize {
        self.beta.ncols()
    }
}

pub fn place_network<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Positions> {
    cfg.validate()?;
    let side = cfg.side_m;
    let mut uniform = |n: usize| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
            .collect()
    };
    let ap = uniform(cfg.m);
    let ue = match cfg.ue_placement {
        UePlacement::Uniform => uniform(cfg.k),
        UePlacement::CenteredCluster { spacing } => {
            let centre = side / 2.0;
            let offset = (cfg.k as f64 - 1.0) / 2.0;
            (0..cfg.k)
                .map(|k| [centre + (k as f64 - offset) * spacing, centre])
                .collect()
        }
    };
    Ok(Positions { ap, ue })
}

/// Log-distance gain in dB, relative to the noise power, without shadowing.
pub fn path_gain_db(distance_m: f64, cfg: &ScenarioConfig, radio: &RadioConfig) -> Result<f64> {
    if !distance_m.is_finite() {
        return Err(Error::NonFinite("AP-UE distance"));
    }
    let d = distance_m.max(cfg.d_min_m);
    Ok(PATH_LOSS_INTERCEPT_DB - 10.0 * cfg.alpha * d.log10() - radio.noise_power_dbm())
}

pub fn large_scale_fading<R: Rng + ?Sized>(
    positions: Positions,
    cfg: &ScenarioConfig,
    radio: &RadioConfig,
    rng: &mut R,
) -> Result<LargeScaleProfile> {
    let (m, k) = (positions.ap.len(), positions.ue.len());
    if m == 0 || k == 0 {
        return Err(Error::Dimension("empty AP or UE set".into()));
    }
    let shadow = Normal::new(0.0, cfg.sigma_chi_db)
        .map_err(|_| Error::Config("invalid shadowing deviation".into()))?;
    let mut beta = DMatrix::zeros(m, k);
    // column-major draw order: UE outer, AP inner
    for ue in 0..k {
        for ap in 0..m {
            let [ax, ay] = positions.ap[ap];
            let [ux, uy] = positions.ue[ue];
            let d = (ax - ux).hypot(ay - uy);
            let chi = shadow.sample(rng);
            let gain = db_to_linear(path_gain_db(d, cfg, radio)? + chi);
            if !(gain.is_finite() && gain > 0.0) {
                return Err(Error::NonFinite("large-scale gain"));
            }
            beta[(ap, ue)] = gain;
        }
    }
    Ok(LargeScaleProfile { beta, positions })
}

/// One topology and shadowing draw.
pub fn generate_profile<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    radio: &RadioConfig,
    rng: &mut R,
) -> Result<LargeScaleProfile> {
    let positions = place_network(cfg, rng)?;
    large_scale_fading(positions, cfg, radio, rng)
}
