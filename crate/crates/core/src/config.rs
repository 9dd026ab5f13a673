//! Experiment configuration files.
//!
//! A config file is TOML with three optional sections whose keys mirror the
//! fields of [`ScenarioConfig`], [`RadioConfig`] and [`ExperimentConfig`].
//! Missing keys keep the defaults of the command being run.
//!
//! ```toml
//! [scenario]
//! m = 100
//! k = 20
//! side_m = 250.0
//! ue_placement = "centered_cluster"
//! cluster_spacing_m = 5.0
//!
//! [radio]
//! p_ul_mw = 100.0
//!
//! [experiment]
//! series = ["MMSE-c:csi", "GMR-d:uatf"]
//! n_drops = 200
//! seed = 1
//! sweep = [25, 50, 100]
//! dl_power = "per_ap_sqrt_beta"
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, Series};
use crate::precoding::PowerMode;
use crate::scenario::UePlacement;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub radio: RadioSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub side_m: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma_chi_db: Option<f64>,
    /// `"uniform"` or `"centered_cluster"`.
    pub ue_placement: Option<String>,
    pub cluster_spacing_m: Option<f64>,
    pub d_min_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub carrier_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub p_ul_mw: Option<f64>,
    pub p_dl_mw: Option<f64>,
    pub tau_c: Option<u32>,
    pub tau_p: Option<u32>,
    pub tau_d: Option<u32>,
    pub tau_u: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub series: Option<Vec<String>>,
    pub n_drops: Option<usize>,
    pub n_realizations: Option<usize>,
    pub seed: Option<u64>,
    pub sweep: Option<Vec<usize>>,
    pub dl_power: Option<PowerMode>,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies the file on top of `base` and validates the result.
    pub fn resolve(self, mut base: ExperimentConfig) -> Result<ExperimentConfig> {
        let s = self.scenario;
        let sc = &mut base.scenario;
        set!(sc.m, s.m);
        set!(sc.k, s.k);
        set!(sc.side_m, s.side_m);
        set!(sc.alpha, s.alpha);
        set!(sc.sigma_chi_db, s.sigma_chi_db);
        set!(sc.d_min_m, s.d_min_m);
        let current_spacing = match sc.ue_placement {
            UePlacement::CenteredCluster { spacing } => Some(spacing),
            UePlacement::Uniform => None,
        };
        match s.ue_placement.as_deref() {
            Some("uniform") => {
                if s.cluster_spacing_m.is_some() {
                    return Err(Error::Config("cluster_spacing_m requires ue_placement = \"centered_cluster\"".into()));
                }
                sc.ue_placement = UePlacement::Uniform;
            }
            Some("centered_cluster") => {
                let spacing = s.cluster_spacing_m.or(current_spacing).ok_or_else(|| {
                    Error::Config("centered_cluster needs cluster_spacing_m".into())
                })?;
                sc.ue_placement = UePlacement::CenteredCluster { spacing };
            }
            Some(other) => return Err(Error::Config(format!("unknown ue_placement '{other}'"))),
            None => {
                if let Some(spacing) = s.cluster_spacing_m {
                    if current_spacing.is_none() {
                        return Err(Error::Config("cluster_spacing_m requires ue_placement = \"centered_cluster\"".into()));
                    }
                    sc.ue_placement = UePlacement::CenteredCluster { spacing };
                }
            }
        }

        let r = self.radio;
        let rc = &mut base.radio;
        set!(rc.carrier_hz, r.carrier_hz);
        set!(rc.bandwidth_hz, r.bandwidth_hz);
        set!(rc.noise_figure_db, r.noise_figure_db);
        set!(rc.p_ul_mw, r.p_ul_mw);
        set!(rc.p_dl_mw, r.p_dl_mw);
        set!(rc.tau_c, r.tau_c);
        set!(rc.tau_p, r.tau_p);
        set!(rc.tau_d, r.tau_d);
        set!(rc.tau_u, r.tau_u);

        let e = self.experiment;
        if let Some(labels) = e.series {
            base.series = labels.iter().map(|l| l.parse::<Series>()).collect::<Result<_>>()?;
        }
        set!(base.n_drops, e.n_drops);
        set!(base.n_realizations, e.n_realizations);
        set!(base.seed, e.seed);
        if e.sweep.is_some() {
            base.sweep = e.sweep;
        }
        if e.dl_power.is_some() {
            base.dl_power = e.dl_power;
        }
        base.validate()?;
        Ok(base)
    }
}

/// First 16 hex digits of the SHA-256 of the resolved config as JSON.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&json);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
