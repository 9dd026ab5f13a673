//! Downlink precoding through uplink-downlink duality.
//!
//! Precoders reuse the uplink combining direction. In centralized operation
//! each UE's vector is normalized to unit average norm and scaled by
//! `sqrt(eta_k)`. In distributed operation every AP normalizes its own
//! coefficient and scales it by `sqrt(eta_mk)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combining::{CombinerSet, ScalarProfile};
use crate::error::{Error, Result};
use crate::estimation::{EstimationStats, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Centralized,
    Distributed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Centralized => "centralized",
            Mode::Distributed => "distributed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// `eta_mk = 1 / K`
    NetworkWideEqual,
    /// `eta_mk = sqrt(beta_mk) / sum_i sqrt(beta_mi)`
    PerApSqrtBeta,
}

impl PowerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PowerMode::NetworkWideEqual => "network_wide_equal",
            PowerMode::PerApSqrtBeta => "per_ap_sqrt_beta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// M x K power fractions.
    pub eta: DMatrix<f64>,
    pub mode: PowerMode,
}

impl PowerAllocation {
    /// Per-UE share for centralized precoding, the AP average of `eta_mk`.
    pub fn per_ue(&self, ue: usize) -> f64 {
        self.eta.column(ue).mean()
    }
}

pub fn power_allocation(mode: PowerMode, beta: &DMatrix<f64>) -> PowerAllocation {
    let (m, k) = beta.shape();
    let eta = match mode {
        PowerMode::NetworkWideEqual => DMatrix::from_element(m, k, 1.0 / k as f64),
        PowerMode::PerApSqrtBeta => {
            let mut eta = beta.map(f64::sqrt);
            for mut row in eta.row_iter_mut() {
                let total = row.sum();
                row /= total;
            }
            eta
        }
    };
    PowerAllocation { eta, mode }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// Column k is the precoding vector of UE k.
    pub w: DMatrix<C64>,
}

/// Per-entry scale factors turning combiners into precoders.
///
/// `entry_power` holds `E{|v_mk|^2}`; its column sums are `E{||v_k||^2}`.
pub fn duality_scaling(
    entry_power: &DMatrix<f64>,
    eta: &PowerAllocation,
    mode: Mode,
) -> Result<DMatrix<f64>> {
    let (m, k) = entry_power.shape();
    let mut scale = DMatrix::zeros(m, k);
    for ue in 0..k {
        match mode {
            Mode::Centralized => {
                let norm_sq = entry_power.column(ue).sum();
                if norm_sq.is_nan() || norm_sq <= 0.0 {
                    return Err(Error::ZeroNorm { ue, ap: None });
                }
                let s = (eta.per_ue(ue) / norm_sq).sqrt();
                scale.column_mut(ue).fill(s);
            }
            Mode::Distributed => {
                for ap in 0..m {
                    let p = entry_power[(ap, ue)];
                    if p.is_nan() || p <= 0.0 {
                        return Err(Error::ZeroNorm { ue, ap: Some(ap) });
                    }
                    scale[(ap, ue)] = (eta.eta[(ap, ue)] / p).sqrt();
                }
            }
        }
    }
    Ok(scale)
}

pub fn duality_precoder(
    combiner: &CombinerSet,
    entry_power: &DMatrix<f64>,
    eta: &PowerAllocation,
    mode: Mode,
) -> Result<PrecoderSet> {
    let scale = duality_scaling(entry_power, eta, mode)?;
    Ok(PrecoderSet { w: combiner.v.zip_map(&scale, |v, s| v * s) })
}

/// `E{|v_mk|^2} = c_mk^2 psi_m` for a profile combiner.
pub fn profile_entry_power(profile: &ScalarProfile, stats: &EstimationStats) -> DMatrix<f64> {
    DMatrix::from_fn(profile.nrows(), profile.ncols(), |ap, ue| {
        profile[(ap, ue)].powi(2) * stats.psi[ap]
    })
}

/// Profile of the duality precoder built from a profile combiner.
pub fn precoder_profile(
    profile: &ScalarProfile,
    stats: &EstimationStats,
    eta: &PowerAllocation,
    mode: Mode,
) -> Result<ScalarProfile> {
    let scale = duality_scaling(&profile_entry_power(profile, stats), eta, mode)?;
    Ok(profile.component_mul(&scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combining::{apply_profile, mr_profile};
    use crate::estimation::{despread_pilot, estimation_stats, sample_channels, PilotObservation};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_allocation() {
        let beta = DMatrix::from_element(3, 4, 0.7);
        let p = power_allocation(PowerMode::NetworkWideEqual, &beta);
        assert!(p.eta.iter().all(|e| *e == 0.25));
    }

    #[test]
    fn sqrt_beta_allocation() {
        let beta = DMatrix::from_row_slice(1, 2, &[4.0, 1.0]);
        let p = power_allocation(PowerMode::PerApSqrtBeta, &beta);
        assert!((p.eta[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.eta[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);

        let single = DMatrix::from_column_slice(3, 1, &[0.1, 5.0, 1e-4]);
        let p = power_allocation(PowerMode::PerApSqrtBeta, &single);
        assert!(p.eta.iter().all(|e| *e == 1.0));

        let beta = DMatrix::from_row_slice(2, 3, &[0.3, 1.2, 0.05, 2.0, 0.7, 0.4]);
        let p = power_allocation(PowerMode::PerApSqrtBeta, &beta);
        for row in p.eta.row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn centralized_hand_example() {
        let v = CombinerSet { v: DMatrix::from_element(1, 1, C64::from(0.6)), profile: None };
        let power = DMatrix::from_element(1, 1, 0.36);
        let eta = PowerAllocation { eta: DMatrix::from_element(1, 1, 0.5), mode: PowerMode::NetworkWideEqual };
        let w = duality_precoder(&v, &power, &eta, Mode::Centralized).unwrap();
        assert!((w.w[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_norm_is_an_error() {
        let v = CombinerSet { v: DMatrix::zeros(2, 1), profile: None };
        let eta = power_allocation(PowerMode::NetworkWideEqual, &DMatrix::from_element(2, 1, 1.0));
        let zero = DMatrix::zeros(2, 1);
        assert!(matches!(
            duality_precoder(&v, &zero, &eta, Mode::Centralized),
            Err(Error::ZeroNorm { ue: 0, ap: None })
        ));
        assert!(matches!(
            duality_precoder(&v, &zero, &eta, Mode::Distributed),
            Err(Error::ZeroNorm { ue: 0, ap: Some(0) })
        ));
    }

    #[test]
    fn unit_norm_combiner_passes_through() {
        let v = CombinerSet { v: DMatrix::from_column_slice(2, 1, &[C64::new(0.3, 0.4), C64::new(-0.1, 0.0)]), profile: None };
        let power = DMatrix::from_column_slice(2, 1, &[0.75, 0.25]);
        let eta = power_allocation(PowerMode::NetworkWideEqual, &DMatrix::from_element(2, 1, 1.0));
        let w = duality_precoder(&v, &power, &eta, Mode::Centralized).unwrap();
        assert_eq!(w.w, v.v);
    }

    #[test]
    fn average_power_meets_budget() {
        let beta = DMatrix::from_row_slice(3, 2, &[0.3, 1.2, 2.0, 0.7, 0.1, 0.1]);
        let stats = estimation_stats(&beta, 3.0);
        let profile = mr_profile(&beta, &stats);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for (pm, mode) in [
            (PowerMode::NetworkWideEqual, Mode::Centralized),
            (PowerMode::PerApSqrtBeta, Mode::Distributed),
        ] {
            let eta = power_allocation(pm, &beta);
            let d = precoder_profile(&profile, &stats, &eta, mode).unwrap();
            let n = 100_000;
            let mut per_entry = DMatrix::<f64>::zeros(3, 2);
            for _ in 0..n {
                let h = sample_channels(&beta, &mut rng);
                let obs = despread_pilot(&h, 3.0, &mut rng);
                let w = apply_profile(&d, &obs).v;
                per_entry += w.map(|x| x.norm_sqr());
            }
            per_entry /= n as f64;
            match mode {
                Mode::Centralized => {
                    for ue in 0..2 {
                        assert!((per_entry.column(ue).sum() / eta.per_ue(ue) - 1.0).abs() < 0.02);
                    }
                    assert!((per_entry.sum() - 1.0).abs() < 0.02);
                }
                Mode::Distributed => {
                    for ap in 0..3 {
                        assert!((per_entry.row(ap).sum() - 1.0).abs() < 0.02);
                    }
                }
            }
        }
    }

    #[test]
    fn centralized_precoder_keeps_direction() {
        let profile = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 0.25, 2.0]);
        let stats = EstimationStats {
            psi: DVector::from_column_slice(&[1.0, 2.0]),
            gamma: DMatrix::zeros(2, 2),
            eps: DMatrix::zeros(2, 2),
        };
        let obs = PilotObservation { o: DVector::from_column_slice(&[C64::new(1.0, -1.0), C64::new(0.5, 2.0)]) };
        let v = apply_profile(&profile, &obs);
        let eta = power_allocation(PowerMode::NetworkWideEqual, &DMatrix::from_element(2, 2, 1.0));
        let w = duality_precoder(&v, &profile_entry_power(&profile, &stats), &eta, Mode::Centralized).unwrap();
        for ue in 0..2 {
            let ratio = w.w[(0, ue)] / v.v[(0, ue)];
            assert!(ratio.re > 0.0);
            assert!((w.w[(1, ue)] - v.v[(1, ue)] * ratio).norm() < 1e-14);
        }
    }
}
