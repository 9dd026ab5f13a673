//! SINR and spectral-efficiency bounds.
//!
//! Three bounds are available: the instantaneous-CSI uplink bound evaluated
//! per realization, the use-and-then-forget (UatF) uplink bound built from
//! channel moments, and the downlink channel-hardening bound.
//!
//! For a statistics-based combiner `v_mk = c_mk o_m` the UatF moments have a
//! closed form because `o_m` and `h_mi` are jointly Gaussian with
//! `E{o_m^* h_mi} = beta_mi` and `E{|o_m|^2 |h_mi|^2} = psi_m beta_mi + beta_mi^2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::combining::{CombinerSet, NoiseInterferenceDiag, ScalarProfile};
use crate::error::{Error, Result};
use crate::estimation::{
    despread_pilot, mmse_estimate, sample_channels, ChannelEstimate, EstimationStats,
    PilotObservation, C64,
};

/// Instantaneous uplink SINR of every UE given the estimates.
///
/// A zero combining vector has SINR 0.
pub fn ul_sinr_csi(
    v: &DMatrix<C64>,
    hhat: &DMatrix<C64>,
    z: &NoiseInterferenceDiag,
) -> DVector<f64> {
    let k = v.ncols();
    // proj[(k, i)] = v_k^H hhat_i
    let proj = v.ad_mul(hhat);
    DVector::from_fn(k, |ue, _| {
        let signal = proj[(ue, ue)].norm_sqr();
        let interference: f64 = (0..k)
            .filter(|&i| i != ue)
            .map(|i| proj[(ue, i)].norm_sqr())
            .sum();
        let noise: f64 = v.column(ue).iter().zip(z.z.iter()).map(|(x, zm)| zm * x.norm_sqr()).sum();
        let den = interference + noise;
        if signal == 0.0 || den == 0.0 {
            0.0
        } else {
            signal / den
        }
    })
}

/// Running mean and variance (Welford), used for MC averages and their
/// standard errors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMean {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

pub fn prelog(tau: u32, tau_c: u32) -> f64 {
    tau as f64 / tau_c as f64
}

pub fn se_from_sinr(sinr: f64, prelog: f64) -> f64 {
    prelog * (1.0 + sinr).log2()
}

/// Ergodic CSI-bound SE from per-realization SINR samples of one UE.
pub fn ul_se_csi(sinr_samples: &[f64], tau_u: u32, tau_c: u32) -> f64 {
    assert!(!sinr_samples.is_empty(), "at least one SINR sample is required");
    let mean = sinr_samples.iter().map(|s| (1.0 + s).log2()).sum::<f64>() / sinr_samples.len() as f64;
    prelog(tau_u, tau_c) * mean
}

/// Moments entering the UatF SINR of one UE.
#[derive(Debug, Clone, PartialEq)]
pub struct UatfMoments {
    /// `E{v_k^H h_k}`
    pub signal: C64,
    /// `E{|v_k^H h_i|^2}` for every i.
    pub second_moments: Vec<f64>,
    /// `E{||v_k||^2}`
    pub norm_sq: f64,
}

impl UatfMoments {
    pub fn sinr(&self, rho_u: f64) -> f64 {
        let signal = self.signal.norm_sqr();
        if signal == 0.0 {
            return 0.0;
        }
        let total: f64 = self.second_moments.iter().sum();
        signal / (total - signal + self.norm_sq / rho_u)
    }
}

/// Sample-mean UatF moments over fresh channel, pilot-noise and estimate draws.
///
/// `combiner` builds the combining vectors of one realization.
pub fn uatf_moments_mc<R, F>(
    mut combiner: F,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_p: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<UatfMoments>>
where
    R: Rng + ?Sized,
    F: FnMut(&ChannelEstimate<'_>, &PilotObservation) -> Result<CombinerSet>,
{
    assert!(n_samples >= 1);
    let k = beta.ncols();
    let mut signal = vec![C64::new(0.0, 0.0); k];
    let mut second = DMatrix::<f64>::zeros(k, k);
    let mut norm = vec![0.0; k];
    for _ in 0..n_samples {
        let h = sample_channels(beta, rng);
        let obs = despread_pilot(&h, rho_p, rng);
        let est = mmse_estimate(&obs, stats, beta);
        let v = combiner(&est, &obs)?.v;
        let proj = v.ad_mul(&h.h);
        for ue in 0..k {
            signal[ue] += proj[(ue, ue)];
            for i in 0..k {
                second[(ue, i)] += proj[(ue, i)].norm_sqr();
            }
            norm[ue] += v.column(ue).norm_squared();
        }
    }
    let n = n_samples as f64;
    Ok((0..k)
        .map(|ue| UatfMoments {
            signal: signal[ue] / n,
            second_moments: (0..k).map(|i| second[(ue, i)] / n).collect(),
            norm_sq: norm[ue] / n,
        })
        .collect())
}

/// Exact UatF moments of the profile combiner `v_mk = c_mk o_m`.
pub fn uatf_moments_closed_form(
    profile: &ScalarProfile,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
) -> Vec<UatfMoments> {
    let (m, k) = beta.shape();
    // coherent[(k, i)] = sum_m c_mk beta_mi
    let coherent = profile.tr_mul(beta);
    (0..k)
        .map(|ue| {
            let second_moments = (0..k)
                .map(|i| {
                    let incoherent: f64 = (0..m)
                        .map(|ap| profile[(ap, ue)].powi(2) * stats.psi[ap] * beta[(ap, i)])
                        .sum();
                    coherent[(ue, i)].powi(2) + incoherent
                })
                .collect();
            let norm_sq = (0..m).map(|ap| profile[(ap, ue)].powi(2) * stats.psi[ap]).sum();
            UatfMoments { signal: C64::from(coherent[(ue, ue)]), second_moments, norm_sq }
        })
        .collect()
}

pub fn uatf_sinr_closed_form(
    profile: &ScalarProfile,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_u: f64,
) -> DVector<f64> {
    let moments = uatf_moments_closed_form(profile, beta, stats);
    DVector::from_iterator(moments.len(), moments.iter().map(|mo| mo.sinr(rho_u)))
}

/// Closed-form UatF SINR for a combiner that carries a scalar profile.
pub fn uatf_sinr_for_combiner(
    combiner: &CombinerSet,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_u: f64,
) -> Result<DVector<f64>> {
    let profile = combiner.profile.as_ref().ok_or(Error::MissingProfile)?;
    Ok(uatf_sinr_closed_form(profile, beta, stats, rho_u))
}

/// Statistics-only design objective for diagonal weights `v_k = W_k hhat_k`.
///
/// Column k of `weights` is the diagonal of `W_k`. The value is
/// `|tr(W_k^H Gamma_k)|^2 / (sum_i |tr(Psi^{-1} R_k W_k^H R_i)|^2 + tr(W_k Gamma_k W_k^H U))`,
/// which is the UatF ratio `S / (S + I)` of the weighted combiner. Its
/// maximizer is [`crate::combining::gmr_weight_matrix`].
pub fn gmr_objective(
    weights: &DMatrix<C64>,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_u: f64,
) -> DVector<f64> {
    let (m, k) = beta.shape();
    let u: Vec<f64> = (0..m).map(|ap| beta.row(ap).sum() + 1.0 / rho_u).collect();
    DVector::from_fn(k, |ue, _| {
        let w = weights.column(ue);
        let num: C64 = (0..m).map(|ap| w[ap].conj() * stats.gamma[(ap, ue)]).sum();
        let coherent: f64 = (0..k)
            .map(|i| {
                (0..m)
                    .map(|ap| w[ap].conj() * (beta[(ap, ue)] * beta[(ap, i)] / stats.psi[ap]))
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum();
        let quad: f64 = (0..m).map(|ap| w[ap].norm_sqr() * stats.gamma[(ap, ue)] * u[ap]).sum();
        let den = coherent + quad;
        if den == 0.0 {
            0.0
        } else {
            num.norm_sqr() / den
        }
    })
}

/// Moments entering the downlink hardening SINR of one UE.
#[derive(Debug, Clone, PartialEq)]
pub struct DlMoments {
    /// `E{h_k^H w_k}`
    pub signal: C64,
    /// `E{|h_k^H w_i|^2}` for every i.
    pub second_moments: Vec<f64>,
}

pub fn dl_sinr_hardening(signal: C64, second_moments: &[f64], rho_d: f64) -> f64 {
    let s = signal.norm_sqr();
    if s == 0.0 {
        return 0.0;
    }
    let total: f64 = second_moments.iter().sum();
    s / (total - s + 1.0 / rho_d)
}

impl DlMoments {
    pub fn sinr(&self, rho_d: f64) -> f64 {
        dl_sinr_hardening(self.signal, &self.second_moments, rho_d)
    }
}

/// Exact DL moments of profile precoders `w_mi = d_mi o_m`.
pub fn dl_moments_closed_form(
    precoder_profile: &ScalarProfile,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
) -> Vec<DlMoments> {
    let (m, k) = beta.shape();
    // coherent[(i, k)] = sum_m d_mi beta_mk
    let coherent = precoder_profile.tr_mul(beta);
    (0..k)
        .map(|ue| DlMoments {
            signal: C64::from(coherent[(ue, ue)]),
            second_moments: (0..k)
                .map(|i| {
                    let incoherent: f64 = (0..m)
                        .map(|ap| precoder_profile[(ap, i)].powi(2) * stats.psi[ap] * beta[(ap, ue)])
                        .sum();
                    coherent[(i, ue)].powi(2) + incoherent
                })
                .collect(),
        })
        .collect()
}

/// Sample-mean DL moments; `precoder` maps one realization to the M x K
/// precoding matrix.
pub fn dl_moments_mc<R, F>(
    mut precoder: F,
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_p: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<DlMoments>>
where
    R: Rng + ?Sized,
    F: FnMut(&ChannelEstimate<'_>, &PilotObservation) -> Result<DMatrix<C64>>,
{
    assert!(n_samples >= 1);
    let k = beta.ncols();
    let mut signal = vec![C64::new(0.0, 0.0); k];
    let mut second = DMatrix::<f64>::zeros(k, k);
    for _ in 0..n_samples {
        let h = sample_channels(beta, rng);
        let obs = despread_pilot(&h, rho_p, rng);
        let est = mmse_estimate(&obs, stats, beta);
        let w = precoder(&est, &obs)?;
        // proj[(k, i)] = h_k^H w_i
        let proj = h.h.ad_mul(&w);
        for ue in 0..k {
            signal[ue] += proj[(ue, ue)];
            for i in 0..k {
                second[(ue, i)] += proj[(ue, i)].norm_sqr();
            }
        }
    }
    let n = n_samples as f64;
    Ok((0..k)
        .map(|ue| DlMoments {
            signal: signal[ue] / n,
            second_moments: (0..k).map(|i| second[(ue, i)] / n).collect(),
        })
        .collect())
}
