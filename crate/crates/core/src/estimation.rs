//! Shared-pilot training and MMSE channel estimation.
//!
//! All K UEs transmit the same unit-norm pilot, so after despreading each AP
//! holds a single complex scalar `o_m = sum_k h_mk + n_m / sqrt(rho_p)`. Every
//! estimate at that AP is a deterministic rescaling of `o_m`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex<f64>;

/// Draws from CN(0, variance): real and imaginary parts i.i.d. N(0, variance / 2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationStats {
    /// Per-AP received pilot power `psi_m = sum_i beta_mi + 1 / rho_p`.
    pub psi: DVector<f64>,
    /// Estimate variances `gamma_mk = beta_mk^2 / psi_m`.
    pub gamma: DMatrix<f64>,
    /// Error variances `eps_mk = beta_mk - gamma_mk`.
    pub eps: DMatrix<f64>,
}

impl EstimationStats {
    pub fn m(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn k(&self) -> usize {
        self.gamma.ncols()
    }
}

pub fn estimation_stats(beta: &DMatrix<f64>, rho_p: f64) -> EstimationStats {
    let (m, k) = beta.shape();
    let psi = DVector::from_fn(m, |ap, _| beta.row(ap).sum() + 1.0 / rho_p);
    let mut gamma = DMatrix::zeros(m, k);
    let mut eps = DMatrix::zeros(m, k);
    for ue in 0..k {
        for ap in 0..m {
            let b = beta[(ap, ue)];
            let g = b * b / psi[ap];
            let e = b * ((psi[ap] - b) / psi[ap]);
            // The larger part is kept and the smaller one is recovered as
            // b minus it, which is exact (Sterbenz), so gamma + eps == beta.
            let (g, e) = if g >= e { (g, b - g) } else { (b - e, e) };
            gamma[(ap, ue)] = g;
            eps[(ap, ue)] = e;
        }
    }
    EstimationStats { psi, gamma, eps }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// M x K small-scale channel matrix.
    pub h: DMatrix<C64>,
}

pub fn sample_channels<R: Rng + ?Sized>(beta: &DMatrix<f64>, rng: &mut R) -> ChannelRealization {
    let (m, k) = beta.shape();
    let mut h = DMatrix::zeros(m, k);
    for ue in 0..k {
        for ap in 0..m {
            h[(ap, ue)] = complex_gaussian(rng, beta[(ap, ue)]);
        }
    }
    ChannelRealization { h }
}

/// Despread pilot signal `(1 / sqrt(rho_p)) phi^H y_m`, one scalar per AP.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    pub o: DVector<C64>,
}

pub fn despread_pilot<R: Rng + ?Sized>(
    channels: &ChannelRealization,
    rho_p: f64,
    rng: &mut R,
) -> PilotObservation {
    let h = &channels.h;
    let noise_scale = 1.0 / rho_p.sqrt();
    let o = DVector::from_fn(h.nrows(), |ap, _| {
        let sum: C64 = h.row(ap).iter().sum();
        sum + complex_gaussian(rng, 1.0) * noise_scale
    });
    PilotObservation { o }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate<'a> {
    /// M x K MMSE estimates.
    pub hhat: DMatrix<C64>,
    pub stats: &'a EstimationStats,
}

pub fn mmse_estimate<'a>(
    obs: &PilotObservation,
    stats: &'a EstimationStats,
    beta: &DMatrix<f64>,
) -> ChannelEstimate<'a> {
    let (m, k) = beta.shape();
    let hhat = DMatrix::from_fn(m, k, |ap, ue| obs.o[ap] * (beta[(ap, ue)] / stats.psi[ap]));
    ChannelEstimate { hhat, stats }
}
