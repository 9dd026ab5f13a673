//! Uplink receive combining.
//!
//! MR, RC-MMSE and GMR combiners only use statistics plus the despread pilot,
//! so for each of them `v_mk = c_mk * o_m` with a deterministic real profile
//! `c`. Profiles depend on large-scale quantities only and are computed once
//! per drop. The centralized MMSE combiner needs the full estimate matrix and
//! is recomputed for every realization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::estimation::{ChannelEstimate, EstimationStats, PilotObservation, C64};

/// Diagonal of `Z`: `z_m = sum_i eps_mi + 1 / rho_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseInterferenceDiag {
    pub z: DVector<f64>,
}

pub fn noise_interference_diag(stats: &EstimationStats, rho_u: f64) -> NoiseInterferenceDiag {
    let z = DVector::from_fn(stats.m(), |ap, _| stats.eps.row(ap).sum() + 1.0 / rho_u);
    NoiseInterferenceDiag { z }
}

/// A K x K Gram-type matrix together with the inverse of `mat + I / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub mat: DMatrix<f64>,
    pub coeffs: DMatrix<f64>,
}

/// `mat = (1/M) X^T X` with `X_mk = beta_mk / sqrt(denom_m)`.
fn gram_coefficients(
    beta: &DMatrix<f64>,
    denom: &DVector<f64>,
    what: &'static str,
) -> Result<CoefficientMatrix> {
    let (m, k) = beta.shape();
    let x = DMatrix::from_fn(m, k, |ap, ue| beta[(ap, ue)] / denom[ap].sqrt());
    let mat = x.tr_mul(&x) / m as f64;
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    let regularized = &mat + DMatrix::identity(k, k) / m as f64;
    let coeffs = Cholesky::new(regularized)
        .ok_or(Error::NotPositiveDefinite(what))?
        .inverse();
    Ok(CoefficientMatrix { mat, coeffs })
}

fn row_sums(beta: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(beta.nrows(), |ap, _| beta.row(ap).sum())
}

/// Per-AP products `psi_m * z_m` used by B and the RC-MMSE profile.
fn rcmmse_denominators(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64) -> DVector<f64> {
    let sums = row_sums(beta);
    DVector::from_fn(beta.nrows(), |ap, _| {
        let psi = sums[ap] + 1.0 / rho_p;
        let eps_sum: f64 = beta.row(ap).iter().map(|b| b - b * b / psi).sum();
        psi * (eps_sum + 1.0 / rho_u)
    })
}

/// Per-AP products `psi_m * u_m` with `u_m = sum_i beta_mi + 1 / rho_u`.
fn gmr_denominators(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64) -> DVector<f64> {
    row_sums(beta).map(|s| (s + 1.0 / rho_p) * (s + 1.0 / rho_u))
}

pub fn compute_b(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64) -> Result<CoefficientMatrix> {
    gram_coefficients(beta, &rcmmse_denominators(beta, rho_p, rho_u), "B matrix")
}

pub fn compute_a(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64) -> Result<CoefficientMatrix> {
    gram_coefficients(beta, &gmr_denominators(beta, rho_p, rho_u), "A matrix")
}

/// M x K real profile `c` such that `v_mk = c_mk * o_m`.
pub type ScalarProfile = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSet {
    /// Column k is the combining vector of UE k.
    pub v: DMatrix<C64>,
    pub profile: Option<ScalarProfile>,
}

/// `v_mk = c_mk * o_m` without attaching the profile.
pub fn profile_vectors(profile: &ScalarProfile, obs: &PilotObservation) -> DMatrix<C64> {
    DMatrix::from_fn(profile.nrows(), profile.ncols(), |ap, ue| obs.o[ap] * profile[(ap, ue)])
}

/// Expands a deterministic profile against the despread pilot.
pub fn apply_profile(profile: &ScalarProfile, obs: &PilotObservation) -> CombinerSet {
    CombinerSet { v: profile_vectors(profile, obs), profile: Some(profile.clone()) }
}

pub fn mr_profile(beta: &DMatrix<f64>, stats: &EstimationStats) -> ScalarProfile {
    DMatrix::from_fn(beta.nrows(), beta.ncols(), |ap, ue| beta[(ap, ue)] / stats.psi[ap])
}

/// `sum_i coeffs_ki beta_mi / denom_m` for every (m, k).
fn mixed_profile(beta: &DMatrix<f64>, coeffs: &DMatrix<f64>, denom: &DVector<f64>) -> ScalarProfile {
    // (beta * coeffs^T)_mk = sum_i beta_mi coeffs_ki
    let mut p = beta * coeffs.transpose();
    for (ap, mut row) in p.row_iter_mut().enumerate() {
        row /= denom[ap];
    }
    p
}

pub fn rcmmse_profile(
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    z: &NoiseInterferenceDiag,
    b: &CoefficientMatrix,
) -> ScalarProfile {
    let denom = DVector::from_fn(beta.nrows(), |ap, _| stats.psi[ap] * z.z[ap]);
    mixed_profile(beta, &b.coeffs, &denom)
}

pub fn gmr_profile(
    beta: &DMatrix<f64>,
    stats: &EstimationStats,
    rho_u: f64,
    a: &CoefficientMatrix,
) -> ScalarProfile {
    let denom = DVector::from_fn(beta.nrows(), |ap, _| {
        stats.psi[ap] * (beta.row(ap).sum() + 1.0 / rho_u)
    });
    mixed_profile(beta, &a.coeffs, &denom)
}

pub fn mr_combiner(est: &ChannelEstimate<'_>, beta: &DMatrix<f64>) -> CombinerSet {
    CombinerSet { v: est.hhat.clone(), profile: Some(mr_profile(beta, est.stats)) }
}

/// Centralized MMSE: `(sum_i hhat_i hhat_i^H + Z)^{-1} hhat_k` for all k at once.
pub fn mmse_combiner(est: &ChannelEstimate<'_>, z: &NoiseInterferenceDiag) -> Result<CombinerSet> {
    let hhat = &est.hhat;
    if hhat.iter().any(|v| !v.is_finite()) || z.z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("MMSE combiner input"));
    }
    let mut gram = hhat * hhat.adjoint();
    for ap in 0..gram.nrows() {
        gram[(ap, ap)] += C64::from(z.z[ap]);
    }
    let chol: Cholesky<C64, Dyn> =
        Cholesky::new(gram).ok_or(Error::NotPositiveDefinite("MMSE combiner"))?;
    Ok(CombinerSet { v: chol.solve(hhat), profile: None })
}

/// Inversion-lemma form of the MMSE combiner with the overall `1/M` dropped.
///
/// Only a K x K system is factored. The result is exactly `M` times
/// [`mmse_combiner`].
pub fn mmse_combiner_dual(
    est: &ChannelEstimate<'_>,
    z: &NoiseInterferenceDiag,
) -> Result<CombinerSet> {
    let hhat = &est.hhat;
    if hhat.iter().any(|v| !v.is_finite()) || z.z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("MMSE combiner input"));
    }
    let (m, k) = hhat.shape();
    let mf = m as f64;
    // Z^{-1} Hhat
    let mut scaled = hhat.clone();
    for (ap, mut row) in scaled.row_iter_mut().enumerate() {
        row /= C64::from(z.z[ap]);
    }
    let mut g = hhat.ad_mul(&scaled) / C64::from(mf);
    for i in 0..k {
        g[(i, i)] += C64::from(1.0 / mf);
    }
    let chol: Cholesky<C64, Dyn> =
        Cholesky::new(g).ok_or(Error::NotPositiveDefinite("MMSE dual combiner"))?;
    // V = Z^{-1} Hhat G^{-1} = (G^{-1} Hhat^H Z^{-1})^H
    let v = chol.solve(&scaled.adjoint()).adjoint();
    Ok(CombinerSet { v, profile: None })
}

/// RC-MMSE through the estimates: `v_mk = (1/z_m) sum_i b_ki hhat_mi`.
pub fn rcmmse_combiner(
    est: &ChannelEstimate<'_>,
    beta: &DMatrix<f64>,
    z: &NoiseInterferenceDiag,
    b: &CoefficientMatrix,
) -> CombinerSet {
    let coeffs = b.coeffs.map(C64::from);
    let mut v = &est.hhat * coeffs.transpose();
    for (ap, mut row) in v.row_iter_mut().enumerate() {
        row /= C64::from(z.z[ap]);
    }
    CombinerSet { v, profile: Some(rcmmse_profile(beta, est.stats, z, b)) }
}

/// GMR through the estimates: `v_mk = (1/u_m) sum_i a_ki hhat_mi`.
pub fn gmr_combiner(
    est: &ChannelEstimate<'_>,
    beta: &DMatrix<f64>,
    rho_u: f64,
    a: &CoefficientMatrix,
) -> CombinerSet {
    let coeffs = a.coeffs.map(C64::from);
    let mut v = &est.hhat * coeffs.transpose();
    for (ap, mut row) in v.row_iter_mut().enumerate() {
        row /= C64::from(beta.row(ap).sum() + 1.0 / rho_u);
    }
    CombinerSet { v, profile: Some(gmr_profile(beta, est.stats, rho_u, a)) }
}

/// Diagonals of `W_k = U^{-1} (sum_i a_ki R_i) R_k^{-1}`, one column per UE.
pub fn gmr_weight_matrix(beta: &DMatrix<f64>, rho_u: f64, a: &CoefficientMatrix) -> DMatrix<f64> {
    let mixed = beta * a.coeffs.transpose();
    DMatrix::from_fn(beta.nrows(), beta.ncols(), |ap, ue| {
        mixed[(ap, ue)] / ((beta.row(ap).sum() + 1.0 / rho_u) * beta[(ap, ue)])
    })
}

/// Applies diagonal weights to the estimates: `v_k = W_k hhat_k`.
pub fn apply_weights(weights: &DMatrix<f64>, est: &ChannelEstimate<'_>) -> CombinerSet {
    let v = est.hhat.zip_map(weights, |h, w| h * w);
    CombinerSet { v, profile: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{despread_pilot, estimation_stats, mmse_estimate, sample_channels};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_ue() -> DMatrix<f64> {
        DMatrix::from_row_slice(1, 2, &[0.6, 0.2])
    }

    fn unit_obs(m: usize) -> PilotObservation {
        PilotObservation { o: DVector::from_element(m, C64::new(1.0, 0.0)) }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn z_hand_example() {
        let stats = estimation_stats(&two_ue(), 5.0);
        let z = noise_interference_diag(&stats, 10.0);
        assert!(close(z.z[0], 0.5, 1e-15));

        let perfect = EstimationStats {
            psi: DVector::from_element(1, 1.0),
            gamma: DMatrix::from_element(1, 1, 1.0),
            eps: DMatrix::zeros(1, 1),
        };
        assert_eq!(noise_interference_diag(&perfect, 8.0).z[0], 0.125);
        assert_eq!(noise_interference_diag(&perfect, f64::INFINITY).z[0], 0.0);
    }

    #[test]
    fn b_matrix_hand_example() {
        let b = compute_b(&two_ue(), 5.0, 10.0).unwrap();
        let mat = [[0.72, 0.24], [0.24, 0.08]];
        let inv = [[0.6, -0.24 / 1.8], [-0.24 / 1.8, 1.72 / 1.8]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(b.mat[(i, j)], mat[i][j], 1e-12));
                assert!(close(b.coeffs[(i, j)], inv[i][j], 1e-12));
            }
        }
        let one = compute_b(&DMatrix::from_element(1, 1, 1.0), 1.0, 1.0).unwrap();
        assert!(close(one.mat[(0, 0)], 1.0 / 3.0, 1e-15));
        assert!(close(one.coeffs[(0, 0)], 0.75, 1e-15));
    }

    #[test]
    fn a_matrix_hand_example() {
        let a = compute_a(&two_ue(), 5.0, 10.0).unwrap();
        // A = [[0.4, 0.12/0.9], [0.12/0.9, 0.04/0.9]], det(A + I) = 1.3/0.9
        let mat = [[0.4, 0.12 / 0.9], [0.12 / 0.9, 0.04 / 0.9]];
        let det = 1.4 * (1.0 + 0.04 / 0.9) - (0.12f64 / 0.9).powi(2);
        let inv = [
            [(1.0 + 0.04 / 0.9) / det, -(0.12 / 0.9) / det],
            [-(0.12 / 0.9) / det, 1.4 / det],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(a.mat[(i, j)], mat[i][j], 1e-12));
                assert!(close(a.coeffs[(i, j)], inv[i][j], 1e-12));
            }
        }
        assert!(close(a.coeffs[(0, 0)], 0.7231, 1e-4));
        assert!(close(a.coeffs[(0, 1)], -0.0923, 1e-4));
        assert!(close(a.coeffs[(1, 1)], 0.9692, 1e-4));

        let one = compute_a(&DMatrix::from_element(1, 1, 1.0), 1.0, 1.0).unwrap();
        assert!(close(one.mat[(0, 0)], 0.25, 1e-15));
        assert!(close(one.coeffs[(0, 0)], 0.8, 1e-15));
    }

    #[test]
    fn hand_combiners_single_ap() {
        let beta = two_ue();
        let stats = estimation_stats(&beta, 5.0);
        let est = mmse_estimate(&unit_obs(1), &stats, &beta);
        let z = noise_interference_diag(&stats, 10.0);

        let mr = mr_combiner(&est, &beta);
        assert!(close(mr.v[(0, 0)].re, 0.6, 1e-15) && close(mr.v[(0, 1)].re, 0.2, 1e-15));

        let mmse = mmse_combiner(&est, &z).unwrap();
        assert!(close(mmse.v[(0, 0)].re, 0.6 / 0.9, 1e-12));
        let dual = mmse_combiner_dual(&est, &z).unwrap();
        assert!(close(dual.v[(0, 0)].re, 0.6 / 0.9, 1e-12));

        let b = compute_b(&beta, 5.0, 10.0).unwrap();
        let rc = rcmmse_combiner(&est, &beta, &z, &b);
        assert!(close(rc.v[(0, 0)].re, 2.0 / 3.0, 1e-12));

        let a = compute_a(&beta, 5.0, 10.0).unwrap();
        let gmr = gmr_combiner(&est, &beta, 10.0, &a);
        assert!(close(gmr.v[(0, 0)].re, 0.4615, 1e-4));
        let w = gmr_weight_matrix(&beta, 10.0, &a);
        assert!(close(w[(0, 0)] * 0.6, gmr.v[(0, 0)].re, 1e-12));
    }

    #[test]
    fn scalar_mmse_unit_case() {
        let beta = DMatrix::from_element(1, 1, 1.0);
        let stats = EstimationStats {
            psi: DVector::from_element(1, 1.0),
            gamma: DMatrix::from_element(1, 1, 1.0),
            eps: DMatrix::zeros(1, 1),
        };
        let est = mmse_estimate(&unit_obs(1), &stats, &beta);
        let z = NoiseInterferenceDiag { z: DVector::from_element(1, 1.0) };
        assert!(close(mmse_combiner(&est, &z).unwrap().v[(0, 0)].re, 0.5, 1e-15));
    }

    #[test]
    fn zero_observation_gives_zero_combiners() {
        let beta = two_ue();
        let stats = estimation_stats(&beta, 5.0);
        let obs = PilotObservation { o: DVector::zeros(1) };
        let est = mmse_estimate(&obs, &stats, &beta);
        let z = noise_interference_diag(&stats, 10.0);
        let b = compute_b(&beta, 5.0, 10.0).unwrap();
        assert!(mr_combiner(&est, &beta).v.iter().all(|v| v.norm() == 0.0));
        assert!(rcmmse_combiner(&est, &beta, &z, &b).v.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let beta = two_ue();
        let stats = estimation_stats(&beta, 5.0);
        let mut est = mmse_estimate(&unit_obs(1), &stats, &beta);
        est.hhat[(0, 0)] = C64::new(f64::NAN, 0.0);
        let z = noise_interference_diag(&stats, 10.0);
        assert!(mmse_combiner(&est, &z).is_err());
        assert!(mmse_combiner_dual(&est, &z).is_err());
    }

    #[test]
    fn single_ue_gmr_is_rescaled_mr() {
        let beta = DMatrix::from_column_slice(5, 1, &[0.1, 3.0, 0.7, 1e-3, 12.0]);
        let stats = estimation_stats(&beta, 2.0);
        let a = compute_a(&beta, 2.0, 2.0).unwrap();
        let gmr = gmr_profile(&beta, &stats, 2.0, &a);
        let mr = mr_profile(&beta, &stats);
        for ap in 0..5 {
            assert!(gmr[(ap, 0)] / mr[(ap, 0)] > 0.0);
        }
    }

    #[test]
    fn scaling_a_scales_weights() {
        let beta = DMatrix::from_row_slice(3, 2, &[0.3, 1.2, 2.0, 0.7, 0.1, 0.1]);
        let a = compute_a(&beta, 3.0, 2.0).unwrap();
        let scaled = CoefficientMatrix { mat: a.mat.clone(), coeffs: &a.coeffs * 2.5 };
        let w = gmr_weight_matrix(&beta, 2.0, &a);
        let ws = gmr_weight_matrix(&beta, 2.0, &scaled);
        for (x, y) in w.iter().zip(ws.iter()) {
            assert!(close(*y, 2.5 * x, 1e-12 * y.abs()));
        }
    }

    fn rel_err(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn both_routes_agree(
            vals in prop::collection::vec(-3.0f64..1.0, 24),
            rho_p in 0.5f64..1e4,
            rho_u in 0.5f64..1e4,
            seed in any::<u64>(),
        ) {
            let beta = DMatrix::from_vec(8, 3, vals).map(|e| 10f64.powf(e));
            let stats = estimation_stats(&beta, rho_p);
            let z = noise_interference_diag(&stats, rho_u);
            let b = compute_b(&beta, rho_p, rho_u).unwrap();
            let a = compute_a(&beta, rho_p, rho_u).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = sample_channels(&beta, &mut rng);
            let obs = despread_pilot(&h, rho_p, &mut rng);
            let est = mmse_estimate(&obs, &stats, &beta);

            let rc = rcmmse_combiner(&est, &beta, &z, &b);
            prop_assert!(rel_err(&rc.v, &apply_profile(rc.profile.as_ref().unwrap(), &obs).v) < 1e-12);
            let gmr = gmr_combiner(&est, &beta, rho_u, &a);
            prop_assert!(rel_err(&gmr.v, &apply_profile(gmr.profile.as_ref().unwrap(), &obs).v) < 1e-12);
            let w = gmr_weight_matrix(&beta, rho_u, &a);
            prop_assert!(rel_err(&gmr.v, &apply_weights(&w, &est).v) < 1e-12);
            let mr = mr_combiner(&est, &beta);
            prop_assert!(rel_err(&mr.v, &apply_profile(mr.profile.as_ref().unwrap(), &obs).v) < 1e-12);

            let direct = mmse_combiner(&est, &z).unwrap();
            let dual = mmse_combiner_dual(&est, &z).unwrap();
            prop_assert!(rel_err(&dual.v, &(direct.v * C64::from(8.0))) < 1e-10);

            for cm in [&b, &a] {
                prop_assert!((&cm.mat - cm.mat.transpose()).amax() <= 1e-14 * cm.mat.amax());
                let eig = cm.mat.clone().symmetric_eigenvalues();
                prop_assert!(eig.min() >= -1e-12 * cm.mat.norm());
                let id = &cm.coeffs * (&cm.mat + DMatrix::identity(3, 3) / 8.0);
                prop_assert!((id - DMatrix::<f64>::identity(3, 3)).amax() < 1e-8);
            }
        }
    }
}
