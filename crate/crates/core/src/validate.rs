//! Desk-scale self-check suite behind `cellfree validate`.
//!
//! Each check compares library output against an independent computation
//! (hand examples, explicit loops, Monte Carlo) on seeded random instances.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combining::{
    self, compute_a, gmr_combiner, gmr_profile, gmr_weight_matrix, mmse_combiner,
    mmse_combiner_dual, mr_combiner, mr_profile, noise_interference_diag, rcmmse_combiner,
    rcmmse_profile, CoefficientMatrix,
};
use crate::error::Result;
use crate::estimation::{despread_pilot, estimation_stats, mmse_estimate, sample_channels, C64};
use crate::harness::{cdf_from_drops, run_drop, ExperimentConfig, Scheme, Series};
use crate::precoding::{power_allocation, precoder_profile, profile_entry_power, Mode, PowerMode};
use crate::scenario::{
    path_gain_db, place_network, RadioConfig, ScenarioConfig, UePlacement,
};
use crate::se::{gmr_objective, uatf_moments_closed_form, uatf_moments_mc, ul_sinr_csi};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub module: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{tag} {:<11} {:<34} seed={:<6} {}", c.module, c.name, c.seed, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

type BFn = fn(&DMatrix<f64>, f64, f64) -> Result<CoefficientMatrix>;

/// Implementations under test. Tests swap entries to confirm that the suite
/// catches a broken implementation.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub compute_b: BFn,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { compute_b: combining::compute_b }
    }
}

pub fn run_suite(seed: u64) -> Report {
    run_suite_with(seed, Hooks::default())
}

pub fn run_suite_with(seed: u64, hooks: Hooks) -> Report {
    let checks: [(&'static str, &'static str, CheckFn); 17] = [
        ("scenario", "path gain at 100 m", check_path_gain),
        ("scenario", "positions inside area", check_positions),
        ("scenario", "centered cluster geometry", check_cluster),
        ("estimation", "gamma + eps == beta", check_split),
        ("estimation", "estimates collinear per AP", check_collinear),
        ("combining", "B matrix hand example", check_b_hand),
        ("combining", "B matrix vs explicit sum", check_b_explicit),
        ("combining", "A matrix hand example", check_a_hand),
        ("combining", "A matrix vs explicit sum", check_a_explicit),
        ("combining", "B/A symmetric PSD", check_psd),
        ("combining", "dual MMSE = M x MMSE", check_dual),
        ("combining", "profile = estimate route", check_profile_route),
        ("se", "MMSE dominates per realization", check_dominance),
        ("se", "UatF closed form vs MC", check_uatf_mc),
        ("se", "GMR weights maximize objective", check_gmr_opt),
        ("precoding", "average power budget", check_power),
        ("harness", "drop determinism and CDF", check_harness),
    ];
    let mut report = Report::default();
    for (i, (module, name, f)) in checks.into_iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let outcome = f(&mut rng, &hooks);
        let (passed, detail) = match outcome {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        report.checks.push(Check { name, module, seed: s, passed, detail });
    }
    report
}

type Outcome = std::result::Result<String, String>;
type CheckFn = fn(&mut ChaCha8Rng, &Hooks) -> Outcome;

fn ensure(ok: bool, fail: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(fail())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn max_rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}

/// Log-uniform large-scale gains over six decades.
fn random_beta(rng: &mut ChaCha8Rng, m: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, k, |_, _| 10f64.powf(rng.random_range(-4.0..2.0)))
}

fn random_snrs(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (10f64.powf(rng.random_range(-1.0..3.0)), 10f64.powf(rng.random_range(-1.0..3.0)))
}

fn check_path_gain(_: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let noise = -174.0 + 10.0 * 20e6f64.log10() + 7.0;
    let expected = -35.3 - 10.0 * 3.76 * 2.0 - noise;
    let got = lift(path_gain_db(100.0, &ScenarioConfig::default(), &RadioConfig::default()))?;
    ensure((got - expected).abs() < 1e-9, || format!("{got} dB, expected {expected} dB"))?;
    Ok(format!("{got:.3} dB"))
}

fn check_positions(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let cfg = ScenarioConfig::default();
    let p = lift(place_network(&cfg, rng))?;
    ensure(p.ap.len() == cfg.m && p.ue.len() == cfg.k, || "wrong counts".into())?;
    let inside = |q: &[f64; 2]| q.iter().all(|c| (0.0..=cfg.side_m).contains(c));
    ensure(p.ap.iter().chain(&p.ue).all(inside), || "point outside area".into())?;
    Ok(format!("{} points", cfg.m + cfg.k))
}

fn check_cluster(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let cfg = ScenarioConfig {
        k: 4,
        side_m: 1000.0,
        ue_placement: UePlacement::CenteredCluster { spacing: 5.0 },
        ..Default::default()
    };
    let p = lift(place_network(&cfg, rng))?;
    let want = [492.5, 497.5, 502.5, 507.5];
    for (u, x) in p.ue.iter().zip(want) {
        ensure((u[0] - x).abs() < 1e-9 && (u[1] - 500.0).abs() < 1e-9, || format!("UE at {u:?}"))?;
    }
    Ok("4 UEs on y = 500".into())
}

fn check_split(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    for _ in 0..50 {
        let beta = random_beta(rng, 12, 5);
        let (rho_p, _) = random_snrs(rng);
        let s = estimation_stats(&beta, rho_p);
        let exact = (0..12).all(|ap| (0..5).all(|ue| s.gamma[(ap, ue)] + s.eps[(ap, ue)] == beta[(ap, ue)]));
        ensure(exact, || format!("split not exact at rho_p = {rho_p}"))?;
    }
    Ok("50 instances".into())
}

fn check_collinear(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let beta = random_beta(rng, 8, 4);
        let (rho_p, _) = random_snrs(rng);
        let stats = estimation_stats(&beta, rho_p);
        let h = sample_channels(&beta, rng);
        let obs = despread_pilot(&h, rho_p, rng);
        let est = mmse_estimate(&obs, &stats, &beta);
        for ap in 0..8 {
            for i in 0..4 {
                for k in 0..4 {
                    let l = est.hhat[(ap, i)] * beta[(ap, k)];
                    let r = est.hhat[(ap, k)] * beta[(ap, i)];
                    let scale = l.norm().max(r.norm());
                    if scale > 0.0 {
                        worst = worst.max((l - r).norm() / scale);
                    }
                }
            }
        }
    }
    ensure(worst < 1e-12, || format!("max relative mismatch {worst:e}"))?;
    Ok(format!("max rel {worst:.1e}"))
}

/// Inverse of a symmetric 2x2 matrix by the adjugate.
fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn compare2(got: &CoefficientMatrix, mat: [[f64; 2]; 2], what: &str) -> std::result::Result<(), String> {
    let coeffs = inv2([[mat[0][0] + 1.0, mat[0][1]], [mat[1][0], mat[1][1] + 1.0]]);
    for r in 0..2 {
        for c in 0..2 {
            ensure((got.mat[(r, c)] - mat[r][c]).abs() < 1e-12, || {
                format!("{what}[{r},{c}] = {}, expected {}", got.mat[(r, c)], mat[r][c])
            })?;
            ensure((got.coeffs[(r, c)] - coeffs[r][c]).abs() < 1e-12, || {
                format!("{what} coeff[{r},{c}] = {}, expected {}", got.coeffs[(r, c)], coeffs[r][c])
            })?;
        }
    }
    Ok(())
}

fn check_b_hand(_: &mut ChaCha8Rng, hooks: &Hooks) -> Outcome {
    let beta = DMatrix::from_row_slice(1, 2, &[0.6, 0.2]);
    let b = lift((hooks.compute_b)(&beta, 5.0, 10.0))?;
    compare2(&b, [[0.72, 0.24], [0.24, 0.08]], "B")?;
    Ok("B = [[0.72, 0.24], [0.24, 0.08]]".into())
}

fn check_a_hand(_: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let beta = DMatrix::from_row_slice(1, 2, &[0.6, 0.2]);
    let a = lift(compute_a(&beta, 5.0, 10.0))?;
    compare2(&a, [[0.36 / 0.9, 0.12 / 0.9], [0.12 / 0.9, 0.04 / 0.9]], "A")?;
    Ok("A = [[0.4, 0.1333], [0.1333, 0.0444]]".into())
}

/// `(1/M) sum_m beta_mk beta_mi / d_m` by explicit loops.
fn explicit_gram(beta: &DMatrix<f64>, denom: impl Fn(usize) -> f64) -> DMatrix<f64> {
    let (m, k) = beta.shape();
    let mut out = DMatrix::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            let mut acc = 0.0;
            for ap in 0..m {
                acc += beta[(ap, r)] * beta[(ap, c)] / denom(ap);
            }
            out[(r, c)] = acc / m as f64;
        }
    }
    out
}

fn b_denominator(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64, ap: usize) -> f64 {
    let k = beta.ncols();
    let psi: f64 = (0..k).map(|j| beta[(ap, j)]).sum::<f64>() + 1.0 / rho_p;
    let z: f64 = (0..k).map(|j| beta[(ap, j)] * (1.0 - beta[(ap, j)] / psi)).sum::<f64>() + 1.0 / rho_u;
    psi * z
}

fn a_denominator(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64, ap: usize) -> f64 {
    let total: f64 = (0..beta.ncols()).map(|j| beta[(ap, j)]).sum();
    (total + 1.0 / rho_p) * (total + 1.0 / rho_u)
}

fn check_gram(
    rng: &mut ChaCha8Rng,
    compute: BFn,
    denom: fn(&DMatrix<f64>, f64, f64, usize) -> f64,
    what: &str,
) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let m = rng.random_range(1..20);
        let k = rng.random_range(1..6);
        let beta = random_beta(rng, m, k);
        let (rho_p, rho_u) = random_snrs(rng);
        let got = lift(compute(&beta, rho_p, rho_u))?;
        let want = explicit_gram(&beta, |ap| denom(&beta, rho_p, rho_u, ap));
        let err = max_rel_err(&got.mat, &want);
        ensure(err < 1e-10, || format!("{what} off by {err:e} (M={m}, K={k})"))?;
        let reg = &want + DMatrix::identity(k, k) / m as f64;
        let resid = (&got.coeffs * &reg - DMatrix::identity(k, k)).amax();
        ensure(resid < 1e-8, || format!("{what} coeffs residual {resid:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("30 instances, max rel {worst:.1e}"))
}

fn check_b_explicit(rng: &mut ChaCha8Rng, hooks: &Hooks) -> Outcome {
    check_gram(rng, hooks.compute_b, b_denominator, "B")
}

fn check_a_explicit(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    check_gram(rng, compute_a, a_denominator, "A")
}

fn check_psd(rng: &mut ChaCha8Rng, hooks: &Hooks) -> Outcome {
    for _ in 0..50 {
        let beta = random_beta(rng, 10, 4);
        let (rho_p, rho_u) = random_snrs(rng);
        for (what, cm) in [("B", lift((hooks.compute_b)(&beta, rho_p, rho_u))?), ("A", lift(compute_a(&beta, rho_p, rho_u))?)] {
            let norm = cm.mat.norm();
            let asym = (&cm.mat - cm.mat.transpose()).amax();
            ensure(asym <= 1e-14 * norm, || format!("{what} asymmetric by {asym:e}"))?;
            let min_eig = SymmetricEigen::new(cm.mat.clone()).eigenvalues.min();
            ensure(min_eig >= -1e-12 * norm, || format!("{what} min eigenvalue {min_eig:e}"))?;
        }
    }
    Ok("50 instances".into())
}

fn check_dual(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let beta = random_beta(rng, 16, 4);
        let (rho_p, rho_u) = random_snrs(rng);
        let stats = estimation_stats(&beta, rho_p);
        let z = noise_interference_diag(&stats, rho_u);
        let h = sample_channels(&beta, rng);
        let obs = despread_pilot(&h, rho_p, rng);
        let est = mmse_estimate(&obs, &stats, &beta);
        let direct = lift(mmse_combiner(&est, &z))?.v * C64::from(16.0);
        let dual = lift(mmse_combiner_dual(&est, &z))?.v;
        let scale = direct.iter().map(|c| c.norm()).fold(0.0, f64::max);
        worst = worst.max((dual - direct).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale);
    }
    ensure(worst < 1e-10, || format!("max rel {worst:e}"))?;
    Ok(format!("max rel {worst:.1e}"))
}

fn check_profile_route(rng: &mut ChaCha8Rng, hooks: &Hooks) -> Outcome {
    let beta = random_beta(rng, 12, 4);
    let (rho_p, rho_u) = random_snrs(rng);
    let stats = estimation_stats(&beta, rho_p);
    let z = noise_interference_diag(&stats, rho_u);
    let b = lift((hooks.compute_b)(&beta, rho_p, rho_u))?;
    let a = lift(compute_a(&beta, rho_p, rho_u))?;
    let h = sample_channels(&beta, rng);
    let obs = despread_pilot(&h, rho_p, rng);
    let est = mmse_estimate(&obs, &stats, &beta);
    for (what, v, p) in [
        ("RC-MMSE", rcmmse_combiner(&est, &beta, &z, &b).v, rcmmse_profile(&beta, &stats, &z, &b)),
        ("GMR", gmr_combiner(&est, &beta, rho_u, &a).v, gmr_profile(&beta, &stats, rho_u, &a)),
    ] {
        for ap in 0..12 {
            for ue in 0..4 {
                let want = obs.o[ap] * p[(ap, ue)];
                let err = (v[(ap, ue)] - want).norm();
                ensure(err <= 1e-12 * want.norm().max(1e-300), || format!("{what} mismatch {err:e}"))?;
            }
        }
    }
    Ok("RC-MMSE and GMR".into())
}

fn check_dominance(rng: &mut ChaCha8Rng, hooks: &Hooks) -> Outcome {
    let (m, k) = (16, 4);
    let mut count = 0;
    for _ in 0..10 {
        let beta = random_beta(rng, m, k);
        let (rho_p, rho_u) = random_snrs(rng);
        let stats = estimation_stats(&beta, rho_p);
        let z = noise_interference_diag(&stats, rho_u);
        let b = lift((hooks.compute_b)(&beta, rho_p, rho_u))?;
        let a = lift(compute_a(&beta, rho_p, rho_u))?;
        for _ in 0..10 {
            let h = sample_channels(&beta, rng);
            let obs = despread_pilot(&h, rho_p, rng);
            let est = mmse_estimate(&obs, &stats, &beta);
            let best = ul_sinr_csi(&lift(mmse_combiner(&est, &z))?.v, &est.hhat, &z);
            for (what, v) in [
                ("MR", mr_combiner(&est, &beta).v),
                ("RC-MMSE", rcmmse_combiner(&est, &beta, &z, &b).v),
                ("GMR", gmr_combiner(&est, &beta, rho_u, &a).v),
            ] {
                let other = ul_sinr_csi(&v, &est.hhat, &z);
                for ue in 0..k {
                    ensure(other[ue] <= best[ue] * (1.0 + 1e-9), || {
                        format!("{what} beats MMSE for UE {ue}: {} > {}", other[ue], best[ue])
                    })?;
                }
                count += k;
            }
        }
    }
    Ok(format!("{count} comparisons"))
}

fn check_uatf_mc(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let beta = random_beta(rng, 6, 3).map(|b| b.clamp(1e-2, 10.0));
    let (rho_p, rho_u) = (5.0, 10.0);
    let stats = estimation_stats(&beta, rho_p);
    let profile = mr_profile(&beta, &stats);
    let closed = uatf_moments_closed_form(&profile, &beta, &stats);
    let n = 40_000;
    let mc = lift(uatf_moments_mc(|est, _| Ok(mr_combiner(est, &beta)), &beta, &stats, rho_p, n, rng))?;
    let mut worst: f64 = 0.0;
    for (c, s) in closed.iter().zip(&mc) {
        worst = worst.max(rel_err(c.sinr(rho_u), s.sinr(rho_u)));
        worst = worst.max(rel_err(c.norm_sq, s.norm_sq));
    }
    ensure(worst < 0.05, || format!("max rel {worst:.3}"))?;
    Ok(format!("{n} draws, max rel {worst:.3}"))
}

fn check_gmr_opt(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let (m, k) = (8, 3);
    for _ in 0..5 {
        let beta = random_beta(rng, m, k);
        let (rho_p, rho_u) = random_snrs(rng);
        let stats = estimation_stats(&beta, rho_p);
        let a = lift(compute_a(&beta, rho_p, rho_u))?;
        let w = gmr_weight_matrix(&beta, rho_u, &a).map(C64::from);
        let base = gmr_objective(&w, &beta, &stats, rho_u);
        for _ in 0..200 {
            let perturbed = w.map(|x| {
                x * C64::new(1.0 + 0.3 * rng.random_range(-1.0..1.0), 0.3 * rng.random_range(-1.0..1.0))
            });
            let val = gmr_objective(&perturbed, &beta, &stats, rho_u);
            for ue in 0..k {
                ensure(val[ue] <= base[ue] * (1.0 + 1e-9), || {
                    format!("perturbation improves UE {ue}: {} > {}", val[ue], base[ue])
                })?;
            }
        }
    }
    Ok("1000 perturbations".into())
}

fn check_power(rng: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let beta = random_beta(rng, 10, 4);
    let (rho_p, rho_u) = random_snrs(rng);
    let stats = estimation_stats(&beta, rho_p);
    let a = lift(compute_a(&beta, rho_p, rho_u))?;
    let profile = gmr_profile(&beta, &stats, rho_u, &a);
    let eta = power_allocation(PowerMode::NetworkWideEqual, &beta);
    let w = lift(precoder_profile(&profile, &stats, &eta, Mode::Centralized))?;
    let total = profile_entry_power(&w, &stats).sum();
    ensure((total - 1.0).abs() < 1e-12, || format!("centralized total power {total}"))?;
    let eta = power_allocation(PowerMode::PerApSqrtBeta, &beta);
    let w = lift(precoder_profile(&profile, &stats, &eta, Mode::Distributed))?;
    let per_ap: DVector<f64> = profile_entry_power(&w, &stats).column_sum();
    for p in per_ap.iter() {
        ensure((p - 1.0).abs() < 1e-12, || format!("per-AP power {p}"))?;
    }
    Ok("centralized and per-AP budgets".into())
}

fn check_harness(_: &mut ChaCha8Rng, _: &Hooks) -> Outcome {
    let cfg = ExperimentConfig {
        scenario: ScenarioConfig { m: 12, k: 3, ..Default::default() },
        series: vec![
            Series::new(Scheme::Mmse, Mode::Centralized, crate::harness::Bound::Csi),
            Series::new(Scheme::Gmr, Mode::Distributed, crate::harness::Bound::Uatf),
        ],
        n_drops: 3,
        n_realizations: 10,
        ..Default::default()
    };
    let drops: Vec<_> = (0..3).map(|d| run_drop(&cfg, d)).collect::<Result<_>>().map_err(|e| e.to_string())?;
    let again = lift(run_drop(&cfg, 1))?;
    ensure(again == drops[1], || "repeated drop differs".into())?;
    for cdf in cdf_from_drops(&cfg, &drops) {
        ensure(cdf.values.len() == 9, || format!("{} has {} points", cdf.series, cdf.values.len()))?;
        ensure(cdf.values.windows(2).all(|w| w[0] <= w[1]), || "values unsorted".into())?;
        ensure(cdf.probs.windows(2).all(|w| w[0] <= w[1]) && *cdf.probs.last().unwrap() == 1.0, || {
            "probabilities not a CDF".into()
        })?;
    }
    Ok("3 drops".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = run_suite(2024);
        assert!(report.passed(), "{report}");
        assert_eq!(report, run_suite(2024));
    }

    fn flipped_b(beta: &DMatrix<f64>, rho_p: f64, rho_u: f64) -> Result<CoefficientMatrix> {
        // Off-diagonal sign flip, as if the cross terms entered with a minus.
        let mut b = combining::compute_b(beta, rho_p, rho_u)?;
        let k = b.mat.nrows();
        let m = beta.nrows() as f64;
        for r in 0..k {
            for c in 0..k {
                if r != c {
                    b.mat[(r, c)] = -b.mat[(r, c)];
                }
            }
        }
        b.coeffs = (&b.mat + DMatrix::identity(k, k) / m)
            .try_inverse()
            .expect("invertible");
        Ok(b)
    }

    #[test]
    fn b_sign_flip_is_caught() {
        let report = run_suite_with(2024, Hooks { compute_b: flipped_b });
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().collect();
        assert!(failed.iter().all(|c| c.module == "combining"), "{report}");
        assert!(failed.iter().any(|c| c.name.starts_with("B matrix")), "{report}");
    }
}
