//! Adiabaticity breakdown, critical lengths, transfer efficiency and
//! conservation checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{self, CharacteristicMap};
use crate::error::{Error, Result};
use crate::model::{FieldState, Problem};

/// Result of a fold scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakdown {
    /// Smallest length at which some characteristic folds.
    pub z_break: Option<f64>,
    /// Whether the necessary sign condition for a fold holds anywhere.
    pub sign_condition: bool,
}

fn folds_at(problem: &Problem, z: f64) -> Result<bool> {
    Ok(CharacteristicMap::new(problem, z)?.has_fold())
}

/// `f f' θ0'` has the sign that lets `h` turn over for large enough `z`.
fn sign_condition(problem: &Problem) -> bool {
    let (lo, hi) = problem.pulses.support();
    let n = 20_000;
    let total = problem.signed_fluence(lo, hi);
    let o = if total < 0.0 { -1.0 } else { 1.0 };
    (0..=n).any(|k| {
        let xi = lo + (hi - lo) * k as f64 / n as f64;
        let th = problem.pulses.mixing_angle(xi);
        let term = problem.coupling_factor(th)
            * problem.coupling_slope(th)
            * problem.pulses.mixing_rate(xi);
        o * term < 0.0 || o * problem.fluence_density(xi) < 0.0
    })
}

/// Scan `n_z` log-spaced lengths up to `z_scan_max` for a characteristic
/// fold, then refine twice with 16 points and bisect the last interval.
pub fn breakdown_length(problem: &Problem, z_scan_max: f64, n_z: usize) -> Result<Breakdown> {
    if !(z_scan_max > 0.0 && z_scan_max.is_finite()) {
        return Err(Error::invalid("z_scan_max", "must be > 0"));
    }
    let n_z = n_z.max(2);
    let sign_condition = sign_condition(problem);
    let z_min = z_scan_max * 1e-3;
    let ratio = (z_scan_max / z_min).ln() / (n_z - 1) as f64;
    let coarse: Vec<f64> = (0..n_z).map(|k| z_min * (ratio * k as f64).exp()).collect();
    let hits: Vec<bool> = coarse
        .par_iter()
        .map(|&z| folds_at(problem, z))
        .collect::<Result<_>>()?;
    let Some(first) = hits.iter().position(|&h| h) else {
        return Ok(Breakdown {
            z_break: None,
            sign_condition,
        });
    };
    let (mut lo, mut hi) = (
        if first == 0 { 0.0 } else { coarse[first - 1] },
        coarse[first],
    );
    for _ in 0..2 {
        let pts: Vec<f64> = (1..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0).collect();
        let hits: Vec<bool> = pts
            .par_iter()
            .map(|&z| folds_at(problem, z))
            .collect::<Result<_>>()?;
        let k = hits.iter().position(|&h| h).unwrap_or(15);
        hi = pts[k];
        if k > 0 {
            lo = pts[k - 1];
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if folds_at(problem, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Breakdown {
        z_break: Some(hi),
        sign_condition,
    })
}

/// Pump-depletion length estimate `(2 + q) / q²`.
pub fn z_pump_estimate(q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("must be > 0, got {q}")));
    }
    Ok((2.0 + q) / (q * q))
}

/// Smallest `z` in `z_scan` at which the pump peak drops below
/// `threshold` times its entrance value. The scan stops at the first fold.
pub fn z_pump_measured(problem: &Problem, threshold: f64, z_scan: &[f64]) -> Result<Option<f64>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", "must lie in (0, 1)"));
    }
    let taus = problem.grid.taus();
    let peak = |z: f64| -> Result<f64> {
        let f = adiabatic::field_slice(problem, z, &taus)?;
        Ok(f.omega_p.iter().copied().fold(0.0, f64::max))
    };
    let entrance = taus
        .iter()
        .map(|&t| problem.pulses.pump(t))
        .fold(0.0, f64::max);
    for &z in z_scan {
        match peak(z) {
            Ok(p) if p < threshold * entrance => return Ok(Some(z)),
            Ok(_) => {}
            Err(Error::Fold { tau, .. }) | Err(Error::NearFold { tau, .. }) => {
                log::warn!("pump depletion scan stopped at fold z = {z}, tau = {tau}");
                return Ok(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// STIRAP penetration estimate `t_d / 2T`, capped at the pump-depletion length.
pub fn z_stirap_estimate(t_d: f64, width: f64, q: f64) -> Result<f64> {
    if !(t_d >= 0.0 && t_d.is_finite()) {
        return Err(Error::invalid("t_d", "must be >= 0"));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid("T", "must be > 0"));
    }
    Ok((t_d / (2.0 * width)).min(z_pump_estimate(q)?))
}

/// Final-state population `sin²θ(z, τ_max)`. A fold anywhere on the grid at
/// this `z` is reported as [`Error::Fold`] with its first position.
pub fn transfer_efficiency(problem: &Problem, z: f64) -> Result<f64> {
    let map = CharacteristicMap::new(problem, z)?;
    if let Some(tau) = map.first_fold(&problem.grid.taus()) {
        return Err(Error::Fold { z, tau });
    }
    let theta = map.point(problem.grid.tau_max)?.theta;
    Ok(theta.sin().powi(2))
}

fn trapezoid(x: &[f64], y: impl Iterator<Item = f64>) -> f64 {
    let y: Vec<f64> = y.collect();
    x.windows(2)
        .zip(y.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Largest relative drift, over z, of the τ-integrated conserved photon
/// combination (`n_p + n_s` for Λ and V, `n_p - n_s` for Ξ).
pub fn conservation_residual(history: &FieldState, problem: &Problem) -> Result<f64> {
    if history.slices.len() < 2 {
        return Err(Error::invalid("history", "needs at least two z slices"));
    }
    let total = |k: usize| {
        let s = &history.slices[k];
        trapezoid(
            &history.tau,
            s.omega_p
                .iter()
                .zip(&s.omega_s)
                .map(|(&p, &q)| problem.conserved_density(p, q)),
        )
    };
    let reference = total(0);
    let scale = if reference != 0.0 {
        reference.abs()
    } else {
        1.0
    };
    Ok((1..history.slices.len())
        .map(|k| (total(k) - reference).abs() / scale)
        .fold(0.0, f64::max))
}

/// Scan settings for [`diagnose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsSettings {
    pub z_scan_max: f64,
    pub n_z: usize,
    pub pump_threshold: f64,
    pub pump_scan: Vec<f64>,
    pub efficiency_z: Vec<f64>,
}

fn steps(end: f64, h: f64) -> Vec<f64> {
    let n = (end / h).round() as usize;
    (0..=n).map(|k| k as f64 * h).collect()
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        DiagnosticsSettings {
            z_scan_max: 10.0,
            n_z: 64,
            pump_threshold: 0.1,
            pump_scan: steps(12.0, 0.05),
            efficiency_z: steps(3.0, 0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyPoint {
    pub z: f64,
    /// `None` once the map has folded.
    pub efficiency: Option<f64>,
    pub fold_tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub z_break: Option<f64>,
    pub breakdown_sign_condition: bool,
    pub z_pump_est: f64,
    pub z_pump_measured: Option<f64>,
    pub z_stirap_est: Option<f64>,
    pub efficiency_curve: Vec<EfficiencyPoint>,
    pub conservation_residual: Option<f64>,
}

/// Efficiency at each length; folds give an empty entry instead of an error.
pub fn efficiency_curve(problem: &Problem, z_values: &[f64]) -> Result<Vec<EfficiencyPoint>> {
    z_values
        .par_iter()
        .map(|&z| match transfer_efficiency(problem, z) {
            Ok(e) => Ok(EfficiencyPoint {
                z,
                efficiency: Some(e),
                fold_tau: None,
            }),
            Err(Error::Fold { tau, .. }) | Err(Error::NearFold { tau, .. }) => {
                Ok(EfficiencyPoint {
                    z,
                    efficiency: None,
                    fold_tau: Some(tau),
                })
            }
            Err(e) => Err(e),
        })
        .collect()
}

/// Full report for one problem.
pub fn diagnose(problem: &Problem, settings: &DiagnosticsSettings) -> Result<DiagnosticsReport> {
    let breakdown = breakdown_length(problem, settings.z_scan_max, settings.n_z)?;
    let q = problem.medium.q_ratio;
    let z_stirap_est = match problem.pulses.delay() {
        Some(t_d) if t_d >= 0.0 => Some(z_stirap_estimate(t_d, 1.0, q)?),
        _ => None,
    };
    let efficiency = efficiency_curve(problem, &settings.efficiency_z)?;

    // conserved combination over the fold-free part of the efficiency scan
    let taus = problem.grid.taus();
    let mut slices = Vec::new();
    for p in efficiency.iter().filter(|p| p.efficiency.is_some()) {
        slices.push(adiabatic::field_slice(problem, p.z, &taus)?);
    }
    let history = FieldState { tau: taus, slices };
    let conservation = if history.slices.len() >= 2 {
        Some(conservation_residual(&history, problem)?)
    } else {
        None
    };

    Ok(DiagnosticsReport {
        z_break: breakdown.z_break,
        breakdown_sign_condition: breakdown.sign_condition,
        z_pump_est: z_pump_estimate(q)?,
        z_pump_measured: z_pump_measured(problem, settings.pump_threshold, &settings.pump_scan)?,
        z_stirap_est,
        efficiency_curve: efficiency,
        conservation_residual: conservation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_sech_pulses, normalize, MediumParams, SystemKind};

    fn lambda(q: f64, delay: f64) -> Problem {
        normalize(
            MediumParams::lambda(q).unwrap(),
            make_sech_pulses(10.0, 1.0, delay).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn pump_estimate_values() {
        assert_eq!(z_pump_estimate(1.0).unwrap(), 3.0);
        assert_eq!(z_pump_estimate(0.5).unwrap(), 10.0);
        assert_eq!(z_pump_estimate(2.0).unwrap(), 1.0);
        assert!(z_pump_estimate(0.0).is_err());
        assert!(z_pump_estimate(-1.0).is_err());
    }

    #[test]
    fn stirap_estimate_values() {
        assert_eq!(z_stirap_estimate(5.0, 1.0, 1.0).unwrap(), 2.5);
        assert_eq!(z_stirap_estimate(2.5, 1.0, 1.0).unwrap(), 1.25);
        assert_eq!(z_stirap_estimate(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(
            z_stirap_estimate(2.5, 1.0, 0.5).unwrap(),
            z_stirap_estimate(2.5, 1.0, 1.0).unwrap()
        );
        // capped by the depletion length
        assert_eq!(z_stirap_estimate(5.0, 1.0, 2.0).unwrap(), 1.0);
        assert!(z_stirap_estimate(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn efficiency_at_entrance_is_limit_population() {
        let e = transfer_efficiency(&lambda(1.0, 2.5), 0.0).unwrap();
        let limit = (2.5f64.exp().atan()).sin().powi(2);
        assert!((e - limit).abs() < 1e-5, "{e} vs {limit}");
        assert!((e - 0.993307149075715).abs() < 1e-5);
    }

    #[test]
    fn no_breakdown_for_weak_pump_coupling() {
        for q in [0.5, 1.0] {
            let b = breakdown_length(&lambda(q, 2.5), 10.0, 64).unwrap();
            assert_eq!(b.z_break, None, "q = {q}");
            assert!(!b.sign_condition);
        }
    }

    /// Fold onset from `h'(ξ) = 0`: the smallest `z` at which
    /// `C(ξ) + 2 z a² f f' θ0' = 0` has a solution.
    fn analytic_onset(p: &Problem) -> f64 {
        let (lo, hi) = p.pulses.support();
        let a2 = p.peak().powi(2);
        let n = 400_000;
        (0..=n)
            .filter_map(|k| {
                let xi = lo + (hi - lo) * k as f64 / n as f64;
                let th = p.pulses.mixing_angle(xi);
                let term = p.coupling_factor(th) * p.coupling_slope(th) * p.pulses.mixing_rate(xi);
                (term < 0.0).then(|| p.fluence_density(xi) / (-2.0 * a2 * term))
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn breakdown_matches_turning_point_of_launch_map() {
        let mut last = f64::INFINITY;
        for q in [1.5, 2.0, 3.0] {
            let p = lambda(q, 2.5);
            let b = breakdown_length(&p, 10.0, 64).unwrap();
            let z = b.z_break.expect("fold expected");
            let expected = analytic_onset(&p);
            assert!(
                (z - expected).abs() < 2e-3 * expected,
                "q = {q}: {z} vs {expected}"
            );
            assert!(b.sign_condition);
            assert!(z < last);
            last = z;
        }
    }

    #[test]
    fn efficiency_reports_fold() {
        let p = lambda(2.0, 2.5);
        let curve = efficiency_curve(&p, &[0.0, 1.0]).unwrap();
        assert!(curve[0].efficiency.is_some());
        assert!(curve[1].efficiency.is_none() && curve[1].fold_tau.is_some());
    }

    #[test]
    fn adiabatic_history_conserves_photons() {
        // V advances its characteristics and folds early, so stay short there
        for (kind, z_max) in [(SystemKind::Lambda, 3.0), (SystemKind::Vee, 0.1)] {
            let p = normalize(
                MediumParams::new(kind, 0.7).unwrap(),
                make_sech_pulses(10.0, 1.0, 2.5).unwrap(),
            )
            .unwrap();
            let taus = p.grid.taus();
            let slices = [0.0, 0.2, 0.5, 1.0]
                .iter()
                .map(|&z| adiabatic::field_slice(&p, z * z_max, &taus).unwrap())
                .collect();
            let h = FieldState { tau: taus, slices };
            assert!(conservation_residual(&h, &p).unwrap() < 1e-10);
        }
    }

    #[test]
    fn conservation_needs_two_slices() {
        let p = lambda(1.0, 2.5);
        let taus = p.grid.taus();
        let h = FieldState {
            slices: vec![adiabatic::field_slice(&p, 0.0, &taus).unwrap()],
            tau: taus,
        };
        assert!(conservation_residual(&h, &p).is_err());
    }

    #[test]
    fn depletion_scan_edges() {
        let p = lambda(1.0, 2.5);
        assert_eq!(z_pump_measured(&p, 0.1, &[]).unwrap(), None);
        assert!(z_pump_measured(&p, 1.5, &[1.0]).is_err());
    }
}
