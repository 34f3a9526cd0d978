//! Direct integration of the coupled Schrödinger and reduced Maxwell
//! equations, used as an independent check of the adiabatic solution.
//!
//! Each field is carried as a complex envelope `E = Ω e^{iφ}`. For a fixed
//! `z`, the level amplitudes obey
//!
//! ```text
//! i ḃ1 = E_p* b2
//! i ḃ2 = E_p b1 + (Δp - iΓ) b2 + E_s b3
//! i ḃ3 = E_s* b2
//! ```
//!
//! and the fields advance in `z` as
//! `∂E_p/∂z = -i a² q_p b1* b2`, `∂E_s/∂z = -i a² q_s b3* b2`
//! (signed couplings). The τ-march is classical RK4, the z-march is Heun.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{self, AdiabaticSolution, CharacteristicMap, Launch};
use crate::error::{Error, Result};
use crate::model::{AmplitudeSlice, AmplitudeState, FieldSlice, FieldState, Problem, TAIL_FLOOR};

/// `dt · max(W, |Δp|, Γ)` must stay below this.
pub const STABILITY_LIMIT: f64 = 0.1;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Propagation step in units of z.
    pub dz: f64,
    /// Time step in units of T.
    pub dt: f64,
    pub delta_p: f64,
    pub gamma: f64,
    /// Time at which the atoms are prepared in the trapped state.
    pub tail_start: f64,
    /// Keep every n-th z slice in the history.
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl OracleConfig {
    /// Defaults for a problem: `dz = min(0.005, 0.5/a²)`, and `dt` no larger than the grid
    /// spacing and small enough for the stability guard with room for the
    /// growth of `W` allowed by the conservation law.
    pub fn for_problem(problem: &Problem) -> OracleConfig {
        let grid = &problem.grid;
        let w0_max = grid
            .taus()
            .iter()
            .map(|&t| problem.pulses.pump(t).hypot(problem.pulses.stokes(t)))
            .fold(0.0, f64::max);
        let (qp, qs) = (problem.q_pump.abs(), problem.q_stokes.abs());
        let growth = (qp.max(qs) / qp.min(qs)).sqrt();
        let rate = (w0_max * growth)
            .max(problem.medium.delta_p.abs())
            .max(problem.medium.gamma);
        let dt = if rate > 0.0 {
            grid.spacing().min(0.5 * STABILITY_LIMIT / rate)
        } else {
            grid.spacing()
        };
        OracleConfig {
            // the z-march goes unstable once dz·a² is much above a few
            dz: 0.005f64.min(0.5 / problem.peak().powi(2)),
            dt,
            delta_p: problem.medium.delta_p,
            gamma: problem.medium.gamma,
            tail_start: grid.tau_min,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dz > 0.0 && self.dz.is_finite()) {
            return Err(Error::invalid("dz", "must be > 0"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::invalid("gamma", "must be >= 0"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Uniform time axis from `tail_start` to `tau_max` with step close to `dt`.
    pub fn taus(&self, tau_max: f64) -> Vec<f64> {
        let span = tau_max - self.tail_start;
        let n = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize + 1;
        let h = span / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    tau_max
                } else {
                    self.tail_start + k as f64 * h
                }
            })
            .collect()
    }
}

/// Complex pump and Stokes envelopes on a uniform time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceFields {
    pub dt: f64,
    pub pump: Vec<C64>,
    pub stokes: Vec<C64>,
}

impl SliceFields {
    fn midpoint(values: &[C64], k: usize) -> C64 {
        let n = values.len();
        if k >= 1 && k + 2 < n {
            (-values[k - 1] + 9.0 * values[k] + 9.0 * values[k + 1] - values[k + 2]) / 16.0
        } else {
            0.5 * (values[k] + values[k + 1])
        }
    }

    pub fn max_rabi(&self) -> f64 {
        self.pump
            .iter()
            .zip(&self.stokes)
            .map(|(p, s)| p.norm().hypot(s.norm()))
            .fold(0.0, f64::max)
    }
}

/// Trapped state `(E_s, 0, -E_p)/W`; the ground state when both fields vanish.
pub fn trapped_state(pump: C64, stokes: C64) -> [C64; 3] {
    let w = pump.norm().hypot(stokes.norm());
    if w == 0.0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    [stokes / w, C64::new(0.0, 0.0), -pump / w]
}

fn schrodinger(b: &[C64; 3], ep: C64, es: C64, detuning: C64) -> [C64; 3] {
    [
        -I * ep.conj() * b[1],
        -I * (ep * b[0] + detuning * b[1] + es * b[2]),
        -I * es.conj() * b[1],
    ]
}

fn axpy(b: &[C64; 3], h: f64, k: &[C64; 3]) -> [C64; 3] {
    [b[0] + h * k[0], b[1] + h * k[1], b[2] + h * k[2]]
}

/// RK4 march of the level amplitudes through one z-slice, starting in the
/// trapped state defined by the first field sample.
pub fn integrate_slice(fields: &SliceFields, config: &OracleConfig) -> Result<Vec<[C64; 3]>> {
    let init = trapped_state(fields.pump[0], fields.stokes[0]);
    integrate_slice_from(fields, config, init)
}

pub fn integrate_slice_from(
    fields: &SliceFields,
    config: &OracleConfig,
    init: [C64; 3],
) -> Result<Vec<[C64; 3]>> {
    let n = fields.pump.len();
    if fields.stokes.len() != n {
        return Err(Error::Alignment("pump and Stokes lengths differ".into()));
    }
    let dt = fields.dt;
    let product = dt
        * fields
            .max_rabi()
            .max(config.delta_p.abs())
            .max(config.gamma);
    if !(product < STABILITY_LIMIT) {
        return Err(Error::StepSize {
            product,
            limit: STABILITY_LIMIT,
        });
    }
    // i ḃ2 = ... + (Δp - iΓ) b2 damps |b2|
    let detuning = C64::new(config.delta_p, -config.gamma);
    let mut out = Vec::with_capacity(n);
    let mut b = init;
    out.push(b);
    for k in 0..n.saturating_sub(1) {
        let (p0, s0) = (fields.pump[k], fields.stokes[k]);
        let (p1, s1) = (fields.pump[k + 1], fields.stokes[k + 1]);
        let pm = SliceFields::midpoint(&fields.pump, k);
        let sm = SliceFields::midpoint(&fields.stokes, k);
        let k1 = schrodinger(&b, p0, s0, detuning);
        let k2 = schrodinger(&axpy(&b, 0.5 * dt, &k1), pm, sm, detuning);
        let k3 = schrodinger(&axpy(&b, 0.5 * dt, &k2), pm, sm, detuning);
        let k4 = schrodinger(&axpy(&b, dt, &k3), p1, s1, detuning);
        for i in 0..3 {
            b[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(b);
    }
    Ok(out)
}

/// Per-τ rates `(dΩ_p/dz, dΩ_s/dz, dφ_p/dz, dφ_s/dz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRates {
    pub d_omega_p: Vec<f64>,
    pub d_omega_s: Vec<f64>,
    pub d_phi_p: Vec<f64>,
    pub d_phi_s: Vec<f64>,
}

fn complex_sources(amplitudes: &[[C64; 3]], problem: &Problem) -> (Vec<C64>, Vec<C64>) {
    let a2 = problem.peak().powi(2);
    let (qp, qs) = (problem.q_pump, problem.q_stokes);
    amplitudes
        .iter()
        .map(|b| {
            (
                -I * a2 * qp * b[0].conj() * b[1],
                -I * a2 * qs * b[2].conj() * b[1],
            )
        })
        .unzip()
}

/// Right-hand sides of the reduced propagation equations as amplitude and
/// phase rates. Phase rates are zero where the envelope is below the tail floor.
pub fn polarization_sources(
    amplitudes: &[[C64; 3]],
    fields: &SliceFields,
    problem: &Problem,
) -> Result<SourceRates> {
    if amplitudes.len() != fields.pump.len() {
        return Err(Error::Alignment(format!(
            "{} amplitude samples vs {} field samples",
            amplitudes.len(),
            fields.pump.len()
        )));
    }
    let floor = TAIL_FLOOR * problem.peak();
    let (dp, ds) = complex_sources(amplitudes, problem);
    let split = |e: C64, de: C64| -> (f64, f64) {
        let mag = e.norm();
        if mag < floor {
            (de.re, 0.0)
        } else {
            let rot = e.conj() * de / mag;
            (rot.re, rot.im / mag)
        }
    };
    let mut rates = SourceRates {
        d_omega_p: Vec::with_capacity(dp.len()),
        d_omega_s: Vec::with_capacity(dp.len()),
        d_phi_p: Vec::with_capacity(dp.len()),
        d_phi_s: Vec::with_capacity(dp.len()),
    };
    for k in 0..dp.len() {
        let (op, pp) = split(fields.pump[k], dp[k]);
        let (os, ps) = split(fields.stokes[k], ds[k]);
        rates.d_omega_p.push(op);
        rates.d_omega_s.push(os);
        rates.d_phi_p.push(pp);
        rates.d_phi_s.push(ps);
    }
    Ok(rates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSlice {
    pub z: f64,
    pub pump: Vec<C64>,
    pub stokes: Vec<C64>,
    pub amplitudes: Vec<[C64; 3]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ConvergenceStats {
    pub steps: usize,
    pub slices_recorded: usize,
    /// Largest `|Σ|b_i|² - 1|` over every recorded cell.
    pub max_norm_drift: f64,
    /// Largest relative drift of the τ-integrated conserved photon combination.
    pub max_photon_drift: f64,
}

/// Oracle run: fields and amplitudes at every recorded z step.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    pub tau: Vec<f64>,
    pub config: OracleConfig,
    pub slices: Vec<OracleSlice>,
    pub stats: ConvergenceStats,
}

impl FieldHistory {
    pub fn field_state(&self) -> FieldState {
        let slices = self
            .slices
            .iter()
            .map(|s| {
                let mut out = FieldSlice::with_capacity(s.z, s.pump.len());
                for (p, st) in s.pump.iter().zip(&s.stokes) {
                    let (op, os) = (p.norm(), st.norm());
                    out.omega_p.push(op);
                    out.omega_s.push(os);
                    out.w_total.push(op.hypot(os));
                    out.theta.push(op.atan2(os));
                    out.phi_p.push(if op > 0.0 { p.arg() } else { 0.0 });
                    out.phi_s.push(if os > 0.0 { st.arg() } else { 0.0 });
                }
                out
            })
            .collect();
        FieldState {
            tau: self.tau.clone(),
            slices,
        }
    }

    pub fn amplitude_state(&self) -> AmplitudeState {
        AmplitudeState {
            tau: self.tau.clone(),
            slices: self
                .slices
                .iter()
                .map(|s| AmplitudeSlice {
                    z: s.z,
                    b1: s.amplitudes.iter().map(|b| b[0]).collect(),
                    b2: s.amplitudes.iter().map(|b| b[1]).collect(),
                    b3: s.amplitudes.iter().map(|b| b[2]).collect(),
                })
                .collect(),
        }
    }

    /// The recorded slice closest to `z`.
    pub fn nearest(&self, z: f64) -> Option<&OracleSlice> {
        self.slices
            .iter()
            .min_by(|a, b| (a.z - z).abs().total_cmp(&(b.z - z).abs()))
    }
}

fn trapezoid(values: impl Iterator<Item = f64>, dt: f64) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    dt * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}

fn photon_integral(problem: &Problem, pump: &[C64], stokes: &[C64], dt: f64) -> f64 {
    trapezoid(
        pump.iter()
            .zip(stokes)
            .map(|(p, s)| problem.conserved_density(p.norm(), s.norm())),
        dt,
    )
}

/// March the fields from the entrance to `z_max`, keeping every
/// `record_every`-th step and the last one.
pub fn propagate(problem: &Problem, config: &OracleConfig, z_max: f64) -> Result<FieldHistory> {
    config.validate()?;
    if !(z_max >= 0.0 && z_max.is_finite()) {
        return Err(Error::invalid("z_max", "must be finite and >= 0"));
    }
    let n_steps = (z_max / config.dz + 1e-9).floor() as usize;
    let every = config.record_every;
    march(problem, config, n_steps, |step| {
        step % every == 0 || step == n_steps
    })
}

/// March to the largest of `z_values`, keeping only the steps nearest to
/// each requested length. Recorded slices carry the step's own `z`.
pub fn propagate_at(
    problem: &Problem,
    config: &OracleConfig,
    z_values: &[f64],
) -> Result<FieldHistory> {
    config.validate()?;
    if z_values.iter().any(|z| !(*z >= 0.0 && z.is_finite())) {
        return Err(Error::invalid("z", "must be finite and >= 0"));
    }
    let wanted: Vec<usize> = z_values
        .iter()
        .map(|z| (z / config.dz).round() as usize)
        .collect();
    let n_steps = wanted.iter().copied().max().unwrap_or(0);
    march(problem, config, n_steps, |step| wanted.contains(&step))
}

/// Growth past the step guard after the entrance is a blow-up, not a bad config.
fn blown_up(e: Error, z: f64, step: usize) -> Error {
    match e {
        Error::StepSize { .. } => Error::Divergence {
            z,
            last_stable: step - 1,
        },
        other => other,
    }
}

fn march(
    problem: &Problem,
    config: &OracleConfig,
    n_steps: usize,
    keep: impl Fn(usize) -> bool,
) -> Result<FieldHistory> {
    let tau = config.taus(problem.grid.tau_max);
    let dt = tau[1] - tau[0];
    let mut fields = SliceFields {
        dt,
        pump: tau
            .iter()
            .map(|&t| C64::new(problem.pulses.pump(t), 0.0))
            .collect(),
        stokes: tau
            .iter()
            .map(|&t| C64::new(problem.pulses.stokes(t), 0.0))
            .collect(),
    };
    let mut amps = integrate_slice(&fields, config)?;
    let photons0 = photon_integral(problem, &fields.pump, &fields.stokes, dt);
    let mut stats = ConvergenceStats::default();
    let norm_drift = |amps: &[[C64; 3]]| {
        amps.iter()
            .map(|b| (b.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    };
    stats.max_norm_drift = norm_drift(&amps);
    let mut slices = Vec::new();
    if keep(0) || n_steps == 0 {
        slices.push(OracleSlice {
            z: 0.0,
            pump: fields.pump.clone(),
            stokes: fields.stokes.clone(),
            amplitudes: amps.clone(),
        });
    }

    let dz = config.dz;
    let blowup = 1e6 * problem.peak();
    for step in 1..=n_steps {
        let z = step as f64 * dz;
        let (sp0, ss0) = complex_sources(&amps, problem);
        let predicted = SliceFields {
            dt,
            pump: fields
                .pump
                .iter()
                .zip(&sp0)
                .map(|(e, s)| e + dz * s)
                .collect(),
            stokes: fields
                .stokes
                .iter()
                .zip(&ss0)
                .map(|(e, s)| e + dz * s)
                .collect(),
        };
        let amps_pred = integrate_slice(&predicted, config).map_err(|e| blown_up(e, z, step))?;
        let (sp1, ss1) = complex_sources(&amps_pred, problem);
        for k in 0..tau.len() {
            fields.pump[k] += 0.5 * dz * (sp0[k] + sp1[k]);
            fields.stokes[k] += 0.5 * dz * (ss0[k] + ss1[k]);
        }
        let diverged = fields
            .pump
            .iter()
            .chain(&fields.stokes)
            .any(|e| !e.re.is_finite() || !e.im.is_finite() || e.norm() > blowup);
        if diverged {
            return Err(Error::Divergence {
                z,
                last_stable: step - 1,
            });
        }
        amps = integrate_slice(&fields, config).map_err(|e| blown_up(e, z, step))?;
        stats.steps = step;
        if keep(step) {
            stats.max_norm_drift = stats.max_norm_drift.max(norm_drift(&amps));
            let photons = photon_integral(problem, &fields.pump, &fields.stokes, dt);
            stats.max_photon_drift = stats
                .max_photon_drift
                .max(((photons - photons0) / photons0).abs());
            slices.push(OracleSlice {
                z,
                pump: fields.pump.clone(),
                stokes: fields.stokes.clone(),
                amplitudes: amps.clone(),
            });
        }
    }
    stats.slices_recorded = slices.len();
    Ok(FieldHistory {
        tau,
        config: *config,
        slices,
        stats,
    })
}

/// Relative errors of one quantity set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FieldErrors {
    pub omega_p: f64,
    pub omega_s: f64,
    pub theta: f64,
    pub pop1: f64,
    pub pop2: f64,
    pub pop3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceComparison {
    pub z: f64,
    pub l2: FieldErrors,
    pub linf: FieldErrors,
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn populations(amps: &AmplitudeSlice, level: usize) -> Vec<f64> {
    let col = match level {
        0 => &amps.b1,
        1 => &amps.b2,
        _ => &amps.b3,
    };
    col.iter().map(|b| b.norm_sqr()).collect()
}

fn compare_slice(
    z: f64,
    a_fields: &FieldSlice,
    a_amps: &AmplitudeSlice,
    o_fields: &FieldSlice,
    o_amps: &AmplitudeSlice,
) -> SliceComparison {
    let metric = |f: fn(&[f64], &[f64]) -> f64| {
        let (pa, po): (Vec<_>, Vec<_>) = (0..3)
            .map(|l| (populations(a_amps, l), populations(o_amps, l)))
            .unzip();
        FieldErrors {
            omega_p: f(&a_fields.omega_p, &o_fields.omega_p),
            omega_s: f(&a_fields.omega_s, &o_fields.omega_s),
            theta: f(&a_fields.theta, &o_fields.theta),
            pop1: f(&pa[0], &po[0]),
            pop2: f(&pa[1], &po[1]),
            pop3: f(&pa[2], &po[2]),
        }
    };
    SliceComparison {
        z,
        l2: metric(rel_l2),
        linf: metric(rel_linf),
    }
}

fn check_alignment(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "{} vs {} time samples",
            a.len(),
            b.len()
        )));
    }
    let scale = b.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-9 * scale) {
        return Err(Error::Alignment("time samples differ".into()));
    }
    Ok(())
}

/// Relative L2 and L∞ errors per field and per z slice of the adiabatic
/// solution, measured against the oracle.
pub fn compare(
    adiabatic: &AdiabaticSolution,
    oracle: &FieldHistory,
) -> Result<Vec<SliceComparison>> {
    check_alignment(&adiabatic.fields.tau, &oracle.tau)?;
    let o_fields = oracle.field_state();
    let o_amps = oracle.amplitude_state();
    adiabatic
        .fields
        .slices
        .iter()
        .zip(&adiabatic.amplitudes.slices)
        .map(|(af, aa)| {
            let idx = o_fields
                .slices
                .iter()
                .position(|s| (s.z - af.z).abs() <= 1e-9 * af.z.abs().max(1.0))
                .ok_or_else(|| Error::Alignment(format!("no oracle slice at z = {}", af.z)))?;
            Ok(compare_slice(
                af.z,
                af,
                aa,
                &o_fields.slices[idx],
                &o_amps.slices[idx],
            ))
        })
        .collect()
}

/// Outcome of checking one oracle slice against the adiabatic solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub z: f64,
    pub metrics: SliceComparison,
    /// Set when the adiabatic map folds or loses adiabaticity on this slice.
    pub annotation: Option<String>,
}

/// Compare every recorded oracle slice with the adiabatic solution at the
/// same z. Folded cells use the latest-launch root and are annotated instead
/// of aborting the comparison.
pub fn validate(problem: &Problem, oracle: &FieldHistory) -> Result<Vec<ValidationRow>> {
    let o_fields = oracle.field_state();
    let o_amps = oracle.amplitude_state();
    let mut rows = Vec::with_capacity(oracle.slices.len());
    for (of, oa) in o_fields.slices.iter().zip(&o_amps.slices) {
        let z = of.z;
        let (af, aa, notes) = relaxed_slice(problem, z, &oracle.tau)?;
        rows.push(ValidationRow {
            z,
            metrics: compare_slice(z, &af, &aa, of, oa),
            annotation: notes,
        });
    }
    Ok(rows)
}

/// Adiabatic slice that tolerates folds (latest-launch root) and
/// non-adiabatic cells (zeroth-order trapped state); returns a note when
/// either occurred.
pub fn relaxed_slice(
    problem: &Problem,
    z: f64,
    taus: &[f64],
) -> Result<(FieldSlice, AmplitudeSlice, Option<String>)> {
    if let Ok((f, a)) = adiabatic::solve_slice(problem, z, taus) {
        return Ok((f, a, None));
    }
    let map = CharacteristicMap::new(problem, z)?;
    let cells: Vec<RelaxedCell> = taus
        .par_iter()
        .map(|&tau| relaxed_point(&map, tau))
        .collect::<Result<_>>()?;
    let mut fields = FieldSlice::with_capacity(z, taus.len());
    let mut amps = AmplitudeSlice {
        z,
        b1: Vec::new(),
        b2: Vec::new(),
        b3: Vec::new(),
    };
    let (mut folded, mut nonadiabatic) = (0usize, 0usize);
    let mut first_fold = None;
    for (k, (op, os, w, th, b, fold, na)) in cells.into_iter().enumerate() {
        fields.omega_p.push(op);
        fields.omega_s.push(os);
        fields.w_total.push(w);
        fields.theta.push(th);
        fields.phi_p.push(0.0);
        fields.phi_s.push(0.0);
        amps.b1.push(b[0]);
        amps.b2.push(b[1]);
        amps.b3.push(b[2]);
        if fold {
            folded += 1;
            first_fold.get_or_insert(taus[k]);
        }
        nonadiabatic += na as usize;
    }
    let note = match first_fold {
        Some(t) => format!(
            "fold: {folded} folded cells from tau = {t:.4}; {nonadiabatic} non-adiabatic cells"
        ),
        None => format!("{nonadiabatic} non-adiabatic cells"),
    };
    Ok((fields, amps, Some(note)))
}

/// `(Ω_p, Ω_s, W, θ, b, folded, non-adiabatic)`.
type RelaxedCell = (f64, f64, f64, f64, [C64; 3], bool, bool);

fn relaxed_point(map: &CharacteristicMap<'_>, tau: f64) -> Result<RelaxedCell> {
    let problem = map.problem();
    match map.point(tau) {
        Ok(pt) => match pt.amplitudes(problem.medium.delta_p, map.z()) {
            Ok(b) => Ok((
                pt.omega_p, pt.omega_s, pt.w_total, pt.theta, b, false, false,
            )),
            Err(_) => {
                let b = trapped_state(C64::new(pt.omega_p, 0.0), C64::new(pt.omega_s, 0.0));
                Ok((pt.omega_p, pt.omega_s, pt.w_total, pt.theta, b, false, true))
            }
        },
        Err(Error::Fold { .. }) | Err(Error::NearFold { .. }) => {
            let xi = match map.launch(tau) {
                Launch::Root(r) => r.xi,
                _ => tau,
            };
            let theta = problem.pulses.mixing_angle(xi);
            let w2 = problem.fluence_density(tau) / problem.coupling_factor(theta);
            let w = w2.max(0.0).sqrt();
            let (s, c) = theta.sin_cos();
            let b = [C64::new(c, 0.0), C64::new(0.0, 0.0), C64::new(-s, 0.0)];
            Ok((w * s, w * c, w, theta, b, true, true))
        }
        Err(e) => Err(e),
    }
}
