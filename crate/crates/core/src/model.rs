//! Domain types: medium parameters, entrance pulses, grids and the
//! dimensionless problem consumed by every solver.
//!
//! Units after normalization: time in units of the pulse width `T`, Rabi
//! frequencies in units of `1/T`, the Stokes coupling `q_s` equal to one and
//! propagation length expressed as `z = x q_s / (a^2 T)` where `a` is the
//! common peak Rabi frequency.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Envelopes below `TAIL_FLOOR * a` are treated as field-free.
pub const TAIL_FLOOR: f64 = 1e-12;

/// Three-level coupling topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    #[serde(alias = "Lambda", alias = "LAMBDA")]
    Lambda,
    #[serde(alias = "Xi", alias = "XI", alias = "ladder")]
    Xi,
    #[serde(alias = "Vee", alias = "V", alias = "v")]
    Vee,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemKind::Lambda => "lambda",
            SystemKind::Xi => "xi",
            SystemKind::Vee => "vee",
        })
    }
}

/// Sign multipliers applied to the pump and Stokes coupling constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signs {
    pub pump: f64,
    pub stokes: f64,
}

/// Λ keeps both couplings, Ξ flips the Stokes coupling, V flips both.
pub fn system_signs(kind: SystemKind) -> Signs {
    match kind {
        SystemKind::Lambda => Signs {
            pump: 1.0,
            stokes: 1.0,
        },
        SystemKind::Xi => Signs {
            pump: 1.0,
            stokes: -1.0,
        },
        SystemKind::Vee => Signs {
            pump: -1.0,
            stokes: -1.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub kind: SystemKind,
    /// Oscillator-strength ratio `q = q_p / q_s`.
    pub q_ratio: f64,
    /// One-photon detuning in units of `1/T`.
    #[serde(default)]
    pub delta_p: f64,
    /// Upper-level decay rate in units of `1/T`.
    #[serde(default)]
    pub gamma: f64,
}

impl MediumParams {
    pub fn new(kind: SystemKind, q_ratio: f64) -> Result<Self> {
        let medium = MediumParams {
            kind,
            q_ratio,
            delta_p: 0.0,
            gamma: 0.0,
        };
        medium.validate()?;
        Ok(medium)
    }

    pub fn lambda(q_ratio: f64) -> Result<Self> {
        Self::new(SystemKind::Lambda, q_ratio)
    }

    pub fn with_detuning(mut self, delta_p: f64) -> Self {
        self.delta_p = delta_p;
        self
    }

    pub fn with_decay(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_ratio > 0.0 && self.q_ratio.is_finite()) {
            return Err(Error::invalid(
                "q_ratio",
                format!("must be > 0, got {}", self.q_ratio),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(
                "gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        if !self.delta_p.is_finite() {
            return Err(Error::invalid("delta_p", "must be finite"));
        }
        Ok(())
    }
}

/// Pump and Stokes envelopes sampled on a common, strictly increasing time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulses {
    times: Vec<f64>,
    pump: Vec<f64>,
    stokes: Vec<f64>,
    // running integrals of the squared envelopes at each sample
    cum_pump: Vec<f64>,
    cum_stokes: Vec<f64>,
    // first and last sample index at which either envelope is above the floor
    active: (usize, usize),
}

impl SampledPulses {
    pub fn new(times: Vec<f64>, pump: Vec<f64>, stokes: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::invalid("sampled", "need at least two samples"));
        }
        if pump.len() != n || stokes.len() != n {
            return Err(Error::invalid("sampled", "column lengths differ"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "sampled",
                "times must be strictly increasing",
            ));
        }
        if pump
            .iter()
            .chain(&stokes)
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid(
                "sampled",
                "envelopes must be finite and nonnegative",
            ));
        }
        let cumulative = |values: &[f64]| {
            let mut acc = Vec::with_capacity(n);
            acc.push(0.0);
            for k in 1..n {
                let dt = times[k] - times[k - 1];
                let prev = acc[k - 1];
                acc.push(prev + 0.5 * dt * (values[k - 1].powi(2) + values[k].powi(2)));
            }
            acc
        };
        let cum_pump = cumulative(&pump);
        let cum_stokes = cumulative(&stokes);
        let peak = pump.iter().chain(&stokes).cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::invalid(
                "sampled",
                "both envelopes vanish identically",
            ));
        }
        let floor = TAIL_FLOOR * peak;
        let above = |k: usize| pump[k].max(stokes[k]) >= floor;
        let first = (0..n).find(|&k| above(k)).unwrap_or(0);
        let last = (0..n).rev().find(|&k| above(k)).unwrap_or(n - 1);
        Ok(SampledPulses {
            times,
            pump,
            stokes,
            cum_pump,
            cum_stokes,
            active: (first, last),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn pump_samples(&self) -> &[f64] {
        &self.pump
    }

    pub fn stokes_samples(&self) -> &[f64] {
        &self.stokes
    }

    fn peak(&self) -> f64 {
        self.pump
            .iter()
            .chain(&self.stokes)
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Index `k` with `times[k] <= t < times[k + 1]`, clamped to the table.
    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    fn interp(&self, values: &[f64], t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return if t == self.times[0] { values[0] } else { 0.0 };
        }
        if t >= self.times[n - 1] {
            return if t == self.times[n - 1] {
                values[n - 1]
            } else {
                0.0
            };
        }
        let k = self.segment(t);
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        values[k] + s * (values[k + 1] - values[k])
    }

    fn slope(&self, values: &[f64], t: f64) -> f64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return 0.0;
        }
        let k = self.segment(t);
        (values[k + 1] - values[k]) / (self.times[k + 1] - self.times[k])
    }

    /// Running integral of the linear interpolant of the squared samples.
    fn cumulative(&self, values: &[f64], cum: &[f64], t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return 0.0;
        }
        if t >= self.times[n - 1] {
            return cum[n - 1];
        }
        let k = self.segment(t);
        let dt = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / dt;
        let (y0, y1) = (values[k].powi(2), values[k + 1].powi(2));
        cum[k] + dt * (y0 * s + 0.5 * (y1 - y0) * s * s)
    }

    fn intensity(&self, values: &[f64], t: f64) -> f64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return 0.0;
        }
        let k = self.segment(t);
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let (y0, y1) = (values[k].powi(2), values[k + 1].powi(2));
        y0 + s * (y1 - y0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// `Ω_p0 = a / cosh((τ - t_d)/T)`, `Ω_s0 = a / cosh(τ/T)`.
    Sech {
        peak: f64,
        width: f64,
        delay: f64,
    },
    Sampled(SampledPulses),
}

/// Entrance envelopes `Ω_p0(τ)` and `Ω_s0(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntrancePulses {
    pub shape: PulseShape,
}

/// Build the analytic hyperbolic-secant pulse pair.
///
/// `delay > 0` puts the Stokes pulse first (counter-intuitive order).
pub fn make_sech_pulses(peak: f64, width: f64, delay: f64) -> Result<EntrancePulses> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::invalid(
            "a",
            format!("peak Rabi frequency must be > 0, got {peak}"),
        ));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(
            "T",
            format!("pulse width must be > 0, got {width}"),
        ));
    }
    if !delay.is_finite() {
        return Err(Error::invalid("t_d", "delay must be finite"));
    }
    Ok(EntrancePulses {
        shape: PulseShape::Sech { peak, width, delay },
    })
}

/// `ln cosh x` without overflow.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// `tanh x - tanh y` without cancellation when both sit in the same tail.
pub(crate) fn tanh_diff(x: f64, y: f64) -> f64 {
    if x.abs().max(y.abs()) < 300.0 {
        (x - y).sinh() / (x.cosh() * y.cosh())
    } else {
        x.tanh() - y.tanh()
    }
}

impl EntrancePulses {
    pub fn sampled(samples: SampledPulses) -> Self {
        EntrancePulses {
            shape: PulseShape::Sampled(samples),
        }
    }

    /// Peak Rabi frequency `a` used by the length normalization.
    pub fn peak(&self) -> f64 {
        match &self.shape {
            PulseShape::Sech { peak, .. } => *peak,
            PulseShape::Sampled(s) => s.peak(),
        }
    }

    /// Pulse width `T` (unity for sampled pulses, which are taken as already normalized).
    pub fn width(&self) -> f64 {
        match &self.shape {
            PulseShape::Sech { width, .. } => *width,
            PulseShape::Sampled(_) => 1.0,
        }
    }

    pub fn delay(&self) -> Option<f64> {
        match &self.shape {
            PulseShape::Sech { delay, .. } => Some(*delay),
            PulseShape::Sampled(_) => None,
        }
    }

    pub fn pump(&self, tau: f64) -> f64 {
        match &self.shape {
            PulseShape::Sech { peak, width, delay } => peak / ((tau - delay) / width).cosh(),
            PulseShape::Sampled(s) => s.interp(&s.pump, tau),
        }
    }

    pub fn stokes(&self, tau: f64) -> f64 {
        match &self.shape {
            PulseShape::Sech { peak, width, .. } => peak / (tau / width).cosh(),
            PulseShape::Sampled(s) => s.interp(&s.stokes, tau),
        }
    }

    /// Squared envelopes as seen by the fluence integral (their τ-derivative).
    pub fn intensities(&self, tau: f64) -> (f64, f64) {
        match &self.shape {
            PulseShape::Sech { .. } => (self.pump(tau).powi(2), self.stokes(tau).powi(2)),
            PulseShape::Sampled(s) => (s.intensity(&s.pump, tau), s.intensity(&s.stokes, tau)),
        }
    }

    /// `(∫ Ω_p0², ∫ Ω_s0²)` over `[xi, tau]`; negative when `xi > tau`.
    pub fn squared_integrals(&self, xi: f64, tau: f64) -> (f64, f64) {
        match &self.shape {
            PulseShape::Sech { peak, width, delay } => {
                let scale = peak * peak * width;
                let p = tanh_diff((tau - delay) / width, (xi - delay) / width);
                let s = tanh_diff(tau / width, xi / width);
                (scale * p, scale * s)
            }
            PulseShape::Sampled(smp) => {
                let p = smp.cumulative(&smp.pump, &smp.cum_pump, tau)
                    - smp.cumulative(&smp.pump, &smp.cum_pump, xi);
                let s = smp.cumulative(&smp.stokes, &smp.cum_stokes, tau)
                    - smp.cumulative(&smp.stokes, &smp.cum_stokes, xi);
                (p, s)
            }
        }
    }

    /// Interval outside of which both envelopes sit below the tail floor.
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            PulseShape::Sech { width, delay, .. } => {
                let reach = (1.0 / TAIL_FLOOR).acosh() * width;
                (delay.min(0.0) - reach, delay.max(0.0) + reach)
            }
            PulseShape::Sampled(s) => (s.times[s.active.0], s.times[s.active.1]),
        }
    }

    /// Limiting mixing angles held at the leading and trailing field-free tails.
    pub fn limiting_angles(&self) -> (f64, f64) {
        match &self.shape {
            PulseShape::Sech { delay, width, .. } => {
                let d = delay / width;
                ((-d).exp().atan(), d.exp().atan())
            }
            PulseShape::Sampled(s) => {
                let (i, j) = s.active;
                (s.pump[i].atan2(s.stokes[i]), s.pump[j].atan2(s.stokes[j]))
            }
        }
    }

    /// Entrance mixing angle `θ0 = atan(Ω_p0/Ω_s0)`, held at its limit in the tails.
    pub fn mixing_angle(&self, tau: f64) -> f64 {
        let (lo, hi) = self.support();
        let (left, right) = self.limiting_angles();
        if tau <= lo {
            return left;
        }
        if tau >= hi {
            return right;
        }
        match &self.shape {
            PulseShape::Sech { width, delay, .. } => {
                let u = tau / width;
                let log_ratio = ln_cosh(u) - ln_cosh(u - delay / width);
                log_ratio.exp().atan()
            }
            PulseShape::Sampled(_) => {
                let p = self.pump(tau);
                let s = self.stokes(tau);
                if p == 0.0 && s == 0.0 {
                    if tau < 0.5 * (lo + hi) {
                        left
                    } else {
                        right
                    }
                } else {
                    p.atan2(s)
                }
            }
        }
    }

    /// `dθ0/dτ`; zero in the held tails.
    pub fn mixing_rate(&self, tau: f64) -> f64 {
        let (lo, hi) = self.support();
        if tau <= lo || tau >= hi {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Sech { width, delay, .. } => {
                // θ0' = ½ sin 2θ0 (tanh u - tanh(u - d)) / T
                let theta = self.mixing_angle(tau);
                let u = tau / width;
                0.5 * (2.0 * theta).sin() * tanh_diff(u, u - delay / width) / width
            }
            PulseShape::Sampled(s) => {
                let p = self.pump(tau);
                let st = self.stokes(tau);
                let w2 = p * p + st * st;
                if w2 == 0.0 {
                    return 0.0;
                }
                let dp = s.slope(&s.pump, tau);
                let ds = s.slope(&s.stokes, tau);
                (st * dp - p * ds) / w2
            }
        }
    }

    /// Rescale time by `T` and Rabi frequencies by `1/T`.
    fn normalized(&self) -> EntrancePulses {
        match &self.shape {
            PulseShape::Sech { peak, width, delay } => EntrancePulses {
                shape: PulseShape::Sech {
                    peak: peak * width,
                    width: 1.0,
                    delay: delay / width,
                },
            },
            PulseShape::Sampled(_) => self.clone(),
        }
    }
}

/// Uniform τ grid plus the list of propagation lengths to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_tau: usize,
    #[serde(rename = "z")]
    pub z_values: Vec<f64>,
}

impl Grid {
    pub fn new(tau_min: f64, tau_max: f64, n_tau: usize, z_values: Vec<f64>) -> Result<Self> {
        let grid = Grid {
            tau_min,
            tau_max,
            n_tau,
            z_values,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `τ ∈ [-8, 8 + t_d]` with 2048 points.
    pub fn default_for(pulses: &EntrancePulses) -> Grid {
        let (tau_min, tau_max) = match &pulses.shape {
            PulseShape::Sech { width, delay, .. } => {
                (delay.min(0.0) - 8.0 * width, delay.max(0.0) + 8.0 * width)
            }
            PulseShape::Sampled(s) => (s.times[0], s.times[s.times.len() - 1]),
        };
        Grid {
            tau_min,
            tau_max,
            n_tau: 2048,
            z_values: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min < self.tau_max) {
            return Err(Error::invalid("grid", "tau_min must be < tau_max"));
        }
        if self.n_tau < 2 {
            return Err(Error::invalid("grid", "n_tau must be >= 2"));
        }
        if self.z_values.iter().any(|z| !(*z >= 0.0 && z.is_finite())) {
            return Err(Error::invalid(
                "grid",
                "z values must be finite and nonnegative",
            ));
        }
        if self.z_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "grid",
                "z values must be strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.n_tau - 1) as f64
    }

    pub fn taus(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_tau)
            .map(|k| {
                if k + 1 == self.n_tau {
                    self.tau_max
                } else {
                    self.tau_min + k as f64 * h
                }
            })
            .collect()
    }
}

/// Dimensionless propagation length `z = x q_s / (a² T)`.
pub fn normalized_length(x: f64, q_s: f64, peak: f64, width: f64) -> f64 {
    x * q_s / (peak * peak * width)
}

/// A self-contained problem in normalized units (`T = 1`, `q_s = 1`).
#[derive(Debug, Clone)]
pub struct Problem {
    pub medium: MediumParams,
    pub pulses: EntrancePulses,
    pub grid: Grid,
    /// Signed pump coupling `s_p q`.
    pub q_pump: f64,
    /// Signed Stokes coupling `s_s`.
    pub q_stokes: f64,
    /// Dense pre-scan resolution for the characteristic root search.
    pub scan_points: usize,
}

/// Convert physical medium and pulse parameters into a [`Problem`].
///
/// The grid is the default window for the pulses; replace it with
/// [`Problem::with_grid`].
pub fn normalize(medium: MediumParams, pulses: EntrancePulses) -> Result<Problem> {
    medium.validate()?;
    // detuning and decay are supplied in units of 1/T already
    let pulses = pulses.normalized();
    let signs = system_signs(medium.kind);
    let grid = Grid::default_for(&pulses);
    Ok(Problem {
        medium,
        q_pump: signs.pump * medium.q_ratio,
        q_stokes: signs.stokes,
        pulses,
        grid,
        scan_points: 4096,
    })
}

impl Problem {
    pub fn with_grid(mut self, grid: Grid) -> Result<Self> {
        grid.validate()?;
        self.grid = grid;
        Ok(self)
    }

    pub fn with_z_values(mut self, z_values: Vec<f64>) -> Result<Self> {
        let mut grid = self.grid.clone();
        grid.z_values = z_values;
        grid.validate()?;
        self.grid = grid;
        Ok(self)
    }

    pub fn peak(&self) -> f64 {
        self.pulses.peak()
    }

    pub fn signs(&self) -> Signs {
        system_signs(self.medium.kind)
    }

    /// Coupling-weighted factor `f(θ) = q_s sin²θ + q_p cos²θ` with signs applied.
    pub fn coupling_factor(&self, theta: f64) -> f64 {
        crate::adiabatic::f_theta(theta, self.q_pump, self.q_stokes)
    }

    /// `df/dθ = (q_s - q_p) sin 2θ`.
    pub fn coupling_slope(&self, theta: f64) -> f64 {
        (self.q_stokes - self.q_pump) * (2.0 * theta).sin()
    }

    /// Local density of the fluence integral, `q_s Ω_p0² + q_p Ω_s0²`.
    pub fn fluence_density(&self, tau: f64) -> f64 {
        let (p, s) = self.pulses.intensities(tau);
        self.q_stokes * p + self.q_pump * s
    }

    /// Signed fluence `∫_xi^tau (q_s Ω_p0² + q_p Ω_s0²) dt'`.
    pub fn signed_fluence(&self, xi: f64, tau: f64) -> f64 {
        let (p, s) = self.pulses.squared_integrals(xi, tau);
        self.q_stokes * p + self.q_pump * s
    }

    /// Conserved photon combination `Ω_p²/q_p + Ω_s²/q_s` (signed couplings).
    pub fn conserved_density(&self, omega_p: f64, omega_s: f64) -> f64 {
        omega_p * omega_p / self.q_pump + omega_s * omega_s / self.q_stokes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSlice {
    pub z: f64,
    pub omega_p: Vec<f64>,
    pub omega_s: Vec<f64>,
    pub w_total: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_s: Vec<f64>,
}

impl FieldSlice {
    pub fn with_capacity(z: f64, n: usize) -> Self {
        FieldSlice {
            z,
            omega_p: Vec::with_capacity(n),
            omega_s: Vec::with_capacity(n),
            w_total: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            phi_p: Vec::with_capacity(n),
            phi_s: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.omega_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_p.is_empty()
    }
}

/// Field envelopes, mixing angle and phases over a `(z, τ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub tau: Vec<f64>,
    pub slices: Vec<FieldSlice>,
}

impl FieldState {
    pub fn z_values(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.z).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSlice {
    pub z: f64,
    pub b1: Vec<C64>,
    pub b2: Vec<C64>,
    pub b3: Vec<C64>,
}

impl AmplitudeSlice {
    pub fn populations(&self, k: usize) -> [f64; 3] {
        [
            self.b1[k].norm_sqr(),
            self.b2[k].norm_sqr(),
            self.b3[k].norm_sqr(),
        ]
    }
}

/// Complex level amplitudes over a `(z, τ)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub tau: Vec<f64>,
    pub slices: Vec<AmplitudeSlice>,
}
