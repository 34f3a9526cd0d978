//! Exact adiabatic-following solution by the method of characteristics.
//!
//! The mixing angle obeys the transport equation
//! `∂θ/∂x + f(θ)/W² ∂θ/∂τ = 0` and is constant along characteristics. A
//! characteristic launched at entrance time `ξ` reaches `(z, τ)` when
//!
//! ```text
//! g(ξ) = ∫_ξ^τ (q_s Ω_p0² + q_p Ω_s0²) dt' - z a² f²(θ0(ξ)) = 0
//! ```
//!
//! Once `ξ` is known, `θ = θ0(ξ)`, `W² = W0²(τ) f(θ0(τ)) / f(θ)` and the
//! envelopes follow from `Ω_p = W sin θ`, `Ω_s = W cos θ`.
//!
//! Writing `P(t)` for the running fluence, a root is a crossing of the level
//! `P(τ)` by `h(ξ) = P(ξ) + z a² f²(θ0(ξ))`. A [`CharacteristicMap`] samples
//! `h` once per `z` so that every `τ` only needs a crossing search and a
//! short Brent refinement. Where `h` stops being monotone the map from launch
//! time to arrival time folds and adiabatic following breaks down.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    AmplitudeSlice, AmplitudeState, EntrancePulses, FieldSlice, FieldState, Problem, TAIL_FLOOR,
};
use crate::roots::brent;

/// Residual tolerance on `g`, in units of `a² T`.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// `|1 - ...|` below which the fold denominator is treated as zero.
pub const NEAR_FOLD: f64 = 1e-9;

/// `θ0(τ) = atan2(Ω_p0, Ω_s0)`, held at its limit in the field-free tails.
pub fn entrance_mixing_angle(pulses: &EntrancePulses, tau: f64) -> f64 {
    pulses.mixing_angle(tau)
}

/// `f(θ) = q_s sin²θ + q_p cos²θ`.
pub fn f_theta(theta: f64, q_p: f64, q_s: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    q_s * s * s + q_p * c * c
}

/// `∫_ξ^τ (q_s Ω_p0² + q_p Ω_s0²) dt'`.
pub fn photon_fluence(
    pulses: &EntrancePulses,
    q_p: f64,
    q_s: f64,
    xi: f64,
    tau: f64,
) -> Result<f64> {
    if xi > tau {
        return Err(Error::ReversedInterval { xi, tau });
    }
    let (p, s) = pulses.squared_integrals(xi, tau);
    Ok(q_s * p + q_p * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicResult {
    /// Launch time at the entrance.
    pub xi: f64,
    /// Several launch times reach the same `(z, τ)`.
    pub fold_flag: bool,
    /// `1 + 2 z a² f f' θ0' / (q_s Ω_p0² + q_p Ω_s0²)` at the root.
    pub denom: f64,
}

/// Where the characteristic through `(z, τ)` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Launch {
    Root(CharacteristicResult),
    /// From the field-free leading tail; the state there is the limiting one.
    Leading,
    /// From the field-free trailing tail.
    Trailing,
}

/// Sampled `h(ξ)` for one propagation length.
#[derive(Debug, Clone)]
pub struct CharacteristicMap<'a> {
    problem: &'a Problem,
    z: f64,
    lo: f64,
    xi: Vec<f64>,
    h: Vec<f64>,
    orientation: f64,
    folded: bool,
}

impl<'a> CharacteristicMap<'a> {
    pub fn new(problem: &'a Problem, z: f64) -> Result<Self> {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::invalid(
                "z",
                format!("must be finite and >= 0, got {z}"),
            ));
        }
        let grid = &problem.grid;
        let (s_lo, s_hi) = problem.pulses.support();
        let lo = s_lo.min(grid.tau_min);
        let hi = s_hi.max(grid.tau_max);
        // scan_points across the grid window, same spacing across the tails
        let n_core = problem.scan_points.max(2);
        let step = (grid.tau_max - grid.tau_min) / (n_core - 1) as f64;
        let n_left = ((grid.tau_min - lo) / step).ceil() as usize;
        let n_right = ((hi - grid.tau_max) / step).ceil() as usize;
        let xi: Vec<f64> = (0..n_left)
            .rev()
            .map(|k| grid.tau_min - (k + 1) as f64 * step)
            .chain((0..n_core).map(|k| grid.tau_min + k as f64 * step))
            .chain((0..n_right).map(|k| grid.tau_max + (k + 1) as f64 * step))
            .collect();
        let lo = xi[0];
        let scale = z * problem.peak().powi(2);
        let h: Vec<f64> = xi
            .iter()
            .map(|&x| {
                let f = problem.coupling_factor(problem.pulses.mixing_angle(x));
                problem.signed_fluence(lo, x) + scale * f * f
            })
            .collect();
        let total = problem.signed_fluence(lo, *xi.last().unwrap());
        let orientation = if total < 0.0 { -1.0 } else { 1.0 };
        let magnitude = h.iter().fold(total.abs(), |m, v| m.max(v.abs()));
        let tol = 1e-12 * magnitude.max(problem.peak().powi(2));
        let mut running = orientation * h[0];
        let mut folded = false;
        for v in h.iter().skip(1).map(|v| orientation * v) {
            if v < running - tol {
                folded = true;
                break;
            }
            running = running.max(v);
        }
        Ok(CharacteristicMap {
            problem,
            z,
            lo,
            xi,
            h,
            orientation,
            folded,
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    /// Some arrival time is reached by more than one characteristic.
    pub fn has_fold(&self) -> bool {
        self.folded
    }

    /// Scan window `[lo, hi]` used for launch times.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, *self.xi.last().unwrap())
    }

    fn scale(&self) -> f64 {
        self.z * self.problem.peak().powi(2)
    }

    /// Characteristic residual `g(ξ)` for arrival time `tau`.
    pub fn residual(&self, xi: f64, tau: f64) -> f64 {
        let f = self
            .problem
            .coupling_factor(self.problem.pulses.mixing_angle(xi));
        self.problem.signed_fluence(xi, tau) - self.scale() * f * f
    }

    /// `dh/dξ = (q_s Ω_p0² + q_p Ω_s0²)(ξ) + 2 z a² f f' θ0'`.
    fn h_slope(&self, xi: f64) -> (f64, f64) {
        let p = self.problem;
        let theta = p.pulses.mixing_angle(xi);
        let density = p.fluence_density(xi);
        let fold_term = 2.0
            * self.scale()
            * p.coupling_factor(theta)
            * p.coupling_slope(theta)
            * p.pulses.mixing_rate(xi);
        (density + fold_term, density)
    }

    fn denominator(&self, xi: f64) -> f64 {
        let (slope, density) = self.h_slope(xi);
        if density != 0.0 {
            slope / density
        } else if slope == 0.0 {
            1.0
        } else {
            slope.signum() * f64::INFINITY
        }
    }

    /// Earliest of `taus` reached by more than one characteristic.
    pub fn first_fold(&self, taus: &[f64]) -> Option<f64> {
        if !self.folded {
            return None;
        }
        taus.iter()
            .copied()
            .find(|&t| matches!(self.launch(t), Launch::Root(r) if r.fold_flag))
    }

    /// Locate the launch time of the characteristic through `(z, tau)`.
    pub fn launch(&self, tau: f64) -> Launch {
        if self.z == 0.0 {
            return Launch::Root(CharacteristicResult {
                xi: tau,
                fold_flag: false,
                denom: 1.0,
            });
        }
        let level = self.problem.signed_fluence(self.lo, tau);
        let g = |k: usize| level - self.h[k];
        let n = self.xi.len();
        let o = self.orientation;

        let (bracket, fold_flag) = if !self.folded {
            // o·g decreases along the scan
            let k = self.h.partition_point(|&hk| o * (level - hk) > 0.0);
            if k == 0 {
                if g(0) == 0.0 {
                    return self.finish(self.xi[0], false);
                }
                return Launch::Leading;
            }
            if k == n {
                return Launch::Trailing;
            }
            ((k - 1, k), false)
        } else {
            let mut crossings = Vec::new();
            for k in 0..n - 1 {
                let (a, b) = (g(k), g(k + 1));
                if a == 0.0 || (a > 0.0) != (b > 0.0) && b != 0.0 {
                    crossings.push((k, k + 1));
                }
            }
            if g(n - 1) == 0.0 {
                crossings.push((n - 1, n - 1));
            }
            match crossings.last() {
                None => {
                    return if o * g(0) <= 0.0 {
                        Launch::Leading
                    } else {
                        Launch::Trailing
                    }
                }
                Some(&last) => (last, crossings.len() >= 2),
            }
        };

        let (i, j) = bracket;
        if i == j {
            return self.finish(self.xi[i], fold_flag);
        }
        let (mut a, mut b) = (self.xi[i], self.xi[j]);
        // the scan used running sums; re-check the bracket on the exact residual
        let mut ga = self.residual(a, tau);
        let mut gb = self.residual(b, tau);
        let mut widen = 0;
        while ga != 0.0 && gb != 0.0 && (ga > 0.0) == (gb > 0.0) && widen < 4 {
            widen += 1;
            let step = self.xi[1] - self.xi[0];
            a -= step;
            b += step;
            ga = self.residual(a, tau);
            gb = self.residual(b, tau);
        }
        let ftol = ROOT_TOLERANCE * self.problem.peak().powi(2);
        let xi = brent(|x| self.residual(x, tau), a, b, ftol, 0.0, 200).unwrap_or(0.5 * (a + b));
        self.finish(xi, fold_flag)
    }

    fn finish(&self, xi: f64, fold_flag: bool) -> Launch {
        Launch::Root(CharacteristicResult {
            xi,
            fold_flag,
            denom: self.denominator(xi),
        })
    }

    /// Launch time, or a bracket-failure error when no root lies in the window.
    pub fn solve(&self, tau: f64) -> Result<CharacteristicResult> {
        match self.launch(tau) {
            Launch::Root(r) => Ok(r),
            Launch::Leading | Launch::Trailing => {
                let (lo, hi) = self.window();
                Err(Error::BracketFailure {
                    z: self.z,
                    tau,
                    lo,
                    hi,
                    g_lo: self.residual(lo, tau),
                    g_hi: self.residual(hi, tau),
                })
            }
        }
    }

    /// Full adiabatic state at `(z, tau)`.
    pub fn point(&self, tau: f64) -> Result<PointSolution> {
        let p = self.problem;
        let z = self.z;
        let launch = self.launch(tau);
        let (theta, theta_dot) = match launch {
            Launch::Root(r) if r.fold_flag => return Err(Error::Fold { z, tau }),
            Launch::Root(r) => {
                if z == 0.0 {
                    (p.pulses.mixing_angle(tau), p.pulses.mixing_rate(tau))
                } else {
                    if r.denom.abs() < NEAR_FOLD {
                        return Err(Error::NearFold {
                            z,
                            tau,
                            denom: r.denom,
                        });
                    }
                    let (slope, _) = self.h_slope(r.xi);
                    let rate = p.pulses.mixing_rate(r.xi) * p.fluence_density(tau) / slope;
                    (p.pulses.mixing_angle(r.xi), rate)
                }
            }
            Launch::Leading => (p.pulses.limiting_angles().0, 0.0),
            Launch::Trailing => (p.pulses.limiting_angles().1, 0.0),
        };

        let (omega_p, omega_s, w) = if z == 0.0 {
            let (op, os) = (p.pulses.pump(tau), p.pulses.stokes(tau));
            (op, os, op.hypot(os))
        } else {
            let f = p.coupling_factor(theta);
            let density = p.fluence_density(tau);
            let w2 = density / f;
            let f_scale = p.q_pump.abs().max(p.q_stokes.abs());
            if f.abs() < 1e-12 * f_scale || w2 < 0.0 || !w2.is_finite() {
                if density.abs() <= (TAIL_FLOOR * p.peak()).powi(2) {
                    (0.0, 0.0, 0.0)
                } else {
                    return Err(Error::Singularity { z, tau, theta });
                }
            } else {
                let w = w2.sqrt();
                let (s, c) = theta.sin_cos();
                (w * s, w * c, w)
            }
        };

        Ok(PointSolution {
            tau,
            launch,
            theta,
            theta_dot,
            w_total: w,
            omega_p,
            omega_s,
        })
    }
}

/// Adiabatic state at one `(z, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub tau: f64,
    pub launch: Launch,
    pub theta: f64,
    pub theta_dot: f64,
    pub w_total: f64,
    pub omega_p: f64,
    pub omega_s: f64,
}

impl PointSolution {
    /// Level amplitudes with the first non-adiabatic correction.
    pub fn amplitudes(&self, delta_p: f64, z: f64) -> Result<[C64; 3]> {
        let ratio = if self.w_total > 0.0 {
            self.theta_dot / self.w_total
        } else {
            0.0
        };
        if !(ratio.abs() < 1.0) {
            return Err(Error::AdiabaticityViolated {
                z,
                tau: self.tau,
                ratio: ratio.abs(),
            });
        }
        // 2 / tan 2ψ = Δp / W
        let detuning = if self.w_total > 0.0 {
            delta_p / self.w_total
        } else {
            0.0
        };
        let (s, c) = self.theta.sin_cos();
        Ok([
            C64::new(c, ratio * detuning * s),
            C64::new(0.0, -ratio),
            C64::new(-s, ratio * detuning * c),
        ])
    }

    /// Characteristic slope `dτ/dz = a² f(θ) / W²`.
    pub fn characteristic_slope(&self, problem: &Problem, z: f64) -> Result<f64> {
        if self.w_total <= TAIL_FLOOR * problem.peak() {
            return Err(Error::UndefinedVelocity { z, tau: self.tau });
        }
        Ok(problem.peak().powi(2) * problem.coupling_factor(self.theta) / self.w_total.powi(2))
    }
}

/// Launch time `ξ` for `(z, tau)`.
pub fn solve_characteristic(problem: &Problem, z: f64, tau: f64) -> Result<CharacteristicResult> {
    CharacteristicMap::new(problem, z)?.solve(tau)
}

/// `θ(z, τ) = θ0(ξ)`.
pub fn theta_field(problem: &Problem, z: f64, tau: f64) -> Result<f64> {
    Ok(CharacteristicMap::new(problem, z)?.point(tau)?.theta)
}

/// `W(z, τ)` from the conservation form `W² f(θ) = W0² f(θ0)`.
pub fn total_rabi(problem: &Problem, z: f64, tau: f64) -> Result<f64> {
    Ok(CharacteristicMap::new(problem, z)?.point(tau)?.w_total)
}

/// `(Ω_p, Ω_s) = (W sin θ, W cos θ)`.
pub fn envelopes(problem: &Problem, z: f64, tau: f64) -> Result<(f64, f64)> {
    let pt = CharacteristicMap::new(problem, z)?.point(tau)?;
    Ok((pt.omega_p, pt.omega_s))
}

/// `∂θ/∂τ` by implicit differentiation of the characteristic residual.
pub fn theta_dot(problem: &Problem, z: f64, tau: f64) -> Result<f64> {
    Ok(CharacteristicMap::new(problem, z)?.point(tau)?.theta_dot)
}

/// `(b1, b2, b3)` at `(z, τ)`.
pub fn amplitudes(problem: &Problem, z: f64, tau: f64) -> Result<[C64; 3]> {
    CharacteristicMap::new(problem, z)?
        .point(tau)?
        .amplitudes(problem.medium.delta_p, z)
}

/// Characteristic slope `dτ/dz` at `(z, τ)`.
pub fn group_velocity(problem: &Problem, z: f64, tau: f64) -> Result<f64> {
    CharacteristicMap::new(problem, z)?
        .point(tau)?
        .characteristic_slope(problem, z)
}

/// Fields only; no adiabaticity requirement on `θ̇/W`.
pub fn field_slice(problem: &Problem, z: f64, taus: &[f64]) -> Result<FieldSlice> {
    let map = CharacteristicMap::new(problem, z)?;
    let cells: Vec<PointSolution> = taus
        .par_iter()
        .map(|&tau| map.point(tau))
        .collect::<Result<_>>()?;
    let mut fields = FieldSlice::with_capacity(z, taus.len());
    for pt in cells {
        fields.omega_p.push(pt.omega_p);
        fields.omega_s.push(pt.omega_s);
        fields.w_total.push(pt.w_total);
        fields.theta.push(pt.theta);
        fields.phi_p.push(0.0);
        fields.phi_s.push(0.0);
    }
    Ok(fields)
}

/// Fields and amplitudes on the problem grid.
#[derive(Debug, Clone)]
pub struct AdiabaticSolution {
    pub fields: FieldState,
    pub amplitudes: AmplitudeState,
}

/// Evaluate one z-slice on arbitrary τ points.
pub fn solve_slice(
    problem: &Problem,
    z: f64,
    taus: &[f64],
) -> Result<(FieldSlice, AmplitudeSlice)> {
    let map = CharacteristicMap::new(problem, z)?;
    let delta_p = problem.medium.delta_p;
    let cells: Vec<(PointSolution, [C64; 3])> = taus
        .par_iter()
        .map(|&tau| {
            let pt = map.point(tau)?;
            let b = pt.amplitudes(delta_p, z)?;
            Ok((pt, b))
        })
        .collect::<Result<_>>()?;
    let n = taus.len();
    let mut fields = FieldSlice::with_capacity(z, n);
    let mut amps = AmplitudeSlice {
        z,
        b1: Vec::with_capacity(n),
        b2: Vec::with_capacity(n),
        b3: Vec::with_capacity(n),
    };
    for (pt, b) in cells {
        fields.omega_p.push(pt.omega_p);
        fields.omega_s.push(pt.omega_s);
        fields.w_total.push(pt.w_total);
        fields.theta.push(pt.theta);
        fields.phi_p.push(0.0);
        fields.phi_s.push(0.0);
        amps.b1.push(b[0]);
        amps.b2.push(b[1]);
        amps.b3.push(b[2]);
    }
    Ok((fields, amps))
}

/// Evaluate every `z` of the problem grid.
pub fn solve(problem: &Problem) -> Result<AdiabaticSolution> {
    solve_on(problem, &problem.grid.taus(), &problem.grid.z_values)
}

pub fn solve_on(problem: &Problem, taus: &[f64], z_values: &[f64]) -> Result<AdiabaticSolution> {
    let mut fields = Vec::with_capacity(z_values.len());
    let mut amps = Vec::with_capacity(z_values.len());
    for &z in z_values {
        let (f, a) = solve_slice(problem, z, taus)?;
        fields.push(f);
        amps.push(a);
    }
    Ok(AdiabaticSolution {
        fields: FieldState {
            tau: taus.to_vec(),
            slices: fields,
        },
        amplitudes: AmplitudeState {
            tau: taus.to_vec(),
            slices: amps,
        },
    })
}
