//! Numerical goldfish dynamics.
//!
//! Two independent solvers: the algebraic formula, whose roots in `x` at time
//! `t` are the particle positions,
//!
//! ```text
//! Π_m (x − x_m(0)) − t Σ_m ẋ_m(0) Π_{l≠m} (x − x_l(0)) = 0,
//! ```
//!
//! and an adaptive Dormand–Prince integration of the equations of motion.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Point, VariableSet};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("{positions} positions but {velocities} velocities")]
    DimensionMismatch { positions: usize, velocities: usize },
    #[error("at least one particle is required")]
    Empty,
    #[error("initial data must be finite")]
    NonFinite,
    #[error("initial positions coincide (minimum gap {gap:e})")]
    NotDistinct { gap: f64 },
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("roots leave the real line at t = {time} (imaginary part {imag:e}): particles collided")]
    ComplexRoots { time: f64, imag: f64 },
    #[error("root tracking is ambiguous near t = {time}")]
    AmbiguousTracking { time: f64 },
    #[error("particles {} and {} collide at t = {time} (gap {gap:e})", pair.0 + 1, pair.1 + 1)]
    Collision {
        time: f64,
        pair: (usize, usize),
        gap: f64,
        trajectory: Box<Trajectory>,
    },
    #[error("step size underflow at t = {time}")]
    StepUnderflow { time: f64, trajectory: Box<Trajectory> },
    #[error("integral {name} could not be evaluated: {source}")]
    Evaluation { name: String, source: ExprError },
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Tolerance on the imaginary part of a polished root.
pub const IMAG_TOL: f64 = 1e-9;
/// First rung of the continuation ladder.
pub const LADDER_START: f64 = 1e-3;
/// Step of the central difference used for algebraic velocities.
pub const VELOCITY_STEP: f64 = 1e-5;
/// Gap below which a near-collision event is recorded.
pub const EVENT_GAP: f64 = 1e-4;
/// Gap below which integration aborts.
pub const ABORT_GAP: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl InitialData {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        let d = InitialData {
            positions,
            velocities,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.velocities.len() {
            return Err(DynamicsError::DimensionMismatch {
                positions: self.positions.len(),
                velocities: self.velocities.len(),
            });
        }
        if self.positions.is_empty() {
            return Err(DynamicsError::Empty);
        }
        if !self.positions.iter().chain(&self.velocities).all(|x| x.is_finite()) {
            return Err(DynamicsError::NonFinite);
        }
        let gap = self.min_gap();
        if gap == 0.0 {
            return Err(DynamicsError::NotDistinct { gap });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn min_gap(&self) -> f64 {
        closest_pair(&self.positions).1
    }

    /// Particle `k` of the result is particle `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> InitialData {
        InitialData {
            positions: perm.iter().map(|&k| self.positions[k]).collect(),
            velocities: perm.iter().map(|&k| self.velocities[k]).collect(),
        }
    }
}

fn closest_pair(x: &[f64]) -> ((usize, usize), f64) {
    let mut best = ((0, 0), f64::INFINITY);
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let d = (x[a] - x[b]).abs();
            if d < best.1 {
                best = ((a, b), d);
            }
        }
    }
    best
}

/// Coefficients (lowest degree first) of the cleared algebraic equation,
/// normalized to be monic.
pub fn algebraic_polynomial(init: &InitialData, t: f64) -> Vec<f64> {
    let n = init.n();
    let mut total = vec![0.0; n + 1];
    let full = poly_from_roots(&init.positions);
    for (k, c) in full.iter().enumerate() {
        total[k] += c;
    }
    for m in 0..n {
        let others: Vec<f64> = (0..n).filter(|&l| l != m).map(|l| init.positions[l]).collect();
        for (k, c) in poly_from_roots(&others).iter().enumerate() {
            total[k] -= t * init.velocities[m] * c;
        }
    }
    total
}

fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        p = next;
    }
    p
}

fn horner(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

/// All roots of a monic polynomial (coefficients lowest first), from the
/// companion matrix and polished by Newton iteration.
pub fn polynomial_roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 1 {
        return vec![Complex64::new(-p[0], 0.0)];
    }
    let companion = DMatrix::from_fn(n, n, |r, c| {
        if c == n - 1 {
            -p[r]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let (v, d) = horner(p, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = v / d;
                z -= step;
                if step.norm() <= 1e-12 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

fn real_roots(init: &InitialData, t: f64) -> Result<Vec<f64>> {
    let p = algebraic_polynomial(init, t);
    let roots = polynomial_roots(&p);
    let mut out = Vec::with_capacity(roots.len());
    for z in roots {
        if z.im.abs() > IMAG_TOL * z.norm().max(1.0) {
            return Err(DynamicsError::ComplexRoots { time: t, imag: z.im });
        }
        out.push(z.re);
    }
    Ok(out)
}

/// Assigns each previous position its nearest new root. The assignment is
/// accepted only if every root moved less than half the smallest gap.
fn match_roots(prev: &[f64], roots: &[f64]) -> Option<Vec<f64>> {
    let gap = closest_pair(roots).1.min(closest_pair(prev).1);
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(prev.len());
    for &p in prev {
        let (j, d) = roots
            .iter()
            .enumerate()
            .map(|(j, &r)| (j, (r - p).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if used[j] || d >= 0.5 * gap {
            return None;
        }
        used[j] = true;
        out.push(roots[j]);
    }
    Some(out)
}

const MAX_REFINEMENTS: usize = 40;

/// Positions at each requested time, labelled by continuity from `t = 0`.
pub fn track_algebraic(init: &InitialData, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    init.validate()?;
    let mut out = vec![Vec::new(); times.len()];
    // forward and backward branches are tracked separately from t = 0
    for sign in [1.0, -1.0] {
        let mut wanted: Vec<(usize, f64)> = times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t * sign > 0.0)
            .map(|(k, &t)| (k, t.abs()))
            .collect();
        wanted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut cur = 0.0;
        let mut state = init.positions.clone();
        for (k, target) in wanted {
            state = climb(init, sign, cur, target, state)?;
            cur = target;
            out[k] = state.clone();
        }
    }
    for (k, &t) in times.iter().enumerate() {
        if t == 0.0 {
            out[k] = init.positions.clone();
        }
    }
    Ok(out)
}

/// Follows the roots from `|t| = from` to `|t| = to` along a geometric ladder.
fn climb(init: &InitialData, sign: f64, from: f64, to: f64, mut state: Vec<f64>) -> Result<Vec<f64>> {
    let mut cur = from;
    while cur < to {
        let mut next = if cur == 0.0 {
            LADDER_START.min(to)
        } else {
            (2.0 * cur).min(to)
        };
        let mut refinements = 0;
        loop {
            let roots = real_roots(init, sign * next)?;
            if let Some(m) = match_roots(&state, &roots) {
                state = m;
                break;
            }
            refinements += 1;
            if refinements > MAX_REFINEMENTS {
                return Err(DynamicsError::AmbiguousTracking { time: sign * next });
            }
            next = cur + 0.5 * (next - cur);
        }
        cur = next;
    }
    Ok(state)
}

/// Positions at time `t` from the algebraic formula.
pub fn solve_algebraic(init: &InitialData, t: f64) -> Result<Vec<f64>> {
    Ok(track_algebraic(init, &[t])?.remove(0))
}

/// Velocities at time `t` by central differences of the tracked roots
/// (approximate, step [`VELOCITY_STEP`]).
pub fn algebraic_velocities(init: &InitialData, t: f64) -> Result<Vec<f64>> {
    let h = VELOCITY_STEP;
    let xs = track_algebraic(init, &[t - h, t + h])?;
    Ok(xs[0].iter().zip(&xs[1]).map(|(a, b)| (b - a) / (2.0 * h)).collect())
}

/// `ẍ_n = 2 Σ_{m≠n} ẋ_n ẋ_m / (x_n − x_m)`.
pub fn goldfish_acceleration(x: &[f64], v: &[f64], out: &mut [f64]) {
    for n in 0..x.len() {
        let mut s = 0.0;
        for m in 0..x.len() {
            if m != n {
                s += v[n] * v[m] / (x[n] - x[m]);
            }
        }
        out[n] = 2.0 * s;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub time: f64,
    pub pair: (usize, usize),
    pub gap: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<CollisionEvent>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &State)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    /// State recorded exactly at `t`, if any.
    pub fn at(&self, t: f64) -> Option<&State> {
        self.times.iter().position(|&s| s == t).map(|k| &self.states[k])
    }

    /// Columns `t, x1..xN, v1..vN`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.positions.len());
        let mut out = String::from("t");
        for k in 1..=n {
            write!(out, ",x{k}").expect("string write");
        }
        for k in 1..=n {
            write!(out, ",v{k}").expect("string write");
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(out, "{t}").expect("string write");
            for x in s.positions.iter().chain(&s.velocities) {
                write!(out, ",{x}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn derivative(y: &[f64], out: &mut [f64]) {
    let n = y.len() / 2;
    let (x, v) = y.split_at(n);
    out[..n].copy_from_slice(v);
    goldfish_acceleration(x, v, &mut out[n..]);
}

fn to_state(y: &[f64]) -> State {
    let n = y.len() / 2;
    State {
        positions: y[..n].to_vec(),
        velocities: y[n..].to_vec(),
    }
}

/// Adaptive Dormand–Prince integration from `t = 0` to `t_end`, recording
/// every accepted step.
pub fn integrate_rk(init: &InitialData, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with_stops(init, &[t_end], tol)
}

/// As [`integrate_rk`], additionally landing exactly on each of `stops`
/// (which must be nonnegative; the largest is the final time).
pub fn integrate_with_stops(init: &InitialData, stops: &[f64], tol: f64) -> Result<Trajectory> {
    init.validate()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(DynamicsError::InvalidTolerance);
    }
    let mut stops: Vec<f64> = stops.iter().copied().filter(|&s| s > 0.0).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let n = init.n();
    let dim = 2 * n;
    let mut y: Vec<f64> = init.positions.iter().chain(&init.velocities).copied().collect();
    let mut t = 0.0;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![to_state(&y)],
        events: Vec::new(),
    };
    let Some(&t_end) = stops.last() else {
        return Ok(traj);
    };
    let mut flagged: Vec<(usize, usize)> = Vec::new();
    let mut h = (t_end * 1e-3).min(1e-2);
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    derivative(&y, &mut k[0]);
    let mut next_stop = 0;

    while next_stop < stops.len() {
        let target = stops[next_stop];
        let step = h.min(target - t);
        let landing = step >= target - t;
        if step <= 1e-15 * t.abs().max(1.0) {
            return Err(DynamicsError::StepUnderflow {
                time: t,
                trajectory: Box::new(traj),
            });
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += step * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            derivative(&tmp, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += step * B5[s] * k[s][i];
                lo += step * B4[s] * k[s][i];
            }
            y5[i] = hi;
            let scale = tol * (1.0 + y[i].abs().max(hi.abs()));
            err = err.max((hi - lo).abs() / scale);
        }
        if !err.is_finite() {
            h = 0.25 * step;
            continue;
        }
        if err <= 1.0 {
            t = if landing { target } else { t + step };
            y.copy_from_slice(&y5);
            // FSAL: last stage is the derivative at the new point
            let last = k[6].clone();
            k[0] = last;
            traj.times.push(t);
            traj.states.push(to_state(&y));
            if landing {
                next_stop += 1;
            }
            let (pair, gap) = closest_pair(&y[..n]);
            if n > 1 && gap < ABORT_GAP {
                return Err(DynamicsError::Collision {
                    time: t,
                    pair,
                    gap,
                    trajectory: Box::new(traj),
                });
            }
            if n > 1 && gap < EVENT_GAP && !flagged.contains(&pair) {
                flagged.push(pair);
                traj.events.push(CollisionEvent { time: t, pair, gap });
            }
        }
        let factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        let grown = step * factor.clamp(0.2, 5.0);
        // a landing step may have been shortened; do not let it shrink h
        h = if landing && err <= 1.0 { h.max(grown) } else { grown };
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
    /// Samples at which the integral could not be evaluated.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub integrals: Vec<InvariantDrift>,
}

impl InvariantReport {
    pub fn max_drift(&self) -> f64 {
        self.integrals.iter().map(|d| d.max_drift).fold(0.0, f64::max)
    }
}

/// Evaluates each named integral of `(t, x, v)` along `traj` and reports the
/// largest deviation from its initial value.
pub fn monitor_invariants(
    traj: &Trajectory,
    integrals: &[(String, Expr)],
    vars: &VariableSet,
) -> Result<InvariantReport> {
    let mut out = Vec::with_capacity(integrals.len());
    for (name, expr) in integrals {
        let mut initial = None;
        let mut drift: f64 = 0.0;
        let mut skipped = 0;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let mut p = Point::new(vars);
            p.set(vars.time(), *t);
            for k in 0..vars.n() {
                p.set(vars.position(k), s.positions[k]);
                p.set(vars.velocity(k), s.velocities[k]);
            }
            let value = match expr.eval_numeric(&p) {
                Ok(z) => z,
                Err(ExprError::SingularPoint { .. }) | Err(ExprError::DivisionByZero) => {
                    skipped += 1;
                    continue;
                }
                Err(source) => {
                    return Err(DynamicsError::Evaluation {
                        name: name.clone(),
                        source,
                    })
                }
            };
            let i0 = *initial.get_or_insert(value);
            drift = drift.max((value - i0).norm());
        }
        out.push(InvariantDrift {
            name: name.clone(),
            initial: initial.map_or(f64::NAN, |z: Complex64| z.re),
            max_drift: drift,
            skipped,
        });
    }
    Ok(InvariantReport { integrals: out })
}

/// Random initial data whose algebraic solution stays at least `margin`
/// away from collisions for `t ∈ [0, horizon]` (checked on a grid of 64
/// times). Positions lie in `[-2, 2]`, velocities in `[-1, 1]`.
pub fn random_separated(n: usize, horizon: f64, margin: f64, rng: &mut impl Rng) -> InitialData {
    let grid: Vec<f64> = (1..=64).map(|k| horizon * k as f64 / 64.0).collect();
    loop {
        let d = InitialData {
            positions: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            velocities: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        if d.min_gap() < margin {
            continue;
        }
        if let Ok(path) = track_algebraic(&d, &grid) {
            if path.iter().all(|x| closest_pair(x).1 >= margin) {
                return d;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(x: &[f64], v: &[f64]) -> InitialData {
        InitialData::new(x.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(
            InitialData::new(vec![0.0, 0.0], vec![1.0, 1.0]),
            Err(DynamicsError::NotDistinct { .. })
        ));
        assert!(InitialData::new(vec![0.0], vec![]).is_err());
        assert!(InitialData::new(vec![], vec![]).is_err());
        assert!(InitialData::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn single_particle_moves_linearly() {
        let d = data(&[0.0], &[1.0]);
        assert!((solve_algebraic(&d, 2.0).unwrap()[0] - 2.0).abs() < 1e-12);
        let traj = integrate_rk(&d, 2.0, 1e-9).unwrap();
        let (t, s) = traj.last().unwrap();
        assert_eq!(t, 2.0);
        assert!((s.positions[0] - 2.0).abs() < 1e-12);
        assert!((s.velocities[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resting_partner() {
        let d = data(&[0.0, 5.0], &[1.0, 0.0]);
        let x = solve_algebraic(&d, 3.0).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-9 && (x[1] - 5.0).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn solvers_agree_on_two_body() {
        let d = data(&[0.0, 1.0], &[1.0, -1.0]);
        let x = solve_algebraic(&d, 0.1).unwrap();
        let traj = integrate_with_stops(&d, &[0.1], 1e-10).unwrap();
        let s = traj.at(0.1).unwrap();
        for k in 0..2 {
            assert!((x[k] - s.positions[k]).abs() < 1e-6);
        }
        let v = algebraic_velocities(&d, 0.1).unwrap();
        for k in 0..2 {
            assert!((v[k] - s.velocities[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn head_on_collision() {
        let d = data(&[-1.0, 1.0], &[1.0, -1.0]);
        match integrate_rk(&d, 1.0, 1e-9) {
            Err(DynamicsError::Collision { time, trajectory, .. })
            | Err(DynamicsError::StepUnderflow { time, trajectory }) => {
                assert!(time < 1.0);
                assert!(!trajectory.events.is_empty());
                assert!(trajectory.events[0].time < 0.5 + 1e-6);
            }
            other => panic!("expected a collision, got {other:?}"),
        }
        assert!(matches!(
            solve_algebraic(&d, 0.75),
            Err(DynamicsError::ComplexRoots { .. })
        ));
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (x − 1)(x − 2)(x + 3) = x³ − 7x + 6
        let mut r: Vec<f64> = polynomial_roots(&[6.0, -7.0, 0.0, 1.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stops_land_exactly() {
        let d = data(&[0.0, 1.0, 3.0], &[0.2, -0.1, 0.3]);
        let traj = integrate_with_stops(&d, &[0.1, 0.5, 1.0], 1e-9).unwrap();
        for t in [0.1, 0.5, 1.0] {
            assert!(traj.at(t).is_some());
        }
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_columns() {
        let d = data(&[0.0, 1.0], &[0.1, 0.2]);
        let csv = integrate_rk(&d, 0.1, 1e-6).unwrap().to_csv();
        assert!(csv.starts_with("t,x1,x2,v1,v2\n0,0,1,0.1,0.2\n"));
    }

    #[test]
    fn drift_of_a_non_integral() {
        let vars = VariableSet::new(2).unwrap();
        let d = data(&[0.0, 2.0], &[1.0, 0.5]);
        let traj = integrate_rk(&d, 1.0, 1e-9).unwrap();
        let x1 = Expr::var(vars.position(0));
        let report = monitor_invariants(&traj, &[("x1".into(), x1)], &vars).unwrap();
        assert!(report.max_drift() > 0.5);
    }
}
