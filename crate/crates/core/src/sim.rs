//! Fixed-step integrators and the built-in test systems.
//!
//! Deterministic systems are integrated with classical RK4, stochastic ones
//! (additive Gaussian noise) with Euler–Maruyama. Both record every step on
//! a uniform grid `t0, t0 + dt, ...`; use [`Trajectory::subsample`] to thin
//! the output and [`Trajectory::discard_before`] to drop a transient.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Right-hand side of `dx/dt = f(x, t)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(state, t)` into `out`; both slices have length `dim()`.
    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]);

    fn eval_vec(&self, t: f64, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(t, state, &mut out);
        out
    }
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (**self).eval(t, state, out)
    }
}

/// Adapter turning a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (self.f)(t, state, out)
    }
}

/// Hopf normal-form oscillator with a linearly drifting parameter
/// `lambda(t) = lambda0 + epsilon * t`:
///
/// ```text
/// dx/dt = lambda x - y - x y^2
/// dy/dt = x + lambda y - y^3
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfField {
    pub lambda0: f64,
    pub epsilon: f64,
}

impl HopfField {
    pub fn new(lambda0: f64, epsilon: f64) -> Self {
        Self { lambda0, epsilon }
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        self.lambda0 + self.epsilon * t
    }
}

impl VectorField for HopfField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        let lambda = self.lambda_at(t);
        let (x, y) = (state[0], state[1]);
        out[0] = lambda * x - y - x * y * y;
        out[1] = x + lambda * y - y * y * y;
    }
}

pub const LORENZ_SIGMA: f64 = 10.0;
pub const LORENZ_BETA: f64 = 8.0 / 3.0;

/// The Lorenz system `(sigma (y - x), x (rho - z) - y, x y - beta z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzField {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl LorenzField {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Self {
        Self { sigma, rho, beta }
    }

    /// `sigma = 10`, `beta = 8/3`.
    pub fn classic(rho: f64) -> Self {
        Self::new(LORENZ_SIGMA, rho, LORENZ_BETA)
    }

    /// The two non-trivial equilibria `C+` and `C-` (only real for `rho > 1`).
    pub fn equilibria(&self) -> Option<([f64; 3], [f64; 3])> {
        if self.rho <= 1.0 {
            return None;
        }
        let c = (self.beta * (self.rho - 1.0)).sqrt();
        let z = self.rho - 1.0;
        Some(([c, c, z], [-c, -c, z]))
    }
}

impl VectorField for LorenzField {
    fn dim(&self) -> usize {
        3
    }

    // Written so that (x, y, z) -> (-x, -y, z) maps outputs to (-u, -v, w)
    // bit for bit.
    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        let (x, y, z) = (state[0], state[1], state[2]);
        out[0] = self.sigma * (y - x);
        out[1] = x * (self.rho - z) - y;
        out[2] = x * y - self.beta * z;
    }
}

/// Additive-noise SDE `dx = f(x, t) dt + diag(noise) dW`.
#[derive(Debug, Clone)]
pub struct SdeSpec<F> {
    pub drift: F,
    pub noise_intensity: Vec<f64>,
}

impl<F: VectorField> SdeSpec<F> {
    pub fn new(drift: F, noise_intensity: Vec<f64>) -> Result<Self> {
        if noise_intensity.len() != drift.dim() {
            return Err(Error::DimensionMismatch {
                expected: drift.dim(),
                actual: noise_intensity.len(),
            });
        }
        if noise_intensity.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParameter(
                "noise intensities must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            drift,
            noise_intensity,
        })
    }
}

/// Samples of an orbit on a uniform time grid. States are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
    seed: Option<u64>,
}

impl Trajectory {
    pub fn from_parts(times: Vec<f64>, states: Vec<f64>, dim: usize, seed: Option<u64>) -> Result<Self> {
        if dim == 0 || states.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: times.len() * dim.max(1),
                actual: states.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: times.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        Ok(Self {
            times,
            states,
            dim,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Grid spacing (all steps are equal up to rounding of `t0 + i dt`).
    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Drops all samples with `t < t_start`.
    pub fn discard_before(&self, t_start: f64) -> Result<Self> {
        let first = self.times.partition_point(|&t| t < t_start);
        Self::from_parts(
            self.times[first..].to_vec(),
            self.states[first * self.dim..].to_vec(),
            self.dim,
            self.seed,
        )
    }

    /// Keeps every `every`-th sample, starting with the first.
    pub fn subsample(&self, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(Error::InvalidParameter("subsample interval must be >= 1".into()));
        }
        let mut times = Vec::with_capacity(self.len() / every + 1);
        let mut states = Vec::with_capacity((self.len() / every + 1) * self.dim);
        for i in (0..self.len()).step_by(every) {
            times.push(self.times[i]);
            states.extend_from_slice(self.state(i));
        }
        Self::from_parts(times, states, self.dim, self.seed)
    }
}

fn check_grid(dim: usize, x0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidParameter(format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    // Tolerate rounding in (t1 - t0) / dt so that [0, 1] with dt = 1e-3 is
    // exactly 1000 steps.
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0);
    Ok(steps as usize)
}

/// Classical fourth-order Runge–Kutta with fixed step `dt` on `[t0, t1]`.
pub fn rk4_integrate<F: VectorField>(field: &F, x0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<Trajectory> {
    let dim = field.dim();
    let steps = check_grid(dim, x0, t0, t1, dt)?;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * dim);
    times.push(t0);
    states.extend_from_slice(x0);

    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let half = 0.5 * dt;

    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        field.eval(t, &x, &mut k1);
        for j in 0..dim {
            tmp[j] = x[j] + half * k1[j];
        }
        field.eval(t + half, &tmp, &mut k2);
        for j in 0..dim {
            tmp[j] = x[j] + half * k2[j];
        }
        field.eval(t + half, &tmp, &mut k3);
        for j in 0..dim {
            tmp[j] = x[j] + dt * k3[j];
        }
        field.eval(t + dt, &tmp, &mut k4);
        for j in 0..dim {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = t0 + step as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step, time: t_next });
        }
        times.push(t_next);
        states.extend_from_slice(&x);
    }

    Trajectory::from_parts(times, states, dim, None)
}

/// Euler–Maruyama: `x_{i+1} = x_i + f(x_i, t_i) dt + sigma * sqrt(dt) * xi`,
/// with one standard normal `xi` per coordinate and step, drawn in coordinate
/// order from a ChaCha20 stream seeded with `seed`.
pub fn euler_maruyama<F: VectorField>(
    spec: &SdeSpec<F>,
    x0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    let dim = spec.drift.dim();
    let steps = check_grid(dim, x0, t0, t1, dt)?;
    let mut rng = seeded_rng(seed);
    let sqrt_dt = dt.sqrt();

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * dim);
    times.push(t0);
    states.extend_from_slice(x0);

    let mut x = x0.to_vec();
    let mut drift = vec![0.0; dim];
    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        spec.drift.eval(t, &x, &mut drift);
        for j in 0..dim {
            let xi: f64 = StandardNormal.sample(&mut rng);
            x[j] += drift[j] * dt + spec.noise_intensity[j] * sqrt_dt * xi;
        }
        let t_next = t0 + step as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step, time: t_next });
        }
        times.push(t_next);
        states.extend_from_slice(&x);
    }

    Trajectory::from_parts(times, states, dim, Some(seed))
}
