//! Continuous-time LTI plants under zero-order-hold actuation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on one RK4 substep, seconds.
pub const DEFAULT_SUBSTEP: f64 = 1e-4;

/// Rational transfer function with coefficients in descending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let tf = TransferFunction { num, den };
        let problems = tf.problems();
        if problems.is_empty() {
            Ok(tf)
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub(crate) fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let den = trim_leading_zeros(&self.den);
        let num = trim_leading_zeros(&self.num);
        if den.is_empty() {
            out.push("transfer function denominator is zero".to_string());
        } else if num.len() > den.len() {
            out.push(format!(
                "improper transfer function: numerator degree {} exceeds denominator degree {}",
                num.len() - 1,
                den.len() - 1
            ));
        }
        if self.num.iter().chain(&self.den).any(|c| !c.is_finite()) {
            out.push("transfer function has non-finite coefficients".to_string());
        }
        out
    }

    /// `G(0)`, or `None` when the plant has a pole at the origin.
    pub fn dc_gain(&self) -> Option<f64> {
        let n0 = *self.num.last()?;
        let d0 = *self.den.last()?;
        (d0 != 0.0).then(|| n0 / d0)
    }
}

fn trim_leading_zeros(c: &[f64]) -> &[f64] {
    let first = c.iter().position(|&x| x != 0.0).unwrap_or(c.len());
    &c[first..]
}

/// Single-input single-output state-space model, `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

impl StateSpaceModel {
    pub fn order(&self) -> usize {
        self.b.len()
    }

    pub fn output(&self, x: &[f64], u: f64) -> f64 {
        dot(&self.c, x) + self.d * u
    }

    /// `dx = A·x + B·u`
    fn derivative(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let n = self.order();
        for (i, out) in dx.iter_mut().enumerate() {
            *out = dot(&self.a[i * n..(i + 1) * n], x) + self.b[i] * u;
        }
    }

    pub fn state_problems(&self) -> Vec<String> {
        let n = self.order();
        let mut out = Vec::new();
        if self.a.len() != n * n {
            out.push(format!(
                "A has {} entries, expected {}",
                self.a.len(),
                n * n
            ));
        }
        if self.c.len() != n {
            out.push(format!("C has {} entries, expected {n}", self.c.len()));
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Controllable canonical realization.
///
/// With the denominator normalized to `s^n + a1 s^(n-1) + … + an` and the
/// numerator padded to `b0 s^n + … + bn`, the state `x1` is the innermost
/// integrator, `A` has ones on the superdiagonal and `[-an … -a1]` on its last
/// row, `B = e_n`, `C_k = b_(n+1-k) − a_(n+1-k)·b0` and `D = b0`.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpaceModel> {
    let problems = tf.problems();
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems));
    }
    let den = trim_leading_zeros(&tf.den);
    let num = trim_leading_zeros(&tf.num);
    let lead = den[0];
    let n = den.len() - 1;
    let a_coef: Vec<f64> = den.iter().map(|d| d / lead).collect();
    let mut b_coef = vec![0.0; n + 1 - num.len()];
    b_coef.extend(num.iter().map(|x| x / lead));

    let b0 = b_coef[0];
    let mut a = vec![0.0; n * n];
    for i in 0..n.saturating_sub(1) {
        a[i * n + i + 1] = 1.0;
    }
    for j in 0..n {
        a[(n - 1) * n + j] = -a_coef[n - j];
    }
    let mut b = vec![0.0; n];
    if n > 0 {
        b[n - 1] = 1.0;
    }
    let c = (0..n).map(|j| b_coef[n - j] - a_coef[n - j] * b0).collect();
    Ok(StateSpaceModel { a, b, c, d: b0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub x: Vec<f64>,
    /// Actuator value held since the last control update.
    pub u_held: f64,
    pub y: f64,
}

impl PlantState {
    pub fn at_rest(model: &StateSpaceModel) -> Self {
        PlantState {
            x: vec![0.0; model.order()],
            u_held: 0.0,
            y: 0.0,
        }
    }

    /// Changes the held input and refreshes the output feedthrough.
    pub fn actuate(&mut self, model: &StateSpaceModel, u: f64) {
        self.u_held = u;
        self.y = model.output(&self.x, u);
    }
}

/// Plant model plus scratch buffers for RK4.
#[derive(Debug, Clone)]
pub struct Plant {
    pub model: StateSpaceModel,
    pub state: PlantState,
    max_substep: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Plant {
    pub fn new(model: StateSpaceModel, max_substep: f64) -> Result<Self> {
        if !(max_substep > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "plant substep must be positive, got {max_substep}"
            )));
        }
        let n = model.order();
        Ok(Plant {
            state: PlantState::at_rest(&model),
            model,
            max_substep,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        })
    }

    pub fn from_tf(tf: &TransferFunction, max_substep: f64) -> Result<Self> {
        Plant::new(tf_to_ss(tf)?, max_substep)
    }

    pub fn y(&self) -> f64 {
        self.state.y
    }

    pub fn reset(&mut self) {
        self.state = PlantState::at_rest(&self.model);
    }

    pub fn actuate(&mut self, u: f64) {
        self.state.actuate(&self.model, u);
    }

    /// Number of equal substeps used to cover `dt`.
    pub fn substeps(&self, dt: f64) -> usize {
        ((dt / self.max_substep - 1e-9).ceil() as usize).max(1)
    }

    /// Advances the state by `dt` under the held input. `on_substep` sees the
    /// output at the end of every substep together with the substep length.
    pub fn integrate_with(&mut self, dt: f64, mut on_substep: impl FnMut(f64, f64)) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "integration step must be positive, got {dt}"
            )));
        }
        let steps = self.substeps(dt);
        let step = dt / steps as f64;
        for _ in 0..steps {
            self.rk4_step(step);
            self.state.y = self.model.output(&self.state.x, self.state.u_held);
            if !self.state.y.is_finite() || self.state.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    loop_index: usize::MAX,
                    time: f64::NAN,
                });
            }
            on_substep(self.state.y, step);
        }
        Ok(())
    }

    pub fn integrate(&mut self, dt: f64) -> Result<()> {
        self.integrate_with(dt, |_, _| {})
    }

    fn rk4_step(&mut self, h: f64) {
        let u = self.state.u_held;
        let n = self.model.order();
        let x = &self.state.x;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        self.model.derivative(x, u, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        self.model.derivative(tmp, u, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        self.model.derivative(tmp, u, k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        self.model.derivative(tmp, u, k4);
        for i in 0..n {
            self.state.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// One-shot form: returns the state after `dt` seconds of RK4 under ZOH.
pub fn integrate(
    model: &StateSpaceModel,
    state: &PlantState,
    dt: f64,
    max_substep: f64,
) -> Result<PlantState> {
    let mut plant = Plant::new(model.clone(), max_substep)?;
    plant.state = state.clone();
    plant.integrate(dt)?;
    Ok(plant.state)
}
