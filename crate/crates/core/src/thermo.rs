//! Isentropic pressure law `p = a rho^gamma`, its pressure potential, and the
//! smooth cutoff separating near-equilibrium ("essential") from
//! far-from-equilibrium ("residual") densities.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::ScalarField;

/// Scaling parameter and pressure-law constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ScalingParams {
    epsilon: f64,
    a: f64,
    gamma: f64,
    rho_bar: f64,
    sound_speed_sq: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    epsilon: f64,
    a: f64,
    gamma: f64,
    rho_bar: f64,
}

impl TryFrom<RawParams> for ScalingParams {
    type Error = LabError;
    fn try_from(r: RawParams) -> Result<Self> {
        ScalingParams::new(r.epsilon, r.a, r.gamma, r.rho_bar)
    }
}

impl From<ScalingParams> for RawParams {
    fn from(p: ScalingParams) -> Self {
        RawParams {
            epsilon: p.epsilon,
            a: p.a,
            gamma: p.gamma,
            rho_bar: p.rho_bar,
        }
    }
}

impl ScalingParams {
    pub fn new(epsilon: f64, a: f64, gamma: f64, rho_bar: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(epsilon) {
            return Err(LabError::domain(format!("epsilon = {epsilon} must be > 0")));
        }
        if !ok(a) {
            return Err(LabError::domain(format!("a = {a} must be > 0")));
        }
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(LabError::domain(format!("gamma = {gamma} must be > 1")));
        }
        if !ok(rho_bar) {
            return Err(LabError::domain(format!("rho_bar = {rho_bar} must be > 0")));
        }
        Ok(ScalingParams {
            epsilon,
            a,
            gamma,
            rho_bar,
            sound_speed_sq: a * gamma * rho_bar.powf(gamma - 1.0),
        })
    }

    /// Same pressure law with a different `epsilon`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.a, self.gamma, self.rho_bar)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// `p'(rho_bar)`.
    pub fn sound_speed_sq(&self) -> f64 {
        self.sound_speed_sq
    }

    pub(crate) fn p(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }

    pub(crate) fn dp(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 1.0)
    }

    pub(crate) fn potential(&self, rho: f64) -> f64 {
        self.a / (self.gamma - 1.0)
            * (rho.powf(self.gamma) - rho * self.rho_bar.powf(self.gamma - 1.0))
    }

    pub(crate) fn dpotential(&self, rho: f64) -> f64 {
        self.a / (self.gamma - 1.0)
            * (self.gamma * rho.powf(self.gamma - 1.0) - self.rho_bar.powf(self.gamma - 1.0))
    }

    /// `P''(rho) = p'(rho) / rho`.
    pub(crate) fn ddpotential(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 2.0)
    }

    /// Written as `a/(gamma-1) r^gamma f(x)` with `x = (rho - r)/r` and
    /// `f(x) = (1+x)^gamma - 1 - gamma x`; the binomial series avoids the
    /// cancellation of the direct formula when `rho` is close to `r`.
    pub(crate) fn rel_potential(&self, rho: f64, rtilde: f64) -> f64 {
        let g = self.gamma;
        let x = (rho - rtilde) / rtilde;
        let f = if x.abs() < 0.1 {
            let mut coeff = 0.5 * g * (g - 1.0);
            let mut xn = x * x;
            let mut sum = 0.0;
            for n in 2..60 {
                let term = coeff * xn;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
                coeff *= (g - n as f64) / (n as f64 + 1.0);
                xn *= x;
            }
            sum
        } else {
            (1.0 + x).powf(g) - 1.0 - g * x
        };
        self.a / (g - 1.0) * rtilde.powf(g) * f
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(LabError::domain(format!("density {rho} must be >= 0")))
    }
}

pub fn pressure(rho: f64, params: &ScalingParams) -> Result<f64> {
    check_density(rho)?;
    Ok(params.p(rho))
}

/// `P(rho) = rho * int_{rho_bar}^{rho} p(z)/z^2 dz`, in closed form.
pub fn pressure_potential(rho: f64, params: &ScalingParams) -> Result<f64> {
    check_density(rho)?;
    Ok(params.potential(rho))
}

pub fn pressure_potential_derivative(rho: f64, params: &ScalingParams) -> Result<f64> {
    check_density(rho)?;
    Ok(params.dpotential(rho))
}

/// `P(rho) - P(rtilde) - P'(rtilde)(rho - rtilde)`; nonnegative by convexity.
pub fn relative_pressure_potential(rho: f64, rtilde: f64, params: &ScalingParams) -> Result<f64> {
    check_density(rho)?;
    if !(rtilde > 0.0 && rtilde.is_finite()) {
        return Err(LabError::domain(format!("reference density {rtilde} must be > 0")));
    }
    Ok(params.rel_potential(rho, rtilde))
}

/// Half the minimum of `P''` over `[lo, hi]`, so that the relative potential
/// dominates `c (rho - rtilde)^2` whenever both densities lie in the interval.
pub fn convexity_constant(params: &ScalingParams, lo: f64, hi: f64) -> f64 {
    // P'' = a gamma rho^(gamma-2) is monotone, so the minimum sits at an endpoint.
    0.5 * params.ddpotential(lo).min(params.ddpotential(hi))
}

/// Convexity constant over the support of the cutoff, `[rho_bar/4, 4 rho_bar]`.
pub fn ess_convexity_constant(params: &ScalingParams) -> f64 {
    let chi = CutoffChi::new(params.rho_bar());
    convexity_constant(params, chi.lower_support, chi.upper_support)
}

fn bump_edge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth transition from 0 at `t <= 0` to 1 at `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let a = bump_edge(t);
    let b = bump_edge(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth cutoff: 1 on `[rho_bar/2, 2 rho_bar]`, 0 outside `(rho_bar/4, 4 rho_bar)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffChi {
    pub rho_bar: f64,
    pub lower_plateau: f64,
    pub upper_plateau: f64,
    pub lower_support: f64,
    pub upper_support: f64,
}

impl CutoffChi {
    pub fn new(rho_bar: f64) -> Self {
        CutoffChi {
            rho_bar,
            lower_plateau: rho_bar / 2.0,
            upper_plateau: 2.0 * rho_bar,
            lower_support: rho_bar / 4.0,
            upper_support: 4.0 * rho_bar,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        if rho <= self.lower_support || rho >= self.upper_support {
            0.0
        } else if rho < self.lower_plateau {
            smooth_step((rho - self.lower_support) / (self.lower_plateau - self.lower_support))
        } else if rho <= self.upper_plateau {
            1.0
        } else {
            smooth_step((self.upper_support - rho) / (self.upper_support - self.upper_plateau))
        }
    }

    /// True where `1 - chi > 0`, i.e. outside the plateau.
    pub fn in_residual_set(&self, rho: f64) -> bool {
        rho < self.lower_plateau || rho > self.upper_plateau
    }
}

/// Split `h` pointwise into `chi(rho) h` and `(1 - chi(rho)) h`.
pub fn ess_res_split(
    h: &ScalarField,
    rho: &ScalarField,
    chi: &CutoffChi,
) -> Result<(ScalarField, ScalarField)> {
    let ess = h.zip_map(rho, |hv, r| chi.eval(r) * hv)?;
    let res = h.zip_map(&ess, |hv, e| hv - e)?;
    Ok((ess, res))
}
