//! Two-component Gaussian mixture `1/2 N(-theta, sigma^2 I) + 1/2 N(theta, sigma^2 I)`
//! labeled by `sign(theta . x)`, with its closed-form concentration.
//!
//! Under l2, the minimal `epsilon`-expansion among sets of measure `alpha`
//! is a halfspace orthogonal to `theta` sitting away from the decision
//! boundary. Projecting onto `theta / |theta|` gives `z ~ N(-|theta|, sigma^2)`
//! or `N(|theta|, sigma^2)` per component, so for
//! `H- = {z <= -b}` the component measures are
//! `Phi((|theta| - b) / sigma)` and `Phi((-|theta| - b) / sigma)`, and its
//! expansion moves the boundary by `epsilon`, i.e. by `epsilon / sigma` in
//! standard units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dataset::{Dataset, LabelSet, PointSet, SoftLabelSet};
use crate::error::{Error, Result};
use crate::normal;

const BISECTION_MAX_ITERS: usize = 500;
const BISECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussMixModel {
    theta: Vec<f64>,
    sigma: f64,
}

impl GaussMixModel {
    pub fn new(theta: Vec<f64>, sigma: f64) -> Result<Self> {
        if theta.is_empty() || !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(
                "theta must be a finite, non-empty vector".into(),
            ));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma {sigma} must be positive")));
        }
        let model = GaussMixModel { theta, sigma };
        if model.theta_norm() == 0.0 {
            return Err(Error::Domain("theta must be nonzero".into()));
        }
        Ok(model)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn theta_norm(&self) -> f64 {
        self.theta.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `theta . x / |theta|`.
    pub fn project(&self, x: &[f32]) -> f64 {
        self.theta
            .iter()
            .zip(x)
            .map(|(t, &v)| t * v as f64)
            .sum::<f64>()
            / self.theta_norm()
    }

    /// Posterior probability of the `+theta` component at projection `z`.
    fn posterior_plus(&self, z: f64) -> f64 {
        let t = 2.0 * z * self.theta_norm() / (self.sigma * self.sigma);
        1.0 / (1.0 + (-t).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfspaceSign {
    /// `{x : theta . x + b |theta| <= 0}`
    Minus,
    /// `{x : theta . x - b |theta| >= 0}`
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfspaceSpec {
    pub sign: HalfspaceSign,
    pub offset: f64,
}

impl HalfspaceSpec {
    /// Whether `x` lies within `epsilon` (l2) of the halfspace.
    pub fn contains_expanded(&self, model: &GaussMixModel, x: &[f32], epsilon: f64) -> bool {
        let z = model.project(x);
        match self.sign {
            HalfspaceSign::Minus => z <= -self.offset + epsilon,
            HalfspaceSign::Plus => z >= self.offset - epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfspaceMeasure {
    pub mu: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
}

/// Labels follow `sign(theta . x)` as class 1 for positive, 0 otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SoftLabelMode {
    /// One-hot on the assigned class.
    #[default]
    OneHot,
    /// Component posterior `P(+ | x) = 1 / (1 + exp(-2 theta.x / sigma^2))`.
    Posterior,
}

/// Draws `m` labeled points. Example `i` uses ChaCha8 stream `i` of `seed`,
/// so the output does not depend on how work is scheduled.
pub fn sample(model: &GaussMixModel, m: usize, seed: u64, mode: SoftLabelMode) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let n = model.dim();
    let mut coords = Vec::with_capacity(m * n);
    let mut labels = Vec::with_capacity(m);
    let mut soft = Vec::with_capacity(2 * m);
    for i in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let start = coords.len();
        for &t in &model.theta {
            let z: f64 = rng.sample(StandardNormal);
            coords.push((sign * t + model.sigma * z) as f32);
        }
        let proj = model.project(&coords[start..]);
        let label = u32::from(proj > 0.0);
        labels.push(label);
        match mode {
            SoftLabelMode::OneHot => {
                soft.extend_from_slice(if label == 1 { &[0.0, 1.0] } else { &[1.0, 0.0] })
            }
            SoftLabelMode::Posterior => {
                let p = model.posterior_plus(proj);
                soft.extend_from_slice(&[1.0 - p, p]);
            }
        }
    }
    Dataset::with_index_ids(
        PointSet::new(m, n, coords)?,
        LabelSet::new(labels, 2)?,
        Some(SoftLabelSet::new(2, soft)?),
    )
}

/// `Phi(Phi^-1(alpha) + epsilon_std)`: the measure of a halfspace of
/// standard-Gaussian measure `alpha` after expanding it by `epsilon_std`.
pub fn gaussian_expansion(alpha: f64, epsilon_std: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("measure {alpha} not in (0, 1)")));
    }
    if !(epsilon_std >= 0.0) {
        return Err(Error::Domain(format!(
            "expansion {epsilon_std} must be >= 0"
        )));
    }
    if epsilon_std == 0.0 {
        return Ok(alpha);
    }
    Ok(normal::cdf(normal::quantile(alpha) + epsilon_std))
}

pub fn halfspace_measure(model: &GaussMixModel, spec: HalfspaceSpec) -> HalfspaceMeasure {
    let norm = model.theta_norm();
    let s = model.sigma;
    let near = normal::cdf((norm - spec.offset) / s);
    let far = normal::cdf((-norm - spec.offset) / s);
    let (mu_minus, mu_plus) = match spec.sign {
        HalfspaceSign::Minus => (near, far),
        HalfspaceSign::Plus => (far, near),
    };
    HalfspaceMeasure {
        mu: 0.5 * (mu_minus + mu_plus),
        mu_minus,
        mu_plus,
    }
}

/// Offset `b` with `mu(H) = alpha`, by bisection.
pub fn offset_for_alpha(model: &GaussMixModel, alpha: f64, sign: HalfspaceSign) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} not in (0, 1)")));
    }
    let measure = |b: f64| halfspace_measure(model, HalfspaceSpec { sign, offset: b }).mu;
    // measure is strictly decreasing in b
    let step = model.theta_norm() + model.sigma;
    let mut lo = -step;
    let mut hi = step;
    while measure(lo) < alpha {
        lo -= step;
        hi -= step;
    }
    while measure(hi) > alpha {
        hi += step;
    }
    for _ in 0..BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let mu = measure(mid);
        if (mu - alpha).abs() <= BISECTION_TOLERANCE || hi - lo <= f64::EPSILON * mid.abs().max(1.0)
        {
            return Ok(mid);
        }
        if mu > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(BISECTION_MAX_ITERS))
}

/// Expansion of a component with measure `alpha_c` by `epsilon_std`,
/// tolerating components whose measure underflows to 0 or rounds to 1.
fn component_expansion(alpha_c: f64, z: f64, epsilon_std: f64) -> Result<f64> {
    if alpha_c > 0.0 && alpha_c < 1.0 {
        gaussian_expansion(alpha_c, epsilon_std)
    } else {
        Ok(normal::cdf(z + epsilon_std))
    }
}

/// Minimal measure of an `epsilon`-expansion (l2) over all sets of
/// measure `alpha`.
pub fn analytic_concentration(model: &GaussMixModel, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} must be >= 0")));
    }
    let eps_std = epsilon / model.sigma;
    let norm = model.theta_norm();
    let mut best = f64::INFINITY;
    for sign in [HalfspaceSign::Minus, HalfspaceSign::Plus] {
        let b = offset_for_alpha(model, alpha, sign)?;
        let m = halfspace_measure(model, HalfspaceSpec { sign, offset: b });
        let (z_near, z_far) = ((norm - b) / model.sigma, (-norm - b) / model.sigma);
        let (near, far) = match sign {
            HalfspaceSign::Minus => (m.mu_minus, m.mu_plus),
            HalfspaceSign::Plus => (m.mu_plus, m.mu_minus),
        };
        let h = 0.5 * component_expansion(near, z_near, eps_std)?
            + 0.5 * component_expansion(far, z_far, eps_std)?;
        best = best.min(h);
    }
    Ok(best)
}

/// Optimal halfspace for `alpha` (the `Minus` orientation).
pub fn optimal_halfspace(model: &GaussMixModel, alpha: f64) -> Result<HalfspaceSpec> {
    Ok(HalfspaceSpec {
        sign: HalfspaceSign::Minus,
        offset: offset_for_alpha(model, alpha, HalfspaceSign::Minus)?,
    })
}

/// Share of `points` inside the `epsilon`-expansion of `spec`.
pub fn empirical_halfspace_expansion(
    model: &GaussMixModel,
    spec: HalfspaceSpec,
    points: &PointSet,
    epsilon: f64,
) -> f64 {
    let hits = (0..points.len())
        .filter(|&i| spec.contains_expanded(model, points.row(i), epsilon))
        .count();
    hits as f64 / points.len() as f64
}
