//! Users, utilities and the global curvature/drift constants every bound is
//! stated in terms of.
//!
//! A user's utility at one time step is anything implementing [`Utility`]:
//! a strongly concave, coordinate-separable function of the user's allocation
//! vector `q ∈ ℝ^R` (one coordinate per supplier). The only built-in family
//! is [`QuadraticUtility`], `U(q) = −scale·‖q − s‖²`, which has closed-form
//! gradient and inverse gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, Tolerance};
use crate::traces::SystemTrace;
use crate::vector;

/// Number of users `N` and suppliers `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub n_users: usize,
    pub n_suppliers: usize,
}

impl Dimensions {
    pub fn new(n_users: usize, n_suppliers: usize) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::param("n_users", "must be at least 1"));
        }
        if n_suppliers == 0 {
            return Err(Error::param("n_suppliers", "must be at least 1"));
        }
        Ok(Dimensions { n_users, n_suppliers })
    }
}

/// Axis-aligned box in allocation space, used as the domain on which the
/// value-Lipschitz constant of a utility is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn point(x: &[f64]) -> Self {
        BoundingBox { lo: x.to_vec(), hi: x.to_vec() }
    }

    /// Smallest box containing every point. Returns `None` for no points.
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut it = points.into_iter();
        let mut bbox = BoundingBox::point(it.next()?);
        for p in it {
            bbox.include(p);
        }
        Some(bbox)
    }

    pub fn include(&mut self, x: &[f64]) {
        for ((lo, hi), v) in self.lo.iter_mut().zip(self.hi.iter_mut()).zip(x) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }

    /// Grow every side so each width becomes `(1 + fraction)` times larger,
    /// keeping the centre fixed.
    pub fn inflated(&self, fraction: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let pad = 0.5 * fraction * (h - l);
                (l - pad, h + pad)
            })
            .unzip();
        BoundingBox { lo, hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Largest Euclidean distance from `x` to a point of the box.
    pub fn farthest_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| {
                let d = (v - l).abs().max((h - v).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Closed-form inverse gradient `p ↦ offset − slope·p` (same slope on every
/// coordinate). Families that expose one let the oracle solve a step in
/// closed form instead of by root finding.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineInverse {
    pub offset: Vec<f64>,
    pub slope: f64,
}

/// One user's utility at one time step.
///
/// Implementations must be strongly concave with parameter [`sigma`],
/// have an [`lipschitz_grad`]-Lipschitz gradient, and be separable across
/// coordinates (coordinate `j` of the gradient depends only on `q_j`). The
/// default [`inverse_gradient`] relies on separability.
///
/// [`sigma`]: Utility::sigma
/// [`lipschitz_grad`]: Utility::lipschitz_grad
/// [`inverse_gradient`]: Utility::inverse_gradient
pub trait Utility {
    /// Allocation dimension `R`.
    fn dim(&self) -> usize;

    fn value(&self, q: &[f64]) -> f64;

    fn gradient(&self, q: &[f64]) -> Vec<f64>;

    /// Strong-concavity parameter.
    fn sigma(&self) -> f64;

    /// Lipschitz constant of the gradient.
    fn lipschitz_grad(&self) -> f64;

    /// Lipschitz constant of the value over `domain`.
    fn lipschitz_value_on(&self, domain: &BoundingBox) -> f64;

    /// `sup_q ‖∇U_next(q) − ∇U_self(q)‖`, the per-step gradient drift.
    fn gradient_drift_to(&self, next: &Self) -> f64
    where
        Self: Sized;

    /// The unique `q` with `∇U(q) = p`.
    ///
    /// The default solves each coordinate by bisection on the gradient to a
    /// residual of `1e-12`. Strong concavity puts the root within
    /// `|∂_j U(0) − p_j| / σ` of the origin, so the bracket is known up front.
    ///
    /// # Panics
    ///
    /// If the utility is not actually `sigma`-strongly concave, so the
    /// a-priori bracket does not contain the root.
    fn inverse_gradient(&self, p: &[f64]) -> Vec<f64> {
        numeric_inverse_gradient(self, p, &Tolerance::default())
            .expect("utility violates its declared strong concavity")
    }

    /// Closed-form inverse gradient, when the family has one.
    fn affine_inverse(&self) -> Option<AffineInverse> {
        None
    }
}

/// Coordinate-wise bisection for `∇U(q) = p` on a separable utility.
pub fn numeric_inverse_gradient<U: Utility + ?Sized>(user: &U, p: &[f64], tol: &Tolerance) -> Result<Vec<f64>> {
    let dim = user.dim();
    if p.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "inverse gradient price",
            expected: dim,
            actual: p.len(),
        });
    }
    let sigma = user.sigma();
    let origin_grad = user.gradient(&vec![0.0; dim]);
    let mut q = vec![0.0; dim];
    for j in 0..dim {
        let partial = |x: f64| {
            let mut probe = vec![0.0; dim];
            probe[j] = x;
            user.gradient(&probe)[j]
        };
        let radius = (origin_grad[j] - p[j]).abs() / sigma;
        let pad = 1e-9 * (1.0 + radius);
        let root = roots::bisect_decreasing(&partial, p[j], -radius - pad, radius + pad, tol, j)?;
        q[j] = root.x;
    }
    Ok(q)
}

/// `U(q) = −scale·‖q − target‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticUtility {
    pub target: Vec<f64>,
    pub scale: f64,
}

impl QuadraticUtility {
    pub fn new(target: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param("scale", format!("must be positive and finite, got {scale}")));
        }
        if target.is_empty() {
            return Err(Error::param("target", "must have at least one coordinate"));
        }
        Ok(QuadraticUtility { target, scale })
    }

    /// Unit-scale utility, `U(q) = −‖q − target‖²`.
    pub fn unit(target: Vec<f64>) -> Self {
        QuadraticUtility { target, scale: 1.0 }
    }
}

impl Utility for QuadraticUtility {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn value(&self, q: &[f64]) -> f64 {
        let d = vector::distance(q, &self.target);
        -self.scale * d * d
    }

    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .zip(&self.target)
            .map(|(x, s)| -2.0 * self.scale * (x - s))
            .collect()
    }

    fn sigma(&self) -> f64 {
        2.0 * self.scale
    }

    fn lipschitz_grad(&self) -> f64 {
        2.0 * self.scale
    }

    fn lipschitz_value_on(&self, domain: &BoundingBox) -> f64 {
        // ‖∇U(q)‖ = 2·scale·‖q − s‖ is maximised at the box corner farthest from s.
        2.0 * self.scale * domain.farthest_distance(&self.target)
    }

    fn gradient_drift_to(&self, next: &Self) -> f64 {
        if self.scale != next.scale {
            // The gradients differ by a non-constant linear term.
            return f64::INFINITY;
        }
        2.0 * self.scale * vector::distance(&next.target, &self.target)
    }

    fn inverse_gradient(&self, p: &[f64]) -> Vec<f64> {
        let k = 1.0 / (2.0 * self.scale);
        self.target.iter().zip(p).map(|(s, pj)| s - k * pj).collect()
    }

    fn affine_inverse(&self) -> Option<AffineInverse> {
        Some(AffineInverse {
            offset: self.target.clone(),
            slope: 1.0 / (2.0 * self.scale),
        })
    }
}

/// The user's local problem: `argmax_q U(q) − pᵀq`, i.e. `∇U(q) = p`.
///
/// # Panics
///
/// If `price` does not have one entry per supplier.
pub fn local_demand<U: Utility + ?Sized>(user: &U, price: &[f64]) -> Vec<f64> {
    assert_eq!(price.len(), user.dim(), "price must have one entry per supplier");
    user.inverse_gradient(price)
}

/// Global constants shared by every bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    pub n_users: usize,
    pub n_suppliers: usize,
    /// Smallest strong-concavity parameter over users and steps.
    pub sigma: f64,
    /// Largest gradient-Lipschitz constant over users and steps.
    pub lipschitz_grad: f64,
    /// Value-Lipschitz constant on the run's allocation domain, once known.
    pub lipschitz_value: Option<f64>,
    /// Per-step capacity drift bound.
    pub gamma: f64,
    /// Per-step utility gradient drift bound.
    pub alpha: f64,
    /// Price step size.
    pub eta: f64,
}

impl GlobalParams {
    /// Largest step size covered by the contraction guarantee,
    /// `2L / (N(1 + Lσ))`.
    pub fn proven_eta_max(&self) -> f64 {
        proven_eta_max(self.n_users, self.sigma, self.lipschitz_grad)
    }

    pub fn eta_in_proven_range(&self) -> bool {
        self.eta > 0.0 && self.eta <= self.proven_eta_max() * (1.0 + 1e-12)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_lipschitz_value(mut self, lprime: f64) -> Self {
        self.lipschitz_value = Some(lprime);
        self
    }

    /// Contraction factor `c = (1 − 2ησN/(1 + σL))^{1/2}`; NaN when the radicand
    /// is negative (step size far outside the proven range).
    pub fn contraction_factor(&self) -> f64 {
        let n = self.n_users as f64;
        let radicand = 1.0 - 2.0 * self.eta * self.sigma * n / (1.0 + self.sigma * self.lipschitz_grad);
        if radicand < 0.0 {
            f64::NAN
        } else {
            radicand.sqrt()
        }
    }

    /// Per-step optimal price drift bound `b = L²(γ/(σN) + α/σ²)`.
    pub fn drift_constant(&self) -> f64 {
        let (n, s, l) = (self.n_users as f64, self.sigma, self.lipschitz_grad);
        l * l * (self.gamma / (s * n) + self.alpha / (s * s))
    }

    /// `(L²/σ)(γ/N + α/σ)`; algebraically equal to [`drift_constant`](Self::drift_constant).
    pub fn price_volatility_bound(&self) -> f64 {
        let (n, s, l) = (self.n_users as f64, self.sigma, self.lipschitz_grad);
        (l * l / s) * (self.gamma / n + self.alpha / s)
    }

    /// `(L²/σ²)(γ/N + α/σ) + α/σ`.
    pub fn primal_volatility_bound(&self) -> f64 {
        self.primal_drift_term() + self.alpha / self.sigma
    }

    /// `(L²/σ²)(γ/N + α/σ)`, the drift term of the primal tracking bound.
    pub fn primal_drift_term(&self) -> f64 {
        let (n, s, l) = (self.n_users as f64, self.sigma, self.lipschitz_grad);
        (l * l / (s * s)) * (self.gamma / n + self.alpha / s)
    }
}

pub fn proven_eta_max(n_users: usize, sigma: f64, lipschitz_grad: f64) -> f64 {
    2.0 * lipschitz_grad / (n_users as f64 * (1.0 + lipschitz_grad * sigma))
}

/// Global constants of a utility series (`utilities[t][i]`) and its trace.
///
/// `gamma` and `alpha` are the realized drifts, raised to the trace's
/// declared construction bounds when those are larger. The step size
/// defaults to [`GlobalParams::proven_eta_max`].
pub fn derive_global_params<U: Utility>(utilities: &[Vec<U>], trace: &SystemTrace) -> Result<GlobalParams> {
    if utilities.is_empty() || trace.horizon() == 0 {
        return Err(Error::EmptyHorizon);
    }
    if utilities.len() != trace.horizon() {
        return Err(Error::DimensionMismatch {
            context: "utility series length vs trace horizon",
            expected: trace.horizon(),
            actual: utilities.len(),
        });
    }
    let n_users = utilities[0].len();
    if n_users == 0 {
        return Err(Error::param("utilities", "at least one user is required"));
    }
    let mut sigma = f64::INFINITY;
    let mut lipschitz_grad: f64 = 0.0;
    for step in utilities {
        if step.len() != n_users {
            return Err(Error::DimensionMismatch {
                context: "users per step",
                expected: n_users,
                actual: step.len(),
            });
        }
        for user in step {
            if user.dim() != trace.n_suppliers() {
                return Err(Error::DimensionMismatch {
                    context: "utility dimension vs suppliers",
                    expected: trace.n_suppliers(),
                    actual: user.dim(),
                });
            }
            sigma = sigma.min(user.sigma());
            lipschitz_grad = lipschitz_grad.max(user.lipschitz_grad());
        }
    }
    let realized_alpha = utilities
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.gradient_drift_to(b)))
        .fold(0.0, f64::max);
    let gamma = trace.realized_gamma.max(trace.declared_gamma.unwrap_or(0.0));
    let alpha = realized_alpha.max(trace.declared_alpha.unwrap_or(0.0));
    let eta = proven_eta_max(n_users, sigma, lipschitz_grad);
    Ok(GlobalParams {
        n_users,
        n_suppliers: trace.n_suppliers(),
        sigma,
        lipschitz_grad,
        lipschitz_value: None,
        gamma,
        alpha,
        eta,
    })
}
