//! The affinity estimator: contrast parametrization, mixture likelihood,
//! score and information, penalized Newton maximization, and Wald standard
//! errors.
//!
//! A document with counts `x` over vocabulary `V` is modeled as draws from the
//! mixture `mu = sum_k theta_k p_k`, where the rows `p_k` come from a
//! [`ReferenceModel`]. The simplex constraint on `theta` is removed by the
//! contrast parametrization `theta = theta0 + C beta`, so estimation runs in
//! the (K-1)-dimensional contrast space. The objective is
//!
//! ```text
//! l(beta) = sum_v x_v log mu_v + lambda * sum_k log theta_k
//! ```
//!
//! whose log penalty both regularizes and acts as the barrier keeping
//! `theta` interior whenever `lambda > 0`.

use nalgebra::{DMatrix, DVector};

use crate::corpus::CountVector;
use crate::error::{Error, Result};
use crate::reference::ReferenceModel;

/// Default penalty weight.
pub const DEFAULT_LAMBDA: f64 = 0.5;
/// Default convergence tolerance on the Newton decrement.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;

const ARMIJO_C: f64 = 1e-4;
const JITTER: f64 = 1e-12;

/// Center point and contrast matrix mapping the (K-1)-dimensional contrast
/// vector onto the simplex: `theta = theta0 + C beta`.
///
/// Column `j` (1-based) has `j` leading entries `-1/j`, then a single `1`;
/// columns sum to zero and the matrix has full column rank. For K = 2 this is
/// `C = (-1, 1)'`, reproducing `theta = (1/2 - beta, 1/2 + beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastBasis {
    k: usize,
    theta0: Vec<f64>,
    c: DMatrix<f64>,
}

/// Build the contrast basis for `k >= 2` classes.
pub fn contrast_basis(k: usize) -> Result<ContrastBasis> {
    if k < 2 {
        return Err(Error::TooFewClasses { expected: 2, got: k });
    }
    let theta0 = vec![1.0 / k as f64; k];
    let mut c = DMatrix::zeros(k, k - 1);
    for j in 1..k {
        for i in 0..j {
            c[(i, j - 1)] = -1.0 / j as f64;
        }
        c[(j, j - 1)] = 1.0;
    }
    Ok(ContrastBasis { k, theta0, c })
}

impl ContrastBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    pub fn contrast(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Map a contrast vector onto the simplex hyperplane. No feasibility
    /// projection: callers check nonnegativity themselves.
    pub fn theta_from_beta(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.k - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k - 1,
                got: beta.len(),
            });
        }
        let mut theta = self.theta0.clone();
        for (j, &b) in beta.iter().enumerate() {
            for (i, t) in theta.iter_mut().enumerate() {
                *t += self.c[(i, j)] * b;
            }
        }
        Ok(theta)
    }

    /// Row `i` of the contrast matrix as a vector in contrast space.
    fn row(&self, i: usize) -> DVector<f64> {
        DVector::from_fn(self.k - 1, |j, _| self.c[(i, j)])
    }
}

/// Result of maximizing the (penalized) mixture likelihood for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityFit {
    /// Estimated affinity vector; sums to one, strictly positive when the
    /// penalty is positive.
    pub theta: Vec<f64>,
    /// Estimated contrast vector, `theta = theta0 + C beta`.
    pub beta: Vec<f64>,
    /// Unpenalized log-likelihood at the estimate.
    pub loglik: f64,
    /// Penalized objective at the estimate (equals `loglik` when lambda = 0).
    pub penalized_loglik: f64,
    /// Accepted Newton steps.
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the penalized score at the estimate.
    pub grad_norm: f64,
    /// Wald standard errors for each affinity component, from the inverse
    /// penalized observed information. `None` when the information is
    /// singular or the estimate sits on the simplex boundary.
    pub wald_se_theta: Option<Vec<f64>>,
}

/// Shared per-document evaluation state: observed counts, projected contrast
/// columns, and the penalty weight.
struct Evaluator<'a> {
    model: &'a ReferenceModel,
    basis: ContrastBasis,
    lambda: f64,
    /// (count, per-class probabilities, C' p column) for each observed type.
    observed: Vec<(f64, DVector<f64>, DVector<f64>)>,
    /// Rows of C, used by the penalty terms.
    c_rows: Vec<DVector<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a ReferenceModel, x: &CountVector, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidLambda(lambda));
        }
        let basis = contrast_basis(model.k())?;
        let k = model.k();
        let mut observed = Vec::new();
        for (v, count) in x.iter() {
            let pcol = DVector::from_fn(k, |i, _| model.prob(i, v));
            if pcol.amax() <= 0.0 {
                return Err(Error::ZeroProbabilityWord(v));
            }
            let cp = basis.c.transpose() * &pcol;
            observed.push((count as f64, pcol, cp));
        }
        let c_rows = (0..k).map(|i| basis.row(i)).collect();
        Ok(Self {
            model,
            basis,
            lambda,
            observed,
            c_rows,
        })
    }

    fn k(&self) -> usize {
        self.model.k()
    }

    fn theta(&self, beta: &DVector<f64>) -> DVector<f64> {
        let mut theta = DVector::from_column_slice(&self.basis.theta0);
        theta.gemv(1.0, &self.basis.c, beta, 1.0);
        theta
    }

    /// Penalized objective; errors signal an infeasible point.
    fn objective(&self, beta: &DVector<f64>) -> Result<f64> {
        let theta = self.theta(beta);
        let mut value = 0.0;
        for (count, pcol, _) in &self.observed {
            let mu = pcol.dot(&theta);
            if mu <= 0.0 {
                return Err(Error::InfeasibleTheta {
                    component: theta.imin(),
                });
            }
            value += count * mu.ln();
        }
        if self.lambda > 0.0 {
            for (k, &t) in theta.iter().enumerate() {
                if t <= 0.0 {
                    return Err(Error::InfeasibleTheta { component: k });
                }
                value += self.lambda * t.ln();
            }
        }
        Ok(value)
    }

    /// Unpenalized log-likelihood at a feasible point.
    fn loglik(&self, beta: &DVector<f64>) -> f64 {
        let theta = self.theta(beta);
        self.observed
            .iter()
            .map(|(count, pcol, _)| count * pcol.dot(&theta).ln())
            .sum()
    }

    /// Penalized score and negative Hessian.
    fn grad_hess(&self, beta: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let theta = self.theta(beta);
        let dim = self.k() - 1;
        let mut u = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);
        for (count, pcol, cp) in &self.observed {
            let mu = pcol.dot(&theta);
            if mu <= 0.0 {
                return Err(Error::InfeasibleTheta {
                    component: theta.imin(),
                });
            }
            u.axpy(count / mu, cp, 1.0);
            h.ger(count / (mu * mu), cp, cp, 1.0);
        }
        if self.lambda > 0.0 {
            for (k, &t) in theta.iter().enumerate() {
                if t <= 0.0 {
                    return Err(Error::InfeasibleTheta { component: k });
                }
                u.axpy(self.lambda / t, &self.c_rows[k], 1.0);
                h.ger(self.lambda / (t * t), &self.c_rows[k], &self.c_rows[k], 1.0);
            }
        }
        Ok((u, h))
    }

    /// Largest step along `c_dir = C d` keeping `theta` nonnegative.
    fn max_feasible_step(&self, theta: &DVector<f64>, c_dir: &DVector<f64>) -> f64 {
        let mut bound = f64::INFINITY;
        for (t, d) in theta.iter().zip(c_dir.iter()) {
            if *d < 0.0 {
                bound = bound.min(t.max(0.0) / -d);
            }
        }
        bound
    }
}

/// Solve `h d = rhs` for symmetric positive definite `h`, retrying once with
/// a small diagonal jitter when the factorization fails.
fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = h.diagonal().amax().max(1.0);
    let dim = h.nrows();
    let jittered = h + DMatrix::<f64>::identity(dim, dim) * (JITTER * scale);
    jittered.cholesky().map(|ch| ch.solve(rhs))
}

/// Log-likelihood of the counts under the mixture, plus the log penalty when
/// `lambda > 0` (so with a positive penalty this is the full objective).
pub fn log_likelihood(
    model: &ReferenceModel,
    x: &CountVector,
    beta: &[f64],
    lambda: f64,
) -> Result<f64> {
    let ev = Evaluator::new(model, x, lambda)?;
    check_len(beta, model.k() - 1)?;
    ev.objective(&DVector::from_column_slice(beta))
}

/// Gradient of the (penalized) objective with respect to the contrast vector.
pub fn score(model: &ReferenceModel, x: &CountVector, beta: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let ev = Evaluator::new(model, x, lambda)?;
    check_len(beta, model.k() - 1)?;
    let (u, _) = ev.grad_hess(&DVector::from_column_slice(beta))?;
    Ok(u.iter().copied().collect())
}

/// Observed information: the negative Hessian of the (penalized) objective,
/// `C' Q X Q' C` plus `lambda C' diag(1/theta^2) C` when penalizing.
/// Symmetric positive semidefinite.
pub fn observed_information(
    model: &ReferenceModel,
    x: &CountVector,
    beta: &[f64],
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let ev = Evaluator::new(model, x, lambda)?;
    check_len(beta, model.k() - 1)?;
    let (_, h) = ev.grad_hess(&DVector::from_column_slice(beta))?;
    Ok(h)
}

/// Expected information for a document of length `n`: `n C' Q P' C`.
pub fn expected_information(model: &ReferenceModel, n: u64, beta: &[f64]) -> Result<DMatrix<f64>> {
    let basis = contrast_basis(model.k())?;
    check_len(beta, model.k() - 1)?;
    let theta = basis.theta_from_beta(beta)?;
    if let Some(component) = theta.iter().position(|&t| t < 0.0) {
        return Err(Error::InfeasibleTheta { component });
    }
    let k = model.k();
    let dim = k - 1;
    let theta = DVector::from_column_slice(&theta);
    let ct = basis.c.transpose();
    let mut info = DMatrix::zeros(dim, dim);
    for v in 0..model.v() {
        let pcol = DVector::from_fn(k, |i, _| model.prob(i, v));
        let mu: f64 = pcol.dot(&theta);
        if mu <= 0.0 {
            if pcol.amax() <= 0.0 {
                continue; // dead vocabulary entry contributes nothing
            }
            return Err(Error::ZeroProbabilityWord(v));
        }
        let cp = &ct * pcol;
        info.ger(n as f64 / mu, &cp, &cp, 1.0);
    }
    Ok(info)
}

fn check_len(beta: &[f64], expected: usize) -> Result<()> {
    if beta.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: beta.len(),
        });
    }
    Ok(())
}

/// Backtracking line search along the Newton direction. Starts from the full
/// step clipped to the feasible region, halves until the Armijo condition
/// holds (with a tiny slack so terminal steps at the roundoff floor are not
/// rejected). Returns the accepted point, or `None` when no feasible
/// improving step exists.
fn line_search(
    ev: &Evaluator,
    beta: &DVector<f64>,
    dir: &DVector<f64>,
    slope: f64,
    f0: f64,
) -> Option<(DVector<f64>, f64)> {
    let theta = ev.theta(beta);
    let c_dir = &ev.basis.c * dir;
    let bound = ev.max_feasible_step(&theta, &c_dir);
    let mut t = if ev.lambda > 0.0 {
        // The log penalty diverges on the boundary, so stay strictly inside.
        (0.99 * bound).min(1.0)
    } else {
        bound.min(1.0)
    };
    if t <= 1e-14 {
        return None;
    }
    let slack = 1e-12 * (1.0 + f0.abs());
    for _ in 0..60 {
        let cand = beta + dir * t;
        if let Ok(f1) = ev.objective(&cand) {
            if f1 >= f0 + ARMIJO_C * t * slope - slack {
                return Some((cand, f1));
            }
        }
        t *= 0.5;
    }
    None
}

pub(crate) struct NewtonTrace {
    /// Objective value after each accepted step, starting at beta = 0.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: Vec<f64>,
}

pub(crate) fn newton_fit(
    model: &ReferenceModel,
    x: &CountVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(AffinityFit, NewtonTrace)> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    if lambda == 0.0 && x.is_zero() {
        return Err(Error::EmptyDocumentCounts);
    }
    let ev = Evaluator::new(model, x, lambda)?;
    let dim = model.k() - 1;
    let mut beta = DVector::zeros(dim);
    let mut f = ev
        .objective(&beta)
        .expect("the simplex center is always feasible");
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        let (u, h) = ev.grad_hess(&beta)?;
        if u.amax() < tol {
            converged = true;
            break;
        }
        let Some(dir) = solve_spd(&h, &u) else {
            break;
        };
        let slope = u.dot(&dir);
        let decrement = 0.5 * slope;
        match line_search(&ev, &beta, &dir, slope, f) {
            Some((next, f_next)) => {
                beta = next;
                f = f_next;
                trace.push(f);
                iterations += 1;
            }
            None => {
                // Blocked. With no penalty this is a boundary maximum whose
                // ascent direction points outward; accept it. With a penalty
                // the iterate is interior, so only accept when the remaining
                // decrement is already negligible.
                converged = lambda == 0.0 || decrement < tol.max(1e-9 * (1.0 + f.abs()));
                break;
            }
        }
        if decrement < tol {
            converged = true;
            break;
        }
    }

    let (u_final, _) = ev.grad_hess(&beta)?;
    let grad_norm = if dim == 0 { 0.0 } else { u_final.amax() };
    let mut theta = ev.theta(&beta);
    if lambda == 0.0 {
        // Boundary landings can leave -1e-17s behind; snap them.
        for t in theta.iter_mut() {
            if *t < 0.0 && *t > -1e-10 {
                *t = 0.0;
            }
        }
    }
    let loglik = ev.loglik(&beta);
    let beta_vec: Vec<f64> = beta.iter().copied().collect();
    let interior = theta.iter().all(|&t| t > 0.0);
    let wald_se_theta = if converged && interior {
        wald_se(model, x, &beta_vec, lambda).ok()
    } else {
        None
    };
    let fit = AffinityFit {
        theta: theta.iter().copied().collect(),
        beta: beta_vec,
        loglik,
        penalized_loglik: f,
        iterations,
        converged,
        grad_norm,
        wald_se_theta,
    };
    Ok((fit, NewtonTrace { objective: trace }))
}

/// Maximize the penalized mixture likelihood for one document by damped
/// Newton ascent from the simplex center.
///
/// Convergence is declared when the Newton decrement `u' I^{-1} u / 2` or the
/// max-norm of the score falls below `tol`; the terminating Newton step is
/// still applied, so the returned estimate carries the quadratic-convergence
/// accuracy of one extra iteration. When `max_iter` is exhausted the fit is
/// returned with `converged = false` rather than as an error.
pub fn estimate_affinity(
    model: &ReferenceModel,
    x: &CountVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<AffinityFit> {
    newton_fit(model, x, lambda, tol, max_iter).map(|(fit, _)| fit)
}

/// Wald standard errors for the affinity components: invert the penalized
/// observed information at `beta_hat` and propagate through the contrast,
/// `cov(theta) = C I^{-1} C'`. Fails with [`Error::SingularInformation`]
/// rather than fabricating values when the information is not invertible.
pub fn wald_se(
    model: &ReferenceModel,
    x: &CountVector,
    beta_hat: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    let ev = Evaluator::new(model, x, lambda)?;
    check_len(beta_hat, model.k() - 1)?;
    let (_, h) = ev.grad_hess(&DVector::from_column_slice(beta_hat))?;
    let chol = h.cholesky().ok_or(Error::SingularInformation)?;
    let cov_beta = chol.inverse();
    let cov_theta = &ev.basis.c * cov_beta * ev.basis.c.transpose();
    Ok((0..model.k())
        .map(|k| cov_theta[(k, k)].max(0.0).sqrt())
        .collect())
}
