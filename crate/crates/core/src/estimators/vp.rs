use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::cost::{accumulate_unshifted, weighted_energy};
use super::{CostWeights, EstimateOutcome, EstimatorConfig, ShiftSet, SpectralStack};
use crate::error::Result;
use crate::spectral::{Complex64, Shift2D};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const STEEPEST_MOVE: f64 = 0.5;
const MAX_MOVE: f64 = 1.0;
/// Gradient small enough relative to `E` to count as stationary.
const GRAD_RTOL: f64 = 1e-10;
/// Eigenvalues of the modified Hessian are floored at this fraction of the
/// largest magnitude.
const EIGEN_FLOOR: f64 = 1e-8;

struct Eval {
    cost: f64,
    grad: DVector<f64>,
    aligned: Vec<Vec<Complex64>>,
    sum: Vec<Complex64>,
}

fn shifts_of(x: &DVector<f64>) -> Vec<Shift2D> {
    let mut out = vec![Shift2D::ZERO];
    out.extend(x.as_slice().chunks(2).map(|c| Shift2D::new(c[0], c[1])));
    out
}

fn evaluate(stack: &SpectralStack, w: &CostWeights, x: &DVector<f64>) -> Eval {
    let zero = vec![Complex64::new(0.0, 0.0); stack.bins()];
    let aligned: Vec<Vec<Complex64>> = stack
        .frames()
        .iter()
        .zip(shifts_of(x))
        .map(|(frame, t)| {
            let mut a = zero.clone();
            accumulate_unshifted(&mut a, frame, stack, t, 1.0);
            a
        })
        .collect();
    let mut sum = zero;
    for a in &aligned {
        for (s, v) in sum.iter_mut().zip(a) {
            *s += v;
        }
    }
    let freq = stack.freq();
    let width = freq.width();
    let mut grad = DVector::zeros(x.len());
    for (i, a) in aligned.iter().enumerate().skip(1) {
        let (mut gx, mut gy) = (0.0, 0.0);
        for (idx, ((v, m), wv)) in a.iter().zip(&sum).zip(w.values()).enumerate() {
            // Re(iω·a·conj(m)) = −ω·Im(a·conj(m))
            let im = wv * (v * m.conj()).im;
            gx -= freq.omega_x[idx % width] * im;
            gy -= freq.omega_y[idx / width] * im;
        }
        grad[2 * (i - 1)] = 2.0 * gx;
        grad[2 * (i - 1) + 1] = 2.0 * gy;
    }
    Eval {
        cost: weighted_energy(&sum, w),
        grad,
        aligned,
        sum,
    }
}

/// Hessian of `E` over the free coordinates:
/// `∂²E/∂τ_i∂τ_j = 2 Re Σ w ωωᵀ a_i conj(a_j) − δ_ij 2 Re Σ w ωωᵀ a_i conj(m̃)`
/// with `a_i = z̃_i e^{iω·τ_i}`.
fn hessian(stack: &SpectralStack, w: &CostWeights, at: &Eval) -> DMatrix<f64> {
    let k = at.aligned.len() - 1;
    let freq = stack.freq();
    let width = freq.width();
    let block = |a: &[Complex64], b: &[Complex64]| {
        let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
        for (idx, ((u, v), wv)) in a.iter().zip(b).zip(w.values()).enumerate() {
            let (ox, oy) = (freq.omega_x[idx % width], freq.omega_y[idx / width]);
            let re = wv * (u * v.conj()).re;
            xx += ox * ox * re;
            xy += ox * oy * re;
            yy += oy * oy * re;
        }
        [2.0 * xx, 2.0 * xy, 2.0 * yy]
    };
    let mut h = DMatrix::zeros(2 * k, 2 * k);
    for i in 1..=k {
        for j in i..=k {
            let mut b = block(&at.aligned[i], &at.aligned[j]);
            if i == j {
                let c = block(&at.aligned[i], &at.sum);
                for (v, d) in b.iter_mut().zip(c) {
                    *v -= d;
                }
            }
            let (r, c) = (2 * (i - 1), 2 * (j - 1));
            for (dr, dc, v) in [(0, 0, b[0]), (0, 1, b[1]), (1, 0, b[1]), (1, 1, b[2])] {
                h[(r + dr, c + dc)] = v;
                h[(c + dc, r + dr)] = v;
            }
        }
    }
    h
}

/// Ascent direction `|−H|⁻¹ g`, with `|·|` taking absolute eigenvalues, and
/// whether `−H` was already positive definite (a pure Newton step).
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<(DVector<f64>, bool)> {
    let eig = SymmetricEigen::new(-h);
    let largest = eig.eigenvalues.amax();
    if !(largest > 0.0 && largest.is_finite()) {
        return None;
    }
    let floor = EIGEN_FLOOR * largest;
    let pure = eig.eigenvalues.iter().all(|&l| l > floor);
    let q = &eig.eigenvectors;
    let mut coeffs = q.transpose() * g;
    for (c, &l) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= l.abs().max(floor);
    }
    Some((q * coeffs, pure))
}

/// Scales `p` down so that no coordinate moves by more than `cap`.
fn capped(p: DVector<f64>, cap: f64) -> DVector<f64> {
    let m = p.amax();
    if m > cap {
        p * (cap / m)
    } else {
        p
    }
}

/// Backtracking ascent along `p`: halves until the Armijo sufficient-increase
/// condition holds. Returns the accepted point or `None`.
fn line_search(stack: &SpectralStack, w: &CostWeights, x: &DVector<f64>, at: &Eval, p: &DVector<f64>) -> Option<(DVector<f64>, Eval)> {
    let slope = at.grad.dot(p);
    if !(slope > 0.0) {
        return None;
    }
    let mut step = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let candidate = x + p * step;
        let e = evaluate(stack, w, &candidate);
        if e.cost >= at.cost + ARMIJO_C * step * slope {
            return Some((candidate, e));
        }
        step *= 0.5;
    }
    None
}

/// Joint Newton ascent on `E` over all `2K` coordinates, using the exact
/// Hessian with its eigenvalues made negative.
pub(crate) fn run(stack: &SpectralStack, w: &CostWeights, init: ShiftSet, cfg: &EstimatorConfig) -> Result<EstimateOutcome> {
    let n = 2 * init.k();
    let mut x = DVector::from_iterator(n, init[1..].iter().flat_map(|t| [t.tx, t.ty]));
    let mut at = evaluate(stack, w, &x);
    let mut history = vec![at.cost];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_outer_iters {
        iterations += 1;
        if at.grad.amax() <= GRAD_RTOL * at.cost.abs() {
            converged = true;
            break;
        }
        let (mut p, mut pure) = match newton_direction(hessian(stack, w, &at), &at.grad) {
            Some((p, pure)) => (capped(p, MAX_MOVE), pure),
            None => (DVector::zeros(n), false),
        };
        let mut accepted = line_search(stack, w, &x, &at, &p);
        if accepted.is_none() {
            pure = false;
            p = &at.grad * (STEEPEST_MOVE / at.grad.amax());
            accepted = line_search(stack, w, &x, &at, &p);
        }
        let Some((x_new, e_new)) = accepted else {
            // no ascent found along the gradient: numerically stationary
            converged = true;
            break;
        };
        let moved = (&x_new - &x).amax();
        x = x_new;
        at = e_new;
        history.push(at.cost);
        // only a full-curvature step measures the distance to the optimum
        if pure && moved < cfg.shift_tol {
            converged = true;
            break;
        }
    }

    Ok(EstimateOutcome {
        shifts: ShiftSet::new(shifts_of(&x))?,
        iterations,
        final_cost: at.cost,
        converged,
        cost_history: history,
    })
}
