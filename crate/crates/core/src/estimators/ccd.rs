use super::cost::{aligned_sum, weighted_energy};
use super::peak::correlation_peak;
use super::{CostWeights, EstimateOutcome, EstimatorConfig, ShiftSet, SpectralStack};
use crate::error::Result;
use crate::spectral::{Complex64, Shift2D};

/// Peak of `Re Σ w·z̃_i·conj(m̃)·e^{iω·t}`: frame `i` re-aligned to the current sum.
fn realign(stack: &SpectralStack, w: &CostWeights, i: usize, sum: &[Complex64], newton_iters: usize) -> Shift2D {
    let cross: Vec<Complex64> = stack.frames()[i]
        .coeffs()
        .iter()
        .zip(sum)
        .zip(w.values())
        .map(|((z, m), wv)| z * m.conj() * *wv)
        .collect();
    correlation_peak(&cross, stack.freq(), newton_iters).shift
}

fn cost_of(stack: &SpectralStack, w: &CostWeights, shifts: &[Shift2D]) -> f64 {
    weighted_energy(&aligned_sum(stack, shifts), w)
}

fn max_change(a: &[Shift2D], b: &[Shift2D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).max_abs()).fold(0.0, f64::max)
}

/// Each outer iteration forms the aligned average and re-aligns every frame
/// to it at once, then re-expresses the result relative to frame 0. If that joint update lowers the cost the iteration falls
/// back to one frame at a time, keeping only improving moves.
pub(crate) fn run(stack: &SpectralStack, w: &CostWeights, init: ShiftSet, cfg: &EstimatorConfig) -> Result<EstimateOutcome> {
    let mut current = init.into_vec();
    let mut cost = cost_of(stack, w, &current);
    let mut history = vec![cost];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_outer_iters {
        iterations += 1;
        let sum = aligned_sum(stack, &current);
        // frame 0 is re-aligned too and the gauge restored afterwards; with
        // frame 0 pinned a common drift of the others decays only by
        // K/(K+1) per iteration
        let moved: Vec<Shift2D> = (0..current.len())
            .map(|i| realign(stack, w, i, &sum, cfg.newton_iters))
            .collect();
        let proposal: Vec<Shift2D> = moved.iter().map(|&t| t - moved[0]).collect();
        let proposal_cost = cost_of(stack, w, &proposal);

        let next = if proposal_cost >= cost {
            cost = proposal_cost;
            proposal
        } else {
            let mut next = current.clone();
            for i in 1..next.len() {
                let sum = aligned_sum(stack, &next);
                let candidate = realign(stack, w, i, &sum, cfg.newton_iters);
                let previous = std::mem::replace(&mut next[i], candidate);
                let c = cost_of(stack, w, &next);
                if c >= cost {
                    cost = c;
                } else {
                    next[i] = previous;
                }
            }
            next
        };

        let change = max_change(&next, &current);
        current = next;
        history.push(cost);
        if change < cfg.shift_tol {
            converged = true;
            break;
        }
    }

    Ok(EstimateOutcome {
        shifts: ShiftSet::new(current)?,
        iterations,
        final_cost: cost,
        converged,
        cost_history: history,
    })
}
