use nalgebra::{DMatrix, DVector};

use super::pairwise::relative_shift;
use super::{CostWeights, ShiftSet, SpectralStack};
use crate::error::{Error, Result};
use crate::spectral::Shift2D;

/// Shift of frame `j` relative to frame `i`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseMeasurement {
    pub i: usize,
    pub j: usize,
    pub shift: Shift2D,
}

/// Number of frame pairs among `k + 1` frames.
pub fn pair_count(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Least-squares adjacent displacements `r_0..r_{K-1}` with
/// `Σ_{i<=n<j} r_n ≈ b_ij`, solved by QR per axis, then accumulated into
/// absolute shifts `τ_j = Σ_{n<j} r_n`.
pub fn solve_adjacent_system(measurements: &[PairwiseMeasurement], k: usize) -> Result<ShiftSet> {
    if k == 0 {
        return Err(Error::invalid("constrained alignment needs at least two frames"));
    }
    if measurements.len() < k {
        return Err(Error::invalid(format!(
            "{} measurements cannot determine {k} displacements",
            measurements.len()
        )));
    }
    let m = measurements.len();
    let mut a = DMatrix::<f64>::zeros(m, k);
    let mut bx = DVector::<f64>::zeros(m);
    let mut by = DVector::<f64>::zeros(m);
    for (row, meas) in measurements.iter().enumerate() {
        if !(meas.i < meas.j && meas.j <= k) {
            return Err(Error::invalid(format!("bad pair ({}, {}) for K = {k}", meas.i, meas.j)));
        }
        for n in meas.i..meas.j {
            a[(row, n)] = 1.0;
        }
        bx[row] = meas.shift.tx;
        by[row] = meas.shift.ty;
    }

    let qr = a.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::NoSolution("adjacent-displacement system is rank deficient".into()));
    }
    let qt = qr.q().transpose();
    let solve = |b: &DVector<f64>| {
        r.solve_upper_triangular(&(&qt * b))
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))
    };
    let rx = solve(&bx)?;
    let ry = solve(&by)?;

    let mut shifts = Vec::with_capacity(k + 1);
    let mut acc = Shift2D::ZERO;
    shifts.push(acc);
    for n in 0..k {
        acc = acc + Shift2D::new(rx[n], ry[n]);
        shifts.push(acc);
    }
    ShiftSet::new(shifts)
}

/// Correlates every pair of frames under weights `w` and reconciles the
/// `K(K+1)/2` relative shifts by least squares.
pub fn estimate_constrained(stack: &SpectralStack, w: &CostWeights, newton_iters: usize) -> Result<ShiftSet> {
    stack.check_weights(w)?;
    let k = stack.k();
    let frames = stack.frames();
    let mut measurements = Vec::with_capacity(pair_count(k));
    for i in 0..k {
        for j in i + 1..=k {
            measurements.push(PairwiseMeasurement {
                i,
                j,
                shift: relative_shift(&frames[j], &frames[i], w, newton_iters)?,
            });
        }
    }
    let (h, wd) = stack.dims();
    Ok(solve_adjacent_system(&measurements, k)?.canonical(h, wd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn consistent(truth: &[Shift2D]) -> Vec<PairwiseMeasurement> {
        let k = truth.len() - 1;
        let mut out = Vec::new();
        for i in 0..k {
            for j in i + 1..=k {
                out.push(PairwiseMeasurement {
                    i,
                    j,
                    shift: truth[j] - truth[i],
                });
            }
        }
        out
    }

    /// Normal equations `(AᵀA) r = Aᵀb` solved by Gaussian elimination.
    fn normal_equations(meas: &[PairwiseMeasurement], k: usize, pick: fn(Shift2D) -> f64) -> Vec<f64> {
        let mut ata = vec![vec![0.0; k + 1]; k];
        for m in meas {
            for p in m.i..m.j {
                for q in m.i..m.j {
                    ata[p][q] += 1.0;
                }
                ata[p][k] += pick(m.shift);
            }
        }
        for c in 0..k {
            let piv = (c..k).max_by(|&a, &b| ata[a][c].abs().total_cmp(&ata[b][c].abs())).unwrap();
            ata.swap(c, piv);
            for r in 0..k {
                if r != c {
                    let f = ata[r][c] / ata[c][c];
                    for col in c..=k {
                        ata[r][col] -= f * ata[c][col];
                    }
                }
            }
        }
        (0..k).map(|r| ata[r][k] / ata[r][r]).collect()
    }

    #[test]
    fn counts_pairs() {
        assert_eq!(pair_count(1), 1);
        assert_eq!(pair_count(3), 6);
        assert_eq!(pair_count(10), 55);
    }

    #[test]
    fn single_pair_is_exact() {
        let b = Shift2D::new(1.3, -0.7);
        let s = solve_adjacent_system(&[PairwiseMeasurement { i: 0, j: 1, shift: b }], 1).unwrap();
        assert_eq!(s[1], b);
    }

    #[test]
    fn consistent_system_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..=10 {
            let mut truth = vec![Shift2D::ZERO];
            truth.extend((0..k).map(|_| Shift2D::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))));
            let s = solve_adjacent_system(&consistent(&truth), k).unwrap();
            for (a, b) in s.iter().zip(&truth) {
                assert!((*a - *b).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn perturbation_matches_normal_equations() {
        let truth = [
            Shift2D::ZERO,
            Shift2D::new(0.5, 1.0),
            Shift2D::new(-1.0, 2.0),
            Shift2D::new(0.25, -0.75),
        ];
        let mut meas = consistent(&truth);
        meas[2].shift = meas[2].shift + Shift2D::new(0.3, -0.2);
        let s = solve_adjacent_system(&meas, 3).unwrap();
        let rx = normal_equations(&meas, 3, |t| t.tx);
        let ry = normal_equations(&meas, 3, |t| t.ty);
        let mut acc = Shift2D::ZERO;
        for n in 0..3 {
            acc = acc + Shift2D::new(rx[n], ry[n]);
            assert!((s[n + 1] - acc).max_abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_underdetermined() {
        assert!(solve_adjacent_system(&[], 1).is_err());
        let only = PairwiseMeasurement {
            i: 0,
            j: 2,
            shift: Shift2D::ZERO,
        };
        assert!(solve_adjacent_system(&[only, only], 2).is_err());
    }
}
