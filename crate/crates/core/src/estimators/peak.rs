use crate::spectral::shift::phase_tables;
use crate::spectral::transform::fft2;
use crate::spectral::{Complex64, FrequencyGrid, Shift2D};

/// How the sub-pixel location was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Refinement {
    Newton,
    Parabolic,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Peak {
    pub shift: Shift2D,
    #[cfg_attr(not(test), allow(dead_code))]
    pub refinement: Refinement,
}

/// Value, gradient and Hessian of `C(t) = Re Σ_ω X(ω) e^{iω·t}`.
fn local_model(cross: &[Complex64], freq: &FrequencyGrid, t: Shift2D) -> (f64, [f64; 2], [[f64; 3]; 1]) {
    let (px, py) = phase_tables(freq, t, 1.0);
    let width = px.len();
    let (mut val, mut gx, mut gy, mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (row, chunk) in cross.chunks(width).enumerate() {
        let wy = freq.omega_y[row];
        let ry = py[row];
        for ((x, &cx), &wx) in chunk.iter().zip(&px).zip(&freq.omega_x) {
            let a = x * cx * ry;
            val += a.re;
            gx -= wx * a.im;
            gy -= wy * a.im;
            hxx -= wx * wx * a.re;
            hxy -= wx * wy * a.re;
            hyy -= wy * wy * a.re;
        }
    }
    (val, [gx, gy], [[hxx, hxy, hyy]])
}

/// Index of the maximum; on exact ties the lowest index wins.
pub(crate) fn integer_peak(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn wrap_index(i: usize, n: usize) -> f64 {
    if 2 * i > n {
        i as f64 - n as f64
    } else {
        i as f64
    }
}

/// Location of the maximum of `C(t) = Re Σ_ω X(ω) e^{iω·t}` over the periodic
/// domain: integer peak of the inverse-transformed map (lowest row-major index
/// wins ties), then safeguarded Newton ascent on the band-limited `C`. Where
/// the Hessian is not negative definite a curvature-scaled gradient step is
/// taken instead; steps are halved until `C` does not decrease. Falls back to
/// a separable 3-point parabola if no ascent step exists at the integer peak
/// or the iterate leaves the unit box around it.
pub(crate) fn correlation_peak(cross: &[Complex64], freq: &FrequencyGrid, newton_iters: usize) -> Peak {
    let (h, w) = (freq.height(), freq.width());
    let mut map = cross.to_vec();
    fft2(&mut map, h, w, true);

    let best = integer_peak(map.iter().map(|v| v.re));
    let (row, col) = (best / w, best % w);
    let start = Shift2D::new(wrap_index(col, w), wrap_index(row, h));

    // C is evaluated with rounding error of order ε·Σ|X|
    let slack = 1e-13 * cross.iter().map(|x| x.norm()).sum::<f64>();
    let mut t = start;
    let mut newton_ok = newton_iters > 0;
    for _ in 0..newton_iters {
        let (val, g, [[hxx, hxy, hyy]]) = local_model(cross, freq, t);
        let det = hxx * hyy - hxy * hxy;
        let (mut dx, mut dy) = if hxx < 0.0 && det > 0.0 {
            (-(hyy * g[0] - hxy * g[1]) / det, -(-hxy * g[0] + hxx * g[1]) / det)
        } else {
            let scale = (hxx * hxx + 2.0 * hxy * hxy + hyy * hyy).sqrt();
            if !(scale > 0.0) {
                newton_ok = false;
                break;
            }
            (g[0] / scale, g[1] / scale)
        };
        if dx.abs().max(dy.abs()) < 1e-12 {
            break;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let next = Shift2D::new(t.tx + dx, t.ty + dy);
            if next.is_finite() && (next - start).max_abs() <= 1.0 && local_model(cross, freq, next).0 >= val - slack {
                accepted = Some(next);
                break;
            }
            dx *= 0.5;
            dy *= 0.5;
        }
        match accepted {
            Some(next) => t = next,
            None => {
                newton_ok = t != start;
                break;
            }
        }
    }

    if newton_ok {
        return Peak {
            shift: t.canonical(h, w),
            refinement: Refinement::Newton,
        };
    }

    let at = |r: usize, c: usize| map[r * w + c].re;
    let c0 = map[best].re;
    let vertex = |minus: f64, plus: f64| {
        let denom = minus - 2.0 * c0 + plus;
        if denom < 0.0 {
            (0.5 * (minus - plus) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let dx = vertex(at(row, (col + w - 1) % w), at(row, (col + 1) % w));
    let dy = vertex(at((row + h - 1) % h, col), at((row + 1) % h, col));
    Peak {
        shift: Shift2D::new(start.tx + dx, start.ty + dy).canonical(h, w),
        refinement: Refinement::Parabolic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_shift, forward_transform, PixelGrid};
    use crate::synth::{dead_leaves, prepare_truth};

    fn cross_for(t: Shift2D) -> (Vec<Complex64>, FrequencyGrid) {
        let truth = prepare_truth(&dead_leaves(32, 32, 5).unwrap()).unwrap();
        let s0 = forward_transform(&truth);
        let s1 = apply_shift(&s0, t);
        let cross: Vec<Complex64> = s1.coeffs().iter().zip(s0.coeffs()).map(|(a, b)| a * b.conj()).collect();
        (cross, s0.frequencies())
    }

    #[test]
    fn recovers_fractional_shift() {
        let t = Shift2D::new(2.5, -1.25);
        let (cross, freq) = cross_for(t);
        let p = correlation_peak(&cross, &freq, 10);
        assert_eq!(p.refinement, Refinement::Newton);
        assert!((p.shift - t).max_abs() < 1e-6, "{:?}", p.shift);
    }

    #[test]
    fn identical_frames_give_exact_zero() {
        let (cross, freq) = cross_for(Shift2D::ZERO);
        let p = correlation_peak(&cross, &freq, 10);
        assert_eq!(p.shift, Shift2D::ZERO);
    }

    #[test]
    fn zero_cross_spectrum_falls_back() {
        let freq = FrequencyGrid::new(8, 8);
        let p = correlation_peak(&vec![Complex64::new(0.0, 0.0); 64], &freq, 10);
        assert_eq!(p.shift, Shift2D::ZERO);
        assert_eq!(p.refinement, Refinement::Parabolic);
    }

    #[test]
    fn ties_prefer_lowest_index() {
        assert_eq!(integer_peak([0.0, 1.0, 0.5, 1.0].into_iter()), 1);
        assert_eq!(integer_peak([2.0, 2.0].into_iter()), 0);
    }

    #[test]
    fn integer_peak_without_newton() {
        let mut g = vec![0.0; 16];
        g[6] = 1.0;
        let s = forward_transform(&PixelGrid::new(4, 4, g).unwrap());
        let p = correlation_peak(s.coeffs(), &s.frequencies(), 0);
        assert!((p.shift - Shift2D::new(2.0, 1.0)).max_abs() < 1e-12);
    }
}
