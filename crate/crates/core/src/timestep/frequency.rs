use crate::error::{domain, Result, WaveError};

/// Result of fitting `A cos(ωt + φ)` to a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyFit {
    pub omega: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// RMS residual divided by the amplitude.
    pub rel_residual: f64,
}

/// Residual (relative to amplitude) above which a fit is rejected.
pub const MAX_REL_RESIDUAL: f64 = 0.01;

/// Frequency actually produced by the trapezoidal rule for a mode of
/// frequency `omega`: the phase advances by `2 arctan(ω Δt / 2)` per step.
pub fn trapezoid_frequency(omega: f64, dt: f64) -> f64 {
    2.0 / dt * (omega * dt / 2.0).atan()
}

/// Least-squares fit of a single sinusoid to `series` sampled at `t = n·dt`.
///
/// The frequency is initialised from the three-term recurrence
/// `x[n+1] + x[n−1] = 2 cos(ωΔt) x[n]` and refined by Gauss–Newton on
/// `a cos ωt + b sin ωt`.
pub fn extract_frequency(series: &[f64], dt: f64) -> Result<FrequencyFit> {
    if series.len() < 64 {
        return domain(format!("need at least 64 samples, got {}", series.len()));
    }
    if !(dt > 0.0) {
        return domain(format!("sample spacing must be positive, got {dt}"));
    }
    let n = series.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..n - 1 {
        num += series[i] * (series[i + 1] + series[i - 1]);
        den += 2.0 * series[i] * series[i];
    }
    if den == 0.0 {
        return Err(WaveError::AmbiguousSignal("signal is identically zero".into()));
    }
    let mut omega = (num / den).clamp(-1.0, 1.0).acos() / dt;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();

    let (mut a, mut b) = amplitudes(series, &t, omega);
    for _ in 0..50 {
        // normal equations for (a, b, ω)
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (i, &ti) in t.iter().enumerate() {
            let (s, c) = (omega * ti).sin_cos();
            let r = series[i] - (a * c + b * s);
            let j = [c, s, ti * (-a * s + b * c)];
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let Some(d) = solve3(jtj, jtr) else { break };
        a += d[0];
        b += d[1];
        omega += d[2];
        if d[2].abs() <= 1e-15 * omega.abs().max(1e-300) {
            break;
        }
    }
    let amplitude = a.hypot(b);
    let rss: f64 = t
        .iter()
        .zip(series)
        .map(|(&ti, &x)| {
            let (s, c) = (omega * ti).sin_cos();
            (x - a * c - b * s).powi(2)
        })
        .sum();
    let rel_residual = (rss / n as f64).sqrt() / amplitude;
    if !rel_residual.is_finite() || rel_residual > MAX_REL_RESIDUAL {
        return Err(WaveError::AmbiguousSignal(format!(
            "single-sinusoid fit leaves relative residual {rel_residual:.3e}"
        )));
    }
    // A cos(ωt + φ) = a cos ωt + b sin ωt with a = A cos φ, b = −A sin φ
    Ok(FrequencyFit { omega, amplitude, phase: (-b).atan2(a), rel_residual })
}

fn amplitudes(x: &[f64], t: &[f64], omega: f64) -> (f64, f64) {
    let (mut cc, mut cs, mut ss, mut xc, mut xs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &ti) in x.iter().zip(t) {
        let (s, c) = (omega * ti).sin_cos();
        cc += c * c;
        cs += c * s;
        ss += s * s;
        xc += xi * c;
        xs += xi * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-300 {
        return (xc / cc.max(1e-300), 0.0);
    }
    ((xc * ss - xs * cs) / det, (xs * cc - xc * cs) / det)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_cosine() {
        let x: Vec<f64> = (0..200).map(|i| 2.0 * (0.01 * i as f64 + 0.3).cos()).collect();
        let f = extract_frequency(&x, 1.0).unwrap();
        assert!((f.omega - 0.01).abs() < 1e-6 * 0.01);
        assert!((f.amplitude - 2.0).abs() < 1e-9);
        assert!((f.phase - 0.3).abs() < 1e-9);
    }

    #[test]
    fn noisy_start_is_refined() {
        let x: Vec<f64> = (0..300)
            .map(|i| (0.2 * i as f64).cos() + 1e-4 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let f = extract_frequency(&x, 0.5).unwrap();
        assert!((f.omega - 0.4).abs() < 1e-5);
    }

    #[test]
    fn two_modes_are_ambiguous() {
        let x: Vec<f64> = (0..200)
            .map(|i| (0.01 * i as f64).cos() + 0.5 * (0.07 * i as f64).cos())
            .collect();
        assert!(matches!(extract_frequency(&x, 1.0), Err(WaveError::AmbiguousSignal(_))));
    }

    #[test]
    fn short_or_zero_series() {
        assert!(matches!(extract_frequency(&[1.0; 10], 1.0), Err(WaveError::Domain(_))));
        assert!(matches!(extract_frequency(&[0.0; 100], 1.0), Err(WaveError::AmbiguousSignal(_))));
    }

    #[test]
    fn trapezoid_distortion() {
        assert!((trapezoid_frequency(1.0, 1e-6) - 1.0).abs() < 1e-12);
        assert!(trapezoid_frequency(10.0, 1.0) < 10.0);
    }
}
