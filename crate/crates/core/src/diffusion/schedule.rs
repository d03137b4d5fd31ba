use std::f64::consts::FRAC_PI_2;

use super::DiffusionError;

/// Offset `s` of the cosine schedule.
pub const COSINE_OFFSET: f64 = 0.008;
const ALPHA_BAR_FLOOR: f64 = 1e-8;

/// Cumulative signal coefficients `ᾱ_0 … ᾱ_T` plus the signal scale used
/// to squash targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    alpha_bar: Vec<f64>,
    pub scale: f64,
}

impl DiffusionSchedule {
    /// Total steps `T`.
    pub fn steps(&self) -> usize {
        self.alpha_bar.len() - 1
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self, DiffusionError> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(DiffusionError::BadConfig(format!(
                "scale {scale} not in (0, 1]"
            )));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Per-step noise `β_t = 1 − ᾱ_t / ᾱ_{t−1}`, for `t ≥ 1`.
    pub fn beta(&self, t: usize) -> f64 {
        1.0 - self.alpha_bar[t] / self.alpha_bar[t - 1]
    }

    /// Ancestral transition variance `β̃_t = (1 − ᾱ_{t−1}) / (1 − ᾱ_t) · β_t`.
    /// Not used by deterministic DDIM sampling.
    pub fn posterior_variance(&self, t: usize) -> f64 {
        (1.0 - self.alpha_bar[t - 1]) / (1.0 - self.alpha_bar[t]) * self.beta(t)
    }
}

/// `ᾱ_t = f(t)/f(0)` with `f(t) = cos²(((t/T + s)/(1 + s))·π/2)`, floored
/// at 1e-8. Signal scale defaults to 0.5.
pub fn cosine_schedule(steps: usize) -> Result<DiffusionSchedule, DiffusionError> {
    if steps == 0 {
        return Err(DiffusionError::BadT);
    }
    let f = |t: usize| {
        let x = (t as f64 / steps as f64 + COSINE_OFFSET) / (1.0 + COSINE_OFFSET) * FRAC_PI_2;
        x.cos().powi(2)
    };
    let f0 = f(0);
    let alpha_bar = (0..=steps)
        .map(|t| {
            if t == 0 {
                1.0
            } else {
                (f(t) / f0).max(ALPHA_BAR_FLOOR)
            }
        })
        .collect();
    Ok(DiffusionSchedule {
        alpha_bar,
        scale: 0.5,
    })
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `(2·sigmoid(x) − 1)·scale`, elementwise.
pub fn scale_signal(x: &[f64], scale: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| (sigmoid(v) * 2.0 - 1.0) * scale)
        .collect()
}

/// Exact inverse of [`scale_signal`], clamped to the score range `[0, 1]`.
pub fn unscale_signal(x: &[f64], scale: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let u = ((v / scale + 1.0) / 2.0).clamp(1e-300, 1.0 - f64::EPSILON / 2.0);
            (u / (1.0 - u)).ln().clamp(0.0, 1.0)
        })
        .collect()
}

/// Draw from `q(x_t | x_0)` given standard normal noise `eps`.
pub fn forward_sample(
    x0s: &[f64],
    t: usize,
    sched: &DiffusionSchedule,
    eps: &[f64],
) -> Result<Vec<f64>, DiffusionError> {
    if x0s.len() != eps.len() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "{} signal vs {} noise",
            x0s.len(),
            eps.len()
        )));
    }
    if t > sched.steps() {
        return Err(DiffusionError::BadSteps { t, t_prev: t });
    }
    let ab = sched.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(x0s.iter().zip(eps).map(|(x, e)| a * x + b * e).collect())
}

/// Deterministic DDIM update between two signal levels.
pub fn ddim_update(x_t: &[f64], x0_pred: &[f64], ab_t: f64, ab_prev: f64) -> Vec<f64> {
    let (sa, sb) = (ab_t.sqrt(), (1.0 - ab_t).sqrt());
    let (pa, pb) = (ab_prev.sqrt(), (1.0 - ab_prev).sqrt());
    x_t.iter()
        .zip(x0_pred)
        .map(|(&x, &x0)| {
            if sb == 0.0 {
                return x;
            }
            let eps = (x - sa * x0) / sb;
            pa * x0 + pb * eps
        })
        .collect()
}

/// DDIM step `x_t → x_{t_prev}` (η = 0).
pub fn ddim_step(
    x_t: &[f64],
    x0_pred: &[f64],
    t: usize,
    t_prev: usize,
    sched: &DiffusionSchedule,
) -> Result<Vec<f64>, DiffusionError> {
    if !(t_prev < t && t <= sched.steps()) {
        return Err(DiffusionError::BadSteps { t, t_prev });
    }
    if x_t.len() != x0_pred.len() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "{} vs {}",
            x_t.len(),
            x0_pred.len()
        )));
    }
    Ok(ddim_update(
        x_t,
        x0_pred,
        sched.alpha_bar(t),
        sched.alpha_bar(t_prev),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_endpoints_and_monotone() {
        for t in [1, 5, 20, 1000] {
            let s = cosine_schedule(t).unwrap();
            assert_eq!(s.alpha_bar(0), 1.0);
            assert!(s.alpha_bars().windows(2).all(|w| w[1] < w[0]));
            assert!(s.alpha_bar(t) <= 0.05 && s.alpha_bar(t) >= 0.0);
        }
        assert!(cosine_schedule(20).unwrap().alpha_bar(20) < 1e-3);
        assert_eq!(cosine_schedule(0), Err(DiffusionError::BadT));
    }

    #[test]
    fn scale_values() {
        assert_eq!(scale_signal(&[0.0], 0.5), vec![0.0]);
        assert_relative_eq!(scale_signal(&[1.0], 0.5)[0], 0.23106, epsilon = 1e-5);
        assert_relative_eq!(scale_signal(&[800.0], 0.5)[0], 0.5);
        let xs = [0.0, 0.1, 0.37, 0.9, 1.0];
        let back = unscale_signal(&scale_signal(&xs, 0.5), 0.5);
        for (a, b) in xs.iter().zip(back) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_edges() {
        let s = cosine_schedule(20).unwrap();
        let x = [0.1, -0.2, 0.05];
        let e = [0.3, 1.0, -2.0];
        assert_eq!(forward_sample(&x, 0, &s, &e).unwrap(), x.to_vec());
        let far = forward_sample(&x, 20, &s, &e).unwrap();
        for (a, b) in far.iter().zip(e) {
            assert!((a - b).abs() < 1e-3);
        }
        assert!(forward_sample(&x, 1, &s, &e[..2]).is_err());
    }

    #[test]
    fn ddim_identities() {
        let s = cosine_schedule(20).unwrap();
        let x = [0.4, -1.0];
        let x0 = [0.1, 0.2];
        assert_eq!(ddim_step(&x, &x0, 3, 0, &s).unwrap(), x0.to_vec());
        let same = ddim_update(&x, &x0, 0.6, 0.6);
        for (a, b) in same.iter().zip(x) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(ddim_step(&x, &x0, 3, 3, &s).is_err());
        assert!(ddim_step(&x, &x0, 21, 3, &s).is_err());
    }

    #[test]
    fn beta_and_posterior_variance_are_probabilities() {
        let s = cosine_schedule(20).unwrap();
        for t in 1..=20 {
            assert!((0.0..=1.0).contains(&s.beta(t)));
            assert!(s.posterior_variance(t) <= s.beta(t) + 1e-15);
        }
    }
}
