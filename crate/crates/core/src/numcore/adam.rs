//! Adam with bias correction over a flat parameter vector.

use super::mlp::NumError;

/// Optimizer state. Moment accumulators are aligned index-for-index with
/// the parameter vector they were created for.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    /// Standard defaults: lr 1e-3, beta1 0.9, beta2 0.999, epsilon 1e-8.
    pub fn new(param_count: usize, lr: f64) -> AdamState {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update in place. Gradients are screened first: a non-finite
    /// entry aborts before any parameter changes, so the model is left
    /// untouched for diagnostics.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NumError> {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient count mismatch");
        for (index, &g) in grads.iter().enumerate() {
            if !g.is_finite() {
                return Err(NumError::NonFiniteGradient { index, value: g });
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut adam = AdamState::new(4, 1e-3);
        let mut params = vec![1.0, -2.0, 3.0, 0.5];
        let before = params.clone();
        for _ in 0..5 {
            adam.step(&mut params, &[0.0; 4]).unwrap();
        }
        assert_eq!(params, before);
    }

    #[test]
    fn constant_gradient_step_magnitude_approaches_lr() {
        // With a constant gradient, mhat/sqrt(vhat) tends to sign(g), so
        // the per-step movement tends to lr.
        let mut adam = AdamState::new(1, 1e-3);
        let mut params = vec![0.0];
        let mut prev = params[0];
        let mut last_step = 0.0;
        for _ in 0..5000 {
            adam.step(&mut params, &[2.5]).unwrap();
            last_step = prev - params[0];
            prev = params[0];
        }
        assert!((last_step - 1e-3).abs() < 1e-6, "step {last_step}");
    }

    #[test]
    fn quadratic_objective_decreases_monotonically_after_warmup() {
        // f(p) = Σ (p - target)², gradient 2(p - target).
        let target = [1.0, -3.0, 0.25, 8.0, -0.5];
        let mut params = vec![0.0; 5];
        let mut adam = AdamState::new(5, 0.05);
        let f = |p: &[f64]| -> f64 {
            p.iter().zip(&target).map(|(x, t)| (x - t) * (x - t)).sum()
        };
        let start = f(&params);
        let mut prev = f64::INFINITY;
        for step in 0..200 {
            let grads: Vec<f64> = params.iter().zip(&target).map(|(x, t)| 2.0 * (x - t)).collect();
            adam.step(&mut params, &grads).unwrap();
            let now = f(&params);
            if step >= 10 {
                assert!(now < prev, "step {step}: {now} vs {prev}");
            }
            prev = now;
        }
        assert!(prev < start * 0.5, "insufficient progress: {prev} from {start}");
    }

    #[test]
    fn non_finite_gradients_abort_without_mutation() {
        let mut adam = AdamState::new(3, 1e-3);
        let mut params = vec![1.0, 2.0, 3.0];
        adam.step(&mut params, &[0.1, 0.1, 0.1]).unwrap();
        let before = params.clone();
        let t_before = adam.step_count();
        let err = adam.step(&mut params, &[0.1, f64::NAN, 0.1]).unwrap_err();
        assert_eq!(
            err.to_string(),
            format!("non-finite gradient ({}) at parameter index 1", f64::NAN)
        );
        assert_eq!(params, before);
        assert_eq!(adam.step_count(), t_before);

        let err = adam.step(&mut params, &[f64::INFINITY, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, NumError::NonFiniteGradient { index: 0, .. }));
    }
}
