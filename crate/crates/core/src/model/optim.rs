//! Adaptive-moment updates with optional coupled L2 weight decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    steps: i32,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }
}

impl Adam {
    /// One update. `weight_decay * param` is added to the gradient first.
    pub fn step(
        &self,
        state: &mut AdamState,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
        weight_decay: f64,
    ) {
        assert_eq!(
            params.len(),
            grads.len(),
            "parameter and gradient lengths differ"
        );
        assert_eq!(
            params.len(),
            state.m.len(),
            "optimizer state has the wrong length"
        );
        state.steps += 1;
        let c1 = 1.0 - self.beta1.powi(state.steps);
        let c2 = 1.0 - self.beta2.powi(state.steps);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut state.m)
            .zip(&mut state.v)
        {
            let g = g + weight_decay * *p;
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let adam = Adam::default();
        let mut state = AdamState::new(2);
        let mut p = [1.0, -1.0];
        adam.step(&mut state, &mut p, &[3.0, -0.5], 0.01, 0.0);
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] + 0.99).abs() < 1e-9);
        assert_eq!(state.steps(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let adam = Adam::default();
        let mut state = AdamState::new(1);
        let mut p = [5.0];
        for _ in 0..3000 {
            let g = [2.0 * (p[0] - 1.5)];
            adam.step(&mut state, &mut p, &g, 0.05, 0.0);
        }
        assert!((p[0] - 1.5).abs() < 1e-3);
    }

    #[test]
    fn weight_decay_pulls_toward_zero() {
        let adam = Adam::default();
        let mut state = AdamState::new(1);
        let mut p = [2.0];
        adam.step(&mut state, &mut p, &[0.0], 0.1, 0.5);
        assert!(p[0] < 2.0);
    }
}
