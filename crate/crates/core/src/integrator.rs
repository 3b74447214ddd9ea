//! Classical fixed-step fourth-order Runge–Kutta.
//!
//! States only need to support `y += k·dy`; the stepper keeps its stage
//! buffers between calls so a long run allocates once.

use alloc::vec::Vec;

/// A state that can be combined linearly with a derivative of the same shape.
pub trait OdeState: Clone {
    fn scaled_add(&mut self, k: f64, other: &Self);
}

impl OdeState for f64 {
    fn scaled_add(&mut self, k: f64, other: &Self) {
        *self += k * other;
    }
}

impl OdeState for Vec<f64> {
    fn scaled_add(&mut self, k: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += k * b;
        }
    }
}

impl<const N: usize> OdeState for [f64; N] {
    fn scaled_add(&mut self, k: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += k * b;
        }
    }
}

pub trait OdeSystem<S: OdeState> {
    type Error;

    /// Writes `dy/dt` at `(t, y)` into `out`, overwriting every component.
    fn derivative(&mut self, t: f64, y: &S, out: &mut S) -> Result<(), Self::Error>;
}

impl<S: OdeState, F, E> OdeSystem<S> for F
where
    F: FnMut(f64, &S, &mut S) -> Result<(), E>,
{
    type Error = E;

    fn derivative(&mut self, t: f64, y: &S, out: &mut S) -> Result<(), E> {
        self(t, y, out)
    }
}

#[derive(Debug, Clone)]
pub struct Rk4<S> {
    k1: S,
    k2: S,
    k3: S,
    k4: S,
    stage: S,
}

impl<S: OdeState> Rk4<S> {
    /// `template` fixes the shape of the stage buffers.
    pub fn new(template: &S) -> Self {
        Self {
            k1: template.clone(),
            k2: template.clone(),
            k3: template.clone(),
            k4: template.clone(),
            stage: template.clone(),
        }
    }

    /// Advances `y` from `t` to `t + dt` in place.
    pub fn step<F: OdeSystem<S>>(&mut self, system: &mut F, t: f64, y: &mut S, dt: f64) -> Result<(), F::Error> {
        let half = 0.5 * dt;
        system.derivative(t, y, &mut self.k1)?;

        self.stage.clone_from(y);
        self.stage.scaled_add(half, &self.k1);
        system.derivative(t + half, &self.stage, &mut self.k2)?;

        self.stage.clone_from(y);
        self.stage.scaled_add(half, &self.k2);
        system.derivative(t + half, &self.stage, &mut self.k3)?;

        self.stage.clone_from(y);
        self.stage.scaled_add(dt, &self.k3);
        system.derivative(t + dt, &self.stage, &mut self.k4)?;

        let sixth = dt / 6.0;
        y.scaled_add(sixth, &self.k1);
        y.scaled_add(2.0 * sixth, &self.k2);
        y.scaled_add(2.0 * sixth, &self.k3);
        y.scaled_add(sixth, &self.k4);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;

    fn decay(_t: f64, y: &f64, out: &mut f64) -> Result<(), Infallible> {
        *out = -*y;
        Ok(())
    }

    fn integrate(dt: f64, steps: usize) -> f64 {
        let mut y = 1.0;
        let mut rk = Rk4::new(&y);
        let mut sys = decay;
        for i in 0..steps {
            rk.step(&mut sys, i as f64 * dt, &mut y, dt).unwrap();
        }
        y
    }

    #[test]
    fn exponential_decay() {
        let y = integrate(1e-3, 1000);
        assert!((y - libm::exp(-1.0)).abs() < 1e-10);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = libm::exp(-1.0);
        let e1 = (integrate(0.1, 10) - exact).abs();
        let e2 = (integrate(0.05, 20) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn zero_derivative_keeps_state() {
        let mut y = [1.5, -2.0, 3.25];
        let mut rk = Rk4::new(&y);
        let mut sys = |_t: f64, _y: &[f64; 3], out: &mut [f64; 3]| -> Result<(), Infallible> {
            *out = [0.0; 3];
            Ok(())
        };
        rk.step(&mut sys, 0.0, &mut y, 0.1).unwrap();
        assert_eq!(y, [1.5, -2.0, 3.25]);
    }

    #[test]
    fn time_dependent_quadrature() {
        // y' = 3t², exact cubic integrated exactly by Simpson weights
        let mut y = 0.0;
        let mut rk = Rk4::new(&y);
        let mut sys = |t: f64, _y: &f64, out: &mut f64| -> Result<(), Infallible> {
            *out = 3.0 * t * t;
            Ok(())
        };
        for i in 0..10 {
            rk.step(&mut sys, i as f64 * 0.2, &mut y, 0.2).unwrap();
        }
        assert!((y - 8.0).abs() < 1e-12);
    }
}
