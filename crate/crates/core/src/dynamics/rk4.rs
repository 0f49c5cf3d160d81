/// Classical fourth-order Runge-Kutta with reusable stage buffers.
///
/// The right-hand side receives the stage's fractional position within the
/// step (0, 1/2, 1/2, 1) so piecewise-linear forcing can be interpolated.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    probe: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            probe: vec![0.0; dim],
        }
    }

    pub fn step<F>(&mut self, x: &mut [f64], dt: f64, mut rhs: F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        rhs(0.0, x, &mut self.k1);
        for i in 0..x.len() {
            self.probe[i] = x[i] + 0.5 * dt * self.k1[i];
        }
        rhs(0.5, &self.probe, &mut self.k2);
        for i in 0..x.len() {
            self.probe[i] = x[i] + 0.5 * dt * self.k2[i];
        }
        rhs(0.5, &self.probe, &mut self.k3);
        for i in 0..x.len() {
            self.probe[i] = x[i] + dt * self.k3[i];
        }
        rhs(1.0, &self.probe, &mut self.k4);
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        let error = |dt: f64| {
            let mut x = [1.0, 0.0];
            let mut rk = Rk4::new(2);
            let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
            let dt = 2.0 * std::f64::consts::PI / steps as f64;
            for _ in 0..steps {
                rk.step(&mut x, dt, |_, y, out| {
                    out[0] = y[1];
                    out[1] = -y[0];
                });
            }
            ((x[0] - 1.0).powi(2) + x[1].powi(2)).sqrt()
        };
        let ratio = error(0.1) / error(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn linear_forcing_integrated_exactly() {
        // dx/dt = a + b*s over one step reproduces the trapezoid integral.
        let mut x = [0.0];
        Rk4::new(1).step(&mut x, 0.5, |s, _, out| out[0] = 2.0 + 4.0 * s);
        assert!((x[0] - 0.5 * (2.0 + 6.0) / 2.0).abs() < 1e-15);
    }
}
