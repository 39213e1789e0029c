/// Dense row-major 2D array indexed `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Array2 {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Array2 {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Array2 {
            nx,
            ny,
            data: vec![0.0; nx * ny],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.nx && j < self.ny);
        self.data[i * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nx && j < self.ny);
        self.data[i * self.ny + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Uniform polar grid on `[delta, delta + extent] x [theta0, theta0 + angle]`.
///
/// Cell `(i, j)` spans angle index `i` and radius index `j`. Angular
/// velocity lives on angular faces `i = 0..=n_s` at cell-center radii;
/// radial velocity on radial faces `j = 0..=n_r` at cell-center angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub n_s: usize,
    pub n_r: usize,
    pub delta: f64,
    pub extent: f64,
    pub theta0: f64,
    pub angle: f64,
}

impl PolarGrid {
    #[inline]
    pub fn dtheta(&self) -> f64 {
        self.angle / self.n_s as f64
    }

    #[inline]
    pub fn drho(&self) -> f64 {
        self.extent / self.n_r as f64
    }

    /// Radius of cell center `j`.
    #[inline]
    pub fn rho_c(&self, j: usize) -> f64 {
        self.delta + (j as f64 + 0.5) * self.drho()
    }

    /// Radius of radial face `j`.
    #[inline]
    pub fn rho_f(&self, j: usize) -> f64 {
        self.delta + j as f64 * self.drho()
    }

    /// Angle of cell center `i`.
    pub fn theta_c(&self, i: usize) -> f64 {
        self.theta0 + (i as f64 + 0.5) * self.dtheta()
    }

    /// Angle of angular face `i`.
    pub fn theta_f(&self, i: usize) -> f64 {
        self.theta0 + i as f64 * self.dtheta()
    }

    pub fn cells(&self) -> usize {
        self.n_s * self.n_r
    }

    /// Smallest cell width, `min(drho, delta dtheta)`.
    pub fn min_spacing(&self) -> f64 {
        self.drho().min(self.delta * self.dtheta())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let g = PolarGrid {
            n_s: 4,
            n_r: 2,
            delta: 1.0,
            extent: 1.0,
            theta0: -0.5,
            angle: 1.0,
        };
        assert_eq!(g.rho_c(0), 1.25);
        assert_eq!(g.rho_f(2), 2.0);
        assert_eq!(g.theta_f(2), 0.0);
        assert_eq!(g.min_spacing(), 0.25);
        let mut a = Array2::zeros(2, 3);
        a.set(1, 2, -4.0);
        assert_eq!(a.get(1, 2), -4.0);
        assert_eq!(a.max_abs(), 4.0);
        assert_eq!(a.shape(), (2, 3));
    }
}
