//! Sampled joint spectral amplitudes on uniform frequency grids.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::GridError;

/// Relative tolerance for axis uniformity.
const AXIS_UNIFORMITY_TOL: f64 = 1e-9;

/// A complex two-photon amplitude sampled on a uniform (ω_s, ω_i) grid.
///
/// `amplitude[[i, j]]` is the value at `omega_s_axis[i]`, `omega_i_axis[j]`.
/// All integrals over the grid use trapezoidal quadrature.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    omega_s: Vec<f64>,
    omega_i: Vec<f64>,
    amplitude: Array2<C64>,
}

impl SpectralGrid {
    /// Validate axes and amplitude and assemble a grid. The amplitude is
    /// taken as-is; callers that want a unit-norm state normalize afterwards.
    pub fn new(omega_s: Vec<f64>, omega_i: Vec<f64>, amplitude: Array2<C64>) -> Result<Self, GridError> {
        check_axis(&omega_s)?;
        check_axis(&omega_i)?;
        let (rows, cols) = amplitude.dim();
        if rows != omega_s.len() || cols != omega_i.len() {
            return Err(GridError::DimensionMismatch {
                rows,
                cols,
                ns: omega_s.len(),
                ni: omega_i.len(),
            });
        }
        if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GridError::NonFiniteAmplitude);
        }
        let grid = SpectralGrid { omega_s, omega_i, amplitude };
        if !(grid.norm_l2() > 0.0) {
            return Err(GridError::ZeroNorm);
        }
        Ok(grid)
    }

    pub fn omega_s_axis(&self) -> &[f64] {
        &self.omega_s
    }

    pub fn omega_i_axis(&self) -> &[f64] {
        &self.omega_i
    }

    pub fn amplitude(&self) -> &Array2<C64> {
        &self.amplitude
    }

    /// Signal-axis sample spacing in rad/ps.
    pub fn step_s(&self) -> f64 {
        self.omega_s[1] - self.omega_s[0]
    }

    /// Idler-axis sample spacing in rad/ps.
    pub fn step_i(&self) -> f64 {
        self.omega_i[1] - self.omega_i[0]
    }

    /// Both axes identical (required by the exchange integral and the mode
    /// decomposition).
    pub fn is_square(&self) -> bool {
        self.omega_s.len() == self.omega_i.len()
            && self
                .omega_s
                .iter()
                .zip(&self.omega_i)
                .all(|(a, b)| (a - b).abs() <= AXIS_UNIFORMITY_TOL * a.abs().max(1.0))
    }

    /// Trapezoidal quadrature weights for one axis.
    pub fn weights(axis: &[f64]) -> Vec<f64> {
        let h = axis[1] - axis[0];
        let n = axis.len();
        let mut w = vec![h; n];
        w[0] = h / 2.0;
        w[n - 1] = h / 2.0;
        w
    }

    /// L² norm ‖F‖ under trapezoidal quadrature.
    pub fn norm_l2(&self) -> f64 {
        let ws = Self::weights(&self.omega_s);
        let wi = Self::weights(&self.omega_i);
        let mut acc = 0.0;
        for (i, row) in self.amplitude.rows().into_iter().enumerate() {
            let mut row_acc = 0.0;
            for (j, z) in row.iter().enumerate() {
                row_acc += wi[j] * z.norm_sqr();
            }
            acc += ws[i] * row_acc;
        }
        acc.sqrt()
    }

    /// Scale the amplitude to unit L² norm.
    pub fn normalize(&mut self) -> Result<(), GridError> {
        let n = self.norm_l2();
        if !(n.is_finite() && n > 0.0) {
            return Err(GridError::ZeroNorm);
        }
        self.amplitude.mapv_inplace(|z| z / n);
        Ok(())
    }

    /// Largest |F| over the outermost ring of samples divided by the peak |F|.
    pub fn boundary_to_peak_ratio(&self) -> f64 {
        let (n, m) = self.amplitude.dim();
        let mut peak = 0.0f64;
        for z in self.amplitude.iter() {
            peak = peak.max(z.norm());
        }
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for j in 0..m {
            edge = edge.max(self.amplitude[[0, j]].norm());
            edge = edge.max(self.amplitude[[n - 1, j]].norm());
        }
        for i in 0..n {
            edge = edge.max(self.amplitude[[i, 0]].norm());
            edge = edge.max(self.amplitude[[i, m - 1]].norm());
        }
        edge / peak
    }

    /// New grid with signal and idler roles exchanged.
    pub fn transposed(&self) -> SpectralGrid {
        SpectralGrid {
            omega_s: self.omega_i.clone(),
            omega_i: self.omega_s.clone(),
            amplitude: self.amplitude.t().to_owned(),
        }
    }
}

fn check_axis(axis: &[f64]) -> Result<(), GridError> {
    if axis.len() < 2 {
        return Err(GridError::AxisTooShort);
    }
    let h = axis[1] - axis[0];
    if !(h.is_finite() && h > 0.0) {
        return Err(GridError::NonUniformAxis(f64::INFINITY));
    }
    let mut worst = 0.0f64;
    for k in 1..axis.len() {
        let dev = ((axis[k] - axis[k - 1]) - h).abs() / h;
        worst = worst.max(dev);
    }
    // Uniform linspace construction keeps this at rounding level; 1e-9
    // relative guards against hand-assembled axes.
    if worst > AXIS_UNIFORMITY_TOL * (axis.len() as f64) {
        return Err(GridError::NonUniformAxis(worst));
    }
    Ok(())
}

/// `n` uniformly spaced samples covering [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n as f64 - 1.0);
    (0..n).map(|k| lo + h * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_grid(n: usize) -> SpectralGrid {
        let axis = linspace(-8.0, 8.0, n);
        let mut amp = Array2::zeros((n, n));
        for (i, &ws) in axis.iter().enumerate() {
            for (j, &wi) in axis.iter().enumerate() {
                amp[[i, j]] = C64::new((-0.5 * (ws * ws + wi * wi)).exp(), 0.0);
            }
        }
        SpectralGrid::new(axis.clone(), axis, amp).unwrap()
    }

    #[test]
    fn norm_matches_analytic_gaussian() {
        // ∬ e^{-(x²+y²)} dx dy = π over the full plane.
        let g = gaussian_grid(201);
        approx::assert_relative_eq!(g.norm_l2(), std::f64::consts::PI.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn normalize_gives_unit_norm() {
        let mut g = gaussian_grid(101);
        g.normalize().unwrap();
        approx::assert_relative_eq!(g.norm_l2(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let axis = linspace(-1.0, 1.0, 8);
        let amp = Array2::<C64>::zeros((8, 7));
        assert!(matches!(
            SpectralGrid::new(axis.clone(), axis, amp),
            Err(GridError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_uniform_axis() {
        let mut axis = linspace(-1.0, 1.0, 16);
        axis[7] += 0.01;
        let amp = Array2::<C64>::from_elem((16, 16), C64::new(1.0, 0.0));
        assert!(matches!(
            SpectralGrid::new(axis.clone(), linspace(-1.0, 1.0, 16), amp),
            Err(GridError::NonUniformAxis(_))
        ));
    }

    #[test]
    fn rejects_non_finite_amplitude() {
        let axis = linspace(-1.0, 1.0, 4);
        let mut amp = Array2::<C64>::from_elem((4, 4), C64::new(1.0, 0.0));
        amp[[2, 2]] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            SpectralGrid::new(axis.clone(), axis, amp),
            Err(GridError::NonFiniteAmplitude)
        ));
    }

    #[test]
    fn transpose_swaps_roles() {
        let axis = linspace(-1.0, 1.0, 4);
        let mut amp = Array2::<C64>::from_elem((4, 4), C64::new(1.0, 0.0));
        amp[[0, 3]] = C64::new(2.0, 1.0);
        let g = SpectralGrid::new(axis.clone(), axis, amp).unwrap();
        let t = g.transposed();
        assert_eq!(t.amplitude()[[3, 0]], C64::new(2.0, 1.0));
    }
}
