//! Scenario geometry: Tx/Rx positions, the RIS element lattice, and
//! per-element propagation path lengths.

use num_complex::Complex;

use crate::error::{Result, RisError};
use crate::scalar::Scalar;

/// Speed of light in m/s, exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical scenario: a single-antenna Tx, a single-antenna Rx, and a planar
/// RIS of `rows × cols` unit cells centered at `ris_center`.
///
/// The lattice lies in the plane orthogonal to `ris_normal`; its local
/// column axis is the normalized projection of the global x-axis onto that
/// plane (global y-axis as fallback when the normal is parallel to x).
/// Elements flatten row-major with the row index outer, and the same flat
/// order is shared by sensing matrices, the angular transform, and phase
/// configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    pub tx_position: [T; 3],
    pub rx_position: [T; 3],
    pub ris_center: [T; 3],
    /// Unit normal of the RIS plane.
    pub ris_normal: [T; 3],
    /// Number of lattice rows (K).
    pub rows: usize,
    /// Number of lattice columns (L).
    pub cols: usize,
    /// Spacing between adjacent unit cells in meters.
    pub element_spacing: T,
    /// Carrier frequency in Hz.
    pub carrier_frequency: T,
    /// Optional per-element activity flags, flat order; `true` = active.
    pub mask: Option<Vec<bool>>,
}

impl<T: Scalar> Scene<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tx_position: [T; 3],
        rx_position: [T; 3],
        ris_center: [T; 3],
        ris_normal: [T; 3],
        rows: usize,
        cols: usize,
        element_spacing: T,
        carrier_frequency: T,
    ) -> Result<Self> {
        let scene = Scene {
            tx_position,
            rx_position,
            ris_center,
            ris_normal,
            rows,
            cols,
            element_spacing,
            carrier_frequency,
            mask: None,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Attaches an element mask (flat order, `rows·cols` entries).
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        self.mask = Some(mask);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(RisError::InvalidScene(format!(
                "lattice must be at least 1x1, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.element_spacing.is_finite() || self.element_spacing <= T::zero() {
            return Err(RisError::InvalidScene(format!(
                "element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        if !self.carrier_frequency.is_finite() || self.carrier_frequency <= T::zero() {
            return Err(RisError::InvalidScene(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_frequency
            )));
        }
        let n = norm(&self.ris_normal);
        if !n.is_finite() || (n - T::one()).abs() > T::real(1e-12) {
            return Err(RisError::InvalidScene(format!(
                "ris_normal must have unit norm, got |n| = {}",
                n
            )));
        }
        if let Some(mask) = &self.mask {
            if mask.len() != self.num_elements() {
                return Err(RisError::InvalidScene(format!(
                    "mask has {} entries, lattice has {}",
                    mask.len(),
                    self.num_elements()
                )));
            }
            if !mask.iter().any(|&a| a) {
                return Err(RisError::InvalidScene(
                    "mask disables every element".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of active elements (all of them when no mask is set).
    pub fn active_count(&self) -> usize {
        match &self.mask {
            Some(mask) => mask.iter().filter(|&&a| a).count(),
            None => self.num_elements(),
        }
    }

    /// Flat indices of the active elements, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        match &self.mask {
            Some(mask) => mask
                .iter()
                .enumerate()
                .filter_map(|(i, &a)| a.then_some(i))
                .collect(),
            None => (0..self.num_elements()).collect(),
        }
    }

    /// Carrier wavelength λ = c / f in meters.
    pub fn wavelength(&self) -> T {
        T::real(SPEED_OF_LIGHT) / self.carrier_frequency
    }

    /// Returns a copy with the receiver moved to `rx`.
    pub fn with_rx(&self, rx: [T; 3]) -> Self {
        let mut scene = self.clone();
        scene.rx_position = rx;
        scene
    }
}

/// One unit cell addressed by 1-based `(k, l)` lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementIndex {
    /// Row index in `1..=K`.
    pub k: usize,
    /// Column index in `1..=L`.
    pub l: usize,
}

impl ElementIndex {
    pub fn new(k: usize, l: usize, rows: usize, cols: usize) -> Result<Self> {
        if k == 0 || k > rows || l == 0 || l > cols {
            return Err(RisError::Domain(format!(
                "element ({k},{l}) outside 1..={rows} x 1..={cols}"
            )));
        }
        Ok(ElementIndex { k, l })
    }

    /// Zero-based row-major flat index `(k−1)·L + (l−1)`.
    pub fn flat(&self, cols: usize) -> usize {
        (self.k - 1) * cols + (self.l - 1)
    }

    pub fn from_flat(flat: usize, rows: usize, cols: usize) -> Result<Self> {
        if flat >= rows * cols {
            return Err(RisError::Domain(format!(
                "flat index {flat} outside 0..{}",
                rows * cols
            )));
        }
        Ok(ElementIndex {
            k: flat / cols + 1,
            l: flat % cols + 1,
        })
    }
}

/// Orthonormal in-plane axes `(u, v)` of the lattice: `u` is the column
/// direction, `v = n × u` the row direction.
pub fn lattice_axes<T: Scalar>(scene: &Scene<T>) -> Result<([T; 3], [T; 3])> {
    let n = scene.ris_normal;
    let nn = norm(&n);
    if nn <= T::zero() || !nn.is_finite() {
        return Err(RisError::InvalidScene("degenerate zero normal".into()));
    }
    let x_axis = [T::one(), T::zero(), T::zero()];
    let y_axis = [T::zero(), T::one(), T::zero()];
    let mut u = reject(&x_axis, &n);
    if norm(&u) < T::real(1e-9) {
        // Normal is (anti)parallel to global x; project global y instead.
        u = reject(&y_axis, &n);
    }
    let u = normalize(&u);
    let v = cross(&n, &u);
    Ok((u, v))
}

/// Positions of all unit cells in flat order.
///
/// The lattice is centered: its centroid coincides with `ris_center`.
pub fn element_positions<T: Scalar>(scene: &Scene<T>) -> Result<Vec<[T; 3]>> {
    scene.validate()?;
    let (u, v) = lattice_axes(scene)?;
    let s = scene.element_spacing;
    let two = T::real(2.0);
    let col_mid = T::from_usize(scene.cols - 1).unwrap() / two;
    let row_mid = T::from_usize(scene.rows - 1).unwrap() / two;
    let mut positions = Vec::with_capacity(scene.num_elements());
    for k in 0..scene.rows {
        let dv = (T::from_usize(k).unwrap() - row_mid) * s;
        for l in 0..scene.cols {
            let du = (T::from_usize(l).unwrap() - col_mid) * s;
            positions.push([
                scene.ris_center[0] + du * u[0] + dv * v[0],
                scene.ris_center[1] + du * u[1] + dv * v[1],
                scene.ris_center[2] + du * u[2] + dv * v[2],
            ]);
        }
    }
    Ok(positions)
}

/// Per-element `(d_tx, d_rx)` Euclidean path lengths in flat order.
pub fn path_lengths<T: Scalar>(scene: &Scene<T>) -> Result<Vec<(T, T)>> {
    let positions = element_positions(scene)?;
    positions
        .iter()
        .enumerate()
        .map(|(flat, p)| {
            let d_tx = distance(p, &scene.tx_position);
            let d_rx = distance(p, &scene.rx_position);
            if d_tx <= T::zero() {
                return Err(RisError::SingularGeometry(format!(
                    "tx coincides with element {flat}"
                )));
            }
            if d_rx <= T::zero() {
                return Err(RisError::SingularGeometry(format!(
                    "rx coincides with element {flat}"
                )));
            }
            Ok((d_tx, d_rx))
        })
        .collect()
}

// ---- small 3-vector helpers ------------------------------------------------

pub(crate) fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm<T: Scalar>(a: &[T; 3]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn distance<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm(&d)
}

fn normalize<T: Scalar>(a: &[T; 3]) -> [T; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Component of `a` orthogonal to `n` (assumes `n` is unit).
fn reject<T: Scalar>(a: &[T; 3], n: &[T; 3]) -> [T; 3] {
    let p = dot(a, n);
    [a[0] - p * n[0], a[1] - p * n[1], a[2] - p * n[2]]
}

fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Phase wrapped into `[0, 2π)`.
pub(crate) fn wrap_two_pi<T: Scalar>(phi: T) -> T {
    let two_pi = T::real(2.0) * T::PI();
    let mut p = phi % two_pi;
    if p < T::zero() {
        p += two_pi;
    }
    // `-1e-17 % two_pi` rounds back to two_pi; fold the endpoint.
    if p >= two_pi {
        p -= two_pi;
    }
    p
}

#[allow(dead_code)]
pub(crate) fn complex_is_finite<T: Scalar>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_scene(center: [f64; 3], normal: [f64; 3], rows: usize, cols: usize) -> Scene<f64> {
        Scene::new(
            [0.0, 0.0, 10.0],
            [0.0, 0.0, 20.0],
            center,
            normal,
            rows,
            cols,
            0.03,
            5.2e9,
        )
        .unwrap()
    }

    #[test]
    fn single_element_sits_at_center() {
        let c = [1.5, -2.0, 7.25];
        let scene = unit_scene(c, [0.0, 0.0, 1.0], 1, 1);
        let pos = element_positions(&scene).unwrap();
        assert_eq!(pos.len(), 1);
        for axis in 0..3 {
            assert_relative_eq!(pos[0][axis], c[axis], epsilon = 1e-12);
        }
    }

    #[test]
    fn one_by_two_lattice_is_symmetric_along_x() {
        let s = 0.03;
        let scene = unit_scene([0.0; 3], [0.0, 0.0, 1.0], 1, 2);
        let pos = element_positions(&scene).unwrap();
        assert_relative_eq!(pos[0][0], -s / 2.0, epsilon = 1e-12);
        assert_relative_eq!(pos[1][0], s / 2.0, epsilon = 1e-12);
        for p in &pos {
            assert_relative_eq!(p[1], 0.0, epsilon = 1e-12);
            assert_relative_eq!(p[2], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn aperture_edge_for_32x32_at_half_wavelength() {
        let freq = 5.2e9;
        let lambda = SPEED_OF_LIGHT / freq;
        let scene = Scene::new(
            [23.79, 16.54, 28.0],
            [-23.0, 156.0, 2.0],
            [0.0; 3],
            [0.0, 1.0, 0.0],
            32,
            32,
            0.5 * lambda,
            freq,
        )
        .unwrap();
        let pos = element_positions(&scene).unwrap();
        // Edge length oracle: 31 gaps of 0.5 λ.
        let expected = 31.0 * 0.5 * lambda;
        assert_relative_eq!(expected, 0.8936, epsilon = 5e-4);
        let first_row_start = pos[0];
        let first_row_end = pos[31];
        assert_relative_eq!(
            distance(&first_row_start, &first_row_end),
            expected,
            epsilon = 1e-9
        );
    }

    #[test]
    fn centroid_matches_ris_center() {
        for (rows, cols) in [(1, 1), (2, 3), (5, 4), (8, 10)] {
            let c = [0.4, -1.1, 3.0];
            let scene = unit_scene(c, [0.0, 1.0, 0.0], rows, cols);
            let pos = element_positions(&scene).unwrap();
            let n = pos.len() as f64;
            for axis in 0..3 {
                let centroid: f64 = pos.iter().map(|p| p[axis]).sum::<f64>() / n;
                assert_relative_eq!(centroid, c[axis], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn path_lengths_match_hand_values() {
        let mut scene = unit_scene([0.0; 3], [0.0, 0.0, 1.0], 1, 1);
        scene.tx_position = [0.0, 0.0, 1.0];
        scene.rx_position = [0.0, 0.0, 2.0];
        let d = path_lengths(&scene).unwrap();
        assert_relative_eq!(d[0].0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d[0].1, 2.0, epsilon = 1e-12);

        scene.tx_position = [3.0, 4.0, 0.0];
        let d = path_lengths(&scene).unwrap();
        assert_relative_eq!(d[0].0, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn default_tx_distance_from_origin() {
        // Oracle: direct arithmetic on the Tx coordinates.
        let expected = (23.79f64.powi(2) + 16.54f64.powi(2) + 28.0f64.powi(2)).sqrt();
        assert_relative_eq!(expected, 40.2931, epsilon = 5e-4);
        let mut scene = unit_scene([0.0; 3], [0.0, 1.0, 0.0], 1, 1);
        scene.tx_position = [23.79, 16.54, 28.0];
        let d = path_lengths(&scene).unwrap();
        assert_relative_eq!(d[0].0, expected, epsilon = 1e-12);
    }

    #[test]
    fn coincident_point_is_singular() {
        let mut scene = unit_scene([0.0; 3], [0.0, 0.0, 1.0], 1, 1);
        scene.tx_position = [0.0, 0.0, 0.0];
        assert!(matches!(
            path_lengths(&scene),
            Err(RisError::SingularGeometry(_))
        ));
    }

    #[test]
    fn zero_normal_rejected() {
        let r = Scene::new(
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 2.0],
            [0.0; 3],
            [0.0, 0.0, 0.0],
            1,
            1,
            0.03,
            5.2e9,
        );
        assert!(matches!(r, Err(RisError::InvalidScene(_))));
    }

    #[test]
    fn non_unit_normal_rejected() {
        let r = Scene::new(
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 2.0],
            [0.0; 3],
            [0.0, 0.0, 2.0],
            1,
            1,
            0.03,
            5.2e9,
        );
        assert!(matches!(r, Err(RisError::InvalidScene(_))));
    }

    #[test]
    fn normal_parallel_to_x_uses_y_fallback() {
        let scene = unit_scene([0.0; 3], [1.0, 0.0, 0.0], 2, 2);
        let (u, v) = lattice_axes(&scene).unwrap();
        assert_relative_eq!(u[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(norm(&v), 1.0, epsilon = 1e-12);
        assert_relative_eq!(dot(&u, &v), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_index_round_trip() {
        let (rows, cols) = (7, 5);
        for k in 1..=rows {
            for l in 1..=cols {
                let idx = ElementIndex::new(k, l, rows, cols).unwrap();
                let back = ElementIndex::from_flat(idx.flat(cols), rows, cols).unwrap();
                assert_eq!(back, idx);
            }
        }
        assert!(ElementIndex::from_flat(rows * cols, rows, cols).is_err());
        assert!(ElementIndex::new(0, 1, rows, cols).is_err());
    }

    #[test]
    fn translation_leaves_path_lengths_unchanged() {
        let shift = [12.0, -7.5, 3.25];
        let base = Scene::new(
            [3.0, 1.0, 9.0],
            [-4.0, 8.0, 2.0],
            [0.5, 0.5, 0.5],
            [0.0, 1.0, 0.0],
            3,
            4,
            0.05,
            5.2e9,
        )
        .unwrap();
        let mut moved = base.clone();
        for (axis, s) in shift.iter().enumerate() {
            moved.tx_position[axis] += s;
            moved.rx_position[axis] += s;
            moved.ris_center[axis] += s;
        }
        let a = path_lengths(&base).unwrap();
        let b = path_lengths(&moved).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_relative_eq!(pa.0, pb.0, epsilon = 1e-9);
            assert_relative_eq!(pa.1, pb.1, epsilon = 1e-9);
        }
    }

    #[test]
    fn mask_must_cover_lattice_and_keep_one_active() {
        let scene = unit_scene([0.0; 3], [0.0, 0.0, 1.0], 2, 2);
        assert!(scene.clone().with_mask(vec![true; 3]).is_err());
        assert!(scene.clone().with_mask(vec![false; 4]).is_err());
        let masked = scene.with_mask(vec![true, false, true, true]).unwrap();
        assert_eq!(masked.active_count(), 3);
        assert_eq!(masked.active_indices(), vec![0, 2, 3]);
    }
}
