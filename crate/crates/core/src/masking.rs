//! Regularization masks: zero the penalty on PA rows whose stencil touches
//! a detected edge.

use crate::edge_detection::BinaryEdgeMap;
use crate::error::{invalid, Result};
use crate::pa_transform::{Axis, PATransform, Sparsifier};

/// One binary mask per sparsifier of [`Sparsifier::for_grid`]:
/// a single mask in 1D, `[M^x, M^y]` in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationMask {
    pub dims: usize,
    pub m: usize,
    pub tau: f64,
    pub masks: Vec<Vec<f64>>,
}

impl RegularizationMask {
    /// Mask of ones (no edges).
    pub fn ones(dims: usize, m: usize, n: usize) -> Result<Self> {
        let masks = Sparsifier::for_grid(m, n, dims)?.iter().map(|s| vec![1.0; s.output_len()]).collect();
        Ok(Self { dims, m, tau: 0.0, masks })
    }

    pub fn zeros_count(&self) -> usize {
        self.masks.iter().flatten().filter(|&&v| v == 0.0).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.masks.iter().flatten().all(|&v| v == 0.0)
    }

    /// `M^x + M^y` for 2D masks of order 0, the masked-identity variant.
    pub fn summed(&self) -> Result<Vec<f64>> {
        if self.dims != 2 || self.m != 0 {
            return invalid("summed masks need a 2D mask with m = 0");
        }
        Ok(self.masks[0].iter().zip(&self.masks[1]).map(|(a, b)| a + b).collect())
    }
}

fn zero_where_above(response: &[f64], tau: f64) -> Vec<f64> {
    response.iter().map(|r| if r.abs() > tau { 0.0 } else { 1.0 }).collect()
}

/// Applies the magnitude stencil `|L^m|`, so each flagged point reaches
/// all `m+1` rows whose stencil covers it regardless of neighbors.
fn dilation(b: &BinaryEdgeMap, pa: &PATransform, axis: Option<Axis>) -> Vec<f64> {
    let abs = pa.magnitude();
    let v = b.as_f64();
    let s = match axis {
        None => Sparsifier::Pa1d(abs),
        Some(a) => Sparsifier::Pa2d(abs, a),
    };
    s.apply_vec(&v)
}

pub fn build_mask_1d(b: &BinaryEdgeMap, m: usize, tau: f64) -> Result<RegularizationMask> {
    if b.grid.dims() != 1 {
        return invalid("build_mask_1d needs a 1D edge map");
    }
    if !(tau >= 0.0) {
        return invalid(format!("mask threshold must be non-negative, got {tau}"));
    }
    let pa = PATransform::build(m, b.indicator.len())?;
    let mask = zero_where_above(&dilation(b, &pa, None), tau);
    Ok(RegularizationMask { dims: 1, m, tau, masks: vec![mask] })
}

/// `M^x` from the x-direction map along rows, `M^y` from the y-direction map.
pub fn build_mask_2d(bx: &BinaryEdgeMap, by: &BinaryEdgeMap, m: usize, tau: f64) -> Result<RegularizationMask> {
    if bx.grid.dims() != 2 || bx.grid != by.grid || bx.indicator.len() != by.indicator.len() {
        return invalid("build_mask_2d needs two 2D edge maps of the same shape");
    }
    if !(tau >= 0.0) {
        return invalid(format!("mask threshold must be non-negative, got {tau}"));
    }
    let pa = PATransform::build(m, bx.grid.n())?;
    let mx = zero_where_above(&dilation(bx, &pa, Some(Axis::Rows)), tau);
    let my = zero_where_above(&dilation(by, &pa, Some(Axis::Cols)), tau);
    Ok(RegularizationMask { dims: 2, m, tau, masks: vec![mx, my] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    fn spike_1d(n: usize, at: &[usize]) -> BinaryEdgeMap {
        let grid = SpatialGrid::with_points(1, n).unwrap();
        let mut indicator = vec![0; n];
        for &i in at {
            indicator[i] = 1;
        }
        BinaryEdgeMap { grid, indicator, tau: 0.5 }
    }

    #[test]
    fn single_spike_zeroes_m_plus_one_rows() {
        let b = spike_1d(33, &[16]);
        for m in 1..=4 {
            let mask = build_mask_1d(&b, m, 0.0).unwrap();
            assert_eq!(mask.zeros_count(), m + 1, "m = {m}");
            // the zeroed rows are exactly those whose stencil covers point 16
            for (r, v) in mask.masks[0].iter().enumerate() {
                let covers = r <= 16 && 16 <= r + m;
                assert_eq!(*v == 0.0, covers, "m = {m}, row {r}");
            }
        }
    }

    #[test]
    fn adjacent_spikes_are_both_dilated() {
        let mask = build_mask_1d(&spike_1d(33, &[10, 11]), 1, 0.0).unwrap();
        assert_eq!(mask.zeros_count(), 3);
    }

    #[test]
    fn zero_count_grows_with_order() {
        let b = spike_1d(65, &[5, 20, 21, 40, 60]);
        let counts: Vec<usize> = (1..=4).map(|m| build_mask_1d(&b, m, 0.0).unwrap().zeros_count()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }

    #[test]
    fn no_edges_gives_all_ones() {
        let mask = build_mask_1d(&spike_1d(17, &[]), 2, 0.0).unwrap();
        assert_eq!(mask, RegularizationMask { tau: 0.0, ..RegularizationMask::ones(1, 2, 17).unwrap() });
    }

    #[test]
    fn vertical_band_masks_only_the_x_direction() {
        // edges along the line i = 8 (constant x) in a 17 x 17 image
        let grid = SpatialGrid::with_points(2, 17).unwrap();
        let n = 17;
        let mut bx = vec![0u8; n * n];
        for j in 0..n {
            bx[8 * n + j] = 1;
        }
        let bx = BinaryEdgeMap { grid, indicator: bx, tau: 0.5 };
        let by = BinaryEdgeMap { grid, indicator: vec![0; n * n], tau: 0.5 };
        let mask = build_mask_2d(&bx, &by, 1, 0.0).unwrap();
        assert!(mask.masks[1].iter().all(|&v| v == 1.0));
        // M^x has rows r = 0..n-1 (differences along i) by n columns
        for r in 0..n - 1 {
            for j in 0..n {
                let expect = if r == 7 || r == 8 { 0.0 } else { 1.0 };
                assert_eq!(mask.masks[0][r * n + j], expect, "row {r}, col {j}");
            }
        }
    }

    #[test]
    fn mismatched_maps_are_rejected() {
        let a = BinaryEdgeMap { grid: SpatialGrid::two_d(2).unwrap(), indicator: vec![0; 25], tau: 0.0 };
        let b = BinaryEdgeMap { grid: SpatialGrid::two_d(3).unwrap(), indicator: vec![0; 49], tau: 0.0 };
        assert!(build_mask_2d(&a, &b, 1, 0.0).is_err());
        assert!(build_mask_1d(&a, 1, 0.0).is_err());
        assert!(build_mask_1d(&spike_1d(5, &[]), 1, -1.0).is_err());
    }

    #[test]
    fn summed_needs_order_zero() {
        let m = RegularizationMask::ones(2, 0, 5).unwrap();
        assert_eq!(m.summed().unwrap(), vec![2.0; 25]);
        assert!(RegularizationMask::ones(2, 1, 5).unwrap().summed().is_err());
    }

    #[test]
    fn penalty_vanishes_on_steps_inside_the_mask() {
        let n = 41;
        for m in 1..=4 {
            let b = spike_1d(n, &[9, 25]);
            let mask = build_mask_1d(&b, m, 0.0).unwrap();
            let g: Vec<f64> = (0..n).map(|i| if i >= 25 { -0.4 } else if i >= 9 { 1.3 } else { 0.0 }).collect();
            let d = Sparsifier::for_grid(m, n, 1).unwrap()[0].apply_vec(&g);
            assert!(d.iter().any(|v| v.abs() > 0.1));
            let penalty: f64 = d.iter().zip(&mask.masks[0]).map(|(v, w)| w * v * v).sum();
            assert!(penalty < 1e-24, "m = {m}: {penalty}");
        }
    }

    #[test]
    fn detected_f1_mask_matches_the_true_jump_set_inside() {
        use crate::edge_detection::{jump_recovery_1d, threshold};
        use crate::phantoms::Phantom;
        use crate::scenario::Scenario;
        use crate::solvers::BregmanParams;

        let p = Scenario::new(Phantom::F1, 257, 1).build().unwrap();
        let (edges, _) = jump_recovery_1d(&p.operator, &p.data, 1.0, BregmanParams::default()).unwrap();
        let tau = 1.0 / 257.0;
        let detected = build_mask_1d(&threshold(&edges, tau).unwrap(), 1, tau).unwrap();
        let ideal = build_mask_1d(&spike_1d(257, &[128]), 1, tau).unwrap();
        let rows = ideal.masks[0].len();
        // the periodic extension also jumps at x = -1 and x = 1, so the
        // first and last rows are left out
        assert_eq!(&detected.masks[0][1..rows - 1], &ideal.masks[0][1..rows - 1]);
        assert_eq!(detected.masks[0][0], 0.0);
    }
}
