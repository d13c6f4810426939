//! Grid handling, local-minimum selection and parabolic refinement.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed interval sampled at a fixed step, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "grid needs min < max and step > 0 (got {}, {}, {})",
                self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Vertex offset, in grid steps, of the parabola through three equally
/// spaced samples. Clamped to `[−½, ½]`.
pub fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let den = left - 2.0 * mid + right;
    if !(den > 0.0) || !den.is_finite() {
        return 0.0;
    }
    (0.5 * (left - right) / den).clamp(-0.5, 0.5)
}

/// Refined abscissa around grid index `i`.
pub fn refine(grid: &[f64], values: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= grid.len() {
        return grid[i];
    }
    let step = grid[i + 1] - grid[i];
    grid[i] + step * parabolic_offset(values[i - 1], values[i], values[i + 1])
}

/// Indices of the `k` deepest strict interior local minima, taken greedily
/// subject to pairwise separation `min_sep` and with ties going to the
/// smaller abscissa. Returned in ascending abscissa order.
pub fn select_local_minima(grid: &[f64], values: &[f64], k: usize, min_sep: f64) -> Result<Vec<usize>> {
    let mut cands: Vec<usize> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect();
    cands.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for &c in &cands {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&o| (grid[o] - grid[c]).abs() >= min_sep - 1e-12) {
            chosen.push(c);
        }
    }
    if chosen.len() < k {
        let mut locations: Vec<f64> = chosen.iter().map(|&i| grid[i]).collect();
        locations.sort_by(f64::total_cmp);
        return Err(Error::InsufficientMinima {
            wanted: k,
            found: chosen.len(),
            locations,
        });
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_counts_include_endpoint() {
        let g = Grid::new(-60f64.to_radians(), 60f64.to_radians(), 0.5f64.to_radians());
        assert_eq!(g.len(), 241);
        let s = Grid::new(0.1f64.to_radians(), 8f64.to_radians(), 0.1f64.to_radians());
        assert_eq!(s.len(), 80);
        assert!((s.points()[79] - 8f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn parabola_vertex_exact() {
        let f = |x: f64| 3.0 * (x - 0.3).powi(2) + 1.0;
        let off = parabolic_offset(f(-1.0), f(0.0), f(1.0));
        assert!((off - 0.3).abs() < 1e-12);
    }

    #[test]
    fn minima_selection_rules() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let vals = [5.0, 1.0, 3.0, 0.5, 4.0, 2.0, 2.5, 1.0, 3.0, 0.0];
        // interior strict minima: 1 (1.0), 3 (0.5), 5 (2.0), 7 (1.0); index 9 is an endpoint
        assert_eq!(select_local_minima(&grid, &vals, 2, 0.0).unwrap(), vec![1, 3]);
        assert_eq!(select_local_minima(&grid, &vals, 2, 3.0).unwrap(), vec![3, 7]);
        let err = select_local_minima(&grid, &vals, 5, 0.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientMinima { wanted: 5, found: 4, .. }));
    }

    #[test]
    fn plateau_is_not_a_minimum() {
        let grid: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let vals = [3.0, 1.0, 1.0, 1.0, 3.0];
        assert!(select_local_minima(&grid, &vals, 1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn selected_minima_are_separated_local_minima(
            vals in prop::collection::vec(0.0f64..1.0, 5..60), k in 1usize..4, sep in 0.0f64..6.0
        ) {
            let grid: Vec<f64> = (0..vals.len()).map(|i| i as f64).collect();
            if let Ok(idx) = select_local_minima(&grid, &vals, k, sep) {
                prop_assert_eq!(idx.len(), k);
                for w in idx.windows(2) {
                    prop_assert!(grid[w[1]] - grid[w[0]] >= sep - 1e-12);
                }
                for &i in &idx {
                    prop_assert!(vals[i] < vals[i - 1] && vals[i] < vals[i + 1]);
                }
            }
        }
    }
}
