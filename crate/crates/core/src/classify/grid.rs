use serde::{Deserialize, Serialize};

use super::Classifier2d;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    /// Smallest box holding every point, widened by `margin` times its
    /// extent on each side. Degenerate extents are widened by 1.
    pub fn around(points: &[[f64; 2]], margin: f64) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        for a in 0..2 {
            if !min[a].is_finite() || !max[a].is_finite() {
                min[a] = -1.0;
                max[a] = 1.0;
            }
            let extent = max[a] - min[a];
            let pad = if extent > 0.0 { extent * margin } else { 1.0 };
            min[a] -= pad;
            max[a] += pad;
        }
        Bounds { min, max }
    }
}

/// Predicted class per cell; row 0 is the lowest `y` band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    /// Row-major class indices, `ny` rows of `nx`.
    pub labels: Vec<usize>,
}

impl Grid {
    pub fn at(&self, ix: usize, iy: usize) -> usize {
        self.labels[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        cell_center(&self.bounds, self.nx, self.ny, ix, iy)
    }
}

fn cell_center(b: &Bounds, nx: usize, ny: usize, ix: usize, iy: usize) -> [f64; 2] {
    [
        b.min[0] + (ix as f64 + 0.5) * (b.max[0] - b.min[0]) / nx as f64,
        b.min[1] + (iy as f64 + 0.5) * (b.max[1] - b.min[1]) / ny as f64,
    ]
}

/// Labels every cell of an `nx` by `ny` grid by the prediction at its center.
pub fn decision_grid<M: Classifier2d + ?Sized>(
    model: &M,
    bounds: Bounds,
    nx: usize,
    ny: usize,
) -> Grid {
    let (nx, ny) = (nx.max(1), ny.max(1));
    let labels = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| model.predict_2d(cell_center(&bounds, nx, ny, ix, iy)))
        .collect();
    Grid {
        bounds,
        nx,
        ny,
        labels,
    }
}
