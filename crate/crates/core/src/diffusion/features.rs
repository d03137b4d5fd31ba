use std::f64::consts::FRAC_PI_2;

use crate::geometry::{normals::neighborhood_pca, KdTree, PointCloud, Vec3, UP};
use crate::par;

use super::DiffusionError;

pub const N_FEATURES: usize = 8;
const FEATURE_K: usize = 16;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "normal_z",
    "tilt",
    "planarity",
    "normal_spread",
    "height",
    "radial",
    "density_rank",
    "bias",
];

/// Row-major `N × N_FEATURES` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionFeatures {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ConditionFeatures {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DiffusionError> {
        if data.len() != rows * cols {
            return Err(DiffusionError::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows reordered so that row `i` of the result is row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let data = order
            .iter()
            .flat_map(|&i| self.row(i).iter().copied())
            .collect();
        Self {
            rows: order.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Per-point conditioning: normal z, tilt from vertical over π, local
/// planarity, neighbour normal spread, normalized height, normalized radial
/// distance from the centroid, local density rank and a constant 1.
/// Every entry lies in `[0, 1]`.
pub fn condition_features(cloud: &PointCloud) -> Result<ConditionFeatures, DiffusionError> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or(DiffusionError::MissingNormals)?;
    let pts = &cloud.points;
    let n = pts.len();
    if n == 0 {
        return Ok(ConditionFeatures {
            rows: 0,
            cols: N_FEATURES,
            data: Vec::new(),
        });
    }
    let k = FEATURE_K.min(n - 1);
    let tree = KdTree::new(pts);

    let (zmin, zmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.z), hi.max(p.z))
        });
    let centroid = pts.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n as f64;
    let rmax = pts
        .iter()
        .map(|p| (p - centroid).norm())
        .fold(0.0, f64::max);

    // (planarity, spread, k-th neighbour distance)
    let local = par::map_range(n, |i| {
        if k < 2 {
            return (1.0, 0.0, 0.0);
        }
        let nb = tree.knn(&pts[i], k + 1);
        let (ev, _) = neighborhood_pca(pts, &nb);
        let trace = ev.x + ev.y + ev.z;
        let planarity = if trace > 0.0 {
            (1.0 - ev.x / trace).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let ni = normals[i];
        let others: Vec<usize> = nb.iter().copied().filter(|&j| j != i).collect();
        let spread = others
            .iter()
            .map(|&j| (ni.dot(&normals[j]).clamp(-1.0, 1.0).acos() / FRAC_PI_2).min(1.0))
            .sum::<f64>()
            / others.len().max(1) as f64;
        let dk = nb.last().map_or(0.0, |&j| (pts[j] - pts[i]).norm());
        (planarity, spread, dk)
    });

    // equal distances share the rank of the first of them
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| local[b].2.total_cmp(&local[a].2));
    let mut rank = vec![0.0; n];
    let mut first = 0;
    for (r, &i) in order.iter().enumerate() {
        if r > 0 && local[i].2 != local[order[r - 1]].2 {
            first = r;
        }
        rank[i] = if n > 1 {
            first as f64 / (n - 1) as f64
        } else {
            0.0
        };
    }

    let zspan = zmax - zmin;
    let mut data = Vec::with_capacity(n * N_FEATURES);
    for i in 0..n {
        let nz = normals[i].z;
        let tilt = normals[i].dot(&UP).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
        let height = if zspan > 0.0 {
            (pts[i].z - zmin) / zspan
        } else {
            0.0
        };
        let radial = if rmax > 0.0 {
            ((pts[i] - centroid).norm() / rmax).min(1.0)
        } else {
            0.0
        };
        let (planarity, spread, _) = local[i];
        data.extend_from_slice(&[
            nz.clamp(0.0, 1.0),
            tilt,
            planarity,
            spread,
            height,
            radial,
            rank[i],
            1.0,
        ]);
    }
    Ok(ConditionFeatures {
        rows: n,
        cols: N_FEATURES,
        data,
    })
}
