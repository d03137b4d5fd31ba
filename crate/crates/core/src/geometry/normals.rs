use nalgebra::{Matrix3, SymmetricEigen};

use super::{GeometryError, KdTree, PointCloud, Vec3, UP};
use crate::par;

pub const DEFAULT_NORMAL_K: usize = 16;

/// Flips `n` so that it points to the +z side; horizontal normals are
/// sent toward +x, then +y.
pub fn orient_up(n: Vec3) -> Vec3 {
    const FLAT: f64 = 1e-12;
    let flip = if n.z.abs() > FLAT {
        n.z < 0.0
    } else if n.x.abs() > FLAT {
        n.x < 0.0
    } else {
        n.y < 0.0
    };
    if flip {
        -n
    } else {
        n
    }
}

/// Covariance eigen-decomposition of a neighbourhood, eigenvalues ascending.
pub(crate) fn neighborhood_pca(points: &[Vec3], neighbors: &[usize]) -> (Vec3, Matrix3<f64>) {
    let n = neighbors.len() as f64;
    let mean = neighbors.iter().map(|&i| points[i]).sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for &i in neighbors {
        let d = points[i] - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vec3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    let vectors = Matrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    (values, vectors)
}

/// Normal at one point from the covariance of the point and its `k`
/// nearest neighbours.
pub fn estimate_normal_at(tree: &KdTree, index: usize, k: usize) -> Result<Vec3, GeometryError> {
    let pts = tree.points();
    let nb = tree.knn(&pts[index], k + 1);
    let (values, vectors) = neighborhood_pca(pts, &nb);
    let trace = values.sum();
    // two vanishing eigenvalues: the neighbourhood is a line or a point
    if !(trace > 0.0) || values[1] <= 1e-10 * trace {
        return Err(GeometryError::DegenerateNeighborhood);
    }
    let n: Vec3 = vectors.column(0).into_owned();
    Ok(orient_up(n.normalize()))
}

/// Adds PCA normals to a cloud. Points whose neighbourhood is degenerate
/// get `+z`.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud, GeometryError> {
    if k < 3 {
        return Err(GeometryError::OutOfRange { what: "k" });
    }
    if cloud.len() <= k {
        return Err(GeometryError::TooFewPoints { n: cloud.len(), k });
    }
    let tree = KdTree::new(&cloud.points);
    let normals = par::map_range(cloud.len(), |i| {
        estimate_normal_at(&tree, i, k).unwrap_or(UP)
    });
    let mut out = cloud.clone();
    out.normals = Some(normals);
    Ok(out)
}
