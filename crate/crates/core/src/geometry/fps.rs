use super::{GeometryError, PointCloud};
use crate::par;

/// Greedy farthest point sampling.
///
/// Starts at `seed_index`; every further pick maximises the Euclidean
/// distance to the already-chosen set, ties going to the smallest index.
pub fn farthest_point_sample(
    cloud: &PointCloud,
    m: usize,
    seed_index: usize,
) -> Result<Vec<usize>, GeometryError> {
    let n = cloud.len();
    if m == 0 || m > n {
        return Err(GeometryError::OutOfRange {
            what: "sample count",
        });
    }
    if seed_index >= n {
        return Err(GeometryError::OutOfRange { what: "seed index" });
    }
    let pts = &cloud.points;
    let mut chosen = Vec::with_capacity(m);
    chosen.push(seed_index);
    let mut min_d2: Vec<f64> = par::map_slice(pts, |p| (p - pts[seed_index]).norm_squared());
    const CHUNK: usize = 4096;
    while chosen.len() < m {
        let next = par::argmax_by_key(n, |i| min_d2[i]).expect("non-empty cloud");
        chosen.push(next);
        let q = pts[next];
        par::for_each_chunk_mut(&mut min_d2, CHUNK, |ci, chunk| {
            let base = ci * CHUNK;
            for (j, d) in chunk.iter_mut().enumerate() {
                let nd = (pts[base + j] - q).norm_squared();
                if nd < *d {
                    *d = nd;
                }
            }
        });
    }
    Ok(chosen)
}
