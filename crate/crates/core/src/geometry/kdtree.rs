use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Vec3;

const LEAF_SIZE: usize = 8;

/// Static kd-tree over a set of points.
///
/// Stored implicitly: `order` is a permutation of point indices arranged so
/// that the median of every range is its split node. Radius queries return
/// exactly the set a linear scan with `‖p − c‖ ≤ r` would, and kNN ties are
/// broken by the smaller point index.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
    axes: Vec<u8>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let n = points.len();
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..n as u32).collect(),
            axes: vec![0; n],
        };
        tree.build(0, n);
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF_SIZE {
            return;
        }
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.order[lo..hi] {
            let p = &self.points[i as usize];
            min = min.inf(p);
            max = max.sup(p);
        }
        let axis = (max - min).imax();
        let mid = (lo + hi) / 2;
        let pts = &self.points;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            pts[a as usize][axis]
                .total_cmp(&pts[b as usize][axis])
                .then(a.cmp(&b))
        });
        self.axes[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Indices with `‖p − center‖ ≤ r`, ascending.
    pub fn radius_query(&self, center: &Vec3, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_rec(0, self.points.len(), center, r, &mut out);
        out.sort_unstable();
        out
    }

    fn radius_rec(&self, lo: usize, hi: usize, c: &Vec3, r: f64, out: &mut Vec<usize>) {
        if hi - lo <= LEAF_SIZE {
            for &i in &self.order[lo..hi] {
                if (self.points[i as usize] - c).norm() <= r {
                    out.push(i as usize);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = self.axes[mid] as usize;
        let pi = self.order[mid] as usize;
        let pivot = self.points[pi][axis];
        if (self.points[pi] - c).norm() <= r {
            out.push(pi);
        }
        if c[axis] - r <= pivot {
            self.radius_rec(lo, mid, c, r, out);
        }
        if c[axis] + r >= pivot {
            self.radius_rec(mid + 1, hi, c, r, out);
        }
    }

    /// The `k` nearest points to `center` (including a coincident point),
    /// sorted by distance then index.
    pub fn knn(&self, center: &Vec3, k: usize) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, self.points.len(), center, k, &mut heap);
        let mut v = heap.into_vec();
        v.sort_unstable();
        v.into_iter().map(|c| c.index as usize).collect()
    }

    fn offer(&self, i: u32, c: &Vec3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        let cand = Candidate {
            dist2: (self.points[i as usize] - c).norm_squared(),
            index: i,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if let Some(worst) = heap.peek() {
            if cand < *worst {
                heap.pop();
                heap.push(cand);
            }
        }
    }

    fn knn_rec(&self, lo: usize, hi: usize, c: &Vec3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        if hi - lo <= LEAF_SIZE {
            for &i in &self.order[lo..hi] {
                self.offer(i, c, k, heap);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = self.axes[mid] as usize;
        let pi = self.order[mid];
        let diff = c[axis] - self.points[pi as usize][axis];
        self.offer(pi, c, k, heap);
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_rec(near.0, near.1, c, k, heap);
        let must_visit = heap.len() < k || heap.peek().is_some_and(|w| diff * diff <= w.dist2);
        if must_visit {
            self.knn_rec(far.0, far.1, c, k, heap);
        }
    }
}
