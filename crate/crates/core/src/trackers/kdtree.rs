//! Static kd-tree for fixed-radius neighbor queries.

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    points: Vec<Vec<f64>>,
    /// Point indices in tree order; node `k` of a subtree `[lo, hi)` sits at
    /// the midpoint.
    order: Vec<usize>,
}

impl KdTree {
    pub fn build(points: Vec<Vec<f64>>) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        let mut order: Vec<usize> = (0..points.len()).collect();
        if dim > 0 {
            split(&points, &mut order, 0, dim);
        }
        Self { dim, points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the points within squared distance `r2` of `q`, sorted.
    pub fn within(&self, q: &[f64], r2: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.dim > 0 {
            self.search(q, r2, 0, self.order.len(), 0, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn search(&self, q: &[f64], r2: f64, lo: usize, hi: usize, depth: usize, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let p = &self.points[idx];
        let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 <= r2 {
            out.push(idx);
        }
        let axis = depth % self.dim;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, r2, near.0, near.1, depth + 1, out);
        if diff * diff <= r2 {
            self.search(q, r2, far.0, far.1, depth + 1, out);
        }
    }
}

fn split(points: &[Vec<f64>], order: &mut [usize], depth: usize, dim: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % dim;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |a, b| points[*a][axis].total_cmp(&points[*b][axis]));
    let (left, right) = order.split_at_mut(mid);
    split(points, left, depth + 1, dim);
    split(points, &mut right[1..], depth + 1, dim);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_linear_scan(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 0..60),
                               q in prop::collection::vec(-5.0f64..5.0, 3), r2 in 0.0f64..10.0) {
            let tree = KdTree::build(pts.clone());
            let brute: Vec<usize> = pts.iter().enumerate()
                .filter(|(_, p)| p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2)
                .map(|(i, _)| i).collect();
            prop_assert_eq!(tree.within(&q, r2), brute);
        }
    }
}
