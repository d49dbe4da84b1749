use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gaussian radial basis function kernel `exp(-gamma * |a - b|^2)`.
#[inline]
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Least-recently-used cache of kernel matrix rows. A capacity of zero
/// disables caching; rows are then recomputed on every request.
pub struct KernelCache<'a> {
    points: &'a [&'a [f64]],
    gamma: f64,
    capacity: usize,
    rows: HashMap<usize, (Rc<[f64]>, u64)>,
    recency: BTreeMap<u64, usize>,
    clock: u64,
    hits: u64,
    misses: u64,
}

impl<'a> KernelCache<'a> {
    pub fn new(points: &'a [&'a [f64]], gamma: f64, capacity: usize) -> Self {
        KernelCache {
            points,
            gamma,
            capacity,
            rows: HashMap::new(),
            recency: BTreeMap::new(),
            clock: 0,
            hits: 0,
            misses: 0,
        }
    }

    fn compute(&self, i: usize) -> Rc<[f64]> {
        let p = self.points[i];
        self.points.iter().map(|q| rbf(p, q, self.gamma)).collect()
    }

    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        if self.capacity == 0 {
            self.misses += 1;
            return self.compute(i);
        }
        self.clock += 1;
        let now = self.clock;
        if let Some((row, stamp)) = self.rows.get_mut(&i) {
            self.hits += 1;
            self.recency.remove(stamp);
            *stamp = now;
            self.recency.insert(now, i);
            return Rc::clone(row);
        }
        self.misses += 1;
        if self.rows.len() >= self.capacity {
            if let Some((_, victim)) = self.recency.pop_first() {
                self.rows.remove(&victim);
            }
        }
        let row = self.compute(i);
        self.rows.insert(i, (Rc::clone(&row), now));
        self.recency.insert(now, i);
        row
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_values() {
        assert_eq!(rbf(&[1.0, 2.0], &[1.0, 2.0], 0.7), 1.0);
        assert!((rbf(&[0.0], &[2.0], 0.5) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn lru_evicts_oldest_and_matches_uncached() {
        let data: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let pts: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let mut cached = KernelCache::new(&pts, 0.1, 2);
        let mut plain = KernelCache::new(&pts, 0.1, 0);
        for &i in &[0, 1, 0, 2, 1, 3, 0] {
            assert_eq!(&*cached.row(i), &*plain.row(i));
        }
        // 0 miss, 1 miss, 0 hit, 2 miss (evicts 1), 1 miss (evicts 0), 3 miss (evicts 2), 0 miss
        assert_eq!(cached.hits(), 1);
        assert_eq!(cached.misses(), 6);
    }
}
