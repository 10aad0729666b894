/// Complete binary tree of non-negative rates supporting O(log n) point
/// updates and proportional selection. Internal sums are recomputed from
/// the children on every update, so no rounding drift accumulates.
#[derive(Debug, Clone)]
pub(crate) struct RateTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl RateTree {
    pub(crate) fn new(rates: &[f64]) -> Self {
        let leaves = rates.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + rates.len()].copy_from_slice(rates);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        RateTree { leaves, nodes }
    }

    pub(crate) fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[cfg(test)]
    pub(crate) fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub(crate) fn set(&mut self, i: usize, rate: f64) {
        let mut k = self.leaves + i;
        if self.nodes[k] == rate {
            return;
        }
        self.nodes[k] = rate;
        while k > 1 {
            let pair = &self.nodes[k & !1..=k | 1];
            let sum = pair[0] + pair[1];
            k /= 2;
            self.nodes[k] = sum;
        }
    }

    /// Leaf whose cumulative interval contains `target` in `[0, total)`.
    /// Never returns a zero-rate leaf.
    pub(crate) fn find(&self, mut target: f64) -> usize {
        let mut k = 1;
        while k < self.leaves {
            let left = self.nodes[2 * k];
            if target < left || self.nodes[2 * k + 1] == 0.0 {
                k *= 2;
            } else {
                target -= left;
                k = 2 * k + 1;
            }
        }
        let mut leaf = k - self.leaves;
        // Rounding can land on an empty leaf at an interval edge.
        if self.nodes[k] == 0.0 {
            leaf = (0..self.leaves)
                .rev()
                .find(|&i| self.nodes[self.leaves + i] > 0.0)
                .unwrap_or(leaf);
        }
        leaf
    }
}
