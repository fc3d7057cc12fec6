//! Synthetic reward functions over bin grids, plus evaluator adapters used
//! by tests and benchmark harnesses: lookup tables keyed by bin indices,
//! separable and correlated toys, and a call-counting wrapper.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::attr::{AttributeSpace, AttributeVector, BinIndexVector};
use crate::optim::{EvalError, RewardEvaluator};

/// Snaps a raw vector onto the bin grid of `space`.
pub fn snap_to_bins(space: &AttributeSpace, attrs: &AttributeVector) -> Option<BinIndexVector> {
    let mut bins = Vec::with_capacity(space.len());
    for (spec, &v) in space.specs().iter().zip(attrs.values()) {
        bins.push(spec.value_to_bin(v).ok()?);
    }
    Some(BinIndexVector::new(bins))
}

/// Deterministic reward read from a dense table indexed by the bin
/// combination (row-major over the bin grid). Ignores the evaluation seed.
pub struct TableReward {
    space: AttributeSpace,
    table: Vec<f64>,
}

impl TableReward {
    pub fn new(space: AttributeSpace, table: Vec<f64>) -> Self {
        let cells: usize = space.specs().iter().map(|s| s.num_bins).product();
        assert_eq!(table.len(), cells, "table must cover the whole bin grid");
        assert!(
            table.iter().all(|r| (0.0..=1.0).contains(r)),
            "rewards must lie in [0, 1]"
        );
        Self { space, table }
    }

    /// Reward is the mean of one table per attribute: optimum at the
    /// per-table argmaxes, no interactions.
    pub fn separable(space: AttributeSpace, per_attr: &[Vec<f64>]) -> Self {
        assert_eq!(per_attr.len(), space.len());
        for (spec, t) in space.specs().iter().zip(per_attr) {
            assert_eq!(spec.num_bins, t.len());
        }
        let mut table = Vec::new();
        let mut bins = vec![0usize; space.len()];
        loop {
            let sum: f64 = bins.iter().zip(per_attr).map(|(&k, t)| t[k]).sum();
            table.push(sum / per_attr.len() as f64);
            if !advance(&mut bins, &space) {
                break;
            }
        }
        Self::new(space, table)
    }

    /// Two-attribute toy paying a graded bonus only when both bins agree;
    /// disagreeing combinations all score `off_diag`. Greedy one-at-a-time
    /// search stalls on whatever diagonal cell the starting context selects.
    pub fn correlated_equal_bins(space: AttributeSpace, off_diag: f64, best: f64) -> Self {
        assert_eq!(space.len(), 2, "equal-bins toy is two attributes");
        let k = space.spec(0).num_bins;
        assert_eq!(space.spec(1).num_bins, k);
        let mut table = vec![off_diag; k * k];
        for j in 0..k {
            // Diagonal ramps linearly up to `best` at the last bin.
            let frac = if k == 1 { 1.0 } else { j as f64 / (k - 1) as f64 };
            table[j * k + j] = off_diag + (best - off_diag) * (0.5 + 0.5 * frac);
        }
        Self::new(space, table)
    }

    pub fn space(&self) -> &AttributeSpace {
        &self.space
    }

    pub fn reward_at(&self, bins: &BinIndexVector) -> f64 {
        let mut idx = 0usize;
        for (i, spec) in self.space.specs().iter().enumerate() {
            idx = idx * spec.num_bins + bins.get(i);
        }
        self.table[idx]
    }

    /// Exact argmax by full enumeration; ties go to the lexicographically
    /// smallest bin combination.
    pub fn enumerate_best(&self) -> (BinIndexVector, f64) {
        let mut bins = vec![0usize; self.space.len()];
        let mut best_bins = bins.clone();
        let mut best = f64::NEG_INFINITY;
        loop {
            let r = self.reward_at(&BinIndexVector::new(bins.clone()));
            if r > best {
                best = r;
                best_bins = bins.clone();
            }
            if !advance(&mut bins, &self.space) {
                break;
            }
        }
        (BinIndexVector::new(best_bins), best)
    }
}

fn advance(bins: &mut [usize], space: &AttributeSpace) -> bool {
    for i in (0..bins.len()).rev() {
        bins[i] += 1;
        if bins[i] < space.spec(i).num_bins {
            return true;
        }
        bins[i] = 0;
    }
    false
}

impl RewardEvaluator for TableReward {
    fn evaluate(&self, attrs: &AttributeVector, _seed: u64) -> Result<f64, EvalError> {
        let bins = snap_to_bins(&self.space, attrs).ok_or_else(|| EvalError::InvalidAttributes {
            detail: "attribute vector outside the table's space".to_string(),
        })?;
        Ok(self.reward_at(&bins))
    }
}

/// Fixed score regardless of input; uninformative reward for warm-up tests.
pub struct ConstantReward(pub f64);

impl RewardEvaluator for ConstantReward {
    fn evaluate(&self, _attrs: &AttributeVector, _seed: u64) -> Result<f64, EvalError> {
        Ok(self.0)
    }
}

/// Adapter for closure-based rewards.
pub struct FnReward<F>(pub F);

impl<F> RewardEvaluator for FnReward<F>
where
    F: Fn(&AttributeVector, u64) -> Result<f64, EvalError> + Sync,
{
    fn evaluate(&self, attrs: &AttributeVector, seed: u64) -> Result<f64, EvalError> {
        (self.0)(attrs, seed)
    }
}

/// Wraps any evaluator and counts calls; the budget-accounting oracle.
pub struct CountingEvaluator<E> {
    inner: E,
    calls: AtomicU64,
}

impl<E> CountingEvaluator<E> {
    pub fn new(inner: E) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<E: RewardEvaluator> RewardEvaluator for CountingEvaluator<E> {
    fn evaluate(&self, attrs: &AttributeVector, seed: u64) -> Result<f64, EvalError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(attrs, seed)
    }
}
