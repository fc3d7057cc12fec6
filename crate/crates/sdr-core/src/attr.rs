//! Attribute search spaces: bounded named scalars, uniform discretization
//! into bins, relaxation jitter on top of discrete values, and group plans
//! for coordinate descent.

use rand::Rng;
use thiserror::Error;

/// Attribute taxonomy: what kind of scene property a scalar controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Environment,
    Position,
    Density,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Environment => "environment",
            Family::Position => "position",
            Family::Density => "density",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = AttrError;

    fn from_str(s: &str) -> Result<Self, AttrError> {
        match s {
            "environment" => Ok(Family::Environment),
            "position" => Ok(Family::Position),
            "density" => Ok(Family::Density),
            other => Err(AttrError::UnknownFamily {
                family: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Error)]
pub enum AttrError {
    #[error("attribute `{name}`: lower bound {lo} must be strictly below upper bound {hi}")]
    EmptyRange { name: String, lo: f64, hi: f64 },
    #[error("attribute `{name}`: num_bins {num_bins} must be at least 2")]
    TooFewBins { name: String, num_bins: usize },
    #[error("attribute `{name}`: bounds must be finite (got lo={lo}, hi={hi})")]
    NonFiniteBounds { name: String, lo: f64, hi: f64 },
    #[error("duplicate attribute name `{name}`")]
    DuplicateName { name: String },
    #[error("attribute space must contain at least one attribute")]
    EmptySpace,
    #[error("attribute `{name}`: bin index {bin} out of range (num_bins = {num_bins})")]
    BinOutOfRange {
        name: String,
        bin: usize,
        num_bins: usize,
    },
    #[error("attribute `{name}`: value {value} outside [{lo}, {hi}]")]
    ValueOutOfRange {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("relaxation half width {half_width_frac} must lie in [0, 0.5]")]
    BadHalfWidth { half_width_frac: f64 },
    #[error("vector has {got} values but the space has {expected} attributes")]
    LengthMismatch { got: usize, expected: usize },
    #[error("unknown attribute family `{family}`")]
    UnknownFamily { family: String },
}

/// One bounded scalar attribute together with its discretization.
///
/// `num_bins` uniform bins cover `[lo, hi]`; bin `k` is represented by its
/// midpoint, so relaxed values with a half width of at most half a bin
/// width never leave the bin.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub num_bins: usize,
    pub family: Family,
}

impl AttributeSpec {
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        num_bins: usize,
        family: Family,
    ) -> Result<Self, AttrError> {
        let name = name.into();
        if !lo.is_finite() || !hi.is_finite() {
            return Err(AttrError::NonFiniteBounds { name, lo, hi });
        }
        if lo >= hi {
            return Err(AttrError::EmptyRange { name, lo, hi });
        }
        if num_bins < 2 {
            return Err(AttrError::TooFewBins { name, num_bins });
        }
        Ok(Self {
            name,
            lo,
            hi,
            num_bins,
            family,
        })
    }

    /// Width of one bin in raw attribute units.
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.num_bins as f64
    }

    /// Midpoint of bin `k`.
    pub fn bin_center(&self, k: usize) -> Result<f64, AttrError> {
        if k >= self.num_bins {
            return Err(AttrError::BinOutOfRange {
                name: self.name.clone(),
                bin: k,
                num_bins: self.num_bins,
            });
        }
        Ok(self.lo + (k as f64 + 0.5) * self.bin_width())
    }

    /// Bin containing `v`; the upper edge maps to the last bin.
    pub fn value_to_bin(&self, v: f64) -> Result<usize, AttrError> {
        if !(v >= self.lo && v <= self.hi) {
            return Err(AttrError::ValueOutOfRange {
                name: self.name.clone(),
                value: v,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let raw = ((v - self.lo) / (self.hi - self.lo) * self.num_bins as f64).floor() as usize;
        Ok(raw.min(self.num_bins - 1))
    }

    /// Bin midpoint plus uniform jitter of `half_width_frac` bin widths,
    /// clamped to the attribute range.
    pub fn relax<R: Rng>(
        &self,
        k: usize,
        rng: &mut R,
        half_width_frac: f64,
    ) -> Result<f64, AttrError> {
        let center = self.bin_center(k)?;
        self.relax_value(center, rng, half_width_frac)
    }

    /// Uniform jitter of `half_width_frac` bin widths around an arbitrary
    /// in-range value, clamped to the attribute range. `relax` is this
    /// applied to a bin midpoint.
    pub fn relax_value<R: Rng>(
        &self,
        v: f64,
        rng: &mut R,
        half_width_frac: f64,
    ) -> Result<f64, AttrError> {
        if !(0.0..=0.5).contains(&half_width_frac) {
            return Err(AttrError::BadHalfWidth { half_width_frac });
        }
        let half = half_width_frac * self.bin_width();
        let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        Ok((v + u * half).clamp(self.lo, self.hi))
    }

    /// Map a raw value to [0, 1].
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

/// An ordered collection of uniquely named attribute specs.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpace {
    specs: Vec<AttributeSpec>,
}

impl AttributeSpace {
    pub fn new(specs: Vec<AttributeSpec>) -> Result<Self, AttrError> {
        if specs.is_empty() {
            return Err(AttrError::EmptySpace);
        }
        for i in 0..specs.len() {
            for j in 0..i {
                if specs[i].name == specs[j].name {
                    return Err(AttrError::DuplicateName {
                        name: specs[i].name.clone(),
                    });
                }
            }
        }
        Ok(Self { specs })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[AttributeSpec] {
        &self.specs
    }

    pub fn spec(&self, i: usize) -> &AttributeSpec {
        &self.specs[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Independent uniform draw per attribute over its raw range.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> AttributeVector {
        let values = self
            .specs
            .iter()
            .map(|s| s.lo + rng.gen::<f64>() * (s.hi - s.lo))
            .collect();
        AttributeVector { values }
    }

    /// Checks length and per-attribute range of a raw vector.
    pub fn validate_vector(&self, v: &AttributeVector) -> Result<(), AttrError> {
        if v.len() != self.len() {
            return Err(AttrError::LengthMismatch {
                got: v.len(),
                expected: self.len(),
            });
        }
        for (spec, &value) in self.specs.iter().zip(v.values()) {
            if !(value >= spec.lo && value <= spec.hi) || !value.is_finite() {
                return Err(AttrError::ValueOutOfRange {
                    name: spec.name.clone(),
                    value,
                    lo: spec.lo,
                    hi: spec.hi,
                });
            }
        }
        Ok(())
    }

    /// Raw vector holding every attribute's bin midpoint for `bins`.
    pub fn centers(&self, bins: &BinIndexVector) -> Result<AttributeVector, AttrError> {
        if bins.len() != self.len() {
            return Err(AttrError::LengthMismatch {
                got: bins.len(),
                expected: self.len(),
            });
        }
        let values = self
            .specs
            .iter()
            .zip(bins.bins())
            .map(|(s, &k)| s.bin_center(k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AttributeVector { values })
    }

    /// Midpoint of each attribute's raw range (not a bin center in general).
    pub fn mid_range(&self) -> AttributeVector {
        let values = self.specs.iter().map(|s| (s.lo + s.hi) / 2.0).collect();
        AttributeVector { values }
    }

    /// Product of all bin counts, saturating in f64 for wide spaces.
    pub fn cardinality(&self) -> f64 {
        self.specs
            .iter()
            .map(|s| s.num_bins as f64)
            .product::<f64>()
    }
}

/// A point in raw attribute units, one value per spec.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVector {
    values: Vec<f64>,
}

impl AttributeVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.values[i] = v;
    }
}

impl From<Vec<f64>> for AttributeVector {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// One chosen bin per attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinIndexVector {
    bins: Vec<usize>,
}

impl BinIndexVector {
    pub fn new(bins: Vec<usize>) -> Self {
        Self { bins }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn get(&self, i: usize) -> usize {
        self.bins[i]
    }
}

impl From<Vec<usize>> for BinIndexVector {
    fn from(bins: Vec<usize>) -> Self {
        Self { bins }
    }
}

/// First invariant a group plan violates, if any.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanViolation {
    #[error("plan has no groups")]
    NoGroups,
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
    #[error("group {group} refers to attribute {index}, but only {n_attributes} exist")]
    IndexOutOfRange {
        group: usize,
        index: usize,
        n_attributes: usize,
    },
    #[error("attribute {index} appears in both group {first} and group {second}")]
    Overlap {
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("attribute {index} is missing from every group")]
    Missing { index: usize },
}

/// An ordered partition of attribute indices: the unit of joint
/// optimization during coordinate descent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPlan {
    groups: Vec<Vec<usize>>,
}

impl GroupPlan {
    /// Builds a plan, rejecting anything that is not a disjoint exhaustive
    /// partition of `{0..n_attributes-1}`.
    pub fn new(groups: Vec<Vec<usize>>, n_attributes: usize) -> Result<Self, PlanViolation> {
        validate_group_plan(&groups, n_attributes)?;
        Ok(Self { groups })
    }

    /// Every attribute alone in its own group, in index order.
    pub fn singletons(n_attributes: usize) -> Self {
        Self {
            groups: (0..n_attributes).map(|i| vec![i]).collect(),
        }
    }

    /// All attributes in one joint group.
    pub fn single_group(n_attributes: usize) -> Self {
        Self {
            groups: vec![(0..n_attributes).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// Confirms the groups form a disjoint exhaustive partition of
/// `{0..n_attributes-1}`, reporting the first violation found.
pub fn validate_group_plan(
    groups: &[Vec<usize>],
    n_attributes: usize,
) -> Result<(), PlanViolation> {
    if groups.is_empty() {
        return Err(PlanViolation::NoGroups);
    }
    let mut owner: Vec<Option<usize>> = vec![None; n_attributes];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(PlanViolation::EmptyGroup { group: g });
        }
        for &idx in group {
            if idx >= n_attributes {
                return Err(PlanViolation::IndexOutOfRange {
                    group: g,
                    index: idx,
                    n_attributes,
                });
            }
            match owner[idx] {
                Some(first) => {
                    return Err(PlanViolation::Overlap {
                        index: idx,
                        first,
                        second: g,
                    })
                }
                None => owner[idx] = Some(g),
            }
        }
    }
    if let Some(index) = owner.iter().position(Option::is_none) {
        return Err(PlanViolation::Missing { index });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_spec(num_bins: usize) -> AttributeSpec {
        AttributeSpec::new("u", 0.0, 1.0, num_bins, Family::Position).unwrap()
    }

    #[test]
    fn bin_center_midpoints() {
        assert_abs_diff_eq!(unit_spec(10).bin_center(0).unwrap(), 0.05);
        let signed = AttributeSpec::new("s", -1.0, 1.0, 2, Family::Density).unwrap();
        assert_abs_diff_eq!(signed.bin_center(1).unwrap(), 0.5);
        let wide = AttributeSpec::new("w", 0.0, 100.0, 4, Family::Environment).unwrap();
        assert_abs_diff_eq!(wide.bin_center(3).unwrap(), 87.5);
    }

    #[test]
    fn bin_center_rejects_out_of_range() {
        assert!(matches!(
            unit_spec(10).bin_center(10),
            Err(AttrError::BinOutOfRange { bin: 10, .. })
        ));
    }

    #[test]
    fn value_to_bin_floor_and_clamp() {
        let spec = unit_spec(10);
        assert_eq!(spec.value_to_bin(0.349).unwrap(), 3);
        assert_eq!(spec.value_to_bin(1.0).unwrap(), 9);
        assert_eq!(spec.value_to_bin(0.0).unwrap(), 0);
        assert!(spec.value_to_bin(1.2).is_err());
        assert!(spec.value_to_bin(-0.1).is_err());
    }

    #[test]
    fn value_to_bin_inverts_bin_center() {
        let spec = unit_spec(10);
        assert_eq!(spec.value_to_bin(spec.bin_center(7).unwrap()).unwrap(), 7);
    }

    #[test]
    fn relax_stays_in_bin_and_degenerates() {
        let spec = unit_spec(10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let v = spec.relax(4, &mut rng, 0.5).unwrap();
            assert!((0.40..=0.50).contains(&v), "value {v} left bin 4");
        }
        let v = spec.relax(4, &mut rng, 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.45);
        assert!(matches!(
            spec.relax(4, &mut rng, 0.6),
            Err(AttrError::BadHalfWidth { .. })
        ));
    }

    #[test]
    fn relax_mean_matches_uniform_law() {
        // Monte-Carlo oracle: uniform on [0.40, 0.50] has mean 0.45.
        let spec = unit_spec(10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| spec.relax(4, &mut rng, 0.5).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.45).abs() < 1e-3, "mean {mean}");
    }

    #[test]
    fn sample_uniform_is_seed_reproducible() {
        let space = AttributeSpace::new(vec![
            AttributeSpec::new("a", 0.0, 1.0, 10, Family::Position).unwrap(),
            AttributeSpec::new("b", -3.0, 5.0, 4, Family::Density).unwrap(),
        ])
        .unwrap();
        let a = space.sample_uniform(&mut ChaCha8Rng::seed_from_u64(3));
        let b = space.sample_uniform(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        space.validate_vector(&a).unwrap();
    }

    #[test]
    fn sample_uniform_degenerate_range() {
        let eps = 1e-9;
        let space = AttributeSpace::new(vec![AttributeSpec::new(
            "tiny",
            5.0,
            5.0 + eps,
            2,
            Family::Environment,
        )
        .unwrap()])
        .unwrap();
        let v = space.sample_uniform(&mut ChaCha8Rng::seed_from_u64(0));
        assert!((v.get(0) - 5.0).abs() <= eps);
    }

    #[test]
    fn sample_uniform_mean_matches_range_midpoint() {
        // Monte-Carlo oracle: per-attribute mean is (lo+hi)/2 within 3 sigma.
        let space = AttributeSpace::new(vec![
            AttributeSpec::new("a", 0.0, 1.0, 10, Family::Position).unwrap(),
            AttributeSpec::new("b", -4.0, 10.0, 4, Family::Density).unwrap(),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let n = 100_000usize;
        let mut sums = [0.0f64; 2];
        for _ in 0..n {
            let v = space.sample_uniform(&mut rng);
            sums[0] += v.get(0);
            sums[1] += v.get(1);
        }
        for (i, spec) in space.specs().iter().enumerate() {
            let mean = sums[i] / n as f64;
            let expected = (spec.lo + spec.hi) / 2.0;
            let sigma = (spec.hi - spec.lo) / 12f64.sqrt() / (n as f64).sqrt();
            assert!(
                (mean - expected).abs() < 3.0 * sigma,
                "attr {i}: mean {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn spec_construction_invariants() {
        assert!(AttributeSpec::new("x", 1.0, 1.0, 4, Family::Position).is_err());
        assert!(AttributeSpec::new("x", 2.0, 1.0, 4, Family::Position).is_err());
        assert!(AttributeSpec::new("x", 0.0, 1.0, 1, Family::Position).is_err());
        assert!(AttributeSpec::new("x", f64::NAN, 1.0, 4, Family::Position).is_err());
        let dup = AttributeSpace::new(vec![
            AttributeSpec::new("x", 0.0, 1.0, 2, Family::Position).unwrap(),
            AttributeSpec::new("x", 0.0, 2.0, 2, Family::Density).unwrap(),
        ]);
        assert!(matches!(dup, Err(AttrError::DuplicateName { .. })));
    }

    #[test]
    fn group_plan_validation_cases() {
        assert!(validate_group_plan(&[vec![0, 1], vec![2]], 3).is_ok());
        assert_eq!(
            validate_group_plan(&[vec![0, 1], vec![1, 2]], 3),
            Err(PlanViolation::Overlap {
                index: 1,
                first: 0,
                second: 1
            })
        );
        assert_eq!(
            validate_group_plan(&[vec![0], vec![2]], 3),
            Err(PlanViolation::Missing { index: 1 })
        );
        assert_eq!(
            validate_group_plan(&[vec![0], vec![], vec![1]], 2),
            Err(PlanViolation::EmptyGroup { group: 1 })
        );
        assert_eq!(
            validate_group_plan(&[vec![0, 5]], 2),
            Err(PlanViolation::IndexOutOfRange {
                group: 0,
                index: 5,
                n_attributes: 2
            })
        );
    }

    proptest! {
        #[test]
        fn bin_centers_strictly_increasing(num_bins in 2usize..40, lo in -100.0f64..100.0, width in 1e-3f64..1e3) {
            let spec = AttributeSpec::new("p", lo, lo + width, num_bins, Family::Position).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for k in 0..num_bins {
                let c = spec.bin_center(k).unwrap();
                prop_assert!(c > prev);
                prev = c;
            }
        }

        #[test]
        fn value_to_bin_round_trips_centers(num_bins in 2usize..40, lo in -100.0f64..100.0, width in 1e-3f64..1e3) {
            let spec = AttributeSpec::new("p", lo, lo + width, num_bins, Family::Position).unwrap();
            for k in 0..num_bins {
                let c = spec.bin_center(k).unwrap();
                prop_assert_eq!(spec.value_to_bin(c).unwrap(), k);
            }
        }

        #[test]
        fn relax_never_leaves_range(num_bins in 2usize..40, seed in 0u64..1000, hwf in 0.0f64..=0.5) {
            let spec = AttributeSpec::new("p", -2.0, 3.0, num_bins, Family::Density).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in 0..num_bins {
                let v = spec.relax(k, &mut rng, hwf).unwrap();
                prop_assert!(v >= spec.lo && v <= spec.hi);
            }
        }
    }
}
