//! The inner task loop in closed form: fit a per-pixel majority-class map
//! on a rendered training set (the exact empirical-risk minimizer among
//! constant-per-location predictors under 0-1 loss), score it with pooled
//! mean intersection-over-union against a target set, and package the whole
//! render-fit-score pipeline as a [`RewardEvaluator`].

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::attr::{AttributeSpace, AttributeVector, Family};
use crate::optim::{EvalError, RewardEvaluator};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scene::{
    render_dataset, ClassId, Dataset, LabelRaster, SceneAttributes, SceneConfig, SceneError,
};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("dataset must contain at least one raster")]
    EmptyDataset,
    #[error("raster size {got_h}x{got_w} does not match {want_h}x{want_w}")]
    SizeMismatch {
        got_h: usize,
        got_w: usize,
        want_h: usize,
        want_w: usize,
    },
    #[error("no class was predicted or present; nothing to score")]
    NoScoredClasses,
}

/// Per-location most-frequent-class predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityMap {
    raster: LabelRaster,
}

impl MajorityMap {
    pub fn raster(&self) -> &LabelRaster {
        &self.raster
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    pub fn width(&self) -> usize {
        self.raster.width()
    }
}

/// Fits the majority map: each cell predicts the most frequent class at
/// that location across the training set, ties resolved toward the lowest
/// class ID.
pub fn train_majority_map(train: &Dataset) -> Result<MajorityMap, TaskError> {
    if train.is_empty() {
        return Err(TaskError::EmptyDataset);
    }
    let h = train.height();
    let w = train.width();
    let n_classes = train
        .rasters()
        .iter()
        .flat_map(|r| r.cells().iter().copied())
        .max()
        .unwrap() as usize
        + 1;
    let mut counts = vec![0u32; h * w * n_classes];
    for raster in train.rasters() {
        for (cell, &class) in raster.cells().iter().enumerate() {
            counts[cell * n_classes + class as usize] += 1;
        }
    }
    let mut cells = Vec::with_capacity(h * w);
    for cell in 0..h * w {
        let slice = &counts[cell * n_classes..(cell + 1) * n_classes];
        let mut best = 0usize;
        for (class, &count) in slice.iter().enumerate() {
            if count > slice[best] {
                best = class;
            }
        }
        cells.push(best as ClassId);
    }
    Ok(MajorityMap {
        raster: LabelRaster::from_cells(h, w, cells),
    })
}

/// Pooled confusion counts; rows index the prediction, columns the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionAccumulator {
    dim: usize,
    counts: Vec<u64>,
}

impl ConfusionAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            counts: vec![0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, pred: ClassId, target: ClassId) {
        self.counts[pred as usize * self.dim + target as usize] += 1;
    }

    pub fn count(&self, pred: ClassId, target: ClassId) -> u64 {
        self.counts[pred as usize * self.dim + target as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Associative merge, so accumulation can run in parallel.
    pub fn merge(mut self, other: &ConfusionAccumulator) -> Self {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    /// Accumulates one raster pair.
    pub fn add_raster(&mut self, pred: &LabelRaster, target: &LabelRaster) {
        for (&p, &t) in pred.cells().iter().zip(target.cells()) {
            self.add(p, t);
        }
    }

    /// Intersection-over-union per class; `None` where the class neither
    /// occurs nor is predicted.
    pub fn iou_per_class(&self) -> Vec<Option<f64>> {
        (0..self.dim)
            .map(|c| {
                let tp = self.counts[c * self.dim + c];
                let pred_total: u64 = (0..self.dim).map(|t| self.counts[c * self.dim + t]).sum();
                let target_total: u64 = (0..self.dim).map(|p| self.counts[p * self.dim + c]).sum();
                let union = pred_total + target_total - tp;
                (union > 0).then(|| tp as f64 / union as f64)
            })
            .collect()
    }

    /// Mean IoU over classes that occur or are predicted.
    pub fn mean_iou(&self) -> Result<f64, TaskError> {
        let ious: Vec<f64> = self.iou_per_class().into_iter().flatten().collect();
        if ious.is_empty() {
            return Err(TaskError::NoScoredClasses);
        }
        Ok(ious.iter().sum::<f64>() / ious.len() as f64)
    }

    /// CSV rows `pred,target,count` with a header, nonzero cells only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pred,target,count\n");
        for p in 0..self.dim {
            for t in 0..self.dim {
                let c = self.counts[p * self.dim + t];
                if c > 0 {
                    out.push_str(&format!("{p},{t},{c}\n"));
                }
            }
        }
        out
    }
}

/// Pooled mean IoU of a constant prediction against every target raster.
pub fn miou(pred: &MajorityMap, targets: &Dataset) -> Result<f64, TaskError> {
    if targets.is_empty() {
        return Err(TaskError::EmptyDataset);
    }
    if pred.height() != targets.height() || pred.width() != targets.width() {
        return Err(TaskError::SizeMismatch {
            got_h: targets.height(),
            got_w: targets.width(),
            want_h: pred.height(),
            want_w: pred.width(),
        });
    }
    let dim = targets
        .rasters()
        .iter()
        .flat_map(|r| r.cells().iter().copied())
        .chain(pred.raster().cells().iter().copied())
        .max()
        .unwrap() as usize
        + 1;
    let confusion = targets
        .rasters()
        .par_iter()
        .fold(
            || ConfusionAccumulator::new(dim),
            |mut acc, target| {
                acc.add_raster(pred.raster(), target);
                acc
            },
        )
        .reduce(|| ConfusionAccumulator::new(dim), |a, b| a.merge(&b));
    confusion.mean_iou()
}

/// What one optimization-space coordinate means in scene terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrRole {
    LineOffset(ClassId),
    Interval(ClassId),
    Occurrence(ClassId),
    CameraX,
    CameraY,
    Illumination,
}

impl AttrRole {
    pub fn family(&self) -> Family {
        match self {
            AttrRole::LineOffset(_) => Family::Position,
            AttrRole::Interval(_) | AttrRole::Occurrence(_) => Family::Density,
            AttrRole::CameraX | AttrRole::CameraY | AttrRole::Illumination => Family::Environment,
        }
    }
}

impl std::fmt::Display for AttrRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttrRole::LineOffset(id) => write!(f, "offset:{id}"),
            AttrRole::Interval(id) => write!(f, "interval:{id}"),
            AttrRole::Occurrence(id) => write!(f, "occurrence:{id}"),
            AttrRole::CameraX => write!(f, "camera_x"),
            AttrRole::CameraY => write!(f, "camera_y"),
            AttrRole::Illumination => write!(f, "illumination"),
        }
    }
}

#[derive(Debug, Error)]
pub enum BindingError {
    #[error("binding has {got} roles for {expected} attributes")]
    LengthMismatch { got: usize, expected: usize },
    #[error("role {role} appears twice")]
    DuplicateRole { role: String },
    #[error("role {role} refers to a class missing from the scene config")]
    UnknownClass { role: String },
    #[error("attribute `{name}` has family {family}, but role {role} needs {needed}")]
    FamilyMismatch {
        name: String,
        family: &'static str,
        role: String,
        needed: &'static str,
    },
}

/// Maps each attribute-space coordinate onto a scene knob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneBinding {
    roles: Vec<AttrRole>,
}

impl SceneBinding {
    pub fn new(
        roles: Vec<AttrRole>,
        space: &AttributeSpace,
        config: &SceneConfig,
    ) -> Result<Self, BindingError> {
        if roles.len() != space.len() {
            return Err(BindingError::LengthMismatch {
                got: roles.len(),
                expected: space.len(),
            });
        }
        for (i, role) in roles.iter().enumerate() {
            for earlier in &roles[..i] {
                if earlier == role {
                    return Err(BindingError::DuplicateRole {
                        role: role.to_string(),
                    });
                }
            }
            let class = match role {
                AttrRole::LineOffset(id) | AttrRole::Interval(id) | AttrRole::Occurrence(id) => {
                    Some(*id)
                }
                _ => None,
            };
            if let Some(id) = class {
                if config.class(id).is_none() {
                    return Err(BindingError::UnknownClass {
                        role: role.to_string(),
                    });
                }
            }
            let spec = space.spec(i);
            if spec.family != role.family() {
                return Err(BindingError::FamilyMismatch {
                    name: spec.name.clone(),
                    family: spec.family.as_str(),
                    role: role.to_string(),
                    needed: role.family().as_str(),
                });
            }
        }
        Ok(Self { roles })
    }

    pub fn roles(&self) -> &[AttrRole] {
        &self.roles
    }

    /// Overlays the bound coordinates of `attrs` onto a base scene state.
    pub fn apply(&self, base: &SceneAttributes, attrs: &AttributeVector) -> SceneAttributes {
        let mut out = base.clone();
        for (role, &v) in self.roles.iter().zip(attrs.values()) {
            match role {
                AttrRole::LineOffset(id) => {
                    out.line_offset.insert(*id, v);
                }
                AttrRole::Interval(id) => {
                    out.interval.insert(*id, v);
                }
                AttrRole::Occurrence(id) => {
                    out.occurrence.insert(*id, v);
                }
                AttrRole::CameraX => out.camera_dx = v,
                AttrRole::CameraY => out.camera_dy = v,
                AttrRole::Illumination => out.illumination = v,
            }
        }
        out
    }
}

/// The full bi-level reward: render a training set from the candidate
/// attributes (with optional per-image relaxation jitter), fit the majority
/// map, and score pooled mean IoU on the held validation set. Pure given
/// `(attrs, seed)`.
pub struct SceneRewardEvaluator {
    config: SceneConfig,
    space: AttributeSpace,
    binding: SceneBinding,
    base: SceneAttributes,
    validation: Dataset,
    m_train: usize,
    half_width_frac: f64,
}

impl SceneRewardEvaluator {
    pub fn new(
        config: SceneConfig,
        space: AttributeSpace,
        binding: SceneBinding,
        base: SceneAttributes,
        validation: Dataset,
        m_train: usize,
        half_width_frac: f64,
    ) -> Result<Self, EvalError> {
        config.validate().map_err(wrap_scene)?;
        base.validate(&config).map_err(wrap_scene)?;
        if validation.is_empty() || m_train == 0 {
            return Err(EvalError::InvalidAttributes {
                detail: "validation set and training size must be nonempty".to_string(),
            });
        }
        if !(0.0..=0.5).contains(&half_width_frac) {
            return Err(EvalError::InvalidAttributes {
                detail: format!("half_width_frac {half_width_frac} outside [0, 0.5]"),
            });
        }
        Ok(Self {
            config,
            space,
            binding,
            base,
            validation,
            m_train,
            half_width_frac,
        })
    }

    pub fn space(&self) -> &AttributeSpace {
        &self.space
    }

    pub fn validation(&self) -> &Dataset {
        &self.validation
    }

    fn per_image_attrs(
        &self,
        attrs: &AttributeVector,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<SceneAttributes>, EvalError> {
        (0..self.m_train)
            .map(|_| {
                let mut jittered = attrs.clone();
                for (i, spec) in self.space.specs().iter().enumerate() {
                    let v = spec
                        .relax_value(attrs.get(i), rng, self.half_width_frac)
                        .map_err(|e| EvalError::Failed {
                            detail: e.to_string(),
                        })?;
                    jittered.set(i, v);
                }
                Ok(self.binding.apply(&self.base, &jittered))
            })
            .collect()
    }
}

fn wrap_scene(e: SceneError) -> EvalError {
    EvalError::Failed {
        detail: e.to_string(),
    }
}

impl RewardEvaluator for SceneRewardEvaluator {
    fn evaluate(&self, attrs: &AttributeVector, seed: u64) -> Result<f64, EvalError> {
        self.space
            .validate_vector(attrs)
            .map_err(|e| EvalError::InvalidAttributes {
                detail: e.to_string(),
            })?;
        let scene_attrs = self.binding.apply(&self.base, attrs);
        let per_image = if self.half_width_frac > 0.0 {
            let mut rng = rng_from_seed(derive_seed(seed, 2));
            Some(self.per_image_attrs(attrs, &mut rng)?)
        } else {
            None
        };
        let train = render_dataset(
            &self.config,
            &scene_attrs,
            self.m_train,
            derive_seed(seed, 1),
            per_image.as_deref(),
        )
        .map_err(wrap_scene)?;
        let map = train_majority_map(&train).map_err(|e| EvalError::Failed {
            detail: e.to_string(),
        })?;
        miou(&map, &self.validation).map_err(|e| EvalError::Failed {
            detail: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::AttributeSpec;
    use crate::scene::{make_target, DatasetMeta};

    fn raster(cells: Vec<ClassId>, w: usize) -> LabelRaster {
        let h = cells.len() / w;
        LabelRaster::from_cells(h, w, cells)
    }

    fn dataset(rasters: Vec<LabelRaster>) -> Dataset {
        let meta = DatasetMeta {
            attrs: crate::scene::tests::test_attrs(),
            seed: 0,
            images: rasters.len(),
            relaxed: false,
        };
        Dataset::new(rasters, meta).unwrap()
    }

    #[test]
    fn majority_of_identical_rasters_is_that_raster() {
        let r = raster(vec![0, 1, 2, 1], 2);
        let map = train_majority_map(&dataset(vec![r.clone(), r.clone(), r.clone()])).unwrap();
        assert_eq!(map.raster(), &r);
    }

    #[test]
    fn majority_tie_breaks_to_lowest_class() {
        let a = raster(vec![2, 0, 0, 0], 2);
        let b = raster(vec![5, 0, 0, 0], 2);
        let map = train_majority_map(&dataset(vec![a, b])).unwrap();
        assert_eq!(map.raster().get(0, 0), 2);
    }

    #[test]
    fn majority_is_order_invariant() {
        let a = raster(vec![1, 0, 2, 0], 2);
        let b = raster(vec![1, 1, 2, 2], 2);
        let c = raster(vec![0, 1, 2, 0], 2);
        let fwd = train_majority_map(&dataset(vec![a.clone(), b.clone(), c.clone()])).unwrap();
        let rev = train_majority_map(&dataset(vec![c, b, a])).unwrap();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn majority_minimizes_disagreement_exhaustively() {
        // Brute-force oracle: among all 3^4 constant-per-location maps on a
        // 2x2 raster, none beats the majority map's total 0-1 loss.
        let train = dataset(vec![
            raster(vec![0, 1, 2, 2], 2),
            raster(vec![0, 1, 1, 2], 2),
            raster(vec![1, 1, 2, 0], 2),
            raster(vec![0, 2, 2, 2], 2),
        ]);
        let map = train_majority_map(&train).unwrap();
        let loss = |cells: &[ClassId]| -> usize {
            train
                .rasters()
                .iter()
                .map(|r| {
                    r.cells()
                        .iter()
                        .zip(cells)
                        .filter(|(a, b)| a != b)
                        .count()
                })
                .sum()
        };
        let best = loss(map.raster().cells());
        for a in 0..3u8 {
            for b in 0..3u8 {
                for c in 0..3u8 {
                    for d in 0..3u8 {
                        assert!(loss(&[a, b, c, d]) >= best);
                    }
                }
            }
        }
    }

    #[test]
    fn majority_rejects_empty_dataset() {
        let meta = DatasetMeta {
            attrs: crate::scene::tests::test_attrs(),
            seed: 0,
            images: 0,
            relaxed: false,
        };
        assert!(Dataset::new(vec![], meta).is_err());
    }

    #[test]
    fn miou_hand_cases() {
        // Perfect overlap.
        let pred = MajorityMap {
            raster: raster(vec![0, 1, 1, 0], 2),
        };
        let targets = dataset(vec![raster(vec![0, 1, 1, 0], 2); 3]);
        assert_eq!(miou(&pred, &targets).unwrap(), 1.0);

        // Disjoint labels.
        let pred = MajorityMap {
            raster: raster(vec![0, 0, 0, 0], 2),
        };
        let targets = dataset(vec![raster(vec![1, 1, 2, 2], 2)]);
        assert_eq!(miou(&pred, &targets).unwrap(), 0.0);

        // Hand-computed confusion: pred all A, target half A half B.
        let pred = MajorityMap {
            raster: raster(vec![0, 0, 0, 0], 2),
        };
        let targets = dataset(vec![raster(vec![0, 0, 1, 1], 2)]);
        assert_eq!(miou(&pred, &targets).unwrap(), 0.25);
    }

    #[test]
    fn miou_pooled_matches_brute_force_recount() {
        let pred = MajorityMap {
            raster: raster(vec![0, 1, 2, 1, 0, 2], 3),
        };
        let targets = dataset(vec![
            raster(vec![0, 1, 1, 1, 0, 2], 3),
            raster(vec![2, 1, 2, 0, 0, 2], 3),
            raster(vec![0, 0, 2, 1, 1, 2], 3),
        ]);
        let got = miou(&pred, &targets).unwrap();

        // Independent recount straight from pixel pairs.
        let mut tp = [0u64; 3];
        let mut fp = [0u64; 3];
        let mut fn_ = [0u64; 3];
        for target in targets.rasters() {
            for (&p, &t) in pred.raster().cells().iter().zip(target.cells()) {
                if p == t {
                    tp[p as usize] += 1;
                } else {
                    fp[p as usize] += 1;
                    fn_[t as usize] += 1;
                }
            }
        }
        let mut sum = 0.0;
        let mut n = 0;
        for c in 0..3 {
            let union = tp[c] + fp[c] + fn_[c];
            if union > 0 {
                sum += tp[c] as f64 / union as f64;
                n += 1;
            }
        }
        assert!((got - sum / n as f64).abs() < 1e-12);
    }

    #[test]
    fn confusion_total_counts_scored_pixels() {
        let mut acc = ConfusionAccumulator::new(3);
        acc.add_raster(&raster(vec![0, 1, 2, 0], 2), &raster(vec![0, 1, 1, 2], 2));
        assert_eq!(acc.total(), 4);
        let merged = acc.clone().merge(&acc);
        assert_eq!(merged.total(), 8);
        let csv = acc.to_csv();
        assert!(csv.starts_with("pred,target,count\n"));
        assert!(csv.contains("0,0,1"));
    }

    fn bench_space() -> AttributeSpace {
        AttributeSpace::new(vec![
            AttributeSpec::new("tree_offset", 0.0, 20.0, 10, Family::Position).unwrap(),
            AttributeSpec::new("person_offset", 0.0, 20.0, 10, Family::Position).unwrap(),
            AttributeSpec::new("tree_interval", 6.0, 48.0, 10, Family::Density).unwrap(),
            AttributeSpec::new("person_occurrence", 0.0, 1.0, 10, Family::Density).unwrap(),
            AttributeSpec::new("illumination", 0.0, 1.0, 10, Family::Environment).unwrap(),
        ])
        .unwrap()
    }

    fn bench_binding(space: &AttributeSpace, config: &SceneConfig) -> SceneBinding {
        SceneBinding::new(
            vec![
                AttrRole::LineOffset(3),
                AttrRole::LineOffset(4),
                AttrRole::Interval(3),
                AttrRole::Occurrence(4),
                AttrRole::Illumination,
            ],
            space,
            config,
        )
        .unwrap()
    }

    fn bench_evaluator(hidden: &AttributeVector, hwf: f64) -> SceneRewardEvaluator {
        let config = crate::scene::tests::test_config();
        let space = bench_space();
        let binding = bench_binding(&space, &config);
        let base = crate::scene::tests::test_attrs();
        let hidden_scene = binding.apply(&base, hidden);
        let (validation, _) = make_target(&config, &hidden_scene, 30, 30, 555).unwrap();
        SceneRewardEvaluator::new(config, space, binding, base, validation, 60, hwf).unwrap()
    }

    #[test]
    fn binding_rejects_family_and_class_mismatches() {
        let config = crate::scene::tests::test_config();
        let space = bench_space();
        let wrong_family = SceneBinding::new(
            vec![
                AttrRole::Interval(3), // position-family attr bound to density role
                AttrRole::LineOffset(4),
                AttrRole::Interval(3),
                AttrRole::Occurrence(4),
                AttrRole::Illumination,
            ],
            &space,
            &config,
        );
        assert!(matches!(
            wrong_family,
            Err(BindingError::FamilyMismatch { .. })
        ));
        let unknown_class = SceneBinding::new(
            vec![
                AttrRole::LineOffset(99),
                AttrRole::LineOffset(4),
                AttrRole::Interval(3),
                AttrRole::Occurrence(4),
                AttrRole::Illumination,
            ],
            &space,
            &config,
        );
        assert!(matches!(
            unknown_class,
            Err(BindingError::UnknownClass { .. })
        ));
    }

    #[test]
    fn evaluator_is_pure_and_bounded() {
        let hidden = AttributeVector::new(vec![8.0, 2.0, 12.0, 0.7, 0.9]);
        let evaluator = bench_evaluator(&hidden, 0.5);
        let a = evaluator.evaluate(&hidden, 31).unwrap();
        let b = evaluator.evaluate(&hidden, 31).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((0.0..=1.0).contains(&a));
        let c = evaluator.evaluate(&hidden, 32).unwrap();
        assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn evaluator_rejects_out_of_range_attrs() {
        let hidden = AttributeVector::new(vec![8.0, 2.0, 12.0, 0.7, 0.9]);
        let evaluator = bench_evaluator(&hidden, 0.0);
        let bad = AttributeVector::new(vec![8.0, 2.0, 12.0, 1.7, 0.9]);
        assert!(matches!(
            evaluator.evaluate(&bad, 0),
            Err(EvalError::InvalidAttributes { .. })
        ));
    }

    #[test]
    fn hidden_attrs_beat_maximally_distant_attrs() {
        let space = bench_space();
        let hidden = AttributeVector::new(vec![8.0, 2.0, 12.0, 0.7, 0.9]);
        let far = AttributeVector::new(
            space
                .specs()
                .iter()
                .zip(hidden.values())
                .map(|(s, &v)| if (v - s.lo).abs() > (v - s.hi).abs() { s.lo } else { s.hi })
                .collect(),
        );
        let evaluator = bench_evaluator(&hidden, 0.0);
        for seed in 0..10u64 {
            let near = evaluator.evaluate(&hidden, seed).unwrap();
            let distant = evaluator.evaluate(&far, seed).unwrap();
            assert!(
                near > distant,
                "seed {seed}: hidden {near} <= distant {distant}"
            );
        }
    }

    #[test]
    fn validation_and_test_scores_rank_correlate() {
        // Monte-Carlo: scoring on the validation target and on the test
        // target should order candidate vectors similarly.
        let config = crate::scene::tests::test_config();
        let space = bench_space();
        let binding = bench_binding(&space, &config);
        let base = crate::scene::tests::test_attrs();
        let hidden = AttributeVector::new(vec![8.0, 2.0, 12.0, 0.7, 0.9]);
        let hidden_scene = binding.apply(&base, &hidden);
        let (validation, test) = make_target(&config, &hidden_scene, 30, 30, 777).unwrap();
        let val_eval = SceneRewardEvaluator::new(
            config.clone(),
            space.clone(),
            binding.clone(),
            base.clone(),
            validation,
            60,
            0.0,
        )
        .unwrap();
        let test_eval =
            SceneRewardEvaluator::new(config, space.clone(), binding, base, test, 60, 0.0)
                .unwrap();

        let mut rng = rng_from_seed(4242);
        let mut val_scores = Vec::new();
        let mut test_scores = Vec::new();
        for i in 0..20 {
            let attrs = space.sample_uniform(&mut rng);
            val_scores.push(val_eval.evaluate(&attrs, 1000 + i).unwrap());
            test_scores.push(test_eval.evaluate(&attrs, 1000 + i).unwrap());
        }
        let rank = |v: &[f64]| -> Vec<f64> {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
            let mut r = vec![0.0; v.len()];
            for (pos, &i) in idx.iter().enumerate() {
                r[i] = pos as f64;
            }
            r
        };
        let ra = rank(&val_scores);
        let rb = rank(&test_scores);
        let n = ra.len() as f64;
        let mean = (n - 1.0) / 2.0;
        let mut cov = 0.0;
        let mut var_a = 0.0;
        let mut var_b = 0.0;
        for i in 0..ra.len() {
            cov += (ra[i] - mean) * (rb[i] - mean);
            var_a += (ra[i] - mean).powi(2);
            var_b += (rb[i] - mean).powi(2);
        }
        let spearman = cov / (var_a.sqrt() * var_b.sqrt());
        assert!(spearman > 0.0, "rank correlation {spearman}");
    }
}
