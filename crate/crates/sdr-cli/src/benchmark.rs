//! Builtin benchmarks: line-based scene tasks at several sizes plus
//! deterministic table toys with known optima. A benchmark bundles the
//! attribute search space, its default group plan, and everything needed to
//! build the reward evaluator.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use sdr_core::{
    make_target, AttrRole, AttributeSpace, AttributeSpec, AttributeVector, ClassId, ClassSpec,
    Family, GroupPlan, RewardEvaluator, SceneAttributes, SceneBinding, SceneConfig,
    SceneRewardEvaluator, TableReward,
};

use crate::config::{AttributeEntry, ExperimentConfig};

/// Scene-task half of a benchmark: geometry, role bindings, the hidden
/// target attributes, and dataset sizes.
#[derive(Debug, Clone)]
pub struct SceneBenchmark {
    pub scene: SceneConfig,
    pub roles: Vec<AttrRole>,
    pub base: SceneAttributes,
    /// Target attribute vector; diagnostics only, never shown to a method.
    pub hidden: AttributeVector,
    /// Full scene state the target datasets are rendered from. Survives
    /// family drops untouched: restricting the search space does not change
    /// the data being matched.
    pub target_attrs: SceneAttributes,
    pub m_train: usize,
    pub m_val: usize,
    pub m_test: usize,
    pub target_seed: u64,
}

#[derive(Debug, Clone)]
pub enum BenchmarkKind {
    Scene(SceneBenchmark),
    Table(Arc<TableReward>),
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: String,
    pub space: AttributeSpace,
    pub plan: GroupPlan,
    pub kind: BenchmarkKind,
}

pub const BENCHMARK_NAMES: [&str; 6] = [
    "line11",
    "line23",
    "line_coupled",
    "toy_separable",
    "toy_correlated",
    "toy3x4",
];

impl Benchmark {
    pub fn builtin(name: &str) -> Result<Benchmark> {
        match name {
            "line11" => Ok(line11()),
            "line23" => Ok(line23()),
            "line_coupled" => Ok(line_coupled()),
            "toy_separable" => Ok(toy_separable()),
            "toy_correlated" => Ok(toy_correlated()),
            "toy3x4" => Ok(toy3x4()),
            other => bail!(
                "unknown benchmark `{other}` (available: {})",
                BENCHMARK_NAMES.join(", ")
            ),
        }
    }

    /// Builtin benchmark with config overrides and any custom attribute
    /// space applied.
    pub fn from_config(config: &ExperimentConfig) -> Result<Benchmark> {
        let mut benchmark = Self::builtin(&config.experiment.benchmark)?;
        if !config.attributes.is_empty() {
            benchmark = benchmark.with_custom_space(&config.attributes)?;
        }
        let o = &config.benchmark_overrides;
        if let BenchmarkKind::Scene(scene) = &mut benchmark.kind {
            if let Some(m) = o.m_train {
                scene.m_train = m;
            }
            if let Some(m) = o.m_val {
                scene.m_val = m;
            }
            if let Some(m) = o.m_test {
                scene.m_test = m;
            }
            if let Some(s) = o.target_seed {
                scene.target_seed = s;
            }
        }
        if let Some(groups) = &o.groups {
            benchmark.plan = GroupPlan::new(groups.clone(), benchmark.space.len())
                .context("config key `benchmark_overrides.groups`")?;
        }
        Ok(benchmark)
    }

    /// Builds the reward evaluator. `half_width_frac` is the per-image
    /// relaxation amplitude; pass 0 to disable relaxation.
    pub fn evaluator(&self, half_width_frac: f64) -> Result<Arc<dyn RewardEvaluator + Send + Sync>> {
        match &self.kind {
            BenchmarkKind::Table(table) => Ok(table.clone()),
            BenchmarkKind::Scene(sb) => {
                let binding = SceneBinding::new(sb.roles.clone(), &self.space, &sb.scene)
                    .map_err(|e| anyhow!("benchmark binding: {e}"))?;
                let target_attrs = binding.apply(&sb.base, &sb.hidden);
                let (validation, _test) = make_target(
                    &sb.scene,
                    &target_attrs,
                    sb.m_val,
                    sb.m_test,
                    sb.target_seed,
                )?;
                let evaluator = SceneRewardEvaluator::new(
                    sb.scene.clone(),
                    self.space.clone(),
                    binding,
                    sb.base.clone(),
                    validation,
                    sb.m_train,
                    half_width_frac,
                )
                .map_err(|e| anyhow!("evaluator construction: {e}"))?;
                Ok(Arc::new(evaluator))
            }
        }
    }

    /// Removes whole attribute families from the search space, pinning the
    /// dropped scene knobs at the midpoint of their former ranges.
    pub fn with_dropped_families(&self, drop: &[Family]) -> Result<Benchmark> {
        let sb = match &self.kind {
            BenchmarkKind::Scene(sb) => sb,
            BenchmarkKind::Table(_) => {
                bail!("family drops need a scene benchmark, `{}` is a table toy", self.name)
            }
        };
        let mut kept = Vec::new();
        let mut new_specs = Vec::new();
        let mut new_roles = Vec::new();
        let mut new_hidden = Vec::new();
        let mut base = sb.base.clone();
        for (i, spec) in self.space.specs().iter().enumerate() {
            if drop.contains(&spec.family) {
                // Pin at mid-range through the role.
                let mid = (spec.lo + spec.hi) / 2.0;
                apply_role(&mut base, sb.roles[i], mid);
            } else {
                kept.push(i);
                new_specs.push(spec.clone());
                new_roles.push(sb.roles[i]);
                new_hidden.push(sb.hidden.get(i));
            }
        }
        if new_specs.is_empty() {
            bail!("dropping {drop:?} would leave no attributes");
        }
        let space = AttributeSpace::new(new_specs)?;
        let remap: BTreeMap<usize, usize> =
            kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut groups = Vec::new();
        for group in self.plan.groups() {
            let mapped: Vec<usize> = group.iter().filter_map(|i| remap.get(i).copied()).collect();
            if !mapped.is_empty() {
                groups.push(mapped);
            }
        }
        let plan = GroupPlan::new(groups, space.len())?;
        Ok(Benchmark {
            name: format!("{}-drop", self.name),
            space,
            plan,
            kind: BenchmarkKind::Scene(SceneBenchmark {
                base,
                hidden: AttributeVector::new(new_hidden),
                ..sb.clone()
            }),
        })
    }

    /// Replaces the search space with attributes defined in the config; the
    /// hidden target becomes the base scene's own values for those roles.
    fn with_custom_space(&self, entries: &[AttributeEntry]) -> Result<Benchmark> {
        let sb = match &self.kind {
            BenchmarkKind::Scene(sb) => sb,
            BenchmarkKind::Table(_) => {
                bail!("custom attributes need a scene benchmark, `{}` is a table toy", self.name)
            }
        };
        let mut specs = Vec::new();
        let mut roles = Vec::new();
        let mut hidden = Vec::new();
        for (i, entry) in entries.iter().enumerate() {
            let key = format!("attributes[{i}]");
            let family: Family = entry
                .family
                .parse()
                .with_context(|| format!("config key `{key}.family`"))?;
            let role = parse_role(&entry.role, &sb.scene)
                .with_context(|| format!("config key `{key}.role`"))?;
            let spec = AttributeSpec::new(&entry.name, entry.lo, entry.hi, entry.num_bins, family)
                .with_context(|| format!("config key `{key}`"))?;
            if role.family() != family {
                bail!(
                    "config key `{key}`: role {role} implies family {}, not {}",
                    role.family().as_str(),
                    family.as_str()
                );
            }
            let target = role_value(&sb.base, role);
            if !(entry.lo..=entry.hi).contains(&target) {
                bail!(
                    "config key `{key}`: the scene's value {target} for {role} lies outside \
                     [{}, {}]",
                    entry.lo,
                    entry.hi
                );
            }
            specs.push(spec);
            roles.push(role);
            hidden.push(target);
        }
        let space = AttributeSpace::new(specs)?;
        let plan = family_plan(&space);
        Ok(Benchmark {
            name: format!("{}-custom", self.name),
            space,
            plan,
            kind: BenchmarkKind::Scene(SceneBenchmark {
                roles,
                hidden: AttributeVector::new(hidden),
                ..sb.clone()
            }),
        })
    }

    /// Exact best score by enumeration, for table benchmarks.
    pub fn oracle_best(&self) -> Option<f64> {
        match &self.kind {
            BenchmarkKind::Table(table) => Some(table.enumerate_best().1),
            BenchmarkKind::Scene(_) => None,
        }
    }
}

/// One group per family, ordered position, density, environment.
pub fn family_plan(space: &AttributeSpace) -> GroupPlan {
    let mut groups = Vec::new();
    for family in [Family::Position, Family::Density, Family::Environment] {
        let group: Vec<usize> = space
            .specs()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.family == family)
            .map(|(i, _)| i)
            .collect();
        if !group.is_empty() {
            groups.push(group);
        }
    }
    GroupPlan::new(groups, space.len()).expect("family plan partitions the space")
}

fn apply_role(attrs: &mut SceneAttributes, role: AttrRole, value: f64) {
    match role {
        AttrRole::LineOffset(id) => {
            attrs.line_offset.insert(id, value);
        }
        AttrRole::Interval(id) => {
            attrs.interval.insert(id, value);
        }
        AttrRole::Occurrence(id) => {
            attrs.occurrence.insert(id, value);
        }
        AttrRole::CameraX => attrs.camera_dx = value,
        AttrRole::CameraY => attrs.camera_dy = value,
        AttrRole::Illumination => attrs.illumination = value,
    }
}

fn role_value(attrs: &SceneAttributes, role: AttrRole) -> f64 {
    match role {
        AttrRole::LineOffset(id) => attrs.line_offset.get(&id).copied().unwrap_or(0.0),
        AttrRole::Interval(id) => attrs.interval.get(&id).copied().unwrap_or(1.0),
        AttrRole::Occurrence(id) => attrs.occurrence.get(&id).copied().unwrap_or(1.0),
        AttrRole::CameraX => attrs.camera_dx,
        AttrRole::CameraY => attrs.camera_dy,
        AttrRole::Illumination => attrs.illumination,
    }
}

/// Parses `offset:<class>`, `interval:<class>`, `occurrence:<class>`,
/// `camera_x`, `camera_y`, or `illumination`; classes go by name.
fn parse_role(text: &str, scene: &SceneConfig) -> Result<AttrRole> {
    let class_by_name = |name: &str| -> Result<ClassId> {
        scene
            .classes
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.id)
            .ok_or_else(|| anyhow!("no class named `{name}` in the scene"))
    };
    if let Some(rest) = text.strip_prefix("offset:") {
        return Ok(AttrRole::LineOffset(class_by_name(rest)?));
    }
    if let Some(rest) = text.strip_prefix("interval:") {
        return Ok(AttrRole::Interval(class_by_name(rest)?));
    }
    if let Some(rest) = text.strip_prefix("occurrence:") {
        return Ok(AttrRole::Occurrence(class_by_name(rest)?));
    }
    match text {
        "camera_x" => Ok(AttrRole::CameraX),
        "camera_y" => Ok(AttrRole::CameraY),
        "illumination" => Ok(AttrRole::Illumination),
        other => Err(anyhow!(
            "unknown role `{other}` (expected offset:<class>, interval:<class>, \
             occurrence:<class>, camera_x, camera_y, or illumination)"
        )),
    }
}

// Class ids for the desk scene.
const BUILDING: ClassId = 2;
const FENCE: ClassId = 3;
const TREE: ClassId = 4;
const CAR: ClassId = 5;
const BICYCLE: ClassId = 6;
const POLE: ClassId = 7;
const PERSON: ClassId = 8;

/// 64x96 street strip: road band across the middle, seven placeable
/// classes on lines below it, painted far-to-near.
pub fn desk_scene() -> SceneConfig {
    let class = |id, name: &str, h, w, jitter, priority| ClassSpec {
        id,
        name: name.to_string(),
        footprint_h: h,
        footprint_w: w,
        size_jitter: jitter,
        priority,
    };
    SceneConfig {
        height: 64,
        width: 96,
        background_id: 0,
        background_name: "background".to_string(),
        road_id: 1,
        road_name: "road".to_string(),
        road_rows: (24, 32),
        classes: vec![
            class(BUILDING, "building", 12, 14, 0.10, 1),
            class(FENCE, "fence", 3, 10, 0.10, 2),
            class(TREE, "tree", 7, 5, 0.15, 3),
            class(CAR, "car", 5, 9, 0.10, 4),
            class(BICYCLE, "bicycle", 3, 4, 0.10, 5),
            class(POLE, "pole", 9, 2, 0.05, 6),
            class(PERSON, "person", 5, 3, 0.10, 7),
        ],
        visibility_floor: 0.5,
    }
}

fn desk_base() -> SceneAttributes {
    let mut line_offset = BTreeMap::new();
    let mut interval = BTreeMap::new();
    for (id, offset, gap) in [
        (BUILDING, 20.0, 22.0),
        (FENCE, 12.0, 14.0),
        (TREE, 8.0, 13.0),
        (CAR, 1.0, 16.0),
        (BICYCLE, 5.0, 11.0),
        (POLE, 7.0, 12.0),
        (PERSON, 3.0, 9.0),
    ] {
        line_offset.insert(id, offset);
        interval.insert(id, gap);
    }
    SceneAttributes {
        line_offset,
        interval,
        occurrence: BTreeMap::new(),
        camera_dx: 0.0,
        camera_dy: 0.0,
        illumination: 1.0,
    }
}

fn spec(name: &str, lo: f64, hi: f64, family: Family) -> AttributeSpec {
    AttributeSpec::new(name, lo, hi, 10, family).expect("valid builtin spec")
}

/// Default benchmark: 11 attributes over 4 classes, grouped by family.
/// Hidden values sit off bin centers on purpose, so relaxation has signal
/// to recover.
fn line11() -> Benchmark {
    let space = AttributeSpace::new(vec![
        spec("building_offset", 0.0, 28.0, Family::Position),
        spec("tree_offset", 0.0, 28.0, Family::Position),
        spec("person_offset", 0.0, 28.0, Family::Position),
        spec("car_offset", 0.0, 28.0, Family::Position),
        spec("building_interval", 10.0, 52.0, Family::Density),
        spec("car_interval", 8.0, 40.0, Family::Density),
        spec("tree_occurrence", 0.0, 1.0, Family::Density),
        spec("person_occurrence", 0.0, 1.0, Family::Density),
        spec("illumination", 0.0, 1.0, Family::Environment),
        spec("camera_dx", -6.0, 6.0, Family::Environment),
        spec("camera_dy", -4.0, 4.0, Family::Environment),
    ])
    .expect("line11 space");
    let roles = vec![
        AttrRole::LineOffset(BUILDING),
        AttrRole::LineOffset(TREE),
        AttrRole::LineOffset(PERSON),
        AttrRole::LineOffset(CAR),
        AttrRole::Interval(BUILDING),
        AttrRole::Interval(CAR),
        AttrRole::Occurrence(TREE),
        AttrRole::Occurrence(PERSON),
        AttrRole::Illumination,
        AttrRole::CameraX,
        AttrRole::CameraY,
    ];
    let hidden = AttributeVector::new(vec![
        18.9, 7.3, 2.2, 0.9, 24.5, 14.2, 0.83, 0.62, 0.87, 1.7, -0.8,
    ]);
    let plan = family_plan(&space);
    Benchmark {
        name: "line11".to_string(),
        space,
        plan,
        kind: BenchmarkKind::Scene(SceneBenchmark {
            scene: desk_scene(),
            roles,
            base: desk_base(),
            hidden,
            m_train: 180,
            m_val: 40,
            m_test: 40,
            target_seed: 9001,
        }),
    }
}

/// Full benchmark: 23 attributes over all seven classes, six groups
/// (positions together, correlated density pairs together, environment
/// together).
fn line23() -> Benchmark {
    let space = AttributeSpace::new(vec![
        spec("building_offset", 0.0, 28.0, Family::Position),
        spec("fence_offset", 0.0, 28.0, Family::Position),
        spec("tree_offset", 0.0, 28.0, Family::Position),
        spec("bicycle_offset", 0.0, 28.0, Family::Position),
        spec("person_offset", 0.0, 28.0, Family::Position),
        spec("pole_offset", 0.0, 28.0, Family::Position),
        spec("car_offset", 0.0, 28.0, Family::Position),
        spec("building_interval", 10.0, 52.0, Family::Density),
        spec("fence_interval", 6.0, 36.0, Family::Density),
        spec("tree_interval", 6.0, 36.0, Family::Density),
        spec("bicycle_interval", 5.0, 30.0, Family::Density),
        spec("person_interval", 5.0, 30.0, Family::Density),
        spec("pole_interval", 6.0, 36.0, Family::Density),
        spec("car_interval", 8.0, 40.0, Family::Density),
        spec("building_occurrence", 0.0, 1.0, Family::Density),
        spec("fence_occurrence", 0.0, 1.0, Family::Density),
        spec("tree_occurrence", 0.0, 1.0, Family::Density),
        spec("bicycle_occurrence", 0.0, 1.0, Family::Density),
        spec("person_occurrence", 0.0, 1.0, Family::Density),
        spec("car_occurrence", 0.0, 1.0, Family::Density),
        spec("illumination", 0.0, 1.0, Family::Environment),
        spec("camera_dx", -6.0, 6.0, Family::Environment),
        spec("camera_dy", -4.0, 4.0, Family::Environment),
    ])
    .expect("line23 space");
    let roles = vec![
        AttrRole::LineOffset(BUILDING),
        AttrRole::LineOffset(FENCE),
        AttrRole::LineOffset(TREE),
        AttrRole::LineOffset(BICYCLE),
        AttrRole::LineOffset(PERSON),
        AttrRole::LineOffset(POLE),
        AttrRole::LineOffset(CAR),
        AttrRole::Interval(BUILDING),
        AttrRole::Interval(FENCE),
        AttrRole::Interval(TREE),
        AttrRole::Interval(BICYCLE),
        AttrRole::Interval(PERSON),
        AttrRole::Interval(POLE),
        AttrRole::Interval(CAR),
        AttrRole::Occurrence(BUILDING),
        AttrRole::Occurrence(FENCE),
        AttrRole::Occurrence(TREE),
        AttrRole::Occurrence(BICYCLE),
        AttrRole::Occurrence(PERSON),
        AttrRole::Occurrence(CAR),
        AttrRole::Illumination,
        AttrRole::CameraX,
        AttrRole::CameraY,
    ];
    let hidden = AttributeVector::new(vec![
        19.6, 11.3, 7.8, 4.6, 2.3, 6.1, 0.8, // offsets
        23.9, 13.2, 12.6, 10.4, 8.7, 11.8, 15.3, // intervals
        0.92, 0.77, 0.81, 0.58, 0.66, 0.73, // occurrences
        0.88, 1.3, -0.7, // environment
    ]);
    // Same-class interval and occurrence are correlated; keep them together.
    let plan = GroupPlan::new(
        vec![
            vec![0, 1, 2, 3, 4, 5, 6],
            vec![7, 14, 8, 15],
            vec![9, 16, 10, 17],
            vec![11, 18, 12],
            vec![13, 19],
            vec![20, 21, 22],
        ],
        23,
    )
    .expect("line23 plan");
    Benchmark {
        name: "line23".to_string(),
        space,
        plan,
        kind: BenchmarkKind::Scene(SceneBenchmark {
            scene: desk_scene(),
            roles,
            base: desk_base(),
            hidden,
            m_train: 180,
            m_val: 40,
            m_test: 40,
            target_seed: 9001,
        }),
    }
}

/// Two coupled position attributes: the tree line paints over the building
/// line, so a misplaced tree erases the building band. Only the scored
/// pair, road, and background appear in the scene.
fn line_coupled() -> Benchmark {
    let space = AttributeSpace::new(vec![
        spec("building_offset", 0.0, 24.0, Family::Position),
        spec("tree_offset", 0.0, 24.0, Family::Position),
    ])
    .expect("line_coupled space");
    let roles = vec![AttrRole::LineOffset(BUILDING), AttrRole::LineOffset(TREE)];
    let mut base = desk_base();
    for id in [FENCE, CAR, BICYCLE, POLE, PERSON] {
        base.occurrence.insert(id, 0.0);
    }
    base.interval.insert(BUILDING, 20.0);
    base.interval.insert(TREE, 12.0);
    let hidden = AttributeVector::new(vec![15.7, 2.6]);
    Benchmark {
        name: "line_coupled".to_string(),
        space: space.clone(),
        plan: GroupPlan::new(vec![vec![0, 1]], 2).expect("joint plan"),
        kind: BenchmarkKind::Scene(SceneBenchmark {
            scene: desk_scene(),
            roles,
            base,
            hidden,
            m_train: 60,
            m_val: 30,
            m_test: 30,
            target_seed: 7171,
        }),
    }
}

fn toy_space(bins: &[usize]) -> AttributeSpace {
    AttributeSpace::new(
        bins.iter()
            .enumerate()
            .map(|(i, &k)| {
                AttributeSpec::new(format!("t{i}"), 0.0, 1.0, k, Family::Position)
                    .expect("toy spec")
            })
            .collect(),
    )
    .expect("toy space")
}

/// Three independent 4-bin tables; the optimum is the per-table argmaxes.
fn toy_separable() -> Benchmark {
    let space = toy_space(&[4, 4, 4]);
    let table = TableReward::separable(
        space.clone(),
        &[
            vec![0.2, 0.9, 0.3, 0.1],
            vec![0.1, 0.2, 0.8, 0.3],
            vec![0.3, 0.1, 0.2, 0.95],
        ],
    );
    Benchmark {
        name: "toy_separable".to_string(),
        plan: GroupPlan::singletons(space.len()),
        space,
        kind: BenchmarkKind::Table(Arc::new(table)),
    }
}

/// Graded bonus only when both bins agree; one-at-a-time search stalls on
/// whatever diagonal cell the starting context selects.
fn toy_correlated() -> Benchmark {
    let space = toy_space(&[4, 4]);
    let table = TableReward::correlated_equal_bins(space.clone(), 0.05, 0.6);
    Benchmark {
        name: "toy_correlated".to_string(),
        plan: GroupPlan::new(vec![vec![0, 1]], 2).expect("joint plan"),
        space,
        kind: BenchmarkKind::Table(Arc::new(table)),
    }
}

/// 64-cell deterministic toy: separable backbone plus a pairwise bonus, so
/// the optimum is a single coupled cell.
fn toy3x4() -> Benchmark {
    let space = toy_space(&[4, 4, 4]);
    let t0 = [0.15, 0.70, 0.35, 0.10];
    let t1 = [0.20, 0.10, 0.65, 0.30];
    let t2 = [0.25, 0.05, 0.30, 0.75];
    let mut table = Vec::with_capacity(64);
    for b0 in 0..4 {
        for b1 in 0..4 {
            for b2 in 0..4 {
                let mut r = (t0[b0] + t1[b1] + t2[b2]) / 3.0;
                if b0 == 1 && b1 == 2 {
                    r += 0.15;
                }
                table.push(r);
            }
        }
    }
    Benchmark {
        name: "toy3x4".to_string(),
        plan: GroupPlan::new(vec![vec![0, 1, 2]], 3).expect("single group"),
        space: space.clone(),
        kind: BenchmarkKind::Table(Arc::new(TableReward::new(space, table))),
    }
}
