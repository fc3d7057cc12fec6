//! Black-box attribute optimization over a procedural label-raster scene.
//!
//! The crate learns simulator attributes that make a rendered dataset match
//! a hidden target: a small MLP maps random attribute vectors to categorical
//! distributions over discretized attribute values (with bounded relaxation
//! jitter restoring intra-dataset diversity), groups of correlated
//! attributes are optimized jointly by coordinate descent, and the reward is
//! the mean IoU of a closed-form per-pixel majority model trained on the
//! rendered data and scored on the target's validation split.
//!
//! Modules:
//! - [`attr`]: attribute spaces, discretization, relaxation, group plans
//! - [`policy`]: the MLP policy with per-attribute softmax heads, exact
//!   log-probability gradients, Adam, and the reward baseline
//! - [`optim`]: coordinate-descent, attribute-descent, random-search and
//!   exhaustive runners plus budget accounting
//! - [`scene`]: the line-based label-raster generator
//! - [`eval`]: majority-map fitting, pooled mean IoU, and the scene reward
//! - [`synthetic`]: table-based toy rewards and the counting evaluator
//! - [`io`]: bit-exact, versioned, checksummed checkpoints
//! - [`rng`]: seed derivation and resumable RNG snapshots

pub mod attr;
pub mod eval;
pub mod io;
pub mod optim;
pub mod policy;
pub mod rng;
pub mod scene;
pub mod synthetic;

pub use attr::{
    AttrError, AttributeSpace, AttributeSpec, AttributeVector, BinIndexVector, Family, GroupPlan,
    PlanViolation,
};
pub use eval::{
    miou, train_majority_map, AttrRole, ConfusionAccumulator, MajorityMap, SceneBinding,
    SceneRewardEvaluator, TaskError,
};
pub use optim::{
    attribute_descent, budget_report, drive, exhaustive_search, optimize_group, random_search,
    run_sdr, BudgetReport, DescentRunner, EvalError, ExhaustiveRunner, GroupMode, GroupResult,
    MethodRunner, RandomSearchRunner, RewardEvaluator, RunError, RunRecord, SdrConfig, SdrRunner,
    SpaceSizeInputs, UpdateEntry, DEFAULT_ENUMERATION_CAP,
};
pub use policy::{
    reinforce_update, AdamState, EmaBaseline, Episode, MlpPolicy, PolicyError, PolicyGrad,
    ProbMatrix,
};
pub use scene::{
    make_target, render_dataset, render_scene, ClassId, ClassSpec, Dataset, DatasetMeta,
    LabelRaster, SceneAttributes, SceneConfig, SceneError,
};
pub use synthetic::{ConstantReward, CountingEvaluator, FnReward, TableReward};
