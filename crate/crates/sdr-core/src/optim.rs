//! Outer optimization loops over a black-box reward: group-wise coordinate
//! descent driven by a categorical policy (with relaxed discrete values at
//! the simulator boundary), the attribute-descent and random-search
//! baselines, exhaustive enumeration for oracle checks, and evaluation
//! budget accounting.
//!
//! Every method is a step-based runner whose full state can be snapshotted
//! and restored, so interrupted runs continue bit-exactly.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::attr::{AttrError, AttributeSpace, AttributeVector, GroupPlan, PlanViolation};
use crate::policy::{
    reinforce_update, AdamState, EmaBaseline, Episode, MlpPolicy, PolicyError,
};
use crate::rng::{derive_seed, rng_from_seed, RngState};

/// Error raised by a reward evaluator for a single call.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid attributes: {detail}")]
    InvalidAttributes { detail: String },
    #[error("evaluation failed: {detail}")]
    Failed { detail: String },
}

/// A black-box score in [0, 1] for one attribute vector. One call costs one
/// evaluation unit; implementations must be pure given `(attrs, seed)`.
pub trait RewardEvaluator: Sync {
    fn evaluate(&self, attrs: &AttributeVector, seed: u64) -> Result<f64, EvalError>;
}

impl<E: RewardEvaluator + ?Sized> RewardEvaluator for &E {
    fn evaluate(&self, attrs: &AttributeVector, seed: u64) -> Result<f64, EvalError> {
        (**self).evaluate(attrs, seed)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("evaluator failed on {attrs:?}: {source}")]
    Evaluator {
        attrs: AttributeVector,
        #[source]
        source: EvalError,
    },
    #[error("evaluator returned score {score} outside [0, 1] for {attrs:?}")]
    ScoreOutOfRange { attrs: AttributeVector, score: f64 },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Attr(#[from] AttrError),
    #[error(transparent)]
    Plan(#[from] PlanViolation),
    #[error("bin grid has {cells} combinations, above the enumeration cap {cap}")]
    EnumerationTooLarge { cells: f64, cap: u64 },
    #[error("invalid configuration: {detail}")]
    BadConfig { detail: String },
}

/// Tunables for the policy-gradient coordinate descent loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrConfig {
    /// Attribute vectors sampled and evaluated per policy update.
    pub samples_per_update: usize,
    /// Policy updates spent on each group before moving on.
    pub updates_per_group: usize,
    pub learning_rate: f64,
    /// Relaxation jitter amplitude in bin widths; consumed where datasets
    /// are rendered, recorded here so runs carry their own provenance.
    pub half_width_frac: f64,
    pub hidden_dims: Vec<usize>,
    pub baseline_decay: f64,
    /// Sweeps over the whole group sequence.
    pub passes: usize,
    /// Update the baseline before the gradient step instead of after.
    pub baseline_first: bool,
    pub no_relaxation: bool,
    pub single_group: bool,
    pub shuffle_groups: bool,
}

impl Default for SdrConfig {
    fn default() -> Self {
        Self {
            samples_per_update: 8,
            updates_per_group: 50,
            learning_rate: 1e-2,
            half_width_frac: 0.5,
            hidden_dims: vec![256, 256],
            baseline_decay: 0.9,
            passes: 1,
            baseline_first: false,
            no_relaxation: false,
            single_group: false,
            shuffle_groups: false,
        }
    }
}

impl SdrConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |detail: &str| RunError::BadConfig {
            detail: detail.to_string(),
        };
        if self.samples_per_update == 0 {
            return Err(bad("samples_per_update must be positive"));
        }
        if self.updates_per_group == 0 {
            return Err(bad("updates_per_group must be positive"));
        }
        if self.passes == 0 {
            return Err(bad("passes must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(bad("learning_rate must be positive and finite"));
        }
        if !(0.0..=0.5).contains(&self.half_width_frac) {
            return Err(bad("half_width_frac must lie in [0, 0.5]"));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(bad("baseline_decay must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Effective relaxation amplitude after the ablation flag.
    pub fn effective_half_width(&self) -> f64 {
        if self.no_relaxation {
            0.0
        } else {
            self.half_width_frac
        }
    }
}

/// One logged optimization step (a policy update, an attribute sweep, or a
/// sampled candidate, depending on the method).
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateEntry {
    pub update: u64,
    pub group: usize,
    pub mean_reward: f64,
    pub best_reward: f64,
    /// Cumulative evaluator calls after this step.
    pub evals: u64,
    pub wall_ms: u64,
}

/// Greedy outcome for one optimized group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    pub group: usize,
    pub indices: Vec<usize>,
    pub bins: Vec<usize>,
    pub values: Vec<f64>,
}

/// Trajectory of one optimization run: per-step entries, the best sampled
/// vector, the per-group greedy outcomes, and the final greedy vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub entries: Vec<UpdateEntry>,
    pub best_score: f64,
    pub best_attrs: Option<AttributeVector>,
    pub group_results: Vec<GroupResult>,
    pub final_attrs: Option<AttributeVector>,
    pub total_evals: u64,
}

impl RunRecord {
    fn new() -> Self {
        Self {
            best_score: f64::NEG_INFINITY,
            ..Default::default()
        }
    }

    fn observe(&mut self, attrs: &AttributeVector, score: f64) {
        self.total_evals += 1;
        if score > self.best_score {
            self.best_score = score;
            self.best_attrs = Some(attrs.clone());
        }
    }

    fn push_entry(&mut self, update: u64, group: usize, mean_reward: f64, wall_ms: u64) -> UpdateEntry {
        let entry = UpdateEntry {
            update,
            group,
            mean_reward,
            best_reward: self.best_score,
            evals: self.total_evals,
            wall_ms,
        };
        self.entries.push(entry.clone());
        entry
    }

    /// Trajectory equality ignoring wall-clock fields, which are
    /// observational and not seed-determined.
    pub fn same_trajectory(&self, other: &RunRecord) -> bool {
        self.best_score == other.best_score
            && self.best_attrs == other.best_attrs
            && self.group_results == other.group_results
            && self.final_attrs == other.final_attrs
            && self.total_evals == other.total_evals
            && self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                a.update == b.update
                    && a.group == b.group
                    && a.mean_reward == b.mean_reward
                    && a.best_reward == b.best_reward
                    && a.evals == b.evals
            })
    }
}

/// A resumable optimization method driven one step at a time.
pub trait MethodRunner {
    /// Runs one step; `Ok(None)` once the method has finished.
    fn step(&mut self, evaluator: &dyn RewardEvaluator) -> Result<Option<UpdateEntry>, RunError>;

    /// Evaluator calls the next step will consume (0 when done).
    fn next_step_cost(&self) -> u64;

    fn is_done(&self) -> bool;

    fn record(&self) -> &RunRecord;

    fn take_record(self: Box<Self>) -> RunRecord;
}

/// Drives a runner to completion, honoring an optional evaluation cap: the
/// runner stops before any step that would overrun the cap, keeping call
/// counts exact.
pub fn drive<R: MethodRunner + ?Sized>(
    runner: &mut R,
    evaluator: &dyn RewardEvaluator,
    max_evals: Option<u64>,
) -> Result<(), RunError> {
    while !runner.is_done() {
        if let Some(cap) = max_evals {
            if runner.record().total_evals + runner.next_step_cost() > cap {
                break;
            }
        }
        runner.step(evaluator)?;
    }
    Ok(())
}

fn check_score(attrs: &AttributeVector, score: f64) -> Result<f64, RunError> {
    if !score.is_finite() || !(0.0..=1.0).contains(&score) {
        return Err(RunError::ScoreOutOfRange {
            attrs: attrs.clone(),
            score,
        });
    }
    Ok(score)
}

/// Evaluates a planned batch in parallel, then folds the scores into the
/// record in planning order so trajectories stay deterministic.
fn evaluate_batch(
    planned: &[(AttributeVector, u64)],
    evaluator: &dyn RewardEvaluator,
    record: &mut RunRecord,
) -> Result<Vec<f64>, RunError> {
    let results: Vec<Result<f64, EvalError>> = planned
        .par_iter()
        .map(|(attrs, seed)| evaluator.evaluate(attrs, *seed))
        .collect();
    let mut scores = Vec::with_capacity(planned.len());
    for ((attrs, _), result) in planned.iter().zip(results) {
        let score = result.map_err(|source| RunError::Evaluator {
            attrs: attrs.clone(),
            source,
        })?;
        let score = check_score(attrs, score)?;
        record.observe(attrs, score);
        scores.push(score);
    }
    Ok(scores)
}

/// How a group is optimized within the coordinate-descent loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMode {
    /// REINFORCE over a per-group categorical policy.
    Policy,
    /// Brute-force enumeration of the group's bin grid. With singleton
    /// groups this reduces the loop to attribute descent.
    Exhaustive,
}

enum GroupState {
    Policy {
        policy: MlpPolicy,
        adam: AdamState,
        baseline: EmaBaseline,
    },
    Exhaustive,
}

/// One REINFORCE update on a group policy: draw a fresh normalized input,
/// sample bin choices, evaluate the completed vectors, and take one Adam
/// ascent step on the advantage-weighted log-probability gradient.
#[allow(clippy::too_many_arguments)]
fn reinforce_one_update(
    space: &AttributeSpace,
    indices: &[usize],
    context: &AttributeVector,
    policy: &mut MlpPolicy,
    adam: &mut AdamState,
    baseline: &mut EmaBaseline,
    config: &SdrConfig,
    rng: &mut ChaCha8Rng,
    evaluator: &dyn RewardEvaluator,
    record: &mut RunRecord,
) -> Result<f64, RunError> {
    let input: Vec<f64> = (0..indices.len()).map(|_| rng.gen::<f64>()).collect();
    let probs = policy.forward(&input)?;

    let mut draws = Vec::with_capacity(config.samples_per_update);
    let mut planned = Vec::with_capacity(config.samples_per_update);
    for _ in 0..config.samples_per_update {
        let (bins, log_prob) = probs.sample_bins(rng);
        let seed = rng.gen::<u64>();
        let mut attrs = context.clone();
        for (slot, &attr_idx) in indices.iter().enumerate() {
            attrs.set(attr_idx, space.spec(attr_idx).bin_center(bins.get(slot))?);
        }
        planned.push((attrs, seed));
        draws.push((bins, log_prob));
    }
    let scores = evaluate_batch(&planned, evaluator, record)?;

    let episodes: Vec<Episode> = draws
        .into_iter()
        .zip(&scores)
        .map(|((bins, log_prob), &reward)| Episode {
            input: input.clone(),
            bins,
            log_prob,
            reward,
        })
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;

    if config.baseline_first {
        baseline.update(mean);
        reinforce_update(policy, adam, &episodes, baseline)?;
    } else {
        reinforce_update(policy, adam, &episodes, baseline)?;
        baseline.update(mean);
    }
    Ok(mean)
}

/// Test-time readout of a trained group policy: feed one random input and
/// take the per-head argmax.
fn greedy_group_values(
    space: &AttributeSpace,
    indices: &[usize],
    policy: &MlpPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<f64>), RunError> {
    let input: Vec<f64> = (0..indices.len()).map(|_| rng.gen::<f64>()).collect();
    let bins = policy.forward(&input)?.greedy_bins();
    let mut values = Vec::with_capacity(indices.len());
    for (slot, &attr_idx) in indices.iter().enumerate() {
        values.push(space.spec(attr_idx).bin_center(bins.get(slot))?);
    }
    Ok((bins.bins().to_vec(), values))
}

/// Enumerates a group's bin grid against a fixed context; returns the best
/// combination (lexicographically smallest on ties) and the sweep mean.
fn exhaustive_group_sweep(
    space: &AttributeSpace,
    indices: &[usize],
    context: &AttributeVector,
    rng: &mut ChaCha8Rng,
    evaluator: &dyn RewardEvaluator,
    record: &mut RunRecord,
) -> Result<(Vec<usize>, Vec<f64>, f64), RunError> {
    let mut combos: Vec<Vec<usize>> = Vec::new();
    let mut bins = vec![0usize; indices.len()];
    loop {
        combos.push(bins.clone());
        let mut carry = true;
        for slot in (0..indices.len()).rev() {
            bins[slot] += 1;
            if bins[slot] < space.spec(indices[slot]).num_bins {
                carry = false;
                break;
            }
            bins[slot] = 0;
        }
        if carry {
            break;
        }
    }
    let mut planned = Vec::with_capacity(combos.len());
    for combo in &combos {
        let seed = rng.gen::<u64>();
        let mut attrs = context.clone();
        for (slot, &attr_idx) in indices.iter().enumerate() {
            attrs.set(attr_idx, space.spec(attr_idx).bin_center(combo[slot])?);
        }
        planned.push((attrs, seed));
    }
    let scores = evaluate_batch(&planned, evaluator, record)?;
    let mut best_slot = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best_slot] {
            best_slot = i;
        }
    }
    let best_bins = combos[best_slot].clone();
    let mut values = Vec::with_capacity(indices.len());
    for (slot, &attr_idx) in indices.iter().enumerate() {
        values.push(space.spec(attr_idx).bin_center(best_bins[slot])?);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((best_bins, values, mean))
}

/// Outcome of optimizing a single group against a fixed context.
#[derive(Debug, Clone)]
pub struct GroupOutcome {
    pub policy: MlpPolicy,
    pub greedy_bins: Vec<usize>,
    pub greedy_values: Vec<f64>,
    pub record: RunRecord,
}

/// Optimizes one group of the plan while every other attribute stays at its
/// context value; earlier groups are expected to already carry their
/// optimized values in `context`.
pub fn optimize_group(
    space: &AttributeSpace,
    plan: &GroupPlan,
    group_index: usize,
    context: &AttributeVector,
    evaluator: &dyn RewardEvaluator,
    config: &SdrConfig,
    rng: &mut ChaCha8Rng,
) -> Result<GroupOutcome, RunError> {
    config.validate()?;
    space.validate_vector(context)?;
    let indices = plan.group(group_index).to_vec();
    let bins_per_head: Vec<usize> = indices.iter().map(|&i| space.spec(i).num_bins).collect();

    let mut policy = MlpPolicy::new(indices.len(), &config.hidden_dims, &bins_per_head, rng);
    let mut adam = AdamState::new(&policy, config.learning_rate);
    let mut baseline = EmaBaseline::new(config.baseline_decay);
    let mut record = RunRecord::new();

    for update in 0..config.updates_per_group {
        let t0 = Instant::now();
        let mean = reinforce_one_update(
            space,
            &indices,
            context,
            &mut policy,
            &mut adam,
            &mut baseline,
            config,
            rng,
            evaluator,
            &mut record,
        )?;
        record.push_entry(
            update as u64,
            group_index,
            mean,
            t0.elapsed().as_millis() as u64,
        );
    }

    let (greedy_bins, greedy_values) = greedy_group_values(space, &indices, &policy, rng)?;
    record.group_results.push(GroupResult {
        group: group_index,
        indices: indices.clone(),
        bins: greedy_bins.clone(),
        values: greedy_values.clone(),
    });
    let mut final_attrs = context.clone();
    for (slot, &attr_idx) in indices.iter().enumerate() {
        final_attrs.set(attr_idx, greedy_values[slot]);
    }
    record.final_attrs = Some(final_attrs);
    Ok(GroupOutcome {
        policy,
        greedy_bins,
        greedy_values,
        record,
    })
}

/// Group-wise coordinate descent: optimizes each group in plan order,
/// threading greedy values into the context while later groups stay at the
/// initial context vector.
pub struct SdrRunner {
    space: AttributeSpace,
    config: SdrConfig,
    mode: GroupMode,
    plan: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
    pass: usize,
    group_pos: usize,
    update_in_group: usize,
    update_counter: u64,
    context: AttributeVector,
    group_state: GroupState,
    record: RunRecord,
    done: bool,
}

impl SdrRunner {
    pub fn new(
        space: &AttributeSpace,
        plan: &GroupPlan,
        config: &SdrConfig,
        seed: u64,
        mode: GroupMode,
    ) -> Result<Self, RunError> {
        Self::with_context(space, plan, config, seed, mode, None)
    }

    /// As [`SdrRunner::new`] but with an explicit initial context instead of
    /// one sampled from the seed.
    pub fn with_context(
        space: &AttributeSpace,
        plan: &GroupPlan,
        config: &SdrConfig,
        seed: u64,
        mode: GroupMode,
        context_init: Option<AttributeVector>,
    ) -> Result<Self, RunError> {
        config.validate()?;
        crate::attr::validate_group_plan(plan.groups(), space.len())?;
        let mut rng = rng_from_seed(seed);
        let groups = resolve_plan(plan, config, space.len(), &mut rng);
        let context = match context_init {
            Some(c) => {
                space.validate_vector(&c)?;
                c
            }
            None => space.sample_uniform(&mut rng),
        };
        let group_state = init_group_state(&space.clone(), &groups[0], config, mode, &mut rng);
        Ok(Self {
            space: space.clone(),
            config: config.clone(),
            mode,
            plan: groups,
            rng,
            pass: 0,
            group_pos: 0,
            update_in_group: 0,
            update_counter: 0,
            context,
            group_state,
            record: RunRecord::new(),
            done: false,
        })
    }

    pub fn resolved_plan(&self) -> &[Vec<usize>] {
        &self.plan
    }

    /// Total evaluator calls the full run will make.
    pub fn planned_evals(&self) -> u64 {
        match self.mode {
            GroupMode::Policy => {
                self.config.passes as u64
                    * self.plan.len() as u64
                    * self.config.updates_per_group as u64
                    * self.config.samples_per_update as u64
            }
            GroupMode::Exhaustive => {
                let per_pass: u64 = self
                    .plan
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|&i| self.space.spec(i).num_bins as u64)
                            .product::<u64>()
                    })
                    .sum();
                self.config.passes as u64 * per_pass
            }
        }
    }

    fn finish_group(&mut self) -> Result<(), RunError> {
        let indices = self.plan[self.group_pos].clone();
        if let GroupState::Policy { policy, .. } = &self.group_state {
            let (bins, values) = greedy_group_values(&self.space, &indices, policy, &mut self.rng)?;
            for (slot, &attr_idx) in indices.iter().enumerate() {
                self.context.set(attr_idx, values[slot]);
            }
            self.record.group_results.push(GroupResult {
                group: self.group_pos,
                indices,
                bins,
                values,
            });
        }
        self.group_pos += 1;
        if self.group_pos == self.plan.len() {
            self.pass += 1;
            if self.pass == self.config.passes {
                self.done = true;
                self.record.final_attrs = Some(self.context.clone());
                return Ok(());
            }
            self.group_pos = 0;
        }
        self.group_state = init_group_state(
            &self.space,
            &self.plan[self.group_pos],
            &self.config,
            self.mode,
            &mut self.rng,
        );
        Ok(())
    }
}

fn resolve_plan(
    plan: &GroupPlan,
    config: &SdrConfig,
    n_attributes: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    if config.single_group {
        return vec![(0..n_attributes).collect()];
    }
    let mut groups: Vec<Vec<usize>> = plan.groups().to_vec();
    if config.shuffle_groups {
        // Re-deal all indices into the same group shapes: grouping survives
        // but any deliberate correlation structure is destroyed.
        let mut indices: Vec<usize> = (0..n_attributes).collect();
        indices.shuffle(rng);
        let mut cursor = 0;
        for group in groups.iter_mut() {
            let len = group.len();
            group.copy_from_slice(&indices[cursor..cursor + len]);
            cursor += len;
        }
    }
    groups
}

fn init_group_state(
    space: &AttributeSpace,
    indices: &[usize],
    config: &SdrConfig,
    mode: GroupMode,
    rng: &mut ChaCha8Rng,
) -> GroupState {
    match mode {
        GroupMode::Policy => {
            let bins_per_head: Vec<usize> =
                indices.iter().map(|&i| space.spec(i).num_bins).collect();
            let policy = MlpPolicy::new(indices.len(), &config.hidden_dims, &bins_per_head, rng);
            let adam = AdamState::new(&policy, config.learning_rate);
            let baseline = EmaBaseline::new(config.baseline_decay);
            GroupState::Policy {
                policy,
                adam,
                baseline,
            }
        }
        GroupMode::Exhaustive => GroupState::Exhaustive,
    }
}

impl MethodRunner for SdrRunner {
    fn step(&mut self, evaluator: &dyn RewardEvaluator) -> Result<Option<UpdateEntry>, RunError> {
        if self.done {
            return Ok(None);
        }
        let t0 = Instant::now();
        let indices = self.plan[self.group_pos].clone();
        let group = self.group_pos;
        let entry = match &mut self.group_state {
            GroupState::Policy {
                policy,
                adam,
                baseline,
            } => {
                let mean = reinforce_one_update(
                    &self.space,
                    &indices,
                    &self.context,
                    policy,
                    adam,
                    baseline,
                    &self.config,
                    &mut self.rng,
                    evaluator,
                    &mut self.record,
                )?;
                let entry = self.record.push_entry(
                    self.update_counter,
                    group,
                    mean,
                    t0.elapsed().as_millis() as u64,
                );
                self.update_counter += 1;
                self.update_in_group += 1;
                if self.update_in_group == self.config.updates_per_group {
                    self.update_in_group = 0;
                    self.finish_group()?;
                }
                entry
            }
            GroupState::Exhaustive => {
                let (bins, values, mean) = exhaustive_group_sweep(
                    &self.space,
                    &indices,
                    &self.context,
                    &mut self.rng,
                    evaluator,
                    &mut self.record,
                )?;
                for (slot, &attr_idx) in indices.iter().enumerate() {
                    self.context.set(attr_idx, values[slot]);
                }
                self.record.group_results.push(GroupResult {
                    group,
                    indices,
                    bins,
                    values,
                });
                let entry = self.record.push_entry(
                    self.update_counter,
                    group,
                    mean,
                    t0.elapsed().as_millis() as u64,
                );
                self.update_counter += 1;
                self.group_pos += 1;
                if self.group_pos == self.plan.len() {
                    self.pass += 1;
                    if self.pass == self.config.passes {
                        self.done = true;
                        self.record.final_attrs = Some(self.context.clone());
                    } else {
                        self.group_pos = 0;
                    }
                }
                entry
            }
        };
        Ok(Some(entry))
    }

    fn next_step_cost(&self) -> u64 {
        if self.done {
            return 0;
        }
        match self.mode {
            GroupMode::Policy => self.config.samples_per_update as u64,
            GroupMode::Exhaustive => self.plan[self.group_pos]
                .iter()
                .map(|&i| self.space.spec(i).num_bins as u64)
                .product(),
        }
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn record(&self) -> &RunRecord {
        &self.record
    }

    fn take_record(self: Box<Self>) -> RunRecord {
        self.record
    }
}

/// Runs the full coordinate-descent loop to completion.
pub fn run_sdr(
    space: &AttributeSpace,
    plan: &GroupPlan,
    evaluator: &dyn RewardEvaluator,
    config: &SdrConfig,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let mut runner = SdrRunner::new(space, plan, config, seed, GroupMode::Policy)?;
    drive(&mut runner, evaluator, None)?;
    Ok(runner.record)
}

/// Greedy per-attribute sweeps: for each attribute in order, evaluates all
/// of its bin centers with every other attribute held fixed and keeps the
/// best (lowest bin on ties).
pub struct DescentRunner {
    space: AttributeSpace,
    passes: usize,
    seed: u64,
    call_index: u64,
    pass: usize,
    attr_idx: usize,
    sweep_counter: u64,
    context: AttributeVector,
    record: RunRecord,
    done: bool,
}

impl DescentRunner {
    pub fn new(
        space: &AttributeSpace,
        context_init: AttributeVector,
        passes: usize,
        seed: u64,
    ) -> Result<Self, RunError> {
        if passes == 0 {
            return Err(RunError::BadConfig {
                detail: "passes must be positive".to_string(),
            });
        }
        space.validate_vector(&context_init)?;
        Ok(Self {
            space: space.clone(),
            passes,
            seed,
            call_index: 0,
            pass: 0,
            attr_idx: 0,
            sweep_counter: 0,
            context: context_init,
            record: RunRecord::new(),
            done: false,
        })
    }

    /// Default starting context: every attribute at the midpoint of its
    /// middle bin (`num_bins / 2`).
    pub fn mid_context(space: &AttributeSpace) -> AttributeVector {
        AttributeVector::new(
            space
                .specs()
                .iter()
                .map(|s| s.bin_center(s.num_bins / 2).expect("mid bin exists"))
                .collect(),
        )
    }
}

impl MethodRunner for DescentRunner {
    fn step(&mut self, evaluator: &dyn RewardEvaluator) -> Result<Option<UpdateEntry>, RunError> {
        if self.done {
            return Ok(None);
        }
        let t0 = Instant::now();
        let attr = self.attr_idx;
        let num_bins = self.space.spec(attr).num_bins;
        let mut planned = Vec::with_capacity(num_bins);
        for k in 0..num_bins {
            let mut attrs = self.context.clone();
            attrs.set(attr, self.space.spec(attr).bin_center(k)?);
            let seed = derive_seed(self.seed, self.call_index);
            self.call_index += 1;
            planned.push((attrs, seed));
        }
        let scores = evaluate_batch(&planned, evaluator, &mut self.record)?;
        let mut best_k = 0;
        for (k, &s) in scores.iter().enumerate() {
            if s > scores[best_k] {
                best_k = k;
            }
        }
        let best_value = self.space.spec(attr).bin_center(best_k)?;
        self.context.set(attr, best_value);
        self.record.group_results.push(GroupResult {
            group: attr,
            indices: vec![attr],
            bins: vec![best_k],
            values: vec![best_value],
        });
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let entry = self.record.push_entry(
            self.sweep_counter,
            attr,
            mean,
            t0.elapsed().as_millis() as u64,
        );
        self.sweep_counter += 1;

        self.attr_idx += 1;
        if self.attr_idx == self.space.len() {
            self.attr_idx = 0;
            self.pass += 1;
            if self.pass == self.passes {
                self.done = true;
                self.record.final_attrs = Some(self.context.clone());
            }
        }
        Ok(Some(entry))
    }

    fn next_step_cost(&self) -> u64 {
        if self.done {
            0
        } else {
            self.space.spec(self.attr_idx).num_bins as u64
        }
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn record(&self) -> &RunRecord {
        &self.record
    }

    fn take_record(self: Box<Self>) -> RunRecord {
        self.record
    }
}

/// Runs attribute descent to completion from an initial context (the
/// mid-bin context when `None`).
pub fn attribute_descent(
    space: &AttributeSpace,
    evaluator: &dyn RewardEvaluator,
    context_init: Option<AttributeVector>,
    passes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let context = context_init.unwrap_or_else(|| DescentRunner::mid_context(space));
    let mut runner = DescentRunner::new(space, context, passes, seed)?;
    drive(&mut runner, evaluator, None)?;
    Ok(runner.record)
}

/// Uniform full-vector sampling; keeps the best of `budget` draws.
pub struct RandomSearchRunner {
    space: AttributeSpace,
    budget: u64,
    drawn: u64,
    rng: ChaCha8Rng,
    record: RunRecord,
    done: bool,
}

impl RandomSearchRunner {
    pub fn new(space: &AttributeSpace, budget: u64, seed: u64) -> Result<Self, RunError> {
        if budget == 0 {
            return Err(RunError::BadConfig {
                detail: "random search budget must be positive".to_string(),
            });
        }
        Ok(Self {
            space: space.clone(),
            budget,
            drawn: 0,
            rng: rng_from_seed(seed),
            record: RunRecord::new(),
            done: false,
        })
    }
}

impl MethodRunner for RandomSearchRunner {
    fn step(&mut self, evaluator: &dyn RewardEvaluator) -> Result<Option<UpdateEntry>, RunError> {
        if self.done {
            return Ok(None);
        }
        let t0 = Instant::now();
        let attrs = self.space.sample_uniform(&mut self.rng);
        let seed = self.rng.gen::<u64>();
        let scores = evaluate_batch(
            &[(attrs, seed)],
            evaluator,
            &mut self.record,
        )?;
        let entry =
            self.record
                .push_entry(self.drawn, 0, scores[0], t0.elapsed().as_millis() as u64);
        self.drawn += 1;
        if self.drawn == self.budget {
            self.done = true;
            self.record.final_attrs = self.record.best_attrs.clone();
        }
        Ok(Some(entry))
    }

    fn next_step_cost(&self) -> u64 {
        if self.done {
            0
        } else {
            1
        }
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn record(&self) -> &RunRecord {
        &self.record
    }

    fn take_record(self: Box<Self>) -> RunRecord {
        self.record
    }
}

pub fn random_search(
    space: &AttributeSpace,
    evaluator: &dyn RewardEvaluator,
    budget: u64,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let mut runner = RandomSearchRunner::new(space, budget, seed)?;
    drive(&mut runner, evaluator, None)?;
    Ok(runner.record)
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000;

/// Evaluates every bin-center combination (relaxation off) and returns the
/// exact argmax, ties resolved toward the lexicographically smallest bins.
/// All calls share `eval_seed` so stochastic evaluators see a fixed draw.
pub fn exhaustive_search(
    space: &AttributeSpace,
    evaluator: &dyn RewardEvaluator,
    cap: u64,
    eval_seed: u64,
) -> Result<(Vec<usize>, f64), RunError> {
    let cells = space.cardinality();
    if cells > cap as f64 {
        return Err(RunError::EnumerationTooLarge { cells, cap });
    }
    let mut bins = vec![0usize; space.len()];
    let mut best_bins = bins.clone();
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut attrs = Vec::with_capacity(space.len());
        for (i, &k) in bins.iter().enumerate() {
            attrs.push(space.spec(i).bin_center(k)?);
        }
        let attrs = AttributeVector::new(attrs);
        let score = evaluator
            .evaluate(&attrs, eval_seed)
            .map_err(|source| RunError::Evaluator {
                attrs: attrs.clone(),
                source,
            })?;
        let score = check_score(&attrs, score)?;
        if score > best {
            best = score;
            best_bins = bins.clone();
        }
        let mut carry = true;
        for i in (0..bins.len()).rev() {
            bins[i] += 1;
            if bins[i] < space.spec(i).num_bins {
                carry = false;
                break;
            }
            bins[i] = 0;
        }
        if carry {
            break;
        }
    }
    Ok((best_bins, best))
}

/// Exhaustive enumeration as a loggable method: one entry per combination.
pub struct ExhaustiveRunner {
    space: AttributeSpace,
    bins: Vec<usize>,
    index: u64,
    total: u64,
    eval_seed: u64,
    record: RunRecord,
    done: bool,
}

impl ExhaustiveRunner {
    pub fn new(space: &AttributeSpace, cap: u64, eval_seed: u64) -> Result<Self, RunError> {
        let cells = space.cardinality();
        if cells > cap as f64 {
            return Err(RunError::EnumerationTooLarge { cells, cap });
        }
        Ok(Self {
            space: space.clone(),
            bins: vec![0; space.len()],
            index: 0,
            total: cells as u64,
            eval_seed,
            record: RunRecord::new(),
            done: false,
        })
    }
}

impl MethodRunner for ExhaustiveRunner {
    fn step(&mut self, evaluator: &dyn RewardEvaluator) -> Result<Option<UpdateEntry>, RunError> {
        if self.done {
            return Ok(None);
        }
        let t0 = Instant::now();
        let mut values = Vec::with_capacity(self.space.len());
        for (i, &k) in self.bins.iter().enumerate() {
            values.push(self.space.spec(i).bin_center(k)?);
        }
        let attrs = AttributeVector::new(values);
        let scores = evaluate_batch(
            &[(attrs, self.eval_seed)],
            evaluator,
            &mut self.record,
        )?;
        let entry =
            self.record
                .push_entry(self.index, 0, scores[0], t0.elapsed().as_millis() as u64);
        self.index += 1;
        let mut carry = true;
        for i in (0..self.bins.len()).rev() {
            self.bins[i] += 1;
            if self.bins[i] < self.space.spec(i).num_bins {
                carry = false;
                break;
            }
            self.bins[i] = 0;
        }
        if carry || self.index == self.total {
            self.done = true;
            self.record.final_attrs = self.record.best_attrs.clone();
        }
        Ok(Some(entry))
    }

    fn next_step_cost(&self) -> u64 {
        if self.done {
            0
        } else {
            1
        }
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn record(&self) -> &RunRecord {
        &self.record
    }

    fn take_record(self: Box<Self>) -> RunRecord {
        self.record
    }
}

/// Illustrative search-space inputs for the instance-level versus
/// global-level comparison: per-object placements span `s_x * s_y` cells,
/// while line-based placement spans `s_x * d` per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSizeInputs {
    pub s_x: f64,
    pub s_y: f64,
    pub density_range: f64,
    pub num_classes: u32,
    pub objects_per_class: Vec<u64>,
}

/// Theoretical evaluation counts and search-space sizes for a configured
/// space and plan.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub n_attributes: usize,
    pub n_groups: usize,
    pub updates_per_group: usize,
    pub samples_per_update: usize,
    pub passes: usize,
    pub sdr_evals: u64,
    pub descent_passes: usize,
    pub descent_evals: u64,
    pub discrete_cardinality: f64,
    pub instance_space: Option<f64>,
    pub global_space: Option<f64>,
}

pub fn budget_report(
    space: &AttributeSpace,
    plan: &GroupPlan,
    config: &SdrConfig,
    descent_passes: usize,
    inputs: Option<&SpaceSizeInputs>,
) -> BudgetReport {
    let n_groups = if config.single_group {
        1
    } else {
        plan.num_groups()
    };
    let sdr_evals = config.passes as u64
        * n_groups as u64
        * config.updates_per_group as u64
        * config.samples_per_update as u64;
    let bins_total: u64 = space.specs().iter().map(|s| s.num_bins as u64).sum();
    let descent_evals = descent_passes as u64 * bins_total;
    let (instance_space, global_space) = match inputs {
        Some(inp) => {
            let per_object = inp.s_x * inp.s_y;
            let instance = inp
                .objects_per_class
                .iter()
                .map(|&n| per_object.powf(n as f64))
                .product::<f64>();
            let global = (inp.s_x * inp.density_range).powi(inp.num_classes as i32);
            (Some(instance), Some(global))
        }
        None => (None, None),
    };
    BudgetReport {
        n_attributes: space.len(),
        n_groups,
        updates_per_group: config.updates_per_group,
        samples_per_update: config.samples_per_update,
        passes: config.passes,
        sdr_evals,
        descent_passes,
        descent_evals,
        discrete_cardinality: space.cardinality(),
        instance_space,
        global_space,
    }
}

impl std::fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "attributes:            {}", self.n_attributes)?;
        writeln!(f, "groups:                {}", self.n_groups)?;
        writeln!(
            f,
            "sdr evaluations:       {} ({} passes x {} groups x {} updates x {} samples)",
            self.sdr_evals, self.passes, self.n_groups, self.updates_per_group,
            self.samples_per_update
        )?;
        writeln!(
            f,
            "descent evaluations:   {} ({} passes x sum of bins)",
            self.descent_evals, self.descent_passes
        )?;
        writeln!(f, "discrete combinations: {}", self.discrete_cardinality)?;
        if let (Some(inst), Some(glob)) = (self.instance_space, self.global_space) {
            writeln!(f, "instance-level space:  {inst:e}")?;
            writeln!(f, "global-level space:    {glob}")?;
        }
        Ok(())
    }
}

// Snapshot plumbing for checkpoint/resume lives close to the runners so the
// field lists stay in sync with the state they mirror.

pub(crate) struct SdrSnapshotParts<'a> {
    pub space: &'a AttributeSpace,
    pub config: &'a SdrConfig,
    pub plan: &'a [Vec<usize>],
    pub rng: RngState,
    pub pass: u64,
    pub group_pos: u64,
    pub update_in_group: u64,
    pub update_counter: u64,
    pub context: &'a AttributeVector,
    pub policy: Option<(&'a MlpPolicy, &'a AdamState, &'a EmaBaseline)>,
    pub record: &'a RunRecord,
    pub done: bool,
    pub mode: GroupMode,
}

impl SdrRunner {
    pub(crate) fn snapshot_parts(&self) -> SdrSnapshotParts<'_> {
        SdrSnapshotParts {
            space: &self.space,
            config: &self.config,
            plan: &self.plan,
            rng: RngState::capture(&self.rng),
            pass: self.pass as u64,
            group_pos: self.group_pos as u64,
            update_in_group: self.update_in_group as u64,
            update_counter: self.update_counter,
            context: &self.context,
            policy: match &self.group_state {
                GroupState::Policy {
                    policy,
                    adam,
                    baseline,
                } => Some((policy, adam, baseline)),
                GroupState::Exhaustive => None,
            },
            record: &self.record,
            done: self.done,
            mode: self.mode,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        space: AttributeSpace,
        config: SdrConfig,
        mode: GroupMode,
        plan: Vec<Vec<usize>>,
        rng: RngState,
        pass: usize,
        group_pos: usize,
        update_in_group: usize,
        update_counter: u64,
        context: AttributeVector,
        policy: Option<(MlpPolicy, AdamState, EmaBaseline)>,
        record: RunRecord,
        done: bool,
    ) -> Self {
        let group_state = match policy {
            Some((policy, adam, baseline)) => GroupState::Policy {
                policy,
                adam,
                baseline,
            },
            None => GroupState::Exhaustive,
        };
        Self {
            space,
            config,
            mode,
            plan,
            rng: rng.restore(),
            pass,
            group_pos,
            update_in_group,
            update_counter,
            context,
            group_state,
            record,
            done,
        }
    }
}

pub(crate) struct DescentSnapshotParts<'a> {
    pub space: &'a AttributeSpace,
    pub passes: u64,
    pub seed: u64,
    pub call_index: u64,
    pub pass: u64,
    pub attr_idx: u64,
    pub sweep_counter: u64,
    pub context: &'a AttributeVector,
    pub record: &'a RunRecord,
    pub done: bool,
}

impl DescentRunner {
    pub(crate) fn snapshot_parts(&self) -> DescentSnapshotParts<'_> {
        DescentSnapshotParts {
            space: &self.space,
            passes: self.passes as u64,
            seed: self.seed,
            call_index: self.call_index,
            pass: self.pass as u64,
            attr_idx: self.attr_idx as u64,
            sweep_counter: self.sweep_counter,
            context: &self.context,
            record: &self.record,
            done: self.done,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        space: AttributeSpace,
        passes: usize,
        seed: u64,
        call_index: u64,
        pass: usize,
        attr_idx: usize,
        sweep_counter: u64,
        context: AttributeVector,
        record: RunRecord,
        done: bool,
    ) -> Self {
        Self {
            space,
            passes,
            seed,
            call_index,
            pass,
            attr_idx,
            sweep_counter,
            context,
            record,
            done,
        }
    }
}

pub(crate) struct RandomSnapshotParts<'a> {
    pub space: &'a AttributeSpace,
    pub budget: u64,
    pub drawn: u64,
    pub rng: RngState,
    pub record: &'a RunRecord,
    pub done: bool,
}

impl RandomSearchRunner {
    pub(crate) fn snapshot_parts(&self) -> RandomSnapshotParts<'_> {
        RandomSnapshotParts {
            space: &self.space,
            budget: self.budget,
            drawn: self.drawn,
            rng: RngState::capture(&self.rng),
            record: &self.record,
            done: self.done,
        }
    }

    pub(crate) fn from_parts(
        space: AttributeSpace,
        budget: u64,
        drawn: u64,
        rng: RngState,
        record: RunRecord,
        done: bool,
    ) -> Self {
        Self {
            space,
            budget,
            drawn,
            rng: rng.restore(),
            record,
            done,
        }
    }
}

pub(crate) struct ExhaustiveSnapshotParts<'a> {
    pub space: &'a AttributeSpace,
    pub bins: &'a [usize],
    pub index: u64,
    pub total: u64,
    pub eval_seed: u64,
    pub record: &'a RunRecord,
    pub done: bool,
}

impl ExhaustiveRunner {
    pub(crate) fn snapshot_parts(&self) -> ExhaustiveSnapshotParts<'_> {
        ExhaustiveSnapshotParts {
            space: &self.space,
            bins: &self.bins,
            index: self.index,
            total: self.total,
            eval_seed: self.eval_seed,
            record: &self.record,
            done: self.done,
        }
    }

    pub(crate) fn from_parts(
        space: AttributeSpace,
        bins: Vec<usize>,
        index: u64,
        total: u64,
        eval_seed: u64,
        record: RunRecord,
        done: bool,
    ) -> Self {
        Self {
            space,
            bins,
            index,
            total,
            eval_seed,
            record,
            done,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::{AttributeSpec, Family};
    use crate::synthetic::{ConstantReward, CountingEvaluator, TableReward};

    fn grid(bins: &[usize]) -> AttributeSpace {
        AttributeSpace::new(
            bins.iter()
                .enumerate()
                .map(|(i, &k)| {
                    AttributeSpec::new(format!("a{i}"), 0.0, 1.0, k, Family::Position).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn lean_config() -> SdrConfig {
        SdrConfig {
            hidden_dims: vec![32, 32],
            ..SdrConfig::default()
        }
    }

    #[test]
    fn optimize_group_on_constant_reward() {
        let space = grid(&[4]);
        let plan = GroupPlan::singletons(1);
        let evaluator = ConstantReward(0.5);
        let mut rng = rng_from_seed(0);
        let outcome =
            optimize_group(&space, &plan, 0, &space.mid_range(), &evaluator, &lean_config(), &mut rng)
                .unwrap();
        // Uninformative reward: greedy values valid, baseline converged to
        // the constant so late advantages are essentially zero.
        assert!(outcome.greedy_bins[0] < 4);
        let last = outcome.record.entries.last().unwrap();
        assert_eq!(last.mean_reward, 0.5);
        assert_eq!(outcome.record.total_evals, 50 * 8);
    }

    #[test]
    fn optimize_group_finds_dominant_bin() {
        let space = grid(&[4]);
        let plan = GroupPlan::singletons(1);
        let table = TableReward::new(space.clone(), vec![0.1, 0.9, 0.2, 0.3]);
        let mut hits = 0;
        for seed in 0..10u64 {
            let mut rng = rng_from_seed(seed);
            let outcome = optimize_group(
                &space,
                &plan,
                0,
                &space.mid_range(),
                &table,
                &lean_config(),
                &mut rng,
            )
            .unwrap();
            if outcome.greedy_bins[0] == 1 {
                hits += 1;
            }
        }
        assert!(hits >= 9, "greedy bin 1 in only {hits}/10 seeds");
    }

    #[test]
    fn optimize_group_eval_accounting() {
        let space = grid(&[3, 3]);
        let plan = GroupPlan::new(vec![vec![0, 1]], 2).unwrap();
        let counting = CountingEvaluator::new(ConstantReward(0.3));
        let config = SdrConfig {
            updates_per_group: 7,
            samples_per_update: 5,
            hidden_dims: vec![8],
            ..SdrConfig::default()
        };
        let mut rng = rng_from_seed(1);
        let outcome =
            optimize_group(&space, &plan, 0, &space.mid_range(), &counting, &config, &mut rng)
                .unwrap();
        assert_eq!(counting.calls(), 35);
        assert_eq!(outcome.record.total_evals, 35);
        assert_eq!(outcome.record.entries.len(), 7);
    }

    #[test]
    fn run_sdr_separable_reaches_argmaxes() {
        let space = grid(&[4, 4, 4]);
        let table = TableReward::separable(
            space.clone(),
            &[
                vec![0.2, 0.9, 0.3, 0.1],
                vec![0.1, 0.2, 0.8, 0.3],
                vec![0.3, 0.1, 0.2, 0.95],
            ],
        );
        let (oracle_bins, _) = table.enumerate_best();
        let plan = GroupPlan::singletons(3);
        let mut hits = 0;
        for seed in 0..10u64 {
            let record = run_sdr(&space, &plan, &table, &lean_config(), seed).unwrap();
            let final_attrs = record.final_attrs.unwrap();
            let bins: Vec<usize> = (0..3)
                .map(|i| space.spec(i).value_to_bin(final_attrs.get(i)).unwrap())
                .collect();
            if bins == oracle_bins.bins() {
                hits += 1;
            }
        }
        assert!(hits >= 8, "argmaxes found in only {hits}/10 seeds");
    }

    #[test]
    fn joint_group_beats_split_on_correlated_toy() {
        let space = grid(&[4, 4]);
        let table = TableReward::correlated_equal_bins(space.clone(), 0.05, 0.6);
        let joint = GroupPlan::new(vec![vec![0, 1]], 2).unwrap();
        let split = GroupPlan::singletons(2);
        let mut joint_scores = Vec::new();
        let mut split_scores = Vec::new();
        for seed in 0..10u64 {
            for (plan, out) in [(&joint, &mut joint_scores), (&split, &mut split_scores)] {
                let record = run_sdr(&space, plan, &table, &lean_config(), seed).unwrap();
                let final_attrs = record.final_attrs.unwrap();
                out.push(table.evaluate(&final_attrs, 0).unwrap());
            }
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (v[4] + v[5]) / 2.0
        };
        let jm = median(&mut joint_scores);
        let sm = median(&mut split_scores);
        assert!(jm > sm, "joint median {jm} vs split median {sm}");
    }

    #[test]
    fn descent_exact_on_separable_reward() {
        let space = grid(&[5, 5, 5]);
        let table = TableReward::separable(
            space.clone(),
            &[
                vec![0.2, 0.9, 0.3, 0.1, 0.4],
                vec![0.1, 0.2, 0.8, 0.3, 0.5],
                vec![0.7, 0.1, 0.2, 0.95, 0.6],
            ],
        );
        let (_, oracle_best) = table.enumerate_best();
        for seed in 0..10u64 {
            let context = space.sample_uniform(&mut rng_from_seed(seed));
            let record = attribute_descent(&space, &table, Some(context), 1, seed).unwrap();
            let score = table.evaluate(record.final_attrs.as_ref().unwrap(), 0).unwrap();
            assert_eq!(score, oracle_best, "seed {seed}");
        }
    }

    #[test]
    fn descent_trapped_by_correlation() {
        let space = grid(&[4, 4]);
        let table = TableReward::correlated_equal_bins(space.clone(), 0.05, 0.6);
        let (_, oracle_best) = table.enumerate_best();
        // Adverse context: attribute 1 pinned to bin 0 pulls the first sweep
        // onto the weakest diagonal cell.
        let adverse = AttributeVector::new(vec![
            space.spec(0).bin_center(0).unwrap(),
            space.spec(1).bin_center(0).unwrap(),
        ]);
        let record = attribute_descent(&space, &table, Some(adverse), 1, 0).unwrap();
        let score = table.evaluate(record.final_attrs.as_ref().unwrap(), 0).unwrap();
        assert!(score < oracle_best, "descent should stall below {oracle_best}, got {score}");
    }

    #[test]
    fn descent_eval_accounting() {
        let space = grid(&[10; 7]);
        let counting = CountingEvaluator::new(ConstantReward(0.2));
        let record = attribute_descent(&space, &counting, None, 1, 3).unwrap();
        assert_eq!(counting.calls(), 70);
        assert_eq!(record.total_evals, 70);
    }

    #[test]
    fn singleton_exhaustive_groups_reduce_to_descent() {
        // Replacing the per-group policy with brute-force search on a
        // one-attribute-per-group plan must reproduce attribute descent.
        let space = grid(&[4, 3, 5]);
        let table = TableReward::separable(
            space.clone(),
            &[
                vec![0.3, 0.8, 0.2, 0.1],
                vec![0.5, 0.9, 0.4],
                vec![0.2, 0.3, 0.1, 0.7, 0.6],
            ],
        );
        let context = DescentRunner::mid_context(&space);
        let descent = attribute_descent(&space, &table, Some(context.clone()), 1, 0).unwrap();

        let plan = GroupPlan::singletons(3);
        let config = SdrConfig::default();
        let mut runner = SdrRunner::with_context(
            &space,
            &plan,
            &config,
            0,
            GroupMode::Exhaustive,
            Some(context),
        )
        .unwrap();
        drive(&mut runner, &table, None).unwrap();
        let grid_record = runner.record;

        assert_eq!(grid_record.final_attrs, descent.final_attrs);
        assert_eq!(grid_record.total_evals, descent.total_evals);
        let descent_bins: Vec<Vec<usize>> =
            descent.group_results.iter().map(|g| g.bins.clone()).collect();
        let grid_bins: Vec<Vec<usize>> =
            grid_record.group_results.iter().map(|g| g.bins.clone()).collect();
        assert_eq!(descent_bins, grid_bins);
    }

    #[test]
    fn random_search_basics() {
        let space = grid(&[3, 3]);
        let table = TableReward::separable(
            space.clone(),
            &[vec![0.2, 0.9, 0.1], vec![0.3, 0.1, 0.8]],
        );
        let one = random_search(&space, &table, 1, 5).unwrap();
        assert_eq!(one.total_evals, 1);
        assert_eq!(one.entries.len(), 1);
        assert_eq!(one.final_attrs, one.best_attrs);

        // Best-so-far never decreases.
        let record = random_search(&space, &table, 50, 6).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for e in &record.entries {
            assert!(e.best_reward >= prev);
            prev = e.best_reward;
        }
    }

    #[test]
    fn random_search_finds_optimum_with_generous_budget() {
        // Coupon-collector style bound: 10x the 9-cell enumeration.
        let space = grid(&[3, 3]);
        let table = TableReward::separable(
            space.clone(),
            &[vec![0.2, 0.9, 0.1], vec![0.3, 0.1, 0.8]],
        );
        let (_, best) = table.enumerate_best();
        let mut hits = 0;
        for seed in 0..10u64 {
            let record = random_search(&space, &table, 90, seed).unwrap();
            if record.best_score == best {
                hits += 1;
            }
        }
        assert!(hits >= 9, "optimum found in only {hits}/10 seeds");
    }

    #[test]
    fn exhaustive_search_exact_and_counted() {
        let space = grid(&[3, 3]);
        let table = TableReward::separable(
            space.clone(),
            &[vec![0.2, 0.9, 0.1], vec![0.3, 0.1, 0.8]],
        );
        let counting = CountingEvaluator::new(&table);
        let (bins, score) = exhaustive_search(&space, &counting, 100, 0).unwrap();
        assert_eq!(counting.calls(), 9);
        assert_eq!(bins, vec![1, 2]);
        let (_, oracle) = table.enumerate_best();
        assert_eq!(score, oracle);
    }

    #[test]
    fn exhaustive_search_cap_enforced() {
        let space = grid(&[100, 100, 100]);
        let err = exhaustive_search(&space, &ConstantReward(0.1), 1000, 0);
        assert!(matches!(err, Err(RunError::EnumerationTooLarge { .. })));
    }

    #[test]
    fn budget_report_formulas() {
        let space = grid(&[10; 23]);
        let plan = GroupPlan::new(
            vec![
                (0..7).collect(),
                (7..10).collect(),
                (10..14).collect(),
                (14..17).collect(),
                (17..20).collect(),
                (20..23).collect(),
            ],
            23,
        )
        .unwrap();
        let report = budget_report(&space, &plan, &SdrConfig::default(), 1, None);
        assert_eq!(report.descent_evals, 230);
        assert_eq!(report.sdr_evals, 6 * 50 * 8);
        assert_eq!(report.discrete_cardinality, 1e23);

        let inputs = SpaceSizeInputs {
            s_x: 10.0,
            s_y: 20.0,
            density_range: 5.0,
            num_classes: 3,
            objects_per_class: vec![4, 2, 1],
        };
        let with_spaces = budget_report(&space, &plan, &SdrConfig::default(), 1, Some(&inputs));
        assert_eq!(with_spaces.global_space, Some(125_000.0));
        assert_eq!(
            with_spaces.instance_space,
            Some(200f64.powi(4) * 200f64.powi(2) * 200f64)
        );
    }

    #[test]
    fn sdr_trajectory_is_seed_deterministic() {
        let space = grid(&[4, 4]);
        let table = TableReward::correlated_equal_bins(space.clone(), 0.05, 0.6);
        let plan = GroupPlan::new(vec![vec![0, 1]], 2).unwrap();
        let config = lean_config();
        let a = run_sdr(&space, &plan, &table, &config, 42).unwrap();
        let b = run_sdr(&space, &plan, &table, &config, 42).unwrap();
        assert!(a.same_trajectory(&b));
        let c = run_sdr(&space, &plan, &table, &config, 43).unwrap();
        assert!(!a.same_trajectory(&c));
    }

    #[test]
    fn best_so_far_nondecreasing_everywhere() {
        let space = grid(&[4, 4]);
        let table = TableReward::correlated_equal_bins(space.clone(), 0.05, 0.6);
        let plan = GroupPlan::singletons(2);
        let records = vec![
            run_sdr(&space, &plan, &table, &lean_config(), 7).unwrap(),
            attribute_descent(&space, &table, None, 2, 7).unwrap(),
            random_search(&space, &table, 40, 7).unwrap(),
        ];
        for record in records {
            let mut prev = f64::NEG_INFINITY;
            let mut prev_evals = 0;
            for e in &record.entries {
                assert!(e.best_reward >= prev);
                assert!(e.evals > prev_evals);
                prev = e.best_reward;
                prev_evals = e.evals;
            }
        }
    }

    #[test]
    fn eval_cap_stops_before_overrun() {
        let space = grid(&[4, 4]);
        let counting = CountingEvaluator::new(ConstantReward(0.4));
        let plan = GroupPlan::singletons(2);
        let config = lean_config();
        let mut runner = SdrRunner::new(&space, &plan, &config, 0, GroupMode::Policy).unwrap();
        drive(&mut runner, &counting, Some(100)).unwrap();
        // 100 / 8 = 12 full updates, 96 evaluations.
        assert_eq!(counting.calls(), 96);
        assert_eq!(runner.record().total_evals, 96);
        assert!(!runner.is_done());
    }

    #[test]
    fn evaluator_error_carries_attrs() {
        let space = grid(&[4]);
        let failing = crate::synthetic::FnReward(|_: &AttributeVector, _| {
            Err(EvalError::Failed {
                detail: "backend down".to_string(),
            })
        });
        let err = random_search(&space, &failing, 3, 0).unwrap_err();
        match err {
            RunError::Evaluator { attrs, .. } => assert_eq!(attrs.len(), 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn shuffle_groups_preserves_shapes() {
        let space = grid(&[3; 6]);
        let plan = GroupPlan::new(vec![vec![0, 1, 2], vec![3, 4], vec![5]], 6).unwrap();
        let config = SdrConfig {
            shuffle_groups: true,
            hidden_dims: vec![8],
            ..SdrConfig::default()
        };
        let runner = SdrRunner::new(&space, &plan, &config, 9, GroupMode::Policy).unwrap();
        let shapes: Vec<usize> = runner.resolved_plan().iter().map(Vec::len).collect();
        assert_eq!(shapes, vec![3, 2, 1]);
        crate::attr::validate_group_plan(runner.resolved_plan(), 6).unwrap();
    }
}
