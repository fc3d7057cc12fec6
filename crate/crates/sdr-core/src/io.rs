//! Checkpoint serialization: a small length-prefixed binary format with a
//! magic header, format version, and payload checksum. Floating-point state
//! is stored as raw little-endian bits, so round-trips are bit-exact.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attr::{AttributeSpace, AttributeSpec, AttributeVector, Family};
use crate::optim::{
    DescentRunner, ExhaustiveRunner, GroupMode, GroupResult, RandomSearchRunner, RunRecord,
    SdrConfig, SdrRunner, UpdateEntry,
};
use crate::policy::{AdamState, EmaBaseline, MlpPolicy};
use crate::rng::RngState;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SDRCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    PolicyBundle = 1,
    SdrRun = 2,
    DescentRun = 3,
    RandomRun = 4,
    ExhaustiveRun = 5,
    HarnessRun = 6,
}

impl PayloadKind {
    fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(Self::PolicyBundle),
            2 => Some(Self::SdrRun),
            3 => Some(Self::DescentRun),
            4 => Some(Self::RandomRun),
            5 => Some(Self::ExhaustiveRun),
            6 => Some(Self::HarnessRun),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint format version {got} is not supported (expected {expected})")]
    UnsupportedVersion { got: u32, expected: u32 },
    #[error("checkpoint payload kind {got} is not {expected:?}")]
    WrongKind { got: u8, expected: PayloadKind },
    #[error("unknown payload kind {0}")]
    UnknownKind(u8),
    #[error("checkpoint is corrupt: {detail}")]
    Corrupt { detail: String },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn corrupt(detail: impl Into<String>) -> CheckpointError {
    CheckpointError::Corrupt {
        detail: detail.into(),
    }
}

/// Append-only little-endian byte sink.
#[derive(Debug, Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u128(&mut self, v: u128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    pub fn put_bool(&mut self, v: bool) {
        self.put_u8(v as u8);
    }

    pub fn put_bytes(&mut self, v: &[u8]) {
        self.put_u64(v.len() as u64);
        self.buf.extend_from_slice(v);
    }

    pub fn put_str(&mut self, v: &str) {
        self.put_bytes(v.as_bytes());
    }

    pub fn put_f64_slice(&mut self, v: &[f64]) {
        self.put_u64(v.len() as u64);
        for &x in v {
            self.put_f64(x);
        }
    }

    pub fn put_usize_slice(&mut self, v: &[usize]) {
        self.put_u64(v.len() as u64);
        for &x in v {
            self.put_u64(x as u64);
        }
    }
}

/// Cursor over checkpoint bytes; every read checks remaining length.
pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.data.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.data.len() {
            return Err(CheckpointError::Truncated);
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn get_u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn get_u128(&mut self) -> Result<u128, CheckpointError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }

    pub fn get_f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_bits(self.get_u64()?))
    }

    pub fn get_bool(&mut self) -> Result<bool, CheckpointError> {
        Ok(self.get_u8()? != 0)
    }

    pub fn get_bytes(&mut self) -> Result<&'a [u8], CheckpointError> {
        let len = self.get_u64()? as usize;
        self.take(len)
    }

    pub fn get_string(&mut self) -> Result<String, CheckpointError> {
        let bytes = self.get_bytes()?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("invalid utf-8 string"))
    }

    pub fn get_f64_vec(&mut self) -> Result<Vec<f64>, CheckpointError> {
        let len = self.get_u64()? as usize;
        (0..len).map(|_| self.get_f64()).collect()
    }

    pub fn get_usize_vec(&mut self) -> Result<Vec<usize>, CheckpointError> {
        let len = self.get_u64()? as usize;
        (0..len).map(|_| Ok(self.get_u64()? as usize)).collect()
    }
}

/// Frames a payload with magic, version, kind, length, and a SHA-256 digest.
pub fn seal(kind: PayloadKind, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 64);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(kind as u8);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    let digest = Sha256::digest(payload);
    out.extend_from_slice(&digest);
    out
}

/// Verifies the frame and returns the payload kind and bytes.
pub fn unseal(data: &[u8]) -> Result<(PayloadKind, &[u8]), CheckpointError> {
    if data.len() < 8 || &data[..8] != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if data.len() < 8 + 4 + 1 + 8 + 32 {
        return Err(CheckpointError::Truncated);
    }
    let version = u32::from_le_bytes(data[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion {
            got: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let kind = PayloadKind::from_u8(data[12]).ok_or(CheckpointError::UnknownKind(data[12]))?;
    let len = u64::from_le_bytes(data[13..21].try_into().unwrap()) as usize;
    if data.len() != 21 + len + 32 {
        return Err(CheckpointError::Truncated);
    }
    let payload = &data[21..21 + len];
    let stored = &data[21 + len..];
    let digest = Sha256::digest(payload);
    if digest.as_slice() != stored {
        return Err(corrupt("payload checksum mismatch"));
    }
    Ok((kind, payload))
}

pub fn expect_kind(
    data: &[u8],
    expected: PayloadKind,
) -> Result<&[u8], CheckpointError> {
    let (kind, payload) = unseal(data)?;
    if kind != expected {
        return Err(CheckpointError::WrongKind {
            got: kind as u8,
            expected,
        });
    }
    Ok(payload)
}

// --- field encoders -------------------------------------------------------

pub fn put_rng_state(w: &mut ByteWriter, state: &RngState) {
    w.put_bytes(&state.seed);
    w.put_u128(state.word_pos);
}

pub fn get_rng_state(r: &mut ByteReader) -> Result<RngState, CheckpointError> {
    let seed_bytes = r.get_bytes()?;
    let seed: [u8; 32] = seed_bytes
        .try_into()
        .map_err(|_| corrupt("rng seed must be 32 bytes"))?;
    Ok(RngState {
        seed,
        word_pos: r.get_u128()?,
    })
}

pub fn put_space(w: &mut ByteWriter, space: &AttributeSpace) {
    w.put_u64(space.len() as u64);
    for spec in space.specs() {
        w.put_str(&spec.name);
        w.put_f64(spec.lo);
        w.put_f64(spec.hi);
        w.put_u64(spec.num_bins as u64);
        w.put_u8(match spec.family {
            Family::Environment => 0,
            Family::Position => 1,
            Family::Density => 2,
        });
    }
}

pub fn get_space(r: &mut ByteReader) -> Result<AttributeSpace, CheckpointError> {
    let n = r.get_u64()? as usize;
    let mut specs = Vec::with_capacity(n);
    for _ in 0..n {
        let name = r.get_string()?;
        let lo = r.get_f64()?;
        let hi = r.get_f64()?;
        let num_bins = r.get_u64()? as usize;
        let family = match r.get_u8()? {
            0 => Family::Environment,
            1 => Family::Position,
            2 => Family::Density,
            other => return Err(corrupt(format!("unknown family tag {other}"))),
        };
        specs.push(
            AttributeSpec::new(name, lo, hi, num_bins, family)
                .map_err(|e| corrupt(e.to_string()))?,
        );
    }
    AttributeSpace::new(specs).map_err(|e| corrupt(e.to_string()))
}

fn put_vector(w: &mut ByteWriter, v: &AttributeVector) {
    w.put_f64_slice(v.values());
}

fn get_vector(r: &mut ByteReader) -> Result<AttributeVector, CheckpointError> {
    Ok(AttributeVector::new(r.get_f64_vec()?))
}

fn put_opt_vector(w: &mut ByteWriter, v: &Option<AttributeVector>) {
    match v {
        Some(v) => {
            w.put_bool(true);
            put_vector(w, v);
        }
        None => w.put_bool(false),
    }
}

fn get_opt_vector(r: &mut ByteReader) -> Result<Option<AttributeVector>, CheckpointError> {
    Ok(if r.get_bool()? {
        Some(get_vector(r)?)
    } else {
        None
    })
}

pub fn put_policy(w: &mut ByteWriter, policy: &MlpPolicy) {
    w.put_u64(policy.input_dim() as u64);
    let hidden: Vec<usize> = policy.layer_dims()[..policy.num_layers() - 1]
        .iter()
        .map(|&(_, out)| out)
        .collect();
    w.put_usize_slice(&hidden);
    w.put_usize_slice(policy.bins_per_head());
    for layer in 0..policy.num_layers() {
        w.put_f64_slice(policy.weights(layer));
        w.put_f64_slice(policy.biases(layer));
    }
}

pub fn get_policy(r: &mut ByteReader) -> Result<MlpPolicy, CheckpointError> {
    let input_dim = r.get_u64()? as usize;
    let hidden = r.get_usize_vec()?;
    let bins_per_head = r.get_usize_vec()?;
    let mut policy = MlpPolicy::zeroed(input_dim, &hidden, &bins_per_head);
    for layer in 0..policy.num_layers() {
        let weights = r.get_f64_vec()?;
        let biases = r.get_f64_vec()?;
        if weights.len() != policy.weights(layer).len()
            || biases.len() != policy.biases(layer).len()
        {
            return Err(corrupt(format!("layer {layer} parameter shape mismatch")));
        }
        policy.weights_mut(layer).copy_from_slice(&weights);
        policy.biases_mut(layer).copy_from_slice(&biases);
    }
    Ok(policy)
}

pub fn put_adam(w: &mut ByteWriter, adam: &AdamState, n_layers: usize) {
    w.put_f64(adam.learning_rate);
    w.put_f64(adam.beta1);
    w.put_f64(adam.beta2);
    w.put_f64(adam.epsilon);
    w.put_u64(adam.step);
    for layer in 0..n_layers {
        let (mw, vw, mb, vb) = adam.moment_slices(layer);
        w.put_f64_slice(mw);
        w.put_f64_slice(vw);
        w.put_f64_slice(mb);
        w.put_f64_slice(vb);
    }
}

pub fn get_adam(r: &mut ByteReader, policy: &MlpPolicy) -> Result<AdamState, CheckpointError> {
    let learning_rate = r.get_f64()?;
    let mut adam = AdamState::new(policy, learning_rate);
    adam.beta1 = r.get_f64()?;
    adam.beta2 = r.get_f64()?;
    adam.epsilon = r.get_f64()?;
    adam.step = r.get_u64()?;
    for layer in 0..policy.num_layers() {
        let mw = r.get_f64_vec()?;
        let vw = r.get_f64_vec()?;
        let mb = r.get_f64_vec()?;
        let vb = r.get_f64_vec()?;
        let (dst_mw, dst_vw, dst_mb, dst_vb) = adam.moment_slices_mut(layer);
        if mw.len() != dst_mw.len() || mb.len() != dst_mb.len() {
            return Err(corrupt(format!("adam layer {layer} shape mismatch")));
        }
        *dst_mw = mw;
        *dst_vw = vw;
        *dst_mb = mb;
        *dst_vb = vb;
    }
    Ok(adam)
}

fn put_record(w: &mut ByteWriter, record: &RunRecord) {
    w.put_u64(record.entries.len() as u64);
    for e in &record.entries {
        w.put_u64(e.update);
        w.put_u64(e.group as u64);
        w.put_f64(e.mean_reward);
        w.put_f64(e.best_reward);
        w.put_u64(e.evals);
        w.put_u64(e.wall_ms);
    }
    w.put_f64(record.best_score);
    put_opt_vector(w, &record.best_attrs);
    w.put_u64(record.group_results.len() as u64);
    for g in &record.group_results {
        w.put_u64(g.group as u64);
        w.put_usize_slice(&g.indices);
        w.put_usize_slice(&g.bins);
        w.put_f64_slice(&g.values);
    }
    put_opt_vector(w, &record.final_attrs);
    w.put_u64(record.total_evals);
}

fn get_record(r: &mut ByteReader) -> Result<RunRecord, CheckpointError> {
    let n = r.get_u64()? as usize;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        entries.push(UpdateEntry {
            update: r.get_u64()?,
            group: r.get_u64()? as usize,
            mean_reward: r.get_f64()?,
            best_reward: r.get_f64()?,
            evals: r.get_u64()?,
            wall_ms: r.get_u64()?,
        });
    }
    let best_score = r.get_f64()?;
    let best_attrs = get_opt_vector(r)?;
    let n_groups = r.get_u64()? as usize;
    let mut group_results = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        group_results.push(GroupResult {
            group: r.get_u64()? as usize,
            indices: r.get_usize_vec()?,
            bins: r.get_usize_vec()?,
            values: r.get_f64_vec()?,
        });
    }
    let final_attrs = get_opt_vector(r)?;
    let total_evals = r.get_u64()?;
    Ok(RunRecord {
        entries,
        best_score,
        best_attrs,
        group_results,
        final_attrs,
        total_evals,
    })
}

fn put_sdr_config(w: &mut ByteWriter, config: &SdrConfig) {
    w.put_u64(config.samples_per_update as u64);
    w.put_u64(config.updates_per_group as u64);
    w.put_f64(config.learning_rate);
    w.put_f64(config.half_width_frac);
    w.put_usize_slice(&config.hidden_dims);
    w.put_f64(config.baseline_decay);
    w.put_u64(config.passes as u64);
    w.put_bool(config.baseline_first);
    w.put_bool(config.no_relaxation);
    w.put_bool(config.single_group);
    w.put_bool(config.shuffle_groups);
}

fn get_sdr_config(r: &mut ByteReader) -> Result<SdrConfig, CheckpointError> {
    Ok(SdrConfig {
        samples_per_update: r.get_u64()? as usize,
        updates_per_group: r.get_u64()? as usize,
        learning_rate: r.get_f64()?,
        half_width_frac: r.get_f64()?,
        hidden_dims: r.get_usize_vec()?,
        baseline_decay: r.get_f64()?,
        passes: r.get_u64()? as usize,
        baseline_first: r.get_bool()?,
        no_relaxation: r.get_bool()?,
        single_group: r.get_bool()?,
        shuffle_groups: r.get_bool()?,
    })
}

// --- policy bundle --------------------------------------------------------

/// Serializes a trained policy with its optimizer and baseline state plus
/// the RNG position; the unit of per-group checkpointing.
pub fn encode_policy_bundle(
    policy: &MlpPolicy,
    adam: &AdamState,
    baseline: &EmaBaseline,
    rng: &RngState,
) -> Vec<u8> {
    let mut w = ByteWriter::new();
    put_policy(&mut w, policy);
    put_adam(&mut w, adam, policy.num_layers());
    w.put_f64(baseline.value);
    w.put_f64(baseline.decay);
    put_rng_state(&mut w, rng);
    seal(PayloadKind::PolicyBundle, &w.into_bytes())
}

pub fn decode_policy_bundle(
    data: &[u8],
) -> Result<(MlpPolicy, AdamState, EmaBaseline, RngState), CheckpointError> {
    let payload = expect_kind(data, PayloadKind::PolicyBundle)?;
    let mut r = ByteReader::new(payload);
    let policy = get_policy(&mut r)?;
    let adam = get_adam(&mut r, &policy)?;
    let baseline = EmaBaseline {
        value: r.get_f64()?,
        decay: r.get_f64()?,
    };
    let rng = get_rng_state(&mut r)?;
    Ok((policy, adam, baseline, rng))
}

// --- runner snapshots -----------------------------------------------------

/// Self-contained snapshot of a coordinate-descent run; restoring continues
/// the run bit-exactly.
pub fn encode_sdr_runner(runner: &SdrRunner) -> Vec<u8> {
    let parts = runner.snapshot_parts();
    let mut w = ByteWriter::new();
    put_space(&mut w, parts.space);
    put_sdr_config(&mut w, parts.config);
    w.put_u8(match parts.mode {
        GroupMode::Policy => 0,
        GroupMode::Exhaustive => 1,
    });
    w.put_u64(parts.plan.len() as u64);
    for group in parts.plan {
        w.put_usize_slice(group);
    }
    put_rng_state(&mut w, &parts.rng);
    w.put_u64(parts.pass);
    w.put_u64(parts.group_pos);
    w.put_u64(parts.update_in_group);
    w.put_u64(parts.update_counter);
    put_vector(&mut w, parts.context);
    match parts.policy {
        Some((policy, adam, baseline)) => {
            w.put_bool(true);
            put_policy(&mut w, policy);
            put_adam(&mut w, adam, policy.num_layers());
            w.put_f64(baseline.value);
            w.put_f64(baseline.decay);
        }
        None => w.put_bool(false),
    }
    put_record(&mut w, parts.record);
    w.put_bool(parts.done);
    seal(PayloadKind::SdrRun, &w.into_bytes())
}

pub fn decode_sdr_runner(data: &[u8]) -> Result<SdrRunner, CheckpointError> {
    let payload = expect_kind(data, PayloadKind::SdrRun)?;
    let mut r = ByteReader::new(payload);
    let space = get_space(&mut r)?;
    let config = get_sdr_config(&mut r)?;
    let mode = match r.get_u8()? {
        0 => GroupMode::Policy,
        1 => GroupMode::Exhaustive,
        other => return Err(corrupt(format!("unknown group mode {other}"))),
    };
    let n_groups = r.get_u64()? as usize;
    let mut plan = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        plan.push(r.get_usize_vec()?);
    }
    let rng = get_rng_state(&mut r)?;
    let pass = r.get_u64()? as usize;
    let group_pos = r.get_u64()? as usize;
    let update_in_group = r.get_u64()? as usize;
    let update_counter = r.get_u64()?;
    let context = get_vector(&mut r)?;
    let policy = if r.get_bool()? {
        let policy = get_policy(&mut r)?;
        let adam = get_adam(&mut r, &policy)?;
        let baseline = EmaBaseline {
            value: r.get_f64()?,
            decay: r.get_f64()?,
        };
        Some((policy, adam, baseline))
    } else {
        None
    };
    let record = get_record(&mut r)?;
    let done = r.get_bool()?;
    Ok(SdrRunner::from_parts(
        space,
        config,
        mode,
        plan,
        rng,
        pass,
        group_pos,
        update_in_group,
        update_counter,
        context,
        policy,
        record,
        done,
    ))
}

pub fn encode_descent_runner(runner: &DescentRunner) -> Vec<u8> {
    let parts = runner.snapshot_parts();
    let mut w = ByteWriter::new();
    put_space(&mut w, parts.space);
    w.put_u64(parts.passes);
    w.put_u64(parts.seed);
    w.put_u64(parts.call_index);
    w.put_u64(parts.pass);
    w.put_u64(parts.attr_idx);
    w.put_u64(parts.sweep_counter);
    put_vector(&mut w, parts.context);
    put_record(&mut w, parts.record);
    w.put_bool(parts.done);
    seal(PayloadKind::DescentRun, &w.into_bytes())
}

pub fn decode_descent_runner(data: &[u8]) -> Result<DescentRunner, CheckpointError> {
    let payload = expect_kind(data, PayloadKind::DescentRun)?;
    let mut r = ByteReader::new(payload);
    let space = get_space(&mut r)?;
    let passes = r.get_u64()? as usize;
    let seed = r.get_u64()?;
    let call_index = r.get_u64()?;
    let pass = r.get_u64()? as usize;
    let attr_idx = r.get_u64()? as usize;
    let sweep_counter = r.get_u64()?;
    let context = get_vector(&mut r)?;
    let record = get_record(&mut r)?;
    let done = r.get_bool()?;
    Ok(DescentRunner::from_parts(
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
    ))
}

pub fn encode_random_runner(runner: &RandomSearchRunner) -> Vec<u8> {
    let parts = runner.snapshot_parts();
    let mut w = ByteWriter::new();
    put_space(&mut w, parts.space);
    w.put_u64(parts.budget);
    w.put_u64(parts.drawn);
    put_rng_state(&mut w, &parts.rng);
    put_record(&mut w, parts.record);
    w.put_bool(parts.done);
    seal(PayloadKind::RandomRun, &w.into_bytes())
}

pub fn decode_random_runner(data: &[u8]) -> Result<RandomSearchRunner, CheckpointError> {
    let payload = expect_kind(data, PayloadKind::RandomRun)?;
    let mut r = ByteReader::new(payload);
    let space = get_space(&mut r)?;
    let budget = r.get_u64()?;
    let drawn = r.get_u64()?;
    let rng = get_rng_state(&mut r)?;
    let record = get_record(&mut r)?;
    let done = r.get_bool()?;
    Ok(RandomSearchRunner::from_parts(
        space, budget, drawn, rng, record, done,
    ))
}

pub fn encode_exhaustive_runner(runner: &ExhaustiveRunner) -> Vec<u8> {
    let parts = runner.snapshot_parts();
    let mut w = ByteWriter::new();
    put_space(&mut w, parts.space);
    w.put_usize_slice(parts.bins);
    w.put_u64(parts.index);
    w.put_u64(parts.total);
    w.put_u64(parts.eval_seed);
    put_record(&mut w, parts.record);
    w.put_bool(parts.done);
    seal(PayloadKind::ExhaustiveRun, &w.into_bytes())
}

pub fn decode_exhaustive_runner(data: &[u8]) -> Result<ExhaustiveRunner, CheckpointError> {
    let payload = expect_kind(data, PayloadKind::ExhaustiveRun)?;
    let mut r = ByteReader::new(payload);
    let space = get_space(&mut r)?;
    let bins = r.get_usize_vec()?;
    let index = r.get_u64()?;
    let total = r.get_u64()?;
    let eval_seed = r.get_u64()?;
    let record = get_record(&mut r)?;
    let done = r.get_bool()?;
    Ok(ExhaustiveRunner::from_parts(
        space, bins, index, total, eval_seed, record, done,
    ))
}
