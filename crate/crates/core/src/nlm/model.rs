//! The conditional recurrent language model.
//!
//! For a segment x_1..x_T with conditioning (a, f, k):
//!   e_t = E[x_t]
//!   h_t, c_t = LSTM(e_t, h_{t-1}, c_{t-1})
//!   ctx_t = [h_t ∘ a ∘ f ∘ k]
//!   s_t = W·ctx_t + b
//!   o_t = E·s_t            (tied: E is both input lookup and output projection)
//!   y_t = softmax(o_t)     (distribution over the next token)

use crate::nlm::vocab::{ConditioningIds, KIND_ROWS};
use crate::nlm::NlmError;
use crate::tensorcore::{
    lstm_step_backward, lstm_step_cached, softmax_in_place, LstmCache, LstmWeights, Mat, Real,
    TensorError,
};

/// Every dimension of the model; row counts include the unknown rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelDims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub d_author: usize,
    pub d_family: usize,
    pub d_kind: usize,
    pub author_rows: usize,
    pub family_rows: usize,
}

impl ModelDims {
    pub fn ctx_width(&self) -> usize {
        self.hidden + self.d_author + self.d_family + self.d_kind
    }
}

/// All trainable parameters. The embedding matrix is stored once and used
/// for both roles; there is no separate output matrix.
#[derive(Debug, Clone)]
pub struct NlmParams<T> {
    pub dims: ModelDims,
    pub e: Mat<T>,
    pub lstm: LstmWeights<T>,
    pub w: Mat<T>,
    pub b: Vec<T>,
    pub authors: Mat<T>,
    pub families: Mat<T>,
    pub kinds: Mat<T>,
}

/// The f32 parameter set used for training and checkpoints.
pub type ModelParams = NlmParams<f32>;

pub const INIT_SCALE: f64 = 0.08;

/// Parameter slots in checkpoint-blob order.
pub const SLOT_NAMES: [&str; 9] = [
    "E",
    "lstm.wx",
    "lstm.wh",
    "lstm.bias",
    "W",
    "b",
    "authors",
    "families",
    "kinds",
];

impl<T: Real> NlmParams<T> {
    pub fn zeros(dims: ModelDims) -> Self {
        NlmParams {
            dims,
            e: Mat::zeros(dims.vocab, dims.embed),
            lstm: LstmWeights::zeros(dims.embed, dims.hidden),
            w: Mat::zeros(dims.embed, dims.ctx_width()),
            b: vec![T::zero(); dims.embed],
            authors: Mat::zeros(dims.author_rows, dims.d_author),
            families: Mat::zeros(dims.family_rows, dims.d_family),
            kinds: Mat::zeros(KIND_ROWS, dims.d_kind),
        }
    }

    /// Uniform init in [-0.08, 0.08]; LSTM forget bias 1, other biases 0.
    pub fn init<R: rand::Rng>(dims: ModelDims, rng: &mut R) -> Self {
        fn fill<T: Real, R: rand::Rng>(m: &mut Mat<T>, rng: &mut R) {
            for v in m.data_mut() {
                *v = T::of_f64(rng.random_range(-INIT_SCALE..INIT_SCALE));
            }
        }
        let mut p = Self::zeros(dims);
        fill(&mut p.e, rng);
        p.lstm = LstmWeights::init(dims.embed, dims.hidden, INIT_SCALE, rng);
        fill(&mut p.w, rng);
        fill(&mut p.authors, rng);
        fill(&mut p.families, rng);
        fill(&mut p.kinds, rng);
        p
    }

    /// Parameter slices in the documented checkpoint order.
    pub fn slots(&self) -> Vec<(&'static str, &[T])> {
        vec![
            (SLOT_NAMES[0], self.e.data()),
            (SLOT_NAMES[1], self.lstm.wx.data()),
            (SLOT_NAMES[2], self.lstm.wh.data()),
            (SLOT_NAMES[3], self.lstm.bias.as_slice()),
            (SLOT_NAMES[4], self.w.data()),
            (SLOT_NAMES[5], self.b.as_slice()),
            (SLOT_NAMES[6], self.authors.data()),
            (SLOT_NAMES[7], self.families.data()),
            (SLOT_NAMES[8], self.kinds.data()),
        ]
    }

    pub fn slots_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            self.e.data_mut(),
            self.lstm.wx.data_mut(),
            self.lstm.wh.data_mut(),
            self.lstm.bias.as_mut_slice(),
            self.w.data_mut(),
            self.b.as_mut_slice(),
            self.authors.data_mut(),
            self.families.data_mut(),
            self.kinds.data_mut(),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.slots().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn check_finite(&self) -> Result<(), TensorError> {
        for (name, slot) in self.slots() {
            if slot.iter().any(|v| !v.is_finite()) {
                let _ = name;
                return Err(TensorError::NonFinite("model parameters"));
            }
        }
        Ok(())
    }

    fn validate_ids(&self, inputs: &[u32], cond: ConditioningIds) -> Result<(), NlmError> {
        for &id in inputs {
            if id as usize >= self.dims.vocab {
                return Err(NlmError::Tensor(TensorError::DimMismatch {
                    what: "token id",
                    expected: self.dims.vocab,
                    got: id as usize,
                }));
            }
        }
        if cond.author as usize >= self.dims.author_rows
            || cond.family as usize >= self.dims.family_rows
            || cond.kind as usize >= KIND_ROWS
        {
            return Err(NlmError::Tensor(TensorError::DimMismatch {
                what: "conditioning id",
                expected: self.dims.author_rows,
                got: cond.author.max(cond.family).max(cond.kind) as usize,
            }));
        }
        Ok(())
    }

    fn ctx_vector(&self, h: &[T], cond: ConditioningIds) -> Vec<T> {
        let mut ctx = Vec::with_capacity(self.dims.ctx_width());
        ctx.extend_from_slice(h);
        ctx.extend_from_slice(self.authors.row(cond.author as usize));
        ctx.extend_from_slice(self.families.row(cond.family as usize));
        ctx.extend_from_slice(self.kinds.row(cond.kind as usize));
        ctx
    }

    fn step(
        &self,
        id: u32,
        h: &[T],
        c: &[T],
        cond: ConditioningIds,
    ) -> Result<StepResult<T>, NlmError> {
        let e = self.e.row(id as usize);
        let (h_new, c_new, cache) = lstm_step_cached(e, h, c, &self.lstm)?;
        let ctx = self.ctx_vector(&h_new, cond);
        let mut s = vec![T::zero(); self.dims.embed];
        self.w.matvec(&ctx, &mut s);
        for (sv, bv) in s.iter_mut().zip(&self.b) {
            *sv = *sv + *bv;
        }
        let mut probs = vec![T::zero(); self.dims.vocab];
        self.e.matvec(&s, &mut probs);
        softmax_in_place(&mut probs);
        Ok(StepResult {
            h: h_new,
            c: c_new,
            cache,
            ctx,
            s,
            probs,
        })
    }

    /// Per-position next-token distributions for one segment, starting from
    /// zero states. Each row sums to 1.
    pub fn forward(
        &self,
        inputs: &[u32],
        cond: ConditioningIds,
    ) -> Result<Vec<Vec<T>>, NlmError> {
        let tape = self.forward_tape(inputs, cond)?;
        Ok(tape.steps.into_iter().map(|s| s.probs).collect())
    }

    /// Forward pass retaining everything the backward pass needs.
    pub fn forward_tape(
        &self,
        inputs: &[u32],
        cond: ConditioningIds,
    ) -> Result<SegmentTape<T>, NlmError> {
        self.validate_ids(inputs, cond)?;
        let mut h = vec![T::zero(); self.dims.hidden];
        let mut c = vec![T::zero(); self.dims.hidden];
        let mut steps = Vec::with_capacity(inputs.len());
        for &id in inputs {
            let out = self.step(id, &h, &c, cond)?;
            h = out.h.clone();
            c = out.c.clone();
            steps.push(out);
        }
        Ok(SegmentTape {
            inputs: inputs.to_vec(),
            cond,
            steps,
            consumed: false,
        })
    }

    /// Negative log-likelihood of a segment plus the number of predicted
    /// tokens, starting from the given states (which are updated in place
    /// so callers can carry them across consecutive segments).
    pub fn nll_carry(
        &self,
        inputs: &[u32],
        targets: &[u32],
        cond: ConditioningIds,
        h: &mut Vec<T>,
        c: &mut Vec<T>,
    ) -> Result<(f64, usize), NlmError> {
        self.validate_ids(inputs, cond)?;
        let mut nll = 0.0f64;
        for (&id, &target) in inputs.iter().zip(targets) {
            let out = self.step(id, h, c, cond)?;
            let p = out.probs[target as usize].as_f64();
            nll -= p.ln();
            *h = out.h;
            *c = out.c;
        }
        Ok((nll, targets.len()))
    }

    /// Segment NLL from fresh zero states.
    pub fn segment_nll(
        &self,
        inputs: &[u32],
        targets: &[u32],
        cond: ConditioningIds,
    ) -> Result<(f64, usize), NlmError> {
        let mut h = vec![T::zero(); self.dims.hidden];
        let mut c = vec![T::zero(); self.dims.hidden];
        self.nll_carry(inputs, targets, cond, &mut h, &mut c)
    }

    /// Final hidden state after running the whole id sequence with state
    /// carried across its full length.
    pub fn final_state(
        &self,
        ids: &[u32],
        cond: ConditioningIds,
    ) -> Result<Vec<T>, NlmError> {
        self.validate_ids(ids, cond)?;
        let mut h = vec![T::zero(); self.dims.hidden];
        let mut c = vec![T::zero(); self.dims.hidden];
        for &id in ids {
            let out = self.step(id, &h, &c, cond)?;
            h = out.h;
            c = out.c;
        }
        Ok(h)
    }
}

struct StepResult<T> {
    h: Vec<T>,
    c: Vec<T>,
    cache: LstmCache<T>,
    ctx: Vec<T>,
    s: Vec<T>,
    probs: Vec<T>,
}

/// Recorded forward pass over one segment. Backward may run exactly once.
pub struct SegmentTape<T> {
    inputs: Vec<u32>,
    cond: ConditioningIds,
    steps: Vec<StepResult<T>>,
    consumed: bool,
}

impl<T: Real> SegmentTape<T> {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Probability assigned to each target, in segment order.
    pub fn target_probs(&self, targets: &[u32]) -> Vec<f64> {
        self.steps
            .iter()
            .zip(targets)
            .map(|(s, &t)| s.probs[t as usize].as_f64())
            .collect()
    }

    /// Sum of -ln p(target) over the segment, accumulated in f64.
    pub fn nll(&self, targets: &[u32]) -> f64 {
        self.target_probs(targets).iter().map(|p| -p.ln()).sum()
    }

    /// Reverse-mode accumulation through the segment. Gradients of the
    /// cross-entropy (scaled by `scale`) are added into `grads`; the tied
    /// embedding accumulates both its output-projection and input-lookup
    /// contributions. Errors on a second call.
    pub fn backward(
        &mut self,
        params: &NlmParams<T>,
        targets: &[u32],
        grads: &mut NlmParams<T>,
        scale: T,
    ) -> Result<(), NlmError> {
        if self.consumed {
            return Err(NlmError::Tensor(TensorError::DoubleBackward));
        }
        self.consumed = true;
        let dims = params.dims;
        let hid = dims.hidden;
        let mut dh_next = vec![T::zero(); hid];
        let mut dc_next = vec![T::zero(); hid];
        let mut dlogits = vec![T::zero(); dims.vocab];
        let mut ds = vec![T::zero(); dims.embed];
        let mut dctx = vec![T::zero(); dims.ctx_width()];
        for (t, step) in self.steps.iter().enumerate().rev() {
            let target = targets[t] as usize;
            for (dl, p) in dlogits.iter_mut().zip(&step.probs) {
                *dl = *p * scale;
            }
            dlogits[target] = dlogits[target] - scale;
            // output role of the tied embedding: o = E·s
            grads.e.add_outer(&dlogits, &step.s);
            params.e.matvec_t(&dlogits, &mut ds);
            // s = W·ctx + b
            grads.w.add_outer(&ds, &step.ctx);
            for (gb, d) in grads.b.iter_mut().zip(&ds) {
                *gb = *gb + *d;
            }
            params.w.matvec_t(&ds, &mut dctx);
            // split ctx gradient into h and the three feature embeddings
            let mut dh: Vec<T> = dctx[..hid].to_vec();
            for (g, d) in grads
                .authors
                .row_mut(self.cond.author as usize)
                .iter_mut()
                .zip(&dctx[hid..hid + dims.d_author])
            {
                *g = *g + *d;
            }
            let off = hid + dims.d_author;
            for (g, d) in grads
                .families
                .row_mut(self.cond.family as usize)
                .iter_mut()
                .zip(&dctx[off..off + dims.d_family])
            {
                *g = *g + *d;
            }
            let off = off + dims.d_family;
            for (g, d) in grads
                .kinds
                .row_mut(self.cond.kind as usize)
                .iter_mut()
                .zip(&dctx[off..off + dims.d_kind])
            {
                *g = *g + *d;
            }
            for (a, b) in dh.iter_mut().zip(&dh_next) {
                *a = *a + *b;
            }
            let (dx, dh_prev, dc_prev) =
                lstm_step_backward(&dh, &dc_next, &step.cache, &params.lstm, &mut grads.lstm);
            // input role of the tied embedding
            let row = grads.e.row_mut(self.inputs[t] as usize);
            for (g, d) in row.iter_mut().zip(&dx) {
                *g = *g + *d;
            }
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        Ok(())
    }
}
