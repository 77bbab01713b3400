//! Runs a genome as a concrete optimizer.
//!
//! One step, in order: clip the gradient (if enabled), advance the moment
//! EMAs and the step counter, bias-correct (if enabled), form the weighted
//! sum of primitive terms, then apply the scheduled step together with
//! decoupled weight decay:
//!
//! ```text
//! w' = (1 - lr_t * wd) * w - lr_t * sum_k coeff_k * term_k(g, m_hat, v_hat)
//! ```

use crate::genome::{merge_terms, Genome, PrimitiveKind, Term};
use std::f64::consts::PI;

/// Default elementwise gradient clip threshold.
pub const DEFAULT_CLIP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpreterError {
    #[error("parameter count must be at least 1")]
    EmptyParameters,
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("gradient component {index} is not finite")]
    NonFiniteGradient { index: usize },
    #[error("term {kind} needs the {flag} buffer, which this genome does not keep")]
    MissingBuffer { kind: PrimitiveKind, flag: &'static str },
    #[error("schedule step {step} outside 1..={total}")]
    ScheduleRange { step: u64, total: u64 },
    #[error("numeric divergence at parameter {index}")]
    NumericDivergence { index: usize },
}

/// Per-run mutable optimizer state. `t` counts completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleContext {
    pub total_steps: u64,
    pub step: u64,
}

pub fn init_state(genome: &Genome, param_count: usize) -> Result<OptimizerState, InterpreterError> {
    if param_count == 0 {
        return Err(InterpreterError::EmptyParameters);
    }
    Ok(OptimizerState {
        m: genome.flags.use_momentum.then(|| vec![0.0; param_count]),
        v: genome.flags.use_second_moment.then(|| vec![0.0; param_count]),
        t: 0,
    })
}

/// Learning rate at `ctx.step`: base rate times linear warmup times the
/// cosine factor, each of which is 1 when disabled.
pub fn scheduled_lr(genome: &Genome, ctx: ScheduleContext) -> f64 {
    let t = ctx.step as f64;
    let warmup = match genome.schedule.warmup_steps {
        0 => 1.0,
        w => (t / w as f64).min(1.0),
    };
    let cosine = if genome.schedule.cosine_decay { 0.5 * (1.0 + (PI * t / ctx.total_steps as f64).cos()) } else { 1.0 };
    (genome.lr() * warmup * cosine).max(0.0)
}

fn check_finite(g: &[f64]) -> Result<(), InterpreterError> {
    match g.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(InterpreterError::NonFiniteGradient { index }),
        None => Ok(()),
    }
}

fn check_shape(expected: usize, got: usize) -> Result<(), InterpreterError> {
    if expected == got {
        Ok(())
    } else {
        Err(InterpreterError::Shape { expected, got })
    }
}

/// Advances `t` and the EMAs of `g` and `g^2` for whichever buffers exist.
pub fn update_moments(
    state: &OptimizerState,
    g: &[f64],
    beta1: f64,
    beta2: f64,
) -> Result<OptimizerState, InterpreterError> {
    check_finite(g)?;
    let ema = |buf: &Vec<f64>, beta: f64, f: fn(f64) -> f64| -> Result<Vec<f64>, InterpreterError> {
        check_shape(buf.len(), g.len())?;
        Ok(buf.iter().zip(g).map(|(&b, &x)| beta * b + (1.0 - beta) * f(x)).collect())
    };
    Ok(OptimizerState {
        m: state.m.as_ref().map(|m| ema(m, beta1, |x| x)).transpose()?,
        v: state.v.as_ref().map(|v| ema(v, beta2, |x| x * x)).transpose()?,
        t: state.t + 1,
    })
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn term_value(kind: PrimitiveKind, g: f64, m_hat: f64, v_hat: f64, beta1: f64, eps: f64) -> f64 {
    match kind {
        PrimitiveKind::Grad => g,
        PrimitiveKind::Momentum => m_hat,
        PrimitiveKind::RmsNorm => g / (v_hat.sqrt() + eps),
        PrimitiveKind::AdamTerm => m_hat / (v_hat.sqrt() + eps),
        PrimitiveKind::SignGrad => sign(g),
        PrimitiveKind::UnitGrad => g / (g.abs() + eps),
        PrimitiveKind::Nesterov => m_hat + beta1 * (g - m_hat),
    }
}

fn require(kind: PrimitiveKind, has_m: bool, has_v: bool) -> Result<(), InterpreterError> {
    if kind.needs_momentum() && !has_m {
        return Err(InterpreterError::MissingBuffer { kind, flag: "use_momentum" });
    }
    if kind.needs_second_moment() && !has_v {
        return Err(InterpreterError::MissingBuffer { kind, flag: "use_second_moment" });
    }
    Ok(())
}

/// Evaluates one primitive elementwise.
pub fn compute_term(
    kind: PrimitiveKind,
    g: &[f64],
    m_hat: Option<&[f64]>,
    v_hat: Option<&[f64]>,
    beta1: f64,
    eps: f64,
) -> Result<Vec<f64>, InterpreterError> {
    require(kind, m_hat.is_some(), v_hat.is_some())?;
    if let Some(m) = m_hat {
        check_shape(g.len(), m.len())?;
    }
    if let Some(v) = v_hat {
        check_shape(g.len(), v.len())?;
    }
    Ok((0..g.len())
        .map(|i| {
            let m = m_hat.map_or(0.0, |m| m[i]);
            let v = v_hat.map_or(0.0, |v| v[i]);
            term_value(kind, g[i], m, v, beta1, eps)
        })
        .collect())
}

/// A genome prepared for repeated stepping: terms merged, scalars decoded.
#[derive(Debug, Clone)]
struct Compiled {
    terms: Vec<Term>,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    bias_correction: bool,
    grad_clip: bool,
}

impl Compiled {
    fn new(genome: &Genome) -> Self {
        Compiled {
            terms: merge_terms(&genome.terms),
            beta1: genome.beta1,
            beta2: genome.beta2,
            eps: genome.eps(),
            weight_decay: genome.weight_decay(),
            bias_correction: genome.flags.bias_correction,
            grad_clip: genome.flags.grad_clip,
        }
    }

    fn step_in_place(
        &self,
        state: &mut OptimizerState,
        params: &mut [f64],
        grads: &[f64],
        lr_t: f64,
        clip: f64,
    ) -> Result<(), InterpreterError> {
        check_shape(params.len(), grads.len())?;
        check_finite(grads)?;
        for &Term { kind, .. } in &self.terms {
            require(kind, state.m.is_some(), state.v.is_some())?;
        }
        if let Some(m) = &state.m {
            check_shape(params.len(), m.len())?;
        }
        if let Some(v) = &state.v {
            check_shape(params.len(), v.len())?;
        }

        state.t += 1;
        let t = state.t as i32;
        let (bc1, bc2) =
            if self.bias_correction { (1.0 - self.beta1.powi(t), 1.0 - self.beta2.powi(t)) } else { (1.0, 1.0) };
        let decay = 1.0 - lr_t * self.weight_decay;

        for i in 0..params.len() {
            let g = if self.grad_clip { grads[i].clamp(-clip, clip) } else { grads[i] };
            let m_hat = match state.m.as_mut() {
                Some(m) => {
                    m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                    if self.bias_correction {
                        m[i] / bc1
                    } else {
                        m[i]
                    }
                }
                None => 0.0,
            };
            let v_hat = match state.v.as_mut() {
                Some(v) => {
                    v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                    if self.bias_correction {
                        v[i] / bc2
                    } else {
                        v[i]
                    }
                }
                None => 0.0,
            };
            let mut direction = 0.0;
            for term in &self.terms {
                direction += term.coeff * term_value(term.kind, g, m_hat, v_hat, self.beta1, self.eps);
            }
            let delta = lr_t * direction;
            let next = decay * params[i] - delta;
            if !delta.is_finite() || !next.is_finite() {
                return Err(InterpreterError::NumericDivergence { index: i });
            }
            params[i] = next;
        }
        Ok(())
    }
}

/// Pure transition: returns the updated parameters and state, leaving the
/// inputs untouched. `ctx.step` must be the post-increment step `state.t + 1`.
pub fn step(
    genome: &Genome,
    state: &OptimizerState,
    params: &[f64],
    grads: &[f64],
    ctx: ScheduleContext,
    clip: f64,
) -> Result<(Vec<f64>, OptimizerState), InterpreterError> {
    if ctx.step != state.t + 1 || ctx.step > ctx.total_steps {
        return Err(InterpreterError::ScheduleRange { step: ctx.step, total: ctx.total_steps });
    }
    let mut params = params.to_vec();
    let mut state = state.clone();
    let lr_t = scheduled_lr(genome, ctx);
    Compiled::new(genome).step_in_place(&mut state, &mut params, grads, lr_t, clip)?;
    Ok((params, state))
}

/// Stateful optimizer for training loops; updates parameters in place.
#[derive(Debug, Clone)]
pub struct Optimizer {
    genome: Genome,
    compiled: Compiled,
    state: OptimizerState,
    total_steps: u64,
    clip: f64,
}

impl Optimizer {
    pub fn new(genome: &Genome, param_count: usize, total_steps: u64) -> Result<Self, InterpreterError> {
        if total_steps == 0 {
            return Err(InterpreterError::ScheduleRange { step: 1, total: 0 });
        }
        Ok(Optimizer {
            genome: genome.clone(),
            compiled: Compiled::new(genome),
            state: init_state(genome, param_count)?,
            total_steps,
            clip: DEFAULT_CLIP,
        })
    }

    pub fn with_clip(mut self, clip: f64) -> Self {
        self.clip = clip;
        self
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    /// Learning rate the next call to [`Optimizer::step`] will use.
    pub fn next_lr(&self) -> f64 {
        scheduled_lr(&self.genome, ScheduleContext { total_steps: self.total_steps, step: self.state.t + 1 })
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), InterpreterError> {
        let step = self.state.t + 1;
        if step > self.total_steps {
            return Err(InterpreterError::ScheduleRange { step, total: self.total_steps });
        }
        let lr_t = self.next_lr();
        self.compiled.step_in_place(&mut self.state, params, grads, lr_t, self.clip)
    }
}
