//! The trainable token-level agent: context features, the initial prior and
//! the decoding loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::policy::{Context, LinearSoftmaxPolicy, TokenSample};
use crate::agent::planner::{true_hull, Intent, IntentOp, Planner, PlannerStyle};
use crate::agent::vocab::{
    key_index, parse_response, Grammar, Keyword, Response, Slot, Token, FIRST_CHAR, LAST_CHAR,
    MAX_RESPONSE_TOKENS, VOCAB_SIZE, X_BINS, Y_BINS,
};
use crate::agent::{AgentError, AgentPolicy, StepContext};
use crate::geom::uncovered_point;
use crate::scalar::Scalar;
use crate::sim::observe::Observation;
use crate::sim::state::Action;
use crate::sim::tasks::Task;

const N_SLOT_KINDS: usize = 12;
const N_OPS: usize = 6;

/// One row feature per slot kind.
pub const N_ROWS: usize = N_SLOT_KINDS;

/// Pointer parameters: copy the hinted keyword, coordinate bin, key or
/// character. Raw and normalized coordinates have separate pointers.
pub const P_OP: u32 = 0;
pub const P_XRAW: u32 = 1;
pub const P_XNORM: u32 = 2;
pub const P_YRAW: u32 = 3;
pub const P_YNORM: u32 = 4;
pub const P_KEY: u32 = 5;
pub const P_CHAR: u32 = 6;
pub const N_POINTERS: usize = 7;

fn slot_kind(slot: Slot) -> usize {
    match slot {
        Slot::Start => 0,
        Slot::ThoughtBody(0) => 1,
        Slot::ThoughtBody(_) => 2,
        Slot::Keyword => 3,
        Slot::X(0) => 4,
        Slot::Y(0) => 5,
        Slot::X(_) => 6,
        Slot::Y(_) => 7,
        Slot::Dir => 8,
        Slot::Key(_) => 9,
        Slot::Char(_) => 10,
        Slot::End => 11,
    }
}

fn op_index(op: &IntentOp) -> usize {
    match op {
        IntentOp::Click { double: false } => 0,
        IntentOp::Click { double: true } => 1,
        IntentOp::Type(_) => 2,
        IntentOp::Hotkey(_) => 3,
        IntentOp::Done => 4,
        IntentOp::Wait => 5,
    }
}

const OP_KEYWORDS: [Keyword; N_OPS] = [
    Keyword::Click,
    Keyword::LeftDouble,
    Keyword::Type,
    Keyword::Hotkey,
    Keyword::Finished,
    Keyword::Wait,
];

/// Per-step hint derived from the plan follower and the observation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub op: usize,
    /// Target point as perceived, as raw bins of the observation and as
    /// bins of the observation normalized to the screen grid.
    pub x_raw: Option<u8>,
    pub x_norm: Option<u8>,
    pub y_raw: Option<u8>,
    pub y_norm: Option<u8>,
    pub keys: Vec<u8>,
    pub chars: Vec<u8>,
}

impl Hint {
    pub fn from_intent(intent: &Intent, obs: &Observation) -> Self {
        let mut h = Hint {
            op: op_index(&intent.op),
            ..Default::default()
        };
        if let Some(t) = intent.target {
            let (px, py) = uncovered_point(&t, &intent.covers).unwrap_or_else(|| t.center());
            let bin = |v: i32, n: usize| (v.div_euclid(20)).clamp(0, n as i32 - 1) as u8;
            let norm = |v: i32, dim: i32, n: usize| {
                ((i64::from(v) * n as i64).div_euclid(i64::from(dim.max(1)))).clamp(0, n as i64 - 1) as u8
            };
            h.x_raw = Some(bin(px, X_BINS));
            h.y_raw = Some(bin(py, Y_BINS));
            h.x_norm = Some(norm(px, obs.width, X_BINS));
            h.y_norm = Some(norm(py, obs.height, Y_BINS));
        }
        match &intent.op {
            IntentOp::Hotkey(keys) => h.keys = keys.iter().filter_map(|k| key_index(k)).collect(),
            IntentOp::Type(text) => {
                h.chars = text
                    .bytes()
                    .filter(|b| (FIRST_CHAR..=LAST_CHAR).contains(b))
                    .map(|b| b - FIRST_CHAR)
                    .collect()
            }
            _ => {}
        }
        h
    }

    /// Context for the next token.
    pub fn context(&self, slot: Slot) -> Context {
        let mut c = Context::rows(vec![slot_kind(slot) as u32]);
        let p = &mut c.pointers;
        match slot {
            Slot::Keyword => p.push((P_OP, Token::Keyword(OP_KEYWORDS[self.op]).id())),
            Slot::X(0) => {
                p.extend(self.x_raw.map(|b| (P_XRAW, Token::XBin(b).id())));
                p.extend(self.x_norm.map(|b| (P_XNORM, Token::XBin(b).id())));
            }
            Slot::Y(0) => {
                p.extend(self.y_raw.map(|b| (P_YRAW, Token::YBin(b).id())));
                p.extend(self.y_norm.map(|b| (P_YNORM, Token::YBin(b).id())));
            }
            Slot::Key(i) => {
                let t = self.keys.get(i as usize).map_or(Token::Eos, |&k| Token::Key(k));
                p.push((P_KEY, t.id()));
            }
            Slot::Char(i) => {
                let t = self.chars.get(i as usize).map_or(Token::Eos, |&ch| Token::Char(FIRST_CHAR + ch));
                p.push((P_CHAR, t.id()));
            }
            _ => {}
        }
        c
    }
}

/// Strengths of the initial weights. The prior already knows the response
/// layout and how to copy hints; its grounding leans on raw observation
/// coordinates more than on normalized ones, as a model trained only on
/// full-resolution screens would.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub structure: f64,
    pub keyword: f64,
    pub copy: f64,
    pub bin_bias: f64,
    pub raw_coordinate: f64,
    pub normalized_coordinate: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            structure: 12.0,
            keyword: 10.0,
            copy: 10.0,
            bin_bias: 2.0,
            raw_coordinate: 8.0,
            normalized_coordinate: 7.0,
        }
    }
}

pub fn prior_policy<T: Scalar>(cfg: &PriorConfig) -> LinearSoftmaxPolicy<T> {
    let mut p = LinearSoftmaxPolicy::zeros(VOCAB_SIZE, N_ROWS, N_POINTERS);
    let mut set = |slot: Slot, t: Token, w: f64| *p.weight_mut(slot_kind(slot), t.id() as usize) = T::of(w);
    set(Slot::Start, Token::Thought, cfg.structure);
    set(Slot::ThoughtBody(0), Token::Action, cfg.structure);
    set(Slot::ThoughtBody(1), Token::Action, cfg.structure);
    set(Slot::End, Token::Eos, cfg.structure);
    set(Slot::Dir, Token::Dir(crate::sim::state::ScrollDirection::Down), cfg.structure);
    for b in 0..X_BINS as u8 {
        set(Slot::X(0), Token::XBin(b), cfg.bin_bias);
        set(Slot::X(1), Token::XBin(b), cfg.bin_bias);
    }
    for b in 0..Y_BINS as u8 {
        set(Slot::Y(0), Token::YBin(b), cfg.bin_bias);
        set(Slot::Y(1), Token::YBin(b), cfg.bin_bias);
    }
    let pointers = [
        (P_OP, cfg.keyword),
        (P_XRAW, cfg.raw_coordinate),
        (P_XNORM, cfg.normalized_coordinate),
        (P_YRAW, cfg.raw_coordinate),
        (P_YNORM, cfg.normalized_coordinate),
        (P_KEY, cfg.copy),
        (P_CHAR, cfg.copy),
    ];
    for (i, w) in pointers {
        *p.pointer_mut(i as usize) = T::of(w);
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoding {
    Sample,
    Greedy,
}

/// Agent that decodes responses from a token policy, one episode at a time.
pub struct TokenAgent<'p, T: Scalar> {
    policy: &'p LinearSoftmaxPolicy<T>,
    decoding: Decoding,
    rng: ChaCha8Rng,
    planner: Option<Planner>,
    trace: Vec<TokenSample>,
}

impl<'p, T: Scalar> TokenAgent<'p, T> {
    pub fn new(policy: &'p LinearSoftmaxPolicy<T>, decoding: Decoding, seed: u64) -> Self {
        Self {
            policy,
            decoding,
            rng: ChaCha8Rng::seed_from_u64(seed),
            planner: None,
            trace: Vec::new(),
        }
    }

    /// Tokens generated so far in this episode, with their contexts.
    pub fn take_trace(&mut self) -> Vec<TokenSample> {
        std::mem::take(&mut self.trace)
    }

    fn generate(&mut self, hint: &Hint) -> Response {
        let mut g = Grammar::new();
        let mut tokens = Vec::new();
        while tokens.len() < MAX_RESPONSE_TOKENS {
            let context = hint.context(g.slot());
            let token = match self.decoding {
                Decoding::Sample => self.policy.sample(&context, &mut self.rng),
                Decoding::Greedy => self.policy.greedy(&context),
            };
            self.trace.push(TokenSample { context, token });
            tokens.push(token);
            if g.feed(token).is_err() || g.is_complete() {
                break;
            }
        }
        Response::new(tokens)
    }
}

fn landed(intent: &Intent, action: &Action, obs: &Observation) -> Option<bool> {
    match (&intent.op, action) {
        (IntentOp::Click { double: false }, Action::Click { x, y })
        | (IntentOp::Click { double: true }, Action::LeftDouble { x, y }) => {
            Some(intent.target.is_some_and(|t| true_hull(&t, obs).contains(*x, *y)))
        }
        (IntentOp::Type(_), Action::Type { .. }) | (IntentOp::Hotkey(_), Action::Hotkey { .. }) => Some(true),
        _ => None,
    }
}

impl<T: Scalar> AgentPolicy for TokenAgent<'_, T> {
    fn id(&self) -> String {
        "token_policy".into()
    }

    fn begin(&mut self, task: &Task) -> Result<(), AgentError> {
        self.planner = Some(Planner::new(PlannerStyle::CAREFUL, task.plan()));
        self.trace.clear();
        Ok(())
    }

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Response, AgentError> {
        let mut planner = self
            .planner
            .take()
            .ok_or_else(|| AgentError::Protocol("act called before begin".into()))?;
        let intent = planner.next(ctx.observation);
        let hint = Hint::from_intent(&intent, ctx.observation);
        let response = self.generate(&hint);
        if let Ok(p) = parse_response(&response) {
            if let Some(hit) = landed(&intent, &p.action, ctx.observation) {
                planner.commit(&intent, hit);
            }
        }
        self.planner = Some(planner);
        Ok(response)
    }
}
