//! Newline-delimited JSON protocol for agents running out of process.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::vocab::{encode, ParsedAction, Response, Token, THOUGHT_WORDS};
use super::{AgentError, AgentPolicy, StepContext};
use crate::sim::observe::{ElementView, Observation, PixelGrid};
use crate::sim::state::Action;
use crate::sim::tasks::Task;

pub const PROTOCOL_VERSION: u64 = 1;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Run-length encoded cells: `[run, color, glyph]` triples in row-major
/// order, glyph 0 meaning none.
pub fn rle_cells(grid: &PixelGrid) -> Vec<[u32; 3]> {
    let mut out: Vec<[u32; 3]> = Vec::new();
    for c in &grid.cells {
        let color = c.color as u32;
        let glyph = c.glyph.map_or(0, |g| u32::from(g.get()));
        match out.last_mut() {
            Some(last) if last[1] == color && last[2] == glyph => last[0] += 1,
            _ => out.push([1, color, glyph]),
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct WireObservation<'a> {
    width: i32,
    height: i32,
    cells: Vec<[u32; 3]>,
    elements: &'a [ElementView],
}

#[derive(Debug, Serialize)]
struct WireMemory {
    step: u32,
    summary: String,
}

pub fn step_message(ctx: &StepContext<'_>) -> Value {
    let obs: &Observation = ctx.observation;
    let observation = WireObservation {
        width: obs.width,
        height: obs.height,
        cells: rle_cells(obs.raster()),
        elements: &obs.elements,
    };
    let memory: Vec<WireMemory> = ctx
        .memory
        .entries()
        .map(|e| WireMemory {
            step: e.step,
            summary: e.summary.text.clone(),
        })
        .collect();
    json!({
        "type": "step",
        "instruction": ctx.task.instruction,
        "step": ctx.step,
        "observation": observation,
        "memory": memory,
    })
}

#[derive(Debug, Deserialize)]
struct WireAction {
    variant: String,
    #[serde(default)]
    args: serde_json::Map<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionMessage {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    thought: String,
    action: WireAction,
}

/// Decodes an `action` reply into a response. Thought words outside the
/// vocabulary are dropped; an action the vocabulary cannot express becomes
/// a deliberately malformed response so it counts as a format failure.
pub fn decode_reply(line: &str) -> Result<Response, AgentError> {
    let msg: ActionMessage =
        serde_json::from_str(line).map_err(|e| AgentError::Protocol(format!("bad action message: {e}")))?;
    if msg.kind != "action" {
        return Err(AgentError::Protocol(format!("expected an action message, got '{}'", msg.kind)));
    }
    let mut obj = msg.action.args;
    obj.insert("variant".into(), Value::String(msg.action.variant));
    let action: Action = serde_json::from_value(Value::Object(obj))
        .map_err(|e| AgentError::Protocol(format!("bad action: {e}")))?;
    let thought = msg
        .thought
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .filter(|w| THOUGHT_WORDS.contains(&w.as_str()))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(encode(&ParsedAction { action, thought })
        .unwrap_or_else(|_| Response::new(vec![Token::Thought.id(), Token::Action.id()])))
}

/// Adapter that drives an external agent over a byte stream.
pub struct ExternalAgent {
    name: String,
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    greeted: bool,
    child: Option<Child>,
}

impl ExternalAgent {
    pub fn new<R, W>(name: impl Into<String>, reader: R, writer: W, timeout: Duration) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Self {
            name: name.into(),
            writer: Box::new(writer),
            lines: rx,
            timeout,
            greeted: false,
            child: None,
        }
    }

    /// Starts `program` with `args` and talks to it over stdin/stdout.
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self, AgentError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut agent = Self::new(format!("external:{program}"), stdout, stdin, timeout);
        agent.child = Some(child);
        Ok(agent)
    }

    fn send(&mut self, msg: &Value) -> Result<(), AgentError> {
        let mut line = serde_json::to_string(msg).expect("json value serializes");
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }

    /// Next line, or `None` on timeout.
    fn recv(&mut self) -> Result<Option<String>, AgentError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(Some(line)),
            Ok(Err(e)) => Err(AgentError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(AgentError::Protocol("agent closed the stream".into())),
        }
    }
}

impl Drop for ExternalAgent {
    fn drop(&mut self) {
        if let Some(c) = &mut self.child {
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}

impl AgentPolicy for ExternalAgent {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn begin(&mut self, _task: &Task) -> Result<(), AgentError> {
        if self.greeted {
            return Ok(());
        }
        self.send(&json!({"type": "hello", "protocol": PROTOCOL_VERSION}))?;
        let line = self
            .recv()?
            .ok_or_else(|| AgentError::Protocol("no hello before timeout".into()))?;
        let v: Value =
            serde_json::from_str(&line).map_err(|e| AgentError::Protocol(format!("bad hello: {e}")))?;
        if v.get("type").and_then(Value::as_str) != Some("hello")
            || v.get("protocol").and_then(Value::as_u64) != Some(PROTOCOL_VERSION)
        {
            return Err(AgentError::Protocol(format!("unexpected handshake: {line}")));
        }
        self.greeted = true;
        Ok(())
    }

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Response, AgentError> {
        self.send(&step_message(ctx))?;
        match self.recv()? {
            Some(line) => decode_reply(&line),
            None => Ok(encode(&ParsedAction {
                action: Action::Wait,
                thought: String::new(),
            })
            .expect("wait encodes")),
        }
    }
}
