//! Response vocabulary and the `Thought: ... Action: ...` grammar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::state::{normalize_key, Action, ScrollDirection, SCREEN_H, SCREEN_W};

pub type TokenId = u16;

/// Width and height of one coordinate bin in screen pixels.
pub const BIN_SIZE: i32 = 20;
pub const X_BINS: usize = (SCREEN_W / BIN_SIZE) as usize;
pub const Y_BINS: usize = (SCREEN_H / BIN_SIZE) as usize;
/// Default bound on response length.
pub const MAX_RESPONSE_TOKENS: usize = 64;
/// Longest key chord a response may carry.
pub const MAX_HOTKEY_KEYS: usize = 4;

pub const THOUGHT_WORDS: [&str; 10] = [
    "i", "should", "click", "type", "press", "the", "target", "next", "open", "done",
];
pub const KEYS: [&str; 14] = [
    "ctrl", "alt", "shift", "win", "enter", "esc", "tab", "backspace", "d", "l", "s", "c", "v", "a",
];
pub const FIRST_CHAR: u8 = b' ';
pub const LAST_CHAR: u8 = b'~';

/// Action keywords in token order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyword {
    Click,
    LeftDouble,
    RightSingle,
    Drag,
    Hotkey,
    Type,
    Scroll,
    Wait,
    Finished,
    Fail,
}

impl Keyword {
    pub const ALL: [Keyword; 10] = [
        Keyword::Click,
        Keyword::LeftDouble,
        Keyword::RightSingle,
        Keyword::Drag,
        Keyword::Hotkey,
        Keyword::Type,
        Keyword::Scroll,
        Keyword::Wait,
        Keyword::Finished,
        Keyword::Fail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Keyword::Click => "click",
            Keyword::LeftDouble => "left_double",
            Keyword::RightSingle => "right_single",
            Keyword::Drag => "drag",
            Keyword::Hotkey => "hotkey",
            Keyword::Type => "type",
            Keyword::Scroll => "scroll",
            Keyword::Wait => "wait",
            Keyword::Finished => "finished",
            Keyword::Fail => "fail",
        }
    }

    pub fn of(action: &Action) -> Keyword {
        match action {
            Action::Click { .. } => Keyword::Click,
            Action::LeftDouble { .. } => Keyword::LeftDouble,
            Action::RightSingle { .. } => Keyword::RightSingle,
            Action::Drag { .. } => Keyword::Drag,
            Action::Hotkey { .. } => Keyword::Hotkey,
            Action::Type { .. } => Keyword::Type,
            Action::Scroll { .. } => Keyword::Scroll,
            Action::Wait => Keyword::Wait,
            Action::Done => Keyword::Finished,
            Action::Fail => Keyword::Fail,
        }
    }
}

/// Decoded meaning of a token id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Thought,
    Action,
    Eos,
    Keyword(Keyword),
    Word(u8),
    XBin(u8),
    YBin(u8),
    Key(u8),
    Dir(ScrollDirection),
    Char(u8),
}

const N_STRUCT: usize = 3;
const KW0: usize = N_STRUCT;
const WORD0: usize = KW0 + Keyword::ALL.len();
const X0: usize = WORD0 + THOUGHT_WORDS.len();
const Y0: usize = X0 + X_BINS;
const KEY0: usize = Y0 + Y_BINS;
const DIR0: usize = KEY0 + KEYS.len();
const CHAR0: usize = DIR0 + 2;
pub const VOCAB_SIZE: usize = CHAR0 + (LAST_CHAR - FIRST_CHAR + 1) as usize;

impl Token {
    pub fn id(self) -> TokenId {
        let i = match self {
            Token::Thought => 0,
            Token::Action => 1,
            Token::Eos => 2,
            Token::Keyword(k) => KW0 + Keyword::ALL.iter().position(|&x| x == k).expect("listed"),
            Token::Word(w) => WORD0 + w as usize,
            Token::XBin(b) => X0 + b as usize,
            Token::YBin(b) => Y0 + b as usize,
            Token::Key(k) => KEY0 + k as usize,
            Token::Dir(ScrollDirection::Up) => DIR0,
            Token::Dir(ScrollDirection::Down) => DIR0 + 1,
            Token::Char(c) => CHAR0 + (c - FIRST_CHAR) as usize,
        };
        i as TokenId
    }

    pub fn from_id(id: TokenId) -> Option<Token> {
        let i = id as usize;
        Some(match i {
            0 => Token::Thought,
            1 => Token::Action,
            2 => Token::Eos,
            _ if i < WORD0 => Token::Keyword(Keyword::ALL[i - KW0]),
            _ if i < X0 => Token::Word((i - WORD0) as u8),
            _ if i < Y0 => Token::XBin((i - X0) as u8),
            _ if i < KEY0 => Token::YBin((i - Y0) as u8),
            _ if i < DIR0 => Token::Key((i - KEY0) as u8),
            _ if i == DIR0 => Token::Dir(ScrollDirection::Up),
            _ if i == DIR0 + 1 => Token::Dir(ScrollDirection::Down),
            _ if i < VOCAB_SIZE => Token::Char(FIRST_CHAR + (i - CHAR0) as u8),
            _ => return None,
        })
    }

    /// Human-readable form used when printing responses.
    pub fn text(self) -> String {
        match self {
            Token::Thought => "Thought:".into(),
            Token::Action => "Action:".into(),
            Token::Eos => "<eos>".into(),
            Token::Keyword(k) => k.name().into(),
            Token::Word(w) => THOUGHT_WORDS[w as usize].into(),
            Token::XBin(b) => format!("<x{b}>"),
            Token::YBin(b) => format!("<y{b}>"),
            Token::Key(k) => format!("<{}>", KEYS[k as usize]),
            Token::Dir(ScrollDirection::Up) => "<up>".into(),
            Token::Dir(ScrollDirection::Down) => "<down>".into(),
            Token::Char(c) => (c as char).to_string(),
        }
    }
}

/// Pixel center of an x bin.
pub fn x_center(bin: u8) -> i32 {
    BIN_SIZE * i32::from(bin) + BIN_SIZE / 2
}

pub fn y_center(bin: u8) -> i32 {
    BIN_SIZE * i32::from(bin) + BIN_SIZE / 2
}

/// Bin containing a pixel coordinate, clamped to the screen.
pub fn x_bin(x: i32) -> u8 {
    x.div_euclid(BIN_SIZE).clamp(0, X_BINS as i32 - 1) as u8
}

pub fn y_bin(y: i32) -> u8 {
    y.div_euclid(BIN_SIZE).clamp(0, Y_BINS as i32 - 1) as u8
}

pub fn key_index(key: &str) -> Option<u8> {
    let k = normalize_key(key);
    KEYS.iter().position(|&x| x == k).map(|i| i as u8)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Response {
    pub tokens: Vec<TokenId>,
}

impl Response {
    pub fn new(tokens: Vec<TokenId>) -> Self {
        Self { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-separated rendering of the tokens.
    pub fn to_text(&self) -> String {
        self.tokens
            .iter()
            .map(|&t| Token::from_id(t).map_or_else(|| format!("<?{t}>"), Token::text))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAction {
    pub action: Action,
    pub thought: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("malformed response at token {index}: {reason}")]
pub struct FormatError {
    pub index: usize,
    pub reason: String,
}

/// What the grammar expects next while reading a response left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Start,
    /// Inside the thought segment after `n` words.
    ThoughtBody(u8),
    Keyword,
    /// Coordinate argument number `i` (x, y, x, y).
    X(u8),
    Y(u8),
    Dir,
    /// Key number `i` of a hotkey chord.
    Key(u8),
    /// Character number `i` of typed text.
    Char(u8),
    End,
}

/// Incremental recognizer for the response grammar. Tokens are fed one at a
/// time; `slot()` reports what is expected next.
#[derive(Debug, Clone)]
pub struct Grammar {
    slot: Slot,
    index: usize,
    words: Vec<u8>,
    keyword: Option<Keyword>,
    xs: Vec<u8>,
    ys: Vec<u8>,
    keys: Vec<u8>,
    chars: Vec<u8>,
    dir: Option<ScrollDirection>,
    done: bool,
}

impl Default for Grammar {
    fn default() -> Self {
        Self::new()
    }
}

impl Grammar {
    pub fn new() -> Self {
        Self {
            slot: Slot::Start,
            index: 0,
            words: Vec::new(),
            keyword: None,
            xs: Vec::new(),
            ys: Vec::new(),
            keys: Vec::new(),
            chars: Vec::new(),
            dir: None,
            done: false,
        }
    }

    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn is_complete(&self) -> bool {
        self.done
    }

    pub fn keyword(&self) -> Option<Keyword> {
        self.keyword
    }

    fn fail(&self, reason: &str) -> FormatError {
        FormatError {
            index: self.index,
            reason: reason.to_string(),
        }
    }

    fn coords_needed(k: Keyword) -> usize {
        match k {
            Keyword::Click | Keyword::LeftDouble | Keyword::RightSingle | Keyword::Scroll => 1,
            Keyword::Drag => 2,
            _ => 0,
        }
    }

    fn after_coords(&self) -> Slot {
        let k = self.keyword.expect("keyword read");
        if self.xs.len() < Self::coords_needed(k) {
            Slot::X(self.xs.len() as u8)
        } else if k == Keyword::Scroll {
            Slot::Dir
        } else {
            Slot::End
        }
    }

    pub fn feed(&mut self, id: TokenId) -> Result<(), FormatError> {
        if self.done {
            return Err(self.fail("tokens after end of response"));
        }
        if self.index >= MAX_RESPONSE_TOKENS {
            return Err(self.fail("response too long"));
        }
        let tok = Token::from_id(id).ok_or_else(|| self.fail("unknown token id"))?;
        self.slot = match (self.slot, tok) {
            (Slot::Start, Token::Thought) => Slot::ThoughtBody(0),
            (Slot::Start, _) => return Err(self.fail("expected Thought:")),
            (Slot::ThoughtBody(n), Token::Word(w)) => {
                self.words.push(w);
                Slot::ThoughtBody(n.saturating_add(1))
            }
            (Slot::ThoughtBody(_), Token::Action) => Slot::Keyword,
            (Slot::ThoughtBody(_), _) => return Err(self.fail("expected a thought word or Action:")),
            (Slot::Keyword, Token::Keyword(k)) => {
                self.keyword = Some(k);
                match k {
                    Keyword::Hotkey => Slot::Key(0),
                    Keyword::Type => Slot::Char(0),
                    _ if Self::coords_needed(k) > 0 => Slot::X(0),
                    _ => Slot::End,
                }
            }
            (Slot::Keyword, _) => return Err(self.fail("expected an action keyword")),
            (Slot::X(i), Token::XBin(b)) => {
                self.xs.push(b);
                Slot::Y(i)
            }
            (Slot::X(_), _) => return Err(self.fail("expected an x coordinate")),
            (Slot::Y(_), Token::YBin(b)) => {
                self.ys.push(b);
                self.after_coords()
            }
            (Slot::Y(_), _) => return Err(self.fail("expected a y coordinate")),
            (Slot::Dir, Token::Dir(d)) => {
                self.dir = Some(d);
                Slot::End
            }
            (Slot::Dir, _) => return Err(self.fail("expected a scroll direction")),
            (Slot::Key(i), Token::Key(k)) if (i as usize) < MAX_HOTKEY_KEYS => {
                self.keys.push(k);
                Slot::Key(i + 1)
            }
            (Slot::Key(i), Token::Eos) if i > 0 => {
                self.done = true;
                Slot::End
            }
            (Slot::Key(_), _) => return Err(self.fail("expected a key")),
            (Slot::Char(i), Token::Char(c)) => {
                self.chars.push(c);
                Slot::Char(i.saturating_add(1))
            }
            (Slot::Char(i), Token::Eos) if i > 0 => {
                self.done = true;
                Slot::End
            }
            (Slot::Char(_), _) => return Err(self.fail("expected a character")),
            (Slot::End, Token::Eos) => {
                self.done = true;
                Slot::End
            }
            (Slot::End, _) => return Err(self.fail("expected end of response")),
        };
        self.index += 1;
        Ok(())
    }

    pub fn finish(&self) -> Result<ParsedAction, FormatError> {
        if !self.done {
            return Err(self.fail("response ended early"));
        }
        let k = self.keyword.expect("complete response has a keyword");
        let x = |i: usize| x_center(self.xs[i]);
        let y = |i: usize| y_center(self.ys[i]);
        let action = match k {
            Keyword::Click => Action::Click { x: x(0), y: y(0) },
            Keyword::LeftDouble => Action::LeftDouble { x: x(0), y: y(0) },
            Keyword::RightSingle => Action::RightSingle { x: x(0), y: y(0) },
            Keyword::Drag => Action::Drag {
                x1: x(0),
                y1: y(0),
                x2: x(1),
                y2: y(1),
            },
            Keyword::Hotkey => Action::Hotkey {
                keys: self.keys.iter().map(|&k| KEYS[k as usize].to_string()).collect(),
            },
            Keyword::Type => Action::Type {
                text: self.chars.iter().map(|&c| c as char).collect(),
            },
            Keyword::Scroll => Action::Scroll {
                x: x(0),
                y: y(0),
                direction: self.dir.expect("scroll has a direction"),
            },
            Keyword::Wait => Action::Wait,
            Keyword::Finished => Action::Done,
            Keyword::Fail => Action::Fail,
        };
        let thought = self
            .words
            .iter()
            .map(|&w| THOUGHT_WORDS[w as usize])
            .collect::<Vec<_>>()
            .join(" ");
        Ok(ParsedAction { action, thought })
    }
}

pub fn parse_response(response: &Response) -> Result<ParsedAction, FormatError> {
    if response.is_empty() {
        return Err(FormatError {
            index: 0,
            reason: "empty response".into(),
        });
    }
    let mut g = Grammar::new();
    for &t in &response.tokens {
        g.feed(t)?;
    }
    g.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("thought word '{0}' is not in the vocabulary")]
    Word(String),
    #[error("key '{0}' is not in the vocabulary")]
    Key(String),
    #[error("character {0:?} is not in the vocabulary")]
    Char(char),
    #[error("{0}")]
    Shape(String),
}

/// Encodes a thought and an action. Pixel coordinates snap to the bin
/// containing them, so only bin centers survive a round trip exactly.
pub fn encode(parsed: &ParsedAction) -> Result<Response, EncodeError> {
    let mut t = vec![Token::Thought.id()];
    for w in parsed.thought.split_whitespace() {
        let i = THOUGHT_WORDS
            .iter()
            .position(|&x| x == w)
            .ok_or_else(|| EncodeError::Word(w.to_string()))?;
        t.push(Token::Word(i as u8).id());
    }
    t.push(Token::Action.id());
    t.push(Token::Keyword(Keyword::of(&parsed.action)).id());
    let xy = |t: &mut Vec<TokenId>, x: i32, y: i32| {
        t.push(Token::XBin(x_bin(x)).id());
        t.push(Token::YBin(y_bin(y)).id());
    };
    match &parsed.action {
        Action::Click { x, y } | Action::LeftDouble { x, y } | Action::RightSingle { x, y } => xy(&mut t, *x, *y),
        Action::Drag { x1, y1, x2, y2 } => {
            xy(&mut t, *x1, *y1);
            xy(&mut t, *x2, *y2);
        }
        Action::Scroll { x, y, direction } => {
            xy(&mut t, *x, *y);
            t.push(Token::Dir(*direction).id());
        }
        Action::Hotkey { keys } => {
            if keys.is_empty() || keys.len() > MAX_HOTKEY_KEYS {
                return Err(EncodeError::Shape(format!("hotkey needs 1 to {MAX_HOTKEY_KEYS} keys")));
            }
            for k in keys {
                let i = key_index(k).ok_or_else(|| EncodeError::Key(k.clone()))?;
                t.push(Token::Key(i).id());
            }
        }
        Action::Type { text } => {
            if text.is_empty() {
                return Err(EncodeError::Shape("typed text must not be empty".into()));
            }
            for c in text.chars() {
                if !(c.is_ascii() && (FIRST_CHAR..=LAST_CHAR).contains(&(c as u8))) {
                    return Err(EncodeError::Char(c));
                }
                t.push(Token::Char(c as u8).id());
            }
        }
        Action::Wait | Action::Done | Action::Fail => {}
    }
    t.push(Token::Eos.id());
    if t.len() > MAX_RESPONSE_TOKENS {
        return Err(EncodeError::Shape(format!(
            "response needs {} tokens, limit is {MAX_RESPONSE_TOKENS}",
            t.len()
        )));
    }
    Ok(Response::new(t))
}

/// Encodes an action with an empty thought.
pub fn encode_action(action: &Action) -> Result<Response, EncodeError> {
    encode(&ParsedAction {
        action: action.clone(),
        thought: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(tokens: &[Token]) -> Response {
        Response::new(tokens.iter().map(|t| t.id()).collect())
    }

    #[test]
    fn vocabulary_layout() {
        assert_eq!(VOCAB_SIZE, 284);
        for id in 0..VOCAB_SIZE as TokenId {
            assert_eq!(Token::from_id(id).unwrap().id(), id);
        }
        assert!(Token::from_id(VOCAB_SIZE as TokenId).is_none());
    }

    #[test]
    fn click_decodes_to_bin_centers() {
        let r = ids(&[
            Token::Thought,
            Token::Word(2),
            Token::Action,
            Token::Keyword(Keyword::Click),
            Token::XBin(12),
            Token::YBin(7),
            Token::Eos,
        ]);
        let p = parse_response(&r).unwrap();
        assert_eq!(p.action, Action::Click { x: 250, y: 150 });
        assert_eq!(p.thought, "click");
    }

    #[test]
    fn missing_keyword_fails() {
        let r = ids(&[Token::Thought, Token::Action, Token::XBin(1), Token::YBin(1), Token::Eos]);
        assert_eq!(parse_response(&r).unwrap_err().index, 2);
    }

    #[test]
    fn drag_with_one_pair_fails_at_arity_position() {
        let r = ids(&[
            Token::Thought,
            Token::Action,
            Token::Keyword(Keyword::Drag),
            Token::XBin(1),
            Token::YBin(1),
            Token::Eos,
        ]);
        assert_eq!(parse_response(&r).unwrap_err().index, 5);
    }

    #[test]
    fn truncated_response_points_past_the_end() {
        let r = ids(&[Token::Thought, Token::Action, Token::Keyword(Keyword::Wait)]);
        assert_eq!(parse_response(&r).unwrap_err().index, 3);
    }

    #[test]
    fn encode_snaps_coordinates() {
        let r = encode_action(&Action::Click { x: 255, y: 141 }).unwrap();
        assert_eq!(parse_response(&r).unwrap().action, Action::Click { x: 250, y: 150 });
        let r = encode_action(&Action::hotkey(&["Control", "s"])).unwrap();
        assert_eq!(parse_response(&r).unwrap().action, Action::hotkey(&["ctrl", "s"]));
        assert!(encode_action(&Action::type_text("é")).is_err());
    }
}
