//! Newline-delimited text protocol between pedestrians, processors and the
//! dispatch service.
//!
//! ```text
//! REG <client_id> <x> <y> <t>
//! POS <client_id> <x> <y> <t>
//! EVT <processor_id> <class> <direction> <t>
//! OK <id>
//! ERR <reason>
//! WARN <processor_id> <class> <direction> <t>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::class::SoundClass;
use crate::decision::Direction;
use crate::error::{Error, Result};

pub const MAX_CLIENT_ID_LEN: usize = 32;
pub const MAX_FRACTION_DIGITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrReason {
    Malformed,
    UnknownClient,
    Stale,
    UnknownProcessor,
    UnknownVerb,
}

impl ErrReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrReason::Malformed => "malformed",
            ErrReason::UnknownClient => "unknown-client",
            ErrReason::Stale => "stale",
            ErrReason::UnknownProcessor => "unknown-processor",
            ErrReason::UnknownVerb => "unknown-verb",
        }
    }
}

impl fmt::Display for ErrReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "malformed" => ErrReason::Malformed,
            "unknown-client" => ErrReason::UnknownClient,
            "stale" => ErrReason::Stale,
            "unknown-processor" => ErrReason::UnknownProcessor,
            "unknown-verb" => ErrReason::UnknownVerb,
            other => return Err(Error::Parse(format!("unknown error reason {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarningMessage {
    pub processor_id: usize,
    pub sound_class: SoundClass,
    pub direction: Direction,
    pub event_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Reg { client_id: String, x: f64, y: f64, t: f64 },
    Pos { client_id: String, x: f64, y: f64, t: f64 },
    Evt { processor_id: usize, sound_class: SoundClass, direction: Direction, t: f64 },
    Ok(String),
    Err(ErrReason),
    Warn(WarningMessage),
}

pub fn is_valid_client_id(id: &str) -> bool {
    (1..=MAX_CLIENT_ID_LEN).contains(&id.len()) && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Parses `-?digits(.digits{1,3})?`.
pub fn parse_decimal(s: &str) -> Option<f64> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if let Some(f) = frac {
        if f.is_empty() || f.len() > MAX_FRACTION_DIGITS || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    s.parse().ok().filter(|x: &f64| x.is_finite())
}

pub fn format_decimal(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn parse_processor_id(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = format_decimal;
        match self {
            Message::Reg { client_id, x, y, t } => write!(f, "REG {client_id} {} {} {}", d(*x), d(*y), d(*t)),
            Message::Pos { client_id, x, y, t } => write!(f, "POS {client_id} {} {} {}", d(*x), d(*y), d(*t)),
            Message::Evt { processor_id, sound_class, direction, t } => {
                write!(f, "EVT {processor_id} {sound_class} {direction} {}", d(*t))
            }
            Message::Ok(id) => write!(f, "OK {id}"),
            Message::Err(reason) => write!(f, "ERR {reason}"),
            Message::Warn(w) => write!(f, "WARN {} {} {} {}", w.processor_id, w.sound_class, w.direction, d(w.event_time)),
        }
    }
}

/// Why a line failed to decode; maps directly onto an `ERR` reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    Malformed,
    UnknownVerb,
}

impl From<DecodeError> for ErrReason {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::Malformed => ErrReason::Malformed,
            DecodeError::UnknownVerb => ErrReason::UnknownVerb,
        }
    }
}

pub fn decode(line: &str) -> std::result::Result<Message, DecodeError> {
    use DecodeError::Malformed;
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split(' ').collect();
    let num = |s: &str| parse_decimal(s).ok_or(Malformed);
    let id = |s: &str| if is_valid_client_id(s) { Ok(s.to_string()) } else { Err(Malformed) };
    let class = |s: &str| s.parse::<SoundClass>().map_err(|_| Malformed);
    let dir = |s: &str| s.parse::<Direction>().map_err(|_| Malformed);
    let pid = |s: &str| parse_processor_id(s).ok_or(Malformed);
    let arity = |n: usize| if fields.len() == n { Ok(()) } else { Err(Malformed) };
    match fields[0] {
        "REG" => {
            arity(5)?;
            Ok(Message::Reg { client_id: id(fields[1])?, x: num(fields[2])?, y: num(fields[3])?, t: num(fields[4])? })
        }
        "POS" => {
            arity(5)?;
            Ok(Message::Pos { client_id: id(fields[1])?, x: num(fields[2])?, y: num(fields[3])?, t: num(fields[4])? })
        }
        "EVT" => {
            arity(5)?;
            Ok(Message::Evt {
                processor_id: pid(fields[1])?,
                sound_class: class(fields[2])?,
                direction: dir(fields[3])?,
                t: num(fields[4])?,
            })
        }
        "OK" => {
            arity(2)?;
            if fields[1].is_empty() {
                return Err(Malformed);
            }
            Ok(Message::Ok(fields[1].to_string()))
        }
        "ERR" => {
            arity(2)?;
            Ok(Message::Err(fields[1].parse().map_err(|_| Malformed)?))
        }
        "WARN" => {
            arity(5)?;
            Ok(Message::Warn(WarningMessage {
                processor_id: pid(fields[1])?,
                sound_class: class(fields[2])?,
                direction: dir(fields[3])?,
                event_time: num(fields[4])?,
            }))
        }
        _ => Err(DecodeError::UnknownVerb),
    }
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        decode(s).map_err(|e| Error::Parse(format!("{} line {s:?}", ErrReason::from(e))))
    }
}
