//! Ground descriptor parser.
//!
//! ```text
//! spec   := sum | simple
//! sum    := "sum(" spec (";" spec)+ ")"
//! simple := kind [ ":" key "=" value ("," key "=" value)* ]
//! ```
//!
//! Missing keys take the defaults listed in [`describe_kinds`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use thiserror::Error;

use super::{bumps, Bumps, Envelope, Ground};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownKind(String),
    UnknownKey { kind: String, key: String },
    DuplicateKey(String),
    OutOfRange { key: String, reason: String },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownKind(k) => write!(f, "unknown kind `{k}`"),
            ParseErrorKind::UnknownKey { kind, key } => {
                write!(f, "unknown key `{key}` for kind `{kind}`")
            }
            ParseErrorKind::DuplicateKey(k) => write!(f, "duplicate key `{k}`"),
            ParseErrorKind::OutOfRange { key, reason } => {
                write!(f, "parameter `{key}` out of range: {reason}")
            }
        }
    }
}

/// A descriptor error with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} (at byte {position})")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

/// Parses a ground descriptor such as `cone:height=0.7071068,radius=1` or
/// `sum(plane:sx=0.2;bumps:seed=3)`.
pub fn parse_ground(spec: &str) -> Result<Ground, ParseError> {
    let mut p = Parser { src: spec, pos: 0 };
    let g = p.spec()?;
    if p.pos != spec.len() {
        return Err(p.error(ParseErrorKind::Syntax(format!(
            "unexpected `{}`",
            &spec[p.pos..]
        ))));
    }
    Ok(g)
}

/// One line per kind: its keys and defaults.
pub fn describe_kinds() -> &'static str {
    "flat\n\
     plane:sx=0,sy=0\n\
     cone:height=0.7071067811865476,radius=1   (radius > 0)\n\
     ridge:s=0.9                               (s >= 0)\n\
     cliff:low=1,high=2\n\
     radial:a=0.2,w=3                          (w > 0)\n\
     bumps:seed=0,n=8,sigma=0.5,spread=2,target=0.7   (or amp=... instead of target)\n\
     envelope:s=0.7071067811865476,x1=..,y1=..,z1=..[,x2=..,y2=..,z2=..]...\n\
     sum(spec;spec[;spec]...)"
}

const KINDS: [&str; 8] = [
    "flat", "plane", "cone", "ridge", "cliff", "radial", "bumps", "envelope",
];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

struct Param<'a> {
    key: &'a str,
    value: &'a str,
    key_pos: usize,
    value_pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn spec(&mut self) -> Result<Ground, ParseError> {
        if self.rest().starts_with("sum(") {
            self.pos += 4;
            let mut parts = vec![self.spec()?];
            loop {
                match self.rest().chars().next() {
                    Some(';') => {
                        self.pos += 1;
                        parts.push(self.spec()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(
                            self.error(ParseErrorKind::Syntax("expected `;` or `)` in sum".into()))
                        )
                    }
                }
            }
            if parts.len() < 2 {
                return Err(self.error(ParseErrorKind::Syntax(
                    "sum needs at least two terms".into(),
                )));
            }
            return Ok(Ground::Sum(parts));
        }
        self.simple()
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn simple(&mut self) -> Result<Ground, ParseError> {
        let kind_pos = self.pos;
        let kind = self.ident();
        if kind.is_empty() {
            return Err(self.error(ParseErrorKind::Syntax("expected a ground kind".into())));
        }
        if !KINDS.contains(&kind) {
            return Err(ParseError {
                position: kind_pos,
                kind: ParseErrorKind::UnknownKind(kind.into()),
            });
        }
        let mut params = Vec::new();
        if self.rest().starts_with(':') {
            self.pos += 1;
            loop {
                let key_pos = self.pos;
                let key = self.ident();
                if key.is_empty() {
                    return Err(self.error(ParseErrorKind::Syntax("expected a key".into())));
                }
                if !self.rest().starts_with('=') {
                    return Err(self.error(ParseErrorKind::Syntax(format!(
                        "expected `=` after `{key}`"
                    ))));
                }
                self.pos += 1;
                let value_pos = self.pos;
                let len = self
                    .rest()
                    .find([',', ';', ')'])
                    .unwrap_or(self.rest().len());
                let value = &self.src[value_pos..value_pos + len];
                if value.is_empty() {
                    return Err(
                        self.error(ParseErrorKind::Syntax(format!("missing value for `{key}`")))
                    );
                }
                self.pos += len;
                if params.iter().any(|p: &Param| p.key == key) {
                    return Err(ParseError {
                        position: key_pos,
                        kind: ParseErrorKind::DuplicateKey(key.into()),
                    });
                }
                params.push(Param {
                    key,
                    value,
                    key_pos,
                    value_pos,
                });
                if self.rest().starts_with(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        build(kind, kind_pos, &params)
    }
}

fn real(p: &Param) -> Result<f64, ParseError> {
    p.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError {
            position: p.value_pos,
            kind: ParseErrorKind::Syntax(format!("`{}` is not a finite real", p.value)),
        })
}

fn integer(p: &Param) -> Result<u64, ParseError> {
    p.value.parse::<u64>().map_err(|_| ParseError {
        position: p.value_pos,
        kind: ParseErrorKind::Syntax(format!("`{}` is not a nonnegative integer", p.value)),
    })
}

fn out_of_range(p: &Param, reason: &str) -> ParseError {
    ParseError {
        position: p.value_pos,
        kind: ParseErrorKind::OutOfRange {
            key: p.key.into(),
            reason: reason.into(),
        },
    }
}

/// Collects the allowed keys of one kind, rejecting anything else.
struct Keys<'p, 'a> {
    kind: &'a str,
    params: &'p [Param<'a>],
}

impl<'p, 'a> Keys<'p, 'a> {
    fn check(&self, allowed: &[&str]) -> Result<(), ParseError> {
        match self.params.iter().find(|p| !allowed.contains(&p.key)) {
            Some(p) => Err(ParseError {
                position: p.key_pos,
                kind: ParseErrorKind::UnknownKey {
                    kind: self.kind.into(),
                    key: p.key.into(),
                },
            }),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Option<&'p Param<'a>> {
        self.params.iter().find(|p| p.key == key)
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, ParseError> {
        self.get(key).map_or(Ok(default), real)
    }

    fn positive_or(&self, key: &str, default: f64) -> Result<f64, ParseError> {
        match self.get(key) {
            None => Ok(default),
            Some(p) => {
                let v = real(p)?;
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err(out_of_range(p, "must be > 0"))
                }
            }
        }
    }

    fn nonneg_or(&self, key: &str, default: f64) -> Result<f64, ParseError> {
        match self.get(key) {
            None => Ok(default),
            Some(p) => {
                let v = real(p)?;
                if v >= 0.0 {
                    Ok(v)
                } else {
                    Err(out_of_range(p, "must be >= 0"))
                }
            }
        }
    }
}

fn build(kind: &str, kind_pos: usize, params: &[Param]) -> Result<Ground, ParseError> {
    let keys = Keys { kind, params };
    match kind {
        "flat" => {
            keys.check(&[])?;
            Ok(Ground::Flat)
        }
        "plane" => {
            keys.check(&["sx", "sy"])?;
            Ok(Ground::Plane {
                sx: keys.real_or("sx", 0.0)?,
                sy: keys.real_or("sy", 0.0)?,
            })
        }
        "cone" => {
            keys.check(&["height", "radius"])?;
            Ok(Ground::Cone {
                height: keys.real_or("height", FRAC_1_SQRT_2)?,
                radius: keys.positive_or("radius", 1.0)?,
            })
        }
        "ridge" => {
            keys.check(&["s"])?;
            Ok(Ground::Ridge {
                slope: keys.nonneg_or("s", 0.9)?,
            })
        }
        "cliff" => {
            keys.check(&["low", "high"])?;
            Ok(Ground::Cliff {
                low: keys.real_or("low", 1.0)?,
                high: keys.real_or("high", 2.0)?,
            })
        }
        "radial" => {
            keys.check(&["a", "w"])?;
            Ok(Ground::Radial {
                amplitude: keys.real_or("a", 0.2)?,
                wavelength: keys.positive_or("w", 3.0)?,
            })
        }
        "bumps" => {
            keys.check(&["seed", "n", "sigma", "spread", "amp", "target"])?;
            let seed = keys.get("seed").map_or(Ok(0), integer)?;
            let count = match keys.get("n") {
                None => 8,
                Some(p) => match integer(p)? {
                    0 => return Err(out_of_range(p, "must be >= 1")),
                    n => n as usize,
                },
            };
            let sigma = keys.positive_or("sigma", 0.5)?;
            let spread = keys.positive_or("spread", bumps::DEFAULT_SPREAD)?;
            let bumps = match (keys.get("amp"), keys.get("target")) {
                (Some(_), Some(t)) => {
                    return Err(out_of_range(t, "give either `amp` or `target`, not both"))
                }
                (Some(_), None) => {
                    let amp = keys.nonneg_or("amp", 0.0)?;
                    Bumps::new(seed, count, sigma, spread, amp)
                }
                (None, _) => {
                    let target = keys.nonneg_or("target", 0.7)?;
                    Bumps::with_target_spread(seed, count, sigma, spread, target)
                }
            };
            Ok(Ground::Bumps(bumps))
        }
        "envelope" => envelope(&keys, kind_pos),
        other => Err(ParseError {
            position: kind_pos,
            kind: ParseErrorKind::UnknownKind(other.into()),
        }),
    }
}

fn envelope(keys: &Keys, kind_pos: usize) -> Result<Ground, ParseError> {
    let slope = keys.nonneg_or("s", FRAC_1_SQRT_2)?;
    let mut anchors: Vec<[Option<f64>; 3]> = Vec::new();
    for p in keys.params {
        if p.key == "s" {
            continue;
        }
        let axis = match p.key.as_bytes()[0] {
            b'x' => 0,
            b'y' => 1,
            b'z' => 2,
            _ => usize::MAX,
        };
        let index = p.key[1..].parse::<usize>().ok().filter(|&i| i >= 1);
        let (axis, index) = match (axis, index) {
            (a, Some(i)) if a < 3 => (a, i - 1),
            _ => {
                return Err(ParseError {
                    position: p.key_pos,
                    kind: ParseErrorKind::UnknownKey {
                        kind: "envelope".into(),
                        key: p.key.into(),
                    },
                })
            }
        };
        if anchors.len() <= index {
            anchors.resize(index + 1, [None; 3]);
        }
        anchors[index][axis] = Some(real(p)?);
    }
    if anchors.is_empty() {
        return Err(ParseError {
            position: kind_pos,
            kind: ParseErrorKind::OutOfRange {
                key: "x1".into(),
                reason: "envelope needs at least one anchor".into(),
            },
        });
    }
    let anchors = anchors
        .into_iter()
        .enumerate()
        .map(|(i, a)| match a {
            [Some(x), Some(y), Some(z)] => Ok([x, y, z]),
            _ => Err(ParseError {
                position: kind_pos,
                kind: ParseErrorKind::OutOfRange {
                    key: format!("x{}", i + 1),
                    reason: format!("anchor {} needs x, y and z", i + 1),
                },
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ground::Envelope(Envelope { slope, anchors }))
}
