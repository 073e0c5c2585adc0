//! Formal SignWriting in ASCII (FSW): parsing, validation and serialization.
//!
//! One sign is `prefix? box coord placed*` where `prefix` is `A` followed by
//! one or more symbol keys, `box` one of `B L M R`, `coord` is `NNNxNNN` with
//! both numbers in 250..=749 and `placed` is a symbol key followed by a
//! coordinate. A key is `S` + three hex digits (base 100..=38b) + fill digit
//! (0..=5) + rotation hex digit. A standalone punctuation key (base
//! 387..=38b) followed by a coordinate is also a sign. Signs are separated
//! by ASCII whitespace.
//!
//! Uppercase hex is accepted on input, output is always lowercase with single
//! spaces between signs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BASE_MIN: u16 = 0x100;
pub const BASE_MAX: u16 = 0x38b;
pub const PUNCTUATION_MIN: u16 = 0x387;
pub const COORD_MIN: u16 = 250;
pub const COORD_MAX: u16 = 749;
pub const FILL_MAX: u8 = 5;
pub const ROTATION_MAX: u8 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolKey {
    pub base: u16,
    pub fill: u8,
    pub rotation: u8,
}

impl SymbolKey {
    pub fn new(base: u16, fill: u8, rotation: u8) -> Self {
        Self { base, fill, rotation }
    }

    pub fn is_punctuation(&self) -> bool {
        (PUNCTUATION_MIN..=BASE_MAX).contains(&self.base)
    }
}

impl fmt::Display for SymbolKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{:03x}{}{:x}", self.base, self.fill, self.rotation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacedSymbol {
    pub key: SymbolKey,
    pub x: u16,
    pub y: u16,
}

/// Sign box marker. `Punctuation` is the pseudo-box of a standalone
/// punctuation symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxMarker {
    B,
    L,
    M,
    R,
    #[serde(rename = "S-punct")]
    Punctuation,
}

impl BoxMarker {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'B' => Some(Self::B),
            b'L' => Some(Self::L),
            b'M' => Some(Self::M),
            b'R' => Some(Self::R),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::B => "B",
            Self::L => "L",
            Self::M => "M",
            Self::R => "R",
            Self::Punctuation => "S-punct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sign {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sort_prefix: Vec<SymbolKey>,
    #[serde(rename = "box")]
    pub box_marker: BoxMarker,
    pub max_x: u16,
    pub max_y: u16,
    pub symbols: Vec<PlacedSymbol>,
}

impl Sign {
    /// Standalone punctuation sign at `(x, y)`.
    pub fn punctuation(key: SymbolKey, x: u16, y: u16) -> Self {
        Self {
            sort_prefix: Vec::new(),
            box_marker: BoxMarker::Punctuation,
            max_x: x,
            max_y: y,
            symbols: vec![PlacedSymbol { key, x, y }],
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.box_marker == BoxMarker::Punctuation {
            if let Some(p) = self.symbols.first() {
                return write!(f, "{}{:03}x{:03}", p.key, p.x, p.y);
            }
        }
        if !self.sort_prefix.is_empty() {
            f.write_str("A")?;
            for key in &self.sort_prefix {
                write!(f, "{key}")?;
            }
        }
        write!(f, "{}{:03}x{:03}", self.box_marker.as_str(), self.max_x, self.max_y)?;
        for p in &self.symbols {
            write!(f, "{}{:03}x{:03}", p.key, p.x, p.y)?;
        }
        Ok(())
    }
}

/// One broken invariant found by [`validate_sign`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FswError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("sign {index} is invalid: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid { index: usize, violations: Vec<Violation> },
}

struct Parser<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn error<T>(&self, offset: usize, expected: &'static str) -> Result<T, FswError> {
        let found = match self.text.get(offset..).and_then(|s| s.chars().next()) {
            Some(c) => format!("{c:?}"),
            None if offset >= self.bytes.len() => "end of input".to_owned(),
            None => format!("byte 0x{:02x}", self.bytes[offset]),
        };
        Err(FswError::Syntax { offset, expected, found })
    }

    fn skip_whitespace(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn hex(&mut self, expected: &'static str) -> Result<u8, FswError> {
        let value = match self.peek() {
            Some(b @ b'0'..=b'9') => b - b'0',
            Some(b @ b'a'..=b'f') => b - b'a' + 10,
            Some(b @ b'A'..=b'F') => b - b'A' + 10,
            _ => return self.error(self.pos, expected),
        };
        self.pos += 1;
        Ok(value)
    }

    fn key(&mut self) -> Result<SymbolKey, FswError> {
        if self.peek() != Some(b'S') {
            return self.error(self.pos, "symbol key 'S'");
        }
        self.pos += 1;
        let base_at = self.pos;
        let b0 = match self.peek() {
            Some(b @ b'1'..=b'3') => b - b'0',
            _ => return self.error(base_at, "symbol base 100-38b"),
        };
        self.pos += 1;
        let b1 = self.hex("symbol base hex digit")?;
        let b2 = self.hex("symbol base hex digit")?;
        let base = u16::from(b0) << 8 | u16::from(b1) << 4 | u16::from(b2);
        if base > BASE_MAX {
            return self.error(base_at, "symbol base 100-38b");
        }
        let fill = match self.peek() {
            Some(b @ b'0'..=b'5') => b - b'0',
            _ => return self.error(self.pos, "fill digit 0-5"),
        };
        self.pos += 1;
        let rotation = self.hex("rotation hex digit 0-f")?;
        Ok(SymbolKey { base, fill, rotation })
    }

    fn number(&mut self) -> Result<u16, FswError> {
        let start = self.pos;
        let mut value = 0u16;
        for _ in 0..3 {
            match self.peek() {
                Some(b @ b'0'..=b'9') => value = value * 10 + u16::from(b - b'0'),
                _ => return self.error(self.pos, "three-digit coordinate"),
            }
            self.pos += 1;
        }
        if !(COORD_MIN..=COORD_MAX).contains(&value) {
            return self.error(start, "coordinate 250-749");
        }
        Ok(value)
    }

    fn coord(&mut self) -> Result<(u16, u16), FswError> {
        let x = self.number()?;
        if self.peek() != Some(b'x') {
            return self.error(self.pos, "'x' between coordinates");
        }
        self.pos += 1;
        let y = self.number()?;
        Ok((x, y))
    }

    fn sign(&mut self) -> Result<Sign, FswError> {
        let mut sort_prefix = Vec::new();
        match self.peek() {
            Some(b'A') => {
                self.pos += 1;
                sort_prefix.push(self.key()?);
                while self.peek() == Some(b'S') {
                    sort_prefix.push(self.key()?);
                }
            }
            Some(b'S') => {
                let at = self.pos;
                let key = self.key()?;
                if !key.is_punctuation() {
                    return self.error(at, "box marker or punctuation symbol S387-S38b");
                }
                let (x, y) = self.coord()?;
                return Ok(Sign::punctuation(key, x, y));
            }
            _ => {}
        }
        let Some(box_marker) = self.peek().and_then(BoxMarker::from_byte) else {
            let expected = if sort_prefix.is_empty() {
                "sign (A, B, L, M, R) or punctuation symbol"
            } else {
                "symbol key or box marker B, L, M, R"
            };
            return self.error(self.pos, expected);
        };
        self.pos += 1;
        let (max_x, max_y) = self.coord()?;
        let mut symbols = Vec::new();
        while self.peek() == Some(b'S') {
            let key = self.key()?;
            let (x, y) = self.coord()?;
            symbols.push(PlacedSymbol { key, x, y });
        }
        Ok(Sign {
            sort_prefix,
            box_marker,
            max_x,
            max_y,
            symbols,
        })
    }
}

/// Parses whitespace-separated FSW signs.
pub fn parse_fsw(text: &str) -> Result<Vec<Sign>, FswError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        text,
        pos: 0,
    };
    let mut signs = Vec::new();
    p.skip_whitespace();
    while p.pos < p.bytes.len() {
        signs.push(p.sign()?);
        match p.peek() {
            None => break,
            Some(b) if b.is_ascii_whitespace() => p.skip_whitespace(),
            Some(_) => return p.error(p.pos, "whitespace between signs or end of input"),
        }
    }
    Ok(signs)
}

/// Parses exactly one sign.
pub fn parse_sign(text: &str) -> Result<Sign, FswError> {
    let mut signs = parse_fsw(text)?;
    match signs.len() {
        1 => Ok(signs.remove(0)),
        0 => Err(FswError::Syntax {
            offset: 0,
            expected: "a sign",
            found: "end of input".into(),
        }),
        _ => {
            let offset = text.trim_start().find(char::is_whitespace).unwrap_or(0) + (text.len() - text.trim_start().len());
            Err(FswError::Syntax {
                offset,
                expected: "end of input after a single sign",
                found: "another sign".into(),
            })
        }
    }
}

fn check_key(key: &SymbolKey, field: &str, out: &mut Vec<Violation>) {
    if !(BASE_MIN..=BASE_MAX).contains(&key.base) {
        out.push(Violation {
            field: format!("{field}.base"),
            constraint: format!("must be in [0x100, 0x38b], got {:#x}", key.base),
        });
    }
    if key.fill > FILL_MAX {
        out.push(Violation {
            field: format!("{field}.fill"),
            constraint: format!("must be in [0, 5], got {}", key.fill),
        });
    }
    if key.rotation > ROTATION_MAX {
        out.push(Violation {
            field: format!("{field}.rotation"),
            constraint: format!("must be in [0, 15], got {}", key.rotation),
        });
    }
}

fn check_coord(value: u16, field: String, out: &mut Vec<Violation>) {
    if !(COORD_MIN..=COORD_MAX).contains(&value) {
        out.push(Violation {
            field,
            constraint: format!("must be in [250, 749], got {value}"),
        });
    }
}

/// Lists every broken invariant of `sign`; empty when it is well formed.
pub fn validate_sign(sign: &Sign) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, key) in sign.sort_prefix.iter().enumerate() {
        check_key(key, &format!("sort_prefix[{i}]"), &mut out);
    }
    check_coord(sign.max_x, "max_x".into(), &mut out);
    check_coord(sign.max_y, "max_y".into(), &mut out);
    for (i, p) in sign.symbols.iter().enumerate() {
        check_key(&p.key, &format!("symbols[{i}].key"), &mut out);
        check_coord(p.x, format!("symbols[{i}].x"), &mut out);
        check_coord(p.y, format!("symbols[{i}].y"), &mut out);
    }
    if sign.box_marker == BoxMarker::Punctuation {
        if !sign.sort_prefix.is_empty() {
            out.push(Violation {
                field: "sort_prefix".into(),
                constraint: "must be empty for a punctuation sign".into(),
            });
        }
        match sign.symbols.as_slice() {
            [p] => {
                if !p.key.is_punctuation() {
                    out.push(Violation {
                        field: "symbols[0].key.base".into(),
                        constraint: format!("punctuation base must be in [0x387, 0x38b], got {:#x}", p.key.base),
                    });
                }
                if (p.x, p.y) != (sign.max_x, sign.max_y) {
                    out.push(Violation {
                        field: "max_x/max_y".into(),
                        constraint: "must equal the punctuation symbol position".into(),
                    });
                }
            }
            _ => out.push(Violation {
                field: "symbols".into(),
                constraint: format!("a punctuation sign carries exactly one symbol, got {}", sign.symbols.len()),
            }),
        }
    }
    out
}

/// Canonical FSW text for `signs`.
pub fn serialize_fsw(signs: &[Sign]) -> Result<String, FswError> {
    let mut out = String::new();
    for (index, sign) in signs.iter().enumerate() {
        let violations = validate_sign(sign);
        if !violations.is_empty() {
            return Err(FswError::Invalid { index, violations });
        }
        if index > 0 {
            out.push(' ');
        }
        out.push_str(&sign.to_string());
    }
    Ok(out)
}
