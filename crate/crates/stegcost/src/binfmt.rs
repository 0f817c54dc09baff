//! Little-endian binary containers for cost maps, change probabilities and
//! embedding patterns.
//!
//! Every file starts with a 16-byte header: a 4-byte magic (`COST`, `PROB` or
//! `PATT`), then `version`, `width` and `height` as `u32`. The body is
//! row-major:
//!
//! * `COST`: `width*height` `f64` costs, then one wet flag byte (0 or 1) per pixel.
//! * `PROB`: `width*height` `f64` change probabilities, then one rule byte
//!   (0 = gibbs, 1 = capped).
//! * `PATT`: `width*height` `i8` changes in `{-1, 0, 1}`.

use stegcost_core::{ChangeProbabilities, CostMap, EmbeddingPattern, Rule};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("byte 0: expected magic {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("byte 4: unsupported format version {0}")]
    Version(u32),
    #[error("byte {offset}: truncated, need {expected} bytes, file has {actual}")]
    Truncated { offset: usize, expected: usize, actual: usize },
    #[error("byte {offset}: {extra} unexpected trailing bytes")]
    Trailing { offset: usize, extra: usize },
    #[error("byte {offset}: {what}")]
    Invalid { offset: usize, what: String },
}

fn header(magic: &[u8; 4], width: usize, height: usize, body: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + body);
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Checks magic, version and total length; returns `(width, height)`.
fn read_header(bytes: &[u8], magic: &[u8; 4], bytes_per_pixel: usize, trailer: usize) -> Result<(usize, usize), FormatError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != magic {
            return Err(bad_magic(magic, &bytes[..4]));
        }
        return Err(FormatError::Truncated { offset: bytes.len(), expected: HEADER_LEN, actual: bytes.len() });
    }
    if &bytes[..4] != magic {
        return Err(bad_magic(magic, &bytes[..4]));
    }
    let version = u32_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    let (w, h) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize);
    let expected = (w as u128 * h as u128 * bytes_per_pixel as u128) + (HEADER_LEN + trailer) as u128;
    if (bytes.len() as u128) < expected {
        return Err(FormatError::Truncated { offset: bytes.len(), expected: expected as usize, actual: bytes.len() });
    }
    if bytes.len() as u128 > expected {
        return Err(FormatError::Trailing { offset: expected as usize, extra: bytes.len() - expected as usize });
    }
    Ok((w, h))
}

fn bad_magic(expected: &[u8; 4], found: &[u8]) -> FormatError {
    FormatError::BadMagic {
        expected: String::from_utf8_lossy(expected).into_owned(),
        found: String::from_utf8_lossy(found).into_owned(),
    }
}

fn f64s(bytes: &[u8], n: usize) -> Vec<f64> {
    bytes[HEADER_LEN..HEADER_LEN + 8 * n]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

pub fn encode_cost(rho: &CostMap) -> Vec<u8> {
    let n = rho.len();
    let mut out = header(b"COST", rho.width(), rho.height(), 9 * n);
    for c in rho.costs() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend(rho.wet().iter().map(|&w| w as u8));
    out
}

pub fn decode_cost(bytes: &[u8]) -> Result<CostMap, FormatError> {
    let (w, h) = read_header(bytes, b"COST", 9, 0)?;
    let n = w * h;
    let costs = f64s(bytes, n);
    let flags_at = HEADER_LEN + 8 * n;
    let mut wet = Vec::with_capacity(n);
    for (i, &b) in bytes[flags_at..].iter().enumerate() {
        match b {
            0 => wet.push(false),
            1 => wet.push(true),
            _ => return Err(FormatError::Invalid { offset: flags_at + i, what: format!("wet flag {b}") }),
        }
    }
    CostMap::new(w, h, costs, wet).map_err(|e| FormatError::Invalid { offset: HEADER_LEN, what: e.to_string() })
}

fn rule_byte(rule: Rule) -> u8 {
    match rule {
        Rule::Gibbs => 0,
        Rule::Capped => 1,
    }
}

pub fn encode_prob(p: &ChangeProbabilities) -> Vec<u8> {
    let mut out = header(b"PROB", p.width(), p.height(), 8 * p.p_change().len() + 1);
    for q in p.p_change() {
        out.extend_from_slice(&q.to_le_bytes());
    }
    out.push(rule_byte(p.rule()));
    out
}

pub fn decode_prob(bytes: &[u8]) -> Result<ChangeProbabilities, FormatError> {
    let (w, h) = read_header(bytes, b"PROB", 8, 1)?;
    let rule_at = bytes.len() - 1;
    let rule = match bytes[rule_at] {
        0 => Rule::Gibbs,
        1 => Rule::Capped,
        b => return Err(FormatError::Invalid { offset: rule_at, what: format!("rule byte {b}") }),
    };
    ChangeProbabilities::new(w, h, f64s(bytes, w * h), rule)
        .map_err(|e| FormatError::Invalid { offset: HEADER_LEN, what: e.to_string() })
}

pub fn encode_pattern(s: &EmbeddingPattern) -> Vec<u8> {
    let mut out = header(b"PATT", s.width(), s.height(), s.changes().len());
    out.extend(s.changes().iter().map(|&d| d as u8));
    out
}

pub fn decode_pattern(bytes: &[u8]) -> Result<EmbeddingPattern, FormatError> {
    let (w, h) = read_header(bytes, b"PATT", 1, 0)?;
    let changes: Vec<i8> = bytes[HEADER_LEN..].iter().map(|&b| b as i8).collect();
    if let Some(i) = changes.iter().position(|d| !(-1..=1).contains(d)) {
        return Err(FormatError::Invalid { offset: HEADER_LEN + i, what: format!("change {}", changes[i]) });
    }
    EmbeddingPattern::new(w, h, changes).map_err(|e| FormatError::Invalid { offset: HEADER_LEN, what: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use stegcost_core::{cost::dry_cost_map, WET};

    #[test]
    fn cost_layout() {
        let rho = CostMap::new(2, 1, vec![0.5, WET], vec![false, true]).unwrap();
        let bytes = encode_cost(&rho);
        assert_eq!(&bytes[..16], &[b'C', b'O', b'S', b'T', 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &0.5f64.to_le_bytes());
        assert_eq!(&bytes[32..], &[0, 1]);
        assert_eq!(decode_cost(&bytes).unwrap(), rho);
    }

    #[test]
    fn prob_and_pattern_round_trip() {
        let p = ChangeProbabilities::new(3, 1, vec![0.0, 0.1, 1.0 / 3.0], Rule::Capped).unwrap();
        let bytes = encode_prob(&p);
        assert_eq!(*bytes.last().unwrap(), 1);
        assert_eq!(decode_prob(&bytes).unwrap(), p);
        let s = EmbeddingPattern::new(3, 1, vec![-1, 0, 1]).unwrap();
        let bytes = encode_pattern(&s);
        assert_eq!(&bytes[16..], &[0xff, 0, 1]);
        assert_eq!(decode_pattern(&bytes).unwrap(), s);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let rho = dry_cost_map(2, 2, vec![1.0; 4]).unwrap();
        let bytes = encode_cost(&rho);
        assert!(matches!(decode_prob(&bytes), Err(FormatError::BadMagic { .. })));
        assert!(matches!(decode_cost(&bytes[..20]), Err(FormatError::Truncated { .. })));
        assert!(matches!(decode_cost(&bytes[..3]), Err(FormatError::Truncated { .. })));
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(decode_cost(&long), Err(FormatError::Trailing { offset: 52, extra: 1 }));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert_eq!(decode_cost(&v2), Err(FormatError::Version(2)));
        let mut flag = bytes.clone();
        flag[50] = 7;
        assert!(matches!(decode_cost(&flag), Err(FormatError::Invalid { offset: 50, .. })));
        let mut patt = encode_pattern(&EmbeddingPattern::zeros(2, 2));
        patt[17] = 2;
        assert!(matches!(decode_pattern(&patt), Err(FormatError::Invalid { offset: 17, .. })));
    }
}
