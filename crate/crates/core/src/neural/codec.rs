//! Binary checkpoint format.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic        8 bytes  "DEDQNCKP"
//! format       u32
//! features     u32      feature layout version
//! state_dim    u32
//! strategies   u32 count, then per name: u32 length + UTF-8 bytes
//! layers       u32 count, then per layer: u32 inputs, u32 outputs
//! parameters   f64 per parameter; per layer weights (row-major) then bias
//! adam         u8 flag; when 1: lr, beta1, beta2, epsilon (f64),
//!              u8 clip flag + f64 clip norm, u64 step, m then v (f64 each)
//! ```

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::{Adam, Layer, NeuralError, QNetwork};
use crate::de::Strategy;
use crate::features::FEATURE_LAYOUT_VERSION;

pub const MAGIC: &[u8; 8] = b"DEDQNCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CodecError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("unsupported checkpoint format version {0} (expected {FORMAT_VERSION})")]
    FormatVersion(u32),
    #[error("checkpoint feature layout version {found}, this build uses {expected}")]
    FeatureLayout { found: u32, expected: u32 },
    #[error("checkpoint state dimension {found} does not match the network input {expected}")]
    StateDim { found: u32, expected: usize },
    #[error("checkpoint strategy table {found:?} differs from this build's")]
    StrategyTable { found: Vec<String> },
    #[error("{0} trailing bytes after checkpoint data")]
    TrailingBytes(usize),
    #[error("invalid flag byte {0}")]
    BadFlag(u8),
    #[error("invalid string in checkpoint")]
    BadString,
    #[error("optimizer state does not match the network")]
    AdamShape,
    #[error(transparent)]
    Network(#[from] NeuralError),
}

/// Serializes a network and, optionally, its optimizer state.
pub fn encode(net: &QNetwork, adam: Option<&Adam>) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + net.parameter_count() * 8 * if adam.is_some() { 3 } else { 1 });
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_u32(&mut out, FEATURE_LAYOUT_VERSION);
    put_u32(&mut out, net.input_dim() as u32);
    put_u32(&mut out, Strategy::COUNT as u32);
    for s in Strategy::ALL {
        put_u32(&mut out, s.name().len() as u32);
        out.extend_from_slice(s.name().as_bytes());
    }
    put_u32(&mut out, net.layers().len() as u32);
    for l in net.layers() {
        put_u32(&mut out, l.inputs() as u32);
        put_u32(&mut out, l.outputs() as u32);
    }
    for s in net.param_slices() {
        put_f64s(&mut out, s);
    }
    match adam {
        None => out.push(0),
        Some(a) => {
            out.push(1);
            put_f64s(&mut out, &[a.learning_rate, a.beta1, a.beta2, a.epsilon]);
            match a.clip_norm {
                None => {
                    out.push(0);
                    put_f64s(&mut out, &[0.0]);
                }
                Some(c) => {
                    out.push(1);
                    put_f64s(&mut out, &[c]);
                }
            }
            out.extend_from_slice(&a.step_count().to_le_bytes());
            put_f64s(&mut out, a.first_moment());
            put_f64s(&mut out, a.second_moment());
        }
    }
    out
}

/// Parses a checkpoint, checking versions and the strategy table.
pub fn decode(bytes: &[u8]) -> Result<(QNetwork, Option<Adam>), CodecError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let format = r.u32()?;
    if format != FORMAT_VERSION {
        return Err(CodecError::FormatVersion(format));
    }
    let layout = r.u32()?;
    if layout != FEATURE_LAYOUT_VERSION {
        return Err(CodecError::FeatureLayout {
            found: layout,
            expected: FEATURE_LAYOUT_VERSION,
        });
    }
    let state_dim = r.u32()?;
    let n_strategies = r.u32()? as usize;
    let mut names = Vec::new();
    for _ in 0..n_strategies {
        let len = r.u32()? as usize;
        let raw = r.take(len)?;
        names.push(String::from(core::str::from_utf8(raw).map_err(|_| CodecError::BadString)?));
        if names.len() > Strategy::COUNT {
            break;
        }
    }
    if names.len() != Strategy::COUNT || names.iter().zip(Strategy::ALL).any(|(n, s)| n != s.name()) {
        return Err(CodecError::StrategyTable { found: names });
    }

    let n_layers = r.u32()? as usize;
    let mut dims = Vec::new();
    for _ in 0..n_layers {
        let i = r.u32()? as usize;
        let o = r.u32()? as usize;
        dims.push((i, o));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for &(i, o) in &dims {
        let count = i.checked_mul(o).ok_or(NeuralError::InvalidArchitecture)?;
        let weights = r.f64s(count)?;
        let bias = r.f64s(o)?;
        layers.push(Layer::new(i, o, weights, bias)?);
    }
    let net = QNetwork::from_layers(layers)?;
    if net.input_dim() != state_dim as usize {
        return Err(CodecError::StateDim {
            found: state_dim,
            expected: net.input_dim(),
        });
    }

    let adam = match r.u8()? {
        0 => None,
        1 => {
            let h = r.f64s(4)?;
            let clip_flag = r.u8()?;
            let clip = r.f64s(1)?[0];
            let clip_norm = match clip_flag {
                0 => None,
                1 => Some(clip),
                f => return Err(CodecError::BadFlag(f)),
            };
            let step = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
            let n = net.parameter_count();
            let m = r.f64s(n)?;
            let v = r.f64s(n)?;
            Some(Adam::from_state(h[0], h[1], h[2], h[3], clip_norm, step, m, v).map_err(|_| CodecError::AdamShape)?)
        }
        f => return Err(CodecError::BadFlag(f)),
    };
    if r.pos != bytes.len() {
        return Err(CodecError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok((net, adam))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(CodecError::Truncated(self.bytes.len())),
        }
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CodecError> {
        let len = n.checked_mul(8).ok_or(CodecError::Truncated(self.bytes.len()))?;
        let raw = self.take(len)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{train_step, TrainSample};

    #[test]
    fn round_trip_with_optimizer() {
        let mut net = QNetwork::new(&[6, 5, 4], 1).unwrap();
        let mut adam = Adam::for_network(&net);
        adam.clip_norm = Some(2.5);
        let s = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let batch = [TrainSample {
            state: &s,
            action: 2,
            target: 1.0,
        }];
        train_step(&mut net, &mut adam, &batch).unwrap();
        let bytes = encode(&net, Some(&adam));
        let (n2, a2) = decode(&bytes).unwrap();
        assert_eq!(n2, net);
        assert_eq!(a2, Some(adam));
        let (n3, a3) = decode(&encode(&net, None)).unwrap();
        assert_eq!(n3, net);
        assert_eq!(a3, None);
    }

    #[test]
    fn truncation_and_trailing_rejected() {
        let net = QNetwork::new(&[3, 2], 1).unwrap();
        let bytes = encode(&net, None);
        for cut in [0, 7, 20, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err(), "cut {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(decode(&extra).unwrap_err(), CodecError::TrailingBytes(1));
    }

    #[test]
    fn versions_checked() {
        let net = QNetwork::new(&[3, 2], 1).unwrap();
        let bytes = encode(&net, None);
        let mut b = bytes.clone();
        b[12..16].copy_from_slice(&(FEATURE_LAYOUT_VERSION + 1).to_le_bytes());
        assert!(matches!(decode(&b), Err(CodecError::FeatureLayout { .. })));
        let mut b = bytes.clone();
        b[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert_eq!(decode(&b).unwrap_err(), CodecError::FormatVersion(7));
        let mut b = bytes.clone();
        b[0] = b'X';
        assert_eq!(decode(&b).unwrap_err(), CodecError::BadMagic);
        // swap the first strategy name's first byte
        let mut b = bytes;
        b[28] = b'x';
        assert!(matches!(decode(&b), Err(CodecError::StrategyTable { .. })));
    }
}
