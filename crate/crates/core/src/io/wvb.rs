//! WVB1 signal files: 16-byte header (`"WVB1"`, channel count, sample count,
//! sampling rate; all u32 LE) followed by channel-interleaved LE f32 samples.

use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::{ChannelRole, VibrationRecord};

pub const MAGIC: [u8; 4] = *b"WVB1";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WvbHeader {
    pub channels: u32,
    pub samples: u32,
    pub sampling_rate_hz: u32,
}

pub fn encode(record: &VibrationRecord) -> Result<Vec<u8>> {
    record.validate()?;
    let channels = u32::try_from(record.channels.len()).map_err(|_| Error::invalid("too many channels"))?;
    let samples = u32::try_from(record.len()).map_err(|_| Error::invalid("too many samples"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * record.channels.len() * record.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&samples.to_le_bytes());
    out.extend_from_slice(&record.sampling_rate_hz.to_le_bytes());
    for i in 0..record.len() {
        for ch in &record.channels {
            out.extend_from_slice(&ch[i].to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_header(bytes: &[u8]) -> Result<WvbHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    Ok(WvbHeader {
        channels: u32_at(bytes, 4),
        samples: u32_at(bytes, 8),
        sampling_rate_hz: u32_at(bytes, 12),
    })
}

/// Decodes samples; channel roles come from the dataset manifest.
pub fn decode(bytes: &[u8], roles: Vec<ChannelRole>) -> Result<VibrationRecord> {
    let h = decode_header(bytes)?;
    if h.channels as usize != roles.len() {
        return Err(Error::HeaderMismatch(format!(
            "file has {} channels, manifest declares {}",
            h.channels,
            roles.len()
        )));
    }
    let (c, n) = (h.channels as usize, h.samples as usize);
    let expected = HEADER_LEN + 4 * c * n;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::HeaderMismatch(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let mut channels = vec![Vec::with_capacity(n); c];
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        channels[k % c].push(f32::from_le_bytes(chunk.try_into().expect("4 bytes")));
    }
    VibrationRecord::new(h.sampling_rate_hz, roles, channels)
}

pub fn write_record(path: &Path, record: &VibrationRecord) -> Result<()> {
    std::fs::write(path, encode(record)?).map_err(|e| Error::io(path, e))
}

pub fn read_record(path: &Path, roles: Vec<ChannelRole>) -> Result<VibrationRecord> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, roles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roles() -> Vec<ChannelRole> {
        vec![ChannelRole::Reference, ChannelRole::Shelf { sensor_id: 1 }]
    }

    fn record() -> VibrationRecord {
        let a = vec![0.0, -0.0, 1.5, f32::MIN_POSITIVE / 2.0, f32::MAX];
        let b = vec![1e-30, -2.25, 3.0, 7.0, f32::EPSILON];
        VibrationRecord::new(51_200, roles(), vec![a, b]).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let r = record();
        let bytes = encode(&r).unwrap();
        assert_eq!(bytes.len(), 16 + 4 * 2 * 5);
        let back = decode(&bytes, roles()).unwrap();
        for (x, y) in r.channels.iter().flatten().zip(back.channels.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(back.sampling_rate_hz, 51_200);
    }

    #[test]
    fn interleaved_layout() {
        let bytes = encode(&record()).unwrap();
        assert_eq!(&bytes[..4], b"WVB1");
        assert_eq!(u32_at(&bytes, 4), 2);
        assert_eq!(u32_at(&bytes, 8), 5);
        assert_eq!(f32::from_le_bytes(bytes[20..24].try_into().unwrap()), 1e-30);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&record()).unwrap();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode(&bytes, roles()), Err(Error::BadMagic(m)) if &m == b"XXXX"));
    }

    #[test]
    fn truncated_payload() {
        // header claims 3 channels but only 2 channels' worth of data follow
        let mut bytes = encode(&record()).unwrap();
        bytes[4..8].copy_from_slice(&3u32.to_le_bytes());
        let three = vec![ChannelRole::Reference, ChannelRole::Shelf { sensor_id: 1 }, ChannelRole::Shelf { sensor_id: 2 }];
        assert!(matches!(decode(&bytes, three), Err(Error::Truncated { .. })));
        assert!(matches!(decode(&bytes[..10], roles()), Err(Error::Truncated { .. })));
    }

    #[test]
    fn manifest_mismatch() {
        let bytes = encode(&record()).unwrap();
        assert!(matches!(decode(&bytes, vec![ChannelRole::Reference]), Err(Error::HeaderMismatch(_))));
        let mut longer = bytes.clone();
        longer.extend_from_slice(&[0; 4]);
        assert!(matches!(decode(&longer, roles()), Err(Error::HeaderMismatch(_))));
    }
}
