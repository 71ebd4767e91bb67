use std::path::Path;

use super::{AudioClip, ClipError};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("malformed container: {0}")]
    MalformedContainer(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sample encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, WavError> {
    let bytes = std::fs::read(path)?;
    parse_wav(&bytes)
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes a RIFF/WAVE byte stream, keeping channel 0.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioClip, WavError> {
    let malformed = |m: &str| WavError::MalformedContainer(m.to_string());
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing RIFF/WAVE header"));
    }

    let mut format: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                malformed(&format!(
                    "chunk {:?} overruns file",
                    String::from_utf8_lossy(id)
                ))
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(malformed("fmt chunk shorter than 16 bytes"));
                }
                let mut tag = u16_at(body, 0);
                if tag == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(malformed("extensible fmt chunk too short"));
                    }
                    tag = u16_at(body, 24);
                }
                format = Some(Format {
                    tag,
                    channels: u16_at(body, 2),
                    sample_rate: u32_at(body, 4),
                    bits: u16_at(body, 14),
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let format = format.ok_or_else(|| malformed("no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("no data chunk"))?;

    let sample_bytes = match (format.tag, format.bits) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_FLOAT, 32) => 4,
        (tag, bits) => {
            return Err(WavError::UnsupportedEncoding(format!(
                "format tag {tag} with {bits}-bit samples"
            )));
        }
    };
    if !(1..=2).contains(&format.channels) {
        return Err(WavError::UnsupportedEncoding(format!(
            "{} channels",
            format.channels
        )));
    }
    let frame_bytes = sample_bytes * format.channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(malformed("data chunk is not a whole number of frames"));
    }

    let samples: Vec<f64> = data
        .chunks_exact(frame_bytes)
        .map(|frame| match sample_bytes {
            2 => i16::from_le_bytes([frame[0], frame[1]]) as f64 / 32768.0,
            _ => f32::from_le_bytes([frame[0], frame[1], frame[2], frame[3]]) as f64,
        })
        .collect();

    AudioClip::new(samples, format.sample_rate).map_err(|e| match e {
        ClipError::ZeroSampleRate => malformed("sample rate is zero"),
        other => malformed(&other.to_string()),
    })
}

/// Encodes a mono clip. PCM16 clamps to the representable range.
pub fn wav_bytes(clip: &AudioClip, encoding: WavEncoding) -> Vec<u8> {
    let (tag, bits): (u16, u16) = match encoding {
        WavEncoding::Pcm16 => (FORMAT_PCM, 16),
        WavEncoding::Float32 => (FORMAT_FLOAT, 32),
    };
    let block_align = bits / 8;
    let data_len = clip.samples().len() * block_align as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate() * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &x in clip.samples() {
        match encoding {
            WavEncoding::Pcm16 => {
                let v = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
            WavEncoding::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
        }
    }
    out
}

pub fn write_wav(
    path: impl AsRef<Path>,
    clip: &AudioClip,
    encoding: WavEncoding,
) -> Result<(), WavError> {
    std::fs::write(path, wav_bytes(clip, encoding))?;
    Ok(())
}
