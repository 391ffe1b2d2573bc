//! Text/bit conversion, NRZ line coding, the mid-bit sampling receiver and
//! bit error rate.

use super::{precondition, BitSeq, CommError};

/// Eight bits per character, most significant bit first.
pub fn text2bitseq(msg: &str) -> Result<BitSeq, CommError> {
    let mut out = Vec::with_capacity(msg.len() * 8);
    for c in msg.chars() {
        if !c.is_ascii() {
            return Err(CommError::NonAscii(c));
        }
        let code = c as u8;
        out.extend((0..8).rev().map(|k| (code >> k) & 1));
    }
    Ok(out)
}

/// Inverse of [`text2bitseq`]. Byte values above 127 decode to the Latin-1
/// character with that code, as `char` does in scripts.
pub fn bitseq2text(bits: &[u8]) -> Result<String, CommError> {
    if !bits.len().is_multiple_of(8) {
        return Err(CommError::Indivisible { len: bits.len(), of: 8 });
    }
    Ok(bits
        .chunks(8)
        .map(|byte| char::from(byte.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1))))
        .collect())
}

/// NRZ: each bit held for `spb` samples at amplitude 0 or 1.
pub fn bitseq2waveform(bits: &[u8], spb: usize) -> Result<Vec<f64>, CommError> {
    if spb < 1 {
        return Err(precondition("SPB must be at least 1"));
    }
    Ok(bits
        .iter()
        .flat_map(|&b| std::iter::repeat_n(f64::from(b), spb))
        .collect())
}

/// Samples bit k at 1-based index `delay + (k-1)*spb + ceil(spb/2)` and
/// decides 1 when the sample is at or above `threshold`.
pub fn waveform2bitseq(w: &[f64], spb: usize, threshold: f64, delay: usize) -> Result<BitSeq, CommError> {
    if spb < 1 {
        return Err(precondition("SPB must be at least 1"));
    }
    if w.len() < delay + spb {
        return Err(precondition(format!(
            "waveform of length {} is shorter than delay + SPB = {}",
            w.len(),
            delay + spb
        )));
    }
    let nbits = (w.len() - delay) / spb;
    let mid = spb.div_ceil(2);
    Ok((0..nbits)
        .map(|k| {
            let i = delay + k * spb + mid;
            u8::from(w[i - 1] >= threshold)
        })
        .collect())
}

/// Fraction of positions where `tx` and `rx` differ.
pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64, CommError> {
    if tx.len() != rx.len() {
        return Err(precondition(format!(
            "bit sequences have different lengths ({} and {})",
            tx.len(),
            rx.len()
        )));
    }
    if tx.is_empty() {
        return Err(precondition("bit sequences are empty"));
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx.len() as f64)
}
