//! Repetition codes (majority decoding) and even-parity block codes.

use super::{precondition, BitSeq, CommError};

pub const DEFAULT_PARITY_BLOCK: usize = 8;

fn check_repetition(k: usize) -> Result<(), CommError> {
    if k >= 1 && k % 2 == 1 {
        Ok(())
    } else {
        Err(precondition(format!(
            "repetition factor k = {k} must be odd and at least 1"
        )))
    }
}

pub fn repetition_encode(bits: &[u8], k: usize) -> Result<BitSeq, CommError> {
    check_repetition(k)?;
    Ok(bits.iter().flat_map(|&b| std::iter::repeat_n(b, k)).collect())
}

/// Majority vote over each block of `k` received bits.
pub fn repetition_decode(bits: &[u8], k: usize) -> Result<BitSeq, CommError> {
    check_repetition(k)?;
    if !bits.len().is_multiple_of(k) {
        return Err(CommError::Indivisible { len: bits.len(), of: k });
    }
    Ok(bits
        .chunks(k)
        .map(|blk| u8::from(blk.iter().filter(|&&b| b == 1).count() * 2 > k))
        .collect())
}

fn check_block(blk: usize) -> Result<(), CommError> {
    if blk >= 1 {
        Ok(())
    } else {
        Err(precondition("parity block size must be at least 1"))
    }
}

/// Appends one even-parity bit after every `blk` data bits.
pub fn parity_encode(bits: &[u8], blk: usize) -> Result<BitSeq, CommError> {
    check_block(blk)?;
    if !bits.len().is_multiple_of(blk) {
        return Err(CommError::Indivisible {
            len: bits.len(),
            of: blk,
        });
    }
    let mut out = Vec::with_capacity(bits.len() + bits.len() / blk);
    for chunk in bits.chunks(blk) {
        out.extend_from_slice(chunk);
        out.push(chunk.iter().fold(0, |acc, &b| acc ^ b));
    }
    Ok(out)
}

/// Strips the parity bits and flags every block whose parity fails.
pub fn parity_check(bits: &[u8], blk: usize) -> Result<(BitSeq, BitSeq), CommError> {
    check_block(blk)?;
    let n = blk + 1;
    if !bits.len().is_multiple_of(n) {
        return Err(CommError::Indivisible { len: bits.len(), of: n });
    }
    let mut data = Vec::with_capacity(bits.len() / n * blk);
    let mut flags = Vec::with_capacity(bits.len() / n);
    for chunk in bits.chunks(n) {
        data.extend_from_slice(&chunk[..blk]);
        flags.push(chunk.iter().fold(0, |acc, &b| acc ^ b));
    }
    Ok((data, flags))
}
