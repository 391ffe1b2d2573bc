//! Signal-chain simulation: line coding, channel, receiver, error control
//! coding, equalization and the stop-and-wait network model.
//!
//! Everything here is a plain function over slices plus an explicit RNG
//! where randomness is involved. [`builtins::register`] exposes the same
//! functions to LabScript.

pub mod bits;
pub mod builtins;
pub mod channel;
pub mod coding;
pub mod equalizer;
pub mod stopwait;

pub use bits::{ber, bitseq2text, bitseq2waveform, text2bitseq, waveform2bitseq};
pub use channel::{channel_transmit, eye_diagram, hist, noise, step_response, ChannelModel};
pub use coding::{parity_check, parity_encode, repetition_decode, repetition_encode};
pub use equalizer::{equalize, equalizer_design};
pub use stopwait::{stopwait_simulate, NetConfig, ProtocolTrace, SenderView};

/// Bit sequences are stored one bit per byte, each 0 or 1.
pub type BitSeq = Vec<u8>;

pub const DEFAULT_SPB: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CommError {
    #[error("character {0:?} is not ASCII (code points 0-127 only)")]
    NonAscii(char),
    #[error("length {len} is not a multiple of {of}")]
    Indivisible { len: usize, of: usize },
    #[error("{0}")]
    Precondition(String),
    #[error("training data is ill-conditioned: the least-squares system is singular")]
    IllConditioned,
}

pub(crate) fn precondition(msg: impl Into<String>) -> CommError {
    CommError::Precondition(msg.into())
}

/// Converts a 0/1 float vector into bits, rejecting anything else.
pub fn to_bits(v: &[f64]) -> Option<BitSeq> {
    v.iter()
        .map(|&x| {
            if x == 0.0 {
                Some(0)
            } else if x == 1.0 {
                Some(1)
            } else {
                None
            }
        })
        .collect()
}

pub fn bits_to_f64(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| f64::from(b)).collect()
}
