//! LabScript bindings for the simulation library.
//!
//! | builtin | arguments (defaults) | outputs |
//! |---|---|---|
//! | `text2bitseq` | msg | bits |
//! | `bitseq2text` | bits | msg |
//! | `bitseq2waveform` | bits, SPB (20) | wave |
//! | `waveform2bitseq` | wave, SPB (20), threshold (0.5), delay (0) | bits |
//! | `channel` | wave, a (0.5), d (0), sigma (0.05) | wave |
//! | `step_response` | a, d, n | wave |
//! | `ber` | tx, rx | rate |
//! | `rep_encode` / `rep_decode` | bits, k | bits |
//! | `parity_encode` | bits, blk (8) | bits |
//! | `parity_check` | bits, blk (8) | data, flags |
//! | `eye_diagram` | wave, SPB (20) | none, opens a figure |
//! | `eq_design` | rx, tx, ntaps | taps |
//! | `eq_apply` | wave, taps | wave |
//! | `noise` | n, sigma | samples |
//! | `hist` | x, nbins | centers, counts; plots into the current figure |
//! | `randbits` | n | bits |

use rand::Rng;
use scriptlang::registry::{Args, Arity, BuiltinError, CallContext, Registry, RegistryError};
use scriptlang::{stdlib, Curve, Value};

use super::channel::{channel_transmit, ChannelModel};
use super::{bits, channel, coding, equalizer};
use super::{bits_to_f64, to_bits, BitSeq, CommError, DEFAULT_SPB};

type BResult = Result<Vec<Value>, BuiltinError>;

pub const NAMES: [&str; 17] = [
    "text2bitseq",
    "bitseq2text",
    "bitseq2waveform",
    "waveform2bitseq",
    "channel",
    "step_response",
    "ber",
    "rep_encode",
    "rep_decode",
    "parity_encode",
    "parity_check",
    "eye_diagram",
    "eq_design",
    "eq_apply",
    "noise",
    "hist",
    "randbits",
];

/// The language builtins plus every simulation builtin.
pub fn full_registry() -> Registry {
    let mut reg = stdlib::registry();
    register(&mut reg).expect("simulation builtin names are unique");
    reg
}

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register_fn("text2bitseq", Arity::exact(1), |_, a| {
        let msg = Args::new("text2bitseq", a).string(0)?;
        bits_out("text2bitseq", bits::text2bitseq(msg))
    })?;
    reg.register_fn("bitseq2text", Arity::exact(1), |_, a| {
        let b = bit_arg("bitseq2text", a, 0)?;
        let text = bits::bitseq2text(&b).map_err(|e| fail("bitseq2text", e))?;
        Ok(vec![Value::Str(text)])
    })?;
    reg.register_fn("bitseq2waveform", Arity::range(1, 2), |ctx, a| {
        let b = bit_arg("bitseq2waveform", a, 0)?;
        let spb = Args::new("bitseq2waveform", a).opt_count(1, DEFAULT_SPB)?;
        ctx.check_len(b.len().saturating_mul(spb))?;
        num_out("bitseq2waveform", bits::bitseq2waveform(&b, spb))
    })?;
    reg.register_fn("waveform2bitseq", Arity::range(1, 4), |_, a| {
        let args = Args::new("waveform2bitseq", a);
        let w = args.vector(0)?;
        let spb = args.opt_count(1, DEFAULT_SPB)?;
        let thr = args.opt_scalar(2, 0.5)?;
        let delay = args.opt_count(3, 0)?;
        bits_out("waveform2bitseq", bits::waveform2bitseq(&w, spb, thr, delay))
    })?;
    reg.register_fn("channel", Arity::range(1, 4), channel_builtin)?;
    reg.register_fn("step_response", Arity::exact(3), |ctx, a| {
        let args = Args::new("step_response", a);
        let ch = ChannelModel::new(args.scalar(0)?, args.count(1)?, 0.0).map_err(|e| fail("step_response", e))?;
        let n = args.count(2)?;
        ctx.check_len(n.saturating_add(ch.d))?;
        num_out("step_response", channel::step_response(&ch, n))
    })?;
    reg.register_fn("ber", Arity::exact(2), |_, a| {
        let tx = bit_arg("ber", a, 0)?;
        let rx = bit_arg("ber", a, 1)?;
        let rate = bits::ber(&tx, &rx).map_err(|e| fail("ber", e))?;
        Ok(vec![Value::Num(rate)])
    })?;
    reg.register_fn("rep_encode", Arity::exact(2), |ctx, a| {
        let b = bit_arg("rep_encode", a, 0)?;
        let k = Args::new("rep_encode", a).count(1)?;
        ctx.check_len(b.len().saturating_mul(k))?;
        bits_out("rep_encode", coding::repetition_encode(&b, k))
    })?;
    reg.register_fn("rep_decode", Arity::exact(2), |_, a| {
        let b = bit_arg("rep_decode", a, 0)?;
        let k = Args::new("rep_decode", a).count(1)?;
        bits_out("rep_decode", coding::repetition_decode(&b, k))
    })?;
    reg.register_fn("parity_encode", Arity::range(1, 2), |_, a| {
        let b = bit_arg("parity_encode", a, 0)?;
        let blk = Args::new("parity_encode", a).opt_count(1, coding::DEFAULT_PARITY_BLOCK)?;
        bits_out("parity_encode", coding::parity_encode(&b, blk))
    })?;
    reg.register_fn("parity_check", Arity::range(1, 2).outputs(2), |_, a| {
        let b = bit_arg("parity_check", a, 0)?;
        let blk = Args::new("parity_check", a).opt_count(1, coding::DEFAULT_PARITY_BLOCK)?;
        let (data, flags) = coding::parity_check(&b, blk).map_err(|e| fail("parity_check", e))?;
        Ok(vec![
            Value::from_vec(bits_to_f64(&data)),
            Value::from_vec(bits_to_f64(&flags)),
        ])
    })?;
    reg.register_fn("eye_diagram", Arity::range(1, 2).outputs(0), |ctx, a| {
        let args = Args::new("eye_diagram", a);
        let w = args.vector(0)?;
        let spb = args.opt_count(1, DEFAULT_SPB)?;
        let curves = channel::eye_diagram(&w, spb).map_err(|e| fail("eye_diagram", e))?;
        ctx.new_figure()?;
        for c in curves {
            ctx.add_curve(c)?;
        }
        Ok(vec![])
    })?;
    reg.register_fn("eq_design", Arity::exact(3), |_, a| {
        let args = Args::new("eq_design", a);
        let rx = args.vector(0)?;
        let tx = args.vector(1)?;
        let ntaps = args.count(2)?;
        num_out("eq_design", equalizer::equalizer_design(&rx, &tx, ntaps))
    })?;
    reg.register_fn("eq_apply", Arity::exact(2), |_, a| {
        let args = Args::new("eq_apply", a);
        let w = args.vector(0)?;
        let taps = args.vector(1)?;
        Ok(vec![Value::from_vec(equalizer::equalize(&w, &taps))])
    })?;
    reg.register_fn("noise", Arity::exact(2), |ctx, a| {
        let args = Args::new("noise", a);
        let n = args.count(0)?;
        if n < 1 {
            return Err(BuiltinError::invalid("noise: number of samples must be at least 1"));
        }
        let sigma = args.scalar(1)?;
        ctx.check_len(n)?;
        num_out("noise", channel::noise(n, sigma, ctx.rng()))
    })?;
    reg.register_fn("hist", Arity::exact(2).outputs(2), |ctx, a| {
        let args = Args::new("hist", a);
        let x = args.vector(0)?;
        let nbins = args.count(1)?;
        ctx.check_len(nbins)?;
        let (centers, counts) = channel::hist(&x, nbins).map_err(|e| fail("hist", e))?;
        ctx.add_curve(Curve::new(centers.clone(), counts.clone(), None).expect("equal lengths"))?;
        if ctx.nargout == 0 {
            Ok(vec![])
        } else {
            Ok(vec![Value::from_vec(centers), Value::from_vec(counts)])
        }
    })?;
    reg.register_fn("randbits", Arity::exact(1), |ctx, a| {
        let n = Args::new("randbits", a).count(0)?;
        ctx.check_len(n)?;
        let rng = ctx.rng();
        let v: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
        Ok(vec![Value::from_vec(v)])
    })?;
    Ok(())
}

fn channel_builtin(ctx: &mut CallContext<'_>, a: &[Value]) -> BResult {
    let args = Args::new("channel", a);
    let w = args.vector(0)?;
    let def = ChannelModel::default();
    let ch = ChannelModel::new(
        args.opt_scalar(1, def.a)?,
        args.opt_count(2, def.d)?,
        args.opt_scalar(3, def.sigma)?,
    )
    .map_err(|e| fail("channel", e))?;
    ctx.check_len(w.len().saturating_add(ch.d))?;
    Ok(vec![Value::from_vec(channel_transmit(&w, &ch, ctx.rng()))])
}

fn fail(name: &str, e: CommError) -> BuiltinError {
    BuiltinError::invalid(format!("{name}: {e}"))
}

/// Accepts an empty vector as an empty bit sequence.
fn bit_arg(name: &str, a: &[Value], i: usize) -> Result<BitSeq, BuiltinError> {
    let v = Args::new(name, a).bits(i)?;
    Ok(to_bits(&v).expect("validated as bits"))
}

fn bits_out(name: &str, r: Result<BitSeq, CommError>) -> BResult {
    let b = r.map_err(|e| fail(name, e))?;
    Ok(vec![Value::from_vec(bits_to_f64(&b))])
}

fn num_out(name: &str, r: Result<Vec<f64>, CommError>) -> BResult {
    Ok(vec![Value::from_vec(r.map_err(|e| fail(name, e))?)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_name_is_registered() {
        let reg = full_registry();
        for name in NAMES {
            assert!(reg.contains(name), "{name}");
        }
    }

    #[test]
    fn registering_twice_is_a_duplicate() {
        let mut reg = full_registry();
        assert!(matches!(register(&mut reg), Err(RegistryError::Duplicate(_))));
    }
}
