//! Frozen expectations for the simulation library, each computed by an
//! independent route (base-2 conversion, direct iteration, nalgebra least
//! squares, explicit construction).

use commlab::commsim::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Repeated division by two, most significant bit first.
fn byte_oracle(mut code: u32) -> Vec<u8> {
    let mut bits = Vec::new();
    for _ in 0..8 {
        bits.push((code % 2) as u8);
        code /= 2;
    }
    bits.reverse();
    bits
}

#[test]
fn letter_f_matches_base2_oracle() {
    assert_eq!(byte_oracle('F' as u32), vec![0, 1, 0, 0, 0, 1, 1, 0]);
    assert_eq!(text2bitseq("F").unwrap(), vec![0, 1, 0, 0, 0, 1, 1, 0]);
}

#[test]
fn finished_message_bits() {
    let bits = text2bitseq("Finished!").unwrap();
    assert_eq!(bits.len(), 72);
    assert_eq!(&bits[..8], &byte_oracle(70)[..]);
    let oracle: Vec<u8> = "Finished!".chars().flat_map(|c| byte_oracle(c as u32)).collect();
    assert_eq!(bits, oracle);
}

#[test]
fn empty_and_round_trip_text() {
    assert!(text2bitseq("").unwrap().is_empty());
    assert_eq!(bitseq2text(&[]).unwrap(), "");
    assert_eq!(bitseq2text(&text2bitseq("Hello!").unwrap()).unwrap(), "Hello!");
}

#[test]
fn nrz_examples() {
    assert_eq!(
        bitseq2waveform(&[1, 0, 1], 2).unwrap(),
        vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0]
    );
    assert_eq!(bitseq2waveform(&[1], 10).unwrap(), vec![1.0; 10]);
    assert_eq!(bitseq2waveform(&[0; 72], 20).unwrap().len(), 1440);
    assert!(bitseq2waveform(&[1], 0).is_err());
}

fn iterate_first_order(x: &[f64], a: f64, d: usize) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + d + 1];
    for n in 1..y.len() {
        let xin = if n > d { x[n - d - 1] } else { 0.0 };
        y[n] = a * y[n - 1] + (1.0 - a) * xin;
    }
    y[1..].to_vec()
}

#[test]
fn identity_channel_is_transparent() {
    let x = vec![0.3, -1.0, 2.0, 0.0];
    assert_eq!(channel_transmit(&x, &ChannelModel::IDENTITY, &mut rng(0)), x);
}

#[test]
fn half_memory_unit_step() {
    let ch = ChannelModel::new(0.5, 0, 0.0).unwrap();
    let y = channel_transmit(&[1.0; 12], &ch, &mut rng(0));
    let it = iterate_first_order(&[1.0; 12], 0.5, 0);
    for (n, (&got, &want)) in y.iter().zip(&it).enumerate() {
        let closed = 1.0 - 0.5f64.powi(n as i32 + 1);
        assert!((got - want).abs() <= 4.0 * f64::EPSILON, "n={n}");
        assert!((got - closed).abs() <= 4.0 * f64::EPSILON, "n={n}");
    }
}

#[test]
fn pure_delay() {
    let ch = ChannelModel::new(0.0, 3, 0.0).unwrap();
    assert_eq!(
        channel_transmit(&[1.0, 0.0], &ch, &mut rng(0)),
        vec![0.0, 0.0, 0.0, 1.0, 0.0]
    );
}

#[test]
fn step_response_examples() {
    assert_eq!(step_response(&ChannelModel::IDENTITY, 4).unwrap(), vec![1.0; 4]);
    let half = step_response(&ChannelModel::new(0.5, 0, 0.3).unwrap(), 3).unwrap();
    assert_eq!(half, iterate_first_order(&[1.0; 3], 0.5, 0));
    assert_eq!(half, vec![0.5, 0.75, 0.875]);
    let delayed = step_response(&ChannelModel::new(0.0, 2, 0.0).unwrap(), 3).unwrap();
    assert_eq!(delayed, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
    assert!(step_response(&ChannelModel::IDENTITY, 0).is_err());
}

#[test]
fn receiver_tie_and_end_to_end() {
    assert_eq!(waveform2bitseq(&[0.5; 60], 20, 0.5, 0).unwrap(), vec![1, 1, 1]);
    let bits = text2bitseq("Finished!").unwrap();
    let tx = bitseq2waveform(&bits, 20).unwrap();
    let ch = ChannelModel::new(0.5, 0, 0.0).unwrap();
    let rx = channel_transmit(&tx, &ch, &mut rng(0));
    assert_eq!(waveform2bitseq(&rx, 20, 0.5, 0).unwrap(), bits);
}

#[test]
fn ber_examples() {
    assert_eq!(ber(&[1, 0, 1, 1], &[1, 1, 1, 0]).unwrap(), 0.5);
    assert_eq!(ber(&[1, 0], &[1, 0]).unwrap(), 0.0);
    assert!(ber(&[1], &[1, 0]).is_err());
    assert!(ber(&[], &[]).is_err());
}

#[test]
fn coding_examples() {
    assert_eq!(repetition_encode(&[1, 0], 3).unwrap(), vec![1, 1, 1, 0, 0, 0]);
    assert_eq!(repetition_decode(&[1, 1, 0], 3).unwrap(), vec![1]);
    assert_eq!(parity_encode(&[1, 0, 1], 3).unwrap(), vec![1, 0, 1, 0]);
    let (data, flags) = parity_check(&[1, 0, 1, 0], 3).unwrap();
    assert_eq!((data, flags), (vec![1, 0, 1], vec![0]));
    let (_, flags) = parity_check(&[1, 1, 1, 0], 3).unwrap();
    assert_eq!(flags, vec![1]);
}

#[test]
fn eye_diagram_windows() {
    let w: Vec<f64> = (1..=80).map(f64::from).collect();
    let curves = eye_diagram(&w, 20).unwrap();
    assert_eq!(curves.len(), 2);
    assert!(curves.iter().all(|c| c.x.len() == 40 && c.y.len() == 40));
    assert_eq!(curves[1].y[0], 41.0);
    assert_eq!(eye_diagram(&w[..40], 20).unwrap().len(), 1);
    assert!(eye_diagram(&w[..39], 20).is_err());
}

#[test]
fn alternating_eye_curves_coincide() {
    let bits: Vec<u8> = (0..16).map(|k| (k % 2) as u8).collect();
    let w = bitseq2waveform(&bits, 5).unwrap();
    let curves = eye_diagram(&w, 5).unwrap();
    // constructed directly: every window is one 0 followed by one 1
    let window: Vec<f64> = [vec![0.0; 5], vec![1.0; 5]].concat();
    assert_eq!(curves.len(), 8);
    assert!(curves.iter().all(|c| c.y == window));
}

#[test]
fn equalizer_trivial_solutions() {
    let x = [0.3, 1.0, -0.5, 0.25, 2.0];
    let taps = equalizer_design(&x, &x, 1).unwrap();
    assert!((taps[0] - 1.0).abs() < 1e-12);
    let doubled: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
    let taps = equalizer_design(&doubled, &x, 1).unwrap();
    assert!((taps[0] - 0.5).abs() < 1e-12);
}

fn lagged_matrix(rx: &[f64], ntaps: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rx.len(), ntaps, |n, k| if n >= k { rx[n - k] } else { 0.0 })
}

fn training(a: f64, sigma: f64, spb: usize, nbits: usize, seed: u64) -> (Vec<u8>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let bits: Vec<u8> = (0..nbits).map(|_| rand::Rng::random::<bool>(&mut r) as u8).collect();
    let tx = bitseq2waveform(&bits, spb).unwrap();
    let rx = channel_transmit(&tx, &ChannelModel::new(a, 0, sigma).unwrap(), &mut r);
    (bits, tx, rx)
}

#[test]
fn equalizer_matches_svd_least_squares() {
    let (_, tx, rx) = training(0.5, 0.05, 4, 200, 11);
    let taps = equalizer_design(&rx, &tx, 8).unwrap();
    let x = lagged_matrix(&rx, 8);
    let oracle = x
        .svd(true, true)
        .solve(&DVector::from_column_slice(&tx), 1e-14)
        .unwrap();
    for (k, (got, want)) in taps.iter().zip(oracle.iter()).enumerate() {
        assert!((got - want).abs() < 1e-9, "tap {k}: {got} vs {want}");
    }
}

#[test]
fn noiseless_channel_inverse_is_recovered() {
    // The inverse of y[n] = a y[n-1] + (1-a) x[n] is x[n] = (y[n] - a y[n-1]) / (1-a).
    let (_, tx, rx) = training(0.8, 0.0, 4, 100, 5);
    let taps = equalizer_design(&rx, &tx, 8).unwrap();
    let expected = [5.0, -4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for (got, want) in taps.iter().zip(expected) {
        assert!((got - want).abs() < 1e-8, "{taps:?}");
    }
}

#[test]
fn equalization_rescues_heavy_isi() {
    let (_, ttx, trx) = training(0.8, 0.0, 4, 64, 21);
    let taps = equalizer_design(&trx, &ttx, 8).unwrap();
    let (bits, _, rx) = training(0.8, 0.0, 4, 500, 22);
    let raw = waveform2bitseq(&rx, 4, 0.5, 0).unwrap();
    let eq = waveform2bitseq(&equalize(&rx, &taps), 4, 0.5, 0).unwrap();
    assert!(ber(&bits, &raw).unwrap() > 0.05);
    assert_eq!(eq, bits);
}

#[test]
fn mild_isi_needs_no_equalizer() {
    let (bits, _, rx) = training(0.5, 0.0, 4, 500, 23);
    assert_eq!(waveform2bitseq(&rx, 4, 0.5, 0).unwrap(), bits);
}

#[test]
fn noise_and_histogram() {
    assert_eq!(noise(5, 0.0, &mut rng(0)).unwrap(), vec![0.0; 5]);
    let (centers, counts) = hist(&[1.0, 1.0, 2.0], 2).unwrap();
    assert_eq!(counts, vec![2.0, 1.0]);
    assert_eq!(centers, vec![1.25, 1.75]);
}

#[test]
fn unit_noise_variance() {
    // For n = 1e5 the sample variance has standard deviation about
    // sqrt(2/n) = 0.0045, so [0.98, 1.02] is a better than 4-sigma band.
    let x = noise(100_000, 1.0, &mut rng(2024)).unwrap();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
    assert!((0.98..=1.02).contains(&var), "{var}");
    assert!(mean.abs() < 0.02);
}

fn correct_sender(v: &SenderView) -> Result<bool, std::convert::Infallible> {
    Ok((v.ack_arrived || v.timer_expired) && v.cur_seq <= v.num_packets)
}

#[test]
fn lossless_stop_and_wait() {
    let cfg = NetConfig {
        loss: 0.0,
        dmin: 1,
        dmax: 1,
        timeout: 5,
        horizon: 50,
    };
    let trace = stopwait_simulate(3, &cfg, &mut rng(0), correct_sender).unwrap();
    assert_eq!(trace.sent.len(), 3);
    assert_eq!(trace.delivered, vec![1, 2, 3]);
}

#[test]
fn total_loss_single_send() {
    let cfg = NetConfig {
        loss: 1.0,
        dmin: 1,
        dmax: 2,
        timeout: 5,
        horizon: 50,
    };
    let trace = stopwait_simulate(3, &cfg, &mut rng(0), |v| Ok::<_, std::convert::Infallible>(v.t == 1)).unwrap();
    assert_eq!(trace.sent, vec![(1, 1)]);
    assert!(trace.delivered.is_empty());
}

#[test]
fn lossy_stop_and_wait_completes() {
    let cfg = NetConfig {
        loss: 0.2,
        dmin: 1,
        dmax: 4,
        timeout: 10,
        horizon: 600,
    };
    let mut sends = 0;
    for seed in [1, 2, 3, 42] {
        let trace = stopwait_simulate(10, &cfg, &mut rng(seed), correct_sender).unwrap();
        assert_eq!(trace.delivered, (1..=10).collect::<Vec<_>>(), "seed {seed}");
        sends += trace.sent.len();
    }
    assert!(sends > 40, "loss should force some resends");
}
