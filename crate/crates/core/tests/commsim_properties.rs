use commlab::commsim::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bitseq(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 0..max)
}

fn training_mse(rx: &[f64], tx: &[f64], taps: &[f64]) -> f64 {
    let y = equalize(rx, taps);
    y.iter().zip(tx).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / tx.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn text_round_trip(msg in "[ -~]{0,64}") {
        let bits = text2bitseq(&msg).unwrap();
        prop_assert_eq!(bits.len(), 8 * msg.len());
        prop_assert_eq!(bitseq2text(&bits).unwrap(), msg);
    }

    #[test]
    fn waveform_round_trip(bits in bitseq(200), spb in 1usize..=32) {
        let w = bitseq2waveform(&bits, spb).unwrap();
        prop_assert_eq!(w.len(), bits.len() * spb);
        if !bits.is_empty() {
            prop_assert_eq!(waveform2bitseq(&w, spb, 0.5, 0).unwrap(), bits);
        }
    }

    #[test]
    fn noiseless_channel_is_linear(
        xy in (1usize..200).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )),
        a in 0.0f64..0.99,
        d in 0usize..6,
    ) {
        let (x, y) = xy;
        let ch = ChannelModel::new(a, d, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let lhs = channel_transmit(&sum, &ch, &mut rng);
        let cx = channel_transmit(&x, &ch, &mut rng);
        let cy = channel_transmit(&y, &ch, &mut rng);
        prop_assert_eq!(lhs.len(), x.len() + d);
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (cx[i] + cy[i])).abs() <= 4.0 * f64::EPSILON);
        }
        prop_assert_eq!(channel_transmit(&x, &ch, &mut rng), cx);
    }

    #[test]
    fn ber_is_a_symmetric_fraction(pair in (1usize..100).prop_flat_map(|n| (
        prop::collection::vec(0u8..=1, n),
        prop::collection::vec(0u8..=1, n),
    ))) {
        let (x, y) = pair;
        prop_assert_eq!(ber(&x, &x).unwrap(), 0.0);
        let r = ber(&x, &y).unwrap();
        prop_assert_eq!(r, ber(&y, &x).unwrap());
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn repetition_corrects_minority_flips(bits in bitseq(40), k in (0usize..4).prop_map(|i| 2 * i + 1), seed in any::<u64>()) {
        let mut coded = repetition_encode(&bits, k).unwrap();
        prop_assert_eq!(repetition_decode(&coded, k).unwrap(), bits.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for block in coded.chunks_mut(k) {
            let flips = rand::Rng::random_range(&mut rng, 0..=k / 2);
            let picks = rand::seq::index::sample(&mut rng, k, flips);
            for i in picks {
                block[i] ^= 1;
            }
        }
        prop_assert_eq!(repetition_decode(&coded, k).unwrap(), bits);
    }

    #[test]
    fn parity_round_trip(blocks in 0usize..10, blk in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..blocks * blk).map(|_| rand::Rng::random::<bool>(&mut rng) as u8).collect();
        let coded = parity_encode(&bits, blk).unwrap();
        prop_assert_eq!(coded.len(), blocks * (blk + 1));
        let (data, flags) = parity_check(&coded, blk).unwrap();
        prop_assert_eq!(data, bits);
        prop_assert!(flags.iter().all(|&f| f == 0));
    }

    #[test]
    fn equalizer_is_locally_optimal(seed in any::<u64>(), ntaps in 1usize..8, a in 0.0f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..40).map(|_| rand::Rng::random::<bool>(&mut rng) as u8).collect();
        let tx = bitseq2waveform(&bits, 4).unwrap();
        let rx = channel_transmit(&tx, &ChannelModel::new(a, 0, 0.05).unwrap(), &mut rng);
        let taps = equalizer_design(&rx, &tx, ntaps).unwrap();
        let best = training_mse(&rx, &tx, &taps);
        for k in 0..ntaps {
            for delta in [1e-6, -1e-6] {
                let mut t = taps.clone();
                t[k] += delta;
                prop_assert!(training_mse(&rx, &tx, &t) >= best - 1e-15);
            }
        }
    }

    #[test]
    fn lossless_correct_sender_sends_exactly_n(n in 1usize..15, dmax in 1u64..4, seed in any::<u64>()) {
        let cfg = NetConfig { loss: 0.0, dmin: 1, dmax, timeout: 2 * dmax + 1, horizon: 200 };
        let trace = stopwait_simulate(n, &cfg, &mut ChaCha8Rng::seed_from_u64(seed), |v| {
            Ok::<_, std::convert::Infallible>((v.ack_arrived || v.timer_expired) && v.cur_seq <= v.num_packets)
        }).unwrap();
        prop_assert_eq!(trace.sent.len(), n);
        prop_assert_eq!(trace.delivered, (1..=n).collect::<Vec<_>>());
    }
}

#[test]
fn parity_detects_every_single_flip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bits: Vec<u8> = (0..64).map(|_| rand::Rng::random::<bool>(&mut rng) as u8).collect();
    let coded = parity_encode(&bits, 8).unwrap();
    for pos in 0..coded.len() {
        let mut bad = coded.clone();
        bad[pos] ^= 1;
        let (_, flags) = parity_check(&bad, 8).unwrap();
        let expect: Vec<u8> = (0..flags.len()).map(|b| u8::from(b == pos / 9)).collect();
        assert_eq!(flags, expect, "flip at {pos}");
    }
}
