use linecode::analysis::{bsa_cost, Mapping};
use linecode::codebook::{builtin_5b10b, hamming_distance, parse_codebook, Codeword};
use linecode::codecs::{
    decode_8b10b, decode_block_hard, decode_block_soft, decode_manchester, encode_8b10b,
    encode_block, encode_byte, encode_manchester, words_to_bits, DecodeStatus, HardDecoder,
    LineCode, Polarity, RunningDisparity,
};
use linecode::sim::aggregate;
use linecode::sim::BlockCounts;
use proptest::prelude::*;

fn bits(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, len)
}

proptest! {
    #[test]
    fn codeword_text_roundtrip(value in any::<u64>(), len in 1usize..=64) {
        let v = if len == 64 { value } else { value & ((1 << len) - 1) };
        let cw = Codeword::new(v, len).unwrap();
        prop_assert_eq!(cw.to_string().parse::<Codeword>().unwrap(), cw);
        prop_assert_eq!(cw.complement().complement(), cw);
        prop_assert_eq!(cw.weight() + cw.complement().weight(), len as u32);
    }

    #[test]
    fn hamming_is_a_metric(a in 0u64..1024, b in 0u64..1024, c in 0u64..1024) {
        let w = |v| Codeword::new(v, 10).unwrap();
        let (a, b, c) = (w(a), w(b), w(c));
        let d = |x: &Codeword, y: &Codeword| hamming_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn block_codes_roundtrip(data in bits(0..400)) {
        for code in [LineCode::FiveB10B, LineCode::FourB6B] {
            let cb = code.codebook();
            let k = cb.k();
            let data: Vec<u8> = data[..data.len() / k * k].to_vec();
            let chips = encode_block(&cb, &data).unwrap();
            prop_assert_eq!(chips.len(), data.len() / k * cb.n());
            let hard: Vec<u32> = decode_block_hard(&cb, &chips).unwrap().iter().map(|o| o.dataword).collect();
            prop_assert_eq!(&words_to_bits(&hard, k), &data);
            let y = code.modulation().modulate(chips.as_slice());
            let soft: Vec<u32> = decode_block_soft(&cb, &y, &code.modulation()).unwrap().iter().map(|o| o.0).collect();
            prop_assert_eq!(&words_to_bits(&soft, k), &data);
        }
    }

    #[test]
    fn manchester_roundtrip(data in bits(0..300), low_high in any::<bool>()) {
        let pol = if low_high { Polarity::OneIsLowHigh } else { Polarity::OneIsHighLow };
        let chips = encode_manchester(&data, pol).unwrap();
        let back: Vec<u8> = decode_manchester(&chips, pol).unwrap().iter().map(|o| o.dataword as u8).collect();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn eightb10b_keeps_disparity_bounded(bytes in prop::collection::vec(any::<u8>(), 1..200), start_pos in any::<bool>()) {
        let start = if start_pos { RunningDisparity::Positive } else { RunningDisparity::Negative };
        let mut rd = start;
        let mut sum = start.sign();
        for &b in &bytes {
            let (cw, next) = encode_byte(b, rd);
            sum += 2 * cw.weight() as i32 - 10;
            prop_assert!(sum == -1 || sum == 1, "digital sum {}", sum);
            prop_assert_eq!(sum, next.sign());
            rd = next;
        }
        let data = words_to_bits(&bytes.iter().map(|&b| b as u32).collect::<Vec<_>>(), 8);
        let (chips, end) = encode_8b10b(&data, start).unwrap();
        prop_assert_eq!(end, rd);
        let (out, dec_end) = decode_8b10b(&chips, start).unwrap();
        prop_assert_eq!(dec_end, rd);
        prop_assert_eq!(out.iter().map(|o| o.byte).collect::<Vec<_>>(), bytes);
    }

    #[test]
    fn double_flips_are_never_silently_wrong(i in 0usize..32, a in 0usize..10, b in 0usize..10) {
        // Distance 4 means two flips land at distance >= 2 from every other
        // word, so the decoder either recovers or flags the block.
        prop_assume!(a != b);
        let cb = builtin_5b10b();
        let (d, cw) = cb.entries()[i];
        let out = HardDecoder::new(&cb).decide(cw.with_flipped(a).with_flipped(b).value());
        prop_assert!(out.dataword == d || out.status == DecodeStatus::DetectedUncorrectable);
        prop_assert_eq!(out.distance, 2);
    }

    #[test]
    fn relabeled_table_survives_text_roundtrip(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cb = builtin_5b10b();
        let m = Mapping::random(32, &mut rng);
        let relabeled = cb.relabeled(m.labels()).unwrap();
        prop_assert_eq!(parse_codebook(&relabeled.to_text()).unwrap(), relabeled.clone());
        let direct = bsa_cost(&m, &cb, 0.2, 1.0).unwrap().total;
        let via_table = bsa_cost(&Mapping::of_codebook(&relabeled).unwrap(), &relabeled, 0.2, 1.0).unwrap().total;
        prop_assert!((direct - via_table).abs() <= 1e-15 * direct.max(1e-300) + 1e-18);
    }

    #[test]
    fn aggregation_is_a_prefix(errors in prop::collection::vec((0u64..50, 0u64..3), 1..40), budget in 1u64..400) {
        let blocks: Vec<BlockCounts> = errors
            .iter()
            .map(|&(s, extra)| BlockCounts { symbols: 100, symbol_errors: s, bit_errors: s + extra * s.min(1) })
            .collect();
        let (all, _) = aggregate(&blocks, None);
        let (part, stopped) = aggregate(&blocks, Some(budget));
        prop_assert!(part.symbols <= all.symbols);
        if stopped {
            prop_assert!(part.bit_errors >= budget);
            let before = aggregate(&blocks[..(part.symbols / 100 - 1) as usize], None).0;
            prop_assert!(before.bit_errors < budget);
        } else {
            prop_assert_eq!(part, all);
        }
    }
}
