mod common;

use std::collections::HashMap;

use autostego::pipeline::PositionRecord;
use autostego::{
    build_consistency_codebook, embed, embed_bits, embed_many, extract, extract_bits, extract_many,
    inspect, select_candidates, Bits, Coder, LmError, MaskPlan, MaskedLm, PredictionDistribution,
    PredictionMode, SecretKey, StegoConfig, StegoError, Token, TokenSequence,
};
use common::{corpus_text, key, vocab64_lm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// LM that answers from a fixed table keyed by the rendered temporary text.
struct ScriptedLm(HashMap<String, Vec<(&'static str, f64)>>);

impl MaskedLm for ScriptedLm {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError> {
        Ok(TokenSequence::split_whitespace(text))
    }

    fn predict(&self, temp: &TokenSequence, position: usize, min_prob: f64) -> Result<PredictionDistribution, LmError> {
        if !temp.get(position).is_some_and(|s| s.is_mask()) {
            return Err(LmError::NotMasked { position });
        }
        let entries = self
            .0
            .get(&temp.join())
            .ok_or_else(|| LmError::Protocol(format!("unscripted context {:?}", temp.join())))?
            .iter()
            .filter(|(_, p)| *p >= min_prob)
            .map(|(t, p)| (Token::new(*t).unwrap(), *p))
            .collect();
        PredictionDistribution::new(entries, 1.0)
    }

    fn model_digest(&self) -> Result<String, LmError> {
        Ok("scripted".into())
    }
}

fn figure_one_lm() -> ScriptedLm {
    ScriptedLm(HashMap::from([
        (
            "Midshire is a [MASK] little [MASK] .".to_owned(),
            vec![("nice", 0.5), ("pretty", 0.3), ("lovely", 0.2)],
        ),
        (
            "Midshire is a nice little [MASK] .".to_owned(),
            vec![("city", 0.6), ("town", 0.4)],
        ),
    ]))
}

#[test]
fn figure_one_walkthrough() {
    let lm = figure_one_lm();
    let cover = TokenSequence::split_whitespace("Midshire is a wonderful little city .");
    let plan = MaskPlan::from_indices(vec![3, 5]);
    let second_temp = autostego::apply_masks(
        &TokenSequence::split_whitespace("Midshire is a nice little city ."),
        &[5],
    )
    .unwrap();
    let second = select_candidates(&lm.predict(&second_temp, 5, 0.02).unwrap(), 0.02);
    // Pick a key under which the second position maps city->0, town->1.
    let key = (0u8..)
        .map(|b| SecretKey::new(vec![b; 16]).unwrap())
        .find(|k| {
            let book = build_consistency_codebook(&second, k, 5).unwrap();
            book.code_of(&Token::new("town").unwrap()).unwrap().to_string() == "1"
        })
        .unwrap();
    let cfg = StegoConfig::new(1, 0.02, key.clone()).unwrap();

    let first_cands = select_candidates(
        &lm.predict(&autostego::apply_masks(&cover, &[3, 5]).unwrap(), 3, 0.02).unwrap(),
        0.02,
    );
    let first_book = build_consistency_codebook(&first_cands, &key, 3).unwrap();
    let mut bits = first_book.code_of(&Token::new("nice").unwrap()).unwrap().clone();
    bits.push(true);

    let out = embed_bits(&cover, &plan, &bits, &cfg, &lm).unwrap();
    assert_eq!(out.stego.join(), "Midshire is a nice little town .");
    assert_eq!(out.report.records[1].annotation(), "town(2,1)");
    let back = extract_bits(&out.stego, &plan, bits.len(), &cfg, &lm).unwrap();
    assert_eq!(back, bits);
    assert_eq!(back.as_slice().last(), Some(&true));
}

fn random_cover(rng: &mut ChaCha8Rng, len: usize) -> TokenSequence {
    const WORDS: [&str; 16] = [
        "the", "river", "ran", "past", "an", "old", "mill", "where", "children", "played", "every",
        "summer", "near", "quiet", "fields", "today",
    ];
    const PUNCT: [&str; 4] = [".", ",", ";", "!"];
    let words: Vec<&str> = (0..len)
        .map(|_| {
            if rng.random_bool(0.15) {
                PUNCT[rng.random_range(0..PUNCT.len())]
            } else {
                WORDS[rng.random_range(0..WORDS.len())]
            }
        })
        .collect();
    TokenSequence::from_words(words)
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Bits {
    Bits::from_bools((0..n).map(|_| rng.random_bool(0.5)).collect())
}

#[test]
fn empty_message_round_trips_and_only_touches_plan() {
    let lm = vocab64_lm(42);
    let cfg = StegoConfig::new(2, 0.02, key(b"empty-message-key!")).unwrap();
    let cover = corpus_text(3);
    let out = embed(&cover, &Bits::new(), &cfg, &lm).unwrap();
    assert_eq!(out.report.bits_embedded, 32);
    assert_eq!(extract(&out.stego, &cfg, &lm).unwrap(), Bits::new());
    let plan = autostego::plan_masks(&cover, 2, &cfg.key).unwrap();
    for i in 0..cover.len() {
        if !plan.indices().contains(&i) {
            assert_eq!(cover.get(i), out.stego.get(i));
        }
    }
}

#[test]
fn insufficient_capacity_reports_consumed_bits() {
    let lm = vocab64_lm(1);
    let cfg = StegoConfig::new(4, 0.02, key(b"capacity-test-key")).unwrap();
    let cover = TokenSequence::split_whitespace("a short cover text with few words .");
    let err = embed(&cover, &Bits::from_bytes(&[0xaa; 64]), &cfg, &lm).unwrap_err();
    match err {
        StegoError::InsufficientCapacity { consumed, required } => {
            assert_eq!(required, 32 + 512);
            assert!(consumed < required);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn empty_cover_is_rejected() {
    let lm = vocab64_lm(1);
    let cfg = StegoConfig::new(1, 0.02, key(b"capacity-test-key")).unwrap();
    assert!(matches!(
        embed(&TokenSequence::default(), &Bits::new(), &cfg, &lm),
        Err(StegoError::EmptySequence)
    ));
    assert!(matches!(
        embed_many(&[], &Bits::new(), &cfg, &lm),
        Err(StegoError::InsufficientCapacity { consumed: 0, required: 32 })
    ));
}

#[test]
fn multi_cover_split_and_tail_covers_untouched() {
    let lm = vocab64_lm(5);
    let cfg = StegoConfig::new(2, 0.02, key(b"multi-cover-key-01")).unwrap();
    let covers: Vec<TokenSequence> = (10..16).map(corpus_text).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let message = random_bits(&mut rng, 300);
    let out = embed_many(&covers, &message, &cfg, &lm).unwrap();
    let carrying = out.iter().filter(|e| e.report.bits_embedded > 0).count();
    assert!(carrying >= 2, "message should span covers, got {carrying}");
    let last = out.last().unwrap();
    assert_eq!(last.report.bits_embedded, 0);
    assert_eq!(last.stego, covers[5]);
    let stegos: Vec<TokenSequence> = out.iter().map(|e| e.stego.clone()).collect();
    assert_eq!(extract_many(&stegos, &cfg, &lm).unwrap(), message);

    let small = embed_many(&covers, &Bits::from_bools(vec![true; 4]), &cfg, &lm).unwrap();
    for (e, c) in small.iter().zip(&covers).skip(1) {
        assert_eq!(&e.stego, c);
    }
}

#[test]
fn autoregressive_step_changes_next_distribution() {
    let lm = vocab64_lm(42);
    let cover = TokenSequence::split_whitespace("Midshire is a wonderful little city .");
    let plan = MaskPlan::from_indices(vec![3, 5]);
    let fill = |w: &str| {
        let mut slots = autostego::apply_masks(&cover, plan.indices()).unwrap().slots().to_vec();
        slots[3] = autostego::Slot::Word(Token::new(w).unwrap());
        autostego::temporary_text(&TokenSequence::new(slots), &plan, 1).unwrap()
    };
    let a = lm.predict(&fill("nice"), 5, 0.0).unwrap();
    let b = lm.predict(&fill("quiet"), 5, 0.0).unwrap();
    assert_ne!(a, b);
}

#[test]
fn parallel_mode_ignores_earlier_choices() {
    let lm = vocab64_lm(42);
    let cover = corpus_text(21);
    let cfg = StegoConfig::new(2, 0.02, key(b"parallel-mode-key"))
        .unwrap()
        .with_mode(PredictionMode::Parallel);
    // Candidate sets seen by the extractor do not depend on the tokens at
    // earlier masked positions.
    let views = inspect(&cover, &cfg, &lm).unwrap();
    let plan = autostego::plan_masks(&cover, 2, &cfg.key).unwrap();
    let mut altered: Vec<autostego::Slot> = cover.slots().to_vec();
    altered[plan.indices()[0]] = autostego::Slot::Word(Token::new("castle").unwrap());
    let views2 = inspect(&TokenSequence::new(altered), &cfg, &lm).unwrap();
    for (a, b) in views.iter().zip(&views2).skip(1) {
        assert_eq!(a.candidates, b.candidates);
    }
    let message = Bits::from_bytes(b"par");
    let out = embed(&cover, &message, &cfg, &lm).unwrap();
    assert_eq!(extract(&out.stego, &cfg, &lm).unwrap(), message);
}

#[test]
fn wrong_key_never_yields_the_message() {
    let lm = vocab64_lm(9);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cover = corpus_text(40);
    let cfg = StegoConfig::new(2, 0.02, key(b"the-right-key-0001")).unwrap();
    let message = random_bits(&mut rng, 48);
    let stego = embed(&cover, &message, &cfg, &lm).unwrap().stego;
    let mut errors = 0;
    for trial in 0..100u32 {
        let mut bytes = b"a-wrong-key-".to_vec();
        bytes.extend_from_slice(&trial.to_be_bytes());
        let wrong = StegoConfig { key: SecretKey::new(bytes).unwrap(), ..cfg.clone() };
        match extract(&stego, &wrong, &lm) {
            Ok(bits) => assert_ne!(bits, message),
            Err(StegoError::Desync { .. } | StegoError::TruncatedStream { .. }) => errors += 1,
            Err(other) => panic!("unexpected {other:?}"),
        }
    }
    assert!(errors > 50, "only {errors} of 100 wrong keys were detected");
}

#[test]
fn report_annotations_mirror_records() {
    let lm = vocab64_lm(42);
    let cfg = StegoConfig::new(3, 0.02, key(b"annotation-key-001")).unwrap();
    let cover = corpus_text(0);
    let out = embed(&cover, &Bits::from_bytes(b"x"), &cfg, &lm).unwrap();
    let annotated = out.report.annotated(&out.stego);
    let (plain, notes) = autostego::metrics::parse_annotated(&annotated);
    assert_eq!(plain, out.stego);
    assert_eq!(notes.len(), out.report.records.len());
    let code_bits: usize = out.report.records.iter().map(PositionRecord::bits).sum();
    assert_eq!(code_bits, out.report.bits_embedded + out.report.padding_bits);
}

fn config_strategy() -> impl Strategy<Value = (usize, f64, Coder, PredictionMode)> {
    (
        1usize..=6,
        prop::sample::select(vec![0.01, 0.02, 0.03, 0.05, 0.1]),
        prop::sample::select(vec![Coder::Consistency, Coder::Block]),
        prop::sample::select(vec![PredictionMode::Autoregressive, PredictionMode::Parallel]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(
        (interval, threshold, coder, mode) in config_strategy(),
        seed in any::<u64>(),
        key_bytes in proptest::collection::vec(any::<u8>(), 16..32),
        msg_len in 0usize..96,
    ) {
        let lm = vocab64_lm(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = StegoConfig::new(interval, threshold, SecretKey::new(key_bytes).unwrap())
            .unwrap()
            .with_coder(coder)
            .with_mode(mode);
        let message = random_bits(&mut rng, msg_len);
        let mut covers = Vec::new();
        let embedded = loop {
            let len = rng.random_range(20..200);
            covers.push(random_cover(&mut rng, len));
            match embed_many(&covers, &message, &cfg, &lm) {
                Ok(e) => break e,
                Err(StegoError::InsufficientCapacity { .. }) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        };
        let stegos: Vec<TokenSequence> = embedded.iter().map(|e| e.stego.clone()).collect();
        for (cover, stego) in covers.iter().zip(&stegos) {
            let plan = autostego::plan_masks(cover, interval, &cfg.key).unwrap();
            for i in 0..cover.len() {
                if !plan.indices().contains(&i) {
                    prop_assert_eq!(cover.get(i), stego.get(i));
                }
            }
        }
        prop_assert_eq!(extract_many(&stegos, &cfg, &lm).unwrap(), message);
    }
}
