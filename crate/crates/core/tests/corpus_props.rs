use std::fs;

use cursive_cut::corpus::{
    auto_label, evaluate_pipeline, export_training_set, load_corpus, seg_rate, synthesize_corpus, write_manifest,
    write_training_set, CutLabel, GlyphKind, Validator, WordRecord, GEN_CORE_TOP,
};
use cursive_cut::imgproc::{save_pgm, GrayImage};
use cursive_cut::pipeline::{analyze_word, PipelineConfig};
use cursive_cut::segmenter::SegParams;
use proptest::prelude::*;

proptest! {
    #[test]
    fn seg_rate_accounting(
        pred in prop::collection::vec(0usize..200, 0..20),
        gt in prop::collection::btree_set(0usize..200, 0..20),
        tol in 0usize..6,
    ) {
        let gt: Vec<usize> = gt.into_iter().collect();
        let r = seg_rate(&pred, &gt, tol);
        prop_assert!((0.0..=100.0).contains(&r.rate));
        prop_assert!(r.hits <= pred.len().min(gt.len()));
        prop_assert_eq!(r.hits + r.missed, gt.len());
        prop_assert_eq!(r.hits + r.over_seg, pred.len());
        let mut rev = pred.clone();
        rev.reverse();
        prop_assert_eq!(seg_rate(&rev, &gt, tol), r);
    }
}

#[test]
fn seg_rate_examples() {
    let r = seg_rate(&[28, 61, 90], &[30, 60], 3);
    assert_eq!((r.rate, r.over_seg, r.missed), (100.0, 1, 0));
    let r = seg_rate(&[], &[10, 20, 30, 40], 3);
    assert_eq!((r.rate, r.over_seg, r.missed), (0.0, 0, 4));
    let r = seg_rate(&[10, 20], &[10, 20], 3);
    assert_eq!((r.rate, r.over_seg, r.missed), (100.0, 0, 0));
}

#[test]
fn synthesis_is_byte_stable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synthesize_corpus(42, 6, &GlyphKind::ALL).unwrap().write_to(a.path()).unwrap();
    synthesize_corpus(42, 6, &GlyphKind::ALL).unwrap().write_to(b.path()).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn synthesized_ground_truth_is_sound() {
    let corpus = synthesize_corpus(9, 60, &GlyphKind::ALL).unwrap();
    for w in &corpus.words {
        assert_eq!(w.record.gt_boundaries.len(), w.glyphs.len() - 1);
        w.record.check_gt(w.image.width()).unwrap();
        assert!(w.gt_is_clear());
        // the glyph band really is inked at generation time
        assert!((0..w.ink.width()).any(|x| w.ink.get(x, GEN_CORE_TOP)));
    }
}

#[test]
fn three_glyph_word_has_two_boundaries() {
    let corpus = synthesize_corpus(1, 40, &GlyphKind::ALL).unwrap();
    let w = corpus.words.iter().find(|w| w.glyphs.len() == 3).expect("a three-glyph word");
    assert_eq!(w.record.gt_boundaries.len(), 2);
}

#[test]
fn corpus_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = synthesize_corpus(4, 5, &GlyphKind::ALL).unwrap();
    corpus.write_to(dir.path()).unwrap();
    assert_eq!(load_corpus(dir.path()).unwrap(), corpus.records());
}

fn blank_word(dir: &std::path::Path, gt: Vec<usize>) -> WordRecord {
    let path = dir.join("blank.pgm");
    save_pgm(&GrayImage::filled(40, 10, 255), &path).unwrap();
    WordRecord {
        word_id: "blank".into(),
        image_path: path,
        gt_boundaries: gt,
        cuts: vec![],
    }
}

#[test]
fn single_word_hand_trace() {
    // n = 4 on a blank 40-px word: boundaries at 10, 20, 30, none merged
    let dir = tempfile::tempdir().unwrap();
    let rec = blank_word(dir.path(), vec![11, 25]);
    let cfg = PipelineConfig {
        seg: SegParams {
            n: 4,
            ..SegParams::default()
        },
        ..PipelineConfig::default()
    };
    let rep = evaluate_pipeline(&[rec], &cfg, Validator::Heuristics, 3).unwrap();
    assert_eq!(rep.per_word[0].predicted, vec![10, 20, 30]);
    assert_eq!(rep.test_rate, 50.0);
    assert_eq!((rep.over_seg, rep.missed, rep.total_points), (2, 1, 2));
}

#[test]
fn perfect_heuristics_score_100() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = synthesize_corpus(8, 6, &GlyphKind::ALL).unwrap();
    corpus.write_to(dir.path()).unwrap();
    let cfg = PipelineConfig::default();
    // ground truth set to exactly what the heuristics produce
    let records: Vec<WordRecord> = corpus
        .records()
        .into_iter()
        .map(|mut r| {
            let img = r.load_image().unwrap();
            let a = analyze_word(&img, &cfg).unwrap();
            let mut cols = a.accepted_source_columns();
            cols.sort_unstable();
            cols.dedup();
            cols.retain(|&c| c > 0 && c + 1 < img.width());
            r.gt_boundaries = cols;
            r
        })
        .collect();
    let rep = evaluate_pipeline(&records, &cfg, Validator::Heuristics, 0).unwrap();
    assert_eq!(rep.test_rate, 100.0);
    assert_eq!(rep.over_seg, 0);
}

#[test]
fn doubling_corpus_keeps_average() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = synthesize_corpus(12, 8, &GlyphKind::ALL).unwrap();
    corpus.write_to(dir.path()).unwrap();
    let recs = corpus.records();
    let cfg = PipelineConfig::default();
    let once = evaluate_pipeline(&recs, &cfg, Validator::Heuristics, 3).unwrap();
    let doubled: Vec<WordRecord> = recs.iter().chain(&recs).cloned().collect();
    let twice = evaluate_pipeline(&doubled, &cfg, Validator::Heuristics, 3).unwrap();
    assert!((once.test_rate - twice.test_rate).abs() < 1e-9);
    assert_eq!(twice.word_count, 2 * once.word_count);
}

#[test]
fn export_counts_and_stability() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = synthesize_corpus(5, 4, &GlyphKind::ALL).unwrap();
    corpus.write_to(dir.path()).unwrap();
    let cfg = PipelineConfig::default();
    let mut recs = corpus.records();
    auto_label(&mut recs, &cfg, 3).unwrap();

    // keep exactly five labels, scattered across words
    let mut kept = 0;
    for r in &mut recs {
        for c in &mut r.cuts {
            if kept < 5 && c.column % 2 == 0 {
                kept += 1;
            } else {
                c.label = CutLabel::Unlabeled;
            }
        }
    }
    let labeled: usize = recs.iter().map(|r| r.labeled().count()).sum();
    assert_eq!(labeled, 5);
    let rows = export_training_set(&recs, &cfg).unwrap();
    assert_eq!(rows.len(), labeled);

    let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_training_set(&p1, &rows).unwrap();
    write_training_set(&p2, &export_training_set(&recs, &cfg).unwrap()).unwrap();
    assert_eq!(fs::read(p1).unwrap(), fs::read(p2).unwrap());

    write_manifest(dir.path(), &recs).unwrap();
    let reloaded = load_corpus(dir.path()).unwrap();
    assert_eq!(reloaded[0].cuts.iter().filter(|c| c.label != CutLabel::Unlabeled).count(), recs[0].labeled().count());
}
