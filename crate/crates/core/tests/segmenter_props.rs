use cursive_cut::imgproc::{BinaryImage, SkeletonImage};
use cursive_cut::segmenter::{
    detect_core_zone, estimate_char_width, filter_loops, merge_by_width, oversegment, run_heuristics, CandidateCut,
    CutStatus, SegParams,
};
use proptest::prelude::*;

fn sparse_image(w: usize, h: usize) -> impl Strategy<Value = SkeletonImage> {
    prop::collection::vec(prop::bool::weighted(0.15), w * h)
        .prop_map(move |px| SkeletonImage::assume_thin(BinaryImage::new(w, h, px).unwrap()))
}

fn image_and_n() -> impl Strategy<Value = (SkeletonImage, usize)> {
    (2usize..80, 1usize..30).prop_flat_map(|(w, h)| (sparse_image(w, h), 2..=w))
}

fn runs(img: &SkeletonImage, x: usize) -> usize {
    (0..img.height())
        .filter(|&y| img.get(x, y) && (y == 0 || !img.get(x, y - 1)))
        .count()
}

fn params(n: usize) -> SegParams {
    SegParams {
        n,
        ..SegParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn oversegment_layout((img, n) in image_and_n()) {
        let w = img.width();
        let cuts = oversegment(&img, &params(n)).unwrap();
        prop_assert_eq!(cuts.len(), n - 1);
        for (k, c) in (1..n).zip(&cuts) {
            let expect = ((k * w) as f64 / n as f64 + 0.5).floor() as usize;
            prop_assert_eq!(c.column, expect);
            prop_assert_eq!(c.status, CutStatus::Proposed);
            prop_assert!(c.column > 0 && c.column < w);
        }
        prop_assert!(cuts.windows(2).all(|p| p[0].column < p[1].column));
    }

    #[test]
    fn loop_rejection_iff_multiple_runs((img, n) in image_and_n()) {
        let cuts = filter_loops(oversegment(&img, &params(n)).unwrap(), &img);
        for c in &cuts {
            prop_assert_eq!(c.crossing_count, runs(&img, c.column));
            prop_assert_eq!(c.status == CutStatus::LoopRejected, c.crossing_count > 1);
            prop_assert!(matches!(c.status, CutStatus::Proposed | CutStatus::LoopRejected));
        }
    }

    #[test]
    fn merged_boundaries_respect_width(
        cols in prop::collection::btree_set(0usize..200, 0..40),
        rejected in prop::collection::vec(any::<bool>(), 40),
        char_width in 1usize..30,
    ) {
        let img = SkeletonImage::assume_thin(BinaryImage::blank(200, 10));
        let input: Vec<CandidateCut> = cols
            .iter()
            .zip(&rejected)
            .map(|(&c, &r)| {
                let mut cut = CandidateCut::proposed(c);
                if r {
                    cut.advance(CutStatus::LoopRejected);
                }
                cut
            })
            .collect();
        let survivors: Vec<usize> = input.iter().filter(|c| !c.status.is_rejected()).map(|c| c.column).collect();
        let out = merge_by_width(input.clone(), char_width, &img);

        let valid: Vec<usize> = out.iter().filter(|c| c.status == CutStatus::HeuristicValid).map(|c| c.column).collect();
        prop_assert!(valid.windows(2).all(|p| p[1] - p[0] >= char_width), "{:?}", valid);

        // rebuild the clusters independently and compare centers
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &c in &survivors {
            match clusters.last_mut() {
                Some(cl) if c - *cl.last().unwrap() < char_width => cl.push(c),
                _ => clusters.push(vec![c]),
            }
        }
        let centers: Vec<usize> = clusters
            .iter()
            .map(|cl| (cl.iter().sum::<usize>() as f64 / cl.len() as f64 + 0.5).floor() as usize)
            .collect();
        prop_assert_eq!(&valid, &centers);

        // every original cut survives in the output; one cut is added per
        // cluster whose center is not a member
        let inserted = clusters.iter().zip(&centers).filter(|(cl, c)| !cl.contains(c)).count();
        prop_assert_eq!(out.len(), input.len() + inserted);
        for c in &input {
            prop_assert!(out.iter().any(|o| o.column == c.column));
        }
        let loops = |v: &[CandidateCut]| v.iter().filter(|c| c.status == CutStatus::LoopRejected).map(|c| c.column).collect::<Vec<_>>();
        prop_assert_eq!(loops(&out), loops(&input));
    }

    #[test]
    fn char_width_is_median_gap(cols in prop::collection::btree_set(0usize..500, 2..30)) {
        let img = SkeletonImage::assume_thin(BinaryImage::blank(500, 17));
        let cuts: Vec<CandidateCut> = cols.iter().map(|&c| CandidateCut::proposed(c)).collect();
        let cols: Vec<usize> = cols.into_iter().collect();
        let mut gaps: Vec<f64> = cols.windows(2).map(|p| (p[1] - p[0]) as f64).collect();
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len();
        let median = if m % 2 == 1 { gaps[m / 2] } else { (gaps[m / 2 - 1] + gaps[m / 2]) / 2.0 };
        prop_assert_eq!(estimate_char_width(&img, &cuts, &SegParams::default()), (median + 0.5).floor() as usize);
    }

    #[test]
    fn core_zone_is_widest_qualifying_band(img in (1usize..20, 1usize..40).prop_flat_map(|(w, h)| sparse_image(w, h)), frac in 0.05f64..0.95) {
        let profile = img.row_profile();
        let max = *profile.iter().max().unwrap();
        prop_assume!(max > 0);
        let ok = |y: usize| profile[y] as f64 >= frac * max as f64;
        let mut best: Option<(usize, usize)> = None;
        for top in 0..profile.len() {
            for bottom in top..profile.len() {
                if (top..=bottom).all(ok) && best.is_none_or(|(t, b)| bottom - top > b - t) {
                    best = Some((top, bottom));
                }
            }
        }
        let zone = detect_core_zone(&img, frac).unwrap();
        prop_assert_eq!(Some((zone.top_row, zone.bottom_row)), best);
    }

    #[test]
    fn heuristics_are_deterministic((img, n) in image_and_n()) {
        let a = serde_json::to_string(&run_heuristics(&img, &params(n)).unwrap().cuts).unwrap();
        let b = serde_json::to_string(&run_heuristics(&img, &params(n)).unwrap().cuts).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn ring_columns_are_rejected() {
    let img = SkeletonImage::assume_thin(BinaryImage::from_ascii(&[
        "..............................",
        "..........######..............",
        ".........#......#.............",
        "........#........#............",
        "........#........#............",
        ".........#......#.............",
        "..........######..............",
        "..............................",
    ]));
    let cuts = filter_loops(oversegment(&img, &params(10)).unwrap(), &img);
    for c in &cuts {
        let inside = (8..=17).contains(&c.column);
        assert_eq!(c.status == CutStatus::LoopRejected, inside && runs(&img, c.column) > 1, "{c:?}");
    }
    assert!(cuts.iter().any(|c| c.status == CutStatus::LoopRejected));
}
