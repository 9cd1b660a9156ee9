use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use cursive_cut::imgproc::{encode_pgm, BinaryImage, GrayImage, SkeletonImage};
use cursive_cut::pathtrace::{
    cost_grid, min_cost_path, overlay, segment_characters, trace_path, SegmentationPath, PATH_LEVEL,
};
use cursive_cut::segmenter::{CandidateCut, CoreZone, CutStatus};
use proptest::prelude::*;

/// Cheapest cost from the seed to any cell of row `goal`, moving one row at a
/// time towards it with a column step of at most one. Integer costs keep the
/// comparison exact.
fn dijkstra(costs: &[u64], w: usize, h: usize, seed: (usize, usize), goal: usize) -> u64 {
    let step: i64 = if goal < seed.0 { -1 } else { 1 };
    let mut dist = vec![u64::MAX; w * h];
    let mut heap = BinaryHeap::new();
    dist[seed.0 * w + seed.1] = costs[seed.0 * w + seed.1];
    heap.push(Reverse((dist[seed.0 * w + seed.1], seed.0, seed.1)));
    while let Some(Reverse((d, y, x))) = heap.pop() {
        if d > dist[y * w + x] {
            continue;
        }
        if y == goal {
            return d;
        }
        let ny = (y as i64 + step) as usize;
        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
            let nd = d + costs[ny * w + nx];
            if nd < dist[ny * w + nx] {
                dist[ny * w + nx] = nd;
                heap.push(Reverse((nd, ny, nx)));
            }
        }
    }
    unreachable!("every row is reachable")
}

fn grid() -> impl Strategy<Value = (usize, usize, Vec<u64>, usize, usize)> {
    (1usize..25, 1usize..25).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(0u64..1000, w * h), 0..h, 0..w))
}

fn valid(column: usize) -> CandidateCut {
    CandidateCut {
        column,
        status: CutStatus::NnValid,
        crossing_count: 0,
    }
}

/// Is there a background path through `(sy, sx)` spanning every row?
fn ink_free_path_exists(img: &BinaryImage, sy: usize, sx: usize) -> bool {
    if img.get(sx, sy) {
        return false;
    }
    let reach = |goal: usize| {
        let step: i64 = if goal < sy { -1 } else { 1 };
        let mut seen = vec![false; img.width() * img.height()];
        let mut queue = VecDeque::from([(sy, sx)]);
        while let Some((y, x)) = queue.pop_front() {
            if y == goal {
                return true;
            }
            let ny = (y as i64 + step) as usize;
            for nx in x.saturating_sub(1)..=(x + 1).min(img.width() - 1) {
                if !img.get(nx, ny) && !seen[ny * img.width() + nx] {
                    seen[ny * img.width() + nx] = true;
                    queue.push_back((ny, nx));
                }
            }
        }
        false
    };
    reach(0) && reach(img.height() - 1)
}

fn random_image(w: usize, h: usize, p: f64) -> impl Strategy<Value = BinaryImage> {
    prop::collection::vec(prop::bool::weighted(p), w * h).prop_map(move |px| BinaryImage::new(w, h, px).unwrap())
}

proptest! {
    #[test]
    fn dp_cost_equals_dijkstra((w, h, costs, sy, sx) in grid()) {
        let f: Vec<f64> = costs.iter().map(|&c| c as f64).collect();
        let (path, total) = min_cost_path(&f, w, h, sy, sx);
        let seed_cost = costs[sy * w + sx];
        let oracle = dijkstra(&costs, w, h, (sy, sx), 0) + dijkstra(&costs, w, h, (sy, sx), h - 1) - seed_cost;
        prop_assert_eq!(total, oracle as f64);
        prop_assert_eq!(path.len(), h);
        prop_assert_eq!(path[sy], sx);
        prop_assert!(path.windows(2).all(|p| p[0].abs_diff(p[1]) <= 1));
        let along: u64 = path.iter().enumerate().map(|(y, &x)| costs[y * w + x]).sum();
        prop_assert_eq!(along, oracle);
    }

    #[test]
    fn ink_free_whenever_possible(
        (img, sy, sx) in (2usize..40, 2usize..40).prop_flat_map(|(w, h)| (random_image(w, h, 0.25), 0..h, 0..w)),
    ) {
        let costs = cost_grid(&img, sx, 1.0);
        let (path, _) = min_cost_path(&costs, img.width(), img.height(), sy, sx);
        let p = SegmentationPath { seed_column: sx, columns: path };
        if ink_free_path_exists(&img, sy, sx) {
            prop_assert_eq!(p.ink_crossings(&img), 0);
        }
    }

    #[test]
    fn segments_partition_ink(
        (img, walks) in (4usize..40, 2usize..30).prop_flat_map(|(w, h)| {
            (random_image(w, h, 0.3), prop::collection::vec((0..w, prop::collection::vec(-1i64..=1, h)), 0..4))
        }),
    ) {
        let (w, h) = (img.width(), img.height());
        let mut cols: Vec<Vec<usize>> = walks
            .iter()
            .map(|(start, steps)| {
                let mut x = *start as i64;
                steps.iter().map(|s| { x = (x + s).clamp(0, w as i64 - 1); x as usize }).collect()
            })
            .collect();
        // sorting row by row keeps every walk continuous and stops crossings
        for y in 0..h {
            let mut row: Vec<usize> = cols.iter().map(|c| c[y]).collect();
            row.sort_unstable();
            for (c, v) in cols.iter_mut().zip(row) {
                c[y] = v;
            }
        }
        let paths: Vec<SegmentationPath> = cols.into_iter().map(|c| SegmentationPath { seed_column: c[0], columns: c }).collect();
        let segs = segment_characters(&img, &paths).unwrap();
        prop_assert_eq!(segs.len(), paths.len() + 1);
        let mut owner = vec![0usize; w * h];
        for s in &segs {
            for (x, y) in s.ink_pixels() {
                owner[y * w + x] += 1;
            }
        }
        for y in 0..h {
            for x in 0..w {
                prop_assert_eq!(owner[y * w + x], usize::from(img.get(x, y)));
            }
        }
    }

    #[test]
    fn overlay_is_deterministic_and_local(
        (img, cut_cols) in (2usize..40, 2usize..20).prop_flat_map(|(w, h)| (random_image(w, h, 0.2), prop::collection::vec(0..w, 0..5))),
    ) {
        let gray = img.to_gray();
        let cuts: Vec<CandidateCut> = cut_cols.iter().map(|&c| valid(c)).collect();
        let paths: Vec<SegmentationPath> = cut_cols.iter().map(|&c| SegmentationPath::straight(c, img.height())).collect();
        let a = overlay(&gray, &cuts, &paths);
        prop_assert_eq!(encode_pgm(&a), encode_pgm(&overlay(&gray, &cuts, &paths)));
        for y in 0..img.height() {
            for x in 0..img.width() {
                if cut_cols.contains(&x) {
                    prop_assert_eq!(a.get(x, y), PATH_LEVEL);
                } else {
                    prop_assert_eq!(a.get(x, y), gray.get(x, y));
                }
            }
        }
    }
}

#[test]
fn rings_stay_whole() {
    let rows = [
        "..............................",
        "...######...........######....",
        "..#......#.........#......#...",
        "..#......#.........#......#...",
        "..#......#.........#......#...",
        "...######...........######....",
        ".........###########..........",
        "..............................",
    ];
    let img = BinaryImage::from_ascii(&rows);
    let zone = CoreZone { top_row: 1, bottom_row: 5 };
    let path = trace_path(&SkeletonImage::assume_thin(img.clone()), &valid(14), &zone, 1.0);
    let segs = segment_characters(&img, &[path]).unwrap();
    let left: Vec<_> = segs[0].ink_pixels();
    let right: Vec<_> = segs[1].ink_pixels();
    let ring = |x0: usize, x1: usize| {
        (0..6).flat_map(move |y| (x0..=x1).map(move |x| (x, y))).filter(|&(x, y)| img.get(x, y)).collect::<Vec<_>>()
    };
    assert!(ring(2, 9).iter().all(|p| left.contains(p)));
    assert!(ring(19, 26).iter().all(|p| right.contains(p)));
}

#[test]
fn overlay_of_blank_gray_marks_only_cut() {
    let gray = GrayImage::filled(10, 4, 255);
    let out = overlay(&gray, &[valid(3)], &[]);
    assert!((0..4).all(|y| out.get(3, y) != 255));
    assert_eq!((0..4).filter(|&y| out.get(5, y) != 255).count(), 0);
}
