//! Classical tracking on synthetic videos.

use qvtrack_core::seed::SeedTree;
use qvtrack_core::tracker::{track, track_2d, Tracker2dConfig, TrackerConfig};
use rand::Rng;

fn video_1d(frames: usize, step: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeedTree::new(seed).rng();
    let background: Vec<f64> = (0..80).map(|_| rng.gen_range(0.3..0.4)).collect();
    let object: Vec<f64> = (0..10).map(|_| rng.gen_range(0.8..1.0)).collect();
    (0..frames)
        .map(|f| {
            let mut px = background.clone();
            px[20 + f * step..30 + f * step].copy_from_slice(&object);
            px
        })
        .collect()
}

#[test]
fn static_object_keeps_position() {
    let path = track(&video_1d(5, 0, 1), 15, &TrackerConfig::default()).unwrap();
    assert_eq!(path, vec![15; 5]);
}

#[test]
fn moving_object_is_followed() {
    let path = track(&video_1d(6, 3, 2), 15, &TrackerConfig::default()).unwrap();
    assert_eq!(path, vec![15, 18, 21, 24, 27, 30]);
}

#[test]
fn patch_leaving_frame_is_an_error() {
    assert!(track(&video_1d(2, 0, 1), 70, &TrackerConfig::default()).is_err());
}

#[test]
fn diagonal_motion_in_2d() {
    let mut rng = SeedTree::new(3).rng();
    let (h, w) = (24, 24);
    let background: Vec<Vec<f64>> = (0..h).map(|_| (0..w).map(|_| rng.gen_range(0.0..0.2)).collect()).collect();
    let object: Vec<f64> = (0..9).map(|_| rng.gen_range(0.8..1.0)).collect();
    let frames: Vec<Vec<Vec<f64>>> = (0..5)
        .map(|f| {
            let mut px = background.clone();
            for r in 0..3 {
                for c in 0..3 {
                    px[6 + f + r][6 + f + c] = object[r * 3 + c];
                }
            }
            px
        })
        .collect();
    let path = track_2d(&frames, (4, 4), &Tracker2dConfig::default()).unwrap();
    assert_eq!(path, vec![(4, 4), (5, 5), (6, 6), (7, 7), (8, 8)]);
}
