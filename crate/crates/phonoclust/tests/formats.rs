use phonoclust::formats::{keypoint_line, parse_keypoint_line};
use phonoclust::openpose::parse_keypoint_file;
use phonoclust_core::{Keypoint, KeypointFrame};
use proptest::prelude::*;

fn keypoint(grid: bool) -> impl Strategy<Value = Keypoint> {
    let coord = move || -> BoxedStrategy<f64> {
        if grid {
            (-50_000i32..50_000).prop_map(|k| f64::from(k) / 1000.0).boxed()
        } else {
            (-1.0e4f64..1.0e4).boxed()
        }
    };
    (coord(), coord(), 0.0f64..=1.0).prop_map(|(x, y, c)| Keypoint::new(x, y, c))
}

fn frame(grid: bool) -> impl Strategy<Value = KeypointFrame> {
    (
        0usize..100_000,
        prop::array::uniform25(keypoint(grid)),
        prop::array::uniform21(keypoint(grid)),
        prop::array::uniform21(keypoint(grid)),
    )
        .prop_map(|(frame_index, body, left_hand, right_hand)| KeypointFrame {
            frame_index,
            body,
            left_hand,
            right_hand,
        })
}

fn flat(points: &[Keypoint]) -> String {
    let values: Vec<String> = points
        .iter()
        .flat_map(|k| [k.x, k.y, k.confidence])
        .map(|v| v.to_string())
        .collect();
    format!("[{}]", values.join(","))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn keypoint_lines_round_trip_exactly(f in frame(true)) {
        let back = parse_keypoint_line(&keypoint_line(&f)).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn keypoint_lines_are_stable_after_one_pass(f in frame(false)) {
        let once = parse_keypoint_line(&keypoint_line(&f)).unwrap();
        let line = keypoint_line(&once);
        prop_assert_eq!(keypoint_line(&parse_keypoint_line(&line).unwrap()), line);
        for (a, b) in once.keypoints().zip(f.keypoints()) {
            prop_assert!((a.x - b.x).abs() <= 1e-8 * b.x.abs().max(1.0));
            prop_assert!((a.y - b.y).abs() <= 1e-8 * b.y.abs().max(1.0));
        }
    }

    #[test]
    fn openpose_files_round_trip_exactly(f in frame(false)) {
        let doc = format!(
            r#"{{"version":1.3,"people":[{{"person_id":[-1],"pose_keypoints_2d":{},"face_keypoints_2d":[],"hand_left_keypoints_2d":{},"hand_right_keypoints_2d":{}}}]}}"#,
            flat(&f.body),
            flat(&f.left_hand),
            flat(&f.right_hand)
        );
        prop_assert_eq!(parse_keypoint_file(doc.as_bytes(), f.frame_index).unwrap(), f);
    }
}
