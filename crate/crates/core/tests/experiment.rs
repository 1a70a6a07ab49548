use std::fs;
use std::path::Path;

use ard_core::distortion::Metric;
use ard_core::experiment::{
    parse_front_csv, resume_experiment, run_experiment, AlphabetChoice, ExperimentSpec,
    CHECKPOINT_FILE, FRONT_FILE, MSS_FILE,
};
use ard_core::image::{encode_pgm, ImageGrid};
use ard_core::search::SearchConfig;

const TEXT: &[u8] = b"the cat sat on the mat and the rat sat on the hat";

fn spec(dir: &Path, input: &[u8], metric: Metric, iterations: u64, out: &str) -> ExperimentSpec {
    let path = dir.join("input.txt");
    fs::write(&path, input).unwrap();
    ExperimentSpec {
        alphabet: AlphabetChoice::Auto,
        search: SearchConfig {
            seed: 11,
            max_iterations: iterations,
            checkpoint_every: 7,
            ..Default::default()
        },
        ..ExperimentSpec::new(path, metric, dir.join(out))
    }
}

fn front(dir: &Path) -> String {
    fs::read_to_string(dir.join(FRONT_FILE)).unwrap()
}

#[test]
fn same_seed_gives_identical_front_file() {
    let dir = tempfile::tempdir().unwrap();
    for metric in Metric::ALL {
        let input: &[u8] = if metric == Metric::Euclidean { &TEXT[..48] } else { TEXT };
        let mut a = spec(dir.path(), input, metric, 40, "a");
        let mut b = spec(dir.path(), input, metric, 40, "b");
        if metric == Metric::Euclidean {
            for s in [&mut a, &mut b] {
                s.width = Some(8);
                s.height = Some(6);
            }
        }
        run_experiment(&a).unwrap();
        run_experiment(&b).unwrap();
        assert_eq!(front(&a.out_dir), front(&b.out_dir), "{metric}");
    }
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = spec(dir.path(), TEXT, Metric::Edit, 60, "full");
    run_experiment(&full).unwrap();

    let part = spec(dir.path(), TEXT, Metric::Edit, 25, "part");
    run_experiment(&part).unwrap();
    let report = resume_experiment(&part.out_dir.join(CHECKPOINT_FILE), Some(60)).unwrap();
    assert_eq!(report.iterations, 60);
    assert_eq!(front(&full.out_dir), front(&part.out_dir));
}

#[test]
fn front_file_is_a_staircase() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), TEXT, Metric::Hamming, 80, "out");
    run_experiment(&s).unwrap();
    let rows = parse_front_csv(&front(&s.out_dir)).unwrap();
    assert!(rows.len() > 1);
    for w in rows.windows(2) {
        assert!(w[0].rate < w[1].rate);
        assert!(w[0].distortion > w[1].distortion);
    }
}

#[test]
fn mss_is_the_front_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(dir.path(), TEXT, Metric::Edit, 80, "out");
    let report = run_experiment(&s).unwrap();
    let rows = parse_front_csv(&front(&s.out_dir)).unwrap();
    let least = rows
        .iter()
        .map(|r| r.three_part_codelength)
        .fold(f64::INFINITY, f64::min);
    assert!((report.mss.three_part_codelength - least).abs() < 1e-6 * least);

    let mss = fs::read_to_string(s.out_dir.join(MSS_FILE)).unwrap();
    let field = |key: &str| {
        mss.lines()
            .find_map(|l| l.strip_prefix(key))
            .map(|v| v.trim().to_string())
            .unwrap()
    };
    let model = field("model:");
    let payload = fs::read(s.out_dir.join(&model)).unwrap();
    assert_eq!(hex::encode(&payload), field("payload_hex:"));
    assert_eq!(payload, report.mss.payload);
    // the earliest point within tie tolerance of the minimum
    let first = rows
        .iter()
        .position(|r| r.three_part_codelength <= least + 1e-6)
        .unwrap();
    assert!((rows[first].rate - report.mss.rate).abs() < 1e-6 * report.mss.rate.max(1.0));
}

#[test]
fn image_runs_write_pgm_models_and_best() {
    let dir = tempfile::tempdir().unwrap();
    let mut pixels = vec![255u8; 64];
    for i in 0..8 {
        pixels[3 * 8 + i] = 0;
        pixels[i * 8 + 3] = 0;
    }
    let clean = ImageGrid::new(8, 8, pixels.clone()).unwrap();
    pixels[0] = 0;
    pixels[63] = 0;
    let noisy = ImageGrid::new(8, 8, pixels).unwrap();
    fs::write(dir.path().join("clean.pgm"), encode_pgm(&clean)).unwrap();
    fs::write(dir.path().join("noisy.pgm"), encode_pgm(&noisy)).unwrap();

    let s = ExperimentSpec {
        original: Some(dir.path().join("clean.pgm")),
        alphabet: AlphabetChoice::Auto,
        search: SearchConfig {
            max_iterations: 50,
            ..Default::default()
        },
        ..ExperimentSpec::new(dir.path().join("noisy.pgm"), Metric::Hamming, dir.path().join("out"))
    };
    let report = run_experiment(&s).unwrap();
    let best = report.best.unwrap();
    let rows = parse_front_csv(&front(&s.out_dir)).unwrap();
    let closest = rows
        .iter()
        .filter_map(|r| r.distortion_to_original)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best.distortion_to_original, Some(closest));
    assert!(closest <= 2.0);
    let models = fs::read_dir(s.out_dir.join("models")).unwrap();
    for entry in models {
        let data = fs::read(entry.unwrap().path()).unwrap();
        assert!(data.starts_with(b"P5\n8 8\n255\n"));
    }
}

#[test]
fn resume_without_spec_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join(CHECKPOINT_FILE);
    fs::write(&ckpt, "ard-checkpoint v1 0 0 00\n").unwrap();
    assert!(resume_experiment(&ckpt, None).is_err());
}
