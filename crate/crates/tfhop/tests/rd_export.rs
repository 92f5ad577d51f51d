use tfhop::config::{Draw, ScenarioConfig, Topology};
use tfhop::harness::{export_rd_cube, median_db, rd_cube_at, Algorithm, ExperimentSpec, Fidelity};
use tfhop::model::C;
use tfhop::rd::{detect_peak, RdCube};

fn spec(cfg: ScenarioConfig, algo: Algorithm, epochs: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(cfg, algo, 1);
    s.epochs = epochs;
    s.fidelity = Fidelity::Waveform;
    s
}

fn isolated() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::baseline();
    cfg.interference.topology = Topology::None;
    cfg
}

/// Strongest cell more than two range bins or two Doppler bins from `(m, q)`.
fn off_target_peak_db(cube: &RdCube, m: usize, q: usize) -> f64 {
    let mut best: f64 = 0.0;
    for mm in 0..cube.n_m {
        for qq in 0..cube.n_q {
            let dq = (qq as isize - q as isize).rem_euclid(cube.n_q as isize).min((q as isize - qq as isize).rem_euclid(cube.n_q as isize));
            if (mm as isize - m as isize).abs() <= 2 && dq <= 2 {
                continue;
            }
            for p in 0..cube.n_p {
                best = best.max(cube.at(mm, qq, p).norm_sqr());
            }
        }
    }
    10.0 * best.log10()
}

#[test]
fn nash_map_shows_interference_ghosts() {
    let (nash, sc, _, _) = rd_cube_at(&spec(ScenarioConfig::baseline(), Algorithm::Nash, 2), 1, 2).unwrap();
    let (clean, _, _, _) = rd_cube_at(&spec(isolated(), Algorithm::Nash, 2), 1, 2).unwrap();
    let t = &sc.targets[0][0];
    let (m, q, _) = clean.nearest(t.range_m, t.velocity_mps);
    let ghost = off_target_peak_db(&nash, m, q);
    let floor = off_target_peak_db(&clean, m, q);
    assert!(ghost > floor + 20.0, "ghost {ghost:.1} dB vs clean {floor:.1} dB");
}

#[test]
fn random_map_has_raised_floor() {
    let epochs = 15;
    let mean_median = |cfg: ScenarioConfig| {
        let s = spec(cfg, Algorithm::Random, epochs);
        (1..=epochs).map(|e| median_db(&rd_cube_at(&s, 1, e).unwrap().0)).sum::<f64>() / epochs as f64
    };
    let random = mean_median(ScenarioConfig::baseline());
    let clean = mean_median(isolated());
    assert!(random > clean, "random {random:.2} dB vs clean {clean:.2} dB");
}

#[test]
fn single_radar_peak_at_truth() {
    let mut cfg = isolated();
    cfg.radar.count = 1;
    cfg.radar.b_mhz = Draw::Fixed(150.0);
    // blocks longer than one chirp make the schedule hop inside the CPI
    cfg.learner.block_length = 21;
    let dir = tempfile::tempdir().unwrap();
    for seed in [1u64, 2, 3] {
        let mut s = spec(cfg.clone(), Algorithm::Random, 1);
        s.seed = seed;
        let r = export_rd_cube(&s, 1, 1, dir.path()).unwrap();
        let e = &r.export;
        assert!((e.detected_range_m - e.truth_range_m).abs() <= C / (4.0 * 150e6));
        let vbin = r.cube.grid.v_q[1] - r.cube.grid.v_q[0];
        assert!((e.detected_velocity_mps - e.truth_velocity_mps).abs() <= vbin);
        assert_eq!(detect_peak(&r.cube).power, r.detection.power);
        assert!(e.csv.exists() && e.adc.exists());
    }
}

#[test]
fn fast_fidelity_rejected() {
    let mut s = spec(ScenarioConfig::baseline(), Algorithm::Random, 1);
    s.fidelity = Fidelity::Fast;
    let dir = tempfile::tempdir().unwrap();
    assert!(export_rd_cube(&s, 1, 1, dir.path()).is_err());
}
