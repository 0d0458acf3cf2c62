use densejump::system::{build_profile_gnl, build_states, front_track, scaled_partition, ProfileFile, TrackerConfig, TV_ROUNDING};
use densejump::waves::{Isentropic, State, SystemFixture};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profile_variation_bounded_and_tracking_admissible(sigma0 in 0.01f64..0.08, n in 4usize..40, field in 1usize..=2) {
        let sys = Isentropic::new(1.4);
        let u0 = State::from_vec(vec![1.0, 0.0]);
        let seq = build_states(&sys, &u0, field, &scaled_partition(sigma0, n).unwrap(), sigma0).unwrap();
        let prof = build_profile_gnl(&sys, &seq).unwrap();
        prop_assert!(prof.tv().tv_lambda <= 2.0 * sigma0 + TV_ROUNDING);
        let traj = front_track(&sys, &prof, 0.5, &TrackerConfig::new(1e-3), &[0.25], sigma0).unwrap();
        prop_assert!(traj.diagnostics.shocks_admissible);
        prop_assert!(traj.last().positions_increasing());
        prop_assert!(traj.diagnostics.mass_defect <= 1e-3);
    }
}

#[test]
fn profile_file_reload_tracks_identically() {
    let fixture = SystemFixture::Isentropic { gamma: 1.4 };
    let sys = Isentropic::new(1.4);
    let seq = build_states(&sys, &fixture.default_state(), 1, &scaled_partition(0.05, 16).unwrap(), 0.05).unwrap();
    let prof = build_profile_gnl(&sys, &seq).unwrap();
    let text = serde_json::to_string(&ProfileFile::new(&prof, fixture, 0.05, 16)).unwrap();
    let (sys2, prof2) = serde_json::from_str::<ProfileFile>(&text).unwrap().load().unwrap();
    let cfg = TrackerConfig::new(1e-3);
    let a = front_track(&sys, &prof, 0.6, &cfg, &[], 0.05).unwrap();
    let b = front_track(sys2.as_ref(), &prof2, 0.6, &cfg, &[], 0.05).unwrap();
    for q in 0..200 {
        let x = -0.5 + 2.0 * q as f64 / 200.0;
        assert_eq!(a.last().evaluate(x), b.last().evaluate(x));
    }
}
