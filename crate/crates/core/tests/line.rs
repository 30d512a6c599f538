use phoneline::des::EventKind;
use phoneline::line::{simulate, RunOptions, TraceRecord};
use phoneline::model::{Bin, Family};
use phoneline::perception::ConfusionMatrix;
use phoneline::scenario::{ConfusionSource, ModelSpec, ScenarioConfig};
use phoneline::Scenario;

fn only(family: Family, confusion: ConfusionSource) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.models = vec![ModelSpec::new("phone", family)];
    c.mix = [("phone".to_string(), 1.0)].into_iter().collect();
    c.perception.confusion = confusion;
    c
}

fn trace(scn: &Scenario, n: u64) -> Vec<TraceRecord> {
    simulate(scn, n, RunOptions { replication: 0, trace: true }).unwrap().trace
}

fn times(t: &[TraceRecord], kind: EventKind) -> Vec<f64> {
    t.iter().filter(|r| r.kind == kind).map(|r| r.time).collect()
}

#[test]
fn empty_lot() {
    let scn = ScenarioConfig::default().resolve().unwrap();
    let out = simulate(&scn, 0, RunOptions::default()).unwrap();
    assert_eq!(out.report.makespan_s, 0.0);
    assert_eq!(out.report.bins.total_count(), 0);
    assert_eq!(out.report.throughput_per_hour, 0.0);
}

#[test]
fn one_android_phone_hand_traced() {
    let scn = only(Family::AndroidLike, ConfusionSource::Identity).resolve().unwrap();
    let t = trace(&scn, 1);
    assert_eq!(times(&t, EventKind::CutDone), vec![30.0]);
    // four picks of 7 s; the detector's 19.7 ms hides inside each pick
    assert_eq!(times(&t, EventKind::PickDone), vec![37.0, 44.0, 51.0, 58.0]);
    // the middle layer queues at 44 s but waits for the screen and film to
    // clear the robot (58 s) before it is flushed as a batch of one
    assert_eq!(times(&t, EventKind::ChillBatchDone), vec![88.0]);
    assert_eq!(times(&t, EventKind::ExtractDone), vec![91.0]);
    let out = simulate(&scn, 1, RunOptions::default()).unwrap();
    let r = &out.report;
    assert_eq!(r.makespan_s, 91.0);
    assert_eq!(r.bins.get(Bin::LowValue).count, 3);
    assert_eq!(r.bins.get(Bin::BatterySafe).count, 1);
    assert_eq!(r.bins.get(Bin::HighValue).count, 1);
    assert_eq!(r.chill_batches, 1);
    assert_eq!(out.phones[0].sort_time, 28.0);
}

#[test]
fn one_iphone_flip_gap() {
    let scn = only(Family::IphoneLike, ConfusionSource::Identity).resolve().unwrap();
    let t = trace(&scn, 1);
    let case = t.iter().find(|r| r.kind == EventKind::FlipDone).unwrap();
    let pick = t
        .iter()
        .find(|r| r.kind == EventKind::PickDone && r.uid == case.uid)
        .unwrap();
    assert_eq!(case.time - pick.time, 6.0);
    let out = simulate(&scn, 1, RunOptions::default()).unwrap();
    assert_eq!(out.phones[0].sort_time, 27.0);
    assert!(out.report.hazards.is_empty());
}

#[test]
fn chill_batches_split_four_and_one() {
    let scn = only(Family::AndroidLike, ConfusionSource::Identity).resolve().unwrap();
    let t = trace(&scn, 5);
    let batches: Vec<_> = t.iter().filter(|r| r.kind == EventKind::ChillBatchDone).collect();
    assert_eq!(batches.len(), 2);
    let out = simulate(&scn, 5, RunOptions::default()).unwrap();
    assert_eq!(out.report.chill_batches, 2);
    assert_eq!(out.report.bins.get(Bin::BatterySafe).count, 5);
    // middle layers queue at 44, 74, 104 and 134 s; the full batch chills
    // until 164 s. The fifth queues at 164 s and is flushed once phone 5's
    // last item leaves the robot at 178 s.
    assert_eq!(times(&t, EventKind::ChillBatchDone), vec![164.0, 208.0]);
}

#[test]
fn transfer_time_delays_each_hop() {
    let mut c = only(Family::AndroidLike, ConfusionSource::Identity);
    c.stations.transfer_time = 2.0;
    let scn = c.resolve().unwrap();
    let t = trace(&scn, 1);
    // cut 30, to table 2, picks start at 32
    assert_eq!(times(&t, EventKind::PickDone)[0], 39.0);
}

#[test]
fn mass_is_conserved() {
    let mut c = ScenarioConfig::default();
    c.perception.confusion = ConfusionSource::UniformDiagonal(0.7);
    c.perception.low_confidence_rate = 0.1;
    let scn = c.resolve().unwrap();
    for rep in 0..5 {
        let r = simulate(&scn, 150, RunOptions { replication: rep, trace: false }).unwrap().report;
        assert!((r.input_mass_lb - r.binned_mass_lb).abs() < 1e-9 * r.input_mass_lb);
        assert_eq!(r.phones_done, 150);
        assert!(r.rescans > 0);
        for s in &r.stations {
            assert!((0.0..=1.0).contains(&s.utilization), "{s:?}");
        }
    }
}

#[test]
fn identity_confusion_has_no_hazards() {
    let mut c = ScenarioConfig::default();
    c.perception.confusion = ConfusionSource::Identity;
    let scn = c.resolve().unwrap();
    let r = simulate(&scn, 300, RunOptions::default()).unwrap().report;
    assert!(r.hazards.is_empty());
    assert_eq!(r.manual_exceptions, 0);
    assert_eq!(r.extraction_discrepancies, 0);
    assert_eq!(r.per_phone_success_rate, 1.0);
    // every phone has exactly one battery host; every battery ends up safe
    assert_eq!(r.bins.get(Bin::BatterySafe).count, 300);
}

#[test]
fn misperceived_battery_host_is_a_hazard() {
    // middle layers always read as normal cases
    let mut rows = ConfusionMatrix::identity().rows().to_owned();
    rows[1] = [1.0, 0.0, 0.0, 0.0, 0.0];
    let m = ConfusionMatrix::from_rows(rows).unwrap();
    let scn = only(Family::AndroidLike, ConfusionSource::Matrix(m.clone())).resolve().unwrap();
    let r = simulate(&scn, 3, RunOptions::default()).unwrap().report;
    assert_eq!(r.hazard_count, 3);
    assert_eq!(r.bins.get(Bin::LowValue).count, 12);
    assert_eq!(r.bins.get(Bin::BatterySafe).count, 0);

    let mut c = only(Family::AndroidLike, ConfusionSource::Matrix(m));
    c.routing.xray_audit = true;
    let r = simulate(&c.resolve().unwrap(), 3, RunOptions::default()).unwrap().report;
    assert_eq!(r.hazard_count, 0);
    assert_eq!(r.audit_intercepts, 3);
    assert_eq!(r.bins.get(Bin::ManualException).count, 3);
}

#[test]
fn screen_sent_to_extraction_is_a_discrepancy() {
    // screens always read as middle layers: chilled, hammered, nothing inside
    let mut rows = ConfusionMatrix::identity().rows().to_owned();
    rows[2] = [0.0, 1.0, 0.0, 0.0, 0.0];
    let m = ConfusionMatrix::from_rows(rows).unwrap();
    let scn = only(Family::AndroidLike, ConfusionSource::Matrix(m)).resolve().unwrap();
    let out = simulate(&scn, 1, RunOptions::default()).unwrap();
    let r = &out.report;
    assert_eq!(r.extraction_discrepancies, 1);
    assert_eq!(r.hazard_count, 0);
    assert_eq!(r.bins.get(Bin::HighValue).count, 2);
    assert_eq!(r.bins.get(Bin::LowValue).count, 2);
    assert!(!out.phones[0].all_correct);
}

#[test]
fn unflipped_case_at_the_hammer() {
    // iPhone cases read as middle layers: chilled without a flip
    let mut rows = ConfusionMatrix::identity().rows().to_owned();
    rows[4] = [0.0, 1.0, 0.0, 0.0, 0.0];
    let m = ConfusionMatrix::from_rows(rows).unwrap();
    let scn = only(Family::IphoneLike, ConfusionSource::Matrix(m)).resolve().unwrap();
    let r = simulate(&scn, 2, RunOptions::default()).unwrap().report;
    assert_eq!(r.hazard_count, 2);
    assert_eq!(r.bins.get(Bin::ManualException).count, 2);
    assert!(r.hazards.0.iter().all(|h| h.description.contains("unflipped")));
}

#[test]
fn two_failed_scans_go_to_manual_handling() {
    let mut c = only(Family::AndroidLike, ConfusionSource::Identity);
    c.perception.low_confidence_rate = 1.0;
    let scn = c.resolve().unwrap();
    let out = simulate(&scn, 1, RunOptions { replication: 0, trace: true }).unwrap();
    let r = &out.report;
    assert_eq!(r.rescans, 8);
    assert_eq!(r.manual_exceptions, 4);
    assert_eq!(r.bins.get(Bin::ManualException).count, 4);
    assert_eq!(r.chill_batches, 0);
    // scan, rescan, hand-off: three picks per item
    assert_eq!(out.phones[0].sort_time, 4.0 * 3.0 * 7.0);
}

#[test]
fn hazards_fall_as_accuracy_rises() {
    let rate = |d: f64| {
        let mut c = only(Family::AndroidLike, ConfusionSource::UniformDiagonal(d));
        c.seed = 7;
        let scn = c.resolve().unwrap();
        let r = simulate(&scn, 10_000, RunOptions::default()).unwrap().report;
        r.hazard_count as f64 / r.phones_in as f64
    };
    let (lo, hi) = (rate(0.9), rate(0.97));
    // P(hazard) = 3·(1 − d)/4: 0.075 vs 0.0225
    let n = 10_000.0;
    let sd = |p: f64| (p * (1.0 - p) / n).sqrt();
    assert!((lo - 0.075).abs() < 3.0 * sd(0.075), "{lo}");
    assert!((hi - 0.0225).abs() < 3.0 * sd(0.0225), "{hi}");
    assert!(hi < lo);
}

#[test]
fn triangular_durations_are_reproducible() {
    let doc = r#"{"stations": {"cutting_cycle": {"min": 25, "mode": 30, "max": 40}}, "lot_size": 20}"#;
    let (c, _) = ScenarioConfig::from_json(doc, phoneline::UnknownKeys::Reject).unwrap();
    let scn = c.resolve().unwrap();
    let a = simulate(&scn, 20, RunOptions::default()).unwrap().report;
    let b = simulate(&scn, 20, RunOptions::default()).unwrap().report;
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c1 = simulate(&scn, 20, RunOptions { replication: 1, trace: false }).unwrap().report;
    assert_ne!(a.makespan_s, c1.makespan_s);
}

#[test]
fn clock_never_runs_backwards() {
    let scn = ScenarioConfig::default().resolve().unwrap();
    let t = trace(&scn, 50);
    assert!(t.windows(2).all(|w| w[0].time <= w[1].time));
    assert!(t.windows(2).all(|w| w[0].seq != w[1].seq));
}
