//! Event handlers for one lot flowing through cutter → robot → chiller →
//! extractor, and the report assembled at drain.

use std::collections::{BTreeMap, VecDeque};

use crate::des::{replication_seed, Event, EventKind, EventQueue, Resource, RngStream, Seize};
use crate::error::{Error, Result};
use crate::model::{Bin, ComponentItem, Orientation, PhoneState, PhoneUnit};
use crate::perception::{classify_with_threshold, sample_perceived};
use crate::scenario::Scenario;

use super::policy::{decide_action, extract_battery, flip, route, Action, ExtractOutcome, RouteOutcome};
use super::report::{
    BinTally, HazardEntry, HazardLog, PhoneLog, SimOutcome, SimReport, SpanStats, StationStats, TraceRecord,
};

const CUTTER: &str = "cutter";
const ROBOT: &str = "robot";
const CHILLER: &str = "chiller";
const EXTRACTOR: &str = "extractor";

/// Batch ids live in their own uid range, away from phones and items.
const BATCH_UID_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Replication index; selects the replication seed.
    pub replication: u64,
    /// Keep every popped event in [`SimOutcome::trace`].
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dest {
    Table,
    Chiller,
    Bin { bin: Bin, mass_lb: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Payload {
    Phone(u64),
    Item(u64),
    Batch { uid: u64, items: Vec<u64> },
    Route { uid: u64, dest: Dest },
}

impl Payload {
    fn uid(&self) -> u64 {
        match self {
            Payload::Phone(u) | Payload::Item(u) => *u,
            Payload::Batch { uid, .. } | Payload::Route { uid, .. } => *uid,
        }
    }
}

fn phone_uid(p: u64) -> u64 {
    p << 8
}

struct PhoneTrack {
    unit: PhoneUnit,
    rng: RngStream,
    mass_lb: f64,
    /// Pieces (items, or battery + frame after a split) not yet in a bin.
    open_pieces: u64,
    cut_done: f64,
    sort_start: Option<f64>,
    sort_end: f64,
    sort_time: f64,
    done_at: f64,
    all_correct: bool,
    hazards: u64,
}

struct ItemTrack {
    item: ComponentItem,
    rng: RngStream,
    scans: u8,
    /// Two failed scans: the next pick hands the item to manual handling.
    to_manual: bool,
}

struct Line<'a> {
    scn: &'a Scenario,
    seed: u64,
    queue: EventQueue<Payload>,
    cutter: Resource,
    robot: Resource,
    chiller: Resource,
    extractor: Resource,
    phones: Vec<PhoneTrack>,
    items: BTreeMap<u64, ItemTrack>,
    chill_queue: VecDeque<u64>,
    /// Phones not yet cut, items not yet released by the robot, and items in
    /// transit to the chiller: anything that could still join a batch.
    upstream: u64,
    batches: u64,
    bins: BinTally,
    hazards: HazardLog,
    items_created: u64,
    items_correct: u64,
    rescans: u64,
    manual_exceptions: u64,
    discrepancies: u64,
    intercepts: u64,
    trace: Option<Vec<TraceRecord>>,
}

/// Runs one replication of `lot_size` phones.
pub fn simulate(scn: &Scenario, lot_size: u64, opts: RunOptions) -> Result<SimOutcome> {
    if lot_size >= 1 << 54 {
        return Err(Error::config("lot_size", "too large"));
    }
    let st = &scn.stations;
    let mut line = Line {
        scn,
        seed: replication_seed(scn.seed, opts.replication),
        queue: EventQueue::new(),
        cutter: Resource::new(CUTTER, st.cutter_capacity)?,
        robot: Resource::new(ROBOT, st.robot_capacity)?,
        chiller: Resource::new(CHILLER, st.chiller_chambers)?,
        extractor: Resource::new(EXTRACTOR, st.extractor_capacity)?,
        phones: Vec::with_capacity(lot_size as usize),
        items: BTreeMap::new(),
        chill_queue: VecDeque::new(),
        upstream: lot_size,
        batches: 0,
        bins: BinTally::default(),
        hazards: HazardLog::default(),
        items_created: 0,
        items_correct: 0,
        rescans: 0,
        manual_exceptions: 0,
        discrepancies: 0,
        intercepts: 0,
        trace: opts.trace.then(Vec::new),
    };
    // the whole lot is on the intake conveyor at t = 0
    for p in 1..=lot_size {
        line.queue.schedule(0.0, EventKind::Arrival, Payload::Phone(phone_uid(p)))?;
    }
    while let Some(ev) = line.queue.pop() {
        let (kind, seq, time) = (ev.kind, ev.seq, ev.time);
        line.record(&ev);
        line.handle(ev).map_err(|e| Error::Handler {
            kind,
            seq,
            time,
            source: Box::new(e),
        })?;
        line.try_start_batches()?;
    }
    line.finish(opts.replication)
}

/// Runs replication 0 of the scenario's lot.
pub fn run(scn: &Scenario) -> Result<SimReport> {
    Ok(simulate(scn, scn.lot_size, RunOptions::default())?.report)
}

impl<'a> Line<'a> {
    fn now(&self) -> f64 {
        self.queue.now()
    }

    fn record(&mut self, ev: &Event<Payload>) {
        let Some(trace) = self.trace.as_mut() else { return };
        let station = match (&ev.kind, &ev.payload) {
            (EventKind::Arrival, _) => "intake".to_string(),
            (EventKind::CutDone, _) => CUTTER.to_string(),
            (EventKind::PickDone | EventKind::FlipDone, _) => ROBOT.to_string(),
            (EventKind::ChillBatchDone, _) => CHILLER.to_string(),
            (EventKind::ExtractDone, _) => EXTRACTOR.to_string(),
            (EventKind::RouteDone, Payload::Route { dest, .. }) => match dest {
                Dest::Table => "table".to_string(),
                Dest::Chiller => "chill_queue".to_string(),
                Dest::Bin { bin, .. } => serde_json::to_value(bin)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
            },
            (EventKind::RouteDone, _) => String::new(),
        };
        trace.push(TraceRecord {
            time: ev.time,
            seq: ev.seq,
            kind: ev.kind,
            uid: ev.payload.uid(),
            station,
        });
    }

    fn phone(&mut self, uid: u64) -> Result<&mut PhoneTrack> {
        let idx = (uid >> 8) as usize;
        self.phones
            .get_mut(idx.wrapping_sub(1))
            .ok_or_else(|| Error::Logic(format!("unknown phone {uid}")))
    }

    fn item(&mut self, uid: u64) -> Result<&mut ItemTrack> {
        self.items
            .get_mut(&uid)
            .ok_or_else(|| Error::Logic(format!("unknown item {uid}")))
    }

    fn handle(&mut self, ev: Event<Payload>) -> Result<()> {
        match (ev.kind, ev.payload) {
            (EventKind::Arrival, Payload::Phone(uid)) => self.on_arrival(uid),
            (EventKind::CutDone, Payload::Phone(uid)) => self.on_cut_done(uid),
            (EventKind::PickDone, Payload::Item(uid)) => self.on_pick_done(uid),
            (EventKind::FlipDone, Payload::Item(uid)) => self.on_flip_done(uid),
            (EventKind::ChillBatchDone, Payload::Batch { uid, items }) => self.on_batch_done(uid, items),
            (EventKind::ExtractDone, Payload::Item(uid)) => self.on_extract_done(uid),
            (EventKind::RouteDone, Payload::Route { uid, dest }) => self.on_route_done(uid, dest),
            (kind, payload) => Err(Error::Logic(format!("{kind:?} event with payload {payload:?}"))),
        }
    }

    fn on_arrival(&mut self, uid: u64) -> Result<()> {
        let mut rng = RngStream::new(self.seed, uid);
        let model = self.scn.pick_model(rng.draw_uniform());
        let mass_lb = self.scn.catalog.get(model).mass_lb;
        if (uid >> 8) as usize != self.phones.len() + 1 {
            return Err(Error::Logic(format!("phone {uid} arrived out of order")));
        }
        self.phones.push(PhoneTrack {
            unit: PhoneUnit {
                uid,
                model,
                arrival_time: self.now(),
                state: PhoneState::Collected,
            },
            rng,
            mass_lb,
            open_pieces: 0,
            cut_done: f64::NAN,
            sort_start: None,
            sort_end: f64::NAN,
            sort_time: 0.0,
            done_at: f64::NAN,
            all_correct: true,
            hazards: 0,
        });
        if self.cutter.seize(uid, self.now())? == Seize::Granted {
            self.start_cut(uid)?;
        }
        Ok(())
    }

    fn start_cut(&mut self, uid: u64) -> Result<()> {
        let cycle = self.scn.stations.cutting_cycle;
        let d = cycle.sample(&mut self.phone(uid)?.rng);
        self.queue.schedule_in(d, EventKind::CutDone, Payload::Phone(uid))?;
        Ok(())
    }

    fn on_cut_done(&mut self, uid: u64) -> Result<()> {
        let now = self.now();
        if let Some(next) = self.cutter.release(uid, now)? {
            self.start_cut(next)?;
        }
        let seed = self.seed;
        let scn = self.scn;
        let phone = self.phone(uid)?;
        phone.unit.advance(PhoneState::Cut)?;
        phone.cut_done = now;
        let model = scn.catalog.get(phone.unit.model);
        let mass = phone.mass_lb;
        phone.open_pieces = model.manifest.len() as u64;
        let mut new_items = Vec::with_capacity(model.manifest.len());
        for (k, (&class, &frac)) in model.manifest.iter().zip(&model.mass_fractions).enumerate() {
            let iuid = uid | (k as u64 + 1);
            new_items.push(ItemTrack {
                item: ComponentItem {
                    uid: iuid,
                    parent_phone: uid,
                    true_class: class,
                    perceived_class: None,
                    confidence: 0.0,
                    contains_battery: model.battery_host == Some(class),
                    orientation: Orientation::FaceDown,
                    mass_fraction: frac,
                    mass_lb: mass * frac,
                },
                rng: RngStream::new(seed, iuid),
                scans: 0,
                to_manual: false,
            });
        }
        self.upstream = self.upstream - 1 + new_items.len() as u64;
        self.items_created += new_items.len() as u64;
        let transfer = scn.stations.transfer_time;
        for it in new_items {
            let iuid = it.item.uid;
            self.items.insert(iuid, it);
            self.queue.schedule_in(
                transfer,
                EventKind::RouteDone,
                Payload::Route {
                    uid: iuid,
                    dest: Dest::Table,
                },
            )?;
        }
        Ok(())
    }

    /// One scan-and-pick cycle: the detector runs while the arm moves.
    fn start_pick(&mut self, uid: u64) -> Result<()> {
        let now = self.now();
        let scn = self.scn;
        let (pick, inference) = (scn.stations.pick_time, scn.stations.inference_time);
        let it = self.item(uid)?;
        if !it.to_manual {
            let truth = it.item.true_class;
            let perceived = sample_perceived(truth, &scn.confusion, &mut it.rng)?;
            let low = scn.low_confidence_rate > 0.0 && it.rng.draw_uniform() < scn.low_confidence_rate;
            let tau = scn.confidence_threshold;
            let u = it.rng.draw_uniform();
            let confidence = if low { tau * u } else { tau + (1.0 - tau) * u };
            let idx = perceived.index().ok_or(Error::NotDetectable(perceived))?;
            let other = ((1.0 - confidence) / 4.0).min(confidence);
            let mut scores = [other; 5];
            scores[idx] = confidence;
            it.item.confidence = confidence;
            it.item.perceived_class = classify_with_threshold(&scores, tau)?.map(|(c, _)| c);
        }
        let d = pick.sample(&mut it.rng).max(inference);
        let phone = self.phone(uid >> 8 << 8)?;
        phone.unit.advance(PhoneState::Sorting)?;
        phone.sort_start.get_or_insert(now);
        phone.sort_time += d;
        self.queue.schedule_in(d, EventKind::PickDone, Payload::Item(uid))?;
        Ok(())
    }

    fn release_robot(&mut self, uid: u64) -> Result<()> {
        let now = self.now();
        self.upstream -= 1;
        self.phone(uid >> 8 << 8)?.sort_end = now;
        if let Some(next) = self.robot.release(uid, now)? {
            self.start_pick(next)?;
        }
        Ok(())
    }

    fn on_pick_done(&mut self, uid: u64) -> Result<()> {
        let now = self.now();
        let audit = self.scn.routing.xray_audit;
        let it = self.item(uid)?;
        if it.to_manual {
            let mass_lb = it.item.mass_lb;
            self.manual_exceptions += 1;
            self.settle_class(uid, false)?;
            self.release_robot(uid)?;
            return self.send(uid, Dest::Bin { bin: Bin::ManualException, mass_lb });
        }
        let Some(perceived) = it.item.perceived_class else {
            it.scans += 1;
            self.rescans += 1;
            if self.item(uid)?.scans >= 2 {
                self.item(uid)?.to_manual = true;
            }
            return self.start_pick(uid);
        };
        let item = it.item.clone();
        self.settle_class(uid, perceived == item.true_class)?;
        let action = decide_action(perceived, item.orientation)?;
        if action == Action::FlipThenChill {
            let flip_time = self.scn.stations.flip_time;
            let it = self.item(uid)?;
            let d = flip_time.sample(&mut it.rng);
            self.phone(uid >> 8 << 8)?.sort_time += d;
            self.queue.schedule_in(d, EventKind::FlipDone, Payload::Item(uid))?;
            return Ok(());
        }
        match route(&item, action, audit) {
            RouteOutcome::Deposit { bin, hazard, intercepted } => {
                if hazard {
                    self.log_hazard(now, &item, format!("battery in {} sent to the low-value bin", item.true_class))?;
                }
                if intercepted {
                    self.intercepts += 1;
                    self.manual_exceptions += 1;
                }
                self.release_robot(uid)?;
                self.send(uid, Dest::Bin { bin, mass_lb: item.mass_lb })
            }
            RouteOutcome::Chiller => {
                // released by the robot but still bound for the chiller
                self.upstream += 1;
                self.release_robot(uid)?;
                self.send(uid, Dest::Chiller)
            }
        }
    }

    fn on_flip_done(&mut self, uid: u64) -> Result<()> {
        flip(&mut self.item(uid)?.item)?;
        self.upstream += 1;
        self.release_robot(uid)?;
        self.send(uid, Dest::Chiller)
    }

    /// Start as many batches as free chambers allow: a full batch whenever
    /// one is waiting, a partial one once nothing else can arrive.
    fn try_start_batches(&mut self) -> Result<()> {
        let cap = self.scn.stations.chill_batch_capacity;
        while self.chiller.in_use() < self.chiller.capacity()
            && !self.chill_queue.is_empty()
            && (self.chill_queue.len() >= cap || self.upstream == 0)
        {
            let n = cap.min(self.chill_queue.len());
            let items: Vec<u64> = self.chill_queue.drain(..n).collect();
            self.batches += 1;
            let uid = BATCH_UID_BASE | self.batches;
            if self.chiller.seize(uid, self.now())? != Seize::Granted {
                return Err(Error::Logic("chiller chamber not free".into()));
            }
            let d = self.scn.stations.chill_time.sample(&mut RngStream::new(self.seed, uid));
            self.queue.schedule_in(d, EventKind::ChillBatchDone, Payload::Batch { uid, items })?;
        }
        Ok(())
    }

    fn on_batch_done(&mut self, uid: u64, items: Vec<u64>) -> Result<()> {
        self.chiller.release(uid, self.now())?;
        for iuid in items {
            if self.extractor.seize(iuid, self.now())? == Seize::Granted {
                self.start_extract(iuid)?;
            }
        }
        Ok(())
    }

    fn start_extract(&mut self, uid: u64) -> Result<()> {
        let extract = self.scn.stations.extract_time;
        let d = extract.sample(&mut self.item(uid)?.rng);
        self.queue.schedule_in(d, EventKind::ExtractDone, Payload::Item(uid))?;
        Ok(())
    }

    fn on_extract_done(&mut self, uid: u64) -> Result<()> {
        let now = self.now();
        if let Some(next) = self.extractor.release(uid, now)? {
            self.start_extract(next)?;
        }
        let frac = self.scn.routing.battery_mass_fraction;
        let item = self.item(uid)?.item.clone();
        self.phone(item.parent_phone)?.unit.advance(PhoneState::Extracted)?;
        match extract_battery(&item, true, frac)? {
            ExtractOutcome::Separated { battery_lb, frame_lb } => {
                self.phone(item.parent_phone)?.open_pieces += 1;
                self.send(uid, Dest::Bin { bin: Bin::BatterySafe, mass_lb: battery_lb })?;
                self.send(uid, Dest::Bin { bin: Bin::HighValue, mass_lb: frame_lb })
            }
            ExtractOutcome::NoBattery { frame_lb } => {
                self.discrepancies += 1;
                self.send(uid, Dest::Bin { bin: Bin::HighValue, mass_lb: frame_lb })
            }
            ExtractOutcome::Misoriented { hazard } => {
                if hazard {
                    self.log_hazard(now, &item, "hammer struck an unflipped iPhone case".to_string())?;
                }
                self.manual_exceptions += 1;
                self.send(uid, Dest::Bin { bin: Bin::ManualException, mass_lb: item.mass_lb })
            }
        }
    }

    fn send(&mut self, uid: u64, dest: Dest) -> Result<()> {
        let transfer = self.scn.stations.transfer_time;
        self.queue.schedule_in(transfer, EventKind::RouteDone, Payload::Route { uid, dest })?;
        Ok(())
    }

    fn on_route_done(&mut self, uid: u64, dest: Dest) -> Result<()> {
        let now = self.now();
        match dest {
            Dest::Table => {
                if self.robot.seize(uid, now)? == Seize::Granted {
                    self.start_pick(uid)?;
                }
            }
            Dest::Chiller => {
                self.upstream -= 1;
                self.phone(uid >> 8 << 8)?.unit.advance(PhoneState::Chilling)?;
                self.chill_queue.push_back(uid);
            }
            Dest::Bin { bin, mass_lb } => {
                self.bins.deposit(bin, mass_lb);
                let phone = self.phone(uid >> 8 << 8)?;
                phone.open_pieces -= 1;
                if phone.open_pieces == 0 {
                    phone.unit.advance(PhoneState::Done)?;
                    phone.done_at = now;
                }
            }
        }
        Ok(())
    }

    fn settle_class(&mut self, uid: u64, correct: bool) -> Result<()> {
        if correct {
            self.items_correct += 1;
        } else {
            self.phone(uid >> 8 << 8)?.all_correct = false;
        }
        Ok(())
    }

    fn log_hazard(&mut self, time: f64, item: &ComponentItem, description: String) -> Result<()> {
        if !item.contains_battery {
            return Err(Error::Logic(format!("hazard on battery-free item {}", item.uid)));
        }
        self.phone(item.parent_phone)?.hazards += 1;
        self.hazards.0.push(HazardEntry {
            time,
            uid: item.uid,
            phone: item.parent_phone,
            description,
        });
        Ok(())
    }

    fn finish(self, replication: u64) -> Result<SimOutcome> {
        let makespan = self.now();
        if !self.chill_queue.is_empty() || self.upstream != 0 {
            return Err(Error::Logic("line did not drain".into()));
        }
        let phones_in = self.phones.len() as u64;
        let phones_done = self.phones.iter().filter(|p| p.unit.state == PhoneState::Done).count() as u64;
        if phones_done != phones_in {
            return Err(Error::Logic(format!("{} phones unfinished at drain", phones_in - phones_done)));
        }
        let stations: Vec<StationStats> = [&self.cutter, &self.robot, &self.chiller, &self.extractor]
            .iter()
            .map(|r| StationStats {
                name: r.name().to_string(),
                capacity: r.capacity(),
                busy_time_s: r.busy_time(makespan),
                utilization: r.utilization(makespan),
                jobs: r.grants(),
            })
            .collect();
        let mut bottleneck = &stations[0];
        for s in &stations[1..] {
            if s.busy_time_s / s.capacity as f64 > bottleneck.busy_time_s / bottleneck.capacity as f64 {
                bottleneck = s;
            }
        }
        let bottleneck_load = bottleneck.busy_time_s / bottleneck.capacity as f64;
        let per_hour = |span: f64| if span > 0.0 { phones_done as f64 * 3600.0 / span } else { 0.0 };
        let ratio = |a: u64, b: u64| if b > 0 { a as f64 / b as f64 } else { 0.0 };

        let catalog = &self.scn.catalog;
        let mut spans: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let phones: Vec<PhoneLog> = self
            .phones
            .iter()
            .map(|p| {
                let model = catalog.get(p.unit.model);
                spans.entry(model.family.name().to_string()).or_default().push(p.sort_time);
                PhoneLog {
                    uid: p.unit.uid,
                    model: model.id.clone(),
                    family: model.family,
                    cut_done: p.cut_done,
                    sort_start: p.sort_start.unwrap_or(f64::NAN),
                    sort_end: p.sort_end,
                    sort_time: p.sort_time,
                    done_at: p.done_at,
                    all_correct: p.all_correct,
                    hazards: p.hazards,
                }
            })
            .collect();
        let phones_all_correct = phones.iter().filter(|p| p.all_correct).count() as u64;
        let report = SimReport {
            replication,
            seed: self.scn.seed,
            phones_in,
            phones_done,
            items_created: self.items_created,
            makespan_s: makespan,
            throughput_per_hour: per_hour(makespan),
            steady_state_throughput_per_hour: per_hour(bottleneck_load),
            bottleneck: bottleneck.name.clone(),
            input_mass_lb: self.phones.iter().map(|p| p.mass_lb).sum(),
            binned_mass_lb: self.bins.total_mass(),
            stations,
            bins: self.bins,
            hazard_count: self.hazards.len() as u64,
            hazard_rate: ratio(self.hazards.len() as u64, phones_in),
            component_accuracy: ratio(self.items_correct, self.items_created),
            phones_all_correct,
            per_phone_success_rate: ratio(phones_all_correct, phones_in),
            rescans: self.rescans,
            manual_exceptions: self.manual_exceptions,
            extraction_discrepancies: self.discrepancies,
            audit_intercepts: self.intercepts,
            chill_batches: self.batches,
            sort_time_s: spans
                .into_iter()
                .filter_map(|(k, v)| SpanStats::of(&v).map(|s| (k, s)))
                .collect(),
            hazards: self.hazards,
        };
        Ok(SimOutcome {
            report,
            trace: self.trace.unwrap_or_default(),
            phones,
        })
    }
}
