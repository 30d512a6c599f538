//! Detection evaluation: box/mask overlap, greedy matching, precision,
//! recall, F1, all-points AP and the COCO-style mAP ladder, plus the
//! cross-class confusion matrix.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ComponentClass;

use super::confusion::ConfusionMatrix;
use super::detection::{BBox, DetectionRecord};
use super::mask::iou_masks;

/// IoU thresholds 0.50, 0.55, …, 0.95.
pub const IOU_LADDER: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

pub fn iou_boxes(a: &BBox, b: &BBox) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    Ok(inter / (a.area() + b.area() - inter))
}

/// Which region the overlap is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    Box,
    /// Rasterized masks; falls back to boxes when either record has no mask.
    Mask { grid_px: f64 },
}

impl Overlap {
    fn iou(&self, a: &DetectionRecord, b: &DetectionRecord) -> Result<f64> {
        match (self, &a.mask, &b.mask) {
            (Overlap::Mask { grid_px }, Some(ma), Some(mb)) => iou_masks(ma, mb, *grid_px),
            _ => iou_boxes(&a.bbox, &b.bbox),
        }
    }
}

/// Indices of `preds` ordered by descending confidence, input order on ties.
fn ranked<'a>(preds: impl Iterator<Item = (usize, &'a DetectionRecord)>) -> Vec<usize> {
    let mut v: Vec<(usize, f64)> = preds.map(|(i, p)| (i, p.confidence)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(i, _)| i).collect()
}

/// Greedy assignment: each prediction in `order` takes the still-unmatched
/// eligible truth in its image with the highest IoU ≥ `iou_t`. Returns the
/// matched truth index per position of `order`.
fn greedy(
    preds: &[DetectionRecord],
    order: &[usize],
    truths: &[DetectionRecord],
    iou_t: f64,
    overlap: Overlap,
    same_class: bool,
) -> Result<Vec<Option<usize>>> {
    let mut by_image: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in truths.iter().enumerate() {
        by_image.entry(t.image_id.as_str()).or_default().push(i);
    }
    let mut taken = vec![false; truths.len()];
    let mut out = Vec::with_capacity(order.len());
    for &pi in order {
        let p = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        for &ti in by_image.get(p.image_id.as_str()).map(Vec::as_slice).unwrap_or(&[]) {
            let t = &truths[ti];
            if taken[ti] || (same_class && t.class != p.class) {
                continue;
            }
            let iou = overlap.iou(p, t)?;
            if iou >= iou_t && best.map_or(true, |(_, b)| iou > b) {
                best = Some((ti, iou));
            }
        }
        if let Some((ti, _)) = best {
            taken[ti] = true;
        }
        out.push(best.map(|(ti, _)| ti));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassCounts {
    pub fn truths(&self) -> u64 {
        self.tp + self.fn_
    }
}

/// Per-class TP/FP/FN at one IoU and confidence threshold.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalCounts {
    pub per_class: [ClassCounts; 5],
}

impl EvalCounts {
    pub fn total(&self) -> ClassCounts {
        self.per_class.iter().fold(ClassCounts::default(), |a, c| ClassCounts {
            tp: a.tp + c.tp,
            fp: a.fp + c.fp,
            fn_: a.fn_ + c.fn_,
        })
    }

    pub fn class(&self, c: ComponentClass) -> ClassCounts {
        c.index().map(|i| self.per_class[i]).unwrap_or_default()
    }
}

/// Per-class greedy matching; predictions under `conf_t` are dropped first.
pub fn match_detections(
    preds: &[DetectionRecord],
    truths: &[DetectionRecord],
    iou_t: f64,
    conf_t: f64,
    overlap: Overlap,
) -> Result<EvalCounts> {
    let mut counts = EvalCounts::default();
    for (ci, class) in ComponentClass::DETECTABLE.iter().enumerate() {
        let order = ranked(
            preds
                .iter()
                .enumerate()
                .filter(|(_, p)| p.class == *class && p.confidence >= conf_t),
        );
        let matched = greedy(preds, &order, truths, iou_t, overlap, true)?;
        let tp = matched.iter().filter(|m| m.is_some()).count() as u64;
        let n_truth = truths.iter().filter(|t| t.class == *class).count() as u64;
        counts.per_class[ci] = ClassCounts {
            tp,
            fp: order.len() as u64 - tp,
            fn_: n_truth - tp,
        };
    }
    Ok(counts)
}

/// Precision and recall; an empty denominator yields 1.
pub fn precision_recall(c: &ClassCounts) -> (f64, f64) {
    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    (ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn_))
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r <= 0.0 {
        return 0.0;
    }
    if p == r {
        return p;
    }
    2.0 * p * r / (p + r)
}

/// All-points interpolated AP for one class, or `None` when the class has no
/// ground truth.
pub fn average_precision(
    preds: &[DetectionRecord],
    truths: &[DetectionRecord],
    class: ComponentClass,
    iou_t: f64,
    overlap: Overlap,
) -> Result<Option<f64>> {
    let n_truth = truths.iter().filter(|t| t.class == class).count();
    if n_truth == 0 {
        return Ok(None);
    }
    let order = ranked(preds.iter().enumerate().filter(|(_, p)| p.class == class));
    let matched = greedy(preds, &order, truths, iou_t, overlap, true)?;
    let mut precision = Vec::with_capacity(matched.len());
    let mut recall = Vec::with_capacity(matched.len());
    let mut tp = 0usize;
    for (k, m) in matched.iter().enumerate() {
        if m.is_some() {
            tp += 1;
        }
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(tp as f64 / n_truth as f64);
    }
    // precision envelope: running max from the right
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_r = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        ap += (r - prev_r) * p;
        prev_r = *r;
    }
    Ok(Some(ap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapResult {
    /// AP at IoU 0.50 per class (`None`: no ground truth, skipped).
    pub ap50: [Option<f64>; 5],
    /// AP averaged over the IoU ladder, per class.
    pub ap50_95: [Option<f64>; 5],
    pub map50: f64,
    pub map50_95: f64,
    pub skipped: Vec<ComponentClass>,
}

/// mAP over the 0.50:0.05:0.95 ladder, averaged over classes with ground truth.
pub fn map_range(
    preds: &[DetectionRecord],
    truths: &[DetectionRecord],
    overlap: Overlap,
) -> Result<MapResult> {
    let mut ap50 = [None; 5];
    let mut ap50_95 = [None; 5];
    let mut skipped = Vec::new();
    for (ci, &class) in ComponentClass::DETECTABLE.iter().enumerate() {
        let mut aps = Vec::with_capacity(IOU_LADDER.len());
        for &t in &IOU_LADDER {
            match average_precision(preds, truths, class, t, overlap)? {
                Some(ap) => aps.push(ap),
                None => break,
            }
        }
        if aps.is_empty() {
            skipped.push(class);
            continue;
        }
        ap50[ci] = Some(aps[0]);
        ap50_95[ci] = Some(aps.iter().sum::<f64>() / aps.len() as f64);
    }
    let mean = |v: &[Option<f64>; 5]| {
        let xs: Vec<f64> = v.iter().flatten().copied().collect();
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    Ok(MapResult {
        map50: mean(&ap50),
        map50_95: mean(&ap50_95),
        ap50,
        ap50_95,
        skipped,
    })
}

/// Cross-class confusion built from IoU-only matching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionEval {
    /// counts[true][predicted] over matched pairs.
    pub counts: [[u64; 5]; 5],
    /// Ground truths with no prediction at the IoU threshold, per class.
    pub missed: [u64; 5],
    /// Predictions that matched no ground truth.
    pub spurious: u64,
    /// Row-normalized counts; `None` for a class without matched truths.
    pub rows: [Option<[f64; 5]>; 5],
    pub undefined_rows: Vec<ComponentClass>,
    /// Correct matches over all ground truths (micro average; misses count as errors).
    pub accuracy: f64,
}

impl ConfusionEval {
    /// The normalized matrix, provided every row is defined.
    pub fn matrix(&self) -> Result<ConfusionMatrix> {
        ConfusionMatrix::from_counts(&self.counts)
    }
}

pub fn confusion_from_eval(
    preds: &[DetectionRecord],
    truths: &[DetectionRecord],
    iou_t: f64,
    conf_t: f64,
    overlap: Overlap,
) -> Result<ConfusionEval> {
    let order = ranked(preds.iter().enumerate().filter(|(_, p)| p.confidence >= conf_t));
    let matched = greedy(preds, &order, truths, iou_t, overlap, false)?;
    let mut counts = [[0u64; 5]; 5];
    let mut hit = vec![false; truths.len()];
    let mut spurious = 0;
    for (&pi, m) in order.iter().zip(&matched) {
        match m {
            Some(ti) => {
                hit[*ti] = true;
                let i = truths[*ti].class.index().ok_or(Error::NotDetectable(truths[*ti].class))?;
                let j = preds[pi].class.index().ok_or(Error::NotDetectable(preds[pi].class))?;
                counts[i][j] += 1;
            }
            None => spurious += 1,
        }
    }
    let mut missed = [0u64; 5];
    for (t, h) in truths.iter().zip(&hit) {
        if !h {
            missed[t.class.index().ok_or(Error::NotDetectable(t.class))?] += 1;
        }
    }
    let mut rows = [None; 5];
    let mut undefined_rows = Vec::new();
    for i in 0..5 {
        let total: u64 = counts[i].iter().sum();
        if total == 0 {
            undefined_rows.push(ComponentClass::DETECTABLE[i]);
            continue;
        }
        let mut r = [0.0; 5];
        for j in 0..5 {
            r[j] = counts[i][j] as f64 / total as f64;
        }
        rows[i] = Some(r);
    }
    let correct: u64 = (0..5).map(|i| counts[i][i]).sum();
    let accuracy = if truths.is_empty() {
        0.0
    } else {
        correct as f64 / truths.len() as f64
    };
    Ok(ConfusionEval {
        counts,
        missed,
        spurious,
        rows,
        undefined_rows,
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: ComponentClass,
    pub truths: u64,
    #[serde(flatten)]
    pub counts: ClassCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ap50: Option<f64>,
    pub ap50_95: Option<f64>,
}

/// Full evaluation report as emitted by the `metrics` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub confidence_threshold: f64,
    pub overlap: Overlap,
    pub per_class: Vec<ClassReport>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
    pub map50_95: f64,
    pub skipped_classes: Vec<ComponentClass>,
    pub confusion: ConfusionEval,
}

/// Counts and the confusion matrix use `iou_t`/`conf_t`; AP is ranking-based
/// and uses every prediction.
pub fn evaluate(
    preds: &[DetectionRecord],
    truths: &[DetectionRecord],
    iou_t: f64,
    conf_t: f64,
    overlap: Overlap,
) -> Result<EvalReport> {
    let counts = match_detections(preds, truths, iou_t, conf_t, overlap)?;
    let maps = map_range(preds, truths, overlap)?;
    let per_class = ComponentClass::DETECTABLE
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let c = counts.per_class[i];
            let (p, r) = precision_recall(&c);
            ClassReport {
                class,
                truths: c.truths(),
                counts: c,
                precision: p,
                recall: r,
                f1: f1(p, r),
                ap50: maps.ap50[i],
                ap50_95: maps.ap50_95[i],
            }
        })
        .collect();
    let (p, r) = precision_recall(&counts.total());
    Ok(EvalReport {
        iou_threshold: iou_t,
        confidence_threshold: conf_t,
        overlap,
        per_class,
        precision: p,
        recall: r,
        f1: f1(p, r),
        map50: maps.map50,
        map50_95: maps.map50_95,
        skipped_classes: maps.skipped,
        confusion: confusion_from_eval(preds, truths, iou_t, conf_t, overlap)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComponentClass::*;
    use proptest::prelude::*;

    fn rec(img: &str, class: ComponentClass, conf: f64, b: [f64; 4]) -> DetectionRecord {
        DetectionRecord::new(img, class, conf, b.into())
    }

    /// Counts covered pixels of the unit grid; boxes must have integer corners.
    fn pixel_iou(a: [i64; 4], b: [i64; 4]) -> f64 {
        let inside = |r: [i64; 4], x: i64, y: i64| x >= r[0] && x < r[0] + r[2] && y >= r[1] && y < r[1] + r[3];
        let (mut i, mut u) = (0, 0);
        for x in -20..40 {
            for y in -20..40 {
                let (pa, pb) = (inside(a, x, y), inside(b, x, y));
                i += (pa && pb) as i64;
                u += (pa || pb) as i64;
            }
        }
        i as f64 / u as f64
    }

    #[test]
    fn box_iou_cases() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou_boxes(&a, &a).unwrap(), 1.0);
        let b = BBox::new(1.0, 1.0, 2.0, 2.0);
        assert!((iou_boxes(&a, &b).unwrap() - pixel_iou([0, 0, 2, 2], [1, 1, 2, 2])).abs() < 1e-12);
        assert!((iou_boxes(&a, &b).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(iou_boxes(&a, &BBox::new(5.0, 5.0, 1.0, 1.0)).unwrap(), 0.0);
        assert!(iou_boxes(&a, &BBox::new(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn box_iou_matches_pixel_count(a in prop::array::uniform4(0i64..10), b in prop::array::uniform4(0i64..10)) {
            let a = [a[0], a[1], a[2] + 1, a[3] + 1];
            let b = [b[0], b[1], b[2] + 1, b[3] + 1];
            let f = |r: [i64; 4]| BBox::new(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64);
            let got = iou_boxes(&f(a), &f(b)).unwrap();
            prop_assert!((got - pixel_iou(a, b)).abs() < 1e-12);
            prop_assert!((got - iou_boxes(&f(b), &f(a)).unwrap()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&got));
            prop_assert_eq!(got == 1.0, a == b);
        }

        #[test]
        fn f1_bounded_by_arithmetic_mean(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50) {
            let (p, r) = precision_recall(&ClassCounts { tp, fp, fn_ });
            let f = f1(p, r);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f <= (p + r) / 2.0 + 1e-12);
        }
    }

    #[test]
    fn single_exact_match() {
        let t = vec![rec("i", Screen, 1.0, [0.0, 0.0, 10.0, 10.0])];
        let p = vec![rec("i", Screen, 0.9, [0.0, 0.0, 10.0, 10.0])];
        let c = match_detections(&p, &t, 0.5, 0.8, Overlap::Box).unwrap();
        assert_eq!(c.class(Screen), ClassCounts { tp: 1, fp: 0, fn_: 0 });
    }

    /// Best total TP over every injective assignment of predictions to truths.
    fn exhaustive_tp(ious: &[Vec<f64>], iou_t: f64) -> usize {
        fn go(k: usize, ious: &[Vec<f64>], used: &mut Vec<bool>, t: f64) -> usize {
            if k == ious.len() {
                return 0;
            }
            let mut best = go(k + 1, ious, used, t);
            for j in 0..used.len() {
                if !used[j] && ious[k][j] >= t {
                    used[j] = true;
                    best = best.max(1 + go(k + 1, ious, used, t));
                    used[j] = false;
                }
            }
            best
        }
        let n = ious.first().map_or(0, |r| r.len());
        go(0, ious, &mut vec![false; n], iou_t)
    }

    #[test]
    fn two_predictions_one_truth() {
        let t = vec![rec("i", Film, 1.0, [0.0, 0.0, 10.0, 10.0])];
        let p = vec![
            rec("i", Film, 0.85, [1.0, 0.0, 10.0, 10.0]),
            rec("i", Film, 0.95, [0.0, 1.0, 10.0, 10.0]),
        ];
        let ious: Vec<Vec<f64>> = p
            .iter()
            .map(|q| t.iter().map(|g| iou_boxes(&q.bbox, &g.bbox).unwrap()).collect())
            .collect();
        assert_eq!(exhaustive_tp(&ious, 0.5), 1);
        let c = match_detections(&p, &t, 0.5, 0.8, Overlap::Box).unwrap();
        assert_eq!(c.class(Film), ClassCounts { tp: 1, fp: 1, fn_: 0 });
    }

    proptest! {
        // on tiny instances greedy never beats the optimum and is never empty
        // when the optimum is not
        #[test]
        fn greedy_vs_exhaustive(
            boxes in prop::collection::vec((0u8..6, 0u8..6, 2u8..5, 2u8..5, 0.0f64..1.0), 1..4),
            truth_boxes in prop::collection::vec((0u8..6, 0u8..6, 2u8..5, 2u8..5), 1..4),
        ) {
            let p: Vec<_> = boxes.iter().map(|&(x, y, w, h, c)| rec("i", Screen, c, [x as f64, y as f64, w as f64, h as f64])).collect();
            let t: Vec<_> = truth_boxes.iter().map(|&(x, y, w, h)| rec("i", Screen, 1.0, [x as f64, y as f64, w as f64, h as f64])).collect();
            let ious: Vec<Vec<f64>> = p.iter().map(|q| t.iter().map(|g| iou_boxes(&q.bbox, &g.bbox).unwrap()).collect()).collect();
            let best = exhaustive_tp(&ious, 0.5);
            let got = match_detections(&p, &t, 0.5, 0.0, Overlap::Box).unwrap().class(Screen).tp as usize;
            prop_assert!(got <= best);
            prop_assert_eq!(got == 0, best == 0);
            // greedy is a maximal matching, so it reaches at least half the optimum
            prop_assert!(2 * got >= best);
        }
    }

    #[test]
    fn low_confidence_is_discarded() {
        let t = vec![rec("i", Screen, 1.0, [0.0, 0.0, 10.0, 10.0])];
        let p = vec![rec("i", Screen, 0.79, [0.0, 0.0, 10.0, 10.0])];
        let c = match_detections(&p, &t, 0.5, 0.8, Overlap::Box).unwrap();
        assert_eq!(c.class(Screen), ClassCounts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn different_images_never_match() {
        let t = vec![rec("a", Screen, 1.0, [0.0, 0.0, 10.0, 10.0])];
        let p = vec![rec("b", Screen, 0.9, [0.0, 0.0, 10.0, 10.0])];
        let c = match_detections(&p, &t, 0.5, 0.0, Overlap::Box).unwrap();
        assert_eq!(c.class(Screen), ClassCounts { tp: 0, fp: 1, fn_: 1 });
    }

    #[test]
    fn pr_f1_conventions() {
        let (p, r) = precision_recall(&ClassCounts { tp: 99, fp: 1, fn_: 1 });
        assert!((p - 0.99).abs() < 1e-15 && (r - 0.99).abs() < 1e-15);
        assert!((f1(p, r) - 0.99).abs() < 1e-15);
        assert_eq!(f1(0.988, 0.988), 0.988);
        let (p, r) = precision_recall(&ClassCounts { tp: 0, fp: 0, fn_: 5 });
        assert_eq!((p, r, f1(p, r)), (1.0, 0.0, 0.0));
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    /// The staircase fixture: two truths, predictions at .9 (hit), .8 (miss), .7 (hit).
    pub(crate) fn staircase() -> (Vec<DetectionRecord>, Vec<DetectionRecord>) {
        let t = vec![
            rec("s", MiddleLayer, 1.0, [0.0, 0.0, 10.0, 10.0]),
            rec("s", MiddleLayer, 1.0, [50.0, 50.0, 10.0, 10.0]),
        ];
        let p = vec![
            rec("s", MiddleLayer, 0.9, [0.0, 0.0, 10.0, 10.0]),
            rec("s", MiddleLayer, 0.8, [100.0, 100.0, 10.0, 10.0]),
            rec("s", MiddleLayer, 0.7, [50.0, 50.0, 10.0, 10.0]),
        ];
        (p, t)
    }

    #[test]
    fn ap_staircase() {
        let (p, t) = staircase();
        // hand-computed: recall 0.5 at precision 1, recall 1.0 at precision 2/3
        let expected = 0.5 * 1.0 + 0.5 * (2.0 / 3.0);
        let ap = average_precision(&p, &t, MiddleLayer, 0.5, Overlap::Box).unwrap().unwrap();
        assert!((ap - expected).abs() < 1e-12);
        assert!((ap - 0.8333).abs() < 1e-4);
    }

    #[test]
    fn ap_ranking_invariance() {
        let (mut p, t) = staircase();
        for r in &mut p {
            r.confidence *= 0.5;
        }
        let ap = average_precision(&p, &t, MiddleLayer, 0.5, Overlap::Box).unwrap().unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_empty_detectors() {
        let (_, t) = staircase();
        let m = map_range(&t, &t, Overlap::Box).unwrap();
        assert_eq!(m.map50_95, 1.0);
        assert_eq!(m.skipped.len(), 4);
        let m = map_range(&[], &t, Overlap::Box).unwrap();
        assert_eq!(m.map50_95, 0.0);
        assert_eq!(average_precision(&[], &t, Screen, 0.5, Overlap::Box).unwrap(), None);
    }

    #[test]
    fn confusion_from_matches() {
        let mut truths = Vec::new();
        let mut preds = Vec::new();
        for i in 0..1000 {
            let class = ComponentClass::DETECTABLE[i % 5];
            let img = format!("img{i}");
            truths.push(rec(&img, class, 1.0, [0.0, 0.0, 10.0, 10.0]));
            // ten errors spread over the classes
            let predicted = if i % 91 == 0 && i > 0 {
                ComponentClass::DETECTABLE[(i + 1) % 5]
            } else {
                class
            };
            preds.push(rec(&img, predicted, 0.9, [0.0, 0.0, 10.0, 10.0]));
        }
        let e = confusion_from_eval(&preds, &truths, 0.7, 0.8, Overlap::Box).unwrap();
        assert_eq!((0..5).map(|i| 200 - e.counts[i][i]).sum::<u64>(), 10);
        let identity = confusion_from_eval(&truths, &truths, 0.7, 0.8, Overlap::Box).unwrap();
        assert_eq!(identity.accuracy, 1.0);
        assert_eq!(identity.matrix().unwrap(), ConfusionMatrix::identity());
        for row in e.rows.iter().flatten() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn confusion_accuracy_989() {
        let mut truths = Vec::new();
        let mut preds = Vec::new();
        for i in 0..1000 {
            let class = ComponentClass::DETECTABLE[i % 5];
            let img = format!("img{i}");
            truths.push(rec(&img, class, 1.0, [0.0, 0.0, 10.0, 10.0]));
            let predicted = if i < 11 { ComponentClass::DETECTABLE[(i + 1) % 5] } else { class };
            preds.push(rec(&img, predicted, 0.95, [0.0, 0.0, 10.0, 10.0]));
        }
        let e = confusion_from_eval(&preds, &truths, 0.7, 0.8, Overlap::Box).unwrap();
        assert!((e.accuracy - 0.989).abs() < 1e-12);
    }

    #[test]
    fn confusion_missed_and_undefined_rows() {
        let truths = vec![
            rec("a", Screen, 1.0, [0.0, 0.0, 10.0, 10.0]),
            rec("a", Film, 1.0, [30.0, 30.0, 10.0, 10.0]),
        ];
        let preds = vec![rec("a", Screen, 0.9, [0.0, 0.0, 10.0, 10.0])];
        let e = confusion_from_eval(&preds, &truths, 0.7, 0.8, Overlap::Box).unwrap();
        assert_eq!(e.missed[Film.index().unwrap()], 1);
        assert!(e.undefined_rows.contains(&Film));
        assert!(e.matrix().is_err());
        assert_eq!(e.accuracy, 0.5);
    }
}
