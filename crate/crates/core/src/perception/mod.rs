//! Perception: the stochastic classifier used inside the line model,
//! detection-evaluation metrics, and pick-point geometry.

mod confusion;
mod detection;
mod geometry;
mod mask;
mod metrics;

pub use confusion::{classify_with_threshold, sample_perceived, ConfusionMatrix};
pub use detection::{read_records, BBox, DetectionRecord};
pub use geometry::{base_to_pixel, pixel_to_base, CameraIntrinsics, RigidTransform};
pub use mask::{iou_masks, polygon_area, Polygon};
pub use metrics::{
    average_precision, confusion_from_eval, evaluate, f1, iou_boxes, map_range, match_detections,
    precision_recall, ClassCounts, ClassReport, ConfusionEval, EvalCounts, EvalReport, MapResult,
    Overlap, IOU_LADDER,
};
