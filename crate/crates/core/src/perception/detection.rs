use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ComponentClass;

use super::mask::Polygon;

/// Axis-aligned box in pixels: top-left corner plus width and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox { x, y, w, h }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.h > 0.0) {
            return Err(Error::Geometry(format!("degenerate box {}x{}", self.w, self.h)));
        }
        if ![self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) {
            return Err(Error::Geometry("non-finite box".into()));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

fn full_confidence() -> f64 {
    1.0
}

/// One detection or ground-truth instance, one per JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class: ComponentClass,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Polygon>,
}

impl DetectionRecord {
    pub fn new(image_id: impl Into<String>, class: ComponentClass, confidence: f64, bbox: BBox) -> Self {
        DetectionRecord {
            image_id: image_id.into(),
            class,
            confidence,
            bbox,
            mask: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.class.is_detectable() {
            return Err(Error::NotDetectable(self.class));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Geometry(format!("confidence {} outside [0,1]", self.confidence)));
        }
        self.bbox.validate()?;
        if let Some(m) = &self.mask {
            m.validate()?;
        }
        Ok(())
    }
}

/// Reads line-delimited records. Blank lines are skipped; errors carry the
/// 1-based line number.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: String| Error::config(format!("line {}", i + 1), e);
        let rec: DetectionRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        rec.validate().map_err(|e| at(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jsonl_with_line_numbers() {
        let text = r#"{"image_id":"a","class":"screen","confidence":0.9,"bbox":[0,0,10,10]}

{"image_id":"a","class":"film","bbox":[1,1,2,2],"mask":[[1,1],[3,1],[3,3],[1,3]]}
"#;
        let recs = read_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].confidence, 1.0);
        assert_eq!(recs[1].mask.as_ref().unwrap().vertices().len(), 4);

        let bad = "{\"image_id\":\"a\",\"class\":\"screen\",\"bbox\":[0,0,1,1]}\n{\"image_id\":\"a\",\"class\":\"battery\",\"bbox\":[0,0,1,1]}\n";
        let err = read_records(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let degenerate = "{\"image_id\":\"a\",\"class\":\"screen\",\"bbox\":[0,0,0,1]}";
        assert!(read_records(degenerate.as_bytes()).is_err());
    }
}
