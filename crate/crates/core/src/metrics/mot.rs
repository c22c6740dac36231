//! MOT challenge text files: `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxXywh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotRow {
    pub frame: u64,
    /// `-1` for detections.
    pub id: i64,
    pub bbox: BoxXywh,
    pub conf: f64,
}

/// Detections grouped by frame; `frames[k]` holds frame `first_frame + k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MotFrames {
    pub first_frame: u64,
    pub frames: Vec<Vec<MotRow>>,
}

impl MotFrames {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_number(&self, k: usize) -> u64 {
        self.first_frame + k as u64
    }

    pub fn rows(&self) -> impl Iterator<Item = &MotRow> {
        self.frames.iter().flatten()
    }
}

pub fn load_mot_detections(path: impl AsRef<Path>) -> Result<MotFrames> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mot(&text, &path.display().to_string())
}

/// Parses MOT text; `origin` names the source in error messages.
pub fn parse_mot(text: &str, origin: &str) -> Result<MotFrames> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 7 {
            return Err(err(
                line,
                format!("expected at least 7 fields, found {}", record.len()),
            ));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    err(
                        line,
                        format!("field {name} is not a number: `{}`", &record[k]),
                    )
                })
        };
        let frame = num(0, "frame")?;
        if frame < 0.0 || frame.fract() != 0.0 {
            return Err(err(
                line,
                format!("frame must be a nonnegative integer: `{}`", &record[0]),
            ));
        }
        let id = num(1, "id")?;
        if id.fract() != 0.0 {
            return Err(err(
                line,
                format!("id must be an integer: `{}`", &record[1]),
            ));
        }
        let bbox = BoxXywh::new(
            num(2, "bb_left")?,
            num(3, "bb_top")?,
            num(4, "bb_width")?,
            num(5, "bb_height")?,
        );
        rows.push(MotRow {
            frame: frame as u64,
            id: id as i64,
            bbox,
            conf: num(6, "conf")?,
        });
    }
    let Some(first) = rows.iter().map(|r| r.frame).min() else {
        return Ok(MotFrames::default());
    };
    let last = rows.iter().map(|r| r.frame).max().unwrap_or(first);
    let mut frames = vec![Vec::new(); (last - first + 1) as usize];
    for r in rows {
        frames[(r.frame - first) as usize].push(r);
    }
    Ok(MotFrames {
        first_frame: first,
        frames,
    })
}

/// Writes rows as `frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1`.
pub fn write_mot<W: Write>(out: W, rows: &[MotRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for r in rows {
        w.write_record(&[
            r.frame.to_string(),
            r.id.to_string(),
            r.bbox.left.to_string(),
            r.bbox.top.to_string(),
            r.bbox.width.to_string(),
            r.bbox.height.to_string(),
            r.conf.to_string(),
            "-1".into(),
            "-1".into(),
            "-1".into(),
        ])
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let f = parse_mot("1,-1,10,20,30,40,0.9,-1,-1,-1\n", "t").unwrap();
        assert_eq!(f.first_frame, 1);
        assert_eq!(f.frames[0][0].bbox, BoxXywh::new(10.0, 20.0, 30.0, 40.0));
        assert_eq!(f.frames[0][0].conf, 0.9);
        assert_eq!(f.frames[0][0].id, -1);
    }

    #[test]
    fn empty_and_bad() {
        assert!(parse_mot("", "t").unwrap().is_empty());
        let e = parse_mot("1,-1,10,20,30,40,0.9\n2,-1,x,20,30,40,0.9\n", "dets.txt").unwrap_err();
        assert_eq!(
            e.to_string(),
            "dets.txt:2: field bb_left is not a number: `x`"
        );
    }

    #[test]
    fn frames_start_at_minimum() {
        let f = parse_mot("7,-1,0,0,1,1,1\n5,-1,0,0,1,1,1\n", "t").unwrap();
        assert_eq!(f.first_frame, 5);
        assert_eq!(f.len(), 3);
        assert!(f.frames[1].is_empty());
    }
}
