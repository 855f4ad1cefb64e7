//! MOT text format: `frame,id,x,y,w,h,score,-1,-1,-1`, 1-based frames.
//!
//! Coordinates are written with two decimals and scores with four, so a
//! file read back and rewritten is byte-identical.

use crate::bbox::BBox2D;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRow {
    /// 0-based.
    pub frame: u32,
    /// `-1` for detections.
    pub id: i64,
    pub bbox: BBox2D,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct MotParseError {
    pub line: usize,
    pub message: String,
}

pub fn write_mot(rows: &[MotRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let b = &r.bbox;
        writeln!(
            out,
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.4},-1,-1,-1",
            r.frame + 1,
            r.id,
            b.x_min,
            b.y_min,
            b.width(),
            b.height(),
            r.score
        )
        .expect("write to String");
    }
    out
}

/// Parses MOT text. Blank lines and `#` comments are skipped; at least the
/// first six fields must be present and a missing score reads as 1.
pub fn read_mot(text: &str) -> Result<Vec<MotRow>, MotParseError> {
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| MotParseError { line: n + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 6 || fields.len() > 10 {
            return Err(err(format!(
                "expected 6 to 10 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let frame: u32 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame '{}'", fields[0])))?;
        if frame == 0 {
            return Err(err("frames are 1-based".into()));
        }
        let id: i64 = fields[1]
            .parse::<i64>()
            .or_else(|_| integral_float(fields[1]))
            .map_err(|_| err(format!("bad id '{}'", fields[1])))?;
        let num = |i: usize| -> Result<f64, MotParseError> {
            fields[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number '{}' in field {}", fields[i], i + 1)))
        };
        let (x, y, w, h) = (num(2)?, num(3)?, num(4)?, num(5)?);
        if w < 0.0 || h < 0.0 {
            return Err(err("negative box size".into()));
        }
        let score = if fields.len() > 6 { num(6)? } else { 1.0 };
        rows.push(MotRow {
            frame: frame - 1,
            id,
            bbox: BBox2D::from_xywh(x, y, w, h),
            score,
        });
    }
    Ok(rows)
}

/// Some tools write ids as `3.0`.
fn integral_float(s: &str) -> Result<i64, ()> {
    let v: f64 = s.parse().map_err(|_| ())?;
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Ok(v as i64)
    } else {
        Err(())
    }
}
