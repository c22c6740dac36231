//! Planar angular geometry for a point sensor looking at road segments, and
//! axis-aligned image boxes.

/// Closed angular interval `[lo, hi]` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn overlap(&self, other: &Span) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.lo && a <= self.hi
    }
}

/// Bearing of the road point `(x, y)` seen from `sensor`.
pub fn bearing(sensor: (f64, f64), x: f64, y: f64) -> f64 {
    (y - sensor.1).atan2(x - sensor.0)
}

/// Angular span of the segment `[back, front]` on the line at lateral offset `y`.
pub fn segment_span(sensor: (f64, f64), y: f64, back: f64, front: f64) -> Span {
    Span::new(bearing(sensor, back, y), bearing(sensor, front, y))
}

/// Longitudinal position on the line at offset `y` seen at bearing `theta`.
pub fn position_at_bearing(sensor: (f64, f64), y: f64, theta: f64) -> f64 {
    sensor.0 + (y - sensor.1) / theta.tan()
}

/// Sorted, disjoint union of spans.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpanUnion {
    spans: Vec<Span>,
}

impl SpanUnion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn insert(&mut self, s: Span) {
        if s.hi < s.lo {
            return;
        }
        let mut merged = s;
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        for cur in &self.spans {
            if cur.hi < merged.lo || cur.lo > merged.hi {
                out.push(*cur);
            } else {
                merged = Span::new(cur.lo.min(merged.lo), cur.hi.max(merged.hi));
            }
        }
        let pos = out.partition_point(|x| x.lo < merged.lo);
        out.insert(pos, merged);
        self.spans = out;
    }

    /// Total angular width of `s` covered by the union.
    pub fn covered(&self, s: &Span) -> f64 {
        self.spans.iter().map(|u| u.overlap(s)).sum()
    }

    /// True when `s` lies entirely inside a single member span.
    pub fn contains_span(&self, s: &Span) -> bool {
        self.spans.iter().any(|u| u.lo <= s.lo && u.hi >= s.hi)
    }

    pub fn contains(&self, a: f64) -> bool {
        self.spans.iter().any(|u| u.contains(a))
    }

    /// Parts of `s` not covered by the union, in increasing order.
    pub fn uncovered(&self, s: &Span) -> Vec<Span> {
        let mut out = Vec::new();
        let mut start = s.lo;
        for u in &self.spans {
            if u.hi < start || u.lo > s.hi {
                continue;
            }
            if u.lo > start {
                out.push(Span {
                    lo: start,
                    hi: u.lo,
                });
            }
            start = start.max(u.hi);
            if start >= s.hi {
                break;
            }
        }
        if start < s.hi {
            out.push(Span {
                lo: start,
                hi: s.hi,
            });
        }
        out
    }
}

/// Image box with the top-left corner at `(left, top)`; image y grows down.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxXywh {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BoxXywh {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn area(&self) -> f64 {
        self.width.max(0.0) * self.height.max(0.0)
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn intersection(&self, o: &BoxXywh) -> f64 {
        let w = (self.left + self.width).min(o.left + o.width) - self.left.max(o.left);
        let h = self.bottom().min(o.bottom()) - self.top.max(o.top);
        w.max(0.0) * h.max(0.0)
    }

    pub fn iou(&self, o: &BoxXywh) -> f64 {
        let inter = self.intersection(o);
        let union = self.area() + o.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_merges_and_reports_gaps() {
        let mut u = SpanUnion::new();
        u.insert(Span::new(0.0, 1.0));
        u.insert(Span::new(2.0, 3.0));
        u.insert(Span::new(0.5, 1.5));
        assert_eq!(u.spans().len(), 2);
        let gaps = u.uncovered(&Span::new(-1.0, 4.0));
        assert_eq!(
            gaps,
            vec![
                Span::new(-1.0, 0.0),
                Span::new(1.5, 2.0),
                Span::new(3.0, 4.0)
            ]
        );
        assert!((u.covered(&Span::new(1.0, 2.5)) - 1.0).abs() < 1e-15);
        assert!(u.contains_span(&Span::new(0.2, 1.4)));
        assert!(!u.contains_span(&Span::new(1.2, 2.2)));
    }

    #[test]
    fn bearing_inverts() {
        let th = bearing((0.0, 0.0), 12.0, 5.0);
        assert!((position_at_bearing((0.0, 0.0), 5.0, th) - 12.0).abs() < 1e-12);
        let far = segment_span((0.0, 0.0), 10.0, 0.0, 10.0);
        assert!(far.lo < far.hi);
    }

    #[test]
    fn box_overlap() {
        let a = BoxXywh::new(0.0, 0.0, 2.0, 2.0);
        let b = BoxXywh::new(1.0, 0.0, 2.0, 2.0);
        assert_eq!(a.intersection(&b), 2.0);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-15);
    }
}
