//! SVG pictures of plane tropical curves over the fan of the surface.

use std::fmt::Write;

use num_traits::Zero;
use thiserror::Error;

use crate::curves::CurveRecord;
use crate::exactmath::{rat, to_decimal, BigRat, Vec2Q, Vec2Z};
use crate::model::{FanSpec, Ray};

/// Side of the square drawing area of one panel, in SVG user units.
pub const CANVAS: i64 = 600;
const PLACES: u32 = 6;
const SHEET_COLUMNS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("nothing to draw")]
    EmptyScene,
    #[error("curves come from different data (a = {0} vs {1}, or different n)")]
    MixedData(i64, i64),
    #[error("curve {curve}: {what}")]
    Malformed { curve: usize, what: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Draw the rays of the fan from the origin.
    pub fan: bool,
    /// Label every end with its weight, not only weights above 1.
    pub label_all: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { fan: true, label_all: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Viewport {
    pub min: Vec2Q,
    pub max: Vec2Q,
}

/// Everything needed to draw: exact geometry and where labels go.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub viewport: Viewport,
    pub fan: Option<FanSpec>,
    /// Length of drawn ends and fan rays, in the sup norm.
    pub ray_length: BigRat,
    pub curves: Vec<SceneCurve>,
    pub label_all: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneCurve {
    pub title: String,
    pub segments: Vec<(Vec2Q, Vec2Q)>,
    /// End segments with the weight to print.
    pub ends: Vec<(Vec2Q, Vec2Q, u32)>,
    pub markings: Vec<(usize, Vec2Q)>,
}

fn sup_norm_step(v: Vec2Z, length: &BigRat) -> Vec2Q {
    let m = v.x.abs().max(v.y.abs());
    Vec2Q::new(rat(v.x) * length / rat(m), rat(v.y) * length / rat(m))
}

fn scene_curve(idx: usize, c: &CurveRecord, ray_length: &BigRat) -> Result<SceneCurve, RenderError> {
    let bad = |what: &str| RenderError::Malformed { curve: idx, what: what.to_string() };
    let pos = |v: usize| -> Result<Vec2Q, RenderError> {
        c.vertices.iter().find(|r| r.id == v).and_then(|r| r.position()).ok_or_else(|| bad("unknown or malformed vertex"))
    };
    let segments = c.edges.iter().map(|e| Ok((pos(e.from)?, pos(e.to)?))).collect::<Result<_, RenderError>>()?;
    let ends = c
        .ends
        .iter()
        .map(|e| {
            let p = pos(e.vertex)?;
            let tip = &p + &sup_norm_step(e.vector, ray_length);
            Ok((p, tip, e.weight))
        })
        .collect::<Result<_, RenderError>>()?;
    let markings = c.markings.iter().map(|m| Ok((m.index, pos(m.vertex)?))).collect::<Result<_, RenderError>>()?;
    let title = format!("curve {} type {} multiplicity {}", idx + 1, c.curve_type, c.multiplicity);
    Ok(SceneCurve { title, segments, ends, markings })
}

/// Exact scene for `curves`, which must share one set of discrete data.
pub fn scene(curves: &[CurveRecord], opts: RenderOptions) -> Result<SceneSpec, RenderError> {
    let first = curves.first().ok_or(RenderError::EmptyScene)?;
    if let Some(c) = curves.iter().find(|c| c.a != first.a || c.n != first.n) {
        return Err(RenderError::MixedData(first.a, c.a));
    }
    // size the ends from the spread of the vertices and the origin
    let mut pts = vec![Vec2Q::zero()];
    for (i, c) in curves.iter().enumerate() {
        for v in &c.vertices {
            pts.push(v.position().ok_or_else(|| RenderError::Malformed { curve: i, what: "malformed vertex".into() })?);
        }
    }
    let spread = bounds(&pts);
    let span = (&spread.max.x - &spread.min.x).max(&spread.max.y - &spread.min.y);
    let span = if span.is_zero() { rat(1) } else { span };
    let ray_length = &span / rat(3);
    let curves: Vec<SceneCurve> = curves.iter().enumerate().map(|(i, c)| scene_curve(i, c, &ray_length)).collect::<Result<_, _>>()?;

    for c in &curves {
        pts.extend(c.ends.iter().map(|e| e.1.clone()));
    }
    let fan = opts.fan.then(|| FanSpec::hirzebruch(first.a as u32));
    if let Some(f) = fan {
        pts.extend(Ray::ALL.iter().map(|&r| sup_norm_step(f.ray(r), &span)));
    }
    let b = bounds(&pts);
    let margin = (&b.max.x - &b.min.x).max(&b.max.y - &b.min.y) / rat(10);
    let margin = if margin.is_zero() { rat(1) } else { margin };
    let viewport = Viewport {
        min: Vec2Q::new(&b.min.x - &margin, &b.min.y - &margin),
        max: Vec2Q::new(&b.max.x + &margin, &b.max.y + &margin),
    };
    Ok(SceneSpec { viewport, fan, ray_length: span, curves, label_all: opts.label_all })
}

fn bounds(pts: &[Vec2Q]) -> Viewport {
    let mut min = pts[0].clone();
    let mut max = pts[0].clone();
    for p in &pts[1..] {
        min.x = min.x.clone().min(p.x.clone());
        min.y = min.y.clone().min(p.y.clone());
        max.x = max.x.clone().max(p.x.clone());
        max.y = max.y.clone().max(p.y.clone());
    }
    Viewport { min, max }
}

/// Maps exact plane coordinates into one panel, with y pointing up.
struct Panel<'a> {
    view: &'a Viewport,
    scale: BigRat,
    offset: (i64, i64),
}

impl<'a> Panel<'a> {
    fn new(view: &'a Viewport, offset: (i64, i64)) -> Self {
        let w = &view.max.x - &view.min.x;
        let h = &view.max.y - &view.min.y;
        Panel { view, scale: rat(CANVAS) / w.max(h), offset }
    }

    fn xy(&self, p: &Vec2Q) -> (String, String) {
        let x = (&p.x - &self.view.min.x) * &self.scale + rat(self.offset.0);
        let y = (&self.view.max.y - &p.y) * &self.scale + rat(self.offset.1);
        (to_decimal(&x, PLACES), to_decimal(&y, PLACES))
    }

    fn mid(&self, p: &Vec2Q, q: &Vec2Q) -> (String, String) {
        self.xy(&Vec2Q::new((&p.x + &q.x) / rat(2), (&p.y + &q.y) / rat(2)))
    }
}

fn draw_panel(out: &mut String, s: &SceneSpec, c: Option<&SceneCurve>, curves: &[SceneCurve], offset: (i64, i64), label_all: bool) {
    let panel = Panel::new(&s.viewport, offset);
    if let Some(f) = s.fan {
        let o = panel.xy(&Vec2Q::zero());
        for r in Ray::ALL {
            let t = panel.xy(&sup_norm_step(f.ray(r), &s.ray_length));
            let _ = writeln!(out, r##"  <line class="fan" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888888" stroke-width="1" stroke-dasharray="6 4"/>"##, o.0, o.1, t.0, t.1);
            let _ = writeln!(out, r##"  <text class="fan-label" x="{}" y="{}" font-size="12" fill="#888888">{r}</text>"##, t.0, t.1);
        }
    }
    let drawn: Vec<&SceneCurve> = match c {
        Some(c) => vec![c],
        None => curves.iter().collect(),
    };
    for c in &drawn {
        for (p, q) in &c.segments {
            let (a, b) = (panel.xy(p), panel.xy(q));
            let _ = writeln!(out, r##"  <line class="edge" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000" stroke-width="2"/>"##, a.0, a.1, b.0, b.1);
        }
        for (p, q, w) in &c.ends {
            let (a, b) = (panel.xy(p), panel.xy(q));
            let _ = writeln!(out, r##"  <line class="end" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000" stroke-width="2"/>"##, a.0, a.1, b.0, b.1);
            if *w > 1 || label_all {
                let m = panel.mid(p, q);
                let _ = writeln!(out, r##"  <text class="weight" x="{}" y="{}" font-size="14" fill="#000000">{w}</text>"##, m.0, m.1);
            }
        }
        for (i, p) in &c.markings {
            let a = panel.xy(p);
            let _ = writeln!(out, r##"  <circle class="marking" cx="{}" cy="{}" r="4" fill="#d62728"/>"##, a.0, a.1);
            let _ = writeln!(out, r##"  <text class="marking-label" x="{}" y="{}" font-size="13" fill="#d62728" dx="6" dy="-6">x{i}</text>"##, a.0, a.1);
        }
    }
}

fn document(width: i64, height: i64, body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n  <rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n{body}</svg>\n"
    )
}

/// One SVG document with every curve drawn over the fan.
pub fn render_svg(curves: &[CurveRecord], opts: RenderOptions) -> Result<String, RenderError> {
    let s = scene(curves, opts)?;
    let mut body = String::new();
    draw_panel(&mut body, &s, None, &s.curves, (0, 0), s.label_all);
    Ok(document(CANVAS, CANVAS, &body))
}

/// One file per curve, named `curve_<index>_<type>.svg`, plus a contact
/// sheet `contact_sheet.svg` with every curve in its own panel. All panels
/// share one viewport.
pub fn render_files(curves: &[CurveRecord], opts: RenderOptions) -> Result<Vec<(String, String)>, RenderError> {
    let s = scene(curves, opts)?;
    let mut files = Vec::new();
    for (i, (c, rec)) in s.curves.iter().zip(curves).enumerate() {
        let mut body = String::new();
        let _ = writeln!(body, "  <title>{}</title>", c.title);
        draw_panel(&mut body, &s, Some(c), &s.curves, (0, 0), s.label_all);
        files.push((format!("curve_{}_{}.svg", i + 1, rec.curve_type), document(CANVAS, CANVAS, &body)));
    }
    let cols = SHEET_COLUMNS.min(s.curves.len());
    let rows = s.curves.len().div_ceil(cols);
    let cell = CANVAS + 40;
    let mut body = String::new();
    for (i, c) in s.curves.iter().enumerate() {
        let (cx, cy) = ((i % cols) as i64 * cell, (i / cols) as i64 * cell);
        let _ = writeln!(body, "  <text class=\"title\" x=\"{}\" y=\"{}\" font-size=\"16\">{}</text>", cx + 10, cy + 24, c.title);
        draw_panel(&mut body, &s, Some(c), &s.curves, (cx, cy + 40), s.label_all);
    }
    files.push(("contact_sheet.svg".to_string(), document(cols as i64 * cell, rows as i64 * cell, &body)));
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_instance;
    use crate::model::ContactData;

    fn curves() -> Vec<CurveRecord> {
        let g = ContactData::hirzebruch(1, 4, [&[1, 1, 1], &[1], &[3], &[4]]).unwrap();
        enumerate_instance(&g, 0).unwrap().curves
    }

    #[test]
    fn empty_scene_is_an_error() {
        assert_eq!(render_svg(&[], RenderOptions::default()), Err(RenderError::EmptyScene));
    }

    #[test]
    fn output_is_deterministic_with_fixed_precision() {
        let c = curves();
        let a = render_files(&c, RenderOptions::default()).unwrap();
        let b = render_files(&c, RenderOptions::default()).unwrap();
        assert_eq!(a, b);
        let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(names.len(), c.len() + 1);
        assert!(names.contains(&"contact_sheet.svg"));
        let svg = &a[0].1;
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(">x1</text>"));
        // the weight-3 and weight-4 ends are labelled, weight-1 ends are not
        assert!(svg.contains(">4</text>"));
        assert!(!svg.contains(">1</text>"));
        let coord = svg.split("x1=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(coord.split('.').nth(1).unwrap().len(), 6);
    }

    #[test]
    fn label_all_adds_unit_weights() {
        let c = curves();
        let plain = render_svg(&c[..1], RenderOptions::default()).unwrap();
        let all = render_svg(&c[..1], RenderOptions { label_all: true, ..Default::default() }).unwrap();
        assert!(all.matches("class=\"weight\"").count() > plain.matches("class=\"weight\"").count());
    }
}
