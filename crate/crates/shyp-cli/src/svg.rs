use std::fmt::Write;

const SIZE: f64 = 480.0;
const CENTER: f64 = SIZE / 2.0;

pub enum Layer {
    /// Dots on the circle of the given radius.
    Points { angles: Vec<f64>, radius: f64, color: &'static str },
    /// `(start, len)` arcs drawn at the given radius.
    Arcs { arcs: Vec<(f64, f64)>, radius: f64, color: &'static str },
}

fn xy(t: f64, r: f64) -> (f64, f64) {
    (CENTER + r * t.cos(), CENTER - r * t.sin())
}

fn arc_path(start: f64, len: f64, r: f64) -> String {
    let len = len.clamp(0.0, std::f64::consts::TAU - 1e-6);
    let (x0, y0) = xy(start, r);
    let (x1, y1) = xy(start + len, r);
    let large = i32::from(len > std::f64::consts::PI);
    format!("M{x0:.3},{y0:.3} A{r:.3},{r:.3} 0 {large} 0 {x1:.3},{y1:.3}")
}

pub fn circle_plot(title: &str, layers: &[Layer]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<title>{title}</title>"#);
    let _ = writeln!(s, r##"<circle cx="{CENTER}" cy="{CENTER}" r="150" fill="none" stroke="#bbb"/>"##);
    for layer in layers {
        match layer {
            Layer::Points { angles, radius, color } => {
                for t in angles {
                    let (x, y) = xy(*t, *radius);
                    let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.5" fill="{color}"/>"#);
                }
            }
            Layer::Arcs { arcs, radius, color } => {
                for (start, len) in arcs {
                    let d = arc_path(*start, *len, *radius);
                    let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="3" opacity="0.6"/>"#);
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
