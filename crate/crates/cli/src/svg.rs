//! Minimal native SVG plotting: line/scatter series over numeric axes with
//! ticks, labels and a legend. No external plotting contract; the renderer
//! builds the document deterministically from the data.

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const LEFT: f64 = 70.0;
const RIGHT: f64 = 25.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Line,
    Scatter,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub x: f64,
    pub y: f64,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub annotations: Vec<Annotation>,
    pub width: f64,
    pub height: f64,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            annotations: Vec::new(),
            width: 800.0,
            height: 560.0,
        }
    }

    pub fn line(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Line,
            points,
        });
        self
    }

    pub fn scatter(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Scatter,
            points,
        });
        self
    }

    pub fn annotate(mut self, x: f64, y: f64, text: &str) -> Self {
        self.annotations.push(Annotation {
            x,
            y,
            text: text.to_string(),
        });
        self
    }

    pub fn render(&self) -> String {
        let finite: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(self.annotations.iter().map(|a| (a.x, a.y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (x_range, y_range) = data_ranges(&finite);
        let plot_w = self.width - LEFT - RIGHT;
        let plot_h = self.height - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x_range.0) / (x_range.1 - x_range.0) * plot_w;
        let sy = |y: f64| TOP + plot_h - (y - y_range.0) / (y_range.1 - y_range.0) * plot_h;

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\">\n",
            w = self.width,
            h = self.height
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"16\" \
             text-anchor=\"middle\">{}</text>\n",
            self.width / 2.0,
            escape(&self.title)
        ));

        // Axes and ticks.
        for t in ticks(x_range.0, x_range.1) {
            let x = sx(t);
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
                TOP,
                TOP + plot_h
            ));
            out.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"middle\">{}</text>\n",
                TOP + plot_h + 16.0,
                fmt_tick(t)
            ));
        }
        for t in ticks(y_range.0, y_range.1) {
            let y = sy(t);
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n",
                LEFT,
                LEFT + plot_w
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"end\">{}</text>\n",
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(t)
            ));
        }
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" \
             stroke=\"black\"/>\n",
            LEFT, TOP
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\">{}</text>\n",
            LEFT + plot_w / 2.0,
            self.height - 14.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // Series.
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            match s.kind {
                SeriesKind::Line => {
                    let pts: Vec<String> = s
                        .points
                        .iter()
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    if pts.len() >= 2 {
                        out.push_str(&format!(
                            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" \
                             points=\"{}\"/>\n",
                            pts.join(" ")
                        ));
                    }
                }
                SeriesKind::Scatter => {
                    for &(x, y) in s
                        .points
                        .iter()
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                    {
                        out.push_str(&format!(
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>\n",
                            sx(x),
                            sy(y)
                        ));
                    }
                }
            }
        }

        // Legend.
        let legend_x = LEFT + plot_w - 170.0;
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = TOP + 14.0 + 16.0 * i as f64;
            out.push_str(&format!(
                "<rect x=\"{legend_x}\" y=\"{:.2}\" width=\"12\" height=\"4\" fill=\"{color}\"/>\n",
                y - 4.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                legend_x + 18.0,
                escape(&s.name)
            ));
        }

        // Annotations.
        for a in &self.annotations {
            if a.x.is_finite() && a.y.is_finite() {
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
                     fill=\"#333\">{}</text>\n",
                    sx(a.x) + 5.0,
                    sy(a.y) - 5.0,
                    escape(&a.text)
                ));
            }
        }

        out.push_str("</svg>\n");
        out
    }
}

fn data_ranges(points: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        xr = (xr.0.min(x), xr.1.max(x));
        yr = (yr.0.min(y), yr.1.max(y));
    }
    (pad_range(xr), pad_range(yr))
}

fn pad_range((lo, hi): (f64, f64)) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 2.0 {
        mag
    } else if norm < 4.0 {
        2.0 * mag
    } else if norm < 8.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
