use std::path::Path;

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    // rounding can carry into the next decade, so take the exponent after rounding
    let sci = format!("{v:.11e}");
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{e}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A companion script for a CSV written with `--out`.
pub struct Gnuplot {
    xlabel: String,
    ylabel: String,
    log: bool,
    series: Vec<(usize, String)>,
}

impl Gnuplot {
    pub fn loglog(x: &str, y: &str, series: &[(usize, &str)]) -> Self {
        Self::new(x, y, true, series)
    }

    pub fn linear(x: &str, y: &str, series: &[(usize, &str)]) -> Self {
        Self::new(x, y, false, series)
    }

    fn new(x: &str, y: &str, log: bool, series: &[(usize, &str)]) -> Self {
        Self {
            xlabel: x.into(),
            ylabel: y.into(),
            log,
            series: series.iter().map(|&(c, t)| (c, t.to_string())).collect(),
        }
    }

    pub fn script(&self, csv: &Path) -> String {
        let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key autotitle columnhead\n");
        if self.log {
            s.push_str("set logscale xy\n");
        }
        s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", self.xlabel, self.ylabel));
        let plots: Vec<String> = self
            .series
            .iter()
            .map(|(col, title)| format!("'{name}' using 1:{col} with linespoints title '{title}'"))
            .collect();
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        s
    }
}
