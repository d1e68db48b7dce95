//! CSV rendering and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// `%.9g`-style formatting: nine significant digits, trailing zeros dropped,
/// exponent form outside `[1e-5, 1e9)`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Pivots `(series, x, value)` triples into one column per series, keyed
/// by `x` in first-seen order. Missing cells are left empty.
pub fn wide(x_name: &str, triples: &[(String, f64, f64)]) -> Table {
    let mut series: Vec<&str> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for (s, x, _) in triples {
        if !series.contains(&s.as_str()) {
            series.push(s);
        }
        if !xs.iter().any(|v| v.to_bits() == x.to_bits()) {
            xs.push(*x);
        }
    }
    let mut header = vec![x_name];
    header.extend(series.iter().copied());
    let mut t = Table::new(&header);
    for &x in &xs {
        let mut row = vec![fmt_sig(x)];
        for s in &series {
            let cell = triples
                .iter()
                .find(|(n, xv, _)| n == s && xv.to_bits() == x.to_bits())
                .map(|(_, _, v)| fmt_sig(*v))
                .unwrap_or_default();
            row.push(cell);
        }
        t.push(row);
    }
    t
}

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |context: String| move |source| CliError::Io { context, source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Invalid(vec![format!("output path '{}' has no file name", path.display())]))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io(format!("creating {}", tmp.display())))?;
        f.write_all(contents.as_bytes()).map_err(io(format!("writing {}", tmp.display())))?;
        f.sync_all().map_err(io(format!("syncing {}", tmp.display())))?;
        fs::rename(&tmp, path).map_err(io(format!("renaming onto {}", path.display())))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Path of the companion plot-data file: `out.csv` becomes `out.plot.csv`.
pub fn plot_path(out: &Path) -> std::path::PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.plot.csv"))
}
