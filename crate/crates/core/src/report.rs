//! CSV output with a fixed number formatting.

use std::io::Write;

/// Formats a real with 12 significant digits, dropping trailing zeros.
///
/// Magnitudes in `[1e-4, 1e15)` are written positionally, others in
/// exponent form; the output parses back to the rounded value.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if rounded == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// A header plus string rows, written as comma-separated UTF-8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_real(0.348988015047), "0.348988015047");
        assert_eq!(fmt_real(0.34898801504712345), "0.348988015047");
        assert_eq!(fmt_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_real(2.0), "2");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-1.5e-7), "-1.5e-7");
        assert_eq!(fmt_real(4.3e-8 + 1e-30), "4.3e-8");
        assert_eq!(fmt_real(f64::INFINITY), "inf");
        assert_eq!(fmt_real(123456789012345.0), "123456789012000");
    }

    #[test]
    fn roundtrip_within_precision() {
        for x in [1e-12, 1.234_567_890_123_456, 2.5e20, 0.000123456789012345] {
            let back: f64 = fmt_real(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(t.to_csv_string(), "a,b\n1,x\n");
    }
}
