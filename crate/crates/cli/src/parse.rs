//! Parsing of numeric lists and ranges given on the command line.

use std::str::FromStr;

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn real_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{text}` must look like start:stop:step"));
        }
        let [start, stop, step] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (start, stop, step) = match (start, stop, step) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return Err(format!("range `{text}` has a non-numeric bound")),
        };
        if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
            return Err(format!(
                "range `{text}` needs finite bounds and a positive step"
            ));
        }
        if stop < start {
            return Err(format!("range `{text}` ends before it starts"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // multiply rather than accumulate so grid points do not drift
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        list(text)
    }
}

/// Parses a comma-separated list of values.
pub fn list<T: FromStr>(text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse `{}`", s.trim()))
        })
        .collect()
}
