use super::Segment;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TsvError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: end {end_s} is not after start {start_s}")]
    NegativeDuration {
        line: usize,
        start_s: f64,
        end_s: f64,
    },
}

/// Parses `tier<TAB>label<TAB>start_s<TAB>end_s` lines. `#` lines and blank lines are skipped.
pub fn parse_tsv_annotations(text: &str) -> Result<Vec<Segment>, TsvError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        if row.trim().is_empty() || row.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = row.split('\t').collect();
        if cols.len() != 4 {
            return Err(TsvError::SyntaxError {
                line,
                message: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let time = |s: &str, what: &str| -> Result<f64, TsvError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| TsvError::SyntaxError {
                    line,
                    message: format!("{what} {s:?} is not a number"),
                })
        };
        let start_s = time(cols[2], "start")?;
        let end_s = time(cols[3], "end")?;
        if start_s < 0.0 {
            return Err(TsvError::SyntaxError {
                line,
                message: format!("negative start {start_s}"),
            });
        }
        if end_s <= start_s {
            return Err(TsvError::NegativeDuration {
                line,
                start_s,
                end_s,
            });
        }
        out.push(Segment::new(cols[0], cols[1], start_s, end_s));
    }
    Ok(out)
}

pub fn serialize_tsv(segments: &[Segment]) -> String {
    let mut out = String::from("# tier\tlabel\tstart_s\tend_s\n");
    for s in segments {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            s.tier, s.label, s.start_s, s.end_s
        ));
    }
    out
}
