//! `features.csv`: one row per analysed token.

use std::io::{Read, Write};

use sonolab::FeatureRecord;

use crate::CliError;

pub const HEADER: [&str; 28] = [
    "speaker",
    "keyword",
    "variety",
    "stress",
    "segment",
    "vowel",
    "duration_ms",
    "m1_cog_hz",
    "m2_sd_hz",
    "m3_skew",
    "m4_kurt",
    "f1_a0",
    "f1_a1",
    "f1_a2",
    "f2_a0",
    "f2_a1",
    "f2_a2",
    "f3_a0",
    "f3_a1",
    "f3_a2",
    "f4_a0",
    "f4_a1",
    "f4_a2",
    "f1_rmse",
    "f2_rmse",
    "f3_rmse",
    "f4_rmse",
    "n_frames_averaged",
];

/// Shortest decimal text of `x` rounded to 6 significant digits.
///
/// Rounding goes through scientific notation so the result re-reads to a value
/// that formats to the same text.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn record_fields(r: &FeatureRecord) -> Vec<String> {
    let mut f = vec![
        r.speaker.clone(),
        r.keyword.clone(),
        r.variety.to_string(),
        r.stress.to_string(),
        r.segment.to_string(),
        r.vowel.to_string(),
    ];
    for v in [r.duration_ms, r.m1_cog_hz, r.m2_sd_hz, r.m3_skew, r.m4_kurt] {
        f.push(format_sig6(v));
    }
    for c in &r.contour {
        f.extend(c.iter().map(|&v| format_sig6(v)));
    }
    f.extend(r.contour_rmse.iter().map(|&v| format_sig6(v)));
    f.push(r.n_frames_averaged.to_string());
    f
}

pub fn write_features<W: Write>(out: W, records: &[FeatureRecord]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(record_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn features_to_string(records: &[FeatureRecord]) -> String {
    let mut buf = Vec::new();
    write_features(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// A schema violation, with the 1-based line number of the offending row.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

fn number(field: &str, column: &str, line: usize) -> Result<f64, SchemaError> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| SchemaError {
            line,
            message: format!("{column} value {field:?} is not a finite number"),
        })
}

fn parse_row(row: &csv::StringRecord, line: usize) -> Result<FeatureRecord, SchemaError> {
    if row.len() != HEADER.len() {
        return Err(SchemaError {
            line,
            message: format!("expected {} fields, found {}", HEADER.len(), row.len()),
        });
    }
    let level_err = |e: sonolab::factor::UnknownLevel| SchemaError {
        line,
        message: e.to_string(),
    };
    let num = |i: usize| number(&row[i], HEADER[i], line);
    let mut contour = [[0.0; 3]; 4];
    for (f, c) in contour.iter_mut().enumerate() {
        for (j, v) in c.iter_mut().enumerate() {
            *v = num(11 + 3 * f + j)?;
        }
    }
    let mut contour_rmse = [0.0; 4];
    for (f, v) in contour_rmse.iter_mut().enumerate() {
        *v = num(23 + f)?;
    }
    let n_frames_averaged = row[27].trim().parse::<usize>().map_err(|_| SchemaError {
        line,
        message: format!("n_frames_averaged value {:?} is not a count", &row[27]),
    })?;
    let record = FeatureRecord {
        speaker: row[0].to_string(),
        keyword: row[1].to_string(),
        variety: row[2].parse().map_err(level_err)?,
        stress: row[3].parse().map_err(level_err)?,
        segment: row[4].parse().map_err(level_err)?,
        vowel: row[5].parse().map_err(level_err)?,
        duration_ms: num(6)?,
        m1_cog_hz: num(7)?,
        m2_sd_hz: num(8)?,
        m3_skew: num(9)?,
        m4_kurt: num(10)?,
        contour,
        contour_rmse,
        n_frames_averaged,
    };
    record
        .validate()
        .map_err(|message| SchemaError { line, message })?;
    Ok(record)
}

/// Reads and validates a features table. Stops at the first bad row.
pub fn read_features<R: Read>(input: R) -> Result<Vec<FeatureRecord>, SchemaError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(SchemaError {
                line: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(SchemaError {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(SchemaError {
            line: 1,
            message: format!("header must be {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| SchemaError {
            line,
            message: e.to_string(),
        })?;
        out.push(parse_row(&row, line)?);
    }
    Ok(out)
}

pub fn read_features_file(path: &std::path::Path) -> Result<Vec<FeatureRecord>, CliError> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    read_features(std::io::BufReader::new(file))
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sonolab::factor::{Sonorant, Stress, Variety, Vowel};

    fn record() -> FeatureRecord {
        FeatureRecord {
            speaker: "CG01".into(),
            keyword: "sa'mi, \"x\"".into(),
            variety: Variety::Cg,
            stress: Stress::Stressed,
            segment: Sonorant::M,
            vowel: Vowel::I,
            duration_ms: 80.123456789,
            m1_cog_hz: 903.891234,
            m2_sd_hz: 1e-7 / 3.0,
            m3_skew: -14.34,
            m4_kurt: 425530.123,
            contour: [
                [470.0, -7.98, 0.0123456],
                [1549.0, 5.4, -0.2],
                [2875.0, 0.62, 1.0],
                [3732.0, -25.29, 3.0],
            ],
            contour_rmse: [1.5, 2.0, 3.25, 0.0],
            n_frames_averaged: 7,
        }
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(80.123456789), "80.1235");
        assert_eq!(format_sig6(425530.123), "425530");
        assert_eq!(format_sig6(1234567.0), "1234570");
        assert_eq!(format_sig6(-0.0), "0");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(2000.0), "2000");
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = features_to_string(&[record(), record()]);
        assert!(
            text.starts_with("speaker,keyword,variety,stress,segment,vowel,duration_ms,m1_cog_hz,")
        );
        let back = read_features(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].keyword, "sa'mi, \"x\"");
        assert_eq!(features_to_string(&back), text);
    }

    #[test]
    fn schema_errors_name_the_line() {
        let text = features_to_string(&[record(), record()]);
        let bad = text.replace(",CG,stressed,m,i,", ",XG,stressed,m,i,");
        let err = read_features(bad.as_bytes()).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("XG"));

        let short = format!("{}\nCG01,k,CG\n", HEADER.join(","));
        assert_eq!(read_features(short.as_bytes()).unwrap_err().line, 2);
        assert_eq!(read_features("a,b\n".as_bytes()).unwrap_err().line, 1);
        let nan = features_to_string(&[record()]).replace(",80.1235,", ",NaN,");
        assert!(read_features(nan.as_bytes())
            .unwrap_err()
            .message
            .contains("duration_ms"));
    }

    #[test]
    fn empty_table_is_header_only() {
        let text = features_to_string(&[]);
        assert_eq!(text, format!("{}\n", HEADER.join(",")));
        assert!(read_features(text.as_bytes()).unwrap().is_empty());
    }
}
