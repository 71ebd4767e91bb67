//! TextGrid interval-tier reader and writer.
//!
//! Both text forms carry the same stream of values; the long form merely
//! interleaves `key = ` labels and `[k]` indices. The tokenizer therefore
//! drops labels, brackets and `!` comments and hands the parser a flat stream
//! of numbers, quoted strings and `<flags>`.

use std::fmt::Write as _;

use super::Segment;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextGridError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: point tier {name:?} is not supported")]
    PointTierUnsupported { line: usize, name: String },
    #[error("line {line}: interval {index} of tier {tier:?} is out of order ({message})")]
    NonMonotoneIntervals {
        line: usize,
        tier: String,
        index: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<Tier>,
}

impl TextGrid {
    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name == name)
    }

    /// `(tier name, segments)` pairs in document order.
    pub fn into_tier_list(self) -> Vec<(String, Vec<Segment>)> {
        self.tiers
            .into_iter()
            .map(|t| (t.name, t.segments))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextGridFormat {
    Long,
    Short,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Text(String),
    Flag(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(x) => format!("number {x}"),
            Token::Text(s) => format!("string {s:?}"),
            Token::Flag(f) => format!("flag <{f}>"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, TextGridError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            '!' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '[' => {
                let open_line = line;
                while i < chars.len() && chars[i] != ']' {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
                if i == chars.len() {
                    return Err(TextGridError::SyntaxError {
                        line: open_line,
                        message: "unclosed '['".into(),
                    });
                }
                i += 1;
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(TextGridError::SyntaxError {
                                line: start_line,
                                message: "unterminated string".into(),
                            })
                        }
                        Some('"') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                tokens.push((Token::Text(s), start_line));
            }
            '<' => {
                let start = i + 1;
                while i < chars.len() && chars[i] != '>' && chars[i] != '\n' {
                    i += 1;
                }
                if chars.get(i) != Some(&'>') {
                    return Err(TextGridError::SyntaxError {
                        line,
                        message: "unclosed '<' flag".into(),
                    });
                }
                tokens.push((Token::Flag(chars[start..i].iter().collect()), line));
                i += 1;
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+' || c == '.')
                    && chars
                        .get(i + 1)
                        .is_some_and(|n| n.is_ascii_digit() || *n == '.')) =>
            {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '.' | '-' | '+'))
                {
                    i += 1;
                }
                let lexeme: String = chars[start..i].iter().collect();
                let value = lexeme
                    .parse::<f64>()
                    .map_err(|_| TextGridError::SyntaxError {
                        line,
                        message: format!("malformed number {lexeme:?}"),
                    })?;
                tokens.push((Token::Number(value), line));
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '?'))
                {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    Ok(tokens)
}

struct Cursor {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn next(&mut self, what: &str) -> Result<(Token, usize), TextGridError> {
        match self.tokens.get(self.pos) {
            Some((tok, line)) => {
                self.pos += 1;
                self.last_line = *line;
                Ok((tok.clone(), *line))
            }
            None => Err(TextGridError::SyntaxError {
                line: self.last_line,
                message: format!("unexpected end of document, expected {what}"),
            }),
        }
    }

    fn number(&mut self, what: &str) -> Result<(f64, usize), TextGridError> {
        match self.next(what)? {
            (Token::Number(x), line) if x.is_finite() => Ok((x, line)),
            (tok, line) => Err(TextGridError::SyntaxError {
                line,
                message: format!("expected {what}, found {}", tok.describe()),
            }),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, TextGridError> {
        let (x, line) = self.number(what)?;
        if x < 0.0 || x.fract() != 0.0 || x > 1e9 {
            return Err(TextGridError::SyntaxError {
                line,
                message: format!("{what} must be a non-negative integer"),
            });
        }
        Ok(x as usize)
    }

    fn text(&mut self, what: &str) -> Result<(String, usize), TextGridError> {
        match self.next(what)? {
            (Token::Text(s), line) => Ok((s, line)),
            (tok, line) => Err(TextGridError::SyntaxError {
                line,
                message: format!("expected {what}, found {}", tok.describe()),
            }),
        }
    }
}

/// Parses a TextGrid in long or short text form. Only interval tiers are accepted.
pub fn parse_textgrid(text: &str) -> Result<TextGrid, TextGridError> {
    let mut cur = Cursor {
        tokens: tokenize(text)?,
        pos: 0,
        last_line: 1,
    };

    let (file_type, line) = cur.text("file type")?;
    if file_type != "ooTextFile" {
        return Err(TextGridError::SyntaxError {
            line,
            message: format!("unsupported file type {file_type:?}"),
        });
    }
    let (class, line) = cur.text("object class")?;
    if class != "TextGrid" {
        return Err(TextGridError::SyntaxError {
            line,
            message: format!("object class {class:?} is not TextGrid"),
        });
    }
    let (xmin, _) = cur.number("xmin")?;
    let (xmax, line) = cur.number("xmax")?;
    if xmin >= xmax {
        return Err(TextGridError::SyntaxError {
            line,
            message: format!("xmin {xmin} is not below xmax {xmax}"),
        });
    }
    let n_tiers = match cur.next("tiers flag")? {
        (Token::Flag(f), _) if f == "exists" => cur.count("tier count")?,
        (Token::Flag(f), _) if f == "absent" => 0,
        (tok, line) => {
            return Err(TextGridError::SyntaxError {
                line,
                message: format!("expected <exists> or <absent>, found {}", tok.describe()),
            })
        }
    };

    let mut tiers = Vec::new();
    for _ in 0..n_tiers {
        let (class, line) = cur.text("tier class")?;
        let (name, _) = cur.text("tier name")?;
        match class.as_str() {
            "IntervalTier" => {}
            "TextTier" => return Err(TextGridError::PointTierUnsupported { line, name }),
            other => {
                return Err(TextGridError::SyntaxError {
                    line,
                    message: format!("unknown tier class {other:?}"),
                })
            }
        }
        cur.number("tier xmin")?;
        cur.number("tier xmax")?;
        let n = cur.count("interval count")?;
        let mut segments: Vec<Segment> = Vec::new();
        for index in 1..=n {
            let (start, line) = cur.number("interval xmin")?;
            let (end, _) = cur.number("interval xmax")?;
            let (label, _) = cur.text("interval text")?;
            let fail = |message: String| TextGridError::NonMonotoneIntervals {
                line,
                tier: name.clone(),
                index,
                message,
            };
            if start < 0.0 {
                return Err(fail(format!("negative start {start}")));
            }
            if start >= end {
                return Err(fail(format!("start {start} is not before end {end}")));
            }
            if let Some(prev) = segments.last() {
                if start < prev.end_s {
                    return Err(fail(format!(
                        "start {start} precedes previous end {}",
                        prev.end_s
                    )));
                }
            }
            segments.push(Segment::new(name.clone(), label, start, end));
        }
        tiers.push(Tier { name, segments });
    }
    Ok(TextGrid { xmin, xmax, tiers })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Writes a TextGrid. Times use the shortest representation that parses back to the same value.
pub fn serialize_textgrid(grid: &TextGrid, format: TextGridFormat) -> String {
    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n");
    match format {
        TextGridFormat::Long => {
            let _ = writeln!(out, "xmin = {} ", grid.xmin);
            let _ = writeln!(out, "xmax = {} ", grid.xmax);
            if grid.tiers.is_empty() {
                out.push_str("tiers? <absent> \n");
                return out;
            }
            out.push_str("tiers? <exists> \n");
            let _ = writeln!(out, "size = {} ", grid.tiers.len());
            out.push_str("item []: \n");
            for (t, tier) in grid.tiers.iter().enumerate() {
                let (txmin, txmax) = tier_extent(grid, tier);
                let _ = writeln!(out, "    item [{}]:", t + 1);
                out.push_str("        class = \"IntervalTier\" \n");
                let _ = writeln!(out, "        name = {} ", quote(&tier.name));
                let _ = writeln!(out, "        xmin = {txmin} ");
                let _ = writeln!(out, "        xmax = {txmax} ");
                let _ = writeln!(out, "        intervals: size = {} ", tier.segments.len());
                for (k, seg) in tier.segments.iter().enumerate() {
                    let _ = writeln!(out, "        intervals [{}]:", k + 1);
                    let _ = writeln!(out, "            xmin = {} ", seg.start_s);
                    let _ = writeln!(out, "            xmax = {} ", seg.end_s);
                    let _ = writeln!(out, "            text = {} ", quote(&seg.label));
                }
            }
        }
        TextGridFormat::Short => {
            let _ = writeln!(out, "{}", grid.xmin);
            let _ = writeln!(out, "{}", grid.xmax);
            if grid.tiers.is_empty() {
                out.push_str("<absent>\n");
                return out;
            }
            out.push_str("<exists>\n");
            let _ = writeln!(out, "{}", grid.tiers.len());
            for tier in &grid.tiers {
                let (txmin, txmax) = tier_extent(grid, tier);
                out.push_str("\"IntervalTier\"\n");
                let _ = writeln!(out, "{}", quote(&tier.name));
                let _ = writeln!(out, "{txmin}\n{txmax}");
                let _ = writeln!(out, "{}", tier.segments.len());
                for seg in &tier.segments {
                    let _ = writeln!(out, "{}\n{}\n{}", seg.start_s, seg.end_s, quote(&seg.label));
                }
            }
        }
    }
    out
}

fn tier_extent(grid: &TextGrid, tier: &Tier) -> (f64, f64) {
    let lo = tier
        .segments
        .first()
        .map_or(grid.xmin, |s| s.start_s.min(grid.xmin));
    let hi = tier
        .segments
        .last()
        .map_or(grid.xmax, |s| s.end_s.max(grid.xmax));
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SHORT: &str = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n0.26\n<exists>\n1\n\"IntervalTier\"\n\"phones\"\n0\n0.26\n3\n0\n0.10\n\"s\"\n0.10\n0.18\n\"a\"\n0.18\n0.26\n\"m\"\n";

    const LONG: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 1.5
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "words"
        xmin = 0
        xmax = 1.5
        intervals: size = 2
        intervals [1]:
            xmin = 0
            xmax = 0.7
            text = "sa'mi"
        intervals [2]:
            xmin = 0.7
            xmax = 1.5
            text = ""
    item [2]:
        class = "IntervalTier"
        name = "empty"
        xmin = 0
        xmax = 1.5
        intervals: size = 0
"#;

    #[test]
    fn short_form_by_construction() {
        let grid = parse_textgrid(SHORT).unwrap();
        assert_eq!(grid.tiers.len(), 1);
        let segs = &grid.tiers[0].segments;
        assert_eq!(
            segs,
            &vec![
                Segment::new("phones", "s", 0.0, 0.10),
                Segment::new("phones", "a", 0.10, 0.18),
                Segment::new("phones", "m", 0.18, 0.26),
            ]
        );
    }

    #[test]
    fn long_form_keeps_empty_labels_and_empty_tiers() {
        let grid = parse_textgrid(LONG).unwrap();
        let tiers = grid.into_tier_list();
        assert_eq!(tiers[0].0, "words");
        assert_eq!(tiers[0].1.len(), 2);
        assert_eq!(tiers[0].1[1].label, "");
        assert_eq!(tiers[1], ("empty".to_string(), vec![]));
    }

    #[test]
    fn point_tier_is_rejected() {
        let doc = LONG.replacen("IntervalTier", "TextTier", 1);
        assert!(matches!(
            parse_textgrid(&doc),
            Err(TextGridError::PointTierUnsupported { .. })
        ));
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        let doc = SHORT.replace("0.10\n0.18", "0.09\n0.18");
        match parse_textgrid(&doc) {
            Err(TextGridError::NonMonotoneIntervals { index, line, .. }) => {
                assert_eq!(index, 2);
                assert_eq!(line, 16);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_time_domain_is_rejected() {
        let doc = "\"ooTextFile\" \"TextGrid\" 2 1 <absent>";
        assert!(matches!(
            parse_textgrid(doc),
            Err(TextGridError::SyntaxError { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let doc = SHORT.replace("\"a\"", "0.5");
        match parse_textgrid(&doc) {
            Err(TextGridError::SyntaxError { line, .. }) => assert_eq!(line, 18),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_textgrid(""),
            Err(TextGridError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_textgrid("\"ooTextFile\" \"TextGrid\" 0 1 <exists> 1 \"IntervalTier\" \"x"),
            Err(TextGridError::SyntaxError { .. })
        ));
    }

    #[test]
    fn quotes_inside_labels_survive() {
        let grid = TextGrid {
            xmin: 0.0,
            xmax: 1.0,
            tiers: vec![Tier {
                name: "a \"b\"".into(),
                segments: vec![Segment::new("a \"b\"", "\"x\"", 0.0, 1.0)],
            }],
        };
        for format in [TextGridFormat::Long, TextGridFormat::Short] {
            assert_eq!(
                parse_textgrid(&serialize_textgrid(&grid, format)).unwrap(),
                grid
            );
        }
    }

    fn arb_grid() -> impl Strategy<Value = TextGrid> {
        let tier = (
            "[a-z]{1,8}",
            proptest::collection::vec(("[a-zA-Z' \"]{0,5}", 1u32..5000, 0u32..3), 0..8),
        );
        proptest::collection::vec(tier, 0..4).prop_map(|tiers| {
            let tiers: Vec<Tier> = tiers
                .into_iter()
                .map(|(name, ivs)| {
                    let mut t = 0.0f64;
                    let segments = ivs
                        .into_iter()
                        .map(|(label, width, gap)| {
                            let start = t + gap as f64 * 0.0137;
                            let end = start + width as f64 / 7919.0;
                            t = end;
                            Segment::new(name.clone(), label, start, end)
                        })
                        .collect();
                    Tier { name, segments }
                })
                .collect();
            let xmax = tiers
                .iter()
                .filter_map(|t| t.segments.last())
                .map(|s| s.end_s)
                .fold(1.0, f64::max);
            TextGrid {
                xmin: 0.0,
                xmax,
                tiers,
            }
        })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(grid in arb_grid(), long in any::<bool>()) {
            let format = if long { TextGridFormat::Long } else { TextGridFormat::Short };
            let parsed = parse_textgrid(&serialize_textgrid(&grid, format)).unwrap();
            prop_assert_eq!(parsed, grid);
        }

        #[test]
        fn truncated_documents_yield_errors_not_panics(cut in 0usize..LONG.len()) {
            let doc: String = LONG.chars().take(cut).collect();
            let _ = parse_textgrid(&doc);
        }

        #[test]
        fn arbitrary_text_never_panics(doc in "\\PC{0,300}") {
            let _ = parse_textgrid(&doc);
        }
    }
}
