//! Text renderings of summaries, model fits and contrasts.

use sonolab::factor::Factor;
use sonolab::stats::contrasts::ContrastTable;
use sonolab::stats::dist::student_t_quantile;
use sonolab::stats::{Dv, ModelFit, Scale, StatsError, SummaryTable};
use sonolab::{stats, FeatureRecord};

use crate::features::format_sig6;

/// Six significant digits; scientific notation for very small or large magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e9).contains(&a) {
        format!("{x:.5e}")
    } else {
        format_sig6(x)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_num)
}

fn tsv(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join("\t") + "\n").collect()
}

fn csv_text(rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

/// Pads columns to a common width, first column left-aligned and the rest right-aligned.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let width: Vec<usize> = (0..ncol)
        .map(|j| {
            rows.iter()
                .filter_map(|r| r.get(j))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j == 0 {
                    format!("{c:<w$}", w = width[j])
                } else {
                    format!("{c:>w$}", w = width[j])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Grouping of the moment summary: stress, then segment, then variety.
pub const MOMENT_GROUPS: [Factor; 3] = [Factor::Stress, Factor::Segment, Factor::Variety];
/// Grouping of the contour summary: stress, variety, vowel, segment.
pub const CONTOUR_GROUPS: [Factor; 4] = [
    Factor::Stress,
    Factor::Variety,
    Factor::Vowel,
    Factor::Segment,
];

/// Mean and SD per variety × segment × stress cell for duration and the four moments.
pub fn moment_summary(records: &[FeatureRecord]) -> Result<String, StatsError> {
    let t = stats::summarize(records, &MOMENT_GROUPS, &Dv::MOMENTS)?;
    let mut header = vec!["Variety".to_string(), "Segment".into(), "Stress".into()];
    for dv in Dv::MOMENTS {
        header.push(format!("{} M", dv.label()));
        header.push(format!("{} SD", dv.label()));
    }
    header.push("n".into());
    let mut rows = vec![header];
    for c in &t.cells {
        let k = t.key_names(c);
        let mut row = vec![k[2].to_string(), k[1].to_string(), capitalize(k[0])];
        for j in 0..t.dvs.len() {
            row.push(fmt_num(c.mean[j]));
            row.push(opt(c.sd[j]));
        }
        row.push(c.n.to_string());
        rows.push(row);
    }
    Ok(tsv(&rows))
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Mean and SD of each contour coefficient of F1..F4 per segment × vowel × stress × variety cell.
pub fn contour_summary(records: &[FeatureRecord]) -> Result<String, StatsError> {
    let dvs: Vec<Dv> = Dv::contours().collect();
    let t = stats::summarize(records, &CONTOUR_GROUPS, &dvs)?;
    let mut header = vec![
        "Coefficient".to_string(),
        "Segment".into(),
        "Vowel".into(),
        "Stress".into(),
        "Variety".into(),
    ];
    for f in 1..=4 {
        header.push(format!("F{f} M"));
        header.push(format!("F{f} SD"));
    }
    header.push("n".into());
    let mut rows = vec![header];
    for coef in 0..3 {
        for c in &t.cells {
            let k = t.key_names(c);
            let mut row = vec![
                format!("a{coef}"),
                k[3].to_string(),
                k[2].to_string(),
                capitalize(k[0]),
                k[1].to_string(),
            ];
            for f in 0..4 {
                let j = 3 * f + coef;
                row.push(fmt_num(c.mean[j]));
                row.push(opt(c.sd[j]));
            }
            row.push(c.n.to_string());
            rows.push(row);
        }
    }
    Ok(tsv(&rows))
}

/// Mean with a 95% t interval per cell of one DV, for external plotting.
pub fn plot_data(records: &[FeatureRecord], dv: Dv) -> Result<String, StatsError> {
    let groups: &[Factor] = if dv.is_contour() {
        &CONTOUR_GROUPS
    } else {
        &MOMENT_GROUPS
    };
    let t: SummaryTable = stats::summarize(records, groups, &[dv])?;
    let mut header: Vec<String> = groups.iter().map(|f| f.name().to_string()).collect();
    header.extend(["n", "mean", "sd", "ci95_lo", "ci95_hi"].map(String::from));
    let mut rows = vec![header];
    for c in &t.cells {
        let mut row: Vec<String> = t.key_names(c).iter().map(|s| s.to_string()).collect();
        let mean = c.mean[0];
        let half = c.sd[0]
            .map(|sd| student_t_quantile(0.975, (c.n - 1) as f64) * sd / (c.n as f64).sqrt());
        row.push(c.n.to_string());
        row.push(fmt_num(mean));
        row.push(opt(c.sd[0]));
        row.push(opt(half.map(|h| mean - h)));
        row.push(opt(half.map(|h| mean + h)));
        rows.push(row);
    }
    Ok(csv_text(&rows))
}

pub const MODEL_HEADER: [&str; 6] = ["term", "Estimate", "SE", "df", "t value", "Pr(t)"];

fn model_rows(fit: &ModelFit) -> Vec<Vec<String>> {
    let mut rows = vec![MODEL_HEADER
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for t in &fit.terms {
        rows.push(vec![
            t.term.clone(),
            fmt_num(t.estimate),
            fmt_num(t.se),
            t.df.to_string(),
            fmt_num(t.t),
            fmt_num(t.p),
        ]);
    }
    rows
}

fn scale_name(s: Scale) -> &'static str {
    match s {
        Scale::Raw => "raw",
        Scale::Log => "natural log",
    }
}

pub fn model_csv(fit: &ModelFit) -> String {
    csv_text(&model_rows(fit))
}

/// Coefficient table with a header stating what the model does and does not estimate.
pub fn model_text(fit: &ModelFit) -> String {
    let reference: Vec<String> = fit
        .reference
        .iter()
        .map(|(f, l)| format!("{f}={l}"))
        .collect();
    let mut out = format!(
        "# {} ({} scale)\n# Fixed-effects OLS; speaker and keyword random effects are not estimated.\n# Reference cell: {}\n",
        fit.dv.label(),
        scale_name(fit.scale),
        reference.join(", ")
    );
    if fit.center_by_speaker {
        out.push_str("# Values centred on speaker means.\n");
    }
    out.push_str(&format!(
        "# n = {}, excluded = {}, residual df = {}, residual sd = {}\n",
        fit.n,
        fit.n_excluded,
        fit.df_residual,
        fmt_num(fit.residual_sd)
    ));
    out.push_str(&aligned(&model_rows(fit)));
    out
}

pub const CONTRAST_HEADER: [&str; 11] = [
    "Moment",
    "Stress",
    "Family",
    "Contrast",
    "Estimate",
    "Df",
    "t value",
    "p value",
    "p unadjusted",
    "n1",
    "n2",
];

fn contrast_rows(table: &ContrastTable) -> Vec<Vec<String>> {
    let mut rows = vec![CONTRAST_HEADER
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for c in &table.rows {
        let t = c.test.as_ref();
        rows.push(vec![
            table.dv.label(),
            capitalize(c.stress.as_str()),
            c.family.clone(),
            c.label.clone(),
            opt(t.map(|t| t.estimate)),
            opt(t.map(|t| t.df)),
            opt(t.map(|t| t.t)),
            opt(c.p_holm),
            opt(t.map(|t| t.p)),
            c.n.0.to_string(),
            c.n.1.to_string(),
        ]);
    }
    rows
}

pub fn contrasts_csv(table: &ContrastTable) -> String {
    csv_text(&contrast_rows(table))
}

pub fn contrasts_text(table: &ContrastTable) -> String {
    format!(
        "# {} contrasts ({} scale); Welch t, Holm-adjusted within each family\n{}",
        table.dv.label(),
        scale_name(table.scale),
        aligned(&contrast_rows(table))
    )
}
