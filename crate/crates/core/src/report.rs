//! Text serializations of engine outputs.

use std::fmt::Write;

use crate::engine::{EnrichmentResult, MethodOverlap, NegativeControlReport};

pub const RESULTS_HEADER: [&str; 10] = [
    "rank",
    "theme",
    "domain",
    "k",
    "K",
    "n",
    "N",
    "p_value",
    "tfidf",
    "significant",
];

/// Four significant digits; values below 1e-4 in scientific notation
/// (`5.818e-06`).
pub fn format_pvalue(p: f64) -> String {
    let sci = format!("{p:.3e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if p < 1e-4 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{:.*}", (3 - exp).max(0) as usize, p)
    }
}

pub fn results_tsv(results: &[EnrichmentResult]) -> String {
    let mut out = RESULTS_HEADER.join("\t");
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{}",
            r.rank,
            r.theme,
            r.domain,
            r.k,
            r.big_k,
            r.n,
            r.big_n,
            format_pvalue(r.p_value.value()),
            r.tfidf,
            r.significant
        );
    }
    out
}

/// Summary comment lines followed by a `significant_themes`/`trials`
/// histogram.
pub fn negative_control_text(report: &NegativeControlReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# background={} trials={} n={} alpha={} seed={}",
        report.background, report.trials, report.n, report.alpha, report.seed
    );
    let _ = write!(out, "# mean={:.6} sd={:.6}", report.mean, report.sd);
    if !report.sd_defined {
        out.push_str(" sd_undefined=true");
    }
    out.push('\n');
    out.push_str("significant_themes\ttrials\n");
    for (count, trials) in report.histogram() {
        let _ = writeln!(out, "{count}\t{trials}");
    }
    out
}

/// Overlap summary line followed by the paired scores used for scatterplots.
pub fn overlap_text(overlap: &MethodOverlap) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# top_m={} shared={} jaccard={:.4}",
        overlap.top_m, overlap.shared, overlap.jaccard
    );
    out.push_str("theme\tdomain\tp_value\tneg_log10_p\ttfidf\n");
    for pair in &overlap.pairs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{:.6}",
            pair.theme,
            pair.domain,
            format_pvalue(pair.p_value),
            -pair.p_value.log10(),
            pair.tfidf
        );
    }
    out
}
