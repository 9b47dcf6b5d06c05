//! JSONL records and aligned text tables.

use serde::Serialize;

use super::ablate::AblationReport;
use super::regress::{OlsFit, PerturbationRegression};

/// One JSON document per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("report records serialise"));
        out.push('\n');
    }
    out
}

/// Left-aligned first column, right-aligned others, two spaces apart.
pub fn aligned_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate().take(cols) {
            let pad = widths[i] - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols.saturating_sub(1))));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

impl AblationReport {
    /// One row per (noise, variant), one column per path, cells as
    /// `mean (±std)`.
    pub fn to_table(&self) -> String {
        let mut header = vec!["Noise".to_string(), "Configuration".to_string()];
        header.extend(self.paths.iter().cloned());
        let rows: Vec<Vec<String>> = Self::rows()
            .iter()
            .map(|&(noise, variant)| {
                let mut r = vec![
                    if noise { "With noise" } else { "Without noise" }.to_string(),
                    variant.label().to_string(),
                ];
                for p in &self.paths {
                    r.push(match self.cell(noise, variant, p) {
                        Some(c) => match (c.mean, c.std) {
                            (Some(m), Some(s)) => format!("{m:.4} (±{s:.4})"),
                            _ => "failed".to_string(),
                        },
                        None => "-".to_string(),
                    });
                }
                r
            })
            .collect();
        aligned_table(&header, &rows)
    }
}

fn fit_rows(model: &str, fit: &OlsFit) -> Vec<Vec<String>> {
    (0..fit.coefficients.len())
        .map(|j| {
            vec![
                model.to_string(),
                fit.names[j].clone(),
                format!("{:.6e}", fit.coefficients[j]),
                format!("{:.3e}", fit.std_errors[j]),
                format!("{:.3}", fit.t_stats[j]),
                format!("{:.3e}", fit.p_values[j]),
                fit.samples.to_string(),
            ]
        })
        .collect()
}

impl PerturbationRegression {
    pub fn to_table(&self) -> String {
        let header: Vec<String> = ["Model", "Coefficient", "Estimate", "Std. error", "t", "p", "n"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = fit_rows("y ~ b x", &self.result.no_intercept);
        rows.extend(fit_rows("y ~ b0 + b1 x", &self.result.with_intercept));
        let mut out = aligned_table(&header, &rows);
        out.push_str(&format!(
            "perturbation: uniform ±{:.6e} (noise scale {} x std) on source index {}, target index {}\n",
            self.noise_half_width, self.options.noise_scale, self.options.source_index, self.options.target_index
        ));
        out
    }
}
