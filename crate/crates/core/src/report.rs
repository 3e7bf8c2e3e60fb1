//! Regression-table formatting: stratum × model columns, coefficients with
//! standard errors in parentheses, two-tailed significance stars, fixed-effect
//! control rows, pseudo-R² and observation counts. Emitted both as CSV and as
//! aligned text.

use alloc::string::String;
use alloc::vec::Vec;

use crate::probit::FitResult;
use crate::{CoreError, Result};

/// Two-tailed significance stars: *** p<0.001, ** p<0.01, * p<0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// One column of the table.
#[derive(Debug, Clone)]
pub struct ReportCell {
    /// e.g. "Core" / "Periphery".
    pub stratum: String,
    /// e.g. "Probit" / "2SRI".
    pub model: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone)]
pub struct ReportTable {
    pub csv: String,
    pub text: String,
}

fn is_fixed_effect(name: &str) -> (bool, &'static str) {
    if name.starts_with("region=") {
        (true, "regions")
    } else if name.starts_with("month=") {
        (true, "month")
    } else if name.starts_with("community=") {
        (true, "community")
    } else {
        (false, "")
    }
}

/// Build the table from one or more fitted cells.
pub fn report_table(cells: &[ReportCell]) -> Result<ReportTable> {
    if cells.is_empty() {
        return Err(CoreError::InvalidConfig("report needs at least one fit".into()));
    }

    // Row order: union of non-fixed-effect coefficients, in first appearance
    // order across cells.
    let mut row_names: Vec<String> = Vec::new();
    for cell in cells {
        for name in &cell.fit.names {
            if !is_fixed_effect(name).0 && !row_names.contains(name) {
                row_names.push(name.clone());
            }
        }
    }

    let controls = ["regions", "month", "community"];
    let has_control = |cell: &ReportCell, family: &str| {
        cell.fit.names.iter().any(|n| {
            let (fe, fam) = is_fixed_effect(n);
            fe && fam == family
        })
    };

    let fmt_est = |cell: &ReportCell, name: &str| -> Option<(f64, f64, &'static str)> {
        let idx = cell.fit.names.iter().position(|n| n == name)?;
        Some((cell.fit.beta[idx], cell.fit.se[idx], significance_stars(cell.fit.p_value[idx])))
    };

    // CSV.
    let mut csv = String::from("variable");
    for cell in cells {
        csv.push_str(&alloc::format!(
            ",{} {} est,{} {} se,{} {} stars",
            cell.stratum, cell.model, cell.stratum, cell.model, cell.stratum, cell.model
        ));
    }
    csv.push('\n');
    for name in &row_names {
        csv.push_str(name);
        for cell in cells {
            match fmt_est(cell, name) {
                Some((est, se, stars)) => {
                    csv.push_str(&alloc::format!(",{est:.6},{se:.6},{stars}"));
                }
                None => csv.push_str(",,,"),
            }
        }
        csv.push('\n');
    }
    for family in controls {
        csv.push_str(&alloc::format!("control_{family}"));
        for cell in cells {
            let yes = if has_control(cell, family) { "yes" } else { "no" };
            csv.push_str(&alloc::format!(",{yes},,"));
        }
        csv.push('\n');
    }
    csv.push_str("pseudo_r2");
    for cell in cells {
        csv.push_str(&alloc::format!(",{:.6},,", cell.fit.pseudo_r2));
    }
    csv.push('\n');
    csv.push_str("observations");
    for cell in cells {
        csv.push_str(&alloc::format!(",{},,", cell.fit.n_obs));
    }
    csv.push('\n');

    // Aligned text.
    let col_width = 22usize;
    let name_width = row_names
        .iter()
        .map(String::len)
        .chain(["Control for community".len()])
        .max()
        .unwrap_or(12)
        + 2;
    let mut text = String::new();
    text.push_str(&alloc::format!("{:<name_width$}", ""));
    for cell in cells {
        text.push_str(&alloc::format!("{:>col_width$}", alloc::format!("{} {}", cell.stratum, cell.model)));
    }
    text.push('\n');
    text.push_str(&"-".repeat(name_width + col_width * cells.len()));
    text.push('\n');
    for name in &row_names {
        text.push_str(&alloc::format!("{name:<name_width$}"));
        for cell in cells {
            let body = match fmt_est(cell, name) {
                Some((est, se, stars)) => alloc::format!("{est:.3}{stars} ({se:.3})"),
                None => String::from("-"),
            };
            text.push_str(&alloc::format!("{body:>col_width$}"));
        }
        text.push('\n');
    }
    for family in controls {
        text.push_str(&alloc::format!("{:<name_width$}", alloc::format!("Control for {family}")));
        for cell in cells {
            let yes = if has_control(cell, family) { "Yes" } else { "No" };
            text.push_str(&alloc::format!("{yes:>col_width$}"));
        }
        text.push('\n');
    }
    text.push_str(&alloc::format!("{:<name_width$}", "Pseudo R2"));
    for cell in cells {
        text.push_str(&alloc::format!("{:>col_width$}", alloc::format!("{:.4}", cell.fit.pseudo_r2)));
    }
    text.push('\n');
    text.push_str(&alloc::format!("{:<name_width$}", "Observations"));
    for cell in cells {
        text.push_str(&alloc::format!("{:>col_width$}", cell.fit.n_obs));
    }
    text.push('\n');
    text.push_str("*** p<0.001, ** p<0.01, * p<0.05 (two-tailed)\n");

    Ok(ReportTable { csv, text })
}
