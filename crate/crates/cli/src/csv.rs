//! Scan CSV files: header `alpha_rad,chi_rad,repetition,counts`, one record
//! per line, angles written with 17 significant digits so they parse back to
//! the same bits.

use std::path::Path;

use spinpath::apparatus::ScanPlan;
use spinpath::montecarlo::{CountRecord, ScanResult};
use spinpath::setting::angular_distance;

use crate::error::{CliError, CliResult};

pub const HEADER: &str = "alpha_rad,chi_rad,repetition,counts";

pub fn scan_to_csv(scan: &ScanResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::with_capacity(64 * (scan.records().len() + 1)));
    w.write_record(HEADER.split(',')).expect("write to memory");
    for r in scan.records() {
        w.write_record([
            format!("{:.16e}", r.alpha),
            format!("{:.16e}", r.chi),
            r.repetition.to_string(),
            r.counts.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ASCII output")
}

/// Parses one scan. The seed is not part of the format and is set to 0.
pub fn scan_from_csv(text: &str, source: &Path) -> CliResult<ScanResult> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    match rows.next() {
        Some(Ok(h)) if h.iter().eq(HEADER.split(',')) => {}
        Some(Ok(h)) => {
            let got: Vec<&str> = h.iter().collect();
            return Err(CliError::parse(
                source,
                1,
                format!("expected header '{HEADER}', got '{}'", got.join(",")),
            ));
        }
        Some(Err(e)) => return Err(CliError::parse(source, 1, e.to_string())),
        None => return Err(CliError::parse(source, 1, "empty file")),
    }
    let mut records = Vec::new();
    let mut chis: Vec<f64> = Vec::new();
    let mut max_rep = 0u32;
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::parse(source, line, e.to_string())
        })?;
        let line_no = row.position().map_or(0, |p| p.line() as usize);
        let fail = |msg: String| CliError::parse(source, line_no, msg);
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 4 {
            return Err(fail(format!("expected 4 fields, got {}", row.len())));
        }
        let float = |i: usize, name: &str| -> CliResult<f64> {
            row[i]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| fail(format!("invalid {name} '{}'", &row[i])))
        };
        let alpha = float(0, "alpha_rad")?;
        let chi = float(1, "chi_rad")?;
        let repetition: u32 = row[2]
            .parse()
            .map_err(|_| fail(format!("invalid repetition '{}'", &row[2])))?;
        if row[3].starts_with('-') {
            return Err(fail(format!("negative counts '{}'", &row[3])));
        }
        let counts: u64 = row[3]
            .parse()
            .map_err(|_| fail(format!("invalid counts '{}'", &row[3])))?;
        if let Some(first) = records.first().map(|r: &CountRecord| r.alpha) {
            if angular_distance(first, alpha) > 1e-9 {
                return Err(fail(format!(
                    "alpha {alpha} differs from the file's first alpha {first}"
                )));
            }
        }
        if !chis.iter().any(|c| c.to_bits() == chi.to_bits()) {
            chis.push(chi);
        }
        max_rep = max_rep.max(repetition);
        records.push(CountRecord {
            alpha,
            chi,
            repetition,
            counts,
        });
    }
    let alpha = records
        .first()
        .map(|r| r.alpha)
        .ok_or_else(|| CliError::parse(source, 1, "no records"))?;
    let plan = ScanPlan::new(alpha, chis, max_rep + 1)?;
    Ok(ScanResult::new(plan, records, 0)?)
}

pub fn read_scan(path: &Path) -> CliResult<ScanResult> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    scan_from_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinpath::apparatus::{paper_apparatus, uniform_chi_grid};
    use spinpath::montecarlo::sample_scan;

    fn scan() -> ScanResult {
        let plan = ScanPlan::new(std::f64::consts::FRAC_PI_2, uniform_chi_grid(8), 3).unwrap();
        sample_scan(&paper_apparatus(), &plan, 11).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let s = scan();
        let text = scan_to_csv(&s);
        let back = scan_from_csv(&text, Path::new("s.csv")).unwrap();
        assert_eq!(back.records(), s.records());
        assert_eq!(back.plan(), s.plan());
        assert_eq!(scan_to_csv(&back), text);
    }

    #[test]
    fn bad_lines_are_located() {
        let text = scan_to_csv(&scan());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[4] = "1.0,2.0,0,-5".into();
        let err = scan_from_csv(&lines.join("\n"), Path::new("s.csv")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 5, .. }), "{err}");
        assert!(err.to_string().contains("negative"));

        lines[4] = "1.0,2.0,zero,5".into();
        let err = scan_from_csv(&lines.join("\n"), Path::new("s.csv")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 5, .. }));

        let err = scan_from_csv("a,b,c\n", Path::new("s.csv")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }));
    }

    #[test]
    fn incomplete_scan_is_rejected() {
        let text = scan_to_csv(&scan());
        let holed: Vec<&str> = text
            .lines()
            .enumerate()
            .filter(|(i, _)| *i != 3)
            .map(|(_, l)| l)
            .collect();
        assert!(matches!(
            scan_from_csv(&holed.join("\n"), Path::new("s.csv")),
            Err(CliError::Model(_))
        ));
    }
}
