use std::fmt::Write as _;
use std::path::Path;

use crate::commands::Out;
use crate::failure::Failure;

/// Outputs the report knows about, in the order they appear in it.
const CSV_FILES: [&str; 10] = [
    "audit.csv",
    "ratio_curve.csv",
    "seminorm.csv",
    "weak_residuals.csv",
    "strong_residuals.csv",
    "p_harmonic.csv",
    "solve_log.csv",
    "decay_morrey.csv",
    "decay_excess.csv",
    "decay_oscillation.csv",
];

const TEXT_FILES: [&str; 3] = ["summary.txt", "minimize_summary.txt", "probe_summary.txt"];

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut lines = text.lines();
        let split = |l: &str| l.split(',').map(str::to_string).collect::<Vec<_>>();
        let header = lines.next().map(split).unwrap_or_default();
        Csv { header, rows: lines.filter(|l| !l.is_empty()).map(split).collect() }
    }

    fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.get(k).map(String::as_str).unwrap_or("")).collect())
    }

    fn floats(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name).map(|c| c.iter().filter_map(|v| v.parse().ok()).collect())
    }
}

fn check_line(out: &mut String, all_ok: &mut bool, ok: bool, what: &str) {
    *all_ok &= ok;
    writeln!(out, "{} {what}", if ok { "PASS" } else { "FAIL" }).unwrap();
}

fn checks_for(name: &str, csv: &Csv, out: &mut String, all_ok: &mut bool) {
    if let Some(pass) = csv.column("pass") {
        let failed = pass.iter().filter(|v| **v != "true").count();
        check_line(out, all_ok, failed == 0, &format!("{name}: {} of {} rows pass", pass.len() - failed, pass.len()));
    }
    match name {
        "ratio_curve.csv" => {
            let ratios = csv.floats("ratio").unwrap_or_default();
            if ratios.len() >= 3 {
                let tail = &ratios[ratios.len() - 3..];
                check_line(out, all_ok, tail.windows(2).all(|w| w[1] > w[0]), "ratio_curve.csv: tail increasing");
            }
        }
        "solve_log.csv" => {
            let energies = csv.floats("energy").unwrap_or_default();
            if !energies.is_empty() {
                check_line(out, all_ok, energies.windows(2).all(|w| w[1] <= w[0]), "solve_log.csv: energy non-increasing");
            }
            if let Some(last) = csv.rows.last() {
                writeln!(out, "INFO solve_log.csv: {} iterations, final residual {}", last[0], last.get(2).map(String::as_str).unwrap_or("")).unwrap();
            }
        }
        _ => {}
    }
}

pub fn report(out: &Out) -> Result<(), Failure> {
    let dir: &Path = &out.dir;
    let present: Vec<(&str, String)> = CSV_FILES
        .iter()
        .chain(TEXT_FILES.iter())
        .filter_map(|name| std::fs::read_to_string(dir.join(name)).ok().map(|t| (*name, t)))
        .collect();
    if !present.iter().any(|(n, _)| n.ends_with(".csv")) {
        return Err(Failure::Missing(format!("no run outputs found in {}", dir.display())));
    }

    let mut checks = String::new();
    let mut all_ok = true;
    for (name, text) in present.iter().filter(|(n, _)| n.ends_with(".csv")) {
        checks_for(name, &Csv::parse(text), &mut checks, &mut all_ok);
    }

    let mut report = String::from("# run report\n\n## checks\n");
    report.push_str(&checks);
    writeln!(report, "overall = {}", if all_ok { "PASS" } else { "FAIL" }).unwrap();
    for (name, text) in &present {
        write!(report, "\n## {name}\n{text}").unwrap();
        if !text.ends_with('\n') {
            report.push('\n');
        }
    }
    out.write("report.txt", &report)?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Check("some recorded checks failed; see report.txt".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_by_name() {
        let csv = Csv::parse("a,pass\n1,true\n2,false\n");
        assert_eq!(csv.column("pass").unwrap(), vec!["true", "false"]);
        assert_eq!(csv.floats("a").unwrap(), vec![1.0, 2.0]);
        assert!(csv.column("b").is_none());
    }

    #[test]
    fn failing_rows_fail_the_check() {
        let mut out = String::new();
        let mut ok = true;
        checks_for("x.csv", &Csv::parse("v,pass\n1,true\n2,false\n"), &mut out, &mut ok);
        assert!(!ok);
        assert!(out.starts_with("FAIL x.csv: 1 of 2"));
    }

    #[test]
    fn blank_energies_are_skipped() {
        let mut out = String::new();
        let mut ok = true;
        let log = "iter,energy,grad_norm,step,cg_iters\n0,,1e-1,1,3\n1,,1e-9,0,0\n";
        checks_for("solve_log.csv", &Csv::parse(log), &mut out, &mut ok);
        assert!(ok);
        assert!(out.contains("1 iterations"));
    }
}
