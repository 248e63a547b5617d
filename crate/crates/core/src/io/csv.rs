use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::error::Result;

pub const TRAJECTORY_HEADER: &str = "t,I,E,D,S";

/// Renders `x` with 9 significant digits. Plain decimal notation is used for
/// magnitudes in `[1e-5, 1e15)`, scientific otherwise; trailing zeros are
/// dropped.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Comma-separated rows with a header line and `\n` terminators.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(48 * (traj.samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_number(s.t),
            format_number(s.i),
            format_number(s.e),
            format_number(s.d),
            format_number(if traj.storage { s.s } else { 0.0 })
        );
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    super::write_text_file(path, &trajectory_csv(traj))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    super::write_text_file(path, &render_csv(header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_base, simulate_storage, IntegrationConfig};
    use crate::params::{ModelParameters, StorageParameters};

    #[test]
    fn numbers_have_nine_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(11.636363636363), "11.6363636");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(325.81818181818), "325.818182");
        assert_eq!(format_number(-0.000123456789123), "-0.000123456789");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(2.5e20), "2.5e20");
        assert_eq!(format_number(123456789012.0), "123456789000");
    }

    #[test]
    fn three_samples_give_four_lines() {
        let cfg = IntegrationConfig {
            dt: 1.0,
            t_end: 2.0,
            ..IntegrationConfig::default()
        };
        let traj = simulate_base(&ModelParameters::baseline(), |_| 11.0, &cfg).unwrap();
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,I,E,D,S");
        assert!(lines[1..].iter().all(|l| l.ends_with(",0")));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn storage_column_rises_toward_steady_state() {
        let cfg = IntegrationConfig {
            dt: 0.5,
            t_end: 50.0,
            ..IntegrationConfig::default()
        };
        let traj = simulate_storage(
            &ModelParameters::baseline(),
            &StorageParameters::default(),
            |_| 28.0,
            &cfg,
        )
        .unwrap();
        let csv = trajectory_csv(&traj);
        let s: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }
}
