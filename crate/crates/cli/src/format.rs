//! Locale-independent number formatting and the trajectory file writers.

use coherence_control::{Sample, Trajectory};

pub const CSV_HEADER: &str = "t,vx,vy,vz,purity,coherence,ux,uy,uz";
pub const PLOT_HEADER: &str = "# t ux uy uz vx vy vz purity coherence";

/// Digits used for every number written to a data file.
pub const DATA_DIGITS: usize = 12;

/// Formats `x` with `digits` significant digits in the manner of C's `%#.Ng`
/// (minus the bare trailing decimal point): trailing zeros are kept and
/// scientific notation is used when the decimal exponent is below -4 or at
/// least `digits`. Rounding is half-to-even on the exact binary value.
/// Negative zero prints as zero.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits > 0, "at least one significant digit");
    if !x.is_finite() {
        return x.to_string();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
    }
}

fn columns(s: &Sample) -> [f64; 9] {
    let [vx, vy, vz] = s.state.components();
    [
        s.t,
        vx,
        vy,
        vz,
        s.purity,
        s.coherence,
        s.field.ux,
        s.field.uy,
        s.field.uz,
    ]
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(128 * (traj.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in traj {
        let row: Vec<String> = columns(s).iter().map(|&v| sig(v, DATA_DIGITS)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Whitespace-separated columns for gnuplot; `docs/figure1.gp` lays them out
/// as panels.
pub fn plot_data(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(128 * (traj.len() + 1));
    out.push_str(PLOT_HEADER);
    out.push('\n');
    for s in traj {
        let [t, vx, vy, vz, purity, coherence, ux, uy, uz] = columns(s);
        let row: Vec<String> = [t, ux, uy, uz, vx, vy, vz, purity, coherence]
            .iter()
            .map(|&v| sig(v, DATA_DIGITS))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
