//! Subcommand implementations. Each writes its human-readable report to
//! `out` and its data files to disk.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coherence_control::{
    breakdown_time, coherence, limit_regime_check, purity, simulate, solve_limit_system, synthesize,
    u_upper_bound, verify, BlochState, ModelParams, SynthesisProblem, Trajectory,
};

use crate::error::CliError;
use crate::format::{plot_data, sig, trajectory_csv};
use crate::scenario::{Scenario, ScheduleRecord, DEFAULT_SAMPLE_STEP};

const REPORT_DIGITS: usize = 12;

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn check_mark(ok: bool) -> &'static str {
    if ok {
        "✓"
    } else {
        "✗"
    }
}

pub fn breakdown(scenario: &Scenario, out: &mut dyn Write) -> Result<(), CliError> {
    let params = scenario.params()?;
    let state = scenario.initial()?;
    let tb = breakdown_time(purity(&state), coherence(&state), params.gamma)?;
    if state.vz() == 0.0 {
        eprintln!("warning: purity equals coherence, so there is no purity reserve; coherence cannot be held constant for any positive time");
    }
    emit(out, &format!("{}\n", sig(tb, 6)))
}

/// Everything `synthesize` reports about a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub gamma: f64,
    pub initial: BlochState,
    pub horizon: f64,
    pub requested_u: Option<f64>,
    pub record: ScheduleRecord,
    pub switch_times: [f64; 2],
    pub breakdown_time: f64,
    pub final_purity: f64,
    pub final_coherence: f64,
    pub coherence_error: f64,
    pub coherence_error_rk4: f64,
    pub residuals: [f64; 2],
    pub oracle_gap: f64,
}

impl RunReport {
    pub fn build(problem: &SynthesisProblem) -> Result<Self, CliError> {
        let result = synthesize(problem)?;
        let check = verify(&result, problem)?;
        let (p, c) = (problem.purity(), problem.coherence());
        Ok(RunReport {
            gamma: problem.gamma(),
            initial: *problem.initial(),
            horizon: problem.horizon(),
            requested_u: problem.fixed_u(),
            record: ScheduleRecord {
                schedule: result.schedule,
                gamma: problem.gamma(),
            },
            switch_times: result.schedule.switch_times(),
            breakdown_time: breakdown_time(p, c, problem.gamma())?,
            final_purity: check.final_purity,
            final_coherence: check.final_coherence,
            coherence_error: check.coherence_error,
            coherence_error_rk4: check.coherence_error_rk4,
            residuals: result.residuals,
            oracle_gap: check.oracle_gap,
        })
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: f64| sig(x, REPORT_DIGITS);
        let sched = &self.record.schedule;
        let [vx, vy, vz] = self.initial.components();
        writeln!(f, "gamma                 {}", s(self.gamma))?;
        writeln!(f, "initial state         ({}, {}, {})", s(vx), s(vy), s(vz))?;
        writeln!(f, "horizon T             {}", s(self.horizon))?;
        match self.requested_u {
            Some(u) => writeln!(f, "field u               {} (fixed)", s(u))?,
            None => writeln!(f, "field u               {} (auto)", s(sched.u()))?,
        }
        writeln!(f, "epsilon               {:+}", sched.epsilon().value() as i32)?;
        writeln!(f, "theta                 {}", s(sched.theta()))?;
        writeln!(f, "dt1                   {}", s(sched.dt1()))?;
        writeln!(f, "dt2                   {}", s(sched.dt2()))?;
        writeln!(f, "dt3                   {}", s(sched.dt3()))?;
        writeln!(
            f,
            "stage switch times    {}, {}",
            s(self.switch_times[0]),
            s(self.switch_times[1])
        )?;
        writeln!(f, "breakdown time t_b    {}", s(self.breakdown_time))?;
        writeln!(f, "final purity          {}", s(self.final_purity))?;
        writeln!(f, "final coherence       {}", s(self.final_coherence))?;
        writeln!(
            f,
            "coherence error       {} (RK4 {})",
            s(self.coherence_error),
            s(self.coherence_error_rk4)
        )?;
        writeln!(
            f,
            "residuals             {}, {}",
            s(self.residuals[0]),
            s(self.residuals[1])
        )?;
        writeln!(f, "oracle gap            {}", s(self.oracle_gap))
    }
}

/// Synthesises a schedule, prints the run report and writes the schedule
/// record to `out_path` (falling back to the scenario's `output_path`).
pub fn synthesize_cmd(
    scenario: &Scenario,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<RunReport, CliError> {
    let problem = scenario.problem()?;
    let path: PathBuf = out_path
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_path.clone())
        .ok_or_else(|| CliError::Config("no schedule destination: pass --out or set output_path".into()))?;
    let report = RunReport::build(&problem)?;
    write_file(&path, &report.record.to_json())?;
    emit(out, &report.to_string())?;
    emit(out, &format!("schedule written to {}\n", path.display()))?;
    Ok(report)
}

/// Where `simulate` takes its schedule from.
pub enum ScheduleSource<'a> {
    Synthesize,
    File(&'a Path),
}

pub fn trajectory(
    scenario: &Scenario,
    source: ScheduleSource<'_>,
    step: Option<f64>,
) -> Result<Trajectory, CliError> {
    let step = step.unwrap_or(scenario.sample_step);
    match source {
        ScheduleSource::Synthesize => {
            let problem = scenario.problem()?;
            let result = synthesize(&problem)?;
            Ok(simulate(
                &result.schedule,
                problem.initial(),
                problem.gamma(),
                step,
            )?)
        }
        ScheduleSource::File(path) => {
            let record = ScheduleRecord::load(path)?;
            ModelParams::new(record.gamma)?;
            Ok(simulate(
                &record.schedule,
                &scenario.initial()?,
                record.gamma,
                step,
            )?)
        }
    }
}

/// Writes the trajectory CSV to `out_path`, the scenario's `output_path`, or
/// `out` when neither is set.
pub fn simulate_cmd(
    scenario: &Scenario,
    source: ScheduleSource<'_>,
    step: Option<f64>,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let traj = trajectory(scenario, source, step)?;
    let csv = trajectory_csv(&traj);
    match out_path
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_path.clone())
    {
        Some(path) => write_file(&path, &csv),
        None => emit(out, &csv),
    }
}

pub fn limit_cmd(scenario: &Scenario, out: &mut dyn Write) -> Result<(), CliError> {
    let params = scenario.params()?;
    let initial = scenario.initial()?;
    let (p, c) = (purity(&initial), coherence(&initial));
    let tb = breakdown_time(p, c, params.gamma)?;
    let limit = solve_limit_system(&params, &initial)?;
    let bound = u_upper_bound(params.gamma, p, c)?;
    let s = |x: f64| sig(x, REPORT_DIGITS);

    let mut text = String::new();
    let mut line = |label: &str, value: String| text.push_str(&format!("{label:<22}{value}\n"));
    line("u_tilde", s(limit.u_tilde));
    line("dt1_tilde", s(limit.dt1_tilde));
    line("dt3_tilde", s(limit.dt3_tilde));
    line("T_tilde", s(limit.t_tilde));
    line("residuals", limit.residuals.map(s).join(", "));
    line("sign changes", limit.sign_changes.to_string());
    line("final vz", s(limit.final_vz));
    line("final coherence", s(limit.final_coherence));
    line("breakdown time t_b", s(tb));
    line("T_tilde > t_b", check_mark(limit.t_tilde > tb).into());
    line("xi", s(bound.xi));
    line("xi residual", s(bound.residual));
    line("u_tilde <= xi", check_mark(limit.u_tilde <= bound.xi).into());
    if let Some(horizon) = scenario.horizon {
        let problem = SynthesisProblem::new(params, initial, horizon, scenario.u)?;
        line(
            "regime at horizon_T",
            format!("{:?}", limit_regime_check(&problem, &limit)),
        );
    }
    emit(out, &text)
}

/// Built-in example: γ = 0.1, p = 0.8, c = 0.3, u = 0.2, T = 20.
pub fn example_scenario() -> Scenario {
    Scenario {
        gamma: 0.1,
        vx: None,
        vy: None,
        vz: None,
        purity: Some(0.8),
        coherence: Some(0.3),
        theta: Some(0.0),
        vz_sign: Some(1),
        horizon: Some(20.0),
        u: Some(0.2),
        sample_step: DEFAULT_SAMPLE_STEP,
        output_path: None,
    }
}

pub const EXAMPLE_CSV: &str = "figure1.csv";
pub const EXAMPLE_PLOT: &str = "figure1.dat";

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub quantity: &'static str,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
}

impl Comparison {
    pub fn passes(&self) -> bool {
        (self.computed - self.expected).abs() <= self.tolerance
    }
}

pub fn example_comparisons(report: &RunReport) -> Vec<Comparison> {
    let sched = &report.record.schedule;
    let rows = [
        ("breakdown time t_b", 16.67, report.breakdown_time, 0.005),
        ("dt1", 5.79, sched.dt1(), 0.01),
        ("dt3", 9.11, sched.dt3(), 0.01),
        ("final purity", 0.63, report.final_purity, 0.005),
        ("final coherence", 0.3, report.final_coherence, 1e-9),
    ];
    rows.into_iter()
        .map(|(quantity, expected, computed, tolerance)| Comparison {
            quantity,
            expected,
            computed,
            tolerance,
        })
        .collect()
}

/// Runs the built-in example, prints the comparison table and writes the
/// trajectory CSV and plot data into `dir`.
pub fn reproduce_example(dir: &Path, out: &mut dyn Write) -> Result<Vec<Comparison>, CliError> {
    let scenario = example_scenario();
    let report = RunReport::build(&scenario.problem()?)?;
    let traj = trajectory(&scenario, ScheduleSource::Synthesize, None)?;
    write_file(&dir.join(EXAMPLE_CSV), &trajectory_csv(&traj))?;
    write_file(&dir.join(EXAMPLE_PLOT), &plot_data(&traj))?;

    let comparisons = example_comparisons(&report);
    let mut text = format!(
        "{:<20}{:>10}{:>18}{:>12}  ok\n",
        "quantity", "expected", "computed", "tolerance"
    );
    for cmp in &comparisons {
        text.push_str(&format!(
            "{:<20}{:>10}{:>18}{:>12}  {}\n",
            cmp.quantity,
            cmp.expected,
            sig(cmp.computed, 12),
            format!("{:e}", cmp.tolerance),
            check_mark(cmp.passes())
        ));
    }
    text.push_str(&format!(
        "wrote {} and {} to {}\n",
        EXAMPLE_CSV,
        EXAMPLE_PLOT,
        dir.display()
    ));
    emit(out, &text)?;

    let failed = comparisons.iter().filter(|c| !c.passes()).count();
    if failed > 0 {
        return Err(CliError::Mismatch(failed));
    }
    Ok(comparisons)
}
