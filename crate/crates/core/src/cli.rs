//! The `entbat` command line.
//!
//! Results go to stdout as `key value` lines (or CSV for the tables), with
//! numbers in the fixed format of [`crate::numfmt`]. Failures print
//! `error: <kind>: <detail>` to stderr and exit with status 1; malformed
//! invocations exit with status 2.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::battery::{
    continuity_bound_check, conversion_rate, feasible, multi_measure_bound, resource_balance_check,
    search_nonequivalent_pair, swap_protocol, zero_error_rate, RatePlan, SEARCH_BUDGET,
};
use crate::dilution::{
    curve_csv, embezzlement_csv, embezzlement_demo, self_dilution_curve, DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_MIN,
    DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::measures::{evaluate, MeasureId, OptimizerOptions};
use crate::numfmt::format_value;
use crate::par::Execution;
use crate::qmat::BipartiteState;
use crate::states::{load_state, save_state};
use crate::thermo::{
    f_max, free_energy, load_thermo, thermo_feasible, thermo_self_dilution, thermo_swap_protocol, FreeEnergyVariant,
};

#[derive(Debug, Parser)]
#[command(
    name = "entbat",
    version,
    about = "Entanglement and free-energy batteries: measures, feasibility, swap protocols and rates",
    long_about = "Entanglement and free-energy batteries.\n\n\
        A transformation rho -> sigma is allowed with a battery when the battery's value of a fixed \
        monotone E does not drop. For an additive E that happens exactly when E(rho) >= E(sigma), \
        and the asymptotic rate is E(rho)/E(sigma).\n\n\
        States are read from JSON files; see the README for the schema."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Random restarts of the relative-entropy optimizer.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    /// Convergence tolerance on the objective (bits).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for restarts and random searches.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run everything on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

impl OptimizerArgs {
    pub fn options(&self) -> OptimizerOptions {
        OptimizerOptions {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
            execution: if self.sequential { Execution::Sequential } else { Execution::Parallel },
            ..OptimizerOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Initial state file (rho).
    #[arg(long, value_name = "FILE")]
    pub from: PathBuf,
    /// Target state file (sigma).
    #[arg(long, value_name = "FILE")]
    pub to: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one entanglement measure on a state.
    #[command(long_about = "Evaluate one entanglement measure on a state.\n\n\
        log-negativity is log2 of the trace norm of the partial transpose; relative-entropy is the \
        separable-ansatz upper bound on min over separable s of S(rho||s); squashed-upper is \
        I(A;B)/2. The pure-only measures (entropy-of-entanglement, geometric, squashed-pure, \
        entanglement-cost-pure) reject mixed input.")]
    Measure {
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[arg(long, value_name = "FILE")]
        state: PathBuf,
        /// Also print slack, convergence and iteration count.
        #[arg(long)]
        details: bool,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Decide rho -> sigma with a battery: feasible iff E(rho) >= E(sigma).
    #[command(long_about = "Decide rho -> sigma with a battery scored by E.\n\n\
        The transformation is possible iff E(rho) >= E(sigma) for a finite additive monotone. \
        Optimizer-backed values whose gap is within the combined slack report `undecided`.")]
    Feasible {
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Asymptotic rate E(rho)/E(sigma) and the largest m/n below it.
    #[command(long_about = "Asymptotic conversion rate R(rho -> sigma) = E(rho)/E(sigma).\n\n\
        Also prints the best lower rational approximation m/n (n <= 10^6) from continued-fraction \
        semiconvergents, so that n copies of rho yield m copies of sigma by the swap protocol.")]
    Rate {
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Zero-error rate E(rho)/E(sigma); additive measures only.
    #[command(name = "zero-error", long_about = "Zero-error conversion rate.\n\n\
        With the output required exactly, R_ze(rho -> sigma) = E(rho)/E(sigma) for any additive \
        measure (log-negativity, entropy-of-entanglement, entanglement-cost-pure).")]
    ZeroError {
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Run the swap protocol with the battery prepared in the target.
    #[command(long_about = "Run the battery swap protocol.\n\n\
        The battery starts in sigma; Alice swaps A with A' and Bob swaps B with B'. The system ends \
        in sigma exactly and the battery in rho, so E(battery) goes from E(sigma) to E(rho). For an \
        additive E the resource balance f(system before) - f(system after) = f(battery after) - \
        f(battery before) is also checked.")]
    Swap {
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureId,
        #[command(flatten)]
        pair: PairArgs,
        /// Write the final global state (system, battery) to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Rate bounds when the battery must preserve two measures.
    #[command(name = "multi-measure", long_about = "Rate bounds with two battery measures.\n\n\
        R(rho -> sigma) <= min{E1(rho)/E1(sigma), E2(rho)/E2(sigma)}; when E1 and E2 order the pair \
        oppositely the product of forward and backward bounds is below 1.")]
    MultiMeasure {
        #[arg(long, value_parser = parse_measure)]
        m1: MeasureId,
        #[arg(long, value_parser = parse_measure)]
        m2: MeasureId,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Check the asymptotic-continuity bound of the relative entropy of entanglement.
    #[command(name = "continuity-check", long_about = "Asymptotic continuity of E_r with a spectator.\n\n\
        |E_r(rho x tau) - E_r(sigma x tau)| <= eps log2 d_AB + (1 + eps) h(eps / (1 + eps)) with \
        eps = ||rho - sigma||_1 / 2, allowing twice the optimizer slack.")]
    ContinuityCheck {
        #[command(flatten)]
        pair: PairArgs,
        /// Spectator state; trivial when omitted.
        #[arg(long, value_name = "FILE")]
        tau: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Thermodynamic battery: free energies, feasibility and self-dilution.
    Thermo {
        #[command(subcommand)]
        command: ThermoCommand,
    },
    /// CSV of E_n/E_c along cos(a)|00> + sin(a)|11>.
    #[command(name = "dilution-curve", long_about = "Self-dilution curve.\n\n\
        For psi_a = cos(a)|00> + sin(a)|11> prints a, E_n(psi_a), E_c(psi_a) and their ratio, the \
        number of copies of psi_a obtainable per copy with a log-negativity battery. The ratio is \
        above 1 except at a = pi/4 and diverges as a -> 0.")]
    DilutionCurve {
        #[arg(long, default_value_t = DEFAULT_ALPHA_MIN)]
        alpha_min: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA_MAX)]
        alpha_max: f64,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Write CSV here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Geometric-battery embezzlement table.
    #[command(name = "embezzle-demo", long_about = "Embezzlement with a geometric-entanglement battery.\n\n\
        psi_d = (|00> + (|11> + ... + |d-1,d-1>)/sqrt(d-1))/sqrt(2) has geometric entanglement 1/2 \
        for every d, the same as a Bell pair, while its entanglement entropy 1 + log2(d-1)/2 grows \
        without bound. The swap protocol accepts Bell -> psi_d under this battery.")]
    EmbezzleDemo {
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17")]
        d: Vec<usize>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Seeded search for a pair ordered oppositely by two measures.
    #[command(name = "search-pair", long_about = "Search for E1(rho) > E1(sigma) with E2(rho) < E2(sigma).\n\n\
        Samples noisy two-qubit pure states (pure states when a measure is pure-only) until two \
        samples are ordered oppositely by at least 1e-3, then prints their values and the \
        multi-measure rate bounds.")]
    SearchPair {
        #[arg(long, value_parser = parse_measure)]
        m1: MeasureId,
        #[arg(long, value_parser = parse_measure)]
        m2: MeasureId,
        #[arg(long, default_value_t = SEARCH_BUDGET)]
        budget: usize,
        /// Save rho here.
        #[arg(long, value_name = "FILE")]
        save_rho: Option<PathBuf>,
        /// Save sigma here.
        #[arg(long, value_name = "FILE")]
        save_sigma: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    StandardOffset,
    RelativeToGibbs,
    Max,
    Renyi,
}

#[derive(Debug, Subcommand)]
pub enum ThermoCommand {
    /// Free energy in bits with k_B T = 1.
    #[command(name = "free-energy", long_about = "Free energy in bits (k_B T = 1).\n\n\
        standard-offset: F = S(rho||gamma) - log2 Z; relative-to-gibbs: S(rho||gamma); \
        max: F_max = log2 lambda_max(gamma^-1/2 rho gamma^-1/2); renyi: D_alpha between the \
        populations of an incoherent state and gamma.")]
    FreeEnergy {
        #[arg(long, value_name = "FILE")]
        state: PathBuf,
        #[arg(long, value_enum, default_value = "standard-offset")]
        variant: VariantArg,
        /// Order for the renyi variant (`inf` allowed).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// F_max = inf{log2 lambda : rho <= lambda gamma}.
    #[command(name = "f-max")]
    FMax {
        #[arg(long, value_name = "FILE")]
        state: PathBuf,
    },
    /// Feasible iff F(rho, H1) >= F(sigma, H2) at a common temperature.
    #[command(long_about = "Thermal-operation feasibility with a free-energy battery.\n\n\
        (rho, H1) -> (sigma, H2) is possible iff F(rho, H1) >= F(sigma, H2), where \
        F = S(rho||gamma) - log2 Z includes the partition-function offset. The swap of system and \
        battery, Hamiltonians included, is run and reported when feasible.")]
    Feasible {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// r, r' and r r' = F_max(rho)/F(rho) for an incoherent qubit.
    #[command(name = "self-dilution", long_about = "Thermodynamic self-dilution of an incoherent qubit.\n\n\
        r = F_max(rho)/F_max(|1><1|) and r' = F(|1><1|)/F(rho) with F = S(rho||gamma); the product \
        is >= 1 with equality only for p in {0, 1} or rho = gamma.")]
    SelfDilution {
        #[arg(long, value_name = "FILE")]
        state: PathBuf,
    },
}

fn parse_measure(s: &str) -> std::result::Result<MeasureId, String> {
    s.parse::<MeasureId>().map_err(|_| {
        let names: Vec<&str> = MeasureId::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown measure `{s}` (expected one of: {})", names.join(", "))
    })
}

/// Ordered `key value` lines.
#[derive(Default)]
struct Report(Vec<(String, String)>);

impl Report {
    fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.push((key.into(), format_value(v)));
        self
    }

    fn text(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.0.push((key.into(), v.to_string()));
        self
    }

    fn plan(&mut self, p: &RatePlan) -> &mut Self {
        self.num("rate", p.rate)
            .text("m", p.m)
            .text("n", p.n)
            .num("gap", p.epsilon_gap)
            .text("exact", p.exact)
            .text("zero_error", p.zero_error)
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} {v}\n")).collect()
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_pair(p: &PairArgs) -> Result<(BipartiteState, BipartiteState)> {
    Ok((load_state(&p.from)?, load_state(&p.to)?))
}

fn execute(cmd: Command) -> Result<String> {
    let mut r = Report::default();
    match cmd {
        Command::Measure { measure, state, details, opt } => {
            let res = evaluate(measure, &load_state(state)?, &opt.options())?;
            if !details {
                return Ok(format_value(res.value) + "\n");
            }
            r.num("value", res.value)
                .num("slack", res.slack)
                .text("converged", res.converged)
                .text("iterations", res.iterations);
        }
        Command::Feasible { measure, pair, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            let opts = opt.options();
            let e_rho = evaluate(measure, &rho, &opts)?.value;
            let e_sigma = evaluate(measure, &sigma, &opts)?.value;
            r.text("verdict", feasible(&rho, &sigma, measure, &opts)?.as_str())
                .num("e_from", e_rho)
                .num("e_to", e_sigma);
        }
        Command::Rate { measure, pair, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            r.plan(&conversion_rate(&rho, &sigma, measure, &opt.options())?);
        }
        Command::ZeroError { measure, pair, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            r.plan(&zero_error_rate(&rho, &sigma, measure, &opt.options())?);
        }
        Command::Swap { measure, pair, out, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            let opts = opt.options();
            let rep = swap_protocol(&rho, &sigma, measure, &opts)?;
            r.text("feasible", rep.feasible)
                .num("battery_before", rep.e_battery_before)
                .num("battery_after", rep.e_battery_after)
                .num("system_trace_distance", rep.final_system_trace_distance_to_target)
                .num("global_trace_distance", rep.final_global_trace_distance);
            if measure.is_additive() {
                let b = resource_balance_check(&rep, measure, &opts)?;
                r.num("balance_system_drop", b.lhs).num("balance_battery_gain", b.rhs).text("balance_holds", b.holds);
            }
            if let Some(path) = out {
                save_state(&rep.final_global, path)?;
            }
        }
        Command::MultiMeasure { m1, m2, pair, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            let b = multi_measure_bound(&rho, &sigma, m1, m2, &opt.options())?;
            r.num("r_fwd_bound", b.r_fwd_bound).num("r_bwd_bound", b.r_bwd_bound).num("product", b.product);
        }
        Command::ContinuityCheck { pair, tau, opt } => {
            let (rho, sigma) = load_pair(&pair)?;
            let tau = match tau {
                Some(p) => load_state(p)?,
                None => BipartiteState::trivial(),
            };
            let c = continuity_bound_check(&rho, &sigma, &tau, &opt.options())?;
            r.num("epsilon", c.epsilon).num("lhs", c.lhs).num("rhs", c.rhs).text("holds", c.holds);
        }
        Command::Thermo { command } => return thermo(command),
        Command::DilutionCurve { alpha_min, alpha_max, steps, out, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let csv = curve_csv(&self_dilution_curve(alpha_min, alpha_max, steps, exec)?);
            return emit(csv, out);
        }
        Command::EmbezzleDemo { d, out, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let opts = OptimizerOptions { execution: exec, ..OptimizerOptions::default() };
            return emit(embezzlement_csv(&embezzlement_demo(&d, &opts)?), out);
        }
        Command::SearchPair { m1, m2, budget, save_rho, save_sigma, opt } => {
            let p = search_nonequivalent_pair(m1, m2, opt.seed, budget, &opt.options())?;
            r.text("samples", p.samples)
                .num("e1_rho", p.e1.0)
                .num("e1_sigma", p.e1.1)
                .num("e2_rho", p.e2.0)
                .num("e2_sigma", p.e2.1)
                .num("r_fwd_bound", p.bound.r_fwd_bound)
                .num("r_bwd_bound", p.bound.r_bwd_bound)
                .num("product", p.bound.product);
            if let Some(path) = save_rho {
                save_state(&p.rho, path)?;
            }
            if let Some(path) = save_sigma {
                save_state(&p.sigma, path)?;
            }
        }
    }
    Ok(r.render())
}

fn emit(text: String, out: Option<PathBuf>) -> Result<String> {
    match out {
        Some(path) => write_text(&path, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

fn thermo(cmd: ThermoCommand) -> Result<String> {
    let mut r = Report::default();
    match cmd {
        ThermoCommand::FreeEnergy { state, variant, alpha } => {
            let s = load_thermo(state)?;
            let variant = match (variant, alpha) {
                (VariantArg::Renyi, Some(a)) => FreeEnergyVariant::Renyi(a),
                (VariantArg::Renyi, None) => {
                    return Err(Error::Domain("the renyi variant needs --alpha".into()));
                }
                (_, Some(_)) => return Err(Error::Domain("--alpha only applies to the renyi variant".into())),
                (VariantArg::StandardOffset, None) => FreeEnergyVariant::StandardOffset,
                (VariantArg::RelativeToGibbs, None) => FreeEnergyVariant::RelativeToGibbs,
                (VariantArg::Max, None) => FreeEnergyVariant::Max,
            };
            return Ok(format_value(free_energy(&s, variant)?.f) + "\n");
        }
        ThermoCommand::FMax { state } => return Ok(format_value(f_max(&load_thermo(state)?)?.f) + "\n"),
        ThermoCommand::Feasible { pair } => {
            let (s1, s2) = (load_thermo(&pair.from)?, load_thermo(&pair.to)?);
            let v = thermo_feasible(&s1, &s2)?;
            r.text("verdict", v.as_str())
                .num("f_from", free_energy(&s1, FreeEnergyVariant::StandardOffset)?.f)
                .num("f_to", free_energy(&s2, FreeEnergyVariant::StandardOffset)?.f);
            if v == crate::battery::Verdict::Feasible {
                let rep = thermo_swap_protocol(&s1, &s2)?;
                r.num("battery_before", rep.f_battery_before)
                    .num("battery_after", rep.f_battery_after)
                    .num("system_trace_distance", rep.final_system_trace_distance_to_target);
            }
        }
        ThermoCommand::SelfDilution { state } => {
            let sd = thermo_self_dilution(&load_thermo(state)?)?;
            let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), format_value);
            r.text("r", opt(sd.r))
                .text("r_prime", opt(sd.r_prime))
                .num("product", sd.product)
                .text("equality", sd.equality)
                .text("at_gibbs", sd.at_gibbs);
        }
    }
    Ok(r.render())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("entbat").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_has_help() {
        for sub in Cli::command().get_subcommands() {
            assert!(sub.get_about().is_some(), "{}", sub.get_name());
        }
        let (code, out, _) = run_str(&["rate", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("E(rho)/E(sigma)"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&[]).0, 2);
        assert_eq!(run_str(&["measure", "--state", "x.json"]).0, 2);
        let (code, _, err) = run_str(&["measure", "--measure", "concurrence", "--state", "x.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown measure"));
    }

    #[test]
    fn domain_errors_exit_1() {
        let (code, out, err) = run_str(&["measure", "--measure", "log-negativity", "--state", "/nonexistent/x.json"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.starts_with("error: io: "), "{err}");
        let (code, _, err) = run_str(&["dilution-curve", "--alpha-min", "0"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: domain: "));
    }
}
