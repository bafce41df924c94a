//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Run with `cargo test --test acceptance`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use entbat::battery::{
    continuity_bound_check, conversion_rate, feasible, multi_measure_bound, rate_cycle_product,
    search_nonequivalent_pair, swap_protocol, Verdict, SEARCH_BUDGET, ZERO_RESOURCE,
};
use entbat::dilution::{embezzlement_demo, self_dilution_curve, DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_MIN, DEFAULT_STEPS};
use entbat::measures::{evaluate, log_negativity, MeasureId, OptimizerOptions};
use entbat::par::Execution;
use entbat::qmat::{binary_entropy, tensor, BipartiteState, ComplexMatrix};
use entbat::random::{haar_pure, induced_mixed, noisy_pure, trial_rng};
use entbat::states::{bell, maximally_correlated_lami, pure_alpha};
use entbat::thermo::{
    f_max, free_energy, renyi_free_energy, thermo_self_dilution, FreeEnergyVariant, ThermoState,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn err(e: entbat::Error) -> String {
    e.to_string()
}

// 1. Log-negativity: exact on Bell, additive on random pairs.
fn log_negativity_exactness() -> Check {
    let t = Instant::now();
    let e = log_negativity(&bell()).value;
    ensure((e - 1.0).abs() <= 1e-10, || format!("E_n(Bell) = {e}"))?;
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = trial_rng(101, i);
        let a = noisy_pure(2, 2, &mut rng);
        let b = induced_mixed(2, 2, 2, &mut rng);
        let joint = tensor(&a, &b).map_err(err)?;
        let gap = (log_negativity(&joint).value - log_negativity(&a).value - log_negativity(&b).value).abs();
        worst = worst.max(gap);
    }
    ensure(worst <= 1e-8, || format!("additivity gap {worst:.2e}"))?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("E_n(Bell) = {e:.12}, worst additivity gap {worst:.1e} over 50 pairs"))
}

// 2. Self-dilution curve.
fn self_dilution_curve_reproduction() -> Check {
    let t = Instant::now();
    let pts = self_dilution_curve(DEFAULT_ALPHA_MIN, DEFAULT_ALPHA_MAX, DEFAULT_STEPS, Execution::Parallel).map_err(err)?;
    ensure(pts.len() == 200, || format!("{} points", pts.len()))?;
    let last = pts.last().unwrap();
    ensure(last.alpha == FRAC_PI_4 && (last.ratio - 1.0).abs() <= 1e-9, || format!("ratio(pi/4) = {}", last.ratio))?;
    ensure(pts[..199].iter().all(|p| p.ratio > 1.0), || "ratio <= 1 below pi/4".into())?;
    let at = |a: f64| entbat::dilution::curve_point(a).map(|p| p.ratio).map_err(err);
    let (r001, r01, r05) = (at(0.01)?, at(0.1)?, at(0.5)?);
    ensure(r001 > r01 && r01 > r05, || format!("ratios {r001}, {r01}, {r05} not decreasing"))?;
    let mut worst = 0.0f64;
    for p in &pts {
        let closed = (1.0 + (2.0 * p.alpha).sin()).log2() / binary_entropy(p.alpha.cos().powi(2)).map_err(err)?;
        worst = worst.max((p.ratio - closed).abs());
    }
    ensure(worst <= 1e-9, || format!("closed-form mismatch {worst:.2e}"))?;
    within(t.elapsed(), Duration::from_secs(5))?;
    Ok(format!("200 points, ratio(0.01) = {r001:.3}, max closed-form gap {worst:.1e}"))
}

// 3. Feasibility, swap and rate mechanics on random pairs.
fn feasibility_and_swap_mechanics() -> Check {
    let t = Instant::now();
    let opts = OptimizerOptions::default();
    let mut cycles = 0;
    for (measure, mixed) in [(MeasureId::EntropyOfEntanglement, false), (MeasureId::LogNegativity, true)] {
        for i in 0..100 {
            let mut rng = trial_rng(303, i + if mixed { 1000 } else { 0 });
            let (a, b) = if mixed {
                (induced_mixed(2, 2, 2, &mut rng), noisy_pure(2, 2, &mut rng))
            } else {
                let da = rng.gen_range(2..=3);
                let db = rng.gen_range(2..=3);
                (haar_pure(da, db, &mut rng), haar_pure(2, rng.gen_range(2..=3), &mut rng))
            };
            let ea = evaluate(measure, &a, &opts).map_err(err)?.value;
            let eb = evaluate(measure, &b, &opts).map_err(err)?.value;
            let v = feasible(&a, &b, measure, &opts).map_err(err)?;
            let expect = if ea >= eb { Verdict::Feasible } else { Verdict::Infeasible };
            ensure(v == expect, || format!("{measure} pair {i}: verdict {v:?} for E = {ea} vs {eb}"))?;
            let (hi, lo) = if ea >= eb { (&a, &b) } else { (&b, &a) };
            let r = swap_protocol(hi, lo, measure, &opts).map_err(err)?;
            ensure(r.final_system_trace_distance_to_target <= 1e-12, || {
                format!("{measure} pair {i}: final distance {:.2e}", r.final_system_trace_distance_to_target)
            })?;
            ensure(r.e_battery_after >= r.e_battery_before - 1e-12, || format!("{measure} pair {i}: battery dropped"))?;
            if ea.min(eb) > ZERO_RESOURCE {
                let c = rate_cycle_product(&a, &b, measure, &opts).map_err(err)?;
                ensure((c - 1.0).abs() <= 1e-12, || format!("{measure} pair {i}: cycle product {c}"))?;
                cycles += 1;
            }
        }
    }
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!("200 verdicts and swaps exact, {cycles} cycle products equal 1"))
}

// 4. Rational and irrational rate plans.
fn rate_plans() -> Check {
    let opts = OptimizerOptions::default();
    let bb = tensor(&bell(), &bell()).map_err(err)?;
    let p = conversion_rate(&bb, &bell(), MeasureId::LogNegativity, &opts).map_err(err)?;
    ensure(p.exact && (p.m, p.n) == (2, 1), || format!("Bell x Bell -> Bell plan {p:?}"))?;
    let alpha = pure_alpha(FRAC_PI_8).map_err(err)?.to_state();
    let q = conversion_rate(&alpha, &bell(), MeasureId::EntropyOfEntanglement, &opts).map_err(err)?;
    let below = q.m as f64 / q.n as f64;
    ensure(!q.exact && below <= q.rate && q.rate - below < 1e-6, || format!("irrational plan {q:?}"))?;
    Ok(format!("(2, 1) exact; {}/{} below {:.12} by {:.1e}", q.m, q.n, q.rate, q.epsilon_gap))
}

// 5. Relative-entropy optimizer calibration.
fn relative_entropy_calibration() -> Check {
    let t = Instant::now();
    let opts = OptimizerOptions { restarts: 8, ..OptimizerOptions::default() };
    let er = |s: &BipartiteState| evaluate(MeasureId::RelativeEntropy, s, &opts).map(|r| r.value).map_err(err);
    let b = er(&bell())?;
    ensure((0.995..=1.005).contains(&b), || format!("E_r(Bell) = {b}"))?;
    let l = er(&maximally_correlated_lami())?;
    ensure((l - 1.5f64.log2()).abs() <= 5e-3, || format!("E_r(lami) = {l}"))?;
    let m = er(&BipartiteState::maximally_mixed(2, 2))?;
    ensure(m <= 1e-4, || format!("E_r(I/4) = {m}"))?;
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(format!("Bell {b:.6}, lami {l:.6} (log2 1.5 = {:.6}), I/4 {m:.1e}", 1.5f64.log2()))
}

// 6. Continuity bound with spectators.
fn continuity_bound_holds() -> Check {
    let t = Instant::now();
    let opts = OptimizerOptions { restarts: 3, ..OptimizerOptions::default() };
    let mut min_margin = f64::INFINITY;
    for i in 0..100u64 {
        let mut rng = trial_rng(606, i);
        let (da, db, tau) = match i % 4 {
            0 => (2, 2, induced_mixed(2, 2, 2, &mut rng)),
            1 => (2, 3, BipartiteState::trivial()),
            2 => (2, 2, induced_mixed(2, 1, 2, &mut rng)),
            _ => (2, 2, BipartiteState::trivial()),
        };
        let rho = induced_mixed(da, db, rng.gen_range(1..=3), &mut rng);
        let other = induced_mixed(da, db, 2, &mut rng);
        let sigma = rho.mix(&other, 1.0 - rng.gen_range(0.0..0.3)).map_err(err)?;
        let total = rho.dim() * tau.dim();
        ensure(total <= 16, || format!("triple {i} has dimension {total}"))?;
        let c = continuity_bound_check(&rho, &sigma, &tau, &opts).map_err(err)?;
        min_margin = min_margin.min(c.rhs + 2.0 * opts.slack - c.lhs);
        ensure(c.holds, || format!("triple {i}: lhs {} > rhs {} (eps {})", c.lhs, c.rhs, c.epsilon))?;
    }
    within(t.elapsed(), Duration::from_secs(600))?;
    Ok(format!("100 triples, smallest margin {min_margin:.3e}"))
}

// 7. Multi-measure irreversibility.
fn multi_measure_irreversibility() -> Check {
    let opts = OptimizerOptions::default();
    let (ln, er) = (MeasureId::LogNegativity, MeasureId::RelativeEntropy);
    let pair = search_nonequivalent_pair(ln, er, 7, SEARCH_BUDGET, &opts).map_err(err)?;
    let b = multi_measure_bound(&pair.rho, &pair.sigma, ln, er, &opts).map_err(err)?;
    ensure(b.product < 1.0 - 1e-3, || format!("product {}", b.product))?;
    Ok(format!("pair after {} samples, product of bounds {:.6}", pair.samples, b.product))
}

// 8. Embezzlement with a geometric battery.
fn embezzlement() -> Check {
    let d: Vec<usize> = (2..=17).collect();
    let rows = embezzlement_demo(&d, &OptimizerOptions::default()).map_err(err)?;
    for r in &rows {
        ensure((r.e_g - 0.5).abs() <= 1e-12, || format!("e_g(psi_{}) = {}", r.d, r.e_g))?;
        ensure(r.battery_feasible, || format!("battery refused d = {}", r.d))?;
    }
    let amp = |d: usize| rows.iter().find(|r| r.d == d).map(|r| r.amplification).unwrap_or(f64::NAN);
    ensure(amp(5) == 2.0 && amp(17) == 3.0, || format!("amplification {} and {}", amp(5), amp(17)))?;
    Ok("e_g = 1/2 for d = 2..17, amplification 2 at d = 5 and 3 at d = 17".into())
}

// 9. Thermodynamics.
fn thermodynamics() -> Check {
    let mut worst = f64::INFINITY;
    for i in 0..200 {
        let mut rng = trial_rng(909, i);
        let d = rng.gen_range(2..=3);
        let energies: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
        let beta = rng.gen_range(0.2..3.0);
        let m = induced_mixed(d, 1, rng.gen_range(1..=3), &mut rng).matrix().clone();
        let rho = if i % 2 == 0 { m } else { ComplexMatrix::from_real_diagonal(&m.real_diagonal()) };
        let s = ThermoState::new(rho, energies, beta).map_err(err)?;
        let gap = f_max(&s).map_err(err)?.f - free_energy(&s, FreeEnergyVariant::RelativeToGibbs).map_err(err)?.f;
        worst = worst.min(gap);
        ensure(gap >= -1e-9, || format!("state {i}: F_max below S(rho||gamma) by {gap:.2e}"))?;
        if s.is_incoherent() {
            let grid = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];
            let v: Vec<f64> = grid.iter().map(|&a| renyi_free_energy(&s, a).map(|x| x.f)).collect::<Result<_, _>>().map_err(err)?;
            ensure(v.windows(2).all(|w| w[1] >= w[0] - 1e-9), || format!("state {i}: Renyi not monotone {v:?}"))?;
        }
    }
    let qubit = |p: f64| ThermoState::diagonal(&[1.0 - p, p], vec![0.0, 1.0], 1.0).map_err(err);
    for p in [0.0, 1.0] {
        let sd = thermo_self_dilution(&qubit(p)?).map_err(err)?;
        ensure(sd.equality, || format!("p = {p}: product {}", sd.product))?;
    }
    let g = ThermoState::gibbs_state(vec![0.0, 1.0], 1.0).map_err(err)?;
    ensure(thermo_self_dilution(&g).map_err(err)?.equality, || "Gibbs state not an equality case".into())?;
    for k in 1..20 {
        let p = k as f64 / 20.0;
        let sd = thermo_self_dilution(&qubit(p)?).map_err(err)?;
        ensure(sd.product > 1.0 + 1e-9 || (p - g.gibbs_populations()[1]).abs() < 1e-12, || {
            format!("p = {p}: product {}", sd.product)
        })?;
    }
    let a = ThermoState::diagonal(&[0.6, 0.4], vec![0.0, 1.0], 1.0).map_err(err)?;
    let b = ThermoState::diagonal(&[0.2, 0.3, 0.5], vec![0.0, 0.5, 2.0], 1.0).map_err(err)?;
    let f = |s: &ThermoState| free_energy(s, FreeEnergyVariant::StandardOffset).map(|x| x.f).map_err(err);
    let add = (f(&a.compose(&b).map_err(err)?)? - f(&a)? - f(&b)?).abs();
    ensure(add <= 1e-9, || format!("additivity gap {add:.2e}"))?;
    Ok(format!("min F_max - F over 200 states {worst:.2e}; self-dilution equality cases exact"))
}

// 10. Deterministic CLI output.
fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_entbat")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn cli_determinism() -> Check {
    let lami = fixture("lami.json");
    let werner = fixture("werner_09.json");
    let lami = lami.to_str().unwrap();
    let werner = werner.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["measure", "--measure", "relative-entropy", "--state", lami, "--seed", "5", "--details"],
        vec!["rate", "--measure", "relative-entropy", "--from", lami, "--to", werner, "--seed", "5"],
        vec!["search-pair", "--m1", "log-negativity", "--m2", "relative-entropy", "--seed", "3"],
        vec!["dilution-curve"],
        vec!["embezzle-demo"],
    ];
    for args in &runs {
        let first = cli(args)?;
        let second = cli(args)?;
        ensure(first == second, || format!("{args:?} differs between runs"))?;
        let mut seq = args.clone();
        seq.push("--sequential");
        let third = cli(&seq)?;
        ensure(first == third, || format!("{args:?} differs with --sequential"))?;
        ensure(!first.is_empty(), || format!("{args:?} printed nothing"))?;
    }
    let reference = cli(&["measure", "--measure", "log-negativity", "--state", fixture("bell.json").to_str().unwrap()])?;
    ensure(reference == b"1.000000000000\n", || format!("Bell output {:?}", String::from_utf8_lossy(&reference)))?;
    Ok(format!("{} invocations byte-identical across runs and execution modes", runs.len()))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("log-negativity exactness and additivity", log_negativity_exactness),
        ("self-dilution curve", self_dilution_curve_reproduction),
        ("battery feasibility, swap and rate mechanics", feasibility_and_swap_mechanics),
        ("rational and irrational rate plans", rate_plans),
        ("relative-entropy optimizer calibration", relative_entropy_calibration),
        ("asymptotic continuity bound", continuity_bound_holds),
        ("multi-measure irreversibility", multi_measure_irreversibility),
        ("geometric-battery embezzlement", embezzlement),
        ("thermodynamic battery", thermodynamics),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
