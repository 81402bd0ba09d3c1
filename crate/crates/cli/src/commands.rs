use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hinf_pi::lti::{
    closed_loop, effort_map, frequency_response, rejection_map_optimal, FrequencyGrid, FrequencyResponse,
    IntegratorRealization, Plant,
};
use hinf_pi::network::{decentralized_realization, DecentralizedLaw};
use hinf_pi::simulation::step_response;
use hinf_pi::synthesis::{synthesize, synthesize_unchecked, tau_min, PiController};
use hinf_pi::verification::{
    check_tau_violation, verify_instance, verify_network, VerificationConfig, VerificationReport, ViolationEvidence,
};
use serde::Serialize;

use crate::document::{demo_document, Instance, SystemDocument, TauChoice, DEMOS};
use crate::error::CliError;
use crate::format::{matrix, pattern, sig, write_csv, write_file};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
    ViolationDemonstrated,
}

pub struct Loaded {
    pub doc: SystemDocument,
    pub inst: Instance,
    pub tau_min: f64,
    pub tau: f64,
}

pub fn load(doc: SystemDocument, tau_override: Option<TauChoice>) -> Result<Loaded, CliError> {
    let inst = doc.instance()?;
    if let Some((_, topo)) = &inst.network {
        if !topo.is_synthesizable() {
            let names: Vec<String> = topo
                .unactuated
                .iter()
                .map(|&c| format!("{{{}}}", topo.components[c].join(", ")))
                .collect();
            return Err(CliError::Admissibility(format!(
                "network is not synthesizable: components without an actuated node (b != 0): {}",
                names.join(" ")
            )));
        }
    }
    let threshold = tau_min(&inst.a, &inst.b)?;
    let tau = tau_override.unwrap_or(doc.tau_choice()).resolve(threshold);
    Ok(Loaded {
        doc,
        inst,
        tau_min: threshold,
        tau,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

#[derive(Serialize)]
pub struct SynthReport {
    pub tau_min: f64,
    pub tau: f64,
    pub k: f64,
    pub gamma: f64,
    pub input_labels: Vec<String>,
    pub state_labels: Vec<String>,
    pub kp: Vec<Vec<f64>>,
    pub ki: Vec<Vec<f64>>,
    /// Rows of `Bᵀ` as `*`/`.` strings.
    pub pattern: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decentralized: Option<DecentralizedLaw>,
}

pub fn synth_report(l: &Loaded) -> Result<(SynthReport, PiController<f64>), CliError> {
    let ctrl = synthesize(&l.inst.a, &l.inst.b, l.tau).map_err(|e| match e {
        hinf_pi::synthesis::SynthesisError::TauBelowThreshold { tau, tau_min } => CliError::Admissibility(format!(
            "tau below threshold: tau = {} < tau* = {}",
            sig(tau),
            sig(tau_min)
        )),
        other => other.into(),
    })?;
    let decentralized = match &l.inst.network {
        Some((spec, _)) => Some(decentralized_realization(spec, ctrl.k)?),
        None => None,
    };
    let bt = l.inst.b.transpose();
    let report = SynthReport {
        tau_min: l.tau_min,
        tau: ctrl.tau,
        k: ctrl.k,
        gamma: ctrl.gamma,
        input_labels: l.inst.input_labels.clone(),
        state_labels: l.inst.state_labels.clone(),
        kp: ctrl.kp().to_rows(),
        ki: ctrl.ki().to_rows(),
        pattern: pattern(&bt).lines().map(|s| s.trim().to_string()).collect(),
        decentralized,
    };
    Ok((report, ctrl))
}

pub fn render_synth(r: &SynthReport, ctrl: &PiController<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tau*   {}", sig(r.tau_min));
    let _ = writeln!(out, "tau    {}  (tau/tau* = {})", sig(r.tau), sig(r.tau / r.tau_min));
    let _ = writeln!(out, "k      {}", sig(r.k));
    let _ = writeln!(out, "gamma  {}", sig(r.gamma));
    let _ = writeln!(out, "\nK(s) = Kp + Ki/s, u = K(s)(r - x)\nKp");
    out.push_str(&matrix(ctrl.kp(), &r.input_labels, &r.state_labels));
    out.push_str("Ki\n");
    out.push_str(&matrix(ctrl.ki(), &r.input_labels, &r.state_labels));
    out.push_str("zero pattern of B^T (shared by Kp and Ki)\n");
    for row in &r.pattern {
        let _ = writeln!(out, "  {row}");
    }
    if let Some(law) = &r.decentralized {
        let scale = law.global_sign * law.k;
        let _ = writeln!(
            out,
            "\nlocal laws, e_i = r_i - x_i, z_i = integral of e_i, gain {} applied to each bracket",
            sig(scale)
        );
        for n in &law.nodes {
            let _ = writeln!(
                out,
                "  u_{} = {} * b * [{}*z_{} - {}*e_{}],  b = {}",
                n.id,
                sig(scale),
                sig(n.z_coeff),
                n.id,
                sig(n.e_coeff),
                n.id,
                sig(n.b)
            );
        }
        for e in &law.edges {
            let _ = writeln!(
                out,
                "  u_{f}_{s} = {} * [{}*z_{f} - {}*e_{f} - ({}*z_{s} - {}*e_{s})]",
                sig(scale),
                sig(e.z_first_coeff),
                sig(e.e_first_coeff),
                sig(e.z_second_coeff),
                sig(e.e_second_coeff),
                f = e.first,
                s = e.second
            );
        }
    }
    out
}

pub fn cmd_synth(l: &Loaded, out: Option<&Path>, json: bool) -> Result<Outcome, CliError> {
    let (report, ctrl) = synth_report(l)?;
    let text = render_synth(&report, &ctrl);
    let js = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    print!("{}", if json { format!("{js}\n") } else { text.clone() });
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("synth.txt"), &text)?;
        write_file(&dir.join("synth.json"), &js)?;
    }
    Ok(Outcome::Success)
}

pub fn verification_config(tol: Option<f64>, seed: u64, competitors: usize) -> Result<VerificationConfig<f64>, CliError> {
    let mut cfg = VerificationConfig {
        seed,
        competitors,
        ..VerificationConfig::default()
    };
    if let Some(t) = tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
        cfg.norm_tol = t;
    }
    Ok(cfg)
}

pub fn run_verify(l: &Loaded, cfg: &VerificationConfig<f64>) -> Result<VerificationReport, CliError> {
    Ok(match &l.inst.network {
        Some((spec, _)) => verify_network(spec, l.tau, cfg)?,
        None => verify_instance(&l.inst.a, &l.inst.b, l.tau, cfg)?,
    })
}

pub fn render_verify(r: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tau* {}  tau {}  k {}", sig(r.tau_min), sig(r.tau), sig(r.k));
    let _ = writeln!(
        out,
        "effort norm {} (claimed {}), peak at omega = {}",
        sig(r.gamma_measured),
        sig(r.gamma_claim),
        sig(r.f_peak_omega)
    );
    let _ = writeln!(
        out,
        "rejection norm {} (bound {}), dc value {}",
        sig(r.constraint_norm),
        sig(r.tau),
        sig(r.constraint_dc_value)
    );
    if let Some(p) = r.positivity_min {
        let _ = writeln!(out, "closed-loop impulse response minimum {}", sig(p));
    }
    if let Some(c) = &r.competitor_summary {
        let _ = writeln!(
            out,
            "competitors: {} feasible of {} drawn, {} violations{}",
            c.count,
            c.drawn,
            c.violations,
            c.min_norm_ratio
                .map(|x| format!(", smallest norm/gamma {}", sig(x)))
                .unwrap_or_default()
        );
    }
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  [{}] {:width$}  value {}  tol {}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            sig(c.value),
            sig(c.tolerance)
        );
    }
    let _ = writeln!(out, "{}", if r.passed { "PASSED" } else { "FAILED" });
    out
}

pub fn render_violation(ev: &ViolationEvidence) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "formula applied at tau = {} = {} x tau* (tau* = {}), k = {}",
        sig(ev.tau),
        sig(ev.factor),
        sig(ev.tau_min),
        sig(ev.k)
    );
    let _ = writeln!(out, "effort map dc gain {}  (gamma {})", sig(ev.dc_value), sig(ev.gamma));
    let where_ = if ev.peak_omega.is_infinite() {
        "approached as omega -> inf".to_string()
    } else {
        format!("at omega = {}", sig(ev.peak_omega))
    };
    let _ = writeln!(out, "effort map peak {} {where_}, ratio to dc {}", sig(ev.peak_value), sig(ev.peak_value / ev.dc_value));
    let _ = writeln!(
        out,
        "{}",
        if ev.violated {
            "expected violation demonstrated: the norm is not attained at omega = 0"
        } else {
            "no violation: the peak is at omega = 0"
        }
    );
    out
}

pub fn cmd_verify(
    l: &Loaded,
    cfg: &VerificationConfig<f64>,
    violate: Option<f64>,
    out: Option<&Path>,
    json: bool,
) -> Result<Outcome, CliError> {
    if let Some(factor) = violate {
        let ev = check_tau_violation(&l.inst.a, &l.inst.b, factor, cfg)?;
        let js = serde_json::to_string_pretty(&ev).map_err(|e| CliError::Internal(e.to_string()))?;
        print!("{}", if json { format!("{js}\n") } else { render_violation(&ev) });
        if let Some(dir) = out {
            ensure_dir(dir)?;
            write_file(&dir.join("violation.json"), &js)?;
        }
        return Ok(if ev.violated {
            Outcome::ViolationDemonstrated
        } else {
            Outcome::VerificationFailed
        });
    }
    let report = run_verify(l, cfg)?;
    let js = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    print!("{}", if json { format!("{js}\n") } else { render_verify(&report) });
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("verify.json"), &js)?;
    }
    Ok(if report.passed {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

pub const DEFAULT_FACTORS: [f64; 3] = [1.0, 2.0, 0.5];

/// Working `τ` values: explicit ones first, then factors of `τ*`; the
/// default factors when neither is given.
pub fn tau_list(l: &Loaded, taus: &[f64], factors: &[f64]) -> Result<Vec<f64>, CliError> {
    let mut out: Vec<f64> = taus.to_vec();
    out.extend(factors.iter().map(|c| c * l.tau_min));
    if out.is_empty() {
        out = DEFAULT_FACTORS.iter().map(|c| c * l.tau_min).collect();
    }
    if let Some(bad) = out.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(CliError::Usage(format!("tau values must be positive, got {bad}")));
    }
    Ok(out)
}

fn controller_for(l: &Loaded, tau: f64) -> Result<PiController<f64>, CliError> {
    // Values below τ* are allowed here to show what the formula does there.
    Ok(synthesize_unchecked(&l.inst.a, &l.inst.b, tau)?)
}

fn tau_header(tau: f64, tau_min: f64) -> String {
    format!("tau={}", sig(tau)) + if tau < tau_min * (1.0 - 1e-12) { "(below tau*)" } else { "" }
}

pub struct GridFlags {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

pub fn cmd_freqresp(l: &Loaded, taus: &[f64], grid: &GridFlags, out: &Path) -> Result<Outcome, CliError> {
    let g = FrequencyGrid::log(grid.min, grid.max, grid.points);
    g.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let plant = Plant::new(l.inst.a.clone(), l.inst.b.clone())?;
    let mut f_curves: Vec<FrequencyResponse<f64>> = Vec::new();
    let mut g_curves = Vec::new();
    for &tau in taus {
        let ctrl = controller_for(l, tau)?;
        let f = effort_map(&plant, &ctrl.gains)?;
        let gm = rejection_map_optimal(&l.inst.a, &l.inst.b, ctrl.k)?;
        f_curves.push(frequency_response(&f, &g)?);
        g_curves.push(frequency_response(&gm, &g)?);
    }
    ensure_dir(out)?;
    let mut header = vec!["omega".to_string()];
    header.extend(taus.iter().map(|&t| tau_header(t, l.tau_min)));
    let omegas = g.omegas();
    for (name, curves) in [("effort_F.csv", &f_curves), ("rejection_G.csv", &g_curves)] {
        let rows = omegas.iter().enumerate().map(|(i, &w)| {
            let mut row = vec![w];
            row.extend(curves.iter().map(|c| c.gains[i]));
            row
        });
        write_csv(&out.join(name), &header, rows)?;
    }
    println!("{:>12}  {:>10}  {:>10}  {:>12}  {:>10}  {:>10}", "tau", "F(0)", "F peak", "at omega", "G(0)", "G peak");
    for ((tau, f), gc) in taus.iter().zip(&f_curves).zip(&g_curves) {
        println!(
            "{:>12}  {:>10}  {:>10}  {:>12}  {:>10}  {:>10}",
            sig(*tau),
            sig(f.gains[0]),
            sig(f.peak_gain),
            sig(f.peak_omega),
            sig(gc.gains[0]),
            sig(gc.peak_gain)
        );
    }
    println!("wrote {} and {}", out.join("effort_F.csv").display(), out.join("rejection_G.csv").display());
    Ok(Outcome::Success)
}

pub struct StepFlags {
    pub t_final: f64,
    pub dt: f64,
    pub channel: usize,
}

pub fn cmd_step(l: &Loaded, taus: &[f64], flags: &StepFlags, out: &Path) -> Result<Outcome, CliError> {
    if !(flags.dt > 0.0) || !flags.dt.is_finite() {
        return Err(CliError::Usage(format!("--dt must be positive, got {}", flags.dt)));
    }
    if !(flags.t_final >= flags.dt) || !flags.t_final.is_finite() {
        return Err(CliError::Usage(format!("--T must be at least --dt, got {}", flags.t_final)));
    }
    let n = l.inst.a.rows();
    if flags.channel >= n {
        return Err(CliError::Usage(format!(
            "--channel {} out of range: the reference has {n} entries",
            flags.channel
        )));
    }
    let plant = Plant::new(l.inst.a.clone(), l.inst.b.clone())?;
    let labels: Vec<String> = l.inst.input_labels.iter().chain(&l.inst.state_labels).cloned().collect();
    let m = l.inst.b.cols();
    let mut header = vec!["t".to_string()];
    let mut columns = Vec::new();
    let mut times = Vec::new();
    println!("unit step on reference {} ({})", flags.channel, l.inst.state_labels[flags.channel]);
    println!("{:>12}  {:>12}  final u", "tau", "max |u|");
    for &tau in taus {
        let ctrl = controller_for(l, tau)?;
        let cl = closed_loop(&plant, &ctrl.gains, IntegratorRealization::Minimal)?;
        let resp = step_response(&cl.reference_to_input_and_state(), flags.t_final, flags.dt, flags.channel)?;
        let peak = resp
            .values
            .iter()
            .map(|v| v[..m].iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let last: Vec<String> = resp.last()[..m].iter().map(|&x| sig(x)).collect();
        println!("{:>12}  {:>12}  [{}]", sig(tau), sig(peak), last.join(", "));
        let tag = tau_header(tau, l.tau_min);
        header.extend(labels.iter().map(|s| format!("{s}@{tag}")));
        for j in 0..labels.len() {
            columns.push(resp.column(j));
        }
        times = resp.times;
    }
    ensure_dir(out)?;
    let rows = times.iter().enumerate().map(|(k, &t)| {
        let mut row = vec![t];
        row.extend(columns.iter().map(|c| c[k]));
        row
    });
    let path = out.join("step.csv");
    write_csv(&path, &header, rows)?;
    println!("wrote {}", path.display());
    Ok(Outcome::Success)
}

pub struct DemoFlags {
    pub out: PathBuf,
    pub seed: u64,
    pub competitors: usize,
    pub tol: Option<f64>,
    pub grid: GridFlags,
    pub step: StepFlags,
}

pub fn cmd_demo(name: &str, flags: &DemoFlags) -> Result<Outcome, CliError> {
    let doc = demo_document(name)
        .ok_or_else(|| CliError::Usage(format!("unknown demo {name:?}; available: {}", DEMOS.join(", "))))?;
    let l = load(doc, None)?;
    let dir = flags.out.as_path();
    ensure_dir(dir)?;
    write_file(&dir.join("system.json"), &l.doc.to_json())?;

    println!("== synth");
    cmd_synth(&l, Some(dir), false)?;

    println!("\n== verify");
    let cfg = verification_config(flags.tol, flags.seed, flags.competitors)?;
    let verdict = cmd_verify(&l, &cfg, None, Some(dir), false)?;

    // Below the threshold, for contrast.
    println!("\n== verify --violate 0.5");
    cmd_verify(&l, &cfg, Some(0.5), Some(dir), false)?;

    let taus: Vec<f64> = DEFAULT_FACTORS.iter().map(|c| c * l.tau_min).collect();
    println!("\n== freqresp");
    cmd_freqresp(&l, &taus, &flags.grid, dir)?;
    println!("\n== step");
    cmd_step(&l, &taus, &flags.step, dir)?;
    Ok(verdict)
}
