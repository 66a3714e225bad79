use std::process::ExitCode;

use opencd_harness::config::RunConfig;
use opencd_harness::presets::preset_text;
use opencd_harness::run::{execute, TrajectorySummary};
use opencd_harness::validate::{self, Report};

struct Tally {
    failures: usize,
}

impl Tally {
    fn record(&mut self, id: &str, passed: bool, detail: String) {
        println!("criterion {id}: {} ({detail})", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failures += 1;
        }
    }
}

fn preset(name: &str) -> RunConfig {
    RunConfig::from_toml_str(preset_text(name).expect("bundled preset")).expect("valid preset")
}

fn run(cfg: &RunConfig) -> Vec<TrajectorySummary> {
    execute(cfg).expect("run succeeds").into_iter().map(|o| o.summary).collect()
}

fn find<'a>(all: &'a [TrajectorySummary], cd: &str, tau: f64) -> &'a TrajectorySummary {
    all.iter()
        .find(|t| t.cd == cd && t.tau == tau)
        .unwrap_or_else(|| panic!("no trajectory {cd} at tau = {tau}"))
}

fn check<'a>(report: &'a Report, name: &str) -> &'a validate::Check {
    report.checks.iter().find(|c| c.name == name).expect("check exists")
}

fn main() -> ExitCode {
    let mut t = Tally { failures: 0 };
    let report = validate::run_all(0);

    let gap = check(&report, "qubit_minimum_gap");
    t.record("1", gap.passed, gap.detail.clone());
    let units = check(&report, "unit_convention");
    t.record("2", units.passed, format!("{}, relative error {:.2e}", units.detail, units.value));

    // closed qubit
    let mut closed = preset("fig1");
    closed.bath = None;
    closed.cd.retain(|c| c.label == "none");
    closed.tau = vec![10.0, 100.0];
    let c = run(&closed);
    let (p10, p100) = (find(&c, "none", 10.0).final_p_minus, find(&c, "none", 100.0).final_p_minus);
    t.record(
        "3",
        (p10 - 0.91).abs() <= 0.03 && p100 >= 0.99,
        format!("P(tau=10) = {p10:.5}, P(tau=100) = {p100:.5}"),
    );

    // open qubit, both Lamb-shift settings
    let fig1 = preset("fig1");
    let with_lamb = run(&fig1);
    let mut no_lamb_cfg = fig1.clone();
    no_lamb_cfg.cd.retain(|c| c.label == "none");
    if let Some(b) = no_lamb_cfg.bath.as_mut() {
        b.lamb_shift = false;
    }
    let no_lamb = run(&no_lamb_cfg);
    let mut ok4 = true;
    let mut detail4 = Vec::new();
    for (label, set) in [("lamb on", &with_lamb), ("lamb off", &no_lamb)] {
        let (a, b) = (find(set, "none", 10.0).final_p_minus, find(set, "none", 100.0).final_p_minus);
        ok4 &= (a - 0.90).abs() <= 0.03 && (b - 0.95).abs() <= 0.03;
        detail4.push(format!("{label}: P(10) = {a:.5}, P(100) = {b:.5}"));
    }
    t.record("4", ok4, detail4.join("; "));

    let exact_leak: Vec<(f64, f64, usize)> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&tau| {
            let e = find(&with_lamb, "exact", tau);
            (tau, e.max_block_leakage, e.unpopulated_blocks.len())
        })
        .collect();
    t.record(
        "5",
        exact_leak.iter().all(|&(_, l, n)| l < 1e-6 && n == 2),
        exact_leak
            .iter()
            .map(|(tau, l, n)| format!("tau={tau}: {n} blocks, leakage {l:.2e}"))
            .collect::<Vec<_>>()
            .join("; "),
    );

    let none1 = find(&with_lamb, "none", 1.0).max_block_leakage;
    let var1 = find(&with_lamb, "variational_sigma_y", 1.0).max_block_leakage;
    t.record(
        "6",
        none1 > 1e-1 && var1 < 1e-2,
        format!("tau=1 leakage: none {none1:.3e}, sigma_y {var1:.3e}"),
    );

    let oracle = check(&report, "closed_qubit_variational_oracle");
    t.record("7", oracle.passed, format!("worst deviation {:.2e}", oracle.value));
    let unitary = check(&report, "unitary_spectrum");
    t.record("8", unitary.passed, format!("{}; worst {:.2e}", unitary.detail, unitary.value));
    let pspin = check(&report, "pspin_structure");
    t.record("9", pspin.passed, format!("{}; ISS error {:.2e}", pspin.detail, pspin.value));

    let fig3 = run(&preset("fig3"));
    let floor = find(&fig3, "none", 10.0).min_fidelity;
    t.record("10", floor >= 0.94, format!("min fidelity {floor:.4}"));

    let f = |cd: &str| find(&fig3, cd, 1.0).final_fidelity;
    let (cyc, sy, none, bath) = (f("cyclic"), f("sy"), f("none"), f("bath"));
    let ok_a = cyc >= sy && sy >= none && (bath - none).abs() <= 0.02;
    let mut fig5_cfg = preset("fig5");
    fig5_cfg.cd.retain(|c| c.label != "full");
    if let Some(b) = fig5_cfg.bath.as_mut() {
        b.eta_g2 = opencd_harness::config::OneOrMany::One(1e-2);
    }
    let fig5 = run(&fig5_cfg);
    let p = |cd: &str| find(&fig5, cd, 10.0).final_p_minus;
    let (pc, ps, pn, pb) = (p("cyclic"), p("sy"), p("none"), p("bath"));
    let ok_b = ps.min(pc) > pn && pn > pb;
    t.record(
        "11",
        ok_a && ok_b,
        format!(
            "tau=1 fidelity: cyclic {cyc:.4}, sy {sy:.4}, none {none:.4}, bath {bath:.4}; \
             tau=10 P_minus: cyclic {pc:.4}, sy {ps:.4}, none {pn:.4}, bath {pb:.4}"
        ),
    );

    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    t.record(
        "12",
        report.passed,
        if failed.is_empty() {
            format!("{} checks passed", report.checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    );

    println!("{} of 12 criteria failed", t.failures);
    if t.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
