//! Acceptance run: one PASS/FAIL line per criterion, decided by exact checks
//! with zero tolerance unless a bound below says otherwise.
//!
//! A few stated bounds are false on valid inputs. They are still checked as
//! stated and a criterion containing them prints FAIL. The run itself only
//! fails on a failing check that is not one of those, or whose recorded
//! companion bound does not hold.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use polyarrow::json;
use polyarrow::suites::{audit_threshold, run_suite, InstanceReport, SuiteConfig, SuiteReport, SUITES};
use polyarrow_core::certificate::CheckKind;
use polyarrow_core::rational::{self, frac};
use polyarrow_core::Q;

const SEED: u64 = 7;

/// A stated bound known to fail on some valid inputs, accepted only when the
/// companion check on the same instance holds.
struct Known {
    label: &'static str,
    companion: fn(&InstanceReport) -> bool,
}

fn holds(inst: &InstanceReport, label: &str) -> bool {
    let mut found = inst.certificate.checks.iter().filter(|c| c.label == label).peekable();
    found.peek().is_some() && found.all(|c| c.holds)
}

fn info(inst: &InstanceReport, label: &str) -> Option<Q> {
    inst.certificate.checks.iter().find(|c| c.label == label).and_then(|c| match &c.kind {
        CheckKind::Info { value } => Some(value.clone()),
        _ => None,
    })
}

/// The stated double-version bound fails exactly when the lower bound
/// `beta/eps` exceeds `eps`.
fn correction_lower_bound(inst: &InstanceReport) -> bool {
    let bound_of = |label: &str| {
        inst.certificate.checks.iter().find(|c| c.label == label).and_then(|c| match &c.kind {
            CheckKind::Bound { bound, .. } => Some(bound.clone()),
            _ => None,
        })
    };
    match (bound_of("|fbar jbar - ibar| >= beta/eps"), bound_of("|fbar jbar - ibar|")) {
        (Some(lower), Some(eps)) => holds(inst, "|fbar jbar - ibar| >= beta/eps") && lower > eps,
        _ => false,
    }
}

fn commutativity_inherits(inst: &InstanceReport) -> bool {
    !holds(inst, "|fbar jbar - ibar|") && correction_lower_bound(inst)
}

fn corrected_isometry_constant(inst: &InstanceReport) -> bool {
    holds(inst, "J|B1.alpha <= u max(1, |j2|)") && info(inst, "|j2|").is_some_and(|n| n > rational::one())
}

fn proof_tau_lower(inst: &InstanceReport) -> bool {
    holds(inst, "tau lower (proof)")
}

fn proof_distance(inst: &InstanceReport) -> bool {
    holds(inst, "|p' - tau p| (proof)")
}

/// The scaled bound has no proof to fall back on; its failures are
/// accepted when everything the proof does give holds.
fn proof_bounds(inst: &InstanceReport) -> bool {
    holds(inst, "|p'| (proof)") && proof_distance(inst) && holds(inst, "p'^2 = p'")
}

struct Verdict {
    passed: bool,
    detail: String,
    unexplained: Vec<String>,
}

fn judge(report: &SuiteReport, known: &[Known], minimum: usize, extra: Vec<String>) -> Verdict {
    let mut unexplained = extra;
    let mut accepted: BTreeMap<&str, usize> = BTreeMap::new();
    if report.instances.len() < minimum {
        unexplained.push(format!("only {} instances, need {minimum}", report.instances.len()));
    }
    for inst in &report.instances {
        if let Some(e) = &inst.error {
            unexplained.push(format!("instance {}: {e}", inst.index));
        }
        for c in inst.certificate.failures() {
            match known.iter().find(|k| k.label == c.label) {
                Some(k) if (k.companion)(inst) => *accepted.entry(k.label).or_insert(0) += 1,
                _ => unexplained.push(format!("instance {} ({}): {}", inst.index, inst.kind, c.label)),
            }
        }
    }
    let passed_instances = report.instances.iter().filter(|i| i.passed()).count();
    let mut detail = format!("{passed_instances}/{} instances", report.instances.len());
    for (label, n) in &accepted {
        detail.push_str(&format!("; stated bound `{label}` false on {n}"));
    }
    Verdict { passed: unexplained.is_empty() && accepted.is_empty(), detail, unexplained }
}

fn config(name: &str) -> SuiteConfig {
    SuiteConfig { seed: SEED, ..SuiteConfig::defaults(name).expect("known suite") }
}

fn save(dir: &Path, report: &SuiteReport) -> String {
    let text = json::to_text(&report.to_json());
    fs::write(dir.join(format!("{}.json", report.suite)), &text).expect("report directory is writable");
    text
}

/// Labels every instance must carry.
fn require(report: &SuiteReport, labels: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    for inst in &report.instances {
        for l in labels {
            if !inst.certificate.checks.iter().any(|c| &c.label == l) {
                out.push(format!("instance {} lacks check `{l}`", inst.index));
            }
        }
    }
    out
}

fn main() -> ExitCode {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&dir).expect("report directory");
    let mut reports: BTreeMap<&str, (SuiteReport, String)> = BTreeMap::new();
    for name in SUITES {
        let report = run_suite(name, &config(name)).expect("default configurations are valid");
        let text = save(&dir, &report);
        reports.insert(name, (report, text));
    }
    let r = |name: &str| &reports[name].0;
    let mut verdicts: Vec<(u8, &str, Verdict)> = Vec::new();

    let isom = r("isom");
    let kinds = ["isometric", "isomorphism", "general"];
    let missing: Vec<String> =
        kinds.iter().filter(|k| !isom.instances.iter().any(|i| &i.kind == *k)).map(|k| format!("no {k} instance")).collect();
    verdicts.push((1, "push-out legs, isometric and isomorphic cases", judge(isom, &[], 100, missing)));

    let amost = r("amostdpo");
    let mut extra = require(amost, &["(3.a) jbar' i' = i jbar", "(3.b) jbar' j' = B slot", "(4.a) ibar' i' = 1", "(4.b) ibar' j' = j ibar", "(5) jbar ibar' = ibar jbar'", "general i'.alpha", "general j'.gamma"]);
    if !amost.instances.iter().any(|i| i.certificate.checks.iter().any(|c| c.label.starts_with("sharp j'"))) {
        extra.push("no instance exercised the (1,0,1) table".into());
    }
    verdicts.push((2, "complemented push-out class tables and identities", judge(amost, &[], 100, extra)));

    let po = r("poprojection");
    let extra = require(po, &["J|B1.alpha", "J|B1.beta", "J|B1.gamma", "J|B1.contractive", "ibar1 Jbar = jbar1 (i1+i2)'-bar"]);
    let known = [Known { label: "J|B1.alpha", companion: corrected_isometry_constant }];
    verdicts.push((3, "extension through the push-out of a sum", judge(po, &known, 50, extra)));

    let corr = r("correction");
    let mut extra = require(corr, &["space.i_f upper", "space.i_f lower", "space.j_f upper", "space.j_f lower", "space.|j_f f - i_f|", "ibar j = fbar", "jbar i = f", "ibar i = 1", "jbar j = 1", "|fbar jbar - ibar|"]);
    for eps in [frac(0, 1), frac(1, 10), frac(1, 4)] {
        let kind = format!("eps={}", rational::to_text(&eps));
        if !corr.instances.iter().any(|i| i.kind == kind) {
            extra.push(format!("no instance at {kind}"));
        }
    }
    let known = [
        Known { label: "|fbar jbar - ibar|", companion: correction_lower_bound },
        Known { label: "eps-commutativity", companion: commutativity_inherits },
    ];
    verdicts.push((4, "correction space and its double version", judge(corr, &known, 50, extra)));

    let close = r("close");
    let extra = require(close, &["p'^2 = p'", "|p'|", "|p' - tau p|", "|(1+eps)p' - tau p/(1+eps)|"]);
    let known = [
        Known { label: "|(1+eps)p' - tau p/(1+eps)|", companion: proof_bounds },
        Known { label: "|p' - tau p|", companion: proof_distance },
        Known { label: "tau lower", companion: proof_tau_lower },
    ];
    verdicts.push((5, "perturbation of a complemented subspace", judge(close, &known, 60, extra)));

    let cas = r("casiequiv");
    let extra = require(cas, &["(1).alpha", "(2) alpha(f/alpha)", "(3).scaled.alpha", "(4).distance (contractive form)", "(4).back*fwd = 1"]);
    verdicts.push((6, "arrow calculus and exact projections", judge(cas, &[], 100, extra)));

    let engine = r("engine-audit");
    let steps = engine.instances.iter().filter(|i| i.kind.starts_with("step")).count();
    let audits: Vec<&InstanceReport> = engine.instances.iter().filter(|i| i.kind.starts_with("audit")).collect();
    let mut extra = Vec::new();
    if steps < 4 {
        extra.push(format!("only {steps} steps"));
    }
    if audits.is_empty() {
        extra.push("no ledgered probes".into());
    }
    for a in &audits {
        for l in ["outcome success", "defect_fwd", "defect_back", "class within (1+7eps, 0, (1+7eps)/(1-7eps))"] {
            if !holds(a, l) {
                extra.push(format!("{}: `{l}` missing or false", a.kind));
            }
        }
    }
    let mut v = judge(engine, &[], 1, extra);
    v.detail = format!("{steps} steps, {} ledgered probes, defect threshold {}; {}", audits.len(), rational::to_text(&audit_threshold(3, 4)), v.detail);
    verdicts.push((7, "engine extension audit", v));

    let sk = r("skeleton");
    let mut extra = Vec::new();
    for inst in &sk.instances {
        let len: usize = inst.kind.trim_start_matches("length=").parse().unwrap_or(0);
        if !(1..=4).contains(&len) {
            extra.push(format!("instance {} has chain length {len}", inst.index));
        }
    }
    verdicts.push((8, "skeleton projections", judge(sk, &[], 50, extra)));

    let norm = r("norming");
    let mut extra = Vec::new();
    for (idx, label) in [(0, "linf^2"), (1, "l1^2")] {
        let inst = &norm.instances[idx];
        if inst.kind != label || !holds(inst, "pairs") {
            extra.push(format!("{label} does not give exactly 8 pairs"));
        }
    }
    verdicts.push((9, "norming pairs", judge(norm, &[], 2, extra)));

    let mut differing = Vec::new();
    for name in SUITES {
        let again = json::to_text(&run_suite(name, &config(name)).expect("valid").to_json());
        if again != reports[name].1 {
            differing.push(format!("{name} differs on rerun"));
        }
    }
    let other = json::to_text(&run_suite("isom", &SuiteConfig { seed: SEED + 1, ..config("isom") }).expect("valid").to_json());
    if other == reports["isom"].1 {
        differing.push("a different seed gave the same isom report".into());
    }
    let passed = differing.is_empty();
    verdicts.push((10, "determinism", Verdict { passed, detail: format!("{} suites rerun byte-identically", SUITES.len()), unexplained: differing }));

    let mut ok = true;
    for (id, name, v) in &verdicts {
        println!("criterion {id}: {} - {name} ({})", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        for u in &v.unexplained {
            println!("    unexplained: {u}");
            ok = false;
        }
    }
    println!("reports written to {}", dir.display());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
