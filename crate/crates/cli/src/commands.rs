use pfaffian::error::{Axis, Error};
use pfaffian::moser::{moser_rank, rank_reduce};
use pfaffian::ods::ExponentialPart;
use pfaffian::rational::format_rational;
use pfaffian::solve::{
    exponential_parts, formal_fundamental, katz_pair, substitution_residual, true_poincare_rank, SolutionData,
};
use pfaffian::system::{check_integrability, PfaffianSystem};
use serde_json::{json, Value};

use crate::{gauge_json, qmatrix_json, result_of, series_json, spectrum_json, spectrum_text, Claim, Failure, Input, Success};

type CmdResult = std::result::Result<Success, Box<Failure>>;

fn integrability_claim(sys: &PfaffianSystem) -> std::result::Result<Claim, Box<Failure>> {
    let v = check_integrability(sys);
    let origin = (-(sys.p() as i64), -(sys.q() as i64));
    if !v.integrable {
        return Err(Box::new(Failure {
            error: Error::IntegrabilityViolation {
                context: "integrability residual is nonzero".into(),
                window: v.window,
            },
            step: Some("integrability".into()),
            partial: Some(json!({"integrable": false})),
            claims: Vec::new(),
        }));
    }
    Ok(Claim::new("integrability residual vanishes", v.window, origin))
}

pub fn check(input: &Input) -> CmdResult {
    let claim = integrability_claim(&input.system)?;
    Ok(Success {
        results: json!({"integrable": true, "n": input.system.n(), "p": input.system.p(), "q": input.system.q()}),
        summary: format!("integrable within window {}", claim.window),
        claims: vec![claim],
    })
}

fn reduced_path(input: &Input) -> std::path::PathBuf {
    let stem = input
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "system".into());
    input.path.with_file_name(format!("{stem}.reduced.json"))
}

pub fn reduce(input: &Input) -> CmdResult {
    let sys = &input.system;
    let mut claims = vec![integrability_claim(sys)?];
    let before = [result_of(moser_rank(sys, Axis::X))?, result_of(moser_rank(sys, Axis::Y))?];
    let red = result_of(rank_reduce(sys))?;
    claims.extend(
        red.report
            .certificates
            .iter()
            .map(|c| Claim::new(c.claim.clone(), c.window, (0, 0))),
    );
    let out = reduced_path(input);
    result_of(pfaffian::io::write_system(&out, &red.system))?;
    let fin = &red.system;
    let results = json!({
        "initial": {"p": sys.p(), "q": sys.q(), "moser_rank": before.iter().map(format_rational).collect::<Vec<_>>()},
        "final": {"p": fin.p(), "q": fin.q(), "moser_rank": red.report.moser_rank_final.iter().map(format_rational).collect::<Vec<_>>()},
        "steps": red.report.steps,
        "gauge": gauge_json(&red.gauge),
        "reduced_system": out.display().to_string(),
    });
    let summary = format!(
        "Poincaré rank ({}, {}) -> ({}, {}) in {} step(s); reduced system written to {}",
        sys.p(),
        sys.q(),
        fin.p(),
        fin.q(),
        red.report.steps.len(),
        out.display()
    );
    Ok(Success { results, claims, summary })
}

fn part_json(p: &ExponentialPart, var: &str) -> Value {
    let mut v = serde_json::to_value(p).expect("parts serialize");
    v["q"] = json!(p.format_q(var));
    v
}

fn parts_text(label: &str, parts: &[ExponentialPart], var: &str) -> String {
    if parts.is_empty() {
        return format!("{label}: none");
    }
    let items: Vec<String> = parts
        .iter()
        .map(|p| {
            let ram = if p.s > 1 { format!(", s = {}", p.s) } else { String::new() };
            format!("{} (multiplicity {}{ram})", p.format_q(var), p.multiplicity)
        })
        .collect();
    format!("{label}: {}", items.join("; "))
}

pub fn expparts(input: &Input) -> CmdResult {
    let claims = vec![integrability_claim(&input.system)?];
    let (px, py) = result_of(exponential_parts(&input.system))?;
    let results = json!({
        "x": px.iter().map(|p| part_json(p, "x")).collect::<Vec<_>>(),
        "y": py.iter().map(|p| part_json(p, "y")).collect::<Vec<_>>(),
    });
    let summary = format!("{}\n{}", parts_text("Q1", &px, "x"), parts_text("Q2", &py, "y"));
    Ok(Success { results, claims, summary })
}

pub fn katz(input: &Input) -> CmdResult {
    let claims = vec![integrability_claim(&input.system)?];
    let k = result_of(katz_pair(&input.system))?;
    let g = result_of(true_poincare_rank(&input.system))?;
    let results = json!({
        "kappa1": format_rational(&k.kappa1),
        "kappa2": format_rational(&k.kappa2),
        "true_poincare_rank": [g.0, g.1],
    });
    let summary = format!(
        "Katz pair ({}, {}); true Poincaré rank ({}, {})",
        format_rational(&k.kappa1),
        format_rational(&k.kappa2),
        g.0,
        g.1
    );
    Ok(Success { results, claims, summary })
}

fn solution_json(d: &SolutionData) -> Value {
    let mut v = json!({
        "s": [d.s.0, d.s.1],
        "katz": d.katz,
        "parts_x": d.parts_x.iter().map(|p| part_json(p, "x")).collect::<Vec<_>>(),
        "parts_y": d.parts_y.iter().map(|p| part_json(p, "y")).collect::<Vec<_>>(),
        "blocks": d.blocks.iter().map(|b| json!({
            "size": b.size,
            "q1": part_json(&b.q1, "x"),
            "q2": part_json(&b.q2, "y"),
        })).collect::<Vec<_>>(),
        "gauge_trace": d.gauge_trace.iter().map(gauge_json).collect::<Vec<_>>(),
    });
    if let (Some(l1), Some(l2)) = (&d.lambda1, &d.lambda2) {
        v["lambda1"] = qmatrix_json(l1);
        v["lambda2"] = qmatrix_json(l2);
        v["lambda1_spectrum"] = spectrum_json(l1);
        v["lambda2_spectrum"] = spectrum_json(l2);
    }
    if let Some(phi) = &d.phi {
        v["phi"] = series_json(phi);
    }
    v
}

pub fn solve(input: &Input) -> CmdResult {
    let sys = &input.system;
    let mut claims = vec![integrability_claim(sys)?];
    let data = match formal_fundamental(sys) {
        Ok(d) => d,
        Err(p) => {
            return Err(Box::new(Failure {
                error: p.error,
                step: Some(p.step),
                partial: Some(solution_json(&p.data)),
                claims,
            }))
        }
    };
    let [r1, r2] = result_of(substitution_residual(sys, &data))?;
    claims.push(Claim::new("x substitution residual vanishes", r1.window(), (-(sys.p() as i64), 0)));
    claims.push(Claim::new("y substitution residual vanishes", r2.window(), (0, -(sys.q() as i64))));
    let (l1, l2) = (data.lambda1.as_ref().expect("complete"), data.lambda2.as_ref().expect("complete"));
    let q = |b: &pfaffian::solve::SolutionBlock| format!("I_{}: Q1 = {}, Q2 = {}", b.size, b.q1.format_q("x"), b.q2.format_q("y"));
    let summary = format!(
        "s = ({}, {}); Katz pair ({}, {})\n{}\nLambda1 spectrum {}; Lambda2 spectrum {}",
        data.s.0,
        data.s.1,
        format_rational(&data.katz.kappa1),
        format_rational(&data.katz.kappa2),
        data.blocks.iter().map(q).collect::<Vec<_>>().join("\n"),
        spectrum_text(l1),
        spectrum_text(l2)
    );
    Ok(Success {
        results: solution_json(&data),
        claims,
        summary,
    })
}
