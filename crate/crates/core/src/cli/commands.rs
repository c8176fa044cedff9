use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{envelope, Command, Outcome, RunConfig, Status};
use crate::algebra::C64;
use crate::calabi::{calabi_matrix, diastasis_from_potential, go_eigen_product, go_negative_witness, resolvability};
use crate::error::{Error, Result};
use crate::geometry::{character_rank, homothety_factor, lck_residual, CheckRecord, DeckMap};
use crate::immersions::{scalar_descent, verify_immersion, DescentMode};
use crate::surfaces::{build_surface, go_derivative_check, GoParams, Surface};

/// Tolerance of the witness cross-check between closed form and finite differences.
const CROSS_CHECK_TOL: f64 = 1e-4;
/// Tolerance on the immersion constant when it is known exactly.
const CONSTANT_TOL: f64 = 1e-6;

/// Runs one command. Inapplicable combinations come back as an `Outcome`
/// with status `not-applicable`; configuration errors as `Err`.
pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface.as_deref().map(build_surface).transpose()?;
    let result = match cmd {
        Command::Resolvability(_) => cmd_resolvability(cfg, req(&surface)?),
        Command::Witness(_) => cmd_witness(cfg, surface.as_deref(), None),
        Command::Verify(_) => cmd_verify(cfg, req(&surface)?),
        Command::Descent(_) => cmd_descent(cfg, req(&surface)?),
        Command::Character(_) => cmd_character(cfg, req(&surface)?),
        Command::Lck(_) => cmd_lck(cfg, req(&surface)?),
    };
    match result {
        Err(Error::NotApplicable(reason)) => {
            let claim = surface
                .as_deref()
                .map(|s| claim_for(cmd.name(), s))
                .unwrap_or("go-iff-equal-moduli");
            Ok(envelope(
                cfg,
                cmd.name(),
                claim,
                Status::NotApplicable,
                None,
                json!({ "reason": reason }),
            ))
        }
        other => other,
    }
}

fn req(s: &Option<Box<dyn Surface>>) -> Result<&dyn Surface> {
    s.as_deref()
        .ok_or_else(|| Error::Config("--surface is required".into()))
}

fn claim_for(command: &str, s: &dyn Surface) -> &'static str {
    match (command, s.family()) {
        ("resolvability", "hopf" | "ambient") => "flat-diastasis",
        ("resolvability", "parton") => "parton-rank-k-plus-1",
        ("resolvability", "kodaira") => "kodaira-resolvable",
        ("resolvability", "inoue") => "inoue-disc-diastasis",
        ("resolvability", _) => "calabi-local-criterion",
        ("witness", _) => "go-iff-equal-moduli",
        ("verify", "parton") => "parton-immersion",
        ("verify", "elliptic") => "elliptic-immersion",
        ("verify", "kodaira") => "kodaira-immersion",
        ("verify", "inoue") => "inoue-disc-immersion",
        ("verify", _) => "flat-immersion",
        ("descent", "hopf") => "hopf-descent-iff-equal",
        ("descent", "parton") => "parton-descent",
        ("descent", "kodaira") => "kodaira-no-descent",
        ("descent", "elliptic") => "elliptic-descent",
        ("descent", "inoue") => "inoue-not-vaisman",
        ("descent", _) => "hopf-ambient-descent",
        ("character", "elliptic") => "elliptic-no-proper-potential",
        ("character", "inoue") => "inoue-homothety",
        ("character", _) => "homothety-character",
        ("lck", "inoue") => "tricerri-lck",
        ("lck", "hopf") => "go-lck",
        ("lck", "ambient") => "hopf-lck",
        _ => "lck-condition",
    }
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn selected_decks(cfg: &RunConfig, s: &dyn Surface) -> Result<Vec<DeckMap>> {
    match &cfg.deck {
        None => Ok(s.deck_maps()),
        Some(names) => names.iter().map(|n| s.deck(n)).collect(),
    }
}

fn cmd_resolvability(cfg: &RunConfig, s: &dyn Surface) -> Result<Outcome> {
    let series = match s.potential_series(cfg.d) {
        Ok(p) => p,
        Err(Error::NotApplicable(reason)) if s.family() == "hopf" => {
            let notice = format!("{reason}; routed to witness");
            return cmd_witness(cfg, Some(s), Some(notice));
        }
        Err(e) => return Err(e),
    };
    let d0 = diastasis_from_potential(&series)?;
    let matrix = calabi_matrix(&d0)?;
    let report = resolvability(&matrix, cfg.tol);

    // exact ranks known in closed form
    let expected_rank = match s.family() {
        "parton" => {
            let k = s.params_json()["k"].as_u64().unwrap_or(0) as usize;
            (cfg.d as usize >= k).then_some(k + 1)
        }
        "hopf" => Some(2),
        "ambient" => Some(s.nvars()),
        _ => None,
    };
    let pass = report.psd && expected_rank.is_none_or(|r| r == report.rank);
    if let Some(path) = &cfg.csv {
        std::fs::write(path, matrix.to_csv())
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    let body = json!({
        "surface": s.selector(),
        "params": s.params_json(),
        "d": cfg.d,
        "expected_rank": expected_rank,
        "resolvability": report,
        "assumption": "the covering is simply connected, so the local diastasis extends globally",
    });
    Ok(envelope(
        cfg,
        "resolvability",
        claim_for("resolvability", s),
        Status::from_pass(pass),
        None,
        body,
    ))
}

/// `(|α|, |β|)` from flags or from a `hopf` selector, larger modulus first.
fn witness_moduli(cfg: &RunConfig, s: Option<&dyn Surface>) -> Result<(f64, f64)> {
    match (cfg.alpha, cfg.beta, s) {
        (Some(a), Some(b), _) => {
            if !(a >= b && b > 1.0 && a.is_finite()) {
                return Err(Error::Config(format!(
                    "witness needs alpha >= beta > 1, got alpha={a}, beta={b}"
                )));
            }
            Ok((a, b))
        }
        (None, None, Some(s)) if s.family() == "hopf" => {
            let p = s.params_json();
            let modulus = |k: &str| {
                let v = &p[k];
                v[0].as_f64()
                    .unwrap_or(f64::NAN)
                    .hypot(v[1].as_f64().unwrap_or(f64::NAN))
            };
            let (a, b) = (modulus("alpha"), modulus("beta"));
            Ok(if a >= b { (a, b) } else { (b, a) })
        }
        (None, None, Some(s)) => Err(Error::Config(format!(
            "witness applies to hopf surfaces, not {}",
            s.family()
        ))),
        _ => Err(Error::Config(
            "witness needs --alpha and --beta, or --surface hopf:...".into(),
        )),
    }
}

fn cmd_witness(cfg: &RunConfig, s: Option<&dyn Surface>, notice: Option<String>) -> Result<Outcome> {
    let (alpha_abs, beta_abs) = witness_moduli(cfg, s)?;
    let params = GoParams::from_moduli(alpha_abs, beta_abs).map_err(|e| Error::Config(e.to_string()))?;
    let GoParams { a, b } = params;
    let witness = go_negative_witness(a, b, cfg.jmax).map_err(|e| Error::Config(e.to_string()))?;
    let expected_witness = !params.is_flat();

    let cross_check = match witness {
        Some(j) if j <= 3 => {
            let c = go_derivative_check(&params, C64::new(1.0, 0.0), j)?;
            let agree = (c.closed_form - c.finite_difference).abs() <= CROSS_CHECK_TOL * c.closed_form.abs().max(1.0);
            Some((c, agree))
        }
        _ => None,
    };
    let agree = cross_check.as_ref().is_none_or(|(_, ok)| *ok);
    let pass = witness.is_some() == expected_witness && agree;
    let body = json!({
        "alpha_abs": alpha_abs,
        "beta_abs": beta_abs,
        "a": a,
        "b": b,
        "jmax": cfg.jmax,
        "witness": witness,
        "product": witness.map(|j| go_eigen_product(a, b, j)),
        "expected_witness": expected_witness,
        "cross_check": cross_check.as_ref().map(|(c, ok)| json!({
            "s": [1.0, 0.0],
            "check": c,
            "tol": CROSS_CHECK_TOL,
            "agree": ok,
        })),
        "verdict": if witness.is_some() { "negative Calabi coefficient: not resolvable" } else { "no witness up to jmax" },
    });
    Ok(envelope(
        cfg,
        "witness",
        "go-iff-equal-moduli",
        Status::from_pass(pass),
        notice,
        body,
    ))
}

fn cmd_verify(cfg: &RunConfig, s: &dyn Surface) -> Result<Outcome> {
    let map = s.immersion()?;
    let samples = s.immersion_samples(&mut rng(cfg), cfg.samples);
    let report = verify_immersion(map.as_ref(), &s.immersion_target(), &samples, cfg.tol);
    let expected_c = matches!(s.family(), "parton" | "inoue" | "hopf" | "ambient").then_some(1.0);
    let constant_ok = expected_c.is_none_or(|c| (report.c - c).abs() <= CONSTANT_TOL);
    let pass = report.pass && constant_ok;
    let body = json!({
        "surface": s.selector(),
        "expected_c": expected_c,
        "immersion": report,
    });
    Ok(envelope(
        cfg,
        "verify",
        claim_for("verify", s),
        Status::from_pass(pass),
        None,
        body,
    ))
}

fn cmd_descent(cfg: &RunConfig, s: &dyn Surface) -> Result<Outcome> {
    let map = s.immersion()?;
    let decks = selected_decks(cfg, s)?;
    let samples = s.immersion_samples(&mut rng(cfg), cfg.samples);
    let mut entries = Vec::with_capacity(decks.len());
    let mut all_consistent = true;
    let mut all_scalar = true;
    for deck in &decks {
        let expected = s.expected_scalar(deck.name())?;
        let report = scalar_descent(map.as_ref(), deck, &samples, cfg.seed);
        let scalar = report.mode == DescentMode::Scalar;
        let consistent = scalar == expected;
        all_consistent &= consistent;
        all_scalar &= scalar;
        entries.push(json!({
            "deck": deck.name(),
            "expected_scalar": expected,
            "consistent": consistent,
            "descent": report,
        }));
    }
    let mut body = json!({
        "surface": s.selector(),
        "decks": entries,
        "verdict": if all_scalar { "descends to a Hopf manifold" } else { "does not descend by a scalar" },
    });
    if s.family() == "parton" {
        let k = s.params_json()["k"].as_u64().unwrap_or(0);
        body["note"] = Value::String(format!("lambda is alpha^{k}; the constant k^k does not enter"));
    }
    Ok(envelope(
        cfg,
        "descent",
        claim_for("descent", s),
        Status::from_pass(all_consistent),
        None,
        body,
    ))
}

fn cmd_character(cfg: &RunConfig, s: &dyn Surface) -> Result<Outcome> {
    let decks = selected_decks(cfg, s)?;
    let samples = s.sample_points(&mut rng(cfg), cfg.samples);
    let metric = s.covering_metric();
    let reports: Vec<_> = decks.iter().map(|d| homothety_factor(d, &metric, &samples)).collect();
    let homothetic = reports.iter().all(|r| r.homothetic && r.spread <= cfg.tol);
    if !homothetic {
        let body = json!({ "surface": s.selector(), "homothety": reports, "character": Value::Null });
        return Ok(envelope(
            cfg,
            "character",
            claim_for("character", s),
            Status::Fail,
            None,
            body,
        ));
    }
    let factors: Vec<f64> = reports.iter().map(|r| r.factor).collect();
    let rank = character_rank(&factors)?;
    let verdict = match rank.rank {
        0 => "trivial character: globally conformally Kähler",
        1 => "character of rank 1: no obstruction from the character",
        _ => "obstructed: no proper potential → not Hopf-induced",
    };
    let claim = if rank.rank >= 2 && s.family() == "elliptic" {
        "elliptic-no-proper-potential"
    } else if s.family() == "elliptic" {
        "homothety-character"
    } else {
        claim_for("character", s)
    };
    let body = json!({
        "surface": s.selector(),
        "homothety": reports,
        "character": rank,
        "verdict": verdict,
    });
    Ok(envelope(cfg, "character", claim, Status::Pass, None, body))
}

fn cmd_lck(cfg: &RunConfig, s: &dyn Surface) -> Result<Outcome> {
    let metric = s.lck_metric();
    let samples = s.sample_points(&mut rng(cfg), cfg.samples);
    let records: Vec<CheckRecord> = samples
        .par_iter()
        .map(|z| match lck_residual(&metric, z) {
            Ok(r) => CheckRecord::new("lck", z, r, r < cfg.tol),
            Err(_) => CheckRecord::new("lck", z, f64::NAN, false),
        })
        .collect();
    let max_residual = records
        .iter()
        .map(|r| r.value)
        .fold(0.0, |m: f64, v| if v.is_nan() { f64::INFINITY } else { m.max(v) });
    let pass = records.iter().all(|r| r.pass);
    let body = json!({
        "surface": s.selector(),
        "metric": metric.name(),
        "max_residual": max_residual,
        "tol": cfg.tol,
        "records": records,
    });
    Ok(envelope(
        cfg,
        "lck",
        claim_for("lck", s),
        Status::from_pass(pass),
        None,
        body,
    ))
}
