//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use uncert::algebra::{AlgebraElement, BlockAlgebra};
use uncert::hermitian::{hermitize, inverse_definite, pauli, schur_positivity_details, Tolerance};
use uncert::lab::{self, CampaignConfig, Drop, InstanceSpec, SearchConfig};
use uncert::maps::{MapFamily, TracialMap};
use uncert::quantities::{AlphaParam, Setting};
use uncert::random::Sampler;
use uncert::verify::{self, HypothesisStatus, Mode, TheoremId, Variant};

const BLOCK_SPECS: [&[usize]; 5] = [&[2], &[3], &[4], &[2, 2], &[2, 3]];

fn report(n: u32, ok: bool, start: Instant, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} ({:.3}s) {detail}", start.elapsed().as_secs_f64());
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn meta(r: &verify::VerifierReport, key: &str) -> Option<f64> {
    r.metadata.get(key).and_then(|v| v.as_f64())
}

#[test]
fn c1_luo_qubit_saturation() {
    let start = Instant::now();
    let alg = BlockAlgebra::full(2).unwrap();
    let map = TracialMap::usual_trace(&alg);
    let a = AlgebraElement::single(pauli::sigma_x()).unwrap();
    let b = AlgebraElement::single(pauli::sigma_y()).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in [0.6, 0.75, 0.9] {
        let rho = AlgebraElement::single(pauli::real_diag(&[p, 1.0 - p])).unwrap();
        let r = verify::verify_luo_refined(&map, &rho, &a, &b, &tol()).unwrap();
        let margin = r.check_margin("luo").unwrap();
        let s = Setting::new(&map, &rho, &tol()).unwrap();
        let uu = s.u(&a).unwrap().value.block(0)[(0, 0)].re * s.u(&b).unwrap().value.block(0)[(0, 0)].re;
        let target = (2.0 * p - 1.0) * (2.0 * p - 1.0);
        worst = worst.max(margin.abs()).max((uu - target).abs());
        ok &= r.pass && margin.abs() <= 1e-9 && (uu - target).abs() <= 1e-9;
    }
    let fast = start.elapsed().as_secs_f64() < 1.0;
    report(1, ok && fast, start, format!("max |margin| {worst:.2e}"));
    assert!(ok, "saturation margin {worst:e}");
    assert!(fast, "took {:?}", start.elapsed());
}

fn map_configs() -> Vec<(MapFamily, usize)> {
    vec![
        (MapFamily::UsualTrace, 2),
        (MapFamily::ScaledBlockTrace, 1),
        (MapFamily::ScaledBlockTrace, 2),
        (MapFamily::ScaledBlockTrace, 3),
        (MapFamily::CenterExpectation, 2),
        (MapFamily::Composite, 2),
    ]
}

#[test]
fn c2_campaign_suite() {
    let start = Instant::now();
    let (mut runs, mut failures, mut errors) = (0, 0, 0);
    let mut messages = Vec::new();
    for (i, dims) in BLOCK_SPECS.iter().enumerate() {
        for (family, k) in map_configs() {
            let spec = InstanceSpec::new(dims.to_vec(), family, 1000, 7 + i as u64).with_k(k);
            let config = CampaignConfig::new(TheoremId::ALL.to_vec(), spec);
            let r = lab::run_campaign(&config).unwrap();
            for t in r.theorems.iter().filter(|t| t.applicable) {
                runs += t.trials;
                failures += t.failures;
                errors += t.errors;
                if t.failures > 0 {
                    messages.push(format!("{dims:?} {family} k={k} {}: {} failures {:?}", t.theorem, t.failures, t.min_margin));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures == 0 && secs < 120.0;
    report(2, ok, start, format!("{runs} runs, {failures} failures ({errors} errors)"));
    assert_eq!(failures, 0, "{messages:#?}");
    assert!(secs < 120.0, "took {secs}s");
}

#[test]
fn c3_schur_routes_agree() {
    let start = Instant::now();
    let mut s = Sampler::new(2024);
    let (mut disagree, mut positive) = (0, 0);
    for _ in 0..1000 {
        let n = 1 + s.index(5);
        let m = 1 + s.index(5);
        let a = hermitize(&(s.wishart(n).as_matrix() + uncert::hermitian::ComplexMatrix::identity(n, n).scale(0.1))).unwrap();
        let x = uncert::hermitian::ComplexMatrix::from_fn(n, m, |_, _| s.complex_gaussian());
        let a_inv = inverse_definite(&a, &tol()).unwrap();
        let pulled = x.adjoint() * a_inv.as_matrix() * &x;
        // straddle the boundary so both verdicts occur
        let shift = s.uniform_range(-1.0, 1.0);
        let noise = s.hermitian(m).as_matrix().scale(0.05);
        let b = hermitize(&(pulled + noise + uncert::hermitian::ComplexMatrix::identity(m, m).scale(shift))).unwrap();
        match schur_positivity_details(&a, &x, &b, &tol()) {
            Ok(c) => positive += usize::from(c.verdict),
            Err(uncert::error::Error::SchurDisagreement { .. }) => disagree += 1,
            Err(e) => panic!("{e}"),
        }
    }
    report(3, disagree == 0, start, format!("1000 triples, {disagree} disagreements, {positive} positive"));
    assert_eq!(disagree, 0);
}

#[test]
fn c4_commutative_range_matches_classical() {
    let start = Instant::now();
    let mut s = Sampler::new(4);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..200 {
        let alg = BlockAlgebra::new(BLOCK_SPECS[i % BLOCK_SPECS.len()].to_vec()).unwrap();
        let map = TracialMap::usual_trace(&alg);
        let rho = s.density_element(&alg);
        let a = s.hermitian_element(&alg);
        let b = s.hermitian_element(&alg);
        let general =
            verify::verify_schrodinger_commutative_range(&map, &rho, &a, &b, Variant::Tracial, &tol()).unwrap();
        let classical = verify::verify_schrodinger_classical(&rho, &a, &b, &tol()).unwrap();
        let d = (general.margin.unwrap() - classical.margin.unwrap()).abs();
        worst = worst.max(d);
        ok &= general.pass && classical.pass && d <= 1e-10;
    }
    report(4, ok, start, format!("200 instances, max margin difference {worst:.2e}"));
    assert!(ok, "max difference {worst:e}");
}

#[test]
fn c5_refinement_chain() {
    let start = Instant::now();
    // thresholds are exactly 1e-8·scale
    let tol = Tolerance { rel: 1e-8, abs: 0.0 };
    let grid = uncert::lab::instance::default_alpha_grid();
    let (mut used, mut tried, mut bad) = (0, 0u64, Vec::new());
    while used < 500 && tried < 20_000 {
        let dims = BLOCK_SPECS[(tried as usize) % BLOCK_SPECS.len()].to_vec();
        let spec = InstanceSpec::new(dims, MapFamily::CenterExpectation, 20_000, 5);
        let inst = lab::generate(TheoremId::LuoRefined, &spec, tried, Mode::Relaxed).unwrap();
        tried += 1;
        let rho = inst.rho.as_ref().unwrap();
        let b = inst.b.as_ref().unwrap();
        let luo = verify::verify_luo_refined(&inst.map, rho, &inst.a, b, &tol).unwrap();
        if luo.hypothesis("definite_skew").map(|h| h.status) != Some(HypothesisStatus::Met) {
            continue;
        }
        used += 1;
        let thr = luo.threshold;
        for name in ["refinement", "u_le_v_a", "u_le_v_b"] {
            if luo.check_margin(name).unwrap() < -thr {
                bad.push(format!("trial {}: {name}", inst.trial));
            }
        }
        for x in [&inst.a, b] {
            let v = verify::verify_skew_le_variance(&inst.map, rho, x, &tol).unwrap();
            if !v.pass {
                bad.push(format!("trial {}: I^1/2 <= V", inst.trial));
            }
            for &alpha in &grid {
                let h = verify::verify_skew_monotone_half(&inst.map, rho, x, alpha, &tol).unwrap();
                if !h.pass {
                    bad.push(format!("trial {}: I^{alpha} <= I^1/2", inst.trial));
                }
            }
        }
    }
    let ok = used == 500 && bad.is_empty();
    report(5, ok, start, format!("{used} definite instances of {tried}, {} violations", bad.len()));
    assert_eq!(used, 500, "only {used} instances with definite skew information");
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn c6_strict_mode_unmet_relaxed_passes() {
    let start = Instant::now();
    let families = MapFamily::ALL;
    let (mut strict_unmet, mut relaxed_checked, mut relaxed_fail) = (0, 0, 0);
    for i in 0..500u64 {
        let dims = BLOCK_SPECS[(i as usize) % BLOCK_SPECS.len()].to_vec();
        let family = families[(i as usize / BLOCK_SPECS.len()) % families.len()];
        let spec = InstanceSpec::new(dims, family, 500, 6);
        let inst = lab::generate(TheoremId::UncertaintyMain, &spec, i, Mode::Strict).unwrap();
        let strict = lab::run_theorem(&inst, TheoremId::UncertaintyMain, Mode::Strict, &tol()).unwrap();
        let diagnosed = strict
            .hypothesis("spectral_window")
            .is_some_and(|h| h.status == HypothesisStatus::Unmet && h.detail.contains("traceless commutator"));
        if diagnosed && !strict.hypotheses_met() && !strict.pass {
            strict_unmet += 1;
        }
        let relaxed = lab::run_theorem(&inst, TheoremId::UncertaintyMain, Mode::Relaxed, &tol()).unwrap();
        if meta(&relaxed, "m").is_some_and(|m| m > 1e-6) {
            relaxed_checked += 1;
            relaxed_fail += usize::from(!relaxed.pass);
        }
    }
    let ok = strict_unmet == 500 && relaxed_fail == 0;
    report(
        6,
        ok,
        start,
        format!("strict unmet {strict_unmet}/500, relaxed {relaxed_fail} failures on {relaxed_checked} with m > 1e-6"),
    );
    assert_eq!(strict_unmet, 500);
    assert!(relaxed_checked > 0);
    assert_eq!(relaxed_fail, 0);
}

#[test]
fn c7_planted_falsehood_found() {
    let start = Instant::now();
    let c = SearchConfig::new(TheoremId::PlantedVarianceLeSkew, Drop::None, 100, 7);
    let r = lab::counterexample_search(&c).unwrap();
    report(7, r.found, start, r.message.clone());
    assert!(r.found && r.trials_run <= 100);
}

#[test]
fn c8_determinism_across_threads() {
    let start = Instant::now();
    let spec = InstanceSpec::new(vec![2, 3], MapFamily::Composite, 300, 11).with_k(3);
    let config = CampaignConfig::new(TheoremId::ALL.to_vec(), spec);
    let runs: Vec<_> =
        [Some(1), Some(1), Some(2), Some(4)].into_iter().map(|n| lab::run_campaign_with_threads(&config, n).unwrap()).collect();
    let mut ok = true;
    for r in &runs[1..] {
        for (a, b) in runs[0].theorems.iter().zip(&r.theorems) {
            let same_margin = match (a.min_margin, b.min_margin) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                (None, None) => true,
                _ => false,
            };
            ok &= same_margin && a.argmin_seed == b.argmin_seed && a.argmin_trial == b.argmin_trial;
        }
    }
    report(8, ok, start, "thread counts 1, 1, 2, 4".into());
    assert!(ok);
}

#[test]
fn c9_endpoint_skew_vanishes() {
    let start = Instant::now();
    let mut s = Sampler::new(9);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..200 {
        let alg = BlockAlgebra::new(BLOCK_SPECS[i % BLOCK_SPECS.len()].to_vec()).unwrap();
        let family = MapFamily::ALL[(i / BLOCK_SPECS.len()) % 4];
        let codomain = BlockAlgebra::full(2).unwrap();
        let k = 1 + s.index(3);
        let map = s.tracial_map(&alg, family, k, &codomain).unwrap();
        let rho = s.wishart_element(&alg);
        assert!(rho.lambda_min().unwrap() > 1e-8, "rho must be invertible");
        let a = s.hermitian_element(&alg);
        let setting = Setting::new(&map, &rho, &tol()).unwrap();
        let scale = map.apply(&(&(&rho * &a) * &a)).unwrap().norm2().unwrap().max(1.0);
        for alpha in [0.0, 1.0] {
            let i_a = setting.skew_any(&a, AlphaParam::new(alpha).unwrap()).unwrap().value;
            let n = i_a.norm2().unwrap();
            worst = worst.max(n / scale);
            ok &= n <= 1e-9 * scale;
        }
    }
    report(9, ok, start, format!("200 instances, max |I^0|, |I^1| / scale {worst:.2e}"));
    assert!(ok, "worst relative norm {worst:e}");
}
