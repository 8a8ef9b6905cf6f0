//! Reproduction criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits nonzero if any criterion fails.

use homsim::experiments::{
    fig4_row, noon_row, noon_state, Fig5Engine, Fig6Engine, FIG4_CUTOFF, FIG5_CUTOFF, FIG6_CUTOFF,
};
use homsim::linalg::hermitian_eigenvalues;
use homsim::metrics::entropy_bits;
use homsim::schemes::*;
use homsim::*;
use std::process::ExitCode;
use std::time::Instant;

type Check = fn() -> std::result::Result<String, String>;

fn grid(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + step * i as f64).collect()
}

fn fmt_err(e: homsim::Error) -> String {
    format!("error: {e}")
}

fn noon4_floor() -> std::result::Result<String, String> {
    let mut fs = Vec::new();
    for s in grid(0.01, 0.01, 20) {
        let pt = Fig5Engine::new(s, FIG5_CUTOFF)
            .and_then(|e| e.evaluate(0.66))
            .map_err(fmt_err)?;
        fs.push(pt.fidelity);
    }
    let min = fs.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = fs.windows(2).all(|w| w[1] <= w[0]);
    let detail = format!("min F = {min:.5} over s = 0.01..0.20, nonincreasing = {monotone}");
    if min >= 0.85 && monotone {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn noon4_efficiency_insensitivity() -> std::result::Result<String, String> {
    let etas = grid(0.1, 0.1, 9);
    let ss = grid(0.01, 0.01, 20);
    let mut table = Vec::new();
    for &s in &ss {
        let e = Fig5Engine::new(s, FIG5_CUTOFF).map_err(fmt_err)?;
        let row = etas
            .iter()
            .map(|&eta| e.evaluate(eta).map(|p| p.fidelity))
            .collect::<Result<Vec<_>>>();
        table.push(row.map_err(fmt_err)?);
    }
    let decreasing = (0..etas.len()).all(|j| table.windows(2).all(|w| w[1][j] < w[0][j]));
    let mut worst = (0.0, 0.0);
    for (i, &s) in ss.iter().enumerate().filter(|(_, s)| **s <= 0.1 + 1e-12) {
        let row = &table[i];
        let spread = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - row.iter().cloned().fold(f64::INFINITY, f64::min);
        if spread > worst.1 {
            worst = (s, spread);
        }
    }
    let detail = format!(
        "decreasing in s at every eta = {decreasing}; largest spread over eta for s <= 0.10 is {:.4} at s = {:.2}",
        worst.1, worst.0
    );
    if decreasing && worst.1 < 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn source_efficiency_threshold() -> std::result::Result<String, String> {
    let engine = Fig6Engine::new(0.05, FIG6_CUTOFF).map_err(fmt_err)?;
    let mut found = None;
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        if let Ok(pt) = engine.evaluate(p, 0.66) {
            if pt.delta_phi < 0.5 {
                found = Some((p, pt.delta_phi));
                break;
            }
        }
    }
    match found {
        Some((p, d)) if (0.66 - 1e-9..=0.70 + 1e-9).contains(&p) => {
            Ok(format!("smallest p with delta_phi < 0.5 is {p:.2} (delta_phi = {d:.4})"))
        }
        Some((p, d)) => Err(format!(
            "smallest p with delta_phi < 0.5 is {p:.2} (delta_phi = {d:.4}), expected within [0.66, 0.70]"
        )),
        None => Err("delta_phi never drops below 0.5".into()),
    }
}

fn imperfect_source_anchor() -> std::result::Result<String, String> {
    let engine = Fig6Engine::new(0.05, FIG6_CUTOFF).map_err(fmt_err)?;
    let anchor = engine.evaluate(0.69, 0.66).map_err(fmt_err)?;
    let pts = grid(0.3, 0.1, 7)
        .into_iter()
        .map(|eta| engine.evaluate(0.69, eta))
        .collect::<Result<Vec<_>>>()
        .map_err(fmt_err)?;
    let spread = |f: &dyn Fn(&homsim::experiments::Fig6Point) -> f64| {
        let v: Vec<f64> = pts.iter().map(f).collect();
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (sf, sd) = (spread(&|p| p.fidelity), spread(&|p| p.delta_phi));
    let detail = format!(
        "F(p = 0.69) = {:.4}; spread over eta in [0.3, 0.9]: F {sf:.4}, delta_phi {sd:.4}",
        anchor.fidelity
    );
    if (anchor.fidelity - 0.595).abs() <= 0.02 && sf < 0.01 && sd < 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn epr_gap(s: f64) -> Result<f64> {
    let r = fig4_row(s, Objective::MinEpr, FIG4_CUTOFF)?;
    Ok(r.second - r.first)
}

fn bisect_sign_change(mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = epr_gap(lo)?;
    for _ in 0..16 {
        let mid = 0.5 * (lo + hi);
        if (epr_gap(mid)? > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn epr_crossover() -> std::result::Result<String, String> {
    let inside = grid(0.10, 0.05, 8);
    let mut all_below = true;
    for &s in &inside {
        if epr_gap(s).map_err(fmt_err)? >= 0.0 {
            all_below = false;
        }
    }
    let lower = bisect_sign_change(0.02, 0.10).map_err(fmt_err)?;
    let upper = bisect_sign_change(0.45, 0.60).map_err(fmt_err)?;
    let detail = format!(
        "second-order below first-order on s = 0.10..0.45: {all_below}; advantage region ({lower:.4}, {upper:.4})"
    );
    if all_below && (lower - 0.08).abs() <= 0.03 && (upper - 0.47).abs() <= 0.03 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn entropy_ordering() -> std::result::Result<String, String> {
    let ss = grid(0.05, 0.05, 12);
    let mut ordered = true;
    let mut strict = 0;
    for &s in &ss {
        let r = fig4_row(s, Objective::MaxEntropy, FIG4_CUTOFF).map_err(fmt_err)?;
        ordered &= r.second >= r.first && r.first >= r.tmss;
        if r.second > r.first {
            strict += 1;
        }
    }
    let frac = strict as f64 / ss.len() as f64;
    let detail = format!(
        "ordering holds at all points = {ordered}; strict second > first at {strict}/{}",
        ss.len()
    );
    if ordered && frac >= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `Π_k (x² + e^{iφ_k} y²)` expanded term by term, `x^i y^j → √(i! j!)|i, j⟩`.
fn polynomial_oracle(phases: &[f64], cutoff: usize) -> State {
    let mut poly = vec![C::new(1.0, 0.0)];
    for &phi in phases {
        let mut next = vec![C::new(0.0, 0.0); poly.len() + 1];
        for (k, a) in poly.iter().enumerate() {
            next[k] += *a;
            next[k + 1] += *a * C::from_polar(1.0, phi);
        }
        poly = next;
    }
    let m = phases.len();
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let terms: Vec<_> = poly
        .iter()
        .enumerate()
        .map(|(k, a)| {
            (
                *a * (fact(2 * (m - k)) * fact(2 * k)).sqrt(),
                vec![2 * (m - k), 2 * k],
            )
        })
        .collect();
    State::from_terms(ModeLayout::uniform(2, cutoff).unwrap(), &terms)
        .unwrap()
        .normalize()
        .unwrap()
        .0
}

fn cascade_identity() -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for n in [2usize, 4, 6, 8] {
        let row = noon_row(n, CascadeMode::Ideal, n).map_err(fmt_err)?;
        let cascade = noon_cascade(n, CascadeMode::Ideal, n).map_err(fmt_err)?;
        let oracle = polynomial_oracle(&cascade_phases(n), n);
        let vs_oracle = fidelity(&oracle, &cascade.state).map_err(fmt_err)?;
        let oracle_noon =
            fidelity(&noon_state(n, false, n).map_err(fmt_err)?, &oracle).map_err(fmt_err)?;
        for f in [row.fidelity, vs_oracle, oracle_noon] {
            worst = worst.max((f - 1.0).abs());
        }
    }
    let detail = format!("max |F − 1| over N = 2, 4, 6, 8 = {worst:.2e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn weak_coupling() -> std::result::Result<String, String> {
    let (p1, p2) = squeezer_phases_for(0.0);
    let bucket = IdlerHerald::OnOff(Detector::on_off(1.0).unwrap());
    let deficit = |psi: &State, s: f64, herald: IdlerHerald<f64>| -> Result<f64> {
        let h = superpose_add2(psi, Squeeze::new(s, p1)?, Squeeze::new(s, p2)?, herald, 8)?;
        let (ideal, _) = superpose_add2_ideal(psi, 0.0, C::new(1.0, 0.0))?;
        Ok(1.0 - fidelity(&ideal, &h.state)?)
    };
    let inputs = [
        ("vacuum", State::vacuum(ModeLayout::uniform(2, 8).unwrap())),
        ("two-photon NOON", noon_state(2, true, 8).unwrap()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, psi) in &inputs {
        let exact = deficit(psi, 0.01, IdlerHerald::Exact).map_err(fmt_err)?;
        let d1 = deficit(psi, 0.01, bucket).map_err(fmt_err)?;
        let d2 = deficit(psi, 0.02, bucket).map_err(fmt_err)?;
        let d4 = deficit(psi, 0.04, bucket).map_err(fmt_err)?;
        let ratio = d4 / d2;
        ok &= 1.0 - exact > 0.999 && 1.0 - d1 > 0.999 && (ratio - 4.0).abs() <= 0.5;
        parts.push(format!(
            "{name}: F(s=0.01) exact {:.6} bucket {:.6}, deficit ratio {ratio:.3}",
            1.0 - exact,
            1.0 - d1
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn property_anchors() -> std::result::Result<String, String> {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let l = ModeLayout::uniform(3, 4).unwrap();
    let psi = State::from_terms(
        l.clone(),
        &[
            (C::new(0.4, 0.1), vec![0, 1, 0]),
            (C::new(-0.3, 0.5), vec![2, 1, 1]),
            (C::new(0.2, 0.0), vec![1, 0, 2]),
            (C::new(0.0, -0.6), vec![1, 2, 0]),
        ],
    )
    .unwrap()
    .normalize()
    .unwrap()
    .0;
    let bs = BeamSplitter::new(C::new(0.6, 0.0), C::new(0.0, 0.8)).unwrap();
    let out = apply_beam_splitter(&psi, 0, 1, &bs).unwrap();
    check(
        "beam splitter unitarity",
        (out.state.norm_sqr() - 1.0).abs() < 1e-12 && out.leakage < 1e-14,
    );
    let total = |s: &State| s.mean_photons(0).unwrap() + s.mean_photons(1).unwrap();
    check(
        "beam splitter photon number",
        (total(&psi) - total(&out.state)).abs() < 1e-12,
    );
    let sq = apply_two_mode_squeezer(&psi, 0, 2, &Squeeze::new(0.3, 1.0).unwrap()).unwrap();
    check(
        "squeezer leakage bound",
        (sq.state.norm_sqr() + sq.leakage - 1.0).abs() < 1e-10,
    );
    let wide = ModeLayout::uniform(2, 12).unwrap();
    let small = State::from_terms(
        wide,
        &[
            (C::new(0.8, 0.0), vec![1, 0]),
            (C::new(0.0, 0.6), vec![0, 2]),
        ],
    )
    .unwrap();
    let sq2 = apply_two_mode_squeezer(&small, 0, 1, &Squeeze::new(0.2, 0.4).unwrap()).unwrap();
    let dpop = |s: &State| s.mean_photons(0).unwrap() - s.mean_photons(1).unwrap();
    check(
        "squeezer number difference",
        (dpop(&small) - dpop(&sq2.state)).abs() < 1e-8,
    );
    for eta in [0.0, 0.3, 0.66, 1.0] {
        let d = Detector::on_off(eta).unwrap();
        check(
            "POVM completeness",
            (0..20).all(|n| (d.click_weight(n) + d.no_click_weight(n) - 1.0).abs() < 1e-14),
        );
    }
    let sa = entanglement_entropy(&psi, &[0]).unwrap();
    let sb = entanglement_entropy(&psi, &[1, 2]).unwrap();
    check("entropy partition symmetry", (sa - sb).abs() < 1e-9);
    let rho = psi.reduced_density(&[0, 1]).unwrap();
    let sc = entropy_bits(&hermitian_eigenvalues(&rho));
    let sd = entanglement_entropy(&psi, &[2]).unwrap();
    check(
        "entropy partition symmetry (two-mode block)",
        (sc - sd).abs() < 1e-9,
    );
    for s in [0.1f64, 0.4, 0.8] {
        let tm = tmss_state(s, ModeLayout::uniform(2, 25).unwrap()).unwrap();
        let (ch, sh) = (s.cosh().powi(2), s.sinh().powi(2));
        let want = ch * ch.log2() - sh * sh.log2();
        check(
            "TMSS entropy",
            (entanglement_entropy(&tm.state, &[0]).unwrap() - want).abs() < 1e-6,
        );
    }
    let tm = tmss_state(0.5, ModeLayout::uniform(2, 20).unwrap()).unwrap();
    check(
        "TMSS EPR sum",
        (epr_sum(&tm.state, 0, 1).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-6,
    );
    for n in [2usize, 4] {
        let (_, d) = best_phase_sensitivity(&noon_state(n, false, n).unwrap(), 360).unwrap();
        check("NOON parity sensitivity", (d - 1.0 / n as f64).abs() < 1e-6);
    }
    if failures.is_empty() {
        Ok("unitarity, conservation, POVM, entropy symmetry, TMSS anchors, NOON parity".into())
    } else {
        Err(format!("failed: {}", failures.join(", ")))
    }
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("1 noon4 fidelity floor at eta = 0.66 (fig5b)", noon4_floor),
        (
            "2 noon4 fidelity shape over (s, eta) (fig5a)",
            noon4_efficiency_insensitivity,
        ),
        (
            "3 source-efficiency threshold for delta_phi < 0.5 (fig6a)",
            source_efficiency_threshold,
        ),
        (
            "4 imperfect-source fidelity anchor (fig6b)",
            imperfect_source_anchor,
        ),
        ("5 EPR second-order advantage region (fig4b)", epr_crossover),
        ("6 entropy ordering (fig4a)", entropy_ordering),
        ("7 NOON cascade identity", cascade_identity),
        ("8 weak-coupling limit", weak_coupling),
        ("9 property anchors", property_anchors),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS criterion {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
