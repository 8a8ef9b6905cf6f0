use homsim::linalg::hermitian_eigenvalues;
use homsim::metrics::entropy_bits;
use homsim::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    C::new(re, im)
}

/// Random normalized state on `cutoffs`, supported on occupations allowed by `keep`.
fn state_with(
    cutoffs: Vec<usize>,
    raw: &[(f64, f64)],
    keep: impl Fn(&[usize]) -> bool,
) -> Option<State> {
    let layout = ModeLayout::new(cutoffs).ok()?;
    let amps: Vec<Complex64> = (0..layout.dim())
        .map(|i| {
            let (re, im) = raw[i % raw.len()];
            if keep(&layout.occupations(i)) {
                c(re, im)
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    let s = State::from_amplitudes(layout, amps).ok()?;
    s.normalize().ok().map(|x| x.0)
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
}

fn cutoffs(modes: std::ops::Range<usize>, max: usize) -> impl Strategy<Value = Vec<usize>> {
    modes.prop_flat_map(move |m| prop::collection::vec(1..=max, m))
}

fn block_populations(
    s: &State,
    a: usize,
    b: usize,
    diff: bool,
) -> std::collections::BTreeMap<isize, f64> {
    let l = s.layout();
    let mut out = std::collections::BTreeMap::new();
    for (i, amp) in s.amplitudes().iter().enumerate() {
        let (na, nb) = (l.occupation(i, a) as isize, l.occupation(i, b) as isize);
        let key = if diff { na - nb } else { na + nb };
        *out.entry(key).or_insert(0.0) += amp.norm_sqr();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_round_trip(cuts in cutoffs(1..5, 5), seed in 0usize..10_000) {
        let l = ModeLayout::new(cuts).unwrap();
        let i = seed % l.dim();
        let occ = l.occupations(i);
        prop_assert_eq!(l.index_of(&occ).unwrap(), i);
    }

    #[test]
    fn commutator_is_identity_below_the_top_level(cuts in cutoffs(1..4, 5), raw in amps(), mode_seed in 0usize..8) {
        let mode = mode_seed % cuts.len();
        let top = cuts[mode];
        let Some(psi) = state_with(cuts, &raw, |o| o[mode] < top) else { return Ok(()) };
        let up = psi.apply_creation(mode).unwrap();
        prop_assert_eq!(up.leakage, 0.0);
        let a_ad = up.state.apply_annihilation(mode).unwrap();
        let ad_a = psi.apply_annihilation(mode).unwrap().apply_creation(mode).unwrap().state;
        let comm = a_ad.add_scaled(c(-1.0, 0.0), &ad_a).unwrap();
        let err = comm.add_scaled(c(-1.0, 0.0), &psi).unwrap().norm();
        prop_assert!(err < 1e-12, "commutator error {err}");
    }

    #[test]
    fn inner_product_is_hermitian_and_bounded(cuts in cutoffs(2..3, 3), raw1 in amps(), raw2 in amps()) {
        let (Some(a), Some(b)) = (state_with(cuts.clone(), &raw1, |_| true), state_with(cuts, &raw2, |_| true)) else { return Ok(()) };
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-14);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn beam_splitter_is_unitary_and_conserves_photon_number(
        cut in 2usize..6,
        raw in amps(),
        t in 0.0f64..1.0,
        phase_t in 0.0f64..6.3,
        phase_r in 0.0f64..6.3,
    ) {
        let Some(psi) = state_with(vec![cut, cut, 1], &raw, |o| o[0] + o[1] <= cut) else { return Ok(()) };
        let r = (1.0 - t * t).sqrt();
        let bs = BeamSplitter::new(C::from_polar(t, phase_t), C::from_polar(r, phase_r)).unwrap();
        let out = apply_beam_splitter(&psi, 0, 1, &bs).unwrap();
        prop_assert!(out.leakage < 1e-14);
        prop_assert!((out.state.norm_sqr() - 1.0).abs() < 1e-12);
        let before = block_populations(&psi, 0, 1, false);
        let after = block_populations(&out.state, 0, 1, false);
        for (n, p) in before {
            prop_assert!((after.get(&n).copied().unwrap_or(0.0) - p).abs() < 1e-12, "block {n}");
        }
    }

    #[test]
    fn beam_splitter_inverse_round_trip(cut in 2usize..5, raw in amps(), t in 0.0f64..1.0, phase in 0.0f64..6.3) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |o| o[0] + o[1] <= cut) else { return Ok(()) };
        let r = C::from_polar((1.0 - t * t).sqrt(), phase);
        let bs = BeamSplitter::new(c(t, 0.0), r).unwrap();
        // inverse of [[t, −r], [r*, t*]] is [[t*, r], [−r*, t]]
        let inv = BeamSplitter::new(c(t, 0.0), -r).unwrap();
        let out = apply_beam_splitter(&psi, 0, 1, &bs).unwrap().state;
        let back = apply_beam_splitter(&out, 0, 1, &inv).unwrap().state;
        prop_assert!(back.add_scaled(c(-1.0, 0.0), &psi).unwrap().norm() < 1e-12);
    }

    #[test]
    fn squeezer_norm_plus_leakage_is_conserved(cut in 3usize..7, raw in amps(), s in 0.0f64..0.6, phi in 0.0f64..6.3) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |o| o[0] + o[1] <= 2) else { return Ok(()) };
        let out = apply_two_mode_squeezer(&psi, 0, 1, &Squeeze::new(s, phi).unwrap()).unwrap();
        prop_assert!(out.leakage >= 0.0);
        prop_assert!((out.state.norm_sqr() + out.leakage - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squeezer_conserves_number_difference(cut in 4usize..8, raw in amps(), s in 0.0f64..0.3, phi in 0.0f64..6.3) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |o| o[0] + o[1] <= 2) else { return Ok(()) };
        let out = apply_two_mode_squeezer(&psi, 0, 1, &Squeeze::new(s, phi).unwrap()).unwrap();
        let before = block_populations(&psi, 0, 1, true);
        let after = block_populations(&out.state, 0, 1, true);
        for (d, p) in &after {
            let want = before.get(d).copied().unwrap_or(0.0);
            prop_assert!((p - want).abs() <= out.leakage + 1e-12, "difference block {d}");
        }
    }

    #[test]
    fn squeezer_routes_agree(cut in 6usize..9, raw in amps(), s in 0.0f64..0.25, phi in 0.0f64..6.3) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |o| o[0] + o[1] <= 2) else { return Ok(()) };
        let xi = Squeeze::new(s, phi).unwrap();
        let a = apply_two_mode_squeezer(&psi, 0, 1, &xi).unwrap();
        let b = apply_squeezer_factored(&psi, 0, 1, &xi).unwrap();
        // padding error of the exponential is bounded by what truncation loses anyway
        let tol = 1e-10 + b.leakage;
        prop_assert!(a.state.add_scaled(c(-1.0, 0.0), &b.state).unwrap().norm() < tol);
        prop_assert!((a.leakage - b.leakage).abs() < tol);
    }

    #[test]
    fn povm_is_complete(n in 0usize..30, eta in 0.0f64..=1.0) {
        let d = Detector::on_off(eta).unwrap();
        prop_assert!((d.click_weight(n) + d.no_click_weight(n) - 1.0).abs() < 1e-14);
        prop_assert!((povm_no_click_weight(n, eta) - (1.0 - eta).powi(n as i32)).abs() < 1e-14);
    }

    #[test]
    fn herald_outcomes_sum_to_one(cut in 1usize..4, raw in amps(), eta in 0.01f64..=1.0) {
        let Some(psi) = state_with(vec![cut, cut, cut], &raw, |_| true) else { return Ok(()) };
        let total: f64 = (0..=cut)
            .map(|n| herald_exact(&psi, &[(2, n)]).map(|x| x.1).unwrap_or(0.0))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let d = Detector::on_off(eta).unwrap();
        let p = |o: HeraldOutcome<f64>| herald_on_off(&psi, &Herald::new(vec![(2, o)]).unwrap()).map(|h| h.probability).unwrap_or(0.0);
        prop_assert!((p(HeraldOutcome::Click(d)) + p(HeraldOutcome::NoClick(d)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_herald_is_branch_weighted(cut in 1usize..3, raw1 in amps(), raw2 in amps(), w in 0.05f64..0.95, eta in 0.1f64..=1.0) {
        let cuts = vec![cut, cut, cut];
        let (Some(a), Some(b)) = (state_with(cuts.clone(), &raw1, |_| true), state_with(cuts, &raw2, |_| true)) else { return Ok(()) };
        let spec = Herald::new(vec![(2, HeraldOutcome::Click(Detector::on_off(eta).unwrap()))]).unwrap();
        let pa = herald_on_off(&a, &spec).map(|h| h.probability).unwrap_or(0.0);
        let pb = herald_on_off(&b, &spec).map(|h| h.probability).unwrap_or(0.0);
        let both = herald_evolved(
            &[(w, Truncated { state: a, leakage: 0.0 }), (1.0 - w, Truncated { state: b, leakage: 0.0 })],
            &spec,
        );
        if let Ok(h) = both {
            prop_assert!((h.probability - (w * pa + (1.0 - w) * pb)).abs() < 1e-12);
            prop_assert!((h.state.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_is_partition_symmetric(cuts in cutoffs(2..4, 3), raw in amps()) {
        let Some(psi) = state_with(cuts.clone(), &raw, |_| true) else { return Ok(()) };
        let m = cuts.len();
        let a = entanglement_entropy(&psi, &[0]).unwrap();
        let b = entanglement_entropy(&psi, &(1..m).collect::<Vec<_>>()).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn reduced_density_is_a_state(cuts in cutoffs(2..4, 3), raw in amps()) {
        let Some(psi) = state_with(cuts, &raw, |_| true) else { return Ok(()) };
        let rho = psi.reduced_density(&[0]).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-14);
        let ev = hermitian_eigenvalues(&rho);
        prop_assert!(ev.iter().all(|l| *l > -1e-12));
        prop_assert!(entropy_bits(&ev) <= (rho.dim() as f64).log2() + 1e-9);
    }

    #[test]
    fn parity_fourier_matches_scan(cut in 1usize..5, raw in amps(), phi in 0.0f64..6.3) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |_| true) else { return Ok(()) };
        let sig = ParitySignal::new(&psi).unwrap();
        let scan = parity_phase_scan(&psi, &[phi, phi + std::f64::consts::TAU]).unwrap();
        prop_assert!((sig.value(phi) - scan[0]).abs() < 1e-12);
        prop_assert!((scan[0] - scan[1]).abs() < 1e-10);
        prop_assert!(sig.value(phi).abs() <= 1.0 + 1e-12);
        let h = 1e-5;
        let fd = (sig.value(phi + h) - sig.value(phi - h)) / (2.0 * h);
        prop_assert!((sig.derivative(phi) - fd).abs() < 1e-6);
    }

    #[test]
    fn single_precision_tracks_double(cut in 2usize..4, raw in amps()) {
        let Some(psi) = state_with(vec![cut, cut], &raw, |o| o[0] + o[1] <= cut) else { return Ok(()) };
        let psi32 = State32::from_amplitudes(
            ModeLayout::uniform(2, cut).unwrap(),
            psi.amplitudes().iter().map(|a| C::new(a.re as f32, a.im as f32)).collect(),
        ).unwrap();
        let a = apply_beam_splitter_5050(&psi, 0, 1).unwrap().state;
        let b = apply_beam_splitter_5050(&psi32, 0, 1).unwrap().state;
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((x.re - y.re as f64).abs() < 1e-5 && (x.im - y.im as f64).abs() < 1e-5);
        }
    }
}
