use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruin_core::finite_time::finite_time_ruin;
use ruin_core::model::builtin;
use ruin_core::ultimate::{
    coefficient_triples, solve_ultimate, ultimate_branch, ultimate_generic, Boundary, SolveOptions, SolverKind,
};
use ruin_core::{
    ruin_table, FiniteTimeRequest, Model, NumericMode, Pmf, Rational, Registry, RuinError, SeasonalModel, UltimateSource,
};

fn first_float() -> SeasonalModel<f64> {
    let Model::Float(m) = builtin::first_example().build().unwrap() else { unreachable!() };
    m
}

fn first_exact() -> SeasonalModel<Rational> {
    let Model::Exact(m) = builtin::first_example().with_mode(NumericMode::Exact).build().unwrap() else { unreachable!() };
    m
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn random_branch_one(rng: &mut ChaCha8Rng) -> SeasonalModel<Rational> {
    let seasons = (0..3)
        .map(|_| {
            let w: Vec<Rational> = (0..4).map(|k| int(if k == 0 { rng.random_range(1..=9) } else { rng.random_range(0..=9) })).collect();
            Pmf::from_weights(w).unwrap()
        })
        .collect();
    SeasonalModel::new(seasons).unwrap()
}

/// Coefficient recursions for `s0 != 0` as published, transcribed term by term.
fn published_triples(model: &SeasonalModel<Rational>, n_max: usize) -> Vec<[Rational; 3]> {
    let (a, b, c) = (&model.seasons()[0], &model.seasons()[1], &model.seasons()[2]);
    let s = |k: usize| model.aggregate().mass(k);
    let (b0, c0, c1) = (b.mass(0), c.mass(0), c.mass(1));
    let mut rows = vec![
        [Rational::one(), Rational::zero(), Rational::zero()],
        [Rational::zero(), Rational::one(), Rational::zero()],
        [-Rational::one() / (&b0 * &c0), -(&c1 / &c0) - Rational::one() / &b0, Rational::one() / (&b0 * &c0)],
    ];
    for n in 3..=n_max {
        let sum = |idx: usize| (1..n).fold(Rational::zero(), |acc, k| acc + s(k) * &rows[n - k][idx]);
        let ab: Rational = (0..n).fold(Rational::zero(), |acc, k| acc + a.mass(k) * b.mass(n - 1 - k));
        let an2 = a.mass(n - 2);
        let alpha = (rows[n - 3][0].clone() - sum(0) - &an2) / s(0);
        let beta = (rows[n - 3][1].clone() - sum(1) - &an2 * &c0 + &c0 * ab) / s(0);
        let gamma = (rows[n - 3][2].clone() - sum(2) + an2) / s(0);
        rows.push([alpha, beta, gamma]);
    }
    rows
}

#[test]
fn coefficient_triples_match_published_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let model = random_branch_one(&mut rng);
        let ours = coefficient_triples(&model, 25).unwrap();
        let theirs = published_triples(&model, 25);
        for (n, (o, t)) in ours.iter().zip(&theirs).enumerate() {
            assert_eq!([o.alpha.clone(), o.beta.clone(), o.gamma.clone()], *t, "row {n}");
        }
    }
}

#[test]
fn coefficient_row_two_on_first_example() {
    let m = first_exact();
    let t = &coefficient_triples(&m, 2).unwrap()[2];
    let (b0, c0, c1) = (m.seasons()[1].mass(0), m.seasons()[2].mass(0), m.seasons()[2].mass(1));
    assert_eq!(t.alpha, -Rational::one() / (&b0 * &c0));
    assert_eq!(t.beta, -(&c1 / &c0) - Rational::one() / &b0);
    assert_eq!(t.gamma, Rational::one() / (&b0 * &c0));
    // b0 = 2/5, c0 = 3/10.
    assert_eq!(t.alpha, Rational::new((-25).into(), 3.into()));
}

#[test]
fn exact_mode_agrees_with_float() {
    let opts = SolveOptions { u_max: 20, ..Default::default() };
    let exact = ultimate_generic(&first_exact(), &opts).unwrap();
    let float = ultimate_generic(&first_float(), &opts).unwrap();
    assert_eq!(exact.meta.precision_bits, None);
    for (e, f) in exact.phi_f64().iter().zip(&float.phi) {
        assert!((e - f).abs() < 1e-12);
    }
    let branch = ultimate_branch(&first_exact(), &opts).unwrap();
    assert_eq!(branch.phi, exact.phi);
}

#[test]
fn no_claims_survive_for_sure() {
    let m = SeasonalModel::homogeneous(Pmf::point_mass(0, 1.0), 3).unwrap();
    for kind in [SolverKind::Branch, SolverKind::Generic] {
        let v = solve_ultimate(&m, kind, &SolveOptions::default()).unwrap();
        assert!(v.phi.iter().all(|&p| (p - 1.0).abs() < 1e-12), "{kind:?}");
    }
}

#[test]
fn long_horizons_approach_ultimate_from_below() {
    let m = first_float();
    let ultimate = ultimate_branch(&m, &SolveOptions::default()).unwrap().psi_f64();
    let finite = finite_time_ruin(&m, 20, 1600, 0).unwrap();
    for u in 0..=20 {
        let (a, b) = (*finite.get(u, 200), *finite.get(u, 1600));
        assert!(a <= b + 1e-15 && b <= ultimate[u] + 1e-12, "u = {u}");
        assert!(ultimate[u] - b < 1e-7, "u = {u}: {} vs {}", ultimate[u], b);
    }
}

#[test]
fn start_season_rotates_the_model() {
    let registry = Registry::default();
    let model = builtin::first_example().build().unwrap();
    let request = FiniteTimeRequest { u_max: 10, t_max: 1600, start_season: 1, ..Default::default() };
    let table = ruin_table(
        &model,
        registry.finite("recursion").unwrap(),
        registry.ultimate("generic").unwrap(),
        &request,
        &SolveOptions::default(),
    )
    .unwrap();
    let rotated = ultimate_generic(&first_float().rotated(1), &SolveOptions { u_max: 10, ..Default::default() }).unwrap();
    let inf = table.ultimate.unwrap();
    assert_eq!(inf, rotated.psi_f64());
    for u in 0..=10 {
        assert!((inf[u] - table.finite.get(u, 1600)).abs() < 1e-7);
    }
    let season0 = ultimate_generic(&first_float(), &SolveOptions::default()).unwrap().psi_f64();
    assert!((season0[0] - inf[0]).abs() > 1e-3);
}

#[test]
fn fixed_boundary_matches_adaptive() {
    let m = first_float();
    let adaptive = ultimate_generic(&m, &SolveOptions::default()).unwrap();
    let fixed = ultimate_generic(&m, &SolveOptions { boundary: Boundary::Fixed(1000), ..Default::default() }).unwrap();
    assert_eq!(fixed.boundary_index, 1000);
    assert_eq!(fixed.meta.boundaries_tried, vec![1000]);
    for (a, f) in adaptive.phi.iter().zip(&fixed.phi) {
        assert!((a - f).abs() < 1e-10);
    }
}

#[test]
fn double_precision_alone_is_not_enough_far_out() {
    let opts = SolveOptions { boundary: Boundary::Fixed(2000), precision_escalation: false, ..Default::default() };
    match ultimate_generic(&first_float(), &opts) {
        Err(RuinError::PrecisionExhausted { needed_bits, available_bits: 53 }) => assert!(needed_bits > 53),
        other => panic!("expected PrecisionExhausted, got {other:?}"),
    }
    let opts = SolveOptions { precision_escalation: true, ..opts };
    let wide = ultimate_generic(&first_float(), &opts).unwrap();
    assert!(wide.meta.escalations >= 1);
    assert!(wide.meta.precision_bits.unwrap() > 53);
}

#[test]
fn solver_preconditions() {
    let sup = SeasonalModel::homogeneous(Pmf::from_weights(vec![0.0, 0.0, 1.0]).unwrap(), 3).unwrap();
    assert!(matches!(ultimate_generic(&sup, &SolveOptions::default()), Err(RuinError::NotSubcritical { .. })));
    let two = SeasonalModel::homogeneous(Pmf::from_weights(vec![0.5, 0.5]).unwrap(), 2).unwrap();
    assert!(matches!(ultimate_branch(&two, &SolveOptions::default()), Err(RuinError::WrongPeriod { found: 2, .. })));
}

#[test]
fn period_one_table_uses_homogeneous_solver() {
    let registry = Registry::default();
    let spec = ruin_core::ModelSpec {
        seasons: vec![ruin_core::SeasonSpec::Weights { weights: vec!["3/4".into(), "0".into(), "1/4".into()] }],
        ..builtin::first_example()
    };
    let model = spec.build().unwrap();
    let request = FiniteTimeRequest { u_max: 5, t_max: 3, ..Default::default() };
    let opts = SolveOptions::default();
    let t = ruin_table(&model, registry.finite("recursion").unwrap(), registry.ultimate("homogeneous").unwrap(), &request, &opts)
        .unwrap();
    // Steps of +1 w.p. 3/4 and -1 w.p. 1/4 reach 0 from u with probability
    // (1/3)^u; from 0 the first step decides: 1/4 + 3/4 * 1/3.
    let psi = t.ultimate.unwrap();
    assert!((psi[0] - 0.5).abs() < 1e-14);
    for (u, p) in psi.iter().enumerate().skip(1) {
        assert!((p - (1.0f64 / 3.0).powi(u as i32)).abs() < 1e-14);
    }
    let t = ruin_table(&model, registry.finite("recursion").unwrap(), registry.ultimate("branch").unwrap(), &request, &opts)
        .unwrap();
    assert!(t.ultimate.is_none());
    assert!(matches!(t.source, UltimateSource::Unavailable { .. }));
}
