mod common;

use wicketsim::matchsim::{estimate_matchup, head_to_head_matrix};
use wicketsim::{GammaParams, LineupConstraint, MatchConfig, Matchup, PriorBook, Role, SelectionScheme};

use common::*;

fn binomial_band(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn constant_teams_decide_every_match() {
    let data = dataset(vec![odi_constant_team("A", 50), odi_constant_team("B", 40)]);
    let cfg = constant_config(SelectionScheme::odi());
    let est = estimate_matchup(&data, "A", "B", &cfg, 10_000, 1).unwrap();
    assert_eq!((est.p_a, est.p_b, est.p_draw), (1.0, 0.0, 0.0));
    assert_eq!((est.mean_score_a, est.mean_score_b), (550.0, 440.0));
}

#[test]
fn mirrored_teams_split_evenly() {
    let data = mirrored_pair();
    let est = estimate_matchup(&data, "X", "Y", &MatchConfig::default(), 10_000, 7).unwrap();
    assert!((est.p_a - 0.5).abs() <= 0.02, "{est:?}");
    assert_eq!(est.wins_a + est.wins_b + est.draws, est.n);
    let h2h = head_to_head_matrix(&data, &["X", "Y"], &MatchConfig::default(), 10_000, 7).unwrap();
    assert_eq!(h2h.entries.len(), 2);
    for e in &h2h.entries {
        assert!((e.p_a - 0.5).abs() <= 0.02, "{e:?}");
    }
}

#[test]
fn two_point_toy_matches_enumeration() {
    // D {50, 20} vs C {30, 20}: wins 2/4, draws 1/4
    let data = toy4_dataset();
    let cfg = constant_config(two_point_scheme());
    let n = 10_000;
    let est = estimate_matchup(&data, "D", "C", &cfg, n, 3).unwrap();
    assert!((est.p_a - 0.5).abs() <= binomial_band(0.5, n), "{est:?}");
    assert!((est.p_draw - 0.25).abs() <= binomial_band(0.25, n), "{est:?}");
}

#[test]
fn band_coverage_over_seeds() {
    // A {40, 10} vs B {35, 15}: A wins only with 40, probability 1/2
    let data = toy4_dataset();
    let cfg = constant_config(two_point_scheme());
    let book = PriorBook::build(&data, &["A", "B"], cfg.fit).unwrap();
    let free = LineupConstraint::default();
    let m = Matchup::prepare(&data, &book, "A", "B", &cfg, &free, &free).unwrap();
    let n = 10_000;
    let inside = (0..100u64).filter(|&s| (m.estimate(n, s).unwrap().p_a - 0.5).abs() <= binomial_band(0.5, n)).count();
    assert!(inside >= 99, "{inside}/100 inside the band");
}

#[test]
fn estimates_ignore_worker_count() {
    let data = fixture_dataset("cwc12");
    let cfg = MatchConfig::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_matchup(&data, "AUS", "IND", &cfg, 5_000, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&run(3)).unwrap());
}

#[test]
fn raising_shape_never_lowers_scores_under_crn() {
    let data = fixture_dataset("cwc12");
    let cfg = MatchConfig { common_random_numbers: true, ..MatchConfig::default() };
    let free = LineupConstraint::default();
    let book = PriorBook::build(&data, &["AUS", "IND"], cfg.fit).unwrap();
    let target = data.team("AUS").unwrap().roster.iter().find(|p| p.role == Role::Batsman).unwrap().id.clone();
    let old = *book.get(&target, "IND").unwrap().params();
    let mut better = book.clone();
    better.set_params(&target, "IND", GammaParams::new(old.alpha() * 1.5, old.beta()).unwrap()).unwrap();

    let base = Matchup::prepare(&data, &book, "AUS", "IND", &cfg, &free, &free).unwrap();
    let up = Matchup::prepare(&data, &better, "AUS", "IND", &cfg, &free, &free).unwrap();
    let (mut xa, mut xb, mut ya, mut yb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rep in 0..3_000 {
        let r0 = base.replicate(11, rep, None, &mut xa, &mut xb);
        let r1 = up.replicate(11, rep, None, &mut ya, &mut yb);
        assert_eq!((&xa, &xb), (&ya, &yb));
        assert!(r1.score_a >= r0.score_a);
        assert_eq!(r1.score_b, r0.score_b);
    }
    let (e0, e1) = (base.estimate(3_000, 11).unwrap(), up.estimate(3_000, 11).unwrap());
    assert!(e1.wins_a >= e0.wins_a && e1.mean_score_a > e0.mean_score_a);
}

#[test]
fn locking_a_non_scorer_lowers_win_probability() {
    let (mut team_a, mut recs) = odi_constant_team("A", 50);
    let dud = player("A-bat-dud", Role::Batsman, false);
    recs.push(line(&dud.id, 0.0, 0));
    team_a.roster.push(dud.clone());
    // default grid: every line is near-constant (sd under a run), and the
    // 22- and 28-run margins are far outside the noise
    let data = dataset(vec![(team_a, recs), odi_constant_team("B", 48)]);
    let cfg = MatchConfig { common_random_numbers: true, ..MatchConfig::default() };
    let book = PriorBook::build(&data, &["A", "B"], cfg.fit).unwrap();
    let free = LineupConstraint::default();
    let locked = LineupConstraint { locked: [dud.id.clone()].into(), ..Default::default() };
    let open = Matchup::prepare(&data, &book, "A", "B", &cfg, &free, &free).unwrap().estimate(10_000, 5).unwrap();
    let forced = Matchup::prepare(&data, &book, "A", "B", &cfg, &locked, &free).unwrap().estimate(10_000, 5).unwrap();
    assert!((open.p_a - 0.25).abs() < binomial_band(0.25, 10_000), "{open:?}");
    assert_eq!(forced.p_a, 0.0);
}

#[test]
fn fixed_xi_uses_one_lineup() {
    let data = fixture_dataset("cwc12");
    let cfg = MatchConfig { fixed_xi: true, ..MatchConfig::default() };
    let book = PriorBook::build(&data, &["AUS", "IND"], cfg.fit).unwrap();
    let free = LineupConstraint::default();
    let run = Matchup::prepare(&data, &book, "AUS", "IND", &cfg, &free, &free).unwrap().run(500, 4).unwrap();
    assert_eq!(run.selected_a.iter().filter(|&&c| c == 500).count(), 11);
    assert!(run.selected_a.iter().all(|&c| c == 0 || c == 500));
}
