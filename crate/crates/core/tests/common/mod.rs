#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use wicketsim::priors::{gamma_tail, BetaGrid, FitInput};
use wicketsim::tournament::{Playoff, TournamentConfig};
use wicketsim::{Dataset, FitSettings, GammaParams, MatchConfig, MatchupRecord, Player, Role, SelectionScheme, SourceTier, Team};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_dataset(name: &str) -> Dataset {
    let dir = fixtures_dir();
    Dataset::load(
        &dir.join(format!("{name}_stats.csv")),
        &dir.join(format!("{name}_teams.json")),
        Some(&dir.join("defaults.json")),
    )
    .unwrap()
}

pub fn player(id: &str, role: Role, overseas: bool) -> Player {
    Player { id: id.into(), name: id.into(), team_id: String::new(), role, overseas }
}

/// One international innings line against every opponent.
pub fn line(player: &str, average: f64, highest: u32) -> MatchupRecord {
    MatchupRecord {
        player_id: player.into(),
        opponent_id: "*".into(),
        average,
        highest,
        innings: 1,
        tier: SourceTier::International,
    }
}

/// A grid whose first candidate is so small that `average == highest`
/// lines are unsatisfiable and fit with near-zero variance: every draw
/// rounds to the average.
pub fn degenerate_fit() -> FitSettings {
    FitSettings { grid: BetaGrid { lo: 1e-4, hi: 1.0, count: 2 }, ..FitSettings::default() }
}

pub fn constant_config(scheme: SelectionScheme) -> MatchConfig {
    MatchConfig { scheme, fit: degenerate_fit(), ..MatchConfig::default() }
}

pub type TeamParts = (Team, Vec<MatchupRecord>);

/// Exactly the eleven ODI-quota players, each always scoring `score`.
pub fn odi_constant_team(id: &str, score: u32) -> TeamParts {
    let roles = [
        (Role::FastBowler, 3),
        (Role::Spinner, 2),
        (Role::AllRounderFast, 1),
        (Role::AllRounderSpinner, 1),
        (Role::Batsman, 3),
        (Role::WicketKeeper, 1),
    ];
    let mut roster = Vec::new();
    let mut records = Vec::new();
    for (role, n) in roles {
        for k in 0..n {
            let pid = format!("{id}-{}-{k}", role.code());
            records.push(line(&pid, f64::from(score), score));
            roster.push(player(&pid, role, false));
        }
    }
    (Team { id: id.into(), name: id.into(), roster }, records)
}

/// One batsman slot and ten keeper slots.
pub fn two_point_scheme() -> SelectionScheme {
    let quotas = Role::ALL.into_iter().map(|r| (r, 0)).chain([(Role::Batsman, 1), (Role::WicketKeeper, 10)]).collect();
    SelectionScheme { quotas, ..SelectionScheme::odi() }
}

/// Ten keepers who never score plus two batsmen scoring `x` and `y`; under
/// [`two_point_scheme`] the team total is `x` or `y` with probability 1/2.
pub fn two_point_team(id: &str, x: u32, y: u32) -> TeamParts {
    let mut roster = Vec::new();
    let mut records = Vec::new();
    for k in 0..10 {
        let pid = format!("{id}-wk-{k}");
        records.push(line(&pid, 0.0, 0));
        roster.push(player(&pid, Role::WicketKeeper, false));
    }
    for (k, s) in [x, y].into_iter().enumerate() {
        let pid = format!("{id}-bat-{k}");
        records.push(line(&pid, f64::from(s), s));
        roster.push(player(&pid, Role::Batsman, false));
    }
    (Team { id: id.into(), name: id.into(), roster }, records)
}

pub fn dataset(parts: Vec<TeamParts>) -> Dataset {
    let (teams, records): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Dataset::from_parts(teams, records.concat(), Default::default()).unwrap()
}

/// Four two-point teams; C and D can tie at 20.
pub const TOY4: [(&str, u32, u32); 4] = [("A", 40, 10), ("B", 35, 15), ("C", 30, 20), ("D", 50, 20)];

pub fn toy4_dataset() -> Dataset {
    dataset(TOY4.iter().map(|&(id, x, y)| two_point_team(id, x, y)).collect())
}

pub fn toy4_config(playoff: Playoff, sims: u64, seed: u64) -> TournamentConfig {
    let mut cfg = TournamentConfig::new(TOY4.iter().map(|t| t.0.to_string()).collect());
    cfg.playoff = playoff;
    cfg.sims = sims;
    cfg.seed = seed;
    cfg.matches = constant_config(two_point_scheme());
    cfg
}

/// Exact (win, draw) probabilities for two-point teams `i` vs `j`.
fn pair_law(i: (u32, u32), j: (u32, u32)) -> (f64, f64) {
    let (mut w, mut d) = (0.0, 0.0);
    for a in [i.0, i.1] {
        for b in [j.0, j.1] {
            if a > b {
                w += 0.25;
            } else if a == b {
                d += 0.25;
            }
        }
    }
    (w, d)
}

/// P(i wins a knockout game): a draw is replayed up to ten times, then a
/// fair coin decides.
fn knockout_win(i: (u32, u32), j: (u32, u32)) -> f64 {
    let (w, d) = pair_law(i, j);
    (0..=10).map(|k| w * d.powi(k)).sum::<f64>() + 0.5 * d.powi(11)
}

/// Exact champion probabilities of a single round robin (2 / 1 / 0 points,
/// run difference then id tiebreak) followed by 1v4, 2v3 semis and a final,
/// by enumerating all 4^6 equally likely league score combinations.
pub fn toy4_champion_oracle() -> BTreeMap<String, f64> {
    let teams = TOY4;
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
    let mut champ = [0.0f64; 4];
    let combos = 4usize.pow(pairs.len() as u32);
    for code in 0..combos {
        let mut points = [0u32; 4];
        let mut diff = [0i64; 4];
        let mut c = code;
        for &(i, j) in &pairs {
            let pick = c % 4;
            c /= 4;
            let si = if pick & 1 == 0 { teams[i].1 } else { teams[i].2 };
            let sj = if pick & 2 == 0 { teams[j].1 } else { teams[j].2 };
            diff[i] += i64::from(si) - i64::from(sj);
            diff[j] += i64::from(sj) - i64::from(si);
            match si.cmp(&sj) {
                std::cmp::Ordering::Greater => points[i] += 2,
                std::cmp::Ordering::Less => points[j] += 2,
                std::cmp::Ordering::Equal => {
                    points[i] += 1;
                    points[j] += 1;
                }
            }
        }
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&x, &y| points[y].cmp(&points[x]).then(diff[y].cmp(&diff[x])).then(teams[x].0.cmp(teams[y].0)));
        let law = |t: usize| (teams[t].1, teams[t].2);
        let p = 1.0 / combos as f64;
        let sf = [(order[0], order[3]), (order[1], order[2])];
        for (w1, p1) in [(sf[0].0, knockout_win(law(sf[0].0), law(sf[0].1))), (sf[0].1, knockout_win(law(sf[0].1), law(sf[0].0)))] {
            for (w2, p2) in [(sf[1].0, knockout_win(law(sf[1].0), law(sf[1].1))), (sf[1].1, knockout_win(law(sf[1].1), law(sf[1].0)))] {
                let f = knockout_win(law(w1), law(w2));
                champ[w1] += p * p1 * p2 * f;
                champ[w2] += p * p1 * p2 * (1.0 - f);
            }
        }
    }
    teams.iter().zip(champ).map(|(t, c)| (t.0.to_string(), c)).collect()
}

/// Two teams `X` and `Y` with identical rosters and statistics, copied from
/// a fixture team's lines against one opponent.
pub fn mirrored_pair() -> Dataset {
    let cwc = fixture_dataset("cwc12");
    let src = cwc.team("AUS").unwrap();
    let make = |id: &str| -> TeamParts {
        let mut roster = Vec::new();
        let mut records = Vec::new();
        for p in &src.roster {
            let r = cwc.resolve_matchup(&p.id, "IND").unwrap();
            let pid = format!("{id}-{}", p.id);
            records.push(line(&pid, r.average, r.highest.max(r.average.ceil() as u32)));
            roster.push(player(&pid, p.role, p.overseas));
        }
        (Team { id: id.into(), name: id.into(), roster }, records)
    };
    dataset(vec![make("X"), make("Y")])
}

/// Composite Simpson's rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Density at `x` with Γ(α) replaced by quadrature of t^(α−1)e^(−t),
/// scaled by its peak value to stay in range.
pub fn quadrature_pdf(x: f64, alpha: f64, beta: f64) -> f64 {
    let m = alpha - 1.0;
    let ln_peak = m * m.ln() - m;
    let integrand = |t: f64| if t <= 0.0 { 0.0 } else { (m * t.ln() - t - ln_peak).exp() };
    let sd = alpha.sqrt();
    let gamma_scaled = simpson(integrand, 1e-12, alpha + 40.0 * sd, 400_000);
    (m * (x / beta).ln() - x / beta - ln_peak).exp() / (beta * gamma_scaled)
}

/// Walk the grid from the smallest β and stop at the first candidate that
/// breaks the cap.
pub fn linear_scan(input: &FitInput, grid: &BetaGrid) -> (usize, bool) {
    let feasible = |k: usize| {
        let beta = grid.candidate(k);
        gamma_tail(f64::from(input.highest), &GammaParams::new(input.average / beta, beta).unwrap()).unwrap() <= input.tail_cap
    };
    if !feasible(0) {
        return (0, true);
    }
    let mut k = 0;
    while k + 1 < grid.count && feasible(k + 1) {
        k += 1;
    }
    (k, false)
}

pub fn team_with(sizes: &[(Role, usize)]) -> Team {
    let roster = sizes
        .iter()
        .flat_map(|&(role, n)| (0..n).map(move |k| player(&format!("{}-{k}", role.code()), role, false)))
        .collect();
    Team { id: "T".into(), name: "T".into(), roster }
}

/// Pearson statistic of 2-from-4 subset counts against the uniform law.
pub fn two_from_four_chi_square(mut draw: impl FnMut() -> Vec<usize>, n: usize, spin: &[usize]) -> f64 {
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..n {
        let mut s: Vec<usize> = draw().into_iter().filter(|i| spin.contains(i)).collect();
        s.sort_unstable();
        *counts.entry(s).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let expected = n as f64 / 6.0;
    counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

// upper 0.001 point of chi-square with 5 degrees of freedom
pub const CHI2_5_999: f64 = 20.515;
