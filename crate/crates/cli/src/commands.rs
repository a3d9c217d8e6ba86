use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use wicketsim::compare::{compare_to_actuals, read_actuals, ComparisonRow};
use wicketsim::config::{CompetitionConfig, DatasetPaths};
use wicketsim::matchsim::head_to_head_matrix;
use wicketsim::priors::gamma_pdf;
use wicketsim::tournament::simulate_tournament;
use wicketsim::{BetaRule, Dataset, FitSettings, HeadToHead, MatchConfig, StandingsDistribution};
use wicketsim_api::{app, AppState};

use crate::error::CliError;
use crate::output::{pct, sink, Manifest, WithManifest};
use crate::{CompareCmd, DataArgs, DensityCmd, FitArgs, FitCmd, Format, RuleArg, RunArgs, ServeCmd};

struct Source {
    dataset: Dataset,
    config: Option<CompetitionConfig>,
    paths: Vec<PathBuf>,
}

impl Source {
    fn match_config(&self) -> MatchConfig {
        self.config.as_ref().map(CompetitionConfig::match_config).unwrap_or_default()
    }

    fn path_refs(&self) -> Vec<&Path> {
        self.paths.iter().map(PathBuf::as_path).collect()
    }
}

impl DataArgs {
    fn load(&self) -> Result<Source, CliError> {
        if let Some(path) = &self.config {
            let cfg = CompetitionConfig::load(path)?;
            let dataset = cfg.load_dataset()?;
            return Ok(Source { dataset, config: Some(cfg), paths: vec![path.clone()] });
        }
        if let Some(path) = &self.dataset {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let files: DatasetPaths =
                serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            let dataset = files.relative_to(path.parent().unwrap_or(Path::new("."))).load()?;
            return Ok(Source { dataset, config: None, paths: vec![path.clone()] });
        }
        match (&self.stats, &self.teams) {
            (Some(stats), Some(teams)) => {
                let dataset = Dataset::load(stats, teams, self.defaults.as_deref())?;
                let mut paths = vec![stats.clone(), teams.clone()];
                paths.extend(self.defaults.clone());
                Ok(Source { dataset, config: None, paths })
            }
            _ => Err(CliError::Invalid("one of --config, --dataset or --stats with --teams is required".into())),
        }
    }
}

impl FitArgs {
    fn apply(&self, mut s: FitSettings) -> FitSettings {
        if let Some(v) = self.tail_cap {
            s.tail_cap = v;
        }
        if let Some(v) = self.beta_lo {
            s.grid.lo = v;
        }
        if let Some(v) = self.beta_hi {
            s.grid.hi = v;
        }
        if let Some(v) = self.beta_count {
            s.grid.count = v;
        }
        if let Some(r) = self.rule {
            s.beta_rule = match r {
                RuleArg::Max => BetaRule::MaxFeasible,
                RuleArg::Min => BetaRule::MinFeasible,
            };
        }
        s
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamRow {
    player_id: String,
    opponent_id: String,
    alpha: f64,
    beta: f64,
    tier: String,
    flags: String,
}

pub fn fit(cmd: FitCmd) -> Result<(), CliError> {
    let started = Instant::now();
    let src = cmd.data.load()?;
    let settings = cmd.fit.apply(src.match_config().fit);
    let data = &src.dataset;
    let mut rows = Vec::new();
    for team in data.teams() {
        for player in &team.roster {
            for opp in data.teams().iter().filter(|o| o.id != team.id) {
                let rec = data.resolve_matchup(&player.id, &opp.id)?;
                let fit = settings
                    .fit(rec.average, rec.highest)
                    .map_err(|e| CliError::Invalid(format!("{} vs {}: {e}", player.id, opp.id)))?;
                rows.push(ParamRow {
                    player_id: player.id.clone(),
                    opponent_id: opp.id.clone(),
                    alpha: fit.params.alpha(),
                    beta: fit.params.beta(),
                    tier: rec.tier.code().to_string(),
                    flags: fit.flags.label(),
                });
            }
        }
    }
    rows.sort_by(|a, b| (&a.player_id, &a.opponent_id).cmp(&(&b.player_id, &b.opponent_id)));

    let manifest = Manifest::new("fit", &src.path_refs());
    let mut out = sink(cmd.out.as_ref())?;
    out.write_all(manifest.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    tracing::info!(rows = rows.len(), ms = started.elapsed().as_millis() as u64, "fit done");
    Ok(())
}

struct Run {
    config: CompetitionConfig,
    dataset: Dataset,
    sims: u64,
    seed: u64,
    manifest: Manifest,
}

impl RunArgs {
    fn prepare(&self, command: &str) -> Result<Run, CliError> {
        let config = CompetitionConfig::load(&self.config)?;
        let dataset = config.load_dataset()?;
        let sims = self.sims.unwrap_or(config.sims);
        let seed = self.seed.unwrap_or(config.seed);
        let manifest = Manifest::new(command, &[self.config.as_path()]).with_run(sims, seed);
        Ok(Run { config, dataset, sims, seed, manifest })
    }
}

fn emit_json<T: Serialize>(out: Option<&PathBuf>, body: &T, manifest: &Manifest) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &WithManifest { body, manifest })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn sim_match(args: RunArgs, only: Vec<String>) -> Result<(), CliError> {
    let started = Instant::now();
    let run = args.prepare("sim match")?;
    let teams = if only.is_empty() { run.config.team_ids(&run.dataset) } else { only };
    let ids: Vec<&str> = teams.iter().map(String::as_str).collect();
    let h2h = head_to_head_matrix(&run.dataset, &ids, &run.config.match_config(), run.sims, run.seed)?;
    match args.format {
        Format::Json => emit_json(args.out.as_ref(), &h2h, &run.manifest)?,
        Format::Csv => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(run.manifest.comment().as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            for e in &h2h.entries {
                w.serialize(e)?;
            }
            w.flush()?;
        }
        Format::Human => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(run.manifest.comment().as_bytes())?;
            out.write_all(human_matrix(&h2h).as_bytes())?;
            out.flush()?;
        }
    }
    tracing::info!(pairs = h2h.entries.len(), ms = started.elapsed().as_millis() as u64, "sim match done");
    Ok(())
}

/// Percent chance that the row team beats the column team.
fn human_matrix(h2h: &HeadToHead) -> String {
    let width = h2h.teams.iter().map(String::len).max().unwrap_or(0).max(5);
    let mut s = format!("{:width$}", "");
    for t in &h2h.teams {
        s.push_str(&format!(" {t:>width$}"));
    }
    s.push('\n');
    for a in &h2h.teams {
        s.push_str(&format!("{a:width$}"));
        for b in &h2h.teams {
            let cell = h2h.get(a, b).map(|e| pct(e.p_a)).unwrap_or_else(|| "-".into());
            s.push_str(&format!(" {cell:>width$}"));
        }
        s.push('\n');
    }
    s
}

pub fn sim_tournament(args: RunArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let run = args.prepare("sim tournament")?;
    let mut cfg = run.config.tournament_config(&run.dataset);
    cfg.sims = run.sims;
    cfg.seed = run.seed;
    let d = simulate_tournament(&run.dataset, &cfg)?;
    match args.format {
        Format::Json => emit_json(args.out.as_ref(), &d, &run.manifest)?,
        Format::Csv => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(run.manifest.comment().as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["team".to_string()];
            header.extend((1..=d.teams.len()).map(|k| format!("p{k}")));
            header.extend(["champion", "semifinalist", "conditional_champion"].map(String::from));
            w.write_record(&header)?;
            for (t, row) in d.teams.iter().zip(&d.positions) {
                let mut rec = vec![t.clone()];
                rec.extend(row.iter().map(f64::to_string));
                rec.extend([&d.champion, &d.semifinalist, &d.conditional_champion].map(|m| m[t].to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        Format::Human => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(run.manifest.comment().as_bytes())?;
            out.write_all(human_standings(&d).as_bytes())?;
            out.flush()?;
        }
    }
    tracing::info!(sims = d.sims, ms = started.elapsed().as_millis() as u64, "sim tournament done");
    Ok(())
}

/// Teams by champion probability, then position percentages.
fn human_standings(d: &StandingsDistribution) -> String {
    let width = d.teams.iter().map(String::len).max().unwrap_or(0).max(4);
    let mut order: Vec<usize> = (0..d.teams.len()).collect();
    order.sort_by(|&x, &y| d.champion[&d.teams[y]].total_cmp(&d.champion[&d.teams[x]]).then(x.cmp(&y)));
    let mut s = format!("{:width$} {:>6} {:>6} {:>6}", "team", "champ", "semis", "c|semi");
    for k in 1..=d.teams.len() {
        s.push_str(&format!(" {:>6}", format!("#{k}")));
    }
    s.push('\n');
    for i in order {
        let t = &d.teams[i];
        s.push_str(&format!(
            "{t:width$} {:>6} {:>6} {:>6}",
            pct(d.champion[t]),
            pct(d.semifinalist[t]),
            pct(d.conditional_champion[t])
        ));
        for p in &d.positions[i] {
            s.push_str(&format!(" {:>6}", pct(*p)));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Serialize)]
struct DensityRow<'a> {
    opponent_id: &'a str,
    x: f64,
    pdf: f64,
}

pub fn density(cmd: DensityCmd) -> Result<(), CliError> {
    let src = cmd.data.load()?;
    let settings = cmd.fit.apply(src.match_config().fit);
    let data = &src.dataset;
    let player = data.player(&cmd.player).ok_or_else(|| CliError::Invalid(format!("unknown player `{}`", cmd.player)))?;
    let opponents: Vec<String> = if cmd.opponents.is_empty() {
        data.teams().iter().filter(|t| t.id != player.team_id).map(|t| t.id.clone()).collect()
    } else {
        cmd.opponents.clone()
    };
    let manifest = Manifest::new(&format!("density {}", cmd.player), &src.path_refs());
    let mut out = sink(cmd.out.as_ref())?;
    out.write_all(manifest.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for opp in &opponents {
        if data.team(opp).is_none() {
            return Err(CliError::Invalid(format!("unknown team `{opp}`")));
        }
        if *opp == player.team_id {
            return Err(CliError::Invalid(format!("`{}` plays for `{opp}`", cmd.player)));
        }
        let rec = data.resolve_matchup(&player.id, opp)?;
        let params = settings.fit(rec.average, rec.highest)?.params;
        // wide enough to hold 0.999 of the mass even for heavy tails
        let upper = (1.5 * f64::from(rec.highest)).max(params.quantile(0.999));
        let step = upper / f64::from(cmd.points - 1);
        for k in 0..cmd.points {
            let x = step * f64::from(k);
            w.serialize(DensityRow { opponent_id: opp, x, pdf: gamma_pdf(x, &params)? })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Comparison<'a> {
    rows: &'a [ComparisonRow],
}

pub fn compare(cmd: CompareCmd) -> Result<(), CliError> {
    let args = &cmd.run;
    let run = args.prepare("compare")?;
    let file = std::fs::File::open(&cmd.actuals).map_err(|e| CliError::Runtime(format!("{}: {e}", cmd.actuals.display())))?;
    let actual = read_actuals(file)?;
    let mut teams: Vec<&str> = actual.keys().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
    teams.sort_unstable();
    teams.dedup();
    let h2h = head_to_head_matrix(&run.dataset, &teams, &run.config.match_config(), run.sims, run.seed)?;
    let predicted = h2h.win_probabilities().into_iter().filter(|(k, _)| actual.contains_key(k)).collect();
    let rows = compare_to_actuals(&predicted, &actual)?;
    let mut manifest = run.manifest;
    manifest.config_paths.push(cmd.actuals.display().to_string());
    match args.format {
        Format::Json => emit_json(args.out.as_ref(), &Comparison { rows: &rows }, &manifest)?,
        Format::Csv => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(manifest.comment().as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Human => {
            let mut out = sink(args.out.as_ref())?;
            out.write_all(manifest.comment().as_bytes())?;
            let opt = |v: Option<f64>| v.map(|p| pct(p / 100.0)).unwrap_or_else(|| "-".into());
            writeln!(out, "{:<12} {:>9} {:>9} {:>15}  note", "match", "predicted", "actual", "95% interval")?;
            for r in &rows {
                let ci = format!("{}-{}", opt(r.ci_low_pct), opt(r.ci_high_pct));
                let note = match (&r.flag, r.inside) {
                    (Some(f), _) => f.clone(),
                    (None, Some(false)) => "outside".into(),
                    _ => String::new(),
                };
                let pair = format!("{} v {}", r.a, r.b);
                writeln!(out, "{pair:<12} {:>9} {:>9} {ci:>15}  {note}", pct(r.predicted_pct / 100.0), opt(r.actual_pct))?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn serve(cmd: ServeCmd) -> Result<(), CliError> {
    let src = cmd.data.load()?;
    let origin = cmd
        .cors_origin
        .as_deref()
        .map(|o| o.parse().map_err(|_| CliError::Invalid(format!("invalid --cors-origin `{o}`"))))
        .transpose()?;
    let config = src.match_config();
    let state = Arc::new(AppState::new(src.dataset, config)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", cmd.host, cmd.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {addr}: {e}")))?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app(state, origin))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_overrides_only_given_fields() {
        let args = FitArgs { tail_cap: Some(0.01), beta_lo: None, beta_hi: Some(10.0), beta_count: None, rule: Some(RuleArg::Min) };
        let s = args.apply(FitSettings::default());
        assert_eq!(s.tail_cap, 0.01);
        assert_eq!((s.grid.lo, s.grid.hi, s.grid.count), (0.01, 10.0, 50_000));
        assert_eq!(s.beta_rule, BetaRule::MinFeasible);
    }
}
