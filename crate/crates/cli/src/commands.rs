use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use hetassoc::control::AUTO_EXHAUSTIVE_LIMIT;
use hetassoc::report::{num, opt, Provenance, Table};
use hetassoc::sim::RECOMMENDED_HORIZON;
use hetassoc::sweep::{self, Analysis, SweepPoint, SweepSpec};
use hetassoc::{
    build_generator, cross_check, evaluate_baseline, load_config, optimize_thresholds, simulate,
    solve_steady_state, threshold_lattice, AdmissionMode, AggregationScheme, AssignmentRule,
    Baseline, ControlOptions, Exec, Game, GameOptions, Labeling, LoadLabel, NashMode, NetworkConfig,
    Policy, SelectionRule, SharingScope, SimOptions, StateSpace, UtilityTable,
};

use crate::svg::{line_chart, Series};
use crate::{BaselineArg, Command, Common, ModeArg, RuleArgs, SearchArgs, SelectionArg, Sharing};

struct Ctx {
    config: NetworkConfig,
    exec: Exec,
    admission: AdmissionMode,
    seed: Option<u64>,
    out: PathBuf,
    svg: bool,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let path = common
            .config
            .as_ref()
            .ok_or_else(|| anyhow!("no --config given"))?;
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = load_config(&text)?;
        if let Some(sharing) = common.sharing {
            config.sharing_scope = match sharing {
                Sharing::Network => SharingScope::NetworkWide,
                Sharing::System => SharingScope::PerSystem,
            };
        }
        if let Some(e) = common.erlangs {
            if !(e.is_finite() && e > 0.0) {
                bail!("--erlangs must be positive");
            }
            config = config.with_offered_load(e);
        }
        config.validate()?;
        let exec = match common.jobs {
            Some(n) => Exec::with_jobs(n).map_err(|e| anyhow!(e))?,
            None => Exec::default(),
        };
        Ok(Ctx {
            config,
            exec,
            admission: if common.strict {
                AdmissionMode::Strict
            } else {
                AdmissionMode::Redirect
            },
            seed: common.seed,
            out: common.out.clone(),
            svg: common.svg,
        })
    }

    fn game_options(&self) -> GameOptions {
        let d = GameOptions::default();
        GameOptions {
            admission: self.admission,
            seed: self.seed.unwrap_or(d.seed),
            exec: self.exec,
            ..d
        }
    }

    fn provenance(&self, command: &str) -> Provenance {
        Provenance::new(command, &self.config).with(
            "admission",
            match self.admission {
                AdmissionMode::Redirect => "redirect",
                AdmissionMode::Strict => "strict",
            },
        )
    }

    fn write(&self, name: &str, content: &str) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_csv(&self, name: &str, table: &Table, prov: &Provenance) -> Result<()> {
        self.write(name, &table.to_csv(prov))
    }

    fn write_json(&self, name: &str, prov: &Provenance, mut body: Value) -> Result<()> {
        body["provenance"] = prov.to_json();
        self.write(name, &(serde_json::to_string_pretty(&body)? + "\n"))
    }
}

pub fn run(command: &Command, common: &Common) -> Result<()> {
    let ctx = Ctx::new(common)?;
    match command {
        Command::Validate => validate(&ctx),
        Command::Enumerate => enumerate(&ctx),
        Command::Steady(rule) => steady(&ctx, rule),
        Command::Utility(rule) => utility(&ctx, rule),
        Command::Nash(search) => nash(&ctx, search),
        Command::Optimal { cap, no_fallback } => optimal(&ctx, *cap, *no_fallback),
        Command::Baseline { which } => baseline(&ctx, *which),
        Command::Control { search, grid_step } => control(&ctx, search, *grid_step),
        Command::Sweep { search, grid_step } => sweep_cmd(&ctx, common, search, *grid_step),
        Command::Simulate { rule, events, batches } => simulate_cmd(&ctx, rule, *events, *batches),
    }
}

fn count_columns(config: &NetworkConfig, prefix: &str) -> Vec<String> {
    let mut cols = Vec::new();
    for class in &config.classes {
        for sys in &config.systems {
            cols.push(format!("{prefix}{}@{}", class.name, sys.name));
        }
    }
    cols
}

fn counts(space: &StateSpace, id: usize) -> Vec<String> {
    let mut row = Vec::new();
    for n in 0..space.classes() {
        for s in 0..space.systems() {
            row.push(space.count(id, n, s).to_string());
        }
    }
    row
}

fn label_name(systems: usize, l: usize) -> String {
    LoadLabel::from_index(systems, l).to_string()
}

fn choice_columns(config: &NetworkConfig, labels: usize) -> Vec<String> {
    let systems = config.num_systems();
    let mut cols = Vec::new();
    for class in &config.classes {
        for l in 0..labels {
            cols.push(format!("{}_{}", class.name, label_name(systems, l)));
        }
    }
    cols
}

fn choices(config: &NetworkConfig, policy: &Policy) -> Vec<String> {
    policy
        .entries()
        .iter()
        .map(|&c| config.systems[c as usize].name.clone())
        .collect()
}

fn resolve_rule(args: &RuleArgs, space: &StateSpace, labeling: &Labeling) -> Result<AssignmentRule> {
    if let Some(text) = &args.policy {
        let policy: Policy = text.parse()?;
        let expected = (space.classes(), labeling.count());
        if (policy.classes(), policy.labels()) != expected {
            bail!(
                "policy has {} classes and {} labels, the instance needs {} and {}",
                policy.classes(),
                policy.labels(),
                expected.0,
                expected.1
            );
        }
        policy.check(space.systems())?;
        return Ok(AssignmentRule::Policy(policy));
    }
    Ok(AssignmentRule::Baseline(match args.baseline {
        Some(BaselineArg::InstantaneousRate) => Baseline::InstantaneousRate,
        Some(BaselineArg::PeakRate) | None => Baseline::PeakRate,
    }))
}

fn rule_name(rule: &AssignmentRule) -> String {
    match rule {
        AssignmentRule::Policy(p) => format!("policy {p}"),
        AssignmentRule::Baseline(b) => b.to_string(),
    }
}

/// Blocking and global utility of a rule, each evaluated with its own
/// information pattern.
fn rule_performance(ctx: &Ctx, space: &StateSpace, scheme: &AggregationScheme, rule: &AssignmentRule) -> Result<(Vec<f64>, f64, f64)> {
    let opts = ctx.game_options();
    match rule {
        AssignmentRule::Policy(p) => {
            let e = Game::new(space, scheme, opts)?.evaluate(p)?;
            Ok((e.class_blocking, e.overall_blocking, e.global_utility))
        }
        AssignmentRule::Baseline(b) => {
            let r = evaluate_baseline(space, *b, &opts)?;
            Ok((r.class_blocking, r.overall_blocking, r.global_utility))
        }
    }
}

fn validate(ctx: &Ctx) -> Result<()> {
    let space = StateSpace::enumerate(&ctx.config)?;
    let scheme = AggregationScheme::from_config(&ctx.config);
    let labeling = Labeling::from_scheme(&space, &scheme);
    let empty = labeling.structurally_empty().iter().filter(|&&e| e).count();
    println!(
        "ok: {} systems, {} classes, {} Erlangs offered, {} feasible states, {} labels ({} never broadcast)",
        ctx.config.num_systems(),
        ctx.config.num_classes(),
        num(ctx.config.offered_load()),
        space.len(),
        labeling.count(),
        empty
    );
    Ok(())
}

fn enumerate(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let labeling = Labeling::from_scheme(&space, &AggregationScheme::from_config(cfg));
    let mut cols = vec!["id".to_string()];
    cols.extend(count_columns(cfg, ""));
    cols.extend(count_columns(cfg, "rate_"));
    cols.push("label".into());
    let mut t = Table::new(&cols);
    for id in 0..space.len() {
        let mut row = vec![id.to_string()];
        row.extend(counts(&space, id));
        for n in 0..space.classes() {
            for s in 0..space.systems() {
                row.push(num(space.throughput(id, n, s)));
            }
        }
        row.push(label_name(space.systems(), labeling.label(id)));
        t.push(row)?;
    }
    let prov = ctx.provenance("enumerate");
    ctx.write_csv("states.csv", &t, &prov)?;
    let empty: Vec<String> = labeling
        .structurally_empty()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e)
        .map(|(l, _)| label_name(space.systems(), l))
        .collect();
    ctx.write_json(
        "enumerate.json",
        &prov,
        json!({ "states": space.len(), "labels": labeling.count(), "never_broadcast": empty }),
    )?;
    println!("{} feasible states", space.len());
    Ok(())
}

fn steady(ctx: &Ctx, args: &RuleArgs) -> Result<()> {
    let space = StateSpace::enumerate(&ctx.config)?;
    let scheme = AggregationScheme::from_config(&ctx.config);
    let labeling = Labeling::from_scheme(&space, &scheme);
    let rule = resolve_rule(args, &space, &labeling)?;
    let gen = build_generator(&space, &rule, &labeling, ctx.admission);
    let ss = solve_steady_state(&gen)?;

    let mut cols = vec!["id".to_string()];
    cols.extend(count_columns(&ctx.config, ""));
    cols.extend(["probability".to_string(), "label".to_string()]);
    let mut t = Table::new(&cols);
    for id in 0..space.len() {
        let mut row = vec![id.to_string()];
        row.extend(counts(&space, id));
        row.push(num(ss.prob(id)));
        row.push(label_name(space.systems(), labeling.label(id)));
        t.push(row)?;
    }
    let prov = ctx.provenance("steady").with("rule", rule_name(&rule));
    ctx.write_csv("steady.csv", &t, &prov)?;
    let mut q = String::from("# row col rate\n");
    for (r, c, v) in gen.triplets() {
        q.push_str(&format!("{r} {c} {}\n", num(v)));
    }
    ctx.write("generator.txt", &q)?;

    let (class_blocking, overall, utility) = rule_performance(ctx, &space, &scheme, &rule)?;
    ctx.write_json(
        "steady.json",
        &prov,
        json!({
            "states": space.len(),
            "residual": ss.residual(),
            "class_blocking": class_blocking,
            "overall_blocking": overall,
            "global_utility": utility,
        }),
    )?;
    println!("overall blocking {overall:.4}, global utility {utility:.4} Mb");
    Ok(())
}

fn utility(ctx: &Ctx, args: &RuleArgs) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let scheme = AggregationScheme::from_config(cfg);
    let labeling = Labeling::from_scheme(&space, &scheme);
    let rule = resolve_rule(args, &space, &labeling)?;
    let gen = build_generator(&space, &rule, &labeling, ctx.admission);
    let table = UtilityTable::solve(&space, &gen, ctx.exec)?;
    let prov = ctx.provenance("utility").with("rule", rule_name(&rule));

    let mut t = Table::new(&["id", "state", "class", "system", "volume"]);
    for id in 0..space.len() {
        for n in 0..space.classes() {
            for s in 0..space.systems() {
                if let Some(v) = table.volume(&space, id, n, s) {
                    t.push(vec![
                        id.to_string(),
                        space.state(id).to_string(),
                        cfg.classes[n].name.clone(),
                        cfg.systems[s].name.clone(),
                        num(v),
                    ])?;
                }
            }
        }
    }
    ctx.write_csv("volumes.csv", &t, &prov)?;

    let (class_blocking, overall, global) = rule_performance(ctx, &space, &scheme, &rule)?;
    let mut summary = json!({
        "class_blocking": class_blocking,
        "overall_blocking": overall,
        "global_utility": global,
    });
    if let AssignmentRule::Policy(p) = &rule {
        let e = Game::new(&space, &scheme, ctx.game_options())?.evaluate(p)?;
        let mut u = Table::new(&["class", "label", "system", "utility", "chosen", "label_mass"]);
        for n in 0..space.classes() {
            for l in 0..labeling.count() {
                for s in 0..space.systems() {
                    u.push(vec![
                        cfg.classes[n].name.clone(),
                        label_name(space.systems(), l),
                        cfg.systems[s].name.clone(),
                        opt(e.individual(n, l, s)),
                        (p.get(n, l) == s).to_string(),
                        num(e.label_mass[l]),
                    ])?;
                }
            }
        }
        ctx.write_csv("individual.csv", &u, &prov)?;
        summary["max_regret"] = json!(e.max_regret());
    }
    ctx.write_json("utility.json", &prov, summary)?;
    println!("global utility {global:.4} Mb");
    Ok(())
}

fn nash_mode(arg: ModeArg) -> Option<NashMode> {
    match arg {
        ModeArg::Auto => None,
        ModeArg::Exhaustive => Some(NashMode::Exhaustive),
        ModeArg::BestResponse => Some(NashMode::BestResponse),
    }
}

fn selection(arg: SelectionArg) -> SelectionRule {
    match arg {
        SelectionArg::HighestUtility => SelectionRule::HighestUtility,
        SelectionArg::WorstBlocking => SelectionRule::WorstBlocking,
    }
}

fn control_options(ctx: &Ctx, search: &SearchArgs) -> ControlOptions {
    let mut game = ctx.game_options();
    if let Some(r) = search.restarts {
        game.restarts = r;
    }
    ControlOptions {
        game,
        nash_mode: nash_mode(search.mode),
        selection: selection(search.selection),
    }
}

fn policy_table(config: &NetworkConfig, labels: usize) -> Table {
    let mut cols: Vec<String> = ["policy", "utility", "blocking", "max_regret", "certified"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend(choice_columns(config, labels));
    Table::new(&cols)
}

fn nash(ctx: &Ctx, search: &SearchArgs) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let scheme = AggregationScheme::from_config(cfg);
    let opts = control_options(ctx, search);
    let game = Game::new(&space, &scheme, opts.game.clone())?;
    let mode = opts.nash_mode.unwrap_or(if game.policy_space().size() <= AUTO_EXHAUSTIVE_LIMIT {
        NashMode::Exhaustive
    } else {
        NashMode::BestResponse
    });
    let found = game.find_nash(mode)?;
    let prov = ctx
        .provenance("nash")
        .with("mode", sweep::mode_name(mode))
        .with("seed", opts.game.seed)
        .with("restarts", opts.game.restarts);

    let mut t = policy_table(cfg, game.labeling().count());
    let mut list = Vec::new();
    for e in &found.equilibria {
        let cert = game.certify(&e.policy)?;
        let mut row = vec![
            e.policy.to_string(),
            num(e.global_utility),
            num(e.overall_blocking),
            num(cert.max_regret),
            cert.holds.to_string(),
        ];
        row.extend(choices(cfg, &e.policy));
        t.push(row)?;
        list.push(json!({
            "policy": e.policy.to_string(),
            "global_utility": e.global_utility,
            "overall_blocking": e.overall_blocking,
            "class_blocking": e.class_blocking,
            "max_regret": cert.max_regret,
            "certified": cert.holds,
        }));
    }
    ctx.write_csv("nash.csv", &t, &prov)?;
    ctx.write_json(
        "nash.json",
        &prov,
        json!({
            "policy_space": game.policy_space().size().to_string(),
            "evaluated": found.evaluated,
            "restarts": found.restarts,
            "cycles": found.cycles,
            "equilibria": list,
        }),
    )?;
    if found.equilibria.is_empty() {
        println!("no pure equilibrium found ({} mode)", sweep::mode_name(mode));
    } else {
        println!("{} equilibria ({} mode)", found.equilibria.len(), sweep::mode_name(mode));
    }
    Ok(())
}

/// Ties beyond this many are counted but not listed.
const LISTED_TIES: usize = 64;

fn optimal(ctx: &Ctx, cap: Option<u64>, no_fallback: bool) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let scheme = AggregationScheme::from_config(cfg);
    let mut opts = ctx.game_options();
    if let Some(c) = cap {
        opts.exhaustive_cap = c;
    }
    opts.optimal_fallback = !no_fallback;
    let game = Game::new(&space, &scheme, opts.clone())?;
    let best = game.optimal_policy()?;
    let method = match best.method {
        hetassoc::game::OptimalMethod::Exhaustive => "exhaustive",
        hetassoc::game::OptimalMethod::CoordinateAscent => "coordinate_ascent",
    };
    let prov = ctx
        .provenance("optimal")
        .with("method", method)
        .with("exhaustive_cap", opts.exhaustive_cap)
        .with("seed", opts.seed);

    let mut t = policy_table(cfg, game.labeling().count());
    for p in best.ties.iter().take(LISTED_TIES) {
        let e = game.evaluate(p)?;
        let mut row = vec![
            p.to_string(),
            num(e.global_utility),
            num(e.overall_blocking),
            num(e.max_regret()),
            e.is_nash(opts.epsilon).to_string(),
        ];
        row.extend(choices(cfg, p));
        t.push(row)?;
    }
    ctx.write_csv("optimal.csv", &t, &prov)?;
    let b = &best.best;
    ctx.write_json(
        "optimal.json",
        &prov,
        json!({
            "policy": b.policy.to_string(),
            "global_utility": b.global_utility,
            "overall_blocking": b.overall_blocking,
            "class_blocking": b.class_blocking,
            "is_nash": b.is_nash(opts.epsilon),
            "ties": best.ties.len(),
            "evaluated": best.evaluated,
        }),
    )?;
    println!(
        "optimal utility {:.4} Mb, blocking {:.4} ({method})",
        b.global_utility, b.overall_blocking
    );
    Ok(())
}

fn baseline(ctx: &Ctx, which: Option<BaselineArg>) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let rules: Vec<Baseline> = match which {
        Some(BaselineArg::PeakRate) => vec![Baseline::PeakRate],
        Some(BaselineArg::InstantaneousRate) => vec![Baseline::InstantaneousRate],
        None => vec![Baseline::PeakRate, Baseline::InstantaneousRate],
    };
    let mut cols = vec!["baseline".to_string(), "utility".into(), "blocking".into()];
    cols.extend(cfg.classes.iter().map(|c| format!("blocking_{}", c.name)));
    let mut t = Table::new(&cols);
    let mut list = Vec::new();
    for b in rules {
        let r = evaluate_baseline(&space, b, &ctx.game_options())?;
        let mut row = vec![b.to_string(), num(r.global_utility), num(r.overall_blocking)];
        row.extend(r.class_blocking.iter().map(|&v| num(v)));
        t.push(row)?;
        println!("{b}: utility {:.4} Mb, blocking {:.4}", r.global_utility, r.overall_blocking);
        list.push(json!({
            "baseline": b.to_string(),
            "global_utility": r.global_utility,
            "overall_blocking": r.overall_blocking,
            "class_blocking": r.class_blocking,
        }));
    }
    let prov = ctx.provenance("baseline");
    ctx.write_csv("baseline.csv", &t, &prov)?;
    ctx.write_json("baseline.json", &prov, json!({ "baselines": list }))
}

fn grid(config: &NetworkConfig, step: Option<f64>) -> Result<Vec<AggregationScheme>> {
    match step {
        None => Ok(sweep::comparison_grid(config)),
        Some(s) if s > 0.0 && s <= 1.0 => Ok(threshold_lattice(config.num_systems(), s)),
        Some(_) => bail!("--grid-step must lie in (0, 1]"),
    }
}

fn control(ctx: &Ctx, search: &SearchArgs, step: Option<f64>) -> Result<()> {
    let cfg = &ctx.config;
    let space = StateSpace::enumerate(cfg)?;
    let opts = control_options(ctx, search);
    let schemes = grid(cfg, step)?;
    let result = optimize_thresholds(&space, &schemes, &opts)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let prov = ctx
        .provenance("control")
        .with("schemes", schemes.len())
        .with("seed", opts.game.seed);
    let summary = json!({
        "best": result.best_scheme().map(|s| s.flat()),
        "best_blocking": result.best.and_then(|i| result.outcomes[i].blocking),
        "ties": result.ties.iter().map(|&i| result.outcomes[i].scheme.flat()).collect::<Vec<_>>(),
        "warnings": result.warnings,
    });
    match result.best_scheme() {
        Some(s) => println!("best thresholds {s}"),
        None => println!("no scheme has a pure equilibrium"),
    }
    let point = SweepPoint {
        erlangs: cfg.offered_load(),
        states: space.len(),
        nash: None,
        optimal: None,
        peak: None,
        instantaneous: None,
        control: Some(result),
    };
    ctx.write_csv("control.csv", &sweep::blocking_table(&[point]), &prov)?;
    ctx.write_json("control.json", &prov, summary)
}

fn sweep_cmd(ctx: &Ctx, common: &Common, search: &SearchArgs, step: Option<f64>) -> Result<()> {
    let traffic = common.traffic.as_deref().unwrap_or("1:10:1");
    let analyses = common.analyses.as_deref().unwrap_or("nash,baselines,control");
    let spec = SweepSpec {
        traffic: sweep::parse_traffic(traffic)?,
        analyses: sweep::parse_analyses(analyses)?,
        grid: grid(&ctx.config, step)?,
        options: control_options(ctx, search),
    };
    let points = sweep::run_sweep(&ctx.config, &spec)?;
    let prov = ctx
        .provenance("sweep")
        .with("traffic", traffic)
        .with("analyses", analyses)
        .with("seed", spec.options.game.seed);

    let utility = sweep::utility_table(&points);
    ctx.write_csv("utility_vs_traffic.csv", &utility, &prov)?;
    let has_control = spec.analyses.contains(&Analysis::Control);
    if has_control {
        ctx.write_csv("blocking_vs_traffic.csv", &sweep::blocking_table(&points), &prov)?;
    }
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "erlangs": p.erlangs,
                "states": p.states,
                "equilibria": p.nash.as_ref().map(|n| n.equilibria),
                "nash_utility": p.nash.as_ref().and_then(|n| n.utility),
                "certified": p.nash.as_ref().map(|n| n.certified),
                "optimal_utility": p.optimal.as_ref().map(|o| o.utility),
                "peak_rate_utility": p.peak.as_ref().map(|b| b.utility),
                "instantaneous_rate_utility": p.instantaneous.as_ref().map(|b| b.utility),
                "best_thresholds": p.control.as_ref().and_then(|c| c.best_scheme()).map(|s| s.flat()),
                "warnings": p.control.as_ref().map(|c| c.warnings.clone()).unwrap_or_default(),
            })
        })
        .collect();
    ctx.write_json("sweep.json", &prov, json!({ "points": rows }))?;

    if ctx.svg {
        let series = |name: &str, col: &str| Series {
            name: name.to_string(),
            points: utility
                .numbers("erlangs")
                .unwrap()
                .into_iter()
                .zip(utility.numbers(col).unwrap())
                .map(|(x, y)| (x.unwrap_or(f64::NAN), y))
                .collect(),
        };
        let mut lines = Vec::new();
        for (a, name, col) in [
            (Analysis::Nash, "equilibrium", "nash_utility"),
            (Analysis::Optimal, "optimal", "optimal_utility"),
            (Analysis::Baselines, "peak rate", "peak_rate_utility"),
            (Analysis::Baselines, "instantaneous rate", "instantaneous_rate_utility"),
        ] {
            if spec.analyses.contains(&a) {
                lines.push(series(name, col));
            }
        }
        let chart = line_chart("Global utility", "offered traffic (Erlangs)", "utility (Mb)", &lines);
        ctx.write("utility_vs_traffic.svg", &chart)?;
        if has_control {
            let lines: Vec<Series> = spec
                .grid
                .iter()
                .enumerate()
                .map(|(i, scheme)| Series {
                    name: scheme.to_string(),
                    points: points
                        .iter()
                        .map(|p| (p.erlangs, p.control.as_ref().and_then(|c| c.outcomes[i].blocking)))
                        .collect(),
                })
                .collect();
            let chart = line_chart("Blocking at equilibrium", "offered traffic (Erlangs)", "blocking", &lines);
            ctx.write("blocking_vs_traffic.svg", &chart)?;
        }
    }
    Ok(())
}

fn simulate_cmd(ctx: &Ctx, args: &RuleArgs, events: u64, batches: usize) -> Result<()> {
    let cfg = &ctx.config;
    if events < RECOMMENDED_HORIZON {
        eprintln!("warning: {events} events is below the recommended {RECOMMENDED_HORIZON}; intervals may be unreliable");
    }
    let space = StateSpace::enumerate(cfg)?;
    let scheme = AggregationScheme::from_config(cfg);
    let labeling = Labeling::from_scheme(&space, &scheme);
    let rule = resolve_rule(args, &space, &labeling)?;
    let opts = SimOptions {
        horizon: events,
        seed: ctx.seed.unwrap_or(SimOptions::default().seed),
        batches,
        admission: ctx.admission,
        ..SimOptions::default()
    };
    let report = simulate(cfg, &rule, &scheme, &opts)?;
    let check = cross_check(&space, &rule, &scheme, ctx.admission, &report)?;
    let prov = ctx
        .provenance("simulate")
        .with("rule", rule_name(&rule))
        .with("seed", report.seed)
        .with("horizon", report.horizon)
        .with("batches", report.batches)
        .with("confidence", opts.confidence);

    let mut t = Table::new(&["quantity", "analytic", "estimate", "half_width", "lower", "upper", "inside"]);
    for c in &check.comparisons {
        t.push(vec![
            c.quantity.clone(),
            num(c.analytic),
            num(c.estimate.mean),
            num(c.estimate.half_width),
            num(c.estimate.lower()),
            num(c.estimate.upper()),
            c.inside().to_string(),
        ])?;
    }
    ctx.write_csv("simulate.csv", &t, &prov)?;

    let blocking: Vec<Value> = report
        .blocking
        .iter()
        .map(|b| match b {
            Some(e) => json!({ "mean": e.mean, "half_width": e.half_width }),
            None => Value::Null,
        })
        .collect();
    let misses: Vec<&str> = check.misses().map(|c| c.quantity.as_str()).collect();
    let ev = &report.events;
    ctx.write_json(
        "simulate.json",
        &prov,
        json!({
            "seed": report.seed,
            "horizon": report.horizon,
            "events": {
                "arrivals": ev.arrivals,
                "admitted": ev.admitted,
                "blocked": ev.blocked,
                "dropped": ev.dropped,
                "departures": ev.departures,
            },
            "blocking": blocking,
            "comparisons": check.comparisons.len(),
            "outside_interval": misses,
            "unvisited_mass": check.unvisited_mass,
        }),
    )?;
    for (n, b) in report.blocking.iter().enumerate() {
        if let Some(e) = b {
            println!("blocking {}: {:.4} ± {:.4}", cfg.classes[n].name, e.mean, e.half_width);
        }
    }
    println!(
        "{} of {} analytic quantities inside their {}% intervals",
        check.comparisons.len() - misses.len(),
        check.comparisons.len(),
        num(opts.confidence * 100.0)
    );
    Ok(())
}
