mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tgw_core::categorical::{apply_mstar, section_schedule, skolem_map, universality_check};
use tgw_core::groupoid::{
    build_level_table, compose_clopen, is_subgroupoid, minimal_en_index, project_clopen, source_clopen,
    target_clopen, theta_class, theta_reindex, verify_level_axioms, ClopenSet,
};
use tgw_core::model::{build_dtuple, Cover, Model};
use tgw_core::reconstruction::reconstruct_and_compare;
use tgw_core::skolem::RichSequence;
use tgw_core::theory::{grid_vars, OracleConfig};
use tgw_core::{Formula, Theory, TheoryId, TgwError};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "tgw", version, about = "Finite-level groupoid workbench for complete theories")]
struct Cli {
    /// pureset, dlo, randomgraph or equivinf.
    #[arg(long, global = true)]
    theory: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Largest variable grid the type enumerator accepts.
    #[arg(long, global = true)]
    max_grid: Option<usize>,
    /// Quantifier depth cap for model evaluation.
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete types over a grid.
    Types {
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 1)]
        tapes: usize,
        #[arg(long)]
        constraint: Option<String>,
    },
    /// The formula D_{Φ,n}.
    Dphi {
        #[arg(long)]
        level: Option<usize>,
    },
    /// Composition of two clopen sets.
    Compose {
        #[arg(long)]
        phi: String,
        /// Over tapes (x,y), or (y,z) when it mentions z.
        #[arg(long)]
        psi: String,
    },
    /// Source and target of a clopen set.
    Source {
        #[arg(long)]
        phi: String,
    },
    /// Clopen sub-groupoids containing the base at a level.
    Subgroupoids {
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Level-table checks.
    Groupoid {
        #[command(subcommand)]
        action: GroupoidAction,
    },
    /// Projection of a clopen set to a lower level.
    Project {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 2)]
        tapes: usize,
    },
    /// θ-coordinates of every point of a fibred power.
    Theta {
        /// k, for the (k+1)-tape table.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Rebuild the structure from the groupoid and compare with the model.
    Reconstruct {
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Trivialising section schedule with sample certificates.
    Section {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Skolem index for a formula φ(x, y0).
    Skolem {
        #[arg(long)]
        formula: String,
    },
    /// Universality of the Skolem sort on samples.
    Universality {
        #[arg(short = 'k', long = "k", default_value_t = 1)]
        k: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 2)]
        m0: usize,
    },
    /// Inspect the concrete model.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
}

#[derive(Subcommand, Debug)]
enum GroupoidAction {
    /// Groupoid axioms on the level table.
    Verify {
        #[arg(long)]
        level: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ModelAction {
    /// The committed fragment as JSON.
    Dump {
        #[arg(long, default_value_t = 8)]
        size: u64,
    },
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    theory: Option<String>,
    max_grid: Option<usize>,
    max_depth: Option<usize>,
    level: Option<usize>,
    depth: Option<usize>,
    budget: Option<usize>,
    steps: Option<usize>,
    samples: Option<usize>,
    output: Option<PathBuf>,
}

struct Ctx {
    theory: Theory,
    seq: RichSequence,
    model: Model,
    config: RunConfig,
}

impl Ctx {
    fn parse(&self, text: &str) -> tgw_core::Result<Formula> {
        self.theory.parse(text)
    }

    fn clopen(&self, arity: usize, text: &str) -> tgw_core::Result<ClopenSet> {
        ClopenSet::new(&self.seq, arity, self.parse(text)?)
    }

    fn fits(&self, vars: usize) -> bool {
        vars <= self.theory.config().max_grid
    }
}

fn usage(msg: impl Into<String>) -> TgwError {
    TgwError::Precondition(msg.into())
}

fn run(cli: &Cli, ctx: &Ctx, rep: &mut Report) -> tgw_core::Result<()> {
    let th = &ctx.theory;
    let cfg = &ctx.config;
    match &cli.command {
        Command::Types { vars, tapes, constraint } => {
            let c = match constraint {
                Some(t) => ctx.parse(t)?,
                None => Formula::True,
            };
            rep.param("vars", vars).param("tapes", tapes).param("constraint", c.render());
            let types = th.enumerate_types(*tapes, *vars, &c)?;
            let distinct: BTreeSet<_> = types.iter().collect();
            rep.check("types are pairwise distinct", distinct.len() == types.len(), None);
            let mut bad = None;
            for t in &types {
                if !th.satisfiable(&t.diagram())? {
                    bad = Some(t.describe());
                    break;
                }
            }
            rep.check("every diagram is satisfiable", bad.is_none(), bad);
            let items: Vec<_> = types
                .iter()
                .enumerate()
                .map(|(i, t)| json!({"index": i, "type": t.describe(), "diagram": t.diagram().render()}))
                .collect();
            rep.items(items);
        }
        Command::Dphi { level } => {
            let n = level.or(cfg.level).unwrap_or(2);
            rep.param("level", n);
            let d = ctx.seq.dphi(n)?;
            rep.check("simplified form is equivalent", th.equivalent(&d.raw, &d.qf)?, None);
            rep.items(&d);
        }
        Command::Compose { phi, psi } => {
            let u = ctx.clopen(2, phi)?;
            let given = ctx.parse(psi)?;
            let g = given.clone();
            let g = if g.free_vars().iter().any(|v| v.tape == 2) {
                if g.free_vars().iter().any(|v| v.tape == 0) {
                    return Err(usage("psi mentions both x and z"));
                }
                g.map_tapes(|t| t - 1)
            } else {
                g
            };
            let v = ClopenSet::new(&ctx.seq, 2, g)?;
            rep.param("phi", u.formula().render()).param("psi", given.render());
            let c = compose_clopen(&u, &v)?;
            let level = c.level().max(1);
            if ctx.fits(3 * level) {
                let tab = build_level_table(&ctx.seq, 2, level)?;
                let pointwise = tab.compose_sets(&tab.point_set(&u)?, &tab.point_set(&v)?);
                let ok = tab.point_set(&c)? == pointwise;
                rep.check(format!("level-{level} table composition agrees"), ok, None);
            }
            rep.items(json!({
                "chi": c.formula().map_tapes(|t| if t == 1 { 2 } else { t }).render(),
                "chi_xy": c.formula().render(),
                "level": c.level(),
            }));
        }
        Command::Source { phi } => {
            let u = ctx.clopen(2, phi)?;
            rep.param("phi", u.formula().render());
            let s = source_clopen(&u)?;
            let t = target_clopen(&u)?;
            let level = u.level().max(1);
            if ctx.fits(2 * level) {
                let tab = build_level_table(&ctx.seq, 2, level)?;
                let one = build_level_table(&ctx.seq, 1, level)?;
                let image = |tape: usize| -> tgw_core::Result<BTreeSet<usize>> {
                    Ok(tab
                        .point_set(&u)?
                        .into_iter()
                        .filter_map(|p| one.index_of(&tab.tape_restriction(p, tape)))
                        .collect())
                };
                let s_ok = one.point_set(&s.clone().at_level(level)?)? == image(1)?;
                let t_ok = one.point_set(&t.clone().at_level(level)?)? == image(0)?;
                rep.check("source agrees with the pointwise image", s_ok, None);
                rep.check("target agrees with the pointwise image", t_ok, None);
            }
            rep.items(json!({"source": s.formula().render(), "target": t.formula().render()}));
        }
        Command::Subgroupoids { depth } => {
            let n = depth.or(cfg.depth).unwrap_or(1);
            rep.param("depth", n);
            if !ctx.fits(3 * n) {
                return Err(TgwError::resource(format!("level {n} needs a 3x{n} grid")));
            }
            let tab = build_level_table(&ctx.seq, 2, n)?;
            let np = tab.points().len();
            if np > 10 {
                return Err(TgwError::resource(format!("{np} points give too many subsets")));
            }
            let base: BTreeSet<usize> = tab.base().iter().copied().collect();
            let mut items = Vec::new();
            let mut agree = None;
            for mask in 0u32..1 << np {
                let set: BTreeSet<usize> = (0..np).filter(|&i| mask >> i & 1 == 1).collect();
                let u = tab.clopen_of(&set)?;
                let pointwise = base.is_subset(&set)
                    && set.iter().all(|&p| set.contains(&tab.inverse(p)))
                    && tab.compose_sets(&set, &set) == set;
                let verdict = is_subgroupoid(&u)?;
                if pointwise != verdict.is_ok() && agree.is_none() {
                    agree = Some(u.formula().render());
                }
                if let Ok(h) = &verdict {
                    items.push(json!({
                        "formula": u.formula().render(),
                        "points": set.len(),
                        "minimal_en_index": minimal_en_index(h, n)?,
                    }));
                }
            }
            rep.check("point-level and clopen verdicts agree", agree.is_none(), agree);
            rep.items(items);
        }
        Command::Groupoid { action: GroupoidAction::Verify { level } } => {
            let n = level.or(cfg.level).unwrap_or(1);
            rep.param("level", n);
            if !ctx.fits(4 * n) {
                return Err(TgwError::resource(format!("associativity at level {n} needs a 4x{n} grid")));
            }
            let r = verify_level_axioms(&build_level_table(&ctx.seq, 2, n)?)?;
            rep.extend_checks(r.checks.clone());
            rep.items(&r);
        }
        Command::Project { phi, level, tapes } => {
            let u = ctx.clopen(*tapes, phi)?;
            rep.param("phi", u.formula().render()).param("level", level).param("tapes", tapes);
            let p = project_clopen(&u, *level)?;
            let n = u.level();
            if ctx.fits(tapes * n) {
                let high = build_level_table(&ctx.seq, *tapes, n)?;
                let low = build_level_table(&ctx.seq, *tapes, *level)?;
                let keep: Vec<usize> = (0..*tapes).flat_map(|t| (0..*level).map(move |q| t * n + q)).collect();
                let image: BTreeSet<usize> = high
                    .point_set(&u)?
                    .into_iter()
                    .filter_map(|i| low.index_of(&high.points()[i].restrict_indices(&keep, grid_vars(*tapes, *level))))
                    .collect();
                rep.check("projection agrees with restricted points", low.point_set(&p)? == image, None);
            }
            rep.items(json!({"projected": p.formula().render(), "level": p.level()}));
        }
        Command::Theta { k, level } => {
            let n = level.or(cfg.level).unwrap_or(1);
            rep.param("k", k).param("level", n);
            let tab = build_level_table(&ctx.seq, k + 1, n)?;
            let mut items = Vec::new();
            let mut bad = None;
            for (i, p) in tab.points().iter().enumerate() {
                let (b, parts) = theta_reindex(p)?;
                let class = theta_class(&tab, &b, &parts)?;
                if !class.contains(&i) && bad.is_none() {
                    bad = Some(p.describe());
                }
                items.push(json!({
                    "point": p.describe(),
                    "base": b.describe(),
                    "parts": parts.iter().map(|q| q.describe()).collect::<Vec<_>>(),
                    "class_size": class.len(),
                }));
            }
            rep.check("every point lies in its θ-class", bad.is_none(), bad);
            rep.items(items);
        }
        Command::Reconstruct { level, depth, budget } => {
            let n = level.or(cfg.level).unwrap_or(1);
            let d = depth.or(cfg.depth).unwrap_or(1);
            let b = budget.or(cfg.budget).unwrap_or(8);
            rep.param("level", n).param("depth", d).param("budget", b);
            let r = reconstruct_and_compare(&ctx.seq, &ctx.model, n, d, b, &Cover::identity())?;
            rep.extend_checks(r.checks.clone());
            rep.items(&r);
        }
        Command::Section { steps, samples } => {
            let s = steps.or(cfg.steps).unwrap_or(3);
            let k = samples.or(cfg.samples).unwrap_or(3);
            rep.param("steps", s).param("samples", k);
            let sched = section_schedule(&ctx.seq, &ctx.model, s)?;
            let mut certs = Vec::new();
            for j in 0..k as u64 {
                let cover = Cover::offset(j);
                let a = build_dtuple(&ctx.model, &ctx.seq, s, &cover)?;
                let c = apply_mstar(&a, &sched, &ctx.model, &ctx.seq, &cover)?;
                for ch in &c.checks {
                    rep.check(format!("sample {j}: {}", ch.name), ch.pass, ch.witness.clone());
                }
                certs.push(c);
            }
            rep.items(json!({"schedule": sched.summary(), "samples": certs}));
        }
        Command::Skolem { formula } => {
            let phi = ctx.parse(formula)?;
            rep.param("formula", phi.render());
            let c = skolem_map(&ctx.seq, &phi)?;
            rep.check("Skolem sentence is valid", c.sentence_valid, None);
            rep.items(&c);
        }
        Command::Universality { k, samples, m0 } => {
            let n = samples.or(cfg.samples).unwrap_or(8);
            rep.param("k", k).param("samples", n).param("m0", m0);
            let r = universality_check(&ctx.seq, &ctx.model, *k, *m0, n)?;
            rep.extend_checks(r.checks.clone());
            rep.items(&r);
        }
        Command::Model { action: ModelAction::Dump { size } } => {
            rep.param("size", size);
            rep.items(ctx.model.dump(*size));
        }
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Types { .. } => "types",
        Command::Dphi { .. } => "dphi",
        Command::Compose { .. } => "compose",
        Command::Source { .. } => "source",
        Command::Subgroupoids { .. } => "subgroupoids",
        Command::Groupoid { .. } => "groupoid verify",
        Command::Project { .. } => "project",
        Command::Theta { .. } => "theta",
        Command::Reconstruct { .. } => "reconstruct",
        Command::Section { .. } => "section",
        Command::Skolem { .. } => "skolem",
        Command::Universality { .. } => "universality",
        Command::Model { .. } => "model dump",
    }
}

fn exit_code(e: &TgwError) -> u8 {
    match e {
        TgwError::Certificate(_) => 1,
        TgwError::Resource(_) => 3,
        _ => 2,
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, String> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let theory_name = cli.theory.clone().or_else(|| config.theory.clone()).unwrap_or_else(|| "pureset".into());
    let id: TheoryId = match theory_name.parse() {
        Ok(id) => id,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut oracle = OracleConfig::default();
    if let Some(g) = cli.max_grid.or(config.max_grid) {
        oracle.max_grid = g;
    }
    let theory = Theory::with_config(id, oracle);
    let mut model = Model::new(id);
    if let Some(d) = cli.max_depth.or(config.max_depth) {
        model = model.with_max_depth(d);
    }
    let seq = RichSequence::canonical(&theory);
    let output = cli.json.clone().or_else(|| config.output.clone());
    let ctx = Ctx { theory, seq, model, config };

    let mut rep = Report::new(command_name(&cli.command), id.name());
    let start = Instant::now();
    let result = run(&cli, &ctx, &mut rep);
    rep.timing.elapsed_ms = start.elapsed().as_millis();
    if let Err(e) = result {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    let text = rep.to_json();
    match &output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
            let lines: Vec<String> =
                rep.certificates.iter().map(|c| format!("{} {}", if c.pass { "pass" } else { "FAIL" }, c.name)).collect();
            emit(&lines.join("\n"));
        }
        None => emit(&text),
    }
    match rep.first_failure() {
        Some(c) => {
            eprintln!("certificate failed: {}", c.name);
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
