use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use approxlab::approx::{find_commensurable_subgroup, growth_condition, is_metric_approx_subgroup, filtration_check, select_scales};
use approxlab::discretisation::{profile_csv, scale_profile, ScaleLadder};
use approxlab::io::{self, Instance};
use approxlab::lie::{run_ladder, ChartSpec};
use approxlab::report::Status;
use approxlab::suites::{run_suite, Suite};
use approxlab::zoo::{make_instance, InstanceSpec};
use approxlab::{group::validate_group, rational, ElementSet, Error, Result};

use crate::{Command, Context, Outcome, SetInput};

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn write_out(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(ctx: &Context, value: &impl Serialize) -> Result<()> {
    let text = if ctx.pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    write_out(&(text + "\n"))
}

pub fn print_error(ctx: &Context, e: &Error) {
    let mut v = json!({"error": {"message": e.to_string()}});
    if let Error::BudgetExceeded { budget, lower, upper } = e {
        v["error"]["budget"] = json!(budget);
        v["error"]["interval"] = json!([lower, upper]);
    }
    let _ = emit(ctx, &v);
}

/// Indices from a comma-separated list, or from a JSON array file.
fn parse_indices(s: &str) -> Result<Vec<usize>> {
    let path = Path::new(s);
    if path.is_file() {
        return Ok(serde_json::from_slice(&fs::read(path)?)?);
    }
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("`{t}` is not an element index"))))
        .collect()
}

fn load_input(input: &SetInput) -> Result<Instance> {
    if let Some(path) = &input.instance {
        return io::load_instance(path);
    }
    let group = input.group.as_ref().ok_or_else(|| Error::Spec("--group or --instance is required".into()))?;
    match &input.set {
        Some(s) => io::load_group_subset(group, &parse_indices(s)?),
        None => {
            let g = io::load_group(group)?;
            let set = ElementSet::full(&g);
            Ok(Instance { group: g, set, spec: None })
        }
    }
}

fn status_outcome(status: Status) -> Outcome {
    match status {
        Status::Violated => Outcome::Violated,
        _ => Outcome::Ok,
    }
}

pub fn run(cmd: Command, ctx: &Context) -> Result<Outcome> {
    match cmd {
        Command::Validate { group } => {
            let tables = io::read_tables(&fs::read(group)?)?;
            let report = validate_group(&tables)?;
            emit(ctx, &report)?;
            Ok(if report.is_valid() { Outcome::Ok } else { Outcome::Violated })
        }
        Command::Profile { input, ladder, ambient } => {
            let inst = load_input(&input)?;
            let ladder = ScaleLadder::parse(&ladder)?;
            let y = match ambient {
                Some(s) => {
                    let idx = parse_indices(&s)?;
                    // Same indexing as the set: load through the same path.
                    match &input.group {
                        Some(g) => io::load_group_subset(g, &idx)?.set,
                        None => ElementSet::from_indices(&inst.group, idx),
                    }
                }
                None => ElementSet::full(&inst.group),
            };
            let rows = scale_profile(&inst.set, &y, &ladder, ctx.budget)?;
            write_out(&profile_csv(&rows))?;
            let exact = rows.iter().all(|r| r.packing.is_exact() && r.covering.is_exact());
            Ok(if exact { Outcome::Ok } else { Outcome::Inexact })
        }
        Command::Detect { input, k, r, find_subgroup, c_max } => {
            let inst = load_input(&input)?;
            let r = rational::parse(&r)?;
            let check = is_metric_approx_subgroup(&inst.set, k, &r, ctx.budget)?;
            let mut out = json!({
                "approximate_subgroup": check.holds,
                "certificate": check,
                "report": check.report(),
            });
            if find_subgroup {
                let search = find_commensurable_subgroup(&inst.set, c_max.unwrap_or(k), &r, ctx.budget)?;
                out["subgroup_search"] = serde_json::to_value(search)?;
            }
            emit(ctx, &out)?;
            Ok(if check.holds { Outcome::Ok } else { Outcome::Violated })
        }
        Command::Scales { input, m, n, k, c, ladder } => {
            let inst = load_input(&input)?;
            if let Some(ladder) = ladder {
                let ladder = ScaleLadder::parse(&ladder)?;
                let ks = k.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
                let growth = growth_condition(&inst.set, &ladder, &ks, ctx.budget)?;
                emit(ctx, &json!({ "growth": growth, "passed": growth.all_passed() }))?;
                return Ok(if growth.all_passed() { Outcome::Ok } else { Outcome::Violated });
            }
            let (m, n, c) = (m.expect("required"), n.expect("required"), c.expect("required"));
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("k = `{k}` must be a positive integer")))?;
            let c = rational::parse(&c)?;
            let sel = select_scales(&inst.set, m, n, k, &c, ctx.budget)?;
            let out = json!({
                "scales": sel.scales.iter().map(rational::to_json).collect::<Vec<_>>(),
                "growth": sel.growth,
                "report": sel.report,
            });
            emit(ctx, &out)?;
            Ok(status_outcome(sel.report.status()))
        }
        Command::Lemmas { suite, seed, count } => {
            let suites = Suite::parse(&suite)?;
            let runs: Vec<_> = suites.into_iter().map(|s| run_suite(s, seed, count, ctx.budget)).collect();
            let ok = runs.iter().all(|r| r.ok());
            let inconclusive: usize = runs.iter().map(|r| r.summary.inconclusive).sum();
            emit(ctx, &json!({ "seed": seed, "count": count, "ok": ok, "inconclusive": inconclusive, "suites": runs }))?;
            Ok(if !ok {
                Outcome::Violated
            } else if inconclusive > 0 {
                Outcome::Inexact
            } else {
                Outcome::Ok
            })
        }
        Command::Filtration { chain_file } => {
            let f = io::load_filtration(chain_file)?;
            let report = filtration_check(&f, ctx.budget)?;
            emit(ctx, &report)?;
            Ok(if report.passed { Outcome::Ok } else { Outcome::Violated })
        }
        Command::Lie { chart, nmax, samples, seed, safety } => {
            let mut spec = match ChartSpec::named(&chart) {
                Some(s) => s,
                None => serde_json::from_slice(&fs::read(&chart)?)?,
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(s) = safety {
                spec.safety = s;
            }
            let run = run_ladder(spec, nmax, samples)?;
            emit(ctx, &run)?;
            Ok(if run.passed() { Outcome::Ok } else { Outcome::Violated })
        }
        Command::Gen { spec, seed, out, count, group_out } => gen(ctx, &spec, seed, &out, count, group_out.as_deref()),
    }
}

fn gen(ctx: &Context, spec: &Path, seed: u64, out: &Path, count: u64, group_out: Option<&Path>) -> Result<Outcome> {
    let base: InstanceSpec = serde_json::from_slice(&fs::read(spec)?)?;
    if count == 0 {
        return Err(Error::Spec("--count must be at least 1".into()));
    }
    if count > 1 {
        fs::create_dir_all(out)?;
    }
    let mut written: Vec<PathBuf> = Vec::new();
    let mut group_written = false;
    for i in 0..count {
        let mut s = base.clone();
        s.seed = seed.wrapping_add(i);
        let (group, set) = make_instance(&s)?;
        let path = if count > 1 { out.join(format!("instance_{i:04}.json")) } else { out.to_path_buf() };
        let inst = Instance { group, set, spec: Some(s) };
        match group_out {
            Some(gp) => {
                if !group_written {
                    io::save_group(&inst.group, gp)?;
                    group_written = true;
                }
                let rel = relative_to(&path, gp);
                io::save_instance_ref(&path, rel, &inst)?;
            }
            None => io::save_instance(&path, &inst)?,
        }
        written.push(path);
    }
    let listed: Vec<Value> = written.iter().map(|p| json!(p.display().to_string())).collect();
    emit(ctx, &json!({ "written": listed }))?;
    Ok(Outcome::Ok)
}

/// `target` as stored in an instance at `from`: relative when both share a directory.
fn relative_to(from: &Path, target: &Path) -> PathBuf {
    let dir = from.parent().unwrap_or(Path::new(""));
    match target.strip_prefix(dir) {
        Ok(rel) if !dir.as_os_str().is_empty() => rel.to_path_buf(),
        _ => std::path::absolute(target).unwrap_or_else(|_| target.to_path_buf()),
    }
}
