use std::fs;
use std::path::Path;

use ruin_core::finite_time::finite_time_ruin;
use ruin_core::golden::{GoldenTable, Horizon, GOLDEN_TOLERANCE, TABLE_MODELS};
use ruin_core::model::builtin;
use ruin_core::oracle::{mc_finite_time_grid, z_score, RNG_ALGORITHM};
use ruin_core::ultimate::{
    classify_net_profit, detect_branch, leading_atom, Boundary, FormulaVariant, NetProfitClass, NetProfitKind,
    SolveOptions,
};
use ruin_core::{ruin_table, FiniteTimeRequest, Model, ModelSpec, Registry, RuinTable};
use serde_json::{json, Value};

use crate::output::{table_csv, table_json, table_pretty};
use crate::{ClassifyArgs, ComputeArgs, Failure, Format, McCheckArgs, ModelArgs, TablesArgs};

/// Largest |z| accepted by `mc-check`.
const Z_LIMIT: f64 = 4.0;

struct Loaded {
    model: Model,
    source: String,
}

fn load(args: &ModelArgs) -> Result<Loaded, Failure> {
    let (mut spec, source) = match (&args.model, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let spec: ModelSpec =
                serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            (spec, path.display().to_string())
        }
        (None, Some(name)) => {
            let spec = builtin::by_name(name).ok_or_else(|| {
                Failure::Usage(format!("unknown built-in model '{name}', available: {}", builtin::NAMES.join(", ")))
            })?;
            (spec, format!("builtin:{name}"))
        }
        (None, None) => return Err(Failure::Usage("one of --model or --builtin is required".into())),
    };
    if let Some(mode) = args.mode {
        spec = spec.with_mode(mode.into());
    }
    Ok(Loaded { model: spec.build()?, source })
}

fn model_json(loaded: &Loaded) -> Value {
    json!({
        "source": loaded.source,
        "mode": loaded.model.mode(),
        "period": loaded.model.period(),
        "mean_s": loaded.model.mean_s(),
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_boundary(text: &str) -> Result<Boundary, Failure> {
    if text == "adaptive" {
        return Ok(Boundary::Adaptive);
    }
    text.parse()
        .map(Boundary::Fixed)
        .map_err(|_| Failure::Usage(format!("--boundary must be 'adaptive' or an integer, got '{text}'")))
}

fn render(table: &RuinTable, format: Format, model: Value) -> Result<String, Failure> {
    Ok(match format {
        Format::Csv => table_csv(table).map_err(|e| Failure::Io(e.to_string()))?,
        Format::Pretty => table_pretty(table),
        Format::Json => format!("{:#}\n", table_json(table, model)),
    })
}

pub fn compute(args: ComputeArgs) -> Result<(), Failure> {
    let loaded = load(&args.model)?;
    let registry = Registry::default();
    let method = registry.finite(&args.method)?;
    let solver = registry.ultimate(&args.solver)?;
    let request = FiniteTimeRequest {
        u_max: args.u_max,
        t_max: args.t_max,
        start_season: args.start_season,
        n_paths: args.paths,
        seed: args.seed,
    };
    let opts = SolveOptions {
        boundary: parse_boundary(&args.boundary)?,
        u_max: args.u_max,
        precision_escalation: !args.no_escalation,
        formulas: if args.printed_formulas { FormulaVariant::Printed } else { FormulaVariant::Corrected },
    };
    let table = ruin_table(&loaded.model, method, solver, &request, &opts)?;
    if let ruin_core::UltimateSource::Unavailable { reason } = &table.source {
        log::warn!("no ultimate row: {reason}");
    }
    emit(args.output.as_deref(), &render(&table, args.format, model_json(&loaded))?)
}

fn golden_table(index: usize, dir: Option<&Path>) -> Result<GoldenTable, Failure> {
    match dir {
        None => Ok(GoldenTable::builtin(index)),
        Some(dir) => {
            let path = dir.join(format!("table{index}.csv"));
            let text = fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(GoldenTable::parse(&format!("table{index}"), &text)?)
        }
    }
}

pub fn tables(args: TablesArgs) -> Result<(), Failure> {
    let registry = Registry::default();
    let method = registry.finite("recursion")?;
    let solver = registry.ultimate(&args.solver)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::Io(format!("{}: {e}", args.out_dir.display())))?;
    let mut mismatches = Vec::new();
    for (i, name) in TABLE_MODELS.iter().enumerate() {
        let index = i + 1;
        let golden = golden_table(index, args.golden.as_deref())?;
        let model = builtin::by_name(name).expect("built-in table model").build()?;
        let request = FiniteTimeRequest { u_max: golden.max_surplus(), t_max: golden.max_horizon(), ..Default::default() };
        let opts = SolveOptions { u_max: request.u_max, ..Default::default() };
        let table = ruin_table(&model, method, solver, &request, &opts)?;
        let path = args.out_dir.join(format!("table{index}.csv"));
        fs::write(&path, table_csv(&table).map_err(|e| Failure::Io(e.to_string()))?)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let ultimate = table.ultimate.clone().unwrap_or_default();
        let found = golden.compare(
            |h, u| match h {
                Horizon::Finite(t) if t <= table.t_max() && u <= table.u_max() => *table.finite.get(u, t),
                Horizon::Infinite => ultimate.get(u).copied().unwrap_or(f64::NAN),
                Horizon::Finite(_) => f64::NAN,
            },
            GOLDEN_TOLERANCE,
        );
        if found.is_empty() {
            println!("table{index} ({name}): all {} cells within {GOLDEN_TOLERANCE:e}, wrote {}", golden.cell_count(), path.display());
        } else {
            println!("table{index} ({name}): {} of {} cells outside {GOLDEN_TOLERANCE:e}", found.len(), golden.cell_count());
            for m in &found {
                println!("  {m}");
            }
        }
        mismatches.extend(found);
    }
    if mismatches.is_empty() {
        println!("all cells within {GOLDEN_TOLERANCE:e}");
        Ok(())
    } else {
        let cells: Vec<String> = mismatches.iter().map(|m| format!("{}[T={}, u={}]", m.table, m.horizon, m.u)).collect();
        Err(Failure::GoldenMismatch(format!("golden mismatch in {} cells: {}", cells.len(), cells.join(", "))))
    }
}

pub fn mc_check(args: McCheckArgs) -> Result<(), Failure> {
    let loaded = load(&args.model)?;
    if args.us.is_empty() || args.horizons.is_empty() || args.horizons.contains(&0) {
        return Err(Failure::Usage("--us and --horizons must be non-empty and horizons at least 1".into()));
    }
    let u_max = *args.us.iter().max().expect("non-empty");
    let t_max = *args.horizons.iter().max().expect("non-empty");
    let reference = match &loaded.model {
        Model::Float(m) => finite_time_ruin(m, u_max, t_max, args.start_season)?,
        Model::Exact(m) => finite_time_ruin(m, u_max, t_max, args.start_season)?.to_f64(),
    };
    let grid = mc_finite_time_grid(&loaded.model.to_f64(), &args.us, &args.horizons, args.start_season, args.paths, args.seed)?;

    let mut cells = Vec::new();
    for (row, &u) in grid.iter().zip(&args.us) {
        for (est, &t) in row.iter().zip(&args.horizons) {
            let r = *reference.get(u, t);
            let z = z_score(est, r);
            cells.push(json!({
                "u": u, "T": t, "reference": r, "p_hat": est.p_hat, "std_err": est.std_err, "z": z,
                "pass": z.abs() <= Z_LIMIT,
            }));
        }
    }
    let worst = cells.iter().map(|c| c["z"].as_f64().map_or(f64::INFINITY, f64::abs)).fold(0.0, f64::max);
    let failed = cells.iter().filter(|c| c["pass"] == false).count();
    let text = match args.format {
        Format::Json => format!(
            "{:#}\n",
            json!({
                "model": model_json(&loaded), "paths": args.paths, "seed": args.seed, "rng": RNG_ALGORITHM,
                "z_limit": Z_LIMIT, "max_abs_z": worst, "cells": cells,
            })
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Io(e.to_string());
            w.write_record(["u", "T", "reference", "p_hat", "std_err", "z", "pass"]).map_err(io)?;
            for c in &cells {
                let rec: Vec<String> = ["u", "T", "reference", "p_hat", "std_err", "z", "pass"].iter().map(|k| c[*k].to_string()).collect();
                w.write_record(&rec).map_err(io)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?).expect("utf-8 csv")
        }
        Format::Pretty => {
            let mut out = format!("{:>4} {:>4} {:>10} {:>10} {:>10} {:>8}\n", "u", "T", "reference", "p_hat", "std_err", "z");
            for c in &cells {
                out.push_str(&format!(
                    "{:>4} {:>4} {:>10.6} {:>10.6} {:>10.6} {:>8.3}{}\n",
                    c["u"].as_u64().unwrap_or_default(), c["T"].as_u64().unwrap_or_default(), c["reference"].as_f64().unwrap_or(f64::NAN), c["p_hat"].as_f64().unwrap_or(f64::NAN),
                    c["std_err"].as_f64().unwrap_or(f64::NAN), c["z"].as_f64().unwrap_or(f64::NAN),
                    if c["pass"] == true { "" } else { "  FAIL" },
                ));
            }
            out.push_str(&format!(
                "{} paths, seed {}, {RNG_ALGORITHM}; max |z| = {worst:.3} (limit {Z_LIMIT})\n",
                args.paths, args.seed
            ));
            out
        }
    };
    emit(args.output.as_deref(), &text)?;
    if failed > 0 {
        return Err(Failure::OracleDisagreement(format!("{failed} of {} cells have |z| > {Z_LIMIT}", cells.len())));
    }
    Ok(())
}

fn trim_number(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn profile(class: &NetProfitClass) -> String {
    match (class.kind, class.safe_from) {
        (NetProfitKind::CriticalDegenerate, Some(k)) => {
            let cells: Vec<&str> = (0..k + 2).map(|u| if u < k { "1" } else { "0" }).collect();
            format!("ψ=({},…)", cells.join(","))
        }
        (NetProfitKind::Subcritical, _) => String::new(),
        _ => "ψ≡1".into(),
    }
}

pub fn classify(args: ClassifyArgs) -> Result<(), Failure> {
    let loaded = load(&args.model)?;
    let (class, branch, lead) = match &loaded.model {
        Model::Float(m) => (classify_net_profit(m)?, detect_branch(m).ok(), leading_atom(m)),
        Model::Exact(m) => (classify_net_profit(m)?, detect_branch(m).ok(), leading_atom(m)),
    };
    let es = trim_number(class.mean_s);
    let text = match args.format {
        Format::Json => format!(
            "{:#}\n",
            json!({
                "model": model_json(&loaded),
                "class": class,
                "branch": branch.map(|b| json!({ "number": b.number(), "condition": b.condition() })),
                "leading_atom": lead,
            })
        ),
        Format::Csv => format!(
            "class,mean_s,branch,leading_atom\n{},{},{},{}\n",
            class.label(),
            es,
            branch.map(|b| b.number().to_string()).unwrap_or_default(),
            lead.map(|l| l.to_string()).unwrap_or_default()
        ),
        Format::Pretty => {
            let mut line = format!("{}, E S={es}", class.label());
            if class.kind == NetProfitKind::Subcritical {
                if let Some(b) = branch {
                    line.push_str(&format!(", branch {} ({})", b.number(), b.condition()));
                }
                if let Some(l) = lead {
                    line.push_str(&format!(", leading atom s{l}"));
                }
            } else {
                line.push_str(&format!(", {}", profile(&class)));
            }
            line + "\n"
        }
    };
    emit(None, &text)
}
