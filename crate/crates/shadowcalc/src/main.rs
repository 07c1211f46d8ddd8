use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use shadowcalc::branching::{enumerate_branchings_capped, find_branching, is_branching, DEFAULT_CAP};
use shadowcalc::build::shadow_of_diagram;
use shadowcalc::census::{classify_model, simply_connected};
use shadowcalc::group::GroupVerdict;
use shadowcalc::link::parse_pd;
use shadowcalc::poly::{parse_polyhedron, ShadowPolyhedron};
use shadowcalc::script::run_script;
use shadowcalc::volume::{fiber_census, smc_upper_bound, surgery_presentation_bound, volume_window, VolumeError};

#[derive(Parser)]
#[command(name = "shadowcalc", version, about = "Branched shadows: validation, shadows of link diagrams, census and volume bounds")]
struct Cli {
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a polyhedron file; exit 0 iff it is valid.
    Validate { file: PathBuf },
    /// Build the shadow of a PD code or closed braid and report it.
    ShadowFromLink {
        file: PathBuf,
        /// Surgery script applied to the result.
        #[arg(long)]
        surgery: Option<PathBuf>,
        /// Keep the punctured face (emit the mapping cylinder).
        #[arg(long)]
        keep_outer: bool,
        /// Write the polyhedron here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Slope lengths, volume window and coincidence certificate.
    Volume { file: PathBuf },
    /// Cappings of a neighbourhood model and their fundamental groups.
    Census {
        /// 27-i .. 27-iv, 32-i .. 32-iv
        model: String,
        #[arg(long)]
        towers: bool,
    },
    /// Find one branching, or all with --all.
    BranchSearch {
        file: PathBuf,
        #[arg(long)]
        all: bool,
        /// Region limit for --all.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Complexity of the diagram's shadow: a bound for every surgery on it.
    SurgeryBound { file: PathBuf },
}

/// 1: the input is fine but the question has no answer; 2: bad input.
enum Failure {
    Domain(String),
    Input(String),
}

type Outcome = Result<(Value, String), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ShadowPolyhedron, Failure> {
    parse_polyhedron(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

/// Twelve significant digits; ties go to even.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x: f64 = format!("{:.11e}", n.as_f64().unwrap()).parse().unwrap();
            *v = json!(x);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn fmt12(x: f64) -> String {
    let mut v = json!(x);
    round_floats(&mut v);
    v.to_string()
}

fn validate(file: &Path) -> Outcome {
    let p = load(file)?;
    let rep = p.validate();
    let pr = p.predicates();
    let v = json!({
        "valid": rep.valid,
        "messages": rep.messages(),
        "c": p.complexity_c(),
        "true_vertices": p.true_vertices().len(),
        "boundary_vertices": p.boundary_vertices().len(),
        "euler_characteristic": p.euler_characteristic(),
        "predicates": to_value(&pr),
        "stored_branching": p.branching.as_ref().map(|b| is_branching(&p, b).unwrap_or(false)),
    });
    if !rep.valid {
        return Err(Failure::Input(format!("{}: invalid\n  {}", file.display(), rep.messages().join("\n  "))));
    }
    let text = format!(
        "{}: valid\nc = {} ({} true, {} boundary vertices), chi = {}\nclosed {} proper {} special {} almost-special {}",
        file.display(),
        p.complexity_c(),
        p.true_vertices().len(),
        p.boundary_vertices().len(),
        p.euler_characteristic(),
        pr.is_closed,
        pr.is_proper,
        pr.is_special,
        pr.is_almost_special
    );
    Ok((v, text))
}

fn shadow_from_link(file: &Path, surgery: Option<&Path>, keep_outer: bool, out: Option<&Path>) -> Outcome {
    let d = parse_pd(&read(file)?).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let s = shadow_of_diagram(&d).map_err(|e| Failure::Domain(e.to_string()))?;
    let mut p = if keep_outer { s.mapping_cylinder.polyhedron.clone() } else { s.polyhedron.clone() };
    if let Some(script) = surgery {
        p = run_script(&p, &read(script)?).map_err(|e| Failure::Domain(format!("{}: {e}", script.display())))?;
    }
    let rep = p.validate();
    if !rep.valid {
        return Err(Failure::Domain(format!("result is not valid: {}", rep.messages().join("; "))));
    }
    let asp = p.to_asp();
    if let Some(o) = out {
        fs::write(o, &asp).map_err(|e| Failure::Input(format!("{}: {e}", o.display())))?;
    }
    let census = p.branching.as_ref().and_then(|b| fiber_census(&p, b).ok());
    let gleams: serde_json::Map<String, Value> = shadowcalc::poly::nat_sorted(p.regions.keys())
        .into_iter()
        .map(|r| (r.clone(), p.regions[r].gleam.map_or(Value::Null, |g| json!(g.pretty()))))
        .collect();
    let bound = smc_upper_bound(&p);
    let v = json!({
        "crossings": d.crossing_number(),
        "components": d.components.len(),
        "orientation_reversed": s.reversed,
        "c": p.complexity_c(),
        "true_vertices": p.true_vertices().len(),
        "boundary_vertices": p.boundary_vertices().len(),
        "branched": p.branching.as_ref().is_some_and(|b| is_branching(&p, b).unwrap_or(false)),
        "fiber_census": census.as_ref().map(to_value),
        "smc_upper_bound": to_value(&bound),
        "gleams": gleams,
        "asp": if out.is_none() { Value::String(asp.clone()) } else { Value::Null },
    });
    let mut text = String::new();
    if out.is_none() {
        text.push_str(&asp);
    }
    text.push_str(&format!(
        "# crossings {} components {} reversed {}\n# c = {} (upper bound for smc{})\n",
        d.crossing_number(),
        d.components.len(),
        s.reversed,
        p.complexity_c(),
        if bound.graph_link { "; graph link" } else { "" }
    ));
    if let Some(c) = census {
        text.push_str(&format!(
            "# fibres: II2 = {}, II3 = {}, I0 families {}, I1 families {}\n",
            c.signature.ii2, c.signature.ii3, c.i0_families, c.i1_families
        ));
    }
    Ok((v, text.trim_end().to_string()))
}

fn volume(file: &Path) -> Outcome {
    let p = load(file)?;
    let r = volume_window(&p).map_err(|e| match e {
        VolumeError::Invalid(_) => Failure::Input(e.to_string()),
        _ => Failure::Domain(e.to_string()),
    })?;
    let mut text = format!("c = {} (II2 = {}, II3 = {})\n", r.c, r.signature.ii2, r.signature.ii3);
    for s in &r.sl {
        text.push_str(&format!("  {}: 2g = {}, k = {}, sl = {}\n", s.region, s.g2, s.k, fmt12(s.sl)));
    }
    text.push_str(&format!("sl(P) = {}\n", fmt12(r.sl_min)));
    match r.volume.lower {
        Some(l) => text.push_str(&format!("{} <= vol < {}\n", fmt12(l), fmt12(r.volume.upper_strict))),
        None => text.push_str(&format!("vol < {} (no lower bound: sl(P) <= 2pi)\n", fmt12(r.volume.upper_strict))),
    }
    text.push_str(&if r.certificate {
        format!("certificate: sl(P) > 2pi sqrt(2c), so sc = bsc = smc = {}", r.c)
    } else {
        "certificate: no".to_string()
    });
    Ok((to_value(&r), text))
}

fn census(model: &str, towers: bool) -> Outcome {
    let r = classify_model(model, towers).map_err(|e| Failure::Input(e.to_string()))?;
    let mut text = String::new();
    for pv in &r {
        let verdict = match &pv.verdict {
            GroupVerdict::Trivial => "simply connected".to_string(),
            GroupVerdict::Nontrivial { h1 } => format!("not simply connected (H1 = {h1})"),
            GroupVerdict::Unknown => "unknown".to_string(),
        };
        text.push_str(&format!("{}: {verdict}\n", pv.pattern));
    }
    let sc = simply_connected(&r);
    text.push_str(&format!("{} of {} patterns simply connected", sc.len(), r.len()));
    Ok((json!({ "model": model, "towers": towers, "patterns": to_value(&r) }), text))
}

fn branch_search(file: &Path, all: bool, cap: usize) -> Outcome {
    let p = load(file)?;
    let show = |b: &shadowcalc::Branching| {
        shadowcalc::poly::nat_sorted(b.orientation.keys()).iter().map(|r| format!("{r}{}", b.orientation[*r])).collect::<Vec<_>>().join(" ")
    };
    if all {
        let bs = enumerate_branchings_capped(&p, cap).map_err(|e| Failure::Domain(e.to_string()))?;
        let text = bs.iter().map(show).chain([format!("{} branchings", bs.len())]).collect::<Vec<_>>().join("\n");
        return Ok((json!({ "count": bs.len(), "branchings": to_value(&bs) }), text));
    }
    match find_branching(&p) {
        Some(b) => Ok((json!({ "branching": to_value(&b) }), show(&b))),
        None => Err(Failure::Domain("no branching exists".into())),
    }
}

fn surgery_bound(file: &Path) -> Outcome {
    let d = parse_pd(&read(file)?).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let c = surgery_presentation_bound(&d).map_err(|e| Failure::Domain(e.to_string()))?;
    let cr = d.crossing_number();
    Ok((
        json!({ "crossings": cr, "c": c, "bound": cr - 2 }),
        format!("smc(surgery on L) <= {c}   (crossings {cr}, cr - 2 = {})", cr - 2),
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Validate { file } => validate(file),
        Cmd::ShadowFromLink { file, surgery, keep_outer, out } => {
            shadow_from_link(file, surgery.as_deref(), *keep_outer, out.as_deref())
        }
        Cmd::Volume { file } => volume(file),
        Cmd::Census { model, towers } => census(model, *towers),
        Cmd::BranchSearch { file, all, cap } => branch_search(file, *all, *cap),
        Cmd::SurgeryBound { file } => surgery_bound(file),
    };
    match res {
        Ok((mut v, text)) => {
            if cli.json {
                round_floats(&mut v);
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            } else {
                println!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
