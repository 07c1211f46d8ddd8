#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use shadowcalc::build::{shadow_of_diagram, LinkShadow};
use shadowcalc::link::{parse_braid, parse_pd, OrientedLinkDiagram};
use shadowcalc::poly::{parse_polyhedron, ShadowPolyhedron};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn poly(rel: &str) -> ShadowPolyhedron {
    parse_polyhedron(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn diagram(rel: &str) -> OrientedLinkDiagram {
    parse_pd(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn shadow(rel: &str) -> LinkShadow {
    shadow_of_diagram(&diagram(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every `.asp` file under the fixture tree, sorted by path.
pub fn asp_texts() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for dir in ["polyhedra", "models"] {
        let mut names: Vec<_> = fs::read_dir(fixtures().join(dir)).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let n = n.to_string_lossy().to_string();
            if n.ends_with(".asp") {
                let rel = format!("{dir}/{n}");
                out.push((rel.clone(), read(&rel)));
            }
        }
    }
    out
}

/// (strands, word, diagram) for each line of the braid corpus.
pub fn braid_corpus() -> Vec<(usize, String, OrientedLinkDiagram)> {
    read("diagrams/braids.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (n, w) = l.trim().split_once(' ').unwrap();
            let d = parse_braid(&format!("braid {n} \"{w}\"")).unwrap();
            (n.parse().unwrap(), w.to_string(), d)
        })
        .collect()
}

pub fn diagram_files() -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(fixtures().join("diagrams"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .filter(|n| n.ends_with(".pd"))
        .map(|n| format!("diagrams/{n}"))
        .collect();
    names.sort();
    names
}

/// The fixture files plus the mapping cylinders and shadows of every
/// diagram and corpus braid.
pub fn corpus() -> Vec<(String, ShadowPolyhedron)> {
    let mut out: Vec<(String, ShadowPolyhedron)> =
        asp_texts().into_iter().map(|(n, t)| (n.clone(), parse_polyhedron(&t).unwrap())).collect();
    for f in diagram_files() {
        let s = shadow(&f);
        out.push((format!("{f} cylinder"), s.mapping_cylinder.polyhedron));
        out.push((format!("{f} shadow"), s.polyhedron));
    }
    for (n, w, d) in braid_corpus() {
        let s = shadow_of_diagram(&d).unwrap();
        out.push((format!("braid {n} {w} cylinder"), s.mapping_cylinder.polyhedron));
        out.push((format!("braid {n} {w} shadow"), s.polyhedron));
    }
    out
}
