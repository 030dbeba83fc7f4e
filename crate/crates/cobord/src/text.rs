//! Fixed-width text renderings. They mirror the JSON output and carry no
//! extra information.

use std::fmt::Write;

use cobord_core::charfn::{CharPair, CharVector, ValidationReport};
use cobord_core::cobordism::{
    CellStructure, ComponentSummary, GluingReport, HomologyTable, WManifold,
};
use cobord_core::zlinalg::IntMatrix;

use crate::json::rational_to_string;

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_list(xs: &Option<Vec<usize>>) -> String {
    xs.as_ref()
        .map_or_else(|| "-".into(), |v| format!("({})", list(v)))
}

pub fn vectors_table(pair: &CharPair) -> String {
    let mut s = String::new();
    s.push_str("  facet  vector\n");
    for f in pair.polytope().facets() {
        let v = pair
            .vector(f.id)
            .map_or_else(|| "(boundary)".into(), CharVector::to_string);
        let _ = writeln!(s, "  {:<6} {}", f.display_name(), v);
    }
    s
}

pub fn matrix(m: &IntMatrix) -> String {
    let rows = m.to_rows();
    let width = rows
        .iter()
        .flatten()
        .map(|x| x.to_string().len())
        .max()
        .unwrap_or(1);
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:>width$}")).collect();
        let _ = writeln!(s, "  [{}]", cells.join(" "));
    }
    s
}

pub fn w_text(w: &WManifold) -> String {
    let p = w.polytope();
    let mut s = format!(
        "W over truncated simplex: n = {}, k = {}, r1 = {}\n  {} facets, {} vertices, {} edges, torus rank {}\n",
        w.n(),
        w.k(),
        rational_to_string(w.r1()),
        p.facets().len(),
        p.vertices().len(),
        p.edges().len(),
        w.pair().torus_rank()
    );
    s.push_str(&vectors_table(w.pair()));
    s
}

pub fn validation_text(r: &ValidationReport) -> String {
    let mut s = format!(
        "validation: {} ({} vertices checked, {} failures)\n",
        if r.is_valid() { "PASS" } else { "FAIL" },
        r.vertices_checked,
        r.failures.len()
    );
    for f in &r.failures {
        let vecs: Vec<String> = f.vectors.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            s,
            "  {:<12} {:?} facets {} vectors {}",
            f.vertex.to_string(),
            f.reason,
            list(&f.facets),
            vecs.join(" ")
        );
    }
    s
}

pub fn components_text(comps: &[ComponentSummary]) -> String {
    let mut s = format!(
        "  {:<4} {:<7} {:<8} {:<6} {:>8}  {:<14} {}\n",
        "name", "facet", "type", "valid", "vertices", "h-vector", "betti"
    );
    for c in comps {
        let ty = if c.has_kind {
            c.kind.clone()
        } else {
            format!("!{}", c.kind)
        };
        let _ = writeln!(
            s,
            "  {:<4} {:<7} {:<8} {:<6} {:>8}  {:<14} {}",
            c.name,
            c.facet.to_string(),
            ty,
            c.valid,
            c.vertices,
            opt_list(&c.h_vector),
            opt_list(&c.betti)
        );
    }
    s
}

pub fn homology_text(h: &HomologyTable, cs: &CellStructure) -> String {
    let mut s = format!(
        "functional: ({})\n  {:<4} {:>5} {:>6}  generators\n",
        list(&cs.functional.coefficients),
        "deg",
        "cells",
        "rank"
    );
    let _ = writeln!(s, "  {:<4} {:>5} {:>6}", 0, cs.zero_cells, h.rank(0));
    for d in 1..=2 * h.n - 1 {
        let names = if d % 2 == 1 {
            cs.generators
                .get(&d.div_ceil(2))
                .map(|g| {
                    g.iter()
                        .map(|c| c.name.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default()
        } else {
            String::new()
        };
        let cells = cs.cells_by_degree(h.n).get(&d).copied().unwrap_or(0);
        let line = format!("  {:<4} {:>5} {:>6}  {}", d, cells, h.rank(d), names);
        let _ = writeln!(s, "{}", line.trim_end());
    }
    let _ = writeln!(
        s,
        "H_0(W,dW) = 0 (relative); the unreduced 0-cell count gives {}",
        h.paper_h0
    );
    s
}

pub fn report_text(r: &GluingReport) -> String {
    let mut s = format!(
        "gluing report n = {}, k = {}, seed = {}\n",
        r.n, r.k, r.seed
    );
    for c in &r.checks {
        let _ = writeln!(
            s,
            "  {:<4} {:<18} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.details
        );
    }
    s.push_str(&components_text(&r.components));
    let cells: Vec<String> = r.cells.iter().map(|(d, c)| format!("{d}:{c}")).collect();
    let _ = writeln!(s, "cells by degree: {}", cells.join(" "));
    let _ = writeln!(
        s,
        "orientation: sign_rho = {:+}, det_delta = {:+}",
        r.orientation.sign_rho, r.orientation.det_delta
    );
    let _ = writeln!(s, "boundary_label: {}", r.boundary_label());
    let _ = writeln!(s, "overall: {}", if r.pass() { "PASS" } else { "FAIL" });
    s
}
