//! JSON schemas for polytopes, characteristic pairs, `W`, and reports.
//!
//! Rationals are `"p/q"` strings in lowest terms. Integers that fit in an
//! `i64` are JSON numbers and larger ones are decimal strings. Every map is
//! emitted in ascending key order, so output is byte-stable.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use cobord_core::charfn::{
    CharError, CharPair, FailureReason, OrientationRecord, SimplexNormalForm, TranslationWitness,
    ValidationReport,
};
use cobord_core::cobordism::{
    CellStructure, CobordismError, ComponentSummary, GluingReport, HomologyTable, WManifold,
};
use cobord_core::polytope::{
    EdgeProvenance, FacetId, FacetLabel, FacetProvenance, HalfSpace, PolytopeError, SimplePolytope,
    Vertex, VertexName,
};
use cobord_core::zlinalg::IntMatrix;
use cobord_core::{BigInt, BigRational};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Cobordism(#[from] CobordismError),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Schema(msg.into()))
}

pub fn rational_to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"` or `"p"`; the result is reduced.
pub fn parse_rational(s: &str) -> Result<BigRational, FormatError> {
    let bad = || FormatError::Schema(format!("not a rational \"p/q\": {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

fn int_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

fn int_from_json(v: &Value) -> Result<BigInt, FormatError> {
    match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => Ok(BigInt::from(i)),
            (None, Some(u)) => Ok(BigInt::from(u)),
            _ => schema(format!("not an integer: {n}")),
        },
        Value::String(s) => s
            .parse()
            .map_err(|_| FormatError::Schema(format!("not an integer: {s:?}"))),
        other => schema(format!("not an integer: {other}")),
    }
}

fn ints_to_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int_to_json).collect())
}

fn ints_from_json(v: &Value) -> Result<Vec<BigInt>, FormatError> {
    array(v, "integer vector")?
        .iter()
        .map(int_from_json)
        .collect()
}

fn matrix_to_json(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| ints_to_json(r)).collect())
}

fn facet_to_json(f: FacetId) -> Value {
    Value::String(f.to_string())
}

fn facet_from_str(s: &str) -> Result<FacetId, FormatError> {
    s.parse()
        .map(FacetId)
        .map_err(|_| FormatError::Schema(format!("bad facet id {s:?}")))
}

fn facet_from_json(v: &Value) -> Result<FacetId, FormatError> {
    match v {
        Value::String(s) => facet_from_str(s),
        Value::Number(n) => n
            .as_u64()
            .and_then(|x| u32::try_from(x).ok())
            .map(FacetId)
            .ok_or_else(|| FormatError::Schema(format!("bad facet id {n}"))),
        other => schema(format!("bad facet id {other}")),
    }
}

fn facets_to_json<'a>(fs: impl IntoIterator<Item = &'a FacetId>) -> Value {
    Value::Array(fs.into_iter().map(|f| facet_to_json(*f)).collect())
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| FormatError::Schema(format!("{what} must be an array")))
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| FormatError::Schema(format!("{what} must be an object")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| FormatError::Schema(format!("missing field {key:?}")))
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize, FormatError> {
    field(obj, key)?
        .as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| FormatError::Schema(format!("{key:?} must be a non-negative integer")))
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str, FormatError> {
    field(obj, key)?
        .as_str()
        .ok_or_else(|| FormatError::Schema(format!("{key:?} must be a string")))
}

fn point_to_json(p: &[BigRational]) -> Value {
    Value::Array(
        p.iter()
            .map(|x| Value::String(rational_to_string(x)))
            .collect(),
    )
}

fn point_from_json(v: &Value) -> Result<Vec<BigRational>, FormatError> {
    array(v, "coordinate")?
        .iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| FormatError::Schema("coordinates are \"p/q\" strings".into()))
        })
        .map(|s| parse_rational(s?))
        .collect()
}

/// Parses the display form of a vertex name: `A3`, `A3~5`, `(A0,A1~2)`.
pub fn parse_vertex_name(s: &str) -> Result<VertexName, FormatError> {
    let bytes = s.as_bytes();
    let mut pos = 0;
    let name = parse_name(bytes, &mut pos)
        .ok_or_else(|| FormatError::Schema(format!("bad vertex name {s:?}")))?;
    if pos != bytes.len() {
        return schema(format!("bad vertex name {s:?}"));
    }
    Ok(name)
}

fn parse_digits(b: &[u8], pos: &mut usize) -> Option<u64> {
    let start = *pos;
    while *pos < b.len() && b[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&b[start..*pos]).ok()?.parse().ok()
}

fn parse_name(b: &[u8], pos: &mut usize) -> Option<VertexName> {
    let mut name = match b.get(*pos)? {
        b'A' => {
            *pos += 1;
            VertexName::Root(usize::try_from(parse_digits(b, pos)?).ok()?)
        }
        b'(' => {
            *pos += 1;
            let left = parse_name(b, pos)?;
            (b.get(*pos)? == &b',').then_some(())?;
            *pos += 1;
            let right = parse_name(b, pos)?;
            (b.get(*pos)? == &b')').then_some(())?;
            *pos += 1;
            VertexName::Pair(Box::new(left), Box::new(right))
        }
        _ => return None,
    };
    while b.get(*pos) == Some(&b'~') {
        *pos += 1;
        let f = u32::try_from(parse_digits(b, pos)?).ok()?;
        name = VertexName::Cut(Box::new(name), FacetId(f));
    }
    Some(name)
}

fn provenance_to_json(p: &FacetProvenance) -> Value {
    match p {
        FacetProvenance::Original(j) => json!({ "original": j }),
        FacetProvenance::Cut { name, face } => {
            json!({ "cut": { "name": name, "face": facets_to_json(face) } })
        }
        FacetProvenance::Factor { side, source } => {
            json!({ "factor": { "side": side, "source": facet_to_json(*source) } })
        }
    }
}

fn provenance_from_json(v: &Value) -> Result<FacetProvenance, FormatError> {
    let obj = object(v, "provenance")?;
    if let Some(j) = obj.get("original") {
        let j = j
            .as_u64()
            .ok_or_else(|| FormatError::Schema("original index must be an integer".into()))?;
        return Ok(FacetProvenance::Original(j as usize));
    }
    if let Some(c) = obj.get("cut") {
        let c = object(c, "cut provenance")?;
        let face = array(field(c, "face")?, "cut face")?
            .iter()
            .map(facet_from_json)
            .collect::<Result<_, _>>()?;
        return Ok(FacetProvenance::Cut {
            name: str_field(c, "name")?.to_string(),
            face,
        });
    }
    if let Some(f) = obj.get("factor") {
        let f = object(f, "factor provenance")?;
        let side = usize_field(f, "side")?;
        if side > 1 {
            return schema("factor side must be 0 or 1");
        }
        return Ok(FacetProvenance::Factor {
            side,
            source: facet_from_json(field(f, "source")?)?,
        });
    }
    schema("provenance must be one of original, cut, factor")
}

fn edge_provenance_to_json(p: &EdgeProvenance) -> Value {
    match p {
        EdgeProvenance::Original { ancestor } => json!({ "original": [ancestor.0, ancestor.1] }),
        EdgeProvenance::Cut => json!("cut"),
    }
}

fn edge_provenance_from_json(v: &Value) -> Result<EdgeProvenance, FormatError> {
    if v.as_str() == Some("cut") {
        return Ok(EdgeProvenance::Cut);
    }
    let obj = object(v, "edge provenance")?;
    let a = array(field(obj, "original")?, "edge ancestor")?;
    match a.as_slice() {
        [x, y] => match (x.as_u64(), y.as_u64()) {
            (Some(x), Some(y)) => Ok(EdgeProvenance::Original {
                ancestor: (x as usize, y as usize),
            }),
            _ => schema("edge ancestor must be two integers"),
        },
        _ => schema("edge ancestor must be two integers"),
    }
}

/// `{dim, facets, vertices, names, coords?, edges}`. Coordinates appear only
/// when every vertex has them.
pub fn polytope_to_json(p: &SimplePolytope) -> Value {
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(p.dim()));
    let facets = p
        .facets()
        .iter()
        .map(|f| {
            let mut m = Map::new();
            m.insert("id".into(), facet_to_json(f.id));
            m.insert("provenance".into(), provenance_to_json(&f.provenance));
            if let Some(h) = &f.halfspace {
                m.insert(
                    "halfspace".into(),
                    json!({ "normal": point_to_json(&h.normal), "offset": rational_to_string(&h.offset) }),
                );
            }
            Value::Object(m)
        })
        .collect();
    obj.insert("facets".into(), Value::Array(facets));
    obj.insert(
        "vertices".into(),
        Value::Array(
            p.vertices()
                .iter()
                .map(|v| facets_to_json(&v.facets))
                .collect(),
        ),
    );
    obj.insert(
        "names".into(),
        Value::Array(
            p.vertices()
                .iter()
                .map(|v| Value::String(v.name.to_string()))
                .collect(),
        ),
    );
    if p.has_coords() {
        let coords = p
            .vertices()
            .iter()
            .map(|v| point_to_json(v.coord.as_deref().unwrap_or_default()))
            .collect();
        obj.insert("coords".into(), Value::Array(coords));
    }
    let edges = p
        .edges()
        .iter()
        .map(|e| json!({ "ends": [e.ends.0, e.ends.1], "provenance": edge_provenance_to_json(&e.provenance) }))
        .collect();
    obj.insert("edges".into(), Value::Array(edges));
    Value::Object(obj)
}

/// Inverse of [`polytope_to_json`]. Without `names`, vertex `i` is `A{i}`;
/// without `edges`, every edge is an original edge between its endpoints.
pub fn polytope_from_json(v: &Value) -> Result<SimplePolytope, FormatError> {
    let obj = object(v, "polytope")?;
    let dim = usize_field(obj, "dim")?;
    let mut facets = Vec::new();
    let mut seen = BTreeSet::new();
    for f in array(field(obj, "facets")?, "facets")? {
        let f = object(f, "facet")?;
        let id = facet_from_json(field(f, "id")?)?;
        if !seen.insert(id) {
            return schema(format!("duplicate facet id {id}"));
        }
        let halfspace = match f.get("halfspace") {
            None => None,
            Some(h) => {
                let h = object(h, "halfspace")?;
                Some(HalfSpace {
                    normal: point_from_json(field(h, "normal")?)?,
                    offset: parse_rational(str_field(h, "offset")?)?,
                })
            }
        };
        facets.push(FacetLabel {
            id,
            provenance: provenance_from_json(field(f, "provenance")?)?,
            halfspace,
        });
    }
    let incidences = array(field(obj, "vertices")?, "vertices")?;
    let names = match obj.get("names") {
        Some(n) => {
            let n = array(n, "names")?;
            if n.len() != incidences.len() {
                return schema("names and vertices differ in length");
            }
            n.iter()
                .map(|s| {
                    s.as_str()
                        .ok_or_else(|| FormatError::Schema("names must be strings".into()))
                })
                .map(|s| parse_vertex_name(s?))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => (0..incidences.len()).map(VertexName::Root).collect(),
    };
    let coords = match obj.get("coords") {
        Some(c) => {
            let c = array(c, "coords")?;
            if c.len() != incidences.len() {
                return schema("coords and vertices differ in length");
            }
            c.iter()
                .map(|p| point_from_json(p).map(Some))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![None; incidences.len()],
    };
    let mut vertices = Vec::with_capacity(incidences.len());
    for ((inc, name), coord) in incidences.iter().zip(names).zip(coords) {
        let facets = array(inc, "vertex")?
            .iter()
            .map(facet_from_json)
            .collect::<Result<BTreeSet<_>, _>>()?;
        vertices.push(Vertex {
            name,
            facets,
            coord,
        });
    }
    let edge_table = match obj.get("edges") {
        None => None,
        Some(e) => {
            // keyed by endpoint names, since assembly reorders vertices
            let mut table = HashMap::new();
            for e in array(e, "edges")? {
                let e = object(e, "edge")?;
                let ends = array(field(e, "ends")?, "edge ends")?;
                let idx = |x: &Value| -> Result<usize, FormatError> {
                    x.as_u64()
                        .map(|i| i as usize)
                        .filter(|&i| i < vertices.len())
                        .ok_or_else(|| FormatError::Schema("edge end out of range".into()))
                };
                let [a, b] = ends.as_slice() else {
                    return schema("edge ends must be two vertex indices");
                };
                let (a, b) = (idx(a)?, idx(b)?);
                let key = ordered(vertices[a].name.clone(), vertices[b].name.clone());
                table.insert(key, edge_provenance_from_json(field(e, "provenance")?)?);
            }
            Some(table)
        }
    };
    Ok(SimplePolytope::assemble(
        dim,
        facets,
        vertices,
        |a, va, b, vb| match &edge_table {
            None => Ok(EdgeProvenance::Original { ancestor: (a, b) }),
            Some(t) => t
                .get(&ordered(va.name.clone(), vb.name.clone()))
                .copied()
                .ok_or_else(|| {
                    PolytopeError::MissingEdgeProvenance(va.name.to_string(), vb.name.to_string())
                }),
        },
    )?)
}

fn ordered(a: VertexName, b: VertexName) -> (VertexName, VertexName) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn vectors_to_json(pair: &CharPair) -> Value {
    let mut m = Map::new();
    for (f, v) in pair.assignment() {
        m.insert(f.to_string(), ints_to_json(v.as_slice()));
    }
    Value::Object(m)
}

pub fn pair_to_json(pair: &CharPair) -> Value {
    json!({
        "torus_rank": pair.torus_rank(),
        "polytope": polytope_to_json(pair.polytope()),
        "vectors": vectors_to_json(pair),
    })
}

/// Loads a pair. A vector not in canonical sign form (first nonzero entry
/// positive) is rejected rather than silently flipped.
pub fn pair_from_json(v: &Value) -> Result<CharPair, FormatError> {
    let obj = object(v, "characteristic pair")?;
    let torus_rank = usize_field(obj, "torus_rank")?;
    let polytope = polytope_from_json(field(obj, "polytope")?)?;
    let mut assignment = BTreeMap::new();
    for (k, vec) in object(field(obj, "vectors")?, "vectors")? {
        let ints = ints_from_json(vec)?;
        if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
            if first < &BigInt::zero() {
                return schema(format!("vector on facet {k} is not in canonical sign form"));
            }
        }
        if assignment.insert(facet_from_str(k)?, ints).is_some() {
            return schema(format!("duplicate vector for facet {k}"));
        }
    }
    Ok(CharPair::attach(polytope, torus_rank, assignment)?)
}

pub fn w_to_json(w: &WManifold) -> Value {
    json!({
        "n": w.n(),
        "k": w.k(),
        "r1": rational_to_string(w.r1()),
        "pair": pair_to_json(w.pair()),
    })
}

pub fn w_from_json(v: &Value) -> Result<WManifold, FormatError> {
    let obj = object(v, "W-manifold")?;
    let k = usize_field(obj, "k")?;
    let n = usize_field(obj, "n")?;
    if n != 2 * (k + 1) {
        return schema(format!("n = {n} does not match k = {k}"));
    }
    let r1 = parse_rational(str_field(obj, "r1")?)?;
    let pair = pair_from_json(field(obj, "pair")?)?;
    Ok(WManifold::from_pair(k, &r1, pair)?)
}

fn reason_str(r: FailureReason) -> &'static str {
    match r {
        FailureReason::TooMany => "too-many-vectors",
        FailureReason::NotDirectSummand => "not-direct-summand",
        FailureReason::NotUnimodular => "not-unimodular",
    }
}

pub fn validation_to_json(r: &ValidationReport) -> Value {
    let failures: Vec<Value> = r
        .failures
        .iter()
        .map(|f| {
            json!({
                "vertex": f.vertex.to_string(),
                "facets": facets_to_json(&f.facets),
                "vectors": f.vectors.iter().map(|v| ints_to_json(v.as_slice())).collect::<Vec<_>>(),
                "reason": reason_str(f.reason),
            })
        })
        .collect();
    json!({ "valid": r.is_valid(), "vertices_checked": r.vertices_checked, "failures": failures })
}

fn degree_map(m: &BTreeMap<usize, usize>) -> Value {
    let mut out = Map::new();
    for (d, c) in m {
        out.insert(d.to_string(), json!(c));
    }
    Value::Object(out)
}

pub fn homology_to_json(h: &HomologyTable) -> Value {
    json!({
        "ranks": degree_map(&h.ranks),
        "top_degree": 2 * h.n - 1,
        "top_rank": h.top_rank(),
        "paper_H0": h.paper_h0,
    })
}

pub fn cells_to_json(cs: &CellStructure, n: usize) -> Value {
    let mut generators = Map::new();
    for j in 1..=n {
        let names: Vec<Value> = cs
            .generators
            .get(&j)
            .map(|g| {
                g.iter()
                    .map(|c| Value::String(c.name.to_string()))
                    .collect()
            })
            .unwrap_or_default();
        generators.insert(j.to_string(), Value::Array(names));
    }
    json!({
        "functional": ints_to_json(&cs.functional.coefficients),
        "zero_cells": cs.zero_cells,
        "cells": degree_map(&cs.cells_by_degree(n)),
        "generators": generators,
    })
}

pub fn orientation_to_json(o: &OrientationRecord) -> Value {
    json!({ "sign_rho": o.sign_rho, "det_delta": o.det_delta })
}

pub fn witness_to_json(w: &TranslationWitness) -> Value {
    let mut phi = Map::new();
    for (a, b) in w.phi() {
        phi.insert(a.to_string(), facet_to_json(*b));
    }
    json!({ "phi": phi, "delta": matrix_to_json(w.delta()) })
}

pub fn normal_form_to_json(nf: &SimplexNormalForm) -> Value {
    let mut signs = Map::new();
    for (f, s) in &nf.signs {
        signs.insert(f.to_string(), json!(s));
    }
    let mut vectors = Map::new();
    for (f, v) in &nf.normal_form {
        vectors.insert(f.to_string(), ints_to_json(v));
    }
    json!({
        "residual": facet_to_json(nf.residual),
        "change_of_basis": matrix_to_json(&nf.change_of_basis),
        "signs": signs,
        "vectors": vectors,
    })
}

pub fn component_to_json(c: &ComponentSummary) -> Value {
    json!({
        "name": c.name,
        "facet": facet_to_json(c.facet),
        "type": c.kind,
        "has_type": c.has_kind,
        "valid": c.valid,
        "vertices": c.vertices,
        "h_vector": c.h_vector,
        "betti": c.betti,
    })
}

pub fn report_to_json(r: &GluingReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "details": c.details }))
        .collect();
    json!({
        "n": r.n,
        "k": r.k,
        "seed": r.seed,
        "pass": r.pass(),
        "checks": checks,
        "components": r.components.iter().map(component_to_json).collect::<Vec<_>>(),
        "cells": degree_map(&r.cells),
        "homology": r.homology.as_ref().map(homology_to_json),
        "orientation": orientation_to_json(&r.orientation),
        "witness": r.witness.as_ref().map(witness_to_json),
        "p3_normal_form": r.normal_form.as_ref().map(normal_form_to_json),
        "boundary_label": r.boundary_label().as_str(),
        "paper_H0_discrepancy": r.paper_h0_discrepancy(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use cobord_core::cobordism::{build_w, default_r1};

    #[test]
    fn vertex_names_round_trip() {
        for s in ["A0", "A12~5", "A3~5~7", "(A0,A1~2)", "((A0,A1),A2~3)~9"] {
            assert_eq!(parse_vertex_name(s).unwrap().to_string(), s);
        }
        for s in ["", "B0", "A", "(A0,A1", "A0~", "A0x"] {
            assert!(parse_vertex_name(s).is_err(), "{s}");
        }
    }

    #[test]
    fn rationals() {
        assert_eq!(rational_to_string(&parse_rational("2/10").unwrap()), "1/5");
        assert_eq!(rational_to_string(&parse_rational("3").unwrap()), "3/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.2").is_err());
    }

    #[test]
    fn polytope_round_trip_product() {
        let s = SimplePolytope::simplex(2).unwrap();
        let p = s.product(&SimplePolytope::simplex(1).unwrap()).unwrap();
        let back = polytope_from_json(&polytope_to_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn w_round_trip() {
        let w = build_w(1, &default_r1()).unwrap();
        let v = w_to_json(&w);
        let back = w_from_json(&v).unwrap();
        assert_eq!(back, w);
        assert_eq!(to_pretty(&w_to_json(&back)), to_pretty(&v));
    }

    #[test]
    fn rejects_non_canonical_sign() {
        let w = build_w(1, &default_r1()).unwrap();
        let mut v = pair_to_json(w.pair());
        v["vectors"]["0"] = json!([0, -1, -1]);
        assert!(matches!(pair_from_json(&v), Err(FormatError::Schema(_))));
    }
}
