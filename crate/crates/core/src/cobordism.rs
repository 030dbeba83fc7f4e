//! The manifold with quasitoric boundary `W` over `Δⁿ_Q`, its boundary
//! components, the CW cell counts of `(W, ∂W)`, and the gluing certificate.
//!
//! `W` is represented by its characteristic pair: `η` on the `n + 1`
//! original simplex facets, nothing on the cut facets `P1, P2, P3`. The CW
//! structure on `W/∂W` has one 0-cell plus one `(2j-1)`-cell for every
//! vertex `v` with `ind(v) = j` whose unique original-edge remnant points
//! into `v`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use num_rational::BigRational;
use thiserror::Error;

use crate::charfn::{
    delta_matrix, eta_assignment, normalize_simplex_pair, orientation_signs, restrict_to_facet,
    rho_permutation, validate, verify_translation, BoundaryLabel, CharError, CharPair,
    OrientationRecord, SimplexNormalForm, TranslationWitness, ValidationReport,
};
use crate::polytope::{
    combinatorially_isomorphic, truncated_simplex, truncation_facets, FacetId, LinearFunctional,
    PolytopeError, SimplePolytope, VertexName,
};
use crate::BigInt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CobordismError {
    #[error("k = 0 is not supported: for n = 2 the faces to be cut are single vertices, the construction needs k >= 1")]
    ZeroK,
    #[error("expected boundary facets P1, P2, P3, found {0:?}")]
    BadBoundary(Vec<FacetId>),
    #[error("boundary facets {0} and {1} share a vertex")]
    BoundaryNotDisjoint(FacetId, FacetId),
    #[error("W-pair is not a characteristic pair: {0} failing vertices")]
    Invalid(usize),
    #[error("vertex {vertex} has {count} original-edge remnants, expected exactly 1")]
    OriginalEdgeCount { vertex: String, count: usize },
    #[error("cells in adjacent degrees {0} and {1}: homology needs the attaching maps")]
    AdjacentCells(usize, usize),
    #[error("pair has boundary facets")]
    OpenPair,
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// `W(Δⁿ_Q, η)` at the level of characteristic pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WManifold {
    k: usize,
    n: usize,
    r1: BigRational,
    pair: CharPair,
}

impl WManifold {
    /// Builds the truncated simplex for `n = 2(k+1)` and attaches the given
    /// vectors without checking the characteristic condition.
    pub fn assemble(
        k: usize,
        r1: &BigRational,
        assignment: BTreeMap<FacetId, Vec<BigInt>>,
    ) -> Result<Self, CobordismError> {
        if k == 0 {
            return Err(CobordismError::ZeroK);
        }
        let n = 2 * (k + 1);
        let polytope = truncated_simplex(n, r1)?;
        let pair = CharPair::attach(polytope, n - 1, assignment)?;
        Self::from_pair(k, r1, pair)
    }

    /// Wraps an existing pair, checking the boundary layout only.
    pub fn from_pair(k: usize, r1: &BigRational, pair: CharPair) -> Result<Self, CobordismError> {
        if k == 0 {
            return Err(CobordismError::ZeroK);
        }
        let n = 2 * (k + 1);
        let boundary = pair.boundary_facets();
        if boundary != truncation_facets(n)
            || pair.torus_rank() != n - 1
            || pair.polytope().dim() != n
        {
            return Err(CobordismError::BadBoundary(boundary));
        }
        Ok(Self {
            k,
            n,
            r1: r1.clone(),
            pair,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r1(&self) -> &BigRational {
        &self.r1
    }

    pub fn pair(&self) -> &CharPair {
        &self.pair
    }

    pub fn polytope(&self) -> &SimplePolytope {
        self.pair.polytope()
    }

    pub fn boundary_facets(&self) -> [FacetId; 3] {
        truncation_facets(self.n)
    }
}

/// The default cut parameter `1/5`.
pub fn default_r1() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(5))
}

/// `W` for `n = 2(k+1)` with the standard `η`, validated.
pub fn build_w(k: usize, r1: &BigRational) -> Result<WManifold, CobordismError> {
    if k == 0 {
        return Err(CobordismError::ZeroK);
    }
    let w = WManifold::assemble(k, r1, eta_assignment(2 * (k + 1))?)?;
    let report = validate(&w.pair);
    if !report.is_valid() {
        return Err(CobordismError::Invalid(report.failures.len()));
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryComponents {
    pub p1: CharPair,
    pub p2: CharPair,
    pub p3: CharPair,
}

impl BoundaryComponents {
    pub fn as_array(&self) -> [&CharPair; 3] {
        [&self.p1, &self.p2, &self.p3]
    }
}

fn check_disjoint(w: &WManifold) -> Result<(), CobordismError> {
    let facets = w.boundary_facets();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (facets[i], facets[j]);
            if w.polytope()
                .vertices()
                .iter()
                .any(|v| v.facets.contains(&a) && v.facets.contains(&b))
            {
                return Err(CobordismError::BoundaryNotDisjoint(a, b));
            }
        }
    }
    Ok(())
}

/// The closed pairs `(P_i, η^i)` of the three boundary components.
pub fn boundary_components(w: &WManifold) -> Result<BoundaryComponents, CobordismError> {
    check_disjoint(w)?;
    let [p1, p2, p3] = w.boundary_facets();
    Ok(BoundaryComponents {
        p1: restrict_to_facet(&w.pair, p1)?,
        p2: restrict_to_facet(&w.pair, p2)?,
        p3: restrict_to_facet(&w.pair, p3)?,
    })
}

/// One odd-dimensional cell `(v, e_v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGenerator {
    pub vertex: usize,
    pub name: VertexName,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellStructure {
    pub functional: LinearFunctional,
    pub indices: Vec<usize>,
    /// `j -> I_j`; the cells of `I_j` have dimension `2j - 1`.
    pub generators: BTreeMap<usize, Vec<CellGenerator>>,
    pub zero_cells: usize,
}

impl CellStructure {
    /// `|I_j|` for `j = 1..=n`.
    pub fn counts(&self, n: usize) -> BTreeMap<usize, usize> {
        (1..=n)
            .map(|j| (j, self.generators.get(&j).map_or(0, |g| g.len())))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.generators.values().map(|g| g.len()).sum()
    }

    /// Cell counts keyed by cell dimension, without the 0-cell.
    pub fn cells_by_degree(&self, n: usize) -> BTreeMap<usize, usize> {
        self.counts(n)
            .into_iter()
            .map(|(j, c)| (2 * j - 1, c))
            .collect()
    }
}

/// Cell structure of `W/∂W` for the functional drawn from `seed`.
pub fn cell_structure(w: &WManifold, seed: u64) -> Result<CellStructure, CobordismError> {
    let zeta = w.polytope().generate_functional(seed)?;
    cell_structure_with(w, zeta)
}

pub fn cell_structure_with(
    w: &WManifold,
    zeta: LinearFunctional,
) -> Result<CellStructure, CobordismError> {
    let p = w.polytope();
    let values = p.functional_values(&zeta)?;
    let indices = p.vertex_indices(&zeta)?;
    let mut generators: BTreeMap<usize, Vec<CellGenerator>> = BTreeMap::new();
    for (v, vx) in p.vertices().iter().enumerate() {
        let originals: Vec<usize> = (0..p.edges().len())
            .filter(|&e| p.edges()[e].touches(v) && p.edges()[e].provenance.is_original())
            .collect();
        let [edge] = originals[..] else {
            return Err(CobordismError::OriginalEdgeCount {
                vertex: vx.name.to_string(),
                count: originals.len(),
            });
        };
        let other = p.edges()[edge].other(v);
        if values[v] > values[other] {
            generators
                .entry(indices[v])
                .or_default()
                .push(CellGenerator {
                    vertex: v,
                    name: vx.name.clone(),
                    edge,
                });
        }
    }
    Ok(CellStructure {
        functional: zeta,
        indices,
        generators,
        zero_cells: 1,
    })
}

/// Homology ranks of `(W, ∂W)` in degrees `0..=2n-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyTable {
    pub n: usize,
    pub ranks: BTreeMap<usize, usize>,
    /// The value `Z` that the unreduced count of the single 0-cell gives.
    pub paper_h0: usize,
    /// Set: the relative `H_0` is 0, not the 0-cell count.
    pub paper_h0_discrepancy: bool,
}

impl HomologyTable {
    pub fn rank(&self, degree: usize) -> usize {
        self.ranks.get(&degree).copied().unwrap_or(0)
    }

    pub fn top_rank(&self) -> usize {
        self.rank(2 * self.n - 1)
    }

    pub fn supported_degrees(&self) -> Vec<usize> {
        self.ranks
            .iter()
            .filter(|(_, r)| **r > 0)
            .map(|(d, _)| *d)
            .collect()
    }
}

/// Ranks of the reduced cellular homology of a complex whose positive-degree
/// cells never occur in adjacent degrees, so every differential vanishes.
/// The 0-cell is the basepoint and drops out of the reduced complex.
pub fn homology_from_cells(
    n: usize,
    cells: &BTreeMap<usize, usize>,
) -> Result<HomologyTable, CobordismError> {
    let top = 2 * n - 1;
    for d in 1..top {
        if cells.get(&d).copied().unwrap_or(0) > 0 && cells.get(&(d + 1)).copied().unwrap_or(0) > 0
        {
            return Err(CobordismError::AdjacentCells(d, d + 1));
        }
    }
    let ranks = (0..=top)
        .map(|d| {
            (
                d,
                if d == 0 {
                    0
                } else {
                    cells.get(&d).copied().unwrap_or(0)
                },
            )
        })
        .collect();
    Ok(HomologyTable {
        n,
        ranks,
        paper_h0: 1,
        paper_h0_discrepancy: true,
    })
}

pub fn homology_w(w: &WManifold, seed: u64) -> Result<HomologyTable, CobordismError> {
    let cells = cell_structure(w, seed)?;
    homology_from_cells(w.n, &cells.cells_by_degree(w.n))
}

/// `Σ|I_j| = χ(∂W)/2`, with `χ` of a closed quasitoric manifold equal to the
/// vertex count of its polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerCheck {
    pub cell_total: usize,
    pub boundary_vertices: [usize; 3],
    pub expected_total: usize,
    pub pass: bool,
}

impl EulerCheck {
    pub fn boundary_half(&self) -> Option<usize> {
        let s: usize = self.boundary_vertices.iter().sum();
        s.is_multiple_of(2).then_some(s / 2)
    }
}

pub fn euler_check(w: &WManifold, seed: u64) -> Result<EulerCheck, CobordismError> {
    let cells = cell_structure(w, seed)?;
    let comps = boundary_components(w)?;
    let boundary_vertices = comps.as_array().map(|c| c.polytope().vertices().len());
    let n = w.n;
    let expected_total = n * (n + 4) / 4;
    let cell_total = cells.total();
    let half: usize = boundary_vertices.iter().sum();
    let pass = half.is_multiple_of(2) && cell_total == half / 2 && cell_total == expected_total;
    Ok(EulerCheck {
        cell_total,
        boundary_vertices,
        expected_total,
        pass,
    })
}

/// Betti numbers `b_0..b_{2d}` of a closed quasitoric manifold: `b_{2i} = h_i`.
pub fn betti_boundary(pair: &CharPair, seed: u64) -> Result<Vec<usize>, CobordismError> {
    if !pair.is_closed() {
        return Err(CobordismError::OpenPair);
    }
    let report = validate(pair);
    if !report.is_valid() {
        return Err(CobordismError::Invalid(report.failures.len()));
    }
    let p = pair.polytope();
    let zeta = p.generate_functional(seed)?;
    let h = p.h_vector(&zeta)?;
    let mut betti = vec![0; 2 * p.dim() + 1];
    for (i, hi) in h.into_iter().enumerate() {
        betti[2 * i] = hi;
    }
    Ok(betti)
}

/// `Φ` between the facets of `P1` and `P2`: the facet carrying `η_j` goes to
/// the facet carrying `η_{ρ(j)}`. Facet `D_i` carries `η_{n-i}`.
pub fn rho_facet_bijection(n: usize) -> Result<BTreeMap<FacetId, FacetId>, CobordismError> {
    let rho = rho_permutation(n)?;
    Ok((0..=n)
        .map(|i| (FacetId(i as u32), FacetId((n - rho.apply(n - i)) as u32)))
        .collect())
}

/// The gluing witness `(Φ_ρ, δ′)` for `P1 -> P2`.
pub fn gluing_witness(n: usize) -> Result<TranslationWitness, CobordismError> {
    Ok(TranslationWitness::new(
        rho_facet_bijection(n)?,
        delta_matrix(n)?,
    )?)
}

/// All seeds produce the same cell counts.
pub fn cell_counts_agree(w: &WManifold, seeds: &[u64]) -> Result<bool, CobordismError> {
    let mut first = None;
    for &seed in seeds {
        let counts = cell_structure(w, seed)?.counts(w.n);
        match &first {
            None => first = Some(counts),
            Some(c) if *c != counts => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    pub facet: FacetId,
    pub name: String,
    /// Expected type: `D{a}xD{b}` for a product of simplices, `D{d}` for a simplex.
    pub kind: String,
    /// Combinatorially isomorphic to `kind`.
    pub has_kind: bool,
    pub valid: bool,
    pub vertices: usize,
    pub h_vector: Option<Vec<usize>>,
    pub betti: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingReport {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub components: Vec<ComponentSummary>,
    pub cells: BTreeMap<usize, usize>,
    pub homology: Option<HomologyTable>,
    pub orientation: OrientationRecord,
    pub witness: Option<TranslationWitness>,
    pub normal_form: Option<SimplexNormalForm>,
    pub validation: ValidationReport,
}

impl GluingReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn boundary_label(&self) -> BoundaryLabel {
        self.orientation.boundary_label
    }

    pub fn paper_h0_discrepancy(&self) -> bool {
        self.homology
            .as_ref()
            .is_none_or(|h| h.paper_h0_discrepancy)
    }
}

fn check(name: &'static str, pass: bool, details: String) -> Check {
    Check {
        name,
        pass,
        details,
    }
}

fn failed(name: &'static str, err: impl core::fmt::Display) -> Check {
    check(name, false, alloc::format!("error: {err}"))
}

fn summarize(
    pair: &CharPair,
    facet: FacetId,
    name: &str,
    kind: String,
    model: &SimplePolytope,
    seed: u64,
) -> ComponentSummary {
    let p = pair.polytope();
    let h_vector = p
        .generate_functional(seed)
        .ok()
        .and_then(|z| p.h_vector(&z).ok());
    ComponentSummary {
        facet,
        name: name.into(),
        kind,
        has_kind: combinatorially_isomorphic(p, model).is_some(),
        valid: validate(pair).is_valid(),
        vertices: p.vertices().len(),
        h_vector,
        betti: betti_boundary(pair, seed).ok(),
    }
}

/// Type, validity, h-vector and Betti numbers of `P1, P2, P3`.
pub fn summarize_components(
    w: &WManifold,
    comps: &BoundaryComponents,
    seed: u64,
) -> Result<[ComponentSummary; 3], CobordismError> {
    let (n, half) = (w.n, w.n / 2);
    let [f1, f2, f3] = w.boundary_facets();
    let prism = SimplePolytope::simplex(half - 1)?.product(&SimplePolytope::simplex(half)?)?;
    let simplex = SimplePolytope::simplex(n - 1)?;
    let prism_kind = alloc::format!("D{}xD{}", half - 1, half);
    Ok([
        summarize(&comps.p1, f1, "P1", prism_kind.clone(), &prism, seed),
        summarize(&comps.p2, f2, "P2", prism_kind, &prism, seed),
        summarize(
            &comps.p3,
            f3,
            "P3",
            alloc::format!("D{}", n - 1),
            &simplex,
            seed,
        ),
    ])
}

/// Runs every check of the construction and collects the certificate. A
/// failing check does not abort; the report records it.
pub fn glue_report(w: &WManifold, seed: u64) -> Result<GluingReport, CobordismError> {
    let n = w.n;
    let orientation = orientation_signs(n)?;
    let mut checks = Vec::new();

    let validation = validate(&w.pair);
    let details = if validation.is_valid() {
        alloc::format!("all {} vertices unimodular", validation.vertices_checked)
    } else {
        let mut s = alloc::format!(
            "{} of {} vertices fail:",
            validation.failures.len(),
            validation.vertices_checked
        );
        for f in &validation.failures {
            let _ = write!(s, " {}", f.vertex);
        }
        s
    };
    checks.push(check("validate", validation.is_valid(), details));

    let mut components = Vec::new();
    let mut witness = None;
    let mut normal_form = None;
    match boundary_components(w) {
        Err(e) => checks.push(failed("boundary", e)),
        Ok(comps) => {
            checks.push(check(
                "boundary-disjoint",
                true,
                "P1, P2, P3 pairwise vertex-disjoint".into(),
            ));

            let summaries = summarize_components(w, &comps, seed)?;
            let mut types = String::new();
            let mut valid = String::new();
            for c in &summaries {
                let sep = if types.is_empty() { "" } else { ", " };
                let _ = write!(types, "{sep}{} ~ {}: {}", c.name, c.kind, c.has_kind);
                let _ = write!(valid, "{sep}{}: {}", c.name, c.valid);
            }
            checks.push(check(
                "boundary-types",
                summaries.iter().all(|c| c.has_kind),
                types,
            ));
            checks.push(check(
                "boundary-valid",
                summaries.iter().all(|c| c.valid),
                valid,
            ));
            components.extend(summaries);

            match gluing_witness(n).and_then(|wit| {
                let report = verify_translation(&comps.p1, &comps.p2, &wit)?;
                Ok((wit, report))
            }) {
                Ok((wit, report)) => {
                    let details = if report.holds() {
                        alloc::format!("delta'.eta1(F) = eta2(Phi(F)) on all {} facets", n + 1)
                    } else {
                        alloc::format!(
                            "isomorphism: {}, {} facet mismatches",
                            report.isomorphism,
                            report.mismatches.len()
                        )
                    };
                    checks.push(check("translation", report.holds(), details));
                    witness = Some(wit);
                }
                Err(e) => checks.push(failed("translation", e)),
            }

            match normalize_simplex_pair(&comps.p3) {
                Ok(nf) => {
                    let round_trip = nf
                        .apply(&comps.p3)
                        .map(|m| m == nf.normal_form)
                        .unwrap_or(false);
                    checks.push(check(
                        "p3-normal-form",
                        round_trip,
                        alloc::format!("standard basis plus all-ones on facet {}", nf.residual),
                    ));
                    normal_form = Some(nf);
                }
                Err(e) => checks.push(failed("p3-normal-form", e)),
            }
        }
    }

    let mut cells = BTreeMap::new();
    let mut homology = None;
    match cell_structure(w, seed) {
        Err(e) => checks.push(failed("cell-structure", e)),
        Ok(cs) => {
            cells = cs.cells_by_degree(n);
            let top = cs.counts(n)[&n];
            checks.push(check(
                "cell-structure",
                top == 1,
                alloc::format!("{} odd cells plus one 0-cell, |I_{n}| = {top}", cs.total()),
            ));
            match homology_from_cells(n, &cells) {
                Ok(h) => {
                    checks.push(check(
                        "top-homology",
                        h.top_rank() == 1,
                        alloc::format!("H_{}(W, dW) has rank {}", 2 * n - 1, h.top_rank()),
                    ));
                    homology = Some(h);
                }
                Err(e) => checks.push(failed("top-homology", e)),
            }
        }
    }

    match euler_check(w, seed) {
        Ok(e) => checks.push(check(
            "euler",
            e.pass,
            alloc::format!(
                "sum |I_j| = {}, (V(P1)+V(P2)+V(P3))/2 = {}, n(n+4)/4 = {}",
                e.cell_total,
                e.boundary_half()
                    .map_or_else(|| "odd".into(), |h| h.to_string()),
                e.expected_total
            ),
        )),
        Err(e) => checks.push(failed("euler", e)),
    }

    checks.push(check(
        "orientation",
        orientation.is_consistent(),
        orientation.describe(),
    ));

    Ok(GluingReport {
        n,
        k: w.k,
        seed,
        checks,
        components,
        cells,
        homology,
        orientation,
        witness,
        normal_form,
        validation,
    })
}
