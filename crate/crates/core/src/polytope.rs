//! Combinatorial simple polytopes with optional exact rational geometry.
//!
//! A [`SimplePolytope`] is stored as vertex–facet incidences. Every vertex
//! carries the set of facets it lies on (exactly `dim` of them) and edges
//! are derived: two vertices span an edge iff they share `dim - 1` facets.
//!
//! The built-in families (simplices, their face truncations and products)
//! additionally carry exact rational coordinates and, per facet, the
//! defining half-space `normal · x >= offset`. Truncation then computes new
//! vertices as exact hyperplane/edge intersections, and the incidence data
//! can be cross-checked against the geometry.
//!
//! Provenance is tracked throughout: facets know whether they are original
//! simplex facets or were created by a cut, and edges know whether they are
//! remnants of an edge of the root polytope.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type Point = Vec<BigRational>;

/// Coefficients of generated functionals are drawn from `[-RANGE, RANGE]`.
pub const FUNCTIONAL_COEFF_RANGE: i64 = 1_000_000;
pub const FUNCTIONAL_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("dimension must be at least 1, got {0}")]
    BadDimension(usize),
    #[error("truncated simplex needs an even dimension >= 4, got {0}")]
    BadTruncationDimension(usize),
    #[error("cut parameter {0} must lie strictly between 0 and 1/4")]
    CutParameterOutOfRange(BigRational),
    #[error("unknown facet id {0}")]
    UnknownFacet(FacetId),
    #[error("facet set is empty")]
    EmptyFacetSet,
    #[error("facets {0:?} have no common vertex")]
    EmptyFace(Vec<FacetId>),
    #[error("face is the whole polytope")]
    WholePolytope,
    #[error("face {0:?} is a facet; a parallel cut would leave it without vertices")]
    FacetCut(Vec<FacetId>),
    #[error("vertex {vertex} has {found} facets, expected {expected}")]
    NotSimple {
        vertex: String,
        found: usize,
        expected: usize,
    },
    #[error("two vertices share the facet set {0:?}")]
    DuplicateVertex(Vec<FacetId>),
    #[error("vertex {vertex} has {found} neighbours across a ridge, expected exactly 1")]
    BadRidge { vertex: String, found: usize },
    #[error("vertex–edge graph is disconnected")]
    Disconnected,
    #[error("facet {0} contains no vertex")]
    EmptyFacet(FacetId),
    #[error("two edges descend from the same ancestor edge ({0}, {1})")]
    DuplicateAncestor(usize, usize),
    #[error("coordinates must be given for all vertices or none")]
    PartialCoordinates,
    #[error("coordinate length {found} differs from ambient dimension {expected}")]
    CoordinateLength { expected: usize, found: usize },
    #[error("vertices {0} and {1} have identical coordinates")]
    CoincidentVertices(String, String),
    #[error("vertex {vertex} is inconsistent with the half-space of facet {facet}")]
    GeometryMismatch { vertex: String, facet: FacetId },
    #[error("cutting geometry requires facet half-spaces")]
    MissingHalfSpaces,
    #[error("vertex {0} of the cut face was created by an earlier cut")]
    RecutVertex(String),
    #[error("cut hyperplane does not separate the face from the remaining vertices")]
    CutNotSeparating,
    #[error("face changed under an earlier cut: {0}")]
    FaceNotPreserved(String),
    #[error("faces to be truncated share vertices")]
    FacesNotDisjoint,
    #[error("polytope has no coordinates")]
    NoCoordinates,
    #[error("functional has {found} coefficients, ambient dimension is {expected}")]
    FunctionalLength { expected: usize, found: usize },
    #[error("functional takes equal values on vertices {0} and {1}")]
    FunctionalNotInjective(String, String),
    #[error("no injective functional found after {0} attempts")]
    FunctionalSearchExhausted(usize),
    #[error("edge ({0}, {1}) has no provenance")]
    MissingEdgeProvenance(String, String),
}

/// Opaque facet identifier, unique within a polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FacetId(pub u32);

impl fmt::Display for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FacetProvenance {
    /// The simplex facet `{x_j = 0}`.
    Original(usize),
    /// Facet created by truncating the face cut out by `face`.
    Cut { name: String, face: Vec<FacetId> },
    /// Facet of a product, inherited from factor `side` (0 or 1).
    Factor { side: usize, source: FacetId },
}

/// The closed half-space `normal · x >= offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: BigRational,
}

impl HalfSpace {
    pub fn slack(&self, x: &[BigRational]) -> BigRational {
        dot(&self.normal, x) - &self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetLabel {
    pub id: FacetId,
    pub provenance: FacetProvenance,
    pub halfspace: Option<HalfSpace>,
}

impl FacetLabel {
    /// Human-readable name: `D3` for an original facet, the cut name for a
    /// cut facet.
    pub fn display_name(&self) -> String {
        match &self.provenance {
            FacetProvenance::Original(j) => alloc::format!("D{j}"),
            FacetProvenance::Cut { name, .. } => name.clone(),
            FacetProvenance::Factor { side, source } => {
                alloc::format!("{}{}", ["L", "R"][*side], source)
            }
        }
    }
}

/// Canonical vertex name. A vertex created by a cut is named by the vertex it
/// replaced and the facet it dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexName {
    Root(usize),
    Cut(Box<VertexName>, FacetId),
    Pair(Box<VertexName>, Box<VertexName>),
}

impl VertexName {
    pub fn is_cut(&self) -> bool {
        matches!(self, VertexName::Cut(..))
    }
}

impl fmt::Display for VertexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexName::Root(i) => write!(f, "A{i}"),
            VertexName::Cut(v, facet) => write!(f, "{v}~{facet}"),
            VertexName::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub name: VertexName,
    pub facets: BTreeSet<FacetId>,
    pub coord: Option<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeProvenance {
    /// Part of the root-polytope edge between root vertices `ancestor.0` and
    /// `ancestor.1`.
    Original { ancestor: (usize, usize) },
    /// Edge created inside a cut facet.
    Cut,
}

impl EdgeProvenance {
    pub fn is_original(&self) -> bool {
        matches!(self, EdgeProvenance::Original { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub ends: (usize, usize),
    pub provenance: EdgeProvenance,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        self.ends.0 == v || self.ends.1 == v
    }
}

/// A face given by a set of facets, together with the vertices on all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceRef {
    pub facets: BTreeSet<FacetId>,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFunctional {
    pub coefficients: Vec<BigInt>,
}

impl LinearFunctional {
    pub fn new(coefficients: Vec<BigInt>) -> Self {
        Self { coefficients }
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.coefficients
            .iter()
            .zip(x)
            .map(|(c, xi)| BigRational::from_integer(c.clone()) * xi)
            .sum()
    }

    pub fn negated(&self) -> Self {
        Self::new(self.coefficients.iter().map(|c| -c).collect())
    }
}

/// A combinatorial simple polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplePolytope {
    dim: usize,
    facets: Vec<FacetLabel>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SimplePolytope {
    /// Builds a polytope from facets and vertices, deriving the edges. The
    /// callback assigns provenance to each derived edge; it receives the
    /// endpoints in their final (sorted) positions.
    pub fn assemble<F>(
        dim: usize,
        mut facets: Vec<FacetLabel>,
        mut vertices: Vec<Vertex>,
        mut provenance: F,
    ) -> Result<Self, PolytopeError>
    where
        F: FnMut(usize, &Vertex, usize, &Vertex) -> Result<EdgeProvenance, PolytopeError>,
    {
        if dim == 0 {
            return Err(PolytopeError::BadDimension(dim));
        }
        facets.sort_by_key(|f| f.id);
        vertices.sort_by(|a, b| a.facets.cmp(&b.facets));
        let mut edges = Vec::new();
        for a in 0..vertices.len() {
            for b in a + 1..vertices.len() {
                let shared = vertices[a].facets.intersection(&vertices[b].facets).count();
                if shared + 1 == dim {
                    let prov = provenance(a, &vertices[a], b, &vertices[b])?;
                    edges.push(Edge {
                        ends: (a, b),
                        provenance: prov,
                    });
                }
            }
        }
        let polytope = Self {
            dim,
            facets,
            vertices,
            edges,
        };
        polytope.check_invariants()?;
        Ok(polytope)
    }

    /// The standard simplex `{x >= 0, sum x = 1}` in `R^{n+1}`.
    pub fn simplex(n: usize) -> Result<Self, PolytopeError> {
        if n == 0 {
            return Err(PolytopeError::BadDimension(n));
        }
        let facets = (0..=n)
            .map(|j| {
                let mut normal = vec![BigRational::zero(); n + 1];
                normal[j] = BigRational::one();
                FacetLabel {
                    id: FacetId(j as u32),
                    provenance: FacetProvenance::Original(j),
                    halfspace: Some(HalfSpace {
                        normal,
                        offset: BigRational::zero(),
                    }),
                }
            })
            .collect();
        let vertices = (0..=n)
            .map(|j| {
                let mut coord = vec![BigRational::zero(); n + 1];
                coord[j] = BigRational::one();
                Vertex {
                    name: VertexName::Root(j),
                    facets: (0..=n)
                        .filter(|&i| i != j)
                        .map(|i| FacetId(i as u32))
                        .collect(),
                    coord: Some(coord),
                }
            })
            .collect();
        Self::assemble(n, facets, vertices, |_, a, _, b| match (&a.name, &b.name) {
            (VertexName::Root(x), VertexName::Root(y)) => Ok(EdgeProvenance::Original {
                ancestor: ((*x).min(*y), (*x).max(*y)),
            }),
            _ => unreachable!("simplex vertices are roots"),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[FacetLabel] {
        &self.facets
    }

    pub fn facet_ids(&self) -> impl Iterator<Item = FacetId> + '_ {
        self.facets.iter().map(|f| f.id)
    }

    pub fn facet(&self, id: FacetId) -> Option<&FacetLabel> {
        self.facets
            .binary_search_by_key(&id, |f| f.id)
            .ok()
            .map(|i| &self.facets[i])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_coords(&self) -> bool {
        self.vertices.first().is_some_and(|v| v.coord.is_some())
    }

    fn has_halfspaces(&self) -> bool {
        self.facets.iter().all(|f| f.halfspace.is_some())
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        self.vertices
            .first()
            .and_then(|v| v.coord.as_ref())
            .map(|c| c.len())
    }

    pub fn vertex_index(&self, name: &VertexName) -> Option<usize> {
        self.vertices.iter().position(|v| &v.name == name)
    }

    /// Vertices lying on `facet`.
    pub fn facet_vertices(&self, facet: FacetId) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].facets.contains(&facet))
            .collect()
    }

    fn next_facet_id(&self) -> FacetId {
        FacetId(self.facets.last().map_or(0, |f| f.id.0 + 1))
    }

    /// Checks the structural invariants of a simple polytope, and the
    /// incidence/geometry agreement when coordinates and half-spaces exist.
    pub fn check_invariants(&self) -> Result<(), PolytopeError> {
        let known: BTreeSet<FacetId> = self.facet_ids().collect();
        for v in &self.vertices {
            if v.facets.len() != self.dim {
                return Err(PolytopeError::NotSimple {
                    vertex: v.name.to_string(),
                    found: v.facets.len(),
                    expected: self.dim,
                });
            }
            if let Some(f) = v.facets.iter().find(|f| !known.contains(f)) {
                return Err(PolytopeError::UnknownFacet(*f));
            }
        }
        for w in self.vertices.windows(2) {
            if w[0].facets == w[1].facets {
                return Err(PolytopeError::DuplicateVertex(
                    w[0].facets.iter().copied().collect(),
                ));
            }
        }
        for f in &self.facets {
            if !self.vertices.iter().any(|v| v.facets.contains(&f.id)) {
                return Err(PolytopeError::EmptyFacet(f.id));
            }
        }

        // Each (dim-1)-subset of a vertex's facets is an edge to exactly one
        // other vertex.
        let mut degree = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            degree[e.ends.0] += 1;
            degree[e.ends.1] += 1;
        }
        for (v, d) in degree.iter().enumerate() {
            if *d != self.dim {
                return Err(PolytopeError::BadRidge {
                    vertex: self.vertices[v].name.to_string(),
                    found: *d,
                });
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            for f in &v.facets {
                let neighbours = self
                    .edges
                    .iter()
                    .filter(|e| e.touches(i))
                    .filter(|e| !self.vertices[e.other(i)].facets.contains(f))
                    .count();
                if neighbours != 1 {
                    return Err(PolytopeError::BadRidge {
                        vertex: v.name.to_string(),
                        found: neighbours,
                    });
                }
            }
        }

        if !self.vertices.is_empty() {
            let adjacency = self.adjacency();
            let mut seen = vec![false; self.vertices.len()];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for &w in &adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(PolytopeError::Disconnected);
            }
        }

        let mut ancestors = BTreeSet::new();
        for e in &self.edges {
            if let EdgeProvenance::Original { ancestor } = e.provenance {
                if !ancestors.insert(ancestor) {
                    return Err(PolytopeError::DuplicateAncestor(ancestor.0, ancestor.1));
                }
            }
        }

        self.check_geometry()
    }

    fn check_geometry(&self) -> Result<(), PolytopeError> {
        let with = self.vertices.iter().filter(|v| v.coord.is_some()).count();
        if with == 0 {
            return Ok(());
        }
        if with != self.vertices.len() {
            return Err(PolytopeError::PartialCoordinates);
        }
        let ambient = self.ambient_dim().unwrap_or(0);
        for v in &self.vertices {
            let len = v.coord.as_ref().map_or(0, |c| c.len());
            if len != ambient {
                return Err(PolytopeError::CoordinateLength {
                    expected: ambient,
                    found: len,
                });
            }
        }
        let mut points: Vec<(&Point, usize)> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.coord.as_ref().unwrap(), i))
            .collect();
        points.sort();
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PolytopeError::CoincidentVertices(
                    self.vertices[w[0].1].name.to_string(),
                    self.vertices[w[1].1].name.to_string(),
                ));
            }
        }
        for f in &self.facets {
            let Some(h) = &f.halfspace else { continue };
            if h.normal.len() != ambient {
                return Err(PolytopeError::CoordinateLength {
                    expected: ambient,
                    found: h.normal.len(),
                });
            }
            for v in &self.vertices {
                let s = h.slack(v.coord.as_ref().unwrap());
                let on = v.facets.contains(&f.id);
                if s.is_negative() || s.is_zero() != on {
                    return Err(PolytopeError::GeometryMismatch {
                        vertex: v.name.to_string(),
                        facet: f.id,
                    });
                }
            }
        }
        Ok(())
    }

    /// For every facet, the affine rank of its vertex coordinates, keyed by
    /// facet id. A realized simple polytope has rank `dim - 1` everywhere.
    pub fn facet_affine_ranks(&self) -> Result<BTreeMap<FacetId, usize>, PolytopeError> {
        if !self.has_coords() {
            return Err(PolytopeError::NoCoordinates);
        }
        let mut out = BTreeMap::new();
        for f in &self.facets {
            let pts: Vec<&Point> = self
                .facet_vertices(f.id)
                .into_iter()
                .map(|v| self.vertices[v].coord.as_ref().unwrap())
                .collect();
            let diffs: Vec<Point> = pts[1..]
                .iter()
                .map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect())
                .collect();
            out.insert(f.id, rational_rank(diffs));
        }
        Ok(out)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.ends.0].push(e.ends.1);
            adj[e.ends.1].push(e.ends.0);
        }
        adj
    }

    pub fn face_from_facets(&self, facets: &BTreeSet<FacetId>) -> Result<FaceRef, PolytopeError> {
        if facets.is_empty() {
            return Err(PolytopeError::EmptyFacetSet);
        }
        if let Some(f) = facets.iter().find(|f| self.facet(**f).is_none()) {
            return Err(PolytopeError::UnknownFacet(*f));
        }
        let vertices: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| facets.is_subset(&self.vertices[v].facets))
            .collect();
        if vertices.is_empty() {
            return Err(PolytopeError::EmptyFace(facets.iter().copied().collect()));
        }
        Ok(FaceRef {
            facets: facets.clone(),
            vertices,
        })
    }

    /// All facets containing every vertex of the face.
    fn face_closure(&self, face: &FaceRef) -> BTreeSet<FacetId> {
        let mut it = face.vertices.iter().map(|&v| &self.vertices[v].facets);
        let first = it.next().cloned().unwrap_or_default();
        it.fold(first, |acc, s| acc.intersection(s).copied().collect())
    }

    /// The face as a polytope in its own right: the vertices of the face with
    /// the face's facets removed from their incidence sets.
    pub fn face_polytope(&self, face: &FaceRef) -> Result<SimplePolytope, PolytopeError> {
        let closure = self.face_closure(face);
        if closure.is_empty() || face.vertices.is_empty() {
            return Err(PolytopeError::WholePolytope);
        }
        let dim = self
            .dim
            .checked_sub(closure.len())
            .filter(|d| *d > 0)
            .ok_or(PolytopeError::BadDimension(0))?;
        let vertices: Vec<Vertex> = face
            .vertices
            .iter()
            .map(|&v| {
                let vx = &self.vertices[v];
                Vertex {
                    name: vx.name.clone(),
                    facets: vx.facets.difference(&closure).copied().collect(),
                    coord: vx.coord.clone(),
                }
            })
            .collect();
        let used: BTreeSet<FacetId> = vertices
            .iter()
            .flat_map(|v| v.facets.iter().copied())
            .collect();
        let facets: Vec<FacetLabel> = self
            .facets
            .iter()
            .filter(|f| used.contains(&f.id))
            .cloned()
            .collect();
        let edges = self.edge_map();
        Self::assemble(dim, facets, vertices, |_, a, _, b| {
            edges
                .get(&edge_key(&a.name, &b.name))
                .copied()
                .ok_or_else(|| {
                    PolytopeError::MissingEdgeProvenance(a.name.to_string(), b.name.to_string())
                })
        })
    }

    pub fn facet_polytope(&self, facet: FacetId) -> Result<SimplePolytope, PolytopeError> {
        let face = self.face_from_facets(&BTreeSet::from([facet]))?;
        self.face_polytope(&face)
    }

    fn edge_map(&self) -> BTreeMap<(VertexName, VertexName), EdgeProvenance> {
        self.edges
            .iter()
            .map(|e| {
                (
                    edge_key(&self.vertices[e.ends.0].name, &self.vertices[e.ends.1].name),
                    e.provenance,
                )
            })
            .collect()
    }

    /// Truncates `face`; the new facet gets a generated name.
    pub fn cut_face(
        &self,
        face: &FaceRef,
        r1: &BigRational,
    ) -> Result<SimplePolytope, PolytopeError> {
        let name = alloc::format!("C{}", self.next_facet_id());
        self.cut_face_named(face, r1, &name)
    }

    /// Truncates `face`, replacing each of its vertices `v` by one new vertex
    /// per facet `F_i` containing the face, on the edge at `v` leaving `F_i`.
    ///
    /// With coordinates, the cutting hyperplane is "sum of the slacks of the
    /// facets containing the face = r1", so on a simplex each new vertex is
    /// `(1 - r1) v + r1 w` for the ancestor edge `vw`.
    pub fn cut_face_named(
        &self,
        face: &FaceRef,
        r1: &BigRational,
        name: &str,
    ) -> Result<SimplePolytope, PolytopeError> {
        if face.vertices.is_empty() {
            return Err(PolytopeError::EmptyFace(
                face.facets.iter().copied().collect(),
            ));
        }
        let closure = self.face_closure(face);
        if closure.is_empty() || face.vertices.len() == self.vertices.len() {
            return Err(PolytopeError::WholePolytope);
        }
        if closure.len() == 1 {
            return Err(PolytopeError::FacetCut(closure.into_iter().collect()));
        }
        let geometric = self.has_coords();
        let mut cut_normal: Option<HalfSpace> = None;
        if geometric {
            let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
            if !r1.is_positive() || r1 >= &quarter {
                return Err(PolytopeError::CutParameterOutOfRange(r1.clone()));
            }
            if !self.has_halfspaces() {
                return Err(PolytopeError::MissingHalfSpaces);
            }
            if let Some(&v) = face
                .vertices
                .iter()
                .find(|&&v| self.vertices[v].name.is_cut())
            {
                return Err(PolytopeError::RecutVertex(
                    self.vertices[v].name.to_string(),
                ));
            }
            let ambient = self.ambient_dim().unwrap_or(0);
            let mut normal = vec![BigRational::zero(); ambient];
            let mut offset = BigRational::zero();
            for f in &closure {
                let h = self.facet(*f).and_then(|l| l.halfspace.as_ref()).unwrap();
                for (n, c) in normal.iter_mut().zip(&h.normal) {
                    *n += c;
                }
                offset += &h.offset;
            }
            cut_normal = Some(HalfSpace { normal, offset });
        }

        let new_id = self.next_facet_id();
        let in_face: BTreeSet<usize> = face.vertices.iter().copied().collect();
        let mut vertices: Vec<Vertex> = (0..self.vertices.len())
            .filter(|v| !in_face.contains(v))
            .map(|v| self.vertices[v].clone())
            .collect();

        // slack of the summed half-space is the sum of slacks, zero on the face
        if let Some(h) = &cut_normal {
            if vertices
                .iter()
                .any(|v| &h.slack(v.coord.as_ref().unwrap()) <= r1)
            {
                return Err(PolytopeError::CutNotSeparating);
            }
        }

        let adjacency = self.adjacency();
        for &v in &face.vertices {
            let vx = &self.vertices[v];
            for f in &closure {
                let kept: BTreeSet<FacetId> =
                    vx.facets.iter().filter(|x| *x != f).copied().collect();
                let u = adjacency[v]
                    .iter()
                    .copied()
                    .find(|&u| kept.is_subset(&self.vertices[u].facets))
                    .ok_or(PolytopeError::BadRidge {
                        vertex: vx.name.to_string(),
                        found: 0,
                    })?;
                let coord = match (&cut_normal, &vx.coord, &self.vertices[u].coord) {
                    (Some(h), Some(p), Some(q)) => {
                        let t = r1 / h.slack(q);
                        if !t.is_positive() || t >= BigRational::one() {
                            return Err(PolytopeError::CutNotSeparating);
                        }
                        Some(p.iter().zip(q).map(|(a, b)| a + &t * (b - a)).collect())
                    }
                    _ => None,
                };
                let mut facets = kept;
                facets.insert(new_id);
                vertices.push(Vertex {
                    name: VertexName::Cut(Box::new(vx.name.clone()), *f),
                    facets,
                    coord,
                });
            }
        }

        let mut facets = self.facets.clone();
        facets.push(FacetLabel {
            id: new_id,
            provenance: FacetProvenance::Cut {
                name: name.into(),
                face: closure.iter().copied().collect(),
            },
            halfspace: cut_normal.map(|h| HalfSpace {
                offset: h.offset + r1,
                normal: h.normal,
            }),
        });

        let old_edges = self.edge_map();
        Self::assemble(self.dim, facets, vertices, |_, a, _, b| {
            if a.facets.contains(&new_id) && b.facets.contains(&new_id) {
                return Ok(EdgeProvenance::Cut);
            }
            // remnant of an old edge: map a cut vertex back to the vertex it replaced
            let parent = |x: &Vertex| match &x.name {
                VertexName::Cut(p, _) if x.facets.contains(&new_id) => (**p).clone(),
                other => other.clone(),
            };
            old_edges
                .get(&edge_key(&parent(a), &parent(b)))
                .copied()
                .ok_or_else(|| {
                    PolytopeError::MissingEdgeProvenance(a.name.to_string(), b.name.to_string())
                })
        })
    }

    /// Combinatorial (and, when both factors have coordinates, geometric)
    /// product. Facets of `other` are renumbered after those of `self`.
    pub fn product(&self, other: &SimplePolytope) -> Result<SimplePolytope, PolytopeError> {
        let shift = self.next_facet_id().0;
        let remap = |f: FacetId| FacetId(f.0 + shift);
        let geometric = self.has_coords() && other.has_coords();
        let (la, ra) = (
            self.ambient_dim().unwrap_or(0),
            other.ambient_dim().unwrap_or(0),
        );
        let pad = |h: &HalfSpace, left: bool| -> HalfSpace {
            let mut normal = Vec::with_capacity(la + ra);
            if left {
                normal.extend(h.normal.iter().cloned());
                normal.extend((0..ra).map(|_| BigRational::zero()));
            } else {
                normal.extend((0..la).map(|_| BigRational::zero()));
                normal.extend(h.normal.iter().cloned());
            }
            HalfSpace {
                normal,
                offset: h.offset.clone(),
            }
        };
        let mut facets = Vec::new();
        for f in &self.facets {
            facets.push(FacetLabel {
                id: f.id,
                provenance: FacetProvenance::Factor {
                    side: 0,
                    source: f.id,
                },
                halfspace: f
                    .halfspace
                    .as_ref()
                    .filter(|_| geometric)
                    .map(|h| pad(h, true)),
            });
        }
        for f in &other.facets {
            facets.push(FacetLabel {
                id: remap(f.id),
                provenance: FacetProvenance::Factor {
                    side: 1,
                    source: f.id,
                },
                halfspace: f
                    .halfspace
                    .as_ref()
                    .filter(|_| geometric)
                    .map(|h| pad(h, false)),
            });
        }
        let mut vertices = Vec::new();
        for p in &self.vertices {
            for q in &other.vertices {
                let mut fs = p.facets.clone();
                fs.extend(q.facets.iter().map(|f| remap(*f)));
                let coord = match (&p.coord, &q.coord) {
                    (Some(a), Some(b)) if geometric => {
                        Some(a.iter().chain(b.iter()).cloned().collect())
                    }
                    _ => None,
                };
                vertices.push(Vertex {
                    name: VertexName::Pair(Box::new(p.name.clone()), Box::new(q.name.clone())),
                    facets: fs,
                    coord,
                });
            }
        }
        // the product is a root polytope for edge provenance purposes
        Self::assemble(self.dim + other.dim, facets, vertices, |a, _, b, _| {
            Ok(EdgeProvenance::Original { ancestor: (a, b) })
        })
    }

    /// Out-degree counts: `ind(v)` is the number of edges at `v` whose other
    /// end has smaller functional value.
    pub fn vertex_indices(&self, zeta: &LinearFunctional) -> Result<Vec<usize>, PolytopeError> {
        let values = self.functional_values(zeta)?;
        let mut ind = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            let (a, b) = e.ends;
            let head = if values[a] > values[b] { a } else { b };
            ind[head] += 1;
        }
        Ok(ind)
    }

    /// Values of `zeta` on the vertices; fails if two coincide.
    pub fn functional_values(
        &self,
        zeta: &LinearFunctional,
    ) -> Result<Vec<BigRational>, PolytopeError> {
        let ambient = self.ambient_dim().ok_or(PolytopeError::NoCoordinates)?;
        if zeta.coefficients.len() != ambient {
            return Err(PolytopeError::FunctionalLength {
                expected: ambient,
                found: zeta.coefficients.len(),
            });
        }
        let values: Vec<BigRational> = self
            .vertices
            .iter()
            .map(|v| zeta.eval(v.coord.as_ref().unwrap()))
            .collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].cmp(&values[b]));
        for w in order.windows(2) {
            if values[w[0]] == values[w[1]] {
                return Err(PolytopeError::FunctionalNotInjective(
                    self.vertices[w[0]].name.to_string(),
                    self.vertices[w[1]].name.to_string(),
                ));
            }
        }
        Ok(values)
    }

    /// `h_i = #{v : ind(v) = i}` for `i = 0..=dim`.
    pub fn h_vector(&self, zeta: &LinearFunctional) -> Result<Vec<usize>, PolytopeError> {
        let mut h = vec![0usize; self.dim + 1];
        for i in self.vertex_indices(zeta)? {
            h[i] += 1;
        }
        Ok(h)
    }

    /// Draws seeded random integer functionals until one separates all
    /// vertices.
    pub fn generate_functional(&self, seed: u64) -> Result<LinearFunctional, PolytopeError> {
        let ambient = self.ambient_dim().ok_or(PolytopeError::NoCoordinates)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..FUNCTIONAL_RETRIES {
            let zeta = LinearFunctional::new(
                (0..ambient)
                    .map(|_| {
                        BigInt::from(
                            rng.gen_range(-FUNCTIONAL_COEFF_RANGE..=FUNCTIONAL_COEFF_RANGE),
                        )
                    })
                    .collect(),
            );
            if self.functional_values(&zeta).is_ok() {
                return Ok(zeta);
            }
        }
        Err(PolytopeError::FunctionalSearchExhausted(FUNCTIONAL_RETRIES))
    }
}

fn edge_key(a: &VertexName, b: &VertexName) -> (VertexName, VertexName) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

fn rational_rank(mut rows: Vec<Point>) -> usize {
    let Some(width) = rows.first().map(|r| r.len()) else {
        return 0;
    };
    let mut rank = 0;
    for c in 0..width {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &rows[rank][c];
            for j in c..width {
                let d = &f * &rows[rank][j];
                rows[i][j] -= d;
            }
        }
        rank += 1;
    }
    rank
}

/// Truncation `Δⁿ_Q` of the simplex: cuts the face on facets `D_{n/2}..D_n`
/// (new facet `P1`), then the face on `D_0..D_{n/2}` (`P2`), then the vertex
/// `A_{n/2}` (`P3`), all at parameter `r1`.
pub fn truncated_simplex(n: usize, r1: &BigRational) -> Result<SimplePolytope, PolytopeError> {
    if n < 4 || n % 2 == 1 {
        return Err(PolytopeError::BadTruncationDimension(n));
    }
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if !r1.is_positive() || r1 >= &quarter {
        return Err(PolytopeError::CutParameterOutOfRange(r1.clone()));
    }
    let half = n / 2;
    let ids = |range: core::ops::RangeInclusive<usize>| -> BTreeSet<FacetId> {
        range.map(|j| FacetId(j as u32)).collect()
    };
    let cuts: [(&str, BTreeSet<FacetId>); 3] = [
        ("P1", ids(half..=n)),
        ("P2", ids(0..=half)),
        (
            "P3",
            (0..=n)
                .filter(|&j| j != half)
                .map(|j| FacetId(j as u32))
                .collect(),
        ),
    ];

    let simplex = SimplePolytope::simplex(n)?;
    let original: Vec<BTreeSet<VertexName>> = cuts
        .iter()
        .map(|(_, s)| {
            simplex.face_from_facets(s).map(|f| {
                f.vertices
                    .iter()
                    .map(|&v| simplex.vertices[v].name.clone())
                    .collect()
            })
        })
        .collect::<Result<_, _>>()?;
    for i in 0..3 {
        for j in i + 1..3 {
            if !original[i].is_disjoint(&original[j]) {
                return Err(PolytopeError::FacesNotDisjoint);
            }
        }
    }

    let mut current = simplex;
    for ((name, facets), expected) in cuts.iter().zip(&original) {
        let face = current.face_from_facets(facets)?;
        let found: BTreeSet<VertexName> = face
            .vertices
            .iter()
            .map(|&v| current.vertices[v].name.clone())
            .collect();
        if &found != expected {
            return Err(PolytopeError::FaceNotPreserved((*name).into()));
        }
        current = current.cut_face_named(&face, r1, name)?;
    }
    Ok(current)
}

/// Ids of the three cut facets `P1, P2, P3` of `truncated_simplex(n, _)`.
pub fn truncation_facets(n: usize) -> [FacetId; 3] {
    let base = n as u32 + 1;
    [FacetId(base), FacetId(base + 1), FacetId(base + 2)]
}

pub fn rational_from_i64(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Searches for a facet bijection `P -> Q` that maps the vertex facet-sets
/// of `P` exactly onto those of `Q`.
pub fn combinatorially_isomorphic(
    p: &SimplePolytope,
    q: &SimplePolytope,
) -> Option<BTreeMap<FacetId, FacetId>> {
    if p.dim != q.dim || p.facets.len() != q.facets.len() || p.vertices.len() != q.vertices.len() {
        return None;
    }
    let pf: Vec<FacetId> = p.facet_ids().collect();
    let qf: Vec<FacetId> = q.facet_ids().collect();
    let overlaps = |poly: &SimplePolytope, ids: &[FacetId]| -> Vec<Vec<usize>> {
        let sets: Vec<BTreeSet<usize>> = ids
            .iter()
            .map(|f| poly.facet_vertices(*f).into_iter().collect())
            .collect();
        sets.iter()
            .map(|a| sets.iter().map(|b| a.intersection(b).count()).collect())
            .collect()
    };
    let po = overlaps(p, &pf);
    let qo = overlaps(q, &qf);
    let targets: BTreeSet<&BTreeSet<FacetId>> = q.vertices.iter().map(|v| &v.facets).collect();

    struct Search<'a> {
        po: &'a [Vec<usize>],
        qo: &'a [Vec<usize>],
        assigned: Vec<usize>,
        used: Vec<bool>,
    }

    fn descend(s: &mut Search<'_>, leaf: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let i = s.assigned.len();
        if i == s.po.len() {
            return leaf(&s.assigned);
        }
        for c in 0..s.qo.len() {
            if s.used[c] || s.qo[c][c] != s.po[i][i] {
                continue;
            }
            if (0..i).any(|k| s.qo[c][s.assigned[k]] != s.po[i][k]) {
                continue;
            }
            s.used[c] = true;
            s.assigned.push(c);
            if descend(s, leaf) {
                return true;
            }
            s.assigned.pop();
            s.used[c] = false;
        }
        false
    }

    let mut search = Search {
        po: &po,
        qo: &qo,
        assigned: Vec::new(),
        used: vec![false; qf.len()],
    };
    let mut found = None;
    let mut leaf = |assignment: &[usize]| -> bool {
        let map: BTreeMap<FacetId, FacetId> = pf
            .iter()
            .zip(assignment)
            .map(|(a, &b)| (*a, qf[b]))
            .collect();
        let ok = p.vertices.iter().all(|v| {
            let image: BTreeSet<FacetId> = v.facets.iter().map(|f| map[f]).collect();
            targets.contains(&image)
        });
        if ok {
            found = Some(map);
        }
        ok
    };
    descend(&mut search, &mut leaf);
    found
}

/// True iff `phi` is a facet bijection `P -> Q` carrying the vertex
/// facet-sets of `P` onto those of `Q`.
pub fn is_combinatorial_isomorphism(
    p: &SimplePolytope,
    q: &SimplePolytope,
    phi: &BTreeMap<FacetId, FacetId>,
) -> bool {
    let domain: BTreeSet<FacetId> = p.facet_ids().collect();
    let codomain: BTreeSet<FacetId> = q.facet_ids().collect();
    if phi.keys().copied().collect::<BTreeSet<_>>() != domain {
        return false;
    }
    let image: BTreeSet<FacetId> = phi.values().copied().collect();
    if image != codomain || image.len() != phi.len() || p.vertices.len() != q.vertices.len() {
        return false;
    }
    let targets: BTreeSet<&BTreeSet<FacetId>> = q.vertices.iter().map(|v| &v.facets).collect();
    p.vertices.iter().all(|v| {
        let mapped: BTreeSet<FacetId> = v.facets.iter().map(|f| phi[f]).collect();
        targets.contains(&mapped)
    })
}
