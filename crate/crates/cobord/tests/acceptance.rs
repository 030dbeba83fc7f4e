//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! The oracles here are deliberately naive: cofactor determinants, minor
//! gcds, inversion counts. None of them calls into the library routines they
//! check.

use std::collections::BTreeMap;
use std::process::ExitCode;

use cobord_core::charfn::{
    delta_matrix, eta_assignment, eta_standard, orientation_signs, rho_permutation, validate,
    verify_translation, BoundaryLabel, CharPair, TranslationWitness,
};
use cobord_core::cobordism::{
    boundary_components, build_w, cell_structure, default_r1, euler_check, glue_report,
    gluing_witness, homology_w, WManifold,
};
use cobord_core::polytope::{
    combinatorially_isomorphic, rational_from_i64, truncation_facets, FacetId, SimplePolytope,
};
use cobord_core::zlinalg::{
    apply_matrix, is_direct_summand, permutation_sign, smith_normal_form, IntMatrix,
};
use cobord_core::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const EVEN_N: [usize; 5] = [4, 6, 8, 10, 12];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(v: &[BigInt]) -> Vec<i64> {
    v.iter()
        .map(|x| x.to_i64().expect("small entries"))
        .collect()
}

/// Cofactor expansion along the first row.
fn det_oracle(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0] as i128;
    }
    let mut total = 0i128;
    for c in 0..n {
        if m[0][c] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, x)| *x)
                    .collect()
            })
            .collect();
        let sign = if c % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][c] as i128 * det_oracle(&minor);
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// gcd of all `k x k` minors.
fn minor_gcd(m: &[Vec<i64>], k: usize) -> i128 {
    let (rows, cols) = (m.len(), m.first().map_or(0, |r| r.len()));
    let mut g = 0;
    for rs in subsets(rows, k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<i64>> = rs
                .iter()
                .map(|&r| cs.iter().map(|&c| m[r][c]).collect())
                .collect();
            g = gcd(g, det_oracle(&sub));
        }
    }
    g
}

fn rank_oracle(m: &[Vec<i64>]) -> usize {
    let max = m.len().min(m.first().map_or(0, |r| r.len()));
    (1..=max).rev().find(|&k| minor_gcd(m, k) != 0).unwrap_or(0)
}

/// Rows span a direct summand of `Z^k`: the maximal minors of the row matrix
/// have gcd 1.
fn summand_oracle(rows: &[Vec<i64>]) -> bool {
    rows.len() <= rows[0].len() && minor_gcd(rows, rows.len()) == 1
}

fn w(k: usize) -> WManifold {
    build_w(k, &default_r1()).expect("standard W")
}

fn k_of(n: usize) -> usize {
    n / 2 - 1
}

fn c1_eta_reproduction() -> Outcome {
    let expected: [[i64; 3]; 5] = [[1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]];
    let eta = eta_standard(4).map_err(|e| e.to_string())?;
    ensure(eta.len() == 5, || format!("{} vectors", eta.len()))?;
    for (j, (got, want)) in eta.iter().zip(expected).enumerate() {
        ensure(ints(got.as_slice()) == want, || format!("eta_{j} = {got}"))?;
    }
    Ok("eta_0..eta_4 exact".into())
}

fn c2_validity() -> Outcome {
    let mut total = 0;
    for n in EVEN_N {
        let wm = WManifold::assemble(k_of(n), &default_r1(), eta_assignment(n).unwrap()).unwrap();
        let report = validate(wm.pair());
        ensure(report.is_valid(), || {
            format!("n = {n}: {} failures", report.failures.len())
        })?;
        ensure(report.vertices_checked == n * (n + 4) / 2, || {
            format!("n = {n}: {} vertices", report.vertices_checked)
        })?;
        // the oracle: every vertex meets n-1 vectors with |det| = 1
        for v in wm.polytope().vertices() {
            let rows: Vec<Vec<i64>> = v
                .facets
                .iter()
                .filter_map(|f| wm.pair().vector(*f))
                .map(|c| ints(c.as_slice()))
                .collect();
            ensure(rows.len() == n - 1, || {
                format!("n = {n}: vertex {} sees {} vectors", v.name, rows.len())
            })?;
            let d = det_oracle(&rows);
            ensure(d.abs() == 1, || {
                format!("n = {n}: vertex {} has det {d}", v.name)
            })?;
        }
        total += report.vertices_checked;
    }
    Ok(format!("{total} vertices unimodular over n = 4..12"))
}

fn c3_summand_dichotomy() -> Outcome {
    let mut checked = 0;
    for n in EVEN_N {
        let eta: Vec<Vec<BigInt>> = eta_standard(n)
            .unwrap()
            .iter()
            .map(|c| c.to_vec())
            .collect();
        let h = n / 2;
        for (lo, hi) in [(0, h), (h, n)] {
            let block: Vec<Vec<BigInt>> = eta[lo..=hi].to_vec();
            let lib = is_direct_summand(&block, n - 1).unwrap();
            let oracle = summand_oracle(&block.iter().map(|v| ints(v)).collect::<Vec<_>>());
            ensure(!lib && !oracle, || {
                format!("n = {n}: block {lo}..={hi} lib {lib} oracle {oracle}")
            })?;
            for drop in lo..=hi {
                let sub: Vec<Vec<BigInt>> = (lo..=hi)
                    .filter(|&i| i != drop)
                    .map(|i| eta[i].clone())
                    .collect();
                let lib = is_direct_summand(&sub, n - 1).unwrap();
                let oracle = summand_oracle(&sub.iter().map(|v| ints(v)).collect::<Vec<_>>());
                ensure(lib && oracle, || {
                    format!("n = {n}: dropping eta_{drop} gives lib {lib} oracle {oracle}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "10 dependent blocks, {checked} single-removal summands"
    ))
}

fn c4_boundary_structure() -> Outcome {
    for n in [4, 6, 8] {
        let wm = w(k_of(n));
        let p = wm.polytope();
        let facets = truncation_facets(n);
        for (i, a) in facets.iter().enumerate() {
            for b in &facets[i + 1..] {
                let shared = p
                    .vertices()
                    .iter()
                    .filter(|v| v.facets.contains(a) && v.facets.contains(b))
                    .count();
                ensure(shared == 0, || {
                    format!("n = {n}: facets {a}, {b} share {shared} vertices")
                })?;
            }
        }
        let comps = boundary_components(&wm).map_err(|e| e.to_string())?;
        let h = n / 2;
        let prism = SimplePolytope::simplex(h - 1)
            .unwrap()
            .product(&SimplePolytope::simplex(h).unwrap())
            .unwrap();
        let simplex = SimplePolytope::simplex(n - 1).unwrap();
        for (name, pair, model) in [
            ("P1", &comps.p1, &prism),
            ("P2", &comps.p2, &prism),
            ("P3", &comps.p3, &simplex),
        ] {
            ensure(
                combinatorially_isomorphic(pair.polytope(), model).is_some(),
                || format!("n = {n}: {name} has wrong type"),
            )?;
        }
        // counts straight from W's incidences
        let counts: Vec<usize> = facets.iter().map(|f| p.facet_vertices(*f).len()).collect();
        ensure(counts == [h * (h + 1), h * (h + 1), n], || {
            format!("n = {n}: boundary vertex counts {counts:?}")
        })?;
    }
    Ok("disjoint; P1, P2 ~ prism, P3 ~ simplex for n = 4, 6, 8".into())
}

fn c5_homology() -> Outcome {
    let r1s = [(1, 5), (1, 6), (1, 8)];
    for n in EVEN_N {
        let mut reference: Option<BTreeMap<usize, usize>> = None;
        for (p, q) in r1s {
            let wm = build_w(k_of(n), &rational_from_i64(p, q)).map_err(|e| e.to_string())?;
            for seed in 0..5 {
                let cs = cell_structure(&wm, seed).map_err(|e| e.to_string())?;
                let by_deg = cs.cells_by_degree(n);
                ensure(cs.zero_cells == 1, || "zero cells".into())?;
                ensure(by_deg.keys().all(|d| d % 2 == 1), || {
                    format!("n = {n}: even degree in {by_deg:?}")
                })?;
                ensure(cs.counts(n)[&n] == 1, || {
                    format!("n = {n}, r1 = {p}/{q}, seed {seed}: |I_n| != 1")
                })?;
                let h = homology_w(&wm, seed).map_err(|e| e.to_string())?;
                ensure(h.top_rank() == 1 && h.rank(0) == 0, || {
                    format!("n = {n}: H table {:?}", h.ranks)
                })?;
                match &reference {
                    None => reference = Some(by_deg),
                    Some(r) => ensure(*r == by_deg, || {
                        format!("n = {n}, r1 = {p}/{q}, seed {seed}: {by_deg:?} != {r:?}")
                    })?,
                }
            }
        }
    }
    Ok("odd cells only, |I_n| = 1, stable over 5 seeds and r1 in {1/5, 1/6, 1/8}".into())
}

fn c6_euler() -> Outcome {
    for n in EVEN_N {
        let wm = w(k_of(n));
        let expected = n * (n + 4) / 4;
        let lib = euler_check(&wm, 0).map_err(|e| e.to_string())?;
        ensure(lib.pass, || format!("n = {n}: {lib:?}"))?;
        // second path: cell total from cell structure, boundary from incidences
        let cells = cell_structure(&wm, 1).map_err(|e| e.to_string())?.total();
        let v: usize = truncation_facets(n)
            .iter()
            .map(|f| wm.polytope().facet_vertices(*f).len())
            .sum();
        ensure(
            v.is_multiple_of(2) && cells == v / 2 && cells == expected,
            || format!("n = {n}: cells {cells}, V/2 = {}", v / 2),
        )?;
        if n == 4 {
            ensure(cells == 8, || "n = 4 total should be 8".into())?;
        }
    }
    Ok("sum |I_j| = V/2 = n(n+4)/4 for n = 4..12".into())
}

fn c7_translation() -> Outcome {
    for n in EVEN_N {
        let comps = boundary_components(&w(k_of(n))).map_err(|e| e.to_string())?;
        let wit = gluing_witness(n).map_err(|e| e.to_string())?;
        let rep = verify_translation(&comps.p1, &comps.p2, &wit).map_err(|e| e.to_string())?;
        ensure(rep.holds(), || format!("n = {n}: {rep:?}"))?;
        let eta = eta_standard(n).unwrap();
        let rho = rho_permutation(n).unwrap();
        let delta = delta_matrix(n).unwrap();
        for (i, e) in eta.iter().enumerate() {
            let img = apply_matrix(&delta, e.as_slice()).unwrap();
            ensure(img == eta[rho.apply(i)].to_vec(), || {
                format!("n = {n}: delta'(eta_{i}) != eta_rho({i})")
            })?;
        }
    }
    let comps = boundary_components(&w(1)).unwrap();
    let id = TranslationWitness::new(
        gluing_witness(4).unwrap().phi().clone(),
        IntMatrix::identity(3),
    )
    .unwrap();
    let rep = verify_translation(&comps.p1, &comps.p2, &id).unwrap();
    ensure(!rep.holds(), || "identity delta accepted for n = 4".into())?;
    Ok("(Phi_rho, delta') glues for n = 4..12; identity rejected at n = 4".into())
}

fn inversion_sign(images: &[usize]) -> i8 {
    let inv = (0..images.len())
        .flat_map(|i| (i + 1..images.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| images[i] > images[j])
        .count();
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn c8_orientation() -> Outcome {
    for n in EVEN_N {
        let rho = rho_permutation(n).unwrap();
        let sign = permutation_sign(&rho);
        let oracle = inversion_sign(rho.images());
        let delta = delta_matrix(n).unwrap();
        let det = det_oracle(&delta.to_rows().iter().map(|r| ints(r)).collect::<Vec<_>>());
        let rec = orientation_signs(n).unwrap();
        let four = n % 4 == 0;
        ensure(sign == oracle && rec.sign_rho == sign, || {
            format!("n = {n}: sign mismatch")
        })?;
        ensure(det.abs() == 1 && rec.det_delta as i128 == det, || {
            format!("n = {n}: det {det}")
        })?;
        ensure((sign == 1) == four, || {
            format!("n = {n}: sign(rho) = {sign}")
        })?;
        ensure((det == -1) == four, || {
            format!("n = {n}: det(delta') = {det}")
        })?;
    }
    Ok("sign(rho) = +1 and det(delta') = -1 exactly when 4 | n".into())
}

fn c9_pipeline() -> Outcome {
    for k in 1..=5 {
        let n = 2 * (k + 1);
        let rep = glue_report(&w(k), 0).map_err(|e| e.to_string())?;
        ensure(rep.pass(), || format!("k = {k}: {:?}", rep.first_failure()))?;
        let want = if n % 4 == 0 {
            BoundaryLabel::ConjugateCp
        } else {
            BoundaryLabel::Cp
        };
        ensure(rep.boundary_label() == want, || {
            format!("k = {k}: label {}", rep.boundary_label())
        })?;
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cobord::run(["cobord", "demo", "--n", "4"], &mut out, &mut err);
    let out = String::from_utf8(out).unwrap();
    ensure(code == 0, || {
        format!("demo exit {code}: {}", String::from_utf8_lossy(&err))
    })?;
    ensure(
        out.contains("boundary conjugate-CP^3") && out.contains("overall: PASS"),
        || "demo verdict missing".into(),
    )?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cobord::run(["cobord", "glue", "--k", "1"], &mut out, &mut err);
    let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    ensure(code == 0 && v["boundary_label"] == "conjugate-CP", || {
        format!("glue --k 1 exit {code}")
    })?;
    Ok("glue passes for k = 1..5; demo verdict conjugate-CP^3".into())
}

fn random_canonical(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..len).map(|_| rng.gen_range(-2..=2)).collect();
        if let Some(first) = v.iter().find(|x| **x != 0) {
            return if *first > 0 {
                v
            } else {
                v.iter().map(|x| -x).collect()
            };
        }
    }
}

/// Some vertex of `pair` has a determinant other than ±1.
fn violates_oracle(pair: &CharPair) -> bool {
    pair.polytope().vertices().iter().any(|v| {
        let rows: Vec<Vec<i64>> = v
            .facets
            .iter()
            .filter_map(|f| pair.vector(*f))
            .map(|c| ints(c.as_slice()))
            .collect();
        det_oracle(&rows).abs() != 1
    })
}

fn c10_mutations_and_snf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut detected, mut tried) = (0, 0);
    while detected < 25 {
        tried += 1;
        ensure(tried < 10_000, || "mutation search did not converge".into())?;
        let n = [4, 6, 8][rng.gen_range(0..3)];
        let mut a = eta_assignment(n).unwrap();
        let facet = FacetId(rng.gen_range(0..=n as u32));
        let original = ints(&a[&facet]);
        let v = random_canonical(&mut rng, n - 1);
        if v == original {
            continue;
        }
        a.insert(facet, v.iter().map(|x| BigInt::from(*x)).collect());
        let wm = WManifold::assemble(k_of(n), &default_r1(), a).unwrap();
        if !violates_oracle(wm.pair()) {
            continue;
        }
        let report = validate(wm.pair());
        ensure(!report.is_valid(), || {
            format!("n = {n}: mutation of facet {facet} to {v:?} undetected")
        })?;
        detected += 1;
    }

    let mut matrices = 0;
    for _ in 0..240 {
        let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let rows: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(-6..=6)).collect())
            .collect();
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let snf = smith_normal_form(&IntMatrix::from_i64_rows(&refs).unwrap());
        let rank = rank_oracle(&rows);
        ensure(snf.len() == rank, || {
            format!("{rows:?}: {} factors, rank {rank}", snf.len())
        })?;
        let mut prod = BigInt::from(1);
        for (i, d) in snf.iter().enumerate() {
            ensure(d.is_positive() && !d.is_zero(), || {
                format!("{rows:?}: factor {d}")
            })?;
            prod *= d;
            let g = minor_gcd(&rows, i + 1);
            ensure(prod == BigInt::from(g), || {
                format!("{rows:?}: d_1..d_{} = {prod}, minor gcd {g}", i + 1)
            })?;
        }
        matrices += 1;
    }
    Ok(format!("{detected} violating mutations detected ({tried} drawn); SNF matches minor gcds on {matrices} matrices"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("eta reproduction", c1_eta_reproduction),
        ("validity", c2_validity),
        ("dependence/summand dichotomy", c3_summand_dichotomy),
        ("boundary structure", c4_boundary_structure),
        ("homology theorem", c5_homology),
        ("euler cross-check", c6_euler),
        ("delta-translation", c7_translation),
        ("orientation parities", c8_orientation),
        ("final theorem pipeline", c9_pipeline),
        ("mutation robustness", c10_mutations_and_snf),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(details) => println!("PASS criterion {:>2} {name}: {details}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
