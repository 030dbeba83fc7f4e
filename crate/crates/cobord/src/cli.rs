//! Command dispatch. Exit codes: 0 when every check passes, 1 when a
//! mathematical check fails, 2 for bad arguments, input, or IO.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cobord_core::charfn::{
    delta_matrix, eta_standard, orientation_signs, rho_permutation, validate, CharPair, CharVector,
};
use cobord_core::cobordism::{
    boundary_components, build_w, cell_counts_agree, cell_structure, glue_report, gluing_witness,
    homology_from_cells, summarize_components, CobordismError, WManifold,
};
use cobord_core::zlinalg::apply_matrix;
use cobord_core::BigRational;
use serde_json::{json, Map, Value};

use crate::json::{self, FormatError};
use crate::text;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cobord",
    version,
    about = "Oriented manifolds bounded by CP^(2k+1), checked exactly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build W and write it as JSON.
    Construct(Common),
    /// Check the characteristic condition at every vertex.
    Validate(Common),
    /// List the boundary components P1, P2, P3.
    Boundary(Common),
    /// Cell counts and homology of (W, dW).
    Homology {
        #[command(flatten)]
        common: Common,
        /// Rerun cell counting under this many functionals and require agreement.
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Full gluing certificate.
    Glue {
        #[command(flatten)]
        common: Common,
        /// Inclusive range of k, as `a..b`.
        #[arg(long, conflicts_with_all = ["k", "n", "input"])]
        k_range: Option<String>,
    },
    /// Worked example end to end (defaults to n = 4).
    Demo(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, conflicts_with = "n")]
    k: Option<usize>,
    /// Even dimension n = 2(k+1) >= 4.
    #[arg(long)]
    n: Option<usize>,
    /// Cut parameter in (0, 1/4), written p/q.
    #[arg(long, default_value = "1/5")]
    r1: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read W (or, for validate, any characteristic pair) from a JSON file.
    #[arg(long, conflicts_with_all = ["k", "n"])]
    input: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug)]
enum Failure {
    Input(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CobordismError> for Failure {
    fn from(e: CobordismError) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Outcome {
    pass: bool,
    json: Value,
    text: String,
}

fn k_of(common: &Common, default_k: usize) -> Result<usize, Failure> {
    match (common.k, common.n) {
        (Some(k), _) => Ok(k),
        (None, Some(n)) if n >= 4 && n % 2 == 0 => Ok(n / 2 - 1),
        (None, Some(n)) => Err(Failure::Input(format!(
            "n must be even and at least 4, got {n}"
        ))),
        (None, None) => Ok(default_k),
    }
}

fn r1_of(common: &Common) -> Result<BigRational, Failure> {
    Ok(json::parse_rational(&common.r1)?)
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let data = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&data)
        .map_err(|e| Failure::Input(format!("{}: malformed JSON: {e}", path.display())))
}

fn load_w(common: &Common, default_k: usize) -> Result<WManifold, Failure> {
    match &common.input {
        Some(path) => Ok(json::w_from_json(&read_json(path)?)?),
        None => {
            let k = k_of(common, default_k)?;
            let r1 = r1_of(common)?;
            // an invalid standard η is reported by the checks, not rejected here
            Ok(WManifold::assemble(
                k,
                &r1,
                cobord_core::charfn::eta_assignment(2 * (k + 1)).map_err(CobordismError::from)?,
            )?)
        }
    }
}

fn construct(common: &Common) -> Result<Outcome, Failure> {
    if common.input.is_some() {
        return Err(Failure::Input(
            "construct takes --k or --n, not --input".into(),
        ));
    }
    let w = load_w(common, 1)?;
    Ok(Outcome {
        pass: validate(w.pair()).is_valid(),
        json: json::w_to_json(&w),
        text: text::w_text(&w),
    })
}

fn validate_cmd(common: &Common) -> Result<Outcome, Failure> {
    let pair: CharPair = match &common.input {
        Some(path) => {
            let v = read_json(path)?;
            if v.get("pair").is_some() {
                json::w_from_json(&v)?.pair().clone()
            } else {
                json::pair_from_json(&v)?
            }
        }
        None => load_w(common, 1)?.pair().clone(),
    };
    let report = validate(&pair);
    Ok(Outcome {
        pass: report.is_valid(),
        json: json::validation_to_json(&report),
        text: text::validation_text(&report),
    })
}

fn boundary_cmd(common: &Common) -> Result<Outcome, Failure> {
    let w = load_w(common, 1)?;
    let comps = match boundary_components(&w) {
        Ok(c) => c,
        Err(e @ CobordismError::BoundaryNotDisjoint(..)) => {
            return Ok(Outcome {
                pass: false,
                json: json!({ "n": w.n(), "k": w.k(), "disjoint": false, "error": e.to_string() }),
                text: format!("boundary: FAIL {e}\n"),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let summaries = summarize_components(&w, &comps, common.seed)?;
    let mut list = Vec::new();
    for (s, pair) in summaries.iter().zip(comps.as_array()) {
        let mut v = json::component_to_json(s);
        v["vectors"] = json::pair_to_json(pair)["vectors"].clone();
        list.push(v);
    }
    let mut t = format!(
        "boundary of W, n = {}, k = {}: P1, P2, P3 pairwise disjoint\n",
        w.n(),
        w.k()
    );
    t.push_str(&text::components_text(&summaries));
    Ok(Outcome {
        pass: summaries.iter().all(|s| s.has_kind && s.valid),
        json: json!({ "n": w.n(), "k": w.k(), "seed": common.seed, "disjoint": true, "components": list }),
        text: t,
    })
}

fn homology_cmd(common: &Common, seeds: Option<u64>) -> Result<Outcome, Failure> {
    let w = load_w(common, 1)?;
    let n = w.n();
    let cs = match cell_structure(&w, common.seed) {
        Ok(cs) => cs,
        Err(e @ CobordismError::OriginalEdgeCount { .. }) => {
            return Ok(Outcome {
                pass: false,
                json: json!({ "n": n, "k": w.k(), "error": e.to_string() }),
                text: format!("homology: FAIL {e}\n"),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let h = homology_from_cells(n, &cs.cells_by_degree(n))?;
    let agree = match seeds {
        Some(count) => {
            let list: Vec<u64> = (0..count).map(|i| common.seed + i).collect();
            Some(cell_counts_agree(&w, &list)?)
        }
        None => None,
    };
    let mut j = json::cells_to_json(&cs, n);
    j["n"] = json!(n);
    j["k"] = json!(w.k());
    j["seed"] = json!(common.seed);
    j["homology"] = json::homology_to_json(&h);
    j["paper_H0_discrepancy"] = json!(h.paper_h0_discrepancy);
    if let (Some(c), Some(a)) = (seeds, agree) {
        j["seeds"] = json!(c);
        j["seeds_agree"] = json!(a);
    }
    let mut t = format!(
        "homology of (W, dW), n = {n}, k = {}, seed = {}\n",
        w.k(),
        common.seed
    );
    t.push_str(&text::homology_text(&h, &cs));
    if let (Some(c), Some(a)) = (seeds, agree) {
        let _ = writeln!(t, "cell counts agree across {c} seeds: {a}");
    }
    Ok(Outcome {
        pass: h.top_rank() == 1 && agree.unwrap_or(true),
        json: reorder(j, &["n", "k", "seed"]),
        text: t,
    })
}

fn reorder(v: Value, first: &[&str]) -> Value {
    let Value::Object(mut m) = v else { return v };
    let mut out = Map::new();
    for key in first {
        if let Some(x) = m.remove(*key) {
            out.insert((*key).into(), x);
        }
    }
    out.extend(m);
    Value::Object(out)
}

fn parse_range(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("--k-range must look like 1..5, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn glue_cmd(common: &Common, range: Option<&str>) -> Result<Outcome, Failure> {
    let ws: Vec<WManifold> = match range {
        None => vec![load_w(common, 1)?],
        Some(r) => {
            let (a, b) = parse_range(r)?;
            let r1 = r1_of(common)?;
            (a..=b)
                .map(|k| {
                    let eta = cobord_core::charfn::eta_assignment(2 * (k + 1))
                        .map_err(CobordismError::from);
                    eta.and_then(|e| WManifold::assemble(k, &r1, e))
                        .map_err(Failure::from)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut reports = Vec::new();
    for w in &ws {
        reports.push(glue_report(w, common.seed)?);
    }
    let pass = reports.iter().all(|r| r.pass());
    let text = reports
        .iter()
        .map(text::report_text)
        .collect::<Vec<_>>()
        .join("\n");
    let json = if range.is_some() {
        Value::Array(reports.iter().map(json::report_to_json).collect())
    } else {
        json::report_to_json(&reports[0])
    };
    Ok(Outcome { pass, json, text })
}

fn demo_cmd(common: &Common) -> Result<Outcome, Failure> {
    if common.input.is_some() {
        return Err(Failure::Input("demo takes --k or --n, not --input".into()));
    }
    let k = k_of(common, 1)?;
    let r1 = r1_of(common)?;
    let w = build_w(k, &r1)?;
    let n = w.n();
    let eta = eta_standard(n).map_err(CobordismError::from)?;
    let rho = rho_permutation(n).map_err(CobordismError::from)?;
    let delta = delta_matrix(n).map_err(CobordismError::from)?;
    let orientation = orientation_signs(n).map_err(CobordismError::from)?;
    let witness = gluing_witness(n)?;
    let comps = boundary_components(&w)?;
    let report = glue_report(&w, common.seed)?;

    let mut t = format!(
        "worked example: n = {n}, k = {k}, r1 = {}\n\n",
        json::rational_to_string(&r1)
    );
    let mut eta_json = Vec::new();
    t.push_str("characteristic vectors\n  j  eta_j        facet\n");
    for (j, e) in eta.iter().enumerate() {
        let _ = writeln!(t, "  {j:<2} {:<12} D{}", e.to_string(), n - j);
        eta_json.push(json!({ "j": j, "eta": e.to_string(), "facet": format!("D{}", n - j) }));
    }

    let mut restrictions = Map::new();
    for (name, pair) in ["P1", "P2", "P3"].into_iter().zip(comps.as_array()) {
        let _ = writeln!(t, "\nrestriction to {name}");
        t.push_str(&text::vectors_table(pair));
        restrictions.insert(name.into(), json::pair_to_json(pair)["vectors"].clone());
    }

    t.push_str("\ndelta'\n");
    t.push_str(&text::matrix(&delta));
    t.push_str("\naction of delta'\n  i  eta_i        delta'(eta_i)  rho(i)  eta_rho(i)   ok\n");
    let mut action = Vec::new();
    let mut action_ok = true;
    for (i, e) in eta.iter().enumerate() {
        let img = apply_matrix(&delta, e.as_slice())
            .ok()
            .and_then(|v| CharVector::new(v).ok())
            .map(|c| c.to_string())
            .unwrap_or_default();
        let target = eta[rho.apply(i)].to_string();
        let ok = img == target;
        action_ok &= ok;
        let _ = writeln!(
            t,
            "  {i:<2} {:<12} {:<14} {:<7} {:<12} {ok}",
            e.to_string(),
            img,
            rho.apply(i),
            target
        );
        action.push(json!({ "i": i, "eta": e.to_string(), "image": img, "rho": rho.apply(i), "target": target, "ok": ok }));
    }

    t.push_str("\nfacet map P1 -> P2\n");
    let mut phi = Map::new();
    for (a, b) in witness.phi() {
        let _ = writeln!(t, "  D{a} -> D{b}");
        phi.insert(a.to_string(), json!(b.to_string()));
    }

    let verdict = format!("{}^{}", orientation.boundary_label, n - 1);
    let _ = writeln!(t, "\n{}", orientation.describe());
    t.push_str(&text::report_text(&report));
    let _ = writeln!(
        t,
        "verdict: W is an oriented manifold with boundary {verdict}"
    );

    let json = json!({
        "n": n,
        "k": k,
        "eta": eta_json,
        "restrictions": restrictions,
        "delta": json::witness_to_json(&witness)["delta"].clone(),
        "action": action,
        "phi": phi,
        "report": json::report_to_json(&report),
        "verdict": verdict,
    });
    Ok(Outcome {
        pass: report.pass() && action_ok,
        json,
        text: t,
    })
}

fn dispatch(cmd: &Command) -> Result<(Outcome, &Common, Format), Failure> {
    let (outcome, common, default) = match cmd {
        Command::Construct(c) => (construct(c)?, c, Format::Json),
        Command::Validate(c) => (validate_cmd(c)?, c, Format::Json),
        Command::Boundary(c) => (boundary_cmd(c)?, c, Format::Json),
        Command::Homology { common, seeds } => {
            (homology_cmd(common, *seeds)?, common, Format::Json)
        }
        Command::Glue { common, k_range } => {
            (glue_cmd(common, k_range.as_deref())?, common, Format::Json)
        }
        Command::Demo(c) => (demo_cmd(c)?, c, Format::Text),
    };
    Ok((outcome, common, common.format.unwrap_or(default)))
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return EXIT_PASS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("error: bad arguments");
            let _ = writeln!(err, "{line}");
            return EXIT_BAD_INPUT;
        }
    };
    let (outcome, common, format) = match dispatch(&cli.command) {
        Ok(x) => x,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {}", msg.lines().next().unwrap_or_default());
            return EXIT_BAD_INPUT;
        }
    };
    let body = match format {
        Format::Json => json::to_pretty(&outcome.json),
        Format::Text => outcome.text,
    };
    let written = match &common.output {
        Some(path) => std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_BAD_INPUT;
    }
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
