use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use shyp::coding::{
    coding_map, enumerate_codes, make_code, nested_images, quasigeodesic_check, ray, shyp_certificate, Policy,
};
use shyp::expansion::{build_expansion_datum, limit_net, verify_expansion, ExpansionDatum};
use shyp::geometry::{Point, Shape, Space};
use shyp::groups::{free_reduce, Distance};
use shyp::stability::{
    check_displacement, check_injectivity, conjugacy_map, k_net, perturbation_epsilon, perturbed_datum,
    PerturbedSystem,
};
use shyp::zoo::limit::{random_sample, subsample};
use shyp::zoo::{
    make_covered_cyclic, make_cyclic_hyperbolic, make_free_boundary, make_product, make_schottky, make_zn_projective,
    perturb, symmetric_schottky_generators, ActionSystem, Bump, Perturbation,
};

use crate::config::{ExperimentConfig, PerturbationSpec, SystemSpec};
use crate::error::CliError;
use crate::svg::{circle_plot, Layer};

pub const TIE_BREAK: &str = "largest margin, then smallest region index";

/// One numeric claim with its slack and sample count.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub passed: bool,
    pub slack: f64,
    pub samples: usize,
    pub witness: Option<String>,
}

impl CheckOut {
    fn new(name: &str, slack: f64, samples: usize, witness: Option<String>) -> Self {
        CheckOut { name: name.into(), passed: slack >= 0.0, slack, samples, witness }
    }
}

pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub checks: Vec<CheckOut>,
    pub results: Value,
    pub tables: Vec<Table>,
    pub svg: Option<String>,
}

impl Outcome {
    fn new(checks: Vec<CheckOut>, results: Value) -> Self {
        Outcome { checks, results, tables: Vec::new(), svg: None }
    }
}

pub fn zoo_list() -> Outcome {
    let kinds = json!([
        {"kind": "schottky", "params": {"rank": "free rank (default 2)", "cosh": "cosh of the translation length of each generator (default 1.6)"}},
        {"kind": "cyclic", "params": {"multiplier": "m > 1; the generator is x ↦ m²x in the circle chart (default 2)"}},
        {"kind": "covered", "params": {"multiplier": "base cyclic multiplier (default 2)", "degree": "covering degree k ≥ 2 (default 3)"}},
        {"kind": "free_boundary", "params": {"rank": "k ≥ 2 (default 2)", "a": "visual parameter in (1, 2] (default 2)"}},
        {"kind": "zn", "params": {"diagonals": "one positive diagonal per generator of ℤⁿ acting on projective space (default [[9,1,3],[9,3,1]])"}},
        {"kind": "product", "params": {"first": "multiplier of the first factor", "second": "multiplier of the second factor", "swap": "adjoin the factor swap (default false)"}}
    ]);
    let families = json!([
        {"family": "jitter", "params": {"magnitude": "uniform noise on matrix entries (default 1e-7)", "seed": "rng seed (default 7)"}},
        {"family": "bump", "params": {"center": "angle", "width": "half width", "height": "displacement"}},
        {"family": "translate", "params": {"t": "conjugating translation of the real chart (cyclic only)"}}
    ]);
    Outcome::new(Vec::new(), json!({"systems": kinds, "perturbations": families}))
}

pub fn build_system(spec: &SystemSpec) -> Result<ActionSystem, CliError> {
    Ok(match spec {
        SystemSpec::Schottky { rank, cosh } => make_schottky(&symmetric_schottky_generators(*rank, *cosh))?,
        SystemSpec::Cyclic { multiplier } => make_cyclic_hyperbolic(*multiplier)?,
        SystemSpec::Covered { multiplier, degree } => make_covered_cyclic(&make_cyclic_hyperbolic(*multiplier)?, *degree)?,
        SystemSpec::FreeBoundary { rank, a } => make_free_boundary(*rank, *a)?,
        SystemSpec::Zn { diagonals } => make_zn_projective(diagonals)?,
        SystemSpec::Product { first, second, swap } => {
            make_product(&make_cyclic_hyperbolic(*first)?, &make_cyclic_hyperbolic(*second)?, *swap)?
        }
    })
}

struct Setup {
    system: ActionSystem,
    datum: ExpansionDatum,
    full: Vec<Point>,
    net: Vec<Point>,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    let system = build_system(&cfg.system)?;
    let datum = build_expansion_datum(&system, cfg.lambda())?;
    let full = limit_net(&system);
    let net = if full.len() <= cfg.net.points { full.clone() } else { random_sample(&full, cfg.net.points, cfg.net.seed) };
    Ok(Setup { system, datum, full, net })
}

fn circle_angle(space: &Space, p: &Point) -> Option<f64> {
    match space {
        Space::Circle | Space::CoveredCircle { .. } => p.as_angle(),
        _ => None,
    }
}

fn is_circle(space: &Space) -> bool {
    matches!(space, Space::Circle | Space::CoveredCircle { .. })
}

fn angles(space: &Space, pts: &[Point]) -> Vec<f64> {
    pts.iter().filter_map(|p| circle_angle(space, p)).collect()
}

fn describe(shape: &Shape) -> String {
    match shape {
        Shape::Empty => "empty".into(),
        Shape::Whole => "whole".into(),
        Shape::Arc { start, len } => format!("arc start={start:.9} len={len:.9}"),
        Shape::Cylinder { prefix, a } => {
            format!("cylinder prefix={} a={a}", prefix.iter().map(|l| l.to_char()).collect::<String>())
        }
        Shape::Ball { center, radius } => format!("ball center={} r={radius:.9}", center.label()),
        Shape::Near { points, radius } => format!("near {} points r={radius:.9}", points.len()),
        Shape::Within { part, inner } => format!("part {part}: {}", describe(inner)),
        Shape::Meet(v) => format!("meet({})", v.iter().map(describe).collect::<Vec<_>>().join("; ")),
    }
}

fn datum_json(s: &Setup) -> Value {
    let d = &s.datum;
    json!({
        "regions": d.len(),
        "letters": d.letters.iter().map(|l| l.to_char().to_string()).collect::<Vec<_>>(),
        "delta": d.delta,
        "lipschitz": d.lipschitz,
        "lambda": d.lambda,
        "lebesgue": d.lebesgue,
        "net_points": s.net.len(),
        "full_net_points": s.full.len(),
    })
}

fn region_arcs(shape: &Shape, out: &mut Vec<(f64, f64)>) {
    match shape {
        Shape::Arc { start, len } => out.push((*start, *len)),
        Shape::Within { inner, .. } => region_arcs(inner, out),
        Shape::Meet(v) => v.iter().for_each(|s| region_arcs(s, out)),
        _ => {}
    }
}

pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let report = verify_expansion(&s.system, &s.datum, &s.net);
    let checks = report
        .checks
        .iter()
        .map(|c| CheckOut { name: c.name.clone(), passed: c.passed, slack: c.slack, samples: c.samples, witness: c.witness.clone() })
        .collect();
    let notes: BTreeMap<String, String> =
        report.checks.iter().filter_map(|c| c.note.clone().map(|n| (c.name.clone(), n))).collect();
    let mut out = Outcome::new(
        checks,
        json!({"datum": datum_json(&s), "min_expansion": report.min_expansion, "notes": notes}),
    );
    let rows = s
        .datum
        .regions
        .iter()
        .enumerate()
        .map(|(a, r)| vec![a.to_string(), s.datum.letters[a].to_char().to_string(), describe(&r.shape)])
        .collect();
    out.tables.push(Table { name: "regions".into(), header: vec!["alpha", "letter", "shape"], rows });
    if is_circle(&s.system.space) {
        let mut arcs = Vec::new();
        s.datum.regions.iter().for_each(|r| region_arcs(&r.shape, &mut arcs));
        out.svg = Some(circle_plot(
            "limit net and cover",
            &[
                Layer::Arcs { arcs, radius: 165.0, color: "steelblue" },
                Layer::Points { angles: angles(&s.system.space, &s.net), radius: 150.0, color: "black" },
            ],
        ));
    }
    Ok(out)
}

pub fn codes(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let (sys, d) = (&s.system, &s.datum);
    let pts = subsample(&s.net, cfg.codes.points);
    let depth = cfg.codes.depth;
    let mut nest = CheckOut::new("nested", f64::INFINITY, 0, None);
    let mut shrink = CheckOut::new("shrinking", f64::INFINITY, 0, None);
    let mut qg = CheckOut::new("quasigeodesic", f64::INFINITY, 0, None);
    let mut rows = Vec::new();
    let mut steps = Vec::new();
    let mut truncated = 0;
    let mut first_steps = Vec::new();
    for (k, x) in pts.iter().enumerate() {
        let greedy = make_code(sys, d, d.delta, x, Policy::Special, depth)?;
        for st in nested_images(sys, d, &greedy, d.delta) {
            nest.samples += 1;
            shrink.samples += 1;
            if st.nest_slack < nest.slack {
                nest.slack = st.nest_slack;
                nest.witness = Some(format!("{} step {}", x.label(), st.index));
            }
            let room = st.bound - st.diameter;
            if room < shrink.slack {
                shrink.slack = room;
                shrink.witness = Some(format!("{} step {}", x.label(), st.index));
            }
            if k == 0 {
                first_steps.push(st.diameter);
            }
            steps.push(vec![
                x.label(),
                st.index.to_string(),
                st.diameter.to_string(),
                st.bound.to_string(),
                st.nest_slack.to_string(),
                st.center_error.to_string(),
            ]);
        }
        let set = enumerate_codes(sys, d, d.delta, x, depth, cfg.codes.cap)?;
        truncated += usize::from(set.truncated);
        for (j, c) in set.codes.iter().enumerate() {
            let r = ray(&sys.alphabet, d, c)?;
            let q = quasigeodesic_check(&sys.alphabet, d, &r, 2 * depth)?;
            qg.samples += q.pairs;
            let slack = if q.unknown > 0 { f64::NEG_INFINITY } else { q.worst_slack };
            if slack < qg.slack {
                qg.slack = slack;
                qg.witness = q.witness.map(|(n, i, j2)| format!("{} ray {j} pair ({i}, {j2}) distance {n}", x.label()));
            }
            rows.push(vec![
                x.label(),
                j.to_string(),
                c.special.to_string(),
                c.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
                r.last().map(|w| sys.alphabet.format(w)).unwrap_or_default(),
            ]);
        }
    }
    for c in [&mut nest, &mut shrink, &mut qg] {
        c.passed = c.slack >= -cfg.tolerances.tol;
    }
    let mut out = Outcome::new(
        vec![nest, shrink, qg],
        json!({
            "datum": datum_json(&s),
            "points": pts.len(),
            "depth": depth,
            "cap": cfg.codes.cap,
            "codes": rows.len(),
            "truncated_points": truncated,
        }),
    );
    out.tables.push(Table { name: "codes".into(), header: vec!["point", "code", "special", "alpha", "ray_word"], rows });
    out.tables.push(Table {
        name: "nested".into(),
        header: vec!["point", "step", "diameter", "bound", "nest_slack", "center_error"],
        rows: steps,
    });
    if let (Some(x), true) = (pts.first(), is_circle(&sys.space)) {
        let t = circle_angle(&sys.space, x).unwrap_or(0.0);
        let layers: Vec<Layer> = first_steps
            .iter()
            .enumerate()
            .map(|(i, diam)| Layer::Arcs { arcs: vec![(t - diam / 2.0, *diam)], radius: 160.0 + 4.0 * i as f64, color: "darkorange" })
            .chain([Layer::Points { angles: angles(&sys.space, &s.net), radius: 150.0, color: "black" }])
            .collect();
        out.svg = Some(circle_plot("nested images at the first point", &layers));
    }
    Ok(out)
}

fn distance_json(d: &Distance) -> Value {
    match d {
        Distance::Exact(n) => json!(n),
        Distance::Unknown { cap } => json!({"unknown_beyond": cap}),
    }
}

pub fn certify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let c = &cfg.certificate;
    let pts = subsample(&s.full, c.points);
    let cert = shyp_certificate(&s.system, &s.datum, &pts, c.depth, cfg.codes.cap, c.n_max)?;
    let worst = cert.points.iter().find(|p| matches!(p.fellow, Distance::Exact(n) if Some(n) == cert.n));
    let fellow = CheckOut {
        name: "fellow_travel".into(),
        passed: cert.fellow_ok,
        slack: cert.n.map_or(f64::NEG_INFINITY, |n| c.n_max as f64 - n as f64),
        samples: cert.points.iter().map(|p| p.rays * p.rays.saturating_sub(1) / 2).sum(),
        witness: worst.and_then(|p| p.worst_pair.as_ref().map(|(a, b)| format!("{}: {a} / {b}", p.point))),
    };
    let chain = CheckOut {
        name: "n_equivalence".into(),
        passed: cert.equivalence_ok,
        slack: cert.max_chain.map_or(f64::NEG_INFINITY, |k| shyp::tol::MAX_CHAIN as f64 - k as f64),
        samples: cert.points.len(),
        witness: cert.points.iter().find(|p| p.chain.is_none()).map(|p| p.point.clone()),
    };
    let verdict = match (cert.fellow_ok, cert.equivalence_ok) {
        (true, _) => "S-hyperbolic (fellow travel)",
        (false, true) => "meandering (chain equivalence only)",
        (false, false) => "not certified",
    };
    let rows = cert
        .points
        .iter()
        .map(|p| {
            vec![
                p.point.clone(),
                p.rays.to_string(),
                p.truncated.to_string(),
                match p.fellow {
                    Distance::Exact(n) => n.to_string(),
                    Distance::Unknown { cap } => format!(">{cap}"),
                },
                p.chain.map_or("none".into(), |k| k.to_string()),
            ]
        })
        .collect();
    let passed = cert.fellow_ok || cert.equivalence_ok;
    let mut checks = vec![fellow, chain];
    if passed {
        // one verdict suffices
        checks.iter_mut().for_each(|c| c.passed = true);
    }
    let mut out = Outcome::new(
        checks,
        json!({
            "datum": datum_json(&s),
            "N": cert.n,
            "n_max": cert.n_max,
            "max_chain": cert.max_chain,
            "fellow_ok": cert.fellow_ok,
            "equivalence_ok": cert.equivalence_ok,
            "verdict": verdict,
            "truncated": cert.truncated,
            "depth": cert.depth,
            "cap": cert.cap,
            "points": cert.points.len(),
            "worst_fellow": worst.map(|p| distance_json(&p.fellow)),
        }),
    );
    out.tables.push(Table { name: "certificate".into(), header: vec!["point", "rays", "truncated", "fellow", "chain"], rows });
    Ok(out)
}

pub fn coding(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let (sys, d) = (&s.system, &s.datum);
    let depth = cfg.tolerances.prefix_depth;
    let mut images: Vec<(String, String, bool)> = Vec::new();
    let mut equi = CheckOut::new("equivariance", 0.0, 0, None);
    for x in &s.net {
        let w = match coding_map(sys, d, x, depth) {
            Ok(w) => w,
            Err(e @ shyp::Error::NotHyperbolic) => {
                let check = CheckOut { name: "hyperbolic".into(), passed: false, slack: -1.0, samples: 1, witness: Some(e.to_string()) };
                return Ok(Outcome::new(vec![check], json!({"datum": datum_json(&s)})));
            }
            Err(e) => return Err(e.into()),
        };
        for l in sys.letters() {
            let v = coding_map(sys, d, &sys.apply_letter(l, x), depth)?;
            let mut want = vec![l];
            want.extend_from_slice(&w.prefix);
            let want = free_reduce(&want);
            let k = want.len().min(v.prefix.len()).min(depth.saturating_sub(1));
            equi.samples += 1;
            if v.prefix[..k] != want[..k] && equi.passed {
                equi.passed = false;
                equi.slack = -1.0;
                equi.witness = Some(format!("{} under {}", x.label(), l.to_char()));
            }
        }
        images.push((x.label(), w.to_string_letters(), w.stabilized));
    }
    let mut fibres: BTreeMap<&str, usize> = BTreeMap::new();
    images.iter().for_each(|(_, w, _)| *fibres.entry(w.as_str()).or_default() += 1);
    let sizes: BTreeMap<usize, usize> = fibres.values().fold(BTreeMap::new(), |mut m, n| {
        *m.entry(*n).or_default() += 1;
        m
    });
    let results = json!({
        "datum": datum_json(&s),
        "prefix_depth": depth,
        "points": images.len(),
        "distinct_images": fibres.len(),
        "injective": fibres.len() == images.len(),
        "fibre_sizes": sizes,
        "stabilized": images.iter().filter(|i| i.2).count(),
    });
    let rows = images.into_iter().map(|(x, w, st)| vec![x, w, st.to_string()]).collect();
    let mut out = Outcome::new(vec![equi], results);
    out.tables.push(Table { name: "coding".into(), header: vec!["point", "image", "stabilized"], rows });
    Ok(out)
}

fn family(spec: &PerturbationSpec) -> Result<Perturbation, CliError> {
    Ok(match spec {
        PerturbationSpec::Jitter { magnitude, seed } => Perturbation::MatrixJitter { magnitude: *magnitude, seed: *seed },
        PerturbationSpec::Bump { center, width, height } => Perturbation::BumpCompose(vec![Bump::new(*center, *width, *height)?]),
        PerturbationSpec::Translate { t } => Perturbation::Translate(*t),
    })
}

pub fn stability(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let (sys, d) = (&s.system, &s.datum);
    let t = &cfg.tolerances;
    let c = &cfg.certificate;
    let cert = shyp_certificate(sys, d, &subsample(&s.full, c.points), c.depth, cfg.codes.cap, c.n_max)?;
    let n = cert.n.unwrap_or(c.n_max);
    let knet = k_net(&sys.space, d, &s.full, t.k_net);
    let perturbed = perturb(sys, &family(&cfg.perturbation)?)?;
    let ps = PerturbedSystem::new(sys, perturbed, d, n, knet)?;
    let samples = ps.k_net.len() * ps.realized.len();
    let realized = ps.max_realized();
    let mut admissible = CheckOut::new("admissible", ps.epsilon - realized, samples, None);
    let mut base = json!({
        "datum": datum_json(&s),
        "N": n,
        "epsilon": ps.epsilon,
        "epsilon_formula": perturbation_epsilon(d, n),
        "realized": ps.realized,
        "inverse_defect": ps.inverse_defect,
    });
    if let Err(e) = ps.admissible() {
        admissible.passed = false;
        admissible.witness = Some(e.to_string());
        return Ok(Outcome::new(vec![admissible], base));
    }
    let table = conjugacy_map(&ps, d, &s.net, t.tol, t.max_depth)?;
    let entries = table.entries.len();
    let converge = CheckOut {
        name: "convergence".into(),
        passed: table.complete() && table.max_diameter() < t.tol,
        slack: if table.complete() { t.tol - table.max_diameter() } else { f64::NEG_INFINITY },
        samples: s.net.len(),
        witness: table.failures.first().map(|(i, e)| format!("{}: {e}", s.net[*i].label())),
    };
    let residual = CheckOut::new("equivariance", t.residual - table.max_residual(), entries * table.residuals.len(), None);
    let disp = check_displacement(&table, d);
    let worst = table
        .entries
        .iter()
        .max_by(|a, b| sys.space.dist(&a.x, &a.phi).total_cmp(&sys.space.dist(&b.x, &b.phi)))
        .map(|e| e.x.label());
    let below_eps = CheckOut::new("displacement_epsilon", disp.epsilon - disp.max, entries, worst.clone());
    let below_fifth = CheckOut::new("displacement_fifth_delta", disp.fifth - disp.max, entries, worst);
    let inj = check_injectivity(&table, sys, d, 1e-7);
    let injective = CheckOut {
        name: "injectivity".into(),
        passed: inj.passed,
        slack: inj.min_gap - 2.0 * table.tol,
        samples: inj.pairs,
        witness: inj.worst.map(|(i, j)| format!("{} / {}", table.entries[i].x.label(), table.entries[j].x.label())),
    };
    let mut checks = vec![admissible, converge, residual, below_eps, below_fifth, injective];
    let pd = perturbed_datum(d, &ps, &table, d.delta / 5.0)?;
    let report = verify_expansion(&ps.perturbed, &pd, &table.image());
    for ch in &report.checks {
        checks.push(CheckOut {
            name: format!("perturbed_{}", ch.name),
            passed: ch.passed,
            slack: ch.slack,
            samples: ch.samples,
            witness: ch.witness.clone(),
        });
    }
    if let Value::Object(m) = &mut base {
        m.insert("displacement".into(), json!(disp.max));
        m.insert("delta_fifth".into(), json!(disp.fifth));
        m.insert("max_residual".into(), json!(table.max_residual()));
        m.insert("residuals".into(), json!(table.residuals));
        m.insert("max_diameter".into(), json!(table.max_diameter()));
        m.insert("injectivity_min_gap".into(), json!(inj.min_gap));
        m.insert(
            "perturbed_datum".into(),
            json!({"lambda": pd.lambda, "lipschitz": pd.lipschitz, "delta": pd.delta, "min_expansion": report.min_expansion}),
        );
    }
    let rows = table
        .entries
        .iter()
        .map(|e| {
            vec![
                e.x.label(),
                e.phi.label(),
                e.iterations.to_string(),
                e.diameter.to_string(),
                e.increment.to_string(),
                e.rate_slack.to_string(),
            ]
        })
        .collect();
    let mut out = Outcome::new(checks, base);
    out.tables.push(Table {
        name: "conjugacy".into(),
        header: vec!["x", "phi", "iterations", "diameter", "increment", "rate_slack"],
        rows,
    });
    if is_circle(&sys.space) {
        out.svg = Some(circle_plot(
            "limit net and its image under phi",
            &[
                Layer::Points { angles: angles(&sys.space, &s.net), radius: 150.0, color: "black" },
                Layer::Points { angles: angles(&sys.space, &table.image()), radius: 160.0, color: "crimson" },
            ],
        ));
    }
    Ok(out)
}
