//! Scenario documents and their dispatch to library operations.
//!
//! A scenario is a JSON object:
//!
//! ```text
//! { "spec": { "nvars": 3, "base": ["t1"], "labels": [...] },
//!   "task": "rank",
//!   "seed": 1,
//!   "inputs": { ... task specific ... } }
//! ```
//!
//! The report echoes `task`, `seed`, `spec` and `inputs` and adds `result`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use fieldgeom::configurations::{
    j_map, j_membership_of, mult_construct, psi_check, Outcome, PsiInstance, PsiOptions,
};
use fieldgeom::gen::seeded;
use fieldgeom::geometry::{point_of, Tower};
use fieldgeom::logic::{
    default_pool, eval_sentence, parse_sentence, union_witness, random_normal_form, tower_harness,
    Assignment, GenShape, Sentence,
};
use fieldgeom::planes::{
    collinear, collinear_proj, coordinatization_check, desargues_check, desargues_in_plane, plane_point, random_desargues,
    DesarguesConfig, PlaneAnchor, PlaneMode,
};
use fieldgeom::pregeometry::{basis_indices, in_closure, trdeg, ExtensionSpec};
use fieldgeom::reconstruction::{recover_field_map, GeometryMap, SubstitutionMap};
use fieldgeom::{Error, QFunc, QProjPoint};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::CliError;

pub const TASKS: [&str; 8] = [
    "rank",
    "closure",
    "plane",
    "desargues",
    "config",
    "reconstruct",
    "logic",
    "selftest",
];

#[derive(Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub nvars: usize,
    #[serde(default)]
    pub base: Vec<String>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl SpecDoc {
    pub fn build(&self) -> Result<ExtensionSpec, CliError> {
        let labels = self
            .labels
            .clone()
            .unwrap_or_else(|| (1..=self.nvars).map(|i| format!("t{i}")).collect());
        let mut base = BTreeSet::new();
        for b in &self.base {
            let v = labels
                .iter()
                .position(|l| l == b)
                .ok_or_else(|| CliError::parse(format!("unknown base variable `{b}`")))?;
            base.insert(v);
        }
        ExtensionSpec::with_labels(self.nvars, base, labels).map_err(CliError::from)
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub spec: Option<Value>,
    pub task: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub inputs: Value,
}

fn inputs<T: DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| CliError::parse(format!("bad inputs: {e}")))
}

fn elem(spec: &ExtensionSpec, src: &str) -> Result<QFunc, CliError> {
    spec.parse(src).map_err(CliError::from)
}

fn elems(spec: &ExtensionSpec, srcs: &[String]) -> Result<Vec<QFunc>, CliError> {
    srcs.iter().map(|s| elem(spec, s)).collect()
}

fn proj(v: [i64; 3]) -> Result<QProjPoint, CliError> {
    QProjPoint::from_ints(v).map_err(CliError::from)
}

fn show_proj(p: &QProjPoint) -> Value {
    json!(p.normalized().coords().iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

/// Runs one task against `spec` and returns its `result` object.
pub fn run_task(task: &str, spec: Option<ExtensionSpec>, inputs_v: &Value, seed: u64) -> Result<Value, CliError> {
    let need = || spec.clone().ok_or_else(|| CliError::parse(format!("task `{task}` needs a spec")));
    match task {
        "rank" => rank(&need()?, inputs(inputs_v)?),
        "closure" => closure(&need()?, inputs(inputs_v)?),
        "plane" => plane(need()?, inputs(inputs_v)?),
        "desargues" => desargues(spec, inputs(inputs_v)?, seed),
        "config" => config(need()?, inputs(inputs_v)?, seed),
        "reconstruct" => reconstruct(need()?, inputs(inputs_v)?),
        "logic" => logic(need()?, inputs(inputs_v)?, seed),
        other => Err(CliError::parse(format!("unknown task `{other}`"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RankIn {
    elems: Vec<String>,
}

fn rank(spec: &ExtensionSpec, inp: RankIn) -> Result<Value, CliError> {
    let xs = elems(spec, &inp.elems)?;
    let basis = basis_indices(spec, &xs);
    Ok(json!({
        "rank": trdeg(spec, &xs),
        "basis": basis.iter().map(|&i| spec.show(&xs[i])).collect::<Vec<_>>(),
        "basis_indices": basis,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureIn {
    elem: String,
    over: Vec<String>,
}

fn closure(spec: &ExtensionSpec, inp: ClosureIn) -> Result<Value, CliError> {
    let y = elem(spec, &inp.elem)?;
    let xs = elems(spec, &inp.over)?;
    Ok(json!({ "in_closure": in_closure(spec, &y, &xs) }))
}

fn mode_of(s: &str) -> Result<PlaneMode, CliError> {
    match s {
        "additive" => Ok(PlaneMode::Additive),
        "multiplicative" => Ok(PlaneMode::Multiplicative),
        other => Err(CliError::parse(format!("unknown plane mode `{other}`"))),
    }
}

fn default_mode() -> String {
    "additive".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneIn {
    anchor: [String; 3],
    #[serde(default = "default_mode")]
    mode: String,
    triples: [[i64; 3]; 3],
}

fn anchor_of(spec: &Arc<ExtensionSpec>, src: &[String; 3], mode: &str) -> Result<PlaneAnchor, CliError> {
    let [x, y, z] = [elem(spec, &src[0])?, elem(spec, &src[1])?, elem(spec, &src[2])?];
    PlaneAnchor::new(spec, x, y, z, mode_of(mode)?).map_err(CliError::from)
}

fn plane(spec: ExtensionSpec, inp: PlaneIn) -> Result<Value, CliError> {
    let spec = Arc::new(spec);
    let anchor = anchor_of(&spec, &inp.anchor, &inp.mode)?;
    let vs = [proj(inp.triples[0])?, proj(inp.triples[1])?, proj(inp.triples[2])?];
    let points = vs
        .iter()
        .map(|v| plane_point(&anchor, v))
        .collect::<fieldgeom::Result<Vec<_>>>()?;
    Ok(json!({
        "points": points.iter().map(|p| spec.show(p.rep())).collect::<Vec<_>>(),
        "collinear": collinear(&points[0], &points[1], &points[2]),
        "linearly_dependent": collinear_proj(&vs[0], &vs[1], &vs[2]),
        "coordinatized": coordinatization_check(&anchor, &vs)?,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesarguesIn {
    center: Option<[i64; 3]>,
    a: Option<[[i64; 3]; 3]>,
    b: Option<[[i64; 3]; 3]>,
    #[serde(default)]
    random: usize,
    anchor: Option<[String; 3]>,
}

fn desargues(spec: Option<ExtensionSpec>, inp: DesarguesIn, seed: u64) -> Result<Value, CliError> {
    let mut configs = Vec::new();
    match (inp.center, inp.a, inp.b) {
        (Some(c), Some(a), Some(b)) => configs.push(DesarguesConfig {
            center: proj(c)?,
            a: [proj(a[0])?, proj(a[1])?, proj(a[2])?],
            b: [proj(b[0])?, proj(b[1])?, proj(b[2])?],
        }),
        (None, None, None) => {}
        _ => return Err(CliError::parse("center, a and b go together")),
    }
    let mut rng = seeded(seed);
    configs.extend((0..inp.random).map(|_| random_desargues(&mut rng, 5)));
    let anchor = match (&inp.anchor, spec) {
        (Some(src), Some(spec)) => Some(anchor_of(&Arc::new(spec), src, "additive")?),
        (Some(_), None) => return Err(CliError::parse("an anchor needs a spec")),
        _ => None,
    };
    let mut out = Vec::new();
    for cfg in &configs {
        cfg.validate()?;
        let axis = cfg.axis_points()?;
        let mut row = json!({
            "center": show_proj(&cfg.center),
            "a": cfg.a.iter().map(show_proj).collect::<Vec<_>>(),
            "b": cfg.b.iter().map(show_proj).collect::<Vec<_>>(),
            "axis": axis.iter().map(show_proj).collect::<Vec<_>>(),
            "collinear": desargues_check(cfg)?,
        });
        if let Some(anchor) = &anchor {
            row["collinear_in_plane"] = json!(desargues_in_plane(anchor, cfg)?);
        }
        out.push(row);
    }
    Ok(json!({ "configurations": out }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairIn {
    x: String,
    #[serde(alias = "y")]
    a: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigIn {
    j: Option<PairIn>,
    mult: Option<PairIn>,
    psi: Option<BTreeMap<String, String>>,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_samples() -> usize {
    8
}

fn config(spec: ExtensionSpec, inp: ConfigIn, seed: u64) -> Result<Value, CliError> {
    let spec = Arc::new(spec);
    let mut out = json!({});
    if let Some(j) = &inp.j {
        let t = j_map(&spec, &elem(&spec, &j.x)?, &elem(&spec, &j.a)?)?;
        let m = j_membership_of(&t);
        out["j"] = json!({
            "points": t.points.iter().map(|p| spec.show(p.rep())).collect::<Vec<_>>(),
            "direct": m.direct,
            "decomposition": m.decomposition,
        });
    }
    if let Some(m) = &inp.mult {
        let (x, y) = (elem(&spec, &m.x)?, elem(&spec, &m.a)?);
        let p = |e: QFunc| point_of(&spec, e);
        let prod = mult_construct(&p(x.clone())?, &p(y.clone())?, &p(&x / &y)?, &x, &y)?;
        out["mult"] = json!({
            "product": spec.show(prod.rep()),
            "equals_acl_xy": prod == p(&x * &y)?,
        });
    }
    if let Some(psi) = &inp.psi {
        let inst = if psi.len() == 5 {
            let get = |k: &str| {
                psi.get(k)
                    .ok_or_else(|| CliError::parse(format!("psi needs `{k}`")))
                    .and_then(|s| elem(&spec, s))
            };
            PsiInstance::standard(&spec, [get("a")?, get("b")?, get("c")?, get("d")?, get("x")?])?
        } else {
            let map = psi
                .iter()
                .map(|(k, v)| Ok((k.clone(), elem(&spec, v)?)))
                .collect::<Result<BTreeMap<_, _>, CliError>>()?;
            PsiInstance::from_map(&spec, &map)?
        };
        let report = psi_check(
            &inst,
            &PsiOptions {
                samples: inp.samples,
                seed,
                partial_quadrangle: None,
            },
        )?;
        let conj: Vec<Value> = report
            .conjuncts
            .iter()
            .map(|c| {
                json!({
                    "bullet": c.bullet,
                    "name": c.name,
                    "outcome": match c.outcome {
                        Outcome::Pass => "pass",
                        Outcome::Fail => "fail",
                        Outcome::Skipped => "skipped",
                    },
                    "sampled": c.sampled,
                })
            })
            .collect();
        out["psi"] = json!({
            "conjuncts": conj,
            "all_evaluable_pass": report.all_evaluable_pass(),
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReconstructIn {
    automorphism: String,
    samples: Vec<String>,
    #[serde(default)]
    dependent: Vec<String>,
    anchor: Option<String>,
    base_x: Option<String>,
}

fn reconstruct(spec: ExtensionSpec, inp: ReconstructIn) -> Result<Value, CliError> {
    let spec = Arc::new(spec);
    let map = SubstitutionMap::parse(&spec, &inp.automorphism)?;
    let anchor = inp.anchor.as_deref().map(|s| elem(&spec, s)).transpose()?;
    let base_x = inp.base_x.as_deref().map(|s| elem(&spec, s)).transpose()?;
    let rec = recover_field_map(&map, anchor, base_x)?;
    let mut images = Vec::new();
    let mut recovered = Vec::new();
    for s in &inp.samples {
        let x = elem(&spec, s)?;
        let got = rec.apply(&x)?;
        images.push(json!({
            "elem": spec.show(&x),
            "recovered": spec.show(&got),
            "matches_automorphism": got == map.sigma(&x)?,
        }));
        recovered.push(spec.show(&got));
    }
    let mut dependent = Vec::new();
    for s in &inp.dependent {
        let a = elem(&spec, s)?;
        let p = rec.dependent_point_recovery(&a)?;
        dependent.push(json!({
            "elem": spec.show(&a),
            "point": spec.show(p.rep()),
            "matches_map": p == map.apply(&point_of(&spec, a)?)?,
        }));
    }
    Ok(json!({
        "map": map.name(),
        "anchor": spec.show(rec.class().anchor()),
        "base_x": spec.show(rec.base_x()),
        "image_anchor": spec.show(rec.image_anchor()),
        "calibration": spec.show(rec.calibration()),
        "recovered": recovered,
        "images": images,
        "dependent": dependent,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TowerIn {
    upper: SpecDoc,
    embedding: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogicIn {
    #[serde(default)]
    sentences: Vec<String>,
    #[serde(default)]
    params: BTreeMap<String, String>,
    #[serde(default)]
    pool: bool,
    tower: Option<TowerIn>,
    #[serde(default)]
    generate: usize,
    flats: Option<Vec<Vec<String>>>,
}

fn logic(spec: ExtensionSpec, inp: LogicIn, seed: u64) -> Result<Value, CliError> {
    let sentences = inp
        .sentences
        .iter()
        .map(|s| parse_sentence(&spec, s))
        .collect::<fieldgeom::Result<Vec<Sentence>>>()?;
    let mut asg = Assignment::new();
    for (k, v) in &inp.params {
        asg.insert(k.clone(), elem(&spec, v)?);
    }
    let pool = inp.pool.then(|| default_pool(&spec));
    let mut values = Vec::new();
    for s in &sentences {
        values.push(json!({
            "sentence": s.show(&spec),
            "value": eval_sentence(&spec, s, &asg, pool.as_deref())?,
        }));
    }
    let mut out = json!({ "values": values });
    if let Some(t) = &inp.tower {
        let upper = t.upper.build()?;
        let tower = match &t.embedding {
            None => Tower::new(spec.clone(), upper)?,
            Some(labels) => {
                let emb = labels
                    .iter()
                    .map(|l| {
                        upper
                            .labels()
                            .iter()
                            .position(|u| u == l)
                            .ok_or_else(|| CliError::parse(format!("unknown upper variable `{l}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Tower::with_embedding(spec.clone(), upper, emb)?
            }
        };
        let mut suite = sentences.clone();
        let mut rng = seeded(seed);
        suite.extend(
            (0..inp.generate).map(|_| random_normal_form(&mut rng, tower.lower(), GenShape::default()).to_sentence()),
        );
        let report = tower_harness(&tower, &suite)?;
        out["harness"] = json!({
            "hypothesis": report.hypothesis,
            "agreements": report.agreements(),
            "total": report.rows.len(),
            "rows": report.rows.iter().map(|r| json!({
                "sentence": r.sentence,
                "lower": r.lower,
                "upper": r.upper,
            })).collect::<Vec<_>>(),
        });
    }
    if let Some(flats) = &inp.flats {
        let sets = flats
            .iter()
            .map(|f| {
                f.iter()
                    .map(|l| {
                        spec.labels()
                            .iter()
                            .position(|u| u == l)
                            .ok_or_else(|| CliError::parse(format!("unknown variable `{l}`")))
                    })
                    .collect::<Result<BTreeSet<usize>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w = union_witness(&spec, &sets)?;
        out["union_witness"] = json!(spec.show(&w));
    }
    Ok(out)
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::InvalidSpec(_) | Error::VarOutOfRange { .. } | Error::NvarsMismatch(..) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}
