//! Canonical JSON encodings.
//!
//! Rationals are `["p", "q"]` pairs of decimal strings in lowest terms with a
//! positive denominator. Objects are emitted with sorted keys, so equal
//! values always serialize to identical bytes. No floating-point number is
//! ever written.

use std::fmt;
use std::sync::Arc;

use polyarrow_core::arrows::{ArrowClass, DoubleArrow, Operator};
use polyarrow_core::catalog::{ArrowCatalog, ArrowMatch, CatalogEntry, Limits};
use polyarrow_core::certificate::{Certificate, Check, CheckKind, Relation};
use polyarrow_core::engine::{AuditOutcome, AuditReport, ConstructionState, EngineParams, LedgerItem, StepRecord};
use polyarrow_core::geometry::Polytope;
use polyarrow_core::{rational, Matrix, NormedSpace, Vector, Q};
use serde_json::{json, Map, Value};

/// A malformed or inconsistent document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormatError(pub String);

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

impl From<polyarrow_core::Error> for FormatError {
    fn from(e: polyarrow_core::Error) -> Self {
        FormatError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(FormatError(msg.into()))
}

/// Pretty-printed canonical text with a trailing newline.
pub fn to_text(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("values always serialize");
    out.push('\n');
    out
}

pub fn from_text(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| FormatError(format!("invalid JSON: {e}")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| FormatError(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| FormatError(format!("`{what}` must be an array")))
}

fn usize_of(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().and_then(|n| usize::try_from(n).ok()).ok_or_else(|| FormatError(format!("`{what}` must be a non-negative integer")))
}

fn u64_of(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| FormatError(format!("`{what}` must be a non-negative integer")))
}

fn bool_of(v: &Value, what: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| FormatError(format!("`{what}` must be a boolean")))
}

fn str_of<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| FormatError(format!("`{what}` must be a string")))
}

fn optional<T>(v: Option<T>, f: impl FnOnce(T) -> Value) -> Value {
    v.map_or(Value::Null, f)
}

pub fn rational(q: &Q) -> Value {
    json!([q.numer().to_string(), q.denom().to_string()])
}

pub fn parse_rational(v: &Value) -> Result<Q> {
    let pair = array(v, "rational")?;
    let [p, q] = pair.as_slice() else {
        return err("a rational is a [numerator, denominator] pair");
    };
    let (p, q) = (str_of(p, "numerator")?, str_of(q, "denominator")?);
    let integer = |s: &str| {
        let digits = s.strip_prefix('-').unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !integer(p) || !integer(q) {
        return err(format!("rational parts must be decimal integers, got [{p:?}, {q:?}]"));
    }
    rational::parse(&format!("{p}/{q}")).ok_or_else(|| FormatError(format!("zero denominator in [{p:?}, {q:?}]")))
}

pub fn vector(v: &[Q]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn parse_vector(v: &Value, dim: usize) -> Result<Vector> {
    let items = array(v, "vector")?;
    if items.len() != dim {
        return err(format!("vector of length {} where {dim} was expected", items.len()));
    }
    items.iter().map(parse_rational).collect()
}

/// Row-major nested arrays.
pub fn matrix(m: &Matrix) -> Value {
    Value::Array(m.row_vectors().iter().map(|r| vector(r)).collect())
}

pub fn parse_matrix(v: &Value, rows: usize, cols: usize) -> Result<Matrix> {
    let items = array(v, "matrix")?;
    if items.len() != rows {
        return err(format!("matrix with {} rows where {rows} were expected", items.len()));
    }
    let rows: Vec<Vector> = items.iter().map(|r| parse_vector(r, cols)).collect::<Result<_>>()?;
    Ok(Matrix::from_rows(&rows, cols)?)
}

pub fn polytope(p: &Polytope) -> Value {
    json!({ "dim": p.dim(), "vertices": p.vertices().iter().map(|v| vector(v)).collect::<Vec<_>>() })
}

fn parse_points(v: &Value) -> Result<(usize, Vec<Vector>)> {
    let dim = usize_of(field(v, "dim")?, "dim")?;
    let points = array(field(v, "vertices")?, "vertices")?
        .iter()
        .map(|p| parse_vector(p, dim))
        .collect::<Result<Vec<_>>>()?;
    Ok((dim, points))
}

pub fn parse_polytope(v: &Value) -> Result<Polytope> {
    let (_, points) = parse_points(v)?;
    Ok(Polytope::hull(&points)?)
}

pub fn space(s: &NormedSpace) -> Value {
    let mut out = polytope(s.ball());
    out["label"] = Value::String(s.label().to_string());
    out
}

/// The label is optional on input; a missing one reads as `"X"`.
pub fn parse_space(v: &Value) -> Result<NormedSpace> {
    let label = match v.get("label") {
        Some(l) => str_of(l, "label")?.to_string(),
        None => "X".to_string(),
    };
    let (dim, points) = parse_points(v)?;
    if dim == 0 {
        return Ok(NormedSpace::zero().relabel(label));
    }
    Ok(NormedSpace::from_points(&points, label)?)
}

pub fn operator(t: &Operator) -> Value {
    json!({ "domain": space(t.domain()), "codomain": space(t.codomain()), "matrix": matrix(t.matrix()) })
}

pub fn parse_operator(v: &Value) -> Result<Operator> {
    let domain = parse_space(field(v, "domain")?)?;
    let codomain = parse_space(field(v, "codomain")?)?;
    let m = parse_matrix(field(v, "matrix")?, codomain.dim(), domain.dim())?;
    Ok(Operator::new(domain, codomain, m)?)
}

pub fn arrow(d: &DoubleArrow) -> Value {
    json!({ "fwd": operator(&d.fwd), "back": operator(&d.back) })
}

pub fn parse_arrow(v: &Value) -> Result<DoubleArrow> {
    Ok(DoubleArrow::new(parse_operator(field(v, "fwd")?)?, parse_operator(field(v, "back")?)?)?)
}

pub fn class(c: &ArrowClass) -> Value {
    json!({
        "alpha": rational(&c.alpha),
        "beta": rational(&c.beta),
        "gamma": rational(&c.gamma),
        "contractive": c.contractive,
    })
}

pub fn parse_class(v: &Value) -> Result<ArrowClass> {
    Ok(ArrowClass::new(
        parse_rational(field(v, "alpha")?)?,
        parse_rational(field(v, "beta")?)?,
        parse_rational(field(v, "gamma")?)?,
        bool_of(field(v, "contractive")?, "contractive")?,
    ))
}

fn check(c: &Check) -> Value {
    let mut out = Map::new();
    out.insert("label".into(), Value::String(c.label.clone()));
    out.insert("holds".into(), Value::Bool(c.holds));
    match &c.kind {
        CheckKind::Bound { value, relation, bound } => {
            out.insert("kind".into(), json!("bound"));
            out.insert("value".into(), rational(value));
            out.insert("relation".into(), json!(relation.symbol()));
            out.insert("bound".into(), rational(bound));
        }
        CheckKind::Identity { residual } => {
            out.insert("kind".into(), json!("identity"));
            out.insert("residual".into(), rational(residual));
        }
        CheckKind::Info { value } => {
            out.insert("kind".into(), json!("info"));
            out.insert("value".into(), rational(value));
        }
    }
    Value::Object(out)
}

fn parse_relation(s: &str) -> Result<Relation> {
    [Relation::Le, Relation::Lt, Relation::Eq, Relation::Ge]
        .into_iter()
        .find(|r| r.symbol() == s)
        .ok_or_else(|| FormatError(format!("unknown relation {s:?}")))
}

fn parse_check(v: &Value) -> Result<Check> {
    let label = str_of(field(v, "label")?, "label")?.to_string();
    let holds = bool_of(field(v, "holds")?, "holds")?;
    let kind = match str_of(field(v, "kind")?, "kind")? {
        "bound" => CheckKind::Bound {
            value: parse_rational(field(v, "value")?)?,
            relation: parse_relation(str_of(field(v, "relation")?, "relation")?)?,
            bound: parse_rational(field(v, "bound")?)?,
        },
        "identity" => CheckKind::Identity { residual: parse_rational(field(v, "residual")?)? },
        "info" => CheckKind::Info { value: parse_rational(field(v, "value")?)? },
        other => return err(format!("unknown check kind {other:?}")),
    };
    Ok(Check { label, kind, holds })
}

pub fn certificate(c: &Certificate) -> Value {
    json!({ "all_hold": c.all_hold(), "checks": c.checks.iter().map(check).collect::<Vec<_>>() })
}

/// Reads the checks back and recomputes every verdict from the recorded
/// witnesses, so a tampered `holds` flag is rejected.
pub fn parse_certificate(v: &Value) -> Result<Certificate> {
    let checks = array(field(v, "checks")?, "checks")?.iter().map(parse_check).collect::<Result<Vec<_>>>()?;
    for c in &checks {
        let expected = match &c.kind {
            CheckKind::Bound { value, relation, bound } => relation.holds(value, bound),
            CheckKind::Identity { residual } => *residual == rational::zero(),
            CheckKind::Info { .. } => true,
        };
        if expected != c.holds {
            return err(format!("check {:?} records a verdict its witnesses contradict", c.label));
        }
    }
    Ok(Certificate { checks })
}

fn limits(l: &Limits) -> Value {
    json!({ "max_points": l.max_points, "max_tuples": l.max_tuples, "max_results": l.max_results })
}

fn parse_limits(v: &Value) -> Result<Limits> {
    Ok(Limits {
        max_points: usize_of(field(v, "max_points")?, "max_points")?,
        max_tuples: usize_of(field(v, "max_tuples")?, "max_tuples")?,
        max_results: usize_of(field(v, "max_results")?, "max_results")?,
    })
}

pub fn catalog(c: &ArrowCatalog) -> Value {
    let entries: Vec<Value> = c
        .entries
        .iter()
        .map(|e| json!({ "source": e.source, "target": e.target, "arrow": arrow(&e.arrow), "class": class(&e.class) }))
        .collect();
    json!({
        "parameters": { "max_denom": c.max_denom, "resolution": rational(&c.resolution), "seed": c.seed },
        "spaces": c.spaces.iter().map(space).collect::<Vec<_>>(),
        "entries": entries,
    })
}

/// Reads a catalog and re-certifies every entry's class.
pub fn parse_catalog(v: &Value) -> Result<ArrowCatalog> {
    let params = field(v, "parameters")?;
    let spaces = array(field(v, "spaces")?, "spaces")?.iter().map(parse_space).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for e in array(field(v, "entries")?, "entries")? {
        let source = usize_of(field(e, "source")?, "source")?;
        let target = usize_of(field(e, "target")?, "target")?;
        let arrow = parse_arrow(field(e, "arrow")?)?;
        let class = parse_class(field(e, "class")?)?;
        if source >= spaces.len() || target >= spaces.len() {
            return err("catalog entry refers to a missing space");
        }
        if arrow.source() != &spaces[source] || arrow.target() != &spaces[target] {
            return err("catalog entry arrow does not match its spaces");
        }
        if arrow.classify()? != class {
            return err("catalog entry class differs from the recomputed one");
        }
        entries.push(CatalogEntry { arrow, source, target, class });
    }
    let max_denom = u32::try_from(u64_of(field(params, "max_denom")?, "max_denom")?)
        .map_err(|_| FormatError("`max_denom` out of range".into()))?;
    Ok(ArrowCatalog {
        spaces,
        entries,
        resolution: parse_rational(field(params, "resolution")?)?,
        max_denom,
        seed: u64_of(field(params, "seed")?, "seed")?,
    })
}

pub fn params(p: &EngineParams) -> Value {
    json!({
        "m": p.m,
        "max_denom": p.max_denom,
        "seed": p.seed,
        "max_entries": p.max_entries,
        "max_dim": p.max_dim,
        "limits": limits(&p.limits),
    })
}

fn u32_of(v: &Value, what: &str) -> Result<u32> {
    u32::try_from(u64_of(v, what)?).map_err(|_| FormatError(format!("`{what}` out of range")))
}

pub fn parse_params(v: &Value) -> Result<EngineParams> {
    Ok(EngineParams {
        m: u32_of(field(v, "m")?, "m")?,
        max_denom: u32_of(field(v, "max_denom")?, "max_denom")?,
        seed: u64_of(field(v, "seed")?, "seed")?,
        max_entries: usize_of(field(v, "max_entries")?, "max_entries")?,
        max_dim: usize_of(field(v, "max_dim")?, "max_dim")?,
        limits: parse_limits(field(v, "limits")?)?,
    })
}

fn ledger_item(l: &LedgerItem) -> Value {
    json!({
        "stage": l.stage,
        "index": l.index,
        "entry": l.entry,
        "grid": l.grid,
        "arrow": arrow(&l.arrow),
        "step": l.step,
    })
}

fn parse_ledger_item(v: &Value) -> Result<LedgerItem> {
    Ok(LedgerItem {
        stage: usize_of(field(v, "stage")?, "stage")?,
        index: usize_of(field(v, "index")?, "index")?,
        entry: usize_of(field(v, "entry")?, "entry")?,
        grid: usize_of(field(v, "grid")?, "grid")?,
        arrow: parse_arrow(field(v, "arrow")?)?,
        step: usize_of(field(v, "step")?, "step")?,
    })
}

fn step_record(s: &StepRecord) -> Value {
    json!({
        "items": s.items,
        "skipped": s.skipped.iter().map(|(k, j)| json!([k, j])).collect::<Vec<_>>(),
        "amalgam": optional(s.amalgam.as_ref(), operator),
        "certificate": certificate(&s.certificate),
    })
}

fn parse_step_record(v: &Value) -> Result<StepRecord> {
    let items = array(field(v, "items")?, "items")?.iter().map(|i| usize_of(i, "items")).collect::<Result<_>>()?;
    let skipped = array(field(v, "skipped")?, "skipped")?
        .iter()
        .map(|p| match array(p, "skipped")?.as_slice() {
            [k, j] => Ok((usize_of(k, "skipped")?, usize_of(j, "skipped")?)),
            _ => err("skipped entries are [stage, index] pairs"),
        })
        .collect::<Result<_>>()?;
    let amalgam = match field(v, "amalgam")? {
        Value::Null => None,
        a => Some(parse_operator(a)?),
    };
    Ok(StepRecord { items, skipped, amalgam, certificate: parse_certificate(field(v, "certificate")?)? })
}

/// The full construction: parameters, catalog, stages, inclusions, ledger
/// and step records.
pub fn state(s: &ConstructionState) -> Value {
    json!({
        "params": params(&s.params),
        "catalog": catalog(&s.catalog),
        "stages": s.stages.iter().map(space).collect::<Vec<_>>(),
        "inclusions": s.inclusions.iter().map(arrow).collect::<Vec<_>>(),
        "ledger": s.ledger.iter().map(ledger_item).collect::<Vec<_>>(),
        "steps": s.steps.iter().map(step_record).collect::<Vec<_>>(),
    })
}

/// Reads a construction and checks that consecutive stages are linked by
/// `(1,0,1)`-arrows.
pub fn parse_state(v: &Value) -> Result<ConstructionState> {
    let stages = array(field(v, "stages")?, "stages")?.iter().map(parse_space).collect::<Result<Vec<_>>>()?;
    let inclusions = array(field(v, "inclusions")?, "inclusions")?.iter().map(parse_arrow).collect::<Result<Vec<_>>>()?;
    if stages.is_empty() || inclusions.len() + 1 != stages.len() {
        return err("a state needs one inclusion per consecutive pair of stages");
    }
    for (k, d) in inclusions.iter().enumerate() {
        if d.source() != &stages[k] || d.target() != &stages[k + 1] {
            return err(format!("inclusion {k} does not link stages {k} and {}", k + 1));
        }
        if !d.classify()?.is_double() {
            return err(format!("inclusion {k} is not a (1,0,1)-arrow"));
        }
    }
    Ok(ConstructionState {
        stages,
        inclusions,
        ledger: array(field(v, "ledger")?, "ledger")?.iter().map(parse_ledger_item).collect::<Result<_>>()?,
        steps: array(field(v, "steps")?, "steps")?.iter().map(parse_step_record).collect::<Result<_>>()?,
        catalog: Arc::new(parse_catalog(field(v, "catalog")?)?),
        params: parse_params(field(v, "params")?)?,
    })
}

fn arrow_match(m: &ArrowMatch) -> Value {
    json!({
        "entry": m.entry,
        "u": arrow(&m.u),
        "a": operator(&m.a),
        "b": operator(&m.b),
        "distortion": rational(&m.distortion),
        "defect": rational(&m.defect),
    })
}

pub fn outcome(o: AuditOutcome) -> &'static str {
    match o {
        AuditOutcome::Success => "success",
        AuditOutcome::InsufficientResolution => "insufficient_resolution",
        AuditOutcome::InsufficientStages => "insufficient_stages",
    }
}

pub fn audit_report(r: &AuditReport) -> Value {
    json!({
        "target": arrow(&r.target),
        "probe": arrow(&r.probe),
        "probe_stage": r.probe_stage,
        "eps": rational(&r.eps),
        "matched": optional(r.matched.as_ref(), arrow_match),
        "item": r.item,
        "grid_defect": optional(r.grid_defect.as_ref(), rational),
        "stage": r.stage,
        "extension": optional(r.extension.as_ref(), arrow),
        "defect_fwd": optional(r.defect_fwd.as_ref(), rational),
        "defect_back": optional(r.defect_back.as_ref(), rational),
        "class": optional(r.class.as_ref(), class),
        "outcome": outcome(r.outcome),
        "certificate": certificate(&r.certificate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyarrow_core::catalog::{gen_double_arrows, gen_spaces};
    use polyarrow_core::engine::init;
    use polyarrow_core::rational::{frac, int};

    #[test]
    fn rationals_are_string_pairs() {
        assert_eq!(rational(&frac(-6, 4)), json!(["-3", "2"]));
        assert_eq!(rational(&int(0)), json!(["0", "1"]));
        assert_eq!(parse_rational(&json!(["4", "-6"])).unwrap(), frac(-2, 3));
        for bad in [json!(["1", "0"]), json!([1, 2]), json!(["1.5", "2"]), json!(["1"]), json!("1/2")] {
            assert!(parse_rational(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn spaces_round_trip_exactly() {
        let hex = NormedSpace::from_points(
            &[vec![int(1), int(0)], vec![int(0), int(1)], vec![frac(1, 2), frac(1, 2)], vec![int(-1), int(0)], vec![int(0), int(-1)], vec![frac(-1, 2), frac(-1, 2)]],
            "H",
        )
        .unwrap();
        for s in [NormedSpace::l1(3), NormedSpace::linf(2), NormedSpace::real(), NormedSpace::zero(), hex] {
            let v = space(&s);
            let back = parse_space(&v).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.label(), s.label());
            assert_eq!(to_text(&space(&back)), to_text(&v));
        }
    }

    #[test]
    fn keys_are_sorted() {
        let text = to_text(&space(&NormedSpace::real()));
        let (d, l, v) = (text.find("\"dim\"").unwrap(), text.find("\"label\"").unwrap(), text.find("\"vertices\"").unwrap());
        assert!(d < l && l < v);
        assert!(!text.contains('.'));
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let mut cert = Certificate::new();
        cert.le("x", int(1), int(2));
        let mut v = certificate(&cert);
        assert_eq!(parse_certificate(&v).unwrap(), cert);
        v["checks"][0]["holds"] = json!(false);
        assert!(parse_certificate(&v).is_err());
    }

    #[test]
    fn states_round_trip() {
        let cat = gen_double_arrows(&gen_spaces(2, 4, 2), 2);
        let text = to_text(&catalog(&cat));
        assert_eq!(parse_catalog(&from_text(&text).unwrap()).unwrap(), cat);
        let s = init(&NormedSpace::real(), Arc::new(cat), EngineParams { max_denom: 2, ..EngineParams::default() }).step().unwrap();
        let v = state(&s);
        let back = parse_state(&v).unwrap();
        assert_eq!(back.stages, s.stages);
        assert_eq!(back.ledger, s.ledger);
        assert_eq!(back.steps, s.steps);
        assert_eq!(to_text(&state(&back)), to_text(&v));
    }
}
