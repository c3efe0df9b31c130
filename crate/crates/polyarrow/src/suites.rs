//! Seeded property suites, one per construction, each producing a JSON
//! report of every checked identity and bound with its exact witnesses.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use polyarrow_core::arrows::{compose_certified, exactify_projection, perturb_projection, scale_to_contractive, ArrowClass, DoubleArrow, Operator};
use polyarrow_core::catalog::{arrow_grid, gen_double_arrows, gen_double_arrows_with, gen_spaces, grid_constant, match_arrow, norming_arrow, norming_pairs, ArrowCatalog, Limits};
use polyarrow_core::certificate::Certificate;
use polyarrow_core::engine::{audit_class_bound, audit_extension, init, skeleton_check, AuditOutcome, ConstructionState, EngineParams};
use polyarrow_core::pushout::{complemented_pushout, correction_double, multi_pushout_extension, pushout, Variant};
use polyarrow_core::spaces::framing_delta;
use polyarrow_core::{rational, Matrix, NormedSpace, Vector, Q};
use serde_json::{json, Value};

use crate::json;
use crate::random::Sampler;

pub const SUITES: [&str; 10] =
    ["isom", "casiequiv", "amostdpo", "poprojection", "correction", "close", "catalog", "engine-audit", "skeleton", "norming"];

/// Suites whose instances are drawn from the seeded generator.
pub fn is_randomized(name: &str) -> bool {
    !matches!(name, "catalog" | "engine-audit")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SuiteError {
    UnknownSuite(String),
    Config(String),
}

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteError::UnknownSuite(name) => write!(f, "unknown suite {name:?}; expected one of {}", SUITES.join(", ")),
            SuiteError::Config(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl std::error::Error for SuiteError {}

/// Knobs of a suite run. `steps` and `m` only matter for `engine-audit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub instances: usize,
    pub max_dim: usize,
    pub max_denom: u32,
    pub seed: u64,
    pub eps: Vec<Q>,
    pub steps: usize,
    pub m: u32,
}

impl SuiteConfig {
    /// The default configuration of a suite, sized to its acceptance run.
    pub fn defaults(name: &str) -> Result<Self, SuiteError> {
        let f = rational::frac;
        let base = SuiteConfig { instances: 100, max_dim: 3, max_denom: 8, seed: 0, eps: Vec::new(), steps: 0, m: 3 };
        Ok(match name {
            "isom" | "amostdpo" => base,
            "casiequiv" => SuiteConfig { eps: vec![f(1, 10), f(1, 5), f(1, 4), f(1, 3)], ..base },
            "poprojection" => SuiteConfig { instances: 50, ..base },
            "correction" => SuiteConfig { instances: 60, eps: vec![f(0, 1), f(1, 10), f(1, 4)], ..base },
            "close" => SuiteConfig { instances: 60, eps: vec![f(1, 10), f(1, 5), f(3, 10)], ..base },
            "skeleton" => SuiteConfig { instances: 50, ..base },
            "norming" => SuiteConfig { instances: 12, ..base },
            "catalog" => SuiteConfig { instances: 1, max_dim: 2, max_denom: 4, ..base },
            "engine-audit" => SuiteConfig { instances: 1, max_dim: 2, max_denom: 4, eps: vec![f(1, 8)], steps: 5, ..base },
            other => return Err(SuiteError::UnknownSuite(other.to_string())),
        })
    }

    fn to_json(&self) -> Value {
        json!({
            "instances": self.instances,
            "max_dim": self.max_dim,
            "max_denom": self.max_denom,
            "seed": self.seed,
            "eps": self.eps.iter().map(json::rational).collect::<Vec<_>>(),
            "steps": self.steps,
            "m": self.m,
        })
    }

    fn eps_at(&self, k: usize) -> Result<&Q, SuiteError> {
        if self.eps.is_empty() {
            return Err(SuiteError::Config("this suite needs at least one eps value".into()));
        }
        Ok(&self.eps[k % self.eps.len()])
    }
}

/// One checked instance.
#[derive(Clone, Debug)]
pub struct InstanceReport {
    pub index: usize,
    pub kind: String,
    /// The generated data, so a failure can be replayed in isolation.
    pub input: Value,
    pub certificate: Certificate,
    /// A construction that refused its input.
    pub error: Option<String>,
}

impl InstanceReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.certificate.all_hold()
    }

    fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "kind": self.kind,
            "input": self.input,
            "certificate": json::certificate(&self.certificate),
            "error": self.error,
            "passed": self.passed(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub instances: Vec<InstanceReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.instances.iter().all(InstanceReport::passed)
    }

    /// How many instances fail each check label.
    pub fn failed_checks(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for inst in &self.instances {
            for c in inst.certificate.failures() {
                *out.entry(c.label.clone()).or_insert(0) += 1;
            }
            if inst.error.is_some() {
                *out.entry("error".to_string()).or_insert(0) += 1;
            }
        }
        out
    }

    /// Every check with the given label, across instances.
    pub fn checks<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a polyarrow_core::certificate::Check> + 'a {
        self.instances.iter().flat_map(move |i| i.certificate.checks.iter().filter(move |c| c.label == label))
    }

    pub fn to_json(&self) -> Value {
        let passed = self.instances.iter().filter(|i| i.passed()).count();
        json!({
            "suite": self.suite,
            "config": self.config.to_json(),
            "instances": self.instances.iter().map(InstanceReport::to_json).collect::<Vec<_>>(),
            "summary": {
                "instances": self.instances.len(),
                "passed": passed,
                "failed": self.instances.len() - passed,
                "failed_checks": self.failed_checks(),
            },
            "passed": self.passed(),
        })
    }
}

type Outcome = polyarrow_core::Result<(String, Value, Certificate)>;

/// Runs a suite. Instance `k` draws from a generator seeded with
/// `seed + k`, so instances are independent of the instance count.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if config.max_dim == 0 {
        return Err(SuiteError::Config("max_dim must be positive".into()));
    }
    if config.max_denom == 0 {
        return Err(SuiteError::Config("max_denom must be positive".into()));
    }
    let instances = match name {
        "catalog" => catalog_suite(config)?,
        "engine-audit" => engine_suite(config)?,
        _ => {
            let body: fn(&mut Sampler, &SuiteConfig, usize) -> Result<Outcome, SuiteError> = match name {
                "isom" => isom,
                "casiequiv" => casiequiv,
                "amostdpo" => amostdpo,
                "poprojection" => poprojection,
                "correction" => correction,
                "close" => close,
                "skeleton" => skeleton,
                "norming" => norming,
                other => return Err(SuiteError::UnknownSuite(other.to_string())),
            };
            let mut out = Vec::with_capacity(config.instances);
            for k in 0..config.instances {
                let mut s = Sampler::new(config.seed.wrapping_add(k as u64), config.max_denom);
                out.push(match body(&mut s, config, k)? {
                    Ok((kind, input, certificate)) => InstanceReport { index: k, kind, input, certificate, error: None },
                    Err(e) => InstanceReport { index: k, kind: "error".into(), input: Value::Null, certificate: Certificate::new(), error: Some(e.to_string()) },
                });
            }
            out
        }
    };
    Ok(SuiteReport { suite: name.to_string(), config: config.clone(), instances })
}

fn one() -> Q {
    rational::one()
}

fn cols(m: &Matrix) -> Vec<Vector> {
    m.col_vectors()
}

/// Push-out legs, universal property and the isometric and isomorphic cases.
fn isom(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    Ok((|| {
        let mut cert = Certificate::new();
        let (kind, i, j) = match k % 3 {
            0 => {
                let a = s.space_in(1, d);
                let cols_n = s.range(1, a.dim());
                let basis = s.injective(a.dim(), cols_n);
                let y = a.section(&cols(&basis), "Y")?;
                let i = Operator::new(y.clone(), a, basis)?;
                let b = s.space_in(1, d);
                let j = s.contraction(&y, &b);
                ("isometric", i, j)
            }
            1 => {
                let n = s.range(1, d);
                let (y, a) = (s.space(n), s.space(n));
                let i = Operator::new(y.clone(), a, s.injective(n, n))?;
                let b = s.space_in(1, d);
                let j = s.contraction(&y, &b);
                ("isomorphism", i, j)
            }
            _ => {
                let n = s.range(1, d);
                let y = s.space(n);
                let a = s.space_in(n, d);
                let i = Operator::new(y.clone(), a.clone(), s.injective(a.dim(), n))?;
                let b = s.space_in(1, d);
                let m = s.nonzero_matrix(b.dim(), n).scale(&rational::int(2));
                ("general", i, Operator::new(y, b, m)?)
            }
        };
        let po = pushout(&i, &j)?;
        cert.absorb("pushout", po.certificate.clone());
        cert.le("|i'|", po.i_prime.norm().clone(), one());
        cert.le("|j'|", po.j_prime.norm().clone(), one());
        cert.identity("j'i = i'j", po.j_prime.after(&i)?.matrix(), po.i_prime.after(&j)?.matrix());
        let (gamma, c) = po.factor(&po.j_prime, &po.i_prime)?;
        cert.absorb("factor (j', i')", c);
        cert.identity("factor (j', i') = 1", gamma.matrix(), &Matrix::identity(po.po.dim()));
        match kind {
            "isometric" => {
                let (upper, lower) = po.i_prime.isometry_constants()?;
                cert.equals("isometry_constants(i').upper", upper, one());
                cert.equals("isometry_constants(i').lower", lower, one());
            }
            "isomorphism" => {
                cert.equals("i' onto", rational::int(po.i_prime.matrix().rank() as i64), rational::int(po.po.dim() as i64));
                let bound = i.inverse_norm()?.max(one());
                cert.le("|(i')^-1| <= max(1, |i^-1|)", po.i_prime.inverse_norm()?, bound);
            }
            _ => {}
        }
        let input = json!({ "i": json::operator(&i), "j": json::operator(&j) });
        Ok((kind.to_string(), input, cert))
    })())
}

/// Scale factor making an operator contractive.
fn contract(t: &Operator) -> Operator {
    if t.norm() > &one() {
        t.scale(&(one() / t.norm()))
    } else {
        t.clone()
    }
}

/// `(C t)⁻¹ C` for a random `C` with `C t` invertible: a left inverse of `t`.
fn left_inverse(s: &mut Sampler, t: &Operator) -> polyarrow_core::Result<Operator> {
    let (n, m) = (t.domain().dim(), t.codomain().dim());
    loop {
        let c = s.matrix(n, m);
        if let Ok(inv) = c.mul(t.matrix()).inverse() {
            return Operator::new(t.codomain().clone(), t.domain().clone(), inv.mul(&c));
        }
    }
}

/// Complemented push-outs: class tables and the defining identities.
fn amostdpo(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    Ok((|| {
        let a = s.space_in(1, (d - 1).max(1));
        let (di, di_kind) = if k.is_multiple_of(2) {
            let room = d.saturating_sub(a.dim());
            (s.double_arrow_in(&a, room.min(1), room), "double")
        } else {
            let b = s.space_in(a.dim(), d.max(a.dim()));
            let i = Operator::new(a.clone(), b.clone(), s.injective(b.dim(), a.dim()))?;
            let i_bar = left_inverse(s, &i)?;
            (DoubleArrow::new(i, i_bar)?, "projection")
        };
        let x = s.space_in(a.dim(), d.max(a.dim()));
        let mut dj = s.arrow(&a, &x);
        let variant = match k % 4 {
            0 | 1 => {
                dj = DoubleArrow::new(contract(&dj.fwd), dj.back.clone())?;
                Variant::Standard
            }
            2 => Variant::Standard,
            _ => {
                let back = left_inverse(s, &dj.fwd)?;
                dj = DoubleArrow::new(dj.fwd.clone(), back)?;
                Variant::Kubis
            }
        };
        let cp = complemented_pushout(&di, &dj, variant)?;
        let mut cert = cp.certificate.clone();
        cert.identity("j'i = i'j", cp.pushout.j_prime.after(&di.fwd)?.matrix(), cp.pushout.i_prime.after(&dj.fwd)?.matrix());
        let contractive = if dj.fwd.norm() <= &one() { "contractive" } else { "general" };
        let kind = format!("{di_kind}/{contractive}/{}", if variant == Variant::Kubis { "kubis" } else { "standard" });
        let input = json!({ "i": json::arrow(&di), "j": json::arrow(&dj) });
        Ok((kind, input, cert))
    })())
}

/// Extension through the push-out of a sum of two `(1,0,1)`-arrows.
fn poprojection(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    Ok((|| {
        let a1 = s.space_in(1, 2.min(d));
        let d1 = s.double_arrow_in(&a1, 0, 1);
        let a2 = s.space(1);
        let d2 = s.double_arrow_in(&a2, 0, 1);
        let x = s.space_in(a1.dim(), d.max(a1.dim()));
        let mut dj1 = s.arrow(&a1, &x);
        if k.is_multiple_of(2) {
            dj1 = DoubleArrow::new(contract(&dj1.fwd), dj1.back.clone())?;
        }
        let j2 = if k % 4 < 2 {
            s.contraction(&a2, &x)
        } else {
            let stretch = one() + s.positive_unit();
            Operator::new(a2.clone(), x.clone(), s.matrix(x.dim(), 1).scale(&stretch))?
        };
        let ext = multi_pushout_extension(&d1, Some((&d2, &j2)), &dj1)?;
        let mut cert = ext.certificate.clone();
        cert.info("|j2|", j2.norm().clone());
        let u = dj1.fwd.isometry_alpha()?;
        cert.le("J|B1.alpha <= u max(1, |j2|)", ext.class.alpha.clone(), u * j2.norm().clone().max(one()));
        let j1_kind = if dj1.fwd.norm() <= &one() { "contractive" } else { "general" };
        let j2_kind = if j2.norm() <= &one() { "small" } else { "large" };
        let input = json!({ "i1": json::arrow(&d1), "i2": json::arrow(&d2), "j1": json::arrow(&dj1), "j2": json::operator(&j2) });
        Ok((format!("j1 {j1_kind}/j2 {j2_kind}"), input, cert))
    })())
}

/// The correction space and its double version.
fn correction(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    let eps = cfg.eps_at(k)?.clone();
    Ok((|| {
        let x = s.space_in(1, 2.min(d));
        let room = d.saturating_sub(x.dim());
        let exact = s.double_arrow_in(&x, room.min(1), room);
        let arrow = s.almost_double(&exact, &eps);
        let cd = correction_double(&arrow, &eps)?;
        let mut cert = cd.certificate.clone();
        cert.info("input beta", arrow.classify()?.beta);
        let input = json!({ "arrow": json::arrow(&arrow), "eps": json::rational(&eps) });
        Ok((format!("eps={}", rational::to_text(&eps)), input, cert))
    })())
}

/// Moving a complemented subspace to a nearby one.
fn close(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.clamp(2, 3);
    let eps = cfg.eps_at(k)?.clone();
    Ok((|| {
        let e = s.space_in(2, d);
        let n = s.range(1, e.dim() - 1);
        let raw = s.injective(e.dim(), e.dim());
        let norms: Vec<Q> = cols(&raw).iter().map(|c| e.norm(c)).collect();
        let full = Matrix::from_fn(e.dim(), e.dim(), |r, c| &raw.row(r)[c] / &norms[c]);
        let a_basis: Vec<Vector> = cols(&full)[..n].to_vec();
        let inv = full.inverse()?;
        let p_rows: Vec<Vector> = inv.row_vectors()[..n].to_vec();
        let a_space = e.section(&a_basis, "A")?;
        let p = Operator::new(e.clone(), a_space.clone(), Matrix::from_rows(&p_rows, e.dim())?)?;
        let units: Vec<Vector> = (0..n).map(|i| rational::unit(n, i)).collect();
        let radius = &eps / (framing_delta(&a_space, &units)? * p.norm());
        let x: Vec<Vector> = loop {
            let moved: Vec<Vector> = a_basis
                .iter()
                .map(|a| {
                    let v = s.nonzero_vector(e.dim());
                    let scale = &radius * s.positive_unit() / e.norm(&v);
                    rational::add(a, &rational::scale(&v, &scale))
                })
                .collect();
            if Matrix::from_cols(&moved, e.dim())?.rank() == n {
                break moved;
            }
        };
        let out = perturb_projection(&e, &a_basis, &p, &x, &eps)?;
        let input = json!({
            "E": json::space(&e),
            "a": a_basis.iter().map(|v| json::vector(v)).collect::<Vec<_>>(),
            "p": json::matrix(p.matrix()),
            "x": x.iter().map(|v| json::vector(v)).collect::<Vec<_>>(),
            "eps": json::rational(&eps),
        });
        Ok((format!("eps={}", rational::to_text(&eps)), input, out.certificate))
    })())
}

/// Composition, rescaling and exact projections of almost double arrows.
fn casiequiv(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    let eps = cfg.eps_at(k)?.clone();
    Ok((|| {
        let mut cert = Certificate::new();
        let a = s.space_in(1, (d - 1).max(1));
        let b = s.space_in(a.dim(), d.max(a.dim()));
        let c = s.space_in(b.dim(), d.max(b.dim()));
        let (d1, d3) = (s.arrow(&a, &b), s.arrow(&b, &c));

        let (_, c1) = compose_certified(&d1, &d3)?;
        cert.absorb("(1)", c1);
        let shrink = |t: &DoubleArrow| DoubleArrow::new(contract(&t.fwd), t.back.clone());
        let (_, c1) = compose_certified(&shrink(&d1)?, &shrink(&d3)?)?;
        cert.absorb("(1) contractive", c1);

        let alpha = d1.fwd.isometry_alpha()?;
        let scaled = d1.fwd.scale(&(one() / &alpha));
        cert.le("(2) |f/alpha|", scaled.norm().clone(), one());
        cert.le("(2) alpha(f/alpha)", scaled.isometry_alpha()?, &alpha * &alpha);

        let cls = d1.classify()?;
        let (_, c3) = scale_to_contractive(&d1, &cls)?;
        cert.absorb("(3)", c3);

        let room = d.saturating_sub(a.dim());
        let exact = s.double_arrow_in(&a, room.min(1), room);
        let near = s.almost_double(&exact, &eps);
        let (fixed, c4) = exactify_projection(&near, &eps)?;
        cert.absorb("(4)", c4);
        let (before, after) = (near.classify()?, fixed.classify()?);
        cert.equals("(4) alpha unchanged", after.alpha.clone(), before.alpha.clone());
        cert.equals("(4) beta", after.beta.clone(), rational::zero());
        cert.flag("(4) contractive kept", after.contractive == before.contractive);

        let input = json!({ "d1": json::arrow(&d1), "d3": json::arrow(&d3), "near": json::arrow(&near), "eps": json::rational(&eps) });
        Ok((format!("eps={}", rational::to_text(&eps)), input, cert))
    })())
}

/// Composite projections along `(1,0,1)` chains of length at most four.
fn skeleton(s: &mut Sampler, cfg: &SuiteConfig, _k: usize) -> Result<Outcome, SuiteError> {
    let start = cfg.max_dim.clamp(1, 2);
    Ok((|| {
        let len = s.range(1, 4);
        let mut chain: Vec<DoubleArrow> = Vec::with_capacity(len);
        let mut current = s.space_in(1, start);
        for _ in 0..len {
            let link = s.double_arrow_in(&current, 0, 1);
            current = link.target().clone();
            chain.push(link);
        }
        let report = skeleton_check(&chain)?;
        let mut cert = report.certificate.clone();
        cert.info("top dim", rational::int(current.dim() as i64));
        let input = json!({ "chain": chain.iter().map(json::arrow).collect::<Vec<_>>() });
        Ok((format!("length={len}"), input, cert))
    })())
}

/// Vertex and facet incidences counted directly from the two representations.
fn incidences(x: &NormedSpace) -> usize {
    x.vertices().iter().map(|v| x.facets().iter().filter(|f| rational::dot(f, v) == one()).count()).sum()
}

/// Norming pairs of the coordinate planes and of random spaces.
fn norming(s: &mut Sampler, cfg: &SuiteConfig, k: usize) -> Result<Outcome, SuiteError> {
    let d = cfg.max_dim.min(3);
    Ok((|| {
        let x = match k {
            0 => NormedSpace::linf(2),
            1 => NormedSpace::l1(2),
            _ => s.space_in(1, d),
        };
        let pairs = norming_pairs(&x);
        let mut cert = Certificate::new();
        let count = rational::int(pairs.len() as i64);
        cert.equals("pairs = vertex-facet incidences", count.clone(), rational::int(incidences(&x) as i64));
        if k < 2 {
            cert.equals("pairs", count, rational::int(8));
        }
        for (idx, (u, phi)) in pairs.iter().enumerate() {
            cert.equals(format!("pair {idx} |u|"), x.norm(u), one());
            cert.equals(format!("pair {idx} phi(u)"), rational::dot(phi, u), one());
            let arrow = norming_arrow(&x, u, phi)?;
            cert.flag(format!("pair {idx} is (1,0,1)"), arrow.classify()?.is_double());
        }
        Ok((x.label().to_string(), json!({ "space": json::space(&x) }), cert))
    })())
}

fn catalog_for(cfg: &SuiteConfig) -> ArrowCatalog {
    gen_double_arrows_with(&gen_spaces(cfg.max_dim, 4, cfg.max_denom), cfg.max_denom, &Limits::default(), cfg.seed)
}

/// Every entry re-certified, matched to itself and reproduced by a rerun.
fn catalog_suite(cfg: &SuiteConfig) -> Result<Vec<InstanceReport>, SuiteError> {
    let cat = catalog_for(cfg);
    let mut out = Vec::new();
    let mut global = Certificate::new();
    global.flag("rerun is identical", catalog_for(cfg) == cat);
    global.info("spaces", rational::int(cat.spaces.len() as i64));
    global.info("entries", rational::int(cat.entries.len() as i64));
    global.equals("resolution", cat.resolution.clone(), rational::frac(1, i64::from(cfg.max_denom)));
    for (idx, f) in cat.spaces.iter().enumerate() {
        let grid = arrow_grid(f, f, cfg.m, cfg.max_denom);
        global.flag(format!("grid {idx} contains the identity"), grid.contains(&DoubleArrow::identity(f)));
    }
    out.push(InstanceReport { index: 0, kind: "global".into(), input: json!({ "spaces": cat.spaces.len() }), certificate: global, error: None });
    for (idx, entry) in cat.entries.iter().enumerate() {
        let mut cert = Certificate::new();
        let run = (|| {
            let cls = entry.arrow.classify()?;
            cert.flag("class recomputes", cls == entry.class);
            cert.flag("is (1,0,1)", cls.is_double());
            cert.flag("spaces agree", entry.arrow.source() == &cat.spaces[entry.source] && entry.arrow.target() == &cat.spaces[entry.target]);
            let m = match_arrow(&entry.arrow, &cat, &rational::zero());
            cert.flag("matches itself exactly", m.is_some_and(|m| m.entry == idx && m.is_exact()));
            Ok::<_, polyarrow_core::Error>(())
        })();
        out.push(InstanceReport {
            index: idx + 1,
            kind: format!("{} -> {}", cat.spaces[entry.source].label(), cat.spaces[entry.target].label()),
            input: json!({ "entry": idx }),
            certificate: cert,
            error: run.err().map(|e| e.to_string()),
        });
    }
    Ok(out)
}

/// The catalog, parameters and initial space of the engine suite.
pub fn engine_setup(cfg: &SuiteConfig) -> (Arc<ArrowCatalog>, EngineParams) {
    let cat = Arc::new(gen_double_arrows(&gen_spaces(cfg.max_dim, 4, cfg.max_denom), cfg.max_denom));
    let params = EngineParams { m: cfg.m, max_denom: cfg.max_denom, seed: cfg.seed, ..EngineParams::default() };
    (cat, params)
}

/// `4·(2⁻ᵐ + 1/max_denom)`.
pub fn audit_threshold(m: u32, max_denom: u32) -> Q {
    rational::int(4) * (grid_constant(m) - one() + rational::frac(1, i64::from(max_denom)))
}

/// Builds the stages over the scalar field and audits every ledger item
/// against its catalog arrow, in every stage from its own onwards.
fn engine_suite(cfg: &SuiteConfig) -> Result<Vec<InstanceReport>, SuiteError> {
    let eps = cfg.eps_at(0)?.clone();
    let (cat, params) = engine_setup(cfg);
    let mut history: Vec<ConstructionState> = vec![init(&NormedSpace::real(), cat, params)];
    let mut out = Vec::new();
    for n in 0..cfg.steps {
        match history[n].step() {
            Ok(next) => {
                let mut cert = next.steps[n].certificate.clone();
                match next.check_composites() {
                    Ok(c) => cert.absorb("composites", c),
                    Err(e) => {
                        cert.flag(format!("composites: {e}"), false);
                    }
                }
                let input = json!({ "stage dim": next.stages[n + 1].dim(), "items": next.steps[n].items });
                out.push(InstanceReport { index: out.len(), kind: format!("step {n}"), input, certificate: cert, error: None });
                history.push(next);
            }
            Err(e) => {
                out.push(InstanceReport { index: out.len(), kind: format!("step {n}"), input: Value::Null, certificate: Certificate::new(), error: Some(e.to_string()) });
                break;
            }
        }
    }
    let last = history.last().expect("initial state").clone();
    let threshold = audit_threshold(cfg.m, cfg.max_denom);
    let (alpha, gamma) = audit_class_bound(&eps);
    for (idx, item) in last.ledger.iter().enumerate() {
        let target = last.catalog.entries[item.entry].arrow.clone();
        let mut cert = Certificate::new();
        let mut previous: Option<Q> = None;
        let mut error = None;
        for (n, state) in history.iter().enumerate().skip(item.step + 1) {
            let report = match audit_extension(state, &target, &item.arrow, item.stage, &eps) {
                Ok(r) => r,
                Err(e) => {
                    error = Some(format!("stage {n}: {e}"));
                    break;
                }
            };
            let worst = report.defect_fwd.clone().max(report.defect_back.clone());
            if let (Some(p), Some(w)) = (&previous, &worst) {
                cert.le(format!("monotone at {n}"), w.clone(), p.clone());
            }
            previous = worst.or(previous);
            if n + 1 < history.len() {
                continue;
            }
            cert.absorb("audit", report.certificate.clone());
            cert.flag("outcome success", report.outcome == AuditOutcome::Success);
            match (&report.defect_fwd, &report.defect_back, &report.class) {
                (Some(df), Some(db), Some(cls)) => {
                    cert.le("defect_fwd", df.clone(), threshold.clone());
                    cert.le("defect_back", db.clone(), threshold.clone());
                    let bound = ArrowClass::new(alpha.clone(), rational::zero(), gamma.clone().unwrap_or_else(|| cls.gamma.clone()), false);
                    cert.flag("class within (1+7eps, 0, (1+7eps)/(1-7eps))", gamma.is_some() && cls.within(&bound));
                }
                _ => {
                    cert.flag("extension found", false);
                }
            }
        }
        let input = json!({ "ledger": idx, "stage": item.stage, "entry": item.entry, "probe": json::arrow(&item.arrow) });
        out.push(InstanceReport { index: out.len(), kind: format!("audit {idx}"), input, certificate: cert, error });
    }
    Ok(out)
}
