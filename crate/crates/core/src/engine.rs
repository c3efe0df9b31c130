//! Finite stages of the iterated push-out construction, the extension audit,
//! skeleton bookkeeping and the computable rounds of the approximation
//! argument.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::arrows::{compose, exactify_projection, perturb_projection, ArrowClass, DoubleArrow, Operator};
use crate::catalog::{arrow_grid_with, match_arrow_all, ArrowCatalog, ArrowMatch, Limits};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::lp;
use crate::matrix::Matrix;
use crate::pushout::{correction_double, multi_pushout_extension, CorrectionDouble, MultiExtension};
use crate::rational::{self, Q, Vector};
use crate::spaces::{direct_sum, NormedSpace, SumKind};

/// Parameters of a construction run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineParams {
    /// Grid resolution: grid arrows are `(1+2⁻ᵐ, 0, 1+2⁻ᵐ)`.
    pub m: u32,
    pub max_denom: u32,
    pub seed: u64,
    /// New ledger items accepted per step.
    pub max_entries: usize,
    /// Largest stage dimension a step may produce.
    pub max_dim: usize,
    pub limits: Limits,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams { m: 3, max_denom: 4, seed: 0, max_entries: 2, max_dim: 6, limits: Limits::default() }
    }
}

/// A processed pair `d_{k,j}`: catalog entry `u` and grid arrow `F_u ↔ P_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerItem {
    /// `k`: the stage the grid arrow maps into.
    pub stage: usize,
    /// `j`: one-based position in the enumeration of arrows into `P_k`.
    pub index: usize,
    pub entry: usize,
    /// Position of the arrow in `arrow_grid(F_u, P_k)`.
    pub grid: usize,
    pub arrow: DoubleArrow,
    /// The step that pushed this item out, producing `P_{step+1}`.
    pub step: usize,
}

/// What one step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// Ledger indices pushed out, in summand order.
    pub items: Vec<usize>,
    /// Pairs `(k, j)` dropped by the budget.
    pub skipped: Vec<(usize, usize)>,
    /// `ℓ₁(G_u) → P_{n+1}` induced by the step's push-out; absent for an
    /// empty step.
    pub amalgam: Option<Operator>,
    pub certificate: Certificate,
}

/// The chain `P₀ ⊂ P₁ ⊂ …` with its `(1,0,1)` inclusions and ledger.
#[derive(Clone, Debug)]
pub struct ConstructionState {
    pub stages: Vec<NormedSpace>,
    /// `(u_k, U_k): P_k ↔ P_{k+1}`.
    pub inclusions: Vec<DoubleArrow>,
    pub ledger: Vec<LedgerItem>,
    pub steps: Vec<StepRecord>,
    pub catalog: Arc<ArrowCatalog>,
    pub params: EngineParams,
}

/// `P₀ = X` with an empty ledger.
pub fn init(x: &NormedSpace, catalog: Arc<ArrowCatalog>, params: EngineParams) -> ConstructionState {
    ConstructionState {
        stages: Vec::from([x.relabel("P0")]),
        inclusions: Vec::new(),
        ledger: Vec::new(),
        steps: Vec::new(),
        catalog,
        params,
    }
}

/// `⊕₁` of arrows, fixed left-to-right association.
fn l1_sum(arrows: &[&DoubleArrow]) -> Result<DoubleArrow> {
    let (first, rest) = arrows.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = (*first).clone();
    for d in rest {
        let source = direct_sum(acc.source(), d.source(), SumKind::L1)?;
        let target = direct_sum(acc.target(), d.target(), SumKind::L1)?;
        let fwd = acc.fwd.matrix().block_diag(d.fwd.matrix());
        let back = acc.back.matrix().block_diag(d.back.matrix());
        acc = DoubleArrow::from_matrices(&source, &target, fwd, back)?;
    }
    Ok(acc)
}

/// `Σ dₜ: ℓ₁(F) → X` for forward maps into a common `X`.
fn operator_sum(source: &NormedSpace, maps: &[&Operator]) -> Result<Operator> {
    let target = maps.first().ok_or(Error::EmptyInput)?.codomain().clone();
    let mut m = maps[0].matrix().clone();
    for t in &maps[1..] {
        m = m.hstack(t.matrix());
    }
    Operator::new(source.clone(), target, m)
}

impl ConstructionState {
    pub fn last(&self) -> usize {
        self.stages.len() - 1
    }

    /// Ledger `I_n`: items pushed out before `P_n` was formed.
    pub fn ledger_at(&self, n: usize) -> impl Iterator<Item = &LedgerItem> {
        self.ledger.iter().filter(move |item| item.step < n)
    }

    /// `(u_{k−1}⋯u_j, U_j⋯U_{k−1}): P_j ↔ P_k` for `j ≤ k`.
    pub fn chain(&self, j: usize, k: usize) -> Result<DoubleArrow> {
        if j > k || k > self.last() {
            return Err(Error::Invalid(format!("no chain from stage {j} to stage {k}")));
        }
        let mut acc = DoubleArrow::identity(&self.stages[j]);
        for link in &self.inclusions[j..k] {
            acc = compose(&acc, link)?;
        }
        Ok(acc)
    }

    /// The inclusion `P_j → P_k` when `j ≤ k`, the projection otherwise.
    pub fn transport(&self, j: usize, k: usize) -> Result<Operator> {
        if j <= k {
            Ok(self.chain(j, k)?.fwd)
        } else {
            Ok(self.chain(k, j)?.back)
        }
    }

    /// Grid arrows `F → P_k` for each distinct catalog source, cached.
    fn grid<'a>(&self, cache: &'a mut BTreeMap<(usize, usize), Vec<DoubleArrow>>, source: usize, k: usize) -> &'a [DoubleArrow] {
        cache.entry((source, k)).or_insert_with(|| {
            let p = &self.params;
            arrow_grid_with(&self.catalog.spaces[source], &self.stages[k], p.m, p.max_denom, &p.limits)
        })
    }

    /// `d_{k,j}` (zero-based `j`): pairs `(entry e, grid g)` enumerated along
    /// diagonals `e + g = s`, then by `e`.
    fn enumerate(&self, cache: &mut BTreeMap<(usize, usize), Vec<DoubleArrow>>, k: usize, j: usize) -> Option<(usize, usize, DoubleArrow)> {
        let entries = &self.catalog.entries;
        let lens: Vec<usize> = entries.iter().map(|e| self.grid(cache, e.source, k).len()).collect();
        let total: usize = lens.iter().sum();
        if j >= total {
            return None;
        }
        let mut seen = 0;
        for s in 0.. {
            for (e, len) in lens.iter().enumerate().take(s + 1) {
                let g = s - e;
                if g < *len {
                    if seen == j {
                        let arrow = self.grid(cache, entries[e].source, k)[g].clone();
                        return Some((e, g, arrow));
                    }
                    seen += 1;
                }
            }
        }
        None
    }

    /// Forms `P_{n+1}` from the new pairs `d_{i, n+1−i}`, `i = 0..=n`, within
    /// the budget, and certifies `(u_n, U_n)` and every composite into it as
    /// `(1,0,1)`.
    pub fn step(&self) -> Result<ConstructionState> {
        let n = self.last();
        let mut cache = BTreeMap::new();
        let mut next = self.clone();
        let mut items = Vec::new();
        let mut skipped = Vec::new();
        let mut dim = self.stages[n].dim();
        for i in 0..=n {
            let j = n + 1 - i;
            let Some((e, g, arrow)) = self.enumerate(&mut cache, i, j - 1) else { continue };
            let entry = &self.catalog.entries[e];
            let grow = entry.arrow.target().dim() - entry.arrow.source().dim();
            if items.len() >= self.params.max_entries || dim + grow > self.params.max_dim {
                skipped.push((i, j));
                continue;
            }
            dim += grow;
            items.push(LedgerItem { stage: i, index: j, entry: e, grid: g, arrow, step: n });
        }
        let mut cert = Certificate::new();
        let label = format!("P{}", n + 1);
        let base = next.ledger.len();
        if items.is_empty() {
            next.stages.push(self.stages[n].relabel(label));
            let p = &next.stages[n + 1];
            let id = Operator::identity(p);
            next.inclusions.push(DoubleArrow::new(id.retarget(&self.stages[n], p)?, id.retarget(p, &self.stages[n])?)?);
            next.steps.push(StepRecord { items: Vec::new(), skipped, amalgam: None, certificate: cert });
            return Ok(next);
        }
        let into_n: Vec<DoubleArrow> = items.iter().map(|it| self.carry_to_stage(&it.arrow, it.stage, n)).collect::<Result<_>>()?;
        let order: Vec<usize> = (0..items.len()).collect();
        let multi = self.extension_data(&items, &into_n, &order)?;
        cert.absorb("extension", multi.certificate.clone());
        let po = multi.main.po.relabel(label);
        let fwd = multi.po_arrow.fwd.retarget(&self.stages[n], &po)?;
        let back = multi.po_arrow.back.retarget(&po, &self.stages[n])?;
        let inclusion_arrow = DoubleArrow::new(fwd, back)?;
        cert.flag("(u_n, U_n) is (1,0,1)", inclusion_arrow.classify()?.is_double());
        let grow: usize = items.iter().map(|it| {
            let u = &self.catalog.entries[it.entry].arrow;
            u.target().dim() - u.source().dim()
        }).sum();
        cert.equals("dim P_{n+1} - dim P_n", Q::from_integer((po.dim() - self.stages[n].dim()).into()), Q::from_integer(grow.into()));
        let amalgam = multi.main.j_prime.retarget(multi.main.j_prime.domain(), &po)?;
        next.stages.push(po);
        next.inclusions.push(inclusion_arrow);
        for j in 0..=n {
            let composite = next.chain(j, n + 1)?;
            cert.flag(format!("P{j} -> P{} is (1,0,1)", n + 1), composite.classify()?.is_double());
        }
        let indices = (base..base + items.len()).collect();
        next.ledger.extend(items);
        next.steps.push(StepRecord { items: indices, skipped, amalgam: Some(amalgam), certificate: cert });
        Ok(next)
    }

    /// `d: F ↔ P_k` composed with the chain into `P_n`.
    fn carry_to_stage(&self, d: &DoubleArrow, k: usize, n: usize) -> Result<DoubleArrow> {
        compose(d, &self.chain(k, n)?)
    }

    /// The multiple push-out of the catalog arrows of `items` (first factor
    /// `order[0]`, the rest summed in `order`) against their grid arrows.
    fn extension_data(&self, items: &[LedgerItem], into_n: &[DoubleArrow], order: &[usize]) -> Result<MultiExtension> {
        let entries = &self.catalog.entries;
        let first = order[0];
        let u0 = &entries[items[first].entry].arrow;
        if order.len() == 1 {
            return multi_pushout_extension(u0, None, &into_n[first]);
        }
        let rest_u: Vec<&DoubleArrow> = order[1..].iter().map(|&t| &entries[items[t].entry].arrow).collect();
        let rest_sum = l1_sum(&rest_u)?;
        let rest_d: Vec<&Operator> = order[1..].iter().map(|&t| &into_n[t].fwd).collect();
        let j2 = operator_sum(rest_sum.source(), &rest_d)?;
        multi_pushout_extension(u0, Some((&rest_sum, &j2)), &into_n[first])
    }

    /// The extension `G_u ↔ P_{s+1}` of ledger item `index` pushed out at
    /// step `s`, through the push-out with that item as first factor, mapped
    /// onto `P_{s+1}` by the induced isometry.
    pub fn item_extension(&self, index: usize) -> Result<(DoubleArrow, Certificate)> {
        let item = self.ledger.get(index).ok_or_else(|| Error::Invalid(format!("no ledger item {index}")))?;
        let s = item.step;
        let record = &self.steps[s];
        let t = record.items.iter().position(|&i| i == index).expect("ledger item belongs to its step");
        let items: Vec<LedgerItem> = record.items.iter().map(|&i| self.ledger[i].clone()).collect();
        let into_n: Vec<DoubleArrow> = items.iter().map(|it| self.carry_to_stage(&it.arrow, it.stage, s)).collect::<Result<_>>()?;
        let mut order = Vec::from([t]);
        order.extend((0..items.len()).filter(|&i| i != t));
        let multi = self.extension_data(&items, &into_n, &order)?;
        let mut cert = Certificate::new();
        cert.absorb("extension", multi.certificate.clone());
        let target = &self.stages[s + 1];
        let amalgam = record.amalgam.as_ref().expect("nonempty step");
        let sizes: Vec<usize> = items.iter().map(|it| self.catalog.entries[it.entry].arrow.target().dim()).collect();
        let perm = block_permutation(&sizes, &order);
        let j2 = Operator::new(multi.main.j_prime.domain().clone(), target.clone(), amalgam.matrix().mul(&perm))?;
        let i2 = self.inclusions[s].fwd.clone();
        let (phi, c) = multi.main.factor(&j2, &i2)?;
        cert.absorb("induced map", c);
        cert.flag("induced map is an onto isometry", phi.is_onto_isometry());
        let phi_inv = Operator::new(target.clone(), multi.main.po.clone(), phi.matrix().inverse()?)?;
        let ext = DoubleArrow::new(phi.after(&multi.j_b1.fwd)?, multi.j_b1.back.after(&phi_inv)?)?;
        Ok((ext, cert))
    }

    /// Every composite `P_j ↔ P_k`, `j < k`, classified `(1,0,1)`.
    pub fn check_composites(&self) -> Result<Certificate> {
        let mut cert = Certificate::new();
        for k in 1..=self.last() {
            for j in 0..k {
                cert.flag(format!("P{j} -> P{k} is (1,0,1)"), self.chain(j, k)?.classify()?.is_double());
            }
        }
        Ok(cert)
    }
}

/// Maps coordinates of blocks listed in `order` to the natural block order.
fn block_permutation(sizes: &[usize], order: &[usize]) -> Matrix {
    let total: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, s| {
        let o = *acc;
        *acc += s;
        Some(o)
    }).collect();
    let mut m = Matrix::zeros(total, total);
    let mut col = 0;
    for &b in order {
        for r in 0..sizes[b] {
            m[(offsets[b] + r, col + r)] = Q::one();
        }
        col += sizes[b];
    }
    m
}

/// How an audit ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditOutcome {
    /// Both defects within `4ε` and the extension class within bounds.
    Success,
    /// Candidates exist, but the best misses a bound.
    InsufficientResolution,
    /// No ledger item carries the matched catalog arrow yet.
    InsufficientStages,
}

/// Result of replaying the extension argument against the built stages.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub target: DoubleArrow,
    pub probe: DoubleArrow,
    pub probe_stage: usize,
    pub eps: Q,
    pub matched: Option<ArrowMatch>,
    /// Ledger item used as grid hit.
    pub item: Option<usize>,
    /// `ε′`: distance from the rescaled probe to the grid hit.
    pub grid_defect: Option<Q>,
    /// Stage `m` holding the extension.
    pub stage: Option<usize>,
    /// `(f_m, f̄_m): G ↔ P_m`.
    pub extension: Option<DoubleArrow>,
    /// `‖f_m δ − f‖`, compared in the later of `P_m`, `P_k`.
    pub defect_fwd: Option<Q>,
    /// `‖δ̄ f̄_m − f̄‖` on `P_{m−1}`.
    pub defect_back: Option<Q>,
    pub class: Option<ArrowClass>,
    pub outcome: AuditOutcome,
    pub certificate: Certificate,
}

/// The class `(1+7ε, 0, (1+7ε)/(1−7ε))`; the last bound is infinite for
/// `7ε ≥ 1`, reported as `None`.
pub fn audit_class_bound(eps: &Q) -> (Q, Option<Q>) {
    let seven = eps * rational::int(7);
    let alpha = Q::one() + &seven;
    let gamma = (seven < Q::one()).then(|| &alpha / (Q::one() - &seven));
    (alpha, gamma)
}

/// Replays the extension argument: perturbation and rescaling of the probe,
/// catalog match of the target, grid hit in the ledger, extension through
/// the recorded push-out. Among all matches and ledger items, the one with
/// the least larger defect is reported.
pub fn audit_extension(state: &ConstructionState, target: &DoubleArrow, probe: &DoubleArrow, probe_stage: usize, eps: &Q) -> Result<AuditReport> {
    if probe_stage > state.last() || probe.target() != &state.stages[probe_stage] {
        return Err(Error::SpaceMismatch("probe must map into the named stage"));
    }
    if probe.source() != target.source() {
        return Err(Error::SpaceMismatch("probe and target need a common source"));
    }
    let mut cert = Certificate::new();
    let one = Q::one();
    let k = probe_stage;
    let stage_k = &state.stages[k];

    // Perturbation into the stage and rescaling.
    let (exact, c) = exactify_projection(probe, eps)?;
    cert.absorb("exactify", c);
    let f = &exact.fwd;
    let n = f.domain().dim();
    let a_basis = f.matrix().col_vectors();
    let perturbed = perturb_projection(stage_k, &a_basis, &exact.back, &a_basis, eps)?;
    cert.absorb("perturb", perturbed.certificate.clone());
    let p_onto = Operator::new(stage_k.clone(), f.domain().clone(), perturbed.p_prime_onto.matrix().clone())?;
    let back_p = Operator::new(stage_k.clone(), f.domain().clone(), exact.back.matrix().mul(f.matrix()).mul(p_onto.matrix()))?;
    let rescaled = if f.norm() <= &one {
        DoubleArrow::new(f.clone(), back_p)?
    } else {
        let s = &one + eps;
        DoubleArrow::new(f.scale(&s.recip()), back_p.scale(&s))?
    };
    cert.info("probe dim", Q::from_integer(n.into()));

    // Catalog matches.
    let matches = match_arrow_all(target, &state.catalog, eps);
    if matches.is_empty() {
        return Err(Error::NoCatalogMatch);
    }
    let (alpha_bound, gamma_bound) = audit_class_bound(eps);
    let mut best: Option<Candidate> = None;
    let mut extensions: BTreeMap<usize, (DoubleArrow, Certificate)> = BTreeMap::new();
    for m in &matches {
        let a_inv = Operator::new(m.a.codomain().clone(), m.a.domain().clone(), m.a.matrix().inverse()?)?;
        let b_inv = Operator::new(m.b.codomain().clone(), m.b.domain().clone(), m.b.matrix().inverse()?)?;
        let g_fwd = rescaled.fwd.after(&m.a)?;
        let g_back = a_inv.after(&rescaled.back)?;
        for (idx, item) in state.ledger.iter().enumerate() {
            if item.entry != m.entry {
                continue;
            }
            let kk = k.max(item.stage);
            let grid_fwd = state.transport(item.stage, kk)?.after(&item.arrow.fwd)?.distance(&state.transport(k, kk)?.after(&g_fwd)?)?;
            let grid_back = item.arrow.back.after(&state.transport(kk, item.stage)?)?.distance(&g_back.after(&state.transport(kk, k)?)?)?;
            if let alloc::collections::btree_map::Entry::Vacant(slot) = extensions.entry(idx) {
                slot.insert(state.item_extension(idx)?);
            }
            let (ext, _) = &extensions[&idx];
            let stage = item.step + 1;
            let final_fwd = ext.fwd.after(&b_inv)?;
            let final_back = m.b.after(&ext.back)?;
            let out = DoubleArrow::new(final_fwd, final_back)?;
            let top = stage.max(k);
            let lhs = state.transport(stage, top)?.after(&out.fwd)?.after(&target.fwd)?;
            let rhs = state.transport(k, top)?.after(&probe.fwd)?;
            let defect_fwd = lhs.distance(&rhs)?;
            let below = stage - 1;
            let lhs = target.back.after(&out.back)?.after(&state.transport(below, stage)?)?;
            let rhs = probe.back.after(&state.transport(below, k)?)?;
            let defect_back = lhs.distance(&rhs)?;
            let class = out.classify()?;
            let cand = Candidate {
                score: defect_fwd.clone().max(defect_back.clone()),
                matched: m.clone(),
                item: idx,
                grid_defect: grid_fwd.max(grid_back),
                stage,
                extension: out,
                defect_fwd,
                defect_back,
                class,
            };
            if best.as_ref().is_none_or(|b| cand.score < b.score) {
                best = Some(cand);
            }
        }
    }
    let Some(best) = best else {
        return Ok(AuditReport {
            target: target.clone(),
            probe: probe.clone(),
            probe_stage,
            eps: eps.clone(),
            matched: matches.into_iter().next(),
            item: None,
            grid_defect: None,
            stage: None,
            extension: None,
            defect_fwd: None,
            defect_back: None,
            class: None,
            outcome: AuditOutcome::InsufficientStages,
            certificate: cert,
        });
    };
    let (_, ext_cert) = extensions.remove(&best.item).expect("computed above");
    cert.absorb("item extension", ext_cert);
    let four = eps * rational::int(4);
    let fwd_ok = cert.le("|f_m delta - f|", best.defect_fwd.clone(), four.clone());
    let back_ok = cert.le("|deltabar fbar_m - fbar| on P_{m-1}", best.defect_back.clone(), four);
    let alpha_ok = cert.le("class.alpha", best.class.alpha.clone(), alpha_bound);
    let beta_ok = cert.equals("class.beta", best.class.beta.clone(), Q::zero());
    let gamma_ok = match gamma_bound {
        Some(g) => cert.le("class.gamma", best.class.gamma.clone(), g),
        None => true,
    };
    cert.info("grid defect", best.grid_defect.clone());
    cert.info("match distortion", best.matched.distortion.clone());
    let outcome = if fwd_ok && back_ok && alpha_ok && beta_ok && gamma_ok {
        AuditOutcome::Success
    } else {
        AuditOutcome::InsufficientResolution
    };
    Ok(AuditReport {
        target: target.clone(),
        probe: probe.clone(),
        probe_stage,
        eps: eps.clone(),
        matched: Some(best.matched),
        item: Some(best.item),
        grid_defect: Some(best.grid_defect),
        stage: Some(best.stage),
        extension: Some(best.extension),
        defect_fwd: Some(best.defect_fwd),
        defect_back: Some(best.defect_back),
        class: Some(best.class),
        outcome,
        certificate: cert,
    })
}

struct Candidate {
    score: Q,
    matched: ArrowMatch,
    item: usize,
    grid_defect: Q,
    stage: usize,
    extension: DoubleArrow,
    defect_fwd: Q,
    defect_back: Q,
    class: ArrowClass,
}

/// Composite projections of a chain of `(1,0,1)`-arrows `E_k ↔ E_{k+1}`.
#[derive(Clone, Debug)]
pub struct SkeletonReport {
    /// `‖P_k‖` for `k = 0..=n`, where `P_k: E_n → E_k`.
    pub norms: Vec<Q>,
    pub certificate: Certificate,
}

/// Checks that every composite back map `E_n → E_k` has norm one and fixes
/// `E_k` exactly.
pub fn skeleton_check(chain: &[DoubleArrow]) -> Result<SkeletonReport> {
    for (k, link) in chain.iter().enumerate() {
        if !link.classify()?.is_double() {
            return Err(Error::CertificateMismatch(format!("link {k} is not a (1,0,1)-arrow")));
        }
        if k > 0 && chain[k - 1].target() != link.source() {
            return Err(Error::SpaceMismatch("chain links do not compose"));
        }
    }
    let n = chain.len();
    let mut cert = Certificate::new();
    let mut norms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = match chain.get(k) {
            Some(link) => DoubleArrow::identity(link.source()),
            None if n > 0 => DoubleArrow::identity(chain[n - 1].target()),
            None => {
                norms.push(Q::one());
                continue;
            }
        };
        for link in &chain[k..] {
            acc = compose(&acc, link)?;
        }
        let norm = acc.back.norm().clone();
        cert.equals(format!("|P_{k}|"), norm.clone(), Q::one());
        cert.identity(format!("P_{k} fixes E_{k}"), &acc.back.matrix().mul(acc.fwd.matrix()), &Matrix::identity(acc.source().dim()));
        norms.push(norm);
    }
    Ok(SkeletonReport { norms, certificate: cert })
}

/// Rounds (i) and (ii) of the approximation argument for one arrow.
#[derive(Clone, Debug)]
pub struct ApproxRound {
    /// The stage `E_n = span(stage_basis)` in basis coordinates.
    pub stage: NormedSpace,
    /// `(f₁, f̄₁): F ↔ E_n`.
    pub f1: DoubleArrow,
    pub correction: CorrectionDouble,
    /// `G₁`.
    pub g1: NormedSpace,
    /// `(i₁, π₁): F ↔ G₁`.
    pub first: DoubleArrow,
    /// `(i₂, π₂): E_n ↔ G₁`.
    pub second: DoubleArrow,
    pub certificate: Certificate,
}

/// Perturbs a contractive `(1+ε, ε, 1)`-arrow `F ↔ E` into the stage
/// spanned by `stage_basis`, rescales it and corrects it through the
/// correction space at `6ε`.
pub fn approx_round(f_arrow: &DoubleArrow, stage_basis: &[Vector], eps: &Q) -> Result<ApproxRound> {
    let one = Q::one();
    if !(eps.is_positive() && *eps < rational::frac(1, 3)) {
        return Err(Error::Hypothesis(format!("need 0 < eps < 1/3, got {eps}")));
    }
    let cls = f_arrow.classify()?;
    if !cls.within(&ArrowClass::new(&one + eps, eps.clone(), one.clone(), true)) {
        return Err(Error::Hypothesis(format!("arrow class {cls:?} is not a contractive (1+eps, eps, 1) class")));
    }
    let e = f_arrow.target();
    let f = &f_arrow.fwd;
    let f_bar = &f_arrow.back;
    let stage = e.section(stage_basis, "E_n")?;
    let s = Matrix::from_cols(stage_basis, e.dim())?;
    let i_n = Operator::new(stage.clone(), e.clone(), s.clone())?;
    let mut cert = Certificate::new();

    let (exact, c) = exactify_projection(f_arrow, eps)?;
    cert.absorb("exactify", c);
    let a_basis = f.matrix().col_vectors();
    let mut x = Vec::with_capacity(a_basis.len());
    let mut x_coords = Vec::with_capacity(a_basis.len());
    for a in &a_basis {
        let (_, coeffs) = lp::nearest_in_span(e.vertices(), stage_basis, a)
            .ok_or_else(|| Error::Invalid("nearest point program failed".into()))?;
        x.push(s.apply(&coeffs));
        x_coords.push(coeffs);
    }
    let perturbed = perturb_projection(e, &a_basis, &exact.back, &x, eps)?;
    cert.absorb("perturb", perturbed.certificate.clone());

    let shrink = (&one + eps * rational::int(3)).recip();
    let x_n = Matrix::from_cols(&x_coords, stage.dim())?;
    let f1 = Operator::new(f.domain().clone(), stage.clone(), x_n.scale(&shrink))?;
    let back = f_bar.matrix().mul(f.matrix()).mul(perturbed.p_prime_onto.matrix()).mul(&s).scale(&shrink);
    let f1_bar = Operator::new(stage.clone(), f.domain().clone(), back)?;
    let f1_arrow = DoubleArrow::new(f1, f1_bar)?;
    let four = eps * rational::int(4);
    cert.le("|f - f1|", f.distance(&i_n.after(&f1_arrow.fwd)?)?, four.clone());
    cert.le("|fbar - fbar1| on E_n", f_bar.after(&i_n)?.distance(&f1_arrow.back)?, four);
    let six = eps * rational::int(6);
    let class1 = f1_arrow.classify()?;
    class1.certify_within(&mut cert, "(f1, fbar1)", &ArrowClass::new(&one + &six, six.clone(), one.clone(), true));

    let correction = correction_double(&f1_arrow, &six)?;
    cert.absorb("correction", correction.certificate.clone());
    let (first, second) = (correction.di.clone(), correction.dj.clone());
    cert.identity("pi1 i2 = fbar1", first.back.after(&second.fwd)?.matrix(), f1_arrow.back.matrix());
    cert.identity("pi2 i1 = f1", second.back.after(&first.fwd)?.matrix(), f1_arrow.fwd.matrix());
    cert.flag("(i1, pi1) is (1,0,1)", first.classify()?.is_double());
    cert.flag("(i2, pi2) is (1,0,1)", second.classify()?.is_double());
    cert.le("6eps-commutativity", correction.commutativity.clone(), six);
    let g1 = correction.space.e.clone();
    Ok(ApproxRound { stage, f1: f1_arrow, correction, g1, first, second, certificate: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gen_double_arrows, norming_arrow, norming_pairs};
    use crate::rational::{frac, int};
    use alloc::vec;

    fn coordinate(sign: i64) -> DoubleArrow {
        let fwd = Matrix::from_fn(2, 1, |r, _| if r == 0 { int(sign) } else { int(0) });
        DoubleArrow::from_matrices(&NormedSpace::real(), &NormedSpace::l1(2), fwd.clone(), fwd.transpose()).unwrap()
    }

    #[test]
    fn identity_chain_and_coordinate_chain() {
        let r = NormedSpace::real();
        let ids = [DoubleArrow::identity(&r), DoubleArrow::identity(&r)];
        let report = skeleton_check(&ids).unwrap();
        assert!(report.certificate.all_hold());
        let l13 = NormedSpace::l1(3);
        let up = Matrix::from_fn(3, 2, |row, c| if row == c { int(1) } else { int(0) });
        let second = DoubleArrow::from_matrices(&NormedSpace::l1(2), &l13, up.clone(), up.transpose()).unwrap();
        let report = skeleton_check(&[coordinate(1), second]).unwrap();
        assert!(report.certificate.all_hold());
        assert_eq!(report.norms, vec![int(1), int(1), int(1)]);
    }

    #[test]
    fn skeleton_rejects_a_bad_link() {
        let r = NormedSpace::real();
        let half = DoubleArrow::from_matrices(&r, &r, Matrix::identity(1), Matrix::identity(1).scale(&frac(1, 2))).unwrap();
        assert!(matches!(skeleton_check(&[half]), Err(Error::CertificateMismatch(_))));
    }

    fn small_state() -> ConstructionState {
        let spaces = [NormedSpace::real(), NormedSpace::l1(2)];
        let cat = Arc::new(gen_double_arrows(&spaces, 2));
        init(&NormedSpace::real(), cat, EngineParams { max_denom: 2, ..EngineParams::default() })
    }

    #[test]
    fn steps_keep_every_composite_double() {
        let mut state = small_state();
        for _ in 0..3 {
            state = state.step().unwrap();
            let record = state.steps.last().unwrap();
            assert!(record.certificate.get("(u_n, U_n) is (1,0,1)").is_none_or(|c| c.holds));
        }
        assert!(state.check_composites().unwrap().all_hold());
        assert_eq!(state.stages.len(), 4);
    }

    #[test]
    fn ledger_items_audit_against_their_own_entry() {
        let mut state = small_state();
        for _ in 0..3 {
            state = state.step().unwrap();
        }
        let eps = frac(1, 8);
        for item in state.ledger.clone() {
            let target = state.catalog.entries[item.entry].arrow.clone();
            let report = audit_extension(&state, &target, &item.arrow, item.stage, &eps).unwrap();
            assert_eq!(report.outcome, AuditOutcome::Success, "{:?}", report.certificate.failures().collect::<Vec<_>>());
            assert!(report.defect_fwd.unwrap().is_zero() && report.defect_back.unwrap().is_zero());
        }
    }

    #[test]
    fn empty_step_keeps_the_stage() {
        let cat = Arc::new(gen_double_arrows(&[NormedSpace::real()], 1));
        let state = init(&NormedSpace::real(), cat, EngineParams { max_entries: 0, ..EngineParams::default() });
        let next = state.step().unwrap();
        assert_eq!(next.stages[1], next.stages[0]);
        assert!(next.inclusions[0].fwd.matrix().is_identity());
    }

    #[test]
    fn approx_round_on_an_exact_arrow() {
        let linf = NormedSpace::linf(2);
        let (u, phi) = norming_pairs(&linf)[0].clone();
        let d = norming_arrow(&linf, &u, &phi).unwrap();
        let basis = vec![rational::unit(2, 0), rational::unit(2, 1)];
        let out = approx_round(&d, &basis, &frac(1, 10)).unwrap();
        assert!(out.certificate.get("pi1 i2 = fbar1").unwrap().holds);
        assert!(out.certificate.get("pi2 i1 = f1").unwrap().holds);
        assert!(out.certificate.get("|f - f1|").unwrap().holds);
    }
}
