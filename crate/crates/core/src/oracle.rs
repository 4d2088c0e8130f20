//! Independent brute-force recomputation of every pipeline quantity on
//! small instances, plus batch lemma-conformance testing on seeded random
//! instances.
//!
//! The oracle shares only the group kernel with the pipeline. Packing
//! indices are recomputed by exhausting disjoint center subsets with no
//! deduplication and no bounds, and the whole minimization is re-run with
//! plain nested loops, so a bug in the branch-and-bound layer or in the
//! pipeline bookkeeping shows up as a field mismatch.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::{
    commensurability, family_validate, minimal_doubling, product_commensurability_witness,
    xx_intersection_witness, Family,
};
use crate::covering::{
    check_cover_bound, covering_number, maximal_disjoint_family, SearchLimits,
};
use crate::error::{Error, Result};
use crate::group::{enumerate_subgroups, FiniteGroup, GroupSubset};
use crate::io::{instance_from_parts, InstanceFile};
use crate::pipeline::{n_z_constant, run_pipeline, PipelineConfig, PipelineResult};

/// Hard cap on family size for `oracle_core`.
pub const ORACLE_FAMILY_CAP: usize = 4;
/// Hard cap on group order for `oracle_core`.
pub const ORACLE_ORDER_CAP: usize = 24;

pub const LEMMA_LABELS: [&str; 9] = [
    "lem-prodcom",
    "lem-cover",
    "lem-xx",
    "lem-key",
    "lem-N(Z)",
    "lem-intersec",
    "lem-NZ",
    "lem-I",
    "lem-chain",
];

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PipelineScalars {
    pub m: usize,
    pub k0: u32,
    pub n0: usize,
    pub m_prime: usize,
    pub n2: usize,
    pub h: Vec<usize>,
    pub h_prime: Vec<usize>,
}

impl PipelineScalars {
    fn of_result(res: &PipelineResult) -> Self {
        PipelineScalars {
            m: res.m,
            k0: res.k0,
            n0: res.n0,
            m_prime: res.m_prime,
            n2: res.n2,
            h: res.h.to_vec(),
            h_prime: res.h_prime.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleReport {
    pub instance_digest: String,
    pub recomputed: Option<PipelineScalars>,
    pub pipeline: Option<PipelineScalars>,
    pub matches: Option<BTreeMap<String, bool>>,
    pub lemma_tallies: BTreeMap<String, Tally>,
    pub h_prime_is_subgroup: Option<bool>,
}

// ---------------------------------------------------------------------------
// naive recomputation
// ---------------------------------------------------------------------------

/// Packing index by exhausting all pairwise-disjoint center subsets, one
/// center at a time in increasing index order. No deduplication, no bounds.
fn naive_packing_index(x: &GroupSubset, y: &GroupSubset) -> usize {
    let translates: Vec<GroupSubset> = x.iter().map(|c| y.left_translate(c)).collect();
    fn extend(translates: &[GroupSubset], start: usize, chosen: &mut Vec<usize>) -> usize {
        let mut best = chosen.len();
        for i in start..translates.len() {
            if chosen.iter().all(|&j| !translates[j].intersects(&translates[i])) {
                chosen.push(i);
                best = best.max(extend(translates, i + 1, chosen));
                chosen.pop();
            }
        }
        best
    }
    extend(&translates, 0, &mut Vec::new())
}

struct NaiveStrong {
    mask: u64,
    terms: usize,
    n_set: GroupSubset,
}

/// The entire construction, stage by stage, with plain loops over all
/// formal unions.
fn naive_scalars(group: &Arc<FiniteGroup>, carriers: &[GroupSubset]) -> Result<PipelineScalars> {
    let squares: Vec<GroupSubset> = carriers
        .iter()
        .map(|c| c.product(c))
        .collect::<Result<_>>()?;
    let count = squares.len();

    // per-candidate minimal profile value and the first level attaining it
    let mut evals: Vec<(u32, usize)> = Vec::new();
    for mask in 1u64..(1u64 << count) {
        let mut z = GroupSubset::empty(group);
        for (i, sq) in squares.iter().enumerate() {
            if mask & (1 << i) != 0 {
                z = z.union(sq)?;
            }
        }
        let mut blocks: Vec<GroupSubset> = squares
            .iter()
            .map(|sq| sq.intersection(&z))
            .collect::<Result<_>>()?;
        let mut level = 0u32;
        let mut best_value = usize::MAX;
        let mut best_level = 0u32;
        loop {
            let mut value = 0;
            for (sq, block) in squares.iter().zip(&blocks) {
                value = value.max(naive_packing_index(sq, block));
            }
            if value < best_value {
                best_value = value;
                best_level = level;
            }
            let next: Vec<GroupSubset> = blocks.iter().map(|b| b.product(b).unwrap()).collect();
            if next == blocks {
                break;
            }
            blocks = next;
            level += 1;
        }
        evals.push((best_level, best_value));
    }

    let m = evals.iter().map(|&(_, v)| v).min().expect("candidates exist");
    let k0 = evals
        .iter()
        .filter(|&&(_, v)| v == m)
        .map(|&(k, _)| k)
        .min()
        .expect("m is attained");

    let mut strong: Vec<NaiveStrong> = Vec::new();
    for (idx, mask) in (1u64..(1u64 << count)).enumerate() {
        if evals[idx] != (k0, m) {
            continue;
        }
        let mut z = GroupSubset::empty(group);
        for (i, sq) in squares.iter().enumerate() {
            if mask & (1 << i) != 0 {
                z = z.union(sq)?;
            }
        }
        let mut n_set = GroupSubset::empty(group);
        for sq in &squares {
            let mut block = sq.intersection(&z)?;
            for _ in 0..(k0 + 1) {
                block = block.product(&block)?;
            }
            if naive_packing_index(sq, &block) == m {
                n_set = n_set.union(&sq.intersection(&block)?)?;
            }
        }
        strong.push(NaiveStrong {
            mask,
            terms: mask.count_ones() as usize,
            n_set,
        });
    }

    let n0 = strong.iter().map(|s| s.terms).min().expect("strong exists");
    let prime: Vec<&NaiveStrong> = strong.iter().filter(|s| s.terms == n0).collect();
    let family: Vec<&NaiveStrong> = strong
        .iter()
        .filter(|s| prime.iter().any(|p| p.mask & !s.mask == 0))
        .collect();

    let dual_values: Vec<usize> = family
        .iter()
        .map(|f| {
            prime
                .iter()
                .map(|p| naive_packing_index(&f.n_set, &p.n_set))
                .max()
                .expect("prime nonempty")
        })
        .collect();
    let m_prime = *dual_values.iter().min().expect("family nonempty");
    let attaining: Vec<&&NaiveStrong> = family
        .iter()
        .zip(&dual_values)
        .filter(|&(_, &v)| v == m_prime)
        .map(|(f, _)| f)
        .collect();
    let n2 = attaining.iter().map(|s| s.terms).min().expect("nonempty");

    let mut h = GroupSubset::empty(group);
    let mut h_prime = GroupSubset::empty(group);
    for s in &attaining {
        h = h.union(&s.n_set)?;
        if s.terms == n2 {
            h_prime = h_prime.union(&s.n_set)?;
        }
    }

    Ok(PipelineScalars {
        m,
        k0,
        n0,
        m_prime,
        n2,
        h: h.to_vec(),
        h_prime: h_prime.to_vec(),
    })
}

fn check_caps(f: &Family) -> Result<()> {
    if f.len() > ORACLE_FAMILY_CAP {
        return Err(Error::CapExceeded {
            what: format!("oracle family size {}", f.len()),
            detail: format!("cap {ORACLE_FAMILY_CAP}"),
        });
    }
    if f.group().order() > ORACLE_ORDER_CAP {
        return Err(Error::CapExceeded {
            what: format!("oracle group order {}", f.group().order()),
            detail: format!("cap {ORACLE_ORDER_CAP}"),
        });
    }
    Ok(())
}

/// Recomputes all pipeline scalars naively and compares field by field with
/// the pipeline. A mismatch is raised as `OracleMismatch` with the full
/// report serialized in the error.
pub fn oracle_core(f: &Family) -> Result<OracleReport> {
    check_caps(f)?;
    let carriers: Vec<GroupSubset> = f.carriers().cloned().collect();
    let digest = instance_from_parts(f.group(), &carriers).digest();
    let recomputed = naive_scalars(f.group(), &carriers)?;
    let result = run_pipeline(f, &PipelineConfig::default())?;
    let pipeline = PipelineScalars::of_result(&result);

    let mut matches = BTreeMap::new();
    matches.insert("m".to_string(), recomputed.m == pipeline.m);
    matches.insert("k0".to_string(), recomputed.k0 == pipeline.k0);
    matches.insert("n0".to_string(), recomputed.n0 == pipeline.n0);
    matches.insert("m_prime".to_string(), recomputed.m_prime == pipeline.m_prime);
    matches.insert("n2".to_string(), recomputed.n2 == pipeline.n2);
    matches.insert("h".to_string(), recomputed.h == pipeline.h);
    matches.insert("h_prime".to_string(), recomputed.h_prime == pipeline.h_prime);

    let report = OracleReport {
        instance_digest: digest,
        recomputed: Some(recomputed),
        pipeline: Some(pipeline),
        matches: Some(matches.clone()),
        lemma_tallies: BTreeMap::new(),
        h_prime_is_subgroup: None,
    };
    if let Some((field, _)) = matches.iter().find(|&(_, &ok)| !ok) {
        return Err(Error::OracleMismatch {
            field: field.clone(),
            detail: serde_json::to_string(&report).expect("report serializes"),
        });
    }
    Ok(report)
}

/// Runs the pipeline on a family of genuine subgroups and asserts the
/// main-theorem conclusions hold; whether `h_prime` is itself a subgroup is
/// reported but not asserted.
pub fn subgroup_crosscheck(f: &Family, limits: &SearchLimits) -> Result<OracleReport> {
    for (i, c) in f.carriers().enumerate() {
        if !c.is_subgroup() {
            return Err(Error::InvalidInstance(format!(
                "subgroup_crosscheck: member {i} is not closed under products"
            )));
        }
    }
    let carriers: Vec<GroupSubset> = f.carriers().cloned().collect();
    let digest = instance_from_parts(f.group(), &carriers).digest();
    let config = PipelineConfig {
        limits: *limits,
        ..PipelineConfig::default()
    };
    let result = run_pipeline(f, &config)?;

    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut record = |label: &str, ok: bool| {
        let t = tallies.entry(label.to_string()).or_default();
        if ok {
            t.pass += 1;
        } else {
            t.fail += 1;
        }
    };
    record(
        "main-theorem-shape",
        result.h.is_symmetric()
            && result.h.contains_identity()
            && result.h_prime.is_symmetric()
            && result.h_prime.contains_identity(),
    );
    record(
        "main-theorem-commensurable",
        result.h_commensurability.len() == f.len()
            && result.h_prime_commensurability.len() == f.len(),
    );
    let autos = if f.group().order() <= 16 {
        f.group().automorphisms()?
    } else {
        vec![crate::group::Automorphism::identity(f.group())]
    };
    let invariance = crate::pipeline::invariance_check(&result, f, &autos)?;
    record("main-theorem-invariance", invariance.all_invariant());
    if tallies.values().any(|t| t.fail > 0) {
        return Err(Error::lemma(
            "main-theorem",
            format!("subgroup crosscheck failed: {tallies:?}"),
        ));
    }

    Ok(OracleReport {
        instance_digest: digest,
        recomputed: None,
        pipeline: Some(PipelineScalars::of_result(&result)),
        matches: None,
        lemma_tallies: tallies,
        h_prime_is_subgroup: Some(result.h_prime.is_subgroup()),
    })
}

// ---------------------------------------------------------------------------
// lemma battery
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BatteryFailure {
    pub trial: u64,
    pub lemma: String,
    pub detail: String,
    /// Serialized reproducer: re-running this instance reproduces the check.
    pub instance: InstanceFile,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BatteryOutcome {
    pub seed: u64,
    pub trials: u64,
    pub group_cap: usize,
    pub report: OracleReport,
    pub failures: Vec<BatteryFailure>,
}

impl BatteryOutcome {
    /// The battery records failures; this raises them.
    pub fn ensure_clean(&self) -> Result<()> {
        match self.failures.first() {
            None => Ok(()),
            Some(f) => Err(Error::lemma(&f.lemma, f.detail.clone())),
        }
    }
}

fn group_pool(cap: usize) -> Vec<Arc<FiniteGroup>> {
    let mut pool = Vec::new();
    for n in 2..=cap {
        pool.push(FiniteGroup::cyclic(n));
    }
    for n in 2..=cap / 2 {
        pool.push(FiniteGroup::dihedral(n));
    }
    for k in 2..=cap / 2 {
        let z2 = FiniteGroup::cyclic(2);
        let zk = FiniteGroup::cyclic(k);
        if let Ok(g) = FiniteGroup::direct_product(&z2, &zk) {
            pool.push(g);
        }
    }
    pool
}

/// A random symmetric identity-containing subset: symmetrize a uniform
/// sample and adjoin the identity.
fn random_symmetric(group: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng, density: f64) -> GroupSubset {
    let mut indices = vec![group.identity()];
    for a in 0..group.order() {
        if rng.gen_bool(density) {
            indices.push(a);
            indices.push(group.inv(a));
        }
    }
    GroupSubset::from_indices(group, &indices).expect("indices in range")
}

/// Families built from powers and perturbations of a base set keep small
/// commensurability constants; unconstrained random pairs rarely do.
fn random_family(
    group: &Arc<FiniteGroup>,
    rng: &mut ChaCha8Rng,
    limits: &SearchLimits,
) -> Result<Family> {
    let mode = rng.gen_range(0..3u32);
    let sets: Vec<GroupSubset> = match mode {
        0 => {
            let subs = enumerate_subgroups(group);
            let count = rng.gen_range(1..=3usize);
            (0..count)
                .map(|_| subs[rng.gen_range(0..subs.len())].clone())
                .collect()
        }
        1 => {
            let base = random_symmetric(group, rng, 0.25);
            let square = base.product(&base)?;
            let count = rng.gen_range(1..=3usize);
            let mut sets = vec![base.clone()];
            for _ in 1..count {
                if rng.gen_bool(0.5) {
                    sets.push(square.clone());
                } else {
                    let g = rng.gen_range(0..group.order());
                    let extra =
                        GroupSubset::from_indices(group, &[g, group.inv(g)])?.union(&base)?;
                    sets.push(extra);
                }
            }
            sets
        }
        _ => {
            let subs = enumerate_subgroups(group);
            let h = subs[rng.gen_range(0..subs.len())].clone();
            let g = rng.gen_range(0..group.order());
            let perturbed = GroupSubset::from_indices(group, &[g, group.inv(g)])?.union(&h)?;
            vec![h, perturbed]
        }
    };
    let family = family_validate(&sets, limits)?;
    if family.k_uniform <= 6 && family.n_uniform <= 6 {
        return Ok(family);
    }
    // constants too large for fast exact search: fall back to the chain
    // base, base^2, and finally a single generated subgroup
    let base = &sets[0];
    let fallback = family_validate(&[base.clone(), base.product(base)?], limits)?;
    if fallback.k_uniform <= 6 && fallback.n_uniform <= 6 {
        return Ok(fallback);
    }
    let generated = base.generated_subgroup()?.0;
    family_validate(&[generated], limits)
}

/// Longest strictly increasing chain among the given distinct sets, ordered
/// by strict inclusion.
fn longest_chain(sets: &[GroupSubset]) -> usize {
    let mut sorted: Vec<&GroupSubset> = sets.iter().collect();
    sorted.sort_by_key(|s| s.len());
    let mut best = vec![0usize; sorted.len()];
    let mut overall = 0;
    for i in 0..sorted.len() {
        best[i] = 1;
        for j in 0..i {
            if sorted[j].len() < sorted[i].len() && sorted[j].is_subset(sorted[i]) {
                best[i] = best[i].max(best[j] + 1);
            }
        }
        overall = overall.max(best[i]);
    }
    overall
}

struct BatteryRun<'a> {
    limits: &'a SearchLimits,
    tallies: BTreeMap<String, Tally>,
    failures: Vec<BatteryFailure>,
    trial: u64,
}

impl BatteryRun<'_> {
    fn record(&mut self, lemma: &str, outcome: Result<()>, instance: &InstanceFile) {
        let t = self.tallies.entry(lemma.to_string()).or_default();
        match outcome {
            Ok(()) => t.pass += 1,
            Err(e) => {
                t.fail += 1;
                self.failures.push(BatteryFailure {
                    trial: self.trial,
                    lemma: lemma.to_string(),
                    detail: e.to_string(),
                    instance: instance.clone(),
                });
            }
        }
    }

    fn run_instance(&mut self, family: &Family) -> Result<()> {
        let carriers: Vec<GroupSubset> = family.carriers().cloned().collect();
        let instance = instance_from_parts(family.group(), &carriers);
        let limits = self.limits;
        let len = family.len();

        // lem-prodcom: products of length 1, 2, and one each of 3 and 4
        let mut part_lists: Vec<Vec<usize>> = Vec::new();
        for i in 0..len {
            part_lists.push(vec![i]);
        }
        for i in 0..len {
            for j in 0..len {
                part_lists.push(vec![i, j]);
            }
        }
        part_lists.push((0..3).map(|i| i % len).collect());
        part_lists.push((0..4).map(|i| i % len).collect());
        for parts in &part_lists {
            let outcome = product_commensurability_witness(parts, 0, family, limits).map(|_| ());
            self.record("lem-prodcom", outcome, &instance);
        }

        // lem-cover: greedy maximal disjoint family vs the exact cover
        for x in family.carriers() {
            for y in family.carriers() {
                let outcome = (|| {
                    let pack = maximal_disjoint_family(x, y)?;
                    let cover = covering_number(x, y, limits)?;
                    check_cover_bound(&pack, &cover).map(|_| ())
                })();
                self.record("lem-cover", outcome, &instance);
            }
        }

        // lem-xx
        for (i, x) in family.members.iter().enumerate() {
            for (j, y) in family.members.iter().enumerate() {
                let cert = &family.pairwise[i][j];
                let outcome = xx_intersection_witness(x, y, cert).map(|_| ());
                self.record("lem-xx", outcome, &instance);
            }
        }

        // pipeline-dependent lemmas
        let result = run_pipeline(family, &PipelineConfig::default())?;
        let strong = &result.strong_records;
        let masks: Vec<u64> = strong
            .iter()
            .map(|r| r.candidate.index_set.iter().fold(0u64, |m, &i| m | (1 << i)))
            .collect();

        // lem-key: containment of index sets reverses containment of cores
        for (i, a) in strong.iter().enumerate() {
            for (j, b) in strong.iter().enumerate() {
                if i == j || masks[i] & !masks[j] != 0 {
                    continue;
                }
                let ok = b.n_set.is_subset(&a.n_set);
                let outcome = if ok {
                    Ok(())
                } else {
                    Err(Error::lemma(
                        "lem-key",
                        format!("core of {:?} not inside core of {:?}", b.candidate.index_set, a.candidate.index_set),
                    ))
                };
                self.record("lem-key", outcome, &instance);
            }
        }

        // lem-N(Z): each core set covers every squared member within (KN)^2
        let kn_sq = (family.k_uniform * family.n_uniform).pow(2);
        for record in strong {
            for x in result.squared.carriers() {
                let outcome = (|| {
                    let cover = covering_number(x, &record.n_set, limits)?;
                    if cover.size <= kn_sq {
                        Ok(())
                    } else {
                        Err(Error::lemma(
                            "lem-N(Z)",
                            format!("cover size {} exceeds (KN)^2 = {kn_sq}", cover.size),
                        ))
                    }
                })();
                self.record("lem-N(Z)", outcome, &instance);
            }
        }

        // lem-intersec: the union of strong candidates is strong and its
        // core is inside the intersection of the cores
        for (i, a) in strong.iter().enumerate() {
            for (j, b) in strong.iter().enumerate().skip(i + 1) {
                let union_mask = masks[i] | masks[j];
                let outcome = match masks.iter().position(|&m| m == union_mask) {
                    None => Err(Error::lemma(
                        "lem-intersec",
                        "union of strong candidates is not strong".to_string(),
                    )),
                    Some(u) => {
                        let inter = a.n_set.intersection(&b.n_set)?;
                        if strong[u].n_set.is_subset(&inter) {
                            Ok(())
                        } else {
                            Err(Error::lemma(
                                "lem-intersec",
                                "core of union not inside intersection of cores".to_string(),
                            ))
                        }
                    }
                };
                self.record("lem-intersec", outcome, &instance);
            }
        }

        // lem-NZ: powers of minimal strong candidates stay commensurable
        // within the derived constant
        let n_z = n_z_constant(result.n0, result.k0, family.k_uniform, family.n_uniform);
        for &pi in &result.i_prime {
            let mut power = strong[pi].candidate.z.clone();
            for _ in 0..(result.k0 + 1) {
                power = power.product(&power)?;
            }
            let next_power = power.product(&power)?;
            for x in result.squared.carriers() {
                let outcome = (|| {
                    let fwd = covering_number(&power, x, limits)?.size as u128;
                    let bwd = covering_number(x, &power, limits)?.size as u128;
                    if fwd > n_z || bwd > n_z {
                        return Err(Error::lemma(
                            "lem-NZ",
                            format!("observed ({fwd},{bwd}) exceeds N_Z = {n_z}"),
                        ));
                    }
                    let fwd2 = covering_number(&next_power, x, limits)?.size as u128;
                    let bwd2 = covering_number(x, &next_power, limits)?.size as u128;
                    let n_z_sq = n_z.saturating_mul(n_z);
                    if fwd2 > n_z_sq || bwd2 > n_z_sq {
                        return Err(Error::lemma(
                            "lem-NZ",
                            format!("observed ({fwd2},{bwd2}) exceeds N_Z^2 = {n_z_sq}"),
                        ));
                    }
                    Ok(())
                })();
                self.record("lem-NZ", outcome, &instance);
            }
        }

        // lem-I: family cores are approximate subgroups with the stated
        // uniform constants
        let kn = (family.k_uniform as u128).saturating_mul(family.n_uniform as u128);
        let approx_bound = n_z.saturating_mul(kn).saturating_pow(2);
        let commens_bound = n_z.saturating_mul(kn.saturating_pow(2));
        for &fi in &result.i_family {
            let outcome = (|| {
                let d = minimal_doubling(&strong[fi].n_set, limits)?;
                if (d.doubling_k as u128) <= approx_bound {
                    Ok(())
                } else {
                    Err(Error::lemma(
                        "lem-I",
                        format!("doubling {} exceeds (N_Z*K*N)^2 = {approx_bound}", d.doubling_k),
                    ))
                }
            })();
            self.record("lem-I", outcome, &instance);
        }
        for (ai, &fi) in result.i_family.iter().enumerate() {
            for &fj in result.i_family.iter().skip(ai + 1) {
                let outcome = (|| {
                    let a = minimal_doubling(&strong[fi].n_set, limits)?;
                    let b = minimal_doubling(&strong[fj].n_set, limits)?;
                    let cert = commensurability(&a, &b, limits)?;
                    if (cert.n as u128) <= commens_bound {
                        Ok(())
                    } else {
                        Err(Error::lemma(
                            "lem-I",
                            format!("commensurability {} exceeds N_Z*(KN)^2 = {commens_bound}", cert.n),
                        ))
                    }
                })();
                self.record("lem-I", outcome, &instance);
            }
        }

        // lem-chain: no long strictly increasing chain of generated
        // subgroups among sampled finite unions of attaining cores
        let outcome = (|| {
            let attaining: Vec<&GroupSubset> =
                result.i_mprime.iter().map(|&i| &strong[i].n_set).collect();
            let mut unions: Vec<GroupSubset> = Vec::new();
            for (i, a) in attaining.iter().enumerate() {
                unions.push((*a).clone());
                for b in attaining.iter().skip(i + 1) {
                    unions.push(a.union(b)?);
                }
            }
            let mut full = attaining[0].clone();
            for a in &attaining[1..] {
                full = full.union(a)?;
            }
            unions.push(full);
            let mut generated: Vec<GroupSubset> = Vec::new();
            for u in &unions {
                let g = u.generated_subgroup()?.0;
                if !generated.contains(&g) {
                    generated.push(g);
                }
            }
            let chain = longest_chain(&generated) as u128;
            if chain <= result.n_y_bound {
                Ok(())
            } else {
                Err(Error::lemma(
                    "lem-chain",
                    format!("chain of length {chain} exceeds N_Y = {}", result.n_y_bound),
                ))
            }
        })();
        self.record("lem-chain", outcome, &instance);

        Ok(())
    }
}

/// Runs every lemma check once against a single validated family. Used for
/// the in-instance `--check-lemmas` mode; failures are recorded, not raised.
pub fn check_lemmas(
    family: &Family,
    limits: &SearchLimits,
) -> Result<(BTreeMap<String, Tally>, Vec<BatteryFailure>)> {
    let mut run = BatteryRun {
        limits,
        tallies: LEMMA_LABELS
            .iter()
            .map(|&l| (l.to_string(), Tally::default()))
            .collect(),
        failures: Vec::new(),
        trial: 0,
    };
    run.run_instance(family)?;
    Ok((run.tallies, run.failures))
}

/// Seeded batch of random instances, every lemma checked on each. The
/// outcome records tallies per lemma label and a serialized reproducer for
/// any failure.
pub fn lemma_battery(
    seed: u64,
    trials: u64,
    group_cap: usize,
    limits: &SearchLimits,
) -> Result<BatteryOutcome> {
    if trials < 1 {
        return Err(Error::EmptyInput {
            what: "battery trials".to_string(),
        });
    }
    let pool = group_pool(group_cap.max(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = BatteryRun {
        limits,
        tallies: LEMMA_LABELS
            .iter()
            .map(|&l| (l.to_string(), Tally::default()))
            .collect(),
        failures: Vec::new(),
        trial: 0,
    };
    for trial in 0..trials {
        run.trial = trial;
        let group = &pool[rng.gen_range(0..pool.len())];
        let family = random_family(group, &mut rng, limits)?;
        run.run_instance(&family)?;
    }
    let digest_input = format!("battery:seed={seed}:trials={trials}:cap={group_cap}");
    let mut hasher = Sha256::new();
    hasher.update(digest_input.as_bytes());
    let report = OracleReport {
        instance_digest: hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect(),
        recomputed: None,
        pipeline: None,
        matches: None,
        lemma_tallies: run.tallies,
        h_prime_is_subgroup: None,
    };
    Ok(BatteryOutcome {
        seed,
        trials,
        group_cap,
        report,
        failures: run.failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::packing_index;

    fn limits() -> SearchLimits {
        SearchLimits::default()
    }

    #[test]
    fn naive_packing_agrees_with_exact_search() {
        let g = FiniteGroup::cyclic(12);
        let sets = [
            GroupSubset::from_indices(&g, &[0, 1, 2, 10, 11]).unwrap(),
            GroupSubset::from_indices(&g, &[0, 1, 11]).unwrap(),
            GroupSubset::from_indices(&g, &[0, 4, 8]).unwrap(),
            GroupSubset::full(&g),
        ];
        for x in &sets {
            for y in &sets {
                let naive = naive_packing_index(x, y);
                let exact = packing_index(x, y, &limits()).unwrap().size;
                assert_eq!(naive, exact, "packing mismatch for {x:?} by {y:?}");
            }
        }
    }

    #[test]
    fn oracle_matches_on_single_subgroup() {
        let g = FiniteGroup::cyclic(6);
        let h = GroupSubset::from_indices(&g, &[0, 3]).unwrap();
        let f = family_validate(&[h], &limits()).unwrap();
        let report = oracle_core(&f).unwrap();
        assert!(report.matches.unwrap().values().all(|&b| b));
        assert_eq!(report.recomputed.unwrap().m, 1);
    }

    #[test]
    fn oracle_matches_on_interval_family() {
        let g = FiniteGroup::cyclic(12);
        let m1 = GroupSubset::from_indices(&g, &[0, 1, 2, 10, 11]).unwrap();
        let m2 = GroupSubset::from_indices(&g, &[0, 1, 11]).unwrap();
        let f = family_validate(&[m1, m2], &limits()).unwrap();
        let report = oracle_core(&f).unwrap();
        assert!(report.matches.unwrap().values().all(|&b| b));
        let scalars = report.recomputed.unwrap();
        assert_eq!(scalars.h, vec![0, 1, 2, 3, 4, 8, 9, 10, 11]);
    }

    #[test]
    fn oracle_enforces_caps() {
        let g = FiniteGroup::cyclic(25);
        let h = GroupSubset::from_indices(&g, &[0, 5, 10, 15, 20]).unwrap();
        let f = family_validate(&[h], &limits()).unwrap();
        assert!(matches!(oracle_core(&f), Err(Error::CapExceeded { .. })));

        let g = FiniteGroup::cyclic(4);
        let e = GroupSubset::from_indices(&g, &[0, 2]).unwrap();
        let f = family_validate(&vec![e; 5], &limits()).unwrap();
        assert!(matches!(oracle_core(&f), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn crosscheck_on_subgroup_families() {
        let d4 = FiniteGroup::dihedral(4);
        let sets: Vec<GroupSubset> = [4, 5, 6, 7, 2]
            .iter()
            .map(|&e| GroupSubset::from_indices(&d4, &[0, e]).unwrap())
            .collect();
        let f = family_validate(&sets, &limits()).unwrap();
        let report = subgroup_crosscheck(&f, &limits()).unwrap();
        assert_eq!(report.h_prime_is_subgroup, Some(false));
        assert!(report.lemma_tallies.values().all(|t| t.fail == 0));

        let g = FiniteGroup::cyclic(8);
        let h = GroupSubset::from_indices(&g, &[0, 4]).unwrap();
        let f = family_validate(std::slice::from_ref(&h), &limits()).unwrap();
        let report = subgroup_crosscheck(&f, &limits()).unwrap();
        assert_eq!(report.h_prime_is_subgroup, Some(true));
        assert_eq!(report.pipeline.unwrap().h_prime, h.to_vec());

        let whole = GroupSubset::full(&g);
        let f = family_validate(std::slice::from_ref(&whole), &limits()).unwrap();
        let report = subgroup_crosscheck(&f, &limits()).unwrap();
        assert_eq!(report.pipeline.unwrap().h_prime, whole.to_vec());
    }

    #[test]
    fn crosscheck_rejects_non_subgroups() {
        let g = FiniteGroup::cyclic(12);
        let not_subgroup = GroupSubset::from_indices(&g, &[0, 1, 11]).unwrap();
        let f = family_validate(&[not_subgroup], &limits()).unwrap();
        assert!(subgroup_crosscheck(&f, &limits()).is_err());
    }

    #[test]
    fn battery_single_trial_subgroup_instance() {
        let outcome = lemma_battery(0, 1, 12, &limits()).unwrap();
        outcome.ensure_clean().unwrap();
        assert!(outcome.failures.is_empty());
        for label in LEMMA_LABELS {
            assert!(outcome.report.lemma_tallies.contains_key(label));
        }
    }

    #[test]
    fn battery_is_deterministic() {
        let a = lemma_battery(7, 5, 16, &limits()).unwrap();
        let b = lemma_battery(7, 5, 16, &limits()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn longest_chain_detects_towers() {
        let g = FiniteGroup::cyclic(8);
        let s1 = GroupSubset::from_indices(&g, &[0]).unwrap();
        let s2 = GroupSubset::from_indices(&g, &[0, 4]).unwrap();
        let s3 = GroupSubset::from_indices(&g, &[0, 2, 4, 6]).unwrap();
        let other = GroupSubset::from_indices(&g, &[0, 1]).unwrap();
        assert_eq!(longest_chain(&[s3.clone(), s1.clone(), other, s2.clone()]), 3);
        assert_eq!(longest_chain(&[s1, s2, s3]), 3);
    }
}
