//! JSON instance and report files.
//!
//! The wire format is UTF-8 JSON with a fixed field order (struct order) and
//! sorted element arrays, so canonical files are byte-stable across runs and
//! fit for snapshot diffs. Element indices are the representation; no
//! symbolic labels.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::Family;
use crate::error::{Error, Result};
use crate::group::{Automorphism, FiniteGroup, GroupSubset};
use crate::oracle::{OracleReport, Tally};
use crate::pipeline::{InvarianceReport, PipelineResult};

/// How the ambient group is specified in an instance file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Product { factors: Vec<GroupSpec> },
    Cayley { table: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct InstanceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_union: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphism_cap: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub group: GroupSpec,
    pub family: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphisms: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<InstanceConfig>,
}

impl InstanceFile {
    /// Same instance with member arrays sorted and deduplicated.
    pub fn canonical(&self) -> InstanceFile {
        let mut inst = self.clone();
        for member in &mut inst.family {
            member.sort_unstable();
            member.dedup();
        }
        inst
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("instances always serialize");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn build_group(spec: &GroupSpec) -> Result<Arc<FiniteGroup>> {
    match spec {
        GroupSpec::Cyclic { n } => {
            if *n == 0 {
                return Err(Error::InvalidInstance("cyclic group needs n >= 1".to_string()));
            }
            Ok(FiniteGroup::cyclic(*n))
        }
        GroupSpec::Dihedral { n } => {
            if *n == 0 {
                return Err(Error::InvalidInstance(
                    "dihedral group needs n >= 1".to_string(),
                ));
            }
            Ok(FiniteGroup::dihedral(*n))
        }
        GroupSpec::Product { factors } => {
            let mut iter = factors.iter();
            let first = iter.next().ok_or_else(|| {
                Error::InvalidInstance("product needs at least one factor".to_string())
            })?;
            let mut acc = build_group(first)?;
            for f in iter {
                let next = build_group(f)?;
                acc = FiniteGroup::direct_product(&acc, &next)?;
            }
            Ok(acc)
        }
        GroupSpec::Cayley { table } => FiniteGroup::from_cayley(table),
    }
}

/// A parsed and structurally validated instance: the group is built, the
/// family arrays are in range, and any supplied permutations really are
/// automorphisms. Family-level validation (symmetry, constants) is separate.
pub struct RealizedInstance {
    pub group: Arc<FiniteGroup>,
    pub family: Vec<GroupSubset>,
    pub automorphisms: Option<Vec<Automorphism>>,
    pub config: InstanceConfig,
}

pub fn realize_instance(inst: &InstanceFile) -> Result<RealizedInstance> {
    let group = build_group(&inst.group)?;
    if inst.family.is_empty() {
        return Err(Error::EmptyInput {
            what: "instance family".to_string(),
        });
    }
    let family = inst
        .family
        .iter()
        .map(|member| GroupSubset::from_indices(&group, member))
        .collect::<Result<_>>()?;
    let automorphisms = match &inst.automorphisms {
        None => None,
        Some(perms) => Some(
            perms
                .iter()
                .map(|p| Automorphism::new(&group, p.clone()))
                .collect::<Result<_>>()?,
        ),
    };
    Ok(RealizedInstance {
        group,
        family,
        automorphisms,
        config: inst.config.clone().unwrap_or_default(),
    })
}

/// Canonical instance for an in-memory family: the group is embedded as its
/// Cayley table, so the digest is well-defined without a source file.
pub fn instance_from_parts(group: &Arc<FiniteGroup>, family: &[GroupSubset]) -> InstanceFile {
    InstanceFile {
        group: GroupSpec::Cayley {
            table: group.cayley_rows(),
        },
        family: family.iter().map(|s| s.to_vec()).collect(),
        automorphisms: None,
        config: None,
    }
}

pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Canonical pretty serialization with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

/// Writes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PipelineSection {
    pub m: usize,
    pub k0: u32,
    pub n0: usize,
    pub m_prime: usize,
    pub n2: usize,
    /// Decimal strings: the derived bounds can exceed any JSON-safe integer.
    pub n_z_bound: String,
    pub n_y_bound: String,
    pub n_z_respected: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DoublingEntry {
    pub k: usize,
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CommensurabilityEntry {
    pub member: usize,
    pub n: usize,
    pub z0: Vec<usize>,
    pub z1: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CertificateSection {
    pub h_doubling: DoublingEntry,
    pub h_prime_doubling: DoublingEntry,
    pub h_commensurability: Vec<CommensurabilityEntry>,
    pub h_prime_commensurability: Vec<CommensurabilityEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvarianceEntry {
    pub permutation: Vec<usize>,
    pub stabilizes_family: bool,
    pub fixes_h: Option<bool>,
    pub fixes_h_prime: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub instance_digest: String,
    pub group_order: usize,
    pub family_size: usize,
    pub k_uniform: usize,
    pub n_uniform: usize,
    pub pipeline: PipelineSection,
    pub h: Vec<usize>,
    pub h_prime: Vec<usize>,
    pub certificates: CertificateSection,
    pub invariance: Vec<InvarianceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_tallies: Option<BTreeMap<String, Tally>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    /// `None` unless timing was requested; kept out of the default output so
    /// identical runs produce byte-identical reports.
    pub timing_ms: Option<u64>,
}

fn doubling_entry(a: &crate::approx::ApproximateSubgroup) -> DoublingEntry {
    DoublingEntry {
        k: a.doubling_k,
        witness: a.doubling_witness.to_vec(),
    }
}

pub fn build_report(
    instance: &InstanceFile,
    family: &Family,
    result: &PipelineResult,
    invariance: &InvarianceReport,
    lemma_tallies: Option<BTreeMap<String, Tally>>,
    oracle: Option<OracleReport>,
    timing_ms: Option<u64>,
) -> ReportFile {
    ReportFile {
        instance_digest: instance.digest(),
        group_order: family.group().order(),
        family_size: family.len(),
        k_uniform: family.k_uniform,
        n_uniform: family.n_uniform,
        pipeline: PipelineSection {
            m: result.m,
            k0: result.k0,
            n0: result.n0,
            m_prime: result.m_prime,
            n2: result.n2,
            n_z_bound: result.n_z_bound.to_string(),
            n_y_bound: result.n_y_bound.to_string(),
            n_z_respected: result.n_z_respected,
        },
        h: result.h.to_vec(),
        h_prime: result.h_prime.to_vec(),
        certificates: CertificateSection {
            h_doubling: doubling_entry(&result.h_doubling),
            h_prime_doubling: doubling_entry(&result.h_prime_doubling),
            h_commensurability: result
                .h_commensurability
                .iter()
                .enumerate()
                .map(|(i, c)| CommensurabilityEntry {
                    member: i,
                    n: c.n,
                    z0: c.z0.to_vec(),
                    z1: c.z1.to_vec(),
                })
                .collect(),
            h_prime_commensurability: result
                .h_prime_commensurability
                .iter()
                .enumerate()
                .map(|(i, c)| CommensurabilityEntry {
                    member: i,
                    n: c.n,
                    z0: c.z0.to_vec(),
                    z1: c.z1.to_vec(),
                })
                .collect(),
        },
        invariance: invariance
            .verdicts
            .iter()
            .map(|v| InvarianceEntry {
                permutation: v.permutation.clone(),
                stabilizes_family: v.stabilizes_family,
                fixes_h: v.fixes_h,
                fixes_h_prime: v.fixes_h_prime,
            })
            .collect(),
        lemma_tallies,
        oracle,
        timing_ms,
    }
}

/// Re-checks every certificate in a report against the instance alone: no
/// pipeline state, only subset algebra. This is what makes reports
/// self-contained evidence.
pub fn verify_report(instance: &InstanceFile, report: &ReportFile) -> Result<()> {
    if report.instance_digest != instance.digest() {
        return Err(Error::InvalidInstance(
            "report digest does not match instance".to_string(),
        ));
    }
    let realized = realize_instance(instance)?;
    let group = &realized.group;
    if group.order() != report.group_order {
        return Err(Error::InvalidInstance("group order mismatch".to_string()));
    }
    let h = GroupSubset::from_indices(group, &report.h)?;
    let h_prime = GroupSubset::from_indices(group, &report.h_prime)?;
    for (name, set) in [("h", &h), ("h_prime", &h_prime)] {
        if !set.is_symmetric() || !set.contains_identity() {
            return Err(Error::InvalidInstance(format!(
                "{name} in report is not symmetric with identity"
            )));
        }
    }
    if !h_prime.is_subset(&h) {
        return Err(Error::InvalidInstance("h_prime not inside h".to_string()));
    }
    for (set, entry) in [
        (&h, &report.certificates.h_doubling),
        (&h_prime, &report.certificates.h_prime_doubling),
    ] {
        let witness = GroupSubset::from_indices(group, &entry.witness)?;
        if witness.len() != entry.k {
            return Err(Error::InvalidInstance(
                "doubling witness size mismatch".to_string(),
            ));
        }
        let square = set.product(set)?;
        if !square.is_subset(&witness.product(set)?) {
            return Err(Error::InvalidInstance(
                "doubling certificate fails containment".to_string(),
            ));
        }
    }
    for (set, entries) in [
        (&h, &report.certificates.h_commensurability),
        (&h_prime, &report.certificates.h_prime_commensurability),
    ] {
        if entries.len() != realized.family.len() {
            return Err(Error::InvalidInstance(
                "one commensurability certificate per member required".to_string(),
            ));
        }
        for entry in entries {
            let member = &realized.family[entry.member];
            let z0 = GroupSubset::from_indices(group, &entry.z0)?;
            let z1 = GroupSubset::from_indices(group, &entry.z1)?;
            if entry.n != z0.len().max(z1.len()) {
                return Err(Error::InvalidInstance(
                    "commensurability constant mismatch".to_string(),
                ));
            }
            if !set.is_subset(&z0.product(member)?) || !member.is_subset(&z1.product(set)?) {
                return Err(Error::InvalidInstance(
                    "commensurability certificate fails containment".to_string(),
                ));
            }
        }
    }
    for entry in &report.invariance {
        let phi = Automorphism::new(group, entry.permutation.clone())?;
        if entry.fixes_h == Some(true) && phi.apply(&h)? != h {
            return Err(Error::InvalidInstance(
                "invariance verdict for h does not re-check".to_string(),
            ));
        }
        if entry.fixes_h_prime == Some(true) && phi.apply(&h_prime)? != h_prime {
            return Err(Error::InvalidInstance(
                "invariance verdict for h_prime does not re-check".to_string(),
            ));
        }
    }
    Ok(())
}
