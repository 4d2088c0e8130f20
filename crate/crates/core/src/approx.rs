//! Approximate-subgroup recognition, commensurability certificates, family
//! validation, and the constructive witnesses from the product and
//! square-intersection lemmas.

use crate::covering::{covering_number, maximal_disjoint_family, SearchLimits};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupSubset};

/// A symmetric identity-containing set together with its exact doubling
/// constant: the minimal `K` with `A*A ⊆ X*A` for some `|X| = K`, and that
/// witness `X`.
#[derive(Clone, Debug)]
pub struct ApproximateSubgroup {
    pub carrier: GroupSubset,
    pub doubling_k: usize,
    pub doubling_witness: GroupSubset,
}

impl ApproximateSubgroup {
    pub fn verify(&self) -> Result<()> {
        if !self.carrier.is_symmetric() {
            return Err(Error::NotSymmetric {
                what: "approximate subgroup carrier".to_string(),
            });
        }
        if !self.carrier.contains_identity() {
            return Err(Error::MissingIdentity {
                what: "approximate subgroup carrier".to_string(),
            });
        }
        if self.doubling_witness.len() != self.doubling_k {
            return Err(Error::lemma(
                "doubling-certificate",
                format!(
                    "witness size {} != K {}",
                    self.doubling_witness.len(),
                    self.doubling_k
                ),
            ));
        }
        let square = self.carrier.product(&self.carrier)?;
        let image = self.doubling_witness.product(&self.carrier)?;
        if !square.is_subset(&image) {
            return Err(Error::lemma(
                "doubling-certificate",
                "carrier^2 not inside witness*carrier".to_string(),
            ));
        }
        Ok(())
    }
}

/// Optimal translate sets witnessing that two approximate subgroups cover
/// each other: `left ⊆ z0*right`, `right ⊆ z1*left`, `n = max(|z0|,|z1|)`.
#[derive(Clone, Debug)]
pub struct CommensurabilityCertificate {
    pub left: ApproximateSubgroup,
    pub right: ApproximateSubgroup,
    pub n: usize,
    pub z0: GroupSubset,
    pub z1: GroupSubset,
}

impl CommensurabilityCertificate {
    pub fn verify(&self) -> Result<()> {
        if self.n != self.z0.len().max(self.z1.len()) {
            return Err(Error::lemma(
                "commensurability-certificate",
                format!("n {} != max translate sizes", self.n),
            ));
        }
        let fwd = self.z0.product(&self.right.carrier)?;
        if !self.left.carrier.is_subset(&fwd) {
            return Err(Error::lemma(
                "commensurability-certificate",
                "left not inside z0*right".to_string(),
            ));
        }
        let bwd = self.z1.product(&self.left.carrier)?;
        if !self.right.carrier.is_subset(&bwd) {
            return Err(Error::lemma(
                "commensurability-certificate",
                "right not inside z1*left".to_string(),
            ));
        }
        Ok(())
    }

    /// The same certificate read in the other direction.
    pub fn flipped(&self) -> Self {
        CommensurabilityCertificate {
            left: self.right.clone(),
            right: self.left.clone(),
            n: self.n,
            z0: self.z1.clone(),
            z1: self.z0.clone(),
        }
    }
}

/// An ordered list of approximate subgroups of one group, with exact uniform
/// constants and the full matrix of pairwise commensurability certificates.
#[derive(Clone, Debug)]
pub struct Family {
    pub members: Vec<ApproximateSubgroup>,
    pub k_uniform: usize,
    pub n_uniform: usize,
    /// `pairwise[i][j]` relates member `i` (left) to member `j` (right).
    pub pairwise: Vec<Vec<CommensurabilityCertificate>>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn group(&self) -> &std::sync::Arc<FiniteGroup> {
        self.members[0].carrier.group()
    }

    pub fn carriers(&self) -> impl Iterator<Item = &GroupSubset> {
        self.members.iter().map(|m| &m.carrier)
    }
}

/// The exact minimal doubling constant of a symmetric identity-containing
/// set, computed as the covering number of `a*a` by `a`.
pub fn minimal_doubling(a: &GroupSubset, limits: &SearchLimits) -> Result<ApproximateSubgroup> {
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric {
            what: "minimal_doubling input".to_string(),
        });
    }
    if !a.contains_identity() {
        return Err(Error::MissingIdentity {
            what: "minimal_doubling input".to_string(),
        });
    }
    let square = a.product(a)?;
    let cover = covering_number(&square, a, limits)?;
    Ok(ApproximateSubgroup {
        carrier: a.clone(),
        doubling_k: cover.size,
        doubling_witness: cover.translates,
    })
}

/// Exact two-sided commensurability constant with optimal translate sets.
pub fn commensurability(
    x: &ApproximateSubgroup,
    y: &ApproximateSubgroup,
    limits: &SearchLimits,
) -> Result<CommensurabilityCertificate> {
    if !FiniteGroup::same_group(x.carrier.group(), y.carrier.group()) {
        return Err(Error::GroupMismatch {
            context: "commensurability".to_string(),
        });
    }
    let fwd = covering_number(&x.carrier, &y.carrier, limits)?;
    let bwd = covering_number(&y.carrier, &x.carrier, limits)?;
    Ok(CommensurabilityCertificate {
        left: x.clone(),
        right: y.clone(),
        n: fwd.size.max(bwd.size),
        z0: fwd.translates,
        z1: bwd.translates,
    })
}

/// Validates a family: shared group, every member symmetric with identity,
/// exact doubling constants, and all pairwise certificates. The uniform
/// constants are the maxima of the exact per-member / per-pair values.
pub fn family_validate(sets: &[GroupSubset], limits: &SearchLimits) -> Result<Family> {
    if sets.is_empty() {
        return Err(Error::EmptyInput {
            what: "family".to_string(),
        });
    }
    let group = sets[0].group();
    for (i, s) in sets.iter().enumerate() {
        if !FiniteGroup::same_group(group, s.group()) {
            return Err(Error::GroupMismatch {
                context: format!("family member {i}"),
            });
        }
        if !s.is_symmetric() {
            return Err(Error::NotSymmetric {
                what: format!("family member {i}"),
            });
        }
        if !s.contains_identity() {
            return Err(Error::MissingIdentity {
                what: format!("family member {i}"),
            });
        }
    }
    let members: Vec<ApproximateSubgroup> = sets
        .iter()
        .map(|s| minimal_doubling(s, limits))
        .collect::<Result<_>>()?;
    let k_uniform = members.iter().map(|m| m.doubling_k).max().unwrap_or(1);

    let n = members.len();
    let mut pairwise: Vec<Vec<Option<CommensurabilityCertificate>>> = vec![vec![None; n]; n];
    let mut n_uniform = 1;
    for i in 0..n {
        for j in i..n {
            let cert = commensurability(&members[i], &members[j], limits)?;
            n_uniform = n_uniform.max(cert.n);
            if i != j {
                pairwise[j][i] = Some(cert.flipped());
            }
            pairwise[i][j] = Some(cert);
        }
    }
    let pairwise = pairwise
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("filled")).collect())
        .collect();
    Ok(Family {
        members,
        k_uniform,
        n_uniform,
        pairwise,
    })
}

/// The family of squares `{X*X}`, revalidated exactly. The recomputed
/// constants must satisfy `K' <= K^3` and `N' <= N*K`; a failure is an
/// implementation bug surfaced as `LemmaViolation`.
pub fn family_square(f: &Family, limits: &SearchLimits) -> Result<Family> {
    let squares: Vec<GroupSubset> = f
        .members
        .iter()
        .map(|m| m.carrier.product(&m.carrier))
        .collect::<Result<_>>()?;
    let squared = family_validate(&squares, limits)?;
    let k_bound = f.k_uniform.saturating_pow(3);
    if squared.k_uniform > k_bound {
        return Err(Error::lemma(
            "remark-square",
            format!(
                "K of squared family is {} > K^3 = {}",
                squared.k_uniform, k_bound
            ),
        ));
    }
    let n_bound = f.n_uniform.saturating_mul(f.k_uniform);
    if squared.n_uniform > n_bound {
        return Err(Error::lemma(
            "remark-square",
            format!(
                "N of squared family is {} > N*K = {}",
                squared.n_uniform, n_bound
            ),
        ));
    }
    Ok(squared)
}

/// The constructive commensurability witness for a product of family
/// members, built exactly as in the product lemma, together with the exact
/// optimal covering numbers for comparison.
#[derive(Clone, Debug)]
pub struct ProductCommensurabilityReport {
    /// The product set `T = parts[0] * parts[1] * ... * parts[n-1]`.
    pub product: GroupSubset,
    /// Proof-construction translate set with `T ⊆ forward * x`.
    pub forward: GroupSubset,
    /// Proof-construction translate set with `x ⊆ backward * T`.
    pub backward: GroupSubset,
    /// The lemma bound `(N*K)^(n-1) * N` on `|forward|`.
    pub bound: u128,
    /// Exact covering numbers, for measuring the proof-vs-optimum gap.
    pub optimal_forward: usize,
    pub optimal_backward: usize,
}

/// Builds the product lemma's witness for `T = prod(parts)` against member
/// `x`: chains the stored pairwise covers with the doubling witnesses, then
/// checks the containments and the `(N*K)^(n-1)*N` bound.
pub fn product_commensurability_witness(
    parts: &[usize],
    x_index: usize,
    f: &Family,
    limits: &SearchLimits,
) -> Result<ProductCommensurabilityReport> {
    if parts.is_empty() {
        return Err(Error::EmptyInput {
            what: "product parts".to_string(),
        });
    }
    for &p in parts.iter().chain([&x_index]) {
        if p >= f.len() {
            return Err(Error::InvalidInstance(format!(
                "member index {p} out of range for family of {}",
                f.len()
            )));
        }
    }
    let n = parts.len();
    let x = &f.members[x_index];

    let mut product = f.members[parts[0]].carrier.clone();
    for &p in &parts[1..] {
        product = product.product(&f.members[p].carrier)?;
    }

    // forward: T ⊆ (prod over i of N_i K_i) N_{n-1} x, where N_i covers
    // part i by part i+1 and K_i is the doubling witness of part i+1.
    let group = f.group();
    let mut forward = GroupSubset::identity_singleton(group);
    for w in 0..n.saturating_sub(1) {
        let cover = &f.pairwise[parts[w]][parts[w + 1]].z0;
        forward = forward.product(cover)?;
        forward = forward.product(&f.members[parts[w + 1]].doubling_witness)?;
    }
    forward = forward.product(&f.pairwise[parts[n - 1]][x_index].z0)?;

    // backward: x ⊆ Z * parts[0] ⊆ Z * T, since every other part contains
    // the identity.
    let backward = f.pairwise[x_index][parts[0]].z0.clone();

    let nk = (f.n_uniform as u128).saturating_mul(f.k_uniform as u128);
    let bound = nk
        .saturating_pow(n as u32 - 1)
        .saturating_mul(f.n_uniform as u128);

    if (forward.len() as u128) > bound {
        return Err(Error::lemma(
            "lem-prodcom",
            format!("forward witness size {} exceeds bound {}", forward.len(), bound),
        ));
    }
    if backward.len() > f.n_uniform {
        return Err(Error::lemma(
            "lem-prodcom",
            format!("backward witness size {} exceeds N = {}", backward.len(), f.n_uniform),
        ));
    }
    let fwd_image = forward.product(&x.carrier)?;
    if !product.is_subset(&fwd_image) {
        return Err(Error::lemma(
            "lem-prodcom",
            "product not inside forward*x".to_string(),
        ));
    }
    let bwd_image = backward.product(&product)?;
    if !x.carrier.is_subset(&bwd_image) {
        return Err(Error::lemma(
            "lem-prodcom",
            "x not inside backward*product".to_string(),
        ));
    }

    let optimal_forward = covering_number(&product, &x.carrier, limits)?.size;
    // the product need not be symmetric, so the general search is used
    let optimal_backward =
        crate::covering::covering_number_general(&x.carrier, &product, limits)?.size;
    Ok(ProductCommensurabilityReport {
        product,
        forward,
        backward,
        bound,
        optimal_forward,
        optimal_backward,
    })
}

/// The square-intersection lemma's witness `E = X1 * X0`: `X0` a greedy
/// maximal disjoint family of `y`-translates centered in `x`, `X1` the
/// doubling witness of `x`. Checks `|E| <= K*N` and
/// `x^2 ⊆ E * (x^2 ∩ y^2)` before returning `E`.
pub fn xx_intersection_witness(
    x: &ApproximateSubgroup,
    y: &ApproximateSubgroup,
    cert: &CommensurabilityCertificate,
) -> Result<GroupSubset> {
    let x0 = maximal_disjoint_family(&x.carrier, &y.carrier)?;
    let e = x.doubling_witness.product(&x0.centers)?;
    let bound = x.doubling_k * cert.n;
    if e.len() > bound {
        return Err(Error::lemma(
            "lem-xx",
            format!("|E| = {} exceeds K*N = {}", e.len(), bound),
        ));
    }
    let xx = x.carrier.product(&x.carrier)?;
    let yy = y.carrier.product(&y.carrier)?;
    let core = xx.intersection(&yy)?;
    let image = e.product(&core)?;
    if !xx.is_subset(&image) {
        return Err(Error::lemma(
            "lem-xx",
            format!("XX not inside E*(XX ∩ YY); E = {e:?}"),
        ));
    }
    Ok(e)
}
