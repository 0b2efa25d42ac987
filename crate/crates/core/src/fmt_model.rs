//! Excess free-energy densities over weighted densities, bulk
//! thermodynamics, and the scaled-particle residual.
//!
//! The excess free energy per unit volume (in units of k_BT) is a function
//! of the weighted densities `n_A`. Two closed forms are built in, plus a
//! generalized coefficient-table form that contains both:
//!
//! ```text
//! Φ_R  = −n_χ ln(1−n_v) + (n_κ0 n_σ0 − n_κ1·n_σ1)/(1−n_v)
//!        + (1/24π)(n_σ0³ − 3 n_σ0 n_σ1·n_σ1)/(1−n_v)²
//!
//! Φ_T  = same first two terms, third term replaced by
//!        −(3/16π)[n_σ0 n_σ1·n_σ1 − n_σ1·n_σ2 n_σ1
//!                 + tr(n_σ2³) − n_σ0 tr(n_σ2²)]/(1−n_v)²
//! ```
//!
//! In isotropic bulk (`n_σ1 = n_κ1 = 0`, `n_σ2 = (n_σ0/3)𝕀`) the tensor
//! third-order term reduces exactly to Rosenfeld's `n_σ0³/24π` form, so both
//! variants share the bulk equation of state — the Percus–Yevick
//! compressibility form `Z = (1+η+η²)/(1−η)³` for hard spheres.
//!
//! The generalized form assembles Φ from derivatives of the single
//! generating function
//!
//! ```text
//! φ(n_v) = (1−n_v) ln(1−n_v) + n_v,
//! φ′ = −ln(1−n_v),  φ″ = 1/(1−n_v),  φ^(k) = (k−2)!/(1−n_v)^(k−1)  (k ≥ 2),
//! ```
//!
//! as `Φ = Σ_k Σ_terms C·n_{A₁}⋯n_{A_k}·φ^(k)(n_v)`, each monomial fully
//! contracted over its tensor slots. All three variants satisfy the
//! scaled-particle differential identity
//!
//! ```text
//! Φ + ∂Φ/∂n_v − Σ_A n_A ∂Φ/∂n_A = n_χ
//! ```
//!
//! identically, which [`spt_residual`] exposes as a testable residual.

use crate::geometry::{minkowski_measures, ConvexBody};
use crate::weights::{WeightIndex, WeightTag};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Weighted densities at a point (or in bulk).
///
/// Naming: `n_k*` are the mean-curvature weighted densities (with the 1/4π
/// folded in), `n_s*` the normal-tensor densities, `n_delta2` the curvature
/// deviator density, `n_v` the local packing fraction, `n_chi` the Euler
/// density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedDensities {
    pub n_chi: f64,
    pub n_k0: f64,
    pub n_k1: Vector3<f64>,
    pub n_s0: f64,
    pub n_s1: Vector3<f64>,
    pub n_s2: Matrix3<f64>,
    pub n_delta2: Matrix3<f64>,
    pub n_v: f64,
}

impl WeightedDensities {
    /// All densities zero (ideal-gas limit).
    pub fn zero() -> Self {
        WeightedDensities {
            n_chi: 0.0,
            n_k0: 0.0,
            n_k1: Vector3::zeros(),
            n_s0: 0.0,
            n_s1: Vector3::zeros(),
            n_s2: Matrix3::zeros(),
            n_delta2: Matrix3::zeros(),
            n_v: 0.0,
        }
    }
}

/// Partial derivatives `∂Φ/∂n_A`, one slot per density component.
///
/// Tensor partials are symmetrized (the densities they pair with are
/// symmetric tensors).
#[derive(Debug, Clone, Copy)]
pub struct PhiPartials {
    pub d_chi: f64,
    pub d_k0: f64,
    pub d_k1: Vector3<f64>,
    pub d_s0: f64,
    pub d_s1: Vector3<f64>,
    pub d_s2: Matrix3<f64>,
    pub d_delta2: Matrix3<f64>,
    pub d_v: f64,
}

impl PhiPartials {
    fn zero() -> Self {
        PhiPartials {
            d_chi: 0.0,
            d_k0: 0.0,
            d_k1: Vector3::zeros(),
            d_s0: 0.0,
            d_s1: Vector3::zeros(),
            d_s2: Matrix3::zeros(),
            d_delta2: Matrix3::zeros(),
            d_v: 0.0,
        }
    }

    /// Full contraction `Σ_A n_A ∂Φ/∂n_A` (tensor slots double-dotted).
    pub fn contract(&self, n: &WeightedDensities) -> f64 {
        self.d_chi * n.n_chi
            + self.d_k0 * n.n_k0
            + self.d_k1.dot(&n.n_k1)
            + self.d_s0 * n.n_s0
            + self.d_s1.dot(&n.n_s1)
            + (self.d_s2.component_mul(&n.n_s2)).sum()
            + (self.d_delta2.component_mul(&n.n_delta2)).sum()
            + self.d_v * n.n_v
    }
}

/// One monomial of the generalized form: `coeff · Π n_{indices} · φ^(order)`.
///
/// The indices are an unordered multiset (stored once per monomial, i.e.
/// already symmetrized); the contraction over tensor slots is the unique
/// full chain contraction for the supported patterns.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TableTerm {
    /// Derivative order `k` of the generating function this term multiplies.
    pub order: usize,
    /// Scalar coefficient of the (symmetrized) monomial.
    pub coeff: f64,
    /// Density factors; must have exactly `order` entries.
    pub indices: Vec<WeightIndex>,
}

/// Generalized coefficient-table free energy: `Φ = Σ C·n⋯n·φ^(k)(n_v)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeneralizedModel {
    /// Maximum derivative order (hard-sphere physics uses 3).
    pub dimension: usize,
    /// Monomial terms.
    pub terms: Vec<TableTerm>,
}

/// Selector for the excess free-energy density.
#[derive(Debug, Clone, PartialEq)]
pub enum FreeEnergyModel {
    /// Scalar/vector closed form with the `n_σ0³`-type third-order term.
    RosenfeldOriginal,
    /// Tensor-corrected third-order term (vanishing at two-point contacts,
    /// exact three-normal geometry).
    TarazonaTensor,
    /// Explicit coefficient tables over the generating function.
    Generalized(GeneralizedModel),
}

/// Model-evaluation failures.
#[derive(Debug, Clone, Error)]
pub enum FmtModelError {
    #[error("packing fraction n_v = {n_v} is outside the domain (requires n_v < 1)")]
    PackingFraction { n_v: f64 },
    #[error("table term {term}: order {order} exceeds model dimension {dimension}")]
    OrderExceedsDimension {
        term: usize,
        order: usize,
        dimension: usize,
    },
    #[error("table term {term}: has {got} indices but order {order}")]
    WrongArity {
        term: usize,
        got: usize,
        order: usize,
    },
    #[error(
        "table term {term}: index {tag:?} rank {rank} is not a stored weighted density (volume \
         enters only through the generating function)"
    )]
    UnsupportedTableIndex {
        term: usize,
        tag: WeightTag,
        rank: usize,
    },
    #[error(
        "table term {term}: no full contraction for {vectors} vector and {tensors} tensor slots"
    )]
    UnsupportedContraction {
        term: usize,
        vectors: usize,
        tensors: usize,
    },
}

/// Generating function values `{φ, φ′, φ″, φ‴}` at `n_v`:
///
/// ```text
/// φ = (1−n_v)ln(1−n_v) + n_v,  φ′ = −ln(1−n_v),
/// φ″ = 1/(1−n_v),              φ‴ = 1/(1−n_v)².
/// ```
pub fn generating_phi(n_v: f64) -> Result<[f64; 4], FmtModelError> {
    if n_v >= 1.0 {
        return Err(FmtModelError::PackingFraction { n_v });
    }
    let free = 1.0 - n_v;
    Ok([
        free * free.ln() + n_v,
        -free.ln(),
        1.0 / free,
        1.0 / (free * free),
    ])
}

/// k-th derivative of the generating function for `k ≥ 1`:
/// `φ′ = −ln(1−n_v)`, `φ^(k) = (k−2)!/(1−n_v)^(k−1)` for `k ≥ 2`.
fn generating_phi_derivative(n_v: f64, k: usize) -> f64 {
    let free = 1.0 - n_v;
    match k {
        0 => free * free.ln() + n_v,
        1 => -free.ln(),
        _ => {
            let mut factorial = 1.0;
            for i in 2..k {
                factorial *= (i - 1) as f64;
            }
            factorial / free.powi(k as i32 - 1)
        }
    }
}

/// The Rosenfeld closed form expressed as coefficient tables (dimension 3).
pub fn rosenfeld_tables() -> GeneralizedModel {
    let idx = WeightIndex::new;
    GeneralizedModel {
        dimension: 3,
        terms: vec![
            TableTerm {
                order: 1,
                coeff: 1.0,
                indices: vec![idx(WeightTag::Chi, 0)],
            },
            TableTerm {
                order: 2,
                coeff: 1.0,
                indices: vec![idx(WeightTag::Kappa, 0), idx(WeightTag::Sigma, 0)],
            },
            TableTerm {
                order: 2,
                coeff: -1.0,
                indices: vec![idx(WeightTag::Kappa, 1), idx(WeightTag::Sigma, 1)],
            },
            TableTerm {
                order: 3,
                coeff: 1.0 / (24.0 * PI),
                indices: vec![
                    idx(WeightTag::Sigma, 0),
                    idx(WeightTag::Sigma, 0),
                    idx(WeightTag::Sigma, 0),
                ],
            },
            TableTerm {
                order: 3,
                coeff: -1.0 / (8.0 * PI),
                indices: vec![
                    idx(WeightTag::Sigma, 0),
                    idx(WeightTag::Sigma, 1),
                    idx(WeightTag::Sigma, 1),
                ],
            },
        ],
    }
}

/// The tensor-corrected closed form expressed as coefficient tables.
pub fn tarazona_tables() -> GeneralizedModel {
    let idx = WeightIndex::new;
    let c = 3.0 / (16.0 * PI);
    let mut model = rosenfeld_tables();
    model.terms.truncate(3); // keep the order-1 and order-2 terms
    model.terms.extend([
        TableTerm {
            order: 3,
            coeff: -c,
            indices: vec![
                idx(WeightTag::Sigma, 0),
                idx(WeightTag::Sigma, 1),
                idx(WeightTag::Sigma, 1),
            ],
        },
        TableTerm {
            order: 3,
            coeff: c,
            indices: vec![
                idx(WeightTag::Sigma, 1),
                idx(WeightTag::Sigma, 2),
                idx(WeightTag::Sigma, 1),
            ],
        },
        TableTerm {
            order: 3,
            coeff: -c,
            indices: vec![
                idx(WeightTag::Sigma, 2),
                idx(WeightTag::Sigma, 2),
                idx(WeightTag::Sigma, 2),
            ],
        },
        TableTerm {
            order: 3,
            coeff: c,
            indices: vec![
                idx(WeightTag::Sigma, 0),
                idx(WeightTag::Sigma, 2),
                idx(WeightTag::Sigma, 2),
            ],
        },
    ]);
    model
}

/// Density slot value by index.
enum Slot {
    Scalar(f64),
    Vector(Vector3<f64>),
    Tensor(Matrix3<f64>),
}

fn lookup_slot(
    n: &WeightedDensities,
    term: usize,
    index: &WeightIndex,
) -> Result<Slot, FmtModelError> {
    let bad = || FmtModelError::UnsupportedTableIndex {
        term,
        tag: index.tag,
        rank: index.rank,
    };
    match (index.tag, index.rank) {
        (WeightTag::Chi, 0) => Ok(Slot::Scalar(n.n_chi)),
        (WeightTag::Kappa, 0) => Ok(Slot::Scalar(n.n_k0)),
        (WeightTag::Kappa, 1) => Ok(Slot::Vector(n.n_k1)),
        (WeightTag::Sigma, 0) => Ok(Slot::Scalar(n.n_s0)),
        (WeightTag::Sigma, 1) => Ok(Slot::Vector(n.n_s1)),
        (WeightTag::Sigma, 2) => Ok(Slot::Tensor(n.n_s2)),
        (WeightTag::Delta, 2) => Ok(Slot::Tensor(n.n_delta2)),
        _ => Err(bad()),
    }
}

/// Value of one monomial's full contraction, plus (optionally) its gradient
/// accumulated into `partials` with the prefactor `weight`.
fn contract_monomial(
    n: &WeightedDensities,
    term_no: usize,
    indices: &[WeightIndex],
    mut grad: Option<(&mut PhiPartials, f64)>,
) -> Result<f64, FmtModelError> {
    let mut scalars: Vec<(usize, f64)> = Vec::new();
    let mut vectors: Vec<(usize, Vector3<f64>)> = Vec::new();
    let mut tensors: Vec<(usize, Matrix3<f64>)> = Vec::new();
    for (slot, index) in indices.iter().enumerate() {
        match lookup_slot(n, term_no, index)? {
            Slot::Scalar(s) => scalars.push((slot, s)),
            Slot::Vector(v) => vectors.push((slot, v)),
            Slot::Tensor(t) => tensors.push((slot, t)),
        }
    }
    let scalar_product: f64 = scalars.iter().map(|(_, s)| s).product();

    // Core contraction over the non-scalar slots.
    let core = match (vectors.len(), tensors.len()) {
        (0, 0) => 1.0,
        (2, 0) => vectors[0].1.dot(&vectors[1].1),
        (2, 1) => vectors[0].1.dot(&(tensors[0].1 * vectors[1].1)),
        (0, 2) => (tensors[0].1 * tensors[1].1).trace(),
        (0, 3) => (tensors[0].1 * tensors[1].1 * tensors[2].1).trace(),
        (v, t) => {
            return Err(FmtModelError::UnsupportedContraction {
                term: term_no,
                vectors: v,
                tensors: t,
            })
        }
    };
    let value = scalar_product * core;

    if let Some((partials, weight)) = grad.take() {
        // Scalar-slot gradients: product of the remaining scalars × core.
        for (i, &(slot, _)) in scalars.iter().enumerate() {
            let mut others = 1.0;
            for (j, &(_, s)) in scalars.iter().enumerate() {
                if j != i {
                    others *= s;
                }
            }
            accumulate_scalar(partials, &indices[slot], weight * others * core);
        }
        // Vector/tensor-slot gradients per pattern.
        match (vectors.len(), tensors.len()) {
            (0, 0) => {}
            (2, 0) => {
                let (sa, va) = vectors[0];
                let (sb, vb) = vectors[1];
                accumulate_vector(partials, &indices[sa], weight * scalar_product * vb);
                accumulate_vector(partials, &indices[sb], weight * scalar_product * va);
            }
            (2, 1) => {
                let (sa, va) = vectors[0];
                let (sb, vb) = vectors[1];
                let (st, t) = tensors[0];
                accumulate_vector(partials, &indices[sa], weight * scalar_product * (t * vb));
                accumulate_vector(
                    partials,
                    &indices[sb],
                    weight * scalar_product * (t.transpose() * va),
                );
                let outer = va * vb.transpose();
                accumulate_tensor(
                    partials,
                    &indices[st],
                    weight * scalar_product * 0.5 * (outer + outer.transpose()),
                );
            }
            (0, 2) => {
                let (sa, ta) = tensors[0];
                let (sb, tb) = tensors[1];
                accumulate_tensor(
                    partials,
                    &indices[sa],
                    weight * scalar_product * tb.transpose(),
                );
                accumulate_tensor(
                    partials,
                    &indices[sb],
                    weight * scalar_product * ta.transpose(),
                );
            }
            (0, 3) => {
                let (sa, ta) = tensors[0];
                let (sb, tb) = tensors[1];
                let (sc, tc) = tensors[2];
                // d tr(ABC)/dA = (BC)ᵀ, cyclic for the others; symmetrized
                // because the density arguments are symmetric tensors.
                let sym = |m: Matrix3<f64>| 0.5 * (m + m.transpose());
                accumulate_tensor(
                    partials,
                    &indices[sa],
                    weight * scalar_product * sym((tb * tc).transpose()),
                );
                accumulate_tensor(
                    partials,
                    &indices[sb],
                    weight * scalar_product * sym((tc * ta).transpose()),
                );
                accumulate_tensor(
                    partials,
                    &indices[sc],
                    weight * scalar_product * sym((ta * tb).transpose()),
                );
            }
            _ => unreachable!("rejected above"),
        }
    }
    Ok(value)
}

fn accumulate_scalar(p: &mut PhiPartials, index: &WeightIndex, value: f64) {
    match (index.tag, index.rank) {
        (WeightTag::Chi, 0) => p.d_chi += value,
        (WeightTag::Kappa, 0) => p.d_k0 += value,
        (WeightTag::Sigma, 0) => p.d_s0 += value,
        _ => unreachable!("slot classified as scalar"),
    }
}

fn accumulate_vector(p: &mut PhiPartials, index: &WeightIndex, value: Vector3<f64>) {
    match (index.tag, index.rank) {
        (WeightTag::Kappa, 1) => p.d_k1 += value,
        (WeightTag::Sigma, 1) => p.d_s1 += value,
        _ => unreachable!("slot classified as vector"),
    }
}

fn accumulate_tensor(p: &mut PhiPartials, index: &WeightIndex, value: Matrix3<f64>) {
    match (index.tag, index.rank) {
        (WeightTag::Sigma, 2) => p.d_s2 += value,
        (WeightTag::Delta, 2) => p.d_delta2 += value,
        _ => unreachable!("slot classified as tensor"),
    }
}

impl GeneralizedModel {
    /// Structural validation: arity, order bounds, index support, and
    /// contraction patterns (probed against zero densities).
    pub fn validate(&self) -> Result<(), FmtModelError> {
        let zero = WeightedDensities::zero();
        for (i, term) in self.terms.iter().enumerate() {
            if term.order > self.dimension {
                return Err(FmtModelError::OrderExceedsDimension {
                    term: i,
                    order: term.order,
                    dimension: self.dimension,
                });
            }
            if term.indices.len() != term.order {
                return Err(FmtModelError::WrongArity {
                    term: i,
                    got: term.indices.len(),
                    order: term.order,
                });
            }
            contract_monomial(&zero, i, &term.indices, None)?;
        }
        Ok(())
    }

    fn phi(&self, n: &WeightedDensities) -> Result<f64, FmtModelError> {
        if n.n_v >= 1.0 {
            return Err(FmtModelError::PackingFraction { n_v: n.n_v });
        }
        let mut phi = 0.0;
        for (i, term) in self.terms.iter().enumerate() {
            let contraction = contract_monomial(n, i, &term.indices, None)?;
            phi += term.coeff * contraction * generating_phi_derivative(n.n_v, term.order);
        }
        Ok(phi)
    }

    fn partials(&self, n: &WeightedDensities) -> Result<PhiPartials, FmtModelError> {
        if n.n_v >= 1.0 {
            return Err(FmtModelError::PackingFraction { n_v: n.n_v });
        }
        let mut partials = PhiPartials::zero();
        for (i, term) in self.terms.iter().enumerate() {
            let dk = generating_phi_derivative(n.n_v, term.order);
            let contraction =
                contract_monomial(n, i, &term.indices, Some((&mut partials, term.coeff * dk)))?;
            partials.d_v +=
                term.coeff * contraction * generating_phi_derivative(n.n_v, term.order + 1);
        }
        Ok(partials)
    }
}

/// Excess free-energy density `Φ(n)` for the selected model.
///
/// # Errors
///
/// `PackingFraction` for `n_v ≥ 1`; table errors for invalid generalized
/// models.
pub fn phi_excess(n: &WeightedDensities, model: &FreeEnergyModel) -> Result<f64, FmtModelError> {
    match model {
        FreeEnergyModel::RosenfeldOriginal => {
            if n.n_v >= 1.0 {
                return Err(FmtModelError::PackingFraction { n_v: n.n_v });
            }
            let free = 1.0 - n.n_v;
            let second = (n.n_k0 * n.n_s0 - n.n_k1.dot(&n.n_s1)) / free;
            let third =
                (n.n_s0.powi(3) - 3.0 * n.n_s0 * n.n_s1.dot(&n.n_s1)) / (24.0 * PI * free * free);
            Ok(-n.n_chi * free.ln() + second + third)
        }
        FreeEnergyModel::TarazonaTensor => {
            if n.n_v >= 1.0 {
                return Err(FmtModelError::PackingFraction { n_v: n.n_v });
            }
            let free = 1.0 - n.n_v;
            let second = (n.n_k0 * n.n_s0 - n.n_k1.dot(&n.n_s1)) / free;
            let s2 = n.n_s2;
            let bracket = n.n_s0 * n.n_s1.dot(&n.n_s1) - n.n_s1.dot(&(s2 * n.n_s1))
                + (s2 * s2 * s2).trace()
                - n.n_s0 * (s2 * s2).trace();
            let third = -3.0 / (16.0 * PI) * bracket / (free * free);
            Ok(-n.n_chi * free.ln() + second + third)
        }
        FreeEnergyModel::Generalized(g) => g.phi(n),
    }
}

/// Analytic partial derivatives `∂Φ/∂n_A` for the selected model.
pub fn phi_partials(
    n: &WeightedDensities,
    model: &FreeEnergyModel,
) -> Result<PhiPartials, FmtModelError> {
    match model {
        FreeEnergyModel::RosenfeldOriginal => {
            if n.n_v >= 1.0 {
                return Err(FmtModelError::PackingFraction { n_v: n.n_v });
            }
            let free = 1.0 - n.n_v;
            let mut p = PhiPartials::zero();
            p.d_chi = -free.ln();
            p.d_k0 = n.n_s0 / free;
            p.d_k1 = -n.n_s1 / free;
            p.d_s0 = n.n_k0 / free
                + (3.0 * n.n_s0 * n.n_s0 - 3.0 * n.n_s1.dot(&n.n_s1)) / (24.0 * PI * free * free);
            p.d_s1 = -n.n_k1 / free - 6.0 * n.n_s0 * n.n_s1 / (24.0 * PI * free * free);
            p.d_v = n.n_chi / free
                + (n.n_k0 * n.n_s0 - n.n_k1.dot(&n.n_s1)) / (free * free)
                + 2.0 * (n.n_s0.powi(3) - 3.0 * n.n_s0 * n.n_s1.dot(&n.n_s1))
                    / (24.0 * PI * free.powi(3));
            Ok(p)
        }
        FreeEnergyModel::TarazonaTensor => {
            if n.n_v >= 1.0 {
                return Err(FmtModelError::PackingFraction { n_v: n.n_v });
            }
            let free = 1.0 - n.n_v;
            let s2 = n.n_s2;
            let c = 3.0 / (16.0 * PI);
            let mut p = PhiPartials::zero();
            p.d_chi = -free.ln();
            p.d_k0 = n.n_s0 / free;
            p.d_k1 = -n.n_s1 / free;
            let bracket = n.n_s0 * n.n_s1.dot(&n.n_s1) - n.n_s1.dot(&(s2 * n.n_s1))
                + (s2 * s2 * s2).trace()
                - n.n_s0 * (s2 * s2).trace();
            p.d_s0 = n.n_k0 / free - c * (n.n_s1.dot(&n.n_s1) - (s2 * s2).trace()) / (free * free);
            p.d_s1 =
                -n.n_k1 / free - c * (2.0 * n.n_s0 * n.n_s1 - 2.0 * (s2 * n.n_s1)) / (free * free);
            let outer = n.n_s1 * n.n_s1.transpose();
            p.d_s2 = -c * (-outer + 3.0 * s2 * s2 - 2.0 * n.n_s0 * s2) / (free * free);
            p.d_v = n.n_chi / free + (n.n_k0 * n.n_s0 - n.n_k1.dot(&n.n_s1)) / (free * free)
                - 2.0 * c * bracket / free.powi(3);
            Ok(p)
        }
        FreeEnergyModel::Generalized(g) => g.partials(n),
    }
}

/// Scaled-particle residual
///
/// ```text
/// r = Φ + ∂Φ/∂n_v − Σ_A n_A ∂Φ/∂n_A − n_χ,
/// ```
///
/// which vanishes identically for every model expressible through the
/// generating function (the pole orders match the monomial degrees).
pub fn spt_residual(n: &WeightedDensities, model: &FreeEnergyModel) -> Result<f64, FmtModelError> {
    let phi = phi_excess(n, model)?;
    let partials = phi_partials(n, model)?;
    Ok(phi + partials.d_v - partials.contract(n) - n.n_chi)
}

/// Weighted densities of a uniform fluid of the given body at number
/// density ρ: each density is ρ × (rotation-averaged fundamental measure),
///
/// ```text
/// n_χ = ρ·χ(D),  n_k0 = ρM/4π,  n_s0 = ρS,  n_v = ρV,
/// n_s2 = ρ(S/3)𝕀,  vectors and deviator average to zero.
/// ```
pub fn bulk_weighted_densities(body: &ConvexBody, rho: f64) -> WeightedDensities {
    let m = minkowski_measures(body);
    WeightedDensities {
        n_chi: rho * m.euler_surface / 2.0,
        n_k0: rho * m.mean_curvature_integral / (4.0 * PI),
        n_k1: Vector3::zeros(),
        n_s0: rho * m.surface,
        n_s1: Vector3::zeros(),
        n_s2: Matrix3::identity() * (rho * m.surface / 3.0),
        n_delta2: Matrix3::zeros(),
        n_v: rho * m.volume,
    }
}

/// Bulk equation of state at packing fraction η.
#[derive(Debug, Clone, Copy)]
pub struct BulkEos {
    /// Compressibility factor `Z = βp/ρ`.
    pub z: f64,
    /// `βp` (1/length³).
    pub beta_pressure: f64,
    /// Excess chemical potential `βμ_ex`.
    pub beta_mu_excess: f64,
}

/// Bulk pressure and excess chemical potential at packing fraction `η`:
///
/// ```text
/// βp     = ρ + Σ_A n_A ∂Φ/∂n_A − Φ          (ρ from η = ρV)
/// βμ_ex  = Σ_A m_A ∂Φ/∂n_A                  (m_A = per-particle measures)
/// ```
///
/// For hard spheres either built-in variant yields the Percus–Yevick
/// compressibility form `Z = (1+η+η²)/(1−η)³`.
pub fn bulk_eos(
    body: &ConvexBody,
    eta: f64,
    model: &FreeEnergyModel,
) -> Result<BulkEos, FmtModelError> {
    if !(0.0..1.0).contains(&eta) {
        return Err(FmtModelError::PackingFraction { n_v: eta });
    }
    let volume = minkowski_measures(body).volume;
    let rho = eta / volume;
    let n = bulk_weighted_densities(body, rho);
    let phi = phi_excess(&n, model)?;
    let partials = phi_partials(&n, model)?;
    let beta_p = rho + partials.contract(&n) - phi;
    let per_particle = bulk_weighted_densities(body, 1.0);
    let mu_ex = partials.contract(&per_particle);
    Ok(BulkEos {
        z: if rho > 0.0 { beta_p / rho } else { 1.0 },
        beta_pressure: beta_p,
        beta_mu_excess: mu_ex,
    })
}

/// Reduced virial coefficients from the model's bulk pressure series.
#[derive(Debug, Clone, Copy)]
pub struct VirialCoefficients {
    pub b2_over_v: f64,
    pub b3_over_v2: f64,
}

/// Taylor coefficients of `βp(ρ)` about ρ = 0, reduced by the particle
/// volume.
///
/// Writing the bulk free energy as `Φ = Σ_k C_k ρ^k φ^(k)(ρV)` with bulk
/// contraction constants `C_k` (per-particle measures contracted through the
/// tables; `C₁ = χ(D)`), the expansion of `βp = ρ + ρ Φ′ − Φ` gives exactly
///
/// ```text
/// B₂ = C₁V + C₂,
/// B₃ = C₁V² + 2C₂V + 2C₃   (C₁ = 1 for convex bodies).
/// ```
///
/// For hard spheres both built-in variants give `B₂/v = 4`, `B₃/v² = 10`.
pub fn virial_series_bulk(
    body: &ConvexBody,
    model: &FreeEnergyModel,
) -> Result<VirialCoefficients, FmtModelError> {
    let tables = match model {
        FreeEnergyModel::RosenfeldOriginal => rosenfeld_tables(),
        FreeEnergyModel::TarazonaTensor => tarazona_tables(),
        FreeEnergyModel::Generalized(g) => g.clone(),
    };
    tables.validate()?;
    let per_particle = bulk_weighted_densities(body, 1.0);
    let volume = per_particle.n_v;
    let mut c = [0.0f64; 4]; // C_1..C_3 in c[1..=3]; higher orders do not reach B₃
    for (i, term) in tables.terms.iter().enumerate() {
        if term.order <= 3 {
            c[term.order] += term.coeff * contract_monomial(&per_particle, i, &term.indices, None)?;
        }
    }
    let b2 = c[1] * volume + c[2];
    let b3 = c[1] * volume * volume + 2.0 * c[2] * volume + 2.0 * c[3];
    Ok(VirialCoefficients {
        b2_over_v: b2 / volume,
        b3_over_v2: b3 / (volume * volume),
    })
}

/// Polarized third-order weight of three unit normals:
///
/// ```text
/// Φ₃(n₁,n₂,n₃) = (1/16π)[(1−c₁₂)(1−c₁₃)(1−c₂₃) − M₃],
/// ```
///
/// the tensor-model three-normal kernel: the crossing product minus the
/// squared triple product (Gram determinant `M₃`). Vanishes whenever two
/// normals coincide *and* for orthonormal triples.
pub fn tarazona_phi3(n1: &Vector3<f64>, n2: &Vector3<f64>, n3: &Vector3<f64>) -> f64 {
    let product = crate::weights::three_body_euler_form(n1, n2, n3);
    let m3 = crate::weights::intersection_determinant(&[*n1, *n2, *n3])
        .expect("three normals are always a valid Gram input");
    (product - m3) / (16.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sphere() -> ConvexBody {
        ConvexBody::sphere(1.0).unwrap()
    }

    /// Random admissible densities: n_v well inside [0, 0.9], other
    /// densities of mixed sign and size, tensors symmetric.
    fn random_densities(rng: &mut ChaCha8Rng) -> WeightedDensities {
        let mut scalar = |scale: f64| (rng.gen::<f64>() * 2.0 - 1.0) * scale;
        let n_chi = scalar(2.0);
        let n_k0 = scalar(2.0);
        let n_s0 = scalar(4.0);
        let n_v = rng.gen::<f64>() * 0.9;
        let mut vec3 = |scale: f64| {
            Vector3::new(
                (rng.gen::<f64>() * 2.0 - 1.0) * scale,
                (rng.gen::<f64>() * 2.0 - 1.0) * scale,
                (rng.gen::<f64>() * 2.0 - 1.0) * scale,
            )
        };
        let n_k1 = vec3(1.5);
        let n_s1 = vec3(3.0);
        let raw = Matrix3::from_fn(|_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let n_s2 = 0.5 * (raw + raw.transpose()) * 2.0;
        let raw_d = Matrix3::from_fn(|_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let n_delta2 = 0.5 * (raw_d + raw_d.transpose());
        WeightedDensities {
            n_chi,
            n_k0,
            n_k1,
            n_s0,
            n_s1,
            n_s2,
            n_delta2,
            n_v,
        }
    }

    #[test]
    fn phi_vanishes_at_zero_densities() {
        let zero = WeightedDensities::zero();
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
            FreeEnergyModel::Generalized(rosenfeld_tables()),
        ] {
            assert_eq!(phi_excess(&zero, &model).unwrap(), 0.0);
        }
    }

    #[test]
    fn generating_phi_reference_values() {
        let [phi, d1, d2, d3] = generating_phi(0.0).unwrap();
        assert_eq!([phi, d1, d2, d3], [0.0, 0.0, 1.0, 1.0]);
        let [phi, ..] = generating_phi(0.5).unwrap();
        assert!(
            (phi - 0.15342640972002735).abs() < 1e-15,
            "φ(0.5) = 0.5·ln(0.5) + 0.5, got {phi}"
        );
        assert!(generating_phi(1.0).is_err());
    }

    #[test]
    fn both_variants_agree_in_isotropic_bulk_with_closed_form() {
        // Frozen closed-form bulk free energy for hard spheres:
        // Φ = ρ[−ln(1−η) + 3η/(1−η) + (3/2)η²/(1−η)²].
        let eta: f64 = 0.3;
        let rho = eta / (4.0 * PI / 3.0);
        let n = bulk_weighted_densities(&sphere(), rho);
        let reference = rho
            * (-(1.0f64 - eta).ln()
                + 3.0 * eta / (1.0 - eta)
                + 1.5 * eta * eta / ((1.0 - eta) * (1.0 - eta)));
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
        ] {
            let phi = phi_excess(&n, &model).unwrap();
            assert!(
                (phi - reference).abs() < 1e-12 * reference.abs(),
                "{model:?} bulk Φ {phi} should equal the closed form {reference}"
            );
        }
    }

    #[test]
    fn tensor_variant_reduces_to_rosenfeld_in_isotropic_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut n = random_densities(&mut rng);
            n.n_k1 = Vector3::zeros();
            n.n_s1 = Vector3::zeros();
            n.n_s2 = Matrix3::identity() * (n.n_s0 / 3.0);
            let r = phi_excess(&n, &FreeEnergyModel::RosenfeldOriginal).unwrap();
            let t = phi_excess(&n, &FreeEnergyModel::TarazonaTensor).unwrap();
            assert!(
                (r - t).abs() <= 1e-12 * r.abs().max(1.0),
                "isotropic restriction must collapse the variants: {r} vs {t}"
            );
        }
    }

    #[test]
    fn generalized_tables_reproduce_both_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ros = FreeEnergyModel::Generalized(rosenfeld_tables());
        let tar = FreeEnergyModel::Generalized(tarazona_tables());
        for _ in 0..500 {
            let n = random_densities(&mut rng);
            let a = phi_excess(&n, &FreeEnergyModel::RosenfeldOriginal).unwrap();
            let b = phi_excess(&n, &ros).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "table form must match the Rosenfeld closed form: {a} vs {b}"
            );
            let a = phi_excess(&n, &FreeEnergyModel::TarazonaTensor).unwrap();
            let b = phi_excess(&n, &tar).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "table form must match the tensor closed form: {a} vs {b}"
            );
        }
    }

    #[test]
    fn partials_match_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let models = [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
            FreeEnergyModel::Generalized(tarazona_tables()),
        ];
        let h = 1e-5;
        for _ in 0..50 {
            let n = random_densities(&mut rng);
            for model in &models {
                let p = phi_partials(&n, model).unwrap();
                let fd = |plus: WeightedDensities, minus: WeightedDensities| {
                    (phi_excess(&plus, model).unwrap() - phi_excess(&minus, model).unwrap())
                        / (2.0 * h)
                };
                let mut plus = n;
                let mut minus = n;
                plus.n_s0 += h;
                minus.n_s0 -= h;
                let fd_s0 = fd(plus, minus);
                assert!(
                    (p.d_s0 - fd_s0).abs() < 1e-8 * p.d_s0.abs().max(1.0),
                    "∂Φ/∂n_s0 {} vs FD {}",
                    p.d_s0,
                    fd_s0
                );
                let mut plus = n;
                let mut minus = n;
                plus.n_v += h;
                minus.n_v -= h;
                let fd_v = fd(plus, minus);
                assert!(
                    (p.d_v - fd_v).abs() < 1e-6 * p.d_v.abs().max(1.0),
                    "∂Φ/∂n_v {} vs FD {}",
                    p.d_v,
                    fd_v
                );
                let mut plus = n;
                let mut minus = n;
                plus.n_s1.x += h;
                minus.n_s1.x -= h;
                let fd_s1x = fd(plus, minus);
                assert!(
                    (p.d_s1.x - fd_s1x).abs() < 1e-8 * p.d_s1.x.abs().max(1.0),
                    "∂Φ/∂n_s1x {} vs FD {}",
                    p.d_s1.x,
                    fd_s1x
                );
                // Off-diagonal tensor component: bump symmetrically.
                let mut plus = n;
                let mut minus = n;
                plus.n_s2[(0, 1)] += h;
                plus.n_s2[(1, 0)] += h;
                minus.n_s2[(0, 1)] -= h;
                minus.n_s2[(1, 0)] -= h;
                let fd_s2 = fd(plus, minus); // = d/dxy + d/dyx of Φ
                let analytic = p.d_s2[(0, 1)] + p.d_s2[(1, 0)];
                assert!(
                    (analytic - fd_s2).abs() < 1e-7 * analytic.abs().max(1.0),
                    "∂Φ/∂n_s2(xy+yx) {analytic} vs FD {fd_s2}"
                );
            }
        }
    }

    #[test]
    fn spt_residual_vanishes_for_random_admissible_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
            FreeEnergyModel::Generalized(tarazona_tables()),
        ] {
            for _ in 0..2000 {
                let n = random_densities(&mut rng);
                let phi = phi_excess(&n, &model).unwrap();
                let r = spt_residual(&n, &model).unwrap();
                assert!(
                    r.abs() <= 1e-12 * phi.abs().max(1.0),
                    "{model:?}: scaled-particle residual {r} too large (Φ = {phi})"
                );
            }
        }
    }

    #[test]
    fn bulk_densities_of_unit_spheres() {
        let rho = 0.21;
        let n = bulk_weighted_densities(&sphere(), rho);
        assert!((n.n_chi - rho).abs() < 1e-14);
        assert!((n.n_k0 - rho).abs() < 1e-14, "M/4π = 1 for the unit sphere");
        assert!((n.n_s0 - rho * 4.0 * PI).abs() < 1e-12);
        assert!((n.n_v - rho * 4.0 * PI / 3.0).abs() < 1e-13);
        assert_eq!(n.n_k1, Vector3::zeros());
        assert!((n.n_s2 - Matrix3::identity() * (rho * 4.0 * PI / 3.0)).norm() < 1e-12);

        let zero = bulk_weighted_densities(&sphere(), 0.0);
        assert_eq!(zero, WeightedDensities::zero());
    }

    #[test]
    fn bulk_eos_matches_py_compressibility_closed_form() {
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
        ] {
            for eta in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45] {
                let eos = bulk_eos(&sphere(), eta, &model).unwrap();
                let exact = (1.0 + eta + eta * eta) / (1.0 - eta).powi(3);
                assert!(
                    (eos.z - exact).abs() < 1e-10,
                    "{model:?} η={eta}: Z = {} should equal {exact}",
                    eos.z
                );
            }
        }
        // Frozen value at η = 0.3: Z = 1.39/0.343.
        let eos = bulk_eos(&sphere(), 0.3, &FreeEnergyModel::RosenfeldOriginal).unwrap();
        assert!((eos.z - 4.052478134110787).abs() < 1e-12);
        // Ideal limit.
        let eos0 = bulk_eos(&sphere(), 0.0, &FreeEnergyModel::RosenfeldOriginal).unwrap();
        assert_eq!(eos0.z, 1.0);
    }

    #[test]
    fn chemical_potential_matches_bulk_free_energy_derivative() {
        let model = FreeEnergyModel::TarazonaTensor;
        let eta = 0.27;
        let v = 4.0 * PI / 3.0;
        let rho = eta / v;
        let eos = bulk_eos(&sphere(), eta, &model).unwrap();
        let h = 1e-6 * rho;
        let phi_at = |r: f64| phi_excess(&bulk_weighted_densities(&sphere(), r), &model).unwrap();
        let fd = (phi_at(rho + h) - phi_at(rho - h)) / (2.0 * h);
        assert!(
            (eos.beta_mu_excess - fd).abs() < 1e-8 * fd.abs(),
            "βμ_ex {} should equal dΦ_bulk/dρ {}",
            eos.beta_mu_excess,
            fd
        );
    }

    #[test]
    fn pressure_is_convex_and_z_monotone_for_spheres() {
        let model = FreeEnergyModel::RosenfeldOriginal;
        let mut last_z = 0.0;
        let mut pressures = Vec::new();
        for i in 0..=89 {
            let eta = i as f64 * 0.01;
            let eos = bulk_eos(&sphere(), eta, &model).unwrap();
            assert!(eos.z >= last_z, "Z must be monotone in η, broke at η={eta}");
            last_z = eos.z;
            pressures.push(eos.beta_pressure);
        }
        for w in pressures.windows(3) {
            assert!(
                w[2] - 2.0 * w[1] + w[0] > -1e-12,
                "βp(ρ) must be convex (second difference ≥ 0)"
            );
        }
    }

    #[test]
    fn virial_series_gives_hard_sphere_coefficients() {
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
            FreeEnergyModel::Generalized(rosenfeld_tables()),
        ] {
            let v = virial_series_bulk(&sphere(), &model).unwrap();
            assert!(
                (v.b2_over_v - 4.0).abs() < 1e-10,
                "{model:?}: B₂/v should be 4, got {}",
                v.b2_over_v
            );
            assert!(
                (v.b3_over_v2 - 10.0).abs() < 1e-10,
                "{model:?}: B₃/v² should be 10, got {}",
                v.b3_over_v2
            );
        }
    }

    #[test]
    fn virial_series_spheroid_matches_isihara_kihara_b2() {
        // B₂ = (V + MS/4π + V)/2... for identical convex bodies:
        // B₂ = V + MS/4π. Frozen spheroid values (a=1, c=2):
        // V = 8π/3, S = 21.478435327883737, M = 17.343765406690103.
        let body = ConvexBody::spheroid(1.0, 2.0).unwrap();
        let v = 8.0 * PI / 3.0;
        let expected_b2 = (v + 17.343765406690103 * 21.478435327883737 / (4.0 * PI)) / v;
        let series = virial_series_bulk(&body, &FreeEnergyModel::TarazonaTensor).unwrap();
        assert!(
            (series.b2_over_v - expected_b2).abs() < 1e-9,
            "spheroid B₂/v {} should equal Isihara–Kihara value {}",
            series.b2_over_v,
            expected_b2
        );
    }

    #[test]
    fn tarazona_phi3_reference_values() {
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        assert!(
            tarazona_phi3(&x, &y, &z).abs() < 1e-15,
            "orthonormal triple: product 1 − M₃ 1 = 0"
        );
        let n = Vector3::new(0.6, 0.0, 0.8);
        assert!(
            tarazona_phi3(&n, &n, &y).abs() < 1e-15,
            "coincident pair: both product and M₃ vanish"
        );
        // Consistency with the crossing-product form: Φ₃ + M₃/16π = W₃/16π.
        let a = Vector3::new(0.1, -0.7, 0.7).normalize();
        let b = Vector3::new(0.9, 0.1, -0.4).normalize();
        let c = Vector3::new(-0.3, 0.8, 0.5).normalize();
        let lhs = tarazona_phi3(&a, &b, &c)
            + crate::weights::intersection_determinant(&[a, b, c]).unwrap() / (16.0 * PI);
        let rhs = crate::weights::three_body_euler_form(&a, &b, &c) / (16.0 * PI);
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn invalid_tables_are_rejected_with_positions() {
        let bad_order = GeneralizedModel {
            dimension: 2,
            terms: vec![TableTerm {
                order: 3,
                coeff: 1.0,
                indices: vec![
                    WeightIndex::new(WeightTag::Sigma, 0),
                    WeightIndex::new(WeightTag::Sigma, 0),
                    WeightIndex::new(WeightTag::Sigma, 0),
                ],
            }],
        };
        assert!(matches!(
            bad_order.validate(),
            Err(FmtModelError::OrderExceedsDimension { term: 0, .. })
        ));

        let bad_contraction = GeneralizedModel {
            dimension: 3,
            terms: vec![TableTerm {
                order: 2,
                coeff: 1.0,
                indices: vec![
                    WeightIndex::new(WeightTag::Sigma, 1),
                    WeightIndex::new(WeightTag::Sigma, 2),
                ],
            }],
        };
        assert!(matches!(
            bad_contraction.validate(),
            Err(FmtModelError::UnsupportedContraction {
                term: 0,
                vectors: 1,
                tensors: 1
            })
        ));

        let bad_index = GeneralizedModel {
            dimension: 3,
            terms: vec![TableTerm {
                order: 1,
                coeff: 1.0,
                indices: vec![WeightIndex::new(WeightTag::Volume, 0)],
            }],
        };
        assert!(matches!(
            bad_index.validate(),
            Err(FmtModelError::UnsupportedTableIndex { term: 0, .. })
        ));
    }

    #[test]
    fn packing_fraction_domain_is_enforced() {
        let mut n = WeightedDensities::zero();
        n.n_v = 1.0;
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
            FreeEnergyModel::Generalized(rosenfeld_tables()),
        ] {
            assert!(matches!(
                phi_excess(&n, &model),
                Err(FmtModelError::PackingFraction { .. })
            ));
        }
    }

    #[test]
    fn tables_serialize_to_json_and_back() {
        let model = tarazona_tables();
        let json = serde_json::to_string(&model).unwrap();
        let back: GeneralizedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back, "JSON round trip must preserve the tables");
    }
}
