//! Norm atoms (entrywise ℓ1, nuclear norm of a matricization), their duals
//! and proximal maps, and weighted sum / weighted max combinations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{svd, Bipartition, DenseTensor, Matricization, Scalar};
use crate::solver::{self, epigraph, SolveReport, SolverOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    EntrywiseL1,
    Nuclear(Bipartition),
}

/// A single norm on tensors of a fixed shape.
#[derive(Debug, Clone)]
pub struct NormAtom {
    kind: AtomKind,
    shape: Vec<usize>,
    matricization: Option<Matricization>,
}

impl PartialEq for NormAtom {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.shape == other.shape
    }
}

impl NormAtom {
    pub fn l1(shape: &[usize]) -> Result<Self> {
        crate::linalg::DenseTensor::<f64>::zeros(shape)?;
        Ok(Self {
            kind: AtomKind::EntrywiseL1,
            shape: shape.to_vec(),
            matricization: None,
        })
    }

    pub fn nuclear(shape: &[usize], b: Bipartition) -> Result<Self> {
        let matricization = Matricization::new(shape, &b)?;
        Ok(Self {
            kind: AtomKind::Nuclear(b),
            shape: shape.to_vec(),
            matricization: Some(matricization),
        })
    }

    /// Nuclear norm of an `n1 × n2` matrix.
    pub fn matrix_nuclear(n1: usize, n2: usize) -> Result<Self> {
        Self::nuclear(&[n1, n2], Bipartition::new([0])?)
    }

    pub fn new(kind: AtomKind, shape: &[usize]) -> Result<Self> {
        match kind {
            AtomKind::EntrywiseL1 => Self::l1(shape),
            AtomKind::Nuclear(b) => Self::nuclear(shape, b),
        }
    }

    pub fn kind(&self) -> &AtomKind {
        &self.kind
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn matricization(&self) -> Option<&Matricization> {
        self.matricization.as_ref()
    }

    /// Smallest `L` with `‖x‖ ≤ L‖x‖_F`: `√d` for ℓ1, `√min(n_b, n_{b^c})` for nuclear.
    pub fn lipschitz(&self) -> f64 {
        match &self.matricization {
            None => (self.dim() as f64).sqrt(),
            Some(m) => (m.rows().min(m.cols()) as f64).sqrt(),
        }
    }

    fn check<T: Scalar>(&self, x: &DenseTensor<T>) -> Result<()> {
        x.ensure_shape(&self.shape)
    }

    pub fn norm<T: Scalar>(&self, x: &DenseTensor<T>) -> Result<f64> {
        self.check(x)?;
        self.norm_slice(x.data())
    }

    pub fn dual_norm<T: Scalar>(&self, x: &DenseTensor<T>) -> Result<f64> {
        self.check(x)?;
        self.dual_norm_slice(x.data())
    }

    /// Unique minimizer of `½‖z − x‖² + t·‖z‖`: soft thresholding of the
    /// moduli (phases kept) or singular-value soft thresholding.
    pub fn prox<T: Scalar>(&self, x: &DenseTensor<T>, t: f64) -> Result<DenseTensor<T>> {
        self.check(x)?;
        if t <= 0.0 {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {t}")));
        }
        let mut data = x.data().to_vec();
        self.prox_in_place(&mut data, t)?;
        Ok(DenseTensor::from_parts_unchecked(self.shape.clone(), data))
    }

    pub(crate) fn norm_slice<T: Scalar>(&self, x: &[T]) -> Result<f64> {
        match &self.matricization {
            None => Ok(x.iter().map(|v| v.abs_val()).sum()),
            Some(m) => Ok(crate::linalg::singular_values(&m.to_matrix(x))?.iter().sum()),
        }
    }

    pub(crate) fn dual_norm_slice<T: Scalar>(&self, x: &[T]) -> Result<f64> {
        match &self.matricization {
            None => Ok(x.iter().fold(0.0, |m, v| m.max(v.abs_val()))),
            Some(m) => Ok(crate::linalg::singular_values(&m.to_matrix(x))?
                .first()
                .copied()
                .unwrap_or(0.0)),
        }
    }

    pub(crate) fn prox_in_place<T: Scalar>(&self, x: &mut [T], t: f64) -> Result<()> {
        match &self.matricization {
            None => {
                for v in x.iter_mut() {
                    let m = v.abs_val();
                    *v = if m > t { v.mul_real((m - t) / m) } else { T::zero() };
                }
            }
            Some(mat) => {
                let s = svd(&mat.to_matrix(x))?;
                let shrunk: Vec<f64> = s.singular_values.iter().map(|v| (v - t).max(0.0)).collect();
                mat.write_matrix(&s.reassemble(&shrunk), x);
            }
        }
        Ok(())
    }

    /// Projection onto `{(x, t) : ‖x‖ ≤ c·t}`.
    pub(crate) fn project_epigraph<T: Scalar>(&self, x: &mut [T], t: &mut f64, c: f64) -> Result<()> {
        match &self.matricization {
            None => epigraph::project_epigraph_l1_scaled(x, t, c),
            Some(mat) => {
                let (p, pt) = epigraph::project_epigraph_nuclear_scaled(&mat.to_matrix(x), *t, c)?;
                mat.write_matrix(&p, x);
                *t = pt;
            }
        }
        Ok(())
    }

    /// Projection onto `{(x, t) : ‖x‖° ≤ c·t}` for the dual norm.
    pub(crate) fn project_dual_epigraph<T: Scalar>(
        &self,
        x: &mut [T],
        t: &mut f64,
        c: f64,
    ) -> Result<()> {
        match &self.matricization {
            None => epigraph::project_epigraph_linf_scaled(x, t, c),
            Some(mat) => {
                let (p, pt) = epigraph::project_epigraph_spectral_scaled(&mat.to_matrix(x), *t, c)?;
                mat.write_matrix(&p, x);
                *t = pt;
            }
        }
        Ok(())
    }

    /// Spec-syntax label, `l1` or `nuc[1,2]`.
    pub fn label(&self) -> String {
        match &self.kind {
            AtomKind::EntrywiseL1 => "l1".to_string(),
            AtomKind::Nuclear(b) => {
                let modes: Vec<String> = b.one_based().iter().map(|m| m.to_string()).collect();
                format!("nuc[{}]", modes.join(","))
            }
        }
    }
}

impl fmt::Display for NormAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// How atoms are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    Sum,
    Max,
}

impl fmt::Display for CombineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombineMode::Sum => "sum",
            CombineMode::Max => "max",
        })
    }
}

/// `Σ λ_i ‖·‖_(i)` or `max_i μ_i ‖·‖_(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRegularizer {
    mode: CombineMode,
    atoms: Vec<NormAtom>,
    weights: Vec<f64>,
}

impl CompositeRegularizer {
    pub fn new(mode: CombineMode, atoms: Vec<NormAtom>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidRegularizer("at least one atom is required".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidRegularizer(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidRegularizer(format!("weight {w} is not positive")));
        }
        let shape = atoms[0].shape();
        if let Some(a) = atoms.iter().find(|a| a.shape() != shape) {
            return Err(Error::ShapeMismatch {
                expected: shape.to_vec(),
                found: a.shape().to_vec(),
            });
        }
        Ok(Self { mode, atoms, weights })
    }

    /// Combination with weights `1/‖x0‖_(i)`.
    pub fn with_optimal_weights<T: Scalar>(
        mode: CombineMode,
        atoms: Vec<NormAtom>,
        x0: &DenseTensor<T>,
    ) -> Result<Self> {
        let weights = optimal_weights(x0, &atoms)?;
        Self::new(mode, atoms, weights)
    }

    pub fn mode(&self) -> CombineMode {
        self.mode
    }

    pub fn atoms(&self) -> &[NormAtom] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shape(&self) -> &[usize] {
        self.atoms[0].shape()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.mode, self.atoms.clone(), weights)
    }

    pub fn with_mode(&self, mode: CombineMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    /// Weighted atom values `w_i ‖x‖_(i)`.
    pub fn terms<T: Scalar>(&self, x: &DenseTensor<T>) -> Result<Vec<f64>> {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| Ok(w * a.norm(x)?))
            .collect()
    }

    pub fn norm<T: Scalar>(&self, x: &DenseTensor<T>) -> Result<f64> {
        let terms = self.terms(x)?;
        Ok(match self.mode {
            CombineMode::Sum => terms.iter().sum(),
            CombineMode::Max => terms.iter().fold(0.0, |m, &v| m.max(v)),
        })
    }

    /// Dual norm, an infimum over decompositions `y = Σ x_i`, evaluated with
    /// the splitting solver.
    pub fn dual_norm<T: Scalar>(
        &self,
        y: &DenseTensor<T>,
        opts: &SolverOptions,
    ) -> Result<(f64, SolveReport)> {
        solver::composite_dual_norm(y, self, opts)
    }
}

/// `μ*_i = 1/‖x0‖_(i)`; all terms of the weighted max are then equal to one.
pub fn optimal_weights<T: Scalar>(x0: &DenseTensor<T>, atoms: &[NormAtom]) -> Result<Vec<f64>> {
    atoms
        .iter()
        .map(|a| {
            let n = a.norm(x0)?;
            if n > 0.0 && n.is_finite() {
                Ok(1.0 / n)
            } else {
                Err(Error::DegenerateSignal(a.label()))
            }
        })
        .collect()
}

/// Weight of a term in a regularizer spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec {
    Auto,
    Fixed(f64),
}

/// Parsed regularizer description such as `max(l1=auto, nuc[1]=auto)` or
/// `sum(l1=1, nuc[1,2]=0.5)`. A term without `=` has weight `auto`, i.e. the
/// optimal weight for the signal at hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RegularizerSpec {
    pub mode: CombineMode,
    pub terms: Vec<(AtomKind, WeightSpec)>,
}

impl RegularizerSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::Parse(format!("expected `sum(...)` or `max(...)`, got `{s}`")))?;
        if !s.ends_with(')') {
            return Err(Error::Parse(format!("missing `)` in `{s}`")));
        }
        let mode = match s[..open].trim().to_ascii_lowercase().as_str() {
            "sum" => CombineMode::Sum,
            "max" => CombineMode::Max,
            other => return Err(Error::Parse(format!("unknown combination `{other}`"))),
        };
        let body = &s[open + 1..s.len() - 1];
        let mut terms = Vec::new();
        for raw in split_top_level(body) {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let (atom, weight) = match raw.split_once('=') {
                Some((a, w)) => (a.trim(), w.trim()),
                None => (raw, "auto"),
            };
            let weight = if weight.eq_ignore_ascii_case("auto") {
                WeightSpec::Auto
            } else {
                let w: f64 = weight
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad weight `{weight}`")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::Parse(format!("weight must be positive, got {w}")));
                }
                WeightSpec::Fixed(w)
            };
            let kind = if atom.eq_ignore_ascii_case("l1") {
                AtomKind::EntrywiseL1
            } else if let Some(rest) = atom.strip_prefix("nuc") {
                let rest = rest.trim();
                let b = if rest.is_empty() {
                    Bipartition::new([0])?
                } else {
                    rest.parse::<Bipartition>()?
                };
                AtomKind::Nuclear(b)
            } else {
                return Err(Error::Parse(format!("unknown atom `{atom}`")));
            };
            terms.push((kind, weight));
        }
        if terms.is_empty() {
            return Err(Error::Parse(format!("no atoms in `{s}`")));
        }
        Ok(Self { mode, terms })
    }

    pub fn has_auto_weights(&self) -> bool {
        self.terms.iter().any(|(_, w)| matches!(w, WeightSpec::Auto))
    }

    /// Atoms for tensors of shape `shape`.
    pub fn atoms(&self, shape: &[usize]) -> Result<Vec<NormAtom>> {
        self.terms
            .iter()
            .map(|(k, _)| NormAtom::new(k.clone(), shape))
            .collect()
    }

    /// Resolves `auto` weights against `x0`.
    pub fn resolve<T: Scalar>(&self, x0: &DenseTensor<T>) -> Result<CompositeRegularizer> {
        let atoms = self.atoms(x0.shape())?;
        let weights = self
            .terms
            .iter()
            .zip(&atoms)
            .map(|((_, w), a)| match w {
                WeightSpec::Fixed(v) => Ok(*v),
                WeightSpec::Auto => {
                    let n = a.norm(x0)?;
                    if n > 0.0 {
                        Ok(1.0 / n)
                    } else {
                        Err(Error::DegenerateSignal(a.label()))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CompositeRegularizer::new(self.mode, atoms, weights)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl fmt::Display for RegularizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(k, w)| {
                let atom = match k {
                    AtomKind::EntrywiseL1 => "l1".to_string(),
                    AtomKind::Nuclear(b) => {
                        let m: Vec<String> = b.one_based().iter().map(|v| v.to_string()).collect();
                        format!("nuc[{}]", m.join(","))
                    }
                };
                match w {
                    WeightSpec::Auto => format!("{atom}=auto"),
                    WeightSpec::Fixed(v) => format!("{atom}={v}"),
                }
            })
            .collect();
        write!(f, "{}({})", self.mode, terms.join(", "))
    }
}

impl std::str::FromStr for RegularizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl TryFrom<String> for RegularizerSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl From<RegularizerSpec> for String {
    fn from(s: RegularizerSpec) -> Self {
        s.to_string()
    }
}
