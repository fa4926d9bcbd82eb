//! Elements of `G(a, d)`: one Moebius transformation per length class.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::flow::{complex_to_vec, flow_gamma, vec_to_complex};
use super::su11::SU11Element;
use crate::arm::{ArmSpec, Configuration, STRUCTURAL_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// The flow `Γ_t^s`.
    Translation { s: DVector<f64>, t: f64 },
    /// An orientation-preserving orthogonal map.
    Rotation(DMatrix<f64>),
}

impl Generator {
    pub fn translation(s: DVector<f64>, t: f64) -> Result<Self> {
        let n = s.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("translation direction must be a nonzero vector"));
        }
        Ok(Generator::Translation { s: s / n, t })
    }

    pub fn rotation(r: DMatrix<f64>) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::dims("rotation matrix must be square"));
        }
        let d = r.nrows();
        let defect = (r.transpose() * &r - DMatrix::identity(d, d)).amax();
        if defect > STRUCTURAL_TOL * 10.0 {
            return Err(Error::invalid(format!("matrix is not orthogonal (defect {defect:.2e})")));
        }
        if r.determinant() < 0.0 {
            return Err(Error::invalid("rotation must have determinant +1"));
        }
        Ok(Generator::Rotation(r))
    }

    fn dim(&self) -> usize {
        match self {
            Generator::Translation { s, .. } => s.len(),
            Generator::Rotation(r) => r.nrows(),
        }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Generator::Translation { s, t } => flow_gamma(s, *t, x),
            Generator::Rotation(r) => {
                let y = r * x;
                let n = y.norm();
                y / n
            }
        }
    }
}

/// A word in translations and rotations of `S^{d-1}`, applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusWord {
    dim: usize,
    generators: Vec<Generator>,
}

impl MoebiusWord {
    pub fn identity(dim: usize) -> Self {
        MoebiusWord {
            dim,
            generators: Vec::new(),
        }
    }

    pub fn new(dim: usize, generators: Vec<Generator>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::dims(format!("generator of dimension {} in a d={dim} word", g.dim())));
        }
        Ok(MoebiusWord { dim, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: Generator) -> Result<Self> {
        if next.dim() != self.dim {
            return Err(Error::dims("generator dimension does not match the word"));
        }
        self.generators.push(next);
        Ok(self)
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.generators.iter().fold(x.clone(), |acc, g| g.apply(&acc))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MoebiusElement {
    Planar(SU11Element),
    Word(MoebiusWord),
}

impl MoebiusElement {
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            MoebiusElement::Planar(g) => {
                if x.len() != 2 {
                    return Err(Error::dims("SU(1,1) element acting outside the plane"));
                }
                Ok(complex_to_vec(g.act(vec_to_complex(x))))
            }
            MoebiusElement::Word(w) => {
                if x.len() != w.dim() {
                    return Err(Error::dims("Moebius word acting in the wrong dimension"));
                }
                Ok(w.apply(x))
            }
        }
    }

    pub fn apply_complex(&self, z: Complex64) -> Result<Complex64> {
        self.apply(&complex_to_vec(z)).map(|v| vec_to_complex(&v))
    }
}

/// One factor per length class, in class order.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub factors: Vec<MoebiusElement>,
}

impl GroupElement {
    pub fn identity(spec: &ArmSpec) -> Self {
        let one = if spec.dim() == 2 {
            MoebiusElement::Planar(SU11Element::identity())
        } else {
            MoebiusElement::Word(MoebiusWord::identity(spec.dim()))
        };
        GroupElement {
            factors: vec![one; spec.sharp()],
        }
    }

    pub fn new(factors: Vec<MoebiusElement>) -> Self {
        GroupElement { factors }
    }
}

/// Apply each class factor to the components of that class. Zero-length
/// components are never moved.
pub fn act_group(g: &GroupElement, spec: &ArmSpec, z: &Configuration) -> Result<Configuration> {
    spec.check(z)?;
    if g.factors.len() != spec.sharp() {
        return Err(Error::ClassMismatch {
            expected: spec.sharp(),
            found: g.factors.len(),
        });
    }
    let mut out = z.clone();
    for i in 0..spec.m() {
        if let Some(c) = spec.class_of(i) {
            let moved = g.factors[c].apply(z.vector(i))?;
            out.set_vector(i, moved)?;
        }
    }
    Ok(out)
}
