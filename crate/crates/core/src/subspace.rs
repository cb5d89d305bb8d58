//! Subspaces in canonical reduced column echelon form, and subquotient charts
//! built by the pivot-complement construction. Charts carry the retraction and
//! section data that realize kernels, images and their quotients as concrete
//! coordinate spaces.

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::Mat;

/// A subspace of K^ambient, stored as a basis in reduced column echelon form.
/// The echelon form is unique for a given subspace, so equality of subspaces
/// is equality of the struct.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Mat, // ambient x dim, reduced column echelon form
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Mat::zeros(field, ambient, 0),
        }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Mat::identity(field, ambient),
        }
    }

    /// Span of the columns of `m`, canonicalized.
    pub fn from_columns(m: &Mat) -> Subspace {
        let (r, pivots) = m.transpose().rref();
        let mut cols = Vec::new();
        for i in 0..pivots.len() {
            cols.push((0..m.rows()).map(|c| r.get(i, c).clone()).collect());
        }
        Subspace {
            ambient: m.rows(),
            basis: Mat::from_cols(m.field(), m.rows(), cols),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Row index of the leading entry of each basis column.
    pub fn pivot_rows(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|j| {
                (0..self.ambient)
                    .find(|&i| !self.basis.get(i, j).is_zero())
                    .expect("echelon column is nonzero")
            })
            .collect()
    }

    pub fn contains_vec(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector dimension");
        let b = Mat::from_cols(self.field(), self.ambient, vec![v.to_vec()]);
        self.basis.solve(&b).is_some()
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient dimension");
        self.basis.solve(other.basis()).is_some()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::from_columns(&self.basis.hstack(other.basis()))
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        // v = B1 x = B2 y  <=>  [B1 | -B2] (x; y) = 0
        let stacked = self.basis.hstack(&other.basis.neg());
        let ker = stacked.kernel_basis();
        let x_part = ker.submatrix(0..self.dim(), 0..ker.cols());
        Subspace::from_columns(&self.basis.mul(&x_part))
    }

    /// Image of this subspace under a linear map out of the ambient space.
    pub fn apply(&self, a: &Mat) -> Subspace {
        Subspace::from_columns(&a.mul(&self.basis))
    }
}

/// Kernel, image, and a canonical cokernel section for a linear map: the
/// cokernel complement is spanned by the standard basis vectors at the
/// pivot-free row coordinates of the image's echelon form.
pub fn column_spaces(a: &Mat) -> (Subspace, Subspace, Mat) {
    let kernel = Subspace::from_columns(&a.kernel_basis());
    let image = Subspace::from_columns(a);
    let pivots = image.pivot_rows();
    let free: Vec<usize> = (0..a.rows()).filter(|r| !pivots.contains(r)).collect();
    let mut section = Mat::zeros(a.field(), a.rows(), free.len());
    for (j, &r) in free.iter().enumerate() {
        section.set(r, j, a.field().one());
    }
    (kernel, image, section)
}

/// Chart for a subquotient sub/quot_by of an ambient space. Fixes once and
/// for all a basis of representatives (`section`), a retraction onto the
/// subspace, and coordinates for classes, all via the pivot-complement
/// construction so reruns are byte-identical.
#[derive(Clone, Debug)]
pub struct SubquotientChart {
    sub: Subspace,
    quot_by: Subspace,
    /// ambient x q; columns represent a basis of sub/quot_by
    section: Mat,
    /// s x ambient; coordinates w.r.t. the basis (quot_by | section) of sub;
    /// retraction * (quot_basis | section) = identity
    retraction: Mat,
    /// q x ambient; class coordinates (the last q rows of `retraction`)
    project: Mat,
}

impl SubquotientChart {
    pub fn sub(&self) -> &Subspace {
        &self.sub
    }

    pub fn quot_by(&self) -> &Subspace {
        &self.quot_by
    }

    pub fn ambient_dim(&self) -> usize {
        self.sub.ambient_dim()
    }

    /// Dimension of the subquotient.
    pub fn dim(&self) -> usize {
        self.section.cols()
    }

    pub fn field(&self) -> Field {
        self.sub.field()
    }

    /// Representatives of the chart basis, as ambient columns.
    pub fn section(&self) -> &Mat {
        &self.section
    }

    /// Class coordinates of ambient vectors; only meaningful on `sub`.
    pub fn project(&self) -> &Mat {
        &self.project
    }

    pub fn retraction(&self) -> &Mat {
        &self.retraction
    }

    /// Both chart identities, checked exactly.
    pub fn verify(&self) -> Result<()> {
        let sub_basis = self.quot_by.basis().hstack(&self.sub_complement_basis());
        if !self.retraction.mul(&sub_basis).is_identity() {
            return Err(Error::PreconditionViolated(
                "retraction . inclusion != id on sub".into(),
            ));
        }
        if !self.project.mul(&self.section).is_identity() {
            return Err(Error::PreconditionViolated(
                "projection . section != id on sub/quot_by".into(),
            ));
        }
        Ok(())
    }

    fn sub_complement_basis(&self) -> Mat {
        self.section.clone()
    }
}

/// Extends `base` (columns assumed independent) by greedily appending columns
/// of `candidates` that increase the rank. Deterministic in the column order.
fn greedy_extend(base: &Mat, candidates: &Mat) -> Vec<usize> {
    let mut acc = base.clone();
    let mut picked = Vec::new();
    let mut rank = acc.rank();
    for j in 0..candidates.cols() {
        let cand = candidates.submatrix(0..candidates.rows(), j..j + 1);
        let trial = acc.hstack(&cand);
        let r = trial.rank();
        if r > rank {
            acc = trial;
            rank = r;
            picked.push(j);
        }
    }
    picked
}

/// Builds the canonical chart for sub/quot_by by the pivot-complement
/// construction: extend quot_by's echelon basis to sub by greedily picking
/// echelon basis vectors of sub, then extend to the ambient space by standard
/// basis vectors; invert the resulting square matrix to read off retraction
/// and class coordinates.
pub fn make_chart(sub: &Subspace, quot_by: &Subspace) -> Result<SubquotientChart> {
    if sub.ambient_dim() != quot_by.ambient_dim() {
        return Err(Error::ShapeMismatch("chart ambient dims differ".into()));
    }
    if !sub.contains(quot_by) {
        return Err(Error::ContainmentViolation(
            "quot_by is not contained in sub".into(),
        ));
    }
    let field = sub.field();
    let n = sub.ambient_dim();
    let c = quot_by.basis().clone();
    let picked = greedy_extend(&c, sub.basis());
    let section = sub.basis().select_cols(&picked);
    let cs = c.hstack(&section);
    let ext = greedy_extend(&cs, &Mat::identity(field, n));
    let t = Mat::identity(field, n).select_cols(&ext);
    let full = cs.hstack(&t);
    debug_assert_eq!(full.cols(), n, "pivot-complement extension is a basis");
    let inv = full.inverse()?;
    let s_dim = cs.cols();
    let retraction = inv.submatrix(0..s_dim, 0..n);
    let project = inv.submatrix(quot_by.dim()..s_dim, 0..n);
    Ok(SubquotientChart {
        sub: sub.clone(),
        quot_by: quot_by.clone(),
        section,
        retraction,
        project,
    })
}

/// Chart for a plain subspace (quotient by zero).
pub fn make_subspace_chart(sub: &Subspace) -> Result<SubquotientChart> {
    make_chart(sub, &Subspace::zero(sub.field(), sub.ambient_dim()))
}

/// Matrix of the map induced by `a` on subquotients, in the charts' bases.
/// Checks exactly that `a` maps src.sub into dst.sub and src.quot_by into
/// dst.quot_by.
pub fn induced_map(a: &Mat, src: &SubquotientChart, dst: &SubquotientChart) -> Result<Mat> {
    if a.cols() != src.ambient_dim() || a.rows() != dst.ambient_dim() {
        return Err(Error::ShapeMismatch("induced map ambient dims".into()));
    }
    let sub_img = src.sub().apply(a);
    if !dst.sub().contains(&sub_img) {
        return Err(Error::NotWellDefined(
            "map does not send sub into sub".into(),
        ));
    }
    let quot_img = src.quot_by().apply(a);
    if !dst.quot_by().contains(&quot_img) {
        return Err(Error::NotWellDefined(
            "map does not send quot_by into quot_by".into(),
        ));
    }
    Ok(dst.project().mul(&a.mul(src.section())))
}
