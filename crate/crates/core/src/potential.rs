//! Degree-truncated potentials on a quiver: cyclic normalization, cyclic and
//! second-order derivatives, and right-equivalences (arrow substitutions) with
//! composition and inversion.
//!
//! Paths are stored in application order: `arrows[0]` acts first. The written
//! word is the reverse, and JSON lists cycles in written order. All potential
//! arithmetic happens modulo paths of length > D, where D is the degree bound;
//! strict mode reports any nonzero discarded term.

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::Mat;
use crate::quiver::{ArrowId, Quiver, VertexId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// What to do when arithmetic pushes a nonzero term past the degree bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Truncation {
    /// Drop silently; the default.
    #[default]
    Silent,
    /// Fail with `DegreeOverflow`.
    Strict,
}

/// A path of the quiver, possibly trivial (the idempotent at a vertex).
/// Arrows are listed in application order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Path {
    arrows: Vec<ArrowId>,
    tail: VertexId,
    head: VertexId,
}

impl Path {
    /// Builds a path from arrows in application order, checking composability.
    pub fn new(quiver: &Quiver, arrows: Vec<ArrowId>) -> Result<Path> {
        if arrows.is_empty() {
            return Err(Error::BadPath("empty arrow list needs a base vertex".into()));
        }
        let mut tail = None;
        let mut head: Option<VertexId> = None;
        for id in &arrows {
            let a = quiver.arrow(id)?;
            match &head {
                None => tail = Some(a.tail.clone()),
                Some(h) => {
                    if h != &a.tail {
                        return Err(Error::BadPath(format!(
                            "arrow {id} does not compose (needs tail {h})"
                        )));
                    }
                }
            }
            head = Some(a.head.clone());
        }
        Ok(Path {
            arrows,
            tail: tail.unwrap(),
            head: head.unwrap(),
        })
    }

    /// Builds a path from the written word (leftmost arrow applied last).
    pub fn from_written(quiver: &Quiver, written: &[ArrowId]) -> Result<Path> {
        let mut arrows: Vec<ArrowId> = written.to_vec();
        arrows.reverse();
        Path::new(quiver, arrows)
    }

    pub fn written_strs(quiver: &Quiver, ids: &[&str]) -> Result<Path> {
        let written: Vec<ArrowId> = ids.iter().map(|s| ArrowId::new(*s)).collect();
        Path::from_written(quiver, &written)
    }

    pub fn trivial(v: VertexId) -> Path {
        Path {
            arrows: Vec::new(),
            tail: v.clone(),
            head: v,
        }
    }

    pub fn arrows(&self) -> &[ArrowId] {
        &self.arrows
    }

    /// Arrow ids in written order.
    pub fn written(&self) -> Vec<ArrowId> {
        let mut w = self.arrows.clone();
        w.reverse();
        w
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn tail(&self) -> &VertexId {
        &self.tail
    }

    pub fn head(&self) -> &VertexId {
        &self.head
    }

    pub fn is_cycle(&self) -> bool {
        !self.is_trivial() && self.tail == self.head
    }

    /// Vertices visited, in application order: tail, then each head.
    pub fn vertices(&self, quiver: &Quiver) -> Result<Vec<VertexId>> {
        let mut vs = vec![self.tail.clone()];
        for id in &self.arrows {
            vs.push(quiver.arrow(id)?.head.clone());
        }
        Ok(vs)
    }

    /// Cyclic rotation starting at position i of the application order.
    pub fn rotation(&self, quiver: &Quiver, i: usize) -> Result<Path> {
        if !self.is_cycle() {
            return Err(Error::NotACycle(format!("{self}")));
        }
        let n = self.len();
        let i = i % n;
        let mut arrows = Vec::with_capacity(n);
        arrows.extend_from_slice(&self.arrows[i..]);
        arrows.extend_from_slice(&self.arrows[..i]);
        Path::new(quiver, arrows)
    }

    /// The lexicographically least rotation, by arrow-id sequence. Idempotent.
    pub fn canonical_rotation(&self, quiver: &Quiver) -> Result<Path> {
        if !self.is_cycle() {
            return Err(Error::NotACycle(format!("{self}")));
        }
        let mut best: Option<Path> = None;
        for i in 0..self.len() {
            let r = self.rotation(quiver, i)?;
            if best.as_ref().is_none_or(|b| r.arrows < b.arrows) {
                best = Some(r);
            }
        }
        Ok(best.unwrap())
    }

    /// q after p (then.tail must equal self.head).
    pub fn concat(&self, then: &Path) -> Result<Path> {
        if self.head != then.tail {
            return Err(Error::BadPath(format!("cannot compose {then} after {self}")));
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&then.arrows);
        Ok(Path {
            arrows,
            tail: self.tail.clone(),
            head: then.head.clone(),
        })
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "e_{}", self.tail);
        }
        let w: Vec<String> = self.written().iter().map(|a| a.0.clone()).collect();
        write!(f, "{}", w.join("."))
    }
}

/// A finite K-linear combination of paths; zero coefficients never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PathSum {
    terms: BTreeMap<Path, Scalar>,
}

impl PathSum {
    pub fn zero() -> PathSum {
        PathSum::default()
    }

    pub fn single(path: Path, coeff: Scalar) -> PathSum {
        let mut ps = PathSum::zero();
        ps.add_term(path, coeff);
        ps
    }

    pub fn arrow(quiver: &Quiver, id: &ArrowId, field: Field) -> Result<PathSum> {
        Ok(PathSum::single(
            Path::new(quiver, vec![id.clone()])?,
            field.one(),
        ))
    }

    pub fn add_term(&mut self, path: Path, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&path) {
            Some(c) => {
                *c = c.add(&coeff);
                if c.is_zero() {
                    self.terms.remove(&path);
                }
            }
            None => {
                self.terms.insert(path, coeff);
            }
        }
    }

    pub fn add(&self, other: &PathSum) -> PathSum {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> PathSum {
        let mut out = PathSum::zero();
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c.mul(s));
        }
        out
    }

    pub fn neg(&self) -> PathSum {
        let mut out = PathSum::zero();
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c.neg());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Path, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// All terms share these endpoints; None for the zero sum.
    pub fn endpoints(&self) -> Option<(VertexId, VertexId)> {
        self.terms
            .keys()
            .next()
            .map(|p| (p.tail().clone(), p.head().clone()))
    }

    /// Product `then . self` extended bilinearly, truncating paths longer
    /// than `bound`. Returns the overflow flag.
    pub fn concat(&self, then: &PathSum, bound: usize) -> Result<(PathSum, bool)> {
        let mut out = PathSum::zero();
        let mut overflow = false;
        for (p, cp) in &self.terms {
            for (q, cq) in &then.terms {
                let prod = p.concat(q)?;
                if prod.len() > bound {
                    overflow = true;
                    continue;
                }
                out.add_term(prod, cp.mul(cq));
            }
        }
        Ok((out, overflow))
    }
}

/// A potential: coefficient-weighted cycles stored in canonical rotation,
/// all of length at most the degree bound. Two cyclically equivalent terms
/// can never coexist, by construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Potential {
    quiver: Quiver,
    field: Field,
    degree_bound: usize,
    terms: BTreeMap<Path, Scalar>,
}

impl Potential {
    pub fn zero(quiver: Quiver, field: Field, degree_bound: usize) -> Potential {
        Potential {
            quiver,
            field,
            degree_bound,
            terms: BTreeMap::new(),
        }
    }

    /// Adds a cycle term, normalizing the rotation; rejects non-cycles,
    /// mismatched fields and cycles longer than the degree bound.
    pub fn add_term(&mut self, path: &Path, coeff: Scalar) -> Result<()> {
        if coeff.is_zero() {
            return Ok(());
        }
        if coeff.field() != self.field {
            return Err(Error::FieldMismatch(format!(
                "{} coefficient in {} potential",
                coeff.field(),
                self.field
            )));
        }
        if path.len() > self.degree_bound {
            return Err(Error::DegreeOverflow {
                degree: path.len(),
                bound: self.degree_bound,
            });
        }
        let canon = path.canonical_rotation(&self.quiver)?;
        match self.terms.get_mut(&canon) {
            Some(c) => {
                *c = c.add(&coeff);
                if c.is_zero() {
                    self.terms.remove(&canon);
                }
            }
            None => {
                self.terms.insert(canon, coeff);
            }
        }
        Ok(())
    }

    pub fn from_terms(
        quiver: Quiver,
        field: Field,
        degree_bound: usize,
        terms: Vec<(Path, Scalar)>,
    ) -> Result<Potential> {
        let mut s = Potential::zero(quiver, field, degree_bound);
        for (p, c) in terms {
            s.add_term(&p, c)?;
        }
        Ok(s)
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Path, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, path: &Path) -> Result<Option<&Scalar>> {
        let canon = path.canonical_rotation(&self.quiver)?;
        Ok(self.terms.get(&canon))
    }

    fn compatible(&self, other: &Potential) -> Result<()> {
        if self.quiver != other.quiver {
            return Err(Error::QuiverMismatch("potential quivers differ".into()));
        }
        if self.degree_bound != other.degree_bound {
            return Err(Error::QuiverMismatch("degree bounds differ".into()));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch("potential fields differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Potential) -> Result<Potential> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Potential) -> Result<Potential> {
        self.add(&other.scale(&self.field.one().neg()))
    }

    pub fn scale(&self, s: &Scalar) -> Potential {
        let mut out = Potential::zero(self.quiver.clone(), self.field, self.degree_bound);
        for (p, c) in &self.terms {
            let v = c.mul(s);
            if !v.is_zero() {
                out.terms.insert(p.clone(), v);
            }
        }
        out
    }

    /// True iff the canonical term maps coincide.
    pub fn cyclically_equal(&self, other: &Potential) -> Result<bool> {
        self.compatible(other)?;
        Ok(self.terms == other.terms)
    }

    /// No terms of length 2.
    pub fn is_reduced(&self) -> bool {
        self.terms.keys().all(|p| p.len() != 2)
    }

    pub fn degree_two_part(&self) -> Potential {
        let mut out = Potential::zero(self.quiver.clone(), self.field, self.degree_bound);
        out.terms = self
            .terms
            .iter()
            .filter(|(p, _)| p.len() == 2)
            .map(|(p, c)| (p.clone(), c.clone()))
            .collect();
        out
    }

    pub fn higher_part(&self) -> Potential {
        let mut out = Potential::zero(self.quiver.clone(), self.field, self.degree_bound);
        out.terms = self
            .terms
            .iter()
            .filter(|(p, _)| p.len() > 2)
            .map(|(p, c)| (p.clone(), c.clone()))
            .collect();
        out
    }

    /// d/da of the potential: for each occurrence of `a`, the rotation of the
    /// cycle with that occurrence removed. Result paths run h(a) -> t(a).
    pub fn cyclic_derivative(&self, a: &ArrowId) -> Result<PathSum> {
        self.quiver.arrow(a)?;
        let mut out = PathSum::zero();
        for (cycle, coeff) in &self.terms {
            let n = cycle.len();
            for j in 0..n {
                if &cycle.arrows()[j] != a {
                    continue;
                }
                let mut arrows = Vec::with_capacity(n - 1);
                for s in 1..n {
                    arrows.push(cycle.arrows()[(j + s) % n].clone());
                }
                // n >= 2 since loop-free quivers have no 1-cycles
                out.add_term(Path::new(&self.quiver, arrows)?, coeff.clone());
            }
        }
        Ok(out)
    }

    /// d/d(ba) of the potential, matching the factor "b after a" cyclically
    /// (including the wrap-around pair). Result paths run h(b) -> t(a); a
    /// 2-cycle term matching exactly contributes the trivial path.
    pub fn second_derivative(&self, b: &ArrowId, a: &ArrowId) -> Result<PathSum> {
        let aa = self.quiver.arrow(a)?.clone();
        let ab = self.quiver.arrow(b)?.clone();
        if aa.head != ab.tail {
            return Err(Error::ArrowsNotComposable(format!(
                "h({a}) = {} but t({b}) = {}",
                aa.head, ab.tail
            )));
        }
        let mut out = PathSum::zero();
        for (cycle, coeff) in &self.terms {
            let n = cycle.len();
            if n < 2 {
                continue;
            }
            for i in 0..n {
                // position i acts first, position i+1 next
                if &cycle.arrows()[i] != a || &cycle.arrows()[(i + 1) % n] != b {
                    continue;
                }
                let mut arrows = Vec::with_capacity(n - 2);
                for s in 2..n {
                    arrows.push(cycle.arrows()[(i + s) % n].clone());
                }
                let p = if arrows.is_empty() {
                    Path::trivial(ab.head.clone())
                } else {
                    Path::new(&self.quiver, arrows)?
                };
                out.add_term(p, coeff.clone());
            }
        }
        Ok(out)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Path::len).max().unwrap_or(0)
    }

    /// The arrows occurring in some term.
    pub fn support(&self) -> BTreeSet<ArrowId> {
        self.terms
            .keys()
            .flat_map(|p| p.arrows().iter().cloned())
            .collect()
    }
}

/// An arrow-substitution map between complete path algebras on the same
/// vertex set, fixing vertex idempotents. Arrows absent from `subst` map to
/// themselves. The degree-1 part is checked invertible per endpoint pair at
/// construction, which is what makes the truncated map an isomorphism.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RightEquivalence {
    source: Quiver,
    target: Quiver,
    field: Field,
    degree_bound: usize,
    subst: BTreeMap<ArrowId, PathSum>,
}

impl RightEquivalence {
    pub fn identity(quiver: Quiver, field: Field, degree_bound: usize) -> RightEquivalence {
        RightEquivalence {
            source: quiver.clone(),
            target: quiver,
            field,
            degree_bound,
            subst: BTreeMap::new(),
        }
    }

    pub fn new(
        source: Quiver,
        target: Quiver,
        field: Field,
        degree_bound: usize,
        subst: BTreeMap<ArrowId, PathSum>,
    ) -> Result<RightEquivalence> {
        let sv: BTreeSet<_> = source.vertices().iter().collect();
        let tv: BTreeSet<_> = target.vertices().iter().collect();
        if sv != tv {
            return Err(Error::QuiverMismatch(
                "right-equivalence endpoints need equal vertex sets".into(),
            ));
        }
        let eq = RightEquivalence {
            source,
            target,
            field,
            degree_bound,
            subst,
        };
        eq.validate()?;
        Ok(eq)
    }

    fn validate(&self) -> Result<()> {
        for a in self.source.arrows() {
            let img = self.image_of(&a.id)?;
            if img.is_zero() {
                return Err(Error::InvalidInput(format!("arrow {} maps to zero", a.id)));
            }
            for (p, c) in img.terms() {
                if c.field() != self.field {
                    return Err(Error::FieldMismatch("substitution coefficient".into()));
                }
                if p.is_trivial() {
                    return Err(Error::InvalidInput(format!(
                        "arrow {} maps to a degree-0 term",
                        a.id
                    )));
                }
                if p.len() > self.degree_bound {
                    return Err(Error::DegreeOverflow {
                        degree: p.len(),
                        bound: self.degree_bound,
                    });
                }
                if p.tail() != &a.tail || p.head() != &a.head {
                    return Err(Error::InvalidInput(format!(
                        "image of arrow {} has mismatched endpoints",
                        a.id
                    )));
                }
                Path::new(&self.target, p.arrows().to_vec())?;
            }
        }
        for (u, v, l) in self.linear_blocks()? {
            if !l.is_invertible() {
                return Err(Error::InvalidInput(format!(
                    "degree-1 part is singular on arrows {u} -> {v}"
                )));
            }
        }
        Ok(())
    }

    /// Per endpoint pair: sorted source and target arrow lists and the matrix
    /// of the degree-1 part between them.
    fn linear_blocks(&self) -> Result<Vec<(VertexId, VertexId, Mat)>> {
        let mut pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        for a in self.source.arrows().iter().chain(self.target.arrows()) {
            pairs.insert((a.tail.clone(), a.head.clone()));
        }
        let mut out = Vec::new();
        for (u, v) in pairs {
            let src = sorted_arrows_between(&self.source, &u, &v);
            let tgt = sorted_arrows_between(&self.target, &u, &v);
            if src.len() != tgt.len() {
                return Err(Error::InvalidInput(format!(
                    "arrow counts differ on {u} -> {v}"
                )));
            }
            let mut l = Mat::zeros(self.field, tgt.len(), src.len());
            for (j, s) in src.iter().enumerate() {
                for (p, c) in self.image_of(s)?.terms() {
                    if p.len() == 1 {
                        if let Some(i) = tgt.iter().position(|t| t == &p.arrows()[0]) {
                            l.set(i, j, c.clone());
                        }
                    }
                }
            }
            out.push((u, v, l));
        }
        Ok(out)
    }

    pub fn source(&self) -> &Quiver {
        &self.source
    }

    pub fn target(&self) -> &Quiver {
        &self.target
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn subst(&self) -> &BTreeMap<ArrowId, PathSum> {
        &self.subst
    }

    pub fn is_identity_subst(&self) -> bool {
        self.subst.is_empty()
    }

    /// Image of a source arrow: the stored substitution, or the same-named
    /// target arrow.
    pub fn image_of(&self, a: &ArrowId) -> Result<PathSum> {
        if let Some(ps) = self.subst.get(a) {
            return Ok(ps.clone());
        }
        let arrow = self.source.arrow(a)?;
        let t = self.target.arrow(a).map_err(|_| {
            Error::UnknownArrow(format!("{a} has no image and no target counterpart"))
        })?;
        if t.tail != arrow.tail || t.head != arrow.head {
            return Err(Error::InvalidInput(format!(
                "arrow {a} changes endpoints between source and target"
            )));
        }
        PathSum::arrow(&self.target, a, self.field)
    }

    /// Substitutes every letter of a source path; truncates at the degree
    /// bound, reporting whether anything nonzero was dropped.
    pub fn substitute_path(&self, p: &Path) -> Result<(PathSum, bool)> {
        let mut acc = PathSum::single(Path::trivial(p.tail().clone()), self.field.one());
        let mut overflow = false;
        for letter in p.arrows() {
            let img = self.image_of(letter)?;
            let (next, ov) = acc.concat(&img, self.degree_bound)?;
            overflow |= ov;
            acc = next;
        }
        Ok((acc, overflow))
    }

    pub fn substitute_pathsum(&self, ps: &PathSum) -> Result<(PathSum, bool)> {
        let mut out = PathSum::zero();
        let mut overflow = false;
        for (p, c) in ps.terms() {
            let (img, ov) = self.substitute_path(p)?;
            overflow |= ov;
            out = out.add(&img.scale(c));
        }
        Ok((out, overflow))
    }

    /// Applies the substitution to a potential: expand, truncate past the
    /// degree bound, renormalize cyclically, drop zeros.
    pub fn apply(&self, s: &Potential, policy: Truncation) -> Result<Potential> {
        if s.quiver() != &self.source {
            return Err(Error::QuiverMismatch(
                "potential does not live over the substitution source".into(),
            ));
        }
        if s.degree_bound() != self.degree_bound {
            return Err(Error::QuiverMismatch("degree bounds differ".into()));
        }
        if s.field() != self.field {
            return Err(Error::FieldMismatch("potential vs substitution".into()));
        }
        let mut out = Potential::zero(self.target.clone(), self.field, self.degree_bound);
        let mut overflow = false;
        for (cycle, coeff) in s.terms() {
            let (img, ov) = self.substitute_path(cycle)?;
            overflow |= ov;
            for (p, c) in img.terms() {
                out.add_term(p, c.mul(coeff))?;
            }
        }
        if overflow && policy == Truncation::Strict {
            return Err(Error::DegreeOverflow {
                degree: self.degree_bound + 1,
                bound: self.degree_bound,
            });
        }
        Ok(out)
    }

    /// Composition: first `inner`, then `self`.
    pub fn compose(&self, inner: &RightEquivalence) -> Result<RightEquivalence> {
        if inner.target != self.source {
            return Err(Error::QuiverMismatch(
                "composition endpoints do not match".into(),
            ));
        }
        let mut subst = BTreeMap::new();
        for a in inner.source.arrows() {
            let (img, _) = self.substitute_pathsum(&inner.image_of(&a.id)?)?;
            let is_identity = img.num_terms() == 1
                && img
                    .terms()
                    .all(|(p, c)| p.len() == 1 && p.arrows()[0] == a.id && c.is_one());
            if !is_identity {
                subst.insert(a.id.clone(), img);
            }
        }
        RightEquivalence::new(
            inner.source.clone(),
            self.target.clone(),
            self.field,
            self.degree_bound,
            subst,
        )
    }

    /// Inverse substitution: invert the degree-1 part, then correct degree by
    /// degree. Terminates within the degree bound because each pass pushes
    /// the residual one degree higher.
    pub fn invert(&self) -> Result<RightEquivalence> {
        let blocks = self.linear_blocks()?;
        let mut linear_inv: BTreeMap<ArrowId, PathSum> = BTreeMap::new();
        for (u, v, l) in &blocks {
            let src = sorted_arrows_between(&self.source, u, v);
            let tgt = sorted_arrows_between(&self.target, u, v);
            if src.is_empty() {
                continue;
            }
            let li = l.inverse()?;
            for (j, t) in tgt.iter().enumerate() {
                let mut ps = PathSum::zero();
                for (i, s) in src.iter().enumerate() {
                    ps.add_term(
                        Path::new(&self.source, vec![s.clone()])?,
                        li.get(i, j).clone(),
                    );
                }
                linear_inv.insert(t.clone(), ps);
            }
        }
        let apply_linear_inv = |ps: &PathSum| -> Result<PathSum> {
            let mut out = PathSum::zero();
            for (p, c) in ps.terms() {
                let mut acc = PathSum::single(Path::trivial(p.tail().clone()), self.field.one());
                for letter in p.arrows() {
                    let img = match linear_inv.get(letter) {
                        Some(ps) => ps.clone(),
                        None => PathSum::arrow(&self.source, letter, self.field)?,
                    };
                    let (next, _) = acc.concat(&img, self.degree_bound)?;
                    acc = next;
                }
                out = out.add(&acc.scale(c));
            }
            Ok(out)
        };
        let mut subst = BTreeMap::new();
        for b in self.target.arrows() {
            let target_arrow = PathSum::arrow(&self.target, &b.id, self.field)?;
            let mut p = apply_linear_inv(&target_arrow)?;
            for _ in 0..=self.degree_bound {
                let (phi_p, _) = self.substitute_pathsum(&p)?;
                let residual = target_arrow.add(&phi_p.neg());
                if residual.is_zero() {
                    break;
                }
                p = p.add(&apply_linear_inv(&residual)?);
            }
            let (phi_p, _) = self.substitute_pathsum(&p)?;
            if phi_p != target_arrow {
                return Err(Error::NotSplittable(format!(
                    "substitution does not invert on arrow {}",
                    b.id
                )));
            }
            let is_identity = p.num_terms() == 1
                && p.terms()
                    .all(|(q, c)| q.len() == 1 && q.arrows()[0] == b.id && c.is_one());
            if !is_identity {
                subst.insert(b.id.clone(), p);
            }
        }
        RightEquivalence::new(
            self.target.clone(),
            self.source.clone(),
            self.field,
            self.degree_bound,
            subst,
        )
    }
}

fn sorted_arrows_between(q: &Quiver, u: &VertexId, v: &VertexId) -> Vec<ArrowId> {
    let mut ids: Vec<ArrowId> = q
        .arrows()
        .iter()
        .filter(|a| &a.tail == u && &a.head == v)
        .map(|a| a.id.clone())
        .collect();
    ids.sort();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cycle() -> Quiver {
        Quiver::from_strs(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")],
        )
        .unwrap()
    }

    fn f() -> Field {
        Field::default_fp()
    }

    fn cba(q: &Quiver) -> Path {
        Path::written_strs(q, &["c", "b", "a"]).unwrap()
    }

    #[test]
    fn non_cycle_normalization_is_rejected() {
        let q = three_cycle();
        let p = Path::written_strs(&q, &["a"]).unwrap();
        assert!(matches!(p.canonical_rotation(&q), Err(Error::NotACycle(_))));
    }

    #[test]
    fn rotations_share_a_canonical_form() {
        let q = three_cycle();
        let w1 = cba(&q);
        let w2 = Path::written_strs(&q, &["a", "c", "b"]).unwrap();
        let w3 = Path::written_strs(&q, &["b", "a", "c"]).unwrap();
        let c1 = w1.canonical_rotation(&q).unwrap();
        assert_eq!(c1, w2.canonical_rotation(&q).unwrap());
        assert_eq!(c1, w3.canonical_rotation(&q).unwrap());
        assert_eq!(c1, c1.canonical_rotation(&q).unwrap());
    }

    #[test]
    fn distinct_four_cycles_have_distinct_forms() {
        let q = Quiver::from_strs(
            &["1", "2"],
            &[
                ("a", "1", "2"),
                ("b", "2", "1"),
                ("x", "1", "2"),
                ("y", "2", "1"),
            ],
        )
        .unwrap();
        let c1 = Path::written_strs(&q, &["y", "x", "b", "a"]).unwrap();
        let c2 = Path::written_strs(&q, &["b", "x", "y", "a"]).unwrap();
        assert_ne!(
            c1.canonical_rotation(&q).unwrap(),
            c2.canonical_rotation(&q).unwrap()
        );
    }

    #[test]
    fn cyclic_derivative_of_cba() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        let da = s.cyclic_derivative(&ArrowId::new("a")).unwrap();
        assert_eq!(
            da,
            PathSum::single(Path::written_strs(&q, &["c", "b"]).unwrap(), f().one())
        );
        let db = s.cyclic_derivative(&ArrowId::new("b")).unwrap();
        assert_eq!(
            db,
            PathSum::single(Path::written_strs(&q, &["a", "c"]).unwrap(), f().one())
        );
        let dc = s.cyclic_derivative(&ArrowId::new("c")).unwrap();
        assert_eq!(
            dc,
            PathSum::single(Path::written_strs(&q, &["b", "a"]).unwrap(), f().one())
        );
    }

    #[test]
    fn cyclic_derivative_linearity_and_off_support() {
        let q = Quiver::from_strs(
            &["1", "2", "3"],
            &[
                ("a", "1", "2"),
                ("b", "2", "3"),
                ("c", "3", "1"),
                ("d", "1", "3"),
            ],
        )
        .unwrap();
        let s = Potential::from_terms(
            q.clone(),
            f(),
            12,
            vec![(Path::written_strs(&q, &["c", "b", "a"]).unwrap(), f().from_i64(2))],
        )
        .unwrap();
        assert!(s.cyclic_derivative(&ArrowId::new("d")).unwrap().is_zero());
        let da = s.cyclic_derivative(&ArrowId::new("a")).unwrap();
        assert_eq!(
            da,
            PathSum::single(
                Path::written_strs(&q, &["c", "b"]).unwrap(),
                f().from_i64(2)
            )
        );
    }

    #[test]
    fn rotation_invariance_of_derivatives() {
        let q = three_cycle();
        let s1 = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().from_i64(4))]).unwrap();
        let s2 = Potential::from_terms(
            q.clone(),
            f(),
            12,
            vec![(
                Path::written_strs(&q, &["a", "c", "b"]).unwrap(),
                f().from_i64(4),
            )],
        )
        .unwrap();
        for a in ["a", "b", "c"] {
            assert_eq!(
                s1.cyclic_derivative(&ArrowId::new(a)).unwrap(),
                s2.cyclic_derivative(&ArrowId::new(a)).unwrap()
            );
        }
    }

    #[test]
    fn second_derivative_of_cba() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        let d = s
            .second_derivative(&ArrowId::new("b"), &ArrowId::new("a"))
            .unwrap();
        assert_eq!(
            d,
            PathSum::single(Path::written_strs(&q, &["c"]).unwrap(), f().one())
        );
    }

    #[test]
    fn second_derivative_vanishes_off_support() {
        let q = Quiver::from_strs(
            &["1", "2", "3", "4"],
            &[
                ("a", "1", "2"),
                ("b", "2", "3"),
                ("c", "3", "1"),
                ("d", "4", "2"),
            ],
        )
        .unwrap();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        // the factor "b after d" never occurs
        let none = s
            .second_derivative(&ArrowId::new("b"), &ArrowId::new("d"))
            .unwrap();
        assert!(none.is_zero());
    }

    #[test]
    fn second_derivative_on_two_cycle_yields_trivial_path() {
        let q = Quiver::from_strs(&["1", "2"], &[("u", "1", "2"), ("v", "2", "1")]).unwrap();
        let uv = Path::written_strs(&q, &["u", "v"]).unwrap();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(uv, f().one())]).unwrap();
        // result sits at h(u) = t(v) = 2
        let d = s
            .second_derivative(&ArrowId::new("u"), &ArrowId::new("v"))
            .unwrap();
        assert_eq!(
            d,
            PathSum::single(Path::trivial(VertexId::new("2")), f().one())
        );
        // and the other matching pair sits at h(v) = t(u) = 1
        let d2 = s
            .second_derivative(&ArrowId::new("v"), &ArrowId::new("u"))
            .unwrap();
        assert_eq!(
            d2,
            PathSum::single(Path::trivial(VertexId::new("1")), f().one())
        );
    }

    #[test]
    fn second_derivative_rejects_noncomposable_pairs() {
        let q = three_cycle();
        let s = Potential::zero(q, f(), 12);
        assert!(matches!(
            s.second_derivative(&ArrowId::new("a"), &ArrowId::new("b")),
            Err(Error::ArrowsNotComposable(_))
        ));
    }

    #[test]
    fn decomposition_identity_through_a_vertex() {
        // d_a(S) = sum_q d_{b_q a}(S) . b_q for the incoming arrow a at k = 2
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().from_i64(5))]).unwrap();
        let da = s.cyclic_derivative(&ArrowId::new("a")).unwrap();
        let dba = s
            .second_derivative(&ArrowId::new("b"), &ArrowId::new("a"))
            .unwrap();
        let b = PathSum::arrow(&q, &ArrowId::new("b"), f()).unwrap();
        let (recomposed, _) = b.concat(&dba, 12).unwrap();
        assert_eq!(da, recomposed);
    }

    #[test]
    fn cyclically_equal_cases() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        let w = Potential::from_terms(
            q.clone(),
            f(),
            12,
            vec![(Path::written_strs(&q, &["b", "a", "c"]).unwrap(), f().one())],
        )
        .unwrap();
        assert!(s.cyclically_equal(&w).unwrap());
        assert!(s.cyclically_equal(&s).unwrap());
        let double = s.scale(&f().from_i64(2));
        assert!(!s.cyclically_equal(&double).unwrap());
    }

    #[test]
    fn identity_substitution_fixes_potentials() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        let id = RightEquivalence::identity(q, f(), 12);
        assert!(id
            .apply(&s, Truncation::Strict)
            .unwrap()
            .cyclically_equal(&s)
            .unwrap());
    }

    #[test]
    fn sign_flip_substitution() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 12, vec![(cba(&q), f().one())]).unwrap();
        let mut subst = BTreeMap::new();
        subst.insert(
            ArrowId::new("b"),
            PathSum::single(Path::written_strs(&q, &["b"]).unwrap(), f().one().neg()),
        );
        let phi = RightEquivalence::new(q.clone(), q.clone(), f(), 12, subst).unwrap();
        let t = phi.apply(&s, Truncation::Strict).unwrap();
        assert!(t.cyclically_equal(&s.scale(&f().one().neg())).unwrap());
        let tt = phi.apply(&t, Truncation::Strict).unwrap();
        assert!(tt.cyclically_equal(&s).unwrap());
    }

    #[test]
    fn composition_agrees_with_sequential_application() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 6, vec![(cba(&q), f().from_i64(3))]).unwrap();
        let mut s1 = BTreeMap::new();
        s1.insert(
            ArrowId::new("b"),
            PathSum::single(Path::written_strs(&q, &["b"]).unwrap(), f().from_i64(2)),
        );
        let phi = RightEquivalence::new(q.clone(), q.clone(), f(), 6, s1).unwrap();
        let mut s2 = BTreeMap::new();
        let mut img = PathSum::single(Path::written_strs(&q, &["c"]).unwrap(), f().one());
        img.add_term(
            Path::written_strs(&q, &["c", "b", "a", "c"]).unwrap(),
            f().from_i64(7),
        );
        s2.insert(ArrowId::new("c"), img);
        let psi = RightEquivalence::new(q.clone(), q.clone(), f(), 6, s2).unwrap();
        let seq = phi
            .apply(&psi.apply(&s, Truncation::Silent).unwrap(), Truncation::Silent)
            .unwrap();
        let comp = phi
            .compose(&psi)
            .unwrap()
            .apply(&s, Truncation::Silent)
            .unwrap();
        assert!(seq.cyclically_equal(&comp).unwrap());
    }

    #[test]
    fn inversion_round_trips() {
        let q = three_cycle();
        let mut subst = BTreeMap::new();
        let mut img = PathSum::single(Path::written_strs(&q, &["c"]).unwrap(), f().from_i64(5));
        img.add_term(
            Path::written_strs(&q, &["c", "b", "a", "c"]).unwrap(),
            f().from_i64(3),
        );
        subst.insert(ArrowId::new("c"), img);
        let phi = RightEquivalence::new(q.clone(), q.clone(), f(), 9, subst).unwrap();
        let inv = phi.invert().unwrap();
        let s = Potential::from_terms(q.clone(), f(), 9, vec![(cba(&q), f().one())]).unwrap();
        let round = phi
            .compose(&inv)
            .unwrap()
            .apply(&s, Truncation::Silent)
            .unwrap();
        assert!(round.cyclically_equal(&s).unwrap());
        let round2 = inv
            .compose(&phi)
            .unwrap()
            .apply(&s, Truncation::Silent)
            .unwrap();
        assert!(round2.cyclically_equal(&s).unwrap());
    }

    #[test]
    fn strict_truncation_reports_overflow() {
        let q = three_cycle();
        let s = Potential::from_terms(q.clone(), f(), 4, vec![(cba(&q), f().one())]).unwrap();
        let mut subst = BTreeMap::new();
        let mut img = PathSum::single(Path::written_strs(&q, &["a"]).unwrap(), f().one());
        img.add_term(
            Path::written_strs(&q, &["a", "c", "b", "a"]).unwrap(),
            f().one(),
        );
        subst.insert(ArrowId::new("a"), img);
        // a -> a + acba sends cba past degree 4
        let phi = RightEquivalence::new(q.clone(), q.clone(), f(), 4, img_subst(subst)).unwrap();
        assert!(matches!(
            phi.apply(&s, Truncation::Strict),
            Err(Error::DegreeOverflow { .. })
        ));
        let silent = phi.apply(&s, Truncation::Silent).unwrap();
        assert_eq!(silent.num_terms(), 1);
    }

    fn img_subst(m: BTreeMap<ArrowId, PathSum>) -> BTreeMap<ArrowId, PathSum> {
        m
    }
}
