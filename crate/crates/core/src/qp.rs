//! Quivers with potential: premutation in both directions, the constructive
//! reduction splitting off the trivial degree-2 part, and full QP mutation.
//!
//! The splitting works over a fixed arrow alphabet. A linear change of arrow
//! basis brings the degree-2 part to a sum of disjoint 2-cycles with unit
//! coefficient, then unitriangular substitutions push every mixed term (a
//! higher term containing a paired arrow) past the degree bound. Pivoting
//! scans arrows newest-first, so arrows created by premutation absorb the
//! corrections and original arrows survive into the reduced part whenever
//! the pairing allows it.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::potential::{Path, PathSum, Potential, RightEquivalence, Truncation};
use crate::quiver::{ArrowId, Quiver, VertexId};
use std::collections::{BTreeMap, BTreeSet};

/// Direction of a mutation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

/// A quiver with potential.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QP {
    quiver: Quiver,
    potential: Potential,
}

impl QP {
    pub fn new(quiver: Quiver, potential: Potential) -> Result<QP> {
        if potential.quiver() != &quiver {
            return Err(Error::QuiverMismatch(
                "potential lives over a different quiver".into(),
            ));
        }
        Ok(QP { quiver, potential })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// No degree-2 terms.
    pub fn is_reduced(&self) -> bool {
        self.potential.is_reduced()
    }

    /// Purely quadratic with a pairing that saturates every arrow.
    pub fn is_trivial(&self) -> Result<bool> {
        if !self.potential.higher_part().is_zero() {
            return Ok(false);
        }
        let sr = split(self, Truncation::Silent)?;
        Ok(sr.reduced_part().quiver().arrows().is_empty())
    }

    /// Premutation at k: the two quiver steps plus the potential
    /// [S] +/- sum over pairs at k of [ba]a*b*.
    pub fn premutate(&self, k: &VertexId, sign: Sign) -> Result<QP> {
        let q = &self.quiver;
        q.validate_mutable(k)?;
        let tilde_q = q.premutate(k)?;
        let field = self.potential.field();
        let d = self.potential.degree_bound();
        let mut tilde_s = Potential::zero(tilde_q.clone(), field, d);

        // [S]: rotate each term to start off k, then swallow each passage
        // through k into a composite arrow.
        for (cycle, coeff) in self.potential.terms() {
            let bracket = bracket_cycle(q, &tilde_q, cycle, k)?;
            tilde_s.add_term(&bracket, coeff.clone())?;
        }

        // the cubic correction, one term per (incoming, outgoing) pair at k
        let unit = match sign {
            Sign::Plus => field.one(),
            Sign::Minus => field.one().neg(),
        };
        for a in q.in_arrows(k) {
            for b in q.out_arrows(k) {
                let comp = ArrowId::composite(&b.id, &a.id);
                let term = Path::new(
                    &tilde_q,
                    vec![b.id.starred(), a.id.starred(), comp],
                )?;
                if term.len() > d {
                    return Err(Error::DegreeOverflow {
                        degree: term.len(),
                        bound: d,
                    });
                }
                tilde_s.add_term(&term, unit.clone())?;
            }
        }
        QP::new(tilde_q, tilde_s)
    }

    pub fn premutate_plus(&self, k: &VertexId) -> Result<QP> {
        self.premutate(k, Sign::Plus)
    }

    pub fn premutate_minus(&self, k: &VertexId) -> Result<QP> {
        self.premutate(k, Sign::Minus)
    }

    /// Full mutation: premutate, then take the reduced part of the splitting.
    pub fn mutate(&self, k: &VertexId, sign: Sign, policy: Truncation) -> Result<(QP, SplitResult)> {
        let pre = self.premutate(k, sign)?;
        let sr = split(&pre, policy)?;
        Ok((sr.reduced_part().clone(), sr))
    }

    pub fn mutate_plus(&self, k: &VertexId, policy: Truncation) -> Result<(QP, SplitResult)> {
        self.mutate(k, Sign::Plus, policy)
    }

    pub fn mutate_minus(&self, k: &VertexId, policy: Truncation) -> Result<(QP, SplitResult)> {
        self.mutate(k, Sign::Minus, policy)
    }
}

/// Rewrites a cycle in the premutated alphabet: rotated to start off k, with
/// every (into k, out of k) pair of consecutive letters replaced by the
/// composite arrow.
fn bracket_cycle(q: &Quiver, tilde_q: &Quiver, cycle: &Path, k: &VertexId) -> Result<Path> {
    let start = (0..cycle.len())
        .find(|&i| &q.arrow(&cycle.arrows()[i]).unwrap().tail != k)
        .ok_or_else(|| Error::PreconditionViolated(format!("cycle never leaves {k}")))?;
    let rotated = cycle.rotation(q, start)?;
    let letters = rotated.arrows();
    let mut out: Vec<ArrowId> = Vec::new();
    let mut i = 0;
    while i < letters.len() {
        let arrow = q.arrow(&letters[i])?;
        if &arrow.head == k {
            // a cycle that enters k must leave it with the next letter
            let b = letters
                .get(i + 1)
                .ok_or_else(|| Error::PreconditionViolated("cycle ends at k".into()))?;
            out.push(ArrowId::composite(b, &letters[i]));
            i += 2;
        } else {
            out.push(letters[i].clone());
            i += 1;
        }
    }
    Path::new(tilde_q, out)
}

/// Outcome of the splitting: a trivial QP (disjoint unit-coefficient
/// 2-cycles), a reduced QP (no degree-2 terms, none of the paired arrows),
/// and the substitution realizing the decomposition in both directions.
#[derive(Clone, Debug)]
pub struct SplitResult {
    trivial_part: QP,
    reduced_part: QP,
    /// from the split presentation back to the original alphabet; its
    /// restriction to the reduced arrows transports representations
    phi: RightEquivalence,
    /// from the original alphabet to the split presentation
    phi_inv: RightEquivalence,
    pairs: Vec<(ArrowId, ArrowId)>,
}

impl SplitResult {
    pub fn trivial_part(&self) -> &QP {
        &self.trivial_part
    }

    pub fn reduced_part(&self) -> &QP {
        &self.reduced_part
    }

    pub fn phi(&self) -> &RightEquivalence {
        &self.phi
    }

    pub fn phi_inv(&self) -> &RightEquivalence {
        &self.phi_inv
    }

    pub fn pairs(&self) -> &[(ArrowId, ArrowId)] {
        &self.pairs
    }

    /// Images of the reduced arrows under phi, the data that transports a
    /// representation onto the reduced QP.
    pub fn phi_restricted(&self) -> Result<BTreeMap<ArrowId, PathSum>> {
        let mut out = BTreeMap::new();
        for a in self.reduced_part.quiver().arrows() {
            out.insert(a.id.clone(), self.phi.image_of(&a.id)?);
        }
        Ok(out)
    }

    /// Checks both directions of the splitting identity against the original
    /// potential, exactly, up to the degree bound.
    pub fn certify(&self, original: &QP) -> Result<()> {
        let fwd = self.phi_inv.apply(original.potential(), Truncation::Silent)?;
        let total = self
            .trivial_part
            .potential()
            .lift_to(original.quiver())?
            .add(&self.reduced_part.potential().lift_to(original.quiver())?)?;
        if !fwd.cyclically_equal(&total)? {
            return Err(Error::NotSplittable(
                "phi_inv(S) differs from S_triv + S_red".into(),
            ));
        }
        let back = self.phi.apply(&total, Truncation::Silent)?;
        if !back.cyclically_equal(original.potential())? {
            return Err(Error::NotSplittable(
                "phi(S_triv + S_red) differs from S".into(),
            ));
        }
        if !self.reduced_part.potential().is_reduced() {
            return Err(Error::NotSplittable("reduced part has 2-cycle terms".into()));
        }
        Ok(())
    }
}

impl Potential {
    /// Reinterprets the potential over a larger quiver with the same vertices
    /// and a superset of the arrows.
    pub fn lift_to(&self, bigger: &Quiver) -> Result<Potential> {
        let mut out = Potential::zero(bigger.clone(), self.field(), self.degree_bound());
        for (p, c) in self.terms() {
            out.add_term(&Path::new(bigger, p.arrows().to_vec())?, c.clone())?;
        }
        Ok(out)
    }
}

/// Arrows listed newest-first; premutation appends composites last, so this
/// makes freshly created arrows the preferred pivots.
fn reversed_order(q: &Quiver) -> BTreeMap<ArrowId, usize> {
    let n = q.arrows().len();
    q.arrows()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.clone(), n - i))
        .collect()
}

struct LinearNormalization {
    images: BTreeMap<ArrowId, PathSum>,
    pairs: Vec<(ArrowId, ArrowId)>,
}

/// Brings the degree-2 part to a disjoint sum of unit-coefficient 2-cycles by
/// an invertible linear change of arrow basis, recorded as a substitution.
/// Pivot arrows absorb all corrections.
fn normalize_degree_two(qp: &QP, order: &BTreeMap<ArrowId, usize>) -> Result<LinearNormalization> {
    let q = qp.quiver();
    let field = qp.potential().field();
    let s2 = qp.potential().degree_two_part();

    // identity images to start with
    let mut images: BTreeMap<ArrowId, PathSum> = BTreeMap::new();
    for a in q.arrows() {
        images.insert(a.id.clone(), PathSum::arrow(q, &a.id, field)?);
    }
    let mut pairs = Vec::new();

    // vertex pairs with quadratic terms
    let mut vertex_pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for (p, _) in s2.terms() {
        let u = p.tail().clone();
        let v = p.vertices(q)?[1].clone();
        let key = if u <= v { (u, v) } else { (v, u) };
        vertex_pairs.insert(key);
    }

    for (x, y) in vertex_pairs {
        let mut xs = arrows_between(q, &x, &y);
        let mut ys = arrows_between(q, &y, &x);
        xs.sort_by_key(|a| std::cmp::Reverse(order[a]));
        ys.sort_by_key(|a| std::cmp::Reverse(order[a]));
        let mut c = Matrix::build(&s2, q, &xs, &ys)?;

        let mut used_cols: BTreeSet<usize> = BTreeSet::new();
        for i in 0..xs.len() {
            let Some(m) = (0..ys.len())
                .find(|m| !used_cols.contains(m) && !c.get(i, *m).is_zero())
            else {
                continue;
            };
            used_cols.insert(m);
            pairs.push((xs[i].clone(), ys[m].clone()));

            // scale the pivot to 1: y_m -> (1/c) y_m
            let piv = c.get(i, m).clone();
            if !piv.is_one() {
                let inv = piv.inv()?;
                rewrite(&mut images, &ys[m], &PathSum::arrow(q, &ys[m], field)?.scale(&inv))?;
                c.scale_col(m, &inv);
            }
            // clear the pivot row: y_m -> y_m - c[i,n] y_n
            for n in 0..ys.len() {
                if n == m || c.get(i, n).is_zero() {
                    continue;
                }
                let lam = c.get(i, n).clone();
                let mut repl = PathSum::arrow(q, &ys[m], field)?;
                repl = repl.add(&PathSum::arrow(q, &ys[n], field)?.scale(&lam.neg()));
                rewrite(&mut images, &ys[m], &repl)?;
                c.col_sub(n, m, &lam);
            }
            // clear the pivot column: x_i -> x_i - c[j,m] x_j
            for j in 0..xs.len() {
                if j == i || c.get(j, m).is_zero() {
                    continue;
                }
                let lam = c.get(j, m).clone();
                let mut repl = PathSum::arrow(q, &xs[i], field)?;
                repl = repl.add(&PathSum::arrow(q, &xs[j], field)?.scale(&lam.neg()));
                rewrite(&mut images, &xs[i], &repl)?;
                c.row_sub(j, i, &lam);
            }
        }
    }

    Ok(LinearNormalization { images, pairs })
}

fn arrows_between(q: &Quiver, u: &VertexId, v: &VertexId) -> Vec<ArrowId> {
    q.arrows()
        .iter()
        .filter(|a| &a.tail == u && &a.head == v)
        .map(|a| a.id.clone())
        .collect()
}

/// Applies a single-arrow substitution to the accumulated images.
fn rewrite(
    images: &mut BTreeMap<ArrowId, PathSum>,
    arrow: &ArrowId,
    replacement: &PathSum,
) -> Result<()> {
    let mut next = BTreeMap::new();
    for (id, img) in images.iter() {
        let mut out = PathSum::zero();
        for (p, coeff) in img.terms() {
            // linear stage: paths are single arrows
            debug_assert_eq!(p.len(), 1);
            if &p.arrows()[0] == arrow {
                out = out.add(&replacement.scale(coeff));
            } else {
                out.add_term(p.clone(), coeff.clone());
            }
        }
        next.insert(id.clone(), out);
    }
    *images = next;
    Ok(())
}

/// Coefficient matrix of the quadratic pairing between two arrow families.
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    fn build(s2: &Potential, q: &Quiver, xs: &[ArrowId], ys: &[ArrowId]) -> Result<Matrix> {
        let field = s2.field();
        let mut data = Vec::with_capacity(xs.len() * ys.len());
        for x in xs {
            for y in ys {
                let cyc = Path::new(q, vec![x.clone(), y.clone()])?;
                let coeff = s2.coefficient(&cyc)?.cloned().unwrap_or(field.zero());
                data.push(coeff);
            }
        }
        Ok(Matrix {
            rows: xs.len(),
            cols: ys.len(),
            data,
        })
    }

    fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    fn scale_col(&mut self, c: usize, s: &Scalar) {
        for r in 0..self.rows {
            let v = self.get(r, c).mul(s);
            self.set(r, c, v);
        }
    }

    /// col_n -= lam * col_m
    fn col_sub(&mut self, n: usize, m: usize, lam: &Scalar) {
        for r in 0..self.rows {
            let v = self.get(r, n).sub(&lam.mul(self.get(r, m)));
            self.set(r, n, v);
        }
    }

    /// row_j -= lam * row_i
    fn row_sub(&mut self, j: usize, i: usize, lam: &Scalar) {
        for c in 0..self.cols {
            let v = self.get(j, c).sub(&lam.mul(self.get(i, c)));
            self.set(j, c, v);
        }
    }
}

/// Constructive splitting: returns the trivial and reduced parts together
/// with the substitution in both directions. Fails with `NotSplittable` only
/// if the elimination runs out of rounds, which a correct pairing never does.
pub fn split(qp: &QP, policy: Truncation) -> Result<SplitResult> {
    let q = qp.quiver().clone();
    let field = qp.potential().field();
    let d = qp.potential().degree_bound();
    let order = reversed_order(&q);

    let norm = normalize_degree_two(qp, &order)?;
    let pairs = norm.pairs;
    let mut psi = {
        let mut subst = BTreeMap::new();
        for (id, img) in &norm.images {
            if !is_identity_image(id, img) {
                subst.insert(id.clone(), img.clone());
            }
        }
        RightEquivalence::new(q.clone(), q.clone(), field, d, subst)?
    };
    let mut w = psi.apply(qp.potential(), policy)?;

    let trivial_arrows: BTreeSet<ArrowId> = pairs
        .iter()
        .flat_map(|(u, v)| [u.clone(), v.clone()])
        .collect();
    let partner: BTreeMap<ArrowId, ArrowId> = pairs
        .iter()
        .flat_map(|(u, v)| [(u.clone(), v.clone()), (v.clone(), u.clone())])
        .collect();

    let expected_s2 = pairing_potential(&q, field, d, &pairs)?;
    if !w.degree_two_part().cyclically_equal(&expected_s2)? {
        return Err(Error::DegenerateQuadraticPart(
            "linear normalization did not reach the canonical pairing".into(),
        ));
    }

    for _round in 0..=d {
        let mixed: Vec<(Path, Scalar)> = w
            .terms()
            .filter(|(p, _)| {
                p.len() > 2 && p.arrows().iter().any(|a| trivial_arrows.contains(a))
            })
            .map(|(p, c)| (p.clone(), c.clone()))
            .collect();
        if mixed.is_empty() {
            break;
        }
        let dmin = mixed.iter().map(|(p, _)| p.len()).min().unwrap();
        let mut corrections: BTreeMap<ArrowId, PathSum> = BTreeMap::new();
        for (p, c) in mixed.iter().filter(|(p, _)| p.len() == dmin) {
            let m = p
                .arrows()
                .iter()
                .position(|a| trivial_arrows.contains(a))
                .expect("mixed term has a trivial letter");
            let letter = &p.arrows()[m];
            // cyclic slice after the occurrence: runs h(letter) -> t(letter),
            // the endpoints of the partner arrow
            let n = p.len();
            let mut slice = Vec::with_capacity(n - 1);
            for s in 1..n {
                slice.push(p.arrows()[(m + s) % n].clone());
            }
            let sp = Path::new(&q, slice)?;
            corrections
                .entry(partner[letter].clone())
                .or_default()
                .add_term(sp, c.clone());
        }
        let mut subst = BTreeMap::new();
        for (arrow, corr) in corrections {
            let img = PathSum::arrow(&q, &arrow, field)?.add(&corr.neg());
            subst.insert(arrow, img);
        }
        let eta = RightEquivalence::new(q.clone(), q.clone(), field, d, subst)?;
        w = eta.apply(&w, policy)?;
        psi = eta.compose(&psi)?;
        if !w.degree_two_part().cyclically_equal(&expected_s2)? {
            return Err(Error::NotSplittable(
                "elimination disturbed the quadratic part".into(),
            ));
        }
    }

    if w.terms().any(|(p, _)| {
        p.len() > 2 && p.arrows().iter().any(|a| trivial_arrows.contains(a))
    }) {
        return Err(Error::NotSplittable(format!(
            "mixed terms of degree <= {d} remain after {d} rounds"
        )));
    }

    // partition the alphabet and the potential
    let trivial_quiver = Quiver::new(
        q.vertices().to_vec(),
        q.arrows()
            .iter()
            .filter(|a| trivial_arrows.contains(&a.id))
            .cloned()
            .collect(),
    )?;
    let reduced_quiver = Quiver::new(
        q.vertices().to_vec(),
        q.arrows()
            .iter()
            .filter(|a| !trivial_arrows.contains(&a.id))
            .cloned()
            .collect(),
    )?;
    let s_triv = pairing_potential(&trivial_quiver, field, d, &pairs)?;
    let mut s_red = Potential::zero(reduced_quiver.clone(), field, d);
    for (p, c) in w.terms() {
        if p.len() == 2 {
            continue;
        }
        s_red.add_term(&Path::new(&reduced_quiver, p.arrows().to_vec())?, c.clone())?;
    }

    let phi = psi.invert()?;
    let sr = SplitResult {
        trivial_part: QP::new(trivial_quiver, s_triv)?,
        reduced_part: QP::new(reduced_quiver, s_red)?,
        phi,
        phi_inv: psi,
        pairs,
    };
    sr.certify(qp)?;
    Ok(sr)
}

fn is_identity_image(id: &ArrowId, img: &PathSum) -> bool {
    img.num_terms() == 1
        && img
            .terms()
            .all(|(p, c)| p.len() == 1 && &p.arrows()[0] == id && c.is_one())
}

fn pairing_potential(
    q: &Quiver,
    field: crate::field::Field,
    d: usize,
    pairs: &[(ArrowId, ArrowId)],
) -> Result<Potential> {
    let mut s = Potential::zero(q.clone(), field, d);
    for (u, v) in pairs {
        s.add_term(&Path::new(q, vec![u.clone(), v.clone()])?, field.one())?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn f() -> Field {
        Field::default_fp()
    }

    fn k2() -> VertexId {
        VertexId::new("2")
    }

    pub(crate) fn three_cycle_qp() -> QP {
        let q = Quiver::from_strs(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")],
        )
        .unwrap();
        let s = Potential::from_terms(
            q.clone(),
            f(),
            12,
            vec![(Path::written_strs(&q, &["c", "b", "a"]).unwrap(), f().one())],
        )
        .unwrap();
        QP::new(q, s).unwrap()
    }

    fn single_arrow_qp() -> QP {
        let q = Quiver::from_strs(&["1", "2"], &[("a", "1", "2")]).unwrap();
        let s = Potential::zero(q.clone(), f(), 12);
        QP::new(q, s).unwrap()
    }

    #[test]
    fn premutate_plus_with_no_pairs() {
        let qp = single_arrow_qp();
        let pm = qp.premutate_plus(&k2()).unwrap();
        assert_eq!(pm.quiver().arrows().len(), 1);
        assert!(pm.potential().is_zero());
    }

    #[test]
    fn premutate_kronecker_has_zero_potential() {
        let q = Quiver::from_strs(&["1", "2"], &[("a1", "1", "2"), ("a2", "1", "2")]).unwrap();
        let qp = QP::new(q.clone(), Potential::zero(q, f(), 12)).unwrap();
        let pm = qp.premutate_plus(&k2()).unwrap();
        assert!(pm.potential().is_zero());
        assert_eq!(pm.quiver().arrows().len(), 2);
    }

    #[test]
    fn premutate_three_cycle_both_signs() {
        let qp = three_cycle_qp();
        let plus = qp.premutate_plus(&k2()).unwrap();
        let tq = plus.quiver().clone();
        // c[ba] + [ba]a*b*
        let c_ba = Path::written_strs(&tq, &["c", "[ba]"]).unwrap();
        let cubic = Path::written_strs(&tq, &["[ba]", "a*", "b*"]).unwrap();
        assert_eq!(plus.potential().num_terms(), 2);
        assert_eq!(
            plus.potential().coefficient(&c_ba).unwrap(),
            Some(&f().one())
        );
        assert_eq!(
            plus.potential().coefficient(&cubic).unwrap(),
            Some(&f().one())
        );

        let minus = qp.premutate_minus(&k2()).unwrap();
        assert_eq!(
            minus.potential().coefficient(&cubic).unwrap(),
            Some(&f().one().neg())
        );
        assert_eq!(
            minus.potential().coefficient(&c_ba).unwrap(),
            Some(&f().one())
        );
    }

    #[test]
    fn premutate_minus_with_no_in_arrows_keeps_potential() {
        // no arrows into 1, so the correction sum is empty and [T] = T
        let qp = three_cycle_qp();
        let q = Quiver::from_strs(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3"), ("c", "1", "3")],
        )
        .unwrap();
        let s = Potential::zero(q.clone(), f(), 12);
        let acyclic = QP::new(q, s).unwrap();
        let pm = acyclic.premutate_minus(&VertexId::new("1")).unwrap();
        assert!(pm.potential().is_zero());
        let _ = qp;
    }

    #[test]
    fn split_of_reduced_input_is_identity() {
        let qp = three_cycle_qp();
        let sr = split(&qp, Truncation::Strict).unwrap();
        assert!(sr.trivial_part().quiver().arrows().is_empty());
        assert!(sr.phi().is_identity_subst());
        assert_eq!(sr.reduced_part(), &qp);
    }

    #[test]
    fn split_of_premutated_three_cycle() {
        let qp = three_cycle_qp();
        let pre = qp.premutate_plus(&k2()).unwrap();
        let sr = split(&pre, Truncation::Strict).unwrap();

        // trivial part is the 2-cycle c[ba]
        let triv = sr.trivial_part();
        assert_eq!(triv.quiver().arrows().len(), 2);
        assert_eq!(sr.pairs().len(), 1);
        let (u, v) = &sr.pairs()[0];
        let mut pair = [u.as_str(), v.as_str()];
        pair.sort();
        assert_eq!(pair, ["[ba]", "c"]);

        // reduced part is 1 <- 2 <- 3 with zero potential
        let red = sr.reduced_part();
        assert_eq!(red.quiver().arrows().len(), 2);
        assert!(red.quiver().arrow(&ArrowId::new("a*")).is_ok());
        assert!(red.quiver().arrow(&ArrowId::new("b*")).is_ok());
        assert!(red.potential().is_zero());

        // the forward substitution is c -> c - a*b*
        let img = sr.phi_inv().image_of(&ArrowId::new("c")).unwrap();
        let tq = pre.quiver();
        let mut expect = PathSum::arrow(tq, &ArrowId::new("c"), f()).unwrap();
        expect.add_term(
            Path::written_strs(tq, &["a*", "b*"]).unwrap(),
            f().one().neg(),
        );
        assert_eq!(img, expect);

        // and the inverse is c -> c + a*b*
        let back = sr.phi().image_of(&ArrowId::new("c")).unwrap();
        let mut expect_back = PathSum::arrow(tq, &ArrowId::new("c"), f()).unwrap();
        expect_back.add_term(
            Path::written_strs(tq, &["a*", "b*"]).unwrap(),
            f().one(),
        );
        assert_eq!(back, expect_back);
    }

    #[test]
    fn split_of_premutated_three_cycle_minus() {
        let qp = three_cycle_qp();
        let pre = qp.premutate_minus(&k2()).unwrap();
        let sr = split(&pre, Truncation::Strict).unwrap();
        // the inverse direction carries c -> c + a*b*, so here the sign flips
        let back = sr.phi().image_of(&ArrowId::new("c")).unwrap();
        let tq = pre.quiver();
        let mut expect_back = PathSum::arrow(tq, &ArrowId::new("c"), f()).unwrap();
        expect_back.add_term(
            Path::written_strs(tq, &["a*", "b*"]).unwrap(),
            f().one().neg(),
        );
        assert_eq!(back, expect_back);
        assert!(sr.reduced_part().potential().is_zero());
    }

    #[test]
    fn mutate_three_cycle() {
        let qp = three_cycle_qp();
        let (m, sr) = qp.mutate_plus(&k2(), Truncation::Strict).unwrap();
        assert_eq!(m.quiver().arrows().len(), 2);
        assert!(m.potential().is_zero());
        sr.certify(&qp.premutate_plus(&k2()).unwrap()).unwrap();
    }

    #[test]
    fn mutate_single_arrow() {
        let qp = single_arrow_qp();
        let (m, _) = qp.mutate_plus(&k2(), Truncation::Strict).unwrap();
        assert_eq!(m.quiver().arrows().len(), 1);
        assert_eq!(m.quiver().arrows()[0].tail, k2());
        assert!(m.potential().is_zero());
    }

    #[test]
    fn split_with_residual_higher_terms() {
        // uv + (degree-4 cycle through u,v) + a pure spectator term: the
        // elimination clears the mixed term and keeps the spectator
        let q = Quiver::from_strs(
            &["1", "2", "3"],
            &[
                ("u", "1", "2"),
                ("v", "2", "1"),
                ("x", "1", "3"),
                ("y", "3", "1"),
            ],
        )
        .unwrap();
        let uv = Path::written_strs(&q, &["u", "v"]).unwrap();
        // app order (u, v, x, y): 1 -> 2 -> 1 -> 3 -> 1
        let quartic = Path::new(
            &q,
            vec![
                ArrowId::new("u"),
                ArrowId::new("v"),
                ArrowId::new("x"),
                ArrowId::new("y"),
            ],
        )
        .unwrap();
        let pure = Path::new(
            &q,
            vec![
                ArrowId::new("x"),
                ArrowId::new("y"),
                ArrowId::new("x"),
                ArrowId::new("y"),
            ],
        )
        .unwrap();
        let s = Potential::from_terms(
            q.clone(),
            f(),
            8,
            vec![
                (uv, f().one()),
                (quartic, f().from_i64(3)),
                (pure, f().from_i64(5)),
            ],
        )
        .unwrap();
        let qp = QP::new(q.clone(), s).unwrap();
        let sr = split(&qp, Truncation::Silent).unwrap();
        assert_eq!(sr.pairs().len(), 1);
        let red = sr.reduced_part();
        assert_eq!(red.quiver().arrows().len(), 2);
        // the spectator term survives; everything trivial-flavored is gone
        assert!(red.potential().num_terms() >= 1);
        assert!(red.potential().is_reduced());
        sr.certify(&qp).unwrap();
    }

    #[test]
    fn premutation_needs_degree_bound_three() {
        let q = Quiver::from_strs(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")],
        )
        .unwrap();
        let s = Potential::zero(q.clone(), f(), 2);
        let qp = QP::new(q, s).unwrap();
        assert!(matches!(
            qp.premutate_plus(&k2()),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn quiver_of_mutation_matches_pure_quiver_mutation_here() {
        let qp = three_cycle_qp();
        let (m, _) = qp.mutate_plus(&k2(), Truncation::Strict).unwrap();
        let pure = qp.quiver().mutate(&k2()).unwrap();
        assert_eq!(m.quiver().arrow_multiset(), pure.arrow_multiset());
    }
}
