//! Finite abelian groups Z_{N1}×…×Z_{Nd}: DFT, annihilators, sections,
//! the fiberization isometry, optimal shift-invariant spaces with and
//! without extra invariance, Wiener sets, and the translation-invariance /
//! total-decomposability correspondence.
//!
//! Everything here is exact: groups are finite, the dual is identified with
//! the group itself through (x, γ) = exp(2πi Σ_t x_t γ_t / N_t), and all
//! set-level computations (annihilators, sections, partitions) are done in
//! integer arithmetic.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{vdot, C64};
use crate::measure::{Decomposition, RangeBasis, VectorField, WeightedGrid};
use crate::mi::{contains, solve_problem1, MiSolution};
use crate::deco::{decomposable_check, solve_problem2};
use crate::par;

pub type GroupElement = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAbelianGroup {
    orders: Vec<u32>,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() || orders.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput(
                "group orders must be a nonempty list of positive integers".into(),
            ));
        }
        Ok(FiniteAbelianGroup { orders })
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self) -> usize {
        self.orders.iter().map(|&n| n as usize).product()
    }

    pub fn zero(&self) -> GroupElement {
        vec![0; self.orders.len()]
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.order());
        let mut cur = self.zero();
        loop {
            out.push(cur.clone());
            let mut t = self.orders.len();
            loop {
                if t == 0 {
                    return out;
                }
                t -= 1;
                cur[t] += 1;
                if cur[t] < self.orders[t] {
                    break;
                }
                cur[t] = 0;
                if t == 0 {
                    return out;
                }
            }
        }
    }

    /// Mixed-radix rank of an element within [`Self::elements`].
    pub fn index_of(&self, x: &GroupElement) -> usize {
        let mut idx = 0usize;
        for (xi, &n) in x.iter().zip(&self.orders) {
            idx = idx * n as usize + *xi as usize;
        }
        idx
    }

    pub fn contains_element(&self, x: &GroupElement) -> bool {
        x.len() == self.orders.len() && x.iter().zip(&self.orders).all(|(&xi, &n)| xi < n)
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        x.iter()
            .zip(y)
            .zip(&self.orders)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect()
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        x.iter()
            .zip(&self.orders)
            .map(|(&a, &n)| (n - a) % n)
            .collect()
    }

    /// (x, γ) = exp(2πi Σ_t x_t γ_t / N_t).
    pub fn pairing(&self, x: &GroupElement, gamma: &GroupElement) -> C64 {
        let mut frac = 0.0f64;
        for ((&xt, &gt), &n) in x.iter().zip(gamma).zip(&self.orders) {
            frac += ((xt as u64 * gt as u64) % n as u64) as f64 / n as f64;
        }
        let angle = 2.0 * std::f64::consts::PI * frac;
        C64::new(angle.cos(), angle.sin())
    }

    /// Exact test for (x, γ) = 1, in integer arithmetic.
    pub fn pairing_is_trivial(&self, x: &GroupElement, gamma: &GroupElement) -> bool {
        // Σ_t x_t γ_t / N_t ∈ Z  ⟺  Σ_t x_t γ_t (L/N_t) ≡ 0 (mod L)
        let l = self
            .orders
            .iter()
            .fold(1u64, |acc, &n| num_lcm(acc, n as u64));
        let mut sum = 0u64;
        for ((&xt, &gt), &n) in x.iter().zip(gamma).zip(&self.orders) {
            sum = (sum + (xt as u64 * gt as u64 % n as u64) * (l / n as u64)) % l;
        }
        sum == 0
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / num_gcd(a, b) * b
}

/// A subgroup H of a finite abelian group, stored as its sorted element list.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    group: Arc<FiniteAbelianGroup>,
    elements: Vec<GroupElement>,
}

impl Lattice {
    pub fn new(group: Arc<FiniteAbelianGroup>, mut elements: Vec<GroupElement>) -> Result<Self> {
        elements.sort();
        elements.dedup();
        if elements.iter().any(|x| !group.contains_element(x)) {
            return Err(Error::InvalidInput(
                "subgroup element outside the group".into(),
            ));
        }
        if !elements.contains(&group.zero()) {
            return Err(Error::InvalidInput("subgroup must contain the identity".into()));
        }
        for x in &elements {
            for y in &elements {
                let s = group.add(x, y);
                if elements.binary_search(&s).is_err() {
                    return Err(Error::InvalidInput(format!(
                        "set is not closed under addition: {x:?} + {y:?}"
                    )));
                }
            }
        }
        Ok(Lattice { group, elements })
    }

    /// Subgroup generated by the given elements.
    pub fn from_generators(
        group: Arc<FiniteAbelianGroup>,
        generators: &[GroupElement],
    ) -> Result<Self> {
        if generators.iter().any(|x| !group.contains_element(x)) {
            return Err(Error::InvalidInput("generator outside the group".into()));
        }
        let mut elems = vec![group.zero()];
        let mut frontier = elems.clone();
        while let Some(x) = frontier.pop() {
            for g in generators {
                let y = group.add(&x, g);
                if !elems.contains(&y) {
                    elems.push(y.clone());
                    frontier.push(y);
                }
            }
        }
        elems.sort();
        Ok(Lattice {
            group,
            elements: elems,
        })
    }

    pub fn full(group: Arc<FiniteAbelianGroup>) -> Self {
        let elements = group.elements();
        Lattice { group, elements }
    }

    pub fn trivial(group: Arc<FiniteAbelianGroup>) -> Self {
        let elements = vec![group.zero()];
        Lattice { group, elements }
    }

    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Lattice) -> bool {
        self.group == other.group && self.elements.iter().all(|x| other.contains(x))
    }
}

/// Annihilator H* = {γ ∈ Ĝ : (x, γ) = 1 for all x ∈ H}, sorted.
pub fn annihilator(lattice: &Lattice) -> Vec<GroupElement> {
    let group = lattice.group();
    group
        .elements()
        .into_iter()
        .filter(|gamma| {
            lattice
                .elements()
                .iter()
                .all(|x| group.pairing_is_trivial(x, gamma))
        })
        .collect()
}

/// The data needed to fiberize against a lattice: the annihilator H*, the
/// lexicographically smallest section Ω of Ĝ/H*, and the fiber weight 1/|G|.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberizationData {
    group: Arc<FiniteAbelianGroup>,
    annihilator: Vec<GroupElement>,
    section: Vec<GroupElement>,
}

impl FiberizationData {
    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn annihilator(&self) -> &[GroupElement] {
        &self.annihilator
    }

    pub fn section(&self) -> &[GroupElement] {
        &self.section
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.group.order() as f64
    }

    /// Fiber dimension |H*|.
    pub fn fiber_dim(&self) -> usize {
        self.annihilator.len()
    }

    pub fn grid(&self) -> Result<Arc<WeightedGrid>> {
        let ids = self
            .section
            .iter()
            .map(|w| element_id(w))
            .collect::<Vec<_>>();
        let weights = vec![self.weight(); self.section.len()];
        Ok(Arc::new(WeightedGrid::new(ids, weights)?))
    }
}

pub fn element_id(x: &GroupElement) -> String {
    x.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Build the annihilator and the lexicographically smallest section of
/// Ĝ/H* for a subgroup H.
pub fn section(lattice: &Lattice) -> FiberizationData {
    let group = lattice.group().clone();
    let ann = annihilator(lattice);
    let mut covered = vec![false; group.order()];
    let mut sec = Vec::new();
    for gamma in group.elements() {
        let idx = group.index_of(&gamma);
        if covered[idx] {
            continue;
        }
        for delta in &ann {
            covered[group.index_of(&group.add(&gamma, delta))] = true;
        }
        sec.push(gamma);
    }
    FiberizationData {
        group,
        annihilator: ann,
        section: sec,
    }
}

/// A complex function on the group, indexed by the lexicographic element
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    group: Arc<FiniteAbelianGroup>,
    values: Vec<C64>,
}

impl Signal {
    pub fn new(group: Arc<FiniteAbelianGroup>, values: Vec<C64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Signal { group, values })
    }

    pub fn zero(group: Arc<FiniteAbelianGroup>) -> Self {
        let n = group.order();
        Signal {
            group,
            values: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn delta(group: Arc<FiniteAbelianGroup>, at: &GroupElement) -> Signal {
        let mut s = Signal::zero(group);
        let idx = s.group.index_of(at);
        s.values[idx] = C64::new(1.0, 0.0);
        s
    }

    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, x: &GroupElement) -> C64 {
        self.values[self.group.index_of(x)]
    }

    /// T_h f(x) = f(x − h).
    pub fn translate(&self, h: &GroupElement) -> Signal {
        let values = self
            .group
            .elements()
            .into_iter()
            .map(|x| self.value(&self.group.add(&x, &self.group.neg(h))))
            .collect();
        Signal {
            group: self.group.clone(),
            values,
        }
    }

    /// ⟨f, g⟩ with counting measure, conjugate-linear in g.
    pub fn inner(&self, other: &Signal) -> C64 {
        vdot(&self.values, &other.values)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// f̂(γ) = Σ_x f(x)·conj((x, γ)). Direct O(|G|²) summation; group orders
/// stay small here.
pub fn dft(f: &Signal) -> Signal {
    let group = f.group().clone();
    let elements = group.elements();
    let values = par::map_indices(elements.len(), |gi| {
        let gamma = &elements[gi];
        elements
            .iter()
            .enumerate()
            .map(|(xi, x)| f.values()[xi] * group.pairing(x, gamma).conj())
            .sum()
    });
    Signal { group, values }
}

/// f(x) = (1/|G|) Σ_γ f̂(γ)·(x, γ).
pub fn idft(fhat: &Signal) -> Signal {
    let group = fhat.group().clone();
    let elements = group.elements();
    let scale = 1.0 / group.order() as f64;
    let values = par::map_indices(elements.len(), |xi| {
        let x = &elements[xi];
        elements
            .iter()
            .enumerate()
            .map(|(gi, gamma)| fhat.values()[gi] * group.pairing(x, gamma))
            .sum::<C64>()
            * scale
    });
    Signal { group, values }
}

/// The fiberization 𝒯f: ω ↦ (f̂(ω+δ))_{δ∈H*}, a vector field over the
/// section grid with weight 1/|G| per fiber. Isometric: ‖𝒯f‖ = ‖f‖.
pub fn fiberize(f: &Signal, fd: &FiberizationData) -> Result<VectorField> {
    if f.group() != &fd.group {
        return Err(Error::DimensionMismatch(
            "signal and fiberization data use different groups".into(),
        ));
    }
    let fhat = dft(f);
    let grid = fd.grid()?;
    let values = fd
        .section
        .iter()
        .map(|omega| {
            fd.annihilator
                .iter()
                .map(|delta| fhat.value(&fd.group.add(omega, delta)))
                .collect()
        })
        .collect();
    VectorField::new(grid, values)
}

/// Inverse of [`fiberize`]: reassemble f̂ on Ĝ from the fibers and invert
/// the DFT.
pub fn defiberize(field: &VectorField, fd: &FiberizationData) -> Result<Signal> {
    if field.grid().len() != fd.section.len() || field.dim() != fd.fiber_dim() {
        return Err(Error::DimensionMismatch(format!(
            "field is {}x{}, fiberization expects {}x{}",
            field.grid().len(),
            field.dim(),
            fd.section.len(),
            fd.fiber_dim()
        )));
    }
    let mut fhat = Signal::zero(fd.group.clone());
    for (wi, omega) in fd.section.iter().enumerate() {
        for (di, delta) in fd.annihilator.iter().enumerate() {
            let idx = fd.group.index_of(&fd.group.add(omega, delta));
            fhat.values[idx] = field.value(wi)[di];
        }
    }
    Ok(idft(&fhat))
}

/// Solution of an optimal shift-invariant space problem.
#[derive(Clone, Debug)]
pub struct SiSolution {
    /// Time-domain generators; their H-translates form a Parseval frame
    /// for V*.
    pub generators: Vec<Signal>,
    pub error: f64,
    pub range: RangeBasis,
    pub fiberization: FiberizationData,
    /// The underlying fiber-domain solution.
    pub mi: MiSolution,
}

fn defiberize_generators(mi: &MiSolution, fd: &FiberizationData) -> Result<Vec<Signal>> {
    // The counting/1-per-|G| normalization makes 𝒯 isometric but gives the
    // translate family the uniform frame bound |H|/|G|; scaling the
    // time-domain generators by √(|G|/|H|) restores Parseval bounds A=B=1
    // without changing the space they generate.
    let scale = (fd.fiber_dim() as f64).sqrt();
    mi.generators
        .iter()
        .map(|phi| {
            let f = defiberize(phi, fd)?;
            let values = f.values().iter().map(|z| z * scale).collect();
            Signal::new(fd.group.clone(), values)
        })
        .collect()
}

/// Optimal H-invariant space of length ≤ ℓ for the data, via fiberization
/// and the plain MI solver.
pub fn solve_si(data: &[Signal], lattice: &Lattice, ell: usize, epsilon: f64) -> Result<SiSolution> {
    let fd = section(lattice);
    let fields = data
        .iter()
        .map(|f| fiberize(f, &fd))
        .collect::<Result<Vec<_>>>()?;
    let mi = solve_problem1(&fields, ell, epsilon)?;
    let generators = defiberize_generators(&mi, &fd)?;
    Ok(SiSolution {
        generators,
        error: mi.error,
        range: mi.range.clone(),
        fiberization: fd,
        mi,
    })
}

/// Coordinate blocks of ℓ²(H*) induced by a larger subgroup Γ ⊇ H: the
/// section N of H*/Γ* and, per σ ∈ N, the indices of Γ*+σ within the
/// sorted annihilator H*.
pub fn extra_invariance_blocks(
    lattice: &Lattice,
    gamma: &Lattice,
) -> Result<(Vec<GroupElement>, Vec<Vec<usize>>)> {
    if !lattice.is_subgroup_of(gamma) {
        return Err(Error::InvalidInput(
            "the extra-invariance subgroup must contain the lattice".into(),
        ));
    }
    let group = lattice.group();
    let h_ann = annihilator(lattice);
    let g_ann = annihilator(gamma);
    // Γ* ⊆ H* since H ⊆ Γ.
    let mut reps: Vec<GroupElement> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut covered = vec![false; h_ann.len()];
    for (i, sigma) in h_ann.iter().enumerate() {
        if covered[i] {
            continue;
        }
        let mut block = Vec::new();
        for gstar in &g_ann {
            let elem = group.add(sigma, gstar);
            let pos = h_ann
                .binary_search(&elem)
                .map_err(|_| Error::InvalidInput("Γ* does not sit inside H*".into()))?;
            covered[pos] = true;
            block.push(pos);
        }
        block.sort_unstable();
        reps.push(sigma.clone());
        blocks.push(block);
    }
    Ok((reps, blocks))
}

/// B_σ = Ω + σ + Γ*, the spectral patch of one block; the B_σ over σ ∈ N
/// partition Ĝ.
pub fn b_sigma(
    fd: &FiberizationData,
    gamma_annihilator: &[GroupElement],
    sigma: &GroupElement,
) -> Vec<GroupElement> {
    let group = &fd.group;
    let mut out: Vec<GroupElement> = fd
        .section
        .iter()
        .flat_map(|omega| {
            gamma_annihilator
                .iter()
                .map(move |gstar| group.add(&group.add(omega, sigma), gstar))
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Optimal H-invariant space of length ≤ ℓ with extra invariance under a
/// larger subgroup Γ ⊇ H, via the block decomposition of ℓ²(H*) and the
/// decomposable MI solver.
pub fn solve_si_extra(
    data: &[Signal],
    lattice: &Lattice,
    gamma: &Lattice,
    ell: usize,
    epsilon: f64,
) -> Result<SiSolution> {
    let (_, blocks) = extra_invariance_blocks(lattice, gamma)?;
    let fd = section(lattice);
    let decomposition = Decomposition::new(blocks, None)?;
    let fields = data
        .iter()
        .map(|f| fiberize(f, &fd))
        .collect::<Result<Vec<_>>>()?;
    let mi = solve_problem2(&fields, &decomposition, ell, epsilon)?;
    let generators = defiberize_generators(&mi, &fd)?;
    Ok(SiSolution {
        generators,
        error: mi.error,
        range: mi.range.clone(),
        fiberization: fd,
        mi,
    })
}

/// Range basis of the H-invariant space generated by the given signals:
/// the fiberwise orthonormalized span of their fiberizations.
pub fn si_range(generators: &[Signal], lattice: &Lattice) -> Result<(RangeBasis, FiberizationData)> {
    let fd = section(lattice);
    if generators.is_empty() {
        let grid = fd.grid()?;
        let dim = fd.fiber_dim();
        return Ok((RangeBasis::empty(grid, dim), fd));
    }
    let fields = generators
        .iter()
        .map(|f| fiberize(f, &fd))
        .collect::<Result<Vec<_>>>()?;
    let range = RangeBasis::from_fields(&fields, 1e-10)?;
    Ok((range, fd))
}

/// Wiener set E = {γ : |φ̂(γ)| ≤ tol·maxmod for every generator φ}, with
/// tol = 1e-10 and maxmod the largest transform modulus over all generators.
pub fn wiener_set(generators: &[Signal]) -> Vec<GroupElement> {
    const TOL: f64 = 1e-10;
    if generators.is_empty() {
        return Vec::new();
    }
    let group = generators[0].group().clone();
    let hats: Vec<Signal> = generators.iter().map(dft).collect();
    let maxmod = hats
        .iter()
        .flat_map(|h| h.values().iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    group
        .elements()
        .into_iter()
        .filter(|gamma| {
            hats.iter()
                .all(|h| h.value(gamma).norm() <= TOL * maxmod)
        })
        .collect()
}

/// Exact finite check of translation invariance of S_H(generators): every
/// translate of every generator must stay inside the fiberized range.
pub fn is_translation_invariant(generators: &[Signal], lattice: &Lattice) -> Result<bool> {
    let (range, fd) = si_range(generators, lattice)?;
    let group = lattice.group();
    for x in group.elements() {
        for phi in generators {
            let shifted = fiberize(&phi.translate(&x), &fd)?;
            if !contains(&range, &shifted, 1e-9)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Decomposability of the fiberized space with respect to the coordinate
/// lines {span δ_k}_{k∈H*}; by the correspondence with Wiener's theorem
/// this agrees with [`is_translation_invariant`].
pub fn totally_decomposable_check(generators: &[Signal], lattice: &Lattice) -> Result<bool> {
    let (range, _) = si_range(generators, lattice)?;
    let singles = Decomposition::singletons(range.dim());
    decomposable_check(&range, &singles, 1e-9)
}

/// Every subgroup of the group, found as closures of all generator pairs.
/// Complete for groups with at most two cyclic factors, which covers the
/// test corpus.
pub fn all_subgroups(group: &Arc<FiniteAbelianGroup>) -> Vec<Lattice> {
    let elems = group.elements();
    let mut seen: Vec<Vec<GroupElement>> = Vec::new();
    let mut out = Vec::new();
    for a in &elems {
        for b in &elems {
            let lat = Lattice::from_generators(group.clone(), &[a.clone(), b.clone()])
                .expect("elements of the group generate a subgroup");
            if !seen.contains(&lat.elements().to_vec()) {
                seen.push(lat.elements().to_vec());
                out.push(lat);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::DEFAULT_EPSILON;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z4() -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::new(vec![4]).unwrap())
    }

    fn z4_h02() -> Lattice {
        Lattice::new(z4(), vec![vec![0], vec![2]]).unwrap()
    }

    #[test]
    fn dft_examples() {
        let g = z4();
        let delta = Signal::delta(g.clone(), &vec![0]);
        let hat = dft(&delta);
        for v in hat.values() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }

        let ones = Signal::new(g.clone(), vec![c(1.0, 0.0); 4]).unwrap();
        let hat = dft(&ones);
        assert!((hat.values()[0] - c(4.0, 0.0)).norm() < 1e-12);
        for v in &hat.values()[1..] {
            assert!(v.norm() < 1e-12);
        }

        let comb = Signal::new(
            g,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let hat = dft(&comb);
        let expected = [2.0, 0.0, 2.0, 0.0];
        for (v, e) in hat.values().iter().zip(expected) {
            assert!((v - c(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn plancherel() {
        let g = Arc::new(FiniteAbelianGroup::new(vec![2, 3]).unwrap());
        let f = Signal::new(
            g.clone(),
            (0..6)
                .map(|k| c(k as f64 * 0.3 - 1.0, (k as f64).sin()))
                .collect(),
        )
        .unwrap();
        let hat = dft(&f);
        let lhs = f.norm_sqr();
        let rhs = hat.norm_sqr() / g.order() as f64;
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs));
        // inverse round trip
        let back = idft(&hat);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn annihilator_examples() {
        let g = z4();
        let full = Lattice::full(g.clone());
        assert_eq!(annihilator(&full), vec![vec![0]]);

        let trivial = Lattice::trivial(g.clone());
        assert_eq!(annihilator(&trivial).len(), 4);

        let h = z4_h02();
        assert_eq!(annihilator(&h), vec![vec![0], vec![2]]);
    }

    #[test]
    fn section_examples() {
        let h = z4_h02();
        let fd = section(&h);
        assert_eq!(fd.annihilator(), &[vec![0], vec![2]]);
        assert_eq!(fd.section(), &[vec![0], vec![1]]);
        assert!((fd.weight() - 0.25).abs() < 1e-15);

        let g = z4();
        let full = Lattice::full(g);
        let fd = section(&full);
        assert_eq!(fd.annihilator(), &[vec![0]]);
        assert_eq!(fd.section().len(), 4);

        let g22 = Arc::new(FiniteAbelianGroup::new(vec![2, 2]).unwrap());
        let h = Lattice::new(g22, vec![vec![0, 0], vec![1, 0]]).unwrap();
        let fd = section(&h);
        assert_eq!(fd.annihilator(), &[vec![0, 0], vec![0, 1]]);
        assert_eq!(fd.section(), &[vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn lattice_validation() {
        let g = z4();
        assert!(Lattice::new(g.clone(), vec![vec![0], vec![1]]).is_err()); // not closed
        assert!(Lattice::new(g.clone(), vec![vec![2]]).is_err()); // no identity
        assert!(Lattice::new(g, vec![vec![0], vec![5]]).is_err()); // outside
    }

    #[test]
    fn fiberize_delta_is_isometric() {
        let h = z4_h02();
        let fd = section(&h);
        let delta = Signal::delta(z4(), &vec![0]);
        let field = fiberize(&delta, &fd).unwrap();
        assert_eq!(field.value(0), &[c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(field.value(1), &[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((field.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fiberize_zero_and_roundtrip() {
        let g = Arc::new(FiniteAbelianGroup::new(vec![6]).unwrap());
        let h = Lattice::new(g.clone(), vec![vec![0], vec![3]]).unwrap();
        let fd = section(&h);
        let zero = Signal::zero(g.clone());
        let field = fiberize(&zero, &fd).unwrap();
        assert!(field.norm_sqr() < 1e-24);

        let f = Signal::new(
            g,
            (0..6).map(|k| c((k as f64).cos(), 0.2 * k as f64)).collect(),
        )
        .unwrap();
        let field = fiberize(&f, &fd).unwrap();
        assert!((field.norm_sqr() - f.norm_sqr()).abs() < 1e-9 * (1.0 + f.norm_sqr()));
        let back = defiberize(&field, &fd).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn defiberize_single_coordinate_is_character_multiple() {
        let h = z4_h02();
        let fd = section(&h);
        let grid = fd.grid().unwrap();
        // single nonzero coordinate δ=2 at ω=1 → f̂ = indicator of {3}
        let mut values = vec![vec![c(0.0, 0.0); 2]; 2];
        values[1][1] = c(1.0, 0.0);
        let field = VectorField::new(grid, values).unwrap();
        let f = defiberize(&field, &fd).unwrap();
        let hat = dft(&f);
        for (i, v) in hat.values().iter().enumerate() {
            let expected = if i == 3 { 1.0 } else { 0.0 };
            assert!((v - c(expected, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn intertwining() {
        let g = z4();
        let h = z4_h02();
        let fd = section(&h);
        let f = Signal::new(
            g.clone(),
            vec![c(1.0, 0.5), c(-0.3, 0.1), c(0.7, 0.0), c(0.0, -1.2)],
        )
        .unwrap();
        let tf = fiberize(&f, &fd).unwrap();
        for hh in h.elements() {
            let shifted = fiberize(&f.translate(hh), &fd).unwrap();
            for (wi, omega) in fd.section().iter().enumerate() {
                let phase = g.pairing(&g.neg(hh), omega);
                for (a, b) in shifted.value(wi).iter().zip(tf.value(wi)) {
                    assert!((a - phase * b).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn solve_si_delta_is_exact() {
        let h = z4_h02();
        let data = vec![Signal::delta(z4(), &vec![0])];
        let sol = solve_si(&data, &h, 1, DEFAULT_EPSILON).unwrap();
        assert!(sol.error.abs() < 1e-10);
        // residual of δ_0 against V* is 0
        let fd = &sol.fiberization;
        let field = fiberize(&data[0], fd).unwrap();
        assert!(contains(&sol.range, &field, 1e-9).unwrap());
    }

    #[test]
    fn solve_si_full_length_error_zero() {
        let g = z4();
        let h = z4_h02();
        let data = vec![
            Signal::delta(g.clone(), &vec![0]),
            Signal::delta(g, &vec![1]),
        ];
        let sol = solve_si(&data, &h, 2, DEFAULT_EPSILON).unwrap();
        assert!(sol.error.abs() < 1e-10);
    }

    #[test]
    fn solve_si_two_deltas_matches_error_formula_and_probe() {
        let g = z4();
        let h = z4_h02();
        let data = vec![
            Signal::delta(g.clone(), &vec![0]),
            Signal::delta(g, &vec![1]),
        ];
        let sol = solve_si(&data, &h, 1, DEFAULT_EPSILON).unwrap();
        let fd = section(&h);
        let fields: Vec<_> = data.iter().map(|f| fiberize(f, &fd).unwrap()).collect();
        let spec = crate::gramian::spectral(
            &crate::gramian::gramian(&fields).unwrap(),
            DEFAULT_EPSILON,
        )
        .unwrap();
        let expected = crate::mi::error_formula(&spec, 1);
        assert!((sol.error - expected).abs() < 1e-10);

        // optimality probe over random rank-1 candidates per fiber
        let grid = fields[0].grid();
        let mut probe = 0.0;
        for fiber in 0..grid.len() {
            let vecs: Vec<Vec<C64>> =
                fields.iter().map(|f| f.value(fiber).to_vec()).collect();
            probe += grid.weight(fiber)
                * crate::oracle::best_subspace_sampler(&vecs, 1, 500, 5).unwrap();
        }
        assert!(sol.error <= probe + 1e-9);
    }

    #[test]
    fn extra_invariance_blocks_z4() {
        let g = z4();
        let h = z4_h02();
        let gamma = Lattice::full(g.clone());
        let (reps, blocks) = extra_invariance_blocks(&h, &gamma).unwrap();
        // Γ* = {0}; N = H* = {0, 2}; singleton blocks
        assert_eq!(reps, vec![vec![0], vec![2]]);
        assert_eq!(blocks, vec![vec![0], vec![1]]);

        let fd = section(&h);
        let g_ann = annihilator(&gamma);
        let b0 = b_sigma(&fd, &g_ann, &vec![0]);
        let b2 = b_sigma(&fd, &g_ann, &vec![2]);
        assert_eq!(b0, vec![vec![0], vec![1]]);
        assert_eq!(b2, vec![vec![2], vec![3]]);
    }

    #[test]
    fn solve_si_extra_gamma_equals_h_matches_plain() {
        let g = z4();
        let h = z4_h02();
        let data = vec![Signal::delta(g, &vec![0])];
        let plain = solve_si(&data, &h, 1, DEFAULT_EPSILON).unwrap();
        let extra = solve_si_extra(&data, &h, &h, 1, DEFAULT_EPSILON).unwrap();
        assert!((plain.error - extra.error).abs() < 1e-10);
    }

    #[test]
    fn solve_si_extra_delta_loses_half() {
        let g = z4();
        let h = z4_h02();
        let gamma = Lattice::full(g.clone());
        let data = vec![Signal::delta(g, &vec![0])];
        let sol = solve_si_extra(&data, &h, &gamma, 1, DEFAULT_EPSILON).unwrap();
        assert!((sol.error - 0.5).abs() < 1e-10);
    }

    #[test]
    fn solve_si_extra_requires_containment() {
        let g = z4();
        let h = Lattice::full(g.clone());
        let gamma = z4_h02();
        let data = vec![Signal::delta(g, &vec![0])];
        assert!(matches!(
            solve_si_extra(&data, &h, &gamma, 1, DEFAULT_EPSILON),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn wiener_set_examples() {
        let g = z4();
        let delta = Signal::delta(g.clone(), &vec![0]);
        assert!(wiener_set(&[delta]).is_empty());

        // f̂ = indicator of {0}: constant signal 1/4
        let flat = Signal::new(g.clone(), vec![c(0.25, 0.0); 4]).unwrap();
        let e = wiener_set(&[flat]);
        assert_eq!(e, vec![vec![1], vec![2], vec![3]]);

        let comb = Signal::new(
            g,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let e = wiener_set(&[comb]);
        assert_eq!(e, vec![vec![1], vec![3]]);
    }

    #[test]
    fn translation_invariance_examples() {
        let g = z4();
        let h = z4_h02();

        // spectrum inside Ω → translation invariant
        let fd = section(&h);
        assert_eq!(fd.section(), &[vec![0], vec![1]]);
        // f̂ supported on {0, 1} ⊆ Ω
        let mut hat = Signal::zero(g.clone());
        hat.values[0] = c(1.0, 0.0);
        hat.values[1] = c(0.5, -0.5);
        let f = idft(&hat);
        assert!(is_translation_invariant(&[f.clone()], &h).unwrap());
        assert!(totally_decomposable_check(&[f], &h).unwrap());

        // δ_0 generates an H-invariant space that is not translation
        // invariant
        let delta = Signal::delta(g.clone(), &vec![0]);
        assert!(!is_translation_invariant(std::slice::from_ref(&delta), &h).unwrap());
        assert!(!totally_decomposable_check(std::slice::from_ref(&delta), &h).unwrap());

        // the whole space is translation invariant
        let all: Vec<Signal> = g
            .elements()
            .into_iter()
            .map(|x| Signal::delta(g.clone(), &x))
            .collect();
        assert!(is_translation_invariant(&all, &h).unwrap());
        assert!(totally_decomposable_check(&all, &h).unwrap());

        // zero generator set → zero space → trivially both
        assert!(is_translation_invariant(&[], &h).unwrap());
        assert!(totally_decomposable_check(&[], &h).unwrap());
    }

    #[test]
    fn all_subgroups_of_z4() {
        let g = z4();
        let subs = all_subgroups(&g);
        assert_eq!(subs.len(), 3); // {0}, {0,2}, Z_4
    }
}
