//! Canonical data model for local representations: finite multisets of
//! atoms [N]_* (psi-character of h, tensor a tame character, tensor a
//! unipotent block).
//!
//! Tame characters are rationals modulo 1 with denominator prime to p; the
//! psi-argument of an atom is kept in a canonical form (positive degrees
//! only, no exponent divisible by p, coefficients at their minimal field
//! level, and minimal in its orbit under t -> zeta_N t), so representation
//! equality is multiset equality of atoms.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{gcd_u64, lcm_usize, FieldTower, FqElement};

/// A tame character as a rational modulo 1 (the u/v of a Kummer twist).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TameChar(Ratio<i64>);

impl TameChar {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Parse("tame character with zero denominator".into()));
        }
        let r = Ratio::new(numer, denom);
        Ok(TameChar(r - r.floor()))
    }

    pub fn zero() -> Self {
        TameChar(Ratio::new(0, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.0.numer() == &0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn add(&self, other: &TameChar) -> TameChar {
        let r = self.0 + other.0;
        TameChar(r - r.floor())
    }

    pub fn scale(&self, k: i64) -> TameChar {
        let r = self.0 * Ratio::new(k, 1);
        TameChar(r - r.floor())
    }

    /// The inverse character (conjugate): -chi mod 1.
    pub fn conjugate(&self) -> TameChar {
        let r = -self.0;
        TameChar(r - r.floor())
    }

    /// k-th power of the order-two character: k/2 mod 1.
    pub fn half_times(k: i64) -> TameChar {
        let r = Ratio::new(k, 2);
        TameChar(r - r.floor())
    }

    pub fn check_denominator_prime_to(&self, p: u64) -> Result<()> {
        if (*self.0.denom() as u64) % p == 0 {
            return Err(Error::HypothesisViolation(format!(
                "tame character denominator {} is divisible by p = {}",
                self.0.denom(),
                p
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TameChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for TameChar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("tame character `{}` is not of the form u/v", s)))?;
        let n: i64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{}`", s)))?;
        let d: i64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{}`", s)))?;
        TameChar::new(n, d)
    }
}

/// Canonical argument of a wild character: a polynomial in t with positive
/// degrees only and no exponent divisible by p, coefficients compressed to
/// their minimal level. Terms are kept in decreasing degree order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PsiArg {
    terms: Vec<(i64, FqElement)>,
}

impl PsiArg {
    pub fn zero() -> Self {
        PsiArg { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.terms.first().map(|&(e, _)| e).unwrap_or(0)
    }

    pub fn terms(&self) -> &[(i64, FqElement)] {
        &self.terms
    }

    /// Canonical reduction of an arbitrary t-polynomial: drop degrees <= 0,
    /// then repeatedly replace a*t^(p*m) by pth_root(a)*t^m. Idempotent, and
    /// degree-preserving whenever the top exponent is prime to p.
    pub fn from_raw_terms(raw: Vec<(i64, FqElement)>, tower: &FieldTower) -> PsiArg {
        let p = tower.p() as i64;
        fn push(tower: &FieldTower, e: i64, v: FqElement, work: &mut Vec<(i64, FqElement)>) {
            if let Some(slot) = work.iter_mut().find(|(we, _)| *we == e) {
                slot.1 = tower.add(&slot.1, &v);
            } else {
                work.push((e, v));
            }
        }
        let mut work: Vec<(i64, FqElement)> = Vec::new();
        for (e, v) in raw {
            if e >= 1 && !v.is_zero() {
                push(tower, e, v, &mut work);
            }
        }
        loop {
            work.retain(|(_, v)| !v.is_zero());
            match work.iter().position(|&(e, _)| e % p == 0) {
                None => break,
                Some(i) => {
                    let (e, v) = work.remove(i);
                    push(tower, e / p, tower.pth_root(&v), &mut work);
                }
            }
        }
        let mut terms: Vec<(i64, FqElement)> =
            work.into_iter().map(|(e, v)| (e, tower.compress(&v))).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        PsiArg { terms }
    }

    /// The substitution t -> zeta * t (coefficient at t^e picks up zeta^e).
    pub fn twist(&self, zeta: &FqElement, tower: &FieldTower) -> PsiArg {
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| {
                let factor = tower.pow(zeta, *e as u64);
                (*e, tower.compress(&tower.mul(v, &factor)))
            })
            .collect();
        PsiArg { terms }
    }
}

impl fmt::Display for PsiArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*t^{}", v, e)?;
        }
        Ok(())
    }
}

/// One indecomposable summand [N]_* (psi(h) tensor tame tensor U_n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub push_index: u64,
    pub psi: PsiArg,
    pub tame: TameChar,
    pub unip: u64,
}

impl Atom {
    pub fn rank(&self) -> u64 {
        self.push_index * self.unip
    }

    pub fn slope(&self) -> Ratio<i64> {
        if self.psi.is_zero() {
            Ratio::new(0, 1)
        } else {
            Ratio::new(self.psi.degree(), self.push_index as i64)
        }
    }

    /// Swan conductor contribution: rank * slope = unip * deg(psi).
    pub fn swan(&self) -> i64 {
        self.unip as i64 * self.psi.degree()
    }

    fn sort_key(&self) -> (Ratio<i64>, u64, TameChar, u64, Vec<(i64, FqElement)>) {
        (-self.slope(), self.push_index, self.tame, self.unip, self.psi.terms.clone())
    }
}

/// Canonical atom: the psi-argument is replaced by the smallest member of
/// its orbit under t -> zeta_N^j t, which makes the stored description
/// independent of the stalk it was computed from. Grows the tower to reach
/// zeta_N if needed.
pub fn canonical_atom(
    tower: &mut FieldTower,
    push_index: u64,
    psi: PsiArg,
    tame: TameChar,
    unip: u64,
) -> Result<Atom> {
    if push_index == 0 {
        return Err(Error::Unsupported("push-forward index 0".into()));
    }
    if gcd_u64(push_index, tower.p()) != 1 {
        return Err(Error::HypothesisViolation(format!(
            "push-forward index N = {} is divisible by p = {}",
            push_index,
            tower.p()
        )));
    }
    if push_index == 1 || psi.is_zero() {
        return Ok(Atom { push_index, psi, tame, unip });
    }
    let mu = tower.roots_of_unity(push_index)?;
    let zeta_level = mu.iter().map(|z| z.level()).max().unwrap();
    for (_, v) in psi.terms() {
        let l = lcm_usize(zeta_level, v.level());
        tower.ensure_level(l)?;
    }
    let mut best: Option<PsiArg> = None;
    for zeta_j in &mu {
        let cand = psi.twist(zeta_j, tower);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    Ok(Atom { push_index, psi: best.unwrap(), tame, unip })
}

/// Full restriction of an induced atom to the index-N subgroup: the N
/// conjugate stalks psi(h(zeta^j t)) tensor tame tensor U_n, each with
/// push-forward index 1.
pub fn restrict_pushforward(tower: &mut FieldTower, atom: &Atom, m: u64) -> Result<Vec<Atom>> {
    if m != atom.push_index {
        return Err(Error::Unsupported(format!(
            "only full restriction is supported (asked {}, atom has N = {})",
            m, atom.push_index
        )));
    }
    if atom.push_index == 1 {
        return Ok(vec![atom.clone()]);
    }
    let mu = tower.roots_of_unity(atom.push_index)?;
    let zeta_level = mu.iter().map(|z| z.level()).max().unwrap();
    for (_, v) in atom.psi.terms() {
        let l = lcm_usize(zeta_level, v.level());
        tower.ensure_level(l)?;
    }
    let mut out = Vec::with_capacity(mu.len());
    for zeta_j in &mu {
        let psi = atom.psi.twist(zeta_j, tower);
        out.push(Atom { push_index: 1, psi, tame: atom.tame, unip: atom.unip });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    Zero,
    Inf,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Zero => write!(f, "0"),
            Point::Inf => write!(f, "inf"),
        }
    }
}

/// A finite multiset of atoms at 0 or at infinity, kept sorted by
/// (slope descending, N, tame, unip, psi).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRep {
    pub point: Point,
    atoms: Vec<Atom>,
}

impl LocalRep {
    pub fn new(point: Point, mut atoms: Vec<Atom>) -> Self {
        atoms.sort_unstable_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        LocalRep { point, atoms }
    }

    pub fn empty(point: Point) -> Self {
        LocalRep { point, atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn rank(&self) -> u64 {
        self.atoms.iter().map(|a| a.rank()).sum()
    }

    pub fn swan(&self) -> i64 {
        self.atoms.iter().map(|a| a.swan()).sum()
    }

    /// Slope of every atom, in the sort order (descending).
    pub fn slopes(&self) -> Vec<Ratio<i64>> {
        self.atoms.iter().map(|a| a.slope()).collect()
    }
}

/// Rank, Swan conductor and slope multiset of a representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepInvariants {
    pub rank: u64,
    pub swan: i64,
    pub slopes: Vec<Ratio<i64>>,
}

pub fn invariants(rep: &LocalRep) -> RepInvariants {
    RepInvariants { rank: rep.rank(), swan: rep.swan(), slopes: rep.slopes() }
}

/// Input datum (a, f, chi, n) standing for
/// [a]_* (psi-character of f, tensor chi, tensor U_n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputRep {
    pub push_index: u64,
    /// The polynomial f, exponent-descending, leading coefficient nonzero.
    pub poly: Vec<(i64, FqElement)>,
    pub tame: TameChar,
    pub unip: u64,
}

impl InputRep {
    pub fn new(
        tower: &FieldTower,
        push_index: u64,
        raw_poly: Vec<(i64, FqElement)>,
        tame: TameChar,
        unip: u64,
    ) -> Result<Self> {
        let p = tower.p();
        if push_index == 0 || push_index % p == 0 {
            return Err(Error::HypothesisViolation(format!(
                "push-forward index a = {} must be positive and prime to p = {}",
                push_index, p
            )));
        }
        if unip == 0 {
            return Err(Error::HypothesisViolation("unipotent size n must be >= 1".into()));
        }
        tame.check_denominator_prime_to(p)?;
        let mut poly: Vec<(i64, FqElement)> = Vec::new();
        for (e, v) in raw_poly {
            if e < 0 {
                return Err(Error::Parse(format!("input polynomial has negative exponent {}", e)));
            }
            if v.is_zero() {
                continue;
            }
            if poly.iter().any(|(pe, _)| *pe == e) {
                return Err(Error::Parse(format!("duplicate exponent {} in input polynomial", e)));
            }
            poly.push((e, v));
        }
        poly.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let degree = poly.first().map(|&(e, _)| e).unwrap_or(0);
        if degree < 1 {
            return Err(Error::HypothesisViolation(
                "input polynomial must have degree >= 1 (degree mismatch)".into(),
            ));
        }
        if (degree as u64) % p == 0 {
            return Err(Error::HypothesisViolation(format!(
                "deg f = {} is divisible by p = {}",
                degree, p
            )));
        }
        Ok(InputRep { push_index, poly, tame, unip })
    }

    pub fn degree(&self) -> i64 {
        self.poly.first().map(|&(e, _)| e).unwrap_or(0)
    }

    pub fn leading_coeff(&self) -> &FqElement {
        &self.poly.first().expect("validated input polynomial is nonempty").1
    }

    /// Largest field level among the coefficients.
    pub fn coeff_level(&self) -> usize {
        self.poly.iter().map(|(_, v)| v.level()).max().unwrap_or(1)
    }
}

/// Jordan block sizes of the tensor product U_n (x) U_m in characteristic
/// zero: [n+m-1, n+m-3, ..., |n-m|+1].
pub fn jordan_tensor(n: u64, m: u64) -> Vec<u64> {
    assert!(n >= 1 && m >= 1);
    let hi = n + m - 1;
    let lo = n.abs_diff(m) + 1;
    let mut out = Vec::with_capacity(n.min(m) as usize);
    let mut k = hi;
    loop {
        out.push(k);
        if k < lo + 2 {
            break;
        }
        k -= 2;
    }
    out
}
