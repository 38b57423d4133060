//! Exact arithmetic in F_p and its finite extensions.
//!
//! The tower is the computable stand-in for an algebraic closure of F_p.
//! Each level r holds the lexicographically smallest monic irreducible
//! modulus of degree r over F_p together with embedding data into every
//! present level it divides. Extension degrees are discovered on demand
//! (root extraction grows the tower) and growth is append-only: once a
//! level exists, all element operations are pure reads.
//!
//! Canonical element order: lower minimal level first, then coefficient
//! vectors compared from the highest power-basis coordinate down, residues
//! ordered 0 < 1 < ... < p-1. Root lists and orbit representatives are
//! deterministic consequences of this order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest extension degree the tower will build. Growth beyond this is a
/// sign the requested computation is out of desk scale.
pub const MAX_LEVEL: usize = 128;

/// An element of F_{p^r}, stored as coordinates in the power basis of the
/// level-r modulus, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqElement {
    level: usize,
    coeffs: Vec<u64>,
}

impl FqElement {
    /// A zero at the given level; valid in any tower over any p.
    pub fn zero_at(level: usize) -> FqElement {
        FqElement { level, coeffs: vec![0; level] }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Serialized form `[c_0,c_1,...,c_{r-1}]@r`.
    pub fn literal(&self) -> String {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("[{}]@{}", body.join(","), self.level)
    }

    /// Compare coefficient vectors from the highest coordinate down.
    /// Canonical for elements stored at the same level.
    fn cmp_same_level(&self, other: &FqElement) -> std::cmp::Ordering {
        debug_assert_eq!(self.level, other.level);
        for i in (0..self.coeffs.len()).rev() {
            match self.coeffs[i].cmp(&other.coeffs[i]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal())
    }
}

/// Structural order: level first, then coefficients from the top coordinate
/// down. Agrees with the canonical element order when both sides are stored
/// at their minimal level (see [`FieldTower::compress`]).
impl Ord for FqElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.cmp_same_level(other))
    }
}

impl PartialOrd for FqElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Level {
    /// Monic irreducible modulus over F_p, constant term first, length r+1.
    modulus: Vec<u64>,
    /// Image of the generator of each proper divisor level under the chosen
    /// embedding into this level.
    embed_gen: BTreeMap<usize, FqElement>,
}

pub struct FieldTower {
    p: u64,
    levels: BTreeMap<usize, Level>,
}

fn trial_division_is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn divisors(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm_usize(a: usize, b: usize) -> usize {
    num_integer::lcm(a, b)
}

/// Multiplicative order of p modulo n (requires gcd(p, n) = 1).
pub fn ord_mod(p: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let p = p % n;
    let mut acc = 1u64;
    for k in 1..=n {
        acc = acc * p % n;
        if acc == 1 {
            return k;
        }
    }
    unreachable!("p must be invertible mod n")
}

// ---------------------------------------------------------------------------
// dense polynomial arithmetic over F_p (u64 coefficient vectors, constant
// term first), used for modulus generation and reduction
// ---------------------------------------------------------------------------

mod fp_poly {
    fn trim(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai * bj) % p;
            }
        }
        trim(&mut out);
        out
    }

    /// Remainder of a by the monic polynomial m.
    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        debug_assert_eq!(m[dm], 1);
        while r.len() > dm {
            let lead = *r.last().unwrap();
            if lead != 0 {
                let shift = r.len() - 1 - dm;
                for (i, &mi) in m.iter().enumerate() {
                    let idx = i + shift;
                    r[idx] = (r[idx] + p - lead * mi % p) % p;
                }
            }
            r.pop();
            trim(&mut r);
        }
        if r.is_empty() {
            r.push(0);
        }
        r
    }

    pub fn powmod(base: &[u64], mut exp: u128, m: &[u64], p: u64) -> Vec<u64> {
        let mut result = vec![1u64];
        let mut b = rem(base, m, p);
        while exp > 0 {
            if exp & 1 == 1 {
                result = rem(&mul(&result, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            exp >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !(y.len() == 1 && y[0] == 0) {
            let inv_lead = super::inv_mod_p(*y.last().unwrap(), p);
            let monic: Vec<u64> = y.iter().map(|&c| c * inv_lead % p).collect();
            let r = rem(&x, &monic, p);
            x = monic;
            y = r;
        }
        x
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out = vec![0u64; n];
        for i in 0..n {
            let ai = a.get(i).copied().unwrap_or(0);
            let bi = b.get(i).copied().unwrap_or(0);
            out[i] = (ai + p - bi) % p;
        }
        trim(&mut out);
        out
    }
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    // p is a small prime, plain extended Euclid
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod p");
    (t.rem_euclid(p as i128)) as u64
}

/// Deterministic, memoized choice of modulus: the lexicographically smallest
/// monic irreducible polynomial of degree r over F_p. Coefficient tuples
/// (c_{r-1}, ..., c_1, c_0) are enumerated in increasing lexicographic
/// order, so the constant term varies fastest.
pub fn find_irreducible(p: u64, r: usize) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<BTreeMap<(u64, usize), Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(p, r)) {
        return hit.clone();
    }

    let mut k: u64 = 0;
    let found = loop {
        let mut cand = vec![0u64; r + 1];
        let mut kk = k;
        for c in cand.iter_mut().take(r) {
            *c = kk % p;
            kk /= p;
        }
        assert!(kk == 0, "no irreducible found within enumeration bound");
        cand[r] = 1;
        if is_irreducible(&cand, p) {
            break cand;
        }
        k = k.checked_add(1).expect("modulus search overflow");
    };
    cache.lock().unwrap().insert((p, r), found.clone());
    found
}

pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = f.len() - 1;
    if r == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // x^(p^r) == x mod f
    let mut xp = x.clone();
    for _ in 0..r {
        xp = fp_poly::powmod(&xp, p as u128, f, p);
    }
    if fp_poly::sub(&xp, &x, p) != vec![0u64] {
        return false;
    }
    // gcd(x^(p^(r/q)) - x, f) == 1 for every prime q | r
    for (q, _) in factorize(r as u64) {
        let e = r / q as usize;
        let mut xq = x.clone();
        for _ in 0..e {
            xq = fp_poly::powmod(&xq, p as u128, f, p);
        }
        let g = fp_poly::gcd(&fp_poly::sub(&xq, &x, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl FieldTower {
    /// A tower over the odd prime p, with the prime field installed.
    pub fn new(p: u64) -> Result<Self> {
        if p == 2 {
            return Err(Error::HypothesisViolation(
                "p = 2: the characteristic must be an odd prime".into(),
            ));
        }
        if !trial_division_is_prime(p) {
            return Err(Error::HypothesisViolation(format!("p = {} is not prime", p)));
        }
        let mut tower = FieldTower { p, levels: BTreeMap::new() };
        tower.levels.insert(
            1,
            Level { modulus: find_irreducible(p, 1), embed_gen: BTreeMap::new() },
        );
        Ok(tower)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn levels(&self) -> impl Iterator<Item = usize> + '_ {
        self.levels.keys().copied()
    }

    pub fn has_level(&self, r: usize) -> bool {
        self.levels.contains_key(&r)
    }

    pub fn modulus(&self, r: usize) -> &[u64] {
        &self.levels[&r].modulus
    }

    pub fn zero(&self, level: usize) -> FqElement {
        FqElement { level, coeffs: vec![0; level] }
    }

    pub fn one(&self, level: usize) -> FqElement {
        let mut coeffs = vec![0; level];
        coeffs[0] = 1;
        FqElement { level, coeffs }
    }

    /// The residue c as a level-1 element.
    pub fn scalar(&self, c: i64) -> FqElement {
        let p = self.p as i64;
        FqElement { level: 1, coeffs: vec![c.rem_euclid(p) as u64] }
    }

    pub fn from_coeffs(&self, level: usize, coeffs: Vec<u64>) -> Result<FqElement> {
        if !self.has_level(level) {
            return Err(Error::Unsupported(format!("level {} not present in tower", level)));
        }
        if coeffs.len() != level {
            return Err(Error::Parse(format!(
                "element has {} coefficients, level {} needs exactly {}",
                coeffs.len(),
                level,
                level
            )));
        }
        if coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!("coefficient out of range [0, {})", self.p)));
        }
        Ok(FqElement { level, coeffs })
    }

    /// The class of x at the given level.
    pub fn generator(&self, level: usize) -> FqElement {
        let mut coeffs = vec![0; level];
        if level > 1 {
            coeffs[1] = 1;
        }
        FqElement { level, coeffs }
    }

    // -- basic arithmetic ---------------------------------------------------

    fn lift_pair(&self, a: &FqElement, b: &FqElement) -> (FqElement, FqElement) {
        if a.level == b.level {
            return (a.clone(), b.clone());
        }
        let l = lcm_usize(a.level, b.level);
        (self.embed(a, l), self.embed(b, l))
    }

    pub fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let (mut x, y) = self.lift_pair(a, b);
        for (xi, yi) in x.coeffs.iter_mut().zip(y.coeffs.iter()) {
            *xi = (*xi + *yi) % self.p;
        }
        x
    }

    pub fn sub(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let (mut x, y) = self.lift_pair(a, b);
        for (xi, yi) in x.coeffs.iter_mut().zip(y.coeffs.iter()) {
            *xi = (*xi + self.p - *yi) % self.p;
        }
        x
    }

    pub fn neg(&self, a: &FqElement) -> FqElement {
        let mut x = a.clone();
        for c in x.coeffs.iter_mut() {
            *c = (self.p - *c) % self.p;
        }
        x
    }

    pub fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let (x, y) = self.lift_pair(a, b);
        let level = x.level;
        if level == 1 {
            return FqElement { level: 1, coeffs: vec![x.coeffs[0] * y.coeffs[0] % self.p] };
        }
        let modulus = &self.levels[&level].modulus;
        let mut scratch = vec![0u64; 2 * level - 1];
        for (i, &xi) in x.coeffs.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.coeffs.iter().enumerate() {
                scratch[i + j] = (scratch[i + j] + xi * yj) % self.p;
            }
        }
        // reduce by the monic modulus in place
        for i in (level..scratch.len()).rev() {
            let c = scratch[i];
            if c == 0 {
                continue;
            }
            scratch[i] = 0;
            let shift = i - level;
            for (k, &mk) in modulus.iter().take(level).enumerate() {
                let idx = k + shift;
                scratch[idx] = (scratch[idx] + (self.p - mk % self.p) % self.p * c) % self.p;
            }
        }
        scratch.truncate(level);
        FqElement { level, coeffs: scratch }
    }

    pub fn inv(&self, a: &FqElement) -> Result<FqElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let level = a.level;
        if level == 1 {
            return Ok(FqElement { level: 1, coeffs: vec![inv_mod_p(a.coeffs[0], self.p)] });
        }
        // extended Euclid in F_p[x] against the modulus
        let p = self.p;
        let modulus = self.levels[&level].modulus.clone();
        let mut r0 = modulus;
        let mut r1 = a.coeffs.clone();
        while r1.len() > 1 && *r1.last().unwrap() == 0 {
            r1.pop();
        }
        let mut t0 = vec![0u64];
        let mut t1 = vec![1u64];
        while !(r1.len() == 1 && r1[0] == 0) {
            let inv_lead = inv_mod_p(*r1.last().unwrap(), p);
            let monic: Vec<u64> = r1.iter().map(|&c| c * inv_lead % p).collect();
            // long division r0 = q * monic + rem, tracking t
            let mut rem = r0.clone();
            let mut q = vec![0u64; rem.len().saturating_sub(monic.len()) + 1];
            while rem.len() >= monic.len() && !(rem.len() == 1 && rem[0] == 0) {
                let lead = *rem.last().unwrap();
                if lead == 0 {
                    rem.pop();
                    continue;
                }
                let shift = rem.len() - monic.len();
                q[shift] = (q[shift] + lead) % p;
                for (k, &mk) in monic.iter().enumerate() {
                    rem[k + shift] = (rem[k + shift] + p - mk * lead % p) % p;
                }
                while rem.len() > 1 && *rem.last().unwrap() == 0 {
                    rem.pop();
                }
            }
            // q was computed against monic = r1/lead, so fold the scale into t
            let q_scaled: Vec<u64> = q.iter().map(|&c| c * inv_lead % p).collect();
            let qt1 = fp_poly::mul(&q_scaled, &t1, p);
            let new_t = fp_poly::sub(&t0, &qt1, p);
            r0 = r1;
            r1 = rem;
            t0 = t1;
            t1 = new_t;
        }
        // r0 is now gcd (a unit times 1)
        let scale = inv_mod_p(r0[0], p);
        debug_assert_eq!(r0.len(), 1);
        let mut coeffs: Vec<u64> = t0.iter().map(|&c| c * scale % p).collect();
        coeffs.resize(level, 0);
        let out = FqElement { level, coeffs };
        debug_assert!(self.mul(&out, a) == self.one(level));
        Ok(out)
    }

    pub fn pow(&self, a: &FqElement, mut e: u64) -> FqElement {
        let mut result = self.one(a.level);
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    pub fn pow_big(&self, a: &FqElement, e: &BigUint) -> FqElement {
        if e.is_zero() {
            return self.one(a.level);
        }
        let bits = e.bits();
        let mut result = a.clone();
        for i in (0..bits - 1).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, a);
            }
        }
        result
    }

    pub fn frobenius(&self, a: &FqElement) -> FqElement {
        self.pow(a, self.p)
    }

    /// The unique d with d^p = c, computed as c^(p^(r-1)).
    pub fn pth_root(&self, c: &FqElement) -> FqElement {
        let mut out = c.clone();
        for _ in 0..c.level - 1 {
            out = self.frobenius(&out);
        }
        debug_assert!(self.pow(&out, self.p) == *c);
        out
    }

    // -- embeddings and canonical structure ----------------------------------

    /// Embed x into the given level (x.level must divide it; both present).
    pub fn embed(&self, x: &FqElement, to_level: usize) -> FqElement {
        if x.level == to_level {
            return x.clone();
        }
        assert!(
            to_level % x.level == 0 && self.has_level(to_level),
            "embed: level {} into {} not available",
            x.level,
            to_level
        );
        if x.level == 1 {
            let mut coeffs = vec![0; to_level];
            coeffs[0] = x.coeffs[0];
            return FqElement { level: to_level, coeffs };
        }
        let image = self.levels[&to_level].embed_gen[&x.level].clone();
        self.eval_coeffs_at(&x.coeffs, &image, to_level)
    }

    /// Evaluate sum coeffs[j] * point^j in the given level (Horner).
    fn eval_coeffs_at(&self, coeffs: &[u64], point: &FqElement, level: usize) -> FqElement {
        let mut acc = self.zero(level);
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, point);
            if c != 0 {
                acc = self.add(&acc, &self.constant_at(c, level));
            }
        }
        acc
    }

    fn constant_at(&self, c: u64, level: usize) -> FqElement {
        let mut coeffs = vec![0; level];
        coeffs[0] = c % self.p;
        FqElement { level, coeffs }
    }

    /// Smallest m (dividing the storage level) with x in F_{p^m}.
    pub fn min_level(&self, x: &FqElement) -> usize {
        let r = x.level;
        let mut y = x.clone();
        for m in 1..=r {
            y = self.frobenius(&y);
            if r % m == 0 && y == *x {
                return m;
            }
        }
        unreachable!("frobenius orbit must close at the storage level")
    }

    /// Rewrite x at its minimal level.
    pub fn compress(&self, x: &FqElement) -> FqElement {
        let m = self.min_level(x);
        if m == x.level {
            return x.clone();
        }
        if m == 1 {
            return FqElement { level: 1, coeffs: vec![x.coeffs[0]] };
        }
        let r = x.level;
        // solve for coordinates of x w.r.t. powers of the embedded generator
        let image = self.levels[&r].embed_gen[&m].clone();
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(m);
        let mut pw = self.one(r);
        for _ in 0..m {
            cols.push(pw.coeffs.clone());
            pw = self.mul(&pw, &image);
        }
        let sol = solve_linear(&cols, &x.coeffs, self.p)
            .expect("compression system must be consistent");
        FqElement { level: m, coeffs: sol }
    }

    /// Canonical order: minimal level first, then coefficients at a common
    /// storage level, highest coordinate first.
    pub fn canonical_cmp(&self, a: &FqElement, b: &FqElement) -> std::cmp::Ordering {
        let la = self.min_level(a);
        let lb = self.min_level(b);
        match la.cmp(&lb) {
            std::cmp::Ordering::Equal => {}
            ord => return ord,
        }
        if a.level == b.level {
            return a.cmp_same_level(b);
        }
        let l = lcm_usize(a.level, b.level);
        self.embed(a, l).cmp_same_level(&self.embed(b, l))
    }

    /// Element number k of a level in the deterministic enumeration used for
    /// non-residue searches (constant digit varies fastest).
    fn element_by_index(&self, level: usize, mut k: u64) -> FqElement {
        let mut coeffs = vec![0u64; level];
        for c in coeffs.iter_mut() {
            *c = k % self.p;
            k /= self.p;
            if k == 0 {
                break;
            }
        }
        assert!(k == 0, "enumeration index exceeds field size");
        FqElement { level, coeffs }
    }

    // -- tower growth ---------------------------------------------------------

    /// Make sure the level (and all its divisors, with mutually compatible
    /// embeddings) exists.
    pub fn ensure_level(&mut self, r: usize) -> Result<()> {
        self.ensure_level_inner(r, None)
    }

    /// Install a level with an explicitly given modulus (validated monic
    /// irreducible of the right degree). Conflicts with an already-present
    /// different modulus are errors.
    pub fn ensure_level_with_modulus(&mut self, r: usize, modulus: Vec<u64>) -> Result<()> {
        if modulus.len() != r + 1 || modulus.last() != Some(&1) {
            return Err(Error::Parse(format!(
                "modulus for level {} must be monic of degree {}",
                r, r
            )));
        }
        if modulus.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!(
                "modulus coefficients must lie in [0, {})",
                self.p
            )));
        }
        if !is_irreducible(&modulus, self.p) {
            return Err(Error::Parse(format!(
                "modulus for level {} is not irreducible over F_{}",
                r, self.p
            )));
        }
        self.ensure_level_inner(r, Some(modulus))
    }

    fn ensure_level_inner(&mut self, r: usize, modulus_override: Option<Vec<u64>>) -> Result<()> {
        if r == 0 {
            return Err(Error::Unsupported("level 0 requested".into()));
        }
        if r > MAX_LEVEL {
            return Err(Error::Unsupported(format!(
                "extension degree {} exceeds the supported maximum {}",
                r, MAX_LEVEL
            )));
        }
        if self.has_level(r) {
            if let Some(m) = modulus_override {
                if self.levels[&r].modulus != m {
                    return Err(Error::Parse(format!(
                        "level {} already present with a different modulus",
                        r
                    )));
                }
            }
            return Ok(());
        }
        for m in divisors(r) {
            if m < r && !self.has_level(m) {
                self.ensure_level(m)?;
            }
        }
        let modulus = modulus_override.unwrap_or_else(|| find_irreducible(self.p, r));
        self.levels.insert(r, Level { modulus, embed_gen: BTreeMap::new() });

        // choose embedding images for every proper divisor, largest first;
        // each choice is the canonically smallest root compatible with the
        // restrictions already pinned down by previously chosen embeddings
        let mut proper: Vec<usize> = divisors(r).into_iter().filter(|&m| m < r).collect();
        proper.sort_unstable_by(|a, b| b.cmp(a));
        let mut chosen: Vec<usize> = Vec::new();
        for m in proper {
            if m == 1 {
                let img = self.zero(r);
                self.levels.get_mut(&r).unwrap().embed_gen.insert(1, img);
                chosen.push(1);
                continue;
            }
            let modulus_m = self.levels[&m].modulus.clone();
            let rho = self.root_of_fp_poly(&modulus_m, r)?;
            let mut orbit = Vec::with_capacity(m);
            let mut cur = rho;
            for _ in 0..m {
                orbit.push(cur.clone());
                cur = self.frobenius(&cur);
            }
            orbit.sort_unstable_by(|a, b| a.cmp_same_level(b));
            let mut pick = None;
            'cand: for cand in &orbit {
                for &m2 in &chosen {
                    let g = num_integer::gcd(m, m2);
                    if g == 1 {
                        continue;
                    }
                    // restriction of the candidate embedding to F_{p^g} must
                    // agree with the already-chosen route through m2
                    let g_in_m = if g == m {
                        self.generator(m)
                    } else {
                        self.levels[&m].embed_gen[&g].clone()
                    };
                    let via_cand = self.eval_coeffs_at(&g_in_m.coeffs, cand, r);
                    let g_in_m2 = self.levels[&m2].embed_gen[&g].clone();
                    let via_m2 = self.embed(&g_in_m2, r);
                    if via_cand != via_m2 {
                        continue 'cand;
                    }
                }
                pick = Some(cand.clone());
                break;
            }
            let img = pick.expect("a compatible embedding root always exists");
            self.levels.get_mut(&r).unwrap().embed_gen.insert(m, img);
            chosen.push(m);
        }
        Ok(())
    }

    pub fn ensure_compositum(&mut self, a: usize, b: usize) -> Result<usize> {
        let l = lcm_usize(a, b);
        self.ensure_level(l)?;
        Ok(l)
    }

    /// One root in level r of an irreducible polynomial over F_p whose degree
    /// divides r (equal-degree splitting with deterministic shifts).
    fn root_of_fp_poly(&self, f: &[u64], r: usize) -> Result<FqElement> {
        let deg = f.len() - 1;
        debug_assert!(r % deg == 0);
        let coeffs: Vec<FqElement> = f.iter().map(|&c| self.constant_at(c, r)).collect();
        self.fq_find_root(coeffs, r)
    }

    fn fq_find_root(&self, mut f: Vec<FqElement>, level: usize) -> Result<FqElement> {
        let q1 = BigUint::from(self.p).pow(level as u32) - BigUint::one();
        let half = &q1 / 2u32;
        let mut shift_idx: u64 = 0;
        loop {
            if shift_idx > 1_000_000 {
                return Err(Error::Unsupported(
                    "equal-degree splitting did not converge".into(),
                ));
            }
            fq_trim(&mut f);
            let deg = f.len() - 1;
            if deg == 0 {
                return Err(Error::Unsupported("polynomial has no roots".into()));
            }
            if deg == 1 {
                let inv_lead = self.inv(&f[1])?;
                return Ok(self.neg(&self.mul(&f[0], &inv_lead)));
            }
            // theta = z + shift; split on theta^((q-1)/2) - 1
            let theta = vec![self.element_by_index(level, shift_idx), self.one(level)];
            shift_idx += 1;
            let s = self.fq_powmod(&theta, &half, &f);
            let mut s_minus_1 = s;
            if s_minus_1.is_empty() {
                s_minus_1.push(self.zero(level));
            }
            s_minus_1[0] = self.sub(&s_minus_1[0], &self.one(level));
            let g = self.fq_gcd(&s_minus_1, &f);
            let dg = g.len() - 1;
            if dg > 0 && dg < deg {
                // recurse into the smaller factor
                let other = self.fq_div_exact(&f, &g);
                f = if dg <= other.len() - 1 { g } else { other };
            }
        }
    }

    fn fq_mul_poly(&self, a: &[FqElement], b: &[FqElement]) -> Vec<FqElement> {
        let level = a[0].level;
        let mut out = vec![self.zero(level); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let prod = self.mul(ai, bj);
                out[i + j] = self.add(&out[i + j], &prod);
            }
        }
        fq_trim(&mut out);
        out
    }

    fn fq_rem(&self, a: &[FqElement], m: &[FqElement]) -> Vec<FqElement> {
        let mut r = a.to_vec();
        fq_trim(&mut r);
        let dm = m.len() - 1;
        let inv_lead = self.inv(&m[dm]).expect("divisor with zero leading coefficient");
        while r.len() > dm {
            let lead = r.last().unwrap().clone();
            if !lead.is_zero() {
                let factor = self.mul(&lead, &inv_lead);
                let shift = r.len() - 1 - dm;
                for (k, mk) in m.iter().enumerate() {
                    let sub = self.mul(&factor, mk);
                    r[k + shift] = self.sub(&r[k + shift], &sub);
                }
            }
            r.pop();
            fq_trim(&mut r);
        }
        if r.is_empty() {
            r.push(self.zero(m[0].level));
        }
        r
    }

    fn fq_powmod(&self, base: &[FqElement], exp: &BigUint, m: &[FqElement]) -> Vec<FqElement> {
        let level = base[0].level;
        if exp.is_zero() {
            return vec![self.one(level)];
        }
        let bits = exp.bits();
        let mut acc = self.fq_rem(base, m);
        for i in (0..bits - 1).rev() {
            acc = self.fq_rem(&self.fq_mul_poly(&acc, &acc), m);
            if exp.bit(i) {
                acc = self.fq_rem(&self.fq_mul_poly(&acc, base), m);
            }
        }
        acc
    }

    fn fq_gcd(&self, a: &[FqElement], b: &[FqElement]) -> Vec<FqElement> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        fq_trim(&mut x);
        fq_trim(&mut y);
        while !(y.len() == 1 && y[0].is_zero()) {
            let r = self.fq_rem(&x, &y);
            x = y;
            y = r;
        }
        // normalize monic
        let inv_lead = self.inv(x.last().unwrap()).unwrap();
        for c in x.iter_mut() {
            *c = self.mul(c, &inv_lead);
        }
        x
    }

    fn fq_div_exact(&self, a: &[FqElement], d: &[FqElement]) -> Vec<FqElement> {
        let mut r = a.to_vec();
        fq_trim(&mut r);
        let dd = d.len() - 1;
        let inv_lead = self.inv(&d[dd]).unwrap();
        let mut q = vec![self.zero(a[0].level); r.len() - dd];
        while r.len() > dd {
            let lead = r.last().unwrap().clone();
            let shift = r.len() - 1 - dd;
            if !lead.is_zero() {
                let factor = self.mul(&lead, &inv_lead);
                q[shift] = factor.clone();
                for (k, dk) in d.iter().enumerate() {
                    let sub = self.mul(&factor, dk);
                    r[k + shift] = self.sub(&r[k + shift], &sub);
                }
            }
            r.pop();
            fq_trim(&mut r);
        }
        q
    }

    // -- roots ------------------------------------------------------------------

    /// All n solutions of z^n = c, in the minimal level s containing them:
    /// s is the least multiple of lcm(ord_n(p), min_level(c)) at which c is
    /// an n-th power. The list is alpha_0 * zeta^i for i = 0..n-1 with
    /// alpha_0 the canonically smallest root and zeta the canonically
    /// smallest primitive n-th root of unity.
    pub fn nth_roots(&mut self, c: &FqElement, n: u64) -> Result<Vec<FqElement>> {
        if n == 0 {
            return Err(Error::Unsupported("0th roots".into()));
        }
        if c.is_zero() {
            return Err(Error::Unsupported("nth_roots of zero".into()));
        }
        if n % self.p == 0 {
            return Err(Error::HypothesisViolation(format!(
                "root index n = {} is divisible by p = {}",
                n, self.p
            )));
        }
        let c0 = self.compress(c);
        let m0 = c0.level;
        if n == 1 {
            return Ok(vec![c0]);
        }
        let ord = ord_mod(self.p, n);
        let s0 = lcm_usize(ord as usize, m0);
        let m0_order = self.element_order(&c0)?;

        let mut s = 0usize;
        for j in 1..=(2 * n as usize) {
            let cand = s0 * j;
            if cand > MAX_LEVEL {
                return Err(Error::Unsupported(format!(
                    "splitting field degree for z^{} = c exceeds the supported maximum {}",
                    n, MAX_LEVEL
                )));
            }
            // c is an n-th power in F_{p^cand} iff ord(c) divides (p^cand - 1)/n
            let pc = BigUint::from(self.p).pow(cand as u32) - BigUint::one();
            debug_assert!((&pc % n).is_zero());
            let quot = &pc / n;
            if (quot % m0_order).is_zero() {
                s = cand;
                break;
            }
        }
        if s == 0 {
            return Err(Error::Unsupported(format!(
                "no splitting level found for z^{} = {}",
                n,
                c0.literal()
            )));
        }
        self.ensure_level(s)?;
        let ce = self.embed(&c0, s);
        let q1 = BigUint::from(self.p).pow(s as u32) - BigUint::one();

        // one root, prime factor by prime factor
        let mut root = ce.clone();
        for (ell, mult) in factorize(n) {
            for _ in 0..mult {
                root = self.ell_th_root(&root, ell, &q1)?;
            }
        }
        debug_assert!(self.pow(&root, n) == ce);

        // the full mu_n, generated by the canonically smallest primitive root
        let zeta = self.primitive_nth_root_in_level(n, s, &q1)?;
        let mut all: Vec<FqElement> = Vec::with_capacity(n as usize);
        let mut zi = self.one(s);
        for _ in 0..n {
            all.push(self.mul(&root, &zi));
            zi = self.mul(&zi, &zeta);
        }
        let alpha0 = all
            .iter()
            .min_by(|a, b| self.canonical_cmp(a, b))
            .unwrap()
            .clone();
        let mut zeta_min = zeta.clone();
        let mut zj = self.one(s);
        for j in 0..n {
            if j > 0 && gcd_u64(j, n) == 1 && self.canonical_cmp(&zj, &zeta_min) == std::cmp::Ordering::Less {
                zeta_min = zj.clone();
            }
            zj = self.mul(&zj, &zeta);
        }
        let mut out = Vec::with_capacity(n as usize);
        let mut acc = alpha0;
        for _ in 0..n {
            out.push(acc.clone());
            acc = self.mul(&acc, &zeta_min);
        }
        Ok(out)
    }

    /// mu_n as an ordered list [1, zeta, zeta^2, ...] with zeta the smallest
    /// primitive n-th root of unity. Grows the tower to the minimal level.
    pub fn roots_of_unity(&mut self, n: u64) -> Result<Vec<FqElement>> {
        let one = self.one(1);
        self.nth_roots(&one, n)
    }

    fn element_order(&self, x: &FqElement) -> Result<u64> {
        let m = x.level;
        if m > 8 {
            return Err(Error::Unsupported(
                "element order computation limited to base levels at most 8".into(),
            ));
        }
        let q1 = (self.p as u128).pow(m as u32) - 1;
        if q1 > u64::MAX as u128 {
            return Err(Error::Unsupported("base field too large for order computation".into()));
        }
        let q1 = q1 as u64;
        let mut e = q1;
        for (f, _) in factorize(q1) {
            while e % f == 0 && self.pow(x, e / f) == self.one(m) {
                e /= f;
            }
        }
        Ok(e)
    }

    /// An ell-th root of x in the level of x, where the group order is q1.
    /// x is assumed to be an ell-th power (callers arrange the level so).
    fn ell_th_root(&self, x: &FqElement, ell: u64, q1: &BigUint) -> Result<FqElement> {
        let level = x.level;
        if (q1 % ell).is_zero() {
            // Tonelli-Shanks / Adleman-Manders-Miller in the ell-Sylow subgroup
            let mut v = 0u32;
            let mut w = q1.clone();
            while (&w % ell).is_zero() {
                w /= ell;
                v += 1;
            }
            // deterministic ell-non-residue
            let mut eta = None;
            let test_exp = q1 / ell;
            for k in 1..100_000u64 {
                let candidate = self.element_by_index(level, k);
                if candidate.is_zero() {
                    continue;
                }
                if self.pow_big(&candidate, &test_exp) != self.one(level) {
                    eta = Some(candidate);
                    break;
                }
            }
            let eta = eta.ok_or_else(|| {
                Error::Unsupported("no ell-th non-residue found in enumeration window".into())
            })?;
            let g = self.pow_big(&eta, &w); // order exactly ell^v
            // z0 = x^alpha with alpha = ell^{-1} mod w (or 0 when w == 1)
            let alpha = if w.is_one() {
                BigUint::zero()
            } else {
                modinv_big(&BigUint::from(ell), &w)
                    .ok_or_else(|| Error::Unsupported("no inverse of ell mod w".into()))?
            };
            let z0 = self.pow_big(x, &alpha);
            // sigma = z0^ell / x lies in the Sylow subgroup
            let sigma = self.mul(&self.pow(&z0, ell), &self.inv(x)?);
            // discrete log of sigma in <g> (cyclic of order ell^v), base-ell digits
            let k = self.sylow_dlog(&sigma, &g, ell, v)?;
            if !(&k % ell).is_zero() {
                return Err(Error::Unsupported(
                    "element is not an ell-th power at this level".into(),
                ));
            }
            let tau = self.pow_big(&self.inv(&g)?, &(&k / ell));
            let out = self.mul(&z0, &tau);
            debug_assert!(self.pow(&out, ell) == *x);
            Ok(out)
        } else {
            let e = modinv_big(&BigUint::from(ell), q1)
                .ok_or_else(|| Error::Unsupported("no inverse of ell mod group order".into()))?;
            Ok(self.pow_big(x, &e))
        }
    }

    /// Discrete logarithm in the cyclic group generated by g of order ell^v.
    fn sylow_dlog(&self, sigma: &FqElement, g: &FqElement, ell: u64, v: u32) -> Result<BigUint> {
        let level = sigma.level;
        let gamma = {
            let mut e = BigUint::one();
            for _ in 0..v - 1 {
                e *= ell;
            }
            self.pow_big(g, &e) // order ell
        };
        let g_inv = self.inv(g)?;
        let mut k = BigUint::zero();
        let mut cur = sigma.clone();
        let mut ell_pow_i = BigUint::one();
        for i in 0..v {
            // t = cur^(ell^(v-1-i)) lies in <gamma>
            let mut e = BigUint::one();
            for _ in 0..(v - 1 - i) {
                e *= ell;
            }
            let t = self.pow_big(&cur, &e);
            let mut digit = None;
            let mut acc = self.one(level);
            for d in 0..ell {
                if acc == t {
                    digit = Some(d);
                    break;
                }
                acc = self.mul(&acc, &gamma);
            }
            let d = digit.ok_or_else(|| Error::Unsupported("dlog digit not found".into()))?;
            if d != 0 {
                let step = BigUint::from(d) * &ell_pow_i;
                let adj = self.pow_big(&g_inv, &step);
                cur = self.mul(&cur, &adj);
                k += step;
            }
            ell_pow_i *= ell;
        }
        Ok(k)
    }

    fn primitive_nth_root_in_level(
        &self,
        n: u64,
        level: usize,
        q1: &BigUint,
    ) -> Result<FqElement> {
        debug_assert!((q1 % n).is_zero());
        let exp = q1 / n;
        let prime_divs: Vec<u64> = factorize(n).into_iter().map(|(q, _)| q).collect();
        for k in 1..100_000u64 {
            let candidate = self.element_by_index(level, k);
            if candidate.is_zero() {
                continue;
            }
            let zeta = self.pow_big(&candidate, &exp);
            if zeta == self.one(level) {
                continue;
            }
            let mut primitive = true;
            for &q in &prime_divs {
                if self.pow(&zeta, n / q) == self.one(level) {
                    primitive = false;
                    break;
                }
            }
            if primitive {
                return Ok(zeta);
            }
        }
        Err(Error::Unsupported("no primitive root of unity found in enumeration window".into()))
    }
}

fn fq_trim(v: &mut Vec<FqElement>) {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
}

/// Solve cols * x = rhs over F_p where cols are column vectors. Returns the
/// (unique, if the columns are independent) solution.
fn solve_linear(cols: &[Vec<u64>], rhs: &[u64], p: u64) -> Option<Vec<u64>> {
    let rows = rhs.len();
    let ncols = cols.len();
    let mut aug: Vec<Vec<u64>> = (0..rows)
        .map(|i| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[i]).collect();
            row.push(rhs[i]);
            row
        })
        .collect();
    let mut pivot_rows = Vec::new();
    let mut row = 0usize;
    for col in 0..ncols {
        let mut sel = None;
        for r in row..rows {
            if aug[r][col] != 0 {
                sel = Some(r);
                break;
            }
        }
        let sel = sel?;
        aug.swap(row, sel);
        let inv = inv_mod_p(aug[row][col], p);
        for c in col..=ncols {
            aug[row][c] = aug[row][c] * inv % p;
        }
        for r in 0..rows {
            if r != row && aug[r][col] != 0 {
                let f = aug[r][col];
                for c in col..=ncols {
                    aug[r][c] = (aug[r][c] + p - aug[row][c] * f % p) % p;
                }
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    // consistency of the remaining rows
    for r in row..rows {
        if aug[r][ncols] != 0 {
            return None;
        }
    }
    Some((0..ncols).map(|c| aug[pivot_rows[c]][ncols]).collect())
}

fn modinv_big(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let (mut t, mut new_t) = (BigInt::from(0), BigInt::from(1));
    let (mut r, mut new_r) = (m_int.clone(), a);
    while new_r != BigInt::from(0) {
        let q = &r / &new_r;
        let tmp_t = &t - &q * &new_t;
        t = std::mem::replace(&mut new_t, tmp_t);
        let tmp_r = &r - &q * &new_r;
        r = std::mem::replace(&mut new_r, tmp_r);
    }
    if r != BigInt::from(1) {
        return None;
    }
    let res = ((t % &m_int) + &m_int) % &m_int;
    res.to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force n-th roots by scanning a whole small field.
    fn brute_roots(tower: &FieldTower, level: usize, c: &FqElement, n: u64) -> Vec<FqElement> {
        let size = (tower.p() as u128).pow(level as u32);
        assert!(size < 1 << 20);
        let mut out = Vec::new();
        for k in 0..size as u64 {
            let z = tower.element_by_index(level, k);
            if tower.pow(&z, n) == tower.embed(c, level) {
                out.push(z);
            }
        }
        out
    }

    #[test]
    fn lex_smallest_moduli() {
        // degree-1 modulus is x itself
        assert_eq!(find_irreducible(7, 1), vec![0, 1]);
        // exhaustive oracle for the quadratic cases: scan the 25/49 monic
        // candidates in (c1, c0) lexicographic order, constant term fastest
        for p in [5u64, 7] {
            let mut expected = None;
            'outer: for c1 in 0..p {
                for c0 in 0..p {
                    let cand = vec![c0, c1, 1];
                    if is_irreducible(&cand, p) {
                        expected = Some(cand);
                        break 'outer;
                    }
                }
            }
            assert_eq!(find_irreducible(p, 2), expected.unwrap());
        }
        assert_eq!(find_irreducible(7, 2), vec![1, 0, 1]); // x^2 + 1
        assert_eq!(find_irreducible(5, 2), vec![2, 0, 1]); // x^2 + 2
    }

    #[test]
    fn basic_inverses() {
        let t7 = FieldTower::new(7).unwrap();
        assert_eq!(t7.inv(&t7.scalar(2)).unwrap(), t7.scalar(4));
        let t5 = FieldTower::new(5).unwrap();
        assert_eq!(t5.inv(&t5.scalar(4)).unwrap(), t5.scalar(4));
    }

    #[test]
    fn quadratic_extension_generator_square() {
        // p = 5, modulus x^2 + 2: g * g = -2 = 3
        let mut t = FieldTower::new(5).unwrap();
        t.ensure_level(2).unwrap();
        let g = t.generator(2);
        let gg = t.mul(&g, &g);
        assert_eq!(gg, t.embed(&t.scalar(3), 2));
    }

    #[test]
    fn nth_roots_of_unity_mod_7() {
        let mut t = FieldTower::new(7).unwrap();
        let one = t.one(1);
        let roots = t.nth_roots(&one, 2).unwrap();
        assert_eq!(roots, vec![t.one(1), t.scalar(6)]);
    }

    #[test]
    fn square_roots_of_two_mod_7() {
        let mut t = FieldTower::new(7).unwrap();
        let c = t.scalar(2);
        let roots = t.nth_roots(&c, 2).unwrap();
        assert_eq!(roots, vec![t.scalar(3), t.scalar(4)]);
        let brute = brute_roots(&t, 1, &c, 2);
        assert_eq!(brute.len(), 2);
    }

    #[test]
    fn cube_roots_of_three_mod_5() {
        let mut t = FieldTower::new(5).unwrap();
        let c = t.scalar(3);
        let roots = t.nth_roots(&c, 3).unwrap();
        assert_eq!(roots.len(), 3);
        // alpha_0 = 2 is the canonically smallest (it lies in the prime field)
        assert_eq!(t.compress(&roots[0]), t.scalar(2));
        assert_eq!(roots[0].level(), 2);
        assert_eq!(t.min_level(&roots[1]), 2);
        assert_eq!(t.min_level(&roots[2]), 2);
        // exact root property and distinctness, against the brute-force scan
        let brute = brute_roots(&t, 2, &c, 3);
        assert_eq!(brute.len(), 3);
        for r in &roots {
            assert!(brute.contains(&t.embed(r, 2)));
        }
        // zeta is the smaller of the two primitive cube roots: 2 + g
        let zeta = t.mul(&roots[1], &t.inv(&roots[0]).unwrap());
        assert_eq!(zeta.coeffs(), &[2, 1]);
    }

    #[test]
    fn pth_root_examples() {
        let t7 = FieldTower::new(7).unwrap();
        assert_eq!(t7.pth_root(&t7.scalar(3)), t7.scalar(3));
        let t5 = FieldTower::new(5).unwrap();
        assert_eq!(t5.pth_root(&t5.scalar(0)), t5.scalar(0));
        let mut t5 = FieldTower::new(5).unwrap();
        t5.ensure_level(2).unwrap();
        let g = t5.generator(2);
        let r = t5.pth_root(&g);
        assert_eq!(r, t5.pow(&g, 5));
        assert_eq!(t5.pow(&r, 5), g);
    }

    #[test]
    fn nth_roots_rejects_p_dividing_n() {
        let mut t = FieldTower::new(5).unwrap();
        let c = t.scalar(2);
        assert!(matches!(t.nth_roots(&c, 10), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn embeddings_commute() {
        for p in [3u64, 5, 7] {
            let mut t = FieldTower::new(p).unwrap();
            t.ensure_level(12).unwrap();
            // direct embedding 2 -> 12 equals 2 -> 4 -> 12 and 2 -> 6 -> 12
            for x_idx in 0..(p * p) {
                let x = t.element_by_index(2, x_idx);
                let direct = t.embed(&x, 12);
                let via4 = t.embed(&t.embed(&x, 4), 12);
                let via6 = t.embed(&t.embed(&x, 6), 12);
                assert_eq!(direct, via4);
                assert_eq!(direct, via6);
            }
            // and 3 -> 6 -> 12 equals 3 -> 12
            for x_idx in 0..40u64.min(p.pow(3)) {
                let x = t.element_by_index(3, x_idx);
                assert_eq!(t.embed(&x, 12), t.embed(&t.embed(&x, 6), 12));
            }
        }
    }

    #[test]
    fn embedding_respects_arithmetic() {
        let mut t = FieldTower::new(5).unwrap();
        t.ensure_level(6).unwrap();
        for i in 0..25u64 {
            for j in [1u64, 7, 13, 24] {
                let a = t.element_by_index(2, i);
                let b = t.element_by_index(2, j);
                assert_eq!(t.embed(&t.mul(&a, &b), 6), t.mul(&t.embed(&a, 6), &t.embed(&b, 6)));
                assert_eq!(t.embed(&t.add(&a, &b), 6), t.add(&t.embed(&a, 6), &t.embed(&b, 6)));
            }
        }
    }

    #[test]
    fn compress_roundtrip() {
        let mut t = FieldTower::new(7).unwrap();
        t.ensure_level(4).unwrap();
        for k in 0..49u64 {
            let x = t.element_by_index(2, k);
            let lifted = t.embed(&x, 4);
            let back = t.compress(&lifted);
            assert!(back.level() <= 2);
            assert_eq!(t.embed(&back, 4), lifted);
        }
    }

    #[test]
    fn mixed_level_arithmetic_embeds() {
        let mut t = FieldTower::new(5).unwrap();
        t.ensure_level(2).unwrap();
        let a = t.scalar(3);
        let g = t.generator(2);
        let s = t.add(&a, &g);
        assert_eq!(s.level(), 2);
        assert_eq!(s.coeffs(), &[3, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms(p_idx in 0usize..3, xi in 0u64..125, yi in 1u64..125, zi in 0u64..125) {
            let p = [5u64, 7, 11][p_idx];
            let mut t = FieldTower::new(p).unwrap();
            t.ensure_level(3).unwrap();
            let x = t.element_by_index(3, xi % p.pow(3));
            let y = t.element_by_index(3, (yi % (p.pow(3) - 1)) + 1); // nonzero
            let z = t.element_by_index(3, zi % p.pow(3));
            // (x * y) / y = x and (x + y) - y = x
            prop_assert_eq!(t.mul(&t.mul(&x, &y), &t.inv(&y).unwrap()), x.clone());
            prop_assert_eq!(t.sub(&t.add(&x, &y), &y), x.clone());
            // distributivity
            prop_assert_eq!(
                t.mul(&x, &t.add(&y, &z)),
                t.add(&t.mul(&x, &y), &t.mul(&x, &z))
            );
            // Frobenius is additive and multiplicative, and pth_root inverts it
            let fx = t.frobenius(&x);
            let fy = t.frobenius(&y);
            prop_assert_eq!(t.frobenius(&t.add(&x, &y)), t.add(&fx, &fy));
            prop_assert_eq!(t.frobenius(&t.mul(&x, &y)), t.mul(&fx, &fy));
            prop_assert_eq!(t.pth_root(&fx), x.clone());
            prop_assert_eq!(t.pow(&t.pth_root(&x), p), x.clone());
        }

        #[test]
        fn nth_roots_are_exact_and_distinct(ci in 1u64..7, n in 1u64..7) {
            let p = 7u64;
            prop_assume!(n % p != 0);
            let mut t = FieldTower::new(p).unwrap();
            let c = t.scalar(ci as i64);
            let roots = t.nth_roots(&c, n).unwrap();
            prop_assert_eq!(roots.len(), n as usize);
            for (i, r) in roots.iter().enumerate() {
                let lvl = r.level();
                prop_assert_eq!(t.pow(r, n), t.embed(&c, lvl));
                for s in roots.iter().skip(i + 1) {
                    prop_assert_ne!(r, s);
                }
            }
        }
    }
}
