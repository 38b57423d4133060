//! The convolution engine: hypothesis gates, construction of the critical
//! Laurent polynomial H(z, t), root finding, Hensel lifting, extraction of
//! the wild arguments h_i, orbit-representative selection and output
//! assembly, plus the gcd push-forward reduction wrapper.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::field::{gcd_u64, lcm_usize, FieldTower, FqElement};
use crate::rep::{
    canonical_atom, jordan_tensor, Atom, InputRep, LocalRep, Point, PsiArg, TameChar,
};
use crate::series::{newton_lift, LaurentPoly, TruncatedSeries};

pub const DEFAULT_GUARD: i64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Both factors wild at infinity.
    InfInf,
    /// First factor at zero (its data read through inversion), second at
    /// infinity.
    ZeroInf,
}

impl ConvMode {
    pub fn name(&self) -> &'static str {
        match self {
            ConvMode::InfInf => "inf-inf",
            ConvMode::ZeroInf => "0-inf",
        }
    }
}

/// A convolution problem with its derived degree data.
#[derive(Debug, Clone)]
pub struct ConvProblem {
    pub f: InputRep,
    pub g: InputRep,
    pub mode: ConvMode,
    pub guard: i64,
}

impl ConvProblem {
    pub fn new(f: InputRep, g: InputRep, mode: ConvMode, guard: i64) -> Self {
        ConvProblem { f, g, mode, guard }
    }

    pub fn d(&self) -> i64 {
        self.f.degree()
    }

    pub fn e(&self) -> i64 {
        self.g.degree()
    }

    pub fn c(&self) -> i64 {
        self.d().gcd(&self.e())
    }

    pub fn d_prime(&self) -> i64 {
        self.d() / self.c()
    }

    pub fn e_prime(&self) -> i64 {
        self.e() / self.c()
    }

    /// de/c, the degree of every h_i.
    pub fn h_degree(&self) -> i64 {
        self.d() * self.e() / self.c()
    }

    /// bd + ae (resp. bd - ae): the number of critical points.
    pub fn stalk_count(&self) -> i64 {
        let a = self.f.push_index as i64;
        let b = self.g.push_index as i64;
        match self.mode {
            ConvMode::InfInf => b * self.d() + a * self.e(),
            ConvMode::ZeroInf => b * self.d() - a * self.e(),
        }
    }

    /// bd' + ae' (resp. bd' - ae'): the output push-forward index.
    pub fn push_index(&self) -> i64 {
        self.stalk_count() / self.c()
    }

    /// The tame twist of every output atom: e'.chi + d'.xi + de/2 mod 1.
    pub fn output_tame(&self) -> TameChar {
        self.f
            .tame
            .scale(self.e_prime())
            .add(&self.g.tame.scale(self.d_prime()))
            .add(&TameChar::half_times(self.d() * self.e()))
    }
}

/// Per-root lifting record, kept for tracing and residual audits.
#[derive(Debug, Clone)]
pub struct LiftTrace {
    pub root: FqElement,
    pub lift: TruncatedSeries,
    /// t^(de/c) * H(z_i, t).
    pub h: TruncatedSeries,
    /// The engine certified residual valuation strictly greater than this.
    pub residual_val_exceeds: i64,
}

#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub rep: LocalRep,
    /// Requested series precision K = de/c + guard (0 for the empty output).
    pub precision: i64,
    /// All critical residue roots alpha_0 zeta^i, in the canonical order.
    pub roots: Vec<FqElement>,
    /// Lift records for the computed roots (the c orbit representatives, or
    /// every root when the full stalk decomposition was requested).
    pub lifts: Vec<LiftTrace>,
    /// Reduction of H modulo 1/t, as (z-exponent, coefficient) pairs.
    pub h_tilde: Vec<(i64, FqElement)>,
    pub h_poly: Option<LaurentPoly>,
    /// The equation whose simple roots were lifted (the z-derivative of H
    /// for convolutions, the critical equation for the transforms).
    pub lift_poly: Option<LaurentPoly>,
    /// Push-index-1 stalk atoms from lifting every root (full restriction
    /// data), when requested.
    pub stalks: Option<Vec<Atom>>,
}

impl EngineOutput {
    fn empty() -> Self {
        EngineOutput {
            rep: LocalRep::empty(Point::Inf),
            precision: 0,
            roots: Vec::new(),
            lifts: Vec::new(),
            h_tilde: Vec::new(),
            h_poly: None,
            lift_poly: None,
            stalks: None,
        }
    }
}

fn check_prime_to_p(p: u64, what: &str, value: i64) -> Result<()> {
    if value.rem_euclid(p as i64) == 0 {
        return Err(Error::HypothesisViolation(format!(
            "{} = {} is divisible by p = {}",
            what, value, p
        )));
    }
    Ok(())
}

fn common_gates(tower: &FieldTower, problem: &ConvProblem) -> Result<()> {
    let p = tower.p();
    let (a, b) = (problem.f.push_index, problem.g.push_index);
    if gcd_u64(a, b) != 1 {
        return Err(Error::HypothesisViolation(format!(
            "gcd(a, b) = {} > 1: apply the common push-forward reduction first",
            gcd_u64(a, b)
        )));
    }
    check_prime_to_p(p, "a", a as i64)?;
    check_prime_to_p(p, "b", b as i64)?;
    check_prime_to_p(p, "d = deg f", problem.d())?;
    check_prime_to_p(p, "e = deg g", problem.e())?;
    Ok(())
}

/// The critical Laurent polynomial
///   H(z, t) = t^(-de/c) (f(t^e' z^b) + g(t^d' z^-a))    (inf-inf)
///   H(z, t) = t^(-de/c) (f(t^e' z^-b) + g(t^d' z^-a))   (0-inf)
/// Its reduction modulo 1/t is f_d z^(bd) + g_e z^(-ae), resp.
/// f_d z^(-bd) + g_e z^(-ae).
pub fn build_h(tower: &FieldTower, problem: &ConvProblem) -> LaurentPoly {
    let a = problem.f.push_index as i64;
    let b = problem.g.push_index as i64;
    let de_c = problem.h_degree();
    let (dp, ep) = (problem.d_prime(), problem.e_prime());
    let mut h = LaurentPoly::new();
    let f_sign = match problem.mode {
        ConvMode::InfInf => 1,
        ConvMode::ZeroInf => -1,
    };
    for (j, coeff) in &problem.f.poly {
        let mono = TruncatedSeries::monomial(coeff.clone(), ep * j - de_c);
        h.add_term(f_sign * b * j, mono, tower);
    }
    for (i, coeff) in &problem.g.poly {
        let mono = TruncatedSeries::monomial(coeff.clone(), dp * i - de_c);
        h.add_term(-a * i, mono, tower);
    }
    h
}

/// The residue equation z^stalk_count = a e g_e / (b d f_d) (inf-inf) or
/// z^stalk_count = -b d f_d / (a e g_e) (0-inf).
fn root_radicand(tower: &FieldTower, problem: &ConvProblem) -> Result<FqElement> {
    let a = problem.f.push_index as i64;
    let b = problem.g.push_index as i64;
    let fd = problem.f.leading_coeff();
    let ge = problem.g.leading_coeff();
    let ae = tower.scalar(a * problem.e());
    let bd = tower.scalar(b * problem.d());
    match problem.mode {
        ConvMode::InfInf => {
            let num = tower.mul(&ae, ge);
            let den = tower.mul(&bd, fd);
            Ok(tower.mul(&num, &tower.inv(&den)?))
        }
        ConvMode::ZeroInf => {
            let num = tower.neg(&tower.mul(&bd, fd));
            let den = tower.mul(&ae, ge);
            Ok(tower.mul(&num, &tower.inv(&den)?))
        }
    }
}

fn compute(tower: &mut FieldTower, problem: &ConvProblem, lift_all: bool) -> Result<EngineOutput> {
    common_gates(tower, problem)?;
    let p = tower.p();
    if problem.mode == ConvMode::ZeroInf && problem.stalk_count() <= 0 {
        // the slope at zero does not exceed the slope at infinity
        return Ok(EngineOutput::empty());
    }
    let n_total = problem.stalk_count();
    let gate_name = match problem.mode {
        ConvMode::InfInf => "bd + ae",
        ConvMode::ZeroInf => "bd - ae",
    };
    check_prime_to_p(p, gate_name, n_total)?;

    let coeff_level = lcm_usize(problem.f.coeff_level(), problem.g.coeff_level());
    tower.ensure_level(coeff_level)?;

    let h = build_h(tower, problem);
    let dh = h.derivative_z(tower);
    let h_tilde = h.reduced();

    let radicand = root_radicand(tower, problem)?;
    let roots = tower.nth_roots(&radicand, n_total as u64)?;
    let root_level = roots[0].level();
    tower.ensure_compositum(coeff_level, root_level)?;

    let c = problem.c();
    let precision = problem.h_degree() + problem.guard.max(1);
    let tame = problem.output_tame();
    let blocks = jordan_tensor(problem.f.unip, problem.g.unip);
    let push_n = problem.push_index() as u64;

    let lift_count = if lift_all { n_total as usize } else { c as usize };
    let mut lifts = Vec::with_capacity(lift_count);
    let mut rep_atoms = Vec::new();
    let mut stalks = if lift_all { Some(Vec::new()) } else { None };
    for (i, alpha) in roots.iter().take(lift_count).enumerate() {
        let z = newton_lift(&dh, alpha, precision, tower)?;
        let h_i = h.eval(&z, tower)?.scale_shift(problem.h_degree());
        let psi = PsiArg::from_raw_terms(h_i.known_digits_from(1)?, tower);
        if (i as i64) < c {
            for &u in &blocks {
                rep_atoms.push(canonical_atom(tower, push_n, psi.clone(), tame, u)?);
            }
        }
        if let Some(stalks) = stalks.as_mut() {
            for &u in &blocks {
                stalks.push(Atom { push_index: 1, psi: psi.clone(), tame, unip: u });
            }
        }
        lifts.push(LiftTrace {
            root: alpha.clone(),
            lift: z,
            h: h_i,
            residual_val_exceeds: precision,
        });
    }

    Ok(EngineOutput {
        rep: LocalRep::new(Point::Inf, rep_atoms),
        precision,
        roots,
        lifts,
        h_tilde,
        h_poly: Some(h),
        lift_poly: Some(dh),
        stalks,
    })
}

/// Local convolution at infinity of two representations wild at infinity.
/// Requires gcd(a, b) = 1 and a, b, d, e, bd+ae prime to p.
pub fn lc_inf_inf(
    tower: &mut FieldTower,
    f: &InputRep,
    g: &InputRep,
    guard: i64,
) -> Result<EngineOutput> {
    let problem = ConvProblem::new(f.clone(), g.clone(), ConvMode::InfInf, guard);
    compute(tower, &problem, false)
}

/// Local convolution at infinity of a representation at zero (given by its
/// (a, f, chi, n) data, read through inversion) with one at infinity. Empty
/// when bd <= ae; otherwise requires a, b, d, e, bd-ae prime to p.
pub fn lc_0_inf(
    tower: &mut FieldTower,
    f_at_zero: &InputRep,
    g: &InputRep,
    guard: i64,
) -> Result<EngineOutput> {
    let problem = ConvProblem::new(f_at_zero.clone(), g.clone(), ConvMode::ZeroInf, guard);
    compute(tower, &problem, false)
}

/// Push-index-1 stalk atoms obtained by lifting every critical root: the
/// full restriction of the convolution to the index-N subgroup.
pub fn stalk_decomposition(
    tower: &mut FieldTower,
    f: &InputRep,
    g: &InputRep,
    mode: ConvMode,
    guard: i64,
) -> Result<(EngineOutput, Vec<Atom>)> {
    let problem = ConvProblem::new(f.clone(), g.clone(), mode, guard);
    let mut out = compute(tower, &problem, true)?;
    let stalks = out.stalks.take().unwrap_or_default();
    Ok((out, stalks))
}

/// The common push-forward factor r = gcd(a, b) and the reduced problem
/// data; output atoms of the reduced problem get their push index scaled
/// back by r.
pub fn reduce_common_pushforward(
    tower: &FieldTower,
    f: &InputRep,
    g: &InputRep,
) -> Result<(u64, InputRep, InputRep)> {
    let r = gcd_u64(f.push_index, g.push_index);
    if r == 1 {
        return Ok((1, f.clone(), g.clone()));
    }
    if r % tower.p() == 0 {
        return Err(Error::HypothesisViolation(format!(
            "common push-forward factor r = {} is divisible by p = {}",
            r,
            tower.p()
        )));
    }
    let mut fr = f.clone();
    fr.push_index /= r;
    let mut gr = g.clone();
    gr.push_index /= r;
    Ok((r, fr, gr))
}

/// Multiply every atom's push-forward index by r and re-canonicalize
/// ([r]_* [N]_* = [rN]_*).
pub fn scale_push_index(tower: &mut FieldTower, rep: &LocalRep, r: u64) -> Result<LocalRep> {
    if r == 1 {
        return Ok(rep.clone());
    }
    let mut atoms = Vec::with_capacity(rep.atoms().len());
    for atom in rep.atoms() {
        atoms.push(canonical_atom(
            tower,
            atom.push_index * r,
            atom.psi.clone(),
            atom.tame,
            atom.unip,
        )?);
    }
    Ok(LocalRep::new(rep.point, atoms))
}

/// Public entry point: applies the gcd(a, b) reduction when needed, runs the
/// requested convolution, and scales the push indices back.
pub fn convolve(
    tower: &mut FieldTower,
    f: &InputRep,
    g: &InputRep,
    mode: ConvMode,
    guard: i64,
) -> Result<EngineOutput> {
    let (r, fr, gr) = reduce_common_pushforward(tower, f, g)?;
    let problem = ConvProblem::new(fr, gr, mode, guard);
    let mut out = compute(tower, &problem, false)?;
    if r > 1 {
        out.rep = scale_push_index(tower, &out.rep, r)?;
    }
    Ok(out)
}
