//! Local Fourier transforms of [a]_* (psi(f) tensor K_{chi,n}), computed
//! along two independent routes that must agree: a closed-form path that
//! lifts the critical-point equation directly, and a delegation path that
//! feeds the convolution engine with the standard rank-one wild character.

use crate::engine::{self, EngineOutput};
use crate::error::{Error, Result};
use crate::field::{FieldTower, FqElement};
use crate::rep::{canonical_atom, InputRep, LocalRep, Point, PsiArg, TameChar};
use crate::series::{newton_lift, LaurentPoly, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtPath {
    Direct,
    ViaConv,
    /// Compute both, check equality, emit once.
    Both,
}

impl FtPath {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(FtPath::Direct),
            "conv" => Ok(FtPath::ViaConv),
            "both" => Ok(FtPath::Both),
            other => Err(Error::Parse(format!(
                "unknown path `{}` (expected direct, conv or both)",
                other
            ))),
        }
    }
}

/// The rank-one wild input (1, t, trivial, 1).
fn standard_psi_input(tower: &FieldTower) -> InputRep {
    InputRep::new(tower, 1, vec![(1, tower.one(1))], TameChar::zero(), 1)
        .expect("the standard wild character is always a valid input")
}

fn check_prime(p: u64, what: &str, v: i64) -> Result<()> {
    if v.rem_euclid(p as i64) == 0 {
        return Err(Error::HypothesisViolation(format!(
            "{} = {} is divisible by p = {}",
            what, v, p
        )));
    }
    Ok(())
}

/// Shared direct-path core: lift the critical equation at its canonical
/// residue root, evaluate the phase polynomial there, and wrap the result
/// into a single atom [push_n]_* (psi(g) tensor tame tensor U_n).
fn direct_core(
    tower: &mut FieldTower,
    critical: &LaurentPoly,
    phase: &LaurentPoly,
    radicand: &FqElement,
    root_count: u64,
    d: i64,
    tame: TameChar,
    unip: u64,
    guard: i64,
) -> Result<EngineOutput> {
    let roots = tower.nth_roots(radicand, root_count)?;
    tower.ensure_compositum(1, roots[0].level())?;
    let precision = d + guard.max(1);
    let alpha = roots[0].clone();
    let z = newton_lift(critical, &alpha, precision, tower)?;
    let g_series = phase.eval(&z, tower)?.scale_shift(d);
    let psi = PsiArg::from_raw_terms(g_series.known_digits_from(1)?, tower);
    let atom = canonical_atom(tower, root_count, psi, tame, unip)?;
    let h_tilde = critical.reduced();
    Ok(EngineOutput {
        rep: LocalRep::new(Point::Inf, vec![atom]),
        precision,
        roots,
        lifts: vec![engine::LiftTrace {
            root: alpha,
            lift: z,
            h: g_series,
            residual_val_exceeds: precision,
        }],
        h_tilde,
        h_poly: Some(critical.clone()),
        lift_poly: Some(critical.clone()),
        stalks: None,
    })
}

/// Transform from zero to infinity, closed form: lift the root z(1/t) of
/// z^(a+1) t^-(d-1) f'(tz) - a with residue the canonical (a+d)-th root of
/// a / (d f_d), and set g = f(t z) + t^d / z^a. The output is
/// [d+a]_* (psi(g) tensor K_{conj(chi),n} tensor rho^d).
pub fn ft_0_inf_direct(tower: &mut FieldTower, f: &InputRep, guard: i64) -> Result<EngineOutput> {
    let p = tower.p();
    let d = f.degree();
    let a = f.push_index as i64;
    check_prime(p, "a", a)?;
    check_prime(p, "d", d)?;
    check_prime(p, "a + d", a + d)?;

    let mut critical = LaurentPoly::new();
    let mut phase = LaurentPoly::new();
    for (j, coeff) in &f.poly {
        phase.add_term(*j, TruncatedSeries::monomial(coeff.clone(), j - d), tower);
        let jf = tower.mul(&tower.scalar(*j), coeff);
        if !jf.is_zero() {
            critical.add_term(a + j, TruncatedSeries::monomial(jf, j - d), tower);
        }
    }
    phase.add_term(-a, TruncatedSeries::monomial(tower.one(1), 0), tower);
    critical.add_term(0, TruncatedSeries::monomial(tower.scalar(-a), 0), tower);

    // residue equation: d f_d z^(a+d) = a
    let dfd = tower.mul(&tower.scalar(d), f.leading_coeff());
    let radicand = tower.mul(&tower.scalar(a), &tower.inv(&dfd)?);
    let tame = f.tame.conjugate().add(&TameChar::half_times(d));
    direct_core(tower, &critical, &phase, &radicand, (a + d) as u64, d, tame, f.unip, guard)
}

/// Transform from zero to infinity through the convolution engine, applied
/// to (a, f, conj(chi), n) against the standard wild character.
pub fn ft_0_inf_via_conv(tower: &mut FieldTower, f: &InputRep, guard: i64) -> Result<EngineOutput> {
    let mut conj = f.clone();
    conj.tame = f.tame.conjugate();
    let psi = standard_psi_input(tower);
    engine::lc_inf_inf(tower, &conj, &psi, guard)
}

/// Transform from infinity to infinity (d > a), closed form: lift the root
/// of z^(a-1) t^-(d-1) f'(t/z) + a, set g = f(t/z) + t^d / z^a; the output
/// is [d-a]_* (psi(g) tensor K_{chi,n} tensor rho^d).
pub fn ft_inf_inf_direct(tower: &mut FieldTower, f: &InputRep, guard: i64) -> Result<EngineOutput> {
    let p = tower.p();
    let d = f.degree();
    let a = f.push_index as i64;
    if d <= a {
        return Err(Error::HypothesisViolation(format!(
            "d = {} must exceed a = {} for the transform at infinity",
            d, a
        )));
    }
    check_prime(p, "a", a)?;
    check_prime(p, "d", d)?;
    check_prime(p, "d - a", d - a)?;

    let mut critical = LaurentPoly::new();
    let mut phase = LaurentPoly::new();
    for (j, coeff) in &f.poly {
        phase.add_term(-j, TruncatedSeries::monomial(coeff.clone(), j - d), tower);
        let jf = tower.mul(&tower.scalar(*j), coeff);
        if !jf.is_zero() {
            critical.add_term(a - j, TruncatedSeries::monomial(jf, j - d), tower);
        }
    }
    phase.add_term(-a, TruncatedSeries::monomial(tower.one(1), 0), tower);
    critical.add_term(0, TruncatedSeries::monomial(tower.scalar(a), 0), tower);

    // residue equation: d f_d z^(a-d) = -a, i.e. z^(d-a) = -d f_d / a
    let dfd = tower.mul(&tower.scalar(-d), f.leading_coeff());
    let radicand = tower.mul(&dfd, &tower.inv(&tower.scalar(a))?);
    let tame = f.tame.add(&TameChar::half_times(d));
    direct_core(tower, &critical, &phase, &radicand, (d - a) as u64, d, tame, f.unip, guard)
}

/// Transform from infinity to infinity through the convolution engine.
pub fn ft_inf_inf_via_conv(
    tower: &mut FieldTower,
    f: &InputRep,
    guard: i64,
) -> Result<EngineOutput> {
    let psi = standard_psi_input(tower);
    engine::lc_0_inf(tower, f, &psi, guard)
}

fn run_both(
    tower: &mut FieldTower,
    f: &InputRep,
    guard: i64,
    direct: fn(&mut FieldTower, &InputRep, i64) -> Result<EngineOutput>,
    via: fn(&mut FieldTower, &InputRep, i64) -> Result<EngineOutput>,
) -> Result<EngineOutput> {
    let d = direct(tower, f, guard)?;
    let v = via(tower, f, guard)?;
    if d.rep != v.rep {
        return Err(Error::Internal("direct and delegated Fourier paths disagree".into()));
    }
    Ok(d)
}

pub fn ft_0_inf(
    tower: &mut FieldTower,
    f: &InputRep,
    guard: i64,
    path: FtPath,
) -> Result<EngineOutput> {
    match path {
        FtPath::Direct => ft_0_inf_direct(tower, f, guard),
        FtPath::ViaConv => ft_0_inf_via_conv(tower, f, guard),
        FtPath::Both => run_both(tower, f, guard, ft_0_inf_direct, ft_0_inf_via_conv),
    }
}

pub fn ft_inf_inf(
    tower: &mut FieldTower,
    f: &InputRep,
    guard: i64,
    path: FtPath,
) -> Result<EngineOutput> {
    match path {
        FtPath::Direct => ft_inf_inf_direct(tower, f, guard),
        FtPath::ViaConv => ft_inf_inf_via_conv(tower, f, guard),
        FtPath::Both => run_both(tower, f, guard, ft_inf_inf_direct, ft_inf_inf_via_conv),
    }
}

/// Change-of-variable identity behind the zero-to-infinity transform: if
/// z(1/t) solves the critical equation, then
/// -(tz)^2 f'(tz) + a t^(d+1) z^(1-a) vanishes to the working precision.
pub fn substitution_residual_vanishes(
    tower: &FieldTower,
    f: &InputRep,
    lift: &TruncatedSeries,
) -> Result<bool> {
    let d = f.degree();
    let a = f.push_index as i64;
    let mut e_poly = LaurentPoly::new();
    for (j, coeff) in &f.poly {
        let jf = tower.mul(&tower.scalar(-j), coeff);
        if !jf.is_zero() {
            // -(tz)^2 f'(tz) contributes -j f_j t^(j+1) z^(j+1)
            e_poly.add_term(j + 1, TruncatedSeries::monomial(jf, j + 1), tower);
        }
    }
    e_poly.add_term(1 - a, TruncatedSeries::monomial(tower.scalar(a), d + 1), tower);
    let v = e_poly.eval(lift, tower)?;
    Ok(v.is_known_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::jordan_tensor;
    use num_rational::Ratio;

    fn tower(p: u64) -> FieldTower {
        FieldTower::new(p).unwrap()
    }

    fn rep(t: &FieldTower, a: u64, f: &[(i64, i64)], chi: TameChar, n: u64) -> InputRep {
        let poly = f.iter().map(|&(e, c)| (e, t.scalar(c))).collect();
        InputRep::new(t, a, poly, chi, n).unwrap()
    }

    #[test]
    fn kloosterman_via_fourier() {
        let mut t = tower(7);
        let f = rep(&t, 1, &[(1, 1)], TameChar::zero(), 1);
        let out = ft_0_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        assert_eq!(out.rep.atoms().len(), 1);
        let atom = &out.rep.atoms()[0];
        assert_eq!(atom.push_index, 2);
        assert_eq!(atom.psi.terms(), &[(1, t.scalar(2))]);
        assert_eq!(atom.tame, TameChar::half_times(1));
        assert_eq!(atom.unip, 1);
    }

    #[test]
    fn conjugation_shifts_the_tame_twist() {
        let mut t = tower(7);
        let f = rep(&t, 1, &[(1, 1)], TameChar::new(1, 3).unwrap(), 1);
        let out = ft_0_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        // -1/3 + 1/2 = 1/6
        assert_eq!(out.rep.atoms()[0].tame, TameChar::new(1, 6).unwrap());
    }

    #[test]
    fn unipotent_size_is_preserved() {
        let mut t = tower(7);
        let f = rep(&t, 1, &[(1, 1)], TameChar::zero(), 4);
        let out = ft_0_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        assert_eq!(out.rep.atoms().len(), 1);
        assert_eq!(out.rep.atoms()[0].unip, 4);
        assert_eq!(jordan_tensor(4, 1), vec![4]);
    }

    #[test]
    fn quadratic_phase_at_infinity() {
        for p in [7u64, 11, 13] {
            let mut t = tower(p);
            let f = rep(&t, 1, &[(2, 1)], TameChar::zero(), 1);
            let out = ft_inf_inf(&mut t, &f, 8, FtPath::Both).unwrap();
            let atom = &out.rep.atoms()[0];
            assert_eq!(atom.push_index, 1);
            assert_eq!(atom.tame, TameChar::zero());
            let minus_quarter = t.neg(&t.inv(&t.scalar(4)).unwrap());
            assert_eq!(atom.psi.terms(), &[(2, minus_quarter)]);
            assert_eq!(atom.slope(), Ratio::new(2, 1));
        }
    }

    #[test]
    fn cubic_transform_at_infinity() {
        // f = t^3, a = 1 over F_7: root z = 2, g = 5t^3, canonical 2t^3
        let mut t = tower(7);
        let f = rep(&t, 1, &[(3, 1)], TameChar::zero(), 1);
        let out = ft_inf_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        let atom = &out.rep.atoms()[0];
        assert_eq!(atom.push_index, 2);
        assert_eq!(atom.psi.terms(), &[(3, t.scalar(2))]);
        assert_eq!(atom.tame, TameChar::half_times(1));
    }

    #[test]
    fn rank_and_slope_laws() {
        let mut t = tower(11);
        let f = rep(&t, 2, &[(3, 2), (1, 1)], TameChar::new(2, 3).unwrap(), 2);
        let out = ft_0_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        // rank n(d + a), slope d/(d+a)
        assert_eq!(out.rep.rank(), 2 * (3 + 2));
        for atom in out.rep.atoms() {
            assert_eq!(atom.slope(), Ratio::new(3, 5));
        }
        let out2 = ft_inf_inf(&mut t, &f, 8, FtPath::Both).unwrap();
        assert_eq!(out2.rep.rank(), 2 * (3 - 2));
        for atom in out2.rep.atoms() {
            assert_eq!(atom.slope(), Ratio::new(3, 1));
        }
    }

    #[test]
    fn degree_gate_at_infinity() {
        let mut t = tower(7);
        let f = rep(&t, 3, &[(2, 1)], TameChar::zero(), 1);
        assert!(matches!(
            ft_inf_inf(&mut t, &f, 8, FtPath::Direct),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn substitution_identity_holds() {
        let mut t = tower(5);
        let f = rep(&t, 1, &[(2, 1), (1, 1)], TameChar::zero(), 1);
        let out = ft_0_inf_direct(&mut t, &f, 8).unwrap();
        assert!(substitution_residual_vanishes(&t, &f, &out.lifts[0].lift).unwrap());
        let mut t7 = tower(7);
        let g = rep(&t7, 2, &[(3, 2)], TameChar::zero(), 1);
        let out2 = ft_0_inf_direct(&mut t7, &g, 8).unwrap();
        assert!(substitution_residual_vanishes(&t7, &g, &out2.lifts[0].lift).unwrap());
    }
}
