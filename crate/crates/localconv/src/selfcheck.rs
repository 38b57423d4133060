//! Deterministic self-test batches behind the `selfcheck` subcommand, plus
//! the seeded instance generator shared with the integration suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{self, ConvMode};
use crate::error::Result;
use crate::field::{gcd_u64, FieldTower};
use crate::fourier::{self, FtPath};
use crate::rep::{canonical_atom, jordan_tensor, InputRep, PsiArg, TameChar};

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: u32,
    pub failed: u32,
}

impl CheckReport {
    fn tally(name: &'static str) -> Self {
        CheckReport { name, passed: 0, failed: 0 }
    }

    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

/// Draw a hypothesis-valid input pair for the given mode. The push indices
/// are coprime (scale both by `force_common` afterwards to exercise the
/// reduction wrapper).
pub fn random_conv_pair(
    rng: &mut impl Rng,
    tower: &FieldTower,
    max_idx: u64,
    max_deg: i64,
    max_unip: u64,
    mode: ConvMode,
) -> (InputRep, InputRep) {
    let p = tower.p();
    loop {
        let a = rng.gen_range(1..=max_idx);
        let b = rng.gen_range(1..=max_idx);
        if a % p == 0 || b % p == 0 || gcd_u64(a, b) != 1 {
            continue;
        }
        let d = rng.gen_range(1..=max_deg);
        let e = rng.gen_range(1..=max_deg);
        if d % p as i64 == 0 || e % p as i64 == 0 {
            continue;
        }
        let count = match mode {
            ConvMode::InfInf => b as i64 * d + a as i64 * e,
            ConvMode::ZeroInf => b as i64 * d - a as i64 * e,
        };
        if count > 0 && count % p as i64 == 0 {
            continue;
        }
        let f = random_poly(rng, tower, d);
        let g = random_poly(rng, tower, e);
        let chi = random_tame(rng, p);
        let xi = random_tame(rng, p);
        let n = rng.gen_range(1..=max_unip);
        let m = rng.gen_range(1..=max_unip);
        let fr = InputRep::new(tower, a, f, chi, n);
        let gr = InputRep::new(tower, b, g, xi, m);
        match (fr, gr) {
            (Ok(fr), Ok(gr)) => return (fr, gr),
            _ => continue,
        }
    }
}

/// Random input with the stated push index and a degree drawn from the
/// valid range (used by the Fourier suites).
pub fn random_single(
    rng: &mut impl Rng,
    tower: &FieldTower,
    max_idx: u64,
    max_deg: i64,
    max_unip: u64,
    need_d_gt_a: bool,
) -> InputRep {
    let p = tower.p();
    loop {
        let a = rng.gen_range(1..=max_idx);
        let d = rng.gen_range(1..=max_deg);
        if a % p == 0 || d % p as i64 == 0 {
            continue;
        }
        if need_d_gt_a {
            if d <= a as i64 || (d - a as i64) % p as i64 == 0 {
                continue;
            }
        } else if (d + a as i64) % p as i64 == 0 {
            continue;
        }
        let f = random_poly(rng, tower, d);
        let chi = random_tame(rng, p);
        let n = rng.gen_range(1..=max_unip);
        if let Ok(rep) = InputRep::new(tower, a, f, chi, n) {
            return rep;
        }
    }
}

fn random_poly(rng: &mut impl Rng, tower: &FieldTower, degree: i64) -> Vec<(i64, crate::field::FqElement)> {
    let p = tower.p();
    let mut out = Vec::new();
    for e in 0..degree {
        let c = rng.gen_range(0..p);
        if c != 0 {
            out.push((e, tower.scalar(c as i64)));
        }
    }
    let lead = rng.gen_range(1..p);
    out.push((degree, tower.scalar(lead as i64)));
    out
}

fn random_tame(rng: &mut impl Rng, p: u64) -> TameChar {
    loop {
        let den = rng.gen_range(1..=6i64);
        if den as u64 % p == 0 {
            continue;
        }
        let num = rng.gen_range(0..den.max(1) * 2);
        return TameChar::new(num, den).expect("nonzero denominator");
    }
}

fn check_kloosterman() -> Result<CheckReport> {
    let mut report = CheckReport::tally("kloosterman");
    for p in [3u64, 5, 7, 11] {
        let mut tower = FieldTower::new(p)?;
        let f = InputRep::new(&tower, 1, vec![(1, tower.one(1))], TameChar::zero(), 1)?;
        let out = engine::convolve(&mut tower, &f.clone(), &f, ConvMode::InfInf, 8)?;
        let two_t = PsiArg::from_raw_terms(vec![(1, tower.scalar(2))], &tower);
        let expected = canonical_atom(&mut tower, 2, two_t, TameChar::half_times(1), 1)?;
        let ok = out.rep.rank() == 2
            && out.rep.atoms().len() == 1
            && out.rep.atoms()[0] == expected
            && out.lifts[0].h.digit(1) == tower.scalar(2);
        report.record(ok);
    }
    Ok(report)
}

fn check_quadratic_phase() -> Result<CheckReport> {
    let mut report = CheckReport::tally("quadratic-phase");
    for p in [7u64, 11, 13] {
        let mut tower = FieldTower::new(p)?;
        let f = InputRep::new(&tower, 1, vec![(2, tower.one(1))], TameChar::zero(), 1)?;
        let out = fourier::ft_inf_inf(&mut tower, &f, 8, FtPath::Both)?;
        let minus_quarter = tower.neg(&tower.inv(&tower.scalar(4))?);
        let ok = out.rep.atoms().len() == 1 && {
            let atom = &out.rep.atoms()[0];
            atom.push_index == 1
                && atom.unip == 1
                && atom.tame == TameChar::zero()
                && atom.psi.terms() == [(2, minus_quarter)]
        };
        report.record(ok);
    }
    Ok(report)
}

fn check_worked_example() -> Result<CheckReport> {
    let mut report = CheckReport::tally("worked-example");
    let mut tower = FieldTower::new(5)?;
    let f = InputRep::new(
        &tower,
        1,
        vec![(2, tower.one(1)), (1, tower.one(1))],
        TameChar::zero(),
        1,
    )?;
    let g = InputRep::new(&tower, 1, vec![(1, tower.one(1))], TameChar::zero(), 1)?;
    let out = engine::lc_inf_inf(&mut tower, &f, &g, 10)?;
    let atom = &out.rep.atoms()[0];
    report.record(out.rep.rank() == 3);
    report.record(atom.psi.terms() == [(2, tower.scalar(2)), (1, tower.scalar(2))]);
    let lift = &out.lifts[0].lift;
    report.record(
        tower.compress(&lift.digit(0)) == tower.scalar(2)
            && tower.compress(&lift.digit(-1)) == tower.scalar(4),
    );
    Ok(report)
}

fn check_jordan() -> Result<CheckReport> {
    let mut report = CheckReport::tally("jordan-tensor");
    for n in 1..=6u64 {
        for m in 1..=6u64 {
            let blocks = jordan_tensor(n, m);
            let ok = blocks.iter().sum::<u64>() == n * m
                && blocks == jordan_tensor(m, n)
                && blocks.len() == n.min(m) as usize
                && blocks.first() == Some(&(n + m - 1));
            report.record(ok);
        }
    }
    Ok(report)
}

fn check_rank_slope(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut report = CheckReport::tally("rank-slope-law");
    for i in 0..20 {
        let p = [5u64, 7, 11, 13][i % 4];
        let mut tower = FieldTower::new(p)?;
        let mode = if i % 2 == 0 { ConvMode::InfInf } else { ConvMode::ZeroInf };
        let (f, g) = random_conv_pair(rng, &tower, 4, 4, 3, mode);
        let out = engine::convolve(&mut tower, &f, &g, mode, 8)?;
        let count = match mode {
            ConvMode::InfInf => g.push_index as i64 * f.degree() + f.push_index as i64 * g.degree(),
            ConvMode::ZeroInf => g.push_index as i64 * f.degree() - f.push_index as i64 * g.degree(),
        };
        let ok = if count <= 0 {
            out.rep.is_empty()
        } else {
            let expect_rank = f.unip * g.unip * count as u64;
            let de = f.degree() * g.degree();
            out.rep.rank() == expect_rank
                && out
                    .rep
                    .slopes()
                    .iter()
                    .all(|s| *s == num_rational::Ratio::new(de, count))
        };
        report.record(ok);
    }
    Ok(report)
}

fn check_swap(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut report = CheckReport::tally("swap-symmetry");
    for i in 0..10 {
        let p = [5u64, 7, 11, 13][i % 4];
        let mut tower = FieldTower::new(p)?;
        let (f, g) = random_conv_pair(rng, &tower, 3, 4, 2, ConvMode::InfInf);
        let ab = engine::lc_inf_inf(&mut tower, &f, &g, 8)?;
        let ba = engine::lc_inf_inf(&mut tower, &g, &f, 8)?;
        report.record(ab.rep == ba.rep);
    }
    Ok(report)
}

fn check_dual_path(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut report = CheckReport::tally("dual-path-fourier");
    for i in 0..10 {
        let p = [5u64, 7, 11, 13][i % 4];
        let mut tower = FieldTower::new(p)?;
        let f = random_single(rng, &tower, 4, 5, 3, false);
        let d = fourier::ft_0_inf_direct(&mut tower, &f, 8)?;
        let v = fourier::ft_0_inf_via_conv(&mut tower, &f, 8)?;
        report.record(d.rep == v.rep);
        let fi = random_single(rng, &tower, 3, 5, 3, true);
        let d2 = fourier::ft_inf_inf_direct(&mut tower, &fi, 8)?;
        let v2 = fourier::ft_inf_inf_via_conv(&mut tower, &fi, 8)?;
        report.record(d2.rep == v2.rep);
    }
    Ok(report)
}

fn check_gcd_reduction(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut report = CheckReport::tally("gcd-reduction");
    for i in 0..8 {
        let p = [5u64, 7, 11, 13][i % 4];
        let r = [2u64, 3][i % 2];
        if r % p == 0 {
            report.record(true);
            continue;
        }
        let mut tower = FieldTower::new(p)?;
        let (f, g) = random_conv_pair(rng, &tower, 2, 3, 2, ConvMode::InfInf);
        let mut fs = f.clone();
        fs.push_index *= r;
        let mut gs = g.clone();
        gs.push_index *= r;
        // direct call must be rejected by the coprimality gate
        let gate = engine::lc_inf_inf(&mut tower, &fs, &gs, 8).is_err();
        let wrapped = engine::convolve(&mut tower, &fs, &gs, ConvMode::InfInf, 8)?;
        let reduced = engine::lc_inf_inf(&mut tower, &f, &g, 8)?;
        let scaled = engine::scale_push_index(&mut tower, &reduced.rep, r)?;
        report.record(gate && wrapped.rep == scaled);
    }
    Ok(report)
}

fn check_restriction(rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    let mut report = CheckReport::tally("restriction-identity");
    for i in 0..5 {
        let p = [5u64, 7, 11][i % 3];
        let mut tower = FieldTower::new(p)?;
        let (f, g) = random_conv_pair(rng, &tower, 2, 3, 2, ConvMode::InfInf);
        let (out, stalks) =
            engine::stalk_decomposition(&mut tower, &f, &g, ConvMode::InfInf, 8)?;
        let mut restricted = Vec::new();
        for atom in out.rep.atoms() {
            restricted.extend(crate::rep::restrict_pushforward(&mut tower, atom, atom.push_index)?);
        }
        let lhs = crate::rep::LocalRep::new(crate::rep::Point::Inf, restricted);
        let rhs = crate::rep::LocalRep::new(crate::rep::Point::Inf, stalks);
        report.record(lhs == rhs);
    }
    Ok(report)
}

/// Run every check batch; deterministic across runs.
pub fn run() -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10c41c0);
    Ok(vec![
        check_kloosterman()?,
        check_quadratic_phase()?,
        check_worked_example()?,
        check_jordan()?,
        check_rank_slope(&mut rng)?,
        check_swap(&mut rng)?,
        check_dual_path(&mut rng)?,
        check_gcd_reduction(&mut rng)?,
        check_restriction(&mut rng)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selfcheck_is_green() {
        let reports = run().unwrap();
        for r in &reports {
            assert_eq!(r.failed, 0, "selfcheck group {} failed", r.name);
            assert!(r.passed > 0);
        }
    }
}
