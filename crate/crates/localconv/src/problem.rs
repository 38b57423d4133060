//! Problem files, canonical JSON output documents, and the representation
//! document consumed by the invariants command.
//!
//! A problem file looks like
//!
//! ```json
//! {
//!   "p": 7,
//!   "F": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1},
//!   "G": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1},
//!   "guard": 8,
//!   "moduli": {"2": [1, 0, 1]}
//! }
//! ```
//!
//! Polynomial coefficients are residues (plain integers) or element
//! literals `"[c0,c1,...]@r"`. `G`, `guard` and `moduli` are optional; the
//! moduli of every level that appears in an output are echoed in its header
//! so element literals can be re-interpreted without re-deriving the tower.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::engine::EngineOutput;
use crate::error::{Error, Result};
use crate::field::{FieldTower, FqElement};
use crate::rep::{Atom, InputRep, LocalRep, Point, PsiArg, TameChar};

#[derive(Debug, Clone)]
pub struct RawRep {
    pub a: u64,
    pub f: Vec<(i64, Value)>,
    pub chi: TameChar,
    pub n: u64,
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub p: u64,
    pub moduli: Vec<(usize, Vec<u64>)>,
    pub f: RawRep,
    pub g: Option<RawRep>,
    pub guard: Option<i64>,
}

fn field<'v>(obj: &'v Value, key: &str, path: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field `{}.{}`", path, key)))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::Parse(format!("field `{}` must be a non-negative integer", path)))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::Parse(format!("field `{}` must be an integer", path)))
}

fn parse_raw_rep(v: &Value, path: &str) -> Result<RawRep> {
    let a = as_u64(field(v, "a", path)?, &format!("{}.a", path))?;
    let n = as_u64(field(v, "n", path)?, &format!("{}.n", path))?;
    let chi_str = field(v, "chi", path)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("field `{}.chi` must be a string u/v", path)))?;
    let chi: TameChar = chi_str.parse()?;
    let f_val = field(v, "f", path)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("field `{}.f` must be an array of [exp, coeff]", path)))?;
    let mut f = Vec::with_capacity(f_val.len());
    for (i, term) in f_val.iter().enumerate() {
        let pair = term.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
            Error::Parse(format!("entry `{}.f[{}]` must be a pair [exp, coeff]", path, i))
        })?;
        let e = as_i64(&pair[0], &format!("{}.f[{}][0]", path, i))?;
        f.push((e, pair[1].clone()));
    }
    Ok(RawRep { a, f, chi, n })
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid JSON: {}", e)))?;
    let p = as_u64(field(&v, "p", "")?, "p")?;
    let f = parse_raw_rep(field(&v, "F", "")?, "F")?;
    let g = match v.get("G") {
        Some(gv) => Some(parse_raw_rep(gv, "G")?),
        None => None,
    };
    let guard = match v.get("guard") {
        Some(gv) => Some(as_i64(gv, "guard")?),
        None => None,
    };
    let mut moduli = Vec::new();
    if let Some(mv) = v.get("moduli") {
        let obj = mv
            .as_object()
            .ok_or_else(|| Error::Parse("field `moduli` must be an object".into()))?;
        for (k, coeffs) in obj {
            let level: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("modulus key `{}` is not a level", k)))?;
            let arr = coeffs
                .as_array()
                .ok_or_else(|| Error::Parse(format!("modulus for level {} must be an array", level)))?;
            let mut m = Vec::with_capacity(arr.len());
            for c in arr {
                m.push(as_u64(c, &format!("moduli.{}", k))?);
            }
            moduli.push((level, m));
        }
    }
    moduli.sort_unstable();
    Ok(ProblemFile { p, moduli, f, g, guard })
}

impl ProblemFile {
    pub fn build_tower(&self) -> Result<FieldTower> {
        let mut tower = FieldTower::new(self.p)?;
        for (level, modulus) in &self.moduli {
            tower.ensure_level_with_modulus(*level, modulus.clone())?;
        }
        Ok(tower)
    }

    pub fn resolve_f(&self, tower: &mut FieldTower) -> Result<InputRep> {
        resolve_rep(tower, &self.f, "F")
    }

    pub fn resolve_g(&self, tower: &mut FieldTower) -> Result<InputRep> {
        let g = self
            .g
            .as_ref()
            .ok_or_else(|| Error::Parse("missing field `G` (required by this command)".into()))?;
        resolve_rep(tower, g, "G")
    }
}

fn resolve_rep(tower: &mut FieldTower, raw: &RawRep, path: &str) -> Result<InputRep> {
    let mut poly = Vec::with_capacity(raw.f.len());
    for (i, (e, coeff)) in raw.f.iter().enumerate() {
        let elem = parse_element(tower, coeff, &format!("{}.f[{}][1]", path, i))?;
        poly.push((*e, elem));
    }
    InputRep::new(tower, raw.a, poly, raw.chi, raw.n)
}

/// A coefficient: plain residue or `[c0,...]@r` literal.
pub fn parse_element(tower: &mut FieldTower, v: &Value, path: &str) -> Result<FqElement> {
    if let Some(n) = v.as_i64() {
        return Ok(tower.scalar(n));
    }
    let s = v.as_str().ok_or_else(|| {
        Error::Parse(format!("field `{}` must be an integer or an element literal", path))
    })?;
    parse_element_literal(tower, s, path)
}

pub fn parse_element_literal(tower: &mut FieldTower, s: &str, path: &str) -> Result<FqElement> {
    let bad = || Error::Parse(format!("field `{}`: malformed element literal `{}`", path, s));
    let (body, level) = s.split_once('@').ok_or_else(bad)?;
    let level: usize = level.trim().parse().map_err(|_| bad())?;
    let body = body.trim();
    if !body.starts_with('[') || !body.ends_with(']') {
        return Err(bad());
    }
    let inner = &body[1..body.len() - 1];
    let mut coeffs = Vec::new();
    for piece in inner.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        coeffs.push(piece.parse::<u64>().map_err(|_| bad())?);
    }
    tower.ensure_level(level)?;
    tower.from_coeffs(level, coeffs)
}

// ---------------------------------------------------------------------------
// output documents
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct AtomDoc {
    #[serde(rename = "N")]
    pub n: u64,
    pub psi: Vec<(i64, String)>,
    pub chi: String,
    pub unip: u64,
}

#[derive(Debug, Serialize)]
pub struct TraceDoc {
    pub h: Vec<(i64, String)>,
    pub h_tilde: Vec<(i64, String)>,
    pub roots: Vec<String>,
    pub lifts: Vec<String>,
    pub h_values: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct OutputDoc {
    pub p: u64,
    pub moduli: BTreeMap<String, Vec<u64>>,
    pub command: String,
    pub guard: i64,
    pub precision: i64,
    pub point: String,
    pub atoms: Vec<AtomDoc>,
    pub rank: u64,
    pub swan: i64,
    pub slopes: Vec<String>,
    /// Certified strict lower bounds: each lifted root's residual valuation
    /// exceeds the listed value.
    pub residual_valuations: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDoc>,
}

fn atom_doc(tower: &FieldTower, atom: &Atom) -> AtomDoc {
    AtomDoc {
        n: atom.push_index,
        psi: atom
            .psi
            .terms()
            .iter()
            .map(|(e, v)| (*e, tower.compress(v).literal()))
            .collect(),
        chi: atom.tame.to_string(),
        unip: atom.unip,
    }
}

fn moduli_for_levels(
    tower: &FieldTower,
    levels: impl Iterator<Item = usize>,
) -> BTreeMap<String, Vec<u64>> {
    let mut out = BTreeMap::new();
    let mut wanted: Vec<usize> = levels.collect();
    wanted.push(1);
    wanted.sort_unstable();
    wanted.dedup();
    for l in wanted {
        if tower.has_level(l) {
            out.insert(l.to_string(), tower.modulus(l).to_vec());
        }
    }
    out
}

pub fn rep_moduli(tower: &FieldTower, rep: &LocalRep) -> BTreeMap<String, Vec<u64>> {
    let levels = rep
        .atoms()
        .iter()
        .flat_map(|a| a.psi.terms().iter().map(|(_, v)| v.level()));
    moduli_for_levels(tower, levels)
}

pub fn output_doc(
    tower: &FieldTower,
    command: &str,
    guard: i64,
    out: &EngineOutput,
    with_trace: bool,
) -> OutputDoc {
    let atoms: Vec<AtomDoc> = out.rep.atoms().iter().map(|a| atom_doc(tower, a)).collect();
    let mut levels: Vec<usize> = out
        .rep
        .atoms()
        .iter()
        .flat_map(|a| a.psi.terms().iter().map(|(_, v)| v.level()))
        .collect();
    if with_trace {
        levels.extend(out.roots.iter().map(|r| r.level()));
    }
    let trace = if with_trace {
        Some(TraceDoc {
            h: out
                .h_poly
                .as_ref()
                .map(|h| h.terms().map(|(e, c)| (e, c.to_string())).collect())
                .unwrap_or_default(),
            h_tilde: out
                .h_tilde
                .iter()
                .map(|(e, v)| (*e, tower.compress(v).literal()))
                .collect(),
            roots: out.roots.iter().map(|r| r.literal()).collect(),
            lifts: out.lifts.iter().map(|l| l.lift.to_string()).collect(),
            h_values: out.lifts.iter().map(|l| l.h.to_string()).collect(),
        })
    } else {
        None
    };
    OutputDoc {
        p: tower.p(),
        moduli: moduli_for_levels(tower, levels.into_iter()),
        command: command.to_string(),
        guard,
        precision: out.precision,
        point: out.rep.point.to_string(),
        atoms,
        rank: out.rep.rank(),
        swan: out.rep.swan(),
        slopes: out
            .rep
            .slopes()
            .iter()
            .map(|s| format!("{}/{}", s.numer(), s.denom()))
            .collect(),
        residual_valuations: out.lifts.iter().map(|l| l.residual_val_exceeds).collect(),
        trace,
    }
}

pub fn to_json(doc: &OutputDoc, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(doc).expect("output document serializes")
    } else {
        serde_json::to_string(doc).expect("output document serializes")
    }
}

/// Human-readable report.
pub fn render_report(doc: &OutputDoc) -> String {
    let mut s = String::new();
    s.push_str(&format!("command: {}   p = {}\n", doc.command, doc.p));
    s.push_str(&format!(
        "rank {}   swan {}   precision {} (guard {})\n",
        doc.rank, doc.swan, doc.precision, doc.guard
    ));
    if doc.atoms.is_empty() {
        s.push_str("the representation is zero\n");
        return s;
    }
    s.push_str(&format!("atoms at {}:\n", doc.point));
    for (atom, slope) in doc.atoms.iter().zip(doc.slopes.iter()) {
        let psi = if atom.psi.is_empty() {
            "0".to_string()
        } else {
            atom.psi
                .iter()
                .map(|(e, v)| format!("{}*t^{}", v, e))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        s.push_str(&format!(
            "  [{}]_* ( psi({}) (x) chi = {} (x) U_{} )   slope {}\n",
            atom.n, psi, atom.chi, atom.unip, slope
        ));
    }
    s
}

/// Parse a representation document ({p, moduli, point, atoms}) back into a
/// tower and a LocalRep, for the invariants command.
pub fn parse_rep_doc(text: &str) -> Result<(FieldTower, LocalRep)> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid JSON: {}", e)))?;
    let p = as_u64(field(&v, "p", "")?, "p")?;
    let mut tower = FieldTower::new(p)?;
    if let Some(mv) = v.get("moduli") {
        let obj = mv
            .as_object()
            .ok_or_else(|| Error::Parse("field `moduli` must be an object".into()))?;
        let mut pairs: Vec<(usize, Vec<u64>)> = Vec::new();
        for (k, coeffs) in obj {
            let level: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("modulus key `{}` is not a level", k)))?;
            let arr = coeffs
                .as_array()
                .ok_or_else(|| Error::Parse("modulus must be an array".into()))?;
            let mut m = Vec::new();
            for c in arr {
                m.push(as_u64(c, "moduli")?);
            }
            pairs.push((level, m));
        }
        pairs.sort_unstable();
        for (level, m) in pairs {
            tower.ensure_level_with_modulus(level, m)?;
        }
    }
    let point = match field(&v, "point", "")?.as_str() {
        Some("inf") => Point::Inf,
        Some("0") => Point::Zero,
        _ => return Err(Error::Parse("field `point` must be \"inf\" or \"0\"".into())),
    };
    let atoms_v = field(&v, "atoms", "")?
        .as_array()
        .ok_or_else(|| Error::Parse("field `atoms` must be an array".into()))?;
    let mut atoms = Vec::with_capacity(atoms_v.len());
    for (i, av) in atoms_v.iter().enumerate() {
        let path = format!("atoms[{}]", i);
        let n = as_u64(field(av, "N", &path)?, &format!("{}.N", path))?;
        let unip = as_u64(field(av, "unip", &path)?, &format!("{}.unip", path))?;
        let chi: TameChar = field(av, "chi", &path)?
            .as_str()
            .ok_or_else(|| Error::Parse(format!("field `{}.chi` must be a string", path)))?
            .parse()?;
        let psi_v = field(av, "psi", &path)?
            .as_array()
            .ok_or_else(|| Error::Parse(format!("field `{}.psi` must be an array", path)))?;
        let mut raw = Vec::with_capacity(psi_v.len());
        for (j, term) in psi_v.iter().enumerate() {
            let pair = term.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::Parse(format!("entry `{}.psi[{}]` must be a pair", path, j))
            })?;
            let e = as_i64(&pair[0], &format!("{}.psi[{}][0]", path, j))?;
            let elem = parse_element(&mut tower, &pair[1], &format!("{}.psi[{}][1]", path, j))?;
            raw.push((e, elem));
        }
        let psi = PsiArg::from_raw_terms(raw, &tower);
        atoms.push(Atom { push_index: n, psi, tame: chi, unip });
    }
    Ok((tower, LocalRep::new(point, atoms)))
}

/// Normalized echo of a parsed problem (used to check that parsing is
/// idempotent after one normalization pass).
pub fn canonical_problem_json(file: &ProblemFile, tower: &mut FieldTower) -> Result<String> {
    #[derive(Serialize)]
    struct RepOut {
        a: u64,
        f: Vec<(i64, String)>,
        chi: String,
        n: u64,
    }
    #[derive(Serialize)]
    struct ProblemOut {
        p: u64,
        #[serde(rename = "F")]
        f: RepOut,
        #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
        g: Option<RepOut>,
        #[serde(skip_serializing_if = "Option::is_none")]
        guard: Option<i64>,
        #[serde(skip_serializing_if = "BTreeMap::is_empty")]
        moduli: BTreeMap<String, Vec<u64>>,
    }
    let render = |rep: &InputRep, tower: &FieldTower| RepOut {
        a: rep.push_index,
        f: rep
            .poly
            .iter()
            .map(|(e, v)| (*e, tower.compress(v).literal()))
            .collect(),
        chi: rep.tame.to_string(),
        n: rep.unip,
    };
    let f = file.resolve_f(tower)?;
    let g = match &file.g {
        Some(_) => Some(file.resolve_g(tower)?),
        None => None,
    };
    let levels = f
        .poly
        .iter()
        .map(|(_, v)| v.level())
        .chain(g.iter().flat_map(|g| g.poly.iter().map(|(_, v)| v.level())));
    let moduli = moduli_for_levels(tower, levels)
        .into_iter()
        .filter(|(k, _)| k != "1")
        .collect();
    let out = ProblemOut {
        p: file.p,
        f: render(&f, tower),
        g: g.as_ref().map(|g| render(g, tower)),
        guard: file.guard,
        moduli,
    };
    Ok(serde_json::to_string(&out).expect("problem echo serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KL2: &str = r#"{"p": 7, "F": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1},
                          "G": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1}}"#;

    #[test]
    fn parse_minimal_problem() {
        let pf = parse_problem(KL2).unwrap();
        assert_eq!(pf.p, 7);
        let mut tower = pf.build_tower().unwrap();
        let f = pf.resolve_f(&mut tower).unwrap();
        let g = pf.resolve_g(&mut tower).unwrap();
        assert_eq!(f.degree(), 1);
        assert_eq!(g.push_index, 1);
    }

    #[test]
    fn parse_rejects_bad_chi_denominator() {
        let text = r#"{"p": 5, "F": {"a": 1, "f": [[1, 1]], "chi": "1/5", "n": 1}}"#;
        let pf = parse_problem(text).unwrap();
        let mut tower = pf.build_tower().unwrap();
        assert!(matches!(pf.resolve_f(&mut tower), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn parse_rejects_zero_leading_coefficient() {
        let text = r#"{"p": 7, "F": {"a": 1, "f": [[2, 0], [0, 3]], "chi": "0/1", "n": 1}}"#;
        let pf = parse_problem(text).unwrap();
        let mut tower = pf.build_tower().unwrap();
        let err = pf.resolve_f(&mut tower).unwrap_err();
        match err {
            Error::HypothesisViolation(msg) => assert!(msg.contains("degree"), "{}", msg),
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn parse_element_literals() {
        let text = r#"{"p": 5, "F": {"a": 1, "f": [[1, "[2,1]@2"], [0, 3]], "chi": "0/1", "n": 2}}"#;
        let pf = parse_problem(text).unwrap();
        let mut tower = pf.build_tower().unwrap();
        let f = pf.resolve_f(&mut tower).unwrap();
        assert_eq!(f.coeff_level(), 2);
        assert_eq!(f.leading_coeff().literal(), "[2,1]@2");
    }

    #[test]
    fn parse_diagnostics_name_the_field() {
        let text = r#"{"p": 7, "F": {"a": 1, "chi": "0/1", "n": 1}}"#;
        match parse_problem(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("F.f"), "{}", msg),
            other => panic!("unexpected {:?}", other),
        }
        let text2 = r#"{"p": 7, "F": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1}}"#;
        let pf = parse_problem(text2).unwrap();
        let mut tower = pf.build_tower().unwrap();
        match pf.resolve_g(&mut tower) {
            Err(Error::Parse(msg)) => assert!(msg.contains('G'), "{}", msg),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn moduli_roundtrip_through_tower() {
        let text = r#"{"p": 5, "moduli": {"2": [2, 0, 1]},
                       "F": {"a": 1, "f": [[1, "[0,1]@2"]], "chi": "0/1", "n": 1}}"#;
        let pf = parse_problem(text).unwrap();
        let mut tower = pf.build_tower().unwrap();
        assert!(tower.has_level(2));
        let f = pf.resolve_f(&mut tower).unwrap();
        assert_eq!(f.leading_coeff().literal(), "[0,1]@2");
        // x^2 + 1 is reducible over F_5 and must be rejected
        let bad = r#"{"p": 5, "moduli": {"2": [1, 0, 1]},
                      "F": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1}}"#;
        let pf2 = parse_problem(bad).unwrap();
        assert!(pf2.build_tower().is_err());
    }

    #[test]
    fn canonical_echo_is_idempotent() {
        let text = r#"{"p": 7, "guard": 10,
                       "F": {"a": 2, "f": [[0, 4], [3, 2]], "chi": "7/6", "n": 2},
                       "G": {"a": 1, "f": [[1, -1]], "chi": "0/1", "n": 1}}"#;
        let pf = parse_problem(text).unwrap();
        let mut tower = pf.build_tower().unwrap();
        let once = canonical_problem_json(&pf, &mut tower).unwrap();
        let pf2 = parse_problem(&once).unwrap();
        let mut tower2 = pf2.build_tower().unwrap();
        let twice = canonical_problem_json(&pf2, &mut tower2).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rep_doc_roundtrip() {
        let mut tower = FieldTower::new(7).unwrap();
        let f = InputRep::new(&tower, 1, vec![(1, tower.one(1))], TameChar::zero(), 1).unwrap();
        let out = crate::engine::lc_inf_inf(&mut tower, &f.clone(), &f, 8).unwrap();
        let doc = output_doc(&tower, "conv-inf-inf", 8, &out, false);
        let json = to_json(&doc, false);
        let (_, rep) = parse_rep_doc(&json).unwrap();
        assert_eq!(rep, out.rep);
        assert_eq!(rep.rank(), 2);
    }
}
