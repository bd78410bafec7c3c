//! Line-oriented text formats for frames, models, morphisms and dense
//! valuations. `#` starts a comment; blank lines are ignored.
//!
//! ```text
//! frame chain            nframe n2               # predicate additions
//! worlds a b c           points x y              domain a = {d1,d2}
//! root a                 base x = {x,y} {y}      val P @ a = {(d1),(d1,d2)}
//! edges a->b b->c        base y = {y}            constdomain = {d1,d2}
//! val p = {a,c}          val p = {y}             map a -> u
//!                                                elem a : d1 -> e1
//! ```
//!
//! Dense valuations: `val p = finite{a.0.b, b}`, `val p = parity(b, even)`,
//! `val p = viapath{r.a, r.a.b}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::dense::{LetterClass, PatternValuation, StopWord};
use crate::error::{Error, Result};
use crate::kripke::{KripkeFrame, KripkeModel, World};
use crate::neighbourhood::{NFrame, NModel, PointSet};
use crate::predicate::{Domain, ElementMaps, Interpretation, PredKripkeFrame, PredKripkeModel, PredNFrame, PredNModel, Tuple};
use crate::semantics::Valuation;
use crate::syntax::Constant;

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// `{a, b}` → `["a", "b"]`.
pub fn parse_braced(line: usize, text: &str) -> Result<Vec<String>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err(line, format!("expected `{{...}}`, found `{text}`")))?;
    Ok(inner.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
}

/// Splits `{a,b} {c} {}` into its sets.
fn parse_braced_list(line: usize, text: &str) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let end = rest.find('}').ok_or_else(|| err(line, "unclosed `{`"))?;
        out.push(parse_braced(line, &rest[..=end])?);
        rest = rest[end + 1..].trim_start();
    }
    Ok(out)
}

/// `{(d1),(d1,d2),()}` → tuples.
pub fn parse_tuples(line: usize, text: &str) -> Result<Vec<Vec<String>>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err(line, format!("expected `{{(..), ..}}`, found `{text}`")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| err(line, format!("expected `(` in `{rest}`")))?;
        let end = body.find(')').ok_or_else(|| err(line, "unclosed `(`"))?;
        out.push(body[..end].split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
        rest = body[end + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(out)
}

/// `key = value` after the directive keyword.
fn split_eq(line: usize, text: &str) -> Result<(String, String)> {
    let (k, v) = text.split_once('=').ok_or_else(|| err(line, format!("expected `=` in `{text}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn lookup(line: usize, names: &[String], name: &str) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| err(line, format!("unknown world or point `{name}`")))
}

/// Predicate interpretation lines `val P @ w = {...}` collected per point.
#[derive(Debug, Default)]
struct PredLines {
    domains: Vec<(usize, String, Vec<String>)>,
    vals: Vec<(usize, String, String, Vec<Vec<String>>)>,
}

impl PredLines {
    fn interpretations(&self, names: &[String]) -> Result<Vec<Interpretation>> {
        let mut out: Vec<Interpretation> = vec![Interpretation::new(); names.len()];
        for (line, pred, at, ts) in &self.vals {
            let w = lookup(*line, names, at)?;
            let set = out[w].entry(pred.clone()).or_default();
            for t in ts {
                set.insert(t.iter().map(Constant::new).collect::<Tuple>());
            }
        }
        // a predicate named at some point is empty where it is not listed
        for (_, pred, _, _) in &self.vals {
            for i in out.iter_mut() {
                i.entry(pred.clone()).or_default();
            }
        }
        Ok(out)
    }

    fn domains(&self, names: &[String]) -> Result<Option<Vec<Domain>>> {
        if self.domains.is_empty() {
            return Ok(None);
        }
        let mut out: Vec<Option<Domain>> = vec![None; names.len()];
        for (line, at, elems) in &self.domains {
            let w = lookup(*line, names, at)?;
            if out[w].is_some() {
                return Err(err(*line, format!("second domain for `{at}`")));
            }
            out[w] = Some(elems.iter().map(Constant::new).collect());
        }
        out.into_iter()
            .enumerate()
            .map(|(w, d)| d.ok_or_else(|| err(0, format!("no domain for `{}`", names[w]))))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Handles `val ...` lines shared by the Kripke and neighbourhood formats.
fn val_line(
    line: usize,
    rest: &str,
    prop: &mut Vec<(usize, String, Vec<String>)>,
    pred: &mut PredLines,
) -> Result<()> {
    let (lhs, rhs) = split_eq(line, rest)?;
    if let Some((p, at)) = lhs.split_once('@') {
        pred.vals.push((line, p.trim().to_string(), at.trim().to_string(), parse_tuples(line, &rhs)?));
    } else {
        prop.push((line, lhs, parse_braced(line, &rhs)?));
    }
    Ok(())
}

fn prop_valuation(names: &[String], lines: &[(usize, String, Vec<String>)]) -> Result<Valuation> {
    let mut val = Valuation::new();
    for (line, p, members) in lines {
        let set = members.iter().map(|m| lookup(*line, names, m)).collect::<Result<BTreeSet<_>>>()?;
        if val.insert(p.clone(), set).is_some() {
            return Err(err(*line, format!("second valuation for `{p}`")));
        }
    }
    Ok(val)
}

/// A parsed Kripke frame file with whatever models it carries.
#[derive(Debug, Clone)]
pub struct KripkeDoc {
    pub name: Option<String>,
    pub frame: KripkeFrame,
    pub valuation: Valuation,
    pub domains: Option<Vec<Domain>>,
    pub interpretations: Vec<Interpretation>,
}

impl KripkeDoc {
    pub fn model(&self) -> Result<KripkeModel> {
        KripkeModel::new(self.frame.clone(), self.valuation.clone())
    }

    pub fn pred_frame(&self) -> Result<PredKripkeFrame> {
        let domains = self.domains.clone().ok_or_else(|| Error::Precondition("no `domain` lines".into()))?;
        PredKripkeFrame::new(self.frame.clone(), domains)
    }

    pub fn pred_model(&self) -> Result<PredKripkeModel> {
        PredKripkeModel::new(self.pred_frame()?, self.interpretations.clone())
    }

    pub fn is_predicate(&self) -> bool {
        self.domains.is_some()
    }
}

pub fn parse_kripke(text: &str) -> Result<KripkeDoc> {
    let mut name = None;
    let mut worlds: Option<(usize, Vec<String>)> = None;
    let mut root = None;
    let mut edges = Vec::new();
    let mut prop = Vec::new();
    let mut pred = PredLines::default();
    for (line, l) in content_lines(text) {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match kw {
            "frame" => name = Some(rest.to_string()),
            "worlds" => {
                if worlds.is_some() {
                    return Err(err(line, "second `worlds` line"));
                }
                let ws: Vec<String> = rest.split_whitespace().map(String::from).collect();
                let mut seen = BTreeSet::new();
                if let Some(d) = ws.iter().find(|w| !seen.insert(*w)) {
                    return Err(err(line, format!("duplicate world `{d}`")));
                }
                worlds = Some((line, ws));
            }
            "root" => root = Some((line, rest.to_string())),
            "edges" => {
                for e in rest.split_whitespace() {
                    let (a, b) = e.split_once("->").ok_or_else(|| err(line, format!("bad edge `{e}`")))?;
                    edges.push((line, a.to_string(), b.to_string()));
                }
            }
            "val" => val_line(line, rest, &mut prop, &mut pred)?,
            "domain" => {
                let (w, set) = split_eq(line, rest)?;
                pred.domains.push((line, w, parse_braced(line, &set)?));
            }
            _ => return Err(err(line, format!("unknown directive `{kw}`"))),
        }
    }
    let (wline, names) = worlds.ok_or_else(|| err(0, "missing `worlds` line"))?;
    let mut frame = KripkeFrame::new(names.clone()).map_err(|e| err(wline, e.to_string()))?;
    for (line, a, b) in &edges {
        frame.add_edge(lookup(*line, &names, a)?, lookup(*line, &names, b)?);
    }
    if let Some((line, r)) = root {
        frame = frame.with_root(lookup(line, &names, &r)?).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(KripkeDoc {
        name,
        valuation: prop_valuation(&names, &prop)?,
        domains: pred.domains(&names)?,
        interpretations: pred.interpretations(&names)?,
        frame,
    })
}

/// A parsed neighbourhood frame file.
#[derive(Debug, Clone)]
pub struct NDoc {
    pub name: Option<String>,
    pub frame: NFrame,
    pub valuation: Valuation,
    pub domain: Option<Domain>,
    pub interpretations: Vec<Interpretation>,
}

impl NDoc {
    pub fn model(&self) -> Result<NModel> {
        NModel::new(self.frame.clone(), self.valuation.clone())
    }

    pub fn pred_frame(&self) -> Result<PredNFrame> {
        let d = self.domain.clone().ok_or_else(|| Error::Precondition("no `constdomain` line".into()))?;
        PredNFrame::new(self.frame.clone(), d)
    }

    pub fn pred_model(&self) -> Result<PredNModel> {
        PredNModel::new(self.pred_frame()?, self.interpretations.clone())
    }
}

pub fn parse_nframe(text: &str) -> Result<NDoc> {
    let mut name = None;
    let mut points: Option<(usize, Vec<String>)> = None;
    let mut bases: Vec<(usize, String, Vec<Vec<String>>)> = Vec::new();
    let mut prop = Vec::new();
    let mut pred = PredLines::default();
    let mut domain = None;
    for (line, l) in content_lines(text) {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match kw {
            "nframe" => name = Some(rest.to_string()),
            "points" => {
                if points.is_some() {
                    return Err(err(line, "second `points` line"));
                }
                points = Some((line, rest.split_whitespace().map(String::from).collect()));
            }
            "base" => {
                let (x, sets) = split_eq(line, rest)?;
                bases.push((line, x, parse_braced_list(line, &sets)?));
            }
            "val" => val_line(line, rest, &mut prop, &mut pred)?,
            "constdomain" | "constdomain=" => {
                let rhs = rest.trim_start_matches('=').trim();
                domain = Some(parse_braced(line, rhs)?.into_iter().map(Constant::new).collect::<Domain>());
            }
            _ => return Err(err(line, format!("unknown directive `{kw}`"))),
        }
    }
    let (pline, names) = points.ok_or_else(|| err(0, "missing `points` line"))?;
    let mut base: Vec<Option<Vec<PointSet>>> = vec![None; names.len()];
    for (line, x, sets) in &bases {
        let i = lookup(*line, &names, x)?;
        if base[i].is_some() {
            return Err(err(*line, format!("second base for `{x}`")));
        }
        base[i] = Some(
            sets.iter()
                .map(|s| s.iter().map(|y| lookup(*line, &names, y)).collect::<Result<PointSet>>())
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let base = base
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(pline, format!("no base for `{}`", names[i]))))
        .collect::<Result<Vec<_>>>()?;
    let frame = NFrame::new(names.clone(), base).map_err(|e| err(pline, e.to_string()))?;
    Ok(NDoc {
        name,
        valuation: prop_valuation(&names, &prop)?,
        interpretations: pred.interpretations(&names)?,
        domain,
        frame,
    })
}

/// A world map with optional per-point element maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDoc {
    pub phi0: Vec<World>,
    pub phi1: Option<ElementMaps>,
}

/// `map a -> u` lines for every source point, and `elem a : d -> e` lines
/// for predicate morphisms.
pub fn parse_map(text: &str, source: &[String], target: &[String]) -> Result<MapDoc> {
    let mut phi0: Vec<Option<World>> = vec![None; source.len()];
    let mut phi1: ElementMaps = vec![BTreeMap::new(); source.len()];
    let mut any_elem = false;
    for (line, l) in content_lines(text) {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match kw {
            "map" => {
                let (a, b) = rest.split_once("->").ok_or_else(|| err(line, "expected `map a -> b`"))?;
                let i = lookup(line, source, a.trim())?;
                if phi0[i].replace(lookup(line, target, b.trim())?).is_some() {
                    return Err(err(line, format!("`{}` mapped twice", a.trim())));
                }
            }
            "elem" => {
                let (a, rest) = rest.split_once(':').ok_or_else(|| err(line, "expected `elem a : d -> e`"))?;
                let (d, e) = rest.split_once("->").ok_or_else(|| err(line, "expected `elem a : d -> e`"))?;
                let i = lookup(line, source, a.trim())?;
                phi1[i].insert(Constant::new(d.trim()), Constant::new(e.trim()));
                any_elem = true;
            }
            _ => return Err(err(line, format!("unknown directive `{kw}`"))),
        }
    }
    let phi0 = phi0
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| err(0, format!("`{}` is not mapped", source[i]))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MapDoc { phi0, phi1: any_elem.then_some(phi1) })
}

/// Letter classes for the dense evaluator.
pub fn parse_pattern_valuation(text: &str, frame: &KripkeFrame) -> Result<PatternValuation> {
    let mut val = PatternValuation::new();
    for (line, l) in content_lines(text) {
        let rest = l.strip_prefix("val").ok_or_else(|| err(line, "expected `val p = ...`"))?;
        let (p, rhs) = split_eq(line, rest)?;
        let class = if let Some(body) = rhs.strip_prefix("finite") {
            let words = parse_braced(line, body)?
                .iter()
                .map(|w| StopWord::parse(w, frame))
                .collect::<Result<BTreeSet<_>>>()
                .map_err(|e| err(line, e.to_string()))?;
            LetterClass::FiniteSet(words)
        } else if let Some(body) = rhs.strip_prefix("parity") {
            let args = body
                .trim()
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| err(line, "expected `parity(letter, even|odd)`"))?;
            let (letter, parity) = args.split_once(',').ok_or_else(|| err(line, "expected two arguments"))?;
            let even = match parity.trim() {
                "even" => true,
                "odd" => false,
                other => return Err(err(line, format!("expected `even` or `odd`, found `{other}`"))),
            };
            LetterClass::ZeroParityBeforeLetter {
                letter: frame.world(letter.trim()).map_err(|e| err(line, e.to_string()))?,
                even,
            }
        } else if let Some(body) = rhs.strip_prefix("viapath") {
            let paths = parse_braced(line, body)?
                .iter()
                .map(|p| p.split('.').map(|w| frame.world(w.trim())).collect::<Result<Vec<_>>>())
                .collect::<Result<BTreeSet<_>>>()
                .map_err(|e| err(line, e.to_string()))?;
            LetterClass::PathFactored(paths)
        } else {
            return Err(err(line, format!("unknown letter class `{rhs}`")));
        };
        val.insert(p, class);
    }
    Ok(val)
}

fn write_prop_valuation(out: &mut String, names: &[String], val: &Valuation) {
    for (p, set) in val {
        let members: Vec<&str> = set.iter().map(|&w| names[w].as_str()).collect();
        let _ = writeln!(out, "val {p} = {{{}}}", members.join(","));
    }
}

fn write_interpretations(out: &mut String, names: &[String], interps: &[Interpretation]) {
    for (w, interp) in interps.iter().enumerate() {
        for (p, set) in interp {
            let ts: Vec<String> = set
                .iter()
                .map(|t| format!("({})", t.iter().map(Constant::name).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(out, "val {p} @ {} = {{{}}}", names[w], ts.join(","));
        }
    }
}

fn show_domain(d: &Domain) -> String {
    format!("{{{}}}", d.iter().map(Constant::name).collect::<Vec<_>>().join(","))
}

pub fn write_kripke(frame: &KripkeFrame, val: &Valuation) -> String {
    let mut out = format!("{frame}\n");
    write_prop_valuation(&mut out, frame.names(), val);
    out
}

pub fn write_pred_kripke(model: &PredKripkeModel) -> String {
    let frame = &model.frame.frame;
    let mut out = format!("{frame}\n");
    for w in frame.worlds() {
        let _ = writeln!(out, "domain {} = {}", frame.name(w), show_domain(model.frame.domain(w)));
    }
    write_interpretations(&mut out, frame.names(), model.interpretations());
    out
}

pub fn write_nframe(frame: &NFrame, val: &Valuation) -> String {
    let mut out = format!("{frame}\n");
    write_prop_valuation(&mut out, frame.names(), val);
    out
}

pub fn write_pred_nframe(model: &PredNModel) -> String {
    let frame = &model.frame.space;
    let mut out = format!("{frame}\nconstdomain = {}\n", show_domain(&model.frame.domain));
    write_interpretations(&mut out, frame.names(), model.interpretations());
    out
}

pub fn write_map(source: &[String], target: &[String], phi0: &[World], phi1: Option<&ElementMaps>) -> String {
    let mut out = String::new();
    for (i, &w) in phi0.iter().enumerate() {
        let _ = writeln!(out, "map {} -> {}", source[i], target[w]);
    }
    for (i, m) in phi1.into_iter().flatten().enumerate() {
        for (d, e) in m {
            let _ = writeln!(out, "elem {} : {} -> {}", source[i], d.name(), e.name());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::next_frame;
    use crate::predicate::barcan_counter_witness;

    const CHAIN: &str = "frame chain\nworlds a b c  # three\nroot a\nedges a->b\nedges b->c\nval p = {a,c}\n";

    #[test]
    fn kripke_round_trip() {
        let doc = parse_kripke(CHAIN).unwrap();
        assert_eq!(doc.name.as_deref(), Some("chain"));
        assert_eq!(doc.frame.edge_count(), 2);
        assert_eq!(doc.valuation["p"], BTreeSet::from([0, 2]));
        let again = parse_kripke(&write_kripke(&doc.frame, &doc.valuation)).unwrap();
        assert_eq!(again.frame, doc.frame);
        assert_eq!(again.valuation, doc.valuation);
    }

    #[test]
    fn kripke_errors_carry_lines() {
        assert!(matches!(parse_kripke("worlds a a"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_kripke("worlds a\nedges a->z"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse_kripke("worlds a\nfoo"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse_kripke("worlds a b\nroot a"), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn predicate_round_trip() {
        let m = barcan_counter_witness();
        let text = write_pred_kripke(&m);
        let back = parse_kripke(&text).unwrap().pred_model().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn nframe_round_trip() {
        let text = "nframe n\npoints x y\nbase x = {x,y} {y}\nbase y = {y}\nval p = {y}\nconstdomain = {d,e}\nval P @ x = {(d)}\nval Q @ y = {()}\n";
        let doc = parse_nframe(text).unwrap();
        assert_eq!(doc.frame.base(0).len(), 2);
        let pm = doc.pred_model().unwrap();
        let back = parse_nframe(&write_pred_nframe(&pm)).unwrap();
        assert_eq!(back.pred_model().unwrap(), pm);
        let nm = parse_nframe(&write_nframe(&doc.frame, &doc.valuation)).unwrap();
        assert_eq!(nm.frame, doc.frame);
        assert!(parse_nframe("points x\nbase x = {x} {y}").is_err());
    }

    #[test]
    fn tuples_and_maps() {
        assert_eq!(parse_tuples(1, "{(a), (a,b), ()}").unwrap(), vec![vec!["a"], vec!["a", "b"], vec![]]);
        let names = vec!["a".to_string(), "b".to_string()];
        let tgt = vec!["u".to_string()];
        let m = parse_map("map a -> u\nmap b -> u\nelem a : d -> e", &names, &tgt).unwrap();
        assert_eq!(m.phi0, vec![0, 0]);
        assert_eq!(m.phi1.as_ref().unwrap()[0][&Constant::new("d")], Constant::new("e"));
        let back = parse_map(&write_map(&names, &tgt, &m.phi0, m.phi1.as_ref()), &names, &tgt).unwrap();
        assert_eq!(back, m);
        assert!(parse_map("map a -> u", &names, &tgt).is_err());
    }

    #[test]
    fn pattern_valuations() {
        let g = next_frame(3);
        let v = parse_pattern_valuation("val p = parity(1, even)\nval q = finite{0.1, 2}\nval r = viapath{root.1}", &g)
            .unwrap();
        assert_eq!(v.get("p").unwrap(), &LetterClass::ZeroParityBeforeLetter { letter: 1, even: true });
        assert!(matches!(v.get("q").unwrap(), LetterClass::FiniteSet(s) if s.len() == 2));
        assert!(matches!(v.get("r").unwrap(), LetterClass::PathFactored(s) if s.contains(&vec![0, 1])));
        assert!(parse_pattern_valuation("val p = parity(1, sometimes)", &g).is_err());
    }
}
