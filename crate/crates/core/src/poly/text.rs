use std::fmt::Write;

use num_complex::Complex64 as C64;

use super::coefficient::{Coefficient, Grad};
use super::hampoly::HamPoly;
use super::multi_index::MultiIndex;
use super::window::{Site, SiteWindow};
use super::PolyError;

/// Line-oriented dump: a `window lo hi` header, then one term per line as
/// `site:(n,n') … ; re im ; grad site:re,im …`. Floats use the shortest
/// representation that round-trips.
pub fn to_text(h: &HamPoly) -> String {
    let mut out = String::new();
    let w = h.window();
    writeln!(out, "window {} {}", w.lo(), w.hi()).unwrap();
    for (n, c) in h.iter() {
        let idx: Vec<String> = n
            .entries()
            .iter()
            .map(|e| format!("{}:({},{})", e.site, e.n, e.nbar))
            .collect();
        write!(out, "{} ; {:?} {:?} ; grad", idx.join(" "), c.value.re, c.value.im).unwrap();
        for (s, g) in c.grad.entries() {
            write!(out, " {}:{:?},{:?}", s, g.re, g.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_text(text: &str) -> Result<HamPoly, PolyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| PolyError::Parse {
        line,
        msg: msg.to_string(),
    };

    let (hl, header) = lines.next().ok_or_else(|| err(1, "missing window header"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "window" {
        return Err(err(hl, "expected `window lo hi`"));
    }
    let lo: Site = parts[1].parse().map_err(|_| err(hl, "bad window bound"))?;
    let hi: Site = parts[2].parse().map_err(|_| err(hl, "bad window bound"))?;
    let window = SiteWindow::new(lo, hi)?;

    let mut terms = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(ln, "expected three `;`-separated fields"));
        }
        let mut entries = Vec::new();
        for tok in fields[0].split_whitespace() {
            let (site, pair) = tok.split_once(':').ok_or_else(|| err(ln, "bad exponent"))?;
            let pair = pair
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| err(ln, "bad exponent pair"))?;
            let (a, b) = pair.split_once(',').ok_or_else(|| err(ln, "bad exponent pair"))?;
            let site: Site = site.parse().map_err(|_| err(ln, "bad site"))?;
            if !window.contains(site) {
                return Err(err(ln, "site outside window"));
            }
            let a: u16 = a.parse().map_err(|_| err(ln, "bad exponent"))?;
            let b: u16 = b.parse().map_err(|_| err(ln, "bad exponent"))?;
            entries.push((site, a, b));
        }
        let value: Vec<&str> = fields[1].split_whitespace().collect();
        if value.len() != 2 {
            return Err(err(ln, "expected `re im`"));
        }
        let re: f64 = value[0].parse().map_err(|_| err(ln, "bad real part"))?;
        let im: f64 = value[1].parse().map_err(|_| err(ln, "bad imaginary part"))?;
        let mut grad_toks = fields[2].split_whitespace();
        if grad_toks.next() != Some("grad") {
            return Err(err(ln, "expected `grad`"));
        }
        let mut grad = Vec::new();
        for tok in grad_toks {
            let (site, val) = tok.split_once(':').ok_or_else(|| err(ln, "bad gradient entry"))?;
            let (gr, gi) = val.split_once(',').ok_or_else(|| err(ln, "bad gradient entry"))?;
            grad.push((
                site.parse::<Site>().map_err(|_| err(ln, "bad gradient site"))?,
                C64::new(
                    gr.parse().map_err(|_| err(ln, "bad gradient value"))?,
                    gi.parse().map_err(|_| err(ln, "bad gradient value"))?,
                ),
            ));
        }
        terms.push((
            MultiIndex::new(entries),
            Coefficient::new(C64::new(re, im), Grad::from_entries(grad)),
        ));
    }
    Ok(HamPoly::from_terms(window, terms))
}
