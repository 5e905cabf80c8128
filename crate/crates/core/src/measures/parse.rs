use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::scalar::parse_rational;
use super::IncrementLaw;
use crate::error::{Error, Result};

/// Parse a distribution spec such as `lat:pmf(d=1;1:0.5,2:0.5)`,
/// `int:sympow(a=1.5)` or `cont:pareto(alpha=0.75,scale=1)`.
///
/// Whitespace is ignored. Masses may be decimals or fractions (`1/3`) and are
/// kept exactly. An explicit `d=` must equal the gcd of the support.
pub fn parse_law(spec: &str) -> Result<IncrementLaw> {
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let fail = |reason: &str| Error::Parse { spec: compact.clone(), reason: reason.to_string() };

    let (kind, family) = compact.split_once(':').ok_or_else(|| fail("expected `kind:family`"))?;
    let open = family.find('(').ok_or_else(|| fail("expected `(`"))?;
    if !family.ends_with(')') {
        return Err(fail("expected closing `)`"));
    }
    let name = &family[..open];
    let body = &family[open + 1..family.len() - 1];

    let law = match (kind, name) {
        ("lat" | "int", "pmf") => {
            let atoms = parse_pmf_body(body).map_err(|r| fail(&r))?;
            let declared = atoms.0;
            let law =
                if kind == "lat" { IncrementLaw::lattice_pmf(&atoms.1)? } else { IncrementLaw::signed_pmf(&atoms.1)? };
            if let Some(d) = declared {
                let span = law.span().unwrap_or(0) as f64;
                if (d - span).abs() > 0.0 {
                    return Err(Error::Validation(format!("declared span d={d} but gcd of support is {span}")));
                }
            }
            law
        }
        ("lat", "powerlaw") => {
            let p = params(body, &["a"]).map_err(|r| fail(&r))?;
            IncrementLaw::power_law(p[0])?
        }
        ("lat", "logpow") => {
            let p = params(body, &["a", "b"]).map_err(|r| fail(&r))?;
            IncrementLaw::log_power_law(p[0], p[1])?
        }
        ("int", "sympow") => {
            let p = params(body, &["a"]).map_err(|r| fail(&r))?;
            IncrementLaw::symmetric_power_law(p[0])?
        }
        ("cont", "exp") => {
            let p = params(body, &["rate"]).map_err(|r| fail(&r))?;
            IncrementLaw::exponential(p[0])?
        }
        ("cont", "uniform") => {
            let p = params(body, &["lo", "hi"]).map_err(|r| fail(&r))?;
            IncrementLaw::uniform(p[0], p[1])?
        }
        ("cont", "pareto") => {
            let p = params(body, &["alpha", "scale"]).map_err(|r| fail(&r))?;
            IncrementLaw::pareto(p[0], p[1])?
        }
        ("lat" | "int" | "cont", _) => {
            return Err(fail(&format!("family `{name}` is not available for kind `{kind}`")))
        }
        _ => return Err(fail(&format!("unknown kind `{kind}`"))),
    };
    Ok(law)
}

type PmfBody = (Option<f64>, Vec<(i64, BigRational)>);

fn parse_pmf_body(body: &str) -> std::result::Result<PmfBody, String> {
    let (declared, atoms_text) = match body.strip_prefix("d=") {
        Some(rest) => {
            let (d, atoms) = rest.split_once(';').ok_or("expected `;` after d=")?;
            let d = parse_real(d).ok_or_else(|| format!("bad span `{d}`"))?;
            (Some(d), atoms)
        }
        None => (None, body),
    };
    if atoms_text.is_empty() {
        return Err("pmf needs at least one atom".into());
    }
    let mut atoms = Vec::new();
    for item in atoms_text.split(',') {
        let (idx, prob) = item.split_once(':').ok_or_else(|| format!("atom `{item}` is not `index:prob`"))?;
        let idx: i64 = idx.parse().map_err(|_| format!("bad index `{idx}`"))?;
        let prob = parse_rational(prob).ok_or_else(|| format!("bad probability `{prob}`"))?;
        atoms.push((idx, prob));
    }
    Ok((declared, atoms))
}

fn parse_real(text: &str) -> Option<f64> {
    parse_rational(text).and_then(|q| q.to_f64()).or_else(|| text.parse().ok())
}

fn params(body: &str, names: &[&str]) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != names.len() {
        return Err(format!("expected parameters {}", names.join(",")));
    }
    parts
        .iter()
        .zip(names)
        .map(|(part, name)| {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected `{name}=<real>`"))?;
            if key != *name {
                return Err(format!("expected parameter `{name}`, found `{key}`"));
            }
            parse_real(value).ok_or_else(|| format!("bad value `{value}` for `{name}`"))
        })
        .collect()
}
