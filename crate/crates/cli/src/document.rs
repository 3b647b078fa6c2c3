//! The JSON factors document.
//!
//! Integers are written as decimal strings and rationals as `"num/den"`.
//! Permutations are index maps: `P[i] = j` puts a one at `(i, j)`. Fields a
//! method does not produce are omitted.

use bruhat_core::{
    BruhatFactors, EtdFactors, Fraction, Integer, LduFactors, Matrix, Permutation, ScaledPerm,
};
use serde::{Deserialize, Serialize};

use crate::matrix_file::parse_integer;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ldu,
    Bruhat,
    Etd,
}

/// `denoms` gives `D = diag(1/d_i)`. `scales` and `perm` give a scaled
/// partial permutation: row `i` holds its next scale at column `perm[i]`, or
/// nothing when `perm[i] = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagonal {
    Scaled { scales: Vec<String>, perm: Vec<i64> },
    Denoms { denoms: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorsDocument {
    pub method: Method,
    pub rank: usize,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<usize>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<String>>>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Vec<String>>>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<String>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Diagonal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
}

/// `(L, U, alphas)`.
pub type LduParts = (Matrix<Integer>, Matrix<Integer>, Vec<Integer>);

fn strings(m: &Matrix<Integer>) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(ToString::to_string).collect())
        .collect()
}

/// `d_i = alpha_{i-1} alpha_i` with `alpha_0 = 1`.
fn ldu_denoms(alphas: &[Integer]) -> Vec<Integer> {
    let mut prev = Integer::from(1);
    alphas
        .iter()
        .map(|a| {
            let d = &prev * a;
            prev = a.clone();
            d
        })
        .collect()
}

fn to_strings(xs: &[Integer]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn matrix(name: &str, field: &Option<Vec<Vec<String>>>) -> Result<Matrix<Integer>, CliError> {
    let rows = field
        .as_ref()
        .ok_or_else(|| CliError::Parse(format!("missing field {name}")))?;
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_integer(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(parsed).map_err(|e| CliError::Parse(format!("field {name}: {e:?}")))
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_fraction(s: &str) -> Result<Fraction<Integer>, CliError> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (parse_integer(n)?, parse_integer(d)?),
        None => (parse_integer(s)?, Integer::from(1)),
    };
    Fraction::new(num, den).map_err(|_| CliError::Parse(format!("zero denominator in {s:?}")))
}

fn permutation(name: &str, field: &Option<Vec<usize>>) -> Result<Permutation, CliError> {
    let map = field
        .clone()
        .ok_or_else(|| CliError::Parse(format!("missing field {name}")))?;
    Ok(Permutation::from_map(map)?)
}

impl FactorsDocument {
    fn empty(method: Method, rank: usize) -> Self {
        Self {
            method,
            rank,
            p: None,
            q: None,
            l: None,
            u: None,
            v: None,
            d: None,
            alphas: None,
        }
    }

    pub fn from_ldu(f: &LduFactors<Integer>) -> Self {
        let denoms = to_strings(&ldu_denoms(&f.alphas));
        Self {
            l: Some(strings(&f.l)),
            u: Some(strings(&f.u)),
            d: Some(Diagonal::Denoms { denoms }),
            alphas: Some(to_strings(&f.alphas)),
            ..Self::empty(Method::Ldu, f.n())
        }
    }

    pub fn from_etd(f: &EtdFactors<Integer>) -> Self {
        Self {
            p: Some(f.p.map().to_vec()),
            q: Some(f.q.map().to_vec()),
            l: Some(strings(&f.l)),
            u: Some(strings(&f.u)),
            d: Some(Diagonal::Denoms {
                denoms: to_strings(&f.d),
            }),
            ..Self::empty(Method::Etd, f.rank)
        }
    }

    pub fn from_bruhat(f: &BruhatFactors<Integer>) -> Self {
        let mut scales = Vec::new();
        let mut perm = Vec::new();
        for e in f.w.entries() {
            match e {
                Some((j, x)) => {
                    perm.push(*j as i64);
                    scales.push(x.to_string());
                }
                None => perm.push(-1),
            }
        }
        Self {
            v: Some(strings(&f.v)),
            u: Some(strings(&f.u)),
            d: Some(Diagonal::Scaled { scales, perm }),
            ..Self::empty(Method::Bruhat, f.rank)
        }
    }

    /// `(L, U, alphas)` of an LDU document. A `D` field, if present, must
    /// agree with the alphas.
    pub fn to_ldu_parts(&self) -> Result<LduParts, CliError> {
        let l = matrix("L", &self.l)?;
        let u = matrix("U", &self.u)?;
        let alphas = self
            .alphas
            .as_ref()
            .ok_or_else(|| CliError::Parse("missing field alphas".into()))?
            .iter()
            .map(|s| parse_integer(s))
            .collect::<Result<Vec<_>, _>>()?;
        match &self.d {
            None => {}
            Some(Diagonal::Denoms { denoms }) => {
                let expected = ldu_denoms(&alphas);
                let given = denoms
                    .iter()
                    .map(|s| parse_integer(s))
                    .collect::<Result<Vec<_>, _>>()?;
                if given != expected {
                    return Err(CliError::Invalid("D does not match the alphas".into()));
                }
            }
            Some(Diagonal::Scaled { .. }) => {
                return Err(CliError::Parse("an LDU document needs D.denoms".into()))
            }
        }
        Ok((l, u, alphas))
    }

    pub fn to_etd(&self) -> Result<EtdFactors<Integer>, CliError> {
        let d = match &self.d {
            Some(Diagonal::Denoms { denoms }) => denoms
                .iter()
                .map(|s| parse_integer(s))
                .collect::<Result<Vec<_>, _>>()?,
            _ => return Err(CliError::Parse("an ETD document needs D.denoms".into())),
        };
        Ok(EtdFactors {
            p: permutation("P", &self.p)?,
            l: matrix("L", &self.l)?,
            d,
            u: matrix("U", &self.u)?,
            q: permutation("Q", &self.q)?,
            rank: self.rank,
        })
    }

    pub fn to_bruhat(&self) -> Result<BruhatFactors<Integer>, CliError> {
        let v = matrix("V", &self.v)?;
        let u = matrix("U", &self.u)?;
        let Some(Diagonal::Scaled { scales, perm }) = &self.d else {
            return Err(CliError::Parse(
                "a Bruhat document needs D.scales and D.perm".into(),
            ));
        };
        let mut scales = scales.iter();
        let mut entries = Vec::with_capacity(perm.len());
        for &j in perm {
            if j < 0 {
                entries.push(None);
                continue;
            }
            let s = scales
                .next()
                .ok_or_else(|| CliError::Parse("fewer scales than occupied rows".into()))?;
            entries.push(Some((j as usize, parse_fraction(s)?)));
        }
        if scales.next().is_some() {
            return Err(CliError::Parse("more scales than occupied rows".into()));
        }
        let w = ScaledPerm::new(v.cols(), u.rows(), entries)?;
        Ok(BruhatFactors {
            v,
            w,
            u,
            rank: self.rank,
        })
    }

    /// Multi-line plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("method: {}\nrank: {}\n", self.method_name(), self.rank);
        let perm = |out: &mut String, name: &str, p: &Option<Vec<usize>>| {
            if let Some(p) = p {
                let s: Vec<String> = p.iter().map(ToString::to_string).collect();
                out.push_str(&format!("{name}: {}\n", s.join(" ")));
            }
        };
        let mat = |out: &mut String, name: &str, m: &Option<Vec<Vec<String>>>| {
            if let Some(m) = m {
                out.push_str(&format!("{name}:\n"));
                for row in m {
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
        };
        perm(&mut out, "P", &self.p);
        mat(&mut out, "V", &self.v);
        mat(&mut out, "L", &self.l);
        match &self.d {
            Some(Diagonal::Denoms { denoms }) => out.push_str(&format!("D denoms: {}\n", denoms.join(" "))),
            Some(Diagonal::Scaled { scales, perm }) => {
                let p: Vec<String> = perm.iter().map(ToString::to_string).collect();
                out.push_str(&format!(
                    "D perm: {}\nD scales: {}\n",
                    p.join(" "),
                    scales.join(" ")
                ));
            }
            None => {}
        }
        mat(&mut out, "U", &self.u);
        perm(&mut out, "Q", &self.q);
        if let Some(a) = &self.alphas {
            out.push_str(&format!("alphas: {}\n", a.join(" ")));
        }
        out
    }

    fn method_name(&self) -> &'static str {
        match self.method {
            Method::Ldu => "ldu",
            Method::Bruhat => "bruhat",
            Method::Etd => "etd",
        }
    }
}
