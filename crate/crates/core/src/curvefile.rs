//! Curve records: `key = value` lines, `#` comments.
//!
//! ```text
//! name = 37a
//! coeffs = 1 0 0 0 0 -1 0 -1 -1 0
//! base = 0 1 0
//! basis = 37a.basis
//! ```
//!
//! `form = x1^2*x2 + ...` may replace `coeffs`. Without `base`, the point of
//! least height found up to [`BASE_SEARCH`] is used.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forms::{parse_form, CubicForm};
use crate::jacobian::GroupContext;
use crate::points::{enumerate_points, PlanePoint};

pub const BASE_SEARCH: u64 = 100;

#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub name: String,
    pub form: CubicForm,
    pub base: Option<PlanePoint>,
    /// Basis file as written in the record.
    pub basis: Option<String>,
}

impl CurveSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut form = None;
        let mut base = None;
        let mut basis = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Format(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "coeffs" => {
                    let c: Vec<i64> = value
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|_| err(format!("bad coefficient '{s}'"))))
                        .collect::<Result<_>>()?;
                    let c: [i64; 10] = c.try_into().map_err(|v: Vec<i64>| err(format!("expected 10 coefficients, got {}", v.len())))?;
                    form = Some(CubicForm::new(c)?);
                }
                "form" => form = Some(parse_form(value)?),
                "base" => base = Some(value.parse::<PlanePoint>().map_err(|e| err(e.to_string()))?),
                "basis" => basis = Some(value.to_string()),
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        let form = form.ok_or_else(|| Error::Format("missing coeffs or form".into()))?;
        Ok(CurveSpec { name: name.unwrap_or_else(|| "curve".into()), form, base, basis })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The basis path, relative to the directory of the curve record.
    pub fn basis_path(&self, curve_path: &Path) -> Option<PathBuf> {
        self.basis.as_ref().map(|b| curve_path.parent().unwrap_or(Path::new(".")).join(b))
    }

    pub fn base_point(&self) -> Result<PlanePoint> {
        match &self.base {
            Some(b) => {
                if !b.is_on(&self.form) {
                    return Err(Error::NotOnCurve(b.to_string()));
                }
                Ok(b.clone())
            }
            None => enumerate_points(&self.form, BASE_SEARCH)?
                .into_iter()
                .min_by(|a, b| a.height().cmp(&b.height()).then_with(|| a.cmp(b)))
                .ok_or_else(|| Error::Precondition(format!("no rational point of height <= {BASE_SEARCH} to use as base"))),
        }
    }

    pub fn context(&self) -> Result<GroupContext> {
        GroupContext::new(self.form.clone(), self.base_point()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records() {
        let s = CurveSpec::parse("# test\nname = 37a\ncoeffs = 1 0 0 0 0 -1 0 -1 -1 0\nbase = 0 1 0\nbasis = 37a.basis\n").unwrap();
        assert_eq!(s.name, "37a");
        assert_eq!(s.form.coeffs(), &[1, 0, 0, 0, 0, -1, 0, -1, -1, 0]);
        assert_eq!(s.basis_path(Path::new("corpus/37a.curve")), Some(PathBuf::from("corpus/37a.basis")));
        assert!(s.context().is_ok());
        let f = CurveSpec::parse("form = x0^3 + x1^3 + x2^3").unwrap();
        assert_eq!(f.base_point().unwrap().to_i64(), Some([0, 1, -1]));
    }

    #[test]
    fn rejects_bad_records() {
        assert!(CurveSpec::parse("name = x").is_err());
        assert!(CurveSpec::parse("coeffs = 1 2 3").is_err());
        assert!(CurveSpec::parse("coeffs = 1 0 0 0 0 0 1 0 0 1\ncolour = red").is_err());
        assert!(CurveSpec::parse("coeffs = 1 0 0 0 0 0 1 0 0 1\nbase = 1 1 1").unwrap().base_point().is_err());
        assert!(CurveSpec::parse("coeffs = 1 0 0 0 0 0 0 0 0 0").unwrap().context().is_err());
    }
}
