//! Flat TOML parameter documents shared between subcommands.

use serde::{Deserialize, Serialize};

use forensic_core::codec2d::CodeParams2D;
use forensic_core::codec3d::CodeParams3D;
use forensic_core::robust::{CodecProfile, RobustParams};
use forensic_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "robust")]
    Robust,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub kind: Kind,
    pub q: u8,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<usize>,
    #[serde(rename = "M")]
    pub min_area: usize,
    pub h: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    pub k: usize,
}

/// Fully resolved parameters behind a document.
pub enum Resolved {
    TwoD(CodeParams2D),
    ThreeD(CodeParams3D),
    Robust(RobustParams),
}

pub fn profile_name(profile: CodecProfile) -> &'static str {
    match profile {
        CodecProfile::Reference => "reference",
        CodecProfile::Optimal => "optimal",
    }
}

pub fn parse_profile(name: &str) -> Result<CodecProfile, Error> {
    match name {
        "reference" => Ok(CodecProfile::Reference),
        "optimal" => Ok(CodecProfile::Optimal),
        other => Err(Error::InvalidArgument(format!("unknown codec profile {other:?}"))),
    }
}

impl ParamsDoc {
    pub fn from_2d(p: &CodeParams2D) -> Self {
        ParamsDoc {
            kind: Kind::TwoD,
            q: p.q,
            n: p.n,
            n_prime: None,
            min_area: p.min_area,
            h: p.min_side,
            d: p.unit,
            m: Some(p.m),
            a: None,
            b: None,
            delta: None,
            profile: None,
            k: p.message_len,
        }
    }

    pub fn from_3d(p: &CodeParams3D) -> Self {
        ParamsDoc {
            kind: Kind::ThreeD,
            q: p.q,
            n: p.n,
            n_prime: Some(p.n_prime),
            min_area: p.min_volume,
            h: p.min_side,
            d: p.unit,
            m: None,
            a: Some(p.a),
            b: Some(p.b),
            delta: None,
            profile: None,
            k: p.message_len,
        }
    }

    pub fn from_robust(p: &RobustParams) -> Self {
        ParamsDoc {
            kind: Kind::Robust,
            delta: Some(p.delta),
            profile: Some(profile_name(p.profile).into()),
            k: p.message_len(),
            ..ParamsDoc::from_2d(&p.base)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat parameter documents always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Format(format!("parameter document: {}", e.message())))
    }

    /// Re-derives the parameters and checks that every stated field agrees.
    pub fn resolve(&self) -> Result<Resolved, Error> {
        let resolved = match self.kind {
            Kind::TwoD => Resolved::TwoD(CodeParams2D::derive(self.q, Some(self.n), self.min_area, self.h)?),
            Kind::ThreeD => Resolved::ThreeD(CodeParams3D::derive(
                self.q,
                self.min_area,
                self.h,
                Some(self.n),
                self.n_prime,
            )?),
            Kind::Robust => {
                let base = CodeParams2D::derive(self.q, Some(self.n), self.min_area, self.h)?;
                let delta = self
                    .delta
                    .ok_or_else(|| Error::Format("robust parameter document lacks delta".into()))?;
                let profile = parse_profile(self.profile.as_deref().unwrap_or("reference"))?;
                Resolved::Robust(RobustParams::validate(base, delta, profile)?)
            }
        };
        let expected = match &resolved {
            Resolved::TwoD(p) => ParamsDoc::from_2d(p),
            Resolved::ThreeD(p) => ParamsDoc::from_3d(p),
            Resolved::Robust(p) => ParamsDoc::from_robust(p),
        };
        let mut stated = self.clone();
        if stated.kind == Kind::Robust && stated.profile.is_none() {
            stated.profile = expected.profile.clone();
        }
        if stated != expected {
            return Err(Error::Format(format!(
                "parameter document disagrees with derived parameters:\n{}",
                expected.to_toml()
            )));
        }
        Ok(resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        let p = CodeParams2D::derive(2, None, 1024, 14).unwrap();
        let doc = ParamsDoc::from_2d(&p);
        let text = doc.to_toml();
        assert!(text.contains("kind = \"2d\""));
        assert!(text.contains("M = 1024"));
        assert_eq!(ParamsDoc::from_toml(&text).unwrap(), doc);
        assert!(matches!(doc.resolve().unwrap(), Resolved::TwoD(r) if r == p));
    }

    #[test]
    fn tampered_document_is_rejected() {
        let p = CodeParams2D::derive(2, None, 1024, 14).unwrap();
        let mut doc = ParamsDoc::from_2d(&p);
        doc.k += 1;
        assert!(matches!(doc.resolve(), Err(Error::Format(_))));
        assert!(ParamsDoc::from_toml("kind = \"2d\"\nbogus = 1\n").is_err());
    }
}
