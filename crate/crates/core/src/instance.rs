//! JSON instance files. Rationals are `"p/q"` strings, the ambient bundle is
//! spelled `AMBIENT`, and vanishing tables are sparse lists of nonzero pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::checker::{Decoration, Element, SubbundleCatalog};
use crate::error::{Error, Result};
use crate::filtration::{validate_filtration, ValidationReport};
use crate::orthogonal::OrthogonalCatalog;
use crate::parabolic::{ParabolicCatalog, ParabolicData};
use crate::pattern::{validate_pattern, VanishingPattern};
use crate::rational::Rational;
use crate::WeightedFiltration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Filtration,
    Catalog,
    Orthogonal,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    pub rank: usize,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicBlock {
    /// Gluing dimension per element id; ids left out are an error.
    pub p: BTreeMap<String, usize>,
    pub ambient: usize,
}

type Pairs = Vec<(String, String)>;

/// The on-disk shape. Optional blocks are omitted when absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: Kind,
    pub ambient: Ambient,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Element>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub containment: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perp: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radical: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parabolic: Option<ParabolicBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decorated: Option<Decoration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Filtration(WeightedFiltration, VanishingPattern),
    Catalog(SubbundleCatalog),
    Orthogonal(OrthogonalCatalog),
    Parabolic(ParabolicCatalog),
}

/// A validated instance plus its bookkeeping metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded {
    pub instance: Instance,
    pub decorated: Option<Decoration>,
}

/// Syntax problems, kept apart from semantic ones so callers can map them to
/// different exit codes.
#[derive(Debug, thiserror::Error)]
#[error("parse error: {0}")]
pub struct ParseError(#[from] serde_json::Error);

impl InstanceFile {
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    fn bare(kind: Kind, rank: usize, degree: i64) -> Self {
        InstanceFile {
            kind,
            ambient: Ambient { rank, degree },
            ranks: None,
            degrees: None,
            weights: None,
            pattern: None,
            elements: None,
            containment: None,
            vanishing: None,
            perp: None,
            radical: None,
            twist: None,
            parabolic: None,
            decorated: None,
        }
    }

    fn with_catalog(mut self, cat: &SubbundleCatalog) -> Self {
        self.elements = Some(cat.elements().to_vec());
        self.containment = Some(cat.containment_pairs());
        self.vanishing = Some(cat.vanishing_pairs());
        self
    }

    pub fn from_instance(loaded: &Loaded) -> Self {
        let mut file = match &loaded.instance {
            Instance::Filtration(f, m) => {
                let mut file = Self::bare(Kind::Filtration, f.ambient_rank, f.ambient_degree);
                file.ranks = Some(f.ranks.clone());
                file.degrees = Some(f.degrees.clone());
                file.weights = Some(f.weights.clone());
                file.pattern = Some(m.rows());
                file
            }
            Instance::Catalog(c) => Self::bare(Kind::Catalog, c.ambient_rank, c.ambient_degree).with_catalog(c),
            Instance::Orthogonal(o) => {
                let c = &o.catalog;
                let mut file = Self::bare(Kind::Orthogonal, c.ambient_rank, c.ambient_degree).with_catalog(c);
                file.perp = Some(o.perp_pairs());
                file.radical = Some(o.radical_pairs());
                file.twist = Some(o.twist);
                file
            }
            Instance::Parabolic(pc) => {
                let c = &pc.catalog;
                let mut file = Self::bare(Kind::Parabolic, c.ambient_rank, c.ambient_degree).with_catalog(c);
                let p = c.elements().iter().zip(&pc.data.p).map(|(e, &p)| (e.id.clone(), p)).collect();
                file.parabolic = Some(ParabolicBlock { p, ambient: pc.data.p_ambient });
                file
            }
        };
        file.decorated = loaded.decorated;
        file
    }

    /// Semantic validation; every failure here is an invariant violation.
    pub fn load(&self) -> Result<Loaded> {
        let mut stray = ValidationReport::default();
        let mut forbid = |present: bool, key: &str| {
            if present {
                stray.push(format!("key {key:?} does not apply to kind {:?}", self.kind));
            }
        };
        let filtration_keys =
            self.ranks.is_some() || self.degrees.is_some() || self.weights.is_some() || self.pattern.is_some();
        let catalog_keys = self.elements.is_some() || self.containment.is_some() || self.vanishing.is_some();
        match self.kind {
            Kind::Filtration => forbid(catalog_keys, "elements/containment/vanishing"),
            _ => forbid(filtration_keys, "ranks/degrees/weights/pattern"),
        }
        if self.kind != Kind::Orthogonal {
            forbid(self.perp.is_some() || self.radical.is_some() || self.twist.is_some(), "perp/radical/twist");
        }
        if self.kind != Kind::Parabolic {
            forbid(self.parabolic.is_some(), "parabolic");
        }
        if !stray.is_valid() {
            return Err(Error::Instance(stray.to_string()));
        }
        let instance = match self.kind {
            Kind::Filtration => {
                let (f, m) = self.load_filtration()?;
                Instance::Filtration(f, m)
            }
            Kind::Catalog => Instance::Catalog(self.load_catalog()?),
            Kind::Orthogonal => Instance::Orthogonal(OrthogonalCatalog::new(
                self.load_catalog()?,
                self.twist.unwrap_or(0),
                self.perp.as_deref().unwrap_or_default(),
                self.radical.as_deref().unwrap_or_default(),
            )?),
            Kind::Parabolic => {
                let cat = self.load_catalog()?;
                let block =
                    self.parabolic.as_ref().ok_or_else(|| Error::Instance("missing \"parabolic\" block".into()))?;
                let mut p = Vec::with_capacity(cat.len());
                for e in cat.elements() {
                    p.push(
                        *block
                            .p
                            .get(&e.id)
                            .ok_or_else(|| Error::Instance(format!("no parabolic value for {:?}", e.id)))?,
                    );
                }
                if let Some(extra) = block.p.keys().find(|id| cat.index_of(id).is_err()) {
                    return Err(Error::UnknownElement(extra.clone()));
                }
                Instance::Parabolic(ParabolicCatalog::new(cat, ParabolicData { p, p_ambient: block.ambient })?)
            }
        };
        Ok(Loaded { instance, decorated: self.decorated })
    }

    fn load_filtration(&self) -> Result<(WeightedFiltration, VanishingPattern)> {
        let missing = |key: &str| Error::Instance(format!("filtration needs {key:?}"));
        let ranks = self.ranks.clone().ok_or_else(|| missing("ranks"))?;
        let degrees = self.degrees.clone().ok_or_else(|| missing("degrees"))?;
        let weights = self.weights.clone().ok_or_else(|| missing("weights"))?;
        let rows = self.pattern.clone().ok_or_else(|| missing("pattern"))?;
        let f = WeightedFiltration::new(self.ambient.rank, self.ambient.degree, ranks, degrees, weights);
        let report = validate_filtration(&f);
        if !report.is_valid() {
            return Err(Error::InvalidFiltration(report));
        }
        let m = VanishingPattern::from_rows(rows)?;
        if m.size() != f.len() + 1 {
            return Err(Error::SizeMismatch { pattern: m.size(), expected: f.len() + 1 });
        }
        let report = validate_pattern(&m);
        if !report.is_valid() {
            return Err(Error::InvalidPattern(report));
        }
        Ok((f, m))
    }

    fn load_catalog(&self) -> Result<SubbundleCatalog> {
        let elements = self.elements.clone().ok_or_else(|| Error::Instance("catalog needs \"elements\"".into()))?;
        let cat = SubbundleCatalog::new(
            self.ambient.rank,
            self.ambient.degree,
            elements,
            self.containment.as_deref().unwrap_or_default(),
            self.vanishing.as_deref().unwrap_or_default(),
        )?;
        // Validation already rejects non-monotone tables; this guards the
        // sparse encoding itself.
        if cat.vanishing_closure() != cat.vanish_table() {
            let mut report = ValidationReport::default();
            report.push("vanishing table changes under monotone closure");
            return Err(Error::InvalidCatalog(report));
        }
        Ok(cat)
    }
}

impl Loaded {
    pub fn new(instance: Instance) -> Self {
        Loaded { instance, decorated: None }
    }

    pub fn to_json(&self) -> String {
        InstanceFile::from_instance(self).to_json()
    }

    /// The catalog a verdict is computed on: parabolic instances are shifted,
    /// filtrations have none.
    pub fn verdict_catalog(&self) -> Option<SubbundleCatalog> {
        match &self.instance {
            Instance::Filtration(..) => None,
            Instance::Catalog(c) => Some(c.clone()),
            Instance::Orthogonal(o) => Some(o.catalog.clone()),
            Instance::Parabolic(pc) => Some(pc.shifted()),
        }
    }
}

/// Parse then validate, keeping the two failure kinds apart.
pub fn read_instance(text: &str) -> std::result::Result<Result<Loaded>, ParseError> {
    Ok(InstanceFile::parse(text)?.load())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{self, trial_rng, GeneratorConfig};

    const EXAMPLE: &str = r#"{
        "kind": "filtration",
        "ambient": {"rank": 5, "degree": 0},
        "ranks": [1, 2, 3, 4],
        "degrees": [0, 0, 0, 0],
        "weights": ["1", "2", "1", "2"],
        "pattern": [[0,0,0,0,1],[0,0,0,1,1],[0,0,1,1,1],[0,1,1,1,1],[1,1,1,1,1]]
    }"#;

    #[test]
    fn filtration_loads() {
        let loaded = read_instance(EXAMPLE).unwrap().unwrap();
        let Instance::Filtration(f, m) = &loaded.instance else { panic!("wrong kind") };
        assert_eq!(f.weights[1], Rational::from(2i64));
        assert_eq!(m.size(), 5);
        assert_eq!(read_instance(&loaded.to_json()).unwrap().unwrap(), loaded);
    }

    #[test]
    fn syntax_and_semantics_are_separate() {
        assert!(read_instance(&EXAMPLE.replace("\"2\", \"1\"", "\"1/0\", \"1\"")).is_err());
        assert!(read_instance(&EXAMPLE.replace("\"kind\"", "\"colour\": 1, \"kind\"")).is_err());
        let asym = EXAMPLE.replace("[[0,0,0,0,1]", "[[0,1,0,0,1]");
        let err = read_instance(&asym).unwrap().unwrap_err();
        assert!(err.to_string().contains("symmetry"), "{err}");
    }

    #[test]
    fn keys_must_match_kind() {
        let text = EXAMPLE.replace("\"kind\": \"filtration\"", "\"kind\": \"catalog\"");
        assert!(read_instance(&text).unwrap().unwrap_err().to_string().contains("does not apply"));
    }

    #[test]
    fn generated_instances_round_trip() {
        let cfg = GeneratorConfig::default();
        for trial in 0..200 {
            let mut rng = trial_rng(7, trial);
            let (f, m) = generate::random_filtration(&mut rng, &cfg).unwrap();
            let loaded = [
                Loaded::new(Instance::Filtration(f, m)),
                Loaded::new(Instance::Catalog(generate::random_catalog(&mut rng, &cfg).unwrap())),
                Loaded::new(Instance::Orthogonal(
                    generate::orthogonal_catalog(&mut rng, &cfg, trial % 2 == 0).unwrap(),
                )),
                Loaded::new(Instance::Parabolic(generate::parabolic_catalog(&mut rng, &cfg).unwrap())),
            ];
            for l in loaded {
                let back = read_instance(&l.to_json()).unwrap().unwrap();
                assert_eq!(back, l);
            }
        }
    }

    #[test]
    fn decoration_survives() {
        let text = r#"{"kind":"catalog","ambient":{"rank":2,"degree":0},
            "elements":[{"id":"L","rank":1,"degree":1}],
            "vanishing":[["L","L"],["L","AMBIENT"],["AMBIENT","AMBIENT"]],
            "decorated":{"b":1,"c":2,"nN":3}}"#;
        let loaded = read_instance(text).unwrap().unwrap();
        assert_eq!(loaded.decorated.unwrap().n_n, 3);
        assert!(loaded.to_json().contains("\"nN\": 3"));
    }
}
