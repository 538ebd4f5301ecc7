//! JSON wire formats.
//!
//! Rationals are strings `"p/q"` (or `"p"` when `q = 1`), subsets are
//! strictly increasing arrays of labels, and every list of sets is emitted in
//! canonical subset order. Multicover heights and multiplicities are JSON
//! integers, or decimal strings once they no longer fit in 64 bits.

use std::collections::BTreeMap;
use std::io::BufRead;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CarMechanism, CoarseningMechanism, Mixture};
use crate::multicover::{from_multicover, UniformMulticover};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::sampler::{NatureDistribution, ProceduralModel, SampleRecord};
use crate::subset::{SampleSpace, Subset};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetProbWire {
    pub set: Vec<usize>,
    pub prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarWire {
    pub n: usize,
    pub pi: Vec<SetProbWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryWire {
    pub x: usize,
    pub set: Vec<usize>,
    pub prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseningWire {
    pub n: usize,
    pub entries: Vec<EntryWire>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigCount {
    Small(u64),
    Big(String),
}

impl From<&BigUint> for BigCount {
    fn from(v: &BigUint) -> Self {
        match v.to_u64() {
            Some(s) => Self::Small(s),
            None => Self::Big(v.to_string()),
        }
    }
}

impl BigCount {
    fn parse(&self) -> Result<BigUint> {
        match self {
            Self::Small(v) => Ok(BigUint::from(*v)),
            Self::Big(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
                s.parse().map_err(|_| Error::Format(format!("bad count {s:?}")))
            }
            Self::Big(s) => Err(Error::Format(format!("bad count {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetMultWire {
    pub set: Vec<usize>,
    pub mult: BigCount,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticoverWire {
    pub n: usize,
    pub k: BigCount,
    pub sets: Vec<SetMultWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentWire {
    Multicover(MulticoverWire),
    Car(CarWire),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureWire {
    pub weights: Vec<String>,
    pub components: Vec<ComponentWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloatSetProbWire {
    pub set: Vec<usize>,
    pub prob: f64,
}

/// Floating-point CAR vector, input to rational approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloatCarWire {
    pub n: usize,
    pub pi: Vec<FloatSetProbWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NatureWire {
    pub probs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    pub set: Vec<usize>,
    pub j: usize,
}

fn subset(members: &[usize], space: SampleSpace) -> Result<Subset> {
    let s = Subset::from_sorted(members)?;
    space.check(&s)?;
    Ok(s)
}

fn rationals(values: &[String]) -> Result<Vec<Rational>> {
    values.iter().map(|s| parse_rational(s)).collect()
}

fn check_canonical_order<'a>(sets: impl IntoIterator<Item = &'a Subset>) -> Result<()> {
    let sets: Vec<&Subset> = sets.into_iter().collect();
    if sets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubset("sets must be listed once each, in canonical order".into()));
    }
    Ok(())
}

impl From<&CarMechanism> for CarWire {
    fn from(car: &CarMechanism) -> Self {
        Self {
            n: car.space().size(),
            pi: car.pi().iter().map(|(a, p)| SetProbWire { set: a.to_vec(), prob: format_rational(p) }).collect(),
        }
    }
}

impl TryFrom<&CarWire> for CarMechanism {
    type Error = Error;

    fn try_from(w: &CarWire) -> Result<Self> {
        let space = SampleSpace::new(w.n)?;
        let mut pi = Vec::with_capacity(w.pi.len());
        for e in &w.pi {
            let p = parse_rational(&e.prob)?;
            if p <= Rational::from_integer(0.into()) {
                return Err(Error::Format(format!("probability {} must be positive", e.prob)));
            }
            pi.push((subset(&e.set, space)?, p));
        }
        check_canonical_order(pi.iter().map(|(a, _)| a))?;
        CarMechanism::new(space, pi)
    }
}

impl From<&CoarseningMechanism> for CoarseningWire {
    fn from(m: &CoarseningMechanism) -> Self {
        Self {
            n: m.space().size(),
            entries: m
                .entries()
                .iter()
                .map(|((x, a), p)| EntryWire { x: *x, set: a.to_vec(), prob: format_rational(p) })
                .collect(),
        }
    }
}

impl TryFrom<&CoarseningWire> for CoarseningMechanism {
    type Error = Error;

    fn try_from(w: &CoarseningWire) -> Result<Self> {
        let space = SampleSpace::new(w.n)?;
        let entries = w
            .entries
            .iter()
            .map(|e| Ok((e.x, subset(&e.set, space)?, parse_rational(&e.prob)?)))
            .collect::<Result<Vec<_>>>()?;
        CoarseningMechanism::new(space, entries)
    }
}

impl From<&UniformMulticover> for MulticoverWire {
    fn from(mc: &UniformMulticover) -> Self {
        Self {
            n: mc.space().size(),
            k: mc.height().into(),
            sets: mc.mults().iter().map(|(a, m)| SetMultWire { set: a.to_vec(), mult: m.into() }).collect(),
        }
    }
}

impl TryFrom<&MulticoverWire> for UniformMulticover {
    type Error = Error;

    fn try_from(w: &MulticoverWire) -> Result<Self> {
        let space = SampleSpace::new(w.n)?;
        let mults = w
            .sets
            .iter()
            .map(|e| Ok((subset(&e.set, space)?, e.mult.parse()?)))
            .collect::<Result<Vec<(Subset, BigUint)>>>()?;
        check_canonical_order(mults.iter().map(|(a, _)| a))?;
        if let Some((a, _)) = mults.iter().find(|(_, m)| *m == BigUint::from(0u32)) {
            return Err(Error::Format(format!("multiplicity of {a} must be positive")));
        }
        UniformMulticover::new(space, w.k.parse()?, mults)
    }
}

impl From<&Mixture> for MixtureWire {
    fn from(m: &Mixture) -> Self {
        Self {
            weights: m.weights().iter().map(format_rational).collect(),
            components: m.components().iter().map(|c| ComponentWire::Car(c.into())).collect(),
        }
    }
}

fn component_car(c: &ComponentWire) -> Result<CarMechanism> {
    match c {
        ComponentWire::Car(w) => w.try_into(),
        ComponentWire::Multicover(w) => from_multicover(&w.try_into()?),
    }
}

impl TryFrom<&MixtureWire> for Mixture {
    type Error = Error;

    fn try_from(w: &MixtureWire) -> Result<Self> {
        let components = w.components.iter().map(component_car).collect::<Result<Vec<_>>>()?;
        Mixture::new(rationals(&w.weights)?, components)
    }
}

impl TryFrom<&MixtureWire> for ProceduralModel {
    type Error = Error;

    /// CAR components are turned into their canonical multicovers; multicover
    /// components are used as given.
    fn try_from(w: &MixtureWire) -> Result<Self> {
        let covers = w
            .components
            .iter()
            .map(|c| match c {
                ComponentWire::Multicover(m) => m.try_into(),
                ComponentWire::Car(car) => Ok(crate::multicover::to_multicover(&car.try_into()?)),
            })
            .collect::<Result<Vec<UniformMulticover>>>()?;
        ProceduralModel::new(rationals(&w.weights)?, covers)
    }
}

impl From<&ProceduralModel> for MixtureWire {
    fn from(m: &ProceduralModel) -> Self {
        Self {
            weights: m.weights().iter().map(format_rational).collect(),
            components: m.covers().iter().map(|c| ComponentWire::Multicover(c.into())).collect(),
        }
    }
}

impl TryFrom<&NatureWire> for NatureDistribution {
    type Error = Error;

    fn try_from(w: &NatureWire) -> Result<Self> {
        NatureDistribution::new(rationals(&w.probs)?)
    }
}

impl From<&NatureDistribution> for NatureWire {
    fn from(d: &NatureDistribution) -> Self {
        Self { probs: d.probs().iter().map(format_rational).collect() }
    }
}

impl FloatCarWire {
    pub fn to_values(&self) -> Result<(SampleSpace, BTreeMap<Subset, f64>)> {
        let space = SampleSpace::new(self.n)?;
        let mut values = BTreeMap::new();
        for e in &self.pi {
            let a = subset(&e.set, space)?;
            if values.insert(a, e.prob).is_some() {
                return Err(Error::InvalidSubset(format!("{a} listed twice")));
            }
        }
        Ok((space, values))
    }
}

impl RecordWire {
    pub fn from_record(r: &SampleRecord, hide_x: bool) -> Self {
        Self { x: (!hide_x).then_some(r.x), set: r.set.to_vec(), j: r.component }
    }

    /// Fails when the record was exported without its underlying outcome.
    pub fn to_record(&self, space: SampleSpace) -> Result<SampleRecord> {
        let x = self
            .x
            .ok_or_else(|| Error::InvalidArgument("record has no \"x\" field (exported with --hide-x?)".into()))?;
        let set = subset(&self.set, space)?;
        if !set.contains(x) {
            return Err(Error::InvalidArgument(format!("record x = {x} is not in its set {set}")));
        }
        Ok(SampleRecord { x, set, component: self.j })
    }
}

macro_rules! json_via_wire {
    ($ty:ty, $wire:ty, $to:ident, $from:ident) => {
        pub fn $to(v: &$ty) -> String {
            serde_json::to_string(&<$wire>::from(v)).expect("wire types always serialize")
        }

        pub fn $from(s: &str) -> Result<$ty> {
            let w: $wire = serde_json::from_str(s)?;
            <$ty>::try_from(&w)
        }
    };
}

json_via_wire!(CarMechanism, CarWire, car_to_json, car_from_json);
json_via_wire!(CoarseningMechanism, CoarseningWire, coarsening_to_json, coarsening_from_json);
json_via_wire!(UniformMulticover, MulticoverWire, multicover_to_json, multicover_from_json);
json_via_wire!(Mixture, MixtureWire, mixture_to_json, mixture_from_json);
json_via_wire!(ProceduralModel, MixtureWire, model_to_json, model_from_json);
json_via_wire!(NatureDistribution, NatureWire, nature_to_json, nature_from_json);

/// One JSON object per line.
pub fn records_to_jsonl(records: &[SampleRecord], hide_x: bool) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&RecordWire::from_record(r, hide_x)).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(reader: impl BufRead, space: SampleSpace) -> Result<Vec<SampleRecord>> {
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let w: RecordWire = serde_json::from_str(&line)?;
        records.push(w.to_record(space)?);
    }
    Ok(records)
}

/// Pretty form used for files written by the CLI.
pub fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("wire types always serialize")
}
