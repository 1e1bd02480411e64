//! Mini-syntax for bands, prescriptions, maps and weight fields on the
//! command line.
//!
//! ```text
//! band          cylinder:L,r,nu,nv
//!               warped:family,n,l-,l+,nu,nv[,circumference]
//!               file:path
//! prescription  const:c | tan:ell | model:family,n=N[,l=a:b]
//! map           affine | lipschitz:margin
//! weight        const:c | ramp:u0,u1
//! anchor        rows:k
//! potential     const:c | sin:a | cos:a
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use warpband_core::band::{build_flat_cylinder, build_warped_band, lipschitz_band_map, BandMap, DiscreteBand};
use warpband_core::bubble::{PrescriptionField, Region, WeightField};
use warpband_core::warp::{ModelFamily, ModelSpace};

use crate::band_file::read_band;
use crate::error::Result;

/// Version of the grammar above, echoed in every report.
pub const SYNTAX_VERSION: &str = "1";

fn split_tag<'a>(s: &'a str, what: &str) -> std::result::Result<(&'a str, &'a str), String> {
    s.split_once(':')
        .ok_or_else(|| format!("{what} `{s}` has no `kind:` prefix"))
}

fn numbers<T: FromStr>(
    s: &str,
    count: std::ops::RangeInclusive<usize>,
    what: &str,
) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let values = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|e| format!("{what}: bad value `{x}`: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if !count.contains(&values.len()) {
        return Err(format!("{what}: expected {count:?} values, found {}", values.len()));
    }
    Ok(values)
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.trim().parse().map_err(|e| format!("{what}: bad value `{s}`: {e}"))
}

fn family(name: &str) -> std::result::Result<ModelFamily, String> {
    ModelFamily::from_name(name).ok_or_else(|| {
        let names: Vec<&str> = ModelFamily::ALL.iter().map(|f| f.name()).collect();
        format!("unknown family `{name}`, expected one of {}", names.join(", "))
    })
}

/// A catalog model with optional end points.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub n: u32,
    pub interval: Option<(f64, f64)>,
}

impl ModelSpec {
    pub fn interval(&self) -> (f64, f64) {
        self.interval.unwrap_or_else(|| self.family.default_interval(self.n))
    }

    pub fn build(&self) -> Result<ModelSpace> {
        let (a, b) = self.interval();
        Ok(self.family.build(self.n, a, b)?)
    }
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut parts = s.split(',');
        let family = family(parts.next().unwrap_or("").trim())?;
        let (mut n, mut interval) = (None, None);
        for part in parts {
            match part.trim().split_once('=') {
                Some(("n", v)) => n = Some(parse_num(v, "model dimension")?),
                Some(("l", v)) => {
                    let (a, b) = v
                        .split_once(':')
                        .ok_or_else(|| format!("model interval `{v}` is not `a:b`"))?;
                    interval = Some((parse_num(a, "model interval")?, parse_num(b, "model interval")?));
                }
                _ => return Err(format!("unknown model parameter `{part}`")),
            }
        }
        let n = n.ok_or_else(|| format!("model `{s}` needs n=<dimension>"))?;
        Ok(ModelSpec { family, n, interval })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},n={}", self.family.name(), self.n)?;
        if let Some((a, b)) = self.interval {
            write!(f, ",l={a}:{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BandSpec {
    Cylinder {
        length: f64,
        radius: f64,
        nu: usize,
        nv: usize,
    },
    Warped {
        model: ModelSpec,
        nu: usize,
        nv: usize,
        circumference: f64,
    },
    File(PathBuf),
}

impl BandSpec {
    pub fn build(&self) -> Result<DiscreteBand> {
        match self {
            BandSpec::Cylinder { length, radius, nu, nv } => Ok(build_flat_cylinder(*length, *radius, *nu, *nv)?),
            BandSpec::Warped {
                model,
                nu,
                nv,
                circumference,
            } => Ok(build_warped_band(&model.build()?, *nv, *nu, *circumference)?),
            BandSpec::File(path) => read_band(path),
        }
    }
}

impl FromStr for BandSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (tag, rest) = split_tag(s, "band")?;
        match tag {
            "cylinder" => {
                let v: Vec<f64> = numbers(rest, 4..=4, "cylinder")?;
                let count = |x: f64| {
                    if x.fract() == 0.0 && x >= 0.0 {
                        Ok(x as usize)
                    } else {
                        Err(format!("cylinder: grid size `{x}` is not a whole number"))
                    }
                };
                Ok(BandSpec::Cylinder {
                    length: v[0],
                    radius: v[1],
                    nu: count(v[2])?,
                    nv: count(v[3])?,
                })
            }
            "warped" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if !(6..=7).contains(&parts.len()) {
                    return Err(format!("warped band `{s}` needs family,n,l-,l+,nu,nv[,circumference]"));
                }
                let model = ModelSpec {
                    family: family(parts[0].trim())?,
                    n: parse_num(parts[1], "warped band dimension")?,
                    interval: Some((
                        parse_num(parts[2], "warped band l-")?,
                        parse_num(parts[3], "warped band l+")?,
                    )),
                };
                let circumference = match parts.get(6) {
                    Some(c) => parse_num(c, "warped band circumference")?,
                    None => std::f64::consts::TAU,
                };
                Ok(BandSpec::Warped {
                    model,
                    nu: parse_num(parts[4], "warped band nu")?,
                    nv: parse_num(parts[5], "warped band nv")?,
                    circumference,
                })
            }
            "file" if !rest.is_empty() => Ok(BandSpec::File(PathBuf::from(rest))),
            _ => Err(format!("unknown band `{s}`, expected cylinder:, warped: or file:")),
        }
    }
}

impl fmt::Display for BandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandSpec::Cylinder { length, radius, nu, nv } => write!(f, "cylinder:{length},{radius},{nu},{nv}"),
            BandSpec::Warped {
                model,
                nu,
                nv,
                circumference,
            } => {
                let (a, b) = model.interval();
                write!(
                    f,
                    "warped:{},{},{a},{b},{nu},{nv},{circumference}",
                    model.family.name(),
                    model.n
                )
            }
            BandSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrescriptionSpec {
    Constant(f64),
    Tan(f64),
    Model(ModelSpec),
}

impl PrescriptionSpec {
    pub fn model(&self) -> Option<&ModelSpec> {
        match self {
            PrescriptionSpec::Model(m) => Some(m),
            _ => None,
        }
    }
}

impl FromStr for PrescriptionSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (tag, rest) = split_tag(s, "prescription")?;
        match tag {
            "const" => Ok(PrescriptionSpec::Constant(parse_num(rest, "constant prescription")?)),
            "tan" => Ok(PrescriptionSpec::Tan(parse_num(rest, "tan prescription")?)),
            "model" => Ok(PrescriptionSpec::Model(rest.parse()?)),
            _ => Err(format!("unknown prescription `{s}`, expected const:, tan: or model:")),
        }
    }
}

impl fmt::Display for PrescriptionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrescriptionSpec::Constant(c) => write!(f, "const:{c}"),
            PrescriptionSpec::Tan(ell) => write!(f, "tan:{ell}"),
            PrescriptionSpec::Model(m) => write!(f, "model:{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    Affine,
    Lipschitz { margin: f64 },
}

impl MapSpec {
    pub fn build(self, band: &DiscreteBand, a: f64, b: f64) -> Result<BandMap> {
        Ok(match self {
            MapSpec::Affine => BandMap::affine_in_u(band, a, b)?,
            MapSpec::Lipschitz { margin } => lipschitz_band_map(band, a, b, margin)?,
        })
    }
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "affine" => Ok(MapSpec::Affine),
            Some(("lipschitz", m)) => Ok(MapSpec::Lipschitz {
                margin: parse_num(m, "lipschitz margin")?,
            }),
            _ => Err(format!("unknown map `{s}`, expected affine or lipschitz:<margin>")),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Affine => f.write_str("affine"),
            MapSpec::Lipschitz { margin } => write!(f, "lipschitz:{margin}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    Ramp(f64, f64),
}

impl WeightSpec {
    pub fn build(self, band: &DiscreteBand) -> Result<WeightField> {
        Ok(match self {
            WeightSpec::Constant(c) => WeightField::constant(band, c)?,
            WeightSpec::Ramp(a, b) => WeightField::ramp(band, a, b)?,
        })
    }
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (tag, rest) = split_tag(s, "weight field")?;
        match tag {
            "const" => Ok(WeightSpec::Constant(parse_num(rest, "constant weight")?)),
            "ramp" => {
                let v: Vec<f64> = numbers(rest, 2..=2, "ramp weight")?;
                Ok(WeightSpec::Ramp(v[0], v[1]))
            }
            _ => Err(format!("unknown weight field `{s}`, expected const: or ramp:")),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant(c) => write!(f, "const:{c}"),
            WeightSpec::Ramp(a, b) => write!(f, "ramp:{a},{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnchorSpec {
    pub rows: usize,
}

impl AnchorSpec {
    pub fn build(self, band: &DiscreteBand) -> Result<Region> {
        Ok(Region::lower_rows(band, self.rows)?)
    }
}

impl Default for AnchorSpec {
    fn default() -> Self {
        AnchorSpec { rows: 1 }
    }
}

impl FromStr for AnchorSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            Some(("rows", k)) => Ok(AnchorSpec {
                rows: parse_num(k, "anchor rows")?,
            }),
            _ => Err(format!("unknown anchor `{s}`, expected rows:<k>")),
        }
    }
}

impl fmt::Display for AnchorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rows:{}", self.rows)
    }
}

/// Potential on a uniform closed curve as a function of the vertex angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Constant(f64),
    Sin(f64),
    Cos(f64),
}

impl PotentialSpec {
    pub fn eval(self, angle: f64) -> f64 {
        match self {
            PotentialSpec::Constant(c) => c,
            PotentialSpec::Sin(a) => a * angle.sin(),
            PotentialSpec::Cos(a) => a * angle.cos(),
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (tag, rest) = split_tag(s, "potential")?;
        let a = parse_num(rest, "potential")?;
        match tag {
            "const" => Ok(PotentialSpec::Constant(a)),
            "sin" => Ok(PotentialSpec::Sin(a)),
            "cos" => Ok(PotentialSpec::Cos(a)),
            _ => Err(format!("unknown potential `{s}`, expected const:, sin: or cos:")),
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Constant(c) => write!(f, "const:{c}"),
            PotentialSpec::Sin(a) => write!(f, "sin:{a}"),
            PotentialSpec::Cos(a) => write!(f, "cos:{a}"),
        }
    }
}

/// Builds the prescription field together with the model and band map it
/// was pulled back through, if any.
pub fn build_prescription(
    band: &DiscreteBand,
    spec: &PrescriptionSpec,
    map: MapSpec,
) -> Result<(PrescriptionField, Option<(ModelSpace, BandMap)>)> {
    match spec {
        PrescriptionSpec::Constant(c) => Ok((PrescriptionField::constant(band, *c)?, None)),
        PrescriptionSpec::Tan(ell) => Ok((PrescriptionField::tan_profile(band, *ell)?, None)),
        PrescriptionSpec::Model(m) => {
            let model = m.build()?;
            let (a, b) = model.domain();
            let map = map.build(band, a, b)?;
            let h = PrescriptionField::from_model_pullback(band, &model, &map)?;
            Ok((h, Some((model, map))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_display() {
        for s in [
            "cylinder:2,1,128,128",
            "warped:cos,2,-0.5,0.5,64,32,6.5",
            "file:bands/a.txt",
        ] {
            let b: BandSpec = s.parse().unwrap();
            assert_eq!(b.to_string().parse::<BandSpec>().unwrap(), b);
        }
        for s in ["const:0", "tan:1.6", "model:cos,n=2", "model:sinh,n=3,l=0.5:1.5"] {
            let p: PrescriptionSpec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!(
            "lipschitz:0.25".parse::<MapSpec>().unwrap(),
            MapSpec::Lipschitz { margin: 0.25 }
        );
        assert_eq!("ramp:2,1".parse::<WeightSpec>().unwrap(), WeightSpec::Ramp(2.0, 1.0));
        assert_eq!("rows:3".parse::<AnchorSpec>().unwrap().rows, 3);
        assert_eq!("sin:1".parse::<PotentialSpec>().unwrap().to_string(), "sin:1");
        assert!("tan:1".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn warped_default_circumference() {
        let b: BandSpec = "warped:cos,2,-0.5,0.5,16,16".parse().unwrap();
        let BandSpec::Warped { circumference, .. } = b else {
            panic!()
        };
        assert_eq!(circumference, std::f64::consts::TAU);
        assert_eq!(b.build().unwrap().nu(), 16);
    }

    #[test]
    fn rejects_malformed_input() {
        for s in [
            "cylinder:2,1,128",
            "cylinder:2,1,12.5,8",
            "torus:1",
            "file:",
            "warped:cos,2",
        ] {
            assert!(s.parse::<BandSpec>().is_err(), "{s}");
        }
        for s in ["const:x", "model:cos", "model:banana,n=2", "tan"] {
            assert!(s.parse::<PrescriptionSpec>().is_err(), "{s}");
        }
        assert!("lipschitz".parse::<MapSpec>().is_err());
        assert!("rows:-1".parse::<AnchorSpec>().is_err());
    }

    #[test]
    fn model_prescription_needs_a_wide_enough_band() {
        let band: BandSpec = "cylinder:1,1,16,16".parse().unwrap();
        let band = band.build().unwrap();
        let h: PrescriptionSpec = "model:cos,n=2".parse().unwrap();
        assert!(build_prescription(&band, &h, MapSpec::Lipschitz { margin: 0.25 }).is_err());
        let (field, pulled) = build_prescription(&band, &h, MapSpec::Affine).unwrap();
        assert_eq!(field.values.len(), 256);
        assert!(pulled.is_some());
    }
}
