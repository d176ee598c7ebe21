use num::rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{site_count, Site};
use crate::value::Value;
use crate::{Angle, Error, Result};

/// Parameters of a truncated wedge walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeSpec {
    pub alpha: Angle,
    /// Truncation layer `N`.
    pub layers: usize,
    /// Probability `r` of each apex move; `None` selects `min(1/3, cos²α/2)`.
    #[serde(with = "opt_rational")]
    pub apex_hold: Option<BigRational>,
}

impl WedgeSpec {
    pub fn new(alpha: Angle, layers: usize) -> Self {
        WedgeSpec {
            alpha,
            layers,
            apex_hold: None,
        }
    }

    pub fn with_apex_hold(mut self, r: BigRational) -> Self {
        self.apex_hold = Some(r);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        if self.layers < 2 {
            return Err(Error::domain(format!("layers = {} must be at least 2", self.layers)));
        }
        if let Some(r) = &self.apex_hold {
            let r = r.to_f64();
            if !(r > 0.0 && 3.0 * r <= 1.0) {
                return Err(Error::domain(format!("apex_hold = {r} must satisfy 0 < 3r <= 1")));
            }
        }
        Ok(())
    }

    /// The apex move probability `r` in the requested arithmetic.
    pub fn apex_probability<T: Value>(&self) -> Result<T> {
        if let Some(r) = &self.apex_hold {
            return Ok(T::from_rational(r));
        }
        let c2 = T::one() - self.alpha.sin2::<T>()?;
        let half_c2 = c2 / T::ratio(2, 1);
        let third = T::ratio(1, 3);
        Ok(if half_c2 < third { half_c2 } else { third })
    }
}

/// The wedge lattice `Γ_α` truncated at layer `N`.
#[derive(Clone, Debug)]
pub struct WedgeLattice {
    pub spec: WedgeSpec,
    sites: Vec<Site>,
}

impl WedgeLattice {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn layers(&self) -> usize {
        self.spec.layers
    }

    /// Planar embedding `k cos α + i y sin α`, as `(re, im)`.
    pub fn position(&self, site: Site) -> (f64, f64) {
        let a = self.spec.alpha.radians();
        (site.layer as f64 * a.cos(), site.transverse as f64 * a.sin())
    }
}

pub fn build_wedge_lattice(spec: &WedgeSpec) -> Result<WedgeLattice> {
    spec.validate()?;
    let n = spec.layers as u32;
    let mut sites = Vec::with_capacity(site_count(spec.layers));
    for k in 0..=n {
        for y in -(k as i32)..=k as i32 {
            sites.push(Site::new(k, y));
        }
    }
    Ok(WedgeLattice {
        spec: spec.clone(),
        sites,
    })
}

mod opt_rational {
    use num::rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| crate::value::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_layers_has_nine_sites() {
        let lattice = build_wedge_lattice(&WedgeSpec::new(Angle::PiOver4, 2)).unwrap();
        assert_eq!(lattice.len(), 9);
        let expected = [
            (0, 0),
            (1, -1),
            (1, 0),
            (1, 1),
            (2, -2),
            (2, -1),
            (2, 0),
            (2, 1),
            (2, 2),
        ];
        for (site, (k, y)) in lattice.sites().iter().zip(expected) {
            assert_eq!((site.layer, site.transverse), (k, y));
        }
    }

    #[test]
    fn positions() {
        let l = build_wedge_lattice(&WedgeSpec::new(Angle::PiOver4, 3)).unwrap();
        let (x, y) = l.position(Site::new(1, 1));
        let c = std::f64::consts::FRAC_PI_4.cos();
        assert!((x - c).abs() < 1e-15 && (y - c).abs() < 1e-15);

        let l = build_wedge_lattice(&WedgeSpec::new(Angle::PiOver6, 3)).unwrap();
        let (x, y) = l.position(Site::new(2, -1));
        let a = std::f64::consts::PI / 6.0;
        assert!((x - 2.0 * a.cos()).abs() < 1e-15);
        assert!((y + a.sin()).abs() < 1e-15);
    }

    #[test]
    fn positions_are_injective() {
        let l = build_wedge_lattice(&WedgeSpec::new(Angle::Radians(0.4), 12)).unwrap();
        let mut seen = std::collections::HashSet::new();
        for s in l.sites() {
            let (x, y) = l.position(*s);
            assert!(seen.insert(((x * 1e9).round() as i64, (y * 1e9).round() as i64)));
        }
        assert_eq!(l.len(), 13 * 13);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_wedge_lattice(&WedgeSpec::new(Angle::Radians(1.7), 4)).is_err());
        assert!(build_wedge_lattice(&WedgeSpec::new(Angle::PiOver4, 1)).is_err());
        let bad = WedgeSpec::new(Angle::PiOver4, 4).with_apex_hold(BigRational::ratio(1, 2));
        assert!(build_wedge_lattice(&bad).is_err());
    }

    #[test]
    fn default_apex_probability() {
        // cos²(π/4)/2 = 1/4 < 1/3
        let r: BigRational = WedgeSpec::new(Angle::PiOver4, 4).apex_probability().unwrap();
        assert_eq!(r, BigRational::ratio(1, 4));
        // cos²(π/6)/2 = 3/8 > 1/3
        let r: BigRational = WedgeSpec::new(Angle::PiOver6, 4).apex_probability().unwrap();
        assert_eq!(r, BigRational::ratio(1, 3));
    }
}
