//! Site spaces: the wedge lattice and the vase grid.
//!
//! Both spaces index their sites the same way: layer `k` holds the `2k + 1`
//! transverse positions `-k..=k`, stored layer-major so that layer `k` starts
//! at index `k²`.

mod shape;
mod vase;
mod wedge;

pub use shape::{LinearShape, PowerShape, Shape, ShapeRegistry, TabulatedShape};
pub use vase::{build_vase_grid, VaseGrid};
pub use wedge::{build_wedge_lattice, WedgeLattice, WedgeSpec};

use serde::{Deserialize, Serialize};

/// A lattice point: layer `k ≥ 0` and transverse offset `|y| ≤ k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub layer: u32,
    pub transverse: i32,
}

impl Site {
    pub const APEX: Site = Site { layer: 0, transverse: 0 };

    pub fn new(layer: u32, transverse: i32) -> Self {
        debug_assert!(transverse.unsigned_abs() <= layer);
        Site { layer, transverse }
    }

    pub fn index(&self) -> usize {
        let k = self.layer as usize;
        k * k + (self.transverse + self.layer as i32) as usize
    }

    pub fn from_index(index: usize) -> Self {
        let k = (index as f64).sqrt() as usize;
        // correct for rounding near perfect squares
        let k = if (k + 1) * (k + 1) <= index {
            k + 1
        } else if k * k > index {
            k - 1
        } else {
            k
        };
        Site {
            layer: k as u32,
            transverse: (index - k * k) as i32 - k as i32,
        }
    }

    pub fn is_apex(&self) -> bool {
        self.layer == 0
    }

    /// Which reflecting side the site lies on, if any. The apex lies on both
    /// and is reported as neither.
    pub fn side(&self) -> Option<Side> {
        if self.layer == 0 {
            None
        } else if self.transverse == self.layer as i32 {
            Some(Side::Upper)
        } else if self.transverse == -(self.layer as i32) {
            Some(Side::Lower)
        } else {
            None
        }
    }
}

/// Reflecting sides of a wedge or vase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// Number of sites in layers `0..=layers`.
pub fn site_count(layers: usize) -> usize {
    (layers + 1) * (layers + 1)
}

/// Index range of layer `k`.
pub fn layer_range(k: usize) -> std::ops::Range<usize> {
    k * k..(k + 1) * (k + 1)
}

/// Layer of every site index in `0..site_count(layers)`.
pub fn site_layers(layers: usize) -> Vec<usize> {
    (0..=layers)
        .flat_map(|k| std::iter::repeat_n(k, 2 * k + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sides() {
        assert_eq!(Site::APEX.side(), None);
        assert_eq!(Site::new(3, 3).side(), Some(Side::Upper));
        assert_eq!(Site::new(3, -3).side(), Some(Side::Lower));
        assert_eq!(Site::new(3, 2).side(), None);
    }

    #[test]
    fn layer_ranges_tile_the_space() {
        let layers = site_layers(4);
        assert_eq!(layers.len(), site_count(4));
        for k in 0..=4 {
            for i in layer_range(k) {
                assert_eq!(layers[i], k);
            }
        }
    }

    proptest! {
        #[test]
        fn index_round_trips(k in 0u32..5000, t in 0u32..10001) {
            let y = (t % (2 * k + 1)) as i32 - k as i32;
            let site = Site::new(k, y);
            prop_assert_eq!(Site::from_index(site.index()), site);
        }
    }
}
