//! Run configuration, read from JSON with rationals as `"p/q"` strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apartment::{ball_window, build_complex, CellComplex};
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::roots::{affine_roots_in_window, build_root_system, FiniteRootSystem, RootType};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "type")]
    pub root_type: RootType,
    pub m: u32,
    pub r: Q,
    pub window_radius: Q,
    pub base_vertex: Vec<Q>,
}

impl Config {
    pub fn new(root_type: RootType, m: u32, r: Q, window_radius: Q, base_vertex: Vec<Q>) -> Result<Config> {
        let c = Config { root_type, m, r, window_radius, base_vertex };
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(s: &str) -> Result<Config> {
        let c: Config = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::from_json(&s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.r.signum() < 0 {
            return Err(Error::NegativeDepth(self.r.to_string()));
        }
        if !self.r.on_grid(self.m) {
            return Err(Error::OffGrid { r: self.r.to_string(), m: self.m });
        }
        if self.window_radius.signum() <= 0 {
            return Err(Error::EmptyWindow);
        }
        let rank = self.root_type.rank();
        if self.base_vertex.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: self.base_vertex.len() });
        }
        Ok(())
    }

    pub fn system(&self) -> FiniteRootSystem {
        build_root_system(self.root_type)
    }

    /// The refined complex on the window of the configured radius around the base vertex.
    pub fn build_complex(&self) -> Result<CellComplex> {
        standard_complex(self.root_type, self.m, &self.base_vertex, self.window_radius)
    }
}

/// Complex of `Ψ_m` on the ball window `|α(x − center)| ≤ radius`.
pub fn standard_complex(root_type: RootType, m: u32, center: &[Q], radius: Q) -> Result<CellComplex> {
    let sys = build_root_system(root_type);
    let window = ball_window(&sys, center, radius)?;
    let roots = affine_roots_in_window(&sys, m, &window)?;
    build_complex(&sys, m, &roots, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_record() {
        let c = Config::from_json(r#"{ "type": "A2", "m": 2, "r": "1/2", "window_radius": "4", "base_vertex": ["0","0"] }"#)
            .unwrap();
        assert_eq!(c.root_type, RootType::A2);
        assert_eq!(c.r, Q::new(1, 2));
        let back = Config::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_records() {
        let off = r#"{ "type": "A2", "m": 2, "r": "1/3", "window_radius": "4", "base_vertex": ["0","0"] }"#;
        assert!(matches!(Config::from_json(off), Err(Error::OffGrid { .. })));
        let dim = r#"{ "type": "A2", "m": 2, "r": "1", "window_radius": "4", "base_vertex": ["0"] }"#;
        assert!(matches!(Config::from_json(dim), Err(Error::DimensionMismatch { .. })));
        let ty = r#"{ "type": "E8", "m": 2, "r": "1", "window_radius": "4", "base_vertex": ["0"] }"#;
        assert!(matches!(Config::from_json(ty), Err(Error::Config(_))));
        assert!(Config::load(Path::new("/nonexistent/cfg.json")).is_err());
    }

    #[test]
    fn builds_a1() {
        let c = Config::new(RootType::A1, 2, Q::ONE, Q::ONE, vec![Q::ZERO]).unwrap();
        let cx = c.build_complex().unwrap();
        assert_eq!(cx.f_vector(), vec![5, 4]);
    }
}
