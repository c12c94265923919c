//! Isotropic Gaussian mixture datasets.
//!
//! Mixture spec files use the flat key-value format:
//!
//! ```text
//! name = x1
//! # component = <count> <sigma> <mean, comma separated>
//! component = 3000 0.15 0.2,0.5
//! component = 1500 0.08 0.7,0.8
//! component = 1500 0.10 0.5,1.0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::kv;
use crate::error::{Error, Result};
use crate::model::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub count: usize,
    pub sigma: f64,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub name: String,
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    /// Three-component 2-D mixture with a heavy component near two overlapping light ones.
    pub fn x1() -> Self {
        Self {
            name: "x1".into(),
            components: vec![
                MixtureComponent {
                    count: 3000,
                    sigma: 0.15,
                    mean: vec![0.2, 0.5],
                },
                MixtureComponent {
                    count: 1500,
                    sigma: 0.08,
                    mean: vec![0.7, 0.8],
                },
                MixtureComponent {
                    count: 1500,
                    sigma: 0.1,
                    mean: vec![0.5, 1.0],
                },
            ],
        }
    }

    /// Built-in mixtures addressable by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "x1" => Some(Self::x1()),
            _ => None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::from("mixture");
        let mut components = Vec::new();
        for e in kv::parse(text)? {
            match e.key.as_str() {
                "name" => name = e.value.clone(),
                "component" => {
                    let parts: Vec<&str> = e.value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(e.error("component needs `<count> <sigma> <mean,...>`"));
                    }
                    let count = parts[0]
                        .parse()
                        .map_err(|_| e.error(format!("bad count `{}`", parts[0])))?;
                    let sigma = parts[1]
                        .parse()
                        .map_err(|_| e.error(format!("bad sigma `{}`", parts[1])))?;
                    let mean = parts[2]
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| e.error(format!("bad mean `{}`", parts[2])))?;
                    components.push(MixtureComponent { count, sigma, mean });
                }
                other => return Err(e.error(format!("unknown key `{other}`"))),
            }
        }
        let spec = Self { name, components };
        spec.validate()?;
        Ok(spec)
    }

    /// A builtin name (`x1`) or a path to a mixture spec file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Some(spec) = Self::builtin(name_or_path) {
            return Ok(spec);
        }
        Self::parse(&std::fs::read_to_string(Path::new(name_or_path))?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name = {}\n", self.name);
        for c in &self.components {
            let mean: Vec<String> = c.mean.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "component = {} {} {}", c.count, c.sigma, mean.join(","));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::usage("mixture needs at least one component"))?;
        let n = first.mean.len();
        for (i, c) in self.components.iter().enumerate() {
            if c.count == 0 {
                return Err(Error::usage(format!("component {i} has zero points")));
            }
            if !(c.sigma > 0.0 && c.sigma.is_finite()) {
                return Err(Error::usage(format!("component {i} needs a positive sigma")));
            }
            if c.mean.len() != n || n == 0 {
                return Err(Error::usage(format!("component {i} mean has wrong dimension")));
            }
            if c.mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::usage(format!("component {i} mean is not finite")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn total_points(&self) -> usize {
        self.components.iter().map(|c| c.count).sum()
    }

    /// Component means as centroid coordinates.
    pub fn means(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.mean.clone()).collect()
    }
}

/// Samples every component in order: `count` rows of `mean + sigma · z`, `z ~ N(0, I)`.
pub fn generate_gaussian_mixture(spec: &MixtureSpec, seed: u64) -> Result<DataMatrix> {
    spec.validate()?;
    let n = spec.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(spec.total_points() * n);
    for c in &spec.components {
        for _ in 0..c.count {
            for &mu in &c.mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(mu + c.sigma * z);
            }
        }
    }
    DataMatrix::new(spec.total_points(), n, values)
}
