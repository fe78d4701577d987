//! Textual state constructors such as `ghz(3)` or `xx(0.7, -1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::states::{
    amplitude_damping, apply_local_channel, depolarizing, ghz, ghz_w_mixture, hamiltonian,
    horodecki_3x3, thermal_state, w, xxx_reference_state, KrausChannel, SpinModel, XxxReference,
};
use crate::tensor::{
    partial_trace, random_density_matrix, DensityMatrix, InputState, SubsystemLayout,
};

/// Sites of the hexagon ring kept by the `hexagon` constructor: B, D and F.
pub const HEXAGON_SITES: [usize; 3] = [1, 3, 5];

/// Three-qubit resource state fed through a noise channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resource {
    Ghz,
    W,
}

impl FromStr for Resource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz" => Ok(Resource::Ghz),
            "w" => Ok(Resource::W),
            _ => Err(Error::usage(format!(
                "unknown resource state `{s}` (expected ghz or w)"
            ))),
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Ghz => "ghz",
            Resource::W => "w",
        })
    }
}

pub(crate) fn xx_thermal(beta: f64, j: f64, n: usize) -> Result<DensityMatrix> {
    let m = SpinModel::xx(n, j);
    thermal_state(&hamiltonian(&m)?, beta, &m.layout())
}

pub(crate) fn xxx_thermal(beta: f64, h: f64, j: f64) -> Result<DensityMatrix> {
    let m = SpinModel::xxx(3, j, h);
    thermal_state(&hamiltonian(&m)?, beta, &m.layout())
}

/// Thermal state of the six-site XX ring in a field, reduced to `sites`.
pub(crate) fn hexagon_reduced(beta: f64, h: f64, j: f64, sites: &[usize]) -> Result<DensityMatrix> {
    let m = SpinModel::hexagon(j, h);
    partial_trace(&thermal_state(&hamiltonian(&m)?, beta, &m.layout())?, sites)
}

pub(crate) fn noisy(channel: &KrausChannel, resource: Resource) -> Result<DensityMatrix> {
    let psi = match resource {
        Resource::Ghz => ghz(3)?,
        Resource::W => w(3)?,
    };
    apply_local_channel(channel, &psi.to_density(), &[0, 1, 2])
}

pub(crate) fn damped(q: f64, resource: Resource) -> Result<DensityMatrix> {
    noisy(&amplitude_damping(q)?, resource)
}

pub(crate) fn depolarized(p: f64, resource: Resource) -> Result<DensityMatrix> {
    noisy(&depolarizing(p)?, resource)
}

/// A parsed constructor call, e.g. `horodecki(0.3)`.
///
/// | name | arguments |
/// |---|---|
/// | `ghz`, `w` | `n` |
/// | `horodecki` | `a` |
/// | `ghz-w` | `p`, optional `n` (3) |
/// | `xx` | `beta`, `J`, optional `n` (3) |
/// | `xxx` | `beta`, `h`, optional `J` (−1) |
/// | `hexagon` | `beta`, `h`, optional `J` (1); reduced to sites B:D:F |
/// | `ad`, `dep` | `q` or `p`, `ghz` or `w` |
/// | `xxx-ref` | `critical`, `intermediate` or `zero-field` |
/// | `random` | `seed`, `rank`, then the subsystem dimensions |
#[derive(Clone, Debug, PartialEq)]
pub struct Constructor {
    pub name: String,
    pub args: Vec<String>,
}

impl FromStr for Constructor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::usage(format!(
                "cannot parse state constructor `{s}`; expected name(arg, ...)"
            ))
        };
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let name = s[..open].trim().to_ascii_lowercase();
        if name.is_empty() {
            return Err(bad());
        }
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|a| a.trim().to_string()).collect()
        };
        Ok(Self { name, args })
    }
}

impl Constructor {
    fn arity(&self, min: usize, max: usize) -> Result<()> {
        if self.args.len() < min || self.args.len() > max {
            return Err(Error::usage(format!(
                "`{}` takes {} argument(s), got {}",
                self.name,
                if min == max {
                    min.to_string()
                } else {
                    format!("{min} to {max}")
                },
                self.args.len()
            )));
        }
        Ok(())
    }

    fn num(&self, i: usize) -> Result<f64> {
        self.args[i].parse().map_err(|_| {
            Error::usage(format!(
                "argument {} of `{}` is not a number: `{}`",
                i + 1,
                self.name,
                self.args[i]
            ))
        })
    }

    fn count(&self, i: usize) -> Result<usize> {
        self.args[i].parse().map_err(|_| {
            Error::usage(format!(
                "argument {} of `{}` is not a count: `{}`",
                i + 1,
                self.name,
                self.args[i]
            ))
        })
    }

    fn num_or(&self, i: usize, default: f64) -> Result<f64> {
        if i < self.args.len() {
            self.num(i)
        } else {
            Ok(default)
        }
    }

    fn count_or(&self, i: usize, default: usize) -> Result<usize> {
        if i < self.args.len() {
            self.count(i)
        } else {
            Ok(default)
        }
    }

    pub fn build(&self) -> Result<InputState> {
        let mixed = |r: Result<DensityMatrix>| r.map(InputState::Mixed);
        match self.name.as_str() {
            "ghz" | "w" => {
                self.arity(1, 1)?;
                let n = self.count(0)?;
                Ok(InputState::Pure(if self.name == "ghz" { ghz(n)? } else { w(n)? }))
            }
            "horodecki" => {
                self.arity(1, 1)?;
                mixed(horodecki_3x3(self.num(0)?))
            }
            "ghz-w" => {
                self.arity(1, 2)?;
                mixed(ghz_w_mixture(self.num(0)?, self.count_or(1, 3)?))
            }
            "xx" => {
                self.arity(2, 3)?;
                mixed(xx_thermal(self.num(0)?, self.num(1)?, self.count_or(2, 3)?))
            }
            "xxx" => {
                self.arity(2, 3)?;
                mixed(xxx_thermal(self.num(0)?, self.num(1)?, self.num_or(2, -1.0)?))
            }
            "hexagon" => {
                self.arity(2, 3)?;
                mixed(hexagon_reduced(self.num(0)?, self.num(1)?, self.num_or(2, 1.0)?, &HEXAGON_SITES))
            }
            "ad" | "dep" => {
                self.arity(2, 2)?;
                let x = self.num(0)?;
                let r: Resource = self.args[1].parse()?;
                mixed(if self.name == "ad" { damped(x, r) } else { depolarized(x, r) })
            }
            "xxx-ref" => {
                self.arity(1, 1)?;
                mixed(xxx_reference_state(self.args[0].parse::<XxxReference>()?))
            }
            "random" => {
                if self.args.len() < 4 {
                    return Err(Error::usage("`random` takes seed, rank and at least two dimensions"));
                }
                let dims = (2..self.args.len()).map(|i| self.count(i)).collect::<Result<Vec<_>>>()?;
                mixed(random_density_matrix(&SubsystemLayout::new(dims)?, self.count(1)?, self.count(0)? as u64))
            }
            other => Err(Error::usage(format!(
                "unknown state constructor `{other}` (expected ghz, w, horodecki, ghz-w, xx, xxx, hexagon, ad, dep, xxx-ref, random)"
            ))),
        }
    }
}

/// Parses and builds a constructor expression in one step.
pub fn construct_state(expr: &str) -> Result<InputState> {
    expr.parse::<Constructor>()?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::linalg::max_abs_diff;

    fn mixed(expr: &str) -> DensityMatrix {
        match construct_state(expr).unwrap() {
            InputState::Mixed(rho) => rho,
            InputState::Pure(_) => panic!("{expr} gave a pure state"),
        }
    }

    #[test]
    fn parses_names_and_arguments() {
        let c: Constructor = " XX( 0.7 , -1 ) ".parse().unwrap();
        assert_eq!(c.name, "xx");
        assert_eq!(c.args, vec!["0.7", "-1"]);
        assert!("ghz 3".parse::<Constructor>().is_err());
        assert!("(3)".parse::<Constructor>().is_err());
    }

    #[test]
    fn builds_every_family() {
        assert!(matches!(construct_state("ghz(3)").unwrap(), InputState::Pure(p) if p.dim() == 8));
        assert!(matches!(construct_state("w(4)").unwrap(), InputState::Pure(p) if p.dim() == 16));
        assert_eq!(mixed("horodecki(0.3)").layout().dims(), &[3, 3]);
        assert_eq!(mixed("ghz-w(0.5, 4)").dim(), 16);
        assert_eq!(mixed("xx(0.7, -1)").dim(), 8);
        assert_eq!(mixed("xxx(2, 1)").dim(), 8);
        assert_eq!(mixed("hexagon(5, 0.5)").layout().dims(), &[2, 2, 2]);
        assert_eq!(mixed("ad(0.2, w)").dim(), 8);
        assert_eq!(mixed("dep(0.2, ghz)").dim(), 8);
        assert_eq!(mixed("xxx-ref(critical)").dim(), 8);
        assert_eq!(mixed("random(4, 2, 2, 3)").numerical_rank(), 2);
    }

    #[test]
    fn defaults_match_explicit_arguments() {
        assert!(max_abs_diff(mixed("xxx(2, 1)").matrix(), mixed("xxx(2, 1, -1)").matrix()) < 1e-15);
        assert!(
            max_abs_diff(
                mixed("ghz-w(0.3)").matrix(),
                mixed("ghz-w(0.3, 3)").matrix()
            ) < 1e-15
        );
    }

    #[test]
    fn reports_bad_input() {
        for expr in [
            "nope(1)",
            "ghz()",
            "ghz(x)",
            "horodecki(2)",
            "ad(0.1, bell)",
            "random(1, 2, 2)",
            "xx(1)",
        ] {
            assert!(construct_state(expr).is_err(), "{expr}");
        }
    }
}
