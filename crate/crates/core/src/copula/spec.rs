use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use super::sample::Sample;
use super::tau::tau_to_param;
use crate::error::{Error, Result};
use crate::numeric::{random_correlation_matrix, CorrelationMatrix, Rng};

/// Parametric families known to the τ conversions and the fitting code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Independence,
    /// Normal copula with an unstructured correlation matrix.
    Normal,
    NormalExchangeable,
    StudentT,
    Clayton,
    Frank,
    Gumbel,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "indep",
            Family::Normal => "normal",
            Family::NormalExchangeable => "normal-ex",
            Family::StudentT => "t",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gumbel => "gumbel",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "indep" | "independence" | "pi" => Family::Independence,
            "normal" | "normal-un" | "gauss" => Family::Normal,
            "normal-ex" | "normal-exchangeable" => Family::NormalExchangeable,
            "t" | "student-t" | "studentt" | "t-un" => Family::StudentT,
            "clayton" => Family::Clayton,
            "frank" => Family::Frank,
            "gumbel" => Family::Gumbel,
            other => return Err(Error::Config(format!("unknown copula family '{other}'"))),
        })
    }
}

/// One inner Clayton copula of a nested Clayton copula.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaytonGroup {
    /// Zero-based coordinate indices.
    pub members: Vec<usize>,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestedClayton {
    pub d: usize,
    pub theta0: f64,
    pub groups: Vec<ClaytonGroup>,
}

impl NestedClayton {
    /// Coordinates attached directly to the root copula.
    pub fn root_members(&self) -> Vec<usize> {
        let mut in_group = vec![false; self.d];
        for g in &self.groups {
            for &m in &g.members {
                in_group[m] = true;
            }
        }
        (0..self.d).filter(|&j| !in_group[j]).collect()
    }
}

/// A fully specified copula model.
#[derive(Clone, Debug, PartialEq)]
pub enum CopulaSpec {
    Independence { d: usize },
    Normal { p: CorrelationMatrix },
    NormalExchangeable { d: usize, rho: f64 },
    StudentT { nu: f64, p: CorrelationMatrix },
    Clayton { d: usize, theta: f64 },
    Frank { d: usize, theta: f64 },
    Gumbel { d: usize, theta: f64 },
    NestedClayton(NestedClayton),
    Empirical { points: Sample },
}

impl CopulaSpec {
    pub fn dim(&self) -> usize {
        match self {
            CopulaSpec::Independence { d }
            | CopulaSpec::NormalExchangeable { d, .. }
            | CopulaSpec::Clayton { d, .. }
            | CopulaSpec::Frank { d, .. }
            | CopulaSpec::Gumbel { d, .. } => *d,
            CopulaSpec::Normal { p } | CopulaSpec::StudentT { p, .. } => p.dim(),
            CopulaSpec::NestedClayton(nc) => nc.d,
            CopulaSpec::Empirical { points } => points.d(),
        }
    }

    /// Checks parameter ranges and dimensional consistency.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d < 2 {
            return Err(Error::Domain(format!("copula dimension must be >= 2, got {d}")));
        }
        match self {
            CopulaSpec::Independence { .. } | CopulaSpec::Normal { .. } => Ok(()),
            CopulaSpec::NormalExchangeable { d, rho } => {
                let lower = -1.0 / (*d as f64 - 1.0);
                if !(*rho >= lower && *rho <= 1.0) {
                    return Err(Error::Domain(format!(
                        "exchangeable correlation {rho} outside [{lower}, 1]"
                    )));
                }
                Ok(())
            }
            CopulaSpec::StudentT { nu, .. } => {
                if !(*nu > 0.0) || !nu.is_finite() {
                    return Err(Error::Domain(format!("degrees of freedom must be > 0, got {nu}")));
                }
                Ok(())
            }
            CopulaSpec::Clayton { theta, .. } => {
                if !(*theta > 0.0) || !theta.is_finite() {
                    return Err(Error::Domain(format!("Clayton theta must be > 0, got {theta}")));
                }
                Ok(())
            }
            CopulaSpec::Frank { d, theta } => {
                if *theta == 0.0 || !theta.is_finite() {
                    return Err(Error::Domain(format!(
                        "Frank theta must be finite and nonzero, got {theta}"
                    )));
                }
                if *d > 2 && *theta < 0.0 {
                    return Err(Error::Domain(format!(
                        "Frank copulas with d={d} > 2 need theta > 0, got {theta}"
                    )));
                }
                Ok(())
            }
            CopulaSpec::Gumbel { theta, .. } => {
                if !(*theta >= 1.0) || !theta.is_finite() {
                    return Err(Error::Domain(format!("Gumbel theta must be >= 1, got {theta}")));
                }
                Ok(())
            }
            CopulaSpec::NestedClayton(nc) => {
                if !(nc.theta0 > 0.0) || !nc.theta0.is_finite() {
                    return Err(Error::Domain(format!(
                        "nested Clayton root theta must be > 0, got {}",
                        nc.theta0
                    )));
                }
                let mut seen = vec![false; nc.d];
                for g in &nc.groups {
                    if g.members.is_empty() {
                        return Err(Error::Domain("nested Clayton group without members".into()));
                    }
                    if !(g.theta >= nc.theta0) || !g.theta.is_finite() {
                        return Err(Error::Domain(format!(
                            "nested Clayton needs inner theta >= root theta ({} < {})",
                            g.theta, nc.theta0
                        )));
                    }
                    for &m in &g.members {
                        if m >= nc.d || seen[m] {
                            return Err(Error::Domain(format!(
                                "nested Clayton groups must partition distinct indices below {}; bad index {m}",
                                nc.d
                            )));
                        }
                        seen[m] = true;
                    }
                }
                Ok(())
            }
            CopulaSpec::Empirical { points } => {
                if points.n() == 0 {
                    return Err(Error::Domain("empirical copula without points".into()));
                }
                Ok(())
            }
        }
    }

    pub fn clayton_tau(d: usize, tau: f64) -> Result<Self> {
        let theta = tau_to_param(Family::Clayton, tau)?;
        Ok(CopulaSpec::Clayton { d, theta })
    }

    pub fn frank_tau(d: usize, tau: f64) -> Result<Self> {
        let theta = tau_to_param(Family::Frank, tau)?;
        Ok(CopulaSpec::Frank { d, theta })
    }

    pub fn gumbel_tau(d: usize, tau: f64) -> Result<Self> {
        let theta = tau_to_param(Family::Gumbel, tau)?;
        Ok(CopulaSpec::Gumbel { d, theta })
    }

    pub fn normal_exchangeable_tau(d: usize, tau: f64) -> Result<Self> {
        let rho = tau_to_param(Family::NormalExchangeable, tau)?;
        let spec = CopulaSpec::NormalExchangeable { d, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// Exchangeable t copula.
    pub fn t_tau(d: usize, nu: f64, tau: f64) -> Result<Self> {
        let rho = tau_to_param(Family::StudentT, tau)?;
        Ok(CopulaSpec::StudentT {
            nu,
            p: CorrelationMatrix::exchangeable(d, rho)?,
        })
    }

    /// t copula whose correlation matrix is block structured: pairs inside a
    /// group get the group's τ, every other pair gets `tau0`.
    pub fn t_hierarchical(d: usize, nu: f64, tau0: f64, groups: &[(Vec<usize>, f64)]) -> Result<Self> {
        Ok(CopulaSpec::StudentT {
            nu,
            p: hierarchical_correlation(d, tau0, groups)?,
        })
    }

    pub fn nested_clayton_tau(d: usize, tau0: f64, groups: &[(Vec<usize>, f64)]) -> Result<Self> {
        let theta0 = tau_to_param(Family::Clayton, tau0)?;
        let groups = groups
            .iter()
            .map(|(members, tau)| {
                Ok(ClaytonGroup {
                    members: members.clone(),
                    theta: tau_to_param(Family::Clayton, *tau)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = CopulaSpec::NestedClayton(NestedClayton { d, theta0, groups });
        spec.validate()?;
        Ok(spec)
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            CopulaSpec::Independence { d } => format!("indep(d={d})"),
            CopulaSpec::Normal { p } => format!("normal(d={})", p.dim()),
            CopulaSpec::NormalExchangeable { d, rho } => format!("normal-ex(d={d},rho={rho:.4})"),
            CopulaSpec::StudentT { nu, p } => format!("t(d={},nu={nu})", p.dim()),
            CopulaSpec::Clayton { d, theta } => format!("clayton(d={d},theta={theta:.4})"),
            CopulaSpec::Frank { d, theta } => format!("frank(d={d},theta={theta:.4})"),
            CopulaSpec::Gumbel { d, theta } => format!("gumbel(d={d},theta={theta:.4})"),
            CopulaSpec::NestedClayton(nc) => format!(
                "nested-clayton(d={},theta0={:.4},groups={})",
                nc.d,
                nc.theta0,
                nc.groups.len()
            ),
            CopulaSpec::Empirical { points } => {
                format!("empirical(n={},d={})", points.n(), points.d())
            }
        }
    }
}

/// Correlation matrix with `rho = sin(pi tau / 2)` entries: within-group pairs
/// use the group's τ, all remaining pairs use `tau0`.
pub fn hierarchical_correlation(
    d: usize,
    tau0: f64,
    groups: &[(Vec<usize>, f64)],
) -> Result<CorrelationMatrix> {
    let rho0 = tau_to_param(Family::StudentT, tau0)?;
    let mut p = Array2::from_elem((d, d), rho0);
    for (members, tau) in groups {
        let rho = tau_to_param(Family::StudentT, *tau)?;
        for &a in members {
            for &b in members {
                if a >= d || b >= d {
                    return Err(Error::Domain(format!("group index out of range for d={d}")));
                }
                p[[a, b]] = rho;
            }
        }
    }
    for i in 0..d {
        p[[i, i]] = 1.0;
    }
    CorrelationMatrix::new(p)
}

/// Average pairwise τ of a block-structured model, e.g. `(2 tau0 + tau1)/3`
/// for a (2,1) structure in three dimensions.
pub fn average_pairwise_tau(d: usize, tau0: f64, groups: &[(Vec<usize>, f64)]) -> f64 {
    let pairs = d * (d - 1) / 2;
    let mut sum = 0.0;
    let mut inner = 0usize;
    for (members, tau) in groups {
        let k = members.len();
        let c = k * k.saturating_sub(1) / 2;
        sum += c as f64 * tau;
        inner += c;
    }
    sum += (pairs - inner) as f64 * tau0;
    sum / pairs as f64
}

fn parse_groups(text: &str) -> Result<Vec<(Vec<usize>, f64)>> {
    text.split('/')
        .filter(|g| !g.trim().is_empty())
        .map(|g| {
            let (members, tau) = g.split_once('@').ok_or_else(|| {
                Error::Config(format!("group '{g}' must look like 1+2@0.4"))
            })?;
            let members = members
                .split('+')
                .map(|m| {
                    let idx: usize = m.trim().parse().map_err(|_| {
                        Error::Config(format!("bad group member '{m}'"))
                    })?;
                    if idx == 0 {
                        return Err(Error::Config("group members are 1-based".into()));
                    }
                    Ok(idx - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            let tau = tau
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad group tau '{tau}'")))?;
            Ok((members, tau))
        })
        .collect()
}

/// Parses `family:key=value,...` model descriptions such as
/// `clayton:d=3,tau=0.4`, `t:d=3,nu=4,tau=0.2,groups=1+2@0.7`,
/// `nested-clayton:d=5,tau0=0.2,groups=1+2@0.4/3+4+5@0.6` or
/// `t:d=5,nu=4,random=7` (random correlation matrix from seed 7).
impl FromStr for CopulaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{item}'")))?;
            kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let num = |key: &str| -> Result<Option<f64>> {
            kv.get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Config(format!("'{key}' must be a number, got '{v}'")))
                })
                .transpose()
        };
        let d = match num("d")? {
            Some(v) if v >= 1.0 && v.fract() == 0.0 => v as usize,
            Some(v) => return Err(Error::Config(format!("d must be a positive integer, got {v}"))),
            None => 2,
        };
        let need = |key: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("model '{s}' needs '{key}='")))
        };
        let groups = kv.get("groups").map(|g| parse_groups(g)).transpose()?;
        let family_name = family.trim().to_ascii_lowercase();
        let spec = match family_name.as_str() {
            "nested-clayton" | "nclayton" => {
                let tau0 = need("tau0", num("tau0")?)?;
                CopulaSpec::nested_clayton_tau(d, tau0, &groups.unwrap_or_default())?
            }
            _ => {
                let fam: Family = family_name.parse()?;
                let tau = num("tau")?;
                match fam {
                    Family::Independence => CopulaSpec::Independence { d },
                    Family::Clayton => match num("theta")? {
                        Some(theta) => CopulaSpec::Clayton { d, theta },
                        None => CopulaSpec::clayton_tau(d, need("tau", tau)?)?,
                    },
                    Family::Frank => match num("theta")? {
                        Some(theta) => CopulaSpec::Frank { d, theta },
                        None => CopulaSpec::frank_tau(d, need("tau", tau)?)?,
                    },
                    Family::Gumbel => match num("theta")? {
                        Some(theta) => CopulaSpec::Gumbel { d, theta },
                        None => CopulaSpec::gumbel_tau(d, need("tau", tau)?)?,
                    },
                    Family::Normal | Family::NormalExchangeable | Family::StudentT => {
                        let p = if let Some(seed) = num("random")? {
                            random_correlation_matrix(d, &mut Rng::new(seed as u64))?
                        } else if let Some(g) = &groups {
                            hierarchical_correlation(d, need("tau", tau)?, g)?
                        } else {
                            let rho = match num("rho")? {
                                Some(r) => r,
                                None => tau_to_param(Family::Normal, need("tau", tau)?)?,
                            };
                            if fam == Family::NormalExchangeable {
                                let spec = CopulaSpec::NormalExchangeable { d, rho };
                                spec.validate()?;
                                return Ok(spec);
                            }
                            CorrelationMatrix::exchangeable(d, rho)?
                        };
                        if fam == Family::StudentT {
                            CopulaSpec::StudentT {
                                nu: need("nu", num("nu")?)?,
                                p,
                            }
                        } else {
                            CopulaSpec::Normal { p }
                        }
                    }
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
