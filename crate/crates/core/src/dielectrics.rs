//! Frequency-dependent dielectric properties of tissues and engineered materials.
//!
//! Tissues follow the 4-term Cole-Cole model
//!
//! ```text
//! ε̂(ω) = ε∞ + Σₙ Δεₙ / (1 + (jωτₙ)^(1−αₙ)) + σᵢ / (jωε₀)
//! ```
//!
//! written with the `ε̂ = ε' − jε''` sign convention. The FDTD solver is not dispersive, so
//! every material is frozen to an `(εᵣ, σ)` pair at a reference frequency before
//! rasterization (see [`MaterialSpec::medium_at`]).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::consts::{AIR_DENSITY, EPS0, PI};
use crate::{Complex, Error, Result};

/// One relaxation term of a Cole-Cole expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub delta_eps: f64,
    /// Relaxation time, seconds.
    pub tau: f64,
    /// Broadening exponent in `[0, 1)`.
    pub alpha: f64,
}

/// 4-term Cole-Cole parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColeColeParams {
    pub eps_inf: f64,
    pub terms: [Relaxation; 4],
    /// Static ionic conductivity, S/m.
    pub sigma_ionic: f64,
}

impl ColeColeParams {
    /// Checked constructor.
    pub fn new(eps_inf: f64, terms: [Relaxation; 4], sigma_ionic: f64) -> Result<Self> {
        let params = Self {
            eps_inf,
            terms,
            sigma_ionic,
        };
        params.validate()?;
        Ok(params)
    }

    /// A dispersion-free parameter set (`ε̂ = eps_inf` at every frequency).
    pub fn constant(eps_inf: f64) -> Self {
        let term = Relaxation {
            delta_eps: 0.0,
            tau: 1e-12,
            alpha: 0.0,
        };
        Self {
            eps_inf,
            terms: [term; 4],
            sigma_ionic: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_inf >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eps_inf must be >= 1, got {}",
                self.eps_inf
            )));
        }
        for (n, t) in self.terms.iter().enumerate() {
            if !(t.delta_eps >= 0.0) || !(t.tau > 0.0) || !(0.0..1.0).contains(&t.alpha) {
                return Err(Error::InvalidArgument(format!(
                    "relaxation term {} out of range: {:?}",
                    n + 1,
                    t
                )));
            }
        }
        if !(self.sigma_ionic >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma_ionic must be >= 0, got {}",
                self.sigma_ionic
            )));
        }
        Ok(())
    }

    /// Shorthand for [`evaluate_cole_cole`].
    pub fn evaluate(&self, f: f64) -> Result<Complex> {
        evaluate_cole_cole(self, f)
    }
}

/// Complex relative permittivity `ε' − jε''` of a Cole-Cole medium at `f` Hz.
pub fn evaluate_cole_cole(params: &ColeColeParams, f: f64) -> Result<Complex> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {f}"
        )));
    }
    let omega = 2.0 * PI * f;
    let mut eps = Complex::new(params.eps_inf, 0.0);
    for t in &params.terms {
        if t.delta_eps == 0.0 {
            continue;
        }
        // (jωτ)^(1−α) on the principal branch: magnitude (ωτ)^(1−α), phase (1−α)·π/2.
        let order = 1.0 - t.alpha;
        let mag = libm::pow(omega * t.tau, order);
        let phase = order * PI / 2.0;
        let denom = Complex::new(1.0 + mag * libm::cos(phase), mag * libm::sin(phase));
        eps += Complex::new(t.delta_eps, 0.0) / denom;
    }
    eps -= Complex::new(0.0, params.sigma_ionic / (omega * EPS0));
    Ok(eps)
}

/// Effective conductivity `ωε₀ε''` in S/m of a complex relative permittivity `ε' − jε''`.
pub fn effective_conductivity(eps: Complex, f: f64) -> f64 {
    2.0 * PI * f * EPS0 * (-eps.im)
}

/// Narrowband `(εᵣ, σ)` pair used by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub eps_r: f64,
    pub sigma: f64,
}

impl Medium {
    pub const VACUUM: Medium = Medium {
        eps_r: 1.0,
        sigma: 0.0,
    };
}

/// What a material is made of.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialKind {
    /// Dispersive biological tissue.
    Tissue(ColeColeParams),
    /// Frequency-independent dielectric (e.g. a frozen loss tangent).
    Dielectric { eps_r: f64, sigma: f64 },
    /// Good conductor with finite bulk conductivity.
    Conductor { sigma: f64 },
    PerfectConductor,
    Air,
}

/// A named medium together with its mass density.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub name: String,
    pub kind: MaterialKind,
    /// kg/m³
    pub density: f64,
}

impl MaterialSpec {
    pub fn air() -> Self {
        Self {
            name: "air".to_string(),
            kind: MaterialKind::Air,
            density: AIR_DENSITY,
        }
    }

    pub fn perfect_conductor(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: MaterialKind::PerfectConductor,
            density: 8000.0,
        }
    }

    pub fn conductor(name: &str, sigma: f64, density: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "conductor `{name}` needs sigma > 0 and density > 0"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            kind: MaterialKind::Conductor { sigma },
            density,
        })
    }

    pub fn dielectric(name: &str, eps_r: f64, sigma: f64, density: f64) -> Result<Self> {
        if !(eps_r >= 1.0) || !(sigma >= 0.0) || !(density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dielectric `{name}` needs eps_r >= 1, sigma >= 0, density > 0"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            kind: MaterialKind::Dielectric { eps_r, sigma },
            density,
        })
    }

    pub fn tissue(name: &str, params: ColeColeParams, density: f64) -> Result<Self> {
        params.validate()?;
        if !(density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tissue `{name}` needs density > 0"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            kind: MaterialKind::Tissue(params),
            density,
        })
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn is_tissue(&self) -> bool {
        matches!(self.kind, MaterialKind::Tissue(_))
    }

    /// True for media the solver treats as perfect electric conductor.
    ///
    /// Finite-conductivity metals are included: at 2.45 GHz their skin depth is a few
    /// micrometres, far below any cell size the grid can resolve.
    pub fn is_metal(&self) -> bool {
        matches!(
            self.kind,
            MaterialKind::PerfectConductor | MaterialKind::Conductor { .. }
        )
    }

    /// Frozen `(εᵣ, σ)` at frequency `f`. Metals report vacuum; they are handled as PEC.
    pub fn medium_at(&self, f: f64) -> Result<Medium> {
        Ok(match &self.kind {
            MaterialKind::Tissue(p) => {
                let eps = evaluate_cole_cole(p, f)?;
                Medium {
                    eps_r: eps.re,
                    sigma: effective_conductivity(eps, f),
                }
            }
            MaterialKind::Dielectric { eps_r, sigma } => Medium {
                eps_r: *eps_r,
                sigma: *sigma,
            },
            MaterialKind::Conductor { .. } | MaterialKind::PerfectConductor | MaterialKind::Air => {
                Medium::VACUUM
            }
        })
    }
}

/// Narrowband constant-conductivity dielectric equivalent to a loss tangent at `f_ref`.
///
/// `σ = 2π f_ref ε₀ εᵣ tanδ`. The returned material is named `"dielectric"` with a
/// density of 1000 kg/m³; use [`MaterialSpec::named`] / [`MaterialSpec::with_density`].
pub fn constant_from_tand(eps_r: f64, tan_delta: f64, f_ref: f64) -> Result<MaterialSpec> {
    if !(eps_r >= 1.0) || !(tan_delta >= 0.0) || !(f_ref > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constant_from_tand needs eps_r >= 1, tan_delta >= 0, f_ref > 0 \
             (got {eps_r}, {tan_delta}, {f_ref})"
        )));
    }
    let sigma = 2.0 * PI * f_ref * EPS0 * eps_r * tan_delta;
    MaterialSpec::dielectric("dielectric", eps_r, sigma, 1000.0)
}

/// Tissue record: Cole-Cole parameters plus density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueEntry {
    pub params: ColeColeParams,
    pub density: f64,
}

/// Name-indexed collection of tissue models.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TissueDatabase {
    entries: BTreeMap<String, TissueEntry>,
}

const BUILTIN_TISSUES: &str = include_str!("../data/tissues.txt");

impl TissueDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// The vendored Gabriel/IFAC parameter table.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TISSUES).expect("vendored tissue table is valid")
    }

    /// Parse the line-oriented tissue table format.
    ///
    /// Each non-comment line holds 16 whitespace-separated fields: name, ε∞, four
    /// `(Δε, τ, α)` triples, σ_ionic and density. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut db = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 16 {
                return Err(Error::Data(format!(
                    "line {}: expected 16 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut nums = [0.0f64; 15];
            for (slot, text) in nums.iter_mut().zip(&fields[1..]) {
                *slot = text.parse::<f64>().map_err(|_| {
                    Error::Data(format!("line {}: `{}` is not a number", lineno + 1, text))
                })?;
            }
            let term = |n: usize| Relaxation {
                delta_eps: nums[1 + 3 * n],
                tau: nums[2 + 3 * n],
                alpha: nums[3 + 3 * n],
            };
            let params = ColeColeParams::new(nums[0], [term(0), term(1), term(2), term(3)], nums[13])
                .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 1)))?;
            let density = nums[14];
            if !(density > 0.0) {
                return Err(Error::Data(format!(
                    "line {}: density must be positive",
                    lineno + 1
                )));
            }
            db.insert(fields[0], TissueEntry { params, density });
        }
        Ok(db)
    }

    pub fn insert(&mut self, name: &str, entry: TissueEntry) {
        self.entries.insert(name.to_string(), entry);
    }

    pub fn get(&self, name: &str) -> Option<&TissueEntry> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TissueEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Material spec for a named tissue.
    pub fn material(&self, name: &str) -> Result<MaterialSpec> {
        let entry = self
            .get(name)
            .ok_or_else(|| Error::UnknownTissue(name.to_string()))?;
        MaterialSpec::tissue(name, entry.params, entry.density)
    }

    /// Known names closest to `name` by edit distance, best first.
    pub fn suggestions(&self, name: &str, max: usize) -> Vec<&str> {
        let mut scored: Vec<(usize, &str)> = self
            .entries
            .keys()
            .map(|k| (edit_distance(name, k), k.as_str()))
            .collect();
        scored.sort();
        scored.into_iter().take(max).map(|(_, k)| k).collect()
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = Vec::with_capacity(b.len() + 1);
        cur.push(i + 1);
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}
