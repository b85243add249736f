//! Named scenes: the two layered composites, the homogeneous penny crack and
//! the inclusion validation scene.
//!
//! Composites keep the published material tables, grid, frequency, noise,
//! threshold and sampling counts, but their meshes are scaled down to desk
//! budgets and only one interface is modeled in the background; they carry
//! the `best_effort` flag.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::background::transmission::MAX_KD;
use crate::background::{BackgroundModel, InclusionSpec};
use crate::error::invalid;
use crate::forward::assembly::closest_bary;
use crate::geometry::{parametric_surface, penny_crack, surface_patch, CrackGeometry, DirectionGrid, GridSpec, PatchRegion, SamplingSurface, SurfaceKind};
use crate::linalg::{c, CMat3, Point};
use crate::wavecore::{check_monotonicity, wave_numbers, ElasticMedium, WaveNumbers};
use crate::{Error, Result};

pub const PRESET_NAMES: [&str; 4] = ["composite1", "composite2", "penny-homogeneous", "inclusion-validation"];

/// Relative tolerance for deciding that a sampling point lies on a crack.
const ON_CRACK_TOL: f64 = 1e-9;

/// A closed material interface; `inner` is the medium it encloses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    pub name: String,
    pub surface: SurfaceKind,
    pub inner: ElasticMedium,
    pub outer: ElasticMedium,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Homogeneous,
    /// Penetrable inclusion bounded by the named interface.
    Inclusion { interface: String, resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub interfaces: Vec<InterfaceSpec>,
    pub model: ModelSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CrackShape {
    Penny { center: [f64; 3], radius: f64, normal: [f64; 3], refinement: usize },
    Patch { host: SurfaceKind, region: PatchRegion, resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackSpec {
    pub shape: CrackShape,
    /// Diagonal of `K` in the local `(ν, τ1, τ2)` frame.
    pub stiffness: [f64; 3],
}

impl CrackSpec {
    pub fn build(&self) -> Result<CrackGeometry> {
        if self.stiffness.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(invalid("stiffness", "entries must be finite and non-negative"));
        }
        let mut g = match &self.shape {
            CrackShape::Penny { center, radius, normal, refinement } => penny_crack(Point::from(*center), *radius, Point::from(*normal), *refinement)?,
            CrackShape::Patch { host, region, resolution } => surface_patch(host, region, *resolution)?,
        };
        let k = CMat3::from_diagonal(&nalgebra::Vector3::from(self.stiffness).map(c));
        g.stiffness = vec![k; g.len()];
        Ok(g)
    }

    /// Whether `p` lies on the crack surface.
    pub fn contains(&self, p: &Point) -> bool {
        match &self.shape {
            CrackShape::Penny { center, radius, normal, .. } => {
                let r = p - Point::from(*center);
                let n = Point::from(*normal).normalize();
                let along = r.dot(&n);
                along.abs() <= ON_CRACK_TOL * radius && (r - n * along).norm() <= radius * (1.0 + ON_CRACK_TOL)
            }
            CrackShape::Patch { host, region, .. } => host.on_surface(p, ON_CRACK_TOL) && region.contains(&host.center(), p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub surface: SurfaceKind,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Levels are the realized relative noise δ; the amplitude is calibrated per draw.
    Target,
    /// Levels are the amplitude ε of the entrywise perturbation.
    Amplitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    /// Level on `F`.
    pub level: f64,
    /// Level on `F_b`.
    pub level_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenePreset {
    pub name: String,
    pub best_effort: bool,
    pub omega: f64,
    pub exterior: ElasticMedium,
    pub background: BackgroundSpec,
    pub cracks: Vec<CrackSpec>,
    pub grid: GridSpec,
    pub sampling: Vec<SamplingSpec>,
    pub noise: NoiseSpec,
    pub tau: f64,
}

fn medium(lambda: f64, mu: f64, rho: f64) -> ElasticMedium {
    ElasticMedium { lambda, mu, rho }
}

fn ellipsoid(center: [f64; 3], semi_axes: [f64; 3]) -> SurfaceKind {
    SurfaceKind::Ellipsoid { center, semi_axes }
}

fn cap(axis: [f64; 3], half_angle_deg: f64) -> PatchRegion {
    PatchRegion::Cap { axis, half_angle_deg }
}

const REFERENCE_NOISE: NoiseSpec = NoiseSpec { mode: NoiseMode::Target, level: 0.05, level_b: 0.05 };
const REFERENCE_GRID: GridSpec = GridSpec { n_theta: 20, n_phi: 10 };

fn composite1() -> ScenePreset {
    let ext = medium(1.5, 1.0, 1.0);
    let mid = medium(0.4, 0.2, 0.75);
    let core = medium(0.6, 0.4, 1.5);
    let outer = ellipsoid([0.0; 3], [4.5, 4.0, 6.0]);
    let inner = ellipsoid([0.0; 3], [3.0, 2.5, 2.0]);
    ScenePreset {
        name: "composite1".into(),
        best_effort: true,
        omega: 4.0,
        exterior: ext,
        background: BackgroundSpec {
            interfaces: vec![
                InterfaceSpec { name: "outer".into(), surface: outer.clone(), inner: mid, outer: ext },
                InterfaceSpec { name: "core".into(), surface: inner.clone(), inner: core, outer: mid },
            ],
            model: ModelSpec::Inclusion { interface: "outer".into(), resolution: 6 },
        },
        cracks: vec![
            CrackSpec { shape: CrackShape::Patch { host: outer.clone(), region: cap([0.0, 1.0, 1.0], 25.0), resolution: 16 }, stiffness: [1.0; 3] },
            CrackSpec { shape: CrackShape::Patch { host: inner.clone(), region: cap([1.0, 0.0, 0.0], 30.0), resolution: 12 }, stiffness: [1.0; 3] },
        ],
        grid: REFERENCE_GRID,
        sampling: vec![SamplingSpec { surface: outer, count: 1225 }, SamplingSpec { surface: inner, count: 1000 }],
        noise: REFERENCE_NOISE,
        tau: 0.1,
    }
}

fn composite2() -> ScenePreset {
    let ext = medium(1.5, 1.0, 1.0);
    let inc = medium(0.4, 0.2, 0.5);
    let ell = ellipsoid([0.0; 3], [3.0, 2.0, 4.0]);
    let sphere = SurfaceKind::Sphere { center: [0.0, -4.0, -2.0], radius: 2.0 };
    let cube = SurfaceKind::Cube { center: [0.0, 3.0, 3.0], side: 1.8 };
    let iface = |name: &str, s: &SurfaceKind| InterfaceSpec { name: name.into(), surface: s.clone(), inner: inc, outer: ext };
    ScenePreset {
        name: "composite2".into(),
        best_effort: true,
        omega: 4.0,
        exterior: ext,
        background: BackgroundSpec {
            interfaces: vec![iface("ellipsoid", &ell), iface("sphere", &sphere), iface("cube", &cube)],
            model: ModelSpec::Inclusion { interface: "ellipsoid".into(), resolution: 6 },
        },
        cracks: vec![
            CrackSpec { shape: CrackShape::Patch { host: ell.clone(), region: cap([1.0, 0.0, 0.0], 30.0), resolution: 14 }, stiffness: [0.0; 3] },
            CrackSpec { shape: CrackShape::Patch { host: sphere.clone(), region: cap([0.0, -1.0, 0.0], 35.0), resolution: 10 }, stiffness: [2.0; 3] },
            CrackSpec { shape: CrackShape::Patch { host: cube.clone(), region: cap([0.0, 0.0, 1.0], 30.0), resolution: 8 }, stiffness: [2.0; 3] },
        ],
        grid: REFERENCE_GRID,
        sampling: vec![
            SamplingSpec { surface: ell, count: 900 },
            SamplingSpec { surface: sphere, count: 200 },
            SamplingSpec { surface: cube, count: 150 },
        ],
        noise: REFERENCE_NOISE,
        tau: 0.1,
    }
}

fn penny_homogeneous() -> ScenePreset {
    ScenePreset {
        name: "penny-homogeneous".into(),
        best_effort: false,
        omega: 4.0,
        exterior: medium(1.5, 1.0, 1.0),
        background: BackgroundSpec { interfaces: vec![], model: ModelSpec::Homogeneous },
        cracks: vec![CrackSpec {
            shape: CrackShape::Penny { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0], refinement: 3 },
            stiffness: [1.0; 3],
        }],
        grid: REFERENCE_GRID,
        sampling: vec![SamplingSpec { surface: SurfaceKind::Plane { center: [0.0; 3], normal: [0.0, 0.0, 1.0], half_extent: 2.0 }, count: 441 }],
        noise: REFERENCE_NOISE,
        tau: 0.1,
    }
}

fn inclusion_validation() -> ScenePreset {
    let ext = medium(1.5, 1.0, 1.0);
    let sphere = SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 };
    ScenePreset {
        name: "inclusion-validation".into(),
        best_effort: false,
        omega: 4.0,
        exterior: ext,
        background: BackgroundSpec {
            interfaces: vec![InterfaceSpec { name: "sphere".into(), surface: sphere.clone(), inner: medium(1.0, 0.6, 1.0), outer: ext }],
            model: ModelSpec::Inclusion { interface: "sphere".into(), resolution: 5 },
        },
        cracks: vec![CrackSpec { shape: CrackShape::Patch { host: sphere.clone(), region: cap([0.0, 0.0, 1.0], 40.0), resolution: 8 }, stiffness: [1.0; 3] }],
        grid: GridSpec { n_theta: 12, n_phi: 12 },
        sampling: vec![SamplingSpec { surface: sphere, count: 400 }],
        noise: REFERENCE_NOISE,
        tau: 0.1,
    }
}

/// Look up a named preset.
pub fn preset(name: &str) -> Result<ScenePreset> {
    match name {
        "composite1" => Ok(composite1()),
        "composite2" => Ok(composite2()),
        "penny-homogeneous" => Ok(penny_homogeneous()),
        "inclusion-validation" => Ok(inclusion_validation()),
        _ => Err(invalid("preset", format!("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", ")))),
    }
}

impl ScenePreset {
    fn modeled(&self) -> Option<(&InterfaceSpec, usize)> {
        match &self.background.model {
            ModelSpec::Homogeneous => None,
            ModelSpec::Inclusion { interface, resolution } => self.background.interfaces.iter().find(|i| &i.name == interface).map(|i| (i, *resolution)),
        }
    }

    /// Check the scene and return warnings for the approximations it implies.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        self.exterior.validate()?;
        DirectionGrid::from_spec(&self.grid)?;
        let mut names = HashSet::new();
        for i in &self.background.interfaces {
            if !names.insert(i.name.as_str()) {
                return Err(invalid("interfaces", format!("duplicate interface `{}`", i.name)));
            }
            i.surface.validate()?;
            if !i.surface.is_closed() {
                return Err(invalid("interfaces", format!("`{}` is not a closed surface", i.name)));
            }
            i.inner.validate()?;
            i.outer.validate()?;
            if !check_monotonicity(&i.inner, &i.outer) {
                return Err(invalid("interfaces", format!("media on `{}` violate (λ₁ − λ₂)(μ₁ − μ₂) ≥ 0", i.name)));
            }
        }
        let mut approximations = Vec::new();
        match &self.background.model {
            ModelSpec::Homogeneous => {}
            ModelSpec::Inclusion { interface, resolution } => {
                let (spec, _) = self.modeled().ok_or_else(|| invalid("background.model", format!("no interface named `{interface}`")))?;
                if spec.outer != self.exterior {
                    return Err(Error::Unsupported(format!("interface `{interface}` is nested; only inclusions in the exterior medium can be modeled")));
                }
                if *resolution == 0 {
                    return Err(invalid("background.model.resolution", "must be at least 1"));
                }
                let kd = wave_numbers(self.omega, &self.exterior)?.k_s * spec.surface.diameter();
                if kd > MAX_KD {
                    // same wording as the solver warning, so run manifests can merge the two
                    approximations.push(format!("k_s·diameter = {kd:.2} exceeds the validated range {MAX_KD}"));
                }
            }
        }
        let modeled = self.modeled().map(|m| m.0.name.clone());
        for i in &self.background.interfaces {
            if modeled.as_ref() != Some(&i.name) {
                approximations.push(format!("interface `{}` is not modeled in the background response", i.name));
            }
        }
        if !approximations.is_empty() && !self.best_effort {
            return Err(invalid("best_effort", format!("scene needs the best-effort flag: {}", approximations.join("; "))));
        }
        warnings.extend(approximations);
        if self.cracks.is_empty() {
            return Err(invalid("cracks", "at least one crack is required"));
        }
        if self.sampling.is_empty() {
            return Err(invalid("sampling", "at least one sampling surface is required"));
        }
        for s in &self.sampling {
            s.surface.validate()?;
        }
        let n = &self.noise;
        for (name, v) in [("noise.level", n.level), ("noise.level_b", n.level_b)] {
            let ok = match n.mode {
                NoiseMode::Target => (0.0..1.0).contains(&v),
                NoiseMode::Amplitude => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(invalid(name, format!("out of range: {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(invalid("tau", format!("must be in [0, 1], got {}", self.tau)));
        }
        Ok(warnings)
    }

    pub fn wave_numbers(&self) -> Result<WaveNumbers> {
        wave_numbers(self.omega, &self.exterior)
    }

    pub fn direction_grid(&self) -> Result<DirectionGrid> {
        DirectionGrid::from_spec(&self.grid)
    }

    pub fn build_background(&self) -> Result<BackgroundModel> {
        match self.modeled() {
            None => Ok(BackgroundModel::Homogeneous { exterior: self.exterior }),
            Some((i, resolution)) => BackgroundModel::inclusion(
                InclusionSpec { surface: i.surface.clone(), interior: i.inner, exterior: self.exterior, resolution },
                self.omega,
            ),
        }
    }

    /// All crack patches merged into one geometry.
    pub fn build_crack(&self) -> Result<CrackGeometry> {
        CrackGeometry::merge(self.cracks.iter().map(CrackSpec::build).collect::<Result<_>>()?)
    }

    /// Sampling points with outward normals and on-crack truth labels.
    pub fn build_sampling(&self) -> Result<SamplingSurface> {
        let parts = self
            .sampling
            .iter()
            .map(|s| {
                let mut surf = parametric_surface(&s.surface, s.count)?;
                surf.truth = Some(surf.points.iter().map(|p| self.cracks.iter().any(|c| c.contains(p))).collect());
                Ok(surf)
            })
            .collect::<Result<Vec<_>>>()?;
        SamplingSurface::concat(parts)
    }
}

impl CrackSpec {
    /// Distance from `p` to the crack (exact for pennies, to the patch mesh otherwise).
    fn distance_fn(&self) -> Result<Box<dyn Fn(&Point) -> f64 + Sync + '_>> {
        Ok(match &self.shape {
            CrackShape::Penny { center, radius, normal, .. } => {
                let (c0, n, r0) = (Point::from(*center), Point::from(*normal).normalize(), *radius);
                Box::new(move |p: &Point| {
                    let r = p - c0;
                    let along = r.dot(&n);
                    let radial = (r - n * along).norm();
                    (along * along + (radial - r0).max(0.0).powi(2)).sqrt()
                })
            }
            CrackShape::Patch { .. } => {
                let g = self.build()?;
                Box::new(move |p: &Point| {
                    g.triangles
                        .iter()
                        .map(|t| {
                            let (a, b, cc) = (&g.nodes[t[0]], &g.nodes[t[1]], &g.nodes[t[2]]);
                            let w = closest_bary(p, a, b, cc);
                            (p - (a * w[0] + b * w[1] + cc * w[2])).norm()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
            }
        })
    }
}

/// Median nearest-neighbour spacing of a point set.
pub fn sampling_cell(points: &[Point]) -> f64 {
    let mut nn: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .collect();
    nn.sort_by(f64::total_cmp);
    nn.get(nn.len() / 2).copied().unwrap_or(0.0)
}

impl ScenePreset {
    /// Cracks grown by one sampling cell: points within `√2 ×` the median
    /// nearest-neighbour spacing of any crack.
    pub fn dilated_truth(&self, points: &[Point]) -> Result<Vec<bool>> {
        let radius = sampling_cell(points) * 2f64.sqrt() * (1.0 + 1e-9);
        let dists = self.cracks.iter().map(CrackSpec::distance_fn).collect::<Result<Vec<_>>>()?;
        Ok(points.iter().map(|p| dists.iter().any(|d| d(p) <= radius)).collect())
    }
}
