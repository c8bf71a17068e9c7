use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{tensor_points, GridSpec, GridSurface, Lookup};
use super::keys::{simulator_keys, Coefficient, CoefficientKey, Surface};
use super::AeroError;
use crate::linalg::GaussianDraw;
use crate::mfgp::{MfgpModel, MfgpRecord};
use crate::seed::derive_seed;

/// Reference lengths (m) and area (m²) used to dimensionalize coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceGeometry {
    pub mac: f64,
    pub span: f64,
    pub area: f64,
}

impl Default for ReferenceGeometry {
    fn default() -> Self {
        Self {
            mac: 3.374,
            span: 23.159,
            area: 70.079,
        }
    }
}

/// Mass (kg) and principal moments of inertia (kg·m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    pub mass: f64,
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
}

impl Default for MassProperties {
    fn default() -> Self {
        Self {
            mass: 25_332.0,
            ixx: 238_419.0,
            iyy: 1_510_624.0,
            izz: 1_717_539.0,
        }
    }
}

/// One surrogate per coefficient plus the aircraft constants.
#[derive(Debug, Clone)]
pub struct DatabaseModel {
    entries: BTreeMap<CoefficientKey, MfgpModel>,
    pub reference: ReferenceGeometry,
    pub mass: MassProperties,
    pub grid: GridSpec,
}

impl DatabaseModel {
    pub fn new(reference: ReferenceGeometry, mass: MassProperties, grid: GridSpec) -> Self {
        Self {
            entries: BTreeMap::new(),
            reference,
            mass,
            grid,
        }
    }

    pub fn insert(&mut self, key: CoefficientKey, model: MfgpModel) -> Result<(), AeroError> {
        if model.dim() != key.signature().len() {
            return Err(AeroError::Signature {
                key: key.to_string(),
                expected: key.signature().len(),
                found: model.dim(),
            });
        }
        self.entries.insert(key, model);
        Ok(())
    }

    pub fn get(&self, key: &CoefficientKey) -> Option<&MfgpModel> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &CoefficientKey> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fails with the first missing key the flight simulator needs.
    pub fn check_complete(&self) -> Result<(), AeroError> {
        check_keys(self.entries.keys())
    }

    /// Posterior mean and square-root factor of every coefficient on `grid`.
    pub fn prepare(&self, grid: &GridSpec) -> Result<PreparedDatabase, AeroError> {
        let entries: Result<Vec<_>, AeroError> = self
            .entries
            .par_iter()
            .map(|(key, model)| {
                let deltas = training_deltas(key, model);
                let axes = grid.axes_for(key, &deltas)?;
                let pts = tensor_points(&axes);
                let (mut mean, mut cov) = model.predict(&pts).map_err(|e| AeroError::model(key, e))?;
                let pinned: Vec<usize> = match key.delta_column() {
                    Some(d) => (0..pts.nrows()).filter(|&i| pts[(i, d)] == 0.0).collect(),
                    None => Vec::new(),
                };
                for &i in &pinned {
                    mean[i] = 0.0;
                    cov.row_mut(i).fill(0.0);
                    cov.column_mut(i).fill(0.0);
                }
                let draw = GaussianDraw::new(mean, &cov).ok_or_else(|| AeroError::NotFactorizable(key.to_string()))?;
                Ok((*key, PreparedEntry { axes, draw, pinned }))
            })
            .collect();
        Ok(PreparedDatabase {
            entries: entries?.into_iter().collect(),
            reference: self.reference,
            mass: self.mass,
        })
    }
}

pub(crate) fn check_keys<'a>(present: impl Iterator<Item = &'a CoefficientKey>) -> Result<(), AeroError> {
    let present: Vec<&CoefficientKey> = present.collect();
    for k in simulator_keys() {
        if !present.contains(&&k) {
            return Err(AeroError::MissingKey(k.to_string()));
        }
    }
    Ok(())
}

fn training_deltas(key: &CoefficientKey, model: &MfgpModel) -> Vec<f64> {
    let Some(d) = key.delta_column() else {
        return Vec::new();
    };
    let mut out: Vec<f64> = model.base().dataset().inputs().column(d).iter().cloned().collect();
    for t in 2..=model.levels() {
        if let Some(level) = model.level(t) {
            out.extend(level.dataset().inputs().column(d).iter().cloned());
        }
    }
    out
}

#[derive(Debug, Clone)]
struct PreparedEntry {
    axes: Vec<Vec<f64>>,
    draw: GaussianDraw,
    /// Grid nodes at zero deflection, held at exactly zero.
    pinned: Vec<usize>,
}

/// A database whose grid posteriors are factorized once so that drawing
/// samples costs one matrix-vector product per coefficient.
#[derive(Debug, Clone)]
pub struct PreparedDatabase {
    entries: BTreeMap<CoefficientKey, PreparedEntry>,
    pub reference: ReferenceGeometry,
    pub mass: MassProperties,
}

impl PreparedDatabase {
    pub fn keys(&self) -> impl Iterator<Item = &CoefficientKey> {
        self.entries.keys()
    }

    pub fn check_complete(&self) -> Result<(), AeroError> {
        check_keys(self.entries.keys())
    }

    /// Draws every coefficient with a seed derived from `(seed, key)`.
    pub fn sample(&self, seed: u64) -> DatabaseSample {
        let surfaces = self
            .entries
            .iter()
            .map(|(key, e)| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, key.ordinal()));
                let mut values: Vec<f64> = e.draw.draw(&mut rng).iter().cloned().collect();
                for &i in &e.pinned {
                    values[i] = 0.0;
                }
                (*key, surface(e, values))
            })
            .collect();
        DatabaseSample {
            sample_id: Some(seed),
            surfaces,
            reference: self.reference,
            mass: self.mass,
        }
    }

    /// The posterior-mean database.
    pub fn mean_sample(&self) -> DatabaseSample {
        let surfaces = self
            .entries
            .iter()
            .map(|(key, e)| (*key, surface(e, e.draw.mean().iter().cloned().collect())))
            .collect();
        DatabaseSample {
            sample_id: None,
            surfaces,
            reference: self.reference,
            mass: self.mass,
        }
    }
}

fn surface(e: &PreparedEntry, values: Vec<f64>) -> GridSurface {
    GridSurface::new(e.axes.clone(), values).expect("grid sizes are consistent by construction")
}

/// Draws one database instance on `grid`.
pub fn sample_database(model: &DatabaseModel, grid: &GridSpec, seed: u64) -> Result<DatabaseSample, AeroError> {
    Ok(model.prepare(grid)?.sample(seed))
}

/// Control deflections in degrees; absent surfaces are undeflected.
pub type Deflections = BTreeMap<Surface, f64>;

/// One realization of the database: a lookup table per coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct DatabaseSample {
    /// Seed that produced the draw; `None` for the mean database.
    pub sample_id: Option<u64>,
    surfaces: BTreeMap<CoefficientKey, GridSurface>,
    pub reference: ReferenceGeometry,
    pub mass: MassProperties,
}

impl DatabaseSample {
    /// Assembles a sample from explicit tables.
    pub fn from_surfaces(
        surfaces: BTreeMap<CoefficientKey, GridSurface>,
        reference: ReferenceGeometry,
        mass: MassProperties,
    ) -> Result<Self, AeroError> {
        for (k, s) in &surfaces {
            if s.dim() != k.signature().len() {
                return Err(AeroError::Signature {
                    key: k.to_string(),
                    expected: k.signature().len(),
                    found: s.dim(),
                });
            }
        }
        Ok(Self {
            sample_id: None,
            surfaces,
            reference,
            mass,
        })
    }

    pub fn surface(&self, key: &CoefficientKey) -> Option<&GridSurface> {
        self.surfaces.get(key)
    }

    pub fn check_complete(&self) -> Result<(), AeroError> {
        check_keys(self.surfaces.keys())
    }

    /// Value of a single table at `(α, β, δ)`; unused inputs are ignored.
    pub fn value(&self, key: &CoefficientKey, alpha: f64, beta: f64, delta: f64) -> Result<Lookup, AeroError> {
        let s = self
            .surfaces
            .get(key)
            .ok_or_else(|| AeroError::MissingKey(key.to_string()))?;
        Ok(s.eval(&key.point(alpha, beta, delta)))
    }

    /// Baseline coefficient plus the increment of every deflected surface.
    pub fn total_coefficient(
        &self,
        base: Coefficient,
        alpha: f64,
        beta: f64,
        deflections: &Deflections,
    ) -> Result<Lookup, AeroError> {
        let mut total = self.value(&CoefficientKey::base(base), alpha, beta, 0.0)?;
        for (surface, delta) in deflections {
            if *delta == 0.0 || !surface.affects(base) {
                continue;
            }
            let key = CoefficientKey::increment(base, *surface)?;
            let inc = self.value(&key, alpha, beta, *delta)?;
            total.value += inc.value;
            total.extrapolated |= inc.extrapolated;
        }
        Ok(total)
    }
}

/// On-disk form of a database model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatabaseRecord {
    pub reference: ReferenceGeometry,
    pub mass: MassProperties,
    pub grid: GridSpec,
    pub entries: BTreeMap<CoefficientKey, MfgpRecord>,
}

impl From<&DatabaseModel> for DatabaseRecord {
    fn from(m: &DatabaseModel) -> Self {
        Self {
            reference: m.reference,
            mass: m.mass,
            grid: m.grid.clone(),
            entries: m.entries.iter().map(|(k, v)| (*k, MfgpRecord::from(v))).collect(),
        }
    }
}

impl TryFrom<DatabaseRecord> for DatabaseModel {
    type Error = AeroError;

    fn try_from(r: DatabaseRecord) -> Result<Self, Self::Error> {
        let mut db = DatabaseModel::new(r.reference, r.mass, r.grid);
        for (k, rec) in r.entries {
            let model = MfgpModel::try_from(rec).map_err(|e| AeroError::model(&k, e))?;
            db.insert(k, model)?;
        }
        Ok(db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aerodb::grid::AxisSpec;
    use crate::gp::{BasisSpec, Dataset, GpModel, KernelParams};

    fn key(s: &str) -> CoefficientKey {
        s.parse().unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec {
            alpha: AxisSpec::Values(vec![-4.0, 0.0, 4.0, 8.0]),
            beta: AxisSpec::Values(vec![-10.0, 0.0, 10.0]),
            delta: BTreeMap::new(),
        }
    }

    fn lift_model(noise: f64) -> MfgpModel {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for a in [-4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0] {
            for b in [-10.0, 0.0, 10.0] {
                rows.push(vec![a, b]);
                y.push(0.2 + 0.1 * a);
            }
        }
        let data = Dataset::from_rows(&rows, &y, &vec![noise; y.len()]).unwrap();
        let k = KernelParams::new(0.5, vec![30.0, 200.0]).unwrap();
        GpModel::with_kernel(data, BasisSpec::default(), k).unwrap().into()
    }

    fn aileron_model() -> MfgpModel {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for a in [-4.0, 4.0, 8.0] {
            for b in [-10.0, 10.0] {
                for d in [-20.0, 0.0, 20.0] {
                    rows.push(vec![a, b, d]);
                    y.push(0.001 * d);
                }
            }
        }
        let data = Dataset::from_rows(&rows, &y, &vec![0.002; y.len()]).unwrap();
        let k = KernelParams::new(1e-3, vec![100.0, 400.0, 400.0]).unwrap();
        GpModel::with_kernel(data, BasisSpec::default(), k).unwrap().into()
    }

    fn db(noise: f64) -> DatabaseModel {
        let mut db = DatabaseModel::new(Default::default(), Default::default(), small_grid());
        db.insert(key("CL"), lift_model(noise)).unwrap();
        db.insert(key("Cl_aileron"), aileron_model()).unwrap();
        db
    }

    #[test]
    fn default_geometry_and_mass() {
        let r = ReferenceGeometry::default();
        assert_eq!((r.mac, r.span, r.area), (3.374, 23.159, 70.079));
        let m = MassProperties::default();
        assert_eq!((m.mass, m.ixx, m.iyy, m.izz), (25_332.0, 238_419.0, 1_510_624.0, 1_717_539.0));
    }

    #[test]
    fn signature_enforced() {
        let mut d = DatabaseModel::new(Default::default(), Default::default(), small_grid());
        assert!(matches!(d.insert(key("Clp"), lift_model(0.01)), Err(AeroError::Signature { .. })));
    }

    #[test]
    fn incomplete_database_rejected() {
        assert!(matches!(db(0.01).check_complete(), Err(AeroError::MissingKey(_))));
    }

    #[test]
    fn sampling_is_reproducible() {
        let prepared = db(0.01).prepare(&small_grid()).unwrap();
        assert_eq!(prepared.sample(11), prepared.sample(11));
        assert_ne!(prepared.sample(11), prepared.sample(12));
        let s = prepared.sample(5);
        let a = s.value(&key("CL"), 2.5, 3.0, 0.0).unwrap();
        let b = s.value(&key("CL"), 2.5, 3.0, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_noise_sample_equals_mean() {
        let prepared = db(0.0).prepare(&small_grid()).unwrap();
        let s = prepared.sample(3);
        let m = prepared.mean_sample();
        let cl = key("CL");
        for (x, y) in s.surface(&cl).unwrap().values().iter().zip(m.surface(&cl).unwrap().values()) {
            assert!((x - y).abs() < 1e-4);
        }
    }

    #[test]
    fn increment_pinned_at_zero_deflection() {
        let prepared = db(0.01).prepare(&small_grid()).unwrap();
        let s = prepared.sample(9);
        let k = key("Cl_aileron");
        for a in [-4.0, 0.0, 8.0] {
            assert_eq!(s.value(&k, a, 0.0, 0.0).unwrap().value, 0.0);
        }
        assert_eq!(s.surface(&k).unwrap().axes()[2], vec![-20.0, 0.0, 20.0]);
    }

    #[test]
    fn total_is_additive() {
        let prepared = db(0.01).prepare(&small_grid()).unwrap();
        let s = prepared.sample(1);
        let mut defl = Deflections::new();
        let base = s.total_coefficient(Coefficient::Rolling, 2.0, 1.0, &defl);
        // baseline Cl is absent from this toy database
        assert!(base.is_err());
        defl.insert(Surface::Aileron, 7.0);
        let lift = s.total_coefficient(Coefficient::Lift, 2.0, 1.0, &defl).unwrap();
        let plain = s.value(&key("CL"), 2.0, 1.0, 0.0).unwrap();
        assert_eq!(lift, plain);
    }

    #[test]
    fn record_round_trip() {
        let d = db(0.01);
        let json = serde_json::to_string(&DatabaseRecord::from(&d)).unwrap();
        let back = DatabaseModel::try_from(serde_json::from_str::<DatabaseRecord>(&json).unwrap()).unwrap();
        let g = small_grid();
        assert_eq!(d.prepare(&g).unwrap().sample(4), back.prepare(&g).unwrap().sample(4));
    }
}
