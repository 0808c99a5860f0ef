//! Strong-field (Paschen-Back) level structure of an alkali-like ion: the
//! S1/2 qubit sublevels and the P1/2, P3/2 excited manifolds, all in the
//! nuclear sublevel `mI` fixed by optical pumping.
//!
//! Energies are plain frequencies in Hz (Planck's constant absorbed) with the
//! S1/2 centroid as zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angular::{clebsch_gordan, HalfInt};
use crate::error::{Error, Result};

/// Bohr magneton over Planck's constant, Hz/T.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 1.399_624_493_61e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    S12,
    P12,
    P32,
}

impl Term {
    pub fn j(self) -> HalfInt {
        match self {
            Term::S12 | Term::P12 => HalfInt::HALF,
            Term::P32 => HalfInt::THREE_HALVES,
        }
    }

    pub fn excited_with_j(j: HalfInt) -> Option<Term> {
        match j.twice() {
            1 => Some(Term::P12),
            3 => Some(Term::P32),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Term::S12 => "S1/2",
            Term::P12 => "P1/2",
            Term::P32 => "P3/2",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The two qubit sublevels, `u = |+1/2>` and `d = |-1/2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Qubit {
    #[serde(rename = "u")]
    Up,
    #[serde(rename = "d")]
    Down,
}

impl Qubit {
    pub const BOTH: [Qubit; 2] = [Qubit::Up, Qubit::Down];

    pub fn mj(self) -> HalfInt {
        match self {
            Qubit::Up => HalfInt::HALF,
            Qubit::Down => HalfInt::MINUS_HALF,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Qubit::Up => "u",
            Qubit::Down => "d",
        }
    }
}

/// Key naming one level, written `"<term>:<MJ>"`, e.g. `"P3/2:+1/2"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelKey {
    pub term: Term,
    pub mj: HalfInt,
}

impl LevelKey {
    pub fn new(term: Term, mj: HalfInt) -> Result<Self> {
        let j = term.j();
        if mj.abs() > j || (j.twice() + mj.twice()) % 2 != 0 {
            return Err(Error::InvalidLevel(format!("{term} has no sublevel MJ = {mj}")));
        }
        Ok(LevelKey { term, mj })
    }
}

impl fmt::Display for LevelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.term, self.mj)
    }
}

impl FromStr for LevelKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLevel(format!("cannot parse level label {s:?} (expected e.g. \"P3/2:+1/2\")"));
        let (term, mj) = s.split_once(':').ok_or_else(bad)?;
        let term = match term.trim() {
            "S1/2" => Term::S12,
            "P1/2" => Term::P12,
            "P3/2" => Term::P32,
            _ => return Err(bad()),
        };
        let mj = mj.trim();
        let twice = match mj.strip_suffix("/2") {
            Some(num) => num.trim_start_matches('+').parse::<i32>().map_err(|_| bad())?,
            None => 2 * mj.trim_start_matches('+').parse::<i32>().map_err(|_| bad())?,
        };
        LevelKey::new(term, HalfInt::from_twice(twice))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConfig {
    /// Tesla.
    pub magnetic_field: f64,
    pub g_j_s12: f64,
    pub g_j_p12: f64,
    pub g_j_p32: f64,
    /// S1/2 centroid to P1/2 centroid, Hz.
    pub d1_frequency: f64,
    /// P3/2 centroid minus P1/2 centroid, Hz.
    pub fine_structure_split: f64,
    pub hyperfine_a_s12: f64,
    pub hyperfine_a_p12: f64,
    pub hyperfine_a_p32: f64,
    pub nuclear_mi: HalfInt,
    /// Nuclear Zeeman shift per tesla per unit mI, Hz/T. Common to every level.
    pub nuclear_zeeman: f64,
    /// Excited-state spontaneous decay rate, s^-1.
    pub gamma: f64,
    /// Absolute energies (Hz) replacing the computed ones, keyed by level label.
    pub level_overrides: BTreeMap<String, f64>,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        let mut cfg = PhysicalConfig {
            magnetic_field: 4.5,
            g_j_s12: 2.002_26,
            g_j_p12: 2.0 / 3.0,
            g_j_p32: 4.0 / 3.0,
            d1_frequency: 957.40e12,
            fine_structure_split: 197.2e9,
            hyperfine_a_s12: -625.009e6,
            hyperfine_a_p12: 0.0,
            hyperfine_a_p32: 0.0,
            nuclear_mi: HalfInt::THREE_HALVES,
            nuclear_zeeman: 0.0,
            gamma: 1.22e8,
            level_overrides: BTreeMap::new(),
        };
        cfg.magnetic_field = cfg
            .field_for_qubit_splitting(BERYLLIUM_QUBIT_SPLITTING_HZ)
            .expect("default constants admit a positive field");
        cfg
    }
}

/// Qubit splitting of the 9Be+ ground state used to calibrate the default field, Hz.
pub const BERYLLIUM_QUBIT_SPLITTING_HZ: f64 = 124.1e9;

impl PhysicalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("magnetic_field", self.magnetic_field)?;
        positive("gamma", self.gamma)?;
        positive("d1_frequency", self.d1_frequency)?;
        if !self.fine_structure_split.is_finite() {
            return Err(Error::InvalidConfig("fine_structure_split must be finite".into()));
        }
        if self.nuclear_mi.is_integer() {
            return Err(Error::InvalidConfig(format!("nuclear_mi must be a half-integer, got {}", self.nuclear_mi)));
        }
        for (label, energy) in &self.level_overrides {
            label.parse::<LevelKey>()?;
            if !energy.is_finite() {
                return Err(Error::InvalidConfig(format!("override for {label} is not finite")));
            }
        }
        Ok(())
    }

    fn g_factor(&self, term: Term) -> f64 {
        match term {
            Term::S12 => self.g_j_s12,
            Term::P12 => self.g_j_p12,
            Term::P32 => self.g_j_p32,
        }
    }

    fn hyperfine_a(&self, term: Term) -> f64 {
        match term {
            Term::S12 => self.hyperfine_a_s12,
            Term::P12 => self.hyperfine_a_p12,
            Term::P32 => self.hyperfine_a_p32,
        }
    }

    fn centroid(&self, term: Term) -> f64 {
        match term {
            Term::S12 => 0.0,
            Term::P12 => self.d1_frequency,
            Term::P32 => self.d1_frequency + self.fine_structure_split,
        }
    }

    /// Strong-field energy of a level at field `b`, ignoring overrides.
    fn computed_energy(&self, key: LevelKey, b: f64) -> f64 {
        let mj = key.mj.value();
        let mi = self.nuclear_mi.value();
        self.centroid(key.term)
            + self.g_factor(key.term) * BOHR_MAGNETON_HZ_PER_T * b * mj
            + self.hyperfine_a(key.term) * mj * mi
            + self.nuclear_zeeman * b * mi
    }

    /// Qubit splitting `E(u) - E(d)` as a function of field, before overrides.
    pub fn qubit_splitting_at(&self, b: f64) -> f64 {
        let u = LevelKey { term: Term::S12, mj: HalfInt::HALF };
        let d = LevelKey { term: Term::S12, mj: HalfInt::MINUS_HALF };
        self.computed_energy(u, b) - self.computed_energy(d, b)
    }

    /// Field at which the computed qubit splitting equals `target_hz`, found
    /// by bracketing and bisection on `qubit_splitting_at`.
    pub fn field_for_qubit_splitting(&self, target_hz: f64) -> Result<f64> {
        let f = |b: f64| self.qubit_splitting_at(b) - target_hz;
        let mut lo = 0.0;
        if f(lo) >= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "zero-field splitting {:.6e} Hz already exceeds target {target_hz:.6e} Hz",
                self.qubit_splitting_at(0.0)
            )));
        }
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::InvalidConfig(format!(
                    "no field below 1 MT reaches a qubit splitting of {target_hz:.6e} Hz"
                )));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeemanLevel {
    pub term: Term,
    pub j: HalfInt,
    pub mj: HalfInt,
    pub mi: HalfInt,
    /// Hz, relative to the S1/2 centroid.
    pub energy: f64,
}

impl ZeemanLevel {
    pub fn key(&self) -> LevelKey {
        LevelKey { term: self.term, mj: self.mj }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStructure {
    pub qubit_u: ZeemanLevel,
    pub qubit_d: ZeemanLevel,
    /// P3/2 sublevels (MJ = +3/2 .. -3/2) followed by P1/2 (MJ = +1/2, -1/2).
    pub excited: Vec<ZeemanLevel>,
    /// Excited-state decay rate, s^-1.
    pub gamma: f64,
}

pub fn build_levels(cfg: &PhysicalConfig) -> Result<LevelStructure> {
    cfg.validate()?;
    let mut overrides = BTreeMap::new();
    for (label, &energy) in &cfg.level_overrides {
        overrides.insert(label.parse::<LevelKey>()?, energy);
    }
    let make = |term: Term, twice_mj: i32| -> ZeemanLevel {
        let key = LevelKey { term, mj: HalfInt::from_twice(twice_mj) };
        let energy = overrides.get(&key).copied().unwrap_or_else(|| cfg.computed_energy(key, cfg.magnetic_field));
        ZeemanLevel { term, j: term.j(), mj: key.mj, mi: cfg.nuclear_mi, energy }
    };

    let levels = LevelStructure {
        qubit_u: make(Term::S12, 1),
        qubit_d: make(Term::S12, -1),
        excited: vec![
            make(Term::P32, 3),
            make(Term::P32, 1),
            make(Term::P32, -1),
            make(Term::P32, -3),
            make(Term::P12, 1),
            make(Term::P12, -1),
        ],
        gamma: cfg.gamma,
    };
    if levels.qubit_splitting() <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "qubit splitting must be positive, got {:.6e} Hz",
            levels.qubit_splitting()
        )));
    }
    Ok(levels)
}

/// Outcome of looking up a scattering path's intermediate state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detuning {
    /// Signed detuning in Hz; negative when the laser is below resonance.
    Hz(f64),
    /// `|lambda + m_i| > J`: no intermediate state, so no scattering path.
    NoPath,
}

impl Detuning {
    pub fn hz(self) -> Option<f64> {
        match self {
            Detuning::Hz(v) => Some(v),
            Detuning::NoPath => None,
        }
    }
}

impl LevelStructure {
    pub fn qubit(&self, q: Qubit) -> &ZeemanLevel {
        match q {
            Qubit::Up => &self.qubit_u,
            Qubit::Down => &self.qubit_d,
        }
    }

    pub fn qubit_splitting(&self) -> f64 {
        self.qubit_u.energy - self.qubit_d.energy
    }

    pub fn excited_level(&self, j: HalfInt, mj: HalfInt) -> Option<&ZeemanLevel> {
        self.excited.iter().find(|l| l.j == j && l.mj == mj)
    }

    pub fn level(&self, key: LevelKey) -> Option<&ZeemanLevel> {
        match key.term {
            Term::S12 if key.mj == HalfInt::HALF => Some(&self.qubit_u),
            Term::S12 if key.mj == HalfInt::MINUS_HALF => Some(&self.qubit_d),
            Term::S12 => None,
            _ => self.excited.iter().find(|l| l.key() == key),
        }
    }

    /// Transition frequency `|i> -> |J, MJ>` in Hz, if the excited level exists.
    pub fn transition_frequency(&self, i: Qubit, j: HalfInt, mj: HalfInt) -> Option<f64> {
        self.excited_level(j, mj).map(|e| e.energy - self.qubit(i).energy)
    }

    /// Frequency of the `|u> -> |3/2, 3/2>` cycling transition, Hz.
    pub fn cycling_frequency(&self) -> f64 {
        self.transition_frequency(Qubit::Up, HalfInt::THREE_HALVES, HalfInt::THREE_HALVES)
            .expect("P3/2 MJ=+3/2 always present")
    }

    /// Mean P3/2 sublevel energy minus mean qubit energy, Hz.
    pub fn p32_line_centroid(&self) -> f64 {
        let p32: Vec<f64> = self.excited.iter().filter(|l| l.term == Term::P32).map(|l| l.energy).collect();
        let mean_excited = p32.iter().sum::<f64>() / p32.len() as f64;
        mean_excited - 0.5 * (self.qubit_u.energy + self.qubit_d.energy)
    }

    /// Every dipole-allowed `|i> -> |J, MJ>` transition with its polarization
    /// index `lambda = MJ - m_i`.
    pub fn transitions(&self) -> Vec<Transition> {
        let mut out = Vec::new();
        for q in Qubit::BOTH {
            for level in &self.excited {
                let lambda = level.mj - q.mj();
                if lambda.abs() <= HalfInt::from_int(1) {
                    out.push(Transition {
                        from: q,
                        to: level.key(),
                        lambda: lambda.twice() / 2,
                        frequency: level.energy - self.qubit(q).energy,
                    });
                }
            }
        }
        out
    }

    /// Detuning of a laser at absolute frequency `omega0` (Hz) from the
    /// `|i> -> |J, i + lambda>` transition: `E(J, i+lambda) - E(i) - omega0`.
    pub fn detuning(&self, i: Qubit, j: HalfInt, lambda: i32, omega0: f64) -> Detuning {
        let mj = i.mj() + HalfInt::from_int(lambda);
        match self.transition_frequency(i, j, mj) {
            Some(f) if (-1..=1).contains(&lambda) => Detuning::Hz(f - omega0),
            _ => Detuning::NoPath,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub from: Qubit,
    pub to: LevelKey,
    pub lambda: i32,
    /// Hz.
    pub frequency: f64,
}

impl Serialize for LevelKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Ratio `<J, MJ| d.eps_lambda |1/2, m> / mu` of an S1/2 -> P_J dipole matrix
/// element to the cycling-transition element `mu`.
///
/// With LS coupling the reduced elements satisfy
/// `|<P3/2||d||S1/2>| = sqrt(2) |<P1/2||d||S1/2>|`; after the Wigner-Eckart
/// `1/sqrt(2J+1)` factor both manifolds share the same prefactor, so the
/// ratio is exactly the Clebsch-Gordan coefficient `<1/2 m; 1 lambda | J MJ>`.
/// The overall phase of each manifold's reduced element drops out of every
/// scattering amplitude, which multiplies two elements through the same `J`.
pub fn dipole_ratio(ground_mj: HalfInt, j: HalfInt, mj: HalfInt, lambda: i32) -> f64 {
    if !(-1..=1).contains(&lambda) || Term::excited_with_j(j).is_none() {
        return 0.0;
    }
    clebsch_gordan(HalfInt::HALF, ground_mj, HalfInt::from_int(1), HalfInt::from_int(lambda), j, mj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_labels_round_trip() {
        for s in ["S1/2:+1/2", "P1/2:-1/2", "P3/2:+3/2", "P3/2:-1/2"] {
            assert_eq!(s.parse::<LevelKey>().unwrap().to_string(), s);
        }
        assert!("P1/2:+3/2".parse::<LevelKey>().is_err());
        assert!("S1/2:0".parse::<LevelKey>().is_err());
        assert!("D5/2:+1/2".parse::<LevelKey>().is_err());
        assert!("P3/2".parse::<LevelKey>().is_err());
    }

    #[test]
    fn default_field_reproduces_qubit_splitting() {
        let cfg = PhysicalConfig::default();
        let levels = build_levels(&cfg).unwrap();
        assert!((levels.qubit_splitting() - 124.1e9).abs() < 1.0);
        assert!((cfg.magnetic_field - 4.46).abs() < 0.01, "B = {}", cfg.magnetic_field);
    }

    #[test]
    fn zero_field_degenerate_manifolds() {
        let cfg = PhysicalConfig { magnetic_field: 1e-300, hyperfine_a_s12: 0.0, ..Default::default() };
        // splitting is positive but vanishingly small; compare computed energies directly
        for term in [Term::S12, Term::P12, Term::P32] {
            let j = term.j().twice();
            let energies: Vec<f64> = (-j..=j)
                .step_by(2)
                .map(|m| cfg.computed_energy(LevelKey { term, mj: HalfInt::from_twice(m) }, 0.0))
                .collect();
            assert!(energies.windows(2).all(|w| w[0] == w[1]), "{term}: {energies:?}");
        }
    }

    #[test]
    fn override_is_exact() {
        let base = build_levels(&PhysicalConfig::default()).unwrap();
        let key: LevelKey = "P3/2:+1/2".parse().unwrap();
        let shifted = base.level(key).unwrap().energy + 1e9;
        let mut cfg = PhysicalConfig::default();
        cfg.level_overrides.insert("P3/2:+1/2".into(), shifted);
        let levels = build_levels(&cfg).unwrap();
        assert_eq!(levels.level(key).unwrap().energy - base.level(key).unwrap().energy, 1e9);
        // other levels untouched
        for (a, b) in levels.excited.iter().zip(&base.excited) {
            if a.key() != key {
                assert_eq!(a.energy, b.energy);
            }
        }
        assert_eq!(build_levels(&cfg).unwrap(), levels);
    }

    #[test]
    fn bad_override_label_rejected() {
        let mut cfg = PhysicalConfig::default();
        cfg.level_overrides.insert("P1/2:+3/2".into(), 1.0);
        assert!(matches!(build_levels(&cfg), Err(Error::InvalidLevel(_))));
    }

    #[test]
    fn rejects_nonpositive_field_and_gamma() {
        let cfg = PhysicalConfig { magnetic_field: 0.0, ..Default::default() };
        assert!(build_levels(&cfg).is_err());
        let cfg = PhysicalConfig { gamma: -1.0, ..Default::default() };
        assert!(build_levels(&cfg).is_err());
    }

    #[test]
    fn cycling_detuning_is_zero() {
        let levels = build_levels(&PhysicalConfig::default()).unwrap();
        let w0 = levels.cycling_frequency();
        assert_eq!(levels.detuning(Qubit::Up, HalfInt::THREE_HALVES, 1, w0), Detuning::Hz(0.0));
    }

    #[test]
    fn missing_intermediate_is_no_path() {
        let levels = build_levels(&PhysicalConfig::default()).unwrap();
        let w0 = levels.cycling_frequency();
        // |u> + sigma+ would need P1/2 MJ = +3/2
        assert_eq!(levels.detuning(Qubit::Up, HalfInt::HALF, 1, w0), Detuning::NoPath);
        assert_eq!(levels.detuning(Qubit::Down, HalfInt::HALF, -1, w0), Detuning::NoPath);
        assert!(levels.detuning(Qubit::Down, HalfInt::THREE_HALVES, 1, w0).hz().is_some());
        assert_eq!(levels.detuning(Qubit::Up, HalfInt::THREE_HALVES, 2, w0), Detuning::NoPath);
    }

    #[test]
    fn transitions_cover_allowed_lines() {
        let levels = build_levels(&PhysicalConfig::default()).unwrap();
        // each ground sublevel reaches 3 P3/2 and 2 P1/2 sublevels
        assert_eq!(levels.transitions().len(), 10);
    }

    #[test]
    fn dipole_ratio_normalization() {
        assert!((dipole_ratio(HalfInt::HALF, HalfInt::THREE_HALVES, HalfInt::THREE_HALVES, 1) - 1.0).abs() < 1e-15);
        assert_eq!(dipole_ratio(HalfInt::HALF, HalfInt::HALF, HalfInt::THREE_HALVES, 1), 0.0);
        assert_eq!(dipole_ratio(HalfInt::HALF, HalfInt::THREE_HALVES, HalfInt::HALF, 1), 0.0);
    }
}
