//! Run configuration: one JSON document, with command-line flags layered on
//! top, validated into core types.

use std::path::PathBuf;

use qecsim_core::layout::{reference_arrangement, Arrangement, Mode, Objective, TimingParams};
use qecsim_core::{
    baconshor, surface17, CnotOrder, CodeFamily, CodeSpec, DepolarizingParams, ImportanceParams, IonTrapParams,
    LogicalBasis, NoiseModel,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown code {0:?} (expected surface17, baconshor13 or baconshor<L>)")]
    UnknownCode(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Depolarizing,
    Iontrap,
}

/// The quantity a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Param {
    /// Depolarizing error rate.
    P,
    PXx,
    RHeating,
    RDephasing,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::PXx => "p_xx",
            Param::RHeating => "r_heating",
            Param::RDephasing => "r_dephasing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Direct,
    Importance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Gauge,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ArrangementSource {
    Reference,
    Anneal,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Serial,
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IonConfig {
    pub p_xx: f64,
    pub r_heating: f64,
    pub r_dephasing: f64,
    pub heating_factor: f64,
}

impl Default for IonConfig {
    fn default() -> Self {
        Self {
            p_xx: 1e-3,
            r_heating: 0.0,
            r_dephasing: 0.0,
            heating_factor: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            param: Param::P,
            values: vec![1e-3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Total trials (direct) or trials per stratum (importance).
    pub trials: u64,
    pub k_max: usize,
    pub exhaustive_budget: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let d = ImportanceParams::default();
        Self {
            kind: SamplerKind::Importance,
            trials: d.trials_per_stratum,
            k_max: d.k_max,
            exhaustive_budget: d.exhaustive_budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrangementConfig {
    pub source: ArrangementSource,
    /// SA, MA or MT.
    pub objective: String,
    pub seed: u64,
    pub proposals: usize,
    /// Chain order for the explicit source, space-separated qubit labels.
    pub order: String,
}

impl Default for ArrangementConfig {
    fn default() -> Self {
        Self {
            source: ArrangementSource::Reference,
            objective: "MA".into(),
            seed: 1,
            proposals: 100_000,
            order: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    pub t_1q: f64,
    pub t_meas_batch: f64,
    pub t_shuttle_op: f64,
    pub t_base: f64,
    pub t_slope: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        let t = TimingParams::default();
        Self {
            t_1q: t.t_1q,
            t_meas_batch: t.t_meas_batch,
            t_shuttle_op: t.t_shuttle_op,
            t_base: t.t_base,
            t_slope: t.t_slope,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub code: String,
    pub model: ModelKind,
    pub ion: IonConfig,
    pub sweep: SweepConfig,
    pub rounds: usize,
    pub order: OrderKind,
    pub basis: BasisKind,
    pub sampler: SamplerConfig,
    pub arrangement: ArrangementConfig,
    pub mode: ModeKind,
    pub timing: TimingConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            code: "baconshor13".into(),
            model: ModelKind::Depolarizing,
            ion: IonConfig::default(),
            sweep: SweepConfig::default(),
            rounds: 1,
            order: OrderKind::Gauge,
            basis: BasisKind::Z,
            sampler: SamplerConfig::default(),
            arrangement: ArrangementConfig::default(),
            mode: ModeKind::Serial,
            timing: TimingConfig::default(),
            seed: 1,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON, output path
    /// excluded.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn code_spec(&self) -> Result<CodeSpec, ConfigError> {
        parse_code(&self.code)
    }

    pub fn cnot_order(&self) -> CnotOrder {
        match self.order {
            OrderKind::Gauge => CnotOrder::Gauge,
            OrderKind::Naive => CnotOrder::Naive,
        }
    }

    pub fn logical_basis(&self) -> LogicalBasis {
        match self.basis {
            BasisKind::Z => LogicalBasis::Z,
            BasisKind::X => LogicalBasis::X,
        }
    }

    pub fn layout_mode(&self) -> Mode {
        match self.mode {
            ModeKind::Serial => Mode::Serial,
            ModeKind::Parallel => Mode::Parallel,
        }
    }

    pub fn timing_params(&self) -> Result<TimingParams, ConfigError> {
        let t = &self.timing;
        let all = [t.t_1q, t.t_meas_batch, t.t_shuttle_op, t.t_base, t.t_slope];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return invalid("timing values must be finite and non-negative");
        }
        Ok(TimingParams {
            t_1q: t.t_1q,
            t_meas_batch: t.t_meas_batch,
            t_shuttle_op: t.t_shuttle_op,
            t_base: t.t_base,
            t_slope: t.t_slope,
        })
    }

    pub fn importance(&self) -> ImportanceParams {
        ImportanceParams {
            trials_per_stratum: self.sampler.trials,
            k_max: self.sampler.k_max,
            exhaustive_budget: self.sampler.exhaustive_budget,
            auto_raise: true,
        }
    }

    pub fn objective(&self) -> Result<Objective, ConfigError> {
        Objective::from_name(&self.arrangement.objective)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown objective {:?}", self.arrangement.objective)))
    }

    /// Noise model at one sweep point.
    pub fn noise_at(&self, value: f64) -> Result<NoiseModel, ConfigError> {
        let bad = |e: qecsim_core::noise::NoiseError| ConfigError::Invalid(e.to_string());
        match (self.model, self.sweep.param) {
            (ModelKind::Depolarizing, Param::P) => {
                Ok(NoiseModel::Depolarizing(DepolarizingParams::new(value).map_err(bad)?))
            }
            (ModelKind::Depolarizing, p) => invalid(format!("the depolarizing model sweeps p, not {}", p.name())),
            (ModelKind::Iontrap, Param::P) => invalid("the ion-trap model sweeps p_xx, r_heating or r_dephasing"),
            (ModelKind::Iontrap, param) => {
                let mut ion = self.ion.clone();
                match param {
                    Param::PXx => ion.p_xx = value,
                    Param::RHeating => ion.r_heating = value,
                    Param::RDephasing => ion.r_dephasing = value,
                    Param::P => unreachable!(),
                }
                Ok(NoiseModel::IonTrap(ion_params(&ion)?))
            }
        }
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let code = self.code_spec()?;
        if self.sampler.trials == 0 {
            return invalid("sampler.trials must be positive");
        }
        if self.sweep.values.is_empty() {
            return invalid("sweep.values is empty");
        }
        for &v in &self.sweep.values {
            self.noise_at(v)?;
        }
        self.timing_params()?;
        self.objective()?;
        if self.model == ModelKind::Iontrap {
            self.arrangement_for(&code)?;
        }
        Ok(())
    }

    /// The configured chain order for `code` (annealing when asked to).
    pub fn arrangement_for(&self, code: &CodeSpec) -> Result<Arrangement, ConfigError> {
        let n_data = code.n_data();
        let arr = match self.arrangement.source {
            ArrangementSource::Reference => {
                if code.n_data() != 9 {
                    return invalid("reference arrangements exist only for the distance-3 codes");
                }
                reference_arrangement(code.family(), self.objective()?)
            }
            ArrangementSource::Explicit => {
                Arrangement::parse(&self.arrangement.order, n_data).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            ArrangementSource::Anneal => {
                let params = qecsim_core::AnnealParams {
                    proposals: self.arrangement.proposals,
                    ..Default::default()
                };
                qecsim_core::anneal(
                    &qecsim_core::layout::round_circuit(code),
                    n_data,
                    self.objective()?,
                    self.arrangement.seed,
                    &self.timing_params()?,
                    &params,
                )
                .map_err(|e| ConfigError::Invalid(e.to_string()))?
                .arrangement
            }
        };
        if arr.len() != code.n_qubits() {
            return invalid(format!(
                "arrangement has {} ions, {} has {} qubits",
                arr.len(),
                code.name(),
                code.n_qubits()
            ));
        }
        Ok(arr)
    }
}

pub fn ion_params(ion: &IonConfig) -> Result<IonTrapParams, ConfigError> {
    let mut p = IonTrapParams::new(ion.p_xx, ion.r_heating, ion.r_dephasing)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    if !(ion.heating_factor.is_finite() && ion.heating_factor >= 0.0) {
        return invalid("heating_factor must be finite and non-negative");
    }
    p.heating_factor = ion.heating_factor;
    Ok(p)
}

pub fn parse_code(name: &str) -> Result<CodeSpec, ConfigError> {
    let unknown = || ConfigError::UnknownCode(name.into());
    match name {
        "surface17" => Ok(surface17()),
        "baconshor13" => Ok(baconshor(3).expect("L = 3 is valid")),
        _ => {
            let l: usize = name
                .strip_prefix("baconshor")
                .and_then(|s| s.parse().ok())
                .ok_or_else(unknown)?;
            baconshor(l).map_err(|e| ConfigError::Invalid(e.to_string()))
        }
    }
}

pub fn family_name(f: CodeFamily) -> &'static str {
    match f {
        CodeFamily::Surface17 => "surface17",
        CodeFamily::BaconShor => "baconshor",
    }
}
