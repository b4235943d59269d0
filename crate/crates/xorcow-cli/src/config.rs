//! Run configuration: defaults, JSON config files, flag overrides.
//!
//! Every subcommand reads the same resolved [`RunConfig`]. Precedence, from
//! weakest to strongest: built-in defaults, the `XORCOW_SEED` environment
//! variable (seed only), the `--config` JSON file, then command-line flags.
//! The defaults describe the reference scenario — 30 clients, 160-bit
//! frames, a 2 ms cycle over 20 MHz — so `xorcow min-snr` with no arguments
//! answers the headline question directly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use xorcow::optimize::{DEFAULT_SNR_HI_DB, DEFAULT_SNR_LO_DB};
use xorcow::params::db_to_linear;
use xorcow::{PhaseSplit, ReportFormat, Schedule, Scheme, SystemParams};

/// Environment variable consulted for the Monte Carlo seed when neither a
/// flag nor the config file provides one.
pub const SEED_ENV: &str = "XORCOW_SEED";

/// One fully resolved run: scenario, scheme, search window, output target.
///
/// The struct doubles as the config-file schema; unknown keys are rejected
/// so a typo fails loudly instead of silently running the default. JSON
/// round-trips losslessly: serializing and re-parsing yields an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Number of client nodes (the controller is extra).
    pub n: usize,
    /// Payload bits per node per direction per cycle.
    pub m_bits: u64,
    /// Full cycle duration in milliseconds.
    pub cycle_ms: f64,
    /// Channel bandwidth in megahertz.
    pub bandwidth_mhz: f64,
    /// Operating SNR in dB (converted to linear internally).
    pub snr_db: f64,
    /// Protocol family to evaluate.
    pub scheme: Scheme,
    /// Rate schedule for the XOR protocol.
    pub schedule: Schedule,
    /// Phase-duration fractions (downlink, uplink, XOR).
    pub split: PhaseSplit,
    /// Cycle failure probability the searches must reach.
    pub target: f64,
    /// Lower edge of the SNR search bracket, dB.
    pub snr_lo_db: f64,
    /// Upper edge of the SNR search bracket, dB.
    pub snr_hi_db: f64,
    /// Monte Carlo trial count.
    pub trials: u64,
    /// Monte Carlo seed; `None` falls back to `XORCOW_SEED`, then 0.
    pub seed: Option<u64>,
    /// Write tabular results here instead of stdout.
    pub out: Option<PathBuf>,
    /// Encoding for tabular results.
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 30,
            m_bits: 160,
            cycle_ms: 2.0,
            bandwidth_mhz: 20.0,
            snr_db: 0.0,
            scheme: Scheme::XorcowFixed,
            schedule: Schedule::Fixed,
            split: PhaseSplit::equal(),
            target: 1e-9,
            snr_lo_db: DEFAULT_SNR_LO_DB,
            snr_hi_db: DEFAULT_SNR_HI_DB,
            trials: 100_000,
            seed: None,
            out: None,
            format: ReportFormat::Csv,
        }
    }
}

impl RunConfig {
    /// Scenario parameters with the SNR already converted to linear scale.
    pub fn params(&self) -> xorcow::Result<SystemParams> {
        SystemParams::new(
            self.n,
            self.m_bits,
            self.cycle_ms * 1e-3,
            self.bandwidth_mhz * 1e6,
            db_to_linear(self.snr_db),
        )
    }

    /// The phase split, revalidated: deserialization can smuggle in raw
    /// fractions, so the constructor's sum-to-one check is rerun here.
    pub fn phase_split(&self) -> xorcow::Result<PhaseSplit> {
        PhaseSplit::new(self.split.f_d, self.split.f_u, self.split.f_x)
    }

    /// Effective Monte Carlo seed (0 when nothing set one).
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn validate(&self) -> anyhow::Result<()> {
        self.params().context("invalid scenario parameters")?;
        self.phase_split().context("invalid phase split")?;
        if !(self.target > 0.0 && self.target < 1.0) {
            bail!("target must lie strictly inside (0, 1), got {}", self.target);
        }
        if !(self.snr_lo_db.is_finite()
            && self.snr_hi_db.is_finite()
            && self.snr_lo_db < self.snr_hi_db)
        {
            bail!(
                "SNR bracket [{}, {}] dB is not a proper interval",
                self.snr_lo_db,
                self.snr_hi_db
            );
        }
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        Ok(())
    }
}

/// Scenario flags shared by every subcommand (all optional overrides).
#[derive(Debug, Clone, Default, Args)]
pub struct OverrideArgs {
    /// Number of client nodes.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Payload bits per node per direction per cycle.
    #[arg(long, global = true)]
    pub m_bits: Option<u64>,
    /// Full cycle duration in milliseconds.
    #[arg(long, global = true)]
    pub cycle_ms: Option<f64>,
    /// Channel bandwidth in megahertz.
    #[arg(long, global = true)]
    pub bandwidth_mhz: Option<f64>,
    /// Operating SNR in dB.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Protocol family: xorcow-fixed, xorcow-flexible, occupycow2, freqhop
    /// or generic.
    #[arg(long, global = true, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Rate schedule for the XOR protocol: fixed or flexible.
    #[arg(long, global = true, value_parser = parse_schedule)]
    pub schedule: Option<Schedule>,
    /// Phase fractions as fD,fU,fX (three values summing to 1).
    #[arg(long, global = true, value_parser = parse_split)]
    pub split: Option<PhaseSplit>,
    /// Cycle failure probability the searches must reach.
    #[arg(long, global = true)]
    pub target: Option<f64>,
    /// Lower edge of the SNR search bracket, dB.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_lo_db: Option<f64>,
    /// Upper edge of the SNR search bracket, dB.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_hi_db: Option<f64>,
    /// Monte Carlo trial count.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Monte Carlo seed (also settable via XORCOW_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write tabular results to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Table encoding: csv, json or svg.
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<ReportFormat>,
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse::<Scheme>().map_err(|e| e.to_string())
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.parse::<Schedule>().map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse::<ReportFormat>().map_err(|e| e.to_string())
}

fn parse_split(s: &str) -> Result<PhaseSplit, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [d, u, x] = parts.as_slice() else {
        return Err(format!(
            "expected three comma-separated fractions (fD,fU,fX), got {} value(s)",
            parts.len()
        ));
    };
    let frac = |name: &str, raw: &str| -> Result<f64, String> {
        raw.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad {name} fraction {raw:?}: {e}"))
    };
    PhaseSplit::new(frac("downlink", d)?, frac("uplink", u)?, frac("XOR", x)?)
        .map_err(|e| e.to_string())
}

/// Builds the effective configuration for one invocation.
pub fn resolve(config_path: Option<&Path>, flags: &OverrideArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .with_context(|| format!("cannot parse config file {}", path.display()))?
        }
        None => RunConfig::default(),
    };

    // The environment only supplies a seed, and only when the config file
    // did not already pin one; a --seed flag still beats both.
    if cfg.seed.is_none() {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            let seed = raw
                .parse::<u64>()
                .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {raw:?}"))?;
            cfg.seed = Some(seed);
        }
    }

    apply_overrides(&mut cfg, flags);
    reconcile_scheme_and_schedule(&mut cfg, flags)?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, flags: &OverrideArgs) {
    macro_rules! take {
        ($($field:ident),* $(,)?) => {
            $(if let Some(value) = flags.$field.clone() {
                cfg.$field = value.into();
            })*
        };
    }
    take!(n, m_bits, cycle_ms, bandwidth_mhz, snr_db, scheme, schedule, split, target);
    take!(snr_lo_db, snr_hi_db, trials);
    if let Some(seed) = flags.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &flags.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = flags.format {
        cfg.format = format;
    }
}

/// The two XOR schemes each imply a schedule. When the pair disagrees, the
/// flag the user actually typed wins; typing both contradictory flags is an
/// error, and a contradictory config file defers to its scheme.
fn reconcile_scheme_and_schedule(
    cfg: &mut RunConfig,
    flags: &OverrideArgs,
) -> anyhow::Result<()> {
    let implied = match cfg.scheme {
        Scheme::XorcowFixed => Schedule::Fixed,
        Scheme::XorcowFlexible => Schedule::Flexible,
        _ => return Ok(()),
    };
    if cfg.schedule == implied {
        return Ok(());
    }
    match (flags.scheme.is_some(), flags.schedule.is_some()) {
        (true, true) => bail!(
            "--scheme {} contradicts --schedule {}",
            cfg.scheme,
            cfg.schedule
        ),
        (false, true) => {
            cfg.scheme = match cfg.schedule {
                Schedule::Fixed => Scheme::XorcowFixed,
                Schedule::Flexible => Scheme::XorcowFlexible,
            };
        }
        _ => cfg.schedule = implied,
    }
    Ok(())
}
