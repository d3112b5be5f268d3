//! Canned parameter families for the standard plots.

use lambda_sim::steady::SweepVariable;

use crate::config::Task;
use crate::error::{CliError, CliResult};

/// Where the stochastic field is tuned for a fixed-η member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    Value(f64),
    /// Multiple of the generalized Rabi frequency.
    RabiMultiple(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub omega: f64,
    pub delta: f64,
    pub dd: f64,
    pub eta: EtaChoice,
    /// `Some(Eta)` for population-type presets (swept over the default η grid).
    pub sweep: Option<SweepVariable>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub task: Task,
    pub description: &'static str,
    pub members: Vec<Member>,
}

pub const NAMES: [&str; 11] = [
    "fig-gsd",
    "fig-gso",
    "fig-eed",
    "fig-eeo",
    "fig-dpop",
    "fig-drs",
    "fig-drs0",
    "fig-resdel0",
    "fig-resdel80",
    "fig-resdel-eta",
    "fig-rsd",
];

const NEAR_NOISELESS: f64 = 0.1;

fn fmt_value(x: f64) -> String {
    format!("{x}").replace('.', "p").replace('-', "m")
}

fn eta_sweep(omega: f64, delta: f64, dd: f64, label: String) -> Member {
    Member {
        label,
        omega,
        delta,
        dd,
        eta: EtaChoice::Value(0.0),
        sweep: Some(SweepVariable::Eta),
    }
}

fn population_grid(omegas: &[f64], deltas: &[f64], dds: &[f64]) -> Vec<Member> {
    let mut out = Vec::new();
    for &dd in dds {
        for &omega in omegas {
            for &delta in deltas {
                let label = format!(
                    "omega{}_delta{}_dd{}",
                    fmt_value(omega),
                    fmt_value(delta),
                    fmt_value(dd)
                );
                out.push(eta_sweep(omega, delta, dd, label));
            }
        }
    }
    out
}

fn spectrum_grid(delta: f64, etas: &[(EtaChoice, &str)], dds: &[f64]) -> Vec<Member> {
    let mut out = Vec::new();
    for &(eta, eta_label) in etas {
        for &dd in dds {
            out.push(Member {
                label: format!("delta{}_eta{eta_label}_dd{}", fmt_value(delta), fmt_value(dd)),
                omega: 100.0,
                delta,
                dd,
                eta,
                sweep: None,
            });
        }
    }
    out
}

const ETA_RABI_FAMILY: [(EtaChoice, &str); 4] = [
    (EtaChoice::RabiMultiple(0.0), "0"),
    (EtaChoice::RabiMultiple(0.5), "0p5R"),
    (EtaChoice::RabiMultiple(1.0), "1R"),
    (EtaChoice::RabiMultiple(2.0), "2R"),
];

pub fn lookup(name: &str) -> CliResult<Preset> {
    let p = match name {
        "fig-gsd" | "fig-eed" => Preset {
            name: if name == "fig-gsd" { "fig-gsd" } else { "fig-eed" },
            task: Task::Populations,
            description: "populations versus η at Ω=100 for Δ ∈ {10, 20, 40}, near-noiseless and D=70",
            members: population_grid(&[100.0], &[10.0, 20.0, 40.0], &[NEAR_NOISELESS, 70.0]),
        },
        "fig-gso" | "fig-eeo" => Preset {
            name: if name == "fig-gso" { "fig-gso" } else { "fig-eeo" },
            task: Task::Populations,
            description: "populations versus η at Δ=20 for Ω ∈ {50, 100, 150}, near-noiseless and D=70",
            members: population_grid(&[50.0, 100.0, 150.0], &[20.0], &[NEAR_NOISELESS, 70.0]),
        },
        "fig-dpop" => Preset {
            name: "fig-dpop",
            task: Task::Populations,
            description: "populations versus η at Ω=100, Δ=20 for D ∈ {0.1, 10, 30, 70}",
            members: population_grid(&[100.0], &[20.0], &[NEAR_NOISELESS, 10.0, 30.0, 70.0]),
        },
        "fig-drs" | "fig-drs0" => Preset {
            name: if name == "fig-drs" { "fig-drs" } else { "fig-drs0" },
            task: Task::Dressed,
            description: "dressed populations versus η at Ω=300 for Δ ∈ {40, 150}, D ∈ {0, 10, 30, 70}",
            members: population_grid(&[300.0], &[40.0, 150.0], &[0.0, 10.0, 30.0, 70.0]),
        },
        "fig-resdel0" | "fig-resdel80" => {
            let delta = if name == "fig-resdel0" { 0.0 } else { 80.0 };
            Preset {
                name: if name == "fig-resdel0" {
                    "fig-resdel0"
                } else {
                    "fig-resdel80"
                },
                task: Task::Spectrum,
                description: "spectrum at Ω=100, η=0 for D ∈ {0.1, 10, 30, 70, 100}",
                members: spectrum_grid(
                    delta,
                    &[(EtaChoice::Value(0.0), "0")],
                    &[NEAR_NOISELESS, 10.0, 30.0, 70.0, 100.0],
                ),
            }
        }
        "fig-resdel-eta" | "fig-rsd" => Preset {
            name: if name == "fig-rsd" { "fig-rsd" } else { "fig-resdel-eta" },
            task: Task::Spectrum,
            description: "spectrum at Ω=100, Δ=20 for η ∈ {0, R/2, R, 2R}, D ∈ {10, 30, 70, 100}",
            members: spectrum_grid(20.0, &ETA_RABI_FAMILY, &[10.0, 30.0, 70.0, 100.0]),
        },
        other => {
            return Err(CliError::config(format!(
                "unknown preset {other:?} (available: {})",
                NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in NAMES {
            let p = lookup(name).unwrap();
            assert_eq!(p.name, name);
            assert!(!p.members.is_empty());
            let mut labels: Vec<_> = p.members.iter().map(|m| m.label.clone()).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), p.members.len(), "{name}: duplicate labels");
        }
    }

    #[test]
    fn resdel0_has_five_strengths() {
        let p = lookup("fig-resdel0").unwrap();
        let dds: Vec<f64> = p.members.iter().map(|m| m.dd).collect();
        assert_eq!(dds, vec![0.1, 10.0, 30.0, 70.0, 100.0]);
        assert!(p.members.iter().all(|m| m.delta == 0.0 && m.omega == 100.0));
    }

    #[test]
    fn labels_are_file_safe() {
        for name in NAMES {
            for m in lookup(name).unwrap().members {
                assert!(
                    m.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
                    "{}",
                    m.label
                );
            }
        }
    }
}
