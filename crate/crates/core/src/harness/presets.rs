//! Named study presets reproducing the reference tables. `desk` scale
//! shrinks ladders and references to the sizes used by the acceptance
//! suite; `full` matches the original protocols.

use super::config::{ReferenceSpec, RunConfig};
use super::study::{Axis, Regime};
use crate::error::{Error, Result};
use crate::scheme::SchemeId;

#[derive(Clone, Debug)]
pub enum TableSpec {
    Comparison {
        title: String,
        base: RunConfig,
        axis: Axis,
        ladder: Vec<f64>,
        schemes: Vec<SchemeId>,
    },
    Regime {
        title: String,
        regime: Regime,
        axis: Axis,
        params: Vec<f64>,
        ladder: Vec<f64>,
    },
}

fn halving(start: f64, count: usize, step: f64) -> Vec<f64> {
    (0..count).map(|k| start * step.powi(k as i32)).collect()
}

pub fn table_preset(name: &str, desk: bool) -> Result<TableSpec> {
    let fourth_order = vec![SchemeId::S4, SchemeId::S4c, SchemeId::S4rk];
    let all = SchemeId::ALL.to_vec();
    match name {
        "table2" => {
            let mut base = RunConfig::paper_1d();
            base.scheme.tau = 1e-5;
            base.study.reference = ReferenceSpec {
                policy: "generate".into(),
                m: Some(1024),
                tau: Some(1e-5),
            };
            Ok(TableSpec::Comparison {
                title: "table2-1d-spatial".into(),
                base,
                axis: Axis::Space,
                ladder: halving(1.0, 4, 0.5),
                schemes: if desk { vec![SchemeId::S4c] } else { all },
            })
        }
        "table3" => {
            let mut base = RunConfig::paper_1d();
            base.study.reference = ReferenceSpec {
                policy: "generate".into(),
                m: Some(1024),
                tau: Some(1e-5),
            };
            Ok(TableSpec::Comparison {
                title: "table3-1d-temporal".into(),
                base,
                axis: Axis::Time,
                ladder: halving(0.5, 7, 0.5),
                schemes: all,
            })
        }
        "table4" | "table5" => {
            let mut base = RunConfig::honeycomb_2d();
            let (m, tau_e) = if desk { (320, 1e-3) } else { (640, 1e-4) };
            base.grid.m = m;
            base.scheme.tau = tau_e;
            base.study.reference = ReferenceSpec {
                policy: "generate".into(),
                m: Some(m),
                tau: Some(tau_e),
            };
            if name == "table4" {
                Ok(TableSpec::Comparison {
                    title: "table4-2d-spatial".into(),
                    base,
                    axis: Axis::Space,
                    ladder: if desk {
                        vec![0.25, 0.125]
                    } else {
                        halving(0.5, 4, 0.5)
                    },
                    schemes: if desk {
                        vec![SchemeId::S4c]
                    } else {
                        fourth_order
                    },
                })
            } else {
                base.scheme.tau = 0.5;
                Ok(TableSpec::Comparison {
                    title: "table5-2d-temporal".into(),
                    base,
                    axis: Axis::Time,
                    ladder: if desk {
                        halving(0.5, 3, 0.5)
                    } else {
                        halving(0.5, 7, 0.5)
                    },
                    schemes: if desk {
                        vec![SchemeId::S4c]
                    } else {
                        fourth_order
                    },
                })
            }
        }
        "table6" | "table7" => Ok(TableSpec::Regime {
            title: format!("{name}-nonrelativistic-temporal"),
            regime: Regime::Nonrelativistic,
            axis: Axis::Time,
            params: if desk {
                halving(1.0, 3, 0.5)
            } else {
                halving(1.0, 5, 0.5)
            },
            ladder: halving(1.0, 6, 0.25),
        }),
        "table8" | "table9" | "table10" => Ok(TableSpec::Regime {
            title: format!("{name}-semiclassical-spatial"),
            regime: Regime::Semiclassical,
            axis: Axis::Space,
            params: if desk {
                halving(1.0, 3, 0.5)
            } else {
                halving(1.0, 6, 0.5)
            },
            ladder: if desk {
                halving(1.0, 5, 0.5)
            } else {
                halving(1.0, 7, 0.5)
            },
        }),
        "table11" => Ok(TableSpec::Regime {
            title: "table11-semiclassical-temporal".into(),
            regime: Regime::Semiclassical,
            axis: Axis::Time,
            params: if desk {
                halving(1.0, 3, 0.5)
            } else {
                halving(1.0, 6, 0.5)
            },
            ladder: halving(1.0, 7, 0.5),
        }),
        "table12" | "table13" => Ok(TableSpec::Regime {
            title: format!("{name}-simultaneous-temporal"),
            regime: Regime::SimultaneousLimit,
            axis: Axis::Time,
            params: if desk {
                halving(1.0, 3, 0.5)
            } else {
                halving(1.0, 7, 0.5)
            },
            ladder: halving(1.0, 7, 0.5),
        }),
        other => Err(Error::Config(format!(
            "unknown table preset '{other}' (expected table2..table13)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_materialize() {
        for k in 2..=13 {
            let spec = table_preset(&format!("table{k}"), true).unwrap();
            match spec {
                TableSpec::Comparison {
                    base,
                    ladder,
                    schemes,
                    ..
                } => {
                    base.validate().unwrap();
                    assert!(!ladder.is_empty() && !schemes.is_empty());
                }
                TableSpec::Regime { params, ladder, .. } => {
                    assert!(!params.is_empty() && !ladder.is_empty());
                }
            }
        }
        assert!(table_preset("table1", false).is_err());
    }

    #[test]
    fn table3_ladder_matches_the_protocol() {
        let TableSpec::Comparison {
            ladder,
            schemes,
            base,
            ..
        } = table_preset("table3", false).unwrap()
        else {
            panic!("table3 is a comparison")
        };
        assert_eq!(ladder.len(), 7);
        assert_eq!(ladder[0], 0.5);
        assert_eq!(ladder[6], 0.5f64.powi(7));
        assert_eq!(schemes.len(), 5);
        assert_eq!(base.study.reference.tau, Some(1e-5));
    }
}
