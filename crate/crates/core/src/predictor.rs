//! Common predictor interface and the method registry.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{Means, PccModel};
use crate::config::Hyperparams;
use crate::data::QosMatrix;
use crate::error::{Error, Result};
use crate::hybrid::{self, HybridModel, ModelKind, TrainTrace};
use crate::similarity::krcc_matrix;

/// A method that can be fitted to a training matrix.
pub trait Predictor: Send + Sync {
    fn name(&self) -> &str;

    /// Fits on `train`. `seed` drives any randomness in fitting.
    fn fit(&self, train: &QosMatrix, seed: u64) -> Result<Box<dyn Fitted>>;
}

/// A fitted model: a pure, total prediction function.
pub trait Fitted: Send + Sync {
    fn predict(&self, u: usize, s: usize) -> f64;

    fn trace(&self) -> Option<&TrainTrace> {
        None
    }
}

/// Registered methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Umean,
    Imean,
    Upcc,
    Ipcc,
    Wsrec,
    BiasSvd,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Umean,
        Method::Imean,
        Method::Upcc,
        Method::Ipcc,
        Method::Wsrec,
        Method::BiasSvd,
        Method::Hybrid,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Umean => "umean",
            Method::Imean => "imean",
            Method::Upcc => "upcc",
            Method::Ipcc => "ipcc",
            Method::Wsrec => "wsrec",
            Method::BiasSvd => "biassvd",
            Method::Hybrid => "2rhyrec",
        }
    }

    /// Whether the method has a neighbor count worth tuning per data set.
    pub fn uses_cf_neighbors(self) -> bool {
        matches!(self, Method::Upcc | Method::Ipcc | Method::Wsrec)
    }

    pub fn predictor(self, hp: &Hyperparams) -> Box<dyn Predictor> {
        Box::new(Registered {
            method: self,
            hp: hp.clone(),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.id() == key)
            .ok_or_else(|| match key.as_str() {
                "gm" | "cloudrank2" => Error::MethodNotImplemented(s.trim().to_string()),
                _ => Error::UnknownMethod(s.trim().to_string()),
            })
    }
}

struct Registered {
    method: Method,
    hp: Hyperparams,
}

struct MeanFit {
    means: Means,
    by_user: bool,
}

impl Fitted for MeanFit {
    fn predict(&self, u: usize, s: usize) -> f64 {
        if self.by_user {
            self.means.user[u]
        } else {
            self.means.service[s]
        }
    }
}

struct PccFit {
    model: PccModel,
    method: Method,
    mix: f64,
}

impl Fitted for PccFit {
    fn predict(&self, u: usize, s: usize) -> f64 {
        match self.method {
            Method::Upcc => self.model.upcc(u, s),
            Method::Ipcc => self.model.ipcc(u, s),
            _ => self.model.wsrec(u, s, self.mix),
        }
    }
}

struct SgdFit {
    model: HybridModel,
    trace: TrainTrace,
}

impl Fitted for SgdFit {
    fn predict(&self, u: usize, s: usize) -> f64 {
        self.model.predict(u, s)
    }

    fn trace(&self) -> Option<&TrainTrace> {
        Some(&self.trace)
    }
}

impl Predictor for Registered {
    fn name(&self) -> &str {
        self.method.id()
    }

    fn fit(&self, train: &QosMatrix, seed: u64) -> Result<Box<dyn Fitted>> {
        let hp = Hyperparams {
            seed,
            ..self.hp.clone()
        };
        Ok(match self.method {
            Method::Umean | Method::Imean => Box::new(MeanFit {
                means: Means::fit(train)?,
                by_user: self.method == Method::Umean,
            }),
            Method::Upcc | Method::Ipcc | Method::Wsrec => Box::new(PccFit {
                model: PccModel::fit(train, hp.cf_neighbors)?,
                method: self.method,
                mix: hp.wsrec_mix,
            }),
            Method::BiasSvd => {
                let (model, trace) = hybrid::fit(train, None, &hp, ModelKind::BiasSvd, None)?;
                Box::new(SgdFit { model, trace })
            }
            Method::Hybrid => {
                let sim = krcc_matrix(train, hp.krcc_variant);
                let (model, trace) = hybrid::fit(
                    train,
                    Some(&sim),
                    &hp,
                    ModelKind::Hybrid { beta: hp.beta },
                    None,
                )?;
                Box::new(SgdFit { model, trace })
            }
        })
    }
}
