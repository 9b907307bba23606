//! Serializable form of a drift certificate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::drift::{DriftCertificate, DriftError, SetSpec};
use crate::rate::PhiConfig;

/// The test function of a certificate: a named model function with
/// parameters, or values tabulated by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VRecord {
    Tabulated { values: Vec<f64> },
    Named {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

/// `{phi, V, C, b}` for a certificate on states of type `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord<S> {
    pub phi: PhiConfig,
    pub v: VRecord,
    pub c: SetSpec<S, f64>,
    pub b: f64,
}

impl<S: Clone> CertificateRecord<S> {
    pub fn from_certificate(cert: &DriftCertificate<S, f64>, v: VRecord) -> Result<Self, DriftError> {
        let phi = cert
            .phi
            .to_config()
            .ok_or_else(|| DriftError::Domain(format!("phi = {} has no config form", cert.phi)))?;
        Ok(Self {
            phi,
            v,
            c: cert.c.clone(),
            b: cert.b,
        })
    }
}
