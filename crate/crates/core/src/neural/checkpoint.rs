//! JSON checkpoint format for Q-networks.
//!
//! ```json
//! { "format": "hvacrl-qnetwork/1",
//!   "architecture": { "input_dim": 10, "hidden_dims": [64, 64], ... },
//!   "tensors": [ { "name": "dense0.weight", "shape": [10, 64], "values": [...] }, ... ] }
//! ```
//!
//! Weights are stored row-major as `[fan_in, fan_out]`. Floats are written
//! in shortest round-trip form, so reading a checkpoint back is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Architecture, QNetwork};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "hvacrl-qnetwork/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub architecture: Architecture,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn from_network(net: &QNetwork) -> Self {
        let p = net.params();
        let mut tensors = Vec::new();
        for (l, slot) in net.layout().iter().enumerate() {
            let n_w = slot.fan_in * slot.fan_out;
            tensors.push(Tensor {
                name: format!("dense{l}.weight"),
                shape: vec![slot.fan_in, slot.fan_out],
                values: p[slot.weight..slot.weight + n_w].to_vec(),
            });
            tensors.push(Tensor {
                name: format!("dense{l}.bias"),
                shape: vec![slot.fan_out],
                values: p[slot.bias..slot.bias + slot.fan_out].to_vec(),
            });
            if let Some((gain, shift)) = slot.norm {
                tensors.push(Tensor {
                    name: format!("norm{l}.gain"),
                    shape: vec![slot.fan_out],
                    values: p[gain..gain + slot.fan_out].to_vec(),
                });
                tensors.push(Tensor {
                    name: format!("norm{l}.shift"),
                    shape: vec![slot.fan_out],
                    values: p[shift..shift + slot.fan_out].to_vec(),
                });
            }
        }
        Checkpoint {
            format: FORMAT_TAG.to_string(),
            architecture: net.architecture().clone(),
            tensors,
        }
    }

    pub fn into_network(self) -> Result<QNetwork> {
        if self.format != FORMAT_TAG {
            return Err(Error::Format(format!("unknown checkpoint format `{}`", self.format)));
        }
        // Rebuild the reference layout, then fill it tensor by tensor.
        let template = Checkpoint::from_network(&QNetwork::zeroed(self.architecture.clone())?);
        if template.tensors.len() != self.tensors.len() {
            return Err(Error::Format(format!(
                "expected {} tensors, found {}",
                template.tensors.len(),
                self.tensors.len()
            )));
        }
        let mut params = Vec::new();
        for (want, got) in template.tensors.iter().zip(self.tensors) {
            if want.name != got.name || want.shape != got.shape {
                return Err(Error::Format(format!(
                    "tensor `{}` {:?} does not match expected `{}` {:?}",
                    got.name, got.shape, want.name, want.shape
                )));
            }
            if got.values.len() != want.values.len() {
                return Err(Error::Format(format!(
                    "tensor `{}` has {} values, shape needs {}",
                    got.name,
                    got.values.len(),
                    want.values.len()
                )));
            }
            params.extend(got.values);
        }
        // Tensor order follows the flat parameter layout.
        QNetwork::from_parts(self.architecture, params)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn save_network(net: &QNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = Checkpoint::from_network(net).to_json()?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: impl AsRef<Path>) -> Result<QNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text)?.into_network()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_shape_mismatch() {
        let net = QNetwork::new(Architecture::default(), 1).unwrap();
        let mut ck = Checkpoint::from_network(&net);
        ck.tensors[0].values.pop();
        assert!(matches!(ck.into_network(), Err(Error::Format(_))));
        let mut ck = Checkpoint::from_network(&net);
        ck.format = "other".into();
        assert!(ck.into_network().is_err());
    }

    #[test]
    fn layer_norm_tensors_present() {
        let net = QNetwork::new(Architecture::default(), 1).unwrap();
        let ck = Checkpoint::from_network(&net);
        let names: Vec<_> = ck.tensors.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "dense0.weight", "dense0.bias", "norm0.gain", "norm0.shift",
                "dense1.weight", "dense1.bias", "norm1.gain", "norm1.shift",
                "dense2.weight", "dense2.bias"
            ]
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn json_round_trip_is_bit_exact(seed in any::<u64>(), obs in proptest::collection::vec(0.0..1.0f64, 10)) {
            let mut net = QNetwork::new(Architecture::default(), seed).unwrap();
            // Perturb so values are not just initializer output.
            for (i, p) in net.params_mut().iter_mut().enumerate() {
                *p += (i as f64 * 1e-3).sin() * 1e-7;
            }
            let json = Checkpoint::from_network(&net).to_json().unwrap();
            let back = Checkpoint::from_json(&json).unwrap().into_network().unwrap();
            prop_assert!(back.params().iter().zip(net.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
            let qa = net.forward(&obs).unwrap();
            let qb = back.forward(&obs).unwrap();
            prop_assert!(qa.iter().zip(&qb).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
