use ndarray::{
    linalg::general_mat_mul, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis, Zip,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Added to the layer-norm variance.
pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    #[serde(default = "yes")]
    pub layer_norm: bool,
}

fn yes() -> bool {
    true
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            input_dim: 10,
            hidden_dims: vec![64, 64],
            output_dim: 11,
            layer_norm: true,
        }
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        Ok(())
    }

    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in self.hidden_dims.iter().chain(std::iter::once(&self.output_dim)) {
            dims.push((prev, h));
            prev = h;
        }
        dims
    }
}

/// Offsets of one dense layer's parameters in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LayerSlots {
    pub fan_in: usize,
    pub fan_out: usize,
    /// `fan_in × fan_out`, row-major.
    pub weight: usize,
    pub bias: usize,
    /// Layer-norm gain and shift, hidden layers only.
    pub norm: Option<(usize, usize)>,
}

fn build_layout(arch: &Architecture) -> (Vec<LayerSlots>, usize) {
    let dims = arch.layer_dims();
    let last = dims.len() - 1;
    let mut offset = 0;
    let mut slots = Vec::with_capacity(dims.len());
    for (l, &(fan_in, fan_out)) in dims.iter().enumerate() {
        let weight = offset;
        offset += fan_in * fan_out;
        let bias = offset;
        offset += fan_out;
        let norm = if l < last && arch.layer_norm {
            let gain = offset;
            let shift = offset + fan_out;
            offset += 2 * fan_out;
            Some((gain, shift))
        } else {
            None
        };
        slots.push(LayerSlots {
            fan_in,
            fan_out,
            weight,
            bias,
            norm,
        });
    }
    (slots, offset)
}

/// Fully connected Q-network: `dense → layernorm → ReLU` per hidden layer,
/// then a linear output layer. All parameters live in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    arch: Architecture,
    layout: Vec<LayerSlots>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Default)]
struct ForwardCache {
    /// Input to every dense layer, output layer included.
    inputs: Vec<Array2<f64>>,
    hidden: Vec<HiddenCache>,
}

struct HiddenCache {
    /// Normalized pre-activations (empty without layer norm).
    normalized: Array2<f64>,
    inv_sigma: Array1<f64>,
    /// After gain/shift, before ReLU.
    pre_relu: Array2<f64>,
}

impl QNetwork {
    /// Kaiming-uniform weights, zero biases, unit gains, zero shifts.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let (layout, len) = build_layout(&arch);
        let mut params = vec![0.0; len];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = layout.len() - 1;
        for (l, slot) in layout.iter().enumerate() {
            let scale = if l < last { 6.0 } else { 3.0 };
            let bound = (scale / slot.fan_in as f64).sqrt();
            for w in &mut params[slot.weight..slot.weight + slot.fan_in * slot.fan_out] {
                *w = rng.random_range(-bound..bound);
            }
            if let Some((gain, _)) = slot.norm {
                params[gain..gain + slot.fan_out].fill(1.0);
            }
        }
        Ok(QNetwork {
            arch,
            layout,
            params,
        })
    }

    pub(crate) fn zeroed(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let (layout, len) = build_layout(&arch);
        Ok(QNetwork {
            arch,
            layout,
            params: vec![0.0; len],
        })
    }

    pub(crate) fn from_parts(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let (layout, len) = build_layout(&arch);
        if params.len() != len {
            return Err(Error::Format(format!(
                "expected {len} parameters, found {}",
                params.len()
            )));
        }
        Ok(QNetwork {
            arch,
            layout,
            params,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub(crate) fn layout(&self) -> &[LayerSlots] {
        &self.layout
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim
    }

    pub fn n_actions(&self) -> usize {
        self.arch.output_dim
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Overwrites `self` with the parameters of `src` (same architecture).
    pub fn copy_from(&mut self, src: &QNetwork) {
        assert_eq!(self.arch, src.arch, "architecture mismatch");
        self.params.copy_from_slice(&src.params);
    }

    /// Zeroes the output layer so every Q-value is 0.
    pub fn zero_output_layer(&mut self) {
        let slot = *self.layout.last().unwrap();
        let end = slot.bias + slot.fan_out;
        self.params[slot.weight..end].fill(0.0);
    }

    fn weight(&self, slot: &LayerSlots) -> ArrayView2<'_, f64> {
        let w = &self.params[slot.weight..slot.weight + slot.fan_in * slot.fan_out];
        ArrayView2::from_shape((slot.fan_in, slot.fan_out), w).unwrap()
    }

    fn vector(&self, offset: usize, len: usize) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.params[offset..offset + len])
    }

    /// Q-values for a single observation.
    pub fn forward(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.arch.input_dim {
            return Err(Error::Input(format!(
                "observation has {} entries, network expects {}",
                observation.len(),
                self.arch.input_dim
            )));
        }
        if observation.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite observation".into()));
        }
        let x = ArrayView2::from_shape((1, observation.len()), observation).unwrap();
        Ok(self.forward_batch(x).row(0).to_vec())
    }

    /// Q-values for a batch of observations (one per row).
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.run(x, None)
    }

    fn run(&self, x: ArrayView2<'_, f64>, mut cache: Option<&mut ForwardCache>) -> Array2<f64> {
        let batch = x.nrows();
        let mut activation = x.to_owned();
        let last = self.layout.len() - 1;
        for (l, slot) in self.layout.iter().enumerate() {
            let mut h = Array2::<f64>::zeros((batch, slot.fan_out));
            general_mat_mul(1.0, &activation, &self.weight(slot), 0.0, &mut h);
            h += &self.vector(slot.bias, slot.fan_out);
            if l == last {
                if let Some(c) = cache {
                    c.inputs.push(activation);
                }
                return h;
            }
            let (normalized, inv_sigma, pre_relu) = match slot.norm {
                Some((gain, shift)) => {
                    let inv_sigma = normalize_rows(&mut h);
                    let mut y = h.clone();
                    y *= &self.vector(gain, slot.fan_out);
                    y += &self.vector(shift, slot.fan_out);
                    (h, inv_sigma, y)
                }
                None => (Array2::zeros((0, 0)), Array1::zeros(0), h),
            };
            let next = pre_relu.mapv(|v| v.max(0.0));
            let input = std::mem::replace(&mut activation, next);
            if let Some(c) = cache.as_deref_mut() {
                c.inputs.push(input);
                c.hidden.push(HiddenCache {
                    normalized,
                    inv_sigma,
                    pre_relu,
                });
            }
        }
        unreachable!("network has an output layer")
    }

    /// Gradient of `½ (Q(s, a) − target)²` for one sample.
    pub fn backward(&self, observation: &[f64], action: usize, td_target: f64) -> Vec<f64> {
        let x = ArrayView2::from_shape((1, observation.len()), observation).unwrap();
        self.td_loss_gradient(x, &[action], &[td_target]).1
    }

    /// Mean over the batch of `½ (Q(s_i, a_i) − y_i)²` and its gradient with
    /// respect to every parameter.
    pub fn td_loss_gradient(
        &self,
        x: ArrayView2<'_, f64>,
        actions: &[usize],
        targets: &[f64],
    ) -> (f64, Vec<f64>) {
        let batch = x.nrows();
        assert_eq!(actions.len(), batch);
        assert_eq!(targets.len(), batch);
        let mut cache = ForwardCache::default();
        let q = self.run(x, Some(&mut cache));

        let mut delta = Array2::<f64>::zeros(q.raw_dim());
        let mut loss = 0.0;
        let scale = 1.0 / batch as f64;
        for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
            let err = q[[i, a]] - y;
            loss += 0.5 * err * err * scale;
            delta[[i, a]] = err * scale;
        }

        let mut grad = vec![0.0; self.params.len()];
        for l in (0..self.layout.len()).rev() {
            let slot = self.layout[l];
            {
                let gw = &mut grad[slot.weight..slot.weight + slot.fan_in * slot.fan_out];
                let mut gw = ArrayViewMut2::from_shape((slot.fan_in, slot.fan_out), gw).unwrap();
                general_mat_mul(1.0, &cache.inputs[l].t(), &delta, 0.0, &mut gw);
            }
            let gb = delta.sum_axis(Axis(0));
            grad[slot.bias..slot.bias + slot.fan_out].copy_from_slice(gb.as_slice().unwrap());
            if l == 0 {
                break;
            }

            let below = &cache.hidden[l - 1];
            let below_slot = self.layout[l - 1];
            let mut d_act = Array2::<f64>::zeros((batch, slot.fan_in));
            general_mat_mul(1.0, &delta, &self.weight(&slot).t(), 0.0, &mut d_act);
            Zip::from(&mut d_act).and(&below.pre_relu).for_each(|d, &p| {
                if p <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = match below_slot.norm {
                Some((gain, shift)) => {
                    let dg = (&d_act * &below.normalized).sum_axis(Axis(0));
                    let ds = d_act.sum_axis(Axis(0));
                    grad[gain..gain + below_slot.fan_out].copy_from_slice(dg.as_slice().unwrap());
                    grad[shift..shift + below_slot.fan_out]
                        .copy_from_slice(ds.as_slice().unwrap());
                    d_act *= &self.vector(gain, below_slot.fan_out);
                    layer_norm_backward(d_act, &below.normalized, &below.inv_sigma)
                }
                None => d_act,
            };
        }
        (loss, grad)
    }
}

/// Normalizes each row to zero mean and unit variance in place and returns
/// `1 / sqrt(var + eps)` per row.
fn normalize_rows(h: &mut Array2<f64>) -> Array1<f64> {
    let n = h.ncols() as f64;
    let mut inv = Array1::zeros(h.nrows());
    for (mut row, inv_sigma) in h.rows_mut().into_iter().zip(inv.iter_mut()) {
        let mean = row.sum() / n;
        row -= mean;
        let var = row.iter().map(|v| v * v).sum::<f64>() / n;
        *inv_sigma = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        row *= *inv_sigma;
    }
    inv
}

fn layer_norm_backward(
    mut dz: Array2<f64>,
    z: &Array2<f64>,
    inv_sigma: &Array1<f64>,
) -> Array2<f64> {
    let n = dz.ncols() as f64;
    for ((mut d, z), &s) in dz.rows_mut().into_iter().zip(z.rows()).zip(inv_sigma) {
        let mean_d = d.sum() / n;
        let mean_dz = d.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / n;
        Zip::from(&mut d).and(z).for_each(|d, &z| {
            *d = s * (*d - mean_d - z * mean_dz);
        });
    }
    dz
}
