use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::par;
use crate::rng::rng_for;

use super::{ConditionFeatures, DiffusionError};

pub const MODEL_SCHEMA: &str = "model/1";

const BLOCKS: [&str; 10] = [
    "w_x", "b_x", "w_t", "b_t", "w_f", "b_f", "w_g", "b_g", "w_o", "b_o",
];
const CHUNK: usize = 256;
const EMBED_BASE: f64 = 100.0;

/// Anything that maps a noisy score map at step `t` to a prediction of
/// the clean scaled scores.
pub trait Denoiser: Sync {
    fn denoise(
        &self,
        x_t: &[f64],
        t: usize,
        features: &ConditionFeatures,
    ) -> Result<Vec<f64>, DiffusionError>;
}

/// Sinusoidal step embedding: `E/2` sines then `E/2` cosines at
/// frequencies `100^(−k/(E/2))`.
pub fn time_embedding(t: usize, embed: usize) -> Vec<f64> {
    let half = embed / 2;
    let freq = |k: usize| EMBED_BASE.powf(-(k as f64) / half as f64);
    let tf = t as f64;
    (0..half)
        .map(|k| (tf * freq(k)).sin())
        .chain((0..half).map(|k| (tf * freq(k)).cos()))
        .collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights of the gated three-branch denoiser, stored as one flat vector
/// in the block order `w_x b_x w_t b_t w_f b_f w_g b_g w_o b_o`.
///
/// Per point: `h = tanh(w_x·x + b_x) + tanh(W_t·emb(t) + b_t) + tanh(W_f·F + b_f)`,
/// `g = sigmoid(W_g·h + b_g)`, `out = w_o·(h ⊙ g) + b_o + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserParams {
    hidden: usize,
    embed: usize,
    n_features: usize,
    theta: Vec<f64>,
}

struct View<'a> {
    h: usize,
    e: usize,
    nf: usize,
    w_x: &'a [f64],
    b_x: &'a [f64],
    w_t: &'a [f64],
    b_t: &'a [f64],
    w_f: &'a [f64],
    b_f: &'a [f64],
    w_g: &'a [f64],
    b_g: &'a [f64],
    w_o: &'a [f64],
    b_o: f64,
}

struct Scratch {
    ax: Vec<f64>,
    af: Vec<f64>,
    h: Vec<f64>,
    g: Vec<f64>,
    dh: Vec<f64>,
    dz: Vec<f64>,
}

impl Scratch {
    fn new(h: usize) -> Self {
        let z = vec![0.0; h];
        Self {
            ax: z.clone(),
            af: z.clone(),
            h: z.clone(),
            g: z.clone(),
            dh: z.clone(),
            dz: z,
        }
    }
}

fn split_blocks<'a>(mut rest: &'a mut [f64], sizes: &[usize; 10]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(10);
    for &s in sizes {
        let (a, b) = rest.split_at_mut(s);
        out.push(a);
        rest = b;
    }
    out
}

impl DenoiserParams {
    pub fn zeros(hidden: usize, embed: usize, n_features: usize) -> Result<Self, DiffusionError> {
        if hidden == 0 || n_features == 0 || embed == 0 || !embed.is_multiple_of(2) {
            return Err(DiffusionError::BadConfig(format!(
                "hidden {hidden}, embed {embed} (must be even), features {n_features}"
            )));
        }
        let n = Self::sizes_for(hidden, embed, n_features).iter().sum();
        Ok(Self {
            hidden,
            embed,
            n_features,
            theta: vec![0.0; n],
        })
    }

    /// Gaussian weights scaled by `1/sqrt(fan_in)`, zero biases.
    pub fn init(
        hidden: usize,
        embed: usize,
        n_features: usize,
        seed: u64,
    ) -> Result<Self, DiffusionError> {
        let mut p = Self::zeros(hidden, embed, n_features)?;
        let fans = [1, 0, embed, 0, n_features, 0, hidden, 0, hidden, 0];
        let offs = p.offsets();
        let mut rng = rng_for(seed, &[0x1417]);
        for (b, &fan) in fans.iter().enumerate() {
            if fan == 0 {
                continue;
            }
            let normal = Normal::new(0.0, 1.0 / (fan as f64).sqrt()).expect("positive std");
            for v in &mut p.theta[offs[b]..offs[b + 1]] {
                *v = normal.sample(&mut rng);
            }
        }
        Ok(p)
    }

    fn sizes_for(h: usize, e: usize, nf: usize) -> [usize; 10] {
        [h, h, h * e, h, h * nf, h, h * h, h, h, 1]
    }

    fn sizes(&self) -> [usize; 10] {
        Self::sizes_for(self.hidden, self.embed, self.n_features)
    }

    fn offsets(&self) -> [usize; 11] {
        let mut o = [0; 11];
        for (i, s) in self.sizes().iter().enumerate() {
            o[i + 1] = o[i] + s;
        }
        o
    }

    /// Block names with row-major shapes.
    pub fn shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        let (h, e, nf) = (self.hidden, self.embed, self.n_features);
        let shapes = [
            vec![h, 1],
            vec![h],
            vec![h, e],
            vec![h],
            vec![h, nf],
            vec![h],
            vec![h, h],
            vec![h],
            vec![1, h],
            vec![1],
        ];
        BLOCKS.iter().copied().zip(shapes).collect()
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        let i = BLOCKS.iter().position(|&b| b == name)?;
        let o = self.offsets();
        Some(&self.theta[o[i]..o[i + 1]])
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn embed(&self) -> usize {
        self.embed
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }

    fn view(&self) -> View<'_> {
        let o = self.offsets();
        let s = |i: usize| &self.theta[o[i]..o[i + 1]];
        View {
            h: self.hidden,
            e: self.embed,
            nf: self.n_features,
            w_x: s(0),
            b_x: s(1),
            w_t: s(2),
            b_t: s(3),
            w_f: s(4),
            b_f: s(5),
            w_g: s(6),
            b_g: s(7),
            w_o: s(8),
            b_o: s(9)[0],
        }
    }

    fn check(&self, x_t: &[f64], features: &ConditionFeatures) -> Result<(), DiffusionError> {
        if features.dim() != self.n_features {
            return Err(DiffusionError::ShapeMismatch(format!(
                "model expects {} features, got {}",
                self.n_features,
                features.dim()
            )));
        }
        if features.len() != x_t.len() {
            return Err(DiffusionError::ShapeMismatch(format!(
                "{} scores vs {} feature rows",
                x_t.len(),
                features.len()
            )));
        }
        Ok(())
    }

    /// Time branch activation `tanh(W_t·emb + b_t)` and the embedding.
    fn time_branch(&self, v: &View<'_>, t: usize) -> (Vec<f64>, Vec<f64>) {
        let emb = time_embedding(t, v.e);
        let a = (0..v.h)
            .map(|j| {
                let row = &v.w_t[j * v.e..(j + 1) * v.e];
                (v.b_t[j] + row.iter().zip(&emb).map(|(w, x)| w * x).sum::<f64>()).tanh()
            })
            .collect();
        (a, emb)
    }

    /// Mean squared error of the prediction against `target`, and its
    /// gradient with respect to every weight.
    pub(crate) fn loss_and_grad(
        &self,
        x_t: &[f64],
        t: usize,
        features: &ConditionFeatures,
        target: &[f64],
    ) -> Result<(f64, Vec<f64>), DiffusionError> {
        self.check(x_t, features)?;
        if target.len() != x_t.len() {
            return Err(DiffusionError::ShapeMismatch(format!(
                "{} targets vs {} scores",
                target.len(),
                x_t.len()
            )));
        }
        let n = x_t.len();
        if n == 0 {
            return Ok((0.0, vec![0.0; self.theta.len()]));
        }
        let v = self.view();
        let (a_t, emb) = self.time_branch(&v, t);
        let sizes = self.sizes();
        let inv_n = 1.0 / n as f64;
        let n_chunks = n.div_ceil(CHUNK);

        // Each chunk returns (sum of squared errors, flat gradient, sum of dh).
        let partials = par::map_range(n_chunks, |c| {
            let mut grad = vec![0.0; self.theta.len()];
            let mut dat = vec![0.0; v.h];
            let mut sc = Scratch::new(v.h);
            let mut sse = 0.0;
            {
                let g = split_blocks(&mut grad, &sizes);
                let Ok::<[&mut [f64]; 10], _>(
                    [gw_x, gb_x, _, _, gw_f, gb_f, gw_g, gb_g, gw_o, gb_o],
                ) = g.try_into()
                else {
                    unreachable!("ten blocks")
                };
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let f = features.row(i);
                    let out = forward_point(&v, x_t[i], &a_t, f, &mut sc);
                    let r = out - target[i];
                    sse += r * r;
                    let dout = 2.0 * r * inv_n;
                    gb_o[0] += dout;
                    for j in 0..v.h {
                        let df = dout * v.w_o[j];
                        gw_o[j] += dout * sc.h[j] * sc.g[j];
                        sc.dh[j] = df * sc.g[j];
                        sc.dz[j] = df * sc.h[j] * sc.g[j] * (1.0 - sc.g[j]);
                    }
                    for j in 0..v.h {
                        let dz = sc.dz[j];
                        gb_g[j] += dz;
                        let row = &v.w_g[j * v.h..(j + 1) * v.h];
                        let grow = &mut gw_g[j * v.h..(j + 1) * v.h];
                        for m in 0..v.h {
                            grow[m] += dz * sc.h[m];
                            sc.dh[m] += row[m] * dz;
                        }
                    }
                    for j in 0..v.h {
                        let dh = sc.dh[j];
                        let dpx = dh * (1.0 - sc.ax[j] * sc.ax[j]);
                        gw_x[j] += dpx * x_t[i];
                        gb_x[j] += dpx;
                        let dpf = dh * (1.0 - sc.af[j] * sc.af[j]);
                        gb_f[j] += dpf;
                        for (gw, fm) in gw_f[j * v.nf..(j + 1) * v.nf].iter_mut().zip(f) {
                            *gw += dpf * fm;
                        }
                        dat[j] += dh;
                    }
                }
            }
            (sse, grad, dat)
        });

        let mut sse = 0.0;
        let mut grad = vec![0.0; self.theta.len()];
        let mut dat = vec![0.0; v.h];
        for (s, g, d) in partials {
            sse += s;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            dat.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        }
        {
            let mut g = split_blocks(&mut grad, &sizes).into_iter().skip(2);
            let (gw_t, gb_t) = (g.next().expect("w_t"), g.next().expect("b_t"));
            for j in 0..v.h {
                let dpt = dat[j] * (1.0 - a_t[j] * a_t[j]);
                gb_t[j] += dpt;
                for (gw, e) in gw_t[j * v.e..(j + 1) * v.e].iter_mut().zip(&emb) {
                    *gw += dpt * e;
                }
            }
        }
        Ok((sse * inv_n, grad))
    }
}

fn forward_point(v: &View<'_>, x: f64, a_t: &[f64], f: &[f64], sc: &mut Scratch) -> f64 {
    for j in 0..v.h {
        sc.ax[j] = (v.w_x[j] * x + v.b_x[j]).tanh();
        let row = &v.w_f[j * v.nf..(j + 1) * v.nf];
        sc.af[j] = (v.b_f[j] + row.iter().zip(f).map(|(w, fm)| w * fm).sum::<f64>()).tanh();
        sc.h[j] = sc.ax[j] + a_t[j] + sc.af[j];
    }
    let mut out = v.b_o + x;
    for j in 0..v.h {
        let row = &v.w_g[j * v.h..(j + 1) * v.h];
        let z = v.b_g[j] + row.iter().zip(&sc.h).map(|(w, h)| w * h).sum::<f64>();
        sc.g[j] = sigmoid(z);
        out += v.w_o[j] * sc.h[j] * sc.g[j];
    }
    out
}

impl Denoiser for DenoiserParams {
    fn denoise(
        &self,
        x_t: &[f64],
        t: usize,
        features: &ConditionFeatures,
    ) -> Result<Vec<f64>, DiffusionError> {
        self.check(x_t, features)?;
        let v = self.view();
        let (a_t, _) = self.time_branch(&v, t);
        let mut out = x_t.to_vec();
        par::for_each_chunk_mut(&mut out, CHUNK, |c, chunk| {
            let mut sc = Scratch::new(v.h);
            for (k, o) in chunk.iter_mut().enumerate() {
                let i = c * CHUNK + k;
                *o = forward_point(&v, x_t[i], &a_t, features.row(i), &mut sc);
            }
        });
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// On-disk model: dimensions, training step count, signal scale and named
/// row-major weight arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    #[serde(rename = "H")]
    pub hidden: usize,
    #[serde(rename = "E")]
    pub embed: usize,
    #[serde(rename = "N_f")]
    pub n_features: usize,
    #[serde(rename = "T_train")]
    pub t_train: usize,
    pub scale: f64,
    pub weights: BTreeMap<String, WeightArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl ModelFile {
    pub fn new(params: &DenoiserParams, t_train: usize, scale: f64) -> Self {
        let weights = params
            .shapes()
            .into_iter()
            .map(|(name, shape)| {
                let data = params.block(name).expect("known block").to_vec();
                (name.to_string(), WeightArray { shape, data })
            })
            .collect();
        Self {
            schema: MODEL_SCHEMA.to_string(),
            hidden: params.hidden,
            embed: params.embed,
            n_features: params.n_features,
            t_train,
            scale,
            weights,
            config_hash: None,
            config: None,
        }
    }

    pub fn params(&self) -> Result<DenoiserParams, DiffusionError> {
        let bad = |m: String| DiffusionError::ModelFormat(m);
        if self.schema != MODEL_SCHEMA {
            return Err(bad(format!("unsupported schema {:?}", self.schema)));
        }
        if self.t_train == 0 || !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(bad(format!(
                "T_train {} scale {}",
                self.t_train, self.scale
            )));
        }
        let mut p = DenoiserParams::zeros(self.hidden, self.embed, self.n_features)
            .map_err(|e| bad(e.to_string()))?;
        let offs = p.offsets();
        for (i, (name, shape)) in p.shapes().into_iter().enumerate() {
            let w = self
                .weights
                .get(name)
                .ok_or_else(|| bad(format!("missing {name}")))?;
            if w.shape != shape || w.data.len() != offs[i + 1] - offs[i] {
                return Err(bad(format!(
                    "{name} has shape {:?}, expected {shape:?}",
                    w.shape
                )));
            }
            p.theta[offs[i]..offs[i + 1]].copy_from_slice(&w.data);
        }
        if self.weights.len() != BLOCKS.len() {
            return Err(bad("unexpected weight arrays".into()));
        }
        if !p.is_finite() {
            return Err(bad("non-finite weight".into()));
        }
        Ok(p)
    }
}
