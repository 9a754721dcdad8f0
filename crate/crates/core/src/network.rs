//! Residual feedforward networks `x ↦ σ(Ax + b) + Cx + d` and their JSON form.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::ActivationKind;

/// One layer `g(x) = σ(Ax + b) + Cx + d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub kind: ActivationKind,
}

impl LayerParams {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DMatrix<f64>,
        d: DVector<f64>,
        kind: ActivationKind,
    ) -> Result<Self> {
        let layer = Self { a, b, c, d, kind };
        layer.validate().map_err(Error::Dimension)?;
        Ok(layer)
    }

    /// A layer without activation path: `x ↦ Cx + d`.
    pub fn affine(c: DMatrix<f64>, d: DVector<f64>, kind: ActivationKind) -> Result<Self> {
        let (m, n) = c.shape();
        let d = d.add_scalar(-kind.eval(0.0));
        Self::new(DMatrix::zeros(m, n), DVector::zeros(m), c, d, kind)
    }

    pub fn input_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.a.nrows()
    }

    /// True when the activation path carries no dependence on the input.
    pub fn is_affine(&self) -> bool {
        self.a.iter().all(|&v| v == 0.0)
    }

    pub fn has_skip(&self) -> bool {
        self.c.iter().any(|&v| v != 0.0)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let (m, n) = self.a.shape();
        if self.b.len() != m {
            return Err(format!("b has length {} but A has {m} rows", self.b.len()));
        }
        if self.c.shape() != (m, n) {
            return Err(format!(
                "C is {}x{} but A is {m}x{n}",
                self.c.nrows(),
                self.c.ncols()
            ));
        }
        if self.d.len() != m {
            return Err(format!("d has length {} but A has {m} rows", self.d.len()));
        }
        if m == 0 || n == 0 {
            return Err("layer has an empty dimension".into());
        }
        let finite = self.a.iter().chain(self.b.iter()).chain(self.c.iter()).chain(self.d.iter());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err("non-finite parameter".into());
        }
        Ok(())
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let z = &self.a * x + &self.b;
        z.map(|v| self.kind.eval(v)) + &self.c * x + &self.d
    }

    /// Applies the layer to each column of `x`.
    pub fn eval_batch(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.a * x;
        let kind = self.kind;
        for mut col in z.column_iter_mut() {
            for (v, &bi) in col.iter_mut().zip(self.b.iter()) {
                *v = kind.eval(*v + bi);
            }
        }
        if self.has_skip() {
            z += &self.c * x;
        }
        for mut col in z.column_iter_mut() {
            col += &self.d;
        }
        z
    }
}

/// An ordered, shape-consistent stack of layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<LayerParams>,
}

impl Network {
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            layer.validate().map_err(|message| Error::Layer { layer: i, message })?;
            if i > 0 {
                let found = layers[i - 1].output_dim();
                if layer.input_dim() != found {
                    return Err(Error::Layer {
                        layer: i,
                        message: format!("expected input dim {}, found {found}", layer.input_dim()),
                    });
                }
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x.len())?;
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.eval(&h);
        }
        Ok(h)
    }

    /// Forward pass over the columns of `x` (one sample per column).
    pub fn eval_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x.nrows())?;
        let mut h = self.layers[0].eval_batch(x);
        for layer in &self.layers[1..] {
            h = layer.eval_batch(&h);
        }
        Ok(h)
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.input_dim() {
            return Err(Error::Layer {
                layer: 0,
                message: format!("expected input dim {}, found {n}", self.input_dim()),
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        let layers = doc
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.into_layer().map_err(|message| Error::Layer { layer: i, message }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn to_json(&self) -> String {
        let doc = NetworkDoc { layers: self.layers.iter().map(LayerDoc::from_layer).collect() };
        serde_json::to_string_pretty(&doc).expect("network serialises")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    kind: ActivationKind,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl LayerDoc {
    fn from_layer(l: &LayerParams) -> Self {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self {
            kind: l.kind,
            a: rows(&l.a),
            b: l.b.iter().copied().collect(),
            c: rows(&l.c),
            d: l.d.iter().copied().collect(),
        }
    }

    fn into_layer(self) -> std::result::Result<LayerParams, String> {
        let a = matrix_from_rows(&self.a, "A")?;
        let c = matrix_from_rows(&self.c, "C")?;
        let layer = LayerParams {
            a,
            b: DVector::from_vec(self.b),
            c,
            d: DVector::from_vec(self.d),
            kind: self.kind,
        };
        layer.validate()?;
        Ok(layer)
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> std::result::Result<DMatrix<f64>, String> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("{name} has ragged rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
