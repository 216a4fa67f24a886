//! Plain-text model files.
//!
//! ```text
//! ELF-MLP 1
//! 6 12 12 6 1
//! <layer 1 weights, row-major> <layer 1 biases>
//! ...
//! ```

use super::{Layer, Mlp, LAYER_DIMS};
use crate::{Error, Result};

const MAGIC: &str = "ELF-MLP 1";

pub fn save_model(model: &Mlp) -> String {
    let mut s = String::new();
    s.push_str(MAGIC);
    s.push('\n');
    let dims: Vec<String> = LAYER_DIMS.iter().map(usize::to_string).collect();
    s.push_str(&dims.join(" "));
    s.push('\n');
    for l in model.layers() {
        for o in 0..l.n_out {
            let row: Vec<String> = l.weights[o * l.n_in..(o + 1) * l.n_in].iter().map(f64::to_string).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        let b: Vec<String> = l.biases.iter().map(f64::to_string).collect();
        s.push_str(&b.join(" "));
        s.push('\n');
    }
    s
}

pub fn load_model(text: &str) -> Result<Mlp> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(Error::BadModel("missing ELF-MLP 1 header".into()));
    }
    let dims: Vec<usize> = lines
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::BadModel(format!("bad dimension {t:?}"))))
        .collect::<Result<_>>()?;
    if dims != LAYER_DIMS {
        return Err(Error::BadModel(format!("dimensions {dims:?}, expected {LAYER_DIMS:?}")));
    }
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| Error::BadModel(format!("bad number {t:?}"))))
        .collect::<Result<_>>()?;
    let expected = Mlp::zeros().param_count();
    if values.len() != expected {
        return Err(Error::BadModel(format!("{} parameters, expected {expected}", values.len())));
    }
    let mut k = 0;
    let layers = LAYER_DIMS
        .windows(2)
        .map(|d| {
            let (n_in, n_out) = (d[0], d[1]);
            let weights = values[k..k + n_in * n_out].to_vec();
            k += n_in * n_out;
            let biases = values[k..k + n_out].to_vec();
            k += n_out;
            Layer { n_in, n_out, weights, biases }
        })
        .collect();
    Ok(Mlp::from_layers(layers))
}
