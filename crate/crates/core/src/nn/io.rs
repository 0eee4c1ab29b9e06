//! Self-describing binary model files: magic, JSON header, raw parameters.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Architecture, Dense, MlpModel};
use crate::error::{Error, Result};
use crate::Scalar;

const MAGIC: &[u8; 8] = b"LOBMLP01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub dtype: String,
    pub arch: Architecture,
    pub seed: u64,
    /// Path of the z-score parameters the inputs were normalised with.
    pub zscore_ref: Option<String>,
    /// Free-form metadata such as class names or target columns.
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn write_model<T: Scalar, W: Write>(
    out: &mut W,
    model: &MlpModel<T>,
    seed: u64,
    zscore_ref: Option<String>,
    meta: serde_json::Value,
) -> Result<()> {
    let header = ModelHeader {
        dtype: T::DTYPE.to_string(),
        arch: model.arch.clone(),
        seed,
        zscore_ref,
        meta,
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::with_capacity(model.parameter_count() * T::byte_width());
    for d in &model.layers {
        for &w in d.weights.iter() {
            w.write_le(&mut buf);
        }
        for &b in d.bias.iter() {
            b.write_le(&mut buf);
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_model<T: Scalar, R: Read>(input: &mut R) -> Result<(MlpModel<T>, ModelHeader)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: ModelHeader = serde_json::from_slice(&json)?;
    if header.dtype != T::DTYPE {
        return Err(Error::ModelFormat(format!(
            "file stores {} parameters, requested {}",
            header.dtype,
            T::DTYPE
        )));
    }
    header.arch.validate()?;
    let width = T::byte_width();
    let mut layers = Vec::new();
    for w in header.arch.sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let mut raw = vec![0u8; (fan_in * fan_out + fan_out) * width];
        input.read_exact(&mut raw)?;
        let vals: Vec<T> = raw.chunks_exact(width).map(T::read_le).collect();
        let weights = Array2::from_shape_vec((fan_in, fan_out), vals[..fan_in * fan_out].to_vec())
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let bias = Array1::from_vec(vals[fan_in * fan_out..].to_vec());
        layers.push(Dense { weights, bias });
    }
    let model = MlpModel {
        arch: header.arch.clone(),
        layers,
    };
    if !model.is_finite() {
        return Err(Error::ModelFormat("non-finite parameters".into()));
    }
    Ok((model, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Head;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_preserves_parameters() {
        let arch = Architecture::relu_then_sigmoid(3, &[4, 5], 2, 0.1, Head::Linear);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = MlpModel::<f32>::init(arch, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_model(&mut buf, &m, 42, Some("z.json".into()), serde_json::json!({"k": 1})).unwrap();
        let (back, header) = read_model::<f32, _>(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(header.seed, 42);
        assert!(read_model::<f64, _>(&mut buf.as_slice()).is_err());
        assert!(read_model::<f32, _>(&mut &buf[..20]).is_err());
    }
}
