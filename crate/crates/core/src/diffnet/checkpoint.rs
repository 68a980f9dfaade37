//! Checkpoint file format.
//!
//! Little-endian binary, in order:
//!
//! ```text
//! magic            8 bytes   b"SBPINNCK"
//! version          u32       currently 1
//! hidden_layers    u32
//! width            u32
//! activation       u32       0 = tanh
//! x_scale          f64
//! x_shift          f64
//! t_scale          f64
//! t_shift          f64
//! seed             u64
//! param_count      u64       D
//! parameters       f64 * D
//! ```
//!
//! A JSON sidecar (same path with `.json` appended) carries training
//! metadata: epoch, loss breakdown, seed, wall time. The binary file alone
//! is sufficient to reload the model.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use super::{Activation, DiffnetError, NetworkParams, NetworkSpec};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"SBPINNCK";
const VERSION: u32 = 1;

/// Writes the binary checkpoint and, when `sidecar` is given, the JSON
/// metadata next to it. Parameters are stored as `f64` regardless of `R`.
pub fn save_checkpoint<R: Scalar>(
    path: &Path,
    net: &NetworkParams<R>,
    sidecar: Option<&impl Serialize>,
) -> Result<(), DiffnetError> {
    net.validate()?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(net.spec.hidden_layers as u32).to_le_bytes())?;
    w.write_all(&(net.spec.width as u32).to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?; // tanh
    for v in [
        net.spec.x_scale,
        net.spec.x_shift,
        net.spec.t_scale,
        net.spec.t_shift,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&net.spec.seed.to_le_bytes())?;
    w.write_all(&(net.theta.len() as u64).to_le_bytes())?;
    for v in &net.theta {
        w.write_all(&v.value().to_le_bytes())?;
    }
    w.flush()?;

    if let Some(meta) = sidecar {
        let sidecar_path = sidecar_path(path);
        let mut w = BufWriter::new(File::create(sidecar_path)?);
        serde_json::to_writer_pretty(&mut w, meta)?;
        w.flush()?;
    }
    Ok(())
}

/// Path of the JSON sidecar belonging to a checkpoint.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

/// Loads a checkpoint; the sidecar, when present, is returned as raw JSON.
pub fn load_checkpoint<R: Scalar>(
    path: &Path,
) -> Result<(NetworkParams<R>, Option<serde_json::Value>), DiffnetError> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| DiffnetError::BadCheckpoint("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(DiffnetError::BadCheckpoint(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DiffnetError::BadCheckpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let hidden_layers = read_u32(&mut r)? as usize;
    let width = read_u32(&mut r)? as usize;
    let activation = match read_u32(&mut r)? {
        0 => Activation::Tanh,
        other => {
            return Err(DiffnetError::BadCheckpoint(format!(
                "unknown activation tag {other}"
            )))
        }
    };
    let x_scale = read_f64(&mut r)?;
    let x_shift = read_f64(&mut r)?;
    let t_scale = read_f64(&mut r)?;
    let t_shift = read_f64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let spec = NetworkSpec {
        hidden_layers,
        width,
        activation,
        x_scale,
        x_shift,
        t_scale,
        t_shift,
        seed,
    };
    spec.validate()?;

    let count = read_u64(&mut r)? as usize;
    if count != spec.param_count() {
        return Err(DiffnetError::BadCheckpoint(format!(
            "parameter count {count} does not match spec ({})",
            spec.param_count()
        )));
    }
    let mut theta = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut buf)
            .map_err(|_| DiffnetError::BadCheckpoint("truncated parameter block".into()))?;
        theta.push(R::from_f64(f64::from_le_bytes(buf)));
    }
    let net = NetworkParams { spec, theta };
    net.validate()?;

    let sidecar = match File::open(sidecar_path(path)) {
        Ok(f) => Some(serde_json::from_reader(BufReader::new(f))?),
        Err(_) => None,
    };
    Ok((net, sidecar))
}

fn read_u32(r: &mut impl Read) -> Result<u32, DiffnetError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| DiffnetError::BadCheckpoint("truncated header".into()))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64, DiffnetError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| DiffnetError::BadCheckpoint("truncated header".into()))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64, DiffnetError> {
    Ok(f64::from_bits(read_u64(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnet::init_network;
    use serde_json::json;

    #[test]
    fn roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let net = init_network::<f64>(&NetworkSpec::new(2, 9, 150.0, 77)).unwrap();
        let meta = json!({"epoch": 12, "seed": 77});
        save_checkpoint(&path, &net, Some(&meta)).unwrap();

        let (back, sidecar) = load_checkpoint::<f64>(&path).unwrap();
        assert_eq!(back.spec, net.spec);
        assert_eq!(back.theta.len(), net.theta.len());
        for (a, b) in back.theta.iter().zip(&net.theta) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(sidecar.unwrap()["epoch"], 12);
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let net = init_network::<f64>(&NetworkSpec::new(1, 4, 1.0, 0)).unwrap();
        save_checkpoint(&path, &net, None::<&serde_json::Value>).unwrap();

        // Bad magic.
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] ^= 0xFF;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(DiffnetError::BadCheckpoint(_))
        ));

        // Bad version.
        save_checkpoint(&path, &net, None::<&serde_json::Value>).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 99;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(DiffnetError::BadCheckpoint(_))
        ));

        // Truncated parameter block.
        save_checkpoint(&path, &net, None::<&serde_json::Value>).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(
            load_checkpoint::<f64>(&path),
            Err(DiffnetError::BadCheckpoint(_))
        ));
    }
}
