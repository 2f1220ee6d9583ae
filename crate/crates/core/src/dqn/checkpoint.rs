//! Binary model files.
//!
//! Layout (little endian): magic `b"UAQN"`, `u32` version, `u32` layer count,
//! `u64` per layer size (input first), then for each layer its row-major
//! weights followed by its biases as `f64`.

use std::io::{Read, Write};
use std::path::Path;

use super::network::{Layer, QNetwork};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"UAQN";
const VERSION: u32 = 1;

pub fn write_network<W: Write>(net: &QNetwork, mut w: W) -> std::io::Result<()> {
    let sizes = net.layer_sizes();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(net.layers().len() as u32).to_le_bytes())?;
    for s in &sizes {
        w.write_all(&(*s as u64).to_le_bytes())?;
    }
    for l in net.layers() {
        for v in l.weights.iter().chain(&l.biases) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
    Ok(buf)
}

pub fn read_network<R: Read>(mut r: R) -> Result<QNetwork> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if count == 0 || count > 64 {
        return Err(Error::Checkpoint(format!("implausible layer count {count}")));
    }
    let mut sizes = Vec::with_capacity(count + 1);
    for _ in 0..=count {
        let s = u64::from_le_bytes(read_array(&mut r)?);
        if s == 0 || s > 1 << 24 {
            return Err(Error::Checkpoint(format!("implausible layer size {s}")));
        }
        sizes.push(s as usize);
    }
    let mut layers = Vec::with_capacity(count);
    for w in sizes.windows(2) {
        let (inputs, outputs) = (w[0], w[1]);
        let mut read_vec = |n: usize| -> Result<Vec<f64>> {
            (0..n)
                .map(|_| read_array::<8, _>(&mut r).map(f64::from_le_bytes))
                .collect()
        };
        let weights = read_vec(inputs * outputs)?;
        let biases = read_vec(outputs)?;
        layers.push(Layer {
            inputs,
            outputs,
            weights,
            biases,
        });
    }
    let mut rest = [0u8; 1];
    match r.read(&mut rest) {
        Ok(0) => {}
        Ok(_) => return Err(Error::Checkpoint("trailing bytes".into())),
        Err(e) => return Err(Error::Checkpoint(e.to_string())),
    }
    QNetwork::from_layers(layers)
}

pub fn save(net: &QNetwork, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_network(net, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<QNetwork> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_network(std::io::BufReader::new(file))
}

/// Loads a model and checks it against the expected layer sizes.
pub fn load_expecting(path: &Path, sizes: &[usize]) -> Result<QNetwork> {
    let net = load(path)?;
    if net.layer_sizes() != sizes {
        return Err(Error::ArchitectureMismatch(net.layer_sizes(), sizes.to_vec()));
    }
    Ok(net)
}
