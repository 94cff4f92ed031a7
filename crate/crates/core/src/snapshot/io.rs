use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::network::{Activation, DenseLayer};
use super::trainer::EncoderSnapshot;
use crate::container::{read_container, write_container, Block, SNAPSHOT_MAGIC};
use crate::error::{Result, SscError};

#[derive(Serialize, Deserialize)]
struct SnapshotMeta {
    cycle_index: usize,
    train_loss: f64,
    activations: Vec<Activation>,
    /// Schedule and network description of the producing run.
    provenance: serde_json::Value,
}

/// Write `snapshot` as an `SSCW` container. `provenance` must be a JSON document.
pub fn write_snapshot<W: Write>(w: W, snapshot: &EncoderSnapshot, provenance: &str) -> Result<()> {
    let provenance = serde_json::from_str(provenance)
        .map_err(|e| SscError::InvalidArgument(format!("provenance is not JSON: {e}")))?;
    let meta = SnapshotMeta {
        cycle_index: snapshot.cycle_index,
        train_loss: snapshot.train_loss,
        activations: snapshot.layers.iter().map(|l| l.activation).collect(),
        provenance,
    };
    let blocks: Vec<Block> = snapshot
        .layers
        .iter()
        .map(|l| Block {
            rows: l.outputs,
            cols: l.inputs,
            values: l.weights.clone(),
            biases: l.biases.clone(),
        })
        .collect();
    let meta = serde_json::to_string(&meta).expect("snapshot metadata serializes");
    write_container(w, SNAPSHOT_MAGIC, &blocks, &meta)
}

/// Read an `SSCW` container back into a snapshot and its provenance JSON.
pub fn read_snapshot<R: Read>(r: R) -> Result<(EncoderSnapshot, String)> {
    let (blocks, meta) = read_container(r, SNAPSHOT_MAGIC)?;
    let meta: SnapshotMeta =
        serde_json::from_str(&meta).map_err(|e| SscError::Data(format!("snapshot metadata: {e}")))?;
    if meta.activations.len() != blocks.len() {
        return Err(SscError::Data("activation count does not match layer count".into()));
    }
    let layers: Vec<DenseLayer> = blocks
        .into_iter()
        .zip(&meta.activations)
        .map(|(b, &activation)| DenseLayer {
            inputs: b.cols,
            outputs: b.rows,
            weights: b.values,
            biases: b.biases,
            activation,
        })
        .collect();
    if layers.windows(2).any(|p| p[0].outputs != p[1].inputs) {
        return Err(SscError::Data("inconsistent layer shapes".into()));
    }
    if layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases)).any(|v| !v.is_finite()) {
        return Err(SscError::Data("non-finite weight".into()));
    }
    let snapshot = EncoderSnapshot { layers, cycle_index: meta.cycle_index, train_loss: meta.train_loss };
    Ok((snapshot, meta.provenance.to_string()))
}
