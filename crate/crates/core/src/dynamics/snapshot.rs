//! Density-matrix snapshots: raw little-endian complex doubles (row-major,
//! real part first) plus a JSON sidecar with everything needed to resume.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::engine::{Engine, TrajectoryState};
use super::state::BlockDensity;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub const FORMAT: &str = "complex128-le-row-major";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub n: usize,
    pub dim: usize,
    pub time: f64,
    pub step: usize,
    pub trajectory: usize,
    pub master_seed: u64,
    /// ChaCha word position after the last coupling draw, as a decimal string.
    pub rng_word_pos: String,
    /// Full-space occupation index of each row.
    pub basis: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub matrix: CMatrix,
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `traj{index}_step{step}.bin` and its `.json` sidecar into `dir`.
pub fn write_snapshot(dir: &Path, engine: &Engine, state: &TrajectoryState) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let block = engine.block();
    let m = state.rho.to_matrix(block);
    let dim = m.nrows();
    let mut bytes = Vec::with_capacity(dim * dim * 16);
    for r in 0..dim {
        for c in 0..dim {
            bytes.extend_from_slice(&m[(r, c)].re.to_le_bytes());
            bytes.extend_from_slice(&m[(r, c)].im.to_le_bytes());
        }
    }
    let bin = dir.join(format!("traj{:05}_step{:08}.bin", state.index, state.step));
    fs::write(&bin, bytes)?;
    let meta = SnapshotMeta {
        format: FORMAT.to_string(),
        n: block.n(),
        dim,
        time: state.time(engine.config().dt),
        step: state.step,
        trajectory: state.index,
        master_seed: engine.config().master_seed,
        rng_word_pos: state.rng_word_pos().to_string(),
        basis: block.basis().to_vec(),
    };
    fs::write(sidecar_path(&bin), serde_json::to_string_pretty(&meta)?)?;
    Ok(bin)
}

pub fn read_snapshot(bin: &Path) -> Result<Snapshot> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(bin))?)?;
    if meta.format != FORMAT {
        return Err(Error::Snapshot(format!("unknown format {:?}", meta.format)));
    }
    let bytes = fs::read(bin)?;
    if bytes.len() != meta.dim * meta.dim * 16 || meta.basis.len() != meta.dim {
        return Err(Error::Snapshot(format!(
            "{} bytes and {} basis states do not match dimension {}",
            bytes.len(),
            meta.basis.len(),
            meta.dim
        )));
    }
    let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut matrix = CMatrix::zeros(meta.dim, meta.dim);
    for r in 0..meta.dim {
        for c in 0..meta.dim {
            let re = values.next().expect("length checked");
            let im = values.next().expect("length checked");
            matrix[(r, c)] = C64::new(re, im);
        }
    }
    Ok(Snapshot { meta, matrix })
}

/// Trajectory state that continues exactly where the snapshot was taken.
pub fn restore(engine: &Engine, snapshot: &Snapshot) -> Result<TrajectoryState> {
    let meta = &snapshot.meta;
    let cfg = engine.config();
    if meta.n != cfg.n || meta.master_seed != cfg.master_seed || meta.basis != engine.block().basis() {
        return Err(Error::Snapshot("snapshot does not belong to this configuration".into()));
    }
    let word_pos: u128 = meta
        .rng_word_pos
        .parse()
        .map_err(|_| Error::Snapshot(format!("bad word position {:?}", meta.rng_word_pos)))?;
    let rho = BlockDensity::from_matrix(engine.block(), &snapshot.matrix)?;
    Ok(engine.restore_state(meta.trajectory, meta.step, rho, word_pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SimConfig;

    #[test]
    fn snapshot_round_trip_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let config = SimConfig::new(3, 1.0, 0.2, 0.4, 1)
            .with_seed(99)
            .with_checkpoints(vec![0.2, 0.4]);
        let engine = Engine::new(&config).unwrap();
        let mut path = None;
        let end = engine
            .run_trajectory(0, &mut |st: &TrajectoryState, cp| {
                if cp == 0 {
                    path = Some(write_snapshot(dir.path(), &engine, st)?);
                }
                Ok(())
            })
            .unwrap();
        let snap = read_snapshot(path.as_ref().unwrap()).unwrap();
        assert_eq!(snap.meta.step, 20);
        assert_eq!(snap.meta.dim, 20);
        let resumed = engine
            .resume(restore(&engine, &snap).unwrap(), &mut |_: &TrajectoryState, _| Ok(()))
            .unwrap();
        assert!(resumed.rho.distance(&end.rho) < 1e-13);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config = SimConfig::new(2, 1.0, 0.2, 0.1, 1);
        let engine = Engine::new(&config).unwrap();
        let st = engine.initial_state(0);
        let bin = write_snapshot(dir.path(), &engine, &st).unwrap();
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_snapshot(&bin), Err(Error::Snapshot(_))));
    }
}
