//! Self-contained fit archives.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic     8 bytes  "BPCFIT1\0"
//! meta_len  u64
//! meta      JSON     version, model, sampler settings, per-chain shapes
//! n_values  u64
//! values    f64 x n  draws of every chain, then per-transition statistics
//! checksum  32 bytes SHA-256 of everything above
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IngestSpec;
use crate::error::{Error, Result};
use crate::model::ModelInfo;
use crate::sampler::{ChainDraws, PosteriorFit, SamplerConfig, TransitionStats};

pub const MAGIC: &[u8; 8] = b"BPCFIT1\0";
pub const FORMAT_VERSION: u32 = 1;

/// Values stored per transition: divergent, treedepth, n_leapfrog,
/// accept_stat, energy.
const STAT_WIDTH: usize = 5;

/// A fit together with how its data was read.
#[derive(Debug, Clone, PartialEq)]
pub struct FitArchive {
    pub fit: PosteriorFit,
    pub ingest: Option<IngestSpec>,
}

#[derive(Serialize, Deserialize)]
struct ChainMeta {
    n_draws: usize,
    step_size: f64,
    inv_mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    version: u32,
    info: ModelInfo,
    config: SamplerConfig,
    data_fingerprint: String,
    chains: Vec<ChainMeta>,
    ingest: Option<IngestSpec>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptArchive(msg.into())
}

impl FitArchive {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let fit = &self.fit;
        let meta = Meta {
            version: FORMAT_VERSION,
            info: fit.info.clone(),
            config: fit.config.clone(),
            data_fingerprint: fit.data_fingerprint.clone(),
            chains: fit
                .chains
                .iter()
                .map(|c| ChainMeta { n_draws: c.n_draws(), step_size: c.step_size, inv_mass: c.inv_mass.clone() })
                .collect(),
            ingest: self.ingest.clone(),
        };
        let json = serde_json::to_vec_pretty(&meta).map_err(|e| corrupt(e.to_string()))?;

        let mut values: Vec<f64> = Vec::new();
        for c in &fit.chains {
            values.extend_from_slice(&c.draws);
        }
        for c in &fit.chains {
            for s in &c.stats {
                values.extend([
                    if s.divergent { 1.0 } else { 0.0 },
                    s.treedepth as f64,
                    s.n_leapfrog as f64,
                    s.accept_stat,
                    s.energy,
                ]);
            }
        }

        let mut out = Vec::with_capacity(8 + 8 + json.len() + 8 + 8 * values.len() + 32);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(values.len() as u64).to_le_bytes());
        for v in &values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(corrupt("not a fit archive (bad magic bytes)"));
        }
        if bytes.len() < 8 + 8 + 8 + 32 {
            return Err(corrupt("file is truncated"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch (truncated or modified file)"));
        }

        let mut pos: usize = 8;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end =
                pos.checked_add(n).filter(|e| *e <= body.len()).ok_or_else(|| corrupt("section overruns file"))?;
            let s = &body[pos..end];
            pos = end;
            Ok(s)
        };
        let u64_at = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8-byte slice"));

        let meta_len = usize::try_from(u64_at(take(8)?)).map_err(|_| corrupt("metadata length"))?;
        let json = take(meta_len)?;
        let probe: VersionProbe = serde_json::from_slice(json).map_err(|e| corrupt(format!("metadata: {e}")))?;
        if probe.version != FORMAT_VERSION {
            return Err(Error::VersionMismatch { expected: FORMAT_VERSION, found: probe.version });
        }
        let meta: Meta = serde_json::from_slice(json).map_err(|e| corrupt(format!("metadata: {e}")))?;

        let n_values = usize::try_from(u64_at(take(8)?)).map_err(|_| corrupt("value count"))?;
        let raw = take(n_values.checked_mul(8).ok_or_else(|| corrupt("value count"))?)?;
        if pos != body.len() {
            return Err(corrupt("trailing bytes after value block"));
        }
        let values: Vec<f64> =
            raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();

        let dim = meta.info.layout.dim();
        let expected: usize = meta.chains.iter().map(|c| c.n_draws * (dim + STAT_WIDTH)).sum();
        if expected != values.len() {
            return Err(corrupt(format!("expected {expected} values, found {}", values.len())));
        }
        let mut offset = 0;
        let mut draw_blocks = Vec::with_capacity(meta.chains.len());
        for c in &meta.chains {
            draw_blocks.push(values[offset..offset + c.n_draws * dim].to_vec());
            offset += c.n_draws * dim;
        }
        let mut chains = Vec::with_capacity(meta.chains.len());
        for (c, draws) in meta.chains.into_iter().zip(draw_blocks) {
            let stats = values[offset..offset + c.n_draws * STAT_WIDTH]
                .chunks_exact(STAT_WIDTH)
                .map(|s| TransitionStats {
                    divergent: s[0] != 0.0,
                    treedepth: s[1] as u32,
                    n_leapfrog: s[2] as u32,
                    accept_stat: s[3],
                    energy: s[4],
                })
                .collect();
            offset += c.n_draws * STAT_WIDTH;
            if c.inv_mass.len() != dim {
                return Err(corrupt("metric length does not match the parameter layout"));
            }
            chains.push(ChainDraws { dim, draws, stats, step_size: c.step_size, inv_mass: c.inv_mass });
        }

        Ok(FitArchive {
            fit: PosteriorFit { info: meta.info, config: meta.config, chains, data_fingerprint: meta.data_fingerprint },
            ingest: meta.ingest,
        })
    }

    /// Writes atomically: a temporary file in the target directory is
    /// renamed over `path` once complete.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| super::with_path(e, path))?)
    }
}

pub fn save_fit(fit: &PosteriorFit, path: &Path) -> Result<()> {
    FitArchive { fit: fit.clone(), ingest: None }.save(path)
}

pub fn load_fit(path: &Path) -> Result<PosteriorFit> {
    Ok(FitArchive::load(path)?.fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::test_support::fit_from_draws;

    fn archive() -> FitArchive {
        let draws: Vec<Vec<f64>> = (0..25).map(|i| vec![0.1 * i as f64, -1.0 / (i + 1) as f64]).collect();
        let mut fit = fit_from_draws(
            &["a", "b"],
            "bt-ordereffect",
            &draws.iter().map(|d| vec![d[0], d[1], 0.3]).collect::<Vec<_>>(),
        );
        fit.chains[0].stats[3].energy = f64::NAN;
        fit.chains[0].stats[4].divergent = true;
        FitArchive { fit, ingest: Some(IngestSpec::new("games.csv")) }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let a = archive();
        let b = FitArchive::from_bytes(&a.to_bytes().unwrap()).unwrap();
        assert_eq!(
            a.fit.chains[0].draws.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.fit.chains[0].draws.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert!(b.fit.chains[0].stats[3].energy.is_nan());
        assert!(b.fit.chains[0].stats[4].divergent);
        assert_eq!(a.fit.info, b.fit.info);
        assert_eq!(a.ingest, b.ingest);
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = archive().to_bytes().unwrap();
        let err = FitArchive::from_bytes(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(err, Error::CorruptArchive(_)));
    }

    #[test]
    fn future_versions_are_rejected() {
        let a = archive();
        let bytes = a.to_bytes().unwrap();
        let meta_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let json = String::from_utf8(bytes[16..16 + meta_len].to_vec()).unwrap();
        let edited = json.replacen("\"version\": 1", "\"version\": 2", 1);
        assert_ne!(json, edited);
        let mut out = bytes[..16].to_vec();
        out.extend_from_slice(edited.as_bytes());
        out.extend_from_slice(&bytes[16 + meta_len..bytes.len() - 32]);
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        assert!(matches!(FitArchive::from_bytes(&out), Err(Error::VersionMismatch { expected: 1, found: 2 })));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.bpc");
        let a = archive();
        a.save(&path).unwrap();
        assert_eq!(FitArchive::load(&path).unwrap().fit.chains[0].draws, a.fit.chains[0].draws);
        assert!(matches!(load_fit(&dir.path().join("missing.bpc")), Err(Error::Io(_))));
    }
}
