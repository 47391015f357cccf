//! Binary reference files (little-endian):
//!
//! ```text
//! "UAREF1\0\0" | u32 ncomp | u32 nx | f64 x0 | f64 x1 | f64 eps | f64 t_final
//! | ncomp·nx × (f64 re, f64 im) | f64 checksum
//! ```
//!
//! The checksum is the storage-order sum of every re and im value. Each
//! file has a JSON sidecar with the recipe, the self-consistency estimate and
//! a SHA-256 digest of the binary file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::models::{Model, ModelId};
use crate::reference::{
    build_reference, recipe, value_checksum, Recipe, ReferencePolicy, ReferenceSolution,
};
use crate::spectral::{SpatialField, SpatialGrid};
use crate::Complex64;

pub const CACHE_MAGIC: [u8; 8] = *b"UAREF1\0\0";
const HEADER_LEN: usize = 8 + 4 + 4 + 4 * 8;

/// Contents of a reference file.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedField {
    pub eps: f64,
    pub t_final: f64,
    pub state: SpatialField,
    pub checksum: f64,
}

pub fn encode_reference(r: &ReferenceSolution) -> Vec<u8> {
    let s = &r.state;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * s.values().len() + 8);
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&(s.ncomp() as u32).to_le_bytes());
    out.extend_from_slice(&(s.nx() as u32).to_le_bytes());
    for v in [s.grid().x0(), s.grid().x1(), r.eps, r.t_final] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for z in s.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out.extend_from_slice(&value_checksum(s.values()).to_le_bytes());
    out
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Corrupt(msg.into())
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn decode_reference(bytes: &[u8]) -> Result<CachedField> {
    if bytes.len() < HEADER_LEN + 8 || bytes[..8] != CACHE_MAGIC {
        return Err(corrupt("bad magic or truncated header"));
    }
    let ncomp = u32_at(bytes, 8) as usize;
    let nx = u32_at(bytes, 12) as usize;
    let count = ncomp
        .checked_mul(nx)
        .filter(|&c| c > 0 && HEADER_LEN + 16 * c + 8 == bytes.len())
        .ok_or_else(|| corrupt("length does not match the header"))?;
    let (x0, x1) = (f64_at(bytes, 16), f64_at(bytes, 24));
    let (eps, t_final) = (f64_at(bytes, 32), f64_at(bytes, 40));
    let grid = SpatialGrid::new(x0, x1, nx).map_err(|_| corrupt("invalid grid in header"))?;
    let values: Vec<Complex64> = (0..count)
        .map(|i| {
            let at = HEADER_LEN + 16 * i;
            Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8))
        })
        .collect();
    let checksum = f64_at(bytes, bytes.len() - 8);
    if value_checksum(&values).to_bits() != checksum.to_bits() {
        return Err(corrupt("checksum mismatch"));
    }
    let state = SpatialField::new(grid, ncomp, values).map_err(|_| corrupt("invalid field"))?;
    Ok(CachedField {
        eps,
        t_final,
        state,
        checksum,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    model: ModelId,
    eps: f64,
    t_final: f64,
    recipe: Recipe,
    self_error: f64,
    sha256: String,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Writes `bytes` to a fresh temporary file next to `path`, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp{}-{n}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Directory of cached references keyed by model, ε, final time, recipe and
/// a digest of the initial state and model coefficients.
#[derive(Debug, Clone)]
pub struct ReferenceStore {
    dir: PathBuf,
}

impl ReferenceStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReferenceStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(model: &Model, state0: &SpatialField, t_final: f64, recipe: &Recipe) -> String {
        let mut h = Sha256::new();
        h.update(model.id().to_string());
        h.update(model.epsilon().to_le_bytes());
        h.update(t_final.to_le_bytes());
        h.update(serde_json::to_vec(recipe).expect("recipe serializes"));
        h.update(state0.grid().x0().to_le_bytes());
        h.update(state0.grid().x1().to_le_bytes());
        for z in state0.values() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
        match model {
            Model::Nls(m) => m
                .gamma()
                .values()
                .iter()
                .for_each(|z| h.update(z.re.to_le_bytes())),
            Model::Nkg(m) => h.update(m.lambda().to_le_bytes()),
        }
        let digest: String = h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        format!(
            "{}-eps{:e}-t{}-{}-n{}-nx{}-nt{}-{digest}",
            model.id(),
            model.epsilon(),
            t_final,
            recipe.solver,
            recipe.n_steps,
            recipe.nx,
            recipe.ntau
        )
    }

    pub fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (
            self.dir.join(format!("{key}.uaref")),
            self.dir.join(format!("{key}.json")),
        )
    }

    pub fn save(&self, key: &str, r: &ReferenceSolution) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let bytes = encode_reference(r);
        let side = Sidecar {
            model: r.model,
            eps: r.eps,
            t_final: r.t_final,
            recipe: r.recipe,
            self_error: r.self_error,
            sha256: hex_digest(&bytes),
        };
        let (bin, json) = self.paths(key);
        write_atomic(&bin, &bytes)?;
        write_atomic(&json, &serde_json::to_vec_pretty(&side)?)?;
        Ok(())
    }

    /// Loads `key` and checks it against the expected metadata.
    pub fn load(
        &self,
        key: &str,
        model: ModelId,
        eps: f64,
        t_final: f64,
        recipe: &Recipe,
    ) -> Result<ReferenceSolution> {
        let (bin, json) = self.paths(key);
        let side: Sidecar =
            serde_json::from_slice(&fs::read(json)?).map_err(|e| corrupt(e.to_string()))?;
        let bytes = fs::read(bin)?;
        if hex_digest(&bytes) != side.sha256 {
            return Err(corrupt("digest mismatch"));
        }
        let c = decode_reference(&bytes)?;
        let same = side.model == model
            && side.recipe == *recipe
            && c.eps.to_bits() == eps.to_bits()
            && side.eps.to_bits() == eps.to_bits()
            && c.t_final.to_bits() == t_final.to_bits()
            && c.state.nx() == recipe.nx;
        if !same {
            return Err(corrupt("metadata does not match the request"));
        }
        Ok(ReferenceSolution::new(
            model,
            eps,
            t_final,
            *recipe,
            c.state,
            side.self_error,
        ))
    }

    /// Cached reference for `model` from `state0`, built and stored when
    /// missing, unreadable or `force` is set. The flag reports a build.
    pub fn get_or_build(
        &self,
        model: &Model,
        state0: &SpatialField,
        t_final: f64,
        policy: ReferencePolicy,
        ntau: usize,
        force: bool,
    ) -> Result<(ReferenceSolution, bool)> {
        let r = recipe(
            policy,
            model.id(),
            model.epsilon(),
            t_final,
            model.grid().nx(),
            ntau,
        );
        let key = Self::key(model, state0, t_final, &r);
        if !force {
            if let Ok(found) = self.load(&key, model.id(), model.epsilon(), t_final, &r) {
                return Ok((found, false));
            }
        }
        let built = build_reference(model, state0, t_final, policy, ntau)?;
        self.save(&key, &built)?;
        Ok((built, true))
    }
}
