use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    cosine_grid, decompose, extract_features, fit_normalizer, parse_coordinate_file,
    resample_with_residual, FeatureNormalizer, GeomError, GeometricFeatures, RawAirfoil,
    ThicknessCamber, GRID_INTERVALS, GRID_LEN,
};
use crate::baselines::SvdModel;
use crate::io::atomic_write;

pub const DATASET_MAGIC: &[u8; 4] = b"AGDS";
pub const DATASET_VERSION: u32 = 1;

/// Training/validation ratio of the reference database (1499 of 1539).
const VALIDATION_SHARE: f64 = 40.0 / 1539.0;

/// Deterministic replacements for visual inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Reject when any thickness value falls below this (self-intersection).
    pub min_thickness: f64,
    pub t_max_range: (f64, f64),
    /// Largest allowed deviation of the resampled section from raw points.
    pub max_residual: f64,
    pub min_points: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_thickness: -1e-4, t_max_range: (0.01, 0.7), max_residual: 5e-3, min_points: RawAirfoil::MIN_POINTS }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BuildReport {
    pub files_seen: usize,
    pub rejections: Vec<Rejection>,
}

/// Preprocessed samples with features, normalizer and split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirfoilDataset {
    pub names: Vec<String>,
    pub samples: Vec<ThicknessCamber>,
    pub features: Vec<GeometricFeatures>,
    pub normalizer: FeatureNormalizer,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub seed: u64,
    pub svd: Option<SvdModel>,
}

impl AirfoilDataset {
    /// Assemble a dataset from already decomposed samples, fitting the
    /// normalizer and drawing the seeded split.
    pub fn from_samples(
        names: Vec<String>,
        samples: Vec<ThicknessCamber>,
        seed: u64,
    ) -> Result<Self, GeomError> {
        if samples.is_empty() {
            return Err(GeomError::EmptyDataset);
        }
        let features: Vec<GeometricFeatures> = samples.iter().map(extract_features).collect();
        let normalizer = fit_normalizer(&features)?;
        let features = features.iter().map(|f| normalizer.annotate(f)).collect();
        let (train, validation) = split_indices(samples.len(), seed);
        Ok(Self { names, samples, features, normalizer, train, validation, seed, svd: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn train_samples(&self) -> Vec<&ThicknessCamber> {
        self.train.iter().map(|&i| &self.samples[i]).collect()
    }

    pub fn normalized_features(&self, idx: usize) -> [f64; 4] {
        self.normalizer.normalize(&self.features[idx])
    }

    fn header(&self) -> DatasetHeader {
        DatasetHeader {
            magic: "AGDS".into(),
            version: DATASET_VERSION,
            sample_count: self.len(),
            grid: GridSpec { kind: "cosine".into(), intervals: GRID_INTERVALS, points: GRID_LEN },
            names: self.names.clone(),
            normalizer: self.normalizer.clone(),
            train: self.train.clone(),
            validation: self.validation.clone(),
            seed: self.seed,
            svd: self.svd.clone(),
        }
    }

    /// Text flavor: one JSON document with arrays inline.
    pub fn to_json(&self) -> String {
        let doc = JsonDataset {
            header: self.header(),
            thickness: self.samples.iter().map(|s| s.t.clone()).collect(),
            camber: self.samples.iter().map(|s| s.c.clone()).collect(),
            features: self.features.iter().map(|f| f.as_array()).collect(),
        };
        serde_json::to_string(&doc).expect("dataset serialises")
    }

    /// Binary flavor: magic, version, JSON header, little-endian f64 arrays
    /// (thickness, camber, features; row-major) and a SHA-256 trailer.
    pub fn to_binary(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header()).expect("header serialises");
        let mut out = Vec::with_capacity(64 + header.len() + self.len() * (2 * GRID_LEN + 4) * 8);
        out.extend_from_slice(DATASET_MAGIC);
        out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for s in &self.samples {
            s.t.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
        for s in &self.samples {
            s.c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
        for f in &self.features {
            f.as_array().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Write either flavor, chosen by extension (`.json` is text).
    pub fn save(&self, path: &Path) -> Result<(), GeomError> {
        let bytes = if path.extension().is_some_and(|e| e == "json") {
            self.to_json().into_bytes()
        } else {
            self.to_binary()
        };
        atomic_write(path, &bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GeomError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GeomError> {
        if bytes.starts_with(DATASET_MAGIC) {
            Self::from_binary(bytes)
        } else {
            let doc: JsonDataset =
                serde_json::from_slice(bytes).map_err(|e| GeomError::Format(e.to_string()))?;
            check_header(&doc.header)?;
            let n = doc.header.sample_count;
            if doc.thickness.len() != n || doc.camber.len() != n || doc.features.len() != n {
                return Err(GeomError::Format("array lengths disagree with sample count".into()));
            }
            Self::assemble(doc.header, doc.thickness, doc.camber, doc.features)
        }
    }

    fn from_binary(bytes: &[u8]) -> Result<Self, GeomError> {
        if bytes.len() < 16 + 32 {
            return Err(GeomError::Format("truncated dataset file".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(GeomError::Format("checksum mismatch".into()));
        }
        let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
        if version != DATASET_VERSION {
            return Err(GeomError::Format(format!(
                "dataset version {version}, this build reads version {DATASET_VERSION}"
            )));
        }
        let hlen = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
        let header: DatasetHeader = serde_json::from_slice(
            body.get(16..16 + hlen).ok_or_else(|| GeomError::Format("truncated header".into()))?,
        )
        .map_err(|e| GeomError::Format(e.to_string()))?;
        check_header(&header)?;
        let n = header.sample_count;
        let p = header.grid.points;
        let floats: Vec<f64> = body[16 + hlen..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if floats.len() != n * (2 * p + 4) {
            return Err(GeomError::Format("array section has the wrong size".into()));
        }
        let (t, rest) = floats.split_at(n * p);
        let (c, f) = rest.split_at(n * p);
        Self::assemble(
            header,
            t.chunks(p).map(<[f64]>::to_vec).collect(),
            c.chunks(p).map(<[f64]>::to_vec).collect(),
            f.chunks(4).map(|v| [v[0], v[1], v[2], v[3]]).collect(),
        )
    }

    fn assemble(
        h: DatasetHeader,
        t: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        f: Vec<[f64; 4]>,
    ) -> Result<Self, GeomError> {
        let x = cosine_grid();
        let samples = t.into_iter().zip(c).map(|(t, c)| ThicknessCamber::new(x.clone(), t, c)).collect();
        let features = f
            .into_iter()
            .map(|v| h.normalizer.annotate(&GeometricFeatures::from_array(v)))
            .collect();
        Ok(Self {
            names: h.names,
            samples,
            features,
            normalizer: h.normalizer,
            train: h.train,
            validation: h.validation,
            seed: h.seed,
            svd: h.svd,
        })
    }
}

fn check_header(h: &DatasetHeader) -> Result<(), GeomError> {
    if h.magic != "AGDS" {
        return Err(GeomError::Format(format!("bad magic {:?}", h.magic)));
    }
    if h.version != DATASET_VERSION {
        return Err(GeomError::Format(format!(
            "dataset version {}, this build reads version {}",
            h.version, DATASET_VERSION
        )));
    }
    if h.grid.kind != "cosine" || h.grid.points != GRID_LEN {
        return Err(GeomError::Format("unsupported grid definition".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridSpec {
    kind: String,
    intervals: usize,
    points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetHeader {
    magic: String,
    version: u32,
    sample_count: usize,
    grid: GridSpec,
    names: Vec<String>,
    normalizer: FeatureNormalizer,
    train: Vec<usize>,
    validation: Vec<usize>,
    seed: u64,
    svd: Option<SvdModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonDataset {
    #[serde(flatten)]
    header: DatasetHeader,
    thickness: Vec<Vec<f64>>,
    camber: Vec<Vec<f64>>,
    features: Vec<[f64; 4]>,
}

/// Seeded shuffle; the last `round(n * 40/1539)` indices (at least one when
/// n >= 2) form the validation set. Both lists are returned sorted.
pub(crate) fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = if n >= 2 { ((n as f64 * VALIDATION_SHARE).round() as usize).max(1) } else { 0 };
    let mut val = idx.split_off(n - n_val);
    idx.sort_unstable();
    val.sort_unstable();
    (idx, val)
}

fn process_file(bytes: &[u8], filter: &FilterConfig) -> Result<(String, ThicknessCamber), String> {
    let raw = parse_coordinate_file(bytes).map_err(|e| e.to_string())?;
    if raw.points.len() < filter.min_points {
        return Err(format!("{} points, need at least {}", raw.points.len(), filter.min_points));
    }
    let (section, residual) = resample_with_residual(&raw).map_err(|e| e.to_string())?;
    if residual > filter.max_residual {
        return Err(format!("interpolation residual {residual:.2e} exceeds {:.1e}", filter.max_residual));
    }
    let tc = decompose(&section);
    let t_min = tc.min_thickness();
    if t_min < filter.min_thickness {
        return Err(format!("self-intersecting (min thickness {t_min:.2e})"));
    }
    let t_max = tc.t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_max < filter.t_max_range.0 || t_max > filter.t_max_range.1 {
        return Err(format!("max thickness {t_max:.4} outside {:?}", filter.t_max_range));
    }
    Ok((raw.name, tc))
}

/// Parse, resample, decompose and filter every regular file in `dir`
/// (sorted by file name), then fit the normalizer and draw the split.
pub fn build_dataset(
    dir: &Path,
    filter: &FilterConfig,
    seed: u64,
) -> Result<(AirfoilDataset, BuildReport), GeomError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();

    let mut report = BuildReport { files_seen: paths.len(), rejections: Vec::new() };
    let mut names = Vec::new();
    let mut samples = Vec::new();
    for path in &paths {
        let file = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let outcome = std::fs::read(path).map_err(|e| e.to_string()).and_then(|b| process_file(&b, filter));
        match outcome {
            Ok((name, tc)) => {
                names.push(if name.is_empty() { file } else { name });
                samples.push(tc);
            }
            Err(reason) => {
                log::warn!("rejected {file}: {reason}");
                report.rejections.push(Rejection { file, reason });
            }
        }
    }
    if samples.is_empty() {
        return Err(GeomError::EmptyDataset);
    }
    Ok((AirfoilDataset::from_samples(names, samples, seed)?, report))
}

#[cfg(test)]
mod tests {
    use super::super::{naca, write_selig};
    use super::*;

    fn write_naca(dir: &Path, file: &str, m: f64, p: f64, t: f64) {
        let raw = naca::naca4_raw(m, p, t, 61);
        std::fs::write(dir.join(file), write_selig(&raw.name, &raw.points)).unwrap();
    }

    #[test]
    fn malformed_file_is_counted_as_rejection() {
        let dir = tempfile::tempdir().unwrap();
        write_naca(dir.path(), "a.dat", 0.0, 0.4, 0.12);
        write_naca(dir.path(), "b.dat", 0.02, 0.4, 0.15);
        write_naca(dir.path(), "c.dat", 0.04, 0.3, 0.09);
        std::fs::write(dir.path().join("d.dat"), "junk\n1 0\nnot numbers\n").unwrap();
        let (ds, report) = build_dataset(dir.path(), &FilterConfig::default(), 1).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(report.rejections.len(), 1);
        assert_eq!(report.rejections[0].file, "d.dat");
        assert!(!report.rejections[0].reason.is_empty());
    }

    #[test]
    fn self_intersecting_section_is_filtered() {
        let x = cosine_grid();
        let yu: Vec<f64> = x.iter().map(|&x| 0.05 * (std::f64::consts::PI * x).sin()).collect();
        // lower surface crosses the upper one aft of mid-chord
        let yl: Vec<f64> = x
            .iter()
            .map(|&x| -0.05 * (std::f64::consts::PI * x).sin() + (std::f64::consts::PI * x).sin() * (x - 0.6).max(0.0))
            .collect();
        let s = super::super::AirfoilSection::new(x, yu, yl);
        let text = write_selig("cross", &s.selig_points());
        let err = process_file(text.as_bytes(), &FilterConfig::default()).unwrap_err();
        assert!(err.contains("self-intersecting"), "{err}");
    }

    #[test]
    fn split_is_disjoint_exhaustive_and_seeded() {
        let (tr, va) = split_indices(1539, 3);
        assert_eq!(va.len(), 40);
        assert_eq!(tr.len(), 1499);
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1539).collect::<Vec<_>>());
        assert_eq!(split_indices(1539, 3), (tr, va));
        assert_ne!(split_indices(1539, 4).1, split_indices(1539, 3).1);
    }

    #[test]
    fn both_file_flavors_round_trip() {
        let x = cosine_grid();
        let samples: Vec<ThicknessCamber> = [0.08, 0.12, 0.16, 0.2]
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let s = naca::naca4_section(0.01 * i as f64, 0.4, t, &x);
                decompose(&s)
            })
            .collect();
        let names = (0..4).map(|i| format!("n{i}")).collect();
        let ds = AirfoilDataset::from_samples(names, samples, 11).unwrap();
        let bin = ds.to_binary();
        assert_eq!(&bin[..4], b"AGDS");
        let back = AirfoilDataset::from_bytes(&bin).unwrap();
        assert_eq!(back.samples, ds.samples);
        assert_eq!(back.features, ds.features);
        assert_eq!(back.normalizer, ds.normalizer);
        assert_eq!(back.train, ds.train);
        assert_eq!(back, ds);
        assert_eq!(AirfoilDataset::from_bytes(ds.to_json().as_bytes()).unwrap(), ds);

        let mut corrupt = bin.clone();
        corrupt[40] ^= 1;
        assert!(AirfoilDataset::from_bytes(&corrupt).is_err());
    }
}
