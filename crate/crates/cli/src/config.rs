//! Experiment configuration files: `key = value` lines grouped into
//! `[section]`s (a TOML subset). Unknown sections and keys are rejected.

use std::path::{Path, PathBuf};

use grasspc_core::experiments::{CodebookSpec, DirectionSpec, MagnitudeSpec, TraceModel};
use grasspc_core::mumimo::Scheme;
use grasspc_core::{InitMode, ShapeGainCodebook};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

pub const DEFAULT_CANDIDATES: usize = 10_000;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Raw config text with its SHA-256 and the directory relative paths resolve against.
pub struct Source {
    pub text: String,
    pub hash: String,
    pub dir: PathBuf,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Ok(Self::from_text(text, path.parent().unwrap_or(Path::new(".")).to_path_buf()))
    }

    pub fn from_text(text: String, dir: PathBuf) -> Self {
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Self { text, hash, dir }
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        toml::from_str(&self.text).map_err(|e| ConfigError(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ar1,
    Ar2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n: usize,
    pub beta: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub noise_std: Option<f64>,
}

impl ModelSection {
    pub fn model(&self) -> Result<TraceModel> {
        match self.kind {
            ModelKind::Ar1 => {
                if self.a1.is_some() || self.a2.is_some() || self.noise_std.is_some() {
                    return err("[model] kind = \"ar1\" takes only n and beta");
                }
                let beta = self.beta.ok_or_else(|| ConfigError("[model] kind = \"ar1\" needs beta".into()))?;
                Ok(TraceModel::Ar1 { n: self.n, beta })
            }
            ModelKind::Ar2 => {
                if self.beta.is_some() {
                    return err("[model] kind = \"ar2\" does not take beta");
                }
                match (self.a1, self.a2, self.noise_std) {
                    (Some(a1), Some(a2), Some(noise_std)) => Ok(TraceModel::Ar2 { n: self.n, a1, a2, noise_std }),
                    _ => err("[model] kind = \"ar2\" needs a1, a2 and noise_std"),
                }
            }
        }
    }
}

/// AR(1) traces swept over a β grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n: usize,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Exact,
    Memoryless,
}

impl From<InitKind> for InitMode {
    fn from(k: InitKind) -> Self {
        match k {
            InitKind::Exact => InitMode::Exact,
            InitKind::Memoryless => InitMode::Memoryless,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: usize,
    pub trials: usize,
    #[serde(default = "default_transient")]
    pub transient: usize,
    pub init: Option<InitKind>,
}

fn default_transient() -> usize {
    20
}

impl RunSection {
    pub fn init_or(&self, default: InitMode) -> InitMode {
        self.init.map_or(default, InitMode::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionKind {
    Packing,
    Lloyd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeKind {
    Uniform,
    Lloyd,
}

fn default_candidates() -> usize {
    DEFAULT_CANDIDATES
}

fn default_max_iters() -> usize {
    50
}

fn default_train_traces() -> usize {
    4
}

fn default_train_steps() -> usize {
    2_500
}

fn default_true() -> bool {
    true
}

/// One shape-gain codebook, either loaded from `file` or described by a
/// direction and a magnitude recipe.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSection {
    pub file: Option<PathBuf>,
    pub directions: Option<DirectionKind>,
    pub direction_bits: Option<u32>,
    pub magnitudes: Option<MagnitudeKind>,
    pub magnitude_bits: Option<u32>,
    pub magnitude_lo: Option<f64>,
    pub magnitude_hi: Option<f64>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_train_traces")]
    pub train_traces: usize,
    #[serde(default = "default_train_steps")]
    pub train_steps: usize,
}

impl CodebookSection {
    pub fn spec(&self, dir: &Path) -> Result<CodebookSpec> {
        if let Some(file) = &self.file {
            if self.directions.is_some() || self.direction_bits.is_some() || self.magnitudes.is_some() || self.magnitude_bits.is_some() {
                return err("[codebook] file cannot be combined with directions or magnitudes");
            }
            let path = dir.join(file);
            let cb = ShapeGainCodebook::load(&path).map_err(|e| ConfigError(format!("cannot load codebook {}: {e}", path.display())))?;
            return Ok(CodebookSpec::given(cb));
        }
        let bits = |v: Option<u32>, key: &str| v.ok_or_else(|| ConfigError(format!("[codebook] needs {key} (or file)")));
        let directions = direction_spec(self.directions, bits(self.direction_bits, "direction_bits")?, self.candidates)?;
        let magnitudes = magnitude_spec(self.magnitudes, bits(self.magnitude_bits, "magnitude_bits")?, self.magnitude_lo, self.magnitude_hi)?;
        Ok(CodebookSpec {
            directions,
            magnitudes,
            max_iters: self.max_iters,
            train_traces: self.train_traces,
            train_steps: self.train_steps,
            fallback_candidates: self.candidates,
        })
    }
}

fn direction_spec(kind: Option<DirectionKind>, bits: u32, candidates: usize) -> Result<DirectionSpec> {
    check_bits(bits, "direction_bits")?;
    match kind {
        Some(DirectionKind::Packing) => Ok(DirectionSpec::Packing { bits, candidates }),
        Some(DirectionKind::Lloyd) => Ok(DirectionSpec::Lloyd { bits }),
        None => err("[codebook] needs directions = \"packing\" or \"lloyd\""),
    }
}

fn magnitude_spec(kind: Option<MagnitudeKind>, bits: u32, lo: Option<f64>, hi: Option<f64>) -> Result<MagnitudeSpec> {
    check_bits(bits, "magnitude_bits")?;
    match kind {
        Some(MagnitudeKind::Uniform) => {
            let (lo, hi) = uniform_range(lo, hi)?;
            Ok(MagnitudeSpec::Uniform { bits, lo, hi })
        }
        Some(MagnitudeKind::Lloyd) if lo.is_some() || hi.is_some() => err("[codebook] magnitude_lo/magnitude_hi only apply to uniform magnitudes"),
        Some(MagnitudeKind::Lloyd) => Ok(MagnitudeSpec::Lloyd { bits }),
        None => err("[codebook] needs magnitudes = \"uniform\" or \"lloyd\""),
    }
}

fn uniform_range(lo: Option<f64>, hi: Option<f64>) -> Result<(f64, f64)> {
    let lo = lo.unwrap_or(0.0);
    let hi = hi.ok_or_else(|| ConfigError("[codebook] uniform magnitudes need magnitude_hi".into()))?;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return err(format!("[codebook] magnitude range [{lo}, {hi}] must satisfy 0 <= lo < hi"));
    }
    Ok((lo, hi))
}

fn check_bits(bits: u32, key: &str) -> Result<()> {
    if bits > 16 {
        return err(format!("{key} = {bits} is larger than 16"));
    }
    Ok(())
}

/// A direction recipe with a grid of magnitude codebook sizes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCodebookSection {
    pub directions: DirectionKind,
    pub direction_bits: u32,
    pub magnitudes: MagnitudeKind,
    pub magnitude_bits: Vec<u32>,
    pub magnitude_lo: Option<f64>,
    pub magnitude_hi: Option<f64>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_train_traces")]
    pub train_traces: usize,
    #[serde(default = "default_train_steps")]
    pub train_steps: usize,
}

impl GridCodebookSection {
    pub fn directions(&self) -> Result<DirectionSpec> {
        direction_spec(Some(self.directions), self.direction_bits, self.candidates)
    }

    pub fn magnitude_bits(&self) -> Result<Vec<u32>> {
        if self.magnitude_bits.is_empty() {
            return err("[codebook] magnitude_bits is empty");
        }
        for &b in &self.magnitude_bits {
            check_bits(b, "magnitude_bits")?;
        }
        Ok(self.magnitude_bits.clone())
    }

    /// `Some((lo, hi))` for uniform magnitudes, `None` for Lloyd.
    pub fn magnitude_range(&self) -> Result<Option<(f64, f64)>> {
        match self.magnitudes {
            MagnitudeKind::Uniform => uniform_range(self.magnitude_lo, self.magnitude_hi).map(Some),
            MagnitudeKind::Lloyd if self.magnitude_lo.is_some() || self.magnitude_hi.is_some() => {
                err("[codebook] magnitude_lo/magnitude_hi only apply to uniform magnitudes")
            }
            MagnitudeKind::Lloyd => Ok(None),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelSection,
    pub codebook: CodebookSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionFile {
    pub model: ModelSection,
    pub run: RunSection,
    pub codebook: GridCodebookSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(default = "default_true")]
    pub unquantized: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub sweep: SweepSection,
    pub run: RunSection,
    pub codebook: GridCodebookSection,
    pub gains: Option<GainsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorylessSection {
    pub bits: Vec<u32>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MseFile {
    pub sweep: SweepSection,
    pub run: RunSection,
    pub codebook: CodebookSection,
    pub memoryless: MemorylessSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub nt: usize,
    pub users: usize,
    pub snr_db: Vec<f64>,
    pub fdts: Vec<f64>,
    pub bits: u32,
    pub schemes: Option<Vec<String>>,
}

impl SystemSection {
    pub fn schemes(&self) -> Result<Vec<Scheme>> {
        match &self.schemes {
            None => Ok(vec![Scheme::PerfectCsi, Scheme::MemorylessRandom, Scheme::Gpc]),
            Some(names) if names.is_empty() => err("[system] schemes is empty"),
            Some(names) => names
                .iter()
                .map(|s| Scheme::parse(s).ok_or_else(|| ConfigError(format!("[system] unknown scheme {s:?}; expected perfect_csi, memoryless_random or gpc"))))
                .collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumRateFile {
    pub system: SystemSection,
    pub run: RunSection,
    pub codebook: Option<CodebookSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub steps: usize,
    #[serde(default = "default_one")]
    pub count: usize,
    #[serde(default)]
    pub normalized: bool,
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenTraceFile {
    pub model: ModelSection,
    pub trace: TraceSection,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
        Source::from_text(text.into(), PathBuf::from(".")).parse()
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let ok = "[model]\nkind = \"ar1\"\nn = 4\nbeta = 0.01\n[trace]\nsteps = 10\n";
        assert!(parse::<GenTraceFile>(ok).is_ok());
        let e = parse::<GenTraceFile>(&format!("{ok}colour = 3\n")).unwrap_err();
        assert!(e.0.contains("colour"), "{e}");
        let e = parse::<GenTraceFile>(&format!("{ok}[extra]\nx = 1\n")).unwrap_err();
        assert!(e.0.contains("extra"), "{e}");
    }

    #[test]
    fn model_kind_fields_are_checked() {
        let m: GenTraceFile = parse("[model]\nkind = \"ar2\"\nn = 3\na1 = 0.9\na2 = 0.75\nnoise_std = 0.01\n[trace]\nsteps = 5\n").unwrap();
        assert_eq!(m.model.model().unwrap(), TraceModel::Ar2 { n: 3, a1: 0.9, a2: 0.75, noise_std: 0.01 });
        let m: GenTraceFile = parse("[model]\nkind = \"ar1\"\nn = 3\na1 = 0.9\n[trace]\nsteps = 5\n").unwrap();
        assert!(m.model.model().is_err());
        let m: GenTraceFile = parse("[model]\nkind = \"ar2\"\nn = 3\nbeta = 0.1\n[trace]\nsteps = 5\n").unwrap();
        assert!(m.model.model().is_err());
    }

    #[test]
    fn codebook_recipes() {
        let c: TrainConfig = parse(
            "[model]\nkind = \"ar1\"\nn = 4\nbeta = 0.01\n[codebook]\ndirections = \"lloyd\"\ndirection_bits = 6\nmagnitudes = \"uniform\"\nmagnitude_bits = 3\nmagnitude_hi = 0.2\n",
        )
        .unwrap();
        let spec = c.codebook.spec(Path::new(".")).unwrap();
        assert_eq!(spec.directions, DirectionSpec::Lloyd { bits: 6 });
        assert_eq!(spec.magnitudes, MagnitudeSpec::Uniform { bits: 3, lo: 0.0, hi: 0.2 });
        assert_eq!(spec.fallback_candidates, DEFAULT_CANDIDATES);

        let no_hi = CodebookSection { magnitude_hi: None, ..c.codebook.clone() };
        assert!(no_hi.spec(Path::new(".")).is_err());
        let lloyd_with_range = CodebookSection { magnitudes: Some(MagnitudeKind::Lloyd), ..c.codebook.clone() };
        assert!(lloyd_with_range.spec(Path::new(".")).is_err());
        let both = CodebookSection { file: Some("cb.txt".into()), ..c.codebook.clone() };
        assert!(both.spec(Path::new(".")).unwrap_err().0.contains("file"));
        let huge = CodebookSection { direction_bits: Some(40), ..c.codebook };
        assert!(huge.spec(Path::new(".")).is_err());
    }

    #[test]
    fn schemes_parse_by_name() {
        let s: SumRateFile = parse(
            "[system]\nnt = 4\nusers = 4\nsnr_db = [0.0]\nfdts = [0.01]\nbits = 4\nschemes = [\"gpc\", \"perfect_csi\"]\n[run]\nsteps = 30\ntrials = 2\n",
        )
        .unwrap();
        assert_eq!(s.system.schemes().unwrap(), vec![Scheme::Gpc, Scheme::PerfectCsi]);
        assert!(s.codebook.is_none());
        let bad = SystemSection { schemes: Some(vec!["zf".into()]), ..s.system };
        assert!(bad.schemes().is_err());
    }

    #[test]
    fn hash_depends_on_text_only() {
        let a = Source::from_text("x = 1\n".into(), PathBuf::from("a"));
        let b = Source::from_text("x = 1\n".into(), PathBuf::from("b"));
        let c = Source::from_text("x = 2\n".into(), PathBuf::from("a"));
        assert_eq!(a.hash, b.hash);
        assert_ne!(a.hash, c.hash);
        assert_eq!(a.hash.len(), 64);
    }
}
