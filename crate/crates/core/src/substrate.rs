//! Cross-domain feature vectors used to bias position sampling.
//!
//! Game records and grayscale images are both reduced to an
//! [`AttributeVector`]. Pairs of vectors are blended with random convex
//! weights plus bounded noise, and the composer turns the blend into square
//! weights for piece placement.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::board::{parse_san, Color, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    Chess,
    Image,
    Blended,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeVector {
    /// White minus Black in standard piece values.
    pub material_diff: f64,
    pub piece_count: f64,
    /// Pieces per square of their bounding box.
    pub density: f64,
    pub centroid_file: f64,
    pub centroid_rank: f64,
    /// Chebyshev distance between the kings.
    pub king_separation: f64,
    /// Share of the board White attacks.
    pub attacker_mobility: f64,
    pub source_tag: SourceTag,
}

/// Numeric fields in a fixed order with their valid ranges.
pub const FIELDS: [(&str, f64, f64); 7] = [
    ("material_diff", -40.0, 40.0),
    ("piece_count", 2.0, 32.0),
    ("density", 0.0, 1.0),
    ("centroid_file", 0.0, 7.0),
    ("centroid_rank", 0.0, 7.0),
    ("king_separation", 2.0, 7.0),
    ("attacker_mobility", 0.0, 1.0),
];

impl AttributeVector {
    pub fn values(&self) -> [f64; 7] {
        [
            self.material_diff,
            self.piece_count,
            self.density,
            self.centroid_file,
            self.centroid_rank,
            self.king_separation,
            self.attacker_mobility,
        ]
    }

    pub fn from_values(v: [f64; 7], source_tag: SourceTag) -> AttributeVector {
        AttributeVector {
            material_diff: v[0],
            piece_count: v[1],
            density: v[2],
            centroid_file: v[3],
            centroid_rank: v[4],
            king_separation: v[5],
            attacker_mobility: v[6],
            source_tag,
        }
    }

    /// Every field finite and inside its range.
    pub fn is_valid(&self) -> bool {
        self.values()
            .iter()
            .zip(FIELDS)
            .all(|(&v, (_, lo, hi))| v.is_finite() && (lo..=hi).contains(&v))
    }

    fn clamped(mut v: [f64; 7]) -> [f64; 7] {
        for (x, (_, lo, hi)) in v.iter_mut().zip(FIELDS) {
            *x = if x.is_nan() { lo } else { x.max(lo).min(hi) };
        }
        v
    }

    /// Features of a single position.
    pub fn from_position(p: &Position, source_tag: SourceTag) -> AttributeVector {
        let pieces: Vec<_> = p.pieces().map(|(sq, _)| sq).collect();
        let n = pieces.len() as f64;
        let (mut fmin, mut fmax, mut rmin, mut rmax) = (7u8, 0u8, 7u8, 0u8);
        let (mut fsum, mut rsum) = (0.0, 0.0);
        for sq in &pieces {
            fmin = fmin.min(sq.file());
            fmax = fmax.max(sq.file());
            rmin = rmin.min(sq.rank());
            rmax = rmax.max(sq.rank());
            fsum += sq.file() as f64;
            rsum += sq.rank() as f64;
        }
        let area = ((fmax - fmin + 1) as f64) * ((rmax - rmin + 1) as f64);
        let values = [
            (p.material(Color::White) - p.material(Color::Black)) as f64,
            n,
            n / area,
            fsum / n,
            rsum / n,
            p.king_square(Color::White).chebyshev(p.king_square(Color::Black)) as f64,
            p.attack_map(Color::White).count_ones() as f64 / 64.0,
        ];
        AttributeVector::from_values(AttributeVector::clamped(values), source_tag)
    }
}

// --- games ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Zero-based index of the record in the input.
    pub record: usize,
    /// One-based ply of the first bad move.
    pub ply: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {}: ply {}: {}", self.record, self.ply, self.message)
    }
}

fn is_result(token: &str) -> bool {
    matches!(token, "1-0" | "0-1" | "1/2-1/2" | "*")
}

/// SAN tokens of a movetext with move numbers and results removed.
fn san_tokens(movetext: &str) -> impl Iterator<Item = &str> {
    movetext.split_whitespace().filter_map(|tok| {
        if is_result(tok) {
            return None;
        }
        // "12." and "12..." are move numbers, possibly glued to the move
        let digits = tok.trim_start_matches(|c: char| c.is_ascii_digit());
        let body = match digits.strip_prefix('.') {
            Some(rest) if digits.len() < tok.len() => rest.trim_start_matches('.'),
            _ => tok,
        };
        (!body.is_empty()).then_some(body)
    })
}

/// One vector per game, from the position after its last move. Records
/// with an unplayable move are skipped and reported.
pub fn extract_from_games<'a, I>(records: I) -> (Vec<AttributeVector>, Vec<Diagnostic>)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = Vec::new();
    let mut diagnostics = Vec::new();
    'records: for (record, text) in records.into_iter().enumerate() {
        let mut pos = Position::initial();
        for (i, san) in san_tokens(text).enumerate() {
            match parse_san(&pos, san) {
                Ok(m) => pos = pos.play(m),
                Err(e) => {
                    diagnostics.push(Diagnostic {
                        record,
                        ply: i + 1,
                        message: e.to_string(),
                    });
                    continue 'records;
                }
            }
        }
        out.push(AttributeVector::from_position(&pos, SourceTag::Chess));
    }
    (out, diagnostics)
}

// --- images --------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("cannot read image: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a portable graymap (expected P2 or P5)")]
    Magic,
    #[error("malformed graymap header")]
    Header,
    #[error("graymap maxval {0} is not an 8-bit depth")]
    Depth(u32),
    #[error("graymap pixel data is truncated or invalid")]
    Data,
    #[error("image is {0}x{1}; both sides must be at least 2")]
    TooSmall(usize, usize),
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<GrayImage, ImageError> {
        if width < 2 || height < 2 {
            return Err(ImageError::TooSmall(width, height));
        }
        if pixels.len() != width * height {
            return Err(ImageError::Data);
        }
        Ok(GrayImage { width, height, pixels })
    }

    /// Decode textual (P2) or binary (P5) PGM with maxval ≤ 255. Pixel
    /// values are rescaled to 0..=255.
    pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, ImageError> {
        let mut pos = 0;
        let mut header = Vec::new();
        while header.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            if start == pos {
                return Err(ImageError::Header);
            }
            header.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| ImageError::Header)?);
        }
        let binary = match header[0] {
            "P5" => true,
            "P2" => false,
            _ => return Err(ImageError::Magic),
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| ImageError::Header);
        let (width, height, maxval) = (num(header[1])?, num(header[2])?, num(header[3])?);
        if maxval == 0 || maxval > 255 {
            return Err(ImageError::Depth(maxval as u32));
        }
        let count = width.checked_mul(height).ok_or(ImageError::Header)?;
        let raw: Vec<usize> = if binary {
            // exactly one whitespace byte separates the header from the data
            let data = bytes.get(pos + 1..pos + 1 + count).ok_or(ImageError::Data)?;
            data.iter().map(|&b| b as usize).collect()
        } else {
            let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| ImageError::Data)?;
            let vals: Result<Vec<usize>, _> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
                .map(str::parse)
                .collect();
            vals.map_err(|_| ImageError::Data)?
        };
        if raw.len() < count || raw.iter().any(|&v| v > maxval) {
            return Err(ImageError::Data);
        }
        let pixels = raw[..count]
            .iter()
            .map(|&v| ((v * 255 + maxval / 2) / maxval) as u8)
            .collect();
        GrayImage::new(width, height, pixels)
    }

    pub fn load(path: &Path) -> Result<GrayImage, ImageError> {
        GrayImage::parse_pgm(&std::fs::read(path)?)
    }

    /// Binary PGM encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatures {
    pub brightness: f64,
    pub contrast: f64,
    pub edge_density: f64,
}

impl ImageFeatures {
    /// `edge_threshold`: adjacent pixels count as an edge when they differ
    /// by strictly more than this.
    pub fn measure(img: &GrayImage, edge_threshold: u8) -> ImageFeatures {
        let n = img.pixels.len() as f64;
        let mean = img.pixels.iter().map(|&p| p as f64).sum::<f64>() / n;
        let var = img.pixels.iter().map(|&p| (p as f64 - mean).powi(2)).sum::<f64>() / n;
        let (w, h) = (img.width, img.height);
        let at = |x: usize, y: usize| img.pixels[y * w + x];
        let mut pairs = 0usize;
        let mut edges = 0usize;
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    pairs += 1;
                    edges += (at(x, y).abs_diff(at(x + 1, y)) > edge_threshold) as usize;
                }
                if y + 1 < h {
                    pairs += 1;
                    edges += (at(x, y).abs_diff(at(x, y + 1)) > edge_threshold) as usize;
                }
            }
        }
        ImageFeatures {
            brightness: mean / 255.0,
            contrast: (var.sqrt() / 127.5).min(1.0),
            edge_density: edges as f64 / pairs as f64,
        }
    }

    fn get(&self, f: ImageFeature) -> f64 {
        match f {
            ImageFeature::Brightness => self.brightness,
            ImageFeature::Contrast => self.contrast,
            ImageFeature::EdgeDensity => self.edge_density,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFeature {
    Brightness,
    Contrast,
    EdgeDensity,
}

impl ImageFeature {
    fn parse(s: &str) -> Option<ImageFeature> {
        match s {
            "brightness" => Some(ImageFeature::Brightness),
            "contrast" => Some(ImageFeature::Contrast),
            "edge_density" => Some(ImageFeature::EdgeDensity),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ImageFeature::Brightness => "brightness",
            ImageFeature::Contrast => "contrast",
            ImageFeature::EdgeDensity => "edge_density",
        }
    }
}

/// How one attribute field is derived from an image: the field's range is
/// interpolated at `scale * feature + offset` (clamped to [0, 1]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMapping {
    pub source: ImageFeature,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstrateConfig {
    /// One entry per entry of [`FIELDS`].
    pub mapping: [FieldMapping; 7],
    /// Noise half-width as a fraction of each field's range.
    pub noise: f64,
    pub edge_threshold: u8,
}

impl Default for SubstrateConfig {
    fn default() -> SubstrateConfig {
        use ImageFeature::*;
        let m = |source, scale, offset| FieldMapping { source, scale, offset };
        SubstrateConfig {
            mapping: [
                m(Brightness, 1.0, 0.0),
                m(Contrast, 1.0, 0.0),
                m(EdgeDensity, 1.0, 0.0),
                m(Brightness, 1.0, 0.0),
                m(Contrast, 1.0, 0.0),
                m(EdgeDensity, -1.0, 1.0),
                m(Brightness, 0.5, 0.25),
            ],
            noise: 0.05,
            edge_threshold: 32,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read substrate config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for {key:?}")]
    BadValue { line: usize, key: String },
}

impl SubstrateConfig {
    /// Keys: `noise`, `edge_threshold` and `<field>.source|scale|offset`.
    /// Unlisted keys keep their defaults.
    pub fn parse(text: &str) -> Result<SubstrateConfig, ConfigError> {
        let mut cfg = SubstrateConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax(line))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_owned(),
            };
            let real = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
            match key {
                "noise" => cfg.noise = real().and_then(|v| if v >= 0.0 { Ok(v) } else { Err(bad()) })?,
                "edge_threshold" => cfg.edge_threshold = value.parse().map_err(|_| bad())?,
                _ => {
                    let unknown = || ConfigError::UnknownKey {
                        line,
                        key: key.to_owned(),
                    };
                    let (field, attr) = key.split_once('.').ok_or_else(unknown)?;
                    let idx = FIELDS.iter().position(|(n, _, _)| *n == field).ok_or_else(unknown)?;
                    let slot = &mut cfg.mapping[idx];
                    match attr {
                        "source" => slot.source = ImageFeature::parse(value).ok_or_else(bad)?,
                        "scale" => slot.scale = real()?,
                        "offset" => slot.offset = real()?,
                        _ => return Err(unknown()),
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SubstrateConfig, ConfigError> {
        SubstrateConfig::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for SubstrateConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "noise = {}", self.noise)?;
        writeln!(f, "edge_threshold = {}", self.edge_threshold)?;
        for ((name, _, _), m) in FIELDS.iter().zip(&self.mapping) {
            writeln!(f, "{name}.source = {}", m.source.name())?;
            writeln!(f, "{name}.scale = {}", m.scale)?;
            writeln!(f, "{name}.offset = {}", m.offset)?;
        }
        Ok(())
    }
}

pub fn map_image_features(features: &ImageFeatures, cfg: &SubstrateConfig) -> AttributeVector {
    let mut v = [0.0; 7];
    for ((x, (_, lo, hi)), m) in v.iter_mut().zip(FIELDS).zip(&cfg.mapping) {
        let t = (m.scale * features.get(m.source) + m.offset).clamp(0.0, 1.0);
        *x = lo + t * (hi - lo);
    }
    AttributeVector::from_values(AttributeVector::clamped(v), SourceTag::Image)
}

pub fn extract_from_image(img: &GrayImage, cfg: &SubstrateConfig) -> AttributeVector {
    map_image_features(&ImageFeatures::measure(img, cfg.edge_threshold), cfg)
}

// --- blending ------------------------------------------------------------

/// Per field, `w·a + (1−w)·b + ε` with `w ~ U[0,1]` and `ε` uniform in
/// `±noise·range`, clamped to the field's range. The stream consumption is
/// fixed (two draws per field) whatever the noise level.
pub fn combine<R: Rng + ?Sized>(a: &AttributeVector, b: &AttributeVector, noise: f64, rng: &mut R) -> AttributeVector {
    let (av, bv) = (a.values(), b.values());
    let mut out = [0.0; 7];
    for (i, (_, lo, hi)) in FIELDS.into_iter().enumerate() {
        let w: f64 = rng.gen();
        let e: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let spread = noise * (hi - lo);
        let v = bv[i] + w * (av[i] - bv[i]) + e * spread;
        // guard the convex hull against rounding
        out[i] = v.max(av[i].min(bv[i]) - spread).min(av[i].max(bv[i]) + spread);
    }
    AttributeVector::from_values(AttributeVector::clamped(out), SourceTag::Blended)
}

/// Feature pools from the two source domains.
#[derive(Clone, Debug, Default)]
pub struct Substrate {
    pub games: Vec<AttributeVector>,
    pub images: Vec<AttributeVector>,
    pub config: SubstrateConfig,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, thiserror::Error)]
pub enum SubstrateError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Image { path: String, source: ImageError },
}

impl Substrate {
    pub fn new(games: Vec<AttributeVector>, images: Vec<AttributeVector>, config: SubstrateConfig) -> Substrate {
        Substrate {
            games,
            images,
            config,
            diagnostics: Vec::new(),
        }
    }

    /// Load a games file (one movetext per non-blank line) and/or a
    /// directory of `.pgm` files, read in file-name order.
    pub fn load(games: Option<&Path>, images: Option<&Path>, config: SubstrateConfig) -> Result<Substrate, SubstrateError> {
        fn io(p: &Path) -> impl FnOnce(std::io::Error) -> SubstrateError + '_ {
            move |source| SubstrateError::Io {
                path: p.display().to_string(),
                source,
            }
        }
        let mut s = Substrate::new(Vec::new(), Vec::new(), config);
        if let Some(path) = games {
            let text = std::fs::read_to_string(path).map_err(io(path))?;
            let (vectors, diagnostics) = extract_from_games(text.lines().filter(|l| !l.trim().is_empty()));
            s.games = vectors;
            s.diagnostics = diagnostics;
        }
        if let Some(dir) = images {
            let mut files: Vec<_> = std::fs::read_dir(dir)
                .map_err(io(dir))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
                .collect();
            files.sort();
            for f in files {
                let img = GrayImage::load(&f).map_err(|source| SubstrateError::Image {
                    path: f.display().to_string(),
                    source,
                })?;
                s.images.push(extract_from_image(&img, &s.config));
            }
        }
        Ok(s)
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty() && self.images.is_empty()
    }

    /// Blend one vector from each pool (or two from the only non-empty pool).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<AttributeVector> {
        let (first, second) = match (self.games.is_empty(), self.images.is_empty()) {
            (true, true) => return None,
            (false, false) => (&self.games, &self.images),
            (false, true) => (&self.games, &self.games),
            (true, false) => (&self.images, &self.images),
        };
        let a = first[rng.gen_range(0..first.len())];
        let b = second[rng.gen_range(0..second.len())];
        Some(combine(&a, &b, self.config.noise, rng))
    }
}

