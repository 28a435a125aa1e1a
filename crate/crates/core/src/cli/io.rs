//! File access for the command line: images, frame lists, hashes and the
//! run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};
use crate::segment::RgbImage;

const IMAGE_EXTENSIONS: [&str; 8] = ["png", "ppm", "pgm", "pnm", "bmp", "gif", "tif", "tiff"];

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn decode_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(source) => io_err(path, source),
        other => Error::Decode { path: path.to_path_buf(), message: other.to_string() },
    }
}

fn open(path: &Path) -> Result<image::DynamicImage> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    image::ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| io_err(path, e))?
        .decode()
        .map_err(|e| decode_err(path, e))
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbImage::from_interleaved(w, h, img.as_raw())
}

/// Reads a mask image; any pixel brighter than mid-gray is set.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    BinaryMask::from_vec(w, h, img.as_raw().iter().map(|&v| v > 127).collect())
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn encode_png(width: usize, height: usize, data: &[u8], color: image::ExtendedColorType) -> Result<Vec<u8>> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(data, width as u32, height as u32, color)
        .map_err(|e| Error::Decode { path: PathBuf::from("<png encoder>"), message: e.to_string() })?;
    Ok(out)
}

pub fn write_gray_png(path: &Path, img: &GrayImage) -> Result<()> {
    write_file(path, &encode_png(img.width(), img.height(), img.as_slice(), image::ExtendedColorType::L8)?)
}

pub fn write_rgb_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    write_file(path, &encode_png(width, height, rgb, image::ExtendedColorType::Rgb8)?)
}

pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_gray_png(path, &mask.to_gray())
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Frames from a directory (every image file) or a glob pattern, in
/// lexicographic path order.
pub fn list_frames(source: &str) -> Result<Vec<PathBuf>> {
    let p = Path::new(source);
    let mut files: Vec<PathBuf> = if p.is_dir() {
        std::fs::read_dir(p)
            .map_err(|e| io_err(p, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|f| f.is_file() && is_image(f))
            .collect()
    } else {
        glob::glob(source)
            .map_err(|e| Error::validation("frames", e.to_string()))?
            .filter_map(|e| e.ok())
            .filter(|f| f.is_file())
            .collect()
    };
    files.sort();
    Ok(files)
}

/// Image files directly inside `dir`, sorted.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|f| f.is_file() && is_image(f))
        .collect();
    files.sort();
    Ok(files)
}

/// First file in `dir` whose stem equals `stem`, with any image extension.
pub fn find_image(dir: &Path, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS.iter().map(|e| dir.join(format!("{stem}.{e}"))).find(|p| p.is_file())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Everything that determines a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, O: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub options: O,
    pub config: &'a crate::config::RunConfig,
    pub inputs: Vec<InputHash>,
}

impl<'a, O: Serialize> RunManifest<'a, O> {
    pub fn new(command: &'static str, options: O, config: &'a crate::config::RunConfig, inputs: &[PathBuf]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| Ok(InputHash { path: p.display().to_string(), sha256: sha256_file(p)? }))
            .collect::<Result<_>>()?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            options,
            config,
            inputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("run_manifest.json"), self)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::validation(path.display().to_string(), e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Serializes rows with a header into CSV bytes.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::validation("csv", e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::validation("csv", e.to_string()))
}
