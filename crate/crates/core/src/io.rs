//! Raster I/O for PGM (P2/P5) and grayscale PNG (8/16-bit).
//!
//! Intensities are read onto the 0..=255 real scale; 16-bit sources are
//! scaled by 255/65535. Writes are always 8-bit and atomic (temp file in
//! the destination directory, then rename).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use thiserror::Error;

use crate::image::{BinaryMask, GrayImage, ImageError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("image {path} has zero width or height")]
    ZeroSized { path: PathBuf },
    #[error("cannot decode {path}: {detail}")]
    Decode { path: PathBuf, detail: String },
    #[error("image {path} is not usable: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ImageError,
    },
    #[error("cannot write {path}: {detail}")]
    Unwritable { path: PathBuf, detail: String },
}

/// Output encodings, chosen from the file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Png,
    Pgm,
}

impl OutputFormat {
    fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Self::Png),
            "pgm" | "pnm" => Some(Self::Pgm),
            _ => None,
        }
    }
}

/// Decode a grayscale raster into `(width, height, values on the 0..=255 scale)`.
fn read_raw(path: &Path) -> Result<(usize, usize, Vec<f64>), IoError> {
    let file = File::open(path).map_err(|source| IoError::Unreadable { path: path.to_owned(), source })?;
    let reader = ImageReader::new(BufReader::new(file))
        .with_guessed_format()
        .map_err(|source| IoError::Unreadable { path: path.to_owned(), source })?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        other => {
            return Err(IoError::UnsupportedFormat {
                path: path.to_owned(),
                detail: match other {
                    Some(f) => format!("{f:?} is not PGM or PNG"),
                    None => "unrecognized file signature".to_owned(),
                },
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::Unsupported(u) => {
            IoError::UnsupportedFormat { path: path.to_owned(), detail: u.to_string() }
        }
        other => IoError::Decode { path: path.to_owned(), detail: other.to_string() },
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if w == 0 || h == 0 {
        return Err(IoError::ZeroSized { path: path.to_owned() });
    }
    let values = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| f64::from(v) * 255.0 / 65535.0).collect(),
        other => {
            return Err(IoError::UnsupportedFormat {
                path: path.to_owned(),
                detail: format!("color type {:?} is not single-channel grayscale", other.color()),
            })
        }
    };
    Ok((w, h, values))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, IoError> {
    let path = path.as_ref();
    let (w, h, values) = read_raw(path)?;
    GrayImage::new(w, h, values).map_err(|source| IoError::Invalid { path: path.to_owned(), source })
}

/// Load a mask; pixels at or above half the maximum value are set. An
/// all-zero file yields an empty mask.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask, IoError> {
    let path = path.as_ref();
    let (w, h, values) = read_raw(path)?;
    let max = values.iter().copied().fold(0.0, f64::max);
    let data = values.iter().map(|&v| max > 0.0 && v >= 0.5 * max).collect();
    BinaryMask::new(w, h, data).map_err(|source| IoError::Invalid { path: path.to_owned(), source })
}

/// Save as 8-bit PNG or binary PGM depending on the extension. Values are
/// clamped to `[0, 255]` and rounded.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), IoError> {
    let bytes: Vec<u8> = img.data().iter().map(|v| v.clamp(0.0, 255.0).round() as u8).collect();
    write_gray8(path.as_ref(), img.width(), img.height(), &bytes)
}

/// Save a mask as `{0, 255}` grayscale.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<(), IoError> {
    let bytes: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_gray8(path.as_ref(), mask.width(), mask.height(), &bytes)
}

fn write_gray8(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<(), IoError> {
    let format = OutputFormat::from_path(path).ok_or_else(|| IoError::UnsupportedFormat {
        path: path.to_owned(),
        detail: "output extension must be .png or .pgm".to_owned(),
    })?;
    let (w, h) = (width as u32, height as u32);
    write_atomic(path, |out| {
        let res = match format {
            OutputFormat::Png => PngEncoder::new(out).write_image(bytes, w, h, ExtendedColorType::L8),
            OutputFormat::Pgm => PnmEncoder::new(out)
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .write_image(bytes, w, h, ExtendedColorType::L8),
        };
        res.map_err(|e| e.to_string())
    })
}

/// Write a UTF-8 text file atomically.
pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<(), IoError> {
    write_atomic(path.as_ref(), |out| out.write_all(contents.as_bytes()).map_err(|e| e.to_string()))
}

pub(crate) fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<&mut File>) -> Result<(), String>,
) -> Result<(), IoError> {
    let unwritable = |detail: String| IoError::Unwritable { path: path.to_owned(), detail };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| unwritable(e.to_string()))?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        fill(&mut out).map_err(&unwritable)?;
        out.flush().map_err(|e| unwritable(e.to_string()))?;
    }
    tmp.persist(path).map_err(|e| unwritable(e.error.to_string()))?;
    Ok(())
}
