//! File formats: `.npy` frames (lossless `f64`), 8/16-bit PGM/PPM/PNG images,
//! shift manifests and `key=value` metadata.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use npyz::WriterBuilder;

use crate::error::{Error, Result};
use crate::estimators::ShiftSet;
use crate::spectral::{PixelGrid, Shift2D};

/// Extensions recognized as frames, in lowercase.
pub const FRAME_EXTENSIONS: [&str; 5] = ["npy", "pgm", "ppm", "pnm", "png"];

/// Decoded image: one grid per color channel (alpha dropped) and the
/// nominal full-scale value of the source encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageData {
    pub channels: Vec<PixelGrid>,
    pub max_value: f64,
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

pub fn write_npy(path: &Path, grid: &PixelGrid) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = npyz::WriteOptions::new()
        .default_dtype()
        .shape(&[grid.height() as u64, grid.width() as u64])
        .writer(BufWriter::new(file))
        .begin_nd()
        .map_err(|e| Error::io(path, e))?;
    writer.extend(grid.samples().iter().copied()).map_err(|e| Error::io(path, e))?;
    writer.finish().map_err(|e| Error::io(path, e))
}

/// Reads a 2D `f64` or `f32` array in C or Fortran order.
pub fn read_npy(path: &Path) -> Result<PixelGrid> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let npy = npyz::NpyFile::new(BufReader::new(file)).map_err(|e| Error::io(path, e))?;
    let shape = npy.shape().to_vec();
    let [h, w] = shape[..] else {
        return Err(Error::io(path, format!("expected a 2D array, found shape {shape:?}")));
    };
    let (h, w) = (h as usize, w as usize);
    let fortran = npy.order() == npyz::Order::Fortran;
    let values: Vec<f64> = match npy.dtype() {
        npyz::DType::Plain(t) if t.type_char() == npyz::TypeChar::Float && t.size_field() == 8 => {
            npy.into_vec::<f64>().map_err(|e| Error::io(path, e))?
        }
        npyz::DType::Plain(t) if t.type_char() == npyz::TypeChar::Float && t.size_field() == 4 => npy
            .into_vec::<f32>()
            .map_err(|e| Error::io(path, e))?
            .into_iter()
            .map(f64::from)
            .collect(),
        other => return Err(Error::io(path, format!("unsupported dtype {}", other.descr()))),
    };
    let values = if fortran {
        (0..h * w).map(|i| values[(i % w) * h + i / w]).collect()
    } else {
        values
    };
    PixelGrid::new(h, w, values).map_err(|e| Error::io(path, e))
}

fn to_grids<const C: usize>(width: u32, height: u32, raw: &[u16], keep: usize) -> Result<Vec<PixelGrid>> {
    let (h, w) = (height as usize, width as usize);
    (0..keep)
        .map(|ch| PixelGrid::new(h, w, raw.iter().skip(ch).step_by(C).map(|&v| f64::from(v)).collect()))
        .collect()
}

/// Reads any supported frame file. `.npy` frames come back as one channel
/// with `max_value` equal to their largest sample.
pub fn read_image(path: &Path) -> Result<ImageData> {
    if extension(path) == "npy" {
        let grid = read_npy(path)?;
        let max_value = grid.samples().iter().copied().fold(0.0, f64::max);
        return Ok(ImageData {
            channels: vec![grid],
            max_value,
        });
    }
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::io(path, e))?;
    let color = img.color();
    let sixteen = color.bytes_per_pixel() / color.channel_count() > 1;
    let max_value = if sixteen { 65535.0 } else { 255.0 };
    let (w, h) = (img.width(), img.height());
    let widen = |v: Vec<u8>| v.into_iter().map(u16::from).collect::<Vec<u16>>();
    let channels = match (color.channel_count(), sixteen) {
        (1 | 2, true) => to_grids::<1>(w, h, &img.to_luma16().into_raw(), 1),
        (1 | 2, false) => to_grids::<1>(w, h, &widen(img.to_luma8().into_raw()), 1),
        (_, true) => to_grids::<3>(w, h, &img.to_rgb16().into_raw(), 3),
        (_, false) => to_grids::<3>(w, h, &widen(img.to_rgb8().into_raw()), 3),
    }
    .map_err(|e| Error::io(path, e))?;
    Ok(ImageData { channels, max_value })
}

/// Writes channels as a 16-bit image (PNG, or PGM/PPM by extension). Each
/// sample is scaled by `65535 / input_max`, rounded and clamped.
pub fn write_image16(path: &Path, channels: &[PixelGrid], input_max: f64) -> Result<()> {
    let first = channels.first().ok_or_else(|| Error::invalid("no channels to write"))?;
    if let Some(bad) = channels.iter().find(|c| c.dims() != first.dims()) {
        return Err(Error::DimensionMismatch {
            expected: first.dims(),
            found: bad.dims(),
        });
    }
    if !(input_max > 0.0 && input_max.is_finite()) {
        return Err(Error::invalid(format!("full-scale value must be > 0, got {input_max}")));
    }
    let scale = 65535.0 / input_max;
    let quantize = |v: f64| (v * scale).round().clamp(0.0, 65535.0) as u16;
    let (h, w) = first.dims();
    let img = match channels.len() {
        1 => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w as u32, h as u32, first.samples().iter().map(|&v| quantize(v)).collect())
                .expect("buffer sized from grid"),
        ),
        3 => {
            let raw = (0..h * w)
                .flat_map(|i| channels.iter().map(move |c| quantize(c.samples()[i])))
                .collect();
            DynamicImage::ImageRgb16(ImageBuffer::<Rgb<u16>, _>::from_raw(w as u32, h as u32, raw).expect("buffer sized from grid"))
        }
        n => return Err(Error::invalid(format!("cannot encode {n} channels"))),
    };
    let format = match extension(path).as_str() {
        "png" => image::ImageFormat::Png,
        "pgm" | "ppm" | "pnm" => image::ImageFormat::Pnm,
        other => return Err(Error::invalid(format!("unsupported output extension '{other}'"))),
    };
    img.save_with_format(path, format).map_err(|e| Error::io(path, e))
}

/// Frame files in `dir`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && FRAME_EXTENSIONS.contains(&extension(p).as_str()))
        .collect();
    // a frame stored both losslessly and as a preview is read once, from .npy
    let stems: Vec<PathBuf> = out.iter().filter(|p| extension(p) == "npy").map(|p| p.with_extension("")).collect();
    out.retain(|p| extension(p) == "npy" || !stems.contains(&p.with_extension("")));
    out.sort();
    Ok(out)
}

/// `(value)` formatted with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Rounds to the precision the manifest stores.
pub fn quantize_shift(t: Shift2D) -> Shift2D {
    let q = |v: f64| format_sig9(v).parse::<f64>().expect("formatted float parses");
    Shift2D::new(q(t.tx), q(t.ty))
}

pub fn format_manifest(shifts: &ShiftSet) -> String {
    shifts
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{i} {} {}\n", format_sig9(t.tx), format_sig9(t.ty)))
        .collect()
}

pub fn write_manifest(path: &Path, shifts: &ShiftSet) -> Result<()> {
    fs::write(path, format_manifest(shifts)).map_err(|e| Error::io(path, e))
}

/// Parses `index tx ty` lines; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str) -> Result<ShiftSet> {
    let mut shifts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::invalid(format!("manifest line {}: expected 'index tx ty', got '{line}'", n + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [index, tx, ty] = fields[..] else {
            return Err(bad());
        };
        let index: usize = index.parse().map_err(|_| bad())?;
        if index != shifts.len() {
            return Err(Error::invalid(format!(
                "manifest line {}: index {index} out of sequence",
                n + 1
            )));
        }
        shifts.push(Shift2D::new(tx.parse().map_err(|_| bad())?, ty.parse().map_err(|_| bad())?));
    }
    ShiftSet::new(shifts)
}

pub fn read_manifest(path: &Path) -> Result<ShiftSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text).map_err(|e| Error::io(path, e))
}

pub fn write_metadata(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (k, v) in entries {
        writeln!(file, "{k}={v}").map_err(|e| Error::io(path, e))?;
    }
    file.flush().map_err(|e| Error::io(path, e))
}

/// Parses `key=value` lines, ignoring blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Spec(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        let k = k.trim();
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Spec(format!("line {}: duplicate key '{k}'", n + 1)));
        }
    }
    Ok(out)
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text)
}
