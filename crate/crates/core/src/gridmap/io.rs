//! Map files: 8-bit PGM raster plus a map-server style YAML sidecar, and a
//! JSON dump of the three-class grid.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, ImageEncoder, ImageFormat};
use serde::{Deserialize, Deserializer, Serialize};

use super::{CellClass, OccupancyGrid, Origin};
use crate::error::{Error, Result};

pub const DEFAULT_OCCUPIED_THRESH: f64 = 0.65;
pub const DEFAULT_FREE_THRESH: f64 = 0.25;

const FREE_PIXEL: u8 = 255;
const OCCUPIED_PIXEL: u8 = 0;
const UNKNOWN_PIXEL: u8 = 128;

/// Sidecar metadata. Field names follow the map-server YAML keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub image: String,
    pub resolution: f64,
    #[serde(default = "default_origin")]
    pub origin: [f64; 3],
    #[serde(default, deserialize_with = "flag")]
    pub negate: bool,
    #[serde(default = "default_occupied")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free")]
    pub free_thresh: f64,
}

fn default_origin() -> [f64; 3] {
    [0.0, 0.0, 0.0]
}

fn default_occupied() -> f64 {
    DEFAULT_OCCUPIED_THRESH
}

fn default_free() -> f64 {
    DEFAULT_FREE_THRESH
}

/// `negate` shows up as 0/1 in most map files and as a bool in some.
fn flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(i64),
    }
    Ok(match Flag::deserialize(d)? {
        Flag::Bool(b) => b,
        Flag::Int(i) => i != 0,
    })
}

impl MapMetadata {
    pub fn new(image: impl Into<String>, resolution: f64) -> Self {
        Self {
            image: image.into(),
            resolution,
            origin: default_origin(),
            negate: false,
            occupied_thresh: DEFAULT_OCCUPIED_THRESH,
            free_thresh: DEFAULT_FREE_THRESH,
        }
    }

    pub fn from_yaml(text: &str) -> Result<Self> {
        serde_yaml::from_str(text).map_err(|e| Error::MalformedMetadata(e.to_string()))
    }

    pub fn to_yaml(&self) -> String {
        // Hand-written so key order and number formatting stay stable.
        format!(
            "image: {}\nresolution: {}\norigin: [{}, {}, {}]\nnegate: {}\noccupied_thresh: {}\nfree_thresh: {}\n",
            self.image,
            self.resolution,
            self.origin[0],
            self.origin[1],
            self.origin[2],
            u8::from(self.negate),
            self.occupied_thresh,
            self.free_thresh,
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(Error::NonPositiveResolution(self.resolution));
        }
        if self.free_thresh > self.occupied_thresh {
            return Err(Error::ThresholdOrder {
                free: self.free_thresh,
                occupied: self.occupied_thresh,
            });
        }
        Ok(())
    }

    fn classify(&self, pixel: u8) -> CellClass {
        let occupancy = if self.negate {
            pixel as f64 / 255.0
        } else {
            (255 - pixel) as f64 / 255.0
        };
        if occupancy >= self.occupied_thresh {
            CellClass::Occupied
        } else if occupancy <= self.free_thresh {
            CellClass::Free
        } else {
            CellClass::Unknown
        }
    }
}

/// Decode a grayscale PGM (P2 or P5) and classify each pixel.
pub fn load_map(image_bytes: &[u8], meta: &MapMetadata) -> Result<OccupancyGrid> {
    meta.validate()?;
    match image_bytes.get(..2) {
        Some(b"P2") | Some(b"P5") => {}
        _ => {
            return Err(Error::MalformedImage(
                "expected a P2 or P5 graymap".to_string(),
            ))
        }
    }
    let img = image::load_from_memory_with_format(image_bytes, ImageFormat::Pnm)
        .map_err(|e| Error::MalformedImage(e.to_string()))?;
    if img.color() != ColorType::L8 {
        return Err(Error::MalformedImage(format!(
            "expected 8-bit grayscale, got {:?}",
            img.color()
        )));
    }
    let img = img.into_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::MalformedImage("empty image".to_string()));
    }
    let mut cells = vec![CellClass::Free; w * h];
    for (x, y, p) in img.enumerate_pixels() {
        // image row 0 is the top of the map
        let row = h - 1 - y as usize;
        cells[row * w + x as usize] = meta.classify(p.0[0]);
    }
    let origin = Origin {
        x: meta.origin[0],
        y: meta.origin[1],
        theta: meta.origin[2],
    };
    OccupancyGrid::new(w, h, meta.resolution, origin, cells)
}

/// Read a sidecar YAML and the image it names (relative to the YAML file).
pub fn load_map_file(yaml_path: &Path) -> Result<OccupancyGrid> {
    let text = fs::read_to_string(yaml_path)?;
    let meta = MapMetadata::from_yaml(&text)?;
    let image_path = resolve_image(yaml_path, &meta.image);
    let bytes = fs::read(&image_path)?;
    load_map(&bytes, &meta)
}

fn resolve_image(yaml_path: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        yaml_path.parent().unwrap_or_else(|| Path::new(".")).join(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// P5
    #[default]
    Binary,
    /// P2
    Ascii,
}

/// Encode a grid as PGM bytes plus matching metadata; loading the pair back
/// reproduces the grid exactly.
pub fn save_map(
    grid: &OccupancyGrid,
    image_name: &str,
    encoding: PgmEncoding,
) -> Result<(Vec<u8>, MapMetadata)> {
    let (w, h) = (grid.width(), grid.height());
    let mut pixels = vec![0u8; w * h];
    for row in 0..h {
        for col in 0..w {
            let class = grid.cells()[row * w + col];
            pixels[(h - 1 - row) * w + col] = match class {
                CellClass::Free => FREE_PIXEL,
                CellClass::Occupied => OCCUPIED_PIXEL,
                CellClass::Unknown => UNKNOWN_PIXEL,
            };
        }
    }
    let sample = match encoding {
        PgmEncoding::Binary => SampleEncoding::Binary,
        PgmEncoding::Ascii => SampleEncoding::Ascii,
    };
    let mut bytes = Vec::new();
    PnmEncoder::new(Cursor::new(&mut bytes))
        .with_subtype(PnmSubtype::Graymap(sample))
        .write_image(&pixels, w as u32, h as u32, ExtendedColorType::L8)
        .map_err(|e| Error::MalformedImage(e.to_string()))?;
    let origin = grid.origin();
    let meta = MapMetadata {
        origin: [origin.x, origin.y, origin.theta],
        ..MapMetadata::new(image_name, grid.resolution())
    };
    Ok((bytes, meta))
}

/// Write `<stem>.pgm` next to `yaml_path` and the sidecar itself.
pub fn save_map_files(grid: &OccupancyGrid, yaml_path: &Path, encoding: PgmEncoding) -> Result<()> {
    let stem = yaml_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::MalformedMetadata(format!("bad map path {}", yaml_path.display())))?;
    let image_name = format!("{stem}.pgm");
    let (bytes, meta) = save_map(grid, &image_name, encoding)?;
    fs::write(resolve_image(yaml_path, &image_name), bytes)?;
    fs::write(yaml_path, meta.to_yaml())?;
    Ok(())
}

/// Portable JSON form of a grid; `rows[0]` is the top row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDump {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: [f64; 3],
    pub rows: Vec<String>,
}

impl GridDump {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn from_grid(grid: &OccupancyGrid) -> Self {
        let o = grid.origin();
        Self {
            schema_version: Self::SCHEMA_VERSION,
            width: grid.width(),
            height: grid.height(),
            resolution: grid.resolution(),
            origin: [o.x, o.y, o.theta],
            rows: grid.to_ascii(),
        }
    }

    pub fn to_grid(&self) -> Result<OccupancyGrid> {
        let rows: Vec<&str> = self.rows.iter().map(String::as_str).collect();
        let grid = OccupancyGrid::from_ascii(&rows, self.resolution)?;
        if grid.width() != self.width || grid.height() != self.height {
            return Err(Error::InvalidGrid(format!(
                "dump declares {}x{} but rows are {}x{}",
                self.width,
                self.height,
                grid.width(),
                grid.height()
            )));
        }
        Ok(grid.with_origin(Origin {
            x: self.origin[0],
            y: self.origin[1],
            theta: self.origin[2],
        }))
    }
}
