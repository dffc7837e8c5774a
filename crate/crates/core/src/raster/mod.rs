//! Rasterization and classical recovery of chart elements.

pub mod ccl;
pub mod deskew;
pub mod detect;
pub mod geometry;
pub mod glyphs;
pub mod image;
pub mod ocr;
pub mod render;
pub mod sprite;

pub use deskew::{deskew, Deskewed};
pub use detect::{detect_points, detect_ticks, scene_from_image, DetectorConfig};
pub use glyphs::GlyphSet;
pub use image::{BitMask, Image};
pub use ocr::{recognize_value, Recognized};
pub use render::render;
