//! The world around the platform: the floor's height-field and the
//! motion-capture/encoder noise channel.

mod heightfield;
mod noise;

pub use heightfield::{parse_pgm, write_pgm, GrayImage, HeightField, ImageScaling, Lookup};
pub use noise::{apply_sensor_noise, Measurement, NoiseModel};
