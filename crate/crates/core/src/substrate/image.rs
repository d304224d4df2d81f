//! Raster ingestion (binary PGM, optionally PNG) and PGM mask export.

use super::GridTemplate;
use crate::{Error, Result};

/// Grayscale raster with luminance normalised to `[0, 1]`.
struct Raster {
    width: usize,
    height: usize,
    luminance: Vec<f64>,
}

/// Decodes a grayscale raster and marks every pixel whose luminance is at
/// least `threshold` as conductive.
pub fn load_template(bytes: &[u8], threshold: f64) -> Result<GridTemplate> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "luminance threshold must lie in [0, 1], got {threshold}"
        )));
    }
    let raster = decode(bytes)?;
    let mask: Vec<bool> = raster.luminance.iter().map(|&l| l >= threshold).collect();
    if !mask.iter().any(|&c| c) {
        return Err(Error::DegenerateTemplate);
    }
    GridTemplate::new(raster.width, raster.height, mask)
}

/// Encodes the mask as binary PGM: 0 for non-conductive, 255 for conductive.
pub fn save_template(template: &GridTemplate) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", template.width(), template.height()).into_bytes();
    out.extend(template.mask().iter().map(|&c| if c { 255u8 } else { 0 }));
    out
}

fn decode(bytes: &[u8]) -> Result<Raster> {
    if bytes.starts_with(b"P5") {
        return decode_pgm(bytes);
    }
    #[cfg(feature = "png")]
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        return decode_png(bytes);
    }
    Err(Error::Format(
        "unrecognised raster (expected binary PGM or PNG)".into(),
    ))
}

fn decode_pgm(bytes: &[u8]) -> Result<Raster> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // Whitespace and `#` comments may separate header fields.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("malformed PGM header".into()))?;
    }
    // Exactly one whitespace byte precedes the pixel data.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("malformed PGM header".into()));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!(
            "unsupported PGM geometry {width}x{height}, maxval {maxval}"
        )));
    }
    let depth = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[pos..];
    let needed = width * height * depth;
    if data.len() < needed {
        return Err(Error::Format(format!(
            "PGM pixel data truncated: {} of {needed} bytes",
            data.len()
        )));
    }
    let luminance = if depth == 1 {
        data[..needed]
            .iter()
            .map(|&p| f64::from(p) / maxval as f64)
            .collect()
    } else {
        data[..needed]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / maxval as f64)
            .collect()
    };
    Ok(Raster {
        width,
        height,
        luminance,
    })
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<Raster> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let channels = info.color_type.samples();
    let width = info.width as usize;
    let height = info.height as usize;
    let luminance = buf[..info.buffer_size()]
        .chunks_exact(channels)
        .map(|px| {
            let l = match channels {
                1 | 2 => f64::from(px[0]),
                _ => 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]),
            };
            l / 255.0
        })
        .collect();
    Ok(Raster {
        width,
        height,
        luminance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
        let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
        out.extend_from_slice(pixels);
        out
    }

    #[test]
    fn all_white_is_fully_conductive() {
        let t = load_template(&pgm(10, 10, &[255; 100]), 0.5).unwrap();
        assert_eq!(t.conductive_count(), 100);
        assert_eq!((t.width(), t.height()), (10, 10));
    }

    #[test]
    fn all_black_is_degenerate() {
        assert!(matches!(
            load_template(&pgm(10, 10, &[0; 100]), 0.5),
            Err(Error::DegenerateTemplate)
        ));
    }

    #[test]
    fn checkerboard_counts_by_enumeration() {
        let pixels: Vec<u8> = (0..16)
            .map(|i| if (i % 4 + i / 4) % 2 == 0 { 255 } else { 0 })
            .collect();
        let expected = pixels
            .iter()
            .filter(|&&p| f64::from(p) / 255.0 >= 0.5)
            .count();
        assert_eq!(expected, 8);
        let t = load_template(&pgm(4, 4, &pixels), 0.5).unwrap();
        assert_eq!(t.conductive_count(), expected);
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = load_template(&pgm(3, 3, &[0, 0, 0, 0, 128, 0, 0, 0, 0]), 128.0 / 255.0).unwrap();
        assert_eq!(t.conductive_indices(), vec![4]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5 # made by hand\n3 3\n# another\n255\n".to_vec();
        bytes.extend([255u8; 9]);
        assert_eq!(load_template(&bytes, 0.5).unwrap().conductive_count(), 9);
    }

    #[test]
    fn garbage_is_a_format_error() {
        assert!(matches!(
            load_template(b"hello", 0.5),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            load_template(b"P5\n4 4\n255\n\x00\x00", 0.5),
            Err(Error::Format(_))
        ));
    }

    #[cfg(feature = "png")]
    #[test]
    fn png_grayscale_decodes() {
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, 4, 3);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[255, 0, 0, 255, 0, 0, 0, 0, 255, 255, 255, 255])
                .unwrap();
        }
        let t = load_template(&bytes, 0.5).unwrap();
        assert_eq!((t.width(), t.height()), (4, 3));
        assert_eq!(t.conductive_count(), 6);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn save_then_load_is_identity(
                w in 3usize..24, h in 3usize..24, bits in proptest::collection::vec(any::<bool>(), 576)
            ) {
                let mut mask: Vec<bool> = bits[..w * h].to_vec();
                mask[0] = true;
                let t = GridTemplate::new(w, h, mask).unwrap();
                let back = load_template(&save_template(&t), 0.5).unwrap();
                prop_assert_eq!(back, t);
            }
        }
    }
}
