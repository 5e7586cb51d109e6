//! Value legend drawn beside the plot, with a tiny built-in digit font.

use super::{band_color, RenderMode, RenderSpec, RenderedImage, Rgba};

pub const LEGEND_WIDTH: usize = 110;

const BAR_X: usize = 10;
const BAR_W: usize = 18;
const MARGIN_Y: usize = 12;
const GLYPH_SCALE: usize = 2;
const INK: Rgba = [25, 25, 25, 255];

/// 3×5 glyphs, one row per entry, most significant bit on the left.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        '-' => [0b000, 0b000, 0b111, 0b000, 0b000],
        '+' => [0b000, 0b010, 0b111, 0b010, 0b000],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        'e' => [0b000, 0b111, 0b111, 0b100, 0b111],
        _ => return None,
    })
}

fn draw_text(img: &mut RenderedImage, x: usize, y: usize, text: &str) {
    let mut cx = x;
    for ch in text.chars() {
        if let Some(rows) = glyph(ch) {
            for (ry, bits) in rows.iter().enumerate() {
                for rx in 0..3 {
                    if bits & (0b100 >> rx) != 0 {
                        for dy in 0..GLYPH_SCALE {
                            for dx in 0..GLYPH_SCALE {
                                let px = cx + rx * GLYPH_SCALE + dx;
                                let py = y + ry * GLYPH_SCALE + dy;
                                if px < img.width && py < img.height {
                                    img.set_pixel(px, py, INK);
                                }
                            }
                        }
                    }
                }
            }
        }
        cx += 4 * GLYPH_SCALE;
    }
}

fn format_level(v: f64, spacing: f64) -> String {
    let mag = v.abs().max(spacing);
    if mag >= 1e6 || mag < 1e-3 {
        return format!("{v:.1e}");
    }
    let decimals = (-spacing.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with("-") && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Copy of `img` with a legend strip covering `[lo, hi]` attached on the right.
pub fn append_legend(img: &RenderedImage, spec: &RenderSpec, lo: f64, hi: f64) -> RenderedImage {
    let (w, h) = (img.width + LEGEND_WIDTH, img.height);
    let mut out = RenderedImage::filled(w, h, [255, 255, 255, 255]);
    for y in 0..img.height {
        let src = 4 * y * img.width;
        let dst = 4 * y * w;
        out.pixels[dst..dst + 4 * img.width].copy_from_slice(&img.pixels[src..src + 4 * img.width]);
    }
    if h < 2 * MARGIN_Y + 2 || !(lo.is_finite() && hi.is_finite()) {
        return out;
    }
    let x0 = img.width + BAR_X;
    let top = MARGIN_Y;
    let bottom = h - MARGIN_Y;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let value_at = |y: usize| hi - (y - top) as f64 / (bottom - top) as f64 * span;
    let y_of = |v: f64| top as f64 + (hi - v) / span * (bottom - top) as f64;

    let discrete = matches!(spec.mode, RenderMode::Discrete | RenderMode::DiscreteContour);
    let first = (lo / spec.spacing).floor() as i64;
    let count = (hi / spec.spacing).floor() as i64 - first + 1;
    for y in top..=bottom {
        let fill = if discrete {
            band_color(&spec.colormap, (value_at(y) / spec.spacing).floor() as i64, first, count)
        } else {
            [245, 245, 245, 255]
        };
        for x in x0..x0 + BAR_W {
            out.set_pixel(x, y, fill);
        }
        out.set_pixel(x0, y, INK);
        out.set_pixel(x0 + BAR_W - 1, y, INK);
    }
    for x in x0..x0 + BAR_W {
        out.set_pixel(x, top, INK);
        out.set_pixel(x, bottom, INK);
    }

    let levels: Vec<f64> = (((lo / spec.spacing).ceil() as i64)..=((hi / spec.spacing).floor() as i64))
        .map(|k| k as f64 * spec.spacing)
        .collect();
    let min_gap = (6 * GLYPH_SCALE) as f64 + 2.0;
    let mut last_label = f64::NEG_INFINITY;
    for &v in &levels {
        let yf = y_of(v);
        let y = yf.round() as usize;
        if y < top || y > bottom {
            continue;
        }
        for x in x0 + BAR_W..x0 + BAR_W + 5 {
            out.set_pixel(x, y, INK);
        }
        if !discrete {
            for x in x0 + 1..x0 + BAR_W - 1 {
                out.blend_pixel(x, y, spec.line_color, 0.8);
            }
        }
        if (yf - last_label).abs() >= min_gap {
            let ty = y.saturating_sub(5 * GLYPH_SCALE / 2);
            draw_text(&mut out, x0 + BAR_W + 8, ty, &format_level(v, spec.spacing));
            last_label = yf;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(format_level(0.30000000000000004, 0.1), "0.3");
        assert_eq!(format_level(-0.0, 0.1), "0.0");
        assert_eq!(format_level(25.0, 5.0), "25");
        assert_eq!(format_level(2.5e7, 5e6), "2.5e7");
    }

    #[test]
    fn strip_is_appended() {
        let img = RenderedImage::filled(50, 80, [1, 2, 3, 255]);
        let spec = RenderSpec::new(RenderMode::Discrete, 0.5);
        let out = append_legend(&img, &spec, 0.0, 3.0);
        assert_eq!((out.width, out.height), (50 + LEGEND_WIDTH, 80));
        assert_eq!(out.pixel(49, 79), [1, 2, 3, 255]);
        assert!((0..80).any(|y| out.pixel(50 + BAR_X + 5, y) != [255; 4]));
    }
}
