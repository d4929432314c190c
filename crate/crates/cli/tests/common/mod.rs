//! Synthetic two-block pedestrians for end-to-end tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use domcolor::colorquant::{quantize_pixel, QuantizedColor};
use domcolor::imaging::{encode_ppm, ImageBuffer, Mask};
use rand::Rng;

pub const WIDTH: usize = 48;
pub const HEIGHT: usize = 128;
pub const BODY_WIDTH: usize = 24;

/// A palette color given by HSV bin centers; `hue == None` is a gray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaletteColor {
    pub hue: Option<f64>,
    pub sat: f64,
    pub v_bin: u8,
}

const HUE_CENTERS: [f64; 8] = [0.0, 30.0, 57.5, 115.0, 172.5, 230.0, 282.5, 305.5];

/// Colors from distinct quantization bins, all with V bin >= 1.
pub fn palette() -> Vec<PaletteColor> {
    let mut out = Vec::new();
    for &hue in &HUE_CENTERS {
        for v_bin in [1, 2] {
            out.push(PaletteColor {
                hue: Some(hue),
                sat: 0.9,
                v_bin,
            });
        }
        out.push(PaletteColor {
            hue: Some(hue),
            sat: 0.5,
            v_bin: 2,
        });
    }
    out.push(PaletteColor {
        hue: None,
        sat: 0.0,
        v_bin: 1,
    });
    out.push(PaletteColor {
        hue: None,
        sat: 0.0,
        v_bin: 2,
    });
    out
}

/// Interior of each V interval used when jittering.
pub fn v_range(v_bin: u8) -> (f64, f64) {
    match v_bin {
        0 => (0.0, 0.2),
        1 => (0.25, 0.7),
        _ => (0.75, 1.0),
    }
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to8 = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to8(r), to8(g), to8(b)]
}

fn render(color: PaletteColor, v_bin: u8, rng: &mut impl Rng) -> [u8; 3] {
    let (lo, hi) = v_range(v_bin);
    let v = rng.gen_range(lo..=hi);
    match color.hue {
        Some(h) => hsv_to_rgb(h, color.sat, v),
        None => {
            let g = (v * 255.0).round() as u8;
            [g, g, g]
        }
    }
}

/// Quantized color of the palette entry at its own V bin.
pub fn nominal(color: PaletteColor) -> QuantizedColor {
    let [r, g, b] = match color.hue {
        Some(h) => hsv_to_rgb(
            h,
            color.sat,
            (v_range(color.v_bin).0 + v_range(color.v_bin).1) / 2.0,
        ),
        None => {
            let v = (v_range(color.v_bin).0 + v_range(color.v_bin).1) / 2.0;
            let g = (v * 255.0).round() as u8;
            [g, g, g]
        }
    };
    quantize_pixel(r, g, b)
}

/// A pixel whose jittered value stays in the color's V bin; redrawn until
/// it quantizes to the nominal color.
pub fn jittered(color: PaletteColor, rng: &mut impl Rng) -> [u8; 3] {
    let want = nominal(color);
    loop {
        let px = render(color, color.v_bin, rng);
        if quantize_pixel(px[0], px[1], px[2]) == want {
            return px;
        }
    }
}

/// A pixel pushed into the neighboring V bin.
pub fn crossed(color: PaletteColor, rng: &mut impl Rng) -> [u8; 3] {
    let target = if color.v_bin == 2 { 1 } else { color.v_bin + 1 };
    let (h, s, _) = nominal(color).bins();
    loop {
        let px = render(color, target, rng);
        let q = quantize_pixel(px[0], px[1], px[2]);
        if q == QuantizedColor::from_bins(h, s, target) {
            return px;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub upper: PaletteColor,
    pub lower: PaletteColor,
}

/// `n` identities with pairwise distinct (upper, lower) colors.
pub fn identities(n: usize, rng: &mut impl Rng) -> Vec<Identity> {
    let pal = palette();
    let mut pairs: Vec<(usize, usize)> = (0..pal.len())
        .flat_map(|u| (0..pal.len()).filter(move |&l| l != u).map(move |l| (u, l)))
        .collect();
    assert!(n <= pairs.len());
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, l) = pairs.swap_remove(rng.gen_range(0..pairs.len()));
        out.push(Identity {
            upper: pal[u],
            lower: pal[l],
        });
    }
    out
}

/// One view of an identity: body columns start at `offset`, background is
/// masked. `cross_fraction` of body pixels leave their V bin.
pub fn render_view(
    id: &Identity,
    offset: usize,
    cross_fraction: f64,
    rng: &mut impl Rng,
) -> (ImageBuffer, Mask) {
    let mut pixels = Vec::with_capacity(WIDTH * HEIGHT);
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let color = if y < HEIGHT / 2 { id.upper } else { id.lower };
            let body = (offset..offset + BODY_WIDTH).contains(&x);
            pixels.push(if !body {
                [rng.gen(), rng.gen(), rng.gen()]
            } else if rng.gen_bool(cross_fraction) {
                crossed(color, rng)
            } else {
                jittered(color, rng)
            });
        }
    }
    let img = ImageBuffer::new(WIDTH, HEIGHT, pixels).unwrap();
    let mask = Mask::from_fn(WIDTH, HEIGHT, |x, _| {
        (offset..offset + BODY_WIDTH).contains(&x)
    })
    .unwrap();
    (img, mask)
}

/// Two views per identity: camera A centered, camera B shifted by up to
/// 25% of the width either way.
pub fn render_pair(
    id: &Identity,
    cross_fraction: f64,
    rng: &mut impl Rng,
) -> [(ImageBuffer, Mask); 2] {
    let center = (WIDTH - BODY_WIDTH) / 2;
    let max_shift = WIDTH / 4;
    let shifted = center + rng.gen_range(0..=2 * max_shift) - max_shift;
    [
        render_view(id, center, cross_fraction, rng),
        render_view(id, shifted, cross_fraction, rng),
    ]
}

pub fn mask_image(mask: &Mask) -> ImageBuffer {
    ImageBuffer::new(
        mask.width(),
        mask.height(),
        mask.bits()
            .iter()
            .map(|&b| if b { [255; 3] } else { [0; 3] })
            .collect(),
    )
    .unwrap()
}

/// Writes a two-camera dataset plus `manifest.csv` under `dir`.
pub fn write_dataset(dir: &Path, n: usize, cross_fraction: f64, rng: &mut impl Rng) -> PathBuf {
    std::fs::create_dir_all(dir.join("cam_a")).unwrap();
    std::fs::create_dir_all(dir.join("cam_b")).unwrap();
    std::fs::create_dir_all(dir.join("masks")).unwrap();
    let mut manifest = String::from("id,camera,image_path,mask_path\n");
    for (i, id) in identities(n, rng).iter().enumerate() {
        let [a, b] = render_pair(id, cross_fraction, rng);
        for (cam, (img, mask)) in [("a", a), ("b", b)] {
            let name = format!("{i:03}_{cam}.ppm");
            std::fs::write(dir.join(format!("cam_{cam}")).join(&name), encode_ppm(&img)).unwrap();
            std::fs::write(
                dir.join("masks").join(format!("{cam}_{name}")),
                encode_ppm(&mask_image(&mask)),
            )
            .unwrap();
            manifest.push_str(&format!(
                "{i:03},{},cam_{cam}/{name},masks/{cam}_{name}\n",
                cam.to_uppercase()
            ));
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}
