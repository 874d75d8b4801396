//! Deterministic chaos-game rendering of planar affine instances to SVG.
//!
//! The generator is splitmix64 with the published constants, so a fixed seed
//! reproduces the byte-identical document on every platform. Coordinates are
//! evaluated in floating point (rendering is a demo surface, not part of the
//! exact pipeline) and printed with a fixed number of decimals.

use std::fmt::Write as _;

use crate::instance::AffineInstance;
use crate::ratio::rat_to_f64;

/// splitmix64: state advances by the golden-gamma constant, output is the
/// finalized mix. Test vectors from seed 0 are pinned in the tests.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform index below `bound` by rejection-free modulo; fine for the
    /// tiny map counts used here.
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}

/// Options for [`render_svg`].
#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub samples: usize,
    pub seed: u64,
    /// Draw the images of the bounding box under all compositions of this
    /// length.
    pub cylinders: Option<usize>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            samples: 100_000,
            seed: 0,
            cylinders: None,
        }
    }
}

const CANVAS: f64 = 800.0;
const BURN_IN: usize = 20;

/// Renders the chaos-game point cloud (plus optional cylinder polygons) as a
/// standalone SVG document. Deterministic in the options.
pub fn render_svg(instance: &AffineInstance, options: &RenderOptions) -> String {
    let x0 = rat_to_f64(&instance.bbox[0]);
    let y0 = rat_to_f64(&instance.bbox[1]);
    let x1 = rat_to_f64(&instance.bbox[2]);
    let y1 = rat_to_f64(&instance.bbox[3]);
    let scale = CANVAS / (x1 - x0).max(y1 - y0);
    // SVG y grows downward; flip so the box's y1 is at the top.
    let to_canvas = |x: f64, y: f64| ((x - x0) * scale, (y1 - y) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.4} {h:.4}\">",
        w = (x1 - x0) * scale,
        h = (y1 - y0) * scale,
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    if let Some(depth) = options.cylinders {
        let _ = writeln!(
            svg,
            "<g fill=\"none\" stroke=\"#3366cc\" stroke-width=\"0.5\">"
        );
        let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..depth {
            stack = stack
                .iter()
                .flat_map(|w| {
                    (0..instance.maps.len()).map(move |i| {
                        let mut v = w.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
        }
        for word in &stack {
            let mut points = String::new();
            for &(cx, cy) in &corners {
                // Leftmost letter applied last, matching composition order.
                let (mut px, mut py) = (cx, cy);
                for &i in word.iter().rev() {
                    let (nx, ny) = instance.maps[i].apply_f64(px, py);
                    px = nx;
                    py = ny;
                }
                let (sx, sy) = to_canvas(px, py);
                let _ = write!(points, "{sx:.4},{sy:.4} ");
            }
            let _ = writeln!(svg, "<polygon points=\"{}\"/>", points.trim_end());
        }
        let _ = writeln!(svg, "</g>");
    }

    let _ = writeln!(svg, "<g fill=\"black\">");
    let mut rng = SplitMix64::new(options.seed);
    let (mut px, mut py) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    for step in 0..options.samples + BURN_IN {
        let map = &instance.maps[rng.next_below(instance.maps.len())];
        let (nx, ny) = map.apply_f64(px, py);
        px = nx;
        py = ny;
        if step < BURN_IN {
            continue;
        }
        let (sx, sy) = to_canvas(px, py);
        let _ = writeln!(
            svg,
            "<rect x=\"{sx:.4}\" y=\"{sy:.4}\" width=\"1\" height=\"1\"/>"
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}
