//! Deterministic synthetic datasets with the same shapes as the real ones.
//!
//! [`digits`] renders jittered stroke glyphs of the ten digits on a 28x28
//! grid: same shape and rough difficulty class as MNIST. [`rgb_shapes`]
//! builds a many-class 32x32x3 collection of noisy colored shapes with
//! deliberately modest separability. Both are pure functions of their
//! arguments, so fixtures and fallback benchmarks reproduce bit for bit.
//!
//! Values are quantized to bytes before scaling by 1/255, so writing a
//! synthetic dataset through the binary exporters and reloading round-trips
//! exactly.

use crate::dataset::Dataset;
use crate::scalar::{cast, Scalar};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Point = (f64, f64);

fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64, points: usize) -> Vec<Point> {
    (0..=points)
        .map(|i| {
            let t = i as f64 / points as f64 * std::f64::consts::TAU;
            (cx + rx * t.cos(), cy + ry * t.sin())
        })
        .collect()
}

/// Stroke skeletons for the ten digits, as polylines in the unit square
/// (y grows downward).
fn digit_strokes(digit: u8) -> Vec<Vec<Point>> {
    match digit {
        0 => vec![ellipse(0.5, 0.5, 0.21, 0.31, 14)],
        1 => vec![vec![(0.38, 0.30), (0.53, 0.16)], vec![(0.53, 0.16), (0.53, 0.84)]],
        2 => vec![
            vec![
                (0.30, 0.30),
                (0.38, 0.17),
                (0.58, 0.15),
                (0.70, 0.28),
                (0.62, 0.46),
                (0.32, 0.84),
            ],
            vec![(0.32, 0.84), (0.72, 0.84)],
        ],
        3 => vec![
            vec![(0.30, 0.21), (0.50, 0.14), (0.68, 0.26), (0.52, 0.44)],
            vec![(0.52, 0.44), (0.70, 0.58), (0.56, 0.82), (0.30, 0.78)],
        ],
        4 => vec![
            vec![(0.62, 0.16), (0.28, 0.62)],
            vec![(0.28, 0.62), (0.76, 0.62)],
            vec![(0.62, 0.16), (0.62, 0.86)],
        ],
        5 => vec![
            vec![(0.68, 0.16), (0.34, 0.16)],
            vec![(0.34, 0.16), (0.32, 0.48)],
            vec![
                (0.32, 0.48),
                (0.56, 0.42),
                (0.70, 0.60),
                (0.55, 0.82),
                (0.30, 0.76),
            ],
        ],
        6 => vec![vec![
            (0.62, 0.14),
            (0.42, 0.30),
            (0.32, 0.55),
            (0.36, 0.76),
            (0.54, 0.85),
            (0.68, 0.72),
            (0.62, 0.55),
            (0.38, 0.58),
        ]],
        7 => vec![vec![(0.26, 0.16), (0.74, 0.16)], vec![(0.74, 0.16), (0.44, 0.85)]],
        8 => vec![
            ellipse(0.5, 0.32, 0.16, 0.15, 12),
            ellipse(0.5, 0.66, 0.20, 0.18, 12),
        ],
        _ => vec![
            ellipse(0.52, 0.32, 0.18, 0.17, 12),
            vec![(0.70, 0.34), (0.60, 0.85)],
        ],
    }
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (px, py) = p;
    let (ax, ay) = a;
    let (bx, by) = b;
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (ax + t * dx, ay + t * dy);
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

struct Affine {
    scale: f64,
    rot: f64,
    shear: f64,
    shift: Point,
}

impl Affine {
    fn apply(&self, p: Point) -> Point {
        let (mut x, mut y) = (p.0 - 0.5, p.1 - 0.5);
        x *= self.scale;
        y *= self.scale;
        x += self.shear * y;
        let (s, c) = self.rot.sin_cos();
        let (rx, ry) = (c * x - s * y, s * x + c * y);
        (rx + 0.5 + self.shift.0, ry + 0.5 + self.shift.1)
    }
}

/// Ten-class digit glyphs on a 28x28 single-channel grid, `per_class`
/// samples each, deterministically jittered (affine warp, stroke width,
/// pixel noise) per sample.
pub fn digits<T: Scalar>(per_class: usize, seed: u64) -> Dataset<T> {
    const SIZE: usize = 28;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = per_class * 10;
    let mut bytes = vec![0u8; count * SIZE * SIZE];
    let mut labels = Vec::with_capacity(count);

    for sample in 0..count {
        let digit = (sample / per_class) as u8;
        labels.push(digit);
        let warp = Affine {
            scale: rng.random_range(0.85..1.15),
            rot: rng.random_range(-0.20..0.20),
            shear: rng.random_range(-0.15..0.15),
            shift: (rng.random_range(-0.06..0.06), rng.random_range(-0.06..0.06)),
        };
        let sigma: f64 = rng.random_range(0.040..0.060);
        let peak: f64 = rng.random_range(0.85..1.0);

        let strokes: Vec<Vec<Point>> = digit_strokes(digit)
            .into_iter()
            .map(|line| line.into_iter().map(|p| warp.apply(p)).collect())
            .collect();

        let base = sample * SIZE * SIZE;
        for py in 0..SIZE {
            for px in 0..SIZE {
                let p = (
                    (px as f64 + 0.5) / SIZE as f64,
                    (py as f64 + 0.5) / SIZE as f64,
                );
                let mut d = f64::INFINITY;
                for line in &strokes {
                    for seg in line.windows(2) {
                        d = d.min(dist_to_segment(p, seg[0], seg[1]));
                    }
                }
                let mut v = peak * (-d * d / (2.0 * sigma * sigma)).exp();
                v += rng.sample::<f64, _>(StandardNormal) * 0.02;
                bytes[base + py * SIZE + px] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            }
        }
    }

    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut rng);
    let mut pixels = Array2::<T>::zeros((count, SIZE * SIZE));
    let mut shuffled_labels = Vec::with_capacity(count);
    for (row, &src) in order.iter().enumerate() {
        let raw = &bytes[src * SIZE * SIZE..(src + 1) * SIZE * SIZE];
        for (j, &b) in raw.iter().enumerate() {
            pixels[[row, j]] = cast::<T>(f64::from(b) / 255.0);
        }
        shuffled_labels.push(labels[src]);
    }
    Dataset::new(SIZE, SIZE, 1, 10, pixels, shuffled_labels).expect("generator keeps invariants")
}

#[derive(Clone, Copy)]
enum BlobKind {
    Ellipse,
    Rect,
}

#[derive(Clone)]
struct Blob {
    kind: BlobKind,
    center: Point,
    radii: (f64, f64),
    angle: f64,
    color: [f64; 3],
}

/// Class identity is mostly geometry — an arrangement of three blobs — plus
/// a weak color tint. Background, brightness, most of the blob color, and
/// position jitter are per-sample nuisance, so classifiers must read spatial
/// layout; the tint keeps a sliver of linear signal alive.
#[derive(Clone)]
struct ClassStyle {
    blobs: Vec<Blob>,
    tint: [f64; 3],
}

fn class_style(class: usize, seed: u64) -> ClassStyle {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(class as u64 + 1));
    let blobs = (0..3)
        .map(|_| Blob {
            kind: if rng.random_bool(0.5) {
                BlobKind::Ellipse
            } else {
                BlobKind::Rect
            },
            center: (rng.random_range(0.22..0.78), rng.random_range(0.22..0.78)),
            radii: (rng.random_range(0.10..0.26), rng.random_range(0.08..0.22)),
            angle: rng.random_range(0.0..std::f64::consts::PI),
            color: [0.0; 3], // filled per sample
        })
        .collect();
    let tint = [
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
    ];
    ClassStyle { blobs, tint }
}

/// A `num_classes`-way 32x32x3 collection of noisy colored shapes,
/// `per_class` samples each.
///
/// Each class owns a background gradient and two or three colored blobs
/// (both derived from `seed`, so datasets built from the same seed share
/// class identities); samples jitter positions, sizes, colors, and
/// brightness and carry per-pixel Gaussian noise, so accuracies stay modest
/// and high-frequency noise is plentiful.
pub fn rgb_shapes<T: Scalar>(num_classes: usize, per_class: usize, seed: u64) -> Dataset<T> {
    rgb_shapes_with(num_classes, per_class, seed, seed)
}

/// Train/test pair drawn from one pool of class styles: the styles come from
/// `seed` while the two splits use disjoint sample-noise streams.
pub fn rgb_shapes_split<T: Scalar>(
    num_classes: usize,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> (Dataset<T>, Dataset<T>) {
    (
        rgb_shapes_with(num_classes, train_per_class, seed, seed.wrapping_add(1)),
        rgb_shapes_with(num_classes, test_per_class, seed, seed.wrapping_add(2)),
    )
}

fn rgb_shapes_with<T: Scalar>(
    num_classes: usize,
    per_class: usize,
    style_seed: u64,
    sample_seed: u64,
) -> Dataset<T> {
    const SIZE: usize = 32;
    const PLANE: usize = SIZE * SIZE;
    assert!(num_classes >= 1 && num_classes <= 256);
    let styles: Vec<ClassStyle> = (0..num_classes).map(|c| class_style(c, style_seed)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed.wrapping_add(0xa5a5_a5a5));
    let count = num_classes * per_class;
    let mut bytes = vec![0u8; count * 3 * PLANE];
    let mut labels = Vec::with_capacity(count);

    for sample in 0..count {
        let class = sample / per_class;
        labels.push(class as u8);
        let style = &styles[class];
        let brightness: f64 = rng.random_range(0.75..1.25);
        // Per-sample nuisance: background gradient and blob colors carry no
        // class information at all.
        let bg0 = [
            rng.random_range(0.1..0.9),
            rng.random_range(0.1..0.9),
            rng.random_range(0.1..0.9),
        ];
        let bg1 = [
            rng.random_range(0.1..0.9),
            rng.random_range(0.1..0.9),
            rng.random_range(0.1..0.9),
        ];
        let bg_angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        // One shared scene offset per sample: smooth geometry moves while
        // the class identity stays put, which penalizes pixel-aligned
        // representations much more than smooth low-order projections.
        let scene = (rng.random_range(-0.06..0.06), rng.random_range(-0.06..0.06));
        // High-frequency nuisance textures: oriented sinusoids well above the
        // low-mode band. They dominate pixel variance without carrying any
        // class signal.
        let textures: Vec<(f64, f64, f64, f64)> = (0..2)
            .map(|_| {
                let cycles: f64 = rng.random_range(12.0..16.0);
                let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let amp: f64 = rng.random_range(0.10..0.22);
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                (cycles * theta.cos(), cycles * theta.sin(), amp, phase)
            })
            .collect();
        let blobs: Vec<Blob> = style
            .blobs
            .iter()
            .map(|b| Blob {
                kind: b.kind,
                center: (
                    b.center.0 + scene.0 + rng.random_range(-0.04..0.04),
                    b.center.1 + scene.1 + rng.random_range(-0.04..0.04),
                ),
                radii: (
                    b.radii.0 * rng.random_range(0.8..1.2),
                    b.radii.1 * rng.random_range(0.8..1.2),
                ),
                angle: b.angle + rng.random_range(-0.25..0.25),
                color: [
                    0.65 * rng.random_range(0.0..1.0) + 0.35 * style.tint[0],
                    0.65 * rng.random_range(0.0..1.0) + 0.35 * style.tint[1],
                    0.65 * rng.random_range(0.0..1.0) + 0.35 * style.tint[2],
                ],
            })
            .collect();

        let (gs, gc) = bg_angle.sin_cos();
        let base = sample * 3 * PLANE;
        for py in 0..SIZE {
            for px in 0..SIZE {
                let x = (px as f64 + 0.5) / SIZE as f64;
                let y = (py as f64 + 0.5) / SIZE as f64;
                let t = (((x - 0.5) * gc + (y - 0.5) * gs) + 0.5).clamp(0.0, 1.0);
                let mut color = [
                    bg0[0] * (1.0 - t) + bg1[0] * t,
                    bg0[1] * (1.0 - t) + bg1[1] * t,
                    bg0[2] * (1.0 - t) + bg1[2] * t,
                ];
                for blob in &blobs {
                    let (s, c) = blob.angle.sin_cos();
                    let dx = x - blob.center.0;
                    let dy = y - blob.center.1;
                    let u = (c * dx + s * dy) / blob.radii.0;
                    let v = (-s * dx + c * dy) / blob.radii.1;
                    let r = match blob.kind {
                        BlobKind::Ellipse => (u * u + v * v).sqrt(),
                        BlobKind::Rect => u.abs().max(v.abs()),
                    };
                    // Smooth edge between r = 1.0 and r = 0.8.
                    let mix = ((1.0 - r) / 0.2).clamp(0.0, 1.0) * 0.9;
                    if mix > 0.0 {
                        for ch in 0..3 {
                            color[ch] = color[ch] * (1.0 - mix) + blob.color[ch] * mix;
                        }
                    }
                }
                let mut texture = 0.0;
                for &(fx, fy, amp, phase) in &textures {
                    texture += amp * (std::f64::consts::TAU * (fx * x + fy * y) + phase).sin();
                }
                for (ch, &value) in color.iter().enumerate() {
                    let noisy = value * brightness
                        + texture
                        + rng.sample::<f64, _>(StandardNormal) * 0.08;
                    bytes[base + ch * PLANE + py * SIZE + px] =
                        (noisy.clamp(0.0, 1.0) * 255.0).round() as u8;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut rng);
    let mut pixels = Array2::<T>::zeros((count, 3 * PLANE));
    let mut shuffled_labels = Vec::with_capacity(count);
    for (row, &src) in order.iter().enumerate() {
        let raw = &bytes[src * 3 * PLANE..(src + 1) * 3 * PLANE];
        for (j, &b) in raw.iter().enumerate() {
            pixels[[row, j]] = cast::<T>(f64::from(b) / 255.0);
        }
        shuffled_labels.push(labels[src]);
    }
    Dataset::new(SIZE, SIZE, 3, num_classes, pixels, shuffled_labels)
        .expect("generator keeps invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_are_deterministic_and_well_formed() {
        let a = digits::<f64>(3, 7);
        let b = digits::<f64>(3, 7);
        assert_eq!(a.len(), 30);
        assert_eq!(a.pixels(), b.pixels());
        assert_eq!(a.labels(), b.labels());
        let mut counts = [0usize; 10];
        for &l in a.labels() {
            counts[l as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == 3));
        let c = digits::<f64>(3, 8);
        assert_ne!(a.pixels(), c.pixels());
    }

    #[test]
    fn rgb_shapes_have_declared_shape() {
        let ds = rgb_shapes::<f64>(5, 4, 123);
        assert_eq!(ds.len(), 20);
        assert_eq!(ds.width(), 32);
        assert_eq!(ds.channels(), 3);
        assert_eq!(ds.num_classes(), 5);
        assert!(ds.pixels().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
