use crate::frameio::Frame;

/// Single-channel float image with clamped bilinear sampling.
///
/// Sampling coordinates follow the frame convention: pixel `(i, j)` has its
/// center at `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl FloatImage {
    pub fn from_frame(frame: &Frame) -> Self {
        FloatImage {
            width: frame.width,
            height: frame.height,
            data: frame.data.iter().map(|&v| v as f32).collect(),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn sample(&self, x: f32, y: f32) -> f32 {
        let fx = (x - 0.5).clamp(0.0, (self.width - 1) as f32);
        let fy = (y - 0.5).clamp(0.0, (self.height - 1) as f32);
        let x0 = (fx as usize).min(self.width.saturating_sub(2));
        let y0 = (fy as usize).min(self.height.saturating_sub(2));
        let tx = fx - x0 as f32;
        let ty = fy - y0 as f32;
        let i = y0 * self.width + x0;
        let w = self.width;
        let top = self.data[i] + (self.data[i + 1] - self.data[i]) * tx;
        let bot = self.data[i + w] + (self.data[i + w + 1] - self.data[i + w]) * tx;
        top + (bot - top) * ty
    }

    /// Appends the `(2 * half + 1)^2` bilinear samples of the square window
    /// centered at `(x, y)` to `out`, row by row.
    pub fn patch(&self, x: f32, y: f32, half: i32, out: &mut Vec<f32>) {
        let fx = x - 0.5 - half as f32;
        let fy = y - 0.5 - half as f32;
        let side = 2 * half + 1;
        let interior = fx >= 0.0
            && fy >= 0.0
            && fx + (side as f32) < (self.width - 1) as f32
            && fy + (side as f32) < (self.height - 1) as f32;
        if !interior {
            for j in -half..=half {
                for i in -half..=half {
                    out.push(self.sample(x + i as f32, y + j as f32));
                }
            }
            return;
        }
        let (x0, y0) = (fx as usize, fy as usize);
        let (tx, ty) = (fx - x0 as f32, fy - y0 as f32);
        let w00 = (1.0 - tx) * (1.0 - ty);
        let w10 = tx * (1.0 - ty);
        let w01 = (1.0 - tx) * ty;
        let w11 = tx * ty;
        let w = self.width;
        for j in 0..side as usize {
            let row = (y0 + j) * w + x0;
            let top = &self.data[row..row + side as usize + 1];
            let bot = &self.data[row + w..row + w + side as usize + 1];
            for i in 0..side as usize {
                out.push(w00 * top[i] + w10 * top[i + 1] + w01 * bot[i] + w11 * bot[i + 1]);
            }
        }
    }

    /// Central-difference gradients with replicated borders.
    pub fn gradients(&self) -> (FloatImage, FloatImage) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0f32; w * h];
        let mut gy = vec![0.0f32; w * h];
        for y in 0..h {
            let ym = y.saturating_sub(1);
            let yp = (y + 1).min(h - 1);
            for x in 0..w {
                let xm = x.saturating_sub(1);
                let xp = (x + 1).min(w - 1);
                gx[y * w + x] = 0.5 * (self.at(xp, y) - self.at(xm, y));
                gy[y * w + x] = 0.5 * (self.at(x, yp) - self.at(x, ym));
            }
        }
        (
            FloatImage {
                width: w,
                height: h,
                data: gx,
            },
            FloatImage {
                width: w,
                height: h,
                data: gy,
            },
        )
    }

    /// Half-resolution image: [1 2 1] smoothing then 2x2 block averaging, so a
    /// level-`k+1` pixel center sits at half the level-`k` coordinates.
    pub fn downsample(&self) -> FloatImage {
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0f32; w * h];
        for y in 0..h {
            for x in 0..w {
                let l = self.at(x.saturating_sub(1), y);
                let r = self.at((x + 1).min(w - 1), y);
                tmp[y * w + x] = 0.25 * l + 0.5 * self.at(x, y) + 0.25 * r;
            }
        }
        let mut smooth = vec![0.0f32; w * h];
        for y in 0..h {
            let ym = y.saturating_sub(1);
            let yp = (y + 1).min(h - 1);
            for x in 0..w {
                smooth[y * w + x] =
                    0.25 * tmp[ym * w + x] + 0.5 * tmp[y * w + x] + 0.25 * tmp[yp * w + x];
            }
        }
        let (nw, nh) = (w / 2, h / 2);
        let mut out = vec![0.0f32; nw * nh];
        for y in 0..nh {
            for x in 0..nw {
                let i = 2 * y * w + 2 * x;
                out[y * nw + x] =
                    0.25 * (smooth[i] + smooth[i + 1] + smooth[i + w] + smooth[i + w + 1]);
            }
        }
        FloatImage {
            width: nw,
            height: nh,
            data: out,
        }
    }
}

/// Pyramid level with its precomputed gradients.
#[derive(Debug, Clone)]
pub struct Level {
    pub image: FloatImage,
    pub grad_x: FloatImage,
    pub grad_y: FloatImage,
}

/// Coarse-to-fine image pyramid; level 0 is full resolution.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<Level>,
}

impl Pyramid {
    pub fn build(frame: &Frame, max_levels: usize) -> Self {
        let mut levels = Vec::with_capacity(max_levels);
        let mut img = FloatImage::from_frame(frame);
        for l in 0..max_levels.max(1) {
            if l > 0 {
                if img.width < 32 || img.height < 32 {
                    break;
                }
                img = img.downsample();
            }
            let (grad_x, grad_y) = img.gradients();
            levels.push(Level {
                image: img.clone(),
                grad_x,
                grad_y,
            });
        }
        Pyramid { levels }
    }

    pub fn width(&self) -> usize {
        self.levels[0].image.width
    }

    pub fn height(&self) -> usize {
        self.levels[0].image.height
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patch_matches_pointwise_sampling() {
        let data: Vec<u8> = (0..40 * 30).map(|i| ((i * 37) % 251) as u8).collect();
        let img = FloatImage::from_frame(&Frame::new(40, 30, data));
        for &(x, y) in &[(20.3f32, 14.8f32), (2.0, 3.0), (38.9, 29.5)] {
            let mut got = Vec::new();
            img.patch(x, y, 3, &mut got);
            let mut k = 0;
            for j in -3..=3 {
                for i in -3..=3 {
                    let want = img.sample(x + i as f32, y + j as f32);
                    assert!((got[k] - want).abs() < 1e-3, "{x},{y} {i},{j}");
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn bilinear_hits_pixel_centers() {
        let f = Frame::new(3, 2, vec![0, 10, 20, 30, 40, 50]);
        let img = FloatImage::from_frame(&f);
        assert_eq!(img.sample(1.5, 0.5), 10.0);
        assert_eq!(img.sample(2.0, 0.5), 15.0);
        assert_eq!(img.sample(1.5, 1.0), 25.0);
        // clamped outside
        assert_eq!(img.sample(-4.0, 0.5), 0.0);
    }

    #[test]
    fn pyramid_halves() {
        let f = Frame::filled(160, 120, 7);
        let p = Pyramid::build(&f, 3);
        assert_eq!(p.levels.len(), 3);
        assert_eq!((p.levels[2].image.width, p.levels[2].image.height), (40, 30));
        assert!(p.levels[2].image.data.iter().all(|&v| (v - 7.0).abs() < 1e-5));
    }
}
