//! Small separable filters on row-major `f64` grids.

/// Normalized 1-D Gaussian taps with radius `ceil(3 sigma)`.
pub(crate) fn gaussian_taps(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    (-radius..=radius).map(|k| (-((k * k) as f64) / denom).exp()).collect()
}

/// Separable Gaussian blur. Taps falling outside the grid are dropped and the
/// remaining weights renormalized, so constants are preserved up to the border.
pub(crate) fn gaussian_blur(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 || data.is_empty() {
        return data.to_vec();
    }
    let taps = gaussian_taps(sigma);
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (k, &w) in taps.iter().enumerate() {
                let xx = x as isize + k as isize - r;
                if xx >= 0 && (xx as usize) < width {
                    acc += w * row[xx as usize];
                    norm += w;
                }
            }
            tmp[y * width + x] = acc / norm;
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (k, &w) in taps.iter().enumerate() {
                let yy = y as isize + k as isize - r;
                if yy >= 0 && (yy as usize) < height {
                    acc += w * tmp[yy as usize * width + x];
                    norm += w;
                }
            }
            out[y * width + x] = acc / norm;
        }
    }
    out
}

#[inline]
fn clamped(data: &[f64], width: usize, height: usize, x: isize, y: isize) -> f64 {
    let x = x.clamp(0, width as isize - 1) as usize;
    let y = y.clamp(0, height as isize - 1) as usize;
    data[y * width + x]
}

/// Sobel derivatives with replicated borders.
pub(crate) fn sobel(data: &[f64], width: usize, height: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; data.len()];
    let mut gy = vec![0.0; data.len()];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let p = |dx: isize, dy: isize| clamped(data, width, height, x + dx, y + dy);
            let i = y as usize * width + x as usize;
            gx[i] = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            gy[i] = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        }
    }
    (gx, gy)
}

/// Five-point Laplacian with replicated borders.
pub(crate) fn laplacian(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let p = |dx: isize, dy: isize| clamped(data, width, height, x + dx, y + dy);
            out[y as usize * width + x as usize] = p(1, 0) + p(-1, 0) + p(0, 1) + p(0, -1) - 4.0 * p(0, 0);
        }
    }
    out
}
