//! Full-range BT.601 colorspace conversion.
//!
//! The forward matrix is the usual full-range one (luma from 0.299/0.587/0.114,
//! chroma centered on 128 with no headroom scaling). The inverse is the exact
//! algebraic inverse of that matrix, computed from it at compile time rather
//! than written down as rounded constants, so forward-then-inverse error comes
//! only from the byte quantization.

use super::{RgbFrame, Yuv444Frame};

/// Forward matrix rows applied to (R, G, B); chroma rows are offset by +128.
const FWD: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
];

const fn inverse(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det,
        ],
    ]
}

const INV: [[f64; 3]; 3] = inverse(FWD);

/// Round half up, then clamp to the byte range.
#[inline]
fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

#[inline]
pub(crate) fn rgb_to_yuv_triple(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let y = FWD[0][0] * r + FWD[0][1] * g + FWD[0][2] * b;
    let u = 128.0 + FWD[1][0] * r + FWD[1][1] * g + FWD[1][2] * b;
    let v = 128.0 + FWD[2][0] * r + FWD[2][1] * g + FWD[2][2] * b;
    (quantize(y), quantize(u), quantize(v))
}

#[inline]
pub(crate) fn yuv_to_rgb_triple(y: u8, u: u8, v: u8) -> (u8, u8, u8) {
    let y = f64::from(y);
    let u = f64::from(u) - 128.0;
    let v = f64::from(v) - 128.0;
    let r = INV[0][0] * y + INV[0][1] * u + INV[0][2] * v;
    let g = INV[1][0] * y + INV[1][1] * u + INV[1][2] * v;
    let b = INV[2][0] * y + INV[2][1] * u + INV[2][2] * v;
    (quantize(r), quantize(g), quantize(b))
}

/// Converts interleaved RGB to planar YUV444.
pub fn rgb_to_yuv444(frame: &RgbFrame) -> Yuv444Frame {
    let n = frame.width() as usize * frame.height() as usize;
    let mut y = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for px in frame.data().chunks_exact(3) {
        let (yy, uu, vv) = rgb_to_yuv_triple(px[0], px[1], px[2]);
        y.push(yy);
        u.push(uu);
        v.push(vv);
    }
    Yuv444Frame::new(frame.width(), frame.height(), y, u, v)
        .expect("plane sizes follow from input invariants")
}

/// Converts planar YUV444 back to interleaved RGB.
pub fn yuv444_to_rgb(frame: &Yuv444Frame) -> RgbFrame {
    let n = frame.width() as usize * frame.height() as usize;
    let mut data = Vec::with_capacity(3 * n);
    for i in 0..n {
        let (r, g, b) = yuv_to_rgb_triple(frame.y()[i], frame.u()[i], frame.v()[i]);
        data.push(r);
        data.push(g);
        data.push(b);
    }
    RgbFrame::new(frame.width(), frame.height(), data)
        .expect("data size follows from input invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_black_red() {
        assert_eq!(rgb_to_yuv_triple(255, 255, 255), (255, 128, 128));
        assert_eq!(rgb_to_yuv_triple(0, 0, 0), (0, 128, 128));
        assert_eq!(rgb_to_yuv_triple(255, 0, 0), (76, 85, 255));
    }

    #[test]
    fn neutral_chroma_inverts_to_gray() {
        assert_eq!(yuv_to_rgb_triple(255, 128, 128), (255, 255, 255));
        assert_eq!(yuv_to_rgb_triple(0, 128, 128), (0, 0, 0));
        assert_eq!(yuv_to_rgb_triple(77, 128, 128), (77, 77, 77));
    }

    #[test]
    fn inverse_is_algebraic() {
        // FWD * INV must be the identity to near machine precision.
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += FWD[i][k] * INV[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn round_trip_within_two_levels() {
        for r in (0..256).step_by(5) {
            for g in (0..256).step_by(7) {
                for b in (0..256).step_by(11) {
                    let (y, u, v) = rgb_to_yuv_triple(r as u8, g as u8, b as u8);
                    let (r2, g2, b2) = yuv_to_rgb_triple(y, u, v);
                    assert!(
                        (i16::from(r2) - r as i16).abs() <= 2
                            && (i16::from(g2) - g as i16).abs() <= 2
                            && (i16::from(b2) - b as i16).abs() <= 2,
                        "({r},{g},{b}) -> ({y},{u},{v}) -> ({r2},{g2},{b2})"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_conversion_matches_pixel_conversion() {
        let data: Vec<u8> = (0..48).map(|i| (i * 11 + 3) as u8).collect();
        let rgb = RgbFrame::new(4, 4, data).unwrap();
        let yuv = rgb_to_yuv444(&rgb);
        for y in 0..4u32 {
            for x in 0..4u32 {
                let (r, g, b) = rgb.pixel(x, y);
                let i = (y * 4 + x) as usize;
                assert_eq!(
                    (yuv.y()[i], yuv.u()[i], yuv.v()[i]),
                    rgb_to_yuv_triple(r, g, b)
                );
            }
        }
    }
}
