//! Binary PGM (P5) encoding.

pub fn encode(width: usize, height: usize, maxval: u8, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Number of remaining labels per pixel; the maximum value is the largest
/// label count.
pub fn remaining_map(rows: usize, cols: usize, labels: &[usize], remaining: &[usize]) -> Vec<u8> {
    let maxval = labels.iter().copied().max().unwrap_or(1).clamp(1, 255) as u8;
    let pixels: Vec<u8> = remaining.iter().map(|&k| k.min(255) as u8).collect();
    encode(cols, rows, maxval, &pixels)
}

/// White where a single label remains, black elsewhere.
pub fn unique_map(rows: usize, cols: usize, remaining: &[usize]) -> Vec<u8> {
    let pixels: Vec<u8> = remaining
        .iter()
        .map(|&k| if k == 1 { 255 } else { 0 })
        .collect();
    encode(cols, rows, 255, &pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload() {
        let img = encode(3, 2, 7, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(&img[..11], b"P5\n3 2\n7\n\x00\x01");
        assert_eq!(img.len(), 9 + 6);
    }

    #[test]
    fn checkerboard() {
        let remaining: Vec<usize> = (0..4)
            .map(|v| if (v / 2 + v % 2) % 2 == 0 { 1 } else { 3 })
            .collect();
        assert_eq!(
            remaining_map(2, 2, &[3; 4], &remaining),
            b"P5\n2 2\n3\n\x01\x03\x03\x01".to_vec()
        );
        assert_eq!(
            unique_map(2, 2, &remaining),
            b"P5\n2 2\n255\n\xff\x00\x00\xff".to_vec()
        );
    }
}
