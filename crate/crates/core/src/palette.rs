//! Fixed colormap anchor tables and color-string validation.

/// Eight evenly spaced RGB anchors per sequential/diverging colormap.
pub type Anchors = [[f64; 3]; 8];

pub const VIRIDIS: Anchors = [
    [0.2670, 0.0049, 0.3294],
    [0.2752, 0.1949, 0.4960],
    [0.2124, 0.3597, 0.5517],
    [0.1534, 0.4970, 0.5577],
    [0.1223, 0.6332, 0.5304],
    [0.2889, 0.7584, 0.4284],
    [0.6266, 0.8546, 0.2234],
    [0.9932, 0.9062, 0.1439],
];

const INFERNO: Anchors = [
    [0.0015, 0.0005, 0.0139],
    [0.1558, 0.0446, 0.3253],
    [0.3977, 0.0833, 0.4332],
    [0.6217, 0.1642, 0.3888],
    [0.8323, 0.2839, 0.2574],
    [0.9613, 0.4887, 0.0843],
    [0.9812, 0.7591, 0.1569],
    [0.9884, 0.9984, 0.6449],
];

const MAGMA: Anchors = [
    [0.0015, 0.0005, 0.0139],
    [0.1351, 0.0684, 0.3150],
    [0.3721, 0.0928, 0.4991],
    [0.5945, 0.1757, 0.5012],
    [0.8289, 0.2622, 0.4306],
    [0.9734, 0.4615, 0.3620],
    [0.9973, 0.7335, 0.5052],
    [0.9871, 0.9914, 0.7495],
];

const PLASMA: Anchors = [
    [0.0504, 0.0298, 0.5280],
    [0.3251, 0.0069, 0.6395],
    [0.5462, 0.0390, 0.6470],
    [0.7234, 0.1962, 0.5390],
    [0.8598, 0.3606, 0.4069],
    [0.9555, 0.5331, 0.2855],
    [0.9945, 0.7409, 0.1663],
    [0.9400, 0.9752, 0.1313],
];

const TURBO: Anchors = [
    [0.1900, 0.0718, 0.2322],
    [0.2770, 0.4615, 0.9331],
    [0.1074, 0.8138, 0.8348],
    [0.3813, 0.9891, 0.4239],
    [0.8233, 0.9125, 0.2066],
    [0.9967, 0.6098, 0.1784],
    [0.8538, 0.2217, 0.0268],
    [0.4796, 0.0158, 0.0106],
];

const GRAYSCALE: Anchors = [
    [0.0, 0.0, 0.0],
    [0.1412, 0.1412, 0.1412],
    [0.2863, 0.2863, 0.2863],
    [0.4275, 0.4275, 0.4275],
    [0.5725, 0.5725, 0.5725],
    [0.7137, 0.7137, 0.7137],
    [0.8588, 0.8588, 0.8588],
    [1.0, 1.0, 1.0],
];

const GREENS: Anchors = [
    [0.9686, 0.9882, 0.9608],
    [0.8828, 0.9547, 0.8622],
    [0.7371, 0.8955, 0.7108],
    [0.5573, 0.8164, 0.5470],
    [0.3388, 0.7117, 0.4058],
    [0.1714, 0.5815, 0.2979],
    [0.0178, 0.4427, 0.1852],
    [0.0, 0.2667, 0.1059],
];

const RDYLBU: Anchors = [
    [0.6471, 0.0, 0.1490],
    [0.8900, 0.2867, 0.1982],
    [0.9873, 0.6474, 0.3642],
    [0.9972, 0.9118, 0.6153],
    [0.9118, 0.9659, 0.9112],
    [0.6410, 0.8273, 0.9008],
    [0.3465, 0.5493, 0.7527],
    [0.1922, 0.2118, 0.5843],
];

pub const SEQUENTIAL: &[(&str, &Anchors)] = &[
    ("viridis", &VIRIDIS),
    ("inferno", &INFERNO),
    ("magma", &MAGMA),
    ("plasma", &PLASMA),
    ("turbo", &TURBO),
    ("grayscale", &GRAYSCALE),
    ("Greens", &GREENS),
    ("RdYlBu", &RDYLBU),
];

/// Categorical scheme used for discrete color encodings.
pub const CATEGORY10: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub const CATEGORICAL_NAME: &str = "category10";

/// Case-insensitive lookup of a sequential colormap.
pub fn anchors(name: &str) -> Option<&'static Anchors> {
    SEQUENTIAL
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, a)| *a)
}

/// Names accepted wherever a palette or color scheme is expected.
pub fn is_palette(name: &str) -> bool {
    anchors(name).is_some() || name.eq_ignore_ascii_case(CATEGORICAL_NAME)
}

pub fn palette_names() -> Vec<&'static str> {
    SEQUENTIAL
        .iter()
        .map(|(n, _)| *n)
        .chain(std::iter::once(CATEGORICAL_NAME))
        .collect()
}

const NAMED_COLORS: &[&str] = &[
    "aqua",
    "black",
    "blue",
    "brown",
    "coral",
    "crimson",
    "cyan",
    "darkgray",
    "darkgrey",
    "fuchsia",
    "gold",
    "gray",
    "green",
    "grey",
    "indigo",
    "lightgray",
    "lightgrey",
    "lime",
    "magenta",
    "maroon",
    "navy",
    "olive",
    "orange",
    "pink",
    "purple",
    "red",
    "salmon",
    "silver",
    "steelblue",
    "teal",
    "tomato",
    "turquoise",
    "violet",
    "white",
    "yellow",
];

/// `#rgb`, `#rrggbb`, `#rrggbbaa`, or a common CSS color name.
pub fn is_color(s: &str) -> bool {
    if let Some(hex) = s.strip_prefix('#') {
        return matches!(hex.len(), 3 | 6 | 8) && hex.bytes().all(|b| b.is_ascii_hexdigit());
    }
    NAMED_COLORS.contains(&s.to_ascii_lowercase().as_str())
}

/// Linear interpolation through the anchors at `t` in [0, 1].
pub fn sample(anchors: &Anchors, t: f64) -> [f64; 3] {
    let t = t.clamp(0.0, 1.0) * 7.0;
    let i = (t.floor() as usize).min(6);
    let f = t - i as f64;
    let (a, b) = (anchors[i], anchors[i + 1]);
    [0, 1, 2].map(|k| a[k] + (b[k] - a[k]) * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert!(is_palette("viridis"));
        assert!(is_palette("greens"));
        assert!(is_palette("category10"));
        assert!(!is_palette("rainbow"));
        assert!(is_color("#1f77b4"));
        assert!(is_color("#fff"));
        assert!(is_color("Pink"));
        assert!(!is_color("#12345"));
        assert!(!is_color("blurple"));
    }

    #[test]
    fn sample_hits_anchors() {
        assert_eq!(sample(&VIRIDIS, 0.0), VIRIDIS[0]);
        assert_eq!(sample(&VIRIDIS, 1.0), VIRIDIS[7]);
        let mid = sample(&GRAYSCALE, 0.5);
        assert!((mid[0] - 0.5).abs() < 1e-9);
    }
}
