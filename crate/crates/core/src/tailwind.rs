//! Tailwind 3.4 default theme values shared by the generator and the
//! class lexer.

use crate::figma::Rgba;

/// Spacing scale steps with their size in px (1 step = 0.25rem = 4px).
pub const SPACING: &[(&str, f64)] = &[
    ("0", 0.0),
    ("px", 1.0),
    ("0.5", 2.0),
    ("1", 4.0),
    ("1.5", 6.0),
    ("2", 8.0),
    ("2.5", 10.0),
    ("3", 12.0),
    ("3.5", 14.0),
    ("4", 16.0),
    ("5", 20.0),
    ("6", 24.0),
    ("7", 28.0),
    ("8", 32.0),
    ("9", 36.0),
    ("10", 40.0),
    ("11", 44.0),
    ("12", 48.0),
    ("14", 56.0),
    ("16", 64.0),
    ("20", 80.0),
    ("24", 96.0),
    ("28", 112.0),
    ("32", 128.0),
    ("36", 144.0),
    ("40", 160.0),
    ("44", 176.0),
    ("48", 192.0),
    ("52", 208.0),
    ("56", 224.0),
    ("60", 240.0),
    ("64", 256.0),
    ("72", 288.0),
    ("80", 320.0),
    ("96", 384.0),
];

pub const FONT_SIZES: &[(&str, f64)] = &[
    ("xs", 12.0),
    ("sm", 14.0),
    ("base", 16.0),
    ("lg", 18.0),
    ("xl", 20.0),
    ("2xl", 24.0),
    ("3xl", 30.0),
    ("4xl", 36.0),
    ("5xl", 48.0),
    ("6xl", 60.0),
    ("7xl", 72.0),
    ("8xl", 96.0),
    ("9xl", 128.0),
];

pub const FONT_WEIGHTS: &[(&str, u32)] = &[
    ("thin", 100),
    ("extralight", 200),
    ("light", 300),
    ("normal", 400),
    ("medium", 500),
    ("semibold", 600),
    ("bold", 700),
    ("extrabold", 800),
    ("black", 900),
];

/// `rounded` suffixes; the bare `rounded` is 4px.
pub const RADII: &[(&str, f64)] = &[("none", 0.0), ("sm", 2.0), ("", 4.0), ("md", 6.0), ("lg", 8.0), ("xl", 12.0), ("2xl", 16.0), ("3xl", 24.0)];

/// `border` widths; the bare `border` is 1px.
pub const BORDER_WIDTHS: &[(&str, f64)] = &[("0", 0.0), ("", 1.0), ("2", 2.0), ("4", 4.0), ("8", 8.0)];

/// `leading-N` steps in px.
pub const LEADING: &[(&str, f64)] =
    &[("3", 12.0), ("4", 16.0), ("5", 20.0), ("6", 24.0), ("7", 28.0), ("8", 32.0), ("9", 36.0), ("10", 40.0)];

/// Named `max-w-*` sizes in px.
pub const MAX_WIDTHS: &[(&str, f64)] = &[
    ("xs", 320.0),
    ("sm", 384.0),
    ("md", 448.0),
    ("lg", 512.0),
    ("xl", 576.0),
    ("2xl", 672.0),
    ("3xl", 768.0),
    ("4xl", 896.0),
    ("5xl", 1024.0),
    ("6xl", 1152.0),
    ("7xl", 1280.0),
];

/// Responsive breakpoints (min-width, px).
pub const BREAKPOINTS: &[(&str, f64)] = &[("sm", 640.0), ("md", 768.0), ("lg", 1024.0), ("xl", 1280.0), ("2xl", 1536.0)];

/// Fractions accepted by sizing and inset utilities.
pub const FRACTIONS: &[(u32, u32)] = &[
    (1, 2),
    (1, 3),
    (2, 3),
    (1, 4),
    (2, 4),
    (3, 4),
    (1, 5),
    (2, 5),
    (3, 5),
    (4, 5),
    (1, 6),
    (2, 6),
    (3, 6),
    (4, 6),
    (5, 6),
    (1, 12),
    (2, 12),
    (3, 12),
    (4, 12),
    (5, 12),
    (6, 12),
    (7, 12),
    (8, 12),
    (9, 12),
    (10, 12),
    (11, 12),
];

pub const SHADES: &[&str] = &["50", "100", "200", "300", "400", "500", "600", "700", "800", "900", "950"];

/// Colour families in theme order, 11 shades each (50..950).
pub const PALETTE: &[(&str, [u32; 11])] = &[
    ("slate", [0xf8fafc, 0xf1f5f9, 0xe2e8f0, 0xcbd5e1, 0x94a3b8, 0x64748b, 0x475569, 0x334155, 0x1e293b, 0x0f172a, 0x020617]),
    ("gray", [0xf9fafb, 0xf3f4f6, 0xe5e7eb, 0xd1d5db, 0x9ca3af, 0x6b7280, 0x4b5563, 0x374151, 0x1f2937, 0x111827, 0x030712]),
    ("zinc", [0xfafafa, 0xf4f4f5, 0xe4e4e7, 0xd4d4d8, 0xa1a1aa, 0x71717a, 0x52525b, 0x3f3f46, 0x27272a, 0x18181b, 0x09090b]),
    ("neutral", [0xfafafa, 0xf5f5f5, 0xe5e5e5, 0xd4d4d4, 0xa3a3a3, 0x737373, 0x525252, 0x404040, 0x262626, 0x171717, 0x0a0a0a]),
    ("stone", [0xfafaf9, 0xf5f5f4, 0xe7e5e4, 0xd6d3d1, 0xa8a29e, 0x78716c, 0x57534e, 0x44403c, 0x292524, 0x1c1917, 0x0c0a09]),
    ("red", [0xfef2f2, 0xfee2e2, 0xfecaca, 0xfca5a5, 0xf87171, 0xef4444, 0xdc2626, 0xb91c1c, 0x991b1b, 0x7f1d1d, 0x450a0a]),
    ("orange", [0xfff7ed, 0xffedd5, 0xfed7aa, 0xfdba74, 0xfb923c, 0xf97316, 0xea580c, 0xc2410c, 0x9a3412, 0x7c2d12, 0x431407]),
    ("amber", [0xfffbeb, 0xfef3c7, 0xfde68a, 0xfcd34d, 0xfbbf24, 0xf59e0b, 0xd97706, 0xb45309, 0x92400e, 0x78350f, 0x451a03]),
    ("yellow", [0xfefce8, 0xfef9c3, 0xfef08a, 0xfde047, 0xfacc15, 0xeab308, 0xca8a04, 0xa16207, 0x854d0e, 0x713f12, 0x422006]),
    ("lime", [0xf7fee7, 0xecfccb, 0xd9f99d, 0xbef264, 0xa3e635, 0x84cc16, 0x65a30d, 0x4d7c0f, 0x3f6212, 0x365314, 0x1a2e05]),
    ("green", [0xf0fdf4, 0xdcfce7, 0xbbf7d0, 0x86efac, 0x4ade80, 0x22c55e, 0x16a34a, 0x15803d, 0x166534, 0x14532d, 0x052e16]),
    ("emerald", [0xecfdf5, 0xd1fae5, 0xa7f3d0, 0x6ee7b7, 0x34d399, 0x10b981, 0x059669, 0x047857, 0x065f46, 0x064e3b, 0x022c22]),
    ("teal", [0xf0fdfa, 0xccfbf1, 0x99f6e4, 0x5eead4, 0x2dd4bf, 0x14b8a6, 0x0d9488, 0x0f766e, 0x115e59, 0x134e4a, 0x042f2e]),
    ("cyan", [0xecfeff, 0xcffafe, 0xa5f3fc, 0x67e8f9, 0x22d3ee, 0x06b6d4, 0x0891b2, 0x0e7490, 0x155e75, 0x164e63, 0x083344]),
    ("sky", [0xf0f9ff, 0xe0f2fe, 0xbae6fd, 0x7dd3fc, 0x38bdf8, 0x0ea5e9, 0x0284c7, 0x0369a1, 0x075985, 0x0c4a6e, 0x082f49]),
    ("blue", [0xeff6ff, 0xdbeafe, 0xbfdbfe, 0x93c5fd, 0x60a5fa, 0x3b82f6, 0x2563eb, 0x1d4ed8, 0x1e40af, 0x1e3a8a, 0x172554]),
    ("indigo", [0xeef2ff, 0xe0e7ff, 0xc7d2fe, 0xa5b4fc, 0x818cf8, 0x6366f1, 0x4f46e5, 0x4338ca, 0x3730a3, 0x312e81, 0x1e1b4b]),
    ("violet", [0xf5f3ff, 0xede9fe, 0xddd6fe, 0xc4b5fd, 0xa78bfa, 0x8b5cf6, 0x7c3aed, 0x6d28d9, 0x5b21b6, 0x4c1d95, 0x2e1065]),
    ("purple", [0xfaf5ff, 0xf3e8ff, 0xe9d5ff, 0xd8b4fe, 0xc084fc, 0xa855f7, 0x9333ea, 0x7e22ce, 0x6b21a8, 0x581c87, 0x3b0764]),
    ("fuchsia", [0xfdf4ff, 0xfae8ff, 0xf5d0fe, 0xf0abfc, 0xe879f9, 0xd946ef, 0xc026d3, 0xa21caf, 0x86198f, 0x701a75, 0x4a044e]),
    ("pink", [0xfdf2f8, 0xfce7f3, 0xfbcfe8, 0xf9a8d4, 0xf472b6, 0xec4899, 0xdb2777, 0xbe185d, 0x9d174d, 0x831843, 0x500724]),
    ("rose", [0xfff1f2, 0xffe4e6, 0xfecdd3, 0xfda4af, 0xfb7185, 0xf43f5e, 0xe11d48, 0xbe123c, 0x9f1239, 0x881337, 0x4c0519]),
];

/// Every palette entry as (name, rgb8), `black` and `white` first.
pub fn palette_entries() -> impl Iterator<Item = (String, [u8; 3])> {
    let bw = [("black".to_string(), [0, 0, 0]), ("white".to_string(), [255, 255, 255])];
    bw.into_iter().chain(PALETTE.iter().flat_map(|(family, hexes)| {
        hexes.iter().zip(SHADES).map(move |(h, s)| (format!("{family}-{s}"), [(h >> 16) as u8, (h >> 8) as u8, *h as u8]))
    }))
}

/// Nearest palette colour by Euclidean RGB distance (0-255 space). Ties
/// keep the earlier entry. Returns the name and its distance.
pub fn nearest_palette(c: Rgba) -> (String, f64) {
    let [r, g, b] = c.to_rgb8();
    let mut best = (String::new(), f64::INFINITY);
    for (name, [pr, pg, pb]) in palette_entries() {
        let d = ((r as f64 - pr as f64).powi(2) + (g as f64 - pg as f64).powi(2) + (b as f64 - pb as f64).powi(2)).sqrt();
        if d < best.1 {
            best = (name, d);
        }
    }
    best
}

pub fn is_palette_color(name: &str) -> bool {
    matches!(name, "black" | "white" | "transparent" | "current" | "inherit")
        || name
            .rsplit_once('-')
            .is_some_and(|(family, shade)| PALETTE.iter().any(|(f, _)| *f == family) && SHADES.contains(&shade))
}

/// Formats px values with at most three decimals and no trailing zeros.
pub fn fmt_px(v: f64) -> String {
    crate::refine::fmt_num(v)
}

/// Nearest entry of a (name, px) scale within `tolerance`; ties go to the
/// smaller value.
pub fn snap_scale<'a>(scale: &[(&'a str, f64)], px: f64, tolerance: f64) -> Option<&'a str> {
    let mut best: Option<(&str, f64, f64)> = None;
    for &(name, v) in scale {
        let d = (v - px).abs();
        if d <= tolerance + 1e-9 && best.is_none_or(|(_, bd, bv)| d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && v < bv)) {
            best = Some((name, d, v));
        }
    }
    best.map(|(n, _, _)| n)
}
