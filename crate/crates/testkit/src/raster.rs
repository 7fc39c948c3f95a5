//! A stand-in for the external PDF rasterizer.
//!
//! Fixture "PDFs" are text files starting with `%PDF` whose second line is
//! `pages N`. The fake rasterizer writes N copies of a prepared page image
//! (`page-1.png` … `page-N.png`) and exits 1 for anything else.

use std::path::{Path, PathBuf};

use image::{Rgba, RgbaImage};

pub const PAGE_WIDTH: u32 = 240;
pub const PAGE_HEIGHT: u32 = 320;

pub fn fixture_pdf(pages: usize) -> Vec<u8> {
    format!("%PDF-1.4\npages {pages}\n%%EOF\n").into_bytes()
}

pub fn corrupt_pdf() -> Vec<u8> {
    b"this is not a pdf\x00\xff".to_vec()
}

/// Writes the page image and rasterizer script into `dir` and returns the
/// command template for them.
pub fn install(dir: &Path) -> String {
    std::fs::create_dir_all(dir).unwrap();
    let page = dir.join("page.png");
    let mut img = RgbaImage::from_pixel(PAGE_WIDTH, PAGE_HEIGHT, Rgba([250, 250, 250, 255]));
    for y in (20..PAGE_HEIGHT - 20).step_by(12) {
        for x in 20..PAGE_WIDTH - 20 {
            img.put_pixel(x, y, Rgba([30, 30, 30, 255]));
        }
    }
    img.save(&page).unwrap();
    let script: PathBuf = dir.join("fake-raster.sh");
    std::fs::write(
        &script,
        format!(
            "#!/bin/sh\n\
             set -e\n\
             in=\"$1\"; out=\"$2\"\n\
             head -c 4 \"$in\" | grep -q '^%PDF' || {{ echo 'not a PDF' >&2; exit 1; }}\n\
             n=$(sed -n '2s/^pages //p' \"$in\")\n\
             [ -n \"$n\" ] || exit 1\n\
             i=1\n\
             while [ \"$i\" -le \"$n\" ]; do cp '{}' \"$out/page-$i.png\"; i=$((i+1)); done\n",
            page.display()
        ),
    )
    .unwrap();
    format!("sh {} {{input}} {{outdir}}", script.display())
}
