//! Geometry of the preview strip shown on result cards.
//!
//! The first [`MAX_PAGES`] pages are scaled to [`TILE_WIDTH`] px wide,
//! placed left to right with a [`SEPARATOR`] px white gap, and every tile is
//! padded with white to the height of the tallest one.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::time::Timestamp;

pub const MAX_PAGES: usize = 8;
pub const TILE_WIDTH: u32 = 240;
pub const SEPARATOR: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub page: usize,
    pub x: u32,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripLayout {
    pub tiles: Vec<Tile>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyInput;

impl fmt::Display for EmptyInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no pages to compose")
    }
}

impl core::error::Error for EmptyInput {}

/// Tile height after scaling a `width`×`height` page to the tile width,
/// rounded to the nearest pixel and at least 1.
pub fn scaled_height(width: u32, height: u32) -> u32 {
    if width == 0 {
        return 1;
    }
    let h = (u64::from(height) * u64::from(TILE_WIDTH) + u64::from(width) / 2) / u64::from(width);
    h.max(1) as u32
}

impl StripLayout {
    /// Layout for pages of the given `(width, height)` sizes.
    pub fn for_pages(page_sizes: &[(u32, u32)]) -> Result<StripLayout, EmptyInput> {
        if page_sizes.is_empty() {
            return Err(EmptyInput);
        }
        let mut tiles = Vec::with_capacity(MAX_PAGES);
        let mut x = 0;
        for (page, &(w, h)) in page_sizes.iter().take(MAX_PAGES).enumerate() {
            if page > 0 {
                x += SEPARATOR;
            }
            let height = scaled_height(w, h);
            tiles.push(Tile {
                page,
                x,
                width: TILE_WIDTH,
                height,
            });
            x += TILE_WIDTH;
        }
        let height = tiles.iter().map(|t| t.height).max().unwrap_or(1);
        Ok(StripLayout {
            tiles,
            width: x,
            height,
        })
    }
}

/// Width of a strip built from `pages` pages.
pub fn strip_width(pages: usize) -> u32 {
    let n = pages.min(MAX_PAGES) as u32;
    n * TILE_WIDTH + n.saturating_sub(1) * SEPARATOR
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum ThumbnailStatus {
    Pending,
    Done { generated_at: Timestamp },
    Failed { reason: String },
}

impl ThumbnailStatus {
    pub fn is_done(&self) -> bool {
        matches!(self, ThumbnailStatus::Done { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_page() {
        let l = StripLayout::for_pages(&[(240, 320)]).unwrap();
        assert_eq!((l.width, l.height), (240, 320));
    }

    #[test]
    fn three_pages() {
        let l = StripLayout::for_pages(&[(240, 320); 3]).unwrap();
        assert_eq!((l.width, l.height), (724, 320));
        assert_eq!(
            l.tiles.iter().map(|t| t.x).collect::<Vec<_>>(),
            [0, 242, 484]
        );
    }

    #[test]
    fn twelve_pages_keep_eight() {
        let l = StripLayout::for_pages(&[(240, 320); 12]).unwrap();
        assert_eq!(l.width, 1934);
        assert_eq!(l.tiles.len(), 8);
    }

    #[test]
    fn mixed_sizes_pad_to_tallest() {
        let l = StripLayout::for_pages(&[(480, 640), (240, 100), (120, 200)]).unwrap();
        assert_eq!(
            l.tiles.iter().map(|t| t.height).collect::<Vec<_>>(),
            [320, 100, 400]
        );
        assert_eq!(l.height, 400);
    }

    #[test]
    fn empty() {
        assert_eq!(StripLayout::for_pages(&[]), Err(EmptyInput));
    }

    #[test]
    fn width_rule() {
        assert_eq!(strip_width(1), 240);
        assert_eq!(strip_width(3), 724);
        assert_eq!(strip_width(12), 1934);
        for n in 1..20 {
            assert_eq!(
                StripLayout::for_pages(&vec![(240, 300); n]).unwrap().width,
                strip_width(n)
            );
        }
    }
}
