//! Preview strips: rasterize a PDF through an external tool, tile the first
//! pages, store the PNG.
//!
//! The rasterizer is any program honouring
//! `<tool> --png --width 240 --pages 1-8 <in.pdf> <outdir>`: it writes one
//! PNG per page into `<outdir>` and exits 0. The command is a template
//! with `{input}` and `{outdir}` placeholders.

use std::collections::{BTreeSet, VecDeque};
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use image::imageops::{self, FilterType};
use image::{DynamicImage, ImageFormat, Rgba, RgbaImage};
use portal_core::strip::{EmptyInput, StripLayout, TILE_WIDTH};
use portal_core::{ArxivId, ThumbnailStatus, Timestamp};

use crate::persist;
use crate::state::DataDir;

#[derive(Debug, thiserror::Error)]
pub enum ThumbError {
    #[error("fetching the PDF failed: {0}")]
    FetchFailed(String),
    #[error("rasterizer failed with exit code {0:?}")]
    RasterizerFailed(Option<i32>),
    #[error("rasterizer could not be started: {0}")]
    RasterizerMissing(std::io::Error),
    #[error("rasterizer produced no pages")]
    NoPages,
    #[error("page image unreadable: {0}")]
    BadPage(String),
    #[error(transparent)]
    Empty(#[from] EmptyInput),
    #[error("storing the strip failed: {0}")]
    StorageFailure(String),
}

impl ThumbError {
    /// Short reason recorded in [`ThumbnailStatus::Failed`].
    pub fn reason(&self) -> &'static str {
        match self {
            ThumbError::FetchFailed(_) => "fetch",
            ThumbError::RasterizerFailed(_)
            | ThumbError::RasterizerMissing(_)
            | ThumbError::NoPages => "rasterizer",
            ThumbError::BadPage(_) | ThumbError::Empty(_) => "compose",
            ThumbError::StorageFailure(_) => "storage",
        }
    }
}

/// Tiles the first pages into one image; see [`StripLayout`].
pub fn compose_strip_image(pages: &[DynamicImage]) -> Result<RgbaImage, EmptyInput> {
    let sizes: Vec<(u32, u32)> = pages.iter().map(|p| (p.width(), p.height())).collect();
    let layout = StripLayout::for_pages(&sizes)?;
    let mut strip = RgbaImage::from_pixel(layout.width, layout.height, Rgba([255, 255, 255, 255]));
    for tile in &layout.tiles {
        let page = pages[tile.page].to_rgba8();
        let scaled = if page.width() == TILE_WIDTH && page.height() == tile.height {
            page
        } else {
            imageops::resize(&page, TILE_WIDTH, tile.height, FilterType::Triangle)
        };
        imageops::overlay(&mut strip, &scaled, i64::from(tile.x), 0);
    }
    Ok(strip)
}

/// [`compose_strip_image`] encoded as PNG.
pub fn compose_strip(pages: &[DynamicImage]) -> Result<Vec<u8>, EmptyInput> {
    let strip = compose_strip_image(pages)?;
    let mut png = Vec::new();
    strip
        .write_to(&mut Cursor::new(&mut png), ImageFormat::Png)
        .expect("encoding to memory cannot fail");
    Ok(png)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdfSource {
    File(PathBuf),
    Url(String),
}

impl PdfSource {
    fn fetch(&self) -> Result<Vec<u8>, ThumbError> {
        match self {
            PdfSource::File(path) => std::fs::read(path)
                .map_err(|e| ThumbError::FetchFailed(format!("{}: {e}", path.display()))),
            PdfSource::Url(url) => {
                let response = ureq::get(url)
                    .call()
                    .map_err(|e| ThumbError::FetchFailed(e.to_string()))?;
                let mut bytes = Vec::new();
                std::io::Read::read_to_end(&mut response.into_reader(), &mut bytes)
                    .map_err(|e| ThumbError::FetchFailed(e.to_string()))?;
                Ok(bytes)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterizerCommand {
    template: Vec<String>,
}

impl RasterizerCommand {
    pub fn from_template(template: &str) -> Self {
        RasterizerCommand {
            template: template.split_whitespace().map(str::to_owned).collect(),
        }
    }

    fn run(&self, input: &Path, outdir: &Path) -> Result<(), ThumbError> {
        let args: Vec<String> = self
            .template
            .iter()
            .map(|a| {
                a.replace("{input}", &input.to_string_lossy())
                    .replace("{outdir}", &outdir.to_string_lossy())
            })
            .collect();
        let (program, rest) = args
            .split_first()
            .ok_or(ThumbError::RasterizerFailed(None))?;
        let output = Command::new(program)
            .args(rest)
            .output()
            .map_err(ThumbError::RasterizerMissing)?;
        if output.status.success() {
            Ok(())
        } else {
            tracing::debug!(stderr = %String::from_utf8_lossy(&output.stderr), "rasterizer failed");
            Err(ThumbError::RasterizerFailed(output.status.code()))
        }
    }
}

/// Page images in `dir` ordered by the page number embedded in the file
/// name (`page-2.png` before `page-10.png`).
fn page_files(dir: &Path) -> Result<Vec<PathBuf>, ThumbError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ThumbError::BadPage(e.to_string()))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort_by_key(|p| {
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let digits: String = stem
            .chars()
            .rev()
            .take_while(char::is_ascii_digit)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        (digits.parse::<u64>().unwrap_or(u64::MAX), stem)
    });
    Ok(files)
}

pub struct ThumbnailGenerator {
    pub dir: DataDir,
    pub rasterizer: RasterizerCommand,
}

static WORK_COUNTER: AtomicU64 = AtomicU64::new(0);

struct WorkDir(PathBuf);

impl Drop for WorkDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

impl ThumbnailGenerator {
    pub fn new(dir: DataDir, rasterizer: RasterizerCommand) -> Self {
        ThumbnailGenerator { dir, rasterizer }
    }

    /// Produces the strip for `id` unless `current` is already Done with
    /// its file in place. Failures are captured in the returned status.
    pub fn generate(
        &self,
        id: &ArxivId,
        source: &PdfSource,
        current: &ThumbnailStatus,
        now: Timestamp,
    ) -> ThumbnailStatus {
        if current.is_done() && self.dir.thumb_file(id).is_file() {
            return current.clone();
        }
        match self.try_generate(id, source) {
            Ok(()) => ThumbnailStatus::Done { generated_at: now },
            Err(e) => {
                tracing::warn!(arxiv_id = %id, error = %e, "thumbnail generation failed");
                ThumbnailStatus::Failed {
                    reason: e.reason().to_owned(),
                }
            }
        }
    }

    pub fn try_generate(&self, id: &ArxivId, source: &PdfSource) -> Result<(), ThumbError> {
        let pdf = source.fetch()?;
        let n = WORK_COUNTER.fetch_add(1, Ordering::Relaxed);
        let work = WorkDir(self.dir.thumbs_dir().join(".work").join(format!(
            "{}-{}-{n}",
            id.as_str().replace('/', "_"),
            std::process::id()
        )));
        let outdir = work.0.join("pages");
        std::fs::create_dir_all(&outdir).map_err(|e| ThumbError::StorageFailure(e.to_string()))?;
        let input = work.0.join("in.pdf");
        std::fs::write(&input, &pdf).map_err(|e| ThumbError::StorageFailure(e.to_string()))?;

        self.rasterizer.run(&input, &outdir)?;
        let files = page_files(&outdir)?;
        if files.is_empty() {
            return Err(ThumbError::NoPages);
        }
        let pages = files
            .iter()
            .take(portal_core::strip::MAX_PAGES)
            .map(|f| {
                image::open(f).map_err(|e| ThumbError::BadPage(format!("{}: {e}", f.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let png = compose_strip(&pages)?;
        persist::write_atomic(&self.dir.thumb_file(id), &png)
            .map_err(|e| ThumbError::StorageFailure(e.to_string()))
    }

    /// Runs `jobs` on `workers` threads. Later jobs for an identifier that
    /// already has a job are dropped, so no identifier is processed twice
    /// concurrently. Results come back in job order.
    pub fn run_pool(
        &self,
        jobs: Vec<(ArxivId, PdfSource, ThumbnailStatus)>,
        workers: usize,
        now: Timestamp,
    ) -> Vec<(ArxivId, ThumbnailStatus)> {
        let mut seen = BTreeSet::new();
        let queue: VecDeque<(usize, ArxivId, PdfSource, ThumbnailStatus)> = jobs
            .into_iter()
            .filter(|(id, _, _)| seen.insert(id.clone()))
            .enumerate()
            .map(|(i, (id, src, st))| (i, id, src, st))
            .collect();
        let total = queue.len();
        let queue = Mutex::new(queue);
        let results = Mutex::new(Vec::with_capacity(total));
        std::thread::scope(|scope| {
            for _ in 0..workers.clamp(1, total.max(1)) {
                scope.spawn(|| loop {
                    let Some((i, id, source, current)) = queue.lock().unwrap().pop_front() else {
                        break;
                    };
                    let status = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                        self.generate(&id, &source, &current, now)
                    }))
                    .unwrap_or_else(|_| ThumbnailStatus::Failed {
                        reason: "panic".into(),
                    });
                    results.lock().unwrap().push((i, id, status));
                });
            }
        });
        let mut results = results.into_inner().unwrap();
        results.sort_by_key(|(i, _, _)| *i);
        results
            .into_iter()
            .map(|(_, id, status)| (id, status))
            .collect()
    }
}
