//! Stimulus, fixation and result formats.
//!
//! Rasters are binary or plain PGM only. Convert other formats beforehand,
//! e.g. `convert in.png -colorspace Gray -depth 16 out.pgm`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foa::{Fixation, Scanpath};
use crate::grid::{Grid, ScalarField};
use crate::mass::Frame;
use crate::par;

/// Decoded grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Row-major samples.
    pub samples: Vec<u16>,
}

impl Pgm {
    /// Samples divided by `maxval`, row-major.
    pub fn normalized(&self) -> Vec<f64> {
        let scale = 1.0 / self.maxval as f64;
        self.samples.iter().map(|&s| s as f64 * scale).collect()
    }

    /// As [`Pgm::normalized`]; fails for rasters smaller than a grid allows.
    pub fn to_field(&self) -> Result<ScalarField> {
        ScalarField::from_values(Grid::new(self.width, self.height)?, self.normalized())
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn malformed(&self, reason: impl Into<String>) -> Error {
        Error::MalformedHeader {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.malformed(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }
}

/// Parses a P2 (plain) or P5 (binary, big-endian when 16-bit) graymap.
pub fn parse_pgm(data: &[u8]) -> Result<Pgm> {
    let mut h = Header { data, pos: 0 };
    let plain = match data.get(..2) {
        Some(b"P2") => true,
        Some(b"P5") => false,
        _ => return Err(h.malformed("expected magic P2 or P5")),
    };
    h.pos = 2;
    if h.pos < data.len() && !data[h.pos].is_ascii_whitespace() && data[h.pos] != b'#' {
        return Err(h.malformed("expected whitespace after magic"));
    }
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(h.malformed("zero image dimension"));
    }
    if maxval != 255 && maxval != 65535 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| h.malformed("image dimensions overflow"))?;

    let samples = if plain {
        let mut out = Vec::with_capacity(expected);
        loop {
            h.skip_space_and_comments();
            if h.pos >= data.len() {
                break;
            }
            let at = h.pos;
            let v = h.number("sample")?;
            if v > maxval {
                return Err(Error::MalformedHeader {
                    offset: at,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            if out.len() == expected {
                return Err(Error::MalformedHeader {
                    offset: at,
                    reason: "trailing data after the last sample".into(),
                });
            }
            out.push(v as u16);
        }
        out
    } else {
        let at = h.pos;
        match data.get(h.pos) {
            Some(c) if c.is_ascii_whitespace() => h.pos += 1,
            _ => {
                return Err(Error::MalformedHeader {
                    offset: at,
                    reason: "expected a single whitespace before raster".into(),
                })
            }
        }
        let body = &data[h.pos..];
        if maxval == 255 {
            body.iter().take(expected).map(|&b| b as u16).collect()
        } else {
            body.chunks_exact(2)
                .take(expected)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    };
    if samples.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            found: samples.len(),
        });
    }
    Ok(Pgm {
        width,
        height,
        maxval,
        samples,
    })
}

/// Binary PGM bytes; maxval 255 writes one byte per sample, 65535 two.
pub fn encode_pgm(pgm: &Pgm) -> Result<Vec<u8>> {
    let mut out = format!("P5\n{} {}\n{}\n", pgm.width, pgm.height, pgm.maxval).into_bytes();
    match pgm.maxval {
        255 => out.extend(pgm.samples.iter().map(|&s| s.min(255) as u8)),
        65535 => out.extend(pgm.samples.iter().flat_map(|s| s.to_be_bytes())),
        other => return Err(Error::UnsupportedMaxval(other)),
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Frame> {
    let pgm = parse_pgm(&read(path.as_ref())?)?;
    Ok(Frame::new(pgm.to_field()?, 0.0))
}

/// Writes a brightness field in `[0, 1]` as a 16-bit PGM.
pub fn write_frame_pgm(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    let samples = field
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let pgm = Pgm {
        width: field.grid().width(),
        height: field.grid().height(),
        maxval: 65535,
        samples,
    };
    write(path.as_ref(), &encode_pgm(&pgm)?)
}

/// Range of a min-max scaled raster, stored next to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSidecar {
    pub min: f64,
    pub max: f64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Min-max scales to 0..=65535 and records the range in `<path>.json`.
/// A constant field is written as all zeros.
pub fn write_saliency_pgm(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    let path = path.as_ref();
    let (min, max) = (field.min(), field.max());
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidParameter(
            "cannot scale a non-finite field".into(),
        ));
    }
    let range = max - min;
    let samples = field
        .values()
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - min) / range * 65535.0).round() as u16
            } else {
                0
            }
        })
        .collect();
    let pgm = Pgm {
        width: field.grid().width(),
        height: field.grid().height(),
        maxval: 65535,
        samples,
    };
    write(path, &encode_pgm(&pgm)?)?;
    let sidecar = serde_json::to_vec_pretty(&ScaleSidecar { min, max })?;
    write(&sidecar_path(path), &sidecar)
}

/// Inverse of [`write_saliency_pgm`], in the original units.
pub fn read_saliency_pgm(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let pgm = parse_pgm(&read(path)?)?;
    let scale: ScaleSidecar = serde_json::from_slice(&read(&sidecar_path(path))?)?;
    let unit = pgm.to_field()?;
    let range = scale.max - scale.min;
    Ok(ScalarField::from_fn(unit.grid(), |x, y| {
        scale.min + unit.get(x, y) * range
    }))
}

/// On-disk scanpath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanpathRecord {
    pub stimulus: String,
    pub seed: u64,
    pub model: String,
    pub fixations: Vec<Fixation>,
}

impl ScanpathRecord {
    pub fn new(path: &Scanpath, seed: u64, model: impl Into<String>) -> Self {
        ScanpathRecord {
            stimulus: path.stimulus.clone(),
            seed,
            model: model.into(),
            fixations: path.fixations.clone(),
        }
    }

    pub fn scanpath(&self) -> Scanpath {
        Scanpath::new(self.stimulus.clone(), self.fixations.clone())
    }
}

pub fn write_scanpath_json(path: impl AsRef<Path>, record: &ScanpathRecord) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(record)?;
    bytes.push(b'\n');
    write(path.as_ref(), &bytes)
}

pub fn read_scanpath_json(path: impl AsRef<Path>) -> Result<ScanpathRecord> {
    Ok(serde_json::from_slice(&read(path.as_ref())?)?)
}

/// Human fixations for one stimulus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixationData {
    pub by_subject: BTreeMap<String, Scanpath>,
    /// Points moved back onto the grid.
    pub clamped: usize,
}

impl FixationData {
    pub fn scanpaths(&self) -> Vec<Scanpath> {
        self.by_subject.values().cloned().collect()
    }
}

const FIXATION_COLUMNS: [&str; 5] = ["subject", "x", "y", "onset", "duration"];

/// Reads `subject,x,y,onset,duration` rows (any column order), grouping by
/// subject and sorting each group by onset. Rows are numbered from 1 after
/// the header in errors.
pub fn parse_fixations_csv(
    reader: impl std::io::Read,
    stimulus: &str,
    grid: Grid,
) -> Result<FixationData> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::UnparsableRow {
        row: 0,
        reason: e.to_string(),
    })?;
    let mut cols = [0usize; 5];
    for (slot, name) in cols.iter_mut().zip(FIXATION_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))?;
    }

    let mut data = FixationData::default();
    let (xmax, ymax) = ((grid.width() - 1) as f64, (grid.height() - 1) as f64);
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::UnparsableRow {
            row,
            reason: e.to_string(),
        })?;
        let field = |c: usize| -> Result<&str> {
            rec.get(cols[c]).ok_or_else(|| Error::UnparsableRow {
                row,
                reason: format!("missing `{}`", FIXATION_COLUMNS[c]),
            })
        };
        let num = |c: usize| -> Result<f64> {
            let s = field(c)?;
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::UnparsableRow {
                    row,
                    reason: format!("`{}` is not a finite number: {s:?}", FIXATION_COLUMNS[c]),
                }),
            }
        };
        let subject = field(0)?.to_string();
        let (x, y, onset, duration) = (num(1)?, num(2)?, num(3)?, num(4)?);
        if duration < 0.0 {
            return Err(Error::UnparsableRow {
                row,
                reason: "negative duration".into(),
            });
        }
        let (cx, cy) = (x.clamp(0.0, xmax), y.clamp(0.0, ymax));
        if (cx, cy) != (x, y) {
            data.clamped += 1;
        }
        data.by_subject
            .entry(subject)
            .or_insert_with(|| Scanpath::new(stimulus, Vec::new()))
            .fixations
            .push(Fixation {
                x: cx,
                y: cy,
                onset,
                duration,
            });
    }
    for path in data.by_subject.values_mut() {
        path.fixations.sort_by(|a, b| a.onset.total_cmp(&b.onset));
    }
    Ok(data)
}

/// [`parse_fixations_csv`] on a file; the stimulus id is the file stem.
pub fn load_fixations_csv(path: impl AsRef<Path>, grid: Grid) -> Result<FixationData> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fixations_csv(file, &stem(path), grid)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// A stimulus on disk: `<id>.pgm`, or a directory `<id>/` of PGM frames
/// played in file-name order.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusRecord {
    pub id: String,
    pub frames: Vec<PathBuf>,
    pub fixation_files: Vec<PathBuf>,
    pub category: Option<String>,
}

impl StimulusRecord {
    /// Loads every frame, spacing them `frame_interval` seconds apart.
    pub fn load_frames(&self, frame_interval: f64) -> Result<Vec<Frame>> {
        let frames = par::map_collect(&self.frames, |p| load_pgm(p));
        frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.map(|f| f.with_timestamp(i as f64 * frame_interval)))
            .collect()
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn has_ext(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Lists stimuli under `dir`, sorted by id.
pub fn scan_stimuli(dir: impl AsRef<Path>) -> Result<Vec<StimulusRecord>> {
    let dir = dir.as_ref();
    let category = dir.file_name().map(|s| s.to_string_lossy().into_owned());
    let mut out = Vec::new();
    for p in sorted_entries(dir)? {
        let frames = if p.is_dir() {
            sorted_entries(&p)?
                .into_iter()
                .filter(|f| has_ext(f, "pgm"))
                .collect()
        } else if has_ext(&p, "pgm") {
            vec![p.clone()]
        } else {
            continue;
        };
        if frames.is_empty() {
            continue;
        }
        out.push(StimulusRecord {
            id: stem(&p),
            frames,
            fixation_files: Vec::new(),
            category: category.clone(),
        });
    }
    Ok(out)
}

/// Fixation CSVs under `dir`, keyed by stem.
pub fn scan_fixation_files(dir: impl AsRef<Path>) -> Result<BTreeMap<String, PathBuf>> {
    Ok(sorted_entries(dir.as_ref())?
        .into_iter()
        .filter(|p| p.is_file() && has_ext(p, "csv"))
        .map(|p| (stem(&p), p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("wavefoa-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn plain_2x2() {
        let pgm = parse_pgm(b"P2 2 2 255 0 255 128 64").unwrap();
        let v = pgm.normalized();
        assert_eq!(v, [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert!((v[2] - 0.50196).abs() < 1e-5);
        assert!((v[3] - 0.25098).abs() < 1e-5);
        // too small to simulate on
        assert!(matches!(
            pgm.to_field(),
            Err(Error::InvalidGrid {
                width: 2,
                height: 2
            })
        ));
    }

    #[test]
    fn comments_and_binary_8bit() {
        let mut data = b"P5\n# made by hand\n3 # width\n1\n255\n".to_vec();
        data.extend([0u8, 10, 255]);
        assert_eq!(parse_pgm(&data).unwrap().samples, vec![0, 10, 255]);
    }

    #[test]
    fn sixteen_bit_binary_equals_plain() {
        let w = 7;
        let h = 5;
        let samples: Vec<u16> = (0..w * h).map(|i| ((i * 7919) % 65536) as u16).collect();
        let plain = format!(
            "P2\n{w} {h}\n65535\n{}\n",
            samples
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        let mut binary = format!("P5 {w} {h} 65535\n").into_bytes();
        for s in &samples {
            binary.push((s >> 8) as u8);
            binary.push((s & 0xff) as u8);
        }
        let a = parse_pgm(plain.as_bytes()).unwrap().to_field().unwrap();
        let b = parse_pgm(&binary).unwrap().to_field().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(matches!(
            parse_pgm(b"P6 2 2 255 ..."),
            Err(Error::MalformedHeader { offset: 0, .. })
        ));
        assert!(matches!(
            parse_pgm(b"P2 2 2 1023 0 0 0 0"),
            Err(Error::UnsupportedMaxval(1023))
        ));
        assert!(matches!(
            parse_pgm(b"P2 2 x 255"),
            Err(Error::MalformedHeader { offset: 5, .. })
        ));
        assert!(matches!(
            parse_pgm(b"P2 2 2 255 1 2 3"),
            Err(Error::TruncatedData {
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            parse_pgm(b"P5 2 2 255\n\x01\x02"),
            Err(Error::TruncatedData {
                expected: 4,
                found: 2
            })
        ));
        assert!(matches!(
            parse_pgm(b"P2 1 1 255 300"),
            Err(Error::MalformedHeader { offset: 11, .. })
        ));
        assert!(matches!(
            parse_pgm(b"P2 1 1 255 3 4"),
            Err(Error::MalformedHeader { offset: 13, .. })
        ));
    }

    #[test]
    fn encode_roundtrip() {
        for maxval in [255u32, 65535] {
            let pgm = Pgm {
                width: 4,
                height: 3,
                maxval,
                samples: (0..12).map(|i| (i * 21) as u16).collect(),
            };
            assert_eq!(parse_pgm(&encode_pgm(&pgm).unwrap()).unwrap(), pgm);
        }
    }

    #[test]
    fn csv_grouping_sorting_and_clamping() {
        let g = Grid::new(20, 10).unwrap();
        let csv = "subject,x,y,onset,duration\n\
                   s1,3,4,0.8,0.2\n\
                   s2,30,2,0.1,0.3\n\
                   s1,5,6,0.1,0.4\n";
        let data = parse_fixations_csv(csv.as_bytes(), "img", g).unwrap();
        assert_eq!(data.clamped, 1);
        let s1 = &data.by_subject["s1"];
        assert_eq!(s1.stimulus, "img");
        assert_eq!(s1.len(), 2);
        assert_eq!((s1.fixations[0].x, s1.fixations[1].x), (5.0, 3.0));
        assert_eq!(data.by_subject["s2"].fixations[0].x, 19.0);
    }

    #[test]
    fn csv_errors_locate_the_problem() {
        let g = Grid::new(20, 10).unwrap();
        let missing = "subject,x,y,duration\na,1,1,1\n";
        assert!(
            matches!(parse_fixations_csv(missing.as_bytes(), "i", g), Err(Error::MissingColumn(c)) if c == "onset")
        );
        let bad = "subject,x,y,onset,duration\na,1,1,0,1\nb,1,oops,0,1\n";
        assert!(matches!(
            parse_fixations_csv(bad.as_bytes(), "i", g),
            Err(Error::UnparsableRow { row: 2, .. })
        ));
        let nan = "x,y,onset,duration,subject\n1,NaN,0,1,a\n";
        assert!(matches!(
            parse_fixations_csv(nan.as_bytes(), "i", g),
            Err(Error::UnparsableRow { row: 1, .. })
        ));
    }

    #[test]
    fn scanpath_json_roundtrip() {
        let sp = Scanpath::new(
            "blobs",
            vec![
                Fixation {
                    x: 1.25,
                    y: 2.5,
                    onset: 0.0,
                    duration: 0.3,
                },
                Fixation {
                    x: 10.0,
                    y: 0.1,
                    onset: 0.4,
                    duration: 1.0 / 3.0,
                },
            ],
        );
        let rec = ScanpathRecord::new(&sp, 42, "DW");
        let p = tmp("sp.json");
        write_scanpath_json(&p, &rec).unwrap();
        let back = read_scanpath_json(&p).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.scanpath(), sp);
    }

    #[test]
    fn saliency_roundtrip_within_quantization() {
        let g = Grid::new(8, 8).unwrap();
        let mut s = 12345u64;
        let field = ScalarField::from_fn(g, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        });
        let p = tmp("sal.pgm");
        write_saliency_pgm(&p, &field).unwrap();
        let back = read_saliency_pgm(&p).unwrap();
        let range = field.max() - field.min();
        for (a, b) in field.values().iter().zip(back.values()) {
            assert!((a - b).abs() / range <= 1.0 / 65535.0);
        }
    }

    #[test]
    fn constant_saliency_writes_zeros() {
        let g = Grid::new(5, 4).unwrap();
        let p = tmp("const.pgm");
        write_saliency_pgm(&p, &ScalarField::constant(g, 0.75)).unwrap();
        let pgm = parse_pgm(&fs::read(&p).unwrap()).unwrap();
        assert!(pgm.samples.iter().all(|&s| s == 0));
        let sc: ScaleSidecar =
            serde_json::from_slice(&fs::read(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!((sc.min, sc.max), (0.75, 0.75));
        assert_eq!(
            read_saliency_pgm(&p).unwrap(),
            ScalarField::constant(g, 0.75)
        );
    }

    #[test]
    fn scans_images_and_frame_directories() {
        let root = tmp("stimuli");
        let _ = fs::remove_dir_all(&root);
        fs::create_dir_all(root.join("clip")).unwrap();
        let g = Grid::new(4, 4).unwrap();
        write_frame_pgm(root.join("b.pgm"), &ScalarField::constant(g, 0.5)).unwrap();
        write_frame_pgm(root.join("clip/002.pgm"), &ScalarField::constant(g, 1.0)).unwrap();
        write_frame_pgm(root.join("clip/001.pgm"), &ScalarField::zeros(g)).unwrap();
        fs::write(root.join("notes.txt"), "x").unwrap();
        let found = scan_stimuli(&root).unwrap();
        assert_eq!(
            found.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(),
            ["b", "clip"]
        );
        let frames = found[1].load_frames(0.04).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].brightness().max(), 0.0);
        assert_eq!(frames[1].timestamp(), 0.04);
    }
}
