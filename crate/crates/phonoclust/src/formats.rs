//! Stage artifacts on disk.
//!
//! Streams of frames are JSON-lines; lists are JSON; tables are CSV with a
//! header row. Writers are deterministic: equal inputs give equal bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use phonoclust_core::cluster::{Clustering, Projection2D, SweepRow};
use phonoclust_core::ingest::{BODY_POINTS, HAND_POINTS};
use phonoclust_core::phonology::HandState;
use phonoclust_core::seqmatch::{PhonemeSpan, SpanMatch};
use phonoclust_core::synth::{GroundTruth, Repeat, Script, ScriptSegment};
use phonoclust_core::{
    AffinityMatrix, Keypoint, KeypointFrame, LocationLevel, Orientation, PhonoFrame, PhonoSymbol, Phoneme, Point,
    PoseSequence, Side,
};
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Plain-notation decimal with 9 significant digits, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let sci = format!("{x:.8e}");
    let exponent: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (8 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn read_text(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|e| DataError::io(path, e))
}

fn side_from_str(s: &str) -> Option<Side> {
    Side::BOTH.into_iter().find(|side| side.as_str() == s)
}

fn symbol_pair(s: PhonoSymbol) -> [u8; 2] {
    [s.orientation.sector(), s.location.index()]
}

fn symbol_from_pair([sector, level]: [u8; 2]) -> Result<PhonoSymbol, String> {
    let o = Orientation::new(sector).ok_or_else(|| format!("sector {sector} out of range 0..=7"))?;
    let l = LocationLevel::from_index(level).ok_or_else(|| format!("level {level} out of range 0..=2"))?;
    Ok(PhonoSymbol::new(o, l))
}

/// Iterates non-blank lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

// ---- keypoints ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeypointRecord {
    frame_index: usize,
    body: Vec<[f64; 3]>,
    left_hand: Vec<[f64; 3]>,
    right_hand: Vec<[f64; 3]>,
}

fn to_triples(points: &[Keypoint]) -> Vec<[f64; 3]> {
    points.iter().map(|k| [k.x, k.y, k.confidence]).collect()
}

fn from_triples<const N: usize>(field: &str, v: &[[f64; 3]]) -> Result<[Keypoint; N], String> {
    if v.len() != N {
        return Err(format!("{field} has {} keypoints, expected {N}", v.len()));
    }
    let mut out = [Keypoint::MISSING; N];
    for (slot, t) in out.iter_mut().zip(v) {
        if t.iter().any(|c| !c.is_finite()) {
            return Err(format!("{field} contains a non-finite value"));
        }
        if !(0.0..=1.0).contains(&t[2]) {
            return Err(format!("{field} confidence {} outside [0, 1]", t[2]));
        }
        *slot = Keypoint::new(t[0], t[1], t[2]);
    }
    Ok(out)
}

pub fn keypoint_line(frame: &KeypointFrame) -> String {
    let record = KeypointRecord {
        frame_index: frame.frame_index,
        body: to_triples(&frame.body),
        left_hand: to_triples(&frame.left_hand),
        right_hand: to_triples(&frame.right_hand),
    };
    serde_json::to_string(&record).expect("finite floats serialize")
}

pub fn parse_keypoint_line(line: &str) -> Result<KeypointFrame, String> {
    let r: KeypointRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(KeypointFrame {
        frame_index: r.frame_index,
        body: from_triples::<BODY_POINTS>("body", &r.body)?,
        left_hand: from_triples::<HAND_POINTS>("left_hand", &r.left_hand)?,
        right_hand: from_triples::<HAND_POINTS>("right_hand", &r.right_hand)?,
    })
}

pub fn write_keypoints(mut w: impl Write, frames: &[KeypointFrame]) -> io::Result<()> {
    for f in frames {
        writeln!(w, "{}", keypoint_line(f))?;
    }
    Ok(())
}

pub fn read_keypoints(path: &Path) -> Result<Vec<KeypointFrame>, DataError> {
    let text = read_text(path)?;
    let mut frames = Vec::new();
    for (n, line) in lines(&text) {
        let frame = parse_keypoint_line(line).map_err(|e| DataError::at_line(path, n, e))?;
        if let Some(prev) = frames.last().map(|f: &KeypointFrame| f.frame_index) {
            if frame.frame_index != prev + 1 {
                return Err(DataError::at_line(
                    path,
                    n,
                    format!("frame_index {} does not follow {prev}", frame.frame_index),
                ));
            }
        }
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(DataError::new(path, "no frames"));
    }
    Ok(frames)
}

pub fn read_sequence(path: &Path, fps: f64) -> Result<PoseSequence, DataError> {
    let frames = read_keypoints(path)?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    PoseSequence::new(frames, fps, id).map_err(|e| DataError::new(path, e))
}

// ---- phonology ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HandRecord {
    sector: Option<u8>,
    level: Option<u8>,
    present: bool,
    centroid: Option<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhonoRecord {
    frame: usize,
    right: HandRecord,
    left: HandRecord,
}

impl From<&HandState> for HandRecord {
    fn from(h: &HandState) -> Self {
        Self {
            sector: h.orientation.map(Orientation::sector),
            level: h.location.map(LocationLevel::index),
            present: h.is_present(),
            centroid: h.centroid.map(|p| [p.x, p.y]),
        }
    }
}

impl HandRecord {
    fn to_state(&self) -> Result<HandState, String> {
        if self.present != self.centroid.is_some() {
            return Err("`present` disagrees with `centroid`".into());
        }
        let orientation = match self.sector {
            Some(s) => Some(Orientation::new(s).ok_or_else(|| format!("sector {s} out of range 0..=7"))?),
            None => None,
        };
        let location = match self.level {
            Some(l) => Some(LocationLevel::from_index(l).ok_or_else(|| format!("level {l} out of range 0..=2"))?),
            None => None,
        };
        let centroid = match self.centroid {
            Some([x, y]) if x.is_finite() && y.is_finite() => Some(Point::new(x, y)),
            Some(_) => return Err("non-finite centroid".into()),
            None => None,
        };
        Ok(HandState {
            centroid,
            orientation,
            location,
        })
    }
}

pub fn write_phonology(mut w: impl Write, frames: &[PhonoFrame]) -> io::Result<()> {
    for f in frames {
        let record = PhonoRecord {
            frame: f.frame_index,
            right: (&f.right).into(),
            left: (&f.left).into(),
        };
        writeln!(w, "{}", serde_json::to_string(&record).expect("serializable"))?;
    }
    Ok(())
}

pub fn read_phonology(path: &Path) -> Result<Vec<PhonoFrame>, DataError> {
    let text = read_text(path)?;
    let mut frames: Vec<PhonoFrame> = Vec::new();
    for (n, line) in lines(&text) {
        let r: PhonoRecord = serde_json::from_str(line).map_err(|e| DataError::at_line(path, n, e))?;
        let hand = |h: &HandRecord| h.to_state().map_err(|e| DataError::at_line(path, n, e));
        if let Some(prev) = frames.last() {
            if r.frame != prev.frame_index + 1 {
                return Err(DataError::at_line(
                    path,
                    n,
                    format!("frame {} does not follow {}", r.frame, prev.frame_index),
                ));
            }
        }
        frames.push(PhonoFrame {
            frame_index: r.frame,
            right: hand(&r.right)?,
            left: hand(&r.left)?,
        });
    }
    if frames.is_empty() {
        return Err(DataError::new(path, "no frames"));
    }
    Ok(frames)
}

// ---- phonemes ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhonemeRecord {
    hand: String,
    start: usize,
    end: usize,
    symbols: Vec<[u8; 2]>,
}

/// A JSON array with one phoneme object per line.
pub fn write_phonemes(mut w: impl Write, phonemes: &[Phoneme]) -> io::Result<()> {
    writeln!(w, "[")?;
    for (i, p) in phonemes.iter().enumerate() {
        let record = PhonemeRecord {
            hand: p.hand().as_str().to_owned(),
            start: p.start_frame(),
            end: p.end_frame(),
            symbols: p.symbols().iter().copied().map(symbol_pair).collect(),
        };
        let sep = if i + 1 < phonemes.len() { "," } else { "" };
        writeln!(w, "  {}{sep}", serde_json::to_string(&record).expect("serializable"))?;
    }
    writeln!(w, "]")
}

pub fn read_phonemes(path: &Path) -> Result<Vec<Phoneme>, DataError> {
    let text = read_text(path)?;
    let records: Vec<PhonemeRecord> = serde_json::from_str(&text).map_err(|e| DataError::json(path, e))?;
    records
        .into_iter()
        .enumerate()
        .map(|(id, r)| {
            let fail = |msg: String| DataError::new(path, format!("phoneme {id}: {msg}"));
            let hand = side_from_str(&r.hand).ok_or_else(|| fail(format!("unknown hand {:?}", r.hand)))?;
            let symbols = r
                .symbols
                .into_iter()
                .map(symbol_from_pair)
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail)?;
            Phoneme::new(hand, r.start, r.end, symbols).map_err(|e| fail(e.to_string()))
        })
        .collect()
}

/// `{"right": [...], "left": [...]}` boundary frame indices.
pub fn write_boundaries(mut w: impl Write, per_hand: &[(Side, Vec<usize>)]) -> io::Result<()> {
    let map: serde_json::Map<String, serde_json::Value> = per_hand
        .iter()
        .map(|(side, b)| (side.as_str().to_owned(), serde_json::json!(b)))
        .collect();
    writeln!(w, "{}", serde_json::Value::Object(map))
}

pub fn write_histogram(mut w: impl Write, histogram: &[(usize, usize)]) -> io::Result<()> {
    writeln!(w, "length_frames,count")?;
    for (len, count) in histogram {
        writeln!(w, "{len},{count}")?;
    }
    Ok(())
}

// ---- clustering tables ----

/// n×n distances, fixed-point with 9 decimals, under a header of phoneme ids.
pub fn write_affinity(mut w: impl Write, m: &AffinityMatrix) -> io::Result<()> {
    let header: Vec<String> = (0..m.len()).map(|i| i.to_string()).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..m.len() {
        line.clear();
        for (j, d) in m.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{d:.9}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn label_field(label: Option<usize>) -> String {
    label.map_or_else(|| "-1".to_owned(), |l| l.to_string())
}

/// Noise is written as label `-1`.
pub fn write_clustering(mut w: impl Write, phonemes: &[Phoneme], c: &Clustering) -> io::Result<()> {
    writeln!(w, "phoneme_id,start,end,label")?;
    for (id, (p, label)) in phonemes.iter().zip(&c.labels).enumerate() {
        writeln!(w, "{id},{},{},{}", p.start_frame(), p.end_frame(), label_field(*label))?;
    }
    Ok(())
}

/// Labels from a clustering table, indexed by phoneme id.
pub fn read_labels(path: &Path) -> Result<Vec<Option<usize>>, DataError> {
    let text = read_text(path)?;
    let mut it = lines(&text);
    match it.next() {
        Some((_, header)) if header.trim() == "phoneme_id,start,end,label" => {}
        Some((n, _)) => return Err(DataError::at_line(path, n, "expected header phoneme_id,start,end,label")),
        None => return Err(DataError::new(path, "empty file")),
    }
    let mut labels = Vec::new();
    for (n, line) in it {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(DataError::at_line(path, n, "expected 4 fields"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| DataError::at_line(path, n, format!("bad phoneme_id {:?}", fields[0])))?;
        if id != labels.len() {
            return Err(DataError::at_line(path, n, format!("phoneme_id {id} out of order")));
        }
        let label: i64 = fields[3]
            .parse()
            .map_err(|_| DataError::at_line(path, n, format!("bad label {:?}", fields[3])))?;
        labels.push(match label {
            -1 => None,
            l if l >= 0 => Some(l as usize),
            l => return Err(DataError::at_line(path, n, format!("bad label {l}"))),
        });
    }
    Ok(labels)
}

/// Undefined silhouettes are left empty.
pub fn write_sweep(mut w: impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "param,n_clusters,mean_size,silhouette")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            sig9(r.param),
            r.n_clusters,
            sig9(r.mean_cluster_size),
            r.silhouette.map(sig9).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_projection(mut w: impl Write, p: &Projection2D, labels: Option<&[Option<usize>]>) -> io::Result<()> {
    writeln!(w, "phoneme_id,x,y,label")?;
    for (id, (x, y)) in p.coords.iter().enumerate() {
        let label = labels.map(|l| label_field(l[id])).unwrap_or_default();
        writeln!(w, "{id},{},{},{label}", sig9(*x), sig9(*y))?;
    }
    Ok(())
}

// ---- matches ----

#[derive(Serialize)]
struct SpanRecord {
    /// Indices into the hand's phoneme list, `[first, end)`.
    phonemes: [usize; 2],
    frames: [usize; 2],
}

#[derive(Serialize)]
struct MatchRecord<'a> {
    hand: &'a str,
    a: SpanRecord,
    b: SpanRecord,
    similarity: f64,
}

fn span_record(s: &PhonemeSpan) -> SpanRecord {
    SpanRecord {
        phonemes: [s.phonemes.start, s.phonemes.end],
        frames: [s.start_frame, s.end_frame],
    }
}

pub fn write_matches(mut w: impl Write, per_hand: &[(Side, Vec<SpanMatch>)]) -> io::Result<()> {
    writeln!(w, "[")?;
    let all: Vec<(Side, &SpanMatch)> = per_hand
        .iter()
        .flat_map(|(side, ms)| ms.iter().map(move |m| (*side, m)))
        .collect();
    for (i, (side, m)) in all.iter().enumerate() {
        let record = MatchRecord {
            hand: side.as_str(),
            a: span_record(&m.a),
            b: span_record(&m.b),
            similarity: m.similarity,
        };
        let sep = if i + 1 < all.len() { "," } else { "" };
        writeln!(w, "  {}{sep}", serde_json::to_string(&record).expect("serializable"))?;
    }
    writeln!(w, "]")
}

// ---- synthetic scripts ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    target: [f64; 2],
    sector: u8,
    hold: usize,
    travel: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepeatRecord {
    segments: [usize; 2],
    insert_before: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptRecord {
    segments: Vec<SegmentRecord>,
    #[serde(default)]
    repeats: Vec<RepeatRecord>,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    start: Option<[f64; 2]>,
    #[serde(default)]
    fps: Option<f64>,
}

/// Parses a script document; see the README for the layout.
pub fn parse_script(text: &str) -> Result<Script, serde_json::Error> {
    use serde::de::Error;
    let r: ScriptRecord = serde_json::from_str(text)?;
    let segments = r
        .segments
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            Ok(ScriptSegment {
                target: Point::new(s.target[0], s.target[1]),
                sector: Orientation::new(s.sector)
                    .ok_or_else(|| serde_json::Error::custom(format!("segment {k}: sector {} out of range", s.sector)))?,
                hold_frames: s.hold,
                travel_frames: s.travel,
            })
        })
        .collect::<Result<Vec<_>, serde_json::Error>>()?;
    let mut script = Script::new(segments);
    script.repeats = r
        .repeats
        .into_iter()
        .map(|rep| Repeat {
            segments: rep.segments[0]..rep.segments[1],
            insert_before: rep.insert_before,
        })
        .collect();
    script.noise_sigma = r.noise_sigma;
    script.seed = r.seed;
    script.start = r.start.map(|[x, y]| Point::new(x, y));
    if let Some(fps) = r.fps {
        script.fps = fps;
    }
    Ok(script)
}

pub fn read_script(path: &Path) -> Result<Script, DataError> {
    parse_script(&read_text(path)?).map_err(|e| DataError::json(path, e))
}

pub fn write_ground_truth(mut w: impl Write, truth: &GroundTruth) -> io::Result<()> {
    let spans: Vec<Vec<[usize; 2]>> = truth
        .verse_spans
        .iter()
        .map(|occ| occ.iter().map(|r| [r.start, r.end]).collect())
        .collect();
    let symbols: Vec<[u8; 2]> = truth.symbols_per_frame.iter().copied().map(symbol_pair).collect();
    let doc = serde_json::json!({
        "true_boundaries": truth.true_boundaries,
        "verse_spans": spans,
        "symbols_per_frame": symbols,
    });
    writeln!(w, "{doc}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.1), "0.1");
        assert_eq!(sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(sig9(-1234.56789012), "-1234.56789");
        assert_eq!(sig9(123456789012.0), "123456789012");
        assert_eq!(sig9(1.5e-12), "0.0000000000015");
        assert_eq!(sig9(9.9999999999), "10");
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let sym = PhonoSymbol::from_index(0).unwrap();
        let ps: Vec<Phoneme> = (0..3)
            .map(|i| Phoneme::new(Side::Right, 3 * i, 3 * i + 3, vec![sym; 3]).unwrap())
            .collect();
        let c = Clustering {
            labels: vec![Some(0), None, Some(1)],
            method: phonoclust_core::cluster::Method::Grouping { threshold: 0.5 },
            n_clusters: 2,
            silhouette: None,
        };
        let mut buf = Vec::new();
        write_clustering(&mut buf, &ps, &c).unwrap();
        fs::write(&path, &buf).unwrap();
        assert_eq!(read_labels(&path).unwrap(), c.labels);
    }

    #[test]
    fn script_parsing() {
        let s = parse_script(
            r#"{"segments":[{"target":[0,1],"sector":2,"hold":3,"travel":0}],
                "repeats":[{"segments":[0,1],"insert_before":[1]}],"noise_sigma":0.01,"seed":5}"#,
        )
        .unwrap();
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.repeats[0].segments, 0..1);
        assert_eq!(s.seed, 5);
        assert!(parse_script(r#"{"segments":[],"bogus":1}"#).is_err());
        assert!(parse_script(r#"{"segments":[{"target":[0,1],"sector":9,"hold":3,"travel":0}]}"#).is_err());
    }
}
