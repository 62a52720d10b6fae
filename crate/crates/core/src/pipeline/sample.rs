use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::VariableId;

/// Marks the start of a sample block.
pub const SAMPLE_HEADER: &str = "###";
const TARGET_PREFIX: &str = "target: ";

/// An ordered list of variable values; the last record is the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    records: Vec<(VariableId, bool)>,
}

impl Sample {
    pub fn new(records: Vec<(VariableId, bool)>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::param("a sample needs at least one record"));
        }
        let mut seen: Vec<VariableId> = records.iter().map(|(v, _)| *v).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!("{} appears twice in a sample", w[0])));
        }
        Ok(Sample { records })
    }

    pub fn records(&self) -> &[(VariableId, bool)] {
        &self.records
    }

    pub fn target(&self) -> VariableId {
        self.records.last().expect("samples are nonempty").0
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Appends the text form of `sample` to `out`.
pub fn write_sample(sample: &Sample, out: &mut String) {
    out.push_str(SAMPLE_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{TARGET_PREFIX}{}", sample.target());
    for (v, b) in &sample.records {
        let _ = writeln!(out, "{v}={}", *b as u8);
    }
}

pub fn serialize_sample(sample: &Sample) -> String {
    let mut out = String::new();
    write_sample(sample, &mut out);
    out
}

/// Parses exactly one sample block.
pub fn parse_sample(text: &str) -> Result<Sample> {
    let mut parser = BlockParser::default();
    for (i, line) in text.strip_suffix('\n').unwrap_or(text).split('\n').enumerate() {
        if let Some(sample) = parser.push(i + 1, line)? {
            return Err(Error::MalformedLine {
                line: i + 1,
                content: format!("second sample after {}", sample.target()),
            });
        }
    }
    parser.finish(text.lines().count())?.ok_or(Error::MalformedLine {
        line: 1,
        content: text.chars().take(40).collect(),
    })
}

/// Parses a whole corpus (concatenated blocks) held in memory.
pub fn parse_corpus(text: &str) -> Result<Vec<Sample>> {
    CorpusReader::new(text.as_bytes()).collect()
}

/// Streaming reader over a corpus.
pub struct CorpusReader<R> {
    input: R,
    parser: BlockParser,
    line_no: usize,
    buf: String,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(input: R) -> Self {
        CorpusReader {
            input,
            parser: BlockParser::default(),
            line_no: 0,
            buf: String::new(),
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Result<Sample>> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                Ok(0) => {
                    self.done = true;
                    return self.parser.finish(self.line_no).transpose();
                }
                Ok(_) => {
                    self.line_no += 1;
                    let line = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
                    match self.parser.push(self.line_no, line) {
                        Ok(Some(sample)) => return Some(Ok(sample)),
                        Ok(None) => {}
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
            }
        }
    }
}

#[derive(Default)]
struct BlockParser {
    header: Option<(String, usize)>,
    records: Vec<(VariableId, bool)>,
    in_block: bool,
}

impl BlockParser {
    /// Feeds one line; returns the previous block when a new one starts.
    fn push(&mut self, line_no: usize, line: &str) -> Result<Option<Sample>> {
        let malformed = || Error::MalformedLine {
            line: line_no,
            content: line.to_string(),
        };
        if line == SAMPLE_HEADER {
            let finished = self.finish(line_no)?;
            self.in_block = true;
            return Ok(finished);
        }
        if !self.in_block {
            return Err(malformed());
        }
        if self.header.is_none() {
            let name = line.strip_prefix(TARGET_PREFIX).ok_or_else(malformed)?;
            name.parse::<VariableId>().map_err(|_| malformed())?;
            self.header = Some((name.to_string(), line_no));
            return Ok(None);
        }
        let (name, bit) = line.split_once('=').ok_or_else(malformed)?;
        let v: VariableId = name.parse().map_err(|_| malformed())?;
        let b = match bit {
            "0" => false,
            "1" => true,
            _ => return Err(malformed()),
        };
        self.records.push((v, b));
        Ok(None)
    }

    fn finish(&mut self, line_no: usize) -> Result<Option<Sample>> {
        if !self.in_block {
            return Ok(None);
        }
        self.in_block = false;
        let records = std::mem::take(&mut self.records);
        let Some((header, header_line)) = self.header.take() else {
            return Err(Error::MalformedLine {
                line: line_no,
                content: "block without target header".into(),
            });
        };
        let Some(last) = records.last() else {
            return Err(Error::MalformedLine {
                line: header_line,
                content: "block without records".into(),
            });
        };
        if last.0.to_string() != header {
            return Err(Error::TargetMismatch {
                header,
                last: last.0.to_string(),
            });
        }
        Sample::new(records).map(Some).map_err(|_| Error::MalformedLine {
            line: header_line,
            content: "variable repeated within a sample".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(i: u32) -> VariableId {
        VariableId(i)
    }

    #[test]
    fn single_record() {
        let s = Sample::new(vec![(x(1), false)]).unwrap();
        assert_eq!(serialize_sample(&s), "###\ntarget: X1\nX1=0\n");
    }

    #[test]
    fn full_training_sample_layout() {
        let values = [
            (17, 0),
            (92, 0),
            (13, 0),
            (52, 1),
            (24, 1),
            (26, 1),
            (91, 0),
            (36, 0),
            (34, 0),
            (12, 1),
            (20, 0),
            (5, 1),
        ];
        let s = Sample::new(values.iter().map(|&(v, b)| (x(v), b == 1)).collect()).unwrap();
        let expected = "###\ntarget: X5\nX17=0\nX92=0\nX13=0\nX52=1\nX24=1\nX26=1\nX91=0\nX36=0\nX34=0\nX12=1\nX20=0\nX5=1\n";
        assert_eq!(serialize_sample(&s), expected);
        assert_eq!(parse_sample(expected).unwrap(), s);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_sample("###\ntarget: X5\nX1=0\nX4=1\n"),
            Err(Error::TargetMismatch { .. })
        ));
        assert!(matches!(
            parse_sample("###\ntarget: X5\nhello\nX5=1\n"),
            Err(Error::MalformedLine { line: 3, .. })
        ));
        assert!(matches!(parse_sample("###\ntarget: X5\nX5=2\n"), Err(Error::MalformedLine { .. })));
        assert!(matches!(parse_sample("garbage\n"), Err(Error::MalformedLine { line: 1, .. })));
        assert!(matches!(parse_sample("###\ntarget: X5\n"), Err(Error::MalformedLine { .. })));
        assert!(parse_sample("###\ntarget: X5\nX5=1\nX5=1\n").is_err());
    }

    #[test]
    fn corpus_of_several_blocks() {
        let text = "###\ntarget: X2\nX1=0\nX2=1\n###\ntarget: X0\nX0=1\n";
        let samples = parse_corpus(text).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].target(), x(2));
        assert_eq!(samples[1].records(), &[(x(0), true)]);
        assert!(parse_corpus("").unwrap().is_empty());
    }

    fn arb_sample() -> impl Strategy<Value = Sample> {
        proptest::sample::subsequence((0u32..200).collect::<Vec<_>>(), 1..30)
            .prop_flat_map(|vars| {
                let n = vars.len();
                (Just(vars).prop_shuffle(), proptest::collection::vec(any::<bool>(), n))
            })
            .prop_map(|(vars, bits)| Sample::new(vars.into_iter().map(VariableId).zip(bits).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn round_trip(s in arb_sample()) {
            let text = serialize_sample(&s);
            prop_assert_eq!(parse_sample(&text).unwrap(), s);
        }
    }
}
