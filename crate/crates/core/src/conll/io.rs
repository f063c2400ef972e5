use super::{ConllError, Corpus, Label, Sentence, TagScheme, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separator {
    /// Any run of spaces or tabs on input; a single space on output.
    Whitespace,
    Tab,
}

/// Which columns hold the token, the label and (optionally) the OCR-error
/// flag. Unlisted columns are ignored on input and written as `_`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpec {
    pub token_column: usize,
    pub label_column: usize,
    /// Column holding `1`/`0`.
    pub flag_column: Option<usize>,
    pub separator: Separator,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            token_column: 0,
            label_column: 1,
            flag_column: None,
            separator: Separator::Whitespace,
        }
    }
}

impl ColumnSpec {
    pub fn with_flags(mut self) -> Self {
        self.flag_column = Some(self.token_column.max(self.label_column) + 1);
        self
    }

    fn width(&self) -> usize {
        self.token_column
            .max(self.label_column)
            .max(self.flag_column.unwrap_or(0))
            + 1
    }
}

/// Number of sentences and labels changed by repair mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairStats {
    pub sentences: usize,
    pub labels: usize,
}

/// Configurable CoNLL parser.
///
/// By default the scheme is inferred (first of IOB1, IOB2, IO that validates
/// every sentence) and invalid label sequences are an error. With
/// [`ConllReader::repair`] invalid sentences are coerced to the nearest valid
/// sequence instead, and the number of changes is reported.
#[derive(Debug, Clone)]
pub struct ConllReader {
    columns: ColumnSpec,
    scheme: Option<TagScheme>,
    repair: bool,
    language: String,
}

impl Default for ConllReader {
    fn default() -> Self {
        Self::new(ColumnSpec::default())
    }
}

impl ConllReader {
    pub fn new(columns: ColumnSpec) -> Self {
        ConllReader {
            columns,
            scheme: None,
            repair: false,
            language: String::from("und"),
        }
    }

    pub fn scheme(mut self, scheme: Option<TagScheme>) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn repair(mut self, repair: bool) -> Self {
        self.repair = repair;
        self
    }

    pub fn language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn parse(&self, text: &str) -> Result<(Corpus, RepairStats), ConllError> {
        let (mut sentences, starts) = self.read_sentences(text)?;
        let mut stats = RepairStats::default();

        let valid_under = |scheme: TagScheme, sentences: &[Sentence]| {
            sentences.iter().position(|s| !scheme.is_valid(&s.labels()))
        };

        let scheme = match self.scheme {
            Some(scheme) => {
                if let Some(bad) = valid_under(scheme, &sentences) {
                    if !self.repair {
                        return Err(ConllError::InvalidSequence {
                            line: starts[bad],
                            scheme,
                        });
                    }
                    stats = repair_all(scheme, &mut sentences);
                }
                scheme
            }
            None => {
                let detected = TagScheme::DETECTION_ORDER
                    .into_iter()
                    .find(|&s| valid_under(s, &sentences).is_none());
                match detected {
                    Some(s) => s,
                    None if self.repair => {
                        stats = repair_all(TagScheme::Iob1, &mut sentences);
                        TagScheme::Iob1
                    }
                    None => {
                        let bad = valid_under(TagScheme::Iob1, &sentences).unwrap_or(0);
                        return Err(ConllError::NoSchemeValidates { line: starts[bad] });
                    }
                }
            }
        };

        Ok((
            Corpus::new(sentences, scheme).with_language(self.language.clone()),
            stats,
        ))
    }

    fn read_sentences(&self, text: &str) -> Result<(Vec<Sentence>, Vec<usize>), ConllError> {
        let mut sentences = Vec::new();
        let mut starts = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        let mut start_line = 0;
        let width = self.columns.width();

        let mut flush = |current: &mut Vec<Token>, start_line: usize| {
            if !current.is_empty() {
                sentences.push(Sentence::new(std::mem::take(current)));
                starts.push(start_line);
            }
        };

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            if raw.trim().is_empty() {
                flush(&mut current, start_line);
                continue;
            }
            let fields: Vec<&str> = match self.columns.separator {
                Separator::Whitespace => raw.split_whitespace().collect(),
                Separator::Tab => raw.split('\t').collect(),
            };
            if fields.first() == Some(&"-DOCSTART-") {
                flush(&mut current, start_line);
                continue;
            }
            if fields.len() < width {
                return Err(ConllError::TooFewColumns {
                    line: line_no,
                    expected: width,
                    found: fields.len(),
                });
            }
            let label_str = fields[self.columns.label_column];
            let label: Label = label_str.parse().map_err(|_| ConllError::UnknownLabel {
                line: line_no,
                label: label_str.to_string(),
            })?;
            let mut token = Token::new(fields[self.columns.token_column], label)?;
            if let Some(col) = self.columns.flag_column {
                token.ocr_error = match fields[col] {
                    "1" => true,
                    "0" => false,
                    other => {
                        return Err(ConllError::InvalidFlag {
                            line: line_no,
                            value: other.to_string(),
                        })
                    }
                };
            }
            if current.is_empty() {
                start_line = line_no;
            }
            current.push(token);
        }
        flush(&mut current, start_line);
        Ok((sentences, starts))
    }
}

fn repair_all(scheme: TagScheme, sentences: &mut [Sentence]) -> RepairStats {
    let mut stats = RepairStats::default();
    for s in sentences {
        let mut labels = s.labels();
        let changed = scheme.repair(&mut labels);
        if changed > 0 {
            stats.sentences += 1;
            stats.labels += changed;
            for (t, l) in s.tokens.iter_mut().zip(labels) {
                t.label = l;
            }
        }
    }
    stats
}

/// Parses CoNLL text with scheme inference and strict validation.
pub fn parse_conll(text: &str, columns: &ColumnSpec) -> Result<Corpus, ConllError> {
    ConllReader::new(*columns).parse(text).map(|(c, _)| c)
}

/// Serializes `corpus`: one token per line, a blank line after each sentence.
pub fn write_conll(corpus: &Corpus, columns: &ColumnSpec) -> String {
    let sep = match columns.separator {
        Separator::Whitespace => " ",
        Separator::Tab => "\t",
    };
    let mut fields = vec![String::new(); columns.width()];
    let mut out = String::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            for f in fields.iter_mut() {
                f.clear();
                f.push('_');
            }
            fields[columns.token_column] = t.surface().to_string();
            fields[columns.label_column] = t.label.to_string();
            if let Some(col) = columns.flag_column {
                fields[col] = if t.ocr_error { "1" } else { "0" }.to_string();
            }
            out.push_str(&fields.join(sep));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::EntityType;

    #[test]
    fn parse_two_sentences() {
        let c = parse_conll("Paris I-LOC\n\nJan I-PER\n", &ColumnSpec::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.sentences.iter().all(|s| s.len() == 1));
        assert_eq!(c.sentences[1].tokens[0].label, Label::Inside(EntityType::Per));
        assert_eq!(c.scheme, TagScheme::Iob1);
    }

    #[test]
    fn parse_empty() {
        let c = parse_conll("", &ColumnSpec::default()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn missing_label_column() {
        let err = parse_conll("Paris", &ColumnSpec::default()).unwrap_err();
        assert!(matches!(err, ConllError::TooFewColumns { line: 1, .. }));
    }

    #[test]
    fn unknown_label() {
        let err = parse_conll("a O\nb X-PER\n", &ColumnSpec::default()).unwrap_err();
        assert_eq!(
            err,
            ConllError::UnknownLabel {
                line: 2,
                label: "X-PER".into()
            }
        );
    }

    #[test]
    fn detects_iob2() {
        let c = parse_conll("Jan B-PER\nde I-PER\nVries I-PER\n", &ColumnSpec::default()).unwrap();
        assert_eq!(c.scheme, TagScheme::Iob2);
    }

    #[test]
    fn rejects_mixed_schemes() {
        // B-PER at sentence start is not IOB1; O I-LOC is not IOB2; B- is not IO.
        let text = "Jan B-PER\n\nin O\nParis I-LOC\n";
        let err = parse_conll(text, &ColumnSpec::default()).unwrap_err();
        assert!(matches!(err, ConllError::NoSchemeValidates { .. }));
    }

    #[test]
    fn forced_scheme_and_repair() {
        let text = "Jan B-PER\nde I-PER\n";
        let strict = ConllReader::default().scheme(Some(TagScheme::Iob1)).parse(text);
        assert!(matches!(strict, Err(ConllError::InvalidSequence { line: 1, .. })));
        let (c, stats) = ConllReader::default()
            .scheme(Some(TagScheme::Iob1))
            .repair(true)
            .parse(text)
            .unwrap();
        assert_eq!(stats, RepairStats { sentences: 1, labels: 1 });
        assert_eq!(c.sentences[0].tokens[0].label, Label::Inside(EntityType::Per));
    }

    #[test]
    fn docstart_and_extra_columns() {
        let text = "-DOCSTART- -X- O O\n\nEU NNP B-NP I-ORG\nrejects VBZ B-VP O\n\n";
        let cols = ColumnSpec {
            token_column: 0,
            label_column: 3,
            flag_column: None,
            separator: Separator::Whitespace,
        };
        let c = parse_conll(text, &cols).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.token_count(), 2);
        assert_eq!(write_conll(&c, &cols), "EU _ _ I-ORG\nrejects _ _ O\n\n");
    }

    #[test]
    fn write_format() {
        let c = parse_conll("Paris I-LOC\n", &ColumnSpec::default()).unwrap();
        assert_eq!(write_conll(&c, &ColumnSpec::default()), "Paris I-LOC\n\n");
        let empty = Corpus::new(vec![], TagScheme::Iob1);
        assert_eq!(write_conll(&empty, &ColumnSpec::default()), "");
    }

    #[test]
    fn flag_column_round_trip() {
        let cols = ColumnSpec::default().with_flags();
        let text = "Amst I-LOC 1\nerdam I-LOC 1\nis O 0\n\n";
        let c = parse_conll(text, &cols).unwrap();
        assert!(c.sentences[0].tokens[0].ocr_error);
        assert!(!c.sentences[0].tokens[2].ocr_error);
        assert_eq!(write_conll(&c, &cols), text);
        assert!(matches!(
            parse_conll("a O x\n", &cols),
            Err(ConllError::InvalidFlag { line: 1, .. })
        ));
    }

    #[test]
    fn tab_separator_and_crlf() {
        let cols = ColumnSpec {
            separator: Separator::Tab,
            ..ColumnSpec::default()
        };
        let c = parse_conll("Den\tI-LOC\r\nHaag\tI-LOC\r\n\r\n", &cols).unwrap();
        assert_eq!(c.token_count(), 2);
        assert_eq!(write_conll(&c, &cols), "Den\tI-LOC\nHaag\tI-LOC\n\n");
    }
}
