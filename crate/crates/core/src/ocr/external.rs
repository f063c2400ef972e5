use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::OcrError;
use crate::conll::Corpus;

/// An external render+recognize command.
///
/// The command line is run through `sh -c`. It receives clean text (one
/// sentence per line) on stdin and must write the recognized text to stdout;
/// a nonzero exit status is a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalPipelineConfig {
    pub channel_command: String,
    pub batch_size_sentences: usize,
    pub timeout: Duration,
}

impl ExternalPipelineConfig {
    pub fn new(channel_command: impl Into<String>) -> Self {
        ExternalPipelineConfig {
            channel_command: channel_command.into(),
            batch_size_sentences: 150,
            timeout: Duration::from_secs(600),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalOcrOutput {
    pub text: String,
    pub invocations: usize,
    /// Batches whose command produced no output at all.
    pub empty_batches: Vec<usize>,
}

fn run_batch(config: &ExternalPipelineConfig, batch: usize, input: String) -> Result<String, OcrError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&config.channel_command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| OcrError::Spawn { batch, source })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    // A command that exits without reading stdin yields a broken pipe; its
    // exit status decides the outcome.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = Instant::now() + config.timeout;
    let status = loop {
        match child.try_wait().map_err(|source| OcrError::Spawn { batch, source })? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OcrError::Timeout {
                    batch,
                    seconds: config.timeout.as_secs_f64(),
                });
            }
            None => thread::sleep(Duration::from_millis(5)),
        }
    };
    let _ = writer.join();
    let out = reader
        .join()
        .expect("stdout reader")
        .map_err(|source| OcrError::Spawn { batch, source })?;
    let stderr = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(OcrError::CommandFailed {
            batch,
            status: status.to_string(),
            stderr: stderr.trim().to_string(),
        });
    }
    String::from_utf8(out).map_err(|_| OcrError::Encoding { batch })
}

/// Sends `corpus` through the external command in batches and concatenates
/// the recognized text in batch order. Batch indices in errors are 1-based.
pub fn external_ocr(corpus: &Corpus, config: &ExternalPipelineConfig) -> Result<ExternalOcrOutput, OcrError> {
    if config.batch_size_sentences == 0 {
        return Err(OcrError::BatchSize);
    }
    let mut output = ExternalOcrOutput {
        text: String::new(),
        invocations: 0,
        empty_batches: Vec::new(),
    };
    for (i, batch) in corpus.sentences.chunks(config.batch_size_sentences).enumerate() {
        let batch_no = i + 1;
        let mut input = String::new();
        for s in batch {
            input.push_str(&s.text());
            input.push('\n');
        }
        let text = run_batch(config, batch_no, input)?;
        output.invocations += 1;
        if text.is_empty() {
            log::warn!("batch {batch_no}: channel command produced no output");
            output.empty_batches.push(batch_no);
            continue;
        }
        output.text.push_str(&text);
        if !text.ends_with('\n') {
            output.text.push('\n');
        }
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::{Label, Sentence, TagScheme, Token};

    fn corpus(n: usize) -> Corpus {
        let sentences = (0..n)
            .map(|i| {
                Sentence::new(vec![
                    Token::new(format!("s{i}"), Label::Outside).unwrap(),
                    Token::new("word", Label::Outside).unwrap(),
                ])
            })
            .collect();
        Corpus::new(sentences, TagScheme::Iob1)
    }

    #[test]
    fn identity_command() {
        let c = corpus(7);
        let cfg = ExternalPipelineConfig {
            batch_size_sentences: 3,
            ..ExternalPipelineConfig::new("cat")
        };
        let out = external_ocr(&c, &cfg).unwrap();
        assert_eq!(out.text, c.plain_text());
        assert_eq!(out.invocations, 3);
        assert!(out.empty_batches.is_empty());
    }

    #[test]
    fn batches_of_150() {
        let c = corpus(300);
        let out = external_ocr(&c, &ExternalPipelineConfig::new("cat")).unwrap();
        assert_eq!(out.invocations, 2);
    }

    #[test]
    fn failure_names_batch() {
        let dir = tempfile::tempdir().unwrap();
        let counter = dir.path().join("n");
        // Fails on its second invocation.
        let cmd = format!(
            "n=$(cat {0} 2>/dev/null || echo 0); n=$((n+1)); echo $n > {0}; cat; [ $n -ne 2 ]",
            counter.display()
        );
        let cfg = ExternalPipelineConfig {
            batch_size_sentences: 2,
            ..ExternalPipelineConfig::new(cmd)
        };
        let err = external_ocr(&corpus(6), &cfg).unwrap_err();
        assert!(matches!(err, OcrError::CommandFailed { batch: 2, .. }), "{err}");
    }

    #[test]
    fn empty_output_is_kept_as_empty_batch() {
        let cfg = ExternalPipelineConfig {
            batch_size_sentences: 2,
            ..ExternalPipelineConfig::new("cat > /dev/null")
        };
        let out = external_ocr(&corpus(3), &cfg).unwrap();
        assert_eq!(out.text, "");
        assert_eq!(out.empty_batches, vec![1, 2]);
    }

    #[test]
    fn timeout() {
        let cfg = ExternalPipelineConfig {
            timeout: Duration::from_millis(100),
            ..ExternalPipelineConfig::new("sleep 5")
        };
        let err = external_ocr(&corpus(1), &cfg).unwrap_err();
        assert!(matches!(err, OcrError::Timeout { batch: 1, .. }));
    }

    #[test]
    fn zero_batch_size() {
        let cfg = ExternalPipelineConfig {
            batch_size_sentences: 0,
            ..ExternalPipelineConfig::new("cat")
        };
        assert!(matches!(external_ocr(&corpus(1), &cfg), Err(OcrError::BatchSize)));
    }
}
