//! Line-based checkpoint format.
//!
//! ```text
//! fairtrip-checkpoint 1
//! vocab_hash <hex sha-256>
//! dim <d>
//! vocab <n>
//! <one token per line, n lines, reserved tokens included>
//! block <name> <rows> <cols>
//! <rows lines of space-separated values>
//! ...
//! end
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so load(save(m))
//! is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::model::{EncoderParams, LmHeadParams, Matrix, ToyModel, BLOCK_NAMES};
use super::vocab::Vocab;
use crate::error::{read_file, Error, Result};

const MAGIC: &str = "fairtrip-checkpoint 1";

impl ToyModel {
    pub fn to_checkpoint_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "vocab_hash {}", self.vocab.hash());
        let _ = writeln!(s, "dim {}", self.dim());
        let _ = writeln!(s, "vocab {}", self.vocab_size());
        for id in 0..self.vocab_size() {
            let _ = writeln!(s, "{}", self.vocab.token(id).unwrap_or_default());
        }
        let shapes = self.block_shapes();
        for ((name, data), (rows, cols)) in self.blocks().into_iter().zip(shapes) {
            let _ = writeln!(s, "block {name} {rows} {cols}");
            for r in 0..rows {
                let row = &data[r * cols..(r + 1) * cols];
                let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(s, "{}", line.join(" "));
            }
        }
        s.push_str("end\n");
        s
    }

    fn block_shapes(&self) -> [(usize, usize); 5] {
        let (v, d) = (self.vocab_size(), self.dim());
        [(v, d), (d, d), (1, d), (d, v), (1, v)]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_checkpoint_string()).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_checkpoint_str(&read_file(path)?)
    }

    /// Parses a checkpoint, failing with [`Error::VocabMismatch`] when the
    /// stored vocabulary does not hash to the recorded value.
    pub fn from_checkpoint_str(content: &str) -> Result<Self> {
        let mut lines = content.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Line {
                line: 0,
                message: format!("unexpected end of checkpoint, expected {what}"),
            })
        };
        let (ln, magic) = next("header")?;
        if magic != MAGIC {
            return Err(Error::Line {
                line: ln,
                message: format!("not a checkpoint (header `{magic}`)"),
            });
        }
        let field = |(ln, l): (usize, &str), key: &str| -> Result<String> {
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::Line {
                    line: ln,
                    message: format!("expected `{key} ...`"),
                })
        };
        let int = |ln: usize, s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Line {
                line: ln,
                message: format!("bad integer `{s}`"),
            })
        };
        let hash_line = next("vocab_hash")?;
        let recorded_hash = field(hash_line, "vocab_hash")?;
        let dim_line = next("dim")?;
        let dim = int(dim_line.0, &field(dim_line, "dim")?)?;
        let vl = next("vocab")?;
        let vsize = int(vl.0, &field(vl, "vocab")?)?;
        let mut tokens = Vec::with_capacity(vsize);
        for _ in 0..vsize {
            tokens.push(next("vocab token")?.1.to_string());
        }
        if tokens.len() < 3 {
            return Err(Error::Validation("checkpoint vocabulary lacks reserved tokens".into()));
        }
        let vocab = Vocab::from_tokens(tokens[3..].iter().cloned());
        if vocab.len() != vsize {
            return Err(Error::Validation("checkpoint vocabulary has duplicate tokens".into()));
        }
        let found = vocab.hash();
        if found != recorded_hash {
            return Err(Error::VocabMismatch {
                expected: recorded_hash,
                found,
            });
        }

        let (v, d) = (vsize, dim);
        let shapes = [(v, d), (d, d), (1, d), (d, v), (1, v)];
        let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(5);
        for (name, (rows, cols)) in BLOCK_NAMES.iter().zip(shapes) {
            let (ln, header) = next("block header")?;
            let expect = format!("block {name} {rows} {cols}");
            if header != expect {
                return Err(Error::Line {
                    line: ln,
                    message: format!("expected `{expect}`, got `{header}`"),
                });
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (ln, row) = next("block row")?;
                let before = data.len();
                for tok in row.split_ascii_whitespace() {
                    let x: f64 = tok.parse().map_err(|_| Error::Line {
                        line: ln,
                        message: format!("bad value `{tok}`"),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::Line {
                            line: ln,
                            message: "non-finite parameter".into(),
                        });
                    }
                    data.push(x);
                }
                if data.len() - before != cols {
                    return Err(Error::Line {
                        line: ln,
                        message: format!("expected {cols} values"),
                    });
                }
            }
            blocks.push(data);
        }
        let (ln, end) = next("end")?;
        if end != "end" {
            return Err(Error::Line {
                line: ln,
                message: "missing `end`".into(),
            });
        }
        let mut it = blocks.into_iter();
        let mut take = |rows, cols| Matrix {
            rows,
            cols,
            data: it.next().expect("five blocks"),
        };
        let embedding = take(v, d);
        let proj = take(d, d);
        let bias = take(1, d).data;
        let out = take(d, v);
        let head_bias = take(1, v).data;
        Ok(ToyModel {
            vocab,
            encoder: EncoderParams {
                embedding,
                proj,
                bias,
            },
            head: LmHeadParams {
                out,
                bias: head_bias,
            },
        })
    }
}
