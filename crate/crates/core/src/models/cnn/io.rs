//! Text format for trained CNNs:
//!
//! ```text
//! irony-cnn 1
//! arch <dim> <max_seq_len> <n_filters> <dropout> <seed>
//! widths <w> <w> ...
//! vocab <n> <sha256 of the vocabulary>
//! <lang><TAB><key>                      (n lines)
//! embedding                             (n + 2 rows of dim values)
//! filters <w>                           (per width: n_filters rows of
//!                                        w·dim weights followed by the bias)
//! dense                                 (2 rows: weights, then the bias)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Architecture, CnnModel, Vocab};
use crate::corpus::Lang;
use crate::models::{read_file, write_file, ModelError};

const MAGIC: &str = "irony-cnn 1";

fn push_row(out: &mut String, values: &[f64], tail: Option<f64>) {
    for (i, v) in values.iter().chain(tail.as_ref()).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

impl CnnModel {
    pub fn to_text(&self) -> String {
        let a = &self.arch;
        let mut out = format!("{MAGIC}\n");
        writeln!(
            out,
            "arch {} {} {} {} {}",
            a.dim, a.max_seq_len, a.n_filters, a.dropout, self.seed
        )
        .unwrap();
        let widths: Vec<String> = a.widths.iter().map(usize::to_string).collect();
        writeln!(out, "widths {}", widths.join(" ")).unwrap();
        writeln!(out, "vocab {} {}", self.vocab.len(), self.vocab.hash()).unwrap();
        for (l, k) in self.vocab.keys() {
            writeln!(out, "{}\t{k}", l.code()).unwrap();
        }
        out.push_str("embedding\n");
        for row in self.emb.chunks_exact(a.dim) {
            push_row(&mut out, row, None);
        }
        for (wi, &w) in a.widths.iter().enumerate() {
            writeln!(out, "filters {w}").unwrap();
            for (f, kernel) in self.filters[wi].chunks_exact(w * a.dim).enumerate() {
                push_row(&mut out, kernel, Some(self.filter_bias[wi][f]));
            }
        }
        out.push_str("dense\n");
        let total = a.total_filters();
        for c in 0..2 {
            push_row(
                &mut out,
                &self.dense[c * total..(c + 1) * total],
                Some(self.dense_bias[c]),
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CnnModel, ModelError> {
        let mut p = Parser {
            lines: text.lines().enumerate(),
            line: 0,
        };
        p.expect_exact(MAGIC)?;
        let arch = p.words("arch")?;
        if arch.len() != 5 {
            return Err(p.err("arch needs 5 values"));
        }
        let dim = p.int(&arch[0])?;
        let max_seq_len = p.int(&arch[1])?;
        let n_filters = p.int(&arch[2])?;
        let dropout = p.float(&arch[3])?;
        let seed = p.int(&arch[4])? as u64;
        let widths = p
            .words("widths")?
            .iter()
            .map(|w| p.int(w))
            .collect::<Result<Vec<_>, _>>()?;
        let vocab_head = p.words("vocab")?;
        if vocab_head.len() != 2 {
            return Err(p.err("vocab needs a count and a hash"));
        }
        let n_vocab = p.int(&vocab_head[0])?;
        let mut keys = Vec::with_capacity(n_vocab);
        for _ in 0..n_vocab {
            let line = p.next()?;
            let (l, k) = line
                .split_once('\t')
                .ok_or_else(|| p.err("expected lang<TAB>key"))?;
            let lang: Lang = l
                .parse()
                .map_err(|_| p.err(&format!("unknown language {l:?}")))?;
            keys.push((lang, k.to_owned()));
        }
        let vocab = Vocab::from_keys(keys);
        if vocab.len() != n_vocab {
            return Err(p.err("duplicate vocabulary entries"));
        }
        if vocab.hash() != vocab_head[1] {
            return Err(p.err("vocabulary hash mismatch"));
        }
        let arch = Architecture {
            dim,
            widths,
            n_filters,
            max_seq_len,
            dropout,
        };
        let mut m = CnnModel::zeros(vocab, arch)?;
        m.seed = seed;
        p.expect_exact("embedding")?;
        for r in 0..m.n_rows() {
            let row = p.floats(dim)?;
            m.emb[r * dim..(r + 1) * dim].copy_from_slice(&row);
        }
        for wi in 0..m.arch.widths.len() {
            let w = m.arch.widths[wi];
            p.expect_exact(&format!("filters {w}"))?;
            let span = w * dim;
            for f in 0..n_filters {
                let row = p.floats(span + 1)?;
                m.filters[wi][f * span..(f + 1) * span].copy_from_slice(&row[..span]);
                m.filter_bias[wi][f] = row[span];
            }
        }
        p.expect_exact("dense")?;
        let total = m.arch.total_filters();
        for c in 0..2 {
            let row = p.floats(total + 1)?;
            m.dense[c * total..(c + 1) * total].copy_from_slice(&row[..total]);
            m.dense_bias[c] = row[total];
        }
        if m.emb[..dim].iter().any(|&v| v != 0.0) {
            return Err(p.err("padding row must be zero"));
        }
        if let Some(g) = m.all_finite() {
            return Err(p.err(&format!("non-finite value in {g}")));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        write_file(path.as_ref(), &self.to_text())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CnnModel, ModelError> {
        CnnModel::from_text(&read_file(path.as_ref())?)
    }
}

struct Parser<'a, I: Iterator<Item = (usize, &'a str)>> {
    lines: I,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Parser<'a, I> {
    fn err(&self, message: &str) -> ModelError {
        ModelError::Parse {
            line: self.line,
            message: message.to_owned(),
        }
    }

    fn next(&mut self) -> Result<&'a str, ModelError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn expect_exact(&mut self, want: &str) -> Result<(), ModelError> {
        let l = self.next()?;
        if l != want {
            return Err(self.err(&format!("expected {want:?}, found {l:?}")));
        }
        Ok(())
    }

    fn words(&mut self, tag: &str) -> Result<Vec<String>, ModelError> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(tag) {
            return Err(self.err(&format!("expected a {tag} line")));
        }
        Ok(it.map(str::to_owned).collect())
    }

    fn int(&self, s: &str) -> Result<usize, ModelError> {
        s.parse()
            .map_err(|_| self.err(&format!("bad integer {s:?}")))
    }

    fn float(&self, s: &str) -> Result<f64, ModelError> {
        s.parse()
            .map_err(|_| self.err(&format!("bad number {s:?}")))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>, ModelError> {
        let l = self.next()?;
        let v = l
            .split_whitespace()
            .map(|s| self.float(s))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != n {
            return Err(self.err(&format!("expected {n} values, found {}", v.len())));
        }
        Ok(v)
    }
}
