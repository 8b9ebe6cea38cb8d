//! Operation sequences for replay: one op per line, `i <key>` or `d <key>`,
//! `#` starts a comment.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;
use wbtree::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Insert(i64),
    Delete(i64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpSequence {
    pub ops: Vec<Op>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl FromStr for OpSequence {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut ops = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ParseError { line: i + 1, msg };
            let mut parts = line.split_whitespace();
            let (Some(op), Some(key), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err(format!(
                    "expected `i <key>` or `d <key>`, got `{line}`"
                )));
            };
            let key: i64 = key.parse().map_err(|_| err(format!("bad key `{key}`")))?;
            ops.push(match op {
                "i" => Op::Insert(key),
                "d" => Op::Delete(key),
                other => return Err(err(format!("unknown op `{other}`"))),
            });
        }
        Ok(OpSequence { ops })
    }
}

impl fmt::Display for OpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::with_capacity(self.ops.len() * 12);
        for op in &self.ops {
            let _ = match op {
                Op::Insert(k) => writeln!(out, "i {k}"),
                Op::Delete(k) => writeln!(out, "d {k}"),
            };
        }
        f.write_str(&out)
    }
}

impl OpSequence {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Inserts all of `keys[..base]`, then `churn` steps that each either
    /// insert the next fresh key or delete a random present key. One in
    /// sixteen deletes targets a key that was never inserted.
    pub fn mixed(keys: &[i64], base: usize, seed: u64) -> Self {
        let base = base.min(keys.len());
        let mut rng = SplitMix64::new(seed);
        let mut present: Vec<i64> = keys[..base].to_vec();
        let mut ops: Vec<Op> = present.iter().map(|&k| Op::Insert(k)).collect();
        for &k in &keys[base..] {
            if present.is_empty() || rng.below(2) == 0 {
                ops.push(Op::Insert(k));
                present.push(k);
            } else if rng.below(16) == 0 {
                ops.push(Op::Delete(-1 - rng.below(1 << 20) as i64));
            } else {
                let i = rng.below(present.len() as u64) as usize;
                ops.push(Op::Delete(present.swap_remove(i)));
            }
        }
        OpSequence { ops }
    }
}
