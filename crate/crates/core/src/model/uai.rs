//! The `MARKOV` flavour of the UAI model format, restricted to factors of
//! arity at most two.
//!
//! Table values are read as energies (no log transform). Repeated factors over
//! the same scope are summed; a pairwise factor given as `v u` is transposed
//! onto an existing `u v` edge. Arity-0 factors add to the constant.

use std::fmt::Write as _;

use super::GraphicalModel;
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

struct Tokens<'a> {
    items: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut last_line = 1;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut col = 0;
            for piece in line.split(|c: char| c.is_whitespace()) {
                if !piece.is_empty() {
                    items.push(Token {
                        text: piece,
                        line: ln + 1,
                        column: col + 1,
                    });
                }
                col += piece.len() + 1;
            }
            last_line = ln + 1;
        }
        Tokens {
            items,
            pos: 0,
            end: (last_line, 1),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let (line, column) = match self.items.get(self.pos) {
            Some(t) => (t.line, t.column),
            None => self.end,
        };
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&Token<'a>> {
        if self.pos >= self.items.len() {
            return Err(self.error_here(format!("unexpected end of input, expected {what}")));
        }
        self.pos += 1;
        Ok(&self.items[self.pos - 1])
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let tok = self.next(what)?;
        let (line, column) = (tok.line, tok.column);
        tok.text.parse::<usize>().map_err(|_| Error::Parse {
            line,
            column,
            message: format!("expected {what}, found `{}`", tok.text),
        })
    }

    fn real(&mut self) -> Result<f64> {
        let tok = self.next("table value")?;
        match tok.text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::Parse {
                line: tok.line,
                column: tok.column,
                message: format!("expected a finite number, found `{}`", tok.text),
            }),
        }
    }
}

/// Parses a model from UAI `MARKOV` text.
pub fn parse_uai(text: &str) -> Result<GraphicalModel> {
    let mut toks = Tokens::new(text);
    let header = toks.next("header")?;
    if !header.text.eq_ignore_ascii_case("MARKOV") {
        let (line, column) = (header.line, header.column);
        return Err(Error::Parse {
            line,
            column,
            message: format!("expected header `MARKOV`, found `{}`", header.text),
        });
    }
    let n = toks.count("node count")?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let at = toks.pos;
        let k = toks.count("cardinality")?;
        if k == 0 {
            toks.pos = at;
            return Err(toks.error_here("cardinality must be at least 1"));
        }
        labels.push(k);
    }
    let nf = toks.count("factor count")?;
    let mut scopes = Vec::with_capacity(nf);
    for _ in 0..nf {
        let at = toks.pos;
        let arity = toks.count("factor arity")?;
        if arity > 2 {
            toks.pos = at;
            return Err(toks.error_here(format!("factor arity {arity} not supported (max 2)")));
        }
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let at = toks.pos;
            let v = toks.count("variable index")?;
            if v >= n {
                toks.pos = at;
                return Err(toks.error_here(format!("variable index {v} out of range 0..{n}")));
            }
            scope.push(v);
        }
        if arity == 2 && scope[0] == scope[1] {
            toks.pos = at;
            return Err(toks.error_here("pairwise factor over a single variable"));
        }
        scopes.push(scope);
    }

    let mut model =
        GraphicalModel::new(labels.clone()).map_err(|e| toks.error_here(e.to_string()))?;
    for scope in &scopes {
        let at = toks.pos;
        let len = toks.count("table size")?;
        let expected: usize = scope.iter().map(|&v| labels[v]).product();
        if len != expected {
            toks.pos = at;
            return Err(toks.error_here(format!(
                "table has {len} entries but its scope requires {expected}"
            )));
        }
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(toks.real()?);
        }
        match scope.as_slice() {
            [] => model.constant += values[0],
            [v] => {
                for (c, x) in model.unary[*v].iter_mut().zip(&values) {
                    *c += x;
                }
            }
            [a, b] => add_pairwise(&mut model, *a, *b, &values)?,
            _ => unreachable!(),
        }
    }
    if toks.pos < toks.items.len() {
        return Err(toks.error_here("trailing content after the last factor table"));
    }
    Ok(model)
}

fn add_pairwise(model: &mut GraphicalModel, a: usize, b: usize, values: &[f64]) -> Result<()> {
    let (ka, kb) = (model.labels[a], model.labels[b]);
    match model.find_edge(a, b) {
        None => {
            model.add_edge(a, b, values.to_vec())?;
        }
        Some(e) => {
            let forward = model.edges[e] == (a, b);
            for i in 0..ka {
                for j in 0..kb {
                    let x = values[i * kb + j];
                    let idx = if forward { i * kb + j } else { j * ka + i };
                    model.pairwise[e][idx] += x;
                }
            }
        }
    }
    Ok(())
}

/// Writes a model as UAI `MARKOV` text: one unary factor per node, one
/// pairwise factor per edge and an arity-0 factor when the constant is nonzero.
pub fn serialize_uai(model: &GraphicalModel) -> String {
    let mut out = String::new();
    let n = model.num_nodes();
    let with_const = model.constant != 0.0;
    out.push_str("MARKOV\n");
    let _ = writeln!(out, "{n}");
    let _ = writeln!(out, "{}", join(model.labels.iter()));
    let _ = writeln!(out, "{}", n + model.num_edges() + with_const as usize);
    for v in 0..n {
        let _ = writeln!(out, "1 {v}");
    }
    for &(u, v) in &model.edges {
        let _ = writeln!(out, "2 {u} {v}");
    }
    if with_const {
        out.push_str("0\n");
    }
    for v in 0..n {
        let _ = writeln!(
            out,
            "\n{}\n{}",
            model.labels[v],
            join(model.unary[v].iter())
        );
    }
    for e in 0..model.num_edges() {
        let _ = writeln!(
            out,
            "\n{}\n{}",
            model.pairwise[e].len(),
            join(model.pairwise[e].iter())
        );
    }
    if with_const {
        let _ = writeln!(out, "\n1\n{}", model.constant);
    }
    out
}

fn join<T: std::fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_grid, Family, GridSpec};

    #[test]
    fn minimal_single_node() {
        let m = parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n0.5 1.5\n").unwrap();
        assert_eq!(m.num_nodes(), 1);
        assert_eq!(m.unary(0), &[0.5, 1.5]);
        assert_eq!(m.num_edges(), 0);
    }

    #[test]
    fn comments_are_ignored() {
        let text = "# model\nMARKOV # header\n2\n2 2\n1\n2 0 1 # edge\n4\n1 2 # row 0\n3 4\n";
        let m = parse_uai(text).unwrap();
        assert_eq!(m.pairwise(0), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn ternary_factor_rejected_with_position() {
        let err = parse_uai("MARKOV\n3\n2 2 2\n1\n3 0 1 2\n8\n0 0 0 0 0 0 0 0\n").unwrap_err();
        match err {
            Error::Parse {
                line,
                column,
                message,
            } => {
                assert_eq!((line, column), (5, 1));
                assert!(message.contains("arity"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_uai("BAYES\n1\n2\n0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_uai("MARKOV\n1\n2\n1\n1 3\n2\n0 0\n"),
            Err(Error::Parse {
                line: 5,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_uai("MARKOV\n1\n2\n1\n1 0\n3\n0 0 0\n"),
            Err(Error::Parse { line: 6, .. })
        ));
        assert!(matches!(
            parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n0 x\n"),
            Err(Error::Parse {
                line: 7,
                column: 3,
                ..
            })
        ));
    }

    #[test]
    fn repeated_and_reversed_factors_merge() {
        let text = "MARKOV\n2\n2 3\n4\n2 0 1\n2 1 0\n1 0\n1 0\n6\n0 1 2 3 4 5\n6\n10 20 30 40 50 60\n2\n1 1\n2\n1 0\n";
        let m = parse_uai(text).unwrap();
        assert_eq!(m.num_edges(), 1);
        // reversed table (1,0) is 3x2 over (x1, x0): entry (j, i) at j*2+i
        assert_eq!(m.pair(0, 0, 0), 0.0 + 10.0);
        assert_eq!(m.pair(0, 1, 0), 3.0 + 20.0);
        assert_eq!(m.pair(0, 0, 2), 2.0 + 50.0);
        assert_eq!(m.unary(0), &[2.0, 1.0]);
    }

    #[test]
    fn grid_round_trip() {
        let spec = GridSpec {
            family: Family::Full,
            rows: 3,
            cols: 3,
            labels: 3,
            cost_range: (-5, 7),
            seed: 11,
        };
        let mut m = generate_grid(&spec).unwrap();
        m.set_constant(-2.5);
        let text = serialize_uai(&m);
        let back = parse_uai(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize_uai(&back), text);
    }
}
