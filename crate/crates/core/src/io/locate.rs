//! Maps a field path such as `sigma[1][0]` back to a line and column of the
//! JSON source, for diagnostics.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Key(String),
    Index(usize),
}

/// Parses `a.b[0][1].c` into segments. Unparseable pieces end the path.
pub fn parse_path(path: &str) -> Vec<Seg> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if !key.is_empty() {
            out.push(Seg::Key(key.to_string()));
        }
        while let Some(stripped) = rest.strip_prefix('[') {
            let Some(end) = stripped.find(']') else { return out };
            let Ok(i) = stripped[..end].parse() else { return out };
            out.push(Seg::Index(i));
            rest = &stripped[end + 1..];
        }
    }
    out
}

pub fn format_path(segs: &[Seg]) -> String {
    let mut s = String::new();
    for seg in segs {
        match seg {
            Seg::Key(k) if s.is_empty() => s.push_str(k),
            Seg::Key(k) => {
                s.push('.');
                s.push_str(k);
            }
            Seg::Index(i) => s.push_str(&format!("[{i}]")),
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

fn position(text: &[u8], offset: usize) -> Position {
    let before = &text[..offset.min(text.len())];
    let line = before.iter().filter(|&&c| c == b'\n').count() + 1;
    let column = offset - before.iter().rposition(|&c| c == b'\n').map_or(0, |p| p + 1) + 1;
    Position { line, column }
}

/// Position of the value at `path` in `text`, or of its deepest existing
/// ancestor. `text` is assumed to be valid JSON.
pub fn locate(text: &str, path: &[Seg]) -> Option<Position> {
    let mut s = Scanner { b: text.as_bytes(), pos: 0 };
    s.ws();
    if s.pos >= s.b.len() {
        return None;
    }
    Some(position(s.b, s.find(path)))
}

struct Scanner<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn ws(&mut self) {
        while self.b.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn at(&self) -> Option<u8> {
        self.b.get(self.pos).copied()
    }

    /// Returns the offset of the deepest value along `path`, starting from
    /// the value at the current position.
    fn find(&mut self, path: &[Seg]) -> usize {
        self.ws();
        let here = self.pos;
        let Some(first) = path.first() else { return here };
        match (self.at(), first) {
            (Some(b'{'), Seg::Key(want)) => {
                self.pos += 1;
                loop {
                    self.ws();
                    if self.at() != Some(b'"') {
                        return here;
                    }
                    let key = self.string();
                    self.ws();
                    if self.at() != Some(b':') {
                        return here;
                    }
                    self.pos += 1;
                    if key.as_deref() == Some(want.as_str()) {
                        return self.find(&path[1..]);
                    }
                    self.skip_value();
                    self.ws();
                    if self.at() != Some(b',') {
                        return here;
                    }
                    self.pos += 1;
                }
            }
            (Some(b'['), Seg::Index(want)) => {
                self.pos += 1;
                let mut i = 0;
                loop {
                    self.ws();
                    if self.at() == Some(b']') {
                        return here;
                    }
                    if i == *want {
                        return self.find(&path[1..]);
                    }
                    self.skip_value();
                    self.ws();
                    if self.at() != Some(b',') {
                        return here;
                    }
                    self.pos += 1;
                    i += 1;
                }
            }
            _ => here,
        }
    }

    /// Consumes a string literal and decodes it.
    fn string(&mut self) -> Option<String> {
        let start = self.pos;
        self.pos += 1;
        while let Some(c) = self.at() {
            self.pos += 1;
            match c {
                b'\\' => self.pos += 1,
                b'"' => break,
                _ => {}
            }
        }
        serde_json::from_slice(&self.b[start..self.pos.min(self.b.len())]).ok()
    }

    fn skip_value(&mut self) {
        self.ws();
        match self.at() {
            Some(b'"') => {
                self.string();
            }
            Some(open @ (b'{' | b'[')) => {
                let close = if open == b'{' { b'}' } else { b']' };
                self.pos += 1;
                loop {
                    self.ws();
                    match self.at() {
                        None => return,
                        Some(c) if c == close => {
                            self.pos += 1;
                            return;
                        }
                        Some(b',' | b':') => self.pos += 1,
                        Some(_) => self.skip_value(),
                    }
                }
            }
            Some(_) => {
                while self.at().is_some_and(|c| !matches!(c, b',' | b']' | b'}') && !c.is_ascii_whitespace()) {
                    self.pos += 1;
                }
            }
            None => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "kind": "general",
  "note": "a \"quoted\" [string]",
  "alpha": [1, 2],
  "sigma": [
    [0, 0.5],
    [0.25, {"x": [1, 2, 3]}]
  ]
}"#;

    fn at(path: &str) -> Option<(usize, usize)> {
        locate(DOC, &parse_path(path)).map(|p| (p.line, p.column))
    }

    #[test]
    fn path_round_trip() {
        let segs = parse_path("dynamics.couplings[3].gain");
        assert_eq!(
            segs,
            vec![Seg::Key("dynamics".into()), Seg::Key("couplings".into()), Seg::Index(3), Seg::Key("gain".into())]
        );
        assert_eq!(format_path(&segs), "dynamics.couplings[3].gain");
        assert_eq!(parse_path("sigma[1][0]"), vec![Seg::Key("sigma".into()), Seg::Index(1), Seg::Index(0)]);
    }

    #[test]
    fn locates_values() {
        assert_eq!(at(""), Some((1, 1)));
        assert_eq!(at("kind"), Some((2, 11)));
        assert_eq!(at("alpha[1]"), Some((4, 16)));
        assert_eq!(at("sigma[1][0]"), Some((7, 6)));
        assert_eq!(at("sigma[1][1].x[2]"), Some((7, 25)));
    }

    #[test]
    fn missing_paths_fall_back_to_ancestor() {
        assert_eq!(at("alpha[5]"), Some((4, 12)));
        assert_eq!(at("missing"), Some((1, 1)));
        assert_eq!(at("kind[0]"), Some((2, 11)));
    }
}
