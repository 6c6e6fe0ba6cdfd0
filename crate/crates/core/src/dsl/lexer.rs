use super::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Decimal literal kept as source text.
    Number(String),
    Str(String),
    Sym(&'static str),
    /// End of statement: newline or `;`.
    End,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

const SYMBOLS: [&str; 18] = [
    "<=", ">=", "==", "!=", "(", ")", "{", "}", "[", "]", ",", ":", ".", "=", "<", ">", "-", ";",
];

pub(crate) fn tokenize(src: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    for (li, line) in src.split('\n').enumerate() {
        let line_no = li + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let col_of = |idx: usize| idx + 1;
        let mut i = 0;
        while i < chars.len() {
            let (b, c) = chars[i];
            let span_at = |at: usize, len: usize| SourceSpan::new(line_no, col_of(at), len);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
                toks.push(Token {
                    tok: Tok::Ident(text),
                    span: SourceSpan::new(line_no, col_of(start), i - start),
                });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i].1 == '.' && chars[i + 1].1.is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
                toks.push(Token {
                    tok: Tok::Number(text),
                    span: SourceSpan::new(line_no, col_of(start), i - start),
                });
                continue;
            }
            if c == '"' {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].1 != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    diags.push(ParseDiagnostic::error("unterminated string", span_at(start, chars.len() - start)));
                    break;
                }
                let text: String = chars[start + 1..i].iter().map(|(_, c)| c).collect();
                i += 1;
                toks.push(Token {
                    tok: Tok::Str(text),
                    span: SourceSpan::new(line_no, col_of(start), i - start),
                });
                continue;
            }
            let rest = &line[b..];
            if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                let tok = if *sym == ";" { Tok::End } else { Tok::Sym(sym) };
                toks.push(Token {
                    tok,
                    span: span_at(i, sym.len()),
                });
                i += sym.len();
                continue;
            }
            diags.push(ParseDiagnostic::error(format!("unexpected character `{c}`"), span_at(i, 1)));
            i += 1;
        }
        // statement terminator at end of line, spanning nothing past the text
        toks.push(Token {
            tok: Tok::End,
            span: SourceSpan::new(line_no, col_of(chars.len()).max(1), 0),
        });
    }
    (toks, diags)
}
